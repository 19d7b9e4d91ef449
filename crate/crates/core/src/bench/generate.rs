//! Benchmark assembly: mutation positives plus stratified negatives.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mutate::{mutate, MutationOp};
use super::synth::layout_edit;
use crate::classify::CloneType;
use crate::corpus::{Corpus, SkillRecord};
use crate::encoder::{IndexConfig, SkillIndex};
use crate::error::{Error, Result};
use crate::fusion::{build_profile, Difficulty, LabeledPair, PairSource};
use crate::parser::{parse_skill, SkillDocument};
use crate::seed;

/// Operator name recorded for synthesized layout-only forks.
pub const LAYOUT_FORK: &str = "layout_fork";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchCounts {
    pub per_type: BTreeMap<CloneType, usize>,
    pub easy_negatives: usize,
    pub hard_negatives: usize,
}

impl BenchCounts {
    pub fn new(t1: usize, t2: usize, t3: usize, t4: usize, easy: usize, hard: usize) -> Self {
        BenchCounts {
            per_type: [(CloneType::T1, t1), (CloneType::T2, t2), (CloneType::T3, t3), (CloneType::T4, t4)]
                .into_iter()
                .collect(),
            easy_negatives: easy,
            hard_negatives: hard,
        }
    }

    pub fn positives(&self) -> usize {
        self.per_type.values().sum()
    }

    pub fn negatives(&self) -> usize {
        self.easy_negatives + self.hard_negatives
    }
}

impl Default for BenchCounts {
    fn default() -> Self {
        BenchCounts::new(30, 30, 60, 30, 50, 100)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardBand {
    pub low: f64,
    pub high: f64,
}

impl Default for HardBand {
    fn default() -> Self {
        HardBand { low: 0.15, high: 0.45 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateOptions {
    pub counts: BenchCounts,
    pub seed: u64,
    pub band: HardBand,
    /// Configuration of the provisional index used to measure the band.
    pub index: IndexConfig,
}

/// Augmented corpus plus labelled pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    pub records: Vec<SkillRecord>,
    pub pairs: Vec<LabeledPair>,
    /// `(seed id, operator, reason)` for every skipped application.
    pub skipped: Vec<(String, String, String)>,
}

impl Benchmark {
    /// Distinct original skills behind the mutation positives.
    pub fn seed_skills(&self) -> usize {
        self.pairs
            .iter()
            .filter(|p| p.source == PairSource::Mutation)
            .map(|p| p.id_a.as_str())
            .collect::<HashSet<_>>()
            .len()
    }
}

fn category_of(doc: &SkillDocument) -> String {
    if !doc.record.category.is_empty() {
        return doc.record.category.clone();
    }
    doc.yaml.get("category").map(|v| v.text()).unwrap_or_default()
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

struct Builder<'a> {
    docs: &'a [SkillDocument],
    rng: rand_chacha::ChaCha8Rng,
    seed: u64,
    records: Vec<SkillRecord>,
    pairs: Vec<LabeledPair>,
    skipped: Vec<(String, String, String)>,
    used_ids: HashSet<String>,
    related: HashSet<(usize, usize)>,
    order: Vec<usize>,
    cursor: usize,
}

impl Builder<'_> {
    fn fresh_id(&mut self, base: &str, tag: &str) -> String {
        let mut n = 0;
        loop {
            let id = format!("{base}~{tag}{}", if n == 0 { String::new() } else { format!(".{n}") });
            if self.used_ids.insert(id.clone()) {
                return id;
            }
            n += 1;
        }
    }

    fn add_variant(&mut self, source: usize, text: String, tag: &str, clone_type: CloneType, pair_source: PairSource, operator: &str) {
        let docs = self.docs;
        let original = &docs[source].record;
        let id = self.fresh_id(&original.id, tag);
        self.records.push(SkillRecord::new(
            id.clone(),
            original.author.clone(),
            original.name.clone(),
            original.category.clone(),
            text,
        ));
        self.pairs.push(LabeledPair {
            id_a: original.id.clone(),
            id_b: id,
            label: true,
            clone_type: Some(clone_type),
            difficulty: Difficulty::Easy,
            source: pair_source,
            operator: Some(operator.to_string()),
        });
    }

    /// Applies `op` to the next applicable seed in rotation.
    fn positive(&mut self, op: Option<MutationOp>, slot: usize) -> Result<()> {
        let docs = self.docs;
        let n = docs.len();
        for _ in 0..n {
            let source = self.order[self.cursor % n];
            self.cursor += 1;
            let doc = &docs[source];
            let stream = seed::derive(self.seed, &format!("{}/{slot}", doc.record.id));
            let Some(op) = op else {
                let mut rng = seed::rng(stream);
                let text = layout_edit(&doc.record.raw_text, &mut rng);
                self.add_variant(source, text, "fork", CloneType::T1, PairSource::Fork, LAYOUT_FORK);
                return Ok(());
            };
            let partner = if op.needs_partner() && n > 1 {
                let k = (source + self.rng.random_range(1..n)) % n;
                Some(&docs[k])
            } else {
                None
            };
            match mutate(doc, op, stream, partner) {
                Ok(m) => {
                    self.add_variant(source, m.text, &op.code().to_ascii_lowercase(), m.clone_type, PairSource::Mutation, op.code());
                    return Ok(());
                }
                Err(skip) => {
                    log::debug!("skipping {} on {}: {skip}", op.code(), doc.record.id);
                    self.skipped.push((doc.record.id.clone(), op.code().to_string(), skip.0));
                }
            }
        }
        Err(Error::Shortfall {
            what: format!("seed skills applicable to {}", op.map_or(LAYOUT_FORK, MutationOp::code)),
            requested: 1,
            achievable: 0,
        })
    }

    fn negative(&mut self, i: usize, j: usize, difficulty: Difficulty, source: PairSource) {
        let (i, j) = ordered(i, j);
        self.related.insert((i, j));
        self.pairs.push(LabeledPair {
            id_a: self.docs[i].record.id.clone(),
            id_b: self.docs[j].record.id.clone(),
            label: false,
            clone_type: None,
            difficulty,
            source,
            operator: None,
        });
    }
}

/// Builds a benchmark over `corpus`. `forks` are pre-verified positive pairs
/// between corpus skills; they count toward their type before any synthesis.
pub fn generate_benchmark(corpus: &Corpus, forks: &[LabeledPair], options: &GenerateOptions) -> Result<Benchmark> {
    let docs: Vec<SkillDocument> = corpus.records().iter().cloned().map(parse_skill).collect();
    if docs.len() < 2 {
        return Err(Error::Shortfall {
            what: "corpus skills".into(),
            requested: 2,
            achievable: docs.len(),
        });
    }
    let position: HashMap<&str, usize> = docs.iter().enumerate().map(|(k, d)| (d.id(), k)).collect();
    let mut rng = seed::stream_rng(options.seed, "bench/order");
    let mut order: Vec<usize> = (0..docs.len()).collect();
    order.shuffle(&mut rng);

    let mut builder = Builder {
        docs: &docs,
        rng,
        seed: options.seed,
        records: corpus.records().to_vec(),
        pairs: Vec::new(),
        skipped: Vec::new(),
        used_ids: corpus.records().iter().map(|r| r.id.clone()).collect(),
        related: HashSet::new(),
        order,
        cursor: 0,
    };

    // Identical content and known forks never serve as negatives.
    for ids in corpus.by_hash().values() {
        for a in ids {
            for b in ids {
                if a < b {
                    builder.related.insert(ordered(position[a.as_str()], position[b.as_str()]));
                }
            }
        }
    }

    for (&clone_type, &count) in &options.counts.per_type {
        let mut remaining = count;
        for fork in forks.iter().filter(|f| f.label && f.clone_type == Some(clone_type)) {
            if remaining == 0 {
                break;
            }
            let (a, b) = (
                *position.get(fork.id_a.as_str()).ok_or_else(|| Error::UnknownId(fork.id_a.clone()))?,
                *position.get(fork.id_b.as_str()).ok_or_else(|| Error::UnknownId(fork.id_b.clone()))?,
            );
            builder.related.insert(ordered(a, b));
            builder.pairs.push(LabeledPair {
                source: PairSource::Fork,
                difficulty: Difficulty::Easy,
                ..fork.clone()
            });
            remaining -= 1;
        }
        let ops = MutationOp::for_type(clone_type);
        for slot in 0..remaining {
            let op = if ops.is_empty() { None } else { Some(ops[slot % ops.len()]) };
            builder.positive(op, slot).map_err(|e| match e {
                Error::Shortfall { what, .. } => Error::Shortfall {
                    what,
                    requested: count,
                    achievable: count - remaining + slot,
                },
                other => other,
            })?;
        }
    }

    let categories: Vec<String> = docs.iter().map(category_of).collect();
    easy_negatives(&mut builder, &categories, options.counts.easy_negatives)?;
    hard_negatives(&mut builder, &categories, options)?;

    Ok(Benchmark {
        records: builder.records,
        pairs: builder.pairs,
        skipped: builder.skipped,
    })
}

fn easy_negatives(builder: &mut Builder, categories: &[String], requested: usize) -> Result<()> {
    let n = categories.len();
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if categories[i] != categories[j] && !builder.related.contains(&(i, j)) {
                candidates.push((i, j));
            }
        }
    }
    if candidates.len() < requested {
        return Err(Error::Shortfall {
            what: "cross-category negative pairs".into(),
            requested,
            achievable: candidates.len(),
        });
    }
    let chosen: Vec<(usize, usize)> = candidates.choose_multiple(&mut builder.rng, requested).copied().collect();
    for (i, j) in chosen {
        builder.negative(i, j, Difficulty::Easy, PairSource::CrossCategory);
    }
    Ok(())
}

fn hard_negatives(builder: &mut Builder, categories: &[String], options: &GenerateOptions) -> Result<()> {
    let requested = options.counts.hard_negatives;
    if requested == 0 {
        return Ok(());
    }
    let n = categories.len();
    let mut same: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if categories[i] == categories[j] && !builder.related.contains(&(i, j)) {
                same.push((i, j));
            }
        }
    }
    let index = SkillIndex::fit(builder.docs, options.index)?;
    let band = options.band;
    let in_band: Vec<(usize, usize)> = same
        .par_iter()
        .map(|&(i, j)| build_profile(&index, i, j).map(|p| ((i, j), p.mean_present())))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|(_, s)| *s >= band.low && *s <= band.high)
        .map(|(pair, _)| pair)
        .collect();
    if in_band.len() < requested {
        return Err(Error::Shortfall {
            what: format!("same-category pairs with similarity in [{}, {}]", band.low, band.high),
            requested,
            achievable: in_band.len(),
        });
    }
    let chosen: Vec<(usize, usize)> = in_band.choose_multiple(&mut builder.rng, requested).copied().collect();
    for (i, j) in chosen {
        builder.negative(i, j, Difficulty::Hard, PairSource::SameCategory);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::synth::{generate, SynthConfig};

    fn corpus(n: usize) -> Corpus {
        let synth = generate(&SynthConfig {
            n_skills: n,
            fork_rate: 0.0,
            duplicate_rate: 0.0,
            seed: 2,
            ..Default::default()
        })
        .unwrap();
        Corpus::from_records(synth.records).unwrap()
    }

    fn options(counts: BenchCounts, seed: u64) -> GenerateOptions {
        GenerateOptions {
            counts,
            seed,
            band: HardBand::default(),
            index: IndexConfig { dim: 64, ..IndexConfig::default() },
        }
    }

    #[test]
    fn composition_matches_request() {
        let c = corpus(120);
        let counts = BenchCounts::new(10, 10, 20, 10, 20, 30);
        let bench = generate_benchmark(&c, &[], &options(counts.clone(), 1)).unwrap();
        let positives = bench.pairs.iter().filter(|p| p.label).count();
        assert_eq!(positives, counts.positives());
        for (t, n) in &counts.per_type {
            assert_eq!(bench.pairs.iter().filter(|p| p.clone_type == Some(*t)).count(), *n);
        }
        let easy = bench.pairs.iter().filter(|p| !p.label && p.difficulty == Difficulty::Easy).count();
        let hard = bench.pairs.iter().filter(|p| !p.label && p.difficulty == Difficulty::Hard).count();
        assert_eq!((easy, hard), (20, 30));
        let keys: HashSet<_> = bench.pairs.iter().map(LabeledPair::key).collect();
        assert_eq!(keys.len(), bench.pairs.len());
        assert_eq!(bench.records.len(), 120 + positives);
        // Every operator contributes.
        let ops: HashSet<_> = bench.pairs.iter().filter_map(|p| p.operator.clone()).collect();
        assert_eq!(ops.len(), 8);
        for p in &bench.pairs {
            p.validate().unwrap();
        }
    }

    #[test]
    fn same_seed_same_benchmark() {
        let c = corpus(60);
        let counts = BenchCounts::new(3, 3, 8, 4, 10, 5);
        let a = generate_benchmark(&c, &[], &options(counts.clone(), 4)).unwrap();
        let b = generate_benchmark(&c, &[], &options(counts.clone(), 4)).unwrap();
        assert_eq!(a, b);
        let other = generate_benchmark(&c, &[], &options(counts, 5)).unwrap();
        assert_ne!(a.pairs, other.pairs);
    }

    #[test]
    fn oversized_requests_report_shortfall() {
        let c = corpus(30);
        let err = generate_benchmark(&c, &[], &options(BenchCounts::new(1, 1, 1, 1, 5, 10_000), 0)).unwrap_err();
        match err {
            Error::Shortfall { requested, achievable, .. } => {
                assert_eq!(requested, 10_000);
                assert!(achievable < requested);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            generate_benchmark(&c, &[], &options(BenchCounts::new(0, 0, 0, 0, 100_000, 0), 0)),
            Err(Error::Shortfall { .. })
        ));
    }

    #[test]
    fn hard_negatives_fall_in_band() {
        let c = corpus(90);
        let opts = options(BenchCounts::new(0, 0, 0, 0, 0, 15), 3);
        let bench = generate_benchmark(&c, &[], &opts).unwrap();
        let docs: Vec<SkillDocument> = c.records().iter().cloned().map(parse_skill).collect();
        let index = SkillIndex::fit(&docs, opts.index).unwrap();
        for p in &bench.pairs {
            let s = build_profile(&index, index.require(&p.id_a).unwrap(), index.require(&p.id_b).unwrap())
                .unwrap()
                .mean_present();
            assert!((0.15..=0.45).contains(&s), "{s}");
            assert_eq!(c.get(&p.id_a).unwrap().category, c.get(&p.id_b).unwrap().category);
        }
    }

    #[test]
    fn supplied_forks_are_used_first() {
        let c = corpus(40);
        let ids: Vec<String> = c.records().iter().map(|r| r.id.clone()).collect();
        let fork = LabeledPair {
            id_a: ids[0].clone(),
            id_b: ids[1].clone(),
            label: true,
            clone_type: Some(CloneType::T1),
            difficulty: Difficulty::Easy,
            source: PairSource::Fork,
            operator: None,
        };
        let bench = generate_benchmark(&c, std::slice::from_ref(&fork), &options(BenchCounts::new(2, 0, 0, 0, 3, 0), 0)).unwrap();
        assert_eq!(bench.pairs[0], fork);
        assert_eq!(bench.pairs[1].operator.as_deref(), Some(LAYOUT_FORK));
        assert!(bench.pairs.iter().filter(|p| !p.label).all(|p| p.key() != fork.key()));
    }
}
