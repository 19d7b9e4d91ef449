//! Clone-type assignment for accepted pairs.
//!
//! Three predicates over the channels present in both skills are evaluated in
//! a fixed order:
//!
//! 1. near-identical: every present channel is at least `tau1` → T1
//! 2. uniform: present channels agree within `delta` → T2
//! 3. NL/code split: NL at least `tau2` while code is below it or absent → T4
//! 4. otherwise → T3

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::SimilarityProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CloneType {
    T1 = 1,
    T2 = 2,
    T3 = 3,
    T4 = 4,
}

impl CloneType {
    pub const ALL: [CloneType; 4] = [CloneType::T1, CloneType::T2, CloneType::T3, CloneType::T4];

    pub fn name(self) -> &'static str {
        match self {
            CloneType::T1 => "T1",
            CloneType::T2 => "T2",
            CloneType::T3 => "T3",
            CloneType::T4 => "T4",
        }
    }
}

impl std::fmt::Display for CloneType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CloneType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "T1" | "TYPE-1" | "1" => Ok(CloneType::T1),
            "T2" | "TYPE-2" | "2" => Ok(CloneType::T2),
            "T3" | "TYPE-3" | "3" => Ok(CloneType::T3),
            "T4" | "TYPE-4" | "4" => Ok(CloneType::T4),
            other => Err(Error::Argument(format!("unknown clone type `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeThresholds {
    pub tau1: f64,
    pub delta: f64,
    pub tau2: f64,
}

impl Default for TypeThresholds {
    fn default() -> Self {
        TypeThresholds {
            tau1: 0.90,
            delta: 0.20,
            tau2: 0.50,
        }
    }
}

impl TypeThresholds {
    pub fn new(tau1: f64, delta: f64, tau2: f64) -> Result<Self> {
        let t = TypeThresholds { tau1, delta, tau2 };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.tau2 && self.tau2 <= self.tau1 && self.tau1 <= 1.0) {
            return Err(Error::Argument(format!(
                "type thresholds need 0 < tau2 <= tau1 <= 1 (tau1 = {}, tau2 = {})",
                self.tau1, self.tau2
            )));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::Argument(format!("delta {} outside [0, 1]", self.delta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    NearIdentical,
    Uniform,
    NlCodeSplit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateOutcome {
    pub predicate: Predicate,
    pub fired: bool,
}

/// The assigned type with the evaluated predicates in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub clone_type: CloneType,
    pub trace: Vec<PredicateOutcome>,
    pub present_channels: usize,
    /// Exactly one channel was present, so the uniformity test is trivial.
    pub single_channel: bool,
}

pub fn classify(profile: &SimilarityProfile, thresholds: &TypeThresholds) -> Result<Classification> {
    let present: Vec<f64> = profile.channels().iter().filter(|c| c.1).map(|c| c.0).collect();
    if present.is_empty() {
        return Err(Error::Classification("no channel is present in both skills".into()));
    }
    let min = present.iter().copied().fold(f64::INFINITY, f64::min);
    let max = present.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut trace = Vec::with_capacity(3);
    let mut record = |predicate, fired| {
        trace.push(PredicateOutcome { predicate, fired });
        fired
    };
    let clone_type = if record(Predicate::NearIdentical, min >= thresholds.tau1) {
        CloneType::T1
    } else if record(Predicate::Uniform, max - min <= thresholds.delta) {
        CloneType::T2
    } else if record(
        Predicate::NlCodeSplit,
        profile.p_n && profile.s_n >= thresholds.tau2 && (!profile.p_c || profile.s_c < thresholds.tau2),
    ) {
        CloneType::T4
    } else {
        CloneType::T3
    };
    Ok(Classification {
        clone_type,
        trace,
        present_channels: present.len(),
        single_channel: present.len() == 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn profile(s: [f64; 3], p: [bool; 3]) -> SimilarityProfile {
        SimilarityProfile::new(s[0], s[1], s[2], p[0], p[1], p[2], 0.5, 0.5)
    }

    fn kind(s: [f64; 3], p: [bool; 3]) -> CloneType {
        classify(&profile(s, p), &TypeThresholds::default()).unwrap().clone_type
    }

    #[test]
    fn running_example_is_type_four() {
        let c = classify(&profile([0.95, 0.60, 0.0], [true, true, false]), &TypeThresholds::default()).unwrap();
        assert_eq!(c.clone_type, CloneType::T4);
        assert_eq!(
            c.trace.iter().map(|o| o.fired).collect::<Vec<_>>(),
            [false, false, true]
        );
        assert_eq!(c.present_channels, 2);
    }

    #[test]
    fn decision_tree_leaves() {
        let all = [true; 3];
        assert_eq!(kind([0.95, 0.92, 0.91], all), CloneType::T1);
        assert_eq!(kind([0.85, 0.80, 0.75], all), CloneType::T2);
        assert_eq!(kind([0.90, 0.40, 0.30], all), CloneType::T3);
        assert_eq!(kind([0.30, 0.80, 0.20], all), CloneType::T4);
    }

    #[test]
    fn single_channel_pairs_are_flagged() {
        let c = classify(&profile([0.0, 0.7, 0.0], [false, true, false]), &TypeThresholds::default()).unwrap();
        assert_eq!(c.clone_type, CloneType::T2);
        assert!(c.single_channel);
    }

    #[test]
    fn missing_nl_falls_back_to_other_channels() {
        assert_eq!(kind([0.95, 0.0, 0.5], [true, false, true]), CloneType::T3);
    }

    #[test]
    fn no_channel_is_an_error() {
        let err = classify(&profile([0.0; 3], [false; 3]), &TypeThresholds::default()).unwrap_err();
        assert!(matches!(err, Error::Classification(_)));
    }

    #[test]
    fn threshold_validation() {
        assert!(TypeThresholds::new(0.9, 0.2, 0.5).is_ok());
        assert!(TypeThresholds::new(0.4, 0.2, 0.5).is_err());
        assert!(TypeThresholds::new(0.9, 1.5, 0.5).is_err());
        assert!(TypeThresholds::new(1.1, 0.2, 0.5).is_err());
    }

    #[test]
    fn clone_type_parsing() {
        assert_eq!("t3".parse::<CloneType>().unwrap(), CloneType::T3);
        assert_eq!("Type-4".parse::<CloneType>().unwrap(), CloneType::T4);
        assert!("T5".parse::<CloneType>().is_err());
        assert_eq!(serde_json::to_string(&CloneType::T2).unwrap(), "\"T2\"");
    }

    proptest! {
        #[test]
        fn every_profile_reaches_exactly_one_leaf(
            s in proptest::array::uniform3(0.0f64..=1.0),
            p in proptest::array::uniform3(any::<bool>()),
            flat in 0.0f64..1.0,
            st in 0.0f64..1.0,
        ) {
            prop_assume!(p.iter().any(|&x| x));
            let th = TypeThresholds::default();
            let a = SimilarityProfile::new(s[0], s[1], s[2], p[0], p[1], p[2], flat, st);
            let b = SimilarityProfile::new(s[0], s[1], s[2], p[0], p[1], p[2], 1.0 - flat, 1.0 - st);
            let ca = classify(&a, &th).unwrap();
            // Independent of flat and structural similarity.
            prop_assert_eq!(&ca, &classify(&b, &th).unwrap());
            // The trace ends at the first predicate that fired.
            let fired: Vec<bool> = ca.trace.iter().map(|o| o.fired).collect();
            prop_assert!(fired[..fired.len() - 1].iter().all(|f| !f));
            let expected = match (fired.len(), fired.last()) {
                (1, Some(true)) => CloneType::T1,
                (2, Some(true)) => CloneType::T2,
                (3, Some(true)) => CloneType::T4,
                _ => CloneType::T3,
            };
            prop_assert_eq!(ca.clone_type, expected);
            // Near-identical implies uniform under the default thresholds.
            let present: Vec<f64> = a.channels().iter().filter(|c| c.1).map(|c| c.0).collect();
            let min = present.iter().copied().fold(f64::INFINITY, f64::min);
            let max = present.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if min >= th.tau1 {
                prop_assert!(max - min <= th.delta);
            }
        }
    }
}
