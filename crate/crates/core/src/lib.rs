//! Clone detection for multi-channel agent skill documents.
//!
//! A skill is a markdown file with YAML frontmatter, a natural-language body
//! and fenced code blocks. The pipeline decomposes every skill into those
//! channels ([`parser`]), embeds each channel with TF-IDF followed by a
//! truncated SVD ([`encoder`]), fuses the per-channel cosines with a logistic
//! model over a quadratic feature map ([`fusion`]), labels accepted pairs with
//! a clone type ([`classify`]) and finally builds an ecosystem clone graph with
//! deduplication and security-propagation analytics ([`graph`]). The
//! [`bench`] module generates labelled benchmarks and runs the baselines.

pub mod bench;
pub mod classify;
pub mod config;
pub mod corpus;
pub mod encoder;
mod error;
pub mod fusion;
pub mod graph;
pub mod parser;
pub mod pipeline;
pub mod seed;
pub mod text;

pub use classify::{classify, CloneType, TypeThresholds};
pub use config::RunConfig;
pub use corpus::{Corpus, LoadFormat, SkillRecord};
pub use encoder::{Channel, ChannelIndex, SkillIndex};
pub use error::{Error, Result};
pub use fusion::{FeatureVector, FusionModel, LabeledPair, SimilarityProfile};
pub use graph::{CloneGraph, EcosystemReport};
pub use parser::{parse_skill, CodeBlock, SkillDocument, StructuralFeatures};
