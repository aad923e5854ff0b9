//! Affix productivity measured as the probability that an affix combines
//! with a random base.
//!
//! The pipeline for one prefix:
//!
//! 1. build a token-frequency index over a corpus ([`corpus_index`]);
//! 2. draw a token-weighted sample of content words and strip any known
//!    prefix from each ([`sampler`], [`morphology`]);
//! 3. attach the target prefix to every base and look up the frequency of
//!    the plain and hyphenated forms;
//! 4. discretize each frequency into a three-valued state and feed the state
//!    sequence to a two-slice Markov model with Dirichlet rows
//!    ([`estimator`]);
//! 5. read off `P(X = 1) + P(X = 2)` for the next base, given the last one.
//!
//! Hapax-based measures ([`measures`]) and the group/contrast classification
//! ([`classifier`]) sit alongside for comparison. [`synthetic`] generates
//! corpora with a known attachment probability to validate the whole chain.

pub mod classifier;
pub mod cli;
pub mod corpus_index;
pub mod estimator;
pub mod measures;
pub mod morphology;
pub mod pipeline;
pub mod sampler;
pub mod stats;
pub mod synthetic;

pub use classifier::{classify, contrasts, ContrastReport, GroupLabel};
pub use corpus_index::{FrequencyIndex, TokenizerConfig};
pub use estimator::{Distribution3, Priors, SequenceRun, State, TransitionModel};
pub use morphology::{Affix, AffixInventory, BaseWord};
pub use pipeline::{PrefixRun, RunSettings};
pub use sampler::{BaseSample, SampleConfig, Weighting};
