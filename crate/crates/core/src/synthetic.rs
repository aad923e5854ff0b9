//! Synthetic corpora with a known attachment probability.
//!
//! Base words get Zipf-distributed token counts. Each base is independently
//! marked as attached with probability `pi`; attached bases also appear with
//! the prefix, at `prefixed_factor` of the base frequency (rounded, at least
//! 1), split 90/10 between the plain and hyphenated spellings.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::corpus_index::{build_index, is_content_word, TokenizerConfig};
use crate::morphology::{Affix, AffixInventory, DEFAULT_MIN_RESIDUAL};
use crate::pipeline::{run_prefix, PipelineError, RunSettings};

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";
const TOKENS_PER_LINE: usize = 16;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic config: {0}")]
    Config(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthConfig {
    pub base_vocab_size: usize,
    /// Probability that a base combines with the affix.
    pub pi: f64,
    pub zipf_exponent: f64,
    /// Tokens spent on base words; prefixed forms come on top.
    pub total_tokens: u64,
    pub seed: u64,
    pub affix_form: String,
    pub prefixed_factor: f64,
    pub hyphen_share: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            base_vocab_size: 2_000,
            pi: 0.5,
            zipf_exponent: 1.0,
            total_tokens: 200_000,
            seed: 0,
            affix_form: "un".into(),
            prefixed_factor: 0.3,
            hyphen_share: 0.1,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<Affix, SynthError> {
        let bad = |m: &str| Err(SynthError::Config(m.into()));
        if self.base_vocab_size == 0 {
            return bad("base_vocab_size must be at least 1");
        }
        if self.total_tokens < self.base_vocab_size as u64 {
            return bad("total_tokens must be at least base_vocab_size");
        }
        if !(0.0..=1.0).contains(&self.pi) {
            return bad("pi must lie in [0, 1]");
        }
        if !(self.zipf_exponent >= 0.0 && self.zipf_exponent.is_finite()) {
            return bad("zipf_exponent must be a non-negative number");
        }
        if !(self.prefixed_factor > 0.0 && self.prefixed_factor.is_finite()) {
            return bad("prefixed_factor must be positive");
        }
        if !(0.0..=1.0).contains(&self.hyphen_share) {
            return bad("hyphen_share must lie in [0, 1]");
        }
        Affix::prefix(&self.affix_form).map_err(SynthError::Config)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub text: String,
    /// `(base, attached)` in frequency-rank order.
    pub ground_truth: Vec<(String, bool)>,
    pub base_counts: Vec<u64>,
}

impl SynthCorpus {
    pub fn ground_truth_csv(&self) -> String {
        let mut out = String::from("base,attached\n");
        for (b, a) in &self.ground_truth {
            let _ = writeln!(out, "{b},{}", *a as u8);
        }
        out
    }

    pub fn attached_fraction(&self) -> f64 {
        let n = self.ground_truth.iter().filter(|(_, a)| *a).count();
        n as f64 / self.ground_truth.len() as f64
    }
}

/// Pronounceable CV-syllable words, skipping anything that starts with the
/// affix or is a stopword.
fn base_vocabulary(size: usize, affix: &str) -> Vec<String> {
    let stop = TokenizerConfig::default();
    let syllables: Vec<[u8; 2]> = CONSONANTS
        .iter()
        .flat_map(|&c| VOWELS.iter().map(move |&v| [c, v]))
        .collect();
    let k = syllables.len();
    let mut out = Vec::with_capacity(size);
    let mut seen = HashSet::new();
    let mut i = 0usize;
    while out.len() < size {
        let mut n = i;
        let mut word = String::with_capacity(6);
        for _ in 0..3 {
            let s = syllables[n % k];
            word.push(s[0] as char);
            word.push(s[1] as char);
            n /= k;
        }
        // Past k^3 words, extend with more syllables.
        while n > 0 {
            let s = syllables[n % k];
            word.push(s[0] as char);
            word.push(s[1] as char);
            n /= k;
        }
        i += 1;
        if word.starts_with(affix) || !is_content_word(&word, &stop) || !seen.insert(word.clone()) {
            continue;
        }
        out.push(word);
    }
    out
}

pub fn generate_corpus(cfg: &SynthConfig) -> Result<SynthCorpus, SynthError> {
    let affix = cfg.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let bases = base_vocabulary(cfg.base_vocab_size, affix.form());

    let weights: Vec<f64> = (1..=bases.len())
        .map(|r| (r as f64).powf(-cfg.zipf_exponent))
        .collect();
    let norm: f64 = weights.iter().sum();
    let base_counts: Vec<u64> = weights
        .iter()
        .map(|w| ((cfg.total_tokens as f64 * w / norm).round() as u64).max(1))
        .collect();

    let mut words: Vec<String> = Vec::with_capacity(bases.len() * 3);
    let mut bag: Vec<u32> = Vec::new();
    let mut ground_truth = Vec::with_capacity(bases.len());
    let emit = |word: String, count: u64, words: &mut Vec<String>, bag: &mut Vec<u32>| {
        if count == 0 {
            return;
        }
        let id = words.len() as u32;
        words.push(word);
        bag.extend(std::iter::repeat_n(id, count as usize));
    };
    for (base, &count) in bases.iter().zip(&base_counts) {
        let attached = rng.gen_bool(cfg.pi);
        emit(base.clone(), count, &mut words, &mut bag);
        if attached {
            let total = ((cfg.prefixed_factor * count as f64).round() as u64).max(1);
            let plain = ((1.0 - cfg.hyphen_share) * total as f64).round() as u64;
            let plain = if plain == 0 && cfg.hyphen_share < 1.0 {
                1
            } else {
                plain
            };
            let plain = plain.min(total);
            emit(
                format!("{}{}", affix.form(), base),
                plain,
                &mut words,
                &mut bag,
            );
            emit(
                format!("{}-{}", affix.form(), base),
                total - plain,
                &mut words,
                &mut bag,
            );
        }
        ground_truth.push((base.clone(), attached));
    }
    bag.shuffle(&mut rng);

    let mut text = String::with_capacity(bag.len() * 8);
    for (i, &id) in bag.iter().enumerate() {
        text.push_str(&words[id as usize]);
        text.push(if (i + 1) % TOKENS_PER_LINE == 0 {
            '\n'
        } else {
            ' '
        });
    }
    Ok(SynthCorpus {
        text,
        ground_truth,
        base_counts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recovery {
    pub per_seed: Vec<f64>,
    pub mean_productivity: f64,
    pub abs_error: f64,
}

/// Runs the full pipeline on `n_seeds` corpora (seeds `cfg.seed + k`) and
/// compares the mean productivity with `pi`.
pub fn recovery_error(
    cfg: &SynthConfig,
    settings: &RunSettings,
    n_seeds: usize,
) -> Result<Recovery, SynthError> {
    if n_seeds == 0 {
        return Err(SynthError::Config("n_seeds must be at least 1".into()));
    }
    let affix = cfg.validate()?;
    let inventory = AffixInventory::new(vec![affix.clone()], DEFAULT_MIN_RESIDUAL)
        .map_err(|e| SynthError::Config(e.to_string()))?;
    let tokenizer = TokenizerConfig::default();
    let per_seed = (0..n_seeds as u64)
        .into_par_iter()
        .map(|k| {
            let seed = cfg.seed.wrapping_add(k);
            let corpus = generate_corpus(&SynthConfig {
                seed,
                ..cfg.clone()
            })?;
            let index = build_index(&corpus.text, &tokenizer, "synthetic");
            let mut s = settings.clone();
            s.sample.master_seed = seed;
            Ok(run_prefix(&index, &inventory, &tokenizer, &s, &affix)?.productivity())
        })
        .collect::<Result<Vec<f64>, SynthError>>()?;
    let mean = per_seed.iter().sum::<f64>() / per_seed.len() as f64;
    Ok(Recovery {
        abs_error: (mean - cfg.pi).abs(),
        mean_productivity: mean,
        per_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_index::TokenizerConfig;

    fn small(pi: f64) -> SynthConfig {
        SynthConfig {
            base_vocab_size: 300,
            total_tokens: 20_000,
            pi,
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn boundaries() {
        let tok = TokenizerConfig::without_stoplist();
        let c = generate_corpus(&small(0.0)).unwrap();
        let idx = build_index(&c.text, &tok, "s");
        assert_eq!(idx.enumerate_with_prefix("un").count(), 0);
        assert!(c.ground_truth.iter().all(|(_, a)| !a));

        let c = generate_corpus(&small(1.0)).unwrap();
        let idx = build_index(&c.text, &tok, "s");
        for (base, attached) in &c.ground_truth {
            assert!(attached);
            assert!(idx.combined_frequency(&[format!("un{base}"), format!("un-{base}")]) >= 1);
        }
    }

    #[test]
    fn deterministic() {
        let a = generate_corpus(&small(0.5)).unwrap();
        let b = generate_corpus(&small(0.5)).unwrap();
        assert_eq!(a, b);
        let c = generate_corpus(&SynthConfig {
            seed: 12,
            ..small(0.5)
        })
        .unwrap();
        assert_ne!(a.text, c.text);
    }

    #[test]
    fn counts_follow_config() {
        let cfg = small(1.0);
        let c = generate_corpus(&cfg).unwrap();
        let idx = build_index(&c.text, &TokenizerConfig::without_stoplist(), "s");
        let (base, _) = &c.ground_truth[0];
        assert_eq!(idx.lookup(base), c.base_counts[0]);
        let prefixed = (0.3 * c.base_counts[0] as f64).round() as u64;
        assert_eq!(
            idx.combined_frequency(&[format!("un{base}"), format!("un-{base}")]),
            prefixed
        );
        assert!(idx.lookup(&format!("un-{base}")) > 0);
        assert!(c.base_counts.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn vocabulary_avoids_affix_and_stopwords() {
        let v = base_vocabulary(5_000, "ba");
        assert_eq!(v.len(), 5_000);
        assert!(v.iter().all(|w| !w.starts_with("ba")));
        assert!(!v.iter().any(|w| w == "before"));
    }

    #[test]
    fn rejects_bad_config() {
        assert!(generate_corpus(&SynthConfig {
            pi: 1.5,
            ..small(0.5)
        })
        .is_err());
        assert!(generate_corpus(&SynthConfig {
            total_tokens: 10,
            ..small(0.5)
        })
        .is_err());
        assert!(generate_corpus(&SynthConfig {
            affix_form: "u2".into(),
            ..small(0.5)
        })
        .is_err());
    }
}
