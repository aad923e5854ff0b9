//! Reproducible token-weighted sampling of content words without replacement.
//!
//! Each eligible type gets the key `u^(1/w)` with `u ~ U(0, 1)`; the `n`
//! largest keys win, in descending key order. Keys are compared in log space
//! (`ln(u) / w`), which preserves the order and stays finite for very large
//! weights.
//!
//! Streams are ChaCha20 seeded from SHA-256 of the master seed and the affix
//! form, so every prefix gets its own independent, stable draw.

use std::fmt::Write as _;

use rand::distributions::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus_index::{is_content_word, FrequencyIndex, TokenizerConfig};
use crate::morphology::{Affix, AffixInventory, BaseWord};

/// Recorded in run metadata so draws can be reproduced.
pub const RNG_ALGORITHM: &str =
    "ChaCha20Rng::seed_from_u64 (rand_chacha 0.3); stream seed = first 8 bytes (LE) of SHA-256(master_seed LE || affix form)";

#[derive(Debug, Error, PartialEq)]
pub enum SampleError {
    #[error("only {available} eligible content-word types, {requested} requested")]
    Exhausted { available: usize, requested: usize },
    #[error("item {index} has non-positive weight {weight}")]
    BadWeight { index: usize, weight: f64 },
    #[error("sample size must be at least 1")]
    ZeroSize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    TokenFrequency,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub n: usize,
    pub master_seed: u64,
    pub weighting: Weighting,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            n: 100,
            master_seed: 0,
            weighting: Weighting::TokenFrequency,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseSample {
    /// In draw order.
    pub items: Vec<BaseWord>,
    pub seed_used: u64,
    pub affix: Affix,
}

impl BaseSample {
    /// Audit dump: `draw_index,source_word,base,stripped`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("draw_index,source_word,base,stripped\n");
        for (i, b) in self.items.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                i + 1,
                b.source_word,
                b.text,
                b.stripped as u8
            );
        }
        out
    }
}

/// Stable 64-bit seed for one affix's stream.
pub fn stream_seed(master_seed: u64, affix_form: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    hasher.update(affix_form.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn stream_rng(master_seed: u64, affix_form: &str) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(stream_seed(master_seed, affix_form))
}

/// Returns the indices of the `n` items with the largest keys, largest
/// first. One uniform variate is drawn per item, in input order.
pub fn weighted_order<R: Rng + ?Sized>(
    weights: &[f64],
    n: usize,
    rng: &mut R,
) -> Result<Vec<usize>, SampleError> {
    if let Some((index, &weight)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !(**w > 0.0 && w.is_finite()))
    {
        return Err(SampleError::BadWeight { index, weight });
    }
    let mut keyed: Vec<(f64, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let u: f64 = Open01.sample(rng);
            (u.ln() / w, i)
        })
        .collect();
    let n = n.min(keyed.len());
    let by_key_desc = |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
    if n < keyed.len() && n > 0 {
        keyed.select_nth_unstable_by(n - 1, by_key_desc);
    }
    keyed.truncate(n);
    keyed.sort_unstable_by(by_key_desc);
    Ok(keyed.into_iter().map(|(_, i)| i).collect())
}

/// Content-word types of `index` in lexicographic order, with their counts.
pub fn eligible_types<'a>(
    index: &'a FrequencyIndex,
    filter: &TokenizerConfig,
) -> Vec<(&'a str, u64)> {
    index
        .iter()
        .filter(|(w, _)| is_content_word(w, filter))
        .collect()
}

/// Draws `config.n` distinct content-word types and strips each once.
pub fn draw_bases(
    index: &FrequencyIndex,
    inventory: &AffixInventory,
    filter: &TokenizerConfig,
    config: &SampleConfig,
    affix: &Affix,
) -> Result<BaseSample, SampleError> {
    if config.n == 0 {
        return Err(SampleError::ZeroSize);
    }
    let eligible = eligible_types(index, filter);
    if eligible.len() < config.n {
        return Err(SampleError::Exhausted {
            available: eligible.len(),
            requested: config.n,
        });
    }
    let weights: Vec<f64> = match config.weighting {
        Weighting::TokenFrequency => eligible.iter().map(|&(_, c)| c as f64).collect(),
        Weighting::Uniform => vec![1.0; eligible.len()],
    };
    let seed = stream_seed(config.master_seed, affix.form());
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let order = weighted_order(&weights, config.n, &mut rng)?;
    let items = order
        .into_iter()
        .map(|i| inventory.strip_prefix(eligible[i].0))
        .collect();
    Ok(BaseSample {
        items,
        seed_used: seed,
        affix: affix.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_weights() {
        let mut rng = stream_rng(1, "x");
        assert_eq!(
            weighted_order(&[1.0, 0.0], 1, &mut rng),
            Err(SampleError::BadWeight {
                index: 1,
                weight: 0.0
            })
        );
        assert!(weighted_order(&[-1.0], 1, &mut rng).is_err());
        assert!(weighted_order(&[f64::NAN], 1, &mut rng).is_err());
    }

    #[test]
    fn full_permutation() {
        let mut rng = stream_rng(7, "x");
        let mut order = weighted_order(&[3.0, 1.0, 4.0, 1.0, 5.0], 5, &mut rng).unwrap();
        order.sort();
        assert_eq!(order, [0, 1, 2, 3, 4]);
    }

    #[test]
    fn heavy_item_dominates() {
        let mut weights = vec![1.0; 50];
        weights[17] = 1e9;
        let hits = (0..1000u64)
            .filter(|&s| {
                let mut rng = stream_rng(s, "heavy");
                weighted_order(&weights, 1, &mut rng).unwrap() == [17]
            })
            .count();
        assert!(hits >= 990, "{hits}");
    }

    #[test]
    fn seeds_differ_per_affix() {
        assert_ne!(stream_seed(1, "un"), stream_seed(1, "re"));
        assert_ne!(stream_seed(1, "un"), stream_seed(2, "un"));
        assert_eq!(stream_seed(1, "un"), stream_seed(1, "un"));
    }

    #[test]
    fn exhausted_reports_available() {
        let idx = FrequencyIndex::from_counts([("table", 3), ("chair", 2), ("the", 100)]);
        let cfg = SampleConfig {
            n: 3,
            ..Default::default()
        };
        let err = draw_bases(
            &idx,
            &AffixInventory::english(),
            &TokenizerConfig::default(),
            &cfg,
            &Affix::prefix("un").unwrap(),
        )
        .unwrap_err();
        assert_eq!(
            err,
            SampleError::Exhausted {
                available: 2,
                requested: 3
            }
        );
    }

    #[test]
    fn csv_dump() {
        let sample = BaseSample {
            items: vec![AffixInventory::english().strip_prefix("unlock")],
            seed_used: 0,
            affix: Affix::prefix("re").unwrap(),
        };
        assert_eq!(
            sample.to_csv(),
            "draw_index,source_word,base,stripped\n1,unlock,lock,1\n"
        );
    }
}
