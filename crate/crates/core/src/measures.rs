//! Classical productivity measures and the Pearson correlation test.

use serde::Serialize;
use thiserror::Error;

use crate::corpus_index::FrequencyIndex;
use crate::morphology::Affix;
use crate::stats::student_t_two_sided;

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("frequency list is empty")]
    Empty,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 3 points, got {0}")]
    TooFew(usize),
    #[error("input vector is constant")]
    Constant,
}

/// Counts over every corpus type that carries the affix on the surface.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct AffixCounts {
    pub types: u64,
    pub tokens: u64,
    pub hapaxes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureSet {
    pub affix: String,
    pub type_count: u64,
    pub token_sum: u64,
    pub hapax_with_affix: u64,
    pub potential_productivity: f64,
    pub expanding_productivity: f64,
    pub naive_productivity: f64,
}

/// Fraction of nonzero entries.
pub fn naive_productivity(frequencies: &[u64]) -> Result<f64, MeasureError> {
    if frequencies.is_empty() {
        return Err(MeasureError::Empty);
    }
    let nonzero = frequencies.iter().filter(|&&f| f > 0).count();
    Ok(nonzero as f64 / frequencies.len() as f64)
}

/// Scans the plain and hyphenated surface variants of `affix`. A type equal
/// to the bare affix form ("in" for in-) is not a derivation and is skipped.
pub fn affix_counts(index: &FrequencyIndex, affix: &Affix) -> AffixCounts {
    let form = affix.form();
    let hyphenated = affix.display();
    let mut c = AffixCounts::default();
    for (word, n) in index.enumerate_with_prefix(form) {
        if word == form || word == hyphenated {
            continue;
        }
        c.types += 1;
        c.tokens += n;
        if n == 1 {
            c.hapaxes += 1;
        }
    }
    c
}

/// Hapaxes with the affix over tokens with the affix; 0 with no tokens.
/// Returns `(hapaxes, tokens, P)`.
pub fn potential_productivity(index: &FrequencyIndex, affix: &Affix) -> (u64, u64, f64) {
    let c = affix_counts(index, affix);
    (c.hapaxes, c.tokens, ratio(c.hapaxes, c.tokens))
}

/// Hapaxes with the affix over all hapaxes in the corpus; 0 without hapaxes.
pub fn expanding_productivity(index: &FrequencyIndex, affix: &Affix) -> f64 {
    ratio(affix_counts(index, affix).hapaxes, index.hapax_count())
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn measure_set(
    index: &FrequencyIndex,
    affix: &Affix,
    sample_frequencies: &[u64],
) -> Result<MeasureSet, MeasureError> {
    let c = affix_counts(index, affix);
    Ok(MeasureSet {
        affix: affix.display(),
        type_count: c.types,
        token_sum: c.tokens,
        hapax_with_affix: c.hapaxes,
        potential_productivity: ratio(c.hapaxes, c.tokens),
        expanding_productivity: ratio(c.hapaxes, index.hapax_count()),
        naive_productivity: naive_productivity(sample_frequencies)?,
    })
}

/// Sample Pearson correlation and its two-sided p-value
/// (t = r * sqrt((n - 2) / (1 - r^2)), n - 2 degrees of freedom).
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<(f64, f64), MeasureError> {
    if x.len() != y.len() {
        return Err(MeasureError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(MeasureError::TooFew(n));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MeasureError::Constant);
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() == 1.0 {
        0.0
    } else {
        student_t_two_sided(r * (df / (1.0 - r * r)).sqrt(), df)
    };
    Ok((r, p))
}
