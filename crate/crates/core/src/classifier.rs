//! Group labels and contrast differences of a final predicted distribution.
//!
//! A label lists the states in descending order of probability ("0_2_1"
//! means `P(0) > P(2) > P(1)`). Three orders are known productivity regimes;
//! everything else, including near-ties, is reported as `other`.

use std::fmt;

use thiserror::Error;

use crate::estimator::Distribution3;

pub const DEFAULT_TIE_EPSILON: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
#[error("probabilities {0:?} contain a tie within {1}")]
pub struct TieError(pub [f64; 3], pub f64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupLabel {
    /// Mostly absent; attested combinations tend to be frequent.
    ZeroTwoOne,
    /// Mostly frequent combinations, few rare ones.
    TwoZeroOne,
    /// Frequent and rare combinations both outweigh absence.
    TwoOneZero,
    Other {
        order: [usize; 3],
        tie: bool,
    },
}

impl GroupLabel {
    pub fn is_tie(&self) -> bool {
        matches!(self, GroupLabel::Other { tie: true, .. })
    }
}

impl fmt::Display for GroupLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupLabel::ZeroTwoOne => "0_2_1",
            GroupLabel::TwoZeroOne => "2_0_1",
            GroupLabel::TwoOneZero => "2_1_0",
            GroupLabel::Other { .. } => "other",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContrastReport {
    pub contr_1: String,
    pub diff_1: f64,
    pub contr_2: String,
    pub diff_2: f64,
}

/// State indices sorted by descending probability (ties keep index order).
pub fn descending_order(d: &Distribution3) -> [usize; 3] {
    let p = d.probs();
    let mut order = [0, 1, 2];
    order.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    order
}

fn has_tie(d: &Distribution3, order: [usize; 3], eps: f64) -> bool {
    let p = d.probs();
    order.windows(2).any(|w| p[w[0]] - p[w[1]] <= eps)
}

pub fn classify(d: &Distribution3, tie_epsilon: f64) -> GroupLabel {
    let order = descending_order(d);
    if has_tie(d, order, tie_epsilon) {
        return GroupLabel::Other { order, tie: true };
    }
    match order {
        [0, 2, 1] => GroupLabel::ZeroTwoOne,
        [2, 0, 1] => GroupLabel::TwoZeroOne,
        [2, 1, 0] => GroupLabel::TwoOneZero,
        _ => GroupLabel::Other { order, tie: false },
    }
}

/// Adjacent gaps of the sorted probabilities, labelled by state pair.
pub fn contrasts(d: &Distribution3, tie_epsilon: f64) -> Result<ContrastReport, TieError> {
    let order = descending_order(d);
    if has_tie(d, order, tie_epsilon) {
        return Err(TieError(d.probs(), tie_epsilon));
    }
    let p = d.probs();
    Ok(ContrastReport {
        contr_1: format!("{}_{}", order[0], order[1]),
        diff_1: p[order[0]] - p[order[1]],
        contr_2: format!("{}_{}", order[1], order[2]),
        diff_2: p[order[1]] - p[order[2]],
    })
}
