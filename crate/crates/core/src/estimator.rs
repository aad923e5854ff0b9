//! Two-slice dynamic Bayesian network over discretized combination
//! frequencies.
//!
//! Every trial is mapped to a state:
//!
//! * `0`: the prefixed form does not occur in the corpus;
//! * `1`: it occurs, but less often than the running median of earlier trials;
//! * `2`: it occurs at least as often as that median.
//!
//! The network is `P0(x[0]) * prod_t P(x[t+1] | x[t])`. Both the initial
//! distribution and each row of the 3x3 transition matrix are Dirichlet
//! distributions whose mean starts at the prior and which absorb observed
//! states as counts. Posteriors are always recomputed from the integer
//! counts, so folding observations one at a time and counting them in bulk
//! give bit-identical results.
//!
//! Productivity is `1 - P(X[T+1] = 0 | X[T] = last observed state)`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Row sums must match 1 within this tolerance.
pub const SUM_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_QUANTILE: f64 = 0.5;
pub const DEFAULT_ESS: f64 = 1.0;

pub const PRIOR_INITIAL: [f64; 3] = [0.4, 0.4, 0.2];
pub const PRIOR_TRANSITION: [[f64; 3]; 3] = [[0.7, 0.2, 0.1], [0.2, 0.7, 0.1], [0.1, 0.2, 0.7]];

#[derive(Debug, Error, PartialEq)]
pub enum EstimatorError {
    #[error("quantile level {0} outside [0, 1]")]
    QuantileLevel(f64),
    #[error("invalid distribution {0:?}")]
    InvalidDistribution([f64; 3]),
    #[error("equivalent sample size must be positive and finite, got {0}")]
    InvalidEss(f64),
    #[error("need at least 2 trials, got {0}")]
    TooShort(usize),
    #[error("priors file: {0}")]
    PriorsFile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum State {
    Absent = 0,
    Low = 1,
    High = 2,
}

impl State {
    pub const ALL: [State; 3] = [State::Absent, State::Low, State::High];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<State> {
        State::ALL.get(i).copied()
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Probability vector over the three states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distribution3([f64; 3]);

impl Distribution3 {
    pub fn new(p: [f64; 3]) -> Result<Self, EstimatorError> {
        let in_range = p.iter().all(|x| (0.0..=1.0).contains(x));
        if !in_range || (p.iter().sum::<f64>() - 1.0).abs() > SUM_TOLERANCE {
            return Err(EstimatorError::InvalidDistribution(p));
        }
        Ok(Distribution3(p))
    }

    /// Accepts published values rounded to a few decimals: components must
    /// lie in [0, 1] and sum to 1 within `tolerance`. Values are kept as given.
    pub fn from_rounded(p: [f64; 3], tolerance: f64) -> Result<Self, EstimatorError> {
        let in_range = p.iter().all(|x| (0.0..=1.0).contains(x));
        if !in_range || (p.iter().sum::<f64>() - 1.0).abs() > tolerance {
            return Err(EstimatorError::InvalidDistribution(p));
        }
        Ok(Distribution3(p))
    }

    pub fn probs(&self) -> [f64; 3] {
        self.0
    }

    pub fn p(&self, s: State) -> f64 {
        self.0[s.index()]
    }

    pub fn p0(&self) -> f64 {
        self.0[0]
    }

    pub fn p1(&self) -> f64 {
        self.0[1]
    }

    pub fn p2(&self) -> f64 {
        self.0[2]
    }

    /// `P(X = 1) + P(X = 2)`.
    pub fn productivity(&self) -> f64 {
        productivity_from_distribution(self)
    }
}

pub fn productivity_from_distribution(d: &Distribution3) -> f64 {
    d.p1() + d.p2()
}

/// Dirichlet over three states: prior mean, prior weight and observed counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletRow {
    prior: Distribution3,
    prior_weight: f64,
    counts: [u64; 3],
}

impl DirichletRow {
    pub fn new(prior: Distribution3, prior_weight: f64) -> Result<Self, EstimatorError> {
        if !(prior_weight > 0.0 && prior_weight.is_finite()) {
            return Err(EstimatorError::InvalidEss(prior_weight));
        }
        Ok(DirichletRow {
            prior,
            prior_weight,
            counts: [0; 3],
        })
    }

    pub fn observe(&mut self, s: State) {
        self.counts[s.index()] += 1;
    }

    pub fn counts(&self) -> [u64; 3] {
        self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Posterior mean `(w * prior + counts) / (w + n)`.
    pub fn posterior(&self) -> Distribution3 {
        let denom = self.prior_weight + self.total() as f64;
        let prior = self.prior.probs();
        Distribution3(std::array::from_fn(|k| {
            (self.prior_weight * prior[k] + self.counts[k] as f64) / denom
        }))
    }
}

/// Prior parameters of the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Priors {
    pub initial: [f64; 3],
    pub transition: [[f64; 3]; 3],
    /// Equivalent sample size of every Dirichlet (pseudo-count weight).
    pub ess: f64,
}

impl Default for Priors {
    fn default() -> Self {
        Priors {
            initial: PRIOR_INITIAL,
            transition: PRIOR_TRANSITION,
            ess: DEFAULT_ESS,
        }
    }
}

impl Priors {
    pub fn validate(&self) -> Result<(), EstimatorError> {
        Distribution3::new(self.initial)?;
        for row in &self.transition {
            Distribution3::new(*row)?;
        }
        if !(self.ess > 0.0 && self.ess.is_finite()) {
            return Err(EstimatorError::InvalidEss(self.ess));
        }
        Ok(())
    }

    /// Reads a JSON file with any of `initial`, `transition`, `ess`; missing
    /// keys keep their defaults.
    pub fn load(path: &Path) -> Result<Priors, EstimatorError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Partial {
            initial: Option<[f64; 3]>,
            transition: Option<[[f64; 3]; 3]>,
            ess: Option<f64>,
        }
        let bytes = std::fs::read(path)
            .map_err(|e| EstimatorError::PriorsFile(format!("{}: {e}", path.display())))?;
        let p: Partial = serde_json::from_slice(&bytes)
            .map_err(|e| EstimatorError::PriorsFile(format!("{}: {e}", path.display())))?;
        let d = Priors::default();
        let priors = Priors {
            initial: p.initial.unwrap_or(d.initial),
            transition: p.transition.unwrap_or(d.transition),
            ess: p.ess.unwrap_or(d.ess),
        };
        priors.validate()?;
        Ok(priors)
    }
}

/// `P(x[t+1] | x[t])` as three Dirichlet rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionModel {
    rows: [DirichletRow; 3],
}

impl TransitionModel {
    pub fn new(priors: &Priors) -> Result<Self, EstimatorError> {
        let row =
            |r: usize| DirichletRow::new(Distribution3::new(priors.transition[r])?, priors.ess);
        Ok(TransitionModel {
            rows: [row(0)?, row(1)?, row(2)?],
        })
    }

    /// Posterior predictive for the next state given the current one.
    pub fn predict_next(&self, last: State) -> Distribution3 {
        self.rows[last.index()].posterior()
    }

    /// Adds one `prev -> next` transition; only row `prev` changes.
    pub fn observe_transition(&mut self, prev: State, next: State) {
        self.rows[prev.index()].observe(next);
    }

    pub fn row(&self, s: State) -> &DirichletRow {
        &self.rows[s.index()]
    }
}

/// `P0(x[0])` as a Dirichlet updated with every observed state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDistribution(DirichletRow);

impl InitialDistribution {
    pub fn new(priors: &Priors) -> Result<Self, EstimatorError> {
        Ok(InitialDistribution(DirichletRow::new(
            Distribution3::new(priors.initial)?,
            priors.ess,
        )?))
    }

    pub fn observe_initial(&mut self, s: State) {
        self.0.observe(s);
    }

    pub fn distribution(&self) -> Distribution3 {
        self.0.posterior()
    }

    pub fn counts(&self) -> [u64; 3] {
        self.0.counts()
    }
}

/// Linear-interpolation quantile; 0 for an empty list.
pub fn quantile(values: &[u64], q: f64) -> Result<f64, EstimatorError> {
    if !(0.0..=1.0).contains(&q) {
        return Err(EstimatorError::QuantileLevel(q));
    }
    if values.is_empty() {
        return Ok(0.0);
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    Ok(interpolate_sorted(&sorted, q))
}

fn interpolate_sorted(sorted: &[u64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let (a, b) = (sorted[lo] as f64, sorted[hi] as f64);
    a + (h - lo as f64) * (b - a)
}

/// State of a trial with `frequency`, given all earlier frequencies (zeros
/// included).
pub fn discretize(frequency: u64, history: &[u64], q: f64) -> Result<State, EstimatorError> {
    let threshold = quantile(history, q)?;
    Ok(classify_frequency(frequency, threshold))
}

fn classify_frequency(frequency: u64, threshold: f64) -> State {
    if frequency == 0 {
        State::Absent
    } else if (frequency as f64) < threshold {
        State::Low
    } else {
        State::High
    }
}

/// Online discretization of a whole sequence; trial `t` sees trials `1..t`.
pub fn discretize_sequence(frequencies: &[u64], q: f64) -> Result<Vec<State>, EstimatorError> {
    if !(0.0..=1.0).contains(&q) {
        return Err(EstimatorError::QuantileLevel(q));
    }
    let mut history: Vec<u64> = Vec::with_capacity(frequencies.len());
    let mut states = Vec::with_capacity(frequencies.len());
    for &f in frequencies {
        let threshold = if history.is_empty() {
            0.0
        } else {
            interpolate_sorted(&history, q)
        };
        states.push(classify_frequency(f, threshold));
        let pos = history.partition_point(|&x| x <= f);
        history.insert(pos, f);
    }
    Ok(states)
}

/// Output of [`run_sequence`].
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceRun {
    pub states: Vec<State>,
    /// Entry `t - 1` is `P(X[t+1] | X[t] = states[t-1])` before the
    /// transition `t -> t+1` is observed, for `t = 1..T-1`.
    pub trajectory: Vec<Distribution3>,
    pub final_prediction: Distribution3,
    pub productivity: f64,
    pub model: TransitionModel,
    pub initial: InitialDistribution,
}

/// Discretizes `frequencies` online, trains the network in order and reads
/// out the prediction for the next trial given the last one.
pub fn run_sequence(
    frequencies: &[u64],
    priors: &Priors,
    q: f64,
) -> Result<SequenceRun, EstimatorError> {
    if frequencies.len() < 2 {
        return Err(EstimatorError::TooShort(frequencies.len()));
    }
    let states = discretize_sequence(frequencies, q)?;
    run_states(states, priors)
}

/// Same as [`run_sequence`] for an already discretized sequence.
pub fn run_states(states: Vec<State>, priors: &Priors) -> Result<SequenceRun, EstimatorError> {
    if states.len() < 2 {
        return Err(EstimatorError::TooShort(states.len()));
    }
    priors.validate()?;
    let mut model = TransitionModel::new(priors)?;
    let mut initial = InitialDistribution::new(priors)?;
    let mut trajectory = Vec::with_capacity(states.len() - 1);
    initial.observe_initial(states[0]);
    for pair in states.windows(2) {
        let (prev, next) = (pair[0], pair[1]);
        trajectory.push(model.predict_next(prev));
        model.observe_transition(prev, next);
        initial.observe_initial(next);
    }
    let last = *states.last().expect("len >= 2");
    let final_prediction = model.predict_next(last);
    Ok(SequenceRun {
        productivity: productivity_from_distribution(&final_prediction),
        states,
        trajectory,
        final_prediction,
        model,
        initial,
    })
}
