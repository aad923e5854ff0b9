//! End-to-end run for one prefix, and the report/trajectory CSV writers.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::classifier::{classify, contrasts, ContrastReport, GroupLabel, DEFAULT_TIE_EPSILON};
use crate::corpus_index::{FrequencyIndex, TokenizerConfig};
use crate::estimator::{
    run_sequence, EstimatorError, Priors, SequenceRun, State, DEFAULT_QUANTILE,
};
use crate::measures::{measure_set, MeasureError, MeasureSet};
use crate::morphology::{Affix, AffixInventory, BaseWord};
use crate::sampler::{draw_bases, BaseSample, SampleConfig, SampleError};

pub const REPORT_HEADER: &str =
    "group,prefix,product.,X1=0,X1=1,X1=2,contr._1,diff._1,contr._2,diff._2,\
type_count,token_sum,hapaxes,potential_P,expanding_P,naive_P";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{affix}: {source}")]
    Sample {
        affix: String,
        #[source]
        source: SampleError,
    },
    #[error("{affix}: {source}")]
    Estimator {
        affix: String,
        #[source]
        source: EstimatorError,
    },
    #[error("{affix}: {source}")]
    Measure {
        affix: String,
        #[source]
        source: MeasureError,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSettings {
    pub sample: SampleConfig,
    pub quantile: f64,
    pub priors: Priors,
    pub tie_epsilon: f64,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            sample: SampleConfig::default(),
            quantile: DEFAULT_QUANTILE,
            priors: Priors::default(),
            tie_epsilon: DEFAULT_TIE_EPSILON,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    /// 1-based draw position.
    pub t: usize,
    pub base: BaseWord,
    pub variants: [String; 2],
    pub frequency: u64,
    pub state: State,
}

#[derive(Debug, Clone)]
pub struct PrefixRun {
    pub affix: Affix,
    pub sample: BaseSample,
    pub trials: Vec<TrialRecord>,
    pub sequence: SequenceRun,
    pub group: GroupLabel,
    pub contrasts: Option<ContrastReport>,
    pub measures: MeasureSet,
}

impl PrefixRun {
    pub fn productivity(&self) -> f64 {
        self.sequence.productivity
    }

    pub fn frequencies(&self) -> Vec<u64> {
        self.trials.iter().map(|r| r.frequency).collect()
    }
}

/// Sample, strip, combine, look up, discretize, train, read out.
pub fn run_prefix(
    index: &FrequencyIndex,
    inventory: &AffixInventory,
    filter: &TokenizerConfig,
    settings: &RunSettings,
    affix: &Affix,
) -> Result<PrefixRun, PipelineError> {
    let name = affix.display();
    let sample =
        draw_bases(index, inventory, filter, &settings.sample, affix).map_err(|source| {
            PipelineError::Sample {
                affix: name.clone(),
                source,
            }
        })?;
    let combined: Vec<([String; 2], u64)> = sample
        .items
        .iter()
        .map(|base| {
            let variants = affix.combine(base);
            let f = index.combined_frequency(&variants);
            (variants, f)
        })
        .collect();
    let frequencies: Vec<u64> = combined.iter().map(|(_, f)| *f).collect();
    let sequence =
        run_sequence(&frequencies, &settings.priors, settings.quantile).map_err(|source| {
            PipelineError::Estimator {
                affix: name.clone(),
                source,
            }
        })?;
    let trials = sample
        .items
        .iter()
        .zip(combined)
        .zip(&sequence.states)
        .enumerate()
        .map(|(i, ((base, (variants, frequency)), &state))| TrialRecord {
            t: i + 1,
            base: base.clone(),
            variants,
            frequency,
            state,
        })
        .collect();
    let measures =
        measure_set(index, affix, &frequencies).map_err(|source| PipelineError::Measure {
            affix: name.clone(),
            source,
        })?;
    let group = classify(&sequence.final_prediction, settings.tie_epsilon);
    let contrasts = contrasts(&sequence.final_prediction, settings.tie_epsilon).ok();
    Ok(PrefixRun {
        affix: affix.clone(),
        sample,
        trials,
        sequence,
        group,
        contrasts,
        measures,
    })
}

/// Runs every affix of the inventory concurrently; output follows the
/// inventory order.
pub fn run_inventory(
    index: &FrequencyIndex,
    inventory: &AffixInventory,
    filter: &TokenizerConfig,
    settings: &RunSettings,
) -> Result<Vec<PrefixRun>, PipelineError> {
    inventory
        .affixes()
        .par_iter()
        .map(|a| run_prefix(index, inventory, filter, settings, a))
        .collect()
}

fn num(x: f64) -> String {
    format!("{x:.6}")
}

/// Report rows sorted by ascending productivity (ties by prefix form).
pub fn report_csv(runs: &[PrefixRun]) -> String {
    let mut sorted: Vec<&PrefixRun> = runs.iter().collect();
    sorted.sort_by(|a, b| {
        a.productivity()
            .total_cmp(&b.productivity())
            .then_with(|| a.affix.form().cmp(b.affix.form()))
    });
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in sorted {
        let d = r.sequence.final_prediction;
        let (c1, d1, c2, d2) = match &r.contrasts {
            Some(c) => (
                c.contr_1.clone(),
                num(c.diff_1),
                c.contr_2.clone(),
                num(c.diff_2),
            ),
            None => Default::default(),
        };
        let m = &r.measures;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.group,
            r.affix.display(),
            num(r.productivity()),
            num(d.p0()),
            num(d.p1()),
            num(d.p2()),
            c1,
            d1,
            c2,
            d2,
            m.type_count,
            m.token_sum,
            m.hapax_with_affix,
            num(m.potential_productivity),
            num(m.expanding_productivity),
            num(m.naive_productivity),
        );
    }
    out
}

/// `t,p0,p1,p2`: rows `1..T-1` are the trajectory, row `T` the final
/// prediction for the next base.
pub fn trajectory_csv(run: &SequenceRun) -> String {
    let mut out = String::from("t,p0,p1,p2\n");
    for (i, d) in run
        .trajectory
        .iter()
        .chain([&run.final_prediction])
        .enumerate()
    {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            i + 1,
            num(d.p0()),
            num(d.p1()),
            num(d.p2())
        );
    }
    out
}

/// `t,source_word,base,variant_plain,variant_hyphen,frequency,state`.
pub fn trials_csv(run: &PrefixRun) -> String {
    let mut out =
        String::from("t,source_word,base,stripped,variant_plain,variant_hyphen,frequency,state\n");
    for r in &run.trials {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.t,
            r.base.source_word,
            r.base.text,
            r.base.stripped as u8,
            r.variants[0],
            r.variants[1],
            r.frequency,
            r.state
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_index() -> FrequencyIndex {
        let mut counts: Vec<(String, u64)> = (0..150)
            .map(|i| (format!("word{}", alpha(i)), 1 + i as u64 % 7))
            .collect();
        counts.push(("unwordab".into(), 4));
        FrequencyIndex::from_counts(counts)
    }

    fn alpha(mut i: usize) -> String {
        let mut s = String::new();
        for _ in 0..2 {
            s.push((b'a' + (i % 26) as u8) as char);
            i /= 26;
        }
        s
    }

    #[test]
    fn prefix_run_is_consistent() {
        let idx = toy_index();
        let inv = AffixInventory::english();
        let filter = TokenizerConfig::default();
        let settings = RunSettings::default();
        let un = inv.get("un").unwrap().clone();
        let run = run_prefix(&idx, &inv, &filter, &settings, &un).unwrap();
        assert_eq!(run.trials.len(), 100);
        assert_eq!(run.sequence.trajectory.len(), 99);
        for r in &run.trials {
            assert_eq!(
                r.frequency,
                idx.lookup(&r.variants[0]) + idx.lookup(&r.variants[1])
            );
            assert_eq!(r.state == State::Absent, r.frequency == 0);
        }
        let again = run_prefix(&idx, &inv, &filter, &settings, &un).unwrap();
        assert_eq!(trials_csv(&run), trials_csv(&again));
    }

    #[test]
    fn report_rows_sorted() {
        let idx = toy_index();
        let inv = AffixInventory::parse("un-\nre-\nwo-").unwrap();
        let runs = run_inventory(
            &idx,
            &inv,
            &TokenizerConfig::default(),
            &RunSettings::default(),
        )
        .unwrap();
        let csv = report_csv(&runs);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(REPORT_HEADER));
        let prods: Vec<f64> = lines
            .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
            .collect();
        assert_eq!(prods.len(), 3);
        assert!(prods.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn trajectory_rows() {
        let seq = run_sequence(&[0, 0, 3], &Priors::default(), 0.5).unwrap();
        let csv = trajectory_csv(&seq);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("t,p0,p1,p2\n1,0.700000,0.200000,0.100000\n"));
    }
}
