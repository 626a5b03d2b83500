//! Monte-Carlo estimation of error probabilities and stopping times.
//!
//! Each trial draws one observation path and evaluates every threshold of a
//! sweep on it, so all thresholds share the same random numbers. Trial `t`
//! under hypothesis index `h` uses stream `(h << 32) | t` of the plan seed;
//! results are collected in index order and therefore do not depend on the
//! number of worker threads.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::hypothesis::{Hypothesis, Model};
use crate::sequential::{run_thresholds, IidSource, Knowledge, RunOptions, TestConfig};

/// Default bound on the probability that a certified null run would still
/// have stopped before its horizon.
pub const DEFAULT_NULL_TAIL_TOLERANCE: f64 = 1e-6;

const WILSON_Z: f64 = 1.959963984540054;

/// Distributions that generate the data (hidden from non-MSPRT tests).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataModel {
    Identical { mu: Distribution, pi: Distribution },
    /// The `r`-th smallest outlier index draws from `mus[r]`.
    Distinct { mus: Vec<Distribution>, pi: Distribution },
}

impl DataModel {
    /// Per-sequence generating distributions under hypothesis `s`.
    pub fn sequence_distributions(&self, s: &Hypothesis, m: usize) -> Vec<Distribution> {
        match self {
            DataModel::Identical { mu, pi } => (0..m)
                .map(|i| if s.contains(i) { mu.clone() } else { pi.clone() })
                .collect(),
            DataModel::Distinct { mus, pi } => (0..m)
                .map(|i| match s.outliers().iter().position(|&j| j == i) {
                    Some(r) => mus[r].clone(),
                    None => pi.clone(),
                })
                .collect(),
        }
    }

    fn alphabet_size(&self) -> usize {
        match self {
            DataModel::Identical { pi, .. } | DataModel::Distinct { pi, .. } => pi.len(),
        }
    }
}

fn default_tolerance() -> Option<f64> {
    Some(DEFAULT_NULL_TAIL_TOLERANCE)
}

/// A complete, serializable description of a Monte-Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub config: TestConfig,
    pub data: DataModel,
    pub trials_per_hypothesis: u64,
    pub seed: u64,
    /// Applies only to null-hypothesis trials of the identical-model GL
    /// tests; `None` simulates every such run up to its horizon.
    #[serde(default = "default_tolerance")]
    pub null_tail_tolerance: Option<f64>,
}

impl TrialPlan {
    pub fn new(config: TestConfig, data: DataModel, trials_per_hypothesis: u64, seed: u64) -> Self {
        TrialPlan {
            config,
            data,
            trials_per_hypothesis,
            seed,
            null_tail_tolerance: default_tolerance(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.trials_per_hypothesis == 0 {
            return Err(Error::config("trials_per_hypothesis must be at least 1"));
        }
        if self.trials_per_hypothesis > u32::MAX as u64 {
            return Err(Error::config("trials_per_hypothesis must fit in 32 bits"));
        }
        if self.data.alphabet_size() != self.config.alphabet_size {
            return Err(Error::AlphabetMismatch {
                left: self.config.alphabet_size,
                right: self.data.alphabet_size(),
            });
        }
        match (&self.data, self.config.model) {
            (DataModel::Identical { mu, .. }, Model::Identical) => {
                if mu.len() != self.config.alphabet_size {
                    return Err(Error::AlphabetMismatch {
                        left: self.config.alphabet_size,
                        right: mu.len(),
                    });
                }
            }
            (DataModel::Distinct { mus, .. }, Model::Distinct) => {
                if mus.len() != self.config.k {
                    return Err(Error::config(format!(
                        "distinct data model needs {} outlier distributions, got {}",
                        self.config.k,
                        mus.len()
                    )));
                }
                if let Some(mu) = mus.iter().find(|mu| mu.len() != self.config.alphabet_size) {
                    return Err(Error::AlphabetMismatch {
                        left: self.config.alphabet_size,
                        right: mu.len(),
                    });
                }
            }
            _ => return Err(Error::config("data model and test model differ")),
        }
        Ok(())
    }
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Per-hypothesis estimates at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisStats {
    pub hypothesis: Hypothesis,
    pub trials: u64,
    pub errors: u64,
    pub error_rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mean_n: f64,
    pub sd_n: f64,
    pub truncation_rate: f64,
    pub slope: f64,
}

/// Pooled estimates for all hypotheses with the same number of outliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSlope {
    pub size: usize,
    pub mean_n: f64,
    pub error_rate: f64,
    pub slope: f64,
}

/// Estimates at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub threshold: f64,
    pub p_max: f64,
    /// `p_max` was 0 and was replaced by `3 / trials`; slopes are then lower
    /// bounds.
    pub rule_of_three: bool,
    pub hypotheses: Vec<HypothesisStats>,
    pub classes: Vec<ClassSlope>,
}

impl ThresholdResult {
    pub fn class(&self, size: usize) -> Option<&ClassSlope> {
        self.classes.iter().find(|c| c.size == size)
    }

    pub fn stats(&self, h: &Hypothesis) -> Option<&HypothesisStats> {
        self.hypotheses.iter().find(|s| &s.hypothesis == h)
    }
}

/// Output of [`sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub plan: TrialPlan,
    pub results: Vec<ThresholdResult>,
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    n: u64,
    wrong: bool,
    truncated: bool,
}

/// Estimates at `plan.config.threshold` only.
pub fn run_trials(plan: &TrialPlan, jobs: usize) -> Result<ThresholdResult> {
    let mut out = sweep(plan, &[plan.config.threshold], jobs)?;
    Ok(out.results.remove(0))
}

/// Runs every hypothesis `trials_per_hypothesis` times against all
/// thresholds (strictly increasing) using `jobs` worker threads.
pub fn sweep(plan: &TrialPlan, thresholds: &[f64], jobs: usize) -> Result<SweepResult> {
    plan.validate()?;
    let config = &plan.config;
    let space = config.space()?;
    let trials = plan.trials_per_hypothesis;
    let hyps = space.hypotheses();
    let certify_null = config.model == Model::Identical && config.knowledge != Knowledge::BothKnown;

    let run = |idx: u64| -> Result<Vec<Outcome>> {
        let h = (idx / trials) as usize;
        let t = idx % trials;
        let truth = &hyps[h];
        let dists = plan.data.sequence_distributions(truth, config.m);
        let mut source = IidSource::with_stream(&dists, plan.seed, ((h as u64) << 32) | t);
        let options = RunOptions {
            null_tail_tolerance: if certify_null && truth.is_null() {
                plan.null_tail_tolerance
            } else {
                None
            },
            disable_pruning: false,
        };
        let results = run_thresholds(config, thresholds, &mut source, options)?;
        Ok(results
            .into_iter()
            .map(|r| Outcome {
                n: r.stopping_time,
                wrong: &r.decision != truth,
                truncated: r.truncated,
            })
            .collect())
    };

    let total = trials * hyps.len() as u64;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    let outcomes: Vec<Vec<Outcome>> =
        pool.install(|| (0..total).into_par_iter().map(run).collect::<Result<Vec<_>>>())?;

    let mut results = Vec::with_capacity(thresholds.len());
    for (ti, &t) in thresholds.iter().enumerate() {
        let mut stats = Vec::with_capacity(hyps.len());
        for (h, hyp) in hyps.iter().enumerate() {
            let block = &outcomes[h * trials as usize..(h + 1) * trials as usize];
            stats.push(summarize(hyp, block.iter().map(|o| o[ti])));
        }
        let p_raw = stats.iter().map(|s| s.error_rate).fold(0.0, f64::max);
        let rule_of_three = p_raw == 0.0;
        let p_max = if rule_of_three { (3.0 / trials as f64).min(1.0) } else { p_raw };
        for s in &mut stats {
            s.slope = -p_max.ln() / s.mean_n;
        }
        let mut classes = Vec::new();
        let sizes: Vec<usize> = match config.model {
            Model::Identical => (0..=config.k).collect(),
            Model::Distinct => vec![config.k],
        };
        for size in sizes {
            let members: Vec<&HypothesisStats> =
                stats.iter().filter(|s| s.hypothesis.len() == size).collect();
            let count = members.len() as f64;
            let mean_n = members.iter().map(|s| s.mean_n).sum::<f64>() / count;
            let error_rate = members.iter().map(|s| s.error_rate).sum::<f64>() / count;
            classes.push(ClassSlope {
                size,
                mean_n,
                error_rate,
                slope: -p_max.ln() / mean_n,
            });
        }
        results.push(ThresholdResult {
            threshold: t,
            p_max: p_raw,
            rule_of_three,
            hypotheses: stats,
            classes,
        });
    }
    Ok(SweepResult {
        plan: plan.clone(),
        results,
    })
}

fn summarize(hyp: &Hypothesis, outcomes: impl Iterator<Item = Outcome> + Clone) -> HypothesisStats {
    let trials = outcomes.clone().count() as u64;
    let errors = outcomes.clone().filter(|o| o.wrong).count() as u64;
    let truncations = outcomes.clone().filter(|o| o.truncated).count() as u64;
    let mean_n = outcomes.clone().map(|o| o.n as f64).sum::<f64>() / trials as f64;
    let sd_n = if trials > 1 {
        let ss: f64 = outcomes.map(|o| (o.n as f64 - mean_n).powi(2)).sum();
        (ss / (trials - 1) as f64).sqrt()
    } else {
        0.0
    };
    let (ci_lo, ci_hi) = wilson_interval(errors, trials);
    HypothesisStats {
        hypothesis: hyp.clone(),
        trials,
        errors,
        error_rate: errors as f64 / trials as f64,
        ci_lo,
        ci_hi,
        mean_n,
        sd_n,
        truncation_rate: truncations as f64 / trials as f64,
        slope: f64::NAN,
    }
}

/// Header lines (`# ...`) identifying how an artifact was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: serde_json::Value,
}

impl Provenance {
    pub fn new(seed: u64, config: serde_json::Value) -> Self {
        Provenance {
            tool: "seq-outlier".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            config,
        }
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# {} {}", self.tool, self.version)?;
        writeln!(w, "# seed: {}", self.seed)?;
        writeln!(w, "# config: {}", self.config)?;
        Ok(())
    }

    /// Recovers the config recorded by [`Provenance::write`].
    pub fn read_config(text: &str) -> Option<serde_json::Value> {
        text.lines()
            .take_while(|l| l.starts_with('#'))
            .find_map(|l| l.strip_prefix("# config: "))
            .and_then(|c| serde_json::from_str(c).ok())
    }
}

/// One row per (threshold, hypothesis).
pub fn write_sweep_csv<W: Write>(mut w: W, result: &SweepResult, provenance: &Provenance) -> Result<()> {
    provenance.write(&mut w)?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record([
        "T",
        "hypothesis",
        "error_rate",
        "ci_lo",
        "ci_hi",
        "mean_N",
        "slope",
        "truncation_rate",
    ])?;
    for r in &result.results {
        for s in &r.hypotheses {
            csv.write_record([
                r.threshold.to_string(),
                s.hypothesis.to_string(),
                s.error_rate.to_string(),
                s.ci_lo.to_string(),
                s.ci_hi.to_string(),
                s.mean_n.to_string(),
                s.slope.to_string(),
                s.truncation_rate.to_string(),
            ])?;
        }
    }
    csv.flush()?;
    Ok(())
}

/// Whitespace-separated slope-vs-T table, one column per outlier count.
pub fn write_slope_table<W: Write>(
    mut w: W,
    result: &SweepResult,
    sizes: &[usize],
    provenance: &Provenance,
) -> Result<()> {
    provenance.write(&mut w)?;
    write!(w, "# T")?;
    for s in sizes {
        write!(w, " slope_S{s}")?;
    }
    writeln!(w, " p_max rule_of_three")?;
    for r in &result.results {
        write!(w, "{}", r.threshold)?;
        for &s in sizes {
            let v = r.class(s).map(|c| c.slope).unwrap_or(f64::NAN);
            write!(w, " {v}")?;
        }
        writeln!(w, " {} {}", r.p_max, u8::from(r.rule_of_three))?;
    }
    Ok(())
}

/// Pretty JSON of the full sweep, provenance included.
pub fn write_sweep_json<W: Write>(w: W, result: &SweepResult, provenance: &Provenance) -> Result<()> {
    #[derive(Serialize)]
    struct Doc<'a> {
        provenance: &'a Provenance,
        #[serde(flatten)]
        result: &'a SweepResult,
    }
    serde_json::to_writer_pretty(w, &Doc { provenance, result })?;
    Ok(())
}
