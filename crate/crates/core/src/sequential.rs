//! Sequential decision engines.
//!
//! All engines work from per-sequence symbol counts. With `phi(x) = x ln x`,
//! `n` times a generalized-likelihood score splits into a part shared by all
//! hypotheses and a part that depends on the hypothesis; only the latter is
//! evaluated, and the stopping statistic is the difference between the
//! runner-up and the leader.

use std::io::Write;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::hypothesis::{check_dimensions, Hypothesis, HypothesisSpace, Model};

/// What the test is told about the generating distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Knowledge {
    /// Both `mu` and `pi` known: the MSPRT.
    BothKnown,
    /// Only the typical distribution `pi` known.
    PiKnown,
    /// Nothing known.
    Universal,
}

/// Truncation horizon `f(T)` for the identical-outlier model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    /// `f(T) = T^p`.
    Power(f64),
    /// A fixed number of steps, independent of `T`.
    Steps(u64),
}

impl Default for Horizon {
    fn default() -> Self {
        Horizon::Power(5.0)
    }
}

impl Horizon {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Horizon::Power(p) => t.powf(p),
            Horizon::Steps(s) => s as f64,
        }
    }

    /// `floor(f(T))`, saturating at `u64::MAX`.
    pub fn steps(&self, t: f64) -> u64 {
        match *self {
            Horizon::Steps(s) => s,
            Horizon::Power(_) => {
                let v = self.value(t).floor();
                if v >= u64::MAX as f64 {
                    u64::MAX
                } else {
                    v as u64
                }
            }
        }
    }

    fn check(&self, t: f64) -> Result<()> {
        if let Horizon::Power(p) = *self {
            if !p.is_finite() {
                return Err(Error::config(format!("horizon exponent {p} is not finite")));
            }
        }
        let f = self.value(t);
        let floor = t * t.ln();
        if f.is_nan() || f < floor {
            return Err(Error::config(format!(
                "truncation horizon f(T) = {f} is below T ln T = {floor} at T = {t}"
            )));
        }
        Ok(())
    }
}

/// Everything a sequential test needs besides the observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub m: usize,
    pub k: usize,
    pub model: Model,
    pub knowledge: Knowledge,
    pub threshold: f64,
    #[serde(default)]
    pub horizon: Horizon,
    pub alphabet_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_pi: Option<Distribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_mu: Option<Distribution>,
    #[serde(default)]
    pub record_trajectory: bool,
}

impl TestConfig {
    /// A universal configuration with the default horizon.
    pub fn universal(m: usize, k: usize, model: Model, alphabet_size: usize, threshold: f64) -> Self {
        TestConfig {
            m,
            k,
            model,
            knowledge: Knowledge::Universal,
            threshold,
            horizon: Horizon::default(),
            alphabet_size,
            known_pi: None,
            known_mu: None,
            record_trajectory: false,
        }
    }

    pub fn with_pi(mut self, pi: Distribution) -> Self {
        self.knowledge = Knowledge::PiKnown;
        self.known_pi = Some(pi);
        self
    }

    pub fn with_mu_pi(mut self, mu: Distribution, pi: Distribution) -> Self {
        self.knowledge = Knowledge::BothKnown;
        self.known_mu = Some(mu);
        self.known_pi = Some(pi);
        self
    }

    pub fn space(&self) -> Result<HypothesisSpace> {
        HypothesisSpace::enumerate(self.m, self.k, self.model)
    }

    /// `floor(f(T))` for the identical model, `None` for the distinct model.
    pub fn horizon_steps(&self, t: f64) -> Option<u64> {
        match (self.model, self.knowledge) {
            (Model::Identical, Knowledge::PiKnown | Knowledge::Universal) => {
                Some(self.horizon.steps(t))
            }
            _ => None,
        }
    }

    fn check_threshold(&self, t: f64) -> Result<()> {
        if !(t > 1.0) || !t.is_finite() {
            return Err(Error::config(format!("threshold T must be finite and > 1, got {t}")));
        }
        if self.horizon_steps(t).is_some() {
            self.horizon.check(t)?;
        }
        Ok(())
    }

    fn check_dist(&self, d: &Distribution, name: &str) -> Result<()> {
        if d.len() != self.alphabet_size {
            return Err(Error::AlphabetMismatch {
                left: self.alphabet_size,
                right: d.len(),
            });
        }
        if !d.is_full_support() {
            return Err(Error::config(format!("{name} must have full support")));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        check_dimensions(self.m, self.k)?;
        if self.alphabet_size < 2 {
            return Err(Error::InvalidAlphabet(self.alphabet_size));
        }
        self.check_threshold(self.threshold)?;
        match self.knowledge {
            Knowledge::BothKnown => {
                if self.model != Model::Identical {
                    return Err(Error::config(
                        "the MSPRT is available for the identical-outlier model only",
                    ));
                }
                let (mu, pi) = match (&self.known_mu, &self.known_pi) {
                    (Some(mu), Some(pi)) => (mu, pi),
                    _ => return Err(Error::config("both_known requires known_mu and known_pi")),
                };
                self.check_dist(mu, "known_mu")?;
                self.check_dist(pi, "known_pi")?;
                if mu == pi {
                    return Err(Error::config("the MSPRT needs mu != pi"));
                }
            }
            Knowledge::PiKnown => {
                let pi = self
                    .known_pi
                    .as_ref()
                    .ok_or_else(|| Error::config("pi_known requires known_pi"))?;
                self.check_dist(pi, "known_pi")?;
            }
            Knowledge::Universal => {}
        }
        Ok(())
    }
}

/// Threshold of the repeated significance tests: `ln T + (M+1)|Y| ln(n+1)`.
pub fn threshold(n: u64, t: f64, m: usize, alphabet_size: usize) -> f64 {
    t.ln() + ((m + 1) * alphabet_size) as f64 * ((n + 1) as f64).ln()
}

/// Supplies one observation per sequence per time step.
pub trait ObservationSource {
    /// Fills `out` (length M) with the next symbols; `false` when exhausted.
    fn next_into(&mut self, out: &mut [usize]) -> bool;
}

/// Independent draws, sequence `i` from `dists[i]`.
#[derive(Debug, Clone)]
pub struct IidSource {
    cdfs: Vec<Vec<f64>>,
    rng: ChaCha8Rng,
}

impl IidSource {
    pub fn new(dists: &[Distribution], seed: u64) -> Self {
        Self::with_stream(dists, seed, 0)
    }

    pub fn with_stream(dists: &[Distribution], seed: u64, stream: u64) -> Self {
        let cdfs = dists
            .iter()
            .map(|d| {
                let mut acc = 0.0;
                d.probs()
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect()
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        IidSource { cdfs, rng }
    }
}

fn sample(cdf: &[f64], u: f64) -> usize {
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

impl ObservationSource for IidSource {
    fn next_into(&mut self, out: &mut [usize]) -> bool {
        for (o, cdf) in out.iter_mut().zip(&self.cdfs) {
            *o = sample(cdf, self.rng.random::<f64>());
        }
        true
    }
}

/// Plays back a fixed list of observation vectors.
#[derive(Debug, Clone)]
pub struct ReplaySource {
    rows: Vec<Vec<usize>>,
    pos: usize,
}

impl ReplaySource {
    pub fn new(rows: Vec<Vec<usize>>) -> Self {
        ReplaySource { rows, pos: 0 }
    }

    /// Builds rows from per-sequence symbol streams of equal length.
    pub fn from_sequences(sequences: &[Vec<usize>]) -> Self {
        let len = sequences.iter().map(Vec::len).min().unwrap_or(0);
        let rows = (0..len)
            .map(|t| sequences.iter().map(|s| s[t]).collect())
            .collect();
        ReplaySource::new(rows)
    }
}

impl ObservationSource for ReplaySource {
    fn next_into(&mut self, out: &mut [usize]) -> bool {
        match self.rows.get(self.pos) {
            Some(row) if row.len() == out.len() => {
                out.copy_from_slice(row);
                self.pos += 1;
                true
            }
            _ => false,
        }
    }
}

/// One step of a recorded run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub n: u64,
    pub best: Hypothesis,
    pub gap: f64,
    pub threshold: f64,
}

/// Outcome of one sequential test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    #[serde(rename = "n")]
    pub stopping_time: u64,
    pub decision: Hypothesis,
    pub truncated: bool,
    /// Set when the null decision was issued from the tail bound instead of
    /// simulating up to the horizon.
    #[serde(skip)]
    pub certified: bool,
    #[serde(skip)]
    pub trajectory: Option<Vec<TrajectoryPoint>>,
}

pub fn write_trajectory_csv<W: Write>(writer: W, points: &[TrajectoryPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["n", "best", "gap", "threshold"])?;
    for p in points {
        w.write_record([
            p.n.to_string(),
            p.best.to_string(),
            p.gap.to_string(),
            p.threshold.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Extra switches for [`run_thresholds`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    /// Only meaningful when the data follow the null in the identical model.
    /// Once the probability of any later stop is provably below this value,
    /// the run is closed as truncated with the null decision.
    pub null_tail_tolerance: Option<f64>,
    /// Score every hypothesis at every step instead of skipping steps on
    /// which no gap can reach the threshold.
    pub disable_pruning: bool,
}

const PHI_TABLE_BITS: u32 = 20;

fn phi_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..1u64 << PHI_TABLE_BITS)
            .map(|k| if k == 0 { 0.0 } else { k as f64 * (k as f64).ln() })
            .collect()
    })
}

#[inline]
fn phi(k: u64) -> f64 {
    if k < 1 << PHI_TABLE_BITS {
        phi_table()[k as usize]
    } else {
        k as f64 * (k as f64).ln()
    }
}

/// Bound on `P(stop at some m > n)` under the null for the identical-model
/// GL tests: `(n+1)^(1-|Y|) / ((|Y|-1) T)`.
pub fn null_tail_bound(n: u64, t: f64, alphabet_size: usize) -> f64 {
    let a = alphabet_size as f64;
    ((n + 1) as f64).powf(1.0 - a) / ((a - 1.0) * t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Msprt,
    IdenticalPi,
    IdenticalUniv,
    DistinctPi,
    DistinctUniv,
}

struct Engine {
    family: Family,
    m: usize,
    a: usize,
    hypotheses: Vec<Hypothesis>,
    inside: Vec<Vec<usize>>,
    outside: Vec<Vec<usize>>,
    ln_pi: Vec<f64>,
    ln_mu: Vec<f64>,
    counts: Vec<u64>,
    totals: Vec<u64>,
    ll_mu: Vec<f64>,
    ll_pi: Vec<f64>,
    n: u64,
    scores: Vec<f64>,
    group: Vec<u64>,
}

impl Engine {
    fn new(config: &TestConfig) -> Result<Self> {
        let family = match (config.model, config.knowledge) {
            (Model::Identical, Knowledge::BothKnown) => Family::Msprt,
            (Model::Identical, Knowledge::PiKnown) => Family::IdenticalPi,
            (Model::Identical, Knowledge::Universal) => Family::IdenticalUniv,
            (Model::Distinct, Knowledge::PiKnown) => Family::DistinctPi,
            (Model::Distinct, Knowledge::Universal) => Family::DistinctUniv,
            (Model::Distinct, Knowledge::BothKnown) => {
                return Err(Error::config(
                    "the MSPRT is available for the identical-outlier model only",
                ))
            }
        };
        let space = config.space()?;
        let hypotheses: Vec<Hypothesis> = space
            .hypotheses()
            .iter()
            .filter(|h| family == Family::Msprt || config.model == Model::Distinct || !h.is_null())
            .cloned()
            .collect();
        let m = config.m;
        let inside = hypotheses.iter().map(|h| h.outliers().to_vec()).collect();
        let outside = hypotheses
            .iter()
            .map(|h| (0..m).filter(|i| !h.contains(*i)).collect())
            .collect();
        let ln = |d: &Option<Distribution>| -> Vec<f64> {
            d.as_ref()
                .map(|d| d.probs().iter().map(|p| p.ln()).collect())
                .unwrap_or_default()
        };
        let a = config.alphabet_size;
        Ok(Engine {
            family,
            m,
            a,
            inside,
            outside,
            ln_pi: ln(&config.known_pi),
            ln_mu: ln(&config.known_mu),
            counts: vec![0; m * a],
            totals: vec![0; a],
            ll_mu: vec![0.0; m],
            ll_pi: vec![0.0; m],
            n: 0,
            scores: vec![0.0; hypotheses.len()],
            group: vec![0; a],
            hypotheses,
        })
    }

    fn observe(&mut self, obs: &[usize]) -> Result<()> {
        for &y in obs {
            if y >= self.a {
                return Err(Error::SymbolOutOfRange {
                    symbol: y,
                    size: self.a,
                });
            }
        }
        self.n += 1;
        for (i, &y) in obs.iter().enumerate() {
            self.counts[i * self.a + y] += 1;
            self.totals[y] += 1;
            if self.family == Family::Msprt {
                self.ll_mu[i] += self.ln_mu[y];
                self.ll_pi[i] += self.ln_pi[y];
            }
        }
        Ok(())
    }

    fn row_phi(&self, i: usize) -> f64 {
        self.counts[i * self.a..(i + 1) * self.a]
            .iter()
            .map(|&c| phi(c))
            .sum()
    }

    /// Upper bound on `n` times any score, hence on `n` times any gap.
    /// Returns `(bound, rounding tolerance)`.
    fn gap_bound(&self) -> Option<(f64, f64)> {
        let m = self.m as u64;
        let f: f64 = (0..self.m).map(|i| self.row_phi(i)).sum();
        let own = f - m as f64 * phi(self.n);
        let bound = match self.family {
            Family::Msprt => return None,
            Family::IdenticalUniv | Family::DistinctUniv => {
                own - self.totals.iter().map(|&c| phi(c)).sum::<f64>() + phi(m * self.n)
            }
            Family::IdenticalPi | Family::DistinctPi => {
                own - self
                    .totals
                    .iter()
                    .zip(&self.ln_pi)
                    .map(|(&c, l)| c as f64 * l)
                    .sum::<f64>()
            }
        };
        Some((bound, 1e-9 * (1.0 + phi(m * self.n))))
    }

    /// Fills `scores` with the hypothesis-dependent part of `n` times each
    /// score (negative log-likelihood for the MSPRT).
    fn score_all(&mut self) {
        let n = self.n;
        let m = self.m as u64;
        for h in 0..self.hypotheses.len() {
            let s = self.inside[h].len() as u64;
            let value = match self.family {
                Family::Msprt => {
                    let pi_part: f64 = self.outside[h].iter().map(|&j| self.ll_pi[j]).sum();
                    let mu_part: f64 = self.inside[h].iter().map(|&i| self.ll_mu[i]).sum();
                    -(pi_part + mu_part)
                }
                Family::IdenticalUniv | Family::IdenticalPi => {
                    self.fill_group(h);
                    let mut v = phi(s * n) - self.group.iter().map(|&c| phi(c)).sum::<f64>();
                    if self.family == Family::IdenticalUniv {
                        v += phi((m - s) * n);
                        for y in 0..self.a {
                            v -= phi(self.totals[y] - self.group[y]);
                        }
                    } else {
                        for y in 0..self.a {
                            v -= (self.totals[y] - self.group[y]) as f64 * self.ln_pi[y];
                        }
                    }
                    v
                }
                Family::DistinctPi | Family::DistinctUniv => {
                    self.fill_group(h);
                    let mut v: f64 = self.outside[h].iter().map(|&j| self.row_phi(j)).sum();
                    for y in 0..self.a {
                        let c = self.totals[y] - self.group[y];
                        v -= if self.family == Family::DistinctUniv {
                            phi(c)
                        } else {
                            c as f64 * self.ln_pi[y]
                        };
                    }
                    v
                }
            };
            self.scores[h] = value;
        }
    }

    fn fill_group(&mut self, h: usize) {
        self.group.iter_mut().for_each(|g| *g = 0);
        for &i in &self.inside[h] {
            let row = &self.counts[i * self.a..(i + 1) * self.a];
            for (g, &c) in self.group.iter_mut().zip(row) {
                *g += c;
            }
        }
    }

    fn best(&self) -> (usize, f64) {
        let mut best = 0;
        for (h, &s) in self.scores.iter().enumerate().skip(1) {
            if s < self.scores[best] {
                best = h;
            }
        }
        let runner_up = self
            .scores
            .iter()
            .enumerate()
            .filter(|&(h, _)| h != best)
            .map(|(_, &s)| s)
            .fold(f64::INFINITY, f64::min);
        (best, runner_up - self.scores[best])
    }

    fn stat_threshold(&self, t: f64) -> f64 {
        match self.family {
            Family::Msprt => t.ln(),
            _ => threshold(self.n, t, self.m, self.a),
        }
    }
}

/// Runs the test once with `config.threshold`.
pub fn run_test(config: &TestConfig, source: &mut dyn ObservationSource) -> Result<TestResult> {
    let mut out = run_thresholds(config, &[config.threshold], source, RunOptions::default())?;
    Ok(out.remove(0))
}

/// MSPRT for known `mu` and `pi`, null hypothesis included.
pub fn run_msprt(config: &TestConfig, source: &mut dyn ObservationSource) -> Result<TestResult> {
    if config.knowledge != Knowledge::BothKnown {
        return Err(Error::config("run_msprt requires knowledge = both_known"));
    }
    run_test(config, source)
}

/// Truncated generalized-likelihood test for the identical-outlier model.
pub fn run_gl_identical(config: &TestConfig, source: &mut dyn ObservationSource) -> Result<TestResult> {
    if config.model != Model::Identical || config.knowledge == Knowledge::BothKnown {
        return Err(Error::config(
            "run_gl_identical requires the identical model with pi_known or universal knowledge",
        ));
    }
    run_test(config, source)
}

/// Untruncated generalized-likelihood test for the distinct-outlier model.
pub fn run_gl_distinct(config: &TestConfig, source: &mut dyn ObservationSource) -> Result<TestResult> {
    if config.model != Model::Distinct {
        return Err(Error::config("run_gl_distinct requires the distinct model"));
    }
    run_test(config, source)
}

struct Pending {
    t: f64,
    horizon: Option<u64>,
}

/// Runs one observation path against several thresholds at once.
///
/// The stopping statistic does not depend on `T`, so the result for each
/// threshold equals a separate run on the same path. `thresholds` must be
/// strictly increasing; `config.threshold` is ignored.
pub fn run_thresholds(
    config: &TestConfig,
    thresholds: &[f64],
    source: &mut dyn ObservationSource,
    options: RunOptions,
) -> Result<Vec<TestResult>> {
    config.validate()?;
    if thresholds.is_empty() {
        return Err(Error::config("no thresholds given"));
    }
    for &t in thresholds {
        config.check_threshold(t)?;
    }
    if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::config("thresholds must be strictly increasing"));
    }
    if let Some(eps) = options.null_tail_tolerance {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::config(format!("null tail tolerance must lie in (0,1), got {eps}")));
        }
    }
    let mut engine = Engine::new(config)?;
    let pending: Vec<Pending> = thresholds
        .iter()
        .map(|&t| Pending {
            t,
            horizon: config.horizon_steps(t),
        })
        .collect();
    let certify = options.null_tail_tolerance.filter(|_| {
        matches!(engine.family, Family::IdenticalPi | Family::IdenticalUniv)
    });
    let record = config.record_trajectory;
    let prune = !options.disable_pruning && !record;

    let mut results: Vec<Option<TestResult>> = vec![None; thresholds.len()];
    let mut trace: Vec<(u64, usize, f64)> = Vec::new();
    let mut next = 0;
    let mut obs = vec![0usize; config.m];
    let finish = |n: u64, decision: Hypothesis, truncated: bool, certified: bool| TestResult {
        stopping_time: n,
        decision,
        truncated,
        certified,
        trajectory: None,
    };

    while next < pending.len() {
        if let Some(eps) = certify {
            let n = engine.n;
            if n >= 1 && null_tail_bound(n, pending[next].t, config.alphabet_size) <= eps {
                for (p, slot) in pending.iter().zip(results.iter_mut()).skip(next) {
                    let h = p.horizon.unwrap_or(u64::MAX);
                    *slot = Some(finish(h, Hypothesis::null(), true, true));
                }
                break;
            }
        }
        if !source.next_into(&mut obs) {
            return Err(Error::SourceExhausted(engine.n));
        }
        engine.observe(&obs)?;
        let n = engine.n;

        let skip = prune
            && engine
                .gap_bound()
                .is_some_and(|(b, tol)| b + tol <= engine.stat_threshold(pending[next].t));
        if !skip {
            engine.score_all();
            let (best, gap) = engine.best();
            if record {
                trace.push((n, best, gap));
            }
            while next < pending.len() && gap > engine.stat_threshold(pending[next].t) {
                results[next] = Some(finish(n, engine.hypotheses[best].clone(), false, false));
                next += 1;
            }
        }
        while next < pending.len() && pending[next].horizon == Some(n) {
            results[next] = Some(finish(n, Hypothesis::null(), true, false));
            next += 1;
        }
    }

    let mut out: Vec<TestResult> = results.into_iter().map(|r| r.expect("all resolved")).collect();
    if record {
        for (r, p) in out.iter_mut().zip(&pending) {
            let points = trace
                .iter()
                .take_while(|(n, _, _)| *n <= r.stopping_time)
                .map(|&(n, best, gap)| TrajectoryPoint {
                    n,
                    best: engine.hypotheses[best].clone(),
                    gap,
                    threshold: match engine.family {
                        Family::Msprt => p.t.ln(),
                        _ => threshold(n, p.t, config.m, config.alphabet_size),
                    },
                })
                .collect();
            r.trajectory = Some(points);
        }
    }
    Ok(out)
}

/// Literal evaluation of `n` times a score from empirical distributions,
/// used to cross-check the count-based engine.
pub fn reference_scores(
    config: &TestConfig,
    counts: &[Vec<u64>],
) -> Result<Vec<(Hypothesis, f64)>> {
    use crate::distributions::TypeVector;
    use crate::hypothesis::{gl_score_distinct_typ, gl_score_distinct_univ, gl_score_typ, gl_score_univ};
    let types = counts
        .iter()
        .map(|c| TypeVector::from_counts(c.clone()))
        .collect::<Result<Vec<_>>>()?;
    let n = types.first().map(|t| t.n()).unwrap_or(0) as f64;
    let gammas = types
        .iter()
        .map(|t| t.empirical())
        .collect::<Result<Vec<_>>>()?;
    let space = config.space()?;
    let mut out = Vec::new();
    for h in space.hypotheses() {
        let v = match (config.model, config.knowledge) {
            (Model::Identical, Knowledge::BothKnown) => {
                let mu = config.known_mu.as_ref().ok_or(Error::config("missing mu"))?;
                let pi = config.known_pi.as_ref().ok_or(Error::config("missing pi"))?;
                let mut total = 0.0;
                for (i, c) in counts.iter().enumerate() {
                    let d = if h.contains(i) { mu } else { pi };
                    for (y, &cy) in c.iter().enumerate() {
                        total -= cy as f64 * d.prob(y).ln();
                    }
                }
                out.push((h.clone(), total));
                continue;
            }
            (Model::Identical, _) if h.is_null() => continue,
            (Model::Identical, Knowledge::PiKnown) => {
                gl_score_typ(h, &gammas, config.known_pi.as_ref().ok_or(Error::config("missing pi"))?)?
            }
            (Model::Identical, Knowledge::Universal) => gl_score_univ(h, &gammas)?,
            (Model::Distinct, Knowledge::PiKnown) => gl_score_distinct_typ(
                h,
                &gammas,
                config.known_pi.as_ref().ok_or(Error::config("missing pi"))?,
                config.k,
            )?,
            (Model::Distinct, _) => gl_score_distinct_univ(h, &gammas, config.k)?,
        };
        out.push((h.clone(), n * v));
    }
    Ok(out)
}
