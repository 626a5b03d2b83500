//! Candidate outlier subsets and their generalized-likelihood scores.
//!
//! Every score here is a sum of relative entropies between the empirical
//! distributions of the sequences and the ML estimates implied by a
//! hypothesis. Multiplied by the sample count `n`, a score equals the
//! log-likelihood shortfall of the hypothesis against the unconstrained
//! per-sequence fit, so the best hypothesis is the one with the smallest
//! score.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distributions::{kl, Distribution};
use crate::error::{Error, Result};

/// Largest number of sequences supported (subsets are kept as bit masks).
pub const MAX_SEQUENCES: usize = 64;

/// Whether the outliers share one distribution or may each have their own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Up to K outliers, all drawn from the same distribution; includes the null.
    Identical,
    /// Exactly K outliers, each with its own distribution; no null.
    Distinct,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Identical => f.write_str("identical"),
            Model::Distinct => f.write_str("distinct"),
        }
    }
}

/// A set of outlier sequence indices, kept sorted.
///
/// Ordered by size first and then lexicographically, which is also the
/// enumeration order of [`HypothesisSpace`] and the tie-break order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Hypothesis(Vec<usize>);

impl Hypothesis {
    pub fn new(mut outliers: Vec<usize>) -> Result<Self> {
        outliers.sort_unstable();
        if outliers.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidHypothesis(format!(
                "duplicate index in {outliers:?}"
            )));
        }
        if outliers.last().is_some_and(|&i| i >= MAX_SEQUENCES) {
            return Err(Error::InvalidHypothesis(format!(
                "index exceeds {MAX_SEQUENCES} sequences"
            )));
        }
        Ok(Hypothesis(outliers))
    }

    /// The null hypothesis (no outliers).
    pub fn null() -> Self {
        Hypothesis(Vec::new())
    }

    pub fn outliers(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_null(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &i| m | (1u64 << i))
    }

    fn check_indices(&self, m: usize) -> Result<()> {
        match self.0.last() {
            Some(&i) if i >= m => Err(Error::InvalidHypothesis(format!(
                "index {i} out of range for {m} sequences"
            ))),
            _ => Ok(()),
        }
    }
}

impl Ord for Hypothesis {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Hypothesis {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl TryFrom<Vec<usize>> for Hypothesis {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Hypothesis::new(v)
    }
}

impl From<Hypothesis> for Vec<usize> {
    fn from(h: Hypothesis) -> Vec<usize> {
        h.0
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("]")
    }
}

/// All admissible hypotheses for `M` sequences and outlier bound `K`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HypothesisSpace {
    m: usize,
    k: usize,
    model: Model,
    hypotheses: Vec<Hypothesis>,
}

/// Checks `M >= 3` and `1 <= K < M / 2`.
pub fn check_dimensions(m: usize, k: usize) -> Result<()> {
    if m < 3 || k < 1 || 2 * k >= m || m > MAX_SEQUENCES {
        return Err(Error::InvalidSpace { m, k });
    }
    Ok(())
}

fn push_combinations(m: usize, size: usize, out: &mut Vec<Hypothesis>) {
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        out.push(Hypothesis(idx.clone()));
        // advance to the next combination in lexicographic order
        let mut pos = size;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if idx[pos] < m - size + pos {
                break;
            }
            if pos == 0 {
                return;
            }
        }
        idx[pos] += 1;
        for j in pos + 1..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

impl HypothesisSpace {
    /// Enumerates by subset size, then lexicographically.
    pub fn enumerate(m: usize, k: usize, model: Model) -> Result<Self> {
        check_dimensions(m, k)?;
        let mut hypotheses = Vec::new();
        match model {
            Model::Identical => {
                hypotheses.push(Hypothesis::null());
                for size in 1..=k {
                    push_combinations(m, size, &mut hypotheses);
                }
            }
            Model::Distinct => push_combinations(m, k, &mut hypotheses),
        }
        Ok(HypothesisSpace {
            m,
            k,
            model,
            hypotheses,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Hypothesis> {
        self.hypotheses.get(index)
    }

    pub fn index_of(&self, h: &Hypothesis) -> Option<usize> {
        self.hypotheses.binary_search(h).ok()
    }

    /// Checks that `h` belongs to this space.
    pub fn validate(&self, h: &Hypothesis) -> Result<()> {
        h.check_indices(self.m)?;
        if self.index_of(h).is_none() {
            return Err(Error::InvalidHypothesis(format!(
                "{h} is not in the {} space with M = {}, K = {}",
                self.model, self.m, self.k
            )));
        }
        Ok(())
    }
}

fn check_gammas(gammas: &[Distribution], s: &Hypothesis) -> Result<usize> {
    let first = gammas
        .first()
        .ok_or_else(|| Error::InvalidHypothesis("no sequences".into()))?;
    for g in gammas {
        if g.len() != first.len() {
            return Err(Error::AlphabetMismatch {
                left: first.len(),
                right: g.len(),
            });
        }
    }
    s.check_indices(gammas.len())?;
    Ok(first.len())
}

fn pooled<'a>(gammas: impl Iterator<Item = &'a Distribution>, size: usize) -> Vec<f64> {
    let mut acc = vec![0.0; size];
    let mut count = 0usize;
    for g in gammas {
        for (a, p) in acc.iter_mut().zip(g.probs()) {
            *a += p;
        }
        count += 1;
    }
    for a in &mut acc {
        *a /= count as f64;
    }
    acc
}

fn group_kl<'a>(gammas: impl Iterator<Item = &'a Distribution>, reference: &[f64]) -> f64 {
    gammas.map(|g| kl(g.probs(), reference)).sum()
}

fn split<'a>(
    gammas: &'a [Distribution],
    s: &'a Hypothesis,
) -> (
    impl Iterator<Item = &'a Distribution> + Clone,
    impl Iterator<Item = &'a Distribution> + Clone,
) {
    let inside = s.outliers().iter().map(move |&i| &gammas[i]);
    let outside = gammas
        .iter()
        .enumerate()
        .filter(move |(j, _)| !s.contains(*j))
        .map(|(_, g)| g);
    (inside, outside)
}

/// Score with the typical distribution known:
/// `sum_{i in S} D(g_i || mu_S) + sum_{j not in S} D(g_j || pi)`,
/// where `mu_S` is the equal-weight average of the empiricals in `S`.
pub fn gl_score_typ(s: &Hypothesis, gammas: &[Distribution], pi: &Distribution) -> Result<f64> {
    let size = check_gammas(gammas, s)?;
    if s.is_null() {
        return Err(Error::InvalidHypothesis(
            "the null hypothesis has no generalized-likelihood score".into(),
        ));
    }
    if pi.len() != size {
        return Err(Error::AlphabetMismatch {
            left: size,
            right: pi.len(),
        });
    }
    if !pi.is_full_support() {
        return Err(Error::NotFullSupport);
    }
    let (inside, outside) = split(gammas, s);
    let mu_hat = pooled(inside.clone(), size);
    Ok(group_kl(inside, &mu_hat) + group_kl(outside, pi.probs()))
}

/// Score with neither distribution known: both groups are compared with
/// their own pooled empirical distribution.
pub fn gl_score_univ(s: &Hypothesis, gammas: &[Distribution]) -> Result<f64> {
    let size = check_gammas(gammas, s)?;
    if s.is_null() || s.len() >= gammas.len() {
        return Err(Error::InvalidHypothesis(format!(
            "universal score needs 0 < |S| < M, got {s}"
        )));
    }
    let (inside, outside) = split(gammas, s);
    let mu_hat = pooled(inside.clone(), size);
    let pi_hat = pooled(outside.clone(), size);
    Ok(group_kl(inside, &mu_hat) + group_kl(outside, &pi_hat))
}

fn check_exact_size(s: &Hypothesis, k: usize) -> Result<()> {
    if s.len() != k {
        return Err(Error::InvalidHypothesis(format!(
            "distinct-outlier hypotheses have exactly {k} members, got {s}"
        )));
    }
    Ok(())
}

/// Distinct-outlier score with `pi` known: `sum_{j not in S} D(g_j || pi)`.
pub fn gl_score_distinct_typ(
    s: &Hypothesis,
    gammas: &[Distribution],
    pi: &Distribution,
    k: usize,
) -> Result<f64> {
    let size = check_gammas(gammas, s)?;
    check_exact_size(s, k)?;
    if pi.len() != size {
        return Err(Error::AlphabetMismatch {
            left: size,
            right: pi.len(),
        });
    }
    if !pi.is_full_support() {
        return Err(Error::NotFullSupport);
    }
    let (_, outside) = split(gammas, s);
    Ok(group_kl(outside, pi.probs()))
}

/// Distinct-outlier score with nothing known: the complement of `S` is
/// compared with its own pooled empirical distribution.
pub fn gl_score_distinct_univ(s: &Hypothesis, gammas: &[Distribution], k: usize) -> Result<f64> {
    let size = check_gammas(gammas, s)?;
    check_exact_size(s, k)?;
    let (_, outside) = split(gammas, s);
    let pi_hat = pooled(outside.clone(), size);
    Ok(group_kl(outside, &pi_hat))
}

/// Argmin over an index-aligned score table plus the gap to the runner-up.
///
/// Ties go to the lowest index. The gap is `+inf` when there is a single
/// entry.
pub fn best_index(scores: &[f64]) -> Result<(usize, f64)> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NanScore);
    }
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s < scores[best] {
            best = i;
        }
    }
    let runner_up = scores
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, &s)| s)
        .fold(f64::INFINITY, f64::min);
    let gap = if runner_up.is_infinite() && scores[best].is_infinite() {
        0.0
    } else {
        runner_up - scores[best]
    };
    Ok((best, gap))
}

/// The hypothesis with the smallest score and its margin over all competitors.
pub fn best_hypothesis(scores: &BTreeMap<Hypothesis, f64>) -> Result<(Hypothesis, f64)> {
    let values: Vec<f64> = scores.values().copied().collect();
    let (i, gap) = best_index(&values)?;
    let h = scores.keys().nth(i).cloned().ok_or(Error::EmptyScores)?;
    Ok((h, gap))
}
