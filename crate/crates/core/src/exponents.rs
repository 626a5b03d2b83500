//! Asymptotic error-exponent coefficients in closed form (nats per sample).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::distributions::{kl, Distribution};
use crate::error::{Error, Result};
use crate::hypothesis::Model;
use crate::sequential::Knowledge;

/// Which true hypothesis class an MSPRT coefficient refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MsprtCase {
    /// `|S| = K`.
    FullK,
    /// `1 <= |S| < K`.
    Partial,
    /// `S` empty.
    Null,
}

/// `M >= 3` and `1 <= K < M/2`, without the enumeration cap on `M`.
fn check_dimensions(m: usize, k: usize) -> Result<()> {
    if m < 3 || k < 1 || 2 * k >= m {
        return Err(Error::InvalidSpace { m, k });
    }
    Ok(())
}

fn check_pair(mu: &Distribution, pi: &Distribution) -> Result<()> {
    if mu.len() != pi.len() {
        return Err(Error::AlphabetMismatch {
            left: mu.len(),
            right: pi.len(),
        });
    }
    Ok(())
}

fn check_full_support(d: &Distribution) -> Result<()> {
    if d.is_full_support() {
        Ok(())
    } else {
        Err(Error::NotFullSupport)
    }
}

fn warn_if_degenerate(mu: &Distribution, pi: &Distribution) -> bool {
    let same = mu == pi;
    if same {
        log::warn!("outlier and typical distributions coincide; exponent is 0");
    }
    same
}

fn mix(a: f64, p: &[f64], b: f64, q: &[f64]) -> Vec<f64> {
    let t = a + b;
    p.iter().zip(q).map(|(x, y)| (a * x + b * y) / t).collect()
}

/// `c * D(p || q)`, with zero multiplicity contributing exactly 0.
fn term(c: f64, p: &[f64], q: &[f64]) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * kl(p, q)
    }
}

/// Minimum over the simplex of `sum_i c_i D(q_i || p)`.
///
/// The minimizer is the `c`-weighted mixture of the `q_i`; returns the value
/// and the minimizer.
pub fn weighted_minimum(components: &[(f64, &Distribution)]) -> Result<(f64, Distribution)> {
    let p = crate::distributions::mixture(components)?;
    let value = components
        .iter()
        .map(|&(c, q)| term(c, q.probs(), p.probs()))
        .sum();
    Ok((value, p))
}

/// MSPRT coefficient for the three classes of true hypothesis.
pub fn msprt_exponent(case: MsprtCase, mu: &Distribution, pi: &Distribution) -> Result<f64> {
    check_pair(mu, pi)?;
    check_full_support(mu)?;
    check_full_support(pi)?;
    if mu == pi {
        return Err(Error::Degenerate(
            "the MSPRT coefficient is 0 when mu = pi".into(),
        ));
    }
    let forward = kl(mu.probs(), pi.probs());
    let backward = kl(pi.probs(), mu.probs());
    Ok(match case {
        MsprtCase::FullK => forward,
        MsprtCase::Partial => forward.min(backward),
        MsprtCase::Null => backward,
    })
}

/// `min_p |S| D(mu || p) + D(pi || p)`.
pub fn eta(size_s: usize, mu: &Distribution, pi: &Distribution) -> Result<f64> {
    check_pair(mu, pi)?;
    if size_s == 0 {
        return Err(Error::InvalidHypothesis("eta needs |S| >= 1".into()));
    }
    if warn_if_degenerate(mu, pi) {
        return Ok(0.0);
    }
    Ok(weighted_minimum(&[(size_s as f64, mu), (1.0, pi)])?.0)
}

/// `min_p D(mu || p) + (M - K - |S|) D(pi || p)`.
pub fn eta_bar(size_s: usize, m: usize, k: usize, mu: &Distribution, pi: &Distribution) -> Result<f64> {
    check_pair(mu, pi)?;
    if size_s + k > m {
        return Err(Error::InvalidHypothesis(format!(
            "eta_bar needs M - K - |S| >= 0, got M = {m}, K = {k}, |S| = {size_s}"
        )));
    }
    if warn_if_degenerate(mu, pi) {
        return Ok(0.0);
    }
    Ok(weighted_minimum(&[(1.0, mu), ((m - k - size_s) as f64, pi)])?.0)
}

fn check_class(size_s: usize, m: usize, k: usize) -> Result<()> {
    check_dimensions(m, k)?;
    if size_s == 0 || size_s > k {
        return Err(Error::InvalidHypothesis(format!(
            "|S| must lie in 1..={k}, got {size_s}"
        )));
    }
    Ok(())
}

/// Admissible `(a, b) = (|S n S'|, |S' \ S|)` pairs for a competitor `S'`.
pub fn competitor_pairs(size_s: usize, m: usize, k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..=size_s {
        for b in 0..=(m - size_s) {
            if a + b >= 1 && a + b <= k && (a, b) != (size_s, 0) {
                out.push((a, b));
            }
        }
    }
    out
}

/// The quantity minimized in `alpha_S` for a competitor with overlap `(a, b)`.
pub fn alpha_objective(a: usize, b: usize, size_s: usize, mu: &Distribution, pi: &Distribution) -> f64 {
    let (mu, pi) = (mu.probs(), pi.probs());
    let m1 = mix(a as f64, mu, b as f64, pi);
    term(a as f64, mu, &m1) + term((size_s - a) as f64, mu, pi) + term(b as f64, pi, &m1)
}

/// The quantity minimized in `alpha_bar_S` for a competitor with overlap `(a, b)`.
pub fn alpha_bar_objective(
    a: usize,
    b: usize,
    size_s: usize,
    m: usize,
    mu: &Distribution,
    pi: &Distribution,
) -> f64 {
    let (mu, pi) = (mu.probs(), pi.probs());
    let c = size_s - a;
    let d = m - size_s - b;
    let m1 = mix(a as f64, mu, b as f64, pi);
    let m2 = mix(c as f64, mu, d as f64, pi);
    term(a as f64, mu, &m1) + term(c as f64, mu, &m2) + term(b as f64, pi, &m1) + term(d as f64, pi, &m2)
}

fn min_over_pairs(pairs: Vec<(usize, usize)>, f: impl Fn(usize, usize) -> f64) -> f64 {
    pairs
        .into_iter()
        .map(|(a, b)| f(a, b))
        .fold(f64::INFINITY, f64::min)
}

/// Coefficient of the identical-model test with `pi` known, true class `|S|`.
pub fn alpha(size_s: usize, m: usize, k: usize, mu: &Distribution, pi: &Distribution) -> Result<f64> {
    check_pair(mu, pi)?;
    check_class(size_s, m, k)?;
    Ok(min_over_pairs(competitor_pairs(size_s, m, k), |a, b| {
        alpha_objective(a, b, size_s, mu, pi)
    }))
}

/// Coefficient of the universal identical-model test, true class `|S|`.
pub fn alpha_bar(size_s: usize, m: usize, k: usize, mu: &Distribution, pi: &Distribution) -> Result<f64> {
    check_pair(mu, pi)?;
    check_class(size_s, m, k)?;
    Ok(min_over_pairs(competitor_pairs(size_s, m, k), |a, b| {
        alpha_bar_objective(a, b, size_s, m, mu, pi)
    }))
}

/// Coefficient of the distinct-outlier tests.
///
/// `pi` known: `min_i D(mu_i || pi)`; universal:
/// `min_i min_p D(mu_i || p) + (M - 2K) D(pi || p)`.
pub fn distinct_exponent(
    mus: &[Distribution],
    pi: &Distribution,
    m: usize,
    k: usize,
    knowledge: Knowledge,
) -> Result<f64> {
    check_dimensions(m, k)?;
    if mus.len() != k {
        return Err(Error::InvalidHypothesis(format!(
            "expected {k} outlier distributions, got {}",
            mus.len()
        )));
    }
    let mut best = f64::INFINITY;
    for mu in mus {
        check_pair(mu, pi)?;
        let degenerate = warn_if_degenerate(mu, pi);
        let v = match knowledge {
            _ if degenerate && knowledge != Knowledge::BothKnown => 0.0,
            Knowledge::PiKnown => kl(mu.probs(), pi.probs()),
            Knowledge::Universal => weighted_minimum(&[(1.0, mu), ((m - 2 * k) as f64, pi)])?.0,
            Knowledge::BothKnown => {
                return Err(Error::config(
                    "distinct-model coefficients exist for pi_known and universal only",
                ))
            }
        };
        best = best.min(v);
    }
    Ok(best)
}

/// MSPRT coefficients for the three classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsprtExponents {
    pub full_k: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partial: Option<f64>,
    pub null: f64,
}

/// Identical-model coefficients for one outlier-count class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassExponents {
    pub size: usize,
    pub alpha: f64,
    pub alpha_bar: f64,
    pub eta: f64,
    pub eta_bar: f64,
}

/// Distinct-model coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistinctExponents {
    pub pi_known: f64,
    pub universal: f64,
}

/// Every coefficient for one `(M, K, mu, pi)` setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub model: Model,
    pub m: usize,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub msprt: Option<MsprtExponents>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub classes: Vec<ClassExponents>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distinct: Option<DistinctExponents>,
}

impl ExponentReport {
    /// Identical-outlier model; `mu = pi` is an error unless `allow_degenerate`.
    pub fn identical(
        m: usize,
        k: usize,
        mu: &Distribution,
        pi: &Distribution,
        allow_degenerate: bool,
    ) -> Result<Self> {
        check_dimensions(m, k)?;
        check_pair(mu, pi)?;
        let degenerate = mu == pi;
        if degenerate && !allow_degenerate {
            return Err(Error::Degenerate("mu equals pi".into()));
        }
        let msprt = if degenerate || !mu.is_full_support() || !pi.is_full_support() {
            None
        } else {
            Some(MsprtExponents {
                full_k: msprt_exponent(MsprtCase::FullK, mu, pi)?,
                partial: if k >= 2 {
                    Some(msprt_exponent(MsprtCase::Partial, mu, pi)?)
                } else {
                    None
                },
                null: msprt_exponent(MsprtCase::Null, mu, pi)?,
            })
        };
        let classes = (1..=k)
            .map(|s| {
                Ok(ClassExponents {
                    size: s,
                    alpha: alpha(s, m, k, mu, pi)?,
                    alpha_bar: alpha_bar(s, m, k, mu, pi)?,
                    eta: eta(s, mu, pi)?,
                    eta_bar: eta_bar(s, m, k, mu, pi)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ExponentReport {
            model: Model::Identical,
            m,
            k,
            msprt,
            classes,
            distinct: None,
        })
    }

    /// Distinct-outlier model with one distribution per outlier.
    pub fn distinct(
        m: usize,
        k: usize,
        mus: &[Distribution],
        pi: &Distribution,
        allow_degenerate: bool,
    ) -> Result<Self> {
        if !allow_degenerate && mus.iter().any(|mu| mu == pi) {
            return Err(Error::Degenerate("an outlier distribution equals pi".into()));
        }
        Ok(ExponentReport {
            model: Model::Distinct,
            m,
            k,
            msprt: None,
            classes: Vec::new(),
            distinct: Some(DistinctExponents {
                pi_known: distinct_exponent(mus, pi, m, k, Knowledge::PiKnown)?,
                universal: distinct_exponent(mus, pi, m, k, Knowledge::Universal)?,
            }),
        })
    }

    /// Aligned plain-text rendering.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model {}  M = {}  K = {}", self.model, self.m, self.k);
        if let Some(ms) = &self.msprt {
            let _ = writeln!(s, "{:<22}{:>14.8}", "msprt |S|=K", ms.full_k);
            if let Some(p) = ms.partial {
                let _ = writeln!(s, "{:<22}{:>14.8}", "msprt 1<=|S|<K", p);
            }
            let _ = writeln!(s, "{:<22}{:>14.8}", "msprt null", ms.null);
        }
        if !self.classes.is_empty() {
            let _ = writeln!(
                s,
                "{:>4}{:>14}{:>14}{:>14}{:>14}",
                "|S|", "alpha", "alpha_bar", "eta", "eta_bar"
            );
            for c in &self.classes {
                let _ = writeln!(
                    s,
                    "{:>4}{:>14.8}{:>14.8}{:>14.8}{:>14.8}",
                    c.size, c.alpha, c.alpha_bar, c.eta, c.eta_bar
                );
            }
        }
        if let Some(d) = &self.distinct {
            let _ = writeln!(s, "{:<22}{:>14.8}", "distinct pi known", d.pi_known);
            let _ = writeln!(s, "{:<22}{:>14.8}", "distinct universal", d.universal);
        }
        s
    }
}
