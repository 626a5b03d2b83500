//! Finite-alphabet probability primitives.
//!
//! All quantities are in nats. A divergence that is infinite because the
//! second argument misses support of the first is reported as
//! [`f64::INFINITY`]; that value is carried through sums unchanged so an
//! infinite score can never win an argmin.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the probability sum accepted at construction.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A finite observation alphabet `{0, .., size - 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Alphabet(usize);

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidAlphabet(size));
        }
        Ok(Alphabet(size))
    }

    pub fn size(self) -> usize {
        self.0
    }
}

impl TryFrom<usize> for Alphabet {
    type Error = Error;

    fn try_from(size: usize) -> Result<Self> {
        Alphabet::new(size)
    }
}

impl From<Alphabet> for usize {
    fn from(a: Alphabet) -> usize {
        a.0
    }
}

/// A probability vector over a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRepr", into = "DistributionRepr")]
pub struct Distribution {
    probs: Vec<f64>,
}

/// On-disk forms: a bare array, or `{"alphabet_size": k, "probs": [...]}`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DistributionRepr {
    Bare(Vec<f64>),
    Sized { alphabet_size: usize, probs: Vec<f64> },
}

impl TryFrom<DistributionRepr> for Distribution {
    type Error = Error;

    fn try_from(repr: DistributionRepr) -> Result<Self> {
        match repr {
            DistributionRepr::Bare(probs) => Distribution::new(probs),
            DistributionRepr::Sized {
                alphabet_size,
                probs,
            } => {
                if alphabet_size != probs.len() {
                    return Err(Error::InvalidDistribution(format!(
                        "alphabet_size {alphabet_size} but {} probabilities",
                        probs.len()
                    )));
                }
                Distribution::new(probs)
            }
        }
    }
}

impl From<Distribution> for DistributionRepr {
    fn from(d: Distribution) -> Self {
        DistributionRepr::Sized {
            alphabet_size: d.probs.len(),
            probs: d.probs,
        }
    }
}

impl Distribution {
    /// Validates `probs` without renormalizing.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Alphabet::new(probs.len())?;
        if let Some(bad) = probs
            .iter()
            .find(|p| !p.is_finite() || **p < 0.0 || **p > 1.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {bad} outside [0, 1]"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}, expected 1"
            )));
        }
        Ok(Distribution { probs })
    }

    /// Builds a distribution from nonnegative weights by explicit renormalization.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        Alphabet::new(weights.len())?;
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroWeight);
        }
        Ok(Distribution {
            probs: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        Alphabet::new(size)?;
        Ok(Distribution {
            probs: vec![1.0 / size as f64; size],
        })
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet(self.probs.len())
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, symbol: usize) -> f64 {
        self.probs[symbol]
    }

    pub fn is_full_support(&self) -> bool {
        self.probs.iter().all(|&p| p > 0.0)
    }

    fn check_same_alphabet(&self, other: &Distribution) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::AlphabetMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(())
    }
}

/// Per-sequence symbol counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeVector {
    counts: Vec<u64>,
    n: u64,
}

impl TypeVector {
    pub fn new(alphabet: Alphabet) -> Self {
        TypeVector {
            counts: vec![0; alphabet.size()],
            n: 0,
        }
    }

    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        Alphabet::new(counts.len())?;
        let n = counts.iter().sum();
        Ok(TypeVector { counts, n })
    }

    pub fn from_symbols(alphabet: Alphabet, symbols: &[usize]) -> Result<Self> {
        let mut tv = TypeVector::new(alphabet);
        for &s in symbols {
            tv.push(s)?;
        }
        Ok(tv)
    }

    pub fn push(&mut self, symbol: usize) -> Result<()> {
        let size = self.counts.len();
        let slot = self
            .counts
            .get_mut(symbol)
            .ok_or(Error::SymbolOutOfRange { symbol, size })?;
        *slot += 1;
        self.n += 1;
        Ok(())
    }

    /// Adds another block's counts to this one.
    pub fn merge(&mut self, other: &TypeVector) -> Result<()> {
        if self.counts.len() != other.counts.len() {
            return Err(Error::AlphabetMismatch {
                left: self.counts.len(),
                right: other.counts.len(),
            });
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.n += other.n;
        Ok(())
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet(self.counts.len())
    }

    /// The empirical distribution (type) of the observed symbols.
    pub fn empirical(&self) -> Result<Distribution> {
        if self.n == 0 {
            return Err(Error::EmptyType);
        }
        let n = self.n as f64;
        Ok(Distribution {
            probs: self.counts.iter().map(|&c| c as f64 / n).collect(),
        })
    }
}

/// Writes one row per sequence and one column per symbol count.
pub fn write_type_vectors_csv<W: Write>(writer: W, types: &[TypeVector]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    if let Some(first) = types.first() {
        let header: Vec<String> = (0..first.counts.len())
            .map(|y| format!("symbol_{y}"))
            .collect();
        out.write_record(&header)?;
    }
    for tv in types {
        out.write_record(tv.counts.iter().map(|c| c.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

/// `D(p || q)` over raw slices of equal length.
pub(crate) fn kl(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi <= 0.0 {
                return f64::INFINITY;
            }
            total += pi * (pi / qi).ln();
        }
    }
    // rounding can leave a tiny negative value for p == q
    total.max(0.0)
}

/// Relative entropy `D(p || q)` in nats; `f64::INFINITY` when `q` misses
/// support of `p`.
pub fn relative_entropy(p: &Distribution, q: &Distribution) -> Result<f64> {
    p.check_same_alphabet(q)?;
    Ok(kl(&p.probs, &q.probs))
}

/// Bhattacharyya distance `-ln sum_y sqrt(p(y) q(y))`.
pub fn bhattacharyya(p: &Distribution, q: &Distribution) -> Result<f64> {
    p.check_same_alphabet(q)?;
    let coefficient: f64 = p
        .probs
        .iter()
        .zip(&q.probs)
        .map(|(a, b)| (a * b).sqrt())
        .sum();
    Ok((-coefficient.ln()).max(0.0))
}

/// Shannon entropy in nats.
pub fn entropy(p: &Distribution) -> f64 {
    -p.probs
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.ln())
        .sum::<f64>()
}

/// Cross entropy `-sum_y p(y) ln q(y)`.
pub fn cross_entropy(p: &Distribution, q: &Distribution) -> Result<f64> {
    p.check_same_alphabet(q)?;
    let mut total = 0.0;
    for (&a, &b) in p.probs.iter().zip(&q.probs) {
        if a > 0.0 {
            if b <= 0.0 {
                return Ok(f64::INFINITY);
            }
            total -= a * b.ln();
        }
    }
    Ok(total)
}

/// Total variation distance `0.5 * sum_y |p(y) - q(y)|`.
pub fn total_variation(p: &Distribution, q: &Distribution) -> Result<f64> {
    p.check_same_alphabet(q)?;
    Ok(0.5
        * p.probs
            .iter()
            .zip(&q.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

/// Weight-normalized convex combination of distributions.
pub fn mixture(components: &[(f64, &Distribution)]) -> Result<Distribution> {
    let (_, first) = components.first().ok_or(Error::ZeroWeight)?;
    let size = first.len();
    let mut total = 0.0;
    for (w, d) in components {
        first.check_same_alphabet(d)?;
        if !w.is_finite() || *w < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "mixture weight {w} is not a nonnegative real"
            )));
        }
        total += w;
    }
    if total <= 0.0 {
        return Err(Error::ZeroWeight);
    }
    let mut probs = vec![0.0; size];
    for (w, d) in components {
        for (acc, p) in probs.iter_mut().zip(&d.probs) {
            *acc += w * p;
        }
    }
    for p in &mut probs {
        *p /= total;
    }
    Ok(Distribution { probs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(p: &[f64]) -> Distribution {
        Distribution::new(p.to_vec()).unwrap()
    }

    // Direct-sum oracles, written from the defining formulas.
    fn kl_oracle(p: &[f64], q: &[f64]) -> f64 {
        let mut s = 0.0;
        for y in 0..p.len() {
            if p[y] == 0.0 {
                continue;
            }
            if q[y] == 0.0 {
                return f64::INFINITY;
            }
            s += p[y] * p[y].ln() - p[y] * q[y].ln();
        }
        s
    }

    fn bhatt_oracle(p: &[f64], q: &[f64]) -> f64 {
        let mut bc = 0.0;
        for y in 0..p.len() {
            bc += p[y].sqrt() * q[y].sqrt();
        }
        -bc.ln()
    }

    #[test]
    fn relative_entropy_examples() {
        let cases: [(&[f64], &[f64]); 3] = [
            (&[0.5, 0.5], &[0.25, 0.75]),
            (&[1.0, 0.0], &[0.5, 0.5]),
            (&[0.3, 0.7], &[0.3, 0.7]),
        ];
        for (p, q) in cases {
            let got = relative_entropy(&d(p), &d(q)).unwrap();
            assert!((got - kl_oracle(p, q)).abs() < 1e-12);
        }
        let v = relative_entropy(&d(&[0.5, 0.5]), &d(&[0.25, 0.75])).unwrap();
        assert!((v - 0.143841036225890).abs() < 1e-10);
        let v = relative_entropy(&d(&[1.0, 0.0]), &d(&[0.5, 0.5])).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-12);
        let v = relative_entropy(&d(&[0.5, 0.5]), &d(&[1.0, 0.0])).unwrap();
        assert_eq!(v, f64::INFINITY);
    }

    #[test]
    fn alphabet_mismatch_is_an_error() {
        let e = relative_entropy(&d(&[0.5, 0.5]), &d(&[0.2, 0.3, 0.5]));
        assert!(matches!(e, Err(Error::AlphabetMismatch { .. })));
        assert!(bhattacharyya(&d(&[0.5, 0.5]), &d(&[0.2, 0.3, 0.5])).is_err());
    }

    #[test]
    fn bhattacharyya_examples() {
        let p = d(&[0.9, 0.1]);
        let q = d(&[0.1, 0.9]);
        let v = bhattacharyya(&p, &q).unwrap();
        assert!((v - bhatt_oracle(p.probs(), q.probs())).abs() < 1e-12);
        assert!((v - 0.510825623765991).abs() < 1e-10);
        let v = bhattacharyya(&d(&[1.0, 0.0]), &d(&[0.5, 0.5])).unwrap();
        assert!((v - 0.346573590279973).abs() < 1e-10);
        assert_eq!(bhattacharyya(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&d(&[1.0, 0.0])), 0.0);
        assert!((entropy(&d(&[0.5, 0.5])) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((entropy(&d(&[0.25, 0.75])) - 0.562335144618808).abs() < 1e-10);
    }

    #[test]
    fn mixture_examples() {
        let p = d(&[0.3, 0.7]);
        assert_eq!(mixture(&[(1.0, &p)]).unwrap(), p);
        let m = mixture(&[(1.0, &d(&[1.0, 0.0])), (1.0, &d(&[0.0, 1.0]))]).unwrap();
        assert_eq!(m.probs(), &[0.5, 0.5]);
        let m = mixture(&[(2.0, &d(&[0.8, 0.2])), (1.0, &d(&[0.2, 0.8]))]).unwrap();
        assert!((m.prob(0) - 0.6).abs() < 1e-15 && (m.prob(1) - 0.4).abs() < 1e-15);
        assert!(matches!(
            mixture(&[(0.0, &p), (0.0, &p)]),
            Err(Error::ZeroWeight)
        ));
    }

    #[test]
    fn construction_checks_sum_and_range() {
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![1.0]).is_err());
        assert!(Distribution::new(vec![-0.1, 1.1]).is_err());
        assert!(Distribution::new(vec![0.5, 0.5 + 5e-10]).is_ok());
        let n = Distribution::normalized(vec![1.0, 3.0]).unwrap();
        assert_eq!(n.probs(), &[0.25, 0.75]);
    }

    #[test]
    fn json_forms() {
        let a: Distribution = serde_json::from_str("[0.25, 0.75]").unwrap();
        let b: Distribution =
            serde_json::from_str(r#"{"alphabet_size": 2, "probs": [0.25, 0.75]}"#).unwrap();
        assert_eq!(a, b);
        assert!(serde_json::from_str::<Distribution>(
            r#"{"alphabet_size": 3, "probs": [0.25, 0.75]}"#
        )
        .is_err());
        assert!(serde_json::from_str::<Distribution>("[0.2, 0.2]").is_err());
        let back: Distribution = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn type_vector_basics() {
        let a = Alphabet::new(3).unwrap();
        let tv = TypeVector::from_symbols(a, &[0, 2, 2, 1]).unwrap();
        assert_eq!(tv.counts(), &[1, 1, 2]);
        assert_eq!(tv.n(), 4);
        assert_eq!(tv.empirical().unwrap().probs(), &[0.25, 0.25, 0.5]);
        assert!(matches!(
            TypeVector::new(a).empirical(),
            Err(Error::EmptyType)
        ));
        assert!(TypeVector::from_symbols(a, &[3]).is_err());
    }

    #[test]
    fn type_vector_csv() {
        let a = Alphabet::new(2).unwrap();
        let types = vec![
            TypeVector::from_symbols(a, &[0, 0, 1]).unwrap(),
            TypeVector::from_symbols(a, &[1]).unwrap(),
        ];
        let mut buf = Vec::new();
        write_type_vectors_csv(&mut buf, &types).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "symbol_0,symbol_1\n2,1\n0,1\n"
        );
    }

    fn arb_dist(size: usize) -> impl Strategy<Value = Distribution> {
        prop::collection::vec(0.0f64..1.0, size).prop_filter_map("nonzero", |w| {
            Distribution::normalized(w).ok()
        })
    }

    fn arb_full(size: usize) -> impl Strategy<Value = Distribution> {
        prop::collection::vec(0.01f64..1.0, size)
            .prop_map(|w| Distribution::normalized(w).unwrap())
    }

    proptest! {
        #[test]
        fn kl_nonnegative_and_zero_on_diagonal((p, q) in (2usize..6).prop_flat_map(|k| (arb_dist(k), arb_full(k)))) {
            let v = relative_entropy(&p, &q).unwrap();
            prop_assert!(v >= 0.0);
            prop_assert!(v.is_finite());
            prop_assert!(relative_entropy(&p, &p).unwrap() == 0.0);
            if total_variation(&p, &q).unwrap() > 1e-6 {
                prop_assert!(v > 0.0);
            }
        }

        #[test]
        fn bhattacharyya_symmetric((p, q) in (2usize..6).prop_flat_map(|k| (arb_dist(k), arb_dist(k)))) {
            let a = bhattacharyya(&p, &q).unwrap();
            let b = bhattacharyya(&q, &p).unwrap();
            prop_assert!((a - b).abs() < 1e-12 || (a.is_infinite() && b.is_infinite()));
        }

        #[test]
        fn concatenated_type_is_count_weighted_mixture(
            xs in prop::collection::vec(0usize..4, 1..40),
            ys in prop::collection::vec(0usize..4, 1..40),
        ) {
            let a = Alphabet::new(4).unwrap();
            let tx = TypeVector::from_symbols(a, &xs).unwrap();
            let ty = TypeVector::from_symbols(a, &ys).unwrap();
            let mut joined = tx.clone();
            joined.merge(&ty).unwrap();
            let ex = tx.empirical().unwrap();
            let ey = ty.empirical().unwrap();
            let mix = mixture(&[(tx.n() as f64, &ex), (ty.n() as f64, &ey)]).unwrap();
            let direct = joined.empirical().unwrap();
            for (u, v) in mix.probs().iter().zip(direct.probs()) {
                prop_assert!((u - v).abs() < 1e-12);
            }
        }

        #[test]
        fn kl_convex_in_first_argument(
            (p1, p2, q) in (2usize..5).prop_flat_map(|k| (arb_dist(k), arb_dist(k), arb_full(k))),
            lambda in 0.0f64..=1.0,
        ) {
            let m = mixture(&[(lambda, &p1), (1.0 - lambda, &p2)]);
            prop_assume!(m.is_ok());
            let lhs = relative_entropy(&m.unwrap(), &q).unwrap();
            let rhs = lambda * relative_entropy(&p1, &q).unwrap()
                + (1.0 - lambda) * relative_entropy(&p2, &q).unwrap();
            prop_assert!(lhs <= rhs + 1e-12);
        }
    }
}
