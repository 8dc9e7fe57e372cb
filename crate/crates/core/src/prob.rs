//! Finite-alphabet probability primitives.
//!
//! Information quantities are returned in bits. The conventions
//! `0 · log 0 = 0` and `p · log(p / 0) = +∞` (for `p > 0`) are used
//! throughout.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Absolute tolerance on the total mass of a probability vector.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// A probability vector on `{0, .., alphabet_size - 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates `probs`; a total within [`SIMPLEX_TOL`] of one is
    /// renormalized, anything further off is rejected.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty probability vector".into()));
        }
        check_entries(&probs).map_err(Error::InvalidDistribution)?;
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total:.15}, not 1"
            )));
        }
        let probs = probs.into_iter().map(|p| p / total).collect();
        Ok(Self { probs })
    }

    /// Normalizes non-negative weights with a positive total.
    pub(crate) fn from_weights(mut w: Vec<f64>) -> Self {
        let total: f64 = w.iter().sum();
        debug_assert!(total > 0.0 && total.is_finite());
        w.iter_mut().for_each(|p| *p /= total);
        Self { probs: w }
    }

    pub fn uniform(size: usize) -> Self {
        assert!(size > 0);
        Self {
            probs: vec![1.0 / size as f64; size],
        }
    }

    pub fn point_mass(size: usize, symbol: usize) -> Self {
        assert!(symbol < size);
        let mut probs = vec![0.0; size];
        probs[symbol] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, _)| i)
    }

    /// Relabels symbols: the result gives `self[i]` to symbol `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut probs = vec![0.0; self.probs.len()];
        for (i, &j) in perm.iter().enumerate() {
            probs[j] = self.probs[i];
        }
        Self { probs }
    }

    pub fn sampler(&self) -> Sampler {
        Sampler::new(&self.probs)
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.probs
    }
}

fn check_entries(values: &[f64]) -> std::result::Result<(), String> {
    for (i, &p) in values.iter().enumerate() {
        if !p.is_finite() {
            return Err(format!("entry {i} is not finite ({p})"));
        }
        if p < 0.0 {
            return Err(format!("entry {i} is negative ({p})"));
        }
    }
    Ok(())
}

/// A probability matrix over `rows × cols`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(rows: usize, cols: usize, probs: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDistribution("joint with an empty alphabet".into()));
        }
        if probs.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "joint of shape {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                probs.len()
            )));
        }
        check_entries(&probs).map_err(Error::InvalidDistribution)?;
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidDistribution(format!(
                "joint entries sum to {total:.15}, not 1"
            )));
        }
        let probs = probs.into_iter().map(|p| p / total).collect();
        Ok(Self { rows, cols, probs })
    }

    pub(crate) fn from_weights(rows: usize, cols: usize, w: Vec<f64>) -> Self {
        let Distribution { probs } = Distribution::from_weights(w);
        Self { rows, cols, probs }
    }

    /// `P(r, c) = p(r) q(c)`.
    pub fn product(p: &Distribution, q: &Distribution) -> Self {
        let probs = p
            .probs()
            .iter()
            .flat_map(|&a| q.probs().iter().map(move |&b| a * b))
            .collect();
        Self {
            rows: p.alphabet_size(),
            cols: q.alphabet_size(),
            probs,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.probs[r * self.cols + c]
    }

    pub fn row_marginal(&self) -> Distribution {
        let probs = self
            .probs
            .chunks(self.cols)
            .map(|row| row.iter().sum())
            .collect();
        Distribution { probs }
    }

    pub fn col_marginal(&self) -> Distribution {
        let mut probs = vec![0.0; self.cols];
        for row in self.probs.chunks(self.cols) {
            for (acc, p) in probs.iter_mut().zip(row) {
                *acc += p;
            }
        }
        Distribution { probs }
    }

    /// The product of the two marginals, `P_R × P_C`.
    pub fn product_of_marginals(&self) -> Self {
        Self::product(&self.row_marginal(), &self.col_marginal())
    }

    /// Flattens to a distribution on `rows · cols` symbols.
    pub fn flatten(&self) -> Distribution {
        Distribution {
            probs: self.probs.clone(),
        }
    }
}

/// Shannon entropy in bits.
pub fn entropy(d: &Distribution) -> f64 {
    entropy_of(d.probs())
}

pub(crate) fn entropy_of(probs: &[f64]) -> f64 {
    let h: f64 = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    h.max(0.0)
}

/// Binary entropy function `h(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_of(&[p, 1.0 - p])
}

/// Relative entropy `D(p‖q)` in bits.
///
/// Returns `f64::INFINITY` when `p` puts mass where `q` has none; an
/// alphabet mismatch is an error.
pub fn kl_divergence(p: &Distribution, q: &Distribution) -> Result<f64> {
    same_alphabet(p, q)?;
    Ok(kl_of(p.probs(), q.probs()))
}

pub(crate) fn kl_of(p: &[f64], q: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            d += a * (a / b).log2();
        }
    }
    d.max(0.0)
}

/// Variational (total-variation) distance `½ Σ |p − q|`.
pub fn variational_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    same_alphabet(p, q)?;
    Ok(half_l1(p.probs(), q.probs()))
}

pub(crate) fn half_l1(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Variational distance through the maximizing event
/// `A* = {x : p(x) ≥ q(x)}`, i.e. `P(A*) − Q(A*)`.
pub fn variational_distance_event(p: &Distribution, q: &Distribution) -> Result<f64> {
    same_alphabet(p, q)?;
    let (pa, qa) = p
        .probs()
        .iter()
        .zip(q.probs())
        .filter(|(a, b)| a >= b)
        .fold((0.0, 0.0), |(sp, sq), (a, b)| (sp + a, sq + b));
    Ok(pa - qa)
}

fn same_alphabet(p: &Distribution, q: &Distribution) -> Result<()> {
    if p.alphabet_size() != q.alphabet_size() {
        return Err(Error::DimensionMismatch(format!(
            "alphabet sizes {} and {} differ",
            p.alphabet_size(),
            q.alphabet_size()
        )));
    }
    Ok(())
}

/// Inverse-CDF sampler for a fixed probability vector.
#[derive(Debug, Clone)]
pub struct Sampler {
    cdf: Vec<f64>,
    last: usize,
}

impl Sampler {
    pub fn new(probs: &[f64]) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|&p| {
                acc += p;
                acc
            })
            .collect();
        let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        for c in &mut cdf[last..] {
            *c = f64::INFINITY;
        }
        Self { cdf, last }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        // first index with cdf > u; zero-mass symbols are never chosen
        let i = self.cdf.partition_point(|&c| c <= u);
        i.min(self.last)
    }
}

/// Draws `n` i.i.d. symbols from `d`.
pub fn sample<R: Rng + ?Sized>(d: &Distribution, rng: &mut R, n: usize) -> Vec<usize> {
    let s = d.sampler();
    (0..n).map(|_| s.sample(rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;

    fn d(v: &[f64]) -> Distribution {
        Distribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&Distribution::uniform(2)), 1.0);
        assert_eq!(entropy(&Distribution::point_mass(5, 3)), 0.0);
        // -0.2 log2 0.2 - 0.8 log2 0.8 = 0.464386 + 0.257542
        assert!((entropy(&d(&[0.2, 0.8])) - 0.721_928_094_887_362_3).abs() < 1e-12);
    }

    #[test]
    fn kl_examples() {
        let p = d(&[0.3, 0.7]);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        assert!((kl_divergence(&d(&[1.0, 0.0]), &d(&[0.5, 0.5])).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            kl_divergence(&d(&[0.5, 0.5]), &d(&[1.0, 0.0])).unwrap(),
            f64::INFINITY
        );
        assert!(kl_divergence(&d(&[1.0]), &d(&[0.5, 0.5])).is_err());
    }

    #[test]
    fn variational_examples() {
        let p = d(&[0.5, 0.5]);
        assert_eq!(variational_distance(&p, &p).unwrap(), 0.0);
        assert_eq!(
            variational_distance(&d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap(),
            1.0
        );
        assert!((variational_distance(&p, &d(&[0.25, 0.75])).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn validation_renormalizes_only_within_tolerance() {
        let near = Distribution::new(vec![0.5, 0.5 + 5e-13]).unwrap();
        assert!((near.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(Distribution::new(vec![0.5, 0.5001]).is_err());
        assert!(Distribution::new(vec![1.5, -0.5]).is_err());
        assert!(Distribution::new(vec![f64::NAN, 1.0]).is_err());
        assert!(Distribution::new(vec![]).is_err());
    }

    #[test]
    fn joint_marginals() {
        let j = JointDistribution::new(2, 3, vec![0.1, 0.2, 0.1, 0.3, 0.2, 0.1]).unwrap();
        let r = j.row_marginal();
        let c = j.col_marginal();
        assert!((r.probs()[0] - 0.4).abs() < 1e-15);
        assert!((c.probs()[1] - 0.4).abs() < 1e-15);
        let q = j.product_of_marginals();
        assert!((q.get(1, 2) - 0.6 * 0.2).abs() < 1e-15);
    }

    #[test]
    fn point_mass_samples_are_constant() {
        let pm = Distribution::point_mass(4, 2);
        let mut rng = stream(99, 0, 0);
        assert!(sample(&pm, &mut rng, 1000).iter().all(|&s| s == 2));
        // trailing and leading zero-mass symbols are never drawn
        let mid = d(&[0.0, 0.5, 0.5, 0.0]);
        assert!(sample(&mid, &mut rng, 10_000).iter().all(|&s| s == 1 || s == 2));
    }

    #[test]
    fn sampling_is_deterministic_per_stream() {
        let u = Distribution::uniform(3);
        let a = sample(&u, &mut stream(5, 2, 0), 500);
        let b = sample(&u, &mut stream(5, 2, 0), 500);
        assert_eq!(a, b);
        let c = sample(&u, &mut stream(5, 3, 0), 500);
        assert_ne!(a, c);
    }

    #[test]
    fn uniform_binary_frequency() {
        // binomial 3-sigma radius: 3 * sqrt(0.25 / 1e6) = 0.0015 < 0.002
        let n = 1_000_000;
        let s = sample(&Distribution::uniform(2), &mut stream(2024, 0, 0), n);
        let zeros = s.iter().filter(|&&x| x == 0).count() as f64 / n as f64;
        assert!((zeros - 0.5).abs() < 0.002, "frequency {zeros}");
    }

    fn simplex(len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, len).prop_map(|v| {
            let v: Vec<f64> = v.into_iter().map(|x| x + 1e-3).collect();
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
    }

    proptest! {
        #[test]
        fn pinsker_holds(p in simplex(5), q in simplex(5)) {
            let (p, q) = (d(&p), d(&q));
            let tv = variational_distance(&p, &q).unwrap();
            let kl_nats = kl_divergence(&p, &q).unwrap() * std::f64::consts::LN_2;
            prop_assert!(tv <= (kl_nats / 2.0).sqrt() + 1e-12);
        }

        #[test]
        fn variational_is_a_metric(p in simplex(4), q in simplex(4), r in simplex(4)) {
            let (p, q, r) = (d(&p), d(&q), d(&r));
            let pq = variational_distance(&p, &q).unwrap();
            prop_assert_eq!(pq, variational_distance(&q, &p).unwrap());
            prop_assert!(pq <= variational_distance(&p, &r).unwrap()
                + variational_distance(&r, &q).unwrap() + 1e-12);
            prop_assert!(variational_distance(&p, &p).unwrap() <= 1e-12);
        }

        #[test]
        fn two_variational_forms_agree(p in simplex(6), q in simplex(6)) {
            let (p, q) = (d(&p), d(&q));
            let a = variational_distance(&p, &q).unwrap();
            let b = variational_distance_event(&p, &q).unwrap();
            prop_assert!((a - b).abs() <= 1e-14);
        }

        #[test]
        fn kl_is_nonnegative(p in simplex(3), q in simplex(3)) {
            let (p, q) = (d(&p), d(&q));
            prop_assert!(kl_divergence(&p, &q).unwrap() >= 0.0);
            prop_assert!(kl_divergence(&p, &p).unwrap().abs() <= 1e-12);
        }
    }
}
