//! The degraded Gaussian wiretap channel `Y = X + N1`, `Z = Y + N'` with
//! `Var N1 = σ1²`, `Var N' = σ2² − σ1²`, under the almost-sure power
//! constraint `‖x‖² ≤ nS`.

use std::f64::consts::{LN_2, LOG2_E, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::capacity::gaussian_secrecy_capacity;
use crate::rng::{domain, MonteCarlo, StreamRng};
use crate::stats::{mean_estimate, variance_estimate, wilson, Estimate};
use crate::{Error, Result};

/// Attempts allowed per truncated-input draw.
pub const REJECTION_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianWtcParams {
    pub power: f64,
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    /// Backoff of the product input law `N(0, S − δ)`.
    pub delta: f64,
}

impl GaussianWtcParams {
    pub fn new(power: f64, sigma1_sq: f64, sigma2_sq: f64, delta: f64) -> Result<Self> {
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::Precondition(format!("power {power} must be positive")));
        }
        if !(sigma1_sq > 0.0 && sigma2_sq > sigma1_sq && sigma2_sq.is_finite()) {
            return Err(Error::Precondition(format!(
                "need 0 < σ1² < σ2², got σ1² = {sigma1_sq}, σ2² = {sigma2_sq}"
            )));
        }
        if !(delta > 0.0 && delta < power) {
            return Err(Error::Precondition(format!("backoff {delta} must lie in (0, {power})")));
        }
        Ok(Self {
            power,
            sigma1_sq,
            sigma2_sq,
            delta,
        })
    }

    /// Backoff `δ = 0.1·S`.
    pub fn with_default_delta(power: f64, sigma1_sq: f64, sigma2_sq: f64) -> Result<Self> {
        Self::new(power, sigma1_sq, sigma2_sq, 0.1 * power)
    }

    pub fn secrecy_capacity(&self) -> f64 {
        gaussian_secrecy_capacity(self.power, self.sigma1_sq, self.sigma2_sq).expect("validated params")
    }

    /// Upper bound on `n · Var[K^(n)(x)]` uniform over the power ball.
    pub fn variance_constant(&self) -> f64 {
        let s = self.power;
        let term = |v: f64| 9.0 * s * s / (4.0 * (s + v)) + v * s / (s + v);
        2.0 * LOG2_E * LOG2_E * (term(self.sigma1_sq) + term(self.sigma2_sq))
    }

    fn gap(&self) -> f64 {
        self.sigma2_sq - self.sigma1_sq
    }
}

fn ln_normal(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * (2.0 * PI * var).ln() - d * d / (2.0 * var)
}

/// `ln W_{Y|XZ}(y|x, z)`: `Y | x, z ~ N(x + (σ1²/σ2²)(z − x), σ1²Δ/σ2²)`.
pub fn ln_main_given_eavesdropper(p: &GaussianWtcParams, y: f64, x: f64, z: f64) -> f64 {
    let r = p.sigma1_sq / p.sigma2_sq;
    ln_normal(y, x + r * (z - x), p.sigma1_sq * p.gap() / p.sigma2_sq)
}

/// `ln P_{Ȳ|Z̄}(y|z)` under the capacity-achieving output law.
pub fn ln_reference_given_eavesdropper(p: &GaussianWtcParams, y: f64, z: f64) -> f64 {
    let c = (p.power + p.sigma1_sq) / (p.power + p.sigma2_sq);
    ln_normal(y, c * z, c * p.gap())
}

/// One letter of `K^(n)`, in bits.
pub fn k_letter(p: &GaussianWtcParams, x: f64, y: f64, z: f64) -> f64 {
    (ln_main_given_eavesdropper(p, y, x, z) - ln_reference_given_eavesdropper(p, y, z)) / LN_2
}

fn normal(rng: &mut StreamRng) -> f64 {
    rng.sample(StandardNormal)
}

/// Draws `X̃^n ~ N(0, S − δ)^n` until `‖x‖² ≤ nS`. Returns the vector and
/// the number of attempts used.
pub fn sample_truncated_input(p: &GaussianWtcParams, n: usize, rng: &mut StreamRng) -> Result<(Vec<f64>, usize)> {
    truncated_with_cap(p, n, rng, REJECTION_CAP)
}

fn truncated_with_cap(p: &GaussianWtcParams, n: usize, rng: &mut StreamRng, cap: usize) -> Result<(Vec<f64>, usize)> {
    if n == 0 {
        return Err(Error::Precondition("blocklength must be positive".into()));
    }
    let sd = (p.power - p.delta).sqrt();
    let limit = n as f64 * p.power;
    let mut x = vec![0.0; n];
    let mut last = f64::NAN;
    for attempt in 1..=cap {
        x.iter_mut().for_each(|v| *v = sd * normal(rng));
        last = x.iter().map(|v| v * v).sum();
        if last <= limit {
            return Ok((x, attempt));
        }
    }
    Err(Error::RejectionCap {
        attempts: cap,
        last_norm_sq: last,
        limit,
    })
}

/// `μ̂_n`: fraction of product-law draws that land in the power ball.
pub fn estimate_acceptance(p: &GaussianWtcParams, n: usize, attempts: usize, mc: &MonteCarlo) -> Result<Estimate> {
    if n == 0 || attempts == 0 {
        return Err(Error::Precondition("need positive blocklength and attempts".into()));
    }
    let sd = (p.power - p.delta).sqrt();
    let limit = n as f64 * p.power;
    let hits = mc.fork(n as u64).run(domain::GAUSS_INPUT, attempts, |rng, _| {
        let norm: f64 = (0..n).map(|_| (sd * normal(rng)).powi(2)).sum();
        norm <= limit
    });
    Ok(wilson(hits.iter().filter(|&&h| h).count(), attempts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KStatistic {
    pub n: usize,
    pub trials: usize,
    pub mean: Estimate,
    pub variance: Estimate,
    /// `n · Var[K^(n)]` and its interval radius.
    pub n_variance: f64,
    pub n_variance_radius: f64,
    pub capacity: f64,
    pub variance_constant: f64,
}

fn k_sample(p: &GaussianWtcParams, x: &[f64], rng: &mut StreamRng) -> f64 {
    let (s1, sd) = (p.sigma1_sq.sqrt(), p.gap().sqrt());
    let sum: f64 = x
        .iter()
        .map(|&xi| {
            let y = xi + s1 * normal(rng);
            let z = y + sd * normal(rng);
            k_letter(p, xi, y, z)
        })
        .sum();
    sum / x.len() as f64
}

fn summarize(p: &GaussianWtcParams, n: usize, samples: &[f64]) -> KStatistic {
    let variance = variance_estimate(samples);
    KStatistic {
        n,
        trials: samples.len(),
        mean: mean_estimate(samples),
        n_variance: n as f64 * variance.value,
        n_variance_radius: n as f64 * variance.radius,
        variance,
        capacity: p.secrecy_capacity(),
        variance_constant: p.variance_constant(),
    }
}

/// Moments of `K^(n)(x)` for a fixed `x` in the power ball.
pub fn sample_k_statistic(p: &GaussianWtcParams, x: &[f64], trials: usize, mc: &MonteCarlo) -> Result<KStatistic> {
    let n = x.len();
    if n == 0 || trials < 2 {
        return Err(Error::Precondition("need a non-empty input and at least two trials".into()));
    }
    let norm: f64 = x.iter().map(|v| v * v).sum();
    if norm > n as f64 * p.power * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "input outside the power ball: ‖x‖²/n = {} > {}",
            norm / n as f64,
            p.power
        )));
    }
    let samples = mc.fork(n as u64).run(domain::GAUSS_KSTAT, trials, |rng, _| k_sample(p, x, rng));
    Ok(summarize(p, n, &samples))
}

/// Moments of `K^(n)(X^n)` with a fresh truncated input per trial.
pub fn sample_k_statistic_random_input(
    p: &GaussianWtcParams,
    n: usize,
    trials: usize,
    mc: &MonteCarlo,
) -> Result<KStatistic> {
    if trials < 2 {
        return Err(Error::Precondition("need at least two trials".into()));
    }
    let samples = mc.fork(n as u64).run(domain::GAUSS_KSTAT, trials, |rng, _| {
        let (x, _) = sample_truncated_input(p, n, rng)?;
        Ok(k_sample(p, &x, rng))
    });
    let samples: Vec<f64> = samples.into_iter().collect::<Result<_>>()?;
    Ok(summarize(p, n, &samples))
}

/// The full-power input `x_i = √S`.
pub fn full_power_input(p: &GaussianWtcParams, n: usize) -> Vec<f64> {
    vec![p.power.sqrt(); n]
}

/// Probability that `(1/n) Σ log2 W_Z(Z̃_i|X̃_i)/P_Z̃(Z̃_i)` reaches
/// `threshold` with `X̃_i ~ N(0, input_var)` i.i.d.
pub fn eavesdropper_density_tail(
    p: &GaussianWtcParams,
    input_var: f64,
    threshold: f64,
    n: usize,
    trials: usize,
    mc: &MonteCarlo,
) -> Result<Estimate> {
    if n == 0 || trials == 0 {
        return Err(Error::Precondition("need positive blocklength and trials".into()));
    }
    if !(input_var >= 0.0 && input_var <= p.power) {
        return Err(Error::Precondition(format!("input variance {input_var} outside [0, {}]", p.power)));
    }
    let (sx, s2) = (input_var.sqrt(), p.sigma2_sq.sqrt());
    let out_var = input_var + p.sigma2_sq;
    let hits = mc.fork(n as u64).run(domain::GAUSS_QN, trials, |rng, _| {
        let sum: f64 = (0..n)
            .map(|_| {
                let x = sx * normal(rng);
                let z = x + s2 * normal(rng);
                (ln_normal(z, x, p.sigma2_sq) - ln_normal(z, 0.0, out_var)) / LN_2
            })
            .sum();
        sum / n as f64 >= threshold
    });
    Ok(wilson(hits.iter().filter(|&&h| h).count(), trials))
}

/// `q_n` for the Gaussian construction: inputs `N(0, S − γ/2)`, threshold
/// `½ log2(1 + S/σ2²) + γ/2`.
pub fn gaussian_qn_estimate(
    p: &GaussianWtcParams,
    gamma: f64,
    n: usize,
    trials: usize,
    mc: &MonteCarlo,
) -> Result<Estimate> {
    if !(gamma > 0.0 && gamma < 2.0 * p.power) {
        return Err(Error::Precondition(format!("gamma {gamma} must lie in (0, 2S)")));
    }
    let threshold = 0.5 * (p.power / p.sigma2_sq).ln_1p() / LN_2 + gamma / 2.0;
    eavesdropper_density_tail(p, p.power - gamma / 2.0, threshold, n, trials, mc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::fit_line;

    fn params() -> GaussianWtcParams {
        GaussianWtcParams::with_default_delta(1.0, 1.0, 4.0).unwrap()
    }

    #[test]
    fn validation() {
        assert!(GaussianWtcParams::new(0.0, 1.0, 4.0, 0.1).is_err());
        assert!(GaussianWtcParams::new(1.0, 4.0, 4.0, 0.1).is_err());
        assert!(GaussianWtcParams::new(1.0, 1.0, 4.0, 1.0).is_err());
        assert!((params().secrecy_capacity() - 0.339_036).abs() < 1e-6);
        assert!((params().variance_constant() - 11.97).abs() < 0.01);
    }

    /// Trapezoid normalization of `f` over a wide grid, evaluated at `y`.
    fn normalized(f: impl Fn(f64) -> f64, y: f64) -> f64 {
        let (lo, hi, steps) = (-40.0, 40.0, 200_000);
        let h = (hi - lo) / steps as f64;
        let mass: f64 = (0..=steps)
            .map(|i| {
                let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
                w * f(lo + i as f64 * h)
            })
            .sum::<f64>()
            * h;
        f(y) / mass
    }

    #[test]
    fn conditionals_match_numeric_bayes() {
        let p = GaussianWtcParams::new(2.0, 0.5, 3.0, 0.2).unwrap();
        let gap = p.sigma2_sq - p.sigma1_sq;
        for &(x, z) in &[(0.3, -1.1), (-1.4, 2.5), (0.0, 0.0)] {
            for &y in &[-2.0, -0.3, 0.7, 1.9] {
                let joint = |v: f64| (ln_normal(v, x, p.sigma1_sq) + ln_normal(z, v, gap)).exp();
                let num = normalized(joint, y);
                let closed = ln_main_given_eavesdropper(&p, y, x, z).exp();
                assert!((num - closed).abs() < 1e-9 * closed.max(1.0), "{num} {closed}");
                let refj = |v: f64| (ln_normal(v, 0.0, p.power + p.sigma1_sq) + ln_normal(z, v, gap)).exp();
                let num = normalized(refj, y);
                let closed = ln_reference_given_eavesdropper(&p, y, z).exp();
                assert!((num - closed).abs() < 1e-9 * closed.max(1.0), "{num} {closed}");
            }
        }
    }

    #[test]
    fn letter_equals_difference_of_marginal_densities() {
        let p = params();
        let (s, v1, v2) = (p.power, p.sigma1_sq, p.sigma2_sq);
        for &(x, y, z) in &[(0.5, 1.0, -0.2), (-1.0, 0.1, 3.0), (1.0, 1.0, 1.0)] {
            let main = ln_normal(y, x, v1) - ln_normal(y, 0.0, s + v1);
            let eve = ln_normal(z, x, v2) - ln_normal(z, 0.0, s + v2);
            assert!((k_letter(&p, x, y, z) - (main - eve) / LN_2).abs() < 1e-12);
        }
    }

    #[test]
    fn truncated_inputs_respect_power() {
        let p = params();
        let mc = MonteCarlo::new(3);
        for i in 0..200 {
            let mut rng = mc.rng(domain::GAUSS_INPUT, i);
            let (x, attempts) = sample_truncated_input(&p, 50, &mut rng).unwrap();
            assert!(attempts >= 1);
            assert!(x.iter().map(|v| v * v).sum::<f64>() <= 50.0 * p.power);
        }
    }

    #[test]
    fn rejection_cap_reports() {
        // with a negligible backoff each draw is accepted about half the time
        let p = GaussianWtcParams::new(1.0, 1.0, 4.0, 1e-9).unwrap();
        let mut rng = MonteCarlo::new(1).rng(domain::GAUSS_INPUT, 0);
        let failure = (0..64)
            .map(|_| truncated_with_cap(&p, 1000, &mut rng, 1))
            .find_map(|r| r.err())
            .unwrap();
        match failure {
            Error::RejectionCap { attempts, last_norm_sq, limit } => {
                assert_eq!(attempts, 1);
                assert!(last_norm_sq > limit && limit == 1000.0);
            }
            e => panic!("{e}"),
        }
        assert!(sample_truncated_input(&p, 0, &mut rng).is_err());
    }

    #[test]
    fn acceptance_grows_with_n() {
        let p = params();
        let mc = MonteCarlo::new(5);
        let a: Vec<Estimate> = [100, 400, 1600]
            .iter()
            .map(|&n| estimate_acceptance(&p, n, 4000, &mc).unwrap())
            .collect();
        for w in a.windows(2) {
            assert!(w[1].value + 3.0 * w[1].radius >= w[0].value, "{a:?}");
        }
        assert!(a[2].value > 0.99);
    }

    #[test]
    fn zero_input_mean_below_capacity() {
        let p = params();
        let k = sample_k_statistic(&p, &vec![0.0; 200], 4000, &MonteCarlo::new(1)).unwrap();
        // E K(0) = C + (log2 e / 2)(σ1²/(S+σ1²) − σ2²/(S+σ2²))
        let expect = p.secrecy_capacity() + 0.5 * LOG2_E * (0.5 - 0.8);
        assert!((k.mean.value - expect).abs() < 3.0 * k.mean.radius, "{k:?}");
        assert!(k.mean.upper < p.secrecy_capacity());
    }

    #[test]
    fn full_power_moments() {
        let p = params();
        let mc = MonteCarlo::new(2);
        for n in [100, 400] {
            let k = sample_k_statistic(&p, &full_power_input(&p, n), 3000, &mc).unwrap();
            assert!(k.mean.value <= k.capacity + 3.0 * k.mean.radius, "{k:?}");
            assert!(k.n_variance <= k.variance_constant + 3.0 * k.n_variance_radius);
        }
        let bad = vec![2.0; 10];
        assert!(sample_k_statistic(&p, &bad, 10, &mc).is_err());
    }

    #[test]
    fn random_inputs_mean_below_capacity() {
        let p = params();
        let k = sample_k_statistic_random_input(&p, 500, 2000, &MonteCarlo::new(4)).unwrap();
        assert!(k.mean.value <= k.capacity + 3.0 * k.mean.radius, "{k:?}");
    }

    #[test]
    fn qn_extremes_and_decay() {
        let p = params();
        let mc = MonteCarlo::new(6);
        let all = eavesdropper_density_tail(&p, 0.9, f64::NEG_INFINITY, 50, 300, &mc).unwrap();
        assert_eq!(all.value, 1.0);
        let none = eavesdropper_density_tail(&p, 0.9, 50.0, 50, 300, &mc).unwrap();
        assert_eq!(none.value, 0.0);
        let ns = [100.0, 200.0, 400.0];
        let logs: Vec<f64> = ns
            .iter()
            .map(|&n| gaussian_qn_estimate(&p, 0.1, n as usize, 40_000, &mc).unwrap().value.log2())
            .collect();
        let fit = fit_line(&ns, &logs).unwrap();
        assert!(fit.slope < 0.0 && fit.r_squared >= 0.9, "{fit:?} {logs:?}");
    }
}
