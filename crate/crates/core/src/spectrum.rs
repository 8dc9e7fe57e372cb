//! Monte Carlo information spectra and their ε-quantile functionals.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::channel::{marginal_z, Channel, WiretapChannel};
use crate::prob::{Distribution, JointDistribution, Sampler};
use crate::rng::{domain, MonteCarlo};
use crate::stats::{log_sum_exp, mean_var};
use crate::{Error, Result};

/// Sorted normalized information densities (bits/symbol) at one blocklength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEstimate {
    pub n: usize,
    pub samples: usize,
    pub empirical_cdf: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    /// Trials dropped because the reference density vanished.
    pub rejected: usize,
}

impl SpectrumEstimate {
    pub fn from_samples(n: usize, mut xs: Vec<f64>, rejected: usize) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::Precondition("no accepted samples".into()));
        }
        xs.sort_by(f64::total_cmp);
        let (mean, variance) = mean_var(&xs);
        Ok(Self {
            n,
            samples: xs.len(),
            empirical_cdf: xs,
            mean,
            variance,
            rejected,
        })
    }

    /// `sup{r : F̂(r) ≤ ε}`, the right limit of the empirical ε-quantile.
    pub fn quantile_right(&self, eps: f64) -> f64 {
        let k = (eps * self.samples as f64).floor() as usize;
        self.empirical_cdf[k.min(self.samples - 1)]
    }

    /// `inf{r : F̂(r) ≥ ε}`, the left limit.
    pub fn quantile_left(&self, eps: f64) -> f64 {
        let k = (eps * self.samples as f64).ceil() as usize;
        self.empirical_cdf[k.max(1).min(self.samples) - 1]
    }

    /// Fraction of samples `≥ threshold`.
    pub fn fraction_at_least(&self, threshold: f64) -> f64 {
        let below = self.empirical_cdf.partition_point(|&s| s < threshold);
        (self.samples - below) as f64 / self.samples as f64
    }

    fn is_degenerate(&self) -> bool {
        self.empirical_cdf.first() == self.empirical_cdf.last()
    }
}

fn density_table(px: &Distribution, c: &Channel) -> Result<Vec<f64>> {
    c.check_input(px)?;
    let py = c.output_probs(px.probs());
    let mut t = vec![0.0; c.inputs() * c.outputs()];
    for x in 0..c.inputs() {
        for y in 0..c.outputs() {
            let w = c.prob(x, y);
            if w > 0.0 {
                t[x * c.outputs() + y] = (w / py[y]).log2();
            }
        }
    }
    Ok(t)
}

/// Samples of `(1/n) Σ log2 W(Y_i|X_i)/P_Y(Y_i)` with `(X_i, Y_i)` i.i.d.
/// from `px × c`.
pub fn sample_information_density(
    px: &Distribution,
    c: &Channel,
    n: usize,
    trials: usize,
    mc: &MonteCarlo,
) -> Result<SpectrumEstimate> {
    check_sizes(n, trials)?;
    let table = density_table(px, c)?;
    let xs = px.sampler();
    let rows = c.samplers();
    let ny = c.outputs();
    let mc = mc.fork(n as u64);
    let out = mc.run(domain::SPECTRUM, trials, |rng, _| {
        let mut s = 0.0;
        for _ in 0..n {
            let x = xs.sample(rng);
            let y = rows[x].sample(rng);
            s += table[x * ny + y];
        }
        s / n as f64
    });
    SpectrumEstimate::from_samples(n, out, 0)
}

fn check_sizes(n: usize, trials: usize) -> Result<()> {
    if n == 0 || trials == 0 {
        return Err(Error::Precondition("blocklength and trial count must be positive".into()));
    }
    Ok(())
}

/// Per-letter conditional densities `log2 W_{Y|Z}(y|x,z) / P_{Ȳ|Z̄}(y|z)`,
/// `None` where the reference vanishes on a reachable pair.
struct ConditionalTable {
    yz: usize,
    dens: Vec<Option<f64>>,
    rows: Vec<Sampler>,
}

impl ConditionalTable {
    fn new(w: &WiretapChannel, output: &JointDistribution) -> Result<Self> {
        let (ny, nz) = (w.y_size(), w.z_size());
        if output.rows() != ny || output.cols() != nz {
            return Err(Error::DimensionMismatch(format!(
                "reference law is {}x{}, kernel outputs are {ny}x{nz}",
                output.rows(),
                output.cols()
            )));
        }
        let wz = marginal_z(w);
        let pz = output.col_marginal();
        let mut dens = Vec::with_capacity(w.input_size() * ny * nz);
        for x in 0..w.input_size() {
            for y in 0..ny {
                for z in 0..nz {
                    let p = w.prob(x, y, z);
                    let q = output.get(y, z);
                    dens.push(if p == 0.0 {
                        Some(0.0)
                    } else if q == 0.0 {
                        None
                    } else {
                        Some((p / wz.prob(x, z)).log2() - (q / pz.probs()[z]).log2())
                    });
                }
            }
        }
        let rows = (0..w.input_size()).map(|x| Sampler::new(w.row(x))).collect();
        Ok(Self {
            yz: ny * nz,
            dens,
            rows,
        })
    }

    #[inline]
    fn letter<R: rand::Rng>(&self, x: usize, rng: &mut R) -> Option<f64> {
        let pair = self.rows[x].sample(rng);
        self.dens[x * self.yz + pair]
    }
}

/// Samples of `(1/n) Σ log2 W_{Y|Z}(Y_i|X_i,Z_i) / P_{Ȳ|Z̄}(Y_i|Z_i)` with
/// `X_i` i.i.d. from `px` and `(Y_i, Z_i) ~ W(·,·|X_i)`.
pub fn sample_conditional_information_density(
    px: &Distribution,
    w: &WiretapChannel,
    output: &JointDistribution,
    n: usize,
    trials: usize,
    mc: &MonteCarlo,
) -> Result<SpectrumEstimate> {
    check_sizes(n, trials)?;
    if px.alphabet_size() != w.input_size() {
        return Err(Error::DimensionMismatch("input law does not match the kernel".into()));
    }
    let table = ConditionalTable::new(w, output)?;
    let xs = px.sampler();
    let mc = mc.fork(n as u64);
    let out = mc.run(domain::CONDITIONAL_SPECTRUM, trials, |rng, _| {
        let mut s = 0.0;
        for _ in 0..n {
            s += table.letter(xs.sample(rng), rng)?;
        }
        Some(s / n as f64)
    });
    collect_accepted(n, out)
}

/// As [`sample_conditional_information_density`] with the input sequence
/// held fixed at `x`.
pub fn sample_conditional_density_given(
    x: &[usize],
    w: &WiretapChannel,
    output: &JointDistribution,
    trials: usize,
    mc: &MonteCarlo,
) -> Result<SpectrumEstimate> {
    let n = x.len();
    check_sizes(n, trials)?;
    if let Some(&bad) = x.iter().find(|&&s| s >= w.input_size()) {
        return Err(Error::DimensionMismatch(format!("input symbol {bad} out of range")));
    }
    let table = ConditionalTable::new(w, output)?;
    let mc = mc.fork(n as u64);
    let out = mc.run(domain::CONDITIONAL_SPECTRUM, trials, |rng, _| {
        let mut s = 0.0;
        for &xi in x {
            s += table.letter(xi, rng)?;
        }
        Some(s / n as f64)
    });
    collect_accepted(n, out)
}

fn collect_accepted(n: usize, out: Vec<Option<f64>>) -> Result<SpectrumEstimate> {
    let rejected = out.iter().filter(|v| v.is_none()).count();
    SpectrumEstimate::from_samples(n, out.into_iter().flatten().collect(), rejected)
}

/// One component of a non-ergodic mixture source.
#[derive(Debug, Clone)]
pub struct MixtureComponent {
    pub weight: f64,
    pub channel: Channel,
}

/// Information density of a finite mixture of memoryless channels sharing
/// the i.i.d. input `px`: each trial draws one component for the whole
/// block, and the density is evaluated against the mixture,
/// `(1/n) log2 Σ_k w_k W_k^n(y|x) / Σ_k w_k P_{Y,k}^n(y)`.
pub fn sample_mixture_information_density(
    px: &Distribution,
    components: &[MixtureComponent],
    n: usize,
    trials: usize,
    mc: &MonteCarlo,
) -> Result<SpectrumEstimate> {
    check_sizes(n, trials)?;
    if components.is_empty() {
        return Err(Error::Precondition("mixture needs at least one component".into()));
    }
    let weights = Distribution::new(components.iter().map(|c| c.weight).collect())?;
    let ny = components[0].channel.outputs();
    if components.iter().any(|c| c.channel.outputs() != ny) {
        return Err(Error::DimensionMismatch("mixture components differ in output size".into()));
    }
    let mut logs_w = Vec::new();
    let mut logs_py = Vec::new();
    for comp in components {
        comp.channel.check_input(px)?;
        logs_w.push(comp.channel.matrix().iter().map(|p| p.ln()).collect::<Vec<_>>());
        logs_py.push(
            comp.channel
                .output_probs(px.probs())
                .iter()
                .map(|p| p.ln())
                .collect::<Vec<_>>(),
        );
    }
    let pick = weights.sampler();
    let xs = px.sampler();
    let rows: Vec<Vec<Sampler>> = components.iter().map(|c| c.channel.samplers()).collect();
    let lw: Vec<f64> = weights.probs().iter().map(|w| w.ln()).collect();
    let mc = mc.fork(n as u64);
    let out = mc.run(domain::SPECTRUM, trials, |rng, _| {
        let k = pick.sample(rng);
        let mut num = lw.clone();
        let mut den = lw.clone();
        for _ in 0..n {
            let x = xs.sample(rng);
            let y = rows[k][x].sample(rng);
            for j in 0..components.len() {
                num[j] += logs_w[j][x * ny + y];
                den[j] += logs_py[j][y];
            }
        }
        (log_sum_exp(num) - log_sum_exp(den)) / (LN_2 * n as f64)
    });
    SpectrumEstimate::from_samples(n, out, 0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileRow {
    pub n: usize,
    pub samples: usize,
    /// Right limit `sup{r : F̂_n(r) ≤ ε}`.
    pub quantile: f64,
    /// Left limit `inf{r : F̂_n(r) ≥ ε}`.
    pub quantile_left: f64,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Increasing,
    Decreasing,
    Flat,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsLimitEstimate {
    pub epsilon: f64,
    /// The ε actually used; differs from `epsilon` only when ε = 0 was
    /// replaced by `1/samples`.
    pub epsilon_used: f64,
    pub epsilon_substituted: bool,
    pub r_lower: f64,
    pub r_upper: f64,
    /// Quantile trend over the largest half of the sweep.
    pub trend: Trend,
    pub per_n_quantiles: Vec<QuantileRow>,
}

/// Per-n empirical ε-quantiles and their extremes over the largest half of
/// the sweep.
pub fn estimate_eps_limits(estimates: &[SpectrumEstimate], epsilon: f64) -> Result<EpsLimitEstimate> {
    if estimates.len() < 3 {
        return Err(Error::Precondition(format!(
            "need at least 3 blocklengths, got {}",
            estimates.len()
        )));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::Precondition(format!("epsilon {epsilon} outside [0, 1)")));
    }
    let mut sorted: Vec<&SpectrumEstimate> = estimates.iter().collect();
    sorted.sort_by_key(|e| e.n);
    let substitute = epsilon == 0.0 && sorted.iter().any(|e| !e.is_degenerate());
    let min_samples = sorted.iter().map(|e| e.samples).min().unwrap_or(1);
    let eps = if substitute {
        1.0 / min_samples as f64
    } else {
        epsilon
    };
    let rows: Vec<QuantileRow> = sorted
        .iter()
        .map(|e| QuantileRow {
            n: e.n,
            samples: e.samples,
            quantile: e.quantile_right(eps),
            quantile_left: e.quantile_left(eps),
            mean: e.mean,
            variance: e.variance,
        })
        .collect();
    let tail = &rows[rows.len() / 2..];
    let qs: Vec<f64> = tail.iter().map(|r| r.quantile).collect();
    let r_lower = qs.iter().copied().fold(f64::INFINITY, f64::min);
    let r_upper = qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let trend = if r_lower == r_upper {
        Trend::Flat
    } else if qs.windows(2).all(|w| w[1] >= w[0]) {
        Trend::Increasing
    } else if qs.windows(2).all(|w| w[1] <= w[0]) {
        Trend::Decreasing
    } else {
        Trend::Mixed
    };
    Ok(EpsLimitEstimate {
        epsilon,
        epsilon_used: eps,
        epsilon_substituted: substitute,
        r_lower,
        r_upper,
        trend,
        per_n_quantiles: rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{secrecy_capacity_degraded, sigma0_sq, OutputLaw, SolverOptions};
    use crate::channel::compose;
    use crate::prob::binary_entropy;
    use crate::stats::fit_line;

    fn mc() -> MonteCarlo {
        MonteCarlo::new(2024)
    }

    #[test]
    fn noiseless_and_constant_are_deterministic() {
        let u = Distribution::uniform(2);
        let e = sample_information_density(&u, &Channel::identity(2), 50, 200, &mc()).unwrap();
        assert!(e.empirical_cdf.iter().all(|&s| s == 1.0));
        let flat = Channel::from_rows(&[vec![0.4, 0.6], vec![0.4, 0.6]]).unwrap();
        let e = sample_information_density(&u, &flat, 50, 200, &mc()).unwrap();
        assert!(e.empirical_cdf.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn bsc_mean_near_mutual_information() {
        let u = Distribution::uniform(2);
        let e = sample_information_density(&u, &Channel::bsc(0.1).unwrap(), 1000, 10_000, &mc()).unwrap();
        assert!((e.mean - (1.0 - binary_entropy(0.1))).abs() < 0.01);
        assert!(e.empirical_cdf.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn variance_scales_inversely_with_n() {
        let u = Distribution::uniform(2);
        let c = Channel::bsc(0.1).unwrap();
        let ns = [250.0f64, 1000.0, 4000.0];
        let vars: Vec<f64> = ns
            .iter()
            .map(|&n| {
                sample_information_density(&u, &c, n as usize, 2000, &mc())
                    .unwrap()
                    .variance
                    .ln()
            })
            .collect();
        let lx: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
        let fit = fit_line(&lx, &vars).unwrap();
        assert!((-1.2..=-0.8).contains(&fit.slope), "slope {}", fit.slope);
    }

    #[test]
    fn quantile_limits_on_atoms() {
        let e = SpectrumEstimate::from_samples(1, vec![0.0, 1.0, 1.0, 2.0], 0).unwrap();
        assert_eq!(e.quantile_right(0.25), 1.0);
        assert_eq!(e.quantile_left(0.25), 0.0);
        assert_eq!(e.quantile_right(0.5), 1.0);
        assert_eq!(e.quantile_right(0.0), 0.0);
        assert_eq!(e.quantile_left(0.0), 0.0);
        assert_eq!(e.quantile_right(0.99), 2.0);
        assert_eq!(e.fraction_at_least(1.0), 0.75);
        assert_eq!(e.fraction_at_least(1.5), 0.25);
    }

    #[test]
    fn quantile_is_monotone_in_eps() {
        let u = Distribution::uniform(2);
        let e = sample_information_density(&u, &Channel::bsc(0.2).unwrap(), 100, 1000, &mc()).unwrap();
        let qs: Vec<f64> = (0..100).map(|i| e.quantile_right(i as f64 / 100.0)).collect();
        assert!(qs.windows(2).all(|w| w[0] <= w[1]));
        assert!(e.quantile_right(0.999) >= e.quantile_right(0.001));
    }

    #[test]
    fn eps_limits_noiseless() {
        let u = Distribution::uniform(2);
        let ests: Vec<_> = [10, 20, 40]
            .iter()
            .map(|&n| sample_information_density(&u, &Channel::identity(2), n, 50, &mc()).unwrap())
            .collect();
        for eps in [0.0, 0.3, 0.9] {
            let r = estimate_eps_limits(&ests, eps).unwrap();
            assert_eq!((r.r_lower, r.r_upper), (1.0, 1.0));
            assert!(!r.epsilon_substituted);
        }
        assert!(estimate_eps_limits(&ests[..2], 0.1).is_err());
        assert!(estimate_eps_limits(&ests, 1.0).is_err());
    }

    #[test]
    fn eps_zero_substitution_is_flagged() {
        let u = Distribution::uniform(2);
        let ests: Vec<_> = [50, 100, 200]
            .iter()
            .map(|&n| sample_information_density(&u, &Channel::bsc(0.1).unwrap(), n, 500, &mc()).unwrap())
            .collect();
        let r = estimate_eps_limits(&ests, 0.0).unwrap();
        assert!(r.epsilon_substituted);
        assert_eq!(r.epsilon_used, 1.0 / 500.0);
    }

    #[test]
    fn eps_limits_bsc_sweep() {
        let u = Distribution::uniform(2);
        let c = Channel::bsc(0.1).unwrap();
        let ests: Vec<_> = [250, 500, 1000, 2000]
            .iter()
            .map(|&n| sample_information_density(&u, &c, n, 2000, &mc()).unwrap())
            .collect();
        let r = estimate_eps_limits(&ests, 0.1).unwrap();
        let i = 1.0 - binary_entropy(0.1);
        // normal approximation of the 0.1-quantile: I - 1.2816 sqrt(V/n)
        let v = 0.09 * (9.0f64).log2().powi(2);
        for row in &r.per_n_quantiles {
            let oracle = i - 1.281_551_6 * (v / row.n as f64).sqrt();
            assert!((row.quantile - oracle).abs() < 0.01, "{row:?} vs {oracle}");
        }
        assert_eq!(r.trend, Trend::Increasing);
        assert!(r.r_lower <= r.r_upper && r.r_upper < i);
        assert!((r.r_upper - i).abs() < 0.03, "{r:?}");
    }

    #[test]
    fn mixture_has_two_plateaus() {
        let u = Distribution::uniform(2);
        let comps = [
            MixtureComponent {
                weight: 0.5,
                channel: Channel::bsc(0.05).unwrap(),
            },
            MixtureComponent {
                weight: 0.5,
                channel: Channel::bsc(0.45).unwrap(),
            },
        ];
        let ests: Vec<_> = [250, 500, 1000, 2000]
            .iter()
            .map(|&n| sample_mixture_information_density(&u, &comps, n, 2000, &mc()).unwrap())
            .collect();
        let lo = estimate_eps_limits(&ests, 0.25).unwrap();
        let hi = estimate_eps_limits(&ests, 0.75).unwrap();
        let (c_bad, c_good) = (1.0 - binary_entropy(0.45), 1.0 - binary_entropy(0.05));
        assert!((lo.r_lower - c_bad).abs() < 0.03 && (lo.r_upper - c_bad).abs() < 0.03, "{lo:?}");
        assert!((hi.r_lower - c_good).abs() < 0.03 && (hi.r_upper - c_good).abs() < 0.03, "{hi:?}");
    }

    fn bsc_pair() -> WiretapChannel {
        compose(&Channel::bsc(0.05).unwrap(), &Channel::bsc(0.15 / 0.9).unwrap()).unwrap()
    }

    #[test]
    fn conditional_density_copy_is_zero() {
        let w = compose(&Channel::bsc(0.1).unwrap(), &Channel::identity(2)).unwrap();
        let r = secrecy_capacity_degraded(&w, SolverOptions::default()).unwrap();
        let OutputLaw::Pair(out) = &r.output_dist else { panic!() };
        let e = sample_conditional_information_density(&r.optimal_input, &w, out, 30, 200, &mc()).unwrap();
        assert!(e.empirical_cdf.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn conditional_density_deviation_bound() {
        let w = bsc_pair();
        let r = secrecy_capacity_degraded(&w, SolverOptions::default()).unwrap();
        let OutputLaw::Pair(out) = &r.output_dist else { panic!() };
        let s0 = sigma0_sq(&w, out).unwrap().value;
        let e = sample_conditional_information_density(&r.optimal_input, &w, out, 400, 10_000, &mc())
            .unwrap();
        let frac = e.fraction_at_least(r.value + 0.05);
        let se = (frac * (1.0 - frac) / 10_000.0).sqrt();
        assert!(frac <= s0 / (400.0 * 0.0025) + 3.0 * se);
    }

    #[test]
    fn fixed_input_matches_exact_mean() {
        let w = bsc_pair();
        let r = secrecy_capacity_degraded(&w, SolverOptions::default()).unwrap();
        let OutputLaw::Pair(out) = &r.output_dist else { panic!() };
        let e = sample_conditional_density_given(&[0; 200], &w, out, 4000, &mc()).unwrap();
        // per-letter expectation equals the KKT term, which equals C_s at a uniform optimum
        assert!((e.mean - r.value).abs() < 4.0 * (e.variance / 4000.0).sqrt() + 1e-9);
    }

    #[test]
    fn zero_reference_trials_are_rejected() {
        let w = bsc_pair();
        let bad = JointDistribution::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let e = sample_conditional_information_density(&Distribution::uniform(2), &w, &bad, 5, 100, &mc());
        // most trials hit an off-diagonal (y, z) pair
        let e = e.unwrap();
        assert!(e.rejected > 0 && e.rejected + e.samples == 100);
    }

    #[test]
    fn thread_count_does_not_change_samples() {
        let u = Distribution::uniform(2);
        let c = Channel::bsc(0.3).unwrap();
        let a = sample_information_density(&u, &c, 64, 300, &mc().with_threads(1)).unwrap();
        let b = sample_information_density(&u, &c, 64, 300, &mc().with_threads(4)).unwrap();
        assert_eq!(a, b);
    }
}
