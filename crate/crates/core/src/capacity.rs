//! Shannon and secrecy capacities of discrete channels.
//!
//! The secrecy solver maximizes `I(X;Y|Z)`, which is concave in the input
//! law for degraded channels, and stops on a KKT certificate rather than on
//! iterate movement.

use serde::{Deserialize, Serialize};

use crate::channel::{
    check_stochastic_degradedness, compose, is_weakly_symmetric, marginal_y, marginal_z, Channel,
    DegradednessVerdict, WiretapChannel, DEFAULT_LP_TOL,
};
use crate::prob::{entropy_of, kl_of, Distribution, JointDistribution};
use crate::{Error, Result};

/// Capacity-achieving output law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputLaw {
    /// `P_Ȳ` for a point-to-point channel.
    Single(Distribution),
    /// `P_{ȲZ̄}` over `Y × Z` for a wiretap channel.
    Pair(JointDistribution),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub value: f64,
    pub optimal_input: Distribution,
    pub output_dist: OutputLaw,
    pub kkt_slack: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every accepted iteration, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub record_trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 100_000,
            record_trace: false,
        }
    }
}

impl SolverOptions {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        Self {
            tol,
            max_iter,
            record_trace: false,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }
}

/// `I(X;Y)` in bits.
pub fn mutual_information(px: &Distribution, c: &Channel) -> Result<f64> {
    c.check_input(px)?;
    let py = c.output_probs(px.probs());
    Ok(mi_from(px.probs(), c, &py))
}

fn mi_from(px: &[f64], c: &Channel, py: &[f64]) -> f64 {
    px.iter()
        .zip(c.rows())
        .filter(|(&p, _)| p > 0.0)
        .map(|(&p, row)| p * kl_of(row, py))
        .sum::<f64>()
        .max(0.0)
}

/// `I(X;Y|Z)` in bits, computed from the joint `P_X × W`.
pub fn conditional_mutual_information(px: &Distribution, w: &WiretapChannel) -> Result<f64> {
    if px.alphabet_size() != w.input_size() {
        return Err(Error::DimensionMismatch(format!(
            "input distribution has {} symbols, wiretap channel has {} inputs",
            px.alphabet_size(),
            w.input_size()
        )));
    }
    let s = SecrecyTerms::new(w);
    let (f, _) = s.objective_and_gradient(px.probs());
    Ok(f.max(0.0))
}

/// `C = max I(X;Y)` by Blahut–Arimoto, stopping on the duality gap
/// `max_x D(W_x‖P_Y) − I` ≤ `tol`.
pub fn shannon_capacity(c: &Channel, tol: f64, max_iter: usize) -> CapacityResult {
    let nx = c.inputs();
    let mut p = vec![1.0 / nx as f64; nx];
    let mut d = vec![0.0; nx];
    let mut iterations = 0;
    loop {
        let py = c.output_probs(&p);
        for (dx, row) in d.iter_mut().zip(c.rows()) {
            *dx = kl_of(row, &py);
        }
        let value = mi_from(&p, c, &py);
        let slack = d.iter().copied().fold(f64::NEG_INFINITY, f64::max) - value;
        if slack <= tol || iterations >= max_iter {
            return CapacityResult {
                value,
                optimal_input: Distribution::from_weights(p),
                output_dist: OutputLaw::Single(Distribution::from_weights(py)),
                kkt_slack: slack,
                iterations,
                converged: slack <= tol,
                trace: None,
            };
        }
        let dmax = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (px, dx) in p.iter_mut().zip(&d) {
            *px *= (dx - dmax).exp2();
        }
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        iterations += 1;
    }
}

/// Closed form `log2|Y| − H(row)` with the uniform input.
pub fn weakly_symmetric_capacity(c: &Channel) -> Result<CapacityResult> {
    if !is_weakly_symmetric(c, 1e-9) {
        return Err(Error::Precondition("channel is not weakly symmetric".into()));
    }
    let value = ((c.outputs() as f64).log2() - entropy_of(c.row(0))).max(0.0);
    let px = Distribution::uniform(c.inputs());
    let py = c.output_probs(px.probs());
    let slack = c
        .rows()
        .map(|row| kl_of(row, &py))
        .fold(f64::NEG_INFINITY, f64::max)
        - value;
    Ok(CapacityResult {
        value,
        optimal_input: px,
        output_dist: OutputLaw::Single(Distribution::from_weights(py)),
        kkt_slack: slack,
        iterations: 0,
        converged: true,
        trace: None,
    })
}

/// Precomputed pieces of `I(X;Y|Z)` for a fixed kernel.
struct SecrecyTerms<'a> {
    w: &'a WiretapChannel,
    wz: Channel,
}

impl<'a> SecrecyTerms<'a> {
    fn new(w: &'a WiretapChannel) -> Self {
        Self {
            w,
            wz: marginal_z(w),
        }
    }

    fn pair_output(&self, p: &[f64]) -> Vec<f64> {
        let mut pyz = vec![0.0; self.w.y_size() * self.w.z_size()];
        for (x, &px) in p.iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            for (acc, v) in pyz.iter_mut().zip(self.w.row(x)) {
                *acc += px * v;
            }
        }
        pyz
    }

    /// `g(x) = E[log2 W_{Y|Z}(Y|x,Z) / P_{Y|Z}(Y|Z)]` under `W(·,·|x)`, i.e.
    /// `D(W_x‖P_YZ) − D(W_{Z,x}‖P_Z)`, and `f = Σ p(x) g(x)`.
    fn objective_and_gradient(&self, p: &[f64]) -> (f64, Vec<f64>) {
        let pyz = self.pair_output(p);
        let pz = self.wz.output_probs(p);
        let g: Vec<f64> = (0..self.w.input_size())
            .map(|x| kl_of(self.w.row(x), &pyz) - kl_of(self.wz.row(x), &pz))
            .collect();
        let f = p.iter().zip(&g).filter(|(&a, _)| a > 0.0).map(|(a, b)| a * b).sum();
        (f, g)
    }
}

/// Secrecy capacity `max_P I(X;Y|Z)` of a degraded wiretap channel.
///
/// A kernel without a recorded factorization is checked with the LP and, if
/// stochastically degraded, replaced by the physically degraded kernel
/// `W_Y ∘ V` with the same marginals. Non-degraded kernels are rejected.
///
/// The ascent is exponentiated gradient with a backtracking step, falling
/// back to a projected-gradient step if the multiplicative step stalls.
pub fn secrecy_capacity_degraded(w: &WiretapChannel, opts: SolverOptions) -> Result<CapacityResult> {
    let owned;
    let kernel = if w.factorization().is_some() {
        w
    } else {
        let wy = marginal_y(w);
        let cert = check_stochastic_degradedness(&wy, &marginal_z(w), DEFAULT_LP_TOL)?;
        match (cert.verdict, cert.witness) {
            (DegradednessVerdict::NotDegraded, _) | (_, None) => {
                return Err(Error::NotDegraded {
                    residual: cert.residual,
                })
            }
            (_, Some(v)) => {
                owned = compose(&wy, &v)?;
                &owned
            }
        }
    };
    Ok(ascend(kernel, opts))
}

fn ascend(w: &WiretapChannel, opts: SolverOptions) -> CapacityResult {
    let terms = SecrecyTerms::new(w);
    let nx = w.input_size();
    let mut p = vec![1.0 / nx as f64; nx];
    let (mut f, mut g) = terms.objective_and_gradient(&p);
    let mut trace = opts.record_trace.then(|| vec![f]);
    let mut eta = 1.0;
    let mut iterations = 0;
    let slack_of = |f: f64, g: &[f64]| g.iter().copied().fold(f64::NEG_INFINITY, f64::max) - f;
    let mut slack = slack_of(f, &g);

    while slack > opts.tol && iterations < opts.max_iter {
        iterations += 1;
        let step = loop {
            let cand = exp_step(&p, &g, eta);
            let (fc, gc) = terms.objective_and_gradient(&cand);
            // below rounding level the objective cannot rank steps; use the slack
            let gain = fc - f;
            let resolved = gain > 1e-14 * f.abs().max(1.0);
            if resolved || (gain >= -1e-13 && slack_of(fc, &gc) < slack) {
                eta = (eta * 1.5).min(1e6);
                break Some((cand, fc, gc));
            }
            eta *= 0.5;
            if eta < 1e-12 {
                break None;
            }
        };
        let (cand, fc, gc) = match step {
            Some(s) => s,
            None => {
                eta = 1.0;
                match projected_step(&terms, &p, &g, f) {
                    Some(s) => s,
                    None => break,
                }
            }
        };
        p = cand;
        f = fc;
        g = gc;
        slack = slack_of(f, &g);
        if let Some(t) = trace.as_mut() {
            t.push(f);
        }
    }

    let pyz = terms.pair_output(&p);
    CapacityResult {
        value: f.max(0.0),
        optimal_input: Distribution::from_weights(p),
        output_dist: OutputLaw::Pair(JointDistribution::from_weights(
            w.y_size(),
            w.z_size(),
            pyz,
        )),
        kkt_slack: slack,
        iterations,
        converged: slack <= opts.tol,
        trace,
    }
}

fn exp_step(p: &[f64], g: &[f64], eta: f64) -> Vec<f64> {
    let gmax = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut q: Vec<f64> = p
        .iter()
        .zip(g)
        .map(|(&a, &b)| a * (eta * (b - gmax)).exp2())
        .collect();
    let total: f64 = q.iter().sum();
    q.iter_mut().for_each(|x| *x /= total);
    q
}

type Step = (Vec<f64>, f64, Vec<f64>);

fn projected_step(terms: &SecrecyTerms, p: &[f64], g: &[f64], f: f64) -> Option<Step> {
    let mut t = 1.0;
    while t > 1e-14 {
        let cand = project_simplex(p.iter().zip(g).map(|(a, b)| a + t * b).collect());
        let (fc, gc) = terms.objective_and_gradient(&cand);
        if fc > f {
            return Some((cand, fc, gc));
        }
        t *= 0.5;
    }
    None
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: Vec<f64>) -> Vec<f64> {
    let mut u = v.clone();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        acc += ui;
        let t = (acc - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.into_iter().map(|x| (x - theta).max(0.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaZeroSq {
    pub value: f64,
    pub argmax_input_symbol: usize,
}

/// `max_x Var[log2 W_{Y|Z}(Y|x,Z) / P_{Ȳ|Z̄}(Y|Z)]` with `(Y,Z) ~ W(·,·|x)`.
///
/// `output` is `P_{ȲZ̄}` on `Y × Z`.
pub fn sigma0_sq(w: &WiretapChannel, output: &JointDistribution) -> Result<SigmaZeroSq> {
    let (ny, nz) = (w.y_size(), w.z_size());
    if output.rows() != ny || output.cols() != nz {
        return Err(Error::DimensionMismatch(format!(
            "output law is {}x{}, kernel outputs are {ny}x{nz}",
            output.rows(),
            output.cols()
        )));
    }
    let pz = output.col_marginal();
    let wz = marginal_z(w);
    let mut best = SigmaZeroSq {
        value: 0.0,
        argmax_input_symbol: 0,
    };
    for x in 0..w.input_size() {
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for y in 0..ny {
            for z in 0..nz {
                let p = w.prob(x, y, z);
                if p == 0.0 {
                    continue;
                }
                let q = output.get(y, z);
                if q == 0.0 {
                    return Err(Error::Precondition(format!(
                        "output law vanishes on reachable pair (y={y}, z={z}); variance is infinite"
                    )));
                }
                let dens = (p / wz.prob(x, z)).log2() - (q / pz.probs()[z]).log2();
                m1 += p * dens;
                m2 += p * dens * dens;
            }
        }
        let var = (m2 - m1 * m1).max(0.0);
        if var > best.value {
            best = SigmaZeroSq {
                value: var,
                argmax_input_symbol: x,
            };
        }
    }
    Ok(best)
}

/// `½ log2(1 + S/σ1²) − ½ log2(1 + S/σ2²)`.
pub fn gaussian_secrecy_capacity(power: f64, sigma1_sq: f64, sigma2_sq: f64) -> Result<f64> {
    if !(power >= 0.0 && power.is_finite()) {
        return Err(Error::Precondition(format!("power {power} must be non-negative")));
    }
    if !(sigma1_sq > 0.0 && sigma2_sq > sigma1_sq) {
        return Err(Error::Precondition(format!(
            "need 0 < σ1² < σ2², got σ1² = {sigma1_sq}, σ2² = {sigma2_sq}"
        )));
    }
    Ok(0.5 * (power / sigma1_sq).ln_1p() / std::f64::consts::LN_2
        - 0.5 * (power / sigma2_sq).ln_1p() / std::f64::consts::LN_2)
}
