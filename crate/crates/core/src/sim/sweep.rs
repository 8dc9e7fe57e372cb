use serde::{Deserialize, Serialize};

use super::reliability::fits_in_memory;
use super::{
    estimate_leakage_tails, estimate_qn, exact_leakage, generate_codebook, run_reliability,
    run_reliability_ensemble, CodebookSpec, DEFAULT_ATOM_BUDGET, DEFAULT_CODEBOOK_BYTES,
    DEFAULT_ENUMERATION_BUDGET, DEFAULT_GAMMA,
};
use crate::capacity::{secrecy_capacity_degraded, SolverOptions};
use crate::channel::{marginal_z, WiretapChannel};
use crate::metrics::DEFAULT_ETA_BITS;
use crate::rng::{splitmix64, MonteCarlo};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub gamma: f64,
    pub trials: usize,
    pub leakage_trials: usize,
    pub eta2_bits: f64,
    pub atom_budget: f64,
    pub codebook_bytes: u64,
    pub enumeration_budget: f64,
    /// Cap on `M̃_n · n · leakage_trials` for sampled leakage tails.
    pub leakage_work: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            gamma: DEFAULT_GAMMA,
            trials: 2000,
            leakage_trials: 2000,
            eta2_bits: DEFAULT_ETA_BITS,
            atom_budget: DEFAULT_ATOM_BUDGET,
            codebook_bytes: DEFAULT_CODEBOOK_BYTES,
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET,
            leakage_work: 2e9,
        }
    }
}

/// One cell of the phase diagram. `*_ci` are 95% radii; `s6_hat` is NaN
/// when the code is too large to store, exact with radius 0 when it can be
/// enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rate: f64,
    pub n: usize,
    pub eps_hat: f64,
    pub eps_ci: f64,
    pub s6_hat: f64,
    pub s6_ci: f64,
    pub qn_hat: f64,
    pub qn_ci: f64,
}

/// Error, leakage tail and `q_n` over a grid of message rates and
/// blocklengths. The input law is the secrecy-optimal one and `K` follows
/// the resolvability sizing at `opts.gamma`.
pub fn phase_sweep(
    w: &WiretapChannel,
    rates: &[f64],
    ns: &[usize],
    opts: &SweepOptions,
    mc: &MonteCarlo,
) -> Result<Vec<SweepRow>> {
    if rates.is_empty() || ns.is_empty() {
        return Err(Error::Precondition("empty rate or blocklength grid".into()));
    }
    let input = secrecy_capacity_degraded(w, SolverOptions::default())?.optimal_input;
    let wz = marginal_z(w);
    let mut rows = Vec::with_capacity(rates.len() * ns.len());
    for (ri, &rate) in rates.iter().enumerate() {
        for (ni, &n) in ns.iter().enumerate() {
            let cell = mc.fork(((ri as u64) << 32) | ni as u64);
            let spec = CodebookSpec::for_secrecy(n, rate, opts.gamma, input.clone(), &wz, splitmix64(cell.seed))?;
            let eps = match run_reliability_ensemble(&spec, w, opts.trials, &cell, opts.atom_budget) {
                Err(Error::BudgetExceeded { .. }) if fits_in_memory(&spec, opts.codebook_bytes) => {
                    let cb = generate_codebook(&spec, opts.codebook_bytes)?;
                    run_reliability(&cb, &spec, w, opts.trials, &cell)?
                }
                r => r?,
            };
            let (s6_hat, s6_ci) = leakage_tail(&spec, &wz, opts, &cell)?;
            let qn = estimate_qn(&spec, &wz, opts.trials, &cell)?;
            rows.push(SweepRow {
                rate,
                n,
                eps_hat: eps.error.value,
                eps_ci: eps.error.radius,
                s6_hat,
                s6_ci,
                qn_hat: qn.value,
                qn_ci: qn.radius,
            });
        }
    }
    Ok(rows)
}

fn leakage_tail(
    spec: &CodebookSpec,
    wz: &crate::channel::Channel,
    opts: &SweepOptions,
    mc: &MonteCarlo,
) -> Result<(f64, f64)> {
    if !fits_in_memory(spec, opts.codebook_bytes) {
        return Ok((f64::NAN, f64::NAN));
    }
    let cb = generate_codebook(spec, opts.codebook_bytes)?;
    match exact_leakage(&cb, wz, opts.enumeration_budget, DEFAULT_ETA_BITS, opts.eta2_bits) {
        Ok(r) => return Ok((r.s6, 0.0)),
        Err(Error::BudgetExceeded { .. }) => {}
        Err(e) => return Err(e),
    }
    let work = cb.total() as f64 * spec.n as f64 * opts.leakage_trials as f64;
    if work > opts.leakage_work || opts.leakage_trials == 0 {
        return Ok((f64::NAN, f64::NAN));
    }
    let t = estimate_leakage_tails(&cb, wz, opts.leakage_trials, mc, DEFAULT_ETA_BITS, opts.eta2_bits)?;
    Ok((t.s6.value, t.s6.radius))
}
