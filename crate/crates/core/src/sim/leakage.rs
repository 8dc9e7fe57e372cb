use std::f64::consts::LN_2;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{encode, Codebook};
use crate::channel::Channel;
use crate::metrics::{compute_metrics, MetricReport};
use crate::prob::JointDistribution;
use crate::rng::{domain, MonteCarlo};
use crate::stats::{log_sum_exp, wilson, Estimate};
use crate::{Error, Result};

/// Default cap on `|Z|^n · M̃_n` for exact enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: f64 = (1u64 << 26) as f64;

/// `W_Z^n(·|x)` over all of `Z^n`, first letter most significant.
fn output_law(wz: &Channel, x: &[u16]) -> Vec<f64> {
    let nz = wz.outputs();
    let mut law = vec![1.0];
    for &xi in x {
        let row = wz.row(xi as usize);
        let mut next = Vec::with_capacity(law.len() * nz);
        for &p in &law {
            next.extend(row.iter().map(|w| p * w));
        }
        law = next;
    }
    law
}

/// Builds `P_{MZ^n}` exactly, with `P(z|m) = (1/K) Σ_{l ∈ C(m)} W_Z^n(z|x(l))`
/// and a uniform message, and evaluates the six metrics on it.
pub fn exact_leakage(
    cb: &Codebook,
    wz: &Channel,
    budget: f64,
    eta1_bits: f64,
    eta2_bits: f64,
) -> Result<MetricReport> {
    let joint = exact_joint(cb, wz, budget)?;
    compute_metrics(&joint, cb.n(), eta1_bits, eta2_bits)
}

/// The joint of message and eavesdropper block as an `M × |Z|^n` table.
pub fn exact_joint(cb: &Codebook, wz: &Channel, budget: f64) -> Result<JointDistribution> {
    let cells = (wz.outputs() as f64).powi(cb.n() as i32);
    let required = cells * cb.total() as f64;
    if required > budget {
        return Err(Error::BudgetExceeded {
            what: "leakage enumeration entries",
            required,
            budget,
        });
    }
    let k = cb.subcode_size() as f64;
    let m_count = cb.messages() as f64;
    let rows: Vec<Vec<f64>> = (0..cb.messages())
        .into_par_iter()
        .map(|m| {
            let mut acc = vec![0.0; cells as usize];
            for l in cb.subcodebook(m) {
                for (a, p) in acc.iter_mut().zip(output_law(wz, cb.codeword(l))) {
                    *a += p;
                }
            }
            acc.iter_mut().for_each(|a| *a /= k * m_count);
            acc
        })
        .collect();
    Ok(JointDistribution::from_weights(
        cb.messages() as usize,
        cells as usize,
        rows.concat(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageTails {
    pub trials: usize,
    pub eta1_bits: f64,
    pub eta2_bits: f64,
    pub s3: Estimate,
    pub s6: Estimate,
}

/// Monte Carlo S3 and S6 for a stored code: `(m, z)` drawn from the true
/// joint, the log-ratio `log2 P(z|m)/P(z)` evaluated exactly over all
/// `M̃_n` codewords. S1 and S2 are not estimated this way.
pub fn estimate_leakage_tails(
    cb: &Codebook,
    wz: &Channel,
    trials: usize,
    mc: &MonteCarlo,
    eta1_bits: f64,
    eta2_bits: f64,
) -> Result<LeakageTails> {
    if trials == 0 {
        return Err(Error::Precondition("need at least one trial".into()));
    }
    let nz = wz.outputs();
    let ln_w: Vec<f64> = wz.matrix().iter().map(|p| p.ln()).collect();
    let rows = wz.samplers();
    let ln_k = (cb.subcode_size() as f64).ln();
    let ln_total = (cb.total() as f64).ln();
    let n = cb.n() as f64;
    let hits = mc.run(domain::LEAKAGE, trials, |rng, _| -> Result<(bool, bool)> {
        let m = rng.gen_range(0..cb.messages());
        let (x, _) = encode(cb, m, rng)?;
        let z: Vec<usize> = x.iter().map(|&a| rows[a as usize].sample(rng)).collect();
        let ln_law = |word: &[u16]| -> f64 {
            word.iter()
                .zip(&z)
                .map(|(&a, &b)| ln_w[a as usize * nz + b])
                .sum()
        };
        let all: Vec<f64> = cb.codewords().map(ln_law).collect();
        let sub = cb.subcodebook(m);
        let ln_cond = log_sum_exp(all[sub.start as usize..sub.end as usize].iter().copied()) - ln_k;
        let ln_marg = log_sum_exp(all.iter().copied()) - ln_total;
        let ratio = (ln_cond - ln_marg) / LN_2;
        Ok((ratio > eta1_bits, ratio > n * eta2_bits))
    });
    let hits: Vec<(bool, bool)> = hits.into_iter().collect::<Result<_>>()?;
    Ok(LeakageTails {
        trials,
        eta1_bits,
        eta2_bits,
        s3: wilson(hits.iter().filter(|h| h.0).count(), trials),
        s6: wilson(hits.iter().filter(|h| h.1).count(), trials),
    })
}
