use std::collections::HashMap;
use std::sync::RwLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{encode, threshold_decode, Codebook, CodebookSpec, DecodeOutcome, Decoder};
use crate::channel::{marginal_y, Channel, WiretapChannel};
use crate::rng::{domain, MonteCarlo};
use crate::stats::{log_sum_exp, wilson, Estimate};
use crate::{Error, Result};

/// Cap on the number of joint atoms enumerated per output type.
pub const DEFAULT_ATOM_BUDGET: f64 = 2e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReliabilityMethod {
    /// Decoding against one stored codebook.
    Codebook,
    /// Averaged over the random-code ensemble.
    Ensemble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityReport {
    pub method: ReliabilityMethod,
    pub trials: usize,
    pub errors: usize,
    pub error: Estimate,
    /// Fraction of trials whose transmitted codeword misses the threshold.
    pub atypical: Estimate,
    /// `atypical + 2^{-nγ}`.
    pub fein_bound: f64,
}

fn report(method: ReliabilityMethod, outcomes: &[(bool, bool)], n: usize, gamma: f64) -> ReliabilityReport {
    let trials = outcomes.len();
    let errors = outcomes.iter().filter(|o| o.0).count();
    let atypical_count = outcomes.iter().filter(|o| o.1).count();
    let atypical = wilson(atypical_count, trials);
    ReliabilityReport {
        method,
        trials,
        errors,
        error: wilson(errors, trials),
        atypical,
        fein_bound: atypical.value + (-(n as f64) * gamma).exp2(),
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::Precondition("need at least one trial".into()));
    }
    Ok(())
}

/// Monte Carlo error probability of a stored codebook over a uniform
/// message, the encoder's randomness and the main channel's noise.
pub fn run_reliability(
    cb: &Codebook,
    spec: &CodebookSpec,
    w: &WiretapChannel,
    trials: usize,
    mc: &MonteCarlo,
) -> Result<ReliabilityReport> {
    check_trials(trials)?;
    let main = marginal_y(w);
    let dec = Decoder::new(spec, &main)?;
    let rows = main.samplers();
    let outcomes = mc.run(domain::RELIABILITY, trials, |rng, _| -> Result<(bool, bool)> {
        let m = rng.gen_range(0..cb.messages());
        let (x, _) = encode(cb, m, rng)?;
        let y: Vec<usize> = x.iter().map(|&a| rows[a as usize].sample(rng)).collect();
        let atypical = !dec.clears(dec.score(x, &y));
        let ok = threshold_decode(cb, &dec, &y)? == DecodeOutcome::Message(m);
        Ok((!ok, atypical))
    });
    let outcomes: Vec<(bool, bool)> = outcomes.into_iter().collect::<Result<_>>()?;
    Ok(report(ReliabilityMethod::Codebook, &outcomes, spec.n, spec.gamma))
}

/// Error probability averaged over the random-code ensemble, without
/// storing codewords.
///
/// Given the transmitted codeword `x` and output `y`, the other codewords
/// are i.i.d. from `P_X^n` and independent of `y`, so each clears the
/// threshold with the same probability `p(y)`. That probability depends on
/// `y` only through its type and is computed exactly by enumerating the
/// multinomial composition of codeword symbols within each output block.
/// With `A` = "the transmitted codeword clears", the decoder succeeds iff
/// (`A` or one of the `K − 1` siblings clears) and none of the `M̃ − K`
/// foreign codewords clears; the two counts are drawn as Bernoulli events
/// with probabilities `1 − (1 − p)^N`.
pub fn run_reliability_ensemble(
    spec: &CodebookSpec,
    w: &WiretapChannel,
    trials: usize,
    mc: &MonteCarlo,
    atom_budget: f64,
) -> Result<ReliabilityReport> {
    check_trials(trials)?;
    let main = marginal_y(w);
    let dec = Decoder::new(spec, &main)?;
    let tail = CompetitorTail::new(spec, &dec, &main, atom_budget);
    let ln_siblings = spec.subcode.ln_minus_one();
    let ln_foreign = spec.messages.ln_minus_one().map(|lm| lm + spec.subcode.ln());
    let xs = spec.input_dist.sampler();
    let rows = main.samplers();
    let n = spec.n;
    let ny = main.outputs();
    let outcomes = mc.run(domain::ENSEMBLE, trials, |rng, _| -> Result<(bool, bool)> {
        let mut counts = vec![0u32; ny];
        let mut score = 0.0;
        for _ in 0..n {
            let x = xs.sample(rng);
            let y = rows[x].sample(rng);
            counts[y] += 1;
            score += dec.dens[x * ny + y];
        }
        let hit = dec.clears(score);
        let ln_p = tail.ln_tail(&counts)?;
        let sibling = rng.gen::<f64>() < prob_any(ln_siblings, ln_p);
        let foreign = rng.gen::<f64>() < prob_any(ln_foreign, ln_p);
        Ok((!((hit || sibling) && !foreign), !hit))
    });
    let outcomes: Vec<(bool, bool)> = outcomes.into_iter().collect::<Result<_>>()?;
    Ok(report(ReliabilityMethod::Ensemble, &outcomes, spec.n, spec.gamma))
}

/// `1 − (1 − p)^N` from `ln N` and `ln p`, stable for huge `N` and tiny `p`.
fn prob_any(ln_count: Option<f64>, ln_p: f64) -> f64 {
    let Some(ln_n) = ln_count else { return 0.0 };
    if ln_p == f64::NEG_INFINITY {
        return 0.0;
    }
    let per = -(-ln_p.exp()).ln_1p();
    -(-(ln_n + per.ln()).exp()).exp_m1()
}

/// Exact `ln P[Σ_i d(X'_i, y_i) ≥ threshold]` for `X'` i.i.d. from the input
/// law, as a function of the type of `y`.
struct CompetitorTail {
    dens: Vec<f64>,
    outputs: usize,
    support: Vec<usize>,
    ln_px: Vec<f64>,
    ln_fact: Vec<f64>,
    threshold: f64,
    budget: f64,
    cache: RwLock<HashMap<Vec<u32>, f64>>,
}

type Atom = (f64, f64);

impl CompetitorTail {
    fn new(spec: &CodebookSpec, dec: &Decoder, main: &Channel, budget: f64) -> Self {
        let support: Vec<usize> = spec.input_dist.support().collect();
        let ln_px = spec.input_dist.probs().iter().map(|p| p.ln()).collect();
        let mut ln_fact = vec![0.0; spec.n + 1];
        for i in 1..=spec.n {
            ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
        }
        Self {
            dens: dec.dens.clone(),
            outputs: main.outputs(),
            support,
            ln_px,
            ln_fact,
            threshold: dec.threshold,
            budget,
            cache: RwLock::new(HashMap::new()),
        }
    }

    fn atom_count(&self, nb: u32) -> f64 {
        // C(nb + s - 1, s - 1)
        let s = self.support.len();
        (1..s).fold(1.0, |acc, j| acc * (nb as f64 + j as f64) / j as f64)
    }

    fn block_atoms(&self, b: usize, nb: u32) -> Vec<Atom> {
        let mut out = Vec::new();
        let base = self.ln_fact[nb as usize];
        self.compose(b, 0, nb, 0.0, base, &mut out);
        out
    }

    fn compose(&self, b: usize, idx: usize, left: u32, score: f64, lp: f64, out: &mut Vec<Atom>) {
        let x = self.support[idx];
        let d = self.dens[x * self.outputs + b];
        let term = |c: u32| {
            if c == 0 {
                (0.0, 0.0)
            } else {
                (c as f64 * d, c as f64 * self.ln_px[x] - self.ln_fact[c as usize])
            }
        };
        if idx + 1 == self.support.len() {
            let (s, l) = term(left);
            out.push((score + s, lp + l));
            return;
        }
        for c in 0..=left {
            let (s, l) = term(c);
            self.compose(b, idx + 1, left - c, score + s, lp + l, out);
        }
    }

    fn ln_tail(&self, counts: &[u32]) -> Result<f64> {
        if let Some(&v) = self.cache.read().expect("cache lock").get(counts) {
            return Ok(v);
        }
        let v = self.compute(counts)?;
        self.cache
            .write()
            .expect("cache lock")
            .insert(counts.to_vec(), v);
        Ok(v)
    }

    fn compute(&self, counts: &[u32]) -> Result<f64> {
        let blocks: Vec<usize> = (0..counts.len()).filter(|&b| counts[b] > 0).collect();
        let last = *blocks
            .iter()
            .max_by(|&&a, &&b| self.atom_count(counts[a]).total_cmp(&self.atom_count(counts[b])))
            .expect("non-empty output");
        let mut required = self.atom_count(counts[last]);
        for &b in blocks.iter().filter(|&&b| b != last) {
            required *= self.atom_count(counts[b]);
        }
        if required > self.budget {
            return Err(Error::BudgetExceeded {
                what: "ensemble tail atoms",
                required,
                budget: self.budget,
            });
        }

        let mut head: Vec<Atom> = vec![(0.0, 0.0)];
        for &b in blocks.iter().filter(|&&b| b != last) {
            let atoms = self.block_atoms(b, counts[b]);
            head = head
                .iter()
                .flat_map(|&(s, l)| atoms.iter().map(move |&(s2, l2)| (s + s2, l + l2)))
                .collect();
        }

        let mut tail = self.block_atoms(last, counts[last]);
        tail.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut suffix = vec![f64::NEG_INFINITY; tail.len() + 1];
        for i in (0..tail.len()).rev() {
            suffix[i] = crate::stats::log_add_exp(suffix[i + 1], tail[i].1);
        }
        let terms = head.iter().filter(|a| a.0 > f64::NEG_INFINITY).map(|&(s, l)| {
            let need = self.threshold - s;
            let i = tail.partition_point(|a| a.0 < need);
            l + suffix[i]
        });
        Ok(log_sum_exp(terms).min(0.0))
    }
}

pub(crate) fn fits_in_memory(spec: &CodebookSpec, byte_budget: u64) -> bool {
    spec.exact_sizes().is_some() && spec.log2_total().exp2() * spec.n as f64 * 2.0 <= byte_budget as f64
}
