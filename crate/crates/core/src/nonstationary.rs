//! Memoryless non-stationary degraded wiretap channels built from weakly
//! symmetric letters: running Cesàro means of the per-letter capacities and
//! the fourth-moment control of the resolvability tail.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::capacity::weakly_symmetric_capacity;
use crate::channel::{check_stochastic_degradedness, is_weakly_symmetric, Channel, DEFAULT_LP_TOL};
use crate::prob::Sampler;
use crate::rng::{domain, MonteCarlo};
use crate::stats::{fit_line, wilson, Estimate, LineFit};
use crate::{Error, Result};

/// Error probabilities of one letter's symmetric main and eavesdropper
/// channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LetterParams {
    pub main: f64,
    pub eve: f64,
}

impl LetterParams {
    pub fn new(main: f64, eve: f64) -> Self {
        Self { main, eve }
    }

    fn lerp(a: Self, b: Self, t: f64) -> Self {
        Self::new(a.main + t * (b.main - a.main), a.eve + t * (b.eve - a.eve))
    }
}

/// Parametric sequences of `q`-ary symmetric pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    Constant { pair: LetterParams },
    /// `a, b, a, b, …`.
    Alternating { a: LetterParams, b: LetterParams },
    /// `a` for 1 letter, `b` for 2, `a` for 4, `b` for 8, ….
    BlockDoubling { a: LetterParams, b: LetterParams },
    /// Letter `i` (0-based) is `limit + (start − limit)/(i + 1)`.
    Convergent { start: LetterParams, limit: LetterParams },
}

impl Family {
    fn anchors(&self) -> Vec<LetterParams> {
        match *self {
            Family::Constant { pair } => vec![pair],
            Family::Alternating { a, b } | Family::BlockDoubling { a, b } => vec![a, b],
            Family::Convergent { start, limit } => vec![start, limit],
        }
    }

    fn letter(&self, i: usize) -> LetterParams {
        match *self {
            Family::Constant { pair } => pair,
            Family::Alternating { a, b } => {
                if i.is_multiple_of(2) {
                    a
                } else {
                    b
                }
            }
            Family::BlockDoubling { a, b } => {
                // block k covers [2^k − 1, 2^{k+1} − 1)
                let k = usize::BITS - 1 - (i + 1).leading_zeros();
                if k.is_multiple_of(2) {
                    a
                } else {
                    b
                }
            }
            Family::Convergent { start, limit } => LetterParams::lerp(limit, start, 1.0 / (i as f64 + 1.0)),
        }
    }
}

#[derive(Debug, Clone)]
enum Source {
    Family { q: usize, family: Family },
    Explicit(Vec<(Channel, Channel)>),
}

/// The letters `(W_{Y,i}, W_{Z,i})`, each weakly symmetric with `W_{Z,i}`
/// degraded with respect to `W_{Y,i}`. Indices are 0-based.
#[derive(Debug, Clone)]
pub struct ChannelSequence {
    source: Source,
}

impl ChannelSequence {
    /// A `q`-ary symmetric family. Each anchor must satisfy
    /// `0 ≤ main ≤ eve ≤ (q−1)/q`; every letter is then a degraded pair
    /// because the family only interpolates between anchors.
    pub fn family(q: usize, family: Family) -> Result<Self> {
        if q < 2 {
            return Err(Error::Precondition(format!("alphabet size {q} must be at least 2")));
        }
        let top = (q - 1) as f64 / q as f64;
        for (k, a) in family.anchors().iter().enumerate() {
            if !(a.main >= 0.0 && a.main <= a.eve && a.eve <= top) {
                return Err(Error::Precondition(format!(
                    "anchor {k}: need 0 ≤ main ≤ eve ≤ {top}, got main {} eve {}",
                    a.main, a.eve
                )));
            }
        }
        Ok(Self {
            source: Source::Family { q, family },
        })
    }

    /// An explicit finite list, validated letter by letter.
    pub fn explicit(pairs: Vec<(Channel, Channel)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Precondition("empty channel list".into()));
        }
        for (i, (wy, wz)) in pairs.iter().enumerate() {
            let bad = |what: &str| Error::Precondition(format!("letter {i}: {what}"));
            if !is_weakly_symmetric(wy, 1e-9) {
                return Err(bad("main channel is not weakly symmetric"));
            }
            if !is_weakly_symmetric(wz, 1e-9) {
                return Err(bad("eavesdropper channel is not weakly symmetric"));
            }
            if wy.inputs() != wz.inputs() {
                return Err(bad("input alphabets differ"));
            }
            let cert = check_stochastic_degradedness(wy, wz, DEFAULT_LP_TOL)?;
            if !cert.is_degraded() {
                return Err(bad(&format!("not degraded (residual {:.3e})", cert.residual)));
            }
        }
        Ok(Self {
            source: Source::Explicit(pairs),
        })
    }

    /// Number of letters available, `None` when unbounded.
    pub fn horizon(&self) -> Option<usize> {
        match &self.source {
            Source::Family { .. } => None,
            Source::Explicit(p) => Some(p.len()),
        }
    }

    fn check_index(&self, i: usize) -> Result<()> {
        match self.horizon() {
            Some(h) if i >= h => Err(Error::Precondition(format!("index {i} beyond the horizon {h}"))),
            _ => Ok(()),
        }
    }

    /// Letter `i`.
    pub fn pair(&self, i: usize) -> Result<(Channel, Channel)> {
        self.check_index(i)?;
        match &self.source {
            Source::Family { q, family } => {
                let l = family.letter(i);
                Ok((Channel::symmetric(*q, l.main)?, Channel::symmetric(*q, l.eve)?))
            }
            Source::Explicit(p) => Ok(p[i].clone()),
        }
    }

    /// `(C(W_{Y,i}), C(W_{Z,i}))`.
    pub fn capacities(&self, i: usize) -> Result<(f64, f64)> {
        let (wy, wz) = self.pair(i)?;
        Ok((weakly_symmetric_capacity(&wy)?.value, weakly_symmetric_capacity(&wz)?.value))
    }

    /// Per-letter capacities for `0..n`. Families repeat few distinct
    /// letters except the convergent one, so results are memoized.
    fn capacity_prefix(&self, n: usize) -> Result<Vec<(f64, f64)>> {
        if n > 0 {
            self.check_index(n - 1)?;
        }
        let mut memo: HashMap<(u64, u64), (f64, f64)> = HashMap::new();
        (0..n)
            .map(|i| match &self.source {
                Source::Family { family, .. } => {
                    let l = family.letter(i);
                    let key = (l.main.to_bits(), l.eve.to_bits());
                    if let Some(&c) = memo.get(&key) {
                        return Ok(c);
                    }
                    let c = self.capacities(i)?;
                    memo.insert(key, c);
                    Ok(c)
                }
                Source::Explicit(_) => self.capacities(i),
            })
            .collect()
    }
}

/// Compensated (Neumaier) running sum.
#[derive(Debug, Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CesaroRow {
    pub n: usize,
    #[serde(rename = "mean_CY")]
    pub mean_cy: f64,
    #[serde(rename = "mean_CZ")]
    pub mean_cz: f64,
    pub diff: f64,
}

/// Running means `(1/n) Σ_{i<n} C(W_{Y,i})`, the same for `W_Z`, and their
/// difference at each requested `n`.
pub fn cesaro_means(seq: &ChannelSequence, n_list: &[usize]) -> Result<Vec<CesaroRow>> {
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::Precondition("blocklengths must be positive and non-empty".into()));
    }
    let max = *n_list.iter().max().expect("non-empty");
    let caps = seq.capacity_prefix(max)?;
    let (mut sy, mut sz) = (Neumaier::default(), Neumaier::default());
    let mut prefix = Vec::with_capacity(max + 1);
    prefix.push((0.0, 0.0));
    for &(cy, cz) in &caps {
        sy.add(cy);
        sz.add(cz);
        prefix.push((sy.value(), sz.value()));
    }
    Ok(n_list
        .iter()
        .map(|&n| {
            let (y, z) = prefix[n];
            let (mean_cy, mean_cz) = (y / n as f64, z / n as f64);
            CesaroRow {
                n,
                mean_cy,
                mean_cz,
                diff: mean_cy - mean_cz,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceDiagnostic {
    pub converged: bool,
    pub liminf_hat: f64,
    pub limsup_hat: f64,
    pub window: usize,
    pub tol: f64,
}

/// Spread of the running difference over the last `window` rows; a finite
/// prefix can only suggest a limit, never establish one.
pub fn convergence_diagnostic(table: &[CesaroRow], window: usize, tol: f64) -> Result<ConvergenceDiagnostic> {
    if window == 0 || window > table.len() {
        return Err(Error::Precondition(format!(
            "window {window} must lie in [1, {}]",
            table.len()
        )));
    }
    let tail = &table[table.len() - window..];
    let lo = tail.iter().map(|r| r.diff).fold(f64::INFINITY, f64::min);
    let hi = tail.iter().map(|r| r.diff).fold(f64::NEG_INFINITY, f64::max);
    Ok(ConvergenceDiagnostic {
        converged: hi - lo <= tol,
        liminf_hat: lo,
        limsup_hat: hi,
        window,
        tol,
    })
}

/// Moments of `J = log2(W_Z(Z|x)·|Z|) − C(W_Z)` for `Z ~ W_Z(·|x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JMoments {
    pub mean: f64,
    pub second: f64,
    pub fourth: f64,
}

fn letter_moments(wz: &Channel, capacity: f64, x: usize) -> JMoments {
    let nz = wz.outputs() as f64;
    let (mut m1, mut m2, mut m4) = (0.0, 0.0, 0.0);
    for &w in wz.row(x).iter().filter(|&&w| w > 0.0) {
        let j = (w * nz).log2() - capacity;
        m1 += w * j;
        m2 += w * j * j;
        m4 += w * j.powi(4);
    }
    JMoments {
        mean: m1,
        second: m2,
        fourth: m4,
    }
}

/// Exact moments of `J_i` given input `x`, or averaged over the uniform
/// input when `x` is `None`.
pub fn fourth_moment_bound(seq: &ChannelSequence, i: usize, x: Option<usize>) -> Result<JMoments> {
    let (_, wz) = seq.pair(i)?;
    let c = weakly_symmetric_capacity(&wz)?.value;
    match x {
        Some(x) if x >= wz.inputs() => Err(Error::Precondition(format!("input {x} out of range"))),
        Some(x) => Ok(letter_moments(&wz, c, x)),
        None => {
            let k = wz.inputs() as f64;
            let mut acc = JMoments {
                mean: 0.0,
                second: 0.0,
                fourth: 0.0,
            };
            for x in 0..wz.inputs() {
                let m = letter_moments(&wz, c, x);
                acc.mean += m.mean / k;
                acc.second += m.second / k;
                acc.fourth += m.fourth / k;
            }
            Ok(acc)
        }
    }
}

/// Bound on `E[J⁴]` valid for every weakly symmetric letter with output
/// alphabet `z_size`: `8|Z|(4/e)⁴/ln⁴2 + 8 log2⁴|Z|`, from
/// `u |ln u|^k ≤ (k/e)^k` on `[0, 1]` and `(a+b)⁴ ≤ 8a⁴ + 8b⁴`.
pub fn analytic_fourth_moment_bound(z_size: usize) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    8.0 * z_size as f64 * (4.0 / std::f64::consts::E).powi(4) / ln2.powi(4)
        + 8.0 * (z_size as f64).log2().powi(4)
}

/// `16·E[(Σ J_i)⁴] / (n⁴γ⁴)` with
/// `E[(Σ J_i)⁴] = Σ E[J_i⁴] + 6 Σ_{i<j} E[J_i²] E[J_j²]`, uniform input.
pub fn markov_bound(seq: &ChannelSequence, n: usize, gamma: f64) -> Result<f64> {
    let moments: Vec<JMoments> = (0..n).map(|i| fourth_moment_bound(seq, i, None)).collect::<Result<_>>()?;
    Ok(markov_from_moments(&moments, gamma))
}

fn markov_from_moments(moments: &[JMoments], gamma: f64) -> f64 {
    let n = moments.len() as f64;
    let (mut s2, mut s2sq, mut s4) = (Neumaier::default(), Neumaier::default(), Neumaier::default());
    for m in moments {
        s2.add(m.second);
        s2sq.add(m.second * m.second);
        s4.add(m.fourth);
    }
    let cross = 0.5 * (s2.value() * s2.value() - s2sq.value());
    16.0 * (s4.value() + 6.0 * cross) / (n.powi(4) * gamma.powi(4))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QnDecayRow {
    pub n: usize,
    pub qn: Estimate,
    pub markov_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QnDecayReport {
    pub gamma: f64,
    pub rows: Vec<QnDecayRow>,
    /// `ln q̂_n` against `ln n` over the rows with `q̂_n > 0`.
    pub fit: Option<LineFit>,
    /// Slope at most −1 (vacuously true when every estimate is zero).
    pub decays_quadratically: bool,
    /// `q̂_n ≤ bound + 3 radii` at every `n`.
    pub bound_holds: bool,
}

/// Monte Carlo `Pr[(1/n) Σ J_i ≥ γ/2]` under the uniform input, checked
/// against the fourth-moment Markov bound and for polynomial decay.
pub fn qn_quadratic_decay_check(
    seq: &ChannelSequence,
    gamma: f64,
    n_list: &[usize],
    trials: usize,
    mc: &MonteCarlo,
) -> Result<QnDecayReport> {
    if !(gamma > 0.0) || trials == 0 || n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::Precondition(
            "need gamma > 0, positive trials and a non-empty list of positive blocklengths".into(),
        ));
    }
    let max = *n_list.iter().max().expect("non-empty");
    struct Letter {
        inputs: usize,
        outputs: usize,
        samplers: Vec<Sampler>,
        j: Vec<f64>,
    }
    let mut letters = Vec::with_capacity(max);
    let mut moments = Vec::with_capacity(max);
    for i in 0..max {
        let (_, wz) = seq.pair(i)?;
        let c = weakly_symmetric_capacity(&wz)?.value;
        let nz = wz.outputs() as f64;
        let j = wz
            .matrix()
            .iter()
            .map(|&w| if w > 0.0 { (w * nz).log2() - c } else { f64::NEG_INFINITY })
            .collect();
        moments.push(fourth_moment_bound(seq, i, None)?);
        letters.push(Letter {
            inputs: wz.inputs(),
            outputs: wz.outputs(),
            samplers: wz.samplers(),
            j,
        });
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let hits = mc.fork(n as u64).run(domain::NONSTATIONARY, trials, |rng, _| {
            let s: f64 = letters[..n]
                .iter()
                .map(|l| {
                    let x = rng.gen_range(0..l.inputs);
                    let z = l.samplers[x].sample(rng);
                    l.j[x * l.outputs + z]
                })
                .sum();
            s / n as f64 >= gamma / 2.0
        });
        rows.push(QnDecayRow {
            n,
            qn: wilson(hits.iter().filter(|&&h| h).count(), trials),
            markov_bound: markov_from_moments(&moments[..n], gamma),
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.qn.value > 0.0)
        .map(|r| ((r.n as f64).ln(), r.qn.value.ln()))
        .unzip();
    let fit = fit_line(&xs, &ys);
    let all_zero = rows.iter().all(|r| r.qn.value == 0.0);
    Ok(QnDecayReport {
        gamma,
        decays_quadratically: all_zero || fit.is_some_and(|f| f.slope <= -1.0),
        bound_holds: rows.iter().all(|r| r.qn.value <= r.markov_bound + 3.0 * r.qn.radius),
        fit,
        rows,
    })
}
