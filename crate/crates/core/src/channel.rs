//! Single-letter channels, wiretap channels and degradedness checks.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

use crate::prob::{Distribution, Sampler, SIMPLEX_TOL};
use crate::{Error, Result};

/// Row-stochastic matrix `W(y|x)`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    inputs: usize,
    outputs: usize,
    matrix: Vec<f64>,
}

impl Channel {
    pub fn new(inputs: usize, outputs: usize, matrix: Vec<f64>) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(Error::InvalidChannel("empty alphabet".into()));
        }
        if matrix.len() != inputs * outputs {
            return Err(Error::DimensionMismatch(format!(
                "{inputs}x{outputs} channel needs {} entries, got {}",
                inputs * outputs,
                matrix.len()
            )));
        }
        let matrix = normalize_rows(matrix, outputs).map_err(Error::InvalidChannel)?;
        Ok(Self {
            inputs,
            outputs,
            matrix,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let inputs = rows.len();
        let outputs = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != outputs) {
            return Err(Error::DimensionMismatch("ragged channel rows".into()));
        }
        Self::new(inputs, outputs, rows.concat())
    }

    /// Binary symmetric channel with crossover `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidChannel(format!("crossover {p} outside [0,1]")));
        }
        Self::new(2, 2, vec![1.0 - p, p, p, 1.0 - p])
    }

    /// Binary erasure channel; output 2 is the erasure symbol.
    pub fn bec(eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::InvalidChannel(format!("erasure {eps} outside [0,1]")));
        }
        Self::new(2, 3, vec![1.0 - eps, eps, 0.0, 0.0, eps, 1.0 - eps])
    }

    /// `q`-ary symmetric channel: correct with probability `1 − err`,
    /// otherwise uniform over the other `q − 1` symbols.
    pub fn symmetric(q: usize, err: f64) -> Result<Self> {
        if q < 2 || !(0.0..=1.0).contains(&err) {
            return Err(Error::InvalidChannel(format!("symmetric({q}, {err})")));
        }
        let off = err / (q - 1) as f64;
        let m = (0..q * q)
            .map(|k| if k / q == k % q { 1.0 - err } else { off })
            .collect();
        Self::new(q, q, m)
    }

    pub fn identity(size: usize) -> Self {
        let m = (0..size * size)
            .map(|k| if k / size == k % size { 1.0 } else { 0.0 })
            .collect();
        Self {
            inputs: size,
            outputs: size,
            matrix: m,
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.matrix[x * self.outputs + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.matrix[x * self.outputs..(x + 1) * self.outputs]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.matrix.chunks(self.outputs)
    }

    /// Series connection `self` then `next`, as a plain channel.
    pub fn then(&self, next: &Channel) -> Result<Channel> {
        if self.outputs != next.inputs {
            return Err(Error::DimensionMismatch(format!(
                "cannot feed {} outputs into a channel with {} inputs",
                self.outputs, next.inputs
            )));
        }
        let mut m = vec![0.0; self.inputs * next.outputs];
        for x in 0..self.inputs {
            for y in 0..self.outputs {
                let a = self.prob(x, y);
                if a == 0.0 {
                    continue;
                }
                for z in 0..next.outputs {
                    m[x * next.outputs + z] += a * next.prob(y, z);
                }
            }
        }
        Channel::new(self.inputs, next.outputs, m)
    }

    /// Output distribution when the input is drawn from `px`.
    pub fn output_distribution(&self, px: &Distribution) -> Result<Distribution> {
        self.check_input(px)?;
        Distribution::new(self.output_probs(px.probs()))
    }

    pub(crate) fn output_probs(&self, px: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.outputs];
        for (row, &p) in self.rows().zip(px) {
            for (o, w) in out.iter_mut().zip(row) {
                *o += p * w;
            }
        }
        out
    }

    pub(crate) fn check_input(&self, px: &Distribution) -> Result<()> {
        if px.alphabet_size() != self.inputs {
            return Err(Error::DimensionMismatch(format!(
                "input distribution has {} symbols, channel has {} inputs",
                px.alphabet_size(),
                self.inputs
            )));
        }
        Ok(())
    }

    /// Relabels inputs and outputs: input `i` becomes `px_perm[i]`, output
    /// `j` becomes `py_perm[j]`.
    pub fn permuted(&self, in_perm: &[usize], out_perm: &[usize]) -> Channel {
        let mut m = vec![0.0; self.matrix.len()];
        for x in 0..self.inputs {
            for y in 0..self.outputs {
                m[in_perm[x] * self.outputs + out_perm[y]] = self.prob(x, y);
            }
        }
        Channel {
            inputs: self.inputs,
            outputs: self.outputs,
            matrix: m,
        }
    }

    /// One sampler per input row.
    pub fn samplers(&self) -> Vec<Sampler> {
        self.rows().map(Sampler::new).collect()
    }
}

fn normalize_rows(mut m: Vec<f64>, width: usize) -> std::result::Result<Vec<f64>, String> {
    for (i, row) in m.chunks_mut(width).enumerate() {
        if let Some(bad) = row.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(format!("row {i} has invalid entry {bad}"));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > SIMPLEX_TOL {
            return Err(format!("row {i} sums to {s:.15}, not 1"));
        }
        row.iter_mut().for_each(|p| *p /= s);
    }
    Ok(m)
}

/// Joint kernel `W(y, z | x)` from `X` to `Y × Z`.
///
/// The joint is stored as `|X|` rows of `|Y|·|Z|` entries with `z` varying
/// fastest. When the channel was built by [`compose`] the physical
/// factorization `W(y,z|x) = W1(y|x) W2(z|y)` is kept alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WiretapChannel {
    x: usize,
    y: usize,
    z: usize,
    joint: Vec<f64>,
    factors: Option<(Channel, Channel)>,
}

impl WiretapChannel {
    pub fn from_joint(x: usize, y: usize, z: usize, joint: Vec<f64>) -> Result<Self> {
        if x == 0 || y == 0 || z == 0 {
            return Err(Error::InvalidChannel("empty alphabet".into()));
        }
        if joint.len() != x * y * z {
            return Err(Error::DimensionMismatch(format!(
                "{x}x{y}x{z} wiretap kernel needs {} entries, got {}",
                x * y * z,
                joint.len()
            )));
        }
        let joint = normalize_rows(joint, y * z).map_err(Error::InvalidChannel)?;
        Ok(Self {
            x,
            y,
            z,
            joint,
            factors: None,
        })
    }

    /// Attaches a physical factorization after checking it reproduces the
    /// joint entrywise within `1e-10`.
    pub fn with_factorization(mut self, w1: Channel, w2: Channel) -> Result<Self> {
        let composed = compose(&w1, &w2)?;
        if composed.x != self.x || composed.y != self.y || composed.z != self.z {
            return Err(Error::DimensionMismatch("factorization shape differs".into()));
        }
        let worst = composed
            .joint
            .iter()
            .zip(&self.joint)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if worst > 1e-10 {
            return Err(Error::InvalidChannel(format!(
                "factorization misses the joint by {worst:.3e}"
            )));
        }
        self.factors = Some((w1, w2));
        Ok(self)
    }

    pub fn input_size(&self) -> usize {
        self.x
    }

    pub fn y_size(&self) -> usize {
        self.y
    }

    pub fn z_size(&self) -> usize {
        self.z
    }

    pub fn joint(&self) -> &[f64] {
        &self.joint
    }

    #[inline]
    pub fn prob(&self, x: usize, y: usize, z: usize) -> f64 {
        self.joint[(x * self.y + y) * self.z + z]
    }

    /// The `|Y|·|Z|` entries of input `x`, `z` fastest.
    pub fn row(&self, x: usize) -> &[f64] {
        let w = self.y * self.z;
        &self.joint[x * w..(x + 1) * w]
    }

    pub fn factorization(&self) -> Option<(&Channel, &Channel)> {
        self.factors.as_ref().map(|(a, b)| (a, b))
    }

    /// The kernel as a plain channel from `X` to the pair alphabet.
    pub fn as_pair_channel(&self) -> Channel {
        Channel {
            inputs: self.x,
            outputs: self.y * self.z,
            matrix: self.joint.clone(),
        }
    }

    /// Relabels the three alphabets.
    pub fn permuted(&self, px: &[usize], py: &[usize], pz: &[usize]) -> WiretapChannel {
        let mut joint = vec![0.0; self.joint.len()];
        for x in 0..self.x {
            for y in 0..self.y {
                for z in 0..self.z {
                    joint[(px[x] * self.y + py[y]) * self.z + pz[z]] = self.prob(x, y, z);
                }
            }
        }
        let factors = self
            .factors
            .as_ref()
            .map(|(a, b)| (a.permuted(px, py), b.permuted(py, pz)));
        WiretapChannel {
            x: self.x,
            y: self.y,
            z: self.z,
            joint,
            factors,
        }
    }
}

/// `W_Y(y|x) = Σ_z W(y,z|x)`.
pub fn marginal_y(w: &WiretapChannel) -> Channel {
    let mut m = vec![0.0; w.x * w.y];
    for x in 0..w.x {
        for y in 0..w.y {
            m[x * w.y + y] = (0..w.z).map(|z| w.prob(x, y, z)).sum();
        }
    }
    Channel::new(w.x, w.y, m).expect("marginal of a valid kernel is stochastic")
}

/// `W_Z(z|x) = Σ_y W(y,z|x)`.
pub fn marginal_z(w: &WiretapChannel) -> Channel {
    let mut m = vec![0.0; w.x * w.z];
    for x in 0..w.x {
        for z in 0..w.z {
            m[x * w.z + z] = (0..w.y).map(|y| w.prob(x, y, z)).sum();
        }
    }
    Channel::new(w.x, w.z, m).expect("marginal of a valid kernel is stochastic")
}

/// Physically degraded wiretap channel `W(y,z|x) = W1(y|x) W2(z|y)`.
pub fn compose(w1: &Channel, w2: &Channel) -> Result<WiretapChannel> {
    if w1.outputs != w2.inputs {
        return Err(Error::DimensionMismatch(format!(
            "main channel has {} outputs but the degrading channel has {} inputs",
            w1.outputs, w2.inputs
        )));
    }
    let (nx, ny, nz) = (w1.inputs, w1.outputs, w2.outputs);
    let mut joint = Vec::with_capacity(nx * ny * nz);
    for x in 0..nx {
        for y in 0..ny {
            for z in 0..nz {
                joint.push(w1.prob(x, y) * w2.prob(y, z));
            }
        }
    }
    let mut w = WiretapChannel::from_joint(nx, ny, nz, joint)?;
    w.factors = Some((w1.clone(), w2.clone()));
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegradednessVerdict {
    PhysicallyFactored,
    StochasticallyDegraded,
    NotDegraded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradednessCertificate {
    pub verdict: DegradednessVerdict,
    /// `V` with `W_Z = W_Y · V` when degraded.
    pub witness: Option<Channel>,
    /// Minimized `max |W_Y·V − W_Z|` over row-stochastic `V`.
    pub residual: f64,
    /// Tolerance the witness satisfies when degraded.
    pub tolerance: f64,
}

impl DegradednessCertificate {
    pub fn is_degraded(&self) -> bool {
        self.verdict != DegradednessVerdict::NotDegraded
    }
}

pub const DEFAULT_LP_TOL: f64 = 1e-9;

/// Decides whether `wz = wy · V` for some row-stochastic `V`.
///
/// Solves `min t` subject to `|Σ_y wy(x,y) V(y,z) − wz(x,z)| ≤ t`, `V ≥ 0`,
/// rows of `V` summing to one. A residual up to `10·tol` is accepted as
/// degraded; the certificate's `tolerance` records that band.
pub fn check_stochastic_degradedness(
    wy: &Channel,
    wz: &Channel,
    tol: f64,
) -> Result<DegradednessCertificate> {
    if wy.inputs != wz.inputs {
        return Err(Error::DimensionMismatch(format!(
            "main channel has {} inputs, eavesdropper channel has {}",
            wy.inputs, wz.inputs
        )));
    }
    let (nx, ny, nz) = (wy.inputs, wy.outputs, wz.outputs);
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    let v: Vec<_> = (0..ny * nz).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    for y in 0..ny {
        let row: Vec<_> = (0..nz).map(|z| (v[y * nz + z], 1.0)).collect();
        lp.add_constraint(&row, ComparisonOp::Eq, 1.0);
    }
    for x in 0..nx {
        for z in 0..nz {
            let mut terms: Vec<_> = (0..ny)
                .filter(|&y| wy.prob(x, y) != 0.0)
                .map(|y| (v[y * nz + z], wy.prob(x, y)))
                .collect();
            let target = wz.prob(x, z);
            terms.push((t, -1.0));
            lp.add_constraint(&terms, ComparisonOp::Le, target);
            terms.pop();
            terms.push((t, 1.0));
            lp.add_constraint(&terms, ComparisonOp::Ge, target);
        }
    }
    let sol = lp
        .solve()
        .map_err(|e| Error::LinearProgram(e.to_string()))?;

    let mut vm: Vec<f64> = v.iter().map(|&var| sol[var].max(0.0)).collect();
    for row in vm.chunks_mut(nz) {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= s);
    }
    let witness = Channel {
        inputs: ny,
        outputs: nz,
        matrix: vm,
    };
    // measure the residual on the cleaned witness rather than trusting t
    let residual = max_violation(wy, &witness, wz);
    let band = 10.0 * tol;
    if residual <= band {
        Ok(DegradednessCertificate {
            verdict: DegradednessVerdict::StochasticallyDegraded,
            witness: Some(witness),
            residual,
            tolerance: band,
        })
    } else {
        Ok(DegradednessCertificate {
            verdict: DegradednessVerdict::NotDegraded,
            witness: None,
            residual,
            tolerance: band,
        })
    }
}

fn max_violation(wy: &Channel, v: &Channel, wz: &Channel) -> f64 {
    let mut worst: f64 = 0.0;
    for x in 0..wy.inputs {
        for z in 0..wz.outputs {
            let s: f64 = (0..wy.outputs).map(|y| wy.prob(x, y) * v.prob(y, z)).sum();
            worst = worst.max((s - wz.prob(x, z)).abs());
        }
    }
    worst
}

/// Certificate for a wiretap kernel: a recorded factorization is accepted
/// as is, otherwise the marginals go through the LP.
pub fn check_degradedness(w: &WiretapChannel, tol: f64) -> Result<DegradednessCertificate> {
    if let Some((_, w2)) = w.factorization() {
        return Ok(DegradednessCertificate {
            verdict: DegradednessVerdict::PhysicallyFactored,
            witness: Some(w2.clone()),
            residual: 0.0,
            tolerance: 1e-10,
        });
    }
    check_stochastic_degradedness(&marginal_y(w), &marginal_z(w), tol)
}

/// Rows are permutations of each other and all column sums agree, both
/// within `tol`.
pub fn is_weakly_symmetric(c: &Channel, tol: f64) -> bool {
    let sorted = |row: &[f64]| {
        let mut r = row.to_vec();
        r.sort_by(f64::total_cmp);
        r
    };
    let first = sorted(c.row(0));
    let rows_match = c.rows().skip(1).all(|row| {
        sorted(row)
            .iter()
            .zip(&first)
            .all(|(a, b)| (a - b).abs() <= tol)
    });
    if !rows_match {
        return false;
    }
    let col0: f64 = (0..c.inputs).map(|x| c.prob(x, 0)).sum();
    (1..c.outputs).all(|y| {
        let s: f64 = (0..c.inputs).map(|x| c.prob(x, y)).sum();
        (s - col0).abs() <= tol
    })
}

/// `Σ_i log2 W(out_i | x_i)` for a memoryless extension of `c`.
///
/// Returns `-∞` as soon as a transition has probability zero.
pub fn n_letter_log_density(c: &Channel, x: &[usize], out: &[usize]) -> Result<f64> {
    if x.len() != out.len() {
        return Err(Error::DimensionMismatch(format!(
            "input length {} differs from output length {}",
            x.len(),
            out.len()
        )));
    }
    let mut total = 0.0;
    for (&a, &b) in x.iter().zip(out) {
        if a >= c.inputs || b >= c.outputs {
            return Err(Error::DimensionMismatch(format!("symbol pair ({a},{b}) out of range")));
        }
        let p = c.prob(a, b);
        if p == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        total += p.log2();
    }
    Ok(total)
}

/// `Σ_i log2 W(y_i, z_i | x_i)` for the memoryless wiretap extension.
pub fn n_letter_joint_log_density(
    w: &WiretapChannel,
    x: &[usize],
    y: &[usize],
    z: &[usize],
) -> Result<f64> {
    if x.len() != y.len() || x.len() != z.len() {
        return Err(Error::DimensionMismatch("sequence lengths differ".into()));
    }
    let mut total = 0.0;
    for ((&a, &b), &c) in x.iter().zip(y).zip(z) {
        if a >= w.x || b >= w.y || c >= w.z {
            return Err(Error::DimensionMismatch(format!("symbol triple ({a},{b},{c}) out of range")));
        }
        let p = w.prob(a, b, c);
        if p == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        total += p.log2();
    }
    Ok(total)
}
