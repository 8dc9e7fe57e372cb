//! The six secrecy metrics on an explicit joint of message and eavesdropper
//! block.

use serde::{Deserialize, Serialize};

use crate::prob::{half_l1, kl_of, JointDistribution};
use crate::{Error, Result};

pub const DEFAULT_ETA_BITS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub n: usize,
    pub eta1_bits: f64,
    pub eta2_bits: f64,
    /// `D(P_{MZ}‖P_M × P_Z)` in bits.
    pub s1: f64,
    /// Variational distance between the joint and the product of marginals.
    pub s2: f64,
    /// `Pr[log2(P/Q) > η1]`.
    pub s3: f64,
    pub s4: f64,
    pub s5: f64,
    /// `Pr[(1/n) log2(P/Q) > η2]`.
    pub s6: f64,
}

/// Evaluates S1–S6 for the joint of `M` (rows) and `Z^n` (columns).
pub fn compute_metrics(
    joint: &JointDistribution,
    n: usize,
    eta1_bits: f64,
    eta2_bits: f64,
) -> Result<MetricReport> {
    if n == 0 {
        return Err(Error::Precondition("blocklength must be at least 1".into()));
    }
    for eta in [eta1_bits, eta2_bits] {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Precondition(format!("threshold {eta} must be positive")));
        }
    }
    let q = joint.product_of_marginals();
    let s1 = kl_of(joint.probs(), q.probs());
    let s2 = half_l1(joint.probs(), q.probs());
    Ok(MetricReport {
        n,
        eta1_bits,
        eta2_bits,
        s1,
        s2,
        s3: information_tail(joint, eta1_bits),
        s4: s1 / n as f64,
        s5: s2 / n as f64,
        s6: information_tail(joint, n as f64 * eta2_bits),
    })
}

/// `Pr_P[log2(P/Q) > threshold]` with `Q` the product of the marginals.
/// Ties are excluded.
pub fn information_tail(joint: &JointDistribution, threshold: f64) -> f64 {
    let pm = joint.row_marginal();
    let pz = joint.col_marginal();
    let mut tail = 0.0;
    for m in 0..joint.rows() {
        for z in 0..joint.cols() {
            let p = joint.get(m, z);
            if p > 0.0 && (p / (pm.probs()[m] * pz.probs()[z])).log2() > threshold {
                tail += p;
            }
        }
    }
    tail.min(1.0)
}

/// Outcome of checking `s1 ≤ s2 · log2(m / s2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CsiszarCheck {
    Evaluated { holds: bool, lhs: f64, rhs: f64 },
    /// `s2` outside `(0, 1/4]`; no verdict.
    Inapplicable { s2: f64 },
}

/// Checks the leakage bound `s1 ≤ s2 log2(m/s2)` for `s2 ∈ (0, 1/4]`.
///
/// `s2 = 0` is accepted as the continuous limit with right-hand side zero.
pub fn csiszar_bound_check(s1_bits: f64, s2: f64, m_count: usize) -> Result<CsiszarCheck> {
    if m_count < 2 {
        return Err(Error::Precondition(format!(
            "message set needs at least 2 elements, got {m_count}"
        )));
    }
    if s2 == 0.0 {
        return Ok(CsiszarCheck::Evaluated {
            holds: s1_bits <= 1e-15,
            lhs: s1_bits,
            rhs: 0.0,
        });
    }
    if !(s2 > 0.0 && s2 <= 0.25) {
        return Ok(CsiszarCheck::Inapplicable { s2 });
    }
    let rhs = s2 * (m_count as f64 / s2).log2();
    Ok(CsiszarCheck::Evaluated {
        holds: s1_bits <= rhs,
        lhs: s1_bits,
        rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Distribution;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn random_joint(rng: &mut impl Rng, rows: usize, cols: usize) -> JointDistribution {
        let w: Vec<f64> = (0..rows * cols).map(|_| rng.gen::<f64>()).collect();
        JointDistribution::from_weights(rows, cols, w)
    }

    #[test]
    fn independence_zeroes_everything() {
        let j = JointDistribution::product(
            &Distribution::new(vec![0.3, 0.7]).unwrap(),
            &Distribution::new(vec![0.1, 0.2, 0.7]).unwrap(),
        );
        let r = compute_metrics(&j, 4, 0.1, 0.1).unwrap();
        for v in [r.s1, r.s2, r.s3, r.s4, r.s5, r.s6] {
            assert!(v.abs() < 1e-15, "{r:?}");
        }
    }

    #[test]
    fn copy_of_uniform_bit() {
        let j = JointDistribution::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let r = compute_metrics(&j, 1, 0.5, 0.5).unwrap();
        assert!((r.s1 - 1.0).abs() < 1e-15);
        assert!((r.s2 - 0.5).abs() < 1e-15);
        assert_eq!(r.s3, 1.0);
        assert_eq!(r.s4, r.s1);
        assert_eq!(r.s5, r.s2);
    }

    #[test]
    fn random_joint_against_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let j = random_joint(&mut rng, 4, 8);
        let r = compute_metrics(&j, 3, 0.1, 0.1).unwrap();
        let mut pm = [0.0; 4];
        let mut pz = [0.0; 8];
        for m in 0..4 {
            for z in 0..8 {
                pm[m] += j.get(m, z);
                pz[z] += j.get(m, z);
            }
        }
        let (mut s1, mut s2) = (0.0, 0.0);
        for m in 0..4 {
            for z in 0..8 {
                let (p, q) = (j.get(m, z), pm[m] * pz[z]);
                s1 += p * (p / q).ln() / std::f64::consts::LN_2;
                s2 += (p - q).abs() / 2.0;
            }
        }
        assert!((r.s1 - s1).abs() < 1e-12);
        assert!((r.s2 - s2).abs() < 1e-12);
    }

    #[test]
    fn ties_are_excluded() {
        // log-ratio exactly 1 on the support
        let j = JointDistribution::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(information_tail(&j, 1.0), 0.0);
        assert_eq!(information_tail(&j, 0.999), 1.0);
    }

    #[test]
    fn csiszar_window() {
        assert!(matches!(
            csiszar_bound_check(0.0, 0.0, 2).unwrap(),
            CsiszarCheck::Evaluated { holds: true, .. }
        ));
        assert!(matches!(
            csiszar_bound_check(1.0, 0.5, 2).unwrap(),
            CsiszarCheck::Inapplicable { .. }
        ));
        assert!(csiszar_bound_check(0.1, 0.1, 1).is_err());
    }

    #[test]
    fn csiszar_holds_on_random_joints() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut evaluated = 0;
        while evaluated < 1000 {
            let rows = rng.gen_range(2..6);
            let cols = rng.gen_range(2..6);
            // mix a random joint toward its product of marginals to land in the window
            let j = random_joint(&mut rng, rows, cols);
            let q = j.product_of_marginals();
            let t: f64 = rng.gen::<f64>();
            let mixed: Vec<f64> = j
                .probs()
                .iter()
                .zip(q.probs())
                .map(|(a, b)| t * a + (1.0 - t) * b)
                .collect();
            let j = JointDistribution::from_weights(rows, cols, mixed);
            let r = compute_metrics(&j, 1, 0.1, 0.1).unwrap();
            if let CsiszarCheck::Evaluated { holds, lhs, rhs } =
                csiszar_bound_check(r.s1, r.s2, rows).unwrap()
            {
                assert!(holds, "{lhs} > {rhs}");
                evaluated += 1;
            }
        }
    }

    proptest! {
        #[test]
        fn exact_identities_and_pinsker(seed in any::<u64>(), n in 1usize..20, eta in 0.01f64..2.0) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let j = random_joint(&mut rng, 3, 5);
            let r = compute_metrics(&j, n, eta, eta).unwrap();
            prop_assert_eq!(r.s4, r.s1 / n as f64);
            prop_assert_eq!(r.s5, r.s2 / n as f64);
            prop_assert_eq!(r.s6, information_tail(&j, n as f64 * eta));
            prop_assert!(r.s2 <= (r.s1 * std::f64::consts::LN_2 / 2.0).sqrt() + 1e-12);
            for v in [r.s2, r.s3, r.s6] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn tail_is_monotone(seed in any::<u64>(), a in 0.0f64..3.0, b in 0.0f64..3.0) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let j = random_joint(&mut rng, 4, 4);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(information_tail(&j, hi) <= information_tail(&j, lo));
            prop_assert_eq!(information_tail(&j, 64.0), 0.0);
        }

        #[test]
        fn relabel_invariant(seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let j = random_joint(&mut rng, 3, 4);
            let (pm, pz) = ([2, 0, 1], [3, 1, 0, 2]);
            let mut perm = vec![0.0; 12];
            for m in 0..3 {
                for z in 0..4 {
                    perm[pm[m] * 4 + pz[z]] = j.get(m, z);
                }
            }
            let jp = JointDistribution::new(3, 4, perm).unwrap();
            let (a, b) = (compute_metrics(&j, 2, 0.3, 0.2).unwrap(), compute_metrics(&jp, 2, 0.3, 0.2).unwrap());
            prop_assert!((a.s1 - b.s1).abs() < 1e-12);
            prop_assert!((a.s2 - b.s2).abs() < 1e-12);
            prop_assert!((a.s3 - b.s3).abs() < 1e-12);
            prop_assert!((a.s6 - b.s6).abs() < 1e-12);
        }
    }
}
