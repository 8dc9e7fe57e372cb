use super::CodebookSpec;
use crate::channel::Channel;
use crate::rng::{domain, MonteCarlo};
use crate::stats::{wilson, Estimate};
use crate::{Error, Result};

/// Probability that the unnormalized eavesdropper density
/// `log2 W_Z^n(Z^n|X^n)/P_{Z^n}(Z^n)` reaches `log2 K − nγ`, with
/// `(X^n, Z^n)` drawn i.i.d. from `input_dist × W_Z`.
pub fn estimate_qn(spec: &CodebookSpec, wz: &Channel, trials: usize, mc: &MonteCarlo) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::Precondition("need at least one trial".into()));
    }
    wz.check_input(&spec.input_dist)?;
    let pz = wz.output_probs(spec.input_dist.probs());
    let nz = wz.outputs();
    let dens: Vec<f64> = wz
        .matrix()
        .iter()
        .enumerate()
        .map(|(i, &w)| if w > 0.0 { (w / pz[i % nz]).log2() } else { f64::NEG_INFINITY })
        .collect();
    let xs = spec.input_dist.sampler();
    let rows = wz.samplers();
    let threshold = spec.qn_threshold_bits();
    let n = spec.n;
    let hits = mc.fork(n as u64).run(domain::QN, trials, |rng, _| {
        let mut s = 0.0;
        for _ in 0..n {
            let x = xs.sample(rng);
            let z = rows[x].sample(rng);
            s += dens[x * nz + z];
        }
        s >= threshold
    });
    Ok(wilson(hits.iter().filter(|&&h| h).count(), trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{binary_entropy, Distribution};
    use crate::sim::Count;
    use crate::stats::fit_line;

    fn spec(n: usize, key_bits: f64, gamma: f64) -> CodebookSpec {
        CodebookSpec::new(n, Count::exact(1), Count::ceil_pow2(key_bits), gamma, Distribution::uniform(2), 4)
            .unwrap()
    }

    #[test]
    fn threshold_extremes() {
        let bsc = Channel::bsc(0.2).unwrap();
        let mc = MonteCarlo::new(1);
        // every letter density is at least log2 0.4 > -2
        let low = estimate_qn(&spec(20, 0.0, 2.0), &bsc, 500, &mc).unwrap();
        assert_eq!(low.value, 1.0);
        // and at most log2 1.6 < 1
        let high = estimate_qn(&spec(20, 21.0, 0.01), &bsc, 500, &mc).unwrap();
        assert_eq!(high.value, 0.0);
        assert!(high.radius > 0.0);
    }

    /// `2^{-n sup_s [s t − Λ(s)]}` with `Λ` the base-2 log-MGF of one
    /// letter's density, for BSC(p) and uniform input.
    fn chernoff(p: f64, n: usize, t: f64) -> f64 {
        let (a, b) = ((2.0 * (1.0 - p)).log2(), (2.0 * p).log2());
        let lambda = |s: f64| ((1.0 - p) * (s * a).exp2() + p * (s * b).exp2()).log2();
        let rate = (0..=4000)
            .map(|i| i as f64 * 1e-3)
            .map(|s| s * t - lambda(s))
            .fold(0.0, f64::max);
        (-(n as f64) * rate).exp2()
    }

    #[test]
    fn bsc_tail_decays_below_chernoff() {
        let (p, gamma) = (0.2, 0.05);
        let i_xz = 1.0 - binary_entropy(p);
        let mc = MonteCarlo::new(8);
        let mut ns = vec![];
        let mut logs = vec![];
        for n in [100, 200, 400] {
            let s = spec(n, n as f64 * (i_xz + 2.0 * gamma), gamma);
            let q = estimate_qn(&s, &Channel::bsc(p).unwrap(), 40_000, &mc).unwrap();
            let t = s.qn_threshold_bits() / n as f64;
            assert!(q.value <= chernoff(p, n, t) + 3.0 * q.radius, "n={n} {q:?}");
            ns.push(n as f64);
            logs.push(q.value.log2());
        }
        let fit = fit_line(&ns, &logs).unwrap();
        assert!(fit.slope < 0.0 && fit.r_squared >= 0.9, "{fit:?}");
    }
}
