//! The random-coding wiretap construction: subcodebooks, stochastic
//! encoding, threshold decoding, leakage and the resolvability tail.
//!
//! Code sizes are carried as [`Count`]s (log2 plus the exact integer when it
//! fits) because the interesting regimes have far more codewords than can be
//! stored. Small codes are materialized; reliability of large codes is
//! estimated over the random-code ensemble without storing codewords.

mod codebook;
mod decode;
mod leakage;
mod qn;
mod reliability;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::capacity::mutual_information;
use crate::channel::Channel;
use crate::prob::Distribution;
use crate::{Error, Result};

pub use codebook::{encode, generate_codebook, Codebook, DEFAULT_CODEBOOK_BYTES};
pub use decode::{threshold_decode, DecodeOutcome, Decoder};
pub use leakage::{
    estimate_leakage_tails, exact_leakage, LeakageTails, DEFAULT_ENUMERATION_BUDGET,
};
pub use qn::estimate_qn;
pub(crate) use reliability::fits_in_memory;
pub use reliability::{
    run_reliability, run_reliability_ensemble, ReliabilityMethod, ReliabilityReport,
    DEFAULT_ATOM_BUDGET,
};
pub use sweep::{phase_sweep, SweepOptions, SweepRow};

pub const DEFAULT_GAMMA: f64 = 0.02;

/// A positive integer that may be too large to represent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Count {
    pub log2: f64,
    pub exact: Option<u64>,
}

/// Exponents below this are stored exactly.
const EXACT_LIMIT: f64 = 62.0;

impl Count {
    pub fn exact(v: u64) -> Self {
        assert!(v >= 1);
        Self {
            log2: (v as f64).log2(),
            exact: Some(v),
        }
    }

    /// `max(1, ⌊2^e⌋)`.
    pub fn floor_pow2(e: f64) -> Self {
        if e < EXACT_LIMIT {
            Self::exact(e.exp2().floor().max(1.0) as u64)
        } else {
            Self {
                log2: e,
                exact: None,
            }
        }
    }

    /// `max(1, ⌈2^e⌉)`.
    pub fn ceil_pow2(e: f64) -> Self {
        if e < EXACT_LIMIT {
            Self::exact(e.exp2().ceil().max(1.0) as u64)
        } else {
            Self {
                log2: e,
                exact: None,
            }
        }
    }

    /// `ln(self − 1)`, `None` when the count is one.
    pub(crate) fn ln_minus_one(&self) -> Option<f64> {
        match self.exact {
            Some(1) => None,
            Some(v) => Some(((v - 1) as f64).ln()),
            None => Some(self.log2 * std::f64::consts::LN_2),
        }
    }

    fn ln(&self) -> f64 {
        self.log2 * std::f64::consts::LN_2
    }
}

/// Parameters of the random subcodebook ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookSpec {
    pub n: usize,
    /// `M_n`.
    pub messages: Count,
    /// `K = M̃_n / M_n`.
    pub subcode: Count,
    pub gamma: f64,
    pub input_dist: Distribution,
    pub seed: u64,
}

impl CodebookSpec {
    pub fn new(
        n: usize,
        messages: Count,
        subcode: Count,
        gamma: f64,
        input_dist: Distribution,
        seed: u64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("blocklength must be positive".into()));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Precondition(format!("gamma {gamma} must be positive")));
        }
        Ok(Self {
            n,
            messages,
            subcode,
            gamma,
            input_dist,
            seed,
        })
    }

    /// `M_n = max(1, ⌊2^{nR}⌋)` and `K = ⌈2^{n·key_rate}⌉`.
    pub fn from_rates(
        n: usize,
        rate: f64,
        key_rate: f64,
        gamma: f64,
        input_dist: Distribution,
        seed: u64,
    ) -> Result<Self> {
        if !(rate >= 0.0 && key_rate >= 0.0) {
            return Err(Error::Precondition("rates must be non-negative".into()));
        }
        let nf = n as f64;
        Self::new(
            n,
            Count::floor_pow2(nf * rate),
            Count::ceil_pow2(nf * key_rate),
            gamma,
            input_dist,
            seed,
        )
    }

    /// Subcodebook size from the secrecy-from-resolvability rule
    /// `(1/n) log2 K ≥ I(X;Z) + 2γ`, with `I(X;Z)` under `input_dist`.
    pub fn for_secrecy(
        n: usize,
        rate: f64,
        gamma: f64,
        input_dist: Distribution,
        eavesdropper: &Channel,
        seed: u64,
    ) -> Result<Self> {
        let i_xz = mutual_information(&input_dist, eavesdropper)?;
        Self::from_rates(n, rate, i_xz + 2.0 * gamma, gamma, input_dist, seed)
    }

    /// `log2 M̃_n`.
    pub fn log2_total(&self) -> f64 {
        self.messages.log2 + self.subcode.log2
    }

    /// Decoding threshold on the unnormalized density, `log2 M̃_n + nγ`.
    pub fn decode_threshold_bits(&self) -> f64 {
        self.log2_total() + self.n as f64 * self.gamma
    }

    /// Resolvability threshold on the unnormalized eavesdropper density,
    /// `log2(M̃_n / M_n) − nγ`.
    pub fn qn_threshold_bits(&self) -> f64 {
        self.subcode.log2 - self.n as f64 * self.gamma
    }

    /// `Some((M, K))` when both counts are exact.
    pub fn exact_sizes(&self) -> Option<(u64, u64)> {
        Some((self.messages.exact?, self.subcode.exact?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(Count::floor_pow2(8.0 * 0.22).exact, Some(3));
        assert_eq!(Count::ceil_pow2(-1.0).exact, Some(1));
        assert_eq!(Count::floor_pow2(0.0).exact, Some(1));
        let big = Count::floor_pow2(110.0);
        assert_eq!(big.exact, None);
        assert_eq!(big.log2, 110.0);
        assert_eq!(Count::exact(1).ln_minus_one(), None);
        assert!((Count::exact(5).ln_minus_one().unwrap() - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn secrecy_sizing() {
        let spec = CodebookSpec::for_secrecy(
            500,
            0.22,
            0.02,
            Distribution::uniform(2),
            &Channel::bsc(0.2).unwrap(),
            1,
        )
        .unwrap();
        let key = 1.0 - crate::prob::binary_entropy(0.2) + 0.04;
        assert!((spec.subcode.log2 / 500.0 - key).abs() < 1e-9);
        assert_eq!(spec.messages.exact, None);
        assert!(spec.qn_threshold_bits() > 0.0);
        assert!(CodebookSpec::from_rates(0, 0.1, 0.1, 0.1, Distribution::uniform(2), 0).is_err());
        assert!(CodebookSpec::from_rates(5, 0.1, 0.1, 0.0, Distribution::uniform(2), 0).is_err());
    }
}
