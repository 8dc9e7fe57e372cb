use rand::Rng;
use serde::Serialize;

use super::CodebookSpec;
use crate::rng::{domain, MonteCarlo};
use crate::{Error, Result};

pub const DEFAULT_CODEBOOK_BYTES: u64 = 1 << 28;

/// `M̃_n` codewords stored contiguously; codeword `l` belongs to message
/// `l / K` (messages and indices are 0-based).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Codebook {
    n: usize,
    messages: u64,
    subcode: u64,
    symbols: Vec<u16>,
}

impl Codebook {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn messages(&self) -> u64 {
        self.messages
    }

    pub fn subcode_size(&self) -> u64 {
        self.subcode
    }

    pub fn total(&self) -> u64 {
        self.messages * self.subcode
    }

    pub fn codeword(&self, l: u64) -> &[u16] {
        let s = l as usize * self.n;
        &self.symbols[s..s + self.n]
    }

    pub fn codewords(&self) -> impl Iterator<Item = &[u16]> {
        self.symbols.chunks(self.n)
    }

    pub fn message_of(&self, l: u64) -> u64 {
        l / self.subcode
    }

    /// Indices of the subcodebook `C(m)`.
    pub fn subcodebook(&self, m: u64) -> std::ops::Range<u64> {
        m * self.subcode..(m + 1) * self.subcode
    }

    /// Builds a codebook from explicit codewords, grouped by message.
    pub fn from_codewords(n: usize, messages: u64, words: &[Vec<u16>]) -> Result<Self> {
        if messages == 0 || words.is_empty() || !(words.len() as u64).is_multiple_of(messages) {
            return Err(Error::Precondition(format!(
                "{} codewords cannot be split evenly among {messages} messages",
                words.len()
            )));
        }
        if words.iter().any(|w| w.len() != n) {
            return Err(Error::DimensionMismatch(format!("codewords must have length {n}")));
        }
        Ok(Self {
            n,
            messages,
            subcode: words.len() as u64 / messages,
            symbols: words.concat(),
        })
    }
}

/// Draws `M̃_n` codewords i.i.d. from `input_dist^n`; codeword `l` uses its
/// own stream so the result depends only on the seed.
pub fn generate_codebook(spec: &CodebookSpec, byte_budget: u64) -> Result<Codebook> {
    if spec.input_dist.alphabet_size() > u16::MAX as usize + 1 {
        return Err(Error::Precondition("input alphabet too large for a stored codebook".into()));
    }
    let required = spec.log2_total().exp2() * spec.n as f64 * 2.0;
    let (m, k) = match spec.exact_sizes() {
        Some(s) if required <= byte_budget as f64 => s,
        _ => {
            return Err(Error::BudgetExceeded {
                what: "codebook bytes",
                required,
                budget: byte_budget as f64,
            })
        }
    };
    let sampler = spec.input_dist.sampler();
    let n = spec.n;
    let words = MonteCarlo::new(spec.seed).run(domain::CODEBOOK, (m * k) as usize, |rng, _| {
        (0..n).map(|_| sampler.sample(rng) as u16).collect::<Vec<u16>>()
    });
    Ok(Codebook {
        n,
        messages: m,
        subcode: k,
        symbols: words.concat(),
    })
}

/// Picks `L` uniformly from `C(m)`; with `K = 1` no randomness is drawn.
pub fn encode<'a, R: Rng + ?Sized>(cb: &'a Codebook, m: u64, rng: &mut R) -> Result<(&'a [u16], u64)> {
    if m >= cb.messages {
        return Err(Error::Precondition(format!(
            "message {m} outside [0, {})",
            cb.messages
        )));
    }
    let l = if cb.subcode == 1 {
        m
    } else {
        m * cb.subcode + rng.gen_range(0..cb.subcode)
    };
    Ok((cb.codeword(l), l))
}
