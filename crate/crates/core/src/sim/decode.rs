use serde::{Deserialize, Serialize};

use super::{Codebook, CodebookSpec};
use crate::channel::Channel;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeOutcome {
    Message(u64),
    /// No message, or more than one, owns a codeword clearing the threshold.
    Failure { clearing_messages: u64 },
}

/// Threshold decoder state: per-letter densities `log2 W(y|x)/P_Y(y)` with
/// `P_Y` the output of the i.i.d. input law, and the threshold
/// `log2 M̃_n + nγ`.
#[derive(Debug, Clone)]
pub struct Decoder {
    pub(crate) dens: Vec<f64>,
    pub(crate) outputs: usize,
    pub(crate) threshold: f64,
    n: usize,
}

impl Decoder {
    pub fn new(spec: &CodebookSpec, main: &Channel) -> Result<Self> {
        main.check_input(&spec.input_dist)?;
        let py = main.output_probs(spec.input_dist.probs());
        let ny = main.outputs();
        let mut dens = vec![f64::NEG_INFINITY; main.inputs() * ny];
        for x in 0..main.inputs() {
            for y in 0..ny {
                let w = main.prob(x, y);
                if w > 0.0 {
                    dens[x * ny + y] = (w / py[y]).log2();
                }
            }
        }
        Ok(Self {
            dens,
            outputs: ny,
            threshold: spec.decode_threshold_bits(),
            n: spec.n,
        })
    }

    /// Unnormalized density `log2 P(y|x)/P(y)` of one codeword.
    #[inline]
    pub fn score(&self, x: &[u16], y: &[usize]) -> f64 {
        x.iter()
            .zip(y)
            .map(|(&a, &b)| self.dens[a as usize * self.outputs + b])
            .sum()
    }

    #[inline]
    pub fn clears(&self, score: f64) -> bool {
        score >= self.threshold
    }

    pub fn threshold_bits(&self) -> f64 {
        self.threshold
    }
}

/// Returns `m̂` iff exactly one message owns a codeword whose density clears
/// the threshold.
pub fn threshold_decode(cb: &Codebook, dec: &Decoder, y: &[usize]) -> Result<DecodeOutcome> {
    if y.len() != dec.n || cb.n() != dec.n {
        return Err(Error::DimensionMismatch(format!(
            "output length {} / codebook length {} / decoder length {}",
            y.len(),
            cb.n(),
            dec.n
        )));
    }
    if let Some(&bad) = y.iter().find(|&&s| s >= dec.outputs) {
        return Err(Error::DimensionMismatch(format!("output symbol {bad} out of range")));
    }
    let mut found: Option<u64> = None;
    let mut clearing = 0;
    for m in 0..cb.messages() {
        if cb.subcodebook(m).any(|l| dec.clears(dec.score(cb.codeword(l), y))) {
            clearing += 1;
            if found.is_some() {
                return Ok(DecodeOutcome::Failure {
                    clearing_messages: clearing,
                });
            }
            found = Some(m);
        }
    }
    Ok(match found {
        Some(m) => DecodeOutcome::Message(m),
        None => DecodeOutcome::Failure {
            clearing_messages: 0,
        },
    })
}
