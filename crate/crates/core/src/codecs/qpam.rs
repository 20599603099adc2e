//! Probability-amplitude modulation: sample `a_i` becomes the amplitude
//! `alpha_i = sqrt(((a_i + 1) / 2) / g)` of time state `|i>`, with
//! `g = sum_k (a_k + 1) / 2`.
//!
//! Preparation uses a binary tree of multiplexed Ry rotations. The most
//! significant time qubit is split first; each lower qubit gets one rotation
//! per already-prepared prefix, controlled on that prefix. Since every
//! `alpha_i` is a nonnegative real, no phase correction stage is needed and
//! the tree has exactly `N - 1` rotations.

use num_complex::Complex64;

use super::{check_samples, CodecError};
use crate::circuit::{ceil_log2, Circuit, Metadata, RegisterLayout, Scheme};
use crate::sim::{Control, GateKind, GateOp, Outcomes, StateVector};

#[derive(Debug, Clone, PartialEq)]
pub struct QpamEncoding {
    alphas: Vec<f64>,
    g: f64,
}

impl QpamEncoding {
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Normalization constant needed again at decode time.
    pub fn g(&self) -> f64 {
        self.g
    }
}

/// Maps samples in `[-1, 1]` to probability amplitudes.
pub fn qpam_map(samples: &[f64]) -> Result<QpamEncoding, CodecError> {
    check_samples(samples)?;
    let shifted: Vec<f64> = samples.iter().map(|a| (a + 1.0) / 2.0).collect();
    let g: f64 = shifted.iter().sum();
    if g <= 0.0 {
        return Err(CodecError::DegenerateSignal);
    }
    let alphas = shifted.iter().map(|s| (s / g).sqrt()).collect();
    Ok(QpamEncoding { alphas, g })
}

/// Builds the rotation-tree preparation circuit for `encoding`.
pub fn qpam_prepare(encoding: &QpamEncoding) -> Result<Circuit, CodecError> {
    let len = encoding.alphas.len();
    if !len.is_power_of_two() {
        return Err(CodecError::NotPowerOfTwo(len));
    }
    let n = ceil_log2(len);
    let masses: Vec<f64> = encoding.alphas.iter().map(|a| a * a).collect();

    let mut ops = Vec::with_capacity(len.saturating_sub(1));
    for level in 0..n {
        let target = n - 1 - level;
        let block = 1usize << (target + 1);
        let half = block / 2;
        for prefix in 0..(1usize << level) {
            let start = prefix * block;
            let low: f64 = masses[start..start + half].iter().sum();
            let high: f64 = masses[start + half..start + block].iter().sum();
            let angle = 2.0 * high.sqrt().atan2(low.sqrt());
            let controls = (target + 1..n)
                .map(|qubit| {
                    if (prefix >> (qubit - target - 1)) & 1 == 1 {
                        Control::positive(qubit)
                    } else {
                        Control::negative(qubit)
                    }
                })
                .collect();
            ops.push(GateOp::new(GateKind::Ry(angle), target, controls)?);
        }
    }

    let metadata = Metadata {
        n_samples: len,
        g: Some(encoding.g),
        ..Metadata::default()
    };
    Ok(Circuit::new(
        Scheme::Qpam,
        RegisterLayout::new(n, None, None),
        metadata,
        ops,
    )?)
}

/// Writes the amplitudes straight into a statevector, skipping the circuit.
pub fn qpam_state(encoding: &QpamEncoding) -> Result<StateVector, CodecError> {
    let amplitudes = encoding
        .alphas
        .iter()
        .map(|&a| Complex64::new(a, 0.0))
        .collect();
    Ok(StateVector::from_amplitudes(amplitudes)?)
}

/// Where the decoder takes `g` from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GSource {
    /// The encoder's constant, carried in circuit metadata.
    Explicit(f64),
    /// `g = sum_k p_k` over the measured frequencies. For a normalized
    /// histogram this is always 1, which recovers `2 p_i - 1`.
    FromOutcomes,
}

/// Reconstructs `a_i = 2 g p_i - 1` from measured frequencies `p_i`.
///
/// Time states that were never observed decode as `-1`.
pub fn qpam_decode(outcomes: &dyn Outcomes, g: GSource) -> Result<Vec<f64>, CodecError> {
    let total = outcomes.total();
    if total <= 0.0 {
        return Err(CodecError::ZeroShots);
    }
    let len = 1usize << outcomes.n_qubits();
    let mut freqs = vec![0.0; len];
    for (outcome, weight) in outcomes.entries() {
        freqs[outcome as usize] = weight / total;
    }
    let g = match g {
        GSource::Explicit(g) if g.is_finite() && g > 0.0 => g,
        GSource::Explicit(g) => return Err(CodecError::InvalidG(g)),
        GSource::FromOutcomes => freqs.iter().sum(),
    };
    Ok(freqs.iter().map(|p| 2.0 * g * p - 1.0).collect())
}
