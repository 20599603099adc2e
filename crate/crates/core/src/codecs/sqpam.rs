//! Single-qubit amplitude modulation: sample `a_i` becomes the angle
//! `theta_i = asin(sqrt((a_i + 1) / 2))` of one amplitude qubit entangled
//! with time state `|i>`. The multichannel variant adds a channel register.

use super::{check_samples, CodecError};
use crate::circuit::{
    ceil_log2, hadamard_wall, value_setting_op_at, Circuit, Metadata, RegisterLayout, Scheme,
    ValueSetting,
};
use crate::sim::Outcomes;

#[derive(Debug, Clone, PartialEq)]
pub struct SqpamEncoding {
    /// One angle sequence per channel, each in `[0, pi/2]`.
    thetas: Vec<Vec<f64>>,
    multichannel: bool,
}

impl SqpamEncoding {
    pub fn thetas(&self) -> &[Vec<f64>] {
        &self.thetas
    }

    pub fn is_multichannel(&self) -> bool {
        self.multichannel
    }

    pub fn scheme(&self) -> Scheme {
        if self.multichannel {
            Scheme::Msqpam
        } else {
            Scheme::Sqpam
        }
    }
}

/// `asin(sqrt((a + 1) / 2))`, clamped so rounding never leaves `[0, pi/2]`.
pub fn sqpam_angle(a: f64) -> f64 {
    ((a + 1.0) / 2.0).clamp(0.0, 1.0).sqrt().asin()
}

pub fn sqpam_map(samples: &[f64]) -> Result<SqpamEncoding, CodecError> {
    check_samples(samples)?;
    Ok(SqpamEncoding {
        thetas: vec![samples.iter().map(|&a| sqpam_angle(a)).collect()],
        multichannel: false,
    })
}

/// Maps every channel and pads the channel count to a power of two with
/// silent channels (`theta = pi/4`).
pub fn msqpam_map(channels: &[Vec<f64>]) -> Result<SqpamEncoding, CodecError> {
    let len = channels.first().ok_or(CodecError::EmptySignal)?.len();
    let mut thetas = Vec::with_capacity(channels.len().next_power_of_two());
    for (index, samples) in channels.iter().enumerate() {
        if samples.len() != len {
            return Err(CodecError::ChannelMismatch {
                channel: index,
                expected: len,
                found: samples.len(),
            });
        }
        check_samples(samples)?;
        thetas.push(samples.iter().map(|&a| sqpam_angle(a)).collect());
    }
    thetas.resize(
        channels.len().next_power_of_two(),
        vec![sqpam_angle(0.0); len],
    );
    Ok(SqpamEncoding {
        thetas,
        multichannel: true,
    })
}

/// Hadamard wall, then one controlled `Ry(2 theta)` per (channel, time) index.
pub fn sqpam_prepare(encoding: &SqpamEncoding) -> Result<Circuit, CodecError> {
    let len = encoding.thetas.first().map_or(0, Vec::len);
    if len == 0 {
        return Err(CodecError::EmptySignal);
    }
    if !len.is_power_of_two() {
        return Err(CodecError::NotPowerOfTwo(len));
    }
    let n_channels = encoding.thetas.len();
    if !n_channels.is_power_of_two() || (!encoding.multichannel && n_channels != 1) {
        return Err(CodecError::UnsupportedChannels {
            scheme: encoding.scheme(),
            channels: n_channels,
        });
    }

    let channel_qubits = encoding.multichannel.then(|| ceil_log2(n_channels));
    let layout = RegisterLayout::new(ceil_log2(len), Some(1), channel_qubits);
    let mut ops = hadamard_wall(&layout);
    for (channel, thetas) in encoding.thetas.iter().enumerate() {
        let address = encoding.multichannel.then_some(channel);
        for (time, &theta) in thetas.iter().enumerate() {
            ops.extend(value_setting_op_at(
                &layout,
                time,
                address,
                ValueSetting::Ry(2.0 * theta),
            )?);
        }
    }
    let metadata = Metadata {
        n_samples: len,
        channels: encoding.multichannel.then_some(n_channels),
        ..Metadata::default()
    };
    Ok(Circuit::new(encoding.scheme(), layout, metadata, ops)?)
}

/// Which amplitude-qubit bin counts as the sine term of the ratio.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Quadrature {
    /// `a = 2 p(1) / (p(0) + p(1)) - 1`.
    #[default]
    Sine,
    /// Reads `p(0)` in place of `p(1)`, which inverts the polarity.
    Cosine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqpamDecoded {
    pub channels: Vec<Vec<f64>>,
    /// `(channel, time)` indices with no weight at all; decoded as 0.0.
    pub unobserved: Vec<(usize, usize)>,
}

/// Per-index ratio decode. Needs a layout with a one-qubit amplitude register.
pub fn sqpam_decode(
    outcomes: &dyn Outcomes,
    layout: &RegisterLayout,
    quadrature: Quadrature,
) -> Result<SqpamDecoded, CodecError> {
    if outcomes.n_qubits() != layout.n_qubits() {
        return Err(CodecError::OutcomeWidth {
            expected: layout.n_qubits(),
            found: outcomes.n_qubits(),
        });
    }
    let amplitude = layout
        .amplitude
        .ok_or(crate::circuit::CircuitError::NoAmplitudeRegister)?;
    let n_time = layout.time_states();
    let n_channels = layout.channel_states();

    // bins[channel][time] = [p(0), p(1)]
    let mut bins = vec![vec![[0.0f64; 2]; n_time]; n_channels];
    for (outcome, weight) in outcomes.entries() {
        let time = layout.time.extract(outcome) as usize;
        let channel = layout.channel.map_or(0, |c| c.extract(outcome) as usize);
        let bit = (amplitude.extract(outcome) & 1) as usize;
        bins[channel][time][bit] += weight;
    }

    let mut unobserved = Vec::new();
    let channels = bins
        .iter()
        .enumerate()
        .map(|(channel, row)| {
            row.iter()
                .enumerate()
                .map(|(time, &[p0, p1])| {
                    let total = p0 + p1;
                    if total <= 0.0 {
                        unobserved.push((channel, time));
                        return 0.0;
                    }
                    let sine = match quadrature {
                        Quadrature::Sine => p1,
                        Quadrature::Cosine => p0,
                    };
                    2.0 * sine / total - 1.0
                })
                .collect()
        })
        .collect();
    Ok(SqpamDecoded {
        channels,
        unobserved,
    })
}
