//! Encoders from audio to preparation circuits and decoders from measurement
//! outcomes back to audio, one pair per representation.
//!
//! [`encode`] and [`decode`] dispatch on [`Scheme`]; the per-scheme modules
//! expose the individual map, prepare and decode steps.

mod qpam;
mod qsm;
mod sqpam;

use thiserror::Error;

pub use self::qpam::{qpam_decode, qpam_map, qpam_prepare, qpam_state, GSource, QpamEncoding};
pub use self::qsm::{
    mqsm_interleave, number_scheme_for, qsm_decode, qsm_prepare, QsmDecoded, QsmEncoding,
};
pub use self::sqpam::{
    msqpam_map, sqpam_angle, sqpam_decode, sqpam_map, sqpam_prepare, Quadrature, SqpamDecoded,
    SqpamEncoding,
};

use crate::audio::{quantize, zero_pad_pow2, AudioError, DigitalAudio, QuantizedAudio};
use crate::circuit::{Circuit, CircuitError, Scheme};
use crate::sim::{Outcomes, SimError};

/// Sample rate assumed when a circuit does not record one.
pub const DEFAULT_SAMPLE_RATE: u32 = 44_100;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("every sample is -1, so the normalization constant g is 0")]
    DegenerateSignal,
    #[error("sample {index} is {value}, outside [-1, 1]")]
    SampleOutOfRange { index: usize, value: f64 },
    #[error("{0} samples is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("signal has no samples")]
    EmptySignal,
    #[error("outcome table holds no weight")]
    ZeroShots,
    #[error("outcomes cover {found} qubits, expected {expected}")]
    OutcomeWidth { expected: usize, found: usize },
    #[error("channel {channel} has {found} samples, expected {expected}")]
    ChannelMismatch {
        channel: usize,
        expected: usize,
        found: usize,
    },
    #[error("{scheme} does not support {channels} channels")]
    UnsupportedChannels { scheme: Scheme, channels: usize },
    #[error("{0} stores coefficients, not code words")]
    NotStateBased(Scheme),
    #[error("circuit metadata lacks {0}")]
    MissingMetadata(&'static str),
    #[error("normalization constant g must be finite and positive, got {0}")]
    InvalidG(f64),
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Rejects samples outside `[-1, 1]` (NaN included).
pub(crate) fn check_samples(samples: &[f64]) -> Result<(), CodecError> {
    if samples.is_empty() {
        return Err(CodecError::EmptySignal);
    }
    match samples.iter().position(|a| !(-1.0..=1.0).contains(a)) {
        Some(index) => Err(CodecError::SampleOutOfRange {
            index,
            value: samples[index],
        }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodeOptions {
    pub scheme: Scheme,
    /// Word length `q` for the state-modulation schemes.
    pub depth: u32,
    /// Integer bits `m` for fpQSM.
    pub integer_bits: u32,
}

impl EncodeOptions {
    pub fn new(scheme: Scheme) -> Self {
        Self {
            scheme,
            depth: 8,
            integer_bits: 0,
        }
    }

    pub fn depth(mut self, depth: u32) -> Self {
        self.depth = depth;
        self
    }

    pub fn integer_bits(mut self, integer_bits: u32) -> Self {
        self.integer_bits = integer_bits;
        self
    }
}

/// Builds the preparation circuit of `audio` under `options.scheme`.
///
/// The signal is zero-padded to a power-of-two length first; the original
/// length, channel count and sample rate are kept in the circuit metadata so
/// [`decode`] can undo the padding.
pub fn encode(audio: &DigitalAudio, options: &EncodeOptions) -> Result<Circuit, CodecError> {
    let scheme = options.scheme;
    if !scheme.is_multichannel() && audio.num_channels() != 1 {
        return Err(CodecError::UnsupportedChannels {
            scheme,
            channels: audio.num_channels(),
        });
    }
    for channel in audio.channels() {
        check_samples(channel)?;
    }
    let padded = zero_pad_pow2(audio)?;

    let mut circuit = match scheme {
        Scheme::Qpam => qpam_prepare(&qpam_map(padded.channel(0))?)?,
        Scheme::Sqpam => sqpam_prepare(&sqpam_map(padded.channel(0))?)?,
        Scheme::Msqpam => sqpam_prepare(&msqpam_map(padded.channels())?)?,
        Scheme::Qsm | Scheme::Uqsm | Scheme::Fpqsm | Scheme::Mqsm => {
            let number =
                number_scheme_for(scheme, options.integer_bits).expect("state-based scheme");
            let words = quantize(&padded, options.depth, number)?;
            qsm_prepare(&QsmEncoding::from_quantized(scheme, &words)?)?
        }
    };
    let meta = circuit.metadata_mut();
    meta.sample_rate = Some(audio.sample_rate());
    meta.source_len = Some(audio.len());
    meta.source_channels = Some(audio.num_channels());
    Ok(circuit)
}

/// Decoder knobs that have no natural home in circuit metadata.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DecodeOptions {
    /// Overrides the `g` recorded by the QPAM encoder.
    pub g: Option<GSource>,
    pub quadrature: Quadrature,
}

/// A `(channel, time)` index that received no measurement weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Unobserved {
    pub channel: usize,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub audio: DigitalAudio,
    /// Indices decoded without data. Empty for QPAM, where a missing bin is
    /// itself the reading `-1`.
    pub unobserved: Vec<Unobserved>,
    /// Recovered code words for the state-modulation schemes.
    pub words: Option<QuantizedAudio>,
}

pub fn decode(circuit: &Circuit, outcomes: &dyn Outcomes) -> Result<Decoded, CodecError> {
    decode_with(circuit, outcomes, &DecodeOptions::default())
}

/// Reconstructs the audio that `circuit` prepared from measured `outcomes`,
/// trimmed back to the pre-padding shape.
pub fn decode_with(
    circuit: &Circuit,
    outcomes: &dyn Outcomes,
    options: &DecodeOptions,
) -> Result<Decoded, CodecError> {
    if outcomes.n_qubits() != circuit.n_qubits() {
        return Err(CodecError::OutcomeWidth {
            expected: circuit.n_qubits(),
            found: outcomes.n_qubits(),
        });
    }
    if outcomes.total() <= 0.0 {
        return Err(CodecError::ZeroShots);
    }
    let meta = circuit.metadata();
    let sample_rate = meta.sample_rate.unwrap_or(DEFAULT_SAMPLE_RATE);
    let layout = circuit.layout();

    let (channels, unobserved, words) = match circuit.scheme() {
        Scheme::Qpam => {
            let g = match options.g {
                Some(g) => g,
                None => GSource::Explicit(meta.g.ok_or(CodecError::MissingMetadata("g"))?),
            };
            (vec![qpam_decode(outcomes, g)?], Vec::new(), None)
        }
        Scheme::Sqpam | Scheme::Msqpam => {
            let decoded = sqpam_decode(outcomes, layout, options.quadrature)?;
            (decoded.channels, decoded.unobserved, None)
        }
        scheme @ (Scheme::Qsm | Scheme::Uqsm | Scheme::Fpqsm | Scheme::Mqsm) => {
            let depth = meta.depth.ok_or(CodecError::MissingMetadata("q"))?;
            let integer_bits = match scheme {
                Scheme::Fpqsm => meta.integer_bits.ok_or(CodecError::MissingMetadata("m"))?,
                _ => 0,
            };
            let number = number_scheme_for(scheme, integer_bits).expect("state-based scheme");
            let decoded = qsm_decode(outcomes, layout, depth, number)?;
            let quantized = QuantizedAudio::new(decoded.words, depth, number, sample_rate)?;
            let channels = quantized.dequantize().into_channels();
            (channels, decoded.unobserved, Some(quantized))
        }
    };

    let keep_channels = meta
        .source_channels
        .unwrap_or(channels.len())
        .min(channels.len());
    let keep_len = meta.source_len.unwrap_or(meta.n_samples);
    let trim = |rows: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        rows.into_iter()
            .take(keep_channels)
            .map(|mut row| {
                row.truncate(keep_len);
                row
            })
            .collect()
    };
    let audio = DigitalAudio::new(trim(channels), sample_rate)?;
    let words = match words {
        Some(q) => {
            let rows = q
                .channels()
                .iter()
                .take(keep_channels)
                .map(|row| row[..keep_len.min(row.len())].to_vec())
                .collect();
            Some(QuantizedAudio::new(
                rows,
                q.depth(),
                q.scheme(),
                sample_rate,
            )?)
        }
        None => None,
    };
    let unobserved = unobserved
        .into_iter()
        .filter(|&(channel, index)| channel < keep_channels && index < keep_len)
        .map(|(channel, index)| Unobserved { channel, index })
        .collect();
    Ok(Decoded {
        audio,
        unobserved,
        words,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::NumberScheme;
    use crate::sim::{exact_probabilities, sample, Histogram, Simulator};
    use std::collections::BTreeMap;

    fn exact_round_trip(audio: &DigitalAudio, options: &EncodeOptions) -> Decoded {
        let circuit = encode(audio, options).unwrap();
        let state = Simulator::default().run(&circuit).unwrap();
        decode(&circuit, &exact_probabilities(&state)).unwrap()
    }

    #[test]
    fn padding_is_undone() {
        let audio = DigitalAudio::mono(vec![0.5, -0.25, 0.75], 8000).unwrap();
        for scheme in [Scheme::Qpam, Scheme::Sqpam, Scheme::Msqpam] {
            let decoded = exact_round_trip(&audio, &EncodeOptions::new(scheme));
            assert_eq!(decoded.audio.len(), 3);
            assert_eq!(decoded.audio.sample_rate(), 8000);
            for (d, a) in decoded.audio.channel(0).iter().zip(audio.channel(0)) {
                assert!((d - a).abs() < 1e-9, "{scheme}");
            }
        }
    }

    #[test]
    fn qsm_family_is_exact_on_grid() {
        let audio = DigitalAudio::mono(
            vec![0.0, -1.0 / 3.0, 2.0 / 3.0, 1.0, -2.0 / 3.0, -1.0, 1.0 / 3.0],
            44_100,
        )
        .unwrap();
        let decoded = exact_round_trip(&audio, &EncodeOptions::new(Scheme::Qsm).depth(3));
        let words = decoded.words.unwrap();
        assert_eq!(words.channel(0), &[0, -1, 2, 3, -2, -3, 1]);
        assert_eq!(words.scheme(), NumberScheme::TwosComplement);
        for (d, a) in decoded.audio.channel(0).iter().zip(audio.channel(0)) {
            assert!((d - a).abs() < 1e-12);
        }

        let fp = exact_round_trip(
            &audio,
            &EncodeOptions::new(Scheme::Fpqsm).depth(6).integer_bits(1),
        );
        assert_eq!(
            fp.words.unwrap().scheme(),
            NumberScheme::FixedPoint { integer_bits: 1 }
        );
    }

    #[test]
    fn stereo_schemes_keep_channels() {
        let audio = DigitalAudio::new(
            vec![vec![1.0, 0.0], vec![-1.0, 0.5], vec![0.25, -0.25]],
            22_050,
        )
        .unwrap();
        let decoded = exact_round_trip(&audio, &EncodeOptions::new(Scheme::Msqpam));
        assert_eq!(decoded.audio.num_channels(), 3);
        let decoded = exact_round_trip(&audio, &EncodeOptions::new(Scheme::Mqsm).depth(4));
        assert_eq!(decoded.words.unwrap().channels().len(), 3);
    }

    #[test]
    fn single_channel_schemes_reject_stereo() {
        let audio = DigitalAudio::new(vec![vec![0.0; 2], vec![0.0; 2]], 44_100).unwrap();
        assert!(matches!(
            encode(&audio, &EncodeOptions::new(Scheme::Qsm)),
            Err(CodecError::UnsupportedChannels { channels: 2, .. })
        ));
    }

    #[test]
    fn out_of_range_samples_are_rejected() {
        let audio = DigitalAudio::mono(vec![0.0, 1.25], 44_100).unwrap();
        for scheme in Scheme::ALL {
            assert!(matches!(
                encode(&audio, &EncodeOptions::new(scheme)),
                Err(CodecError::SampleOutOfRange { index: 1, .. })
            ));
        }
    }

    #[test]
    fn metadata_records_source_shape() {
        let audio = DigitalAudio::mono(vec![0.1; 5], 16_000).unwrap();
        let circuit = encode(&audio, &EncodeOptions::new(Scheme::Uqsm).depth(4)).unwrap();
        let meta = circuit.metadata();
        assert_eq!(meta.n_samples, 8);
        assert_eq!(meta.depth, Some(4));
        assert_eq!(meta.source_len, Some(5));
        assert_eq!(meta.source_channels, Some(1));
        assert_eq!(meta.sample_rate, Some(16_000));
    }

    #[test]
    fn sampled_qsm_flags_nothing_with_enough_shots() {
        let audio = DigitalAudio::mono(vec![0.5, -0.5, 0.25, 0.0], 44_100).unwrap();
        let circuit = encode(&audio, &EncodeOptions::new(Scheme::Qsm).depth(4)).unwrap();
        let state = Simulator::default().run(&circuit).unwrap();
        let decoded = decode(&circuit, &sample(&state, 1024, 3).unwrap()).unwrap();
        assert!(decoded.unobserved.is_empty());
    }

    #[test]
    fn decode_checks_width_and_weight() {
        let audio = DigitalAudio::mono(vec![0.0; 4], 44_100).unwrap();
        let circuit = encode(&audio, &EncodeOptions::new(Scheme::Qpam)).unwrap();
        let narrow = Histogram::from_counts(1, BTreeMap::from([(0, 1)])).unwrap();
        assert!(matches!(
            decode(&circuit, &narrow),
            Err(CodecError::OutcomeWidth {
                expected: 2,
                found: 1
            })
        ));
        let empty = Histogram::from_counts(2, BTreeMap::new()).unwrap();
        assert!(matches!(
            decode(&circuit, &empty),
            Err(CodecError::ZeroShots)
        ));
    }

    #[test]
    fn g_override() {
        let audio = DigitalAudio::mono(vec![0.0; 4], 44_100).unwrap();
        let circuit = encode(&audio, &EncodeOptions::new(Scheme::Qpam)).unwrap();
        let state = Simulator::default().run(&circuit).unwrap();
        let options = DecodeOptions {
            g: Some(GSource::FromOutcomes),
            ..DecodeOptions::default()
        };
        let decoded = decode_with(&circuit, &exact_probabilities(&state), &options).unwrap();
        for &d in decoded.audio.channel(0) {
            assert!((d + 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_qpam_input() {
        let audio = DigitalAudio::mono(vec![-1.0; 4], 44_100).unwrap();
        assert!(matches!(
            encode(&audio, &EncodeOptions::new(Scheme::Qpam)),
            Err(CodecError::DegenerateSignal)
        ));
    }
}
