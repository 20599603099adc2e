//! State modulation: each sample is a `q`-bit code word written into an
//! amplitude register and entangled with its time state (and channel state
//! for the multichannel variant).

use std::collections::BTreeMap;

use super::CodecError;
use crate::audio::{word_from_pattern, NumberScheme, QuantizedAudio};
use crate::circuit::{
    ceil_log2, hadamard_wall, value_setting_op_at, Circuit, Metadata, RegisterLayout, Scheme,
    ValueSetting,
};
use crate::sim::Outcomes;

#[derive(Debug, Clone, PartialEq)]
pub struct QsmEncoding {
    scheme: Scheme,
    /// One word sequence per channel; single-channel schemes hold exactly one.
    words: Vec<Vec<i64>>,
    depth: u32,
    number: NumberScheme,
}

/// The number scheme each state-modulation variant reads its words with.
pub fn number_scheme_for(scheme: Scheme, integer_bits: u32) -> Option<NumberScheme> {
    match scheme {
        Scheme::Qsm | Scheme::Mqsm => Some(NumberScheme::TwosComplement),
        Scheme::Uqsm => Some(NumberScheme::Unsigned),
        Scheme::Fpqsm => Some(NumberScheme::FixedPoint { integer_bits }),
        Scheme::Qpam | Scheme::Sqpam | Scheme::Msqpam => None,
    }
}

impl QsmEncoding {
    /// Validates word ranges and power-of-two sizes. Multichannel input must
    /// already be padded, see [`mqsm_interleave`].
    pub fn new(
        scheme: Scheme,
        words: Vec<Vec<i64>>,
        depth: u32,
        number: NumberScheme,
    ) -> Result<Self, CodecError> {
        if !scheme.is_state_based() {
            return Err(CodecError::NotStateBased(scheme));
        }
        number.validate(depth)?;
        let len = words.first().ok_or(CodecError::EmptySignal)?.len();
        if len == 0 {
            return Err(CodecError::EmptySignal);
        }
        if !len.is_power_of_two() {
            return Err(CodecError::NotPowerOfTwo(len));
        }
        let allowed = if scheme.is_multichannel() {
            words.len().is_power_of_two()
        } else {
            words.len() == 1
        };
        if !allowed {
            return Err(CodecError::UnsupportedChannels {
                scheme,
                channels: words.len(),
            });
        }
        for (channel, row) in words.iter().enumerate() {
            if row.len() != len {
                return Err(CodecError::ChannelMismatch {
                    channel,
                    expected: len,
                    found: row.len(),
                });
            }
            for &w in row {
                number.check_word(w, depth)?;
            }
        }
        Ok(Self {
            scheme,
            words,
            depth,
            number,
        })
    }

    /// Words of a single-channel quantized signal.
    pub fn from_quantized(scheme: Scheme, audio: &QuantizedAudio) -> Result<Self, CodecError> {
        if scheme == Scheme::Mqsm {
            return mqsm_interleave(audio.channels(), audio.depth());
        }
        Self::new(
            scheme,
            audio.channels().to_vec(),
            audio.depth(),
            audio.scheme(),
        )
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn words(&self) -> &[Vec<i64>] {
        &self.words
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn number(&self) -> NumberScheme {
        self.number
    }
}

/// Two's complement words for several channels, padded to a power-of-two
/// channel count with silent (all-zero) channels.
pub fn mqsm_interleave(channels: &[Vec<i64>], depth: u32) -> Result<QsmEncoding, CodecError> {
    let len = channels.first().ok_or(CodecError::EmptySignal)?.len();
    let mut words = channels.to_vec();
    words.resize(channels.len().next_power_of_two(), vec![0; len]);
    QsmEncoding::new(Scheme::Mqsm, words, depth, NumberScheme::TwosComplement)
}

/// Hadamard wall, then one multi-controlled X per set bit of every word.
///
/// Ops are ordered by channel, then time index, then amplitude bit from the
/// least significant upward.
pub fn qsm_prepare(encoding: &QsmEncoding) -> Result<Circuit, CodecError> {
    let len = encoding.words[0].len();
    let n_channels = encoding.words.len();
    let multichannel = encoding.scheme.is_multichannel();
    let layout = RegisterLayout::new(
        ceil_log2(len),
        Some(encoding.depth as usize),
        multichannel.then(|| ceil_log2(n_channels)),
    );

    let mut ops = hadamard_wall(&layout);
    for (channel, row) in encoding.words.iter().enumerate() {
        let address = multichannel.then_some(channel);
        for (time, &word) in row.iter().enumerate() {
            let pattern = (word as u64) & crate::audio::low_mask(encoding.depth);
            for bit in 0..encoding.depth as usize {
                if (pattern >> bit) & 1 == 1 {
                    ops.extend(value_setting_op_at(
                        &layout,
                        time,
                        address,
                        ValueSetting::Flip(bit),
                    )?);
                }
            }
        }
    }

    let integer_bits = match encoding.number {
        NumberScheme::FixedPoint { integer_bits } => Some(integer_bits),
        _ => None,
    };
    let metadata = Metadata {
        n_samples: len,
        depth: Some(encoding.depth),
        channels: multichannel.then_some(n_channels),
        integer_bits,
        ..Metadata::default()
    };
    Ok(Circuit::new(encoding.scheme, layout, metadata, ops)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QsmDecoded {
    pub words: Vec<Vec<i64>>,
    /// `(channel, time)` indices never observed; decoded as word 0.
    pub unobserved: Vec<(usize, usize)>,
}

/// Majority-vote decode: for every (channel, time) index the amplitude
/// pattern with the largest weight wins, ties going to the smaller pattern.
pub fn qsm_decode(
    outcomes: &dyn Outcomes,
    layout: &RegisterLayout,
    depth: u32,
    number: NumberScheme,
) -> Result<QsmDecoded, CodecError> {
    number.validate(depth)?;
    if outcomes.n_qubits() != layout.n_qubits() {
        return Err(CodecError::OutcomeWidth {
            expected: layout.n_qubits(),
            found: outcomes.n_qubits(),
        });
    }
    let amplitude = layout
        .amplitude
        .ok_or(crate::circuit::CircuitError::NoAmplitudeRegister)?;
    if amplitude.len() != depth as usize {
        return Err(CodecError::OutcomeWidth {
            expected: depth as usize,
            found: amplitude.len(),
        });
    }
    let n_time = layout.time_states();
    let n_channels = layout.channel_states();

    let mut votes: Vec<Vec<BTreeMap<u64, f64>>> = vec![vec![BTreeMap::new(); n_time]; n_channels];
    for (outcome, weight) in outcomes.entries() {
        if weight <= 0.0 {
            continue;
        }
        let time = layout.time.extract(outcome) as usize;
        let channel = layout.channel.map_or(0, |c| c.extract(outcome) as usize);
        *votes[channel][time]
            .entry(amplitude.extract(outcome))
            .or_insert(0.0) += weight;
    }

    let mut unobserved = Vec::new();
    let words = votes
        .iter()
        .enumerate()
        .map(|(channel, row)| {
            row.iter()
                .enumerate()
                .map(|(time, tally)| {
                    let mut best: Option<(u64, f64)> = None;
                    for (&pattern, &weight) in tally {
                        if best.is_none_or(|(_, w)| weight > w) {
                            best = Some((pattern, weight));
                        }
                    }
                    match best {
                        Some((pattern, _)) => word_from_pattern(pattern, depth, number),
                        None => {
                            unobserved.push((channel, time));
                            0
                        }
                    }
                })
                .collect()
        })
        .collect();
    Ok(QsmDecoded { words, unobserved })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{exact_probabilities, sample, GateKind, Histogram, Simulator};

    const PAPER_WORDS: [i64; 8] = [0, -1, 2, 3, -2, -3, 1, 0];

    fn paper_encoding() -> QsmEncoding {
        QsmEncoding::new(
            Scheme::Qsm,
            vec![PAPER_WORDS.to_vec()],
            3,
            NumberScheme::TwosComplement,
        )
        .unwrap()
    }

    #[test]
    fn paper_words_give_eight_term_state() {
        let circuit = qsm_prepare(&paper_encoding()).unwrap();
        assert_eq!(circuit.n_qubits(), 6);
        let state = Simulator::default().run(&circuit).unwrap();
        let amp = 1.0 / 8f64.sqrt();
        let mut support = Vec::new();
        for (index, a) in state.amplitudes().iter().enumerate() {
            if a.norm() > 1e-12 {
                assert!((a.re - amp).abs() < 1e-12);
                support.push(index);
            }
        }
        let expected: Vec<usize> = PAPER_WORDS
            .iter()
            .enumerate()
            .map(|(t, &w)| (((w as u64) & 0b111) << 3) as usize | t)
            .collect();
        let mut sorted = expected.clone();
        sorted.sort();
        assert_eq!(support, sorted);
        // t = 1 holds word -1 = "111", t = 7 holds word 0
        assert!(support.contains(&0b111_001));
        assert!(support.contains(&0b000_111));
    }

    #[test]
    fn mcx_count_is_popcount() {
        let circuit = qsm_prepare(&paper_encoding()).unwrap();
        let popcount: u32 = PAPER_WORDS
            .iter()
            .map(|&w| ((w as u64) & 0b111).count_ones())
            .sum();
        let mcx = circuit
            .ops()
            .iter()
            .filter(|op| op.kind() == GateKind::X && op.controls().len() == 3)
            .count();
        assert_eq!(mcx as u32, popcount);
    }

    #[test]
    fn zero_words_need_only_hadamards() {
        let enc = QsmEncoding::new(
            Scheme::Qsm,
            vec![vec![0; 4]],
            3,
            NumberScheme::TwosComplement,
        )
        .unwrap();
        let circuit = qsm_prepare(&enc).unwrap();
        assert_eq!(circuit.ops().len(), 2);
        assert!(circuit.ops().iter().all(|op| op.kind() == GateKind::H));
    }

    #[test]
    fn exact_and_sampled_decode_are_bit_exact() {
        let circuit = qsm_prepare(&paper_encoding()).unwrap();
        let state = Simulator::default().run(&circuit).unwrap();
        let exact = qsm_decode(
            &exact_probabilities(&state),
            circuit.layout(),
            3,
            NumberScheme::TwosComplement,
        )
        .unwrap();
        assert_eq!(exact.words, vec![PAPER_WORDS.to_vec()]);
        assert!(exact.unobserved.is_empty());

        let hist = sample(&state, 4096, 7).unwrap();
        let sampled = qsm_decode(&hist, circuit.layout(), 3, NumberScheme::TwosComplement).unwrap();
        assert_eq!(sampled.words, vec![PAPER_WORDS.to_vec()]);
    }

    #[test]
    fn unsigned_reading() {
        let layout = RegisterLayout::new(0, Some(3), None);
        let hist = Histogram::from_counts(3, BTreeMap::from([(0b111, 1)])).unwrap();
        let decoded = qsm_decode(&hist, &layout, 3, NumberScheme::Unsigned).unwrap();
        assert_eq!(decoded.words, vec![vec![7]]);
        let decoded = qsm_decode(&hist, &layout, 3, NumberScheme::TwosComplement).unwrap();
        assert_eq!(decoded.words, vec![vec![-1]]);
    }

    #[test]
    fn majority_vote_and_ties() {
        let layout = RegisterLayout::new(1, Some(2), None);
        // time 0: pattern 01 x3, pattern 10 x1; time 1: 11 and 10 tie
        let counts = BTreeMap::from([(0b010, 3), (0b100, 1), (0b111, 2), (0b101, 2)]);
        let hist = Histogram::from_counts(3, counts).unwrap();
        let decoded = qsm_decode(&hist, &layout, 2, NumberScheme::Unsigned).unwrap();
        assert_eq!(decoded.words, vec![vec![1, 2]]);
    }

    #[test]
    fn unobserved_index_is_flagged() {
        let layout = RegisterLayout::new(1, Some(2), None);
        let hist = Histogram::from_counts(3, BTreeMap::from([(0b010, 3)])).unwrap();
        let decoded = qsm_decode(&hist, &layout, 2, NumberScheme::TwosComplement).unwrap();
        assert_eq!(decoded.words, vec![vec![1, 0]]);
        assert_eq!(decoded.unobserved, vec![(0, 1)]);
    }

    #[test]
    fn rejects_bad_encodings() {
        assert!(matches!(
            QsmEncoding::new(
                Scheme::Qsm,
                vec![vec![4, 0]],
                3,
                NumberScheme::TwosComplement
            ),
            Err(CodecError::Audio(_))
        ));
        assert!(matches!(
            QsmEncoding::new(
                Scheme::Qsm,
                vec![vec![0; 3]],
                3,
                NumberScheme::TwosComplement
            ),
            Err(CodecError::NotPowerOfTwo(3))
        ));
        assert!(matches!(
            QsmEncoding::new(
                Scheme::Qsm,
                vec![vec![0; 2], vec![0; 2]],
                3,
                NumberScheme::TwosComplement
            ),
            Err(CodecError::UnsupportedChannels { .. })
        ));
        assert!(matches!(
            QsmEncoding::new(
                Scheme::Qpam,
                vec![vec![0; 2]],
                3,
                NumberScheme::TwosComplement
            ),
            Err(CodecError::NotStateBased(Scheme::Qpam))
        ));
    }

    #[test]
    fn stereo_state() {
        let enc = mqsm_interleave(&[vec![1, -1, 0, 3], vec![-4, 2, 2, 0]], 3).unwrap();
        let circuit = qsm_prepare(&enc).unwrap();
        assert_eq!(circuit.n_qubits(), 2 + 3 + 1);
        let state = Simulator::default().run(&circuit).unwrap();
        let amp = 1.0 / 8f64.sqrt();
        let nonzero = state
            .amplitudes()
            .iter()
            .filter(|a| a.norm() > 1e-12)
            .count();
        assert_eq!(nonzero, 8);
        for (c, row) in enc.words().iter().enumerate() {
            for (t, &w) in row.iter().enumerate() {
                let index = (c << 5) | ((((w as u64) & 0b111) as usize) << 2) | t;
                assert!((state.amplitude(index).re - amp).abs() < 1e-12);
            }
        }
        let decoded = qsm_decode(
            &exact_probabilities(&state),
            circuit.layout(),
            3,
            NumberScheme::TwosComplement,
        )
        .unwrap();
        assert_eq!(decoded.words, enc.words());
    }

    #[test]
    fn mono_mqsm_matches_qsm() {
        let mono = qsm_prepare(&mqsm_interleave(&[PAPER_WORDS.to_vec()], 3).unwrap()).unwrap();
        let plain = qsm_prepare(&paper_encoding()).unwrap();
        assert_eq!(mono.ops(), plain.ops());
        assert_eq!(mono.n_qubits(), plain.n_qubits());
    }

    #[test]
    fn three_channels_pad_to_four() {
        let enc = mqsm_interleave(&[vec![1, 2], vec![3, -1], vec![0, -2]], 3).unwrap();
        assert_eq!(enc.words().len(), 4);
        assert_eq!(enc.words()[3], vec![0, 0]);
    }
}
