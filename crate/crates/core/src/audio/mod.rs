//! Classical audio: sampled signals, quantization schemes and file formats.
//!
//! [`DigitalAudio`] is the floating-point endpoint of every round trip and
//! [`QuantizedAudio`] holds integer code words under a bit depth and a
//! [`NumberScheme`]. Code words convert to and from `q`-character bit strings
//! with the most significant bit on the left.

mod csv;
mod wav;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::csv::{read_csv, write_csv};
pub use self::wav::{decode_wav, encode_wav};

/// Largest supported bit depth for quantized words.
pub const MAX_DEPTH: u32 = 32;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("audio has no channels")]
    NoChannels,
    #[error("channel {channel} has {found} samples, expected {expected}")]
    ChannelLengthMismatch {
        channel: usize,
        expected: usize,
        found: usize,
    },
    #[error("sample rate must be positive")]
    ZeroSampleRate,
    #[error("sample {index} of channel {channel} is not finite")]
    NonFinite { channel: usize, index: usize },
    #[error("audio has no samples")]
    Empty,
    #[error("bit depth must be at least 1")]
    ZeroDepth,
    #[error("bit depth {0} exceeds the supported maximum of {MAX_DEPTH}")]
    DepthTooLarge(u32),
    #[error("fixed-point scheme with {integer_bits} integer bits does not fit in {depth} bits")]
    InvalidFixedPoint { integer_bits: u32, depth: u32 },
    #[error("word {word} is outside the {depth}-bit {scheme} range [{min}, {max}]")]
    WordOutOfRange {
        word: i64,
        depth: u32,
        scheme: NumberScheme,
        min: i64,
        max: i64,
    },
    #[error("bit string has {found} characters, expected {expected}")]
    BitLength { expected: usize, found: usize },
    #[error("invalid character {0:?} in bit string")]
    InvalidBit(char),
    #[error("cannot infer audio format from path {0:?}")]
    UnknownFormat(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A sampled signal with one or more channels of equal length.
///
/// Samples are nominally in `[-1, 1]`; values outside that range are kept
/// here and clamped only when quantizing.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitalAudio {
    channels: Vec<Vec<f64>>,
    sample_rate: u32,
}

impl DigitalAudio {
    pub fn new(channels: Vec<Vec<f64>>, sample_rate: u32) -> Result<Self, AudioError> {
        if channels.is_empty() {
            return Err(AudioError::NoChannels);
        }
        if sample_rate == 0 {
            return Err(AudioError::ZeroSampleRate);
        }
        let expected = channels[0].len();
        for (channel, samples) in channels.iter().enumerate() {
            if samples.len() != expected {
                return Err(AudioError::ChannelLengthMismatch {
                    channel,
                    expected,
                    found: samples.len(),
                });
            }
            if let Some(index) = samples.iter().position(|s| !s.is_finite()) {
                return Err(AudioError::NonFinite { channel, index });
            }
        }
        Ok(Self {
            channels,
            sample_rate,
        })
    }

    pub fn mono(samples: Vec<f64>, sample_rate: u32) -> Result<Self, AudioError> {
        Self::new(vec![samples], sample_rate)
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    /// Number of frames (samples per channel).
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.channels[index]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    /// Keeps the first `len` frames of every channel.
    pub fn truncated(&self, len: usize) -> Self {
        Self {
            channels: self
                .channels
                .iter()
                .map(|c| c[..len.min(c.len())].to_vec())
                .collect(),
            sample_rate: self.sample_rate,
        }
    }
}

/// Time in seconds of sample `index` at `sample_rate` Hz.
pub fn index_to_time(index: u64, sample_rate: u32) -> f64 {
    index as f64 / sample_rate as f64
}

/// Pads every channel with silence up to the next power-of-two length.
pub fn zero_pad_pow2(audio: &DigitalAudio) -> Result<DigitalAudio, AudioError> {
    if audio.is_empty() {
        return Err(AudioError::Empty);
    }
    let target = audio.len().next_power_of_two();
    let channels = audio
        .channels
        .iter()
        .map(|c| {
            let mut padded = c.clone();
            padded.resize(target, 0.0);
            padded
        })
        .collect();
    Ok(DigitalAudio {
        channels,
        sample_rate: audio.sample_rate,
    })
}

/// How a `q`-bit code word is read as a number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NumberScheme {
    Unsigned,
    TwosComplement,
    /// Two's complement word with an implied binary point: one sign bit,
    /// `integer_bits` integer bits and the rest fractional.
    FixedPoint {
        integer_bits: u32,
    },
}

impl fmt::Display for NumberScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumberScheme::Unsigned => f.write_str("unsigned"),
            NumberScheme::TwosComplement => f.write_str("twos_complement"),
            NumberScheme::FixedPoint { integer_bits } => write!(f, "fixed_point({integer_bits})"),
        }
    }
}

impl NumberScheme {
    pub fn validate(self, depth: u32) -> Result<(), AudioError> {
        if depth == 0 {
            return Err(AudioError::ZeroDepth);
        }
        if depth > MAX_DEPTH {
            return Err(AudioError::DepthTooLarge(depth));
        }
        if let NumberScheme::FixedPoint { integer_bits } = self {
            if integer_bits + 1 > depth {
                return Err(AudioError::InvalidFixedPoint {
                    integer_bits,
                    depth,
                });
            }
        }
        Ok(())
    }

    /// Inclusive range of code words for a `depth`-bit word.
    pub fn word_range(self, depth: u32) -> (i64, i64) {
        match self {
            NumberScheme::Unsigned => (0, (1i64 << depth) - 1),
            NumberScheme::TwosComplement | NumberScheme::FixedPoint { .. } => {
                (-(1i64 << (depth - 1)), (1i64 << (depth - 1)) - 1)
            }
        }
    }

    pub fn check_word(self, word: i64, depth: u32) -> Result<(), AudioError> {
        let (min, max) = self.word_range(depth);
        if word < min || word > max {
            return Err(AudioError::WordOutOfRange {
                word,
                depth,
                scheme: self,
                min,
                max,
            });
        }
        Ok(())
    }

    /// Number of fractional bits; zero for the integer schemes.
    pub fn fractional_bits(self, depth: u32) -> u32 {
        match self {
            NumberScheme::FixedPoint { integer_bits } => depth - integer_bits - 1,
            _ => 0,
        }
    }

    /// Numeric value a code word stands for. Fixed-point words are scaled by
    /// `2^-fractional_bits`; integer schemes return the word itself.
    pub fn word_value(self, word: i64, depth: u32) -> f64 {
        word as f64 / (1u64 << self.fractional_bits(depth)) as f64
    }

    /// Maps an amplitude in `[-1, 1]` onto the code-word grid.
    fn quantize_sample(self, a: f64, depth: u32) -> i64 {
        let (min, max) = self.word_range(depth);
        let word = match self {
            NumberScheme::TwosComplement => (a * max as f64).round(),
            NumberScheme::Unsigned => ((a + 1.0) / 2.0 * max as f64).round(),
            NumberScheme::FixedPoint { .. } => {
                (a * (1u64 << self.fractional_bits(depth)) as f64).round()
            }
        };
        (word as i64).clamp(min, max)
    }

    /// Inverse of [`quantize`] on the grid.
    fn dequantize_word(self, word: i64, depth: u32) -> f64 {
        match self {
            // a 1-bit signed word has no positive full scale; read it as an integer
            NumberScheme::TwosComplement => word as f64 / self.word_range(depth).1.max(1) as f64,
            NumberScheme::Unsigned => 2.0 * word as f64 / self.word_range(depth).1 as f64 - 1.0,
            NumberScheme::FixedPoint { .. } => self.word_value(word, depth),
        }
    }
}

/// Integer code words per channel under a bit depth and number scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedAudio {
    channels: Vec<Vec<i64>>,
    depth: u32,
    scheme: NumberScheme,
    sample_rate: u32,
    clipped: usize,
}

impl QuantizedAudio {
    pub fn new(
        channels: Vec<Vec<i64>>,
        depth: u32,
        scheme: NumberScheme,
        sample_rate: u32,
    ) -> Result<Self, AudioError> {
        scheme.validate(depth)?;
        if channels.is_empty() {
            return Err(AudioError::NoChannels);
        }
        if sample_rate == 0 {
            return Err(AudioError::ZeroSampleRate);
        }
        let expected = channels[0].len();
        for (channel, words) in channels.iter().enumerate() {
            if words.len() != expected {
                return Err(AudioError::ChannelLengthMismatch {
                    channel,
                    expected,
                    found: words.len(),
                });
            }
            for &w in words {
                scheme.check_word(w, depth)?;
            }
        }
        Ok(Self {
            channels,
            depth,
            scheme,
            sample_rate,
            clipped: 0,
        })
    }

    pub fn channels(&self) -> &[Vec<i64>] {
        &self.channels
    }

    pub fn channel(&self, index: usize) -> &[i64] {
        &self.channels[index]
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn scheme(&self) -> NumberScheme {
        self.scheme
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// How many input samples fell outside `[-1, 1]` and were clamped.
    pub fn clipped(&self) -> usize {
        self.clipped
    }

    pub fn dequantize(&self) -> DigitalAudio {
        let channels = self
            .channels
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&w| self.scheme.dequantize_word(w, self.depth))
                    .collect()
            })
            .collect();
        DigitalAudio {
            channels,
            sample_rate: self.sample_rate,
        }
    }
}

/// Quantizes every sample onto the `depth`-bit grid of `scheme`.
///
/// Two's complement uses the symmetric map `±1 -> ±(2^(q-1) - 1)` so that
/// negating a word never leaves the range. Ties round away from zero and
/// out-of-range amplitudes are clamped (see [`QuantizedAudio::clipped`]).
pub fn quantize(
    audio: &DigitalAudio,
    depth: u32,
    scheme: NumberScheme,
) -> Result<QuantizedAudio, AudioError> {
    scheme.validate(depth)?;
    let mut clipped = 0;
    let channels = audio
        .channels
        .iter()
        .map(|c| {
            c.iter()
                .map(|&a| {
                    if !(-1.0..=1.0).contains(&a) {
                        clipped += 1;
                    }
                    scheme.quantize_sample(a.clamp(-1.0, 1.0), depth)
                })
                .collect()
        })
        .collect();
    Ok(QuantizedAudio {
        channels,
        depth,
        scheme,
        sample_rate: audio.sample_rate,
        clipped,
    })
}

/// Renders a code word as a `depth`-character bit string, MSB first.
pub fn word_to_bits(word: i64, depth: u32, scheme: NumberScheme) -> Result<String, AudioError> {
    scheme.validate(depth)?;
    scheme.check_word(word, depth)?;
    let pattern = (word as u64) & low_mask(depth);
    Ok(format!("{:0width$b}", pattern, width = depth as usize))
}

/// Parses a `depth`-character bit string (MSB first) back into a code word.
pub fn bits_to_word(bits: &str, depth: u32, scheme: NumberScheme) -> Result<i64, AudioError> {
    scheme.validate(depth)?;
    let raw = parse_bits(bits, depth as usize)?;
    Ok(word_from_pattern(raw, depth, scheme))
}

/// Reads the low `depth` bits of `raw` as a code word under `scheme`.
pub(crate) fn word_from_pattern(raw: u64, depth: u32, scheme: NumberScheme) -> i64 {
    match scheme {
        NumberScheme::Unsigned => (raw & low_mask(depth)) as i64,
        NumberScheme::TwosComplement | NumberScheme::FixedPoint { .. } => sign_extend(raw, depth),
    }
}

/// Adds two equal-length bit strings, discarding the carry out of the MSB.
pub fn add_bits(lhs: &str, rhs: &str) -> Result<String, AudioError> {
    let width = lhs.chars().count();
    if width == 0 || width > 64 {
        return Err(AudioError::BitLength {
            expected: width.clamp(1, 64),
            found: width,
        });
    }
    let a = parse_bits(lhs, width)?;
    let b = parse_bits(rhs, width)?;
    let sum = a.wrapping_add(b) & low_mask(width as u32);
    Ok(format!("{:0width$b}", sum, width = width))
}

/// Reinterprets the low `depth` bits of `raw` as a two's complement integer.
pub(crate) fn sign_extend(raw: u64, depth: u32) -> i64 {
    let shift = 64 - depth;
    ((raw << shift) as i64) >> shift
}

pub(crate) fn low_mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

fn parse_bits(bits: &str, expected: usize) -> Result<u64, AudioError> {
    let found = bits.chars().count();
    if found != expected {
        return Err(AudioError::BitLength { expected, found });
    }
    bits.chars().try_fold(0u64, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        other => Err(AudioError::InvalidBit(other)),
    })
}

/// Supported audio file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AudioFormat {
    /// `sample_rate,<int>` header, one row per frame, one column per channel.
    Csv,
    /// RIFF/WAVE, 16-bit PCM, mono or stereo.
    Wav,
}

impl AudioFormat {
    pub fn from_path(path: &Path) -> Result<Self, AudioError> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("csv") => Ok(AudioFormat::Csv),
            Some("wav") | Some("wave") => Ok(AudioFormat::Wav),
            _ => Err(AudioError::UnknownFormat(path.display().to_string())),
        }
    }
}

pub fn load_audio(path: &Path, format: AudioFormat) -> Result<DigitalAudio, AudioError> {
    match format {
        AudioFormat::Csv => read_csv(&std::fs::read_to_string(path)?),
        AudioFormat::Wav => decode_wav(&std::fs::read(path)?),
    }
}

pub fn save_audio(
    audio: &DigitalAudio,
    path: &Path,
    format: AudioFormat,
) -> Result<(), AudioError> {
    match format {
        AudioFormat::Csv => std::fs::write(path, write_csv(audio))?,
        AudioFormat::Wav => std::fs::write(path, encode_wav(audio)?)?,
    }
    Ok(())
}
