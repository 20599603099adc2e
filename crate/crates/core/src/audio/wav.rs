//! 16-bit PCM RIFF/WAVE reading and writing.

use super::{AudioError, DigitalAudio};

const RIFF: &[u8; 4] = b"RIFF";
const WAVE: &[u8; 4] = b"WAVE";
const FMT: &[u8; 4] = b"fmt ";
const DATA: &[u8; 4] = b"data";
const PCM: u16 = 1;
const FULL_SCALE: f64 = 32768.0;

struct Format {
    channels: u16,
    sample_rate: u32,
    block_align: u16,
}

fn u16_at(bytes: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([bytes[at], bytes[at + 1]])
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

fn parse_format(body: &[u8]) -> Result<Format, AudioError> {
    if body.len() < 16 {
        return Err(AudioError::MalformedHeader(format!(
            "fmt chunk is {} bytes, need 16",
            body.len()
        )));
    }
    let code = u16_at(body, 0);
    if code != PCM {
        return Err(AudioError::UnsupportedEncoding(format!(
            "format code {code:#06x}, only PCM (1) is supported"
        )));
    }
    let channels = u16_at(body, 2);
    if !(1..=2).contains(&channels) {
        return Err(AudioError::UnsupportedEncoding(format!(
            "{channels} channels, only mono and stereo are supported"
        )));
    }
    let sample_rate = u32_at(body, 4);
    let block_align = u16_at(body, 12);
    let bits = u16_at(body, 14);
    if bits != 16 {
        return Err(AudioError::UnsupportedEncoding(format!(
            "{bits}-bit samples, only 16-bit PCM is supported"
        )));
    }
    if block_align != channels * 2 {
        return Err(AudioError::MalformedHeader(format!(
            "block align {block_align} does not match {channels} channels of 16-bit samples"
        )));
    }
    Ok(Format {
        channels,
        sample_rate,
        block_align,
    })
}

/// Decodes a 16-bit PCM WAV file; samples are divided by 2^15.
pub fn decode_wav(bytes: &[u8]) -> Result<DigitalAudio, AudioError> {
    if bytes.len() < 12 {
        return Err(AudioError::Truncated {
            expected: 12,
            found: bytes.len(),
        });
    }
    if &bytes[0..4] != RIFF || &bytes[8..12] != WAVE {
        return Err(AudioError::MalformedHeader(
            "missing RIFF/WAVE magic".into(),
        ));
    }

    let mut format = None;
    let mut at = 12;
    while at + 8 <= bytes.len() {
        let id = &bytes[at..at + 4];
        let size = u32_at(bytes, at + 4) as usize;
        let body_start = at + 8;
        let available = bytes.len() - body_start;

        if id == FMT {
            if size > available {
                return Err(AudioError::Truncated {
                    expected: size,
                    found: available,
                });
            }
            format = Some(parse_format(&bytes[body_start..body_start + size])?);
        } else if id == DATA {
            let format = format
                .ok_or_else(|| AudioError::MalformedHeader("data chunk before fmt chunk".into()))?;
            if size > available {
                return Err(AudioError::Truncated {
                    expected: size,
                    found: available,
                });
            }
            let align = format.block_align as usize;
            if !size.is_multiple_of(align) {
                return Err(AudioError::Truncated {
                    expected: size.next_multiple_of(align),
                    found: size,
                });
            }
            let data = &bytes[body_start..body_start + size];
            let n = format.channels as usize;
            let mut channels = vec![Vec::with_capacity(size / align); n];
            for (i, pair) in data.chunks_exact(2).enumerate() {
                let sample = i16::from_le_bytes([pair[0], pair[1]]);
                channels[i % n].push(sample as f64 / FULL_SCALE);
            }
            return DigitalAudio::new(channels, format.sample_rate);
        }
        // chunk bodies are word aligned
        at = body_start + size + (size & 1);
    }
    Err(AudioError::MalformedHeader(if format.is_some() {
        "no data chunk".into()
    } else {
        "no fmt chunk".into()
    }))
}

/// Encodes mono or stereo audio as 16-bit PCM, clamping to the i16 range.
pub fn encode_wav(audio: &DigitalAudio) -> Result<Vec<u8>, AudioError> {
    let channels = audio.num_channels();
    if channels > 2 {
        return Err(AudioError::UnsupportedEncoding(format!(
            "{channels} channels, only mono and stereo are supported"
        )));
    }
    let block_align = 2 * channels as u16;
    let data_len = audio.len() * block_align as usize;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(RIFF);
    out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    out.extend_from_slice(WAVE);
    out.extend_from_slice(FMT);
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&PCM.to_le_bytes());
    out.extend_from_slice(&(channels as u16).to_le_bytes());
    out.extend_from_slice(&audio.sample_rate().to_le_bytes());
    out.extend_from_slice(&(audio.sample_rate() * block_align as u32).to_le_bytes());
    out.extend_from_slice(&block_align.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(DATA);
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for frame in 0..audio.len() {
        for channel in audio.channels() {
            let sample = (channel[frame] * FULL_SCALE)
                .round()
                .clamp(i16::MIN as f64, i16::MAX as f64) as i16;
            out.extend_from_slice(&sample.to_le_bytes());
        }
    }
    Ok(out)
}
