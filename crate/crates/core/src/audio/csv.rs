//! Plain-text audio: a `sample_rate,<int>` header followed by one row per
//! frame and one column per channel.
//!
//! Samples are written with Rust's shortest round-trip float formatting, so
//! reading back a written file reproduces every sample bit for bit.

use std::fmt::Write;

use super::{AudioError, DigitalAudio};

pub fn read_csv(text: &str) -> Result<DigitalAudio, AudioError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| AudioError::MalformedHeader("empty file".into()))?;
    let sample_rate = parse_header(header)?;

    let mut channels: Vec<Vec<f64>> = Vec::new();
    for (index, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let values = line
            .split(',')
            .map(|field| {
                field.trim().parse::<f64>().map_err(|e| AudioError::Parse {
                    line: index + 1,
                    message: format!("{field:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if channels.is_empty() {
            channels = vec![Vec::new(); values.len()];
        } else if values.len() != channels.len() {
            return Err(AudioError::Parse {
                line: index + 1,
                message: format!(
                    "expected {} columns, found {}",
                    channels.len(),
                    values.len()
                ),
            });
        }
        for (channel, value) in channels.iter_mut().zip(values) {
            channel.push(value);
        }
    }
    if channels.is_empty() {
        channels.push(Vec::new());
    }
    DigitalAudio::new(channels, sample_rate)
}

fn parse_header(line: &str) -> Result<u32, AudioError> {
    let mut fields = line.trim().split(',');
    match (fields.next(), fields.next(), fields.next()) {
        (Some(key), Some(value), None) if key.trim() == "sample_rate" => value
            .trim()
            .parse::<u32>()
            .map_err(|e| AudioError::MalformedHeader(format!("sample rate {value:?}: {e}"))),
        _ => Err(AudioError::MalformedHeader(format!(
            "expected `sample_rate,<int>`, found {line:?}"
        ))),
    }
}

pub fn write_csv(audio: &DigitalAudio) -> String {
    let mut out = format!("sample_rate,{}\n", audio.sample_rate());
    for frame in 0..audio.len() {
        for (c, channel) in audio.channels().iter().enumerate() {
            if c > 0 {
                out.push(',');
            }
            write!(out, "{}", channel[frame]).unwrap();
        }
        out.push('\n');
    }
    out
}
