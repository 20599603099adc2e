//! Register-aware circuits produced by the encoders.
//!
//! Qubits are laid out bottom-up: the time register starts at qubit 0, the
//! amplitude register (if any) sits directly above it and the channel register
//! (if any) above that. Outcome strings therefore read `channel|amplitude|time`
//! from left to right.
//!
//! Every value-setting operation is a single multi-controlled gate. The X gates
//! that would select a time index whose bit is `0` are folded into negative
//! control polarities; [`lower_negative_controls`] expands them again.

mod qasm;
mod resources;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::{Control, GateKind, GateOp, SimError};

pub use self::qasm::{export_qasm, parse_qasm, ParsedQasm};
pub use self::resources::{resource_report, GateCounts, ResourceReport};

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("unknown scheme {0:?}; expected one of qpam, sqpam, qsm, uqsm, fpqsm, mqsm, msqpam")]
    UnknownScheme(String),
    #[error("time index {index} out of range for {len} samples")]
    TimeIndexOutOfRange { index: usize, len: usize },
    #[error("channel index {index} out of range for {len} channels")]
    ChannelIndexOutOfRange { index: usize, len: usize },
    #[error("layout has no amplitude register")]
    NoAmplitudeRegister,
    #[error("amplitude qubit {index} out of range for a {width}-qubit register")]
    AmplitudeQubitOutOfRange { index: usize, width: usize },
    #[error("layout has no channel register")]
    NoChannelRegister,
    #[error("operation touches qubit {qubit} but the layout has {n_qubits} qubits")]
    QubitOutsideLayout { qubit: usize, n_qubits: usize },
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("qasm line {line}: {message}")]
    Qasm { line: usize, message: String },
    #[error(transparent)]
    Gate(#[from] SimError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// The seven audio representations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Qpam,
    Sqpam,
    Qsm,
    Uqsm,
    Fpqsm,
    Mqsm,
    Msqpam,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::Qpam,
        Scheme::Sqpam,
        Scheme::Qsm,
        Scheme::Uqsm,
        Scheme::Fpqsm,
        Scheme::Mqsm,
        Scheme::Msqpam,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Qpam => "qpam",
            Scheme::Sqpam => "sqpam",
            Scheme::Qsm => "qsm",
            Scheme::Uqsm => "uqsm",
            Scheme::Fpqsm => "fpqsm",
            Scheme::Mqsm => "mqsm",
            Scheme::Msqpam => "msqpam",
        }
    }

    /// Display label as used in comparison tables.
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Qpam => "QPAM",
            Scheme::Sqpam => "SQPAM",
            Scheme::Qsm => "QSM",
            Scheme::Uqsm => "uQSM",
            Scheme::Fpqsm => "fpQSM",
            Scheme::Mqsm => "MQSM",
            Scheme::Msqpam => "MSQPAM",
        }
    }

    /// Whether amplitudes live in a multi-qubit binary word.
    pub fn is_state_based(self) -> bool {
        matches!(
            self,
            Scheme::Qsm | Scheme::Uqsm | Scheme::Fpqsm | Scheme::Mqsm
        )
    }

    pub fn is_multichannel(self) -> bool {
        matches!(self, Scheme::Mqsm | Scheme::Msqpam)
    }

    pub fn retrieval(self) -> Retrieval {
        if self.is_state_based() {
            Retrieval::Deterministic
        } else {
            Retrieval::Probabilistic
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Scheme::ALL
            .into_iter()
            .find(|scheme| scheme.name() == lower)
            .ok_or_else(|| CircuitError::UnknownScheme(s.to_owned()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Retrieval {
    Probabilistic,
    Deterministic,
}

impl fmt::Display for Retrieval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Retrieval::Probabilistic => "Probabilistic",
            Retrieval::Deterministic => "Deterministic",
        })
    }
}

/// Half-open range of qubit indices, serialized as `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct QubitRange {
    pub start: usize,
    pub end: usize,
}

impl From<[usize; 2]> for QubitRange {
    fn from([start, end]: [usize; 2]) -> Self {
        Self { start, end }
    }
}

impl From<QubitRange> for [usize; 2] {
    fn from(r: QubitRange) -> Self {
        [r.start, r.end]
    }
}

impl QubitRange {
    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn qubits(&self) -> std::ops::Range<usize> {
        self.start..self.end
    }

    /// The bits of `outcome` covered by this range, shifted down to bit 0.
    pub fn extract(&self, outcome: u64) -> u64 {
        (outcome >> self.start) & crate::audio::low_mask(self.len() as u32)
    }
}

/// Named qubit registers of a circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    pub time: QubitRange,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub amplitude: Option<QubitRange>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub channel: Option<QubitRange>,
}

impl RegisterLayout {
    /// Stacks time, amplitude and channel registers from qubit 0 upward.
    pub fn new(
        time_qubits: usize,
        amplitude_qubits: Option<usize>,
        channel_qubits: Option<usize>,
    ) -> Self {
        let time = QubitRange {
            start: 0,
            end: time_qubits,
        };
        let mut next = time.end;
        let amplitude = amplitude_qubits.map(|width| {
            let r = QubitRange {
                start: next,
                end: next + width,
            };
            next = r.end;
            r
        });
        let channel = channel_qubits.map(|width| QubitRange {
            start: next,
            end: next + width,
        });
        Self {
            time,
            amplitude,
            channel,
        }
    }

    /// Layout for `scheme` with `n_samples` time states, `depth`-bit words and
    /// `channels` channels (rounded up to powers of two).
    pub fn for_scheme(scheme: Scheme, n_samples: usize, depth: u32, channels: usize) -> Self {
        let n = ceil_log2(n_samples);
        let c = ceil_log2(channels);
        match scheme {
            Scheme::Qpam => Self::new(n, None, None),
            Scheme::Sqpam => Self::new(n, Some(1), None),
            Scheme::Qsm | Scheme::Uqsm | Scheme::Fpqsm => Self::new(n, Some(depth as usize), None),
            Scheme::Mqsm => Self::new(n, Some(depth as usize), Some(c)),
            Scheme::Msqpam => Self::new(n, Some(1), Some(c)),
        }
    }

    pub fn n_qubits(&self) -> usize {
        [Some(self.time), self.amplitude, self.channel]
            .into_iter()
            .flatten()
            .map(|r| r.end)
            .max()
            .unwrap_or(0)
    }

    /// Number of addressable time states, `2^time_qubits`.
    pub fn time_states(&self) -> usize {
        1 << self.time.len()
    }

    pub fn channel_states(&self) -> usize {
        self.channel.map_or(1, |c| 1 << c.len())
    }

    fn validate(&self) -> Result<(), CircuitError> {
        let ranges: Vec<QubitRange> = [Some(self.time), self.amplitude, self.channel]
            .into_iter()
            .flatten()
            .collect();
        if ranges.iter().any(|r| r.end < r.start) {
            return Err(CircuitError::InvalidLayout(
                "range end precedes start".into(),
            ));
        }
        let mut sorted = ranges.clone();
        sorted.sort_by_key(|r| r.start);
        let mut next = 0;
        for r in &sorted {
            if r.start != next {
                return Err(CircuitError::InvalidLayout(format!(
                    "registers must be contiguous from qubit 0, found gap or overlap at {}",
                    r.start
                )));
            }
            next = r.end;
        }
        Ok(())
    }
}

/// `ceil(log2(n))`, with `n <= 1` mapping to zero.
pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Classical values a decoder needs alongside the measurement data.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    /// Number of time states `N` (after padding).
    #[serde(rename = "N")]
    pub n_samples: usize,
    /// QPAM normalization constant.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub g: Option<f64>,
    /// Bit depth `q` of the amplitude words.
    #[serde(rename = "q", skip_serializing_if = "Option::is_none", default)]
    pub depth: Option<u32>,
    /// Number of channel states `C` (after padding).
    #[serde(rename = "C", skip_serializing_if = "Option::is_none", default)]
    pub channels: Option<usize>,
    /// Integer bits `m` of fixed-point words.
    #[serde(rename = "m", skip_serializing_if = "Option::is_none", default)]
    pub integer_bits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sample_rate: Option<u32>,
    /// Frames in the source audio before padding.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub source_len: Option<usize>,
    /// Channels in the source audio before padding.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub source_channels: Option<usize>,
}

/// Ordered gate list over a register layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCircuit", into = "RawCircuit")]
pub struct Circuit {
    scheme: Scheme,
    layout: RegisterLayout,
    metadata: Metadata,
    ops: Vec<GateOp>,
}

#[derive(Serialize, Deserialize)]
struct RawCircuit {
    scheme: Scheme,
    n_qubits: usize,
    layout: RegisterLayout,
    metadata: Metadata,
    ops: Vec<GateOp>,
}

impl From<Circuit> for RawCircuit {
    fn from(c: Circuit) -> Self {
        Self {
            scheme: c.scheme,
            n_qubits: c.layout.n_qubits(),
            layout: c.layout,
            metadata: c.metadata,
            ops: c.ops,
        }
    }
}

impl TryFrom<RawCircuit> for Circuit {
    type Error = CircuitError;

    fn try_from(raw: RawCircuit) -> Result<Self, Self::Error> {
        if raw.n_qubits != raw.layout.n_qubits() {
            return Err(CircuitError::InvalidLayout(format!(
                "n_qubits is {} but the layout spans {}",
                raw.n_qubits,
                raw.layout.n_qubits()
            )));
        }
        Circuit::new(raw.scheme, raw.layout, raw.metadata, raw.ops)
    }
}

impl Circuit {
    pub fn new(
        scheme: Scheme,
        layout: RegisterLayout,
        metadata: Metadata,
        ops: Vec<GateOp>,
    ) -> Result<Self, CircuitError> {
        layout.validate()?;
        let n_qubits = layout.n_qubits();
        if let Some(op) = ops.iter().find(|op| op.max_qubit() >= n_qubits) {
            return Err(CircuitError::QubitOutsideLayout {
                qubit: op.max_qubit(),
                n_qubits,
            });
        }
        Ok(Self {
            scheme,
            layout,
            metadata,
            ops,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn metadata(&self) -> &Metadata {
        &self.metadata
    }

    pub fn metadata_mut(&mut self) -> &mut Metadata {
        &mut self.metadata
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn n_qubits(&self) -> usize {
        self.layout.n_qubits()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CircuitError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// What a value-setting operation does once its address matches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueSetting {
    /// `Ry(angle)` on the (single) amplitude qubit.
    Ry(f64),
    /// X on amplitude qubit `j`, counted from the least significant bit.
    Flip(usize),
}

/// One multi-controlled gate addressing `time_index`.
///
/// Every time qubit is a control; qubits whose bit in `time_index` is `0`
/// get negative polarity.
pub fn value_setting_op(
    layout: &RegisterLayout,
    time_index: usize,
    action: ValueSetting,
) -> Result<Vec<GateOp>, CircuitError> {
    value_setting_op_at(layout, time_index, None, action)
}

/// [`value_setting_op`] that also addresses a channel state.
pub fn value_setting_op_at(
    layout: &RegisterLayout,
    time_index: usize,
    channel_index: Option<usize>,
    action: ValueSetting,
) -> Result<Vec<GateOp>, CircuitError> {
    if time_index >= layout.time_states() {
        return Err(CircuitError::TimeIndexOutOfRange {
            index: time_index,
            len: layout.time_states(),
        });
    }
    let amplitude = layout.amplitude.ok_or(CircuitError::NoAmplitudeRegister)?;
    let (kind, offset) = match action {
        ValueSetting::Ry(angle) => (GateKind::Ry(angle), 0),
        ValueSetting::Flip(j) => (GateKind::X, j),
    };
    if offset >= amplitude.len() {
        return Err(CircuitError::AmplitudeQubitOutOfRange {
            index: offset,
            width: amplitude.len(),
        });
    }

    let mut controls = address_controls(layout.time, time_index);
    if let Some(index) = channel_index {
        let channel = layout.channel.ok_or(CircuitError::NoChannelRegister)?;
        if index >= layout.channel_states() {
            return Err(CircuitError::ChannelIndexOutOfRange {
                index,
                len: layout.channel_states(),
            });
        }
        controls.extend(address_controls(channel, index));
    }
    Ok(vec![GateOp::new(kind, amplitude.start + offset, controls)?])
}

fn address_controls(range: QubitRange, index: usize) -> Vec<Control> {
    range
        .qubits()
        .enumerate()
        .map(|(bit, qubit)| {
            if (index >> bit) & 1 == 1 {
                Control::positive(qubit)
            } else {
                Control::negative(qubit)
            }
        })
        .collect()
}

/// One H per time qubit and per channel qubit.
pub fn hadamard_wall(layout: &RegisterLayout) -> Vec<GateOp> {
    layout
        .time
        .qubits()
        .chain(layout.channel.iter().flat_map(|c| c.qubits()))
        .map(GateOp::h)
        .collect()
}

/// Rewrites every negative control as `X · positive control · X`.
pub fn lower_negative_controls(ops: &[GateOp]) -> Vec<GateOp> {
    let mut lowered = Vec::with_capacity(ops.len());
    for op in ops {
        let flipped: Vec<usize> = op
            .controls()
            .iter()
            .filter(|c| c.polarity == crate::sim::Polarity::Negative)
            .map(|c| c.qubit)
            .collect();
        if flipped.is_empty() {
            lowered.push(op.clone());
            continue;
        }
        lowered.extend(flipped.iter().map(|&q| GateOp::x(q)));
        let positive = op
            .controls()
            .iter()
            .map(|c| Control::positive(c.qubit))
            .collect();
        lowered.push(
            GateOp::new(op.kind(), op.target(), positive).expect("same qubits as a valid op"),
        );
        lowered.extend(flipped.iter().map(|&q| GateOp::x(q)));
    }
    lowered
}
