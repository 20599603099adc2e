//! Qubit and instruction estimates per representation.
//!
//! With `n = ceil(log2 N)` and `c = ceil(log2 C)`:
//!
//! | scheme        | qubits      | value-setting ops | basic instructions |
//! |---------------|-------------|-------------------|--------------------|
//! | QPAM          | n           | N - 1             | N                  |
//! | SQPAM         | n + 1       | N                 | N^2                |
//! | QSM/uQSM/fpQSM| n + q       | N                 | q·N·n              |
//! | MQSM          | n + q + c   | N·C               | C·q·N·n            |
//! | MSQPAM        | n + 1 + c   | N·C               | C·N^2              |

use std::fmt;

use serde::Serialize;

use super::{ceil_log2, Circuit, Retrieval, Scheme};
use crate::sim::GateKind;

/// Gate tallies of a concrete circuit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct GateCounts {
    pub h: usize,
    pub x: usize,
    pub ry: usize,
    /// Gates with at least one control.
    pub controlled: usize,
    /// Negative controls, i.e. X pairs a lowering pass would add.
    pub negative_controls: usize,
}

impl GateCounts {
    pub fn of(circuit: &Circuit) -> Self {
        let mut counts = GateCounts::default();
        for op in circuit.ops() {
            match op.kind() {
                GateKind::H => counts.h += 1,
                GateKind::X => counts.x += 1,
                GateKind::Ry(_) => counts.ry += 1,
            }
            if op.is_controlled() {
                counts.controlled += 1;
            }
            counts.negative_controls += op
                .controls()
                .iter()
                .filter(|c| c.polarity == crate::sim::Polarity::Negative)
                .count();
        }
        counts
    }

    pub fn total(&self) -> usize {
        self.h + self.x + self.ry
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceReport {
    pub scheme: Scheme,
    pub n_samples: usize,
    pub depth: u32,
    pub channels: usize,
    pub qubits: usize,
    pub value_setting_ops: u64,
    pub basic_instructions: u64,
    pub complexity: &'static str,
    pub retrieval: Retrieval,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gates: Option<GateCounts>,
}

/// Resource estimate for `scheme` at `n_samples` samples, `depth`-bit words
/// and `channels` channels. `depth` is ignored by the coefficient schemes and
/// `channels` by the single-channel ones.
pub fn resource_report(
    scheme: Scheme,
    n_samples: usize,
    depth: u32,
    channels: usize,
) -> ResourceReport {
    let n = ceil_log2(n_samples) as u64;
    let c = ceil_log2(channels);
    let big_n = n_samples as u64;
    let big_c = channels.max(1) as u64;
    let q = depth as u64;
    let time = n as usize;

    let (qubits, value_setting_ops, basic_instructions, complexity) = match scheme {
        Scheme::Qpam => (time, big_n.saturating_sub(1), big_n, "O(N)"),
        Scheme::Sqpam => (time + 1, big_n, big_n.saturating_mul(big_n), "O(N^2)"),
        Scheme::Qsm | Scheme::Uqsm | Scheme::Fpqsm => (
            time + depth as usize,
            big_n,
            q.saturating_mul(big_n).saturating_mul(n),
            "O(qN log N)",
        ),
        Scheme::Mqsm => (
            time + depth as usize + c,
            big_n * big_c,
            big_c
                .saturating_mul(q)
                .saturating_mul(big_n)
                .saturating_mul(n),
            "O(CqN log N)",
        ),
        Scheme::Msqpam => (
            time + 1 + c,
            big_n * big_c,
            big_c.saturating_mul(big_n).saturating_mul(big_n),
            "O(CN^2)",
        ),
    };
    ResourceReport {
        scheme,
        n_samples,
        depth: if scheme.is_state_based() { depth } else { 0 },
        channels: if scheme.is_multichannel() {
            channels.max(1)
        } else {
            1
        },
        qubits,
        value_setting_ops,
        basic_instructions,
        complexity,
        retrieval: scheme.retrieval(),
        gates: None,
    }
}

impl ResourceReport {
    /// Estimate for an existing circuit, with its actual gate tallies.
    pub fn for_circuit(circuit: &Circuit) -> Self {
        let meta = circuit.metadata();
        let mut report = resource_report(
            circuit.scheme(),
            meta.n_samples,
            meta.depth.unwrap_or(0),
            meta.channels.unwrap_or(1),
        );
        report.qubits = circuit.n_qubits();
        report.gates = Some(GateCounts::of(circuit));
        report
    }
}

impl fmt::Display for ResourceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scheme:              {}", self.scheme.label())?;
        writeln!(f, "samples (N):         {}", self.n_samples)?;
        if self.scheme.is_state_based() {
            writeln!(f, "bit depth (q):       {}", self.depth)?;
        }
        if self.scheme.is_multichannel() {
            writeln!(f, "channels (C):        {}", self.channels)?;
        }
        writeln!(f, "qubits:              {}", self.qubits)?;
        writeln!(f, "value-setting ops:   {}", self.value_setting_ops)?;
        writeln!(
            f,
            "basic instructions:  {} ({})",
            self.basic_instructions, self.complexity
        )?;
        writeln!(f, "retrieval:           {}", self.retrieval)?;
        if let Some(g) = &self.gates {
            writeln!(
                f,
                "gates:               {} h, {} x, {} ry ({} controlled, {} negative controls)",
                g.h, g.x, g.ry, g.controlled, g.negative_controls
            )?;
        }
        Ok(())
    }
}
