//! OpenQASM 3 export and a parser for the subset the exporter emits.
//!
//! Controlled gates are written with one `ctrl @` or `negctrl @` modifier per
//! control, in control order, followed by the controls and then the target:
//!
//! ```text
//! negctrl @ ctrl @ ry(1.5707963267948966) q[0], q[1], q[2];
//! ```

use std::fmt::Write;

use super::{lower_negative_controls, Circuit, CircuitError};
use crate::sim::{Control, GateKind, GateOp, Polarity};

/// Renders `circuit` as OpenQASM 3.
///
/// With `lower` set, negative controls are expanded into X sandwiches so the
/// output only uses positive `ctrl @` modifiers.
pub fn export_qasm(circuit: &Circuit, lower: bool) -> String {
    let mut out = String::from("OPENQASM 3.0;\ninclude \"stdgates.inc\";\n");
    let layout = circuit.layout();
    writeln!(out, "// scheme: {}", circuit.scheme()).unwrap();
    let registers = [
        ("time", Some(layout.time)),
        ("amplitude", layout.amplitude),
        ("channel", layout.channel),
    ];
    for (name, range) in registers {
        if let Some(r) = range {
            writeln!(out, "// {name}: q[{}:{}]", r.start, r.end).unwrap();
        }
    }
    writeln!(out, "qubit[{}] q;", circuit.n_qubits()).unwrap();

    let lowered;
    let ops = if lower {
        lowered = lower_negative_controls(circuit.ops());
        &lowered[..]
    } else {
        circuit.ops()
    };
    for op in ops {
        write_op(&mut out, op);
    }
    out
}

fn write_op(out: &mut String, op: &GateOp) {
    for control in op.controls() {
        out.push_str(match control.polarity {
            Polarity::Positive => "ctrl @ ",
            Polarity::Negative => "negctrl @ ",
        });
    }
    match op.kind() {
        GateKind::Ry(angle) => write!(out, "ry({angle})").unwrap(),
        kind => out.push_str(kind.name()),
    }
    let operands: Vec<String> = op
        .controls()
        .iter()
        .map(|c| c.qubit)
        .chain(std::iter::once(op.target()))
        .map(|q| format!("q[{q}]"))
        .collect();
    writeln!(out, " {};", operands.join(", ")).unwrap();
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedQasm {
    pub n_qubits: usize,
    pub ops: Vec<GateOp>,
}

/// Parses text produced by [`export_qasm`].
pub fn parse_qasm(text: &str) -> Result<ParsedQasm, CircuitError> {
    let mut n_qubits = None;
    let mut ops = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let err = |message: String| CircuitError::Qasm {
            line: line_no,
            message,
        };
        let line = raw.split("//").next().unwrap_or("").trim();
        if line.is_empty() || line.starts_with("OPENQASM") || line.starts_with("include") {
            continue;
        }
        let statement = line
            .strip_suffix(';')
            .ok_or_else(|| err("missing ';'".into()))?
            .trim();
        if let Some(decl) = statement.strip_prefix("qubit") {
            if n_qubits.is_some() {
                return Err(err("only one qubit register is supported".into()));
            }
            n_qubits = Some(
                parse_declaration(decl)
                    .ok_or_else(|| err(format!("bad declaration {statement:?}")))?,
            );
            continue;
        }
        let width = n_qubits.ok_or_else(|| err("gate before qubit declaration".into()))?;
        let op = parse_gate(statement).map_err(err)?;
        if op.max_qubit() >= width {
            return Err(err(format!("qubit {} out of range", op.max_qubit())));
        }
        ops.push(op);
    }
    Ok(ParsedQasm {
        n_qubits: n_qubits.unwrap_or(0),
        ops,
    })
}

fn parse_declaration(decl: &str) -> Option<usize> {
    let decl = decl.trim();
    let (size, name) = decl.strip_prefix('[')?.split_once(']')?;
    if name.trim() != "q" {
        return None;
    }
    size.trim().parse().ok()
}

fn parse_gate(statement: &str) -> Result<GateOp, String> {
    let mut rest = statement;
    let mut polarities = Vec::new();
    loop {
        let (polarity, after) = if let Some(after) = rest.strip_prefix("negctrl") {
            (Polarity::Negative, after)
        } else if let Some(after) = rest.strip_prefix("ctrl") {
            (Polarity::Positive, after)
        } else {
            break;
        };
        let after = after.trim_start();
        let (count, after) = match after.strip_prefix('(') {
            Some(inner) => {
                let (n, tail) = inner.split_once(')').ok_or("unclosed modifier count")?;
                let n: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad modifier count {n:?}"))?;
                (n, tail.trim_start())
            }
            None => (1, after),
        };
        rest = after
            .strip_prefix('@')
            .ok_or("expected '@' after control modifier")?
            .trim_start();
        polarities.extend(std::iter::repeat_n(polarity, count));
    }

    let name_end = rest
        .find(|c: char| c == '(' || c.is_whitespace())
        .ok_or("missing operands")?;
    let name = &rest[..name_end];
    rest = rest[name_end..].trim_start();
    let kind = match name {
        "h" => GateKind::H,
        "x" => GateKind::X,
        "ry" => {
            let inner = rest.strip_prefix('(').ok_or("ry needs an angle")?;
            let (angle, tail) = inner.split_once(')').ok_or("unclosed angle")?;
            rest = tail.trim_start();
            GateKind::Ry(
                angle
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad angle {angle:?}"))?,
            )
        }
        other => return Err(format!("unsupported gate {other:?}")),
    };

    let qubits = rest
        .split(',')
        .map(|operand| {
            let operand = operand.trim();
            operand
                .strip_prefix("q[")
                .and_then(|s| s.strip_suffix(']'))
                .and_then(|s| s.trim().parse::<usize>().ok())
                .ok_or_else(|| format!("bad operand {operand:?}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if qubits.len() != polarities.len() + 1 {
        return Err(format!(
            "{} control modifiers need {} operands, found {}",
            polarities.len(),
            polarities.len() + 1,
            qubits.len()
        ));
    }
    let (target, controls) = qubits.split_last().expect("at least one operand");
    let controls = controls
        .iter()
        .zip(polarities)
        .map(|(&qubit, polarity)| Control { qubit, polarity })
        .collect();
    GateOp::new(kind, *target, controls).map_err(|e| e.to_string())
}
