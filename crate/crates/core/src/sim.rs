//! Dense statevector simulator and seeded shot sampling.
//!
//! Basis index bit `k` is qubit `k`, so qubit 0 is the least significant bit.
//! Outcome strings print the highest-numbered qubit first, which matches the
//! usual `|amplitude>|time>` ket notation for the layouts in [`crate::circuit`].
//!
//! Controlled gates are simulated natively: only amplitude pairs whose control
//! bits match the requested pattern are visited, and a negative control is a
//! match on `0` rather than an explicit X conjugation.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::Circuit;

/// Default qubit budget: 2^26 complex doubles is 1 GiB.
pub const DEFAULT_MAX_QUBITS: usize = 26;

/// Environment variable overriding [`DEFAULT_MAX_QUBITS`].
pub const MAX_QUBITS_ENV: &str = "QAUDIO_MAX_QUBITS";

const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    #[error("qubit {qubit} is out of range for a {n_qubits}-qubit state")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("qubit {0} appears more than once in a gate")]
    OverlappingQubits(usize),
    #[error("circuit needs {requested} qubits but the simulator budget is {max}")]
    BudgetExceeded { requested: usize, max: usize },
    #[error("{MAX_QUBITS_ENV} must be a nonnegative integer, got {0:?}")]
    InvalidBudget(String),
    #[error("shot count must be at least 1")]
    ZeroShots,
    #[error("amplitude vector length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("amplitude vector has squared norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("outcome {outcome} does not fit in {n_qubits} qubits")]
    OutcomeOutOfRange { outcome: u64, n_qubits: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    /// Fires when the control qubit is `|1>`.
    Positive,
    /// Fires when the control qubit is `|0>`.
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Control {
    pub qubit: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn positive(qubit: usize) -> Self {
        Self {
            qubit,
            polarity: Polarity::Positive,
        }
    }

    pub fn negative(qubit: usize) -> Self {
        Self {
            qubit,
            polarity: Polarity::Negative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    H,
    X,
    /// Rotation about the y axis; `Ry(2θ)|0> = cos θ|0> + sin θ|1>`.
    Ry(f64),
}

impl GateKind {
    fn matrix(self) -> [[f64; 2]; 2] {
        match self {
            GateKind::H => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                [[s, s], [s, -s]]
            }
            GateKind::X => [[0.0, 1.0], [1.0, 0.0]],
            GateKind::Ry(angle) => {
                let (sin, cos) = (angle / 2.0).sin_cos();
                [[cos, -sin], [sin, cos]]
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Ry(_) => "ry",
        }
    }
}

/// A single-target gate with any number of polarized controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGateOp", into = "RawGateOp")]
pub struct GateOp {
    kind: GateKind,
    target: usize,
    controls: Vec<Control>,
}

impl GateOp {
    pub fn new(kind: GateKind, target: usize, controls: Vec<Control>) -> Result<Self, SimError> {
        for (i, c) in controls.iter().enumerate() {
            if c.qubit == target || controls[..i].iter().any(|o| o.qubit == c.qubit) {
                return Err(SimError::OverlappingQubits(c.qubit));
            }
        }
        Ok(Self {
            kind,
            target,
            controls,
        })
    }

    pub fn h(target: usize) -> Self {
        Self::uncontrolled(GateKind::H, target)
    }

    pub fn x(target: usize) -> Self {
        Self::uncontrolled(GateKind::X, target)
    }

    pub fn ry(target: usize, angle: f64) -> Self {
        Self::uncontrolled(GateKind::Ry(angle), target)
    }

    fn uncontrolled(kind: GateKind, target: usize) -> Self {
        Self {
            kind,
            target,
            controls: Vec::new(),
        }
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn controls(&self) -> &[Control] {
        &self.controls
    }

    pub fn is_controlled(&self) -> bool {
        !self.controls.is_empty()
    }

    /// Largest qubit index the gate touches.
    pub fn max_qubit(&self) -> usize {
        self.controls
            .iter()
            .map(|c| c.qubit)
            .fold(self.target, usize::max)
    }
}

#[derive(Serialize, Deserialize)]
struct RawGateOp {
    kind: String,
    target: usize,
    controls: Vec<(usize, Polarity)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    angle: Option<f64>,
}

impl From<GateOp> for RawGateOp {
    fn from(op: GateOp) -> Self {
        Self {
            kind: op.kind.name().to_owned(),
            target: op.target,
            controls: op.controls.iter().map(|c| (c.qubit, c.polarity)).collect(),
            angle: match op.kind {
                GateKind::Ry(angle) => Some(angle),
                _ => None,
            },
        }
    }
}

impl TryFrom<RawGateOp> for GateOp {
    type Error = String;

    fn try_from(raw: RawGateOp) -> Result<Self, Self::Error> {
        let kind = match (raw.kind.to_ascii_lowercase().as_str(), raw.angle) {
            ("h", None) => GateKind::H,
            ("x", None) => GateKind::X,
            ("ry", Some(angle)) => GateKind::Ry(angle),
            ("ry", None) => return Err("ry gate without an angle".into()),
            (kind, Some(_)) if kind == "h" || kind == "x" => {
                return Err(format!("{kind} gate takes no angle"))
            }
            (kind, _) => return Err(format!("unknown gate kind {kind:?}")),
        };
        let controls = raw
            .controls
            .into_iter()
            .map(|(qubit, polarity)| Control { qubit, polarity })
            .collect();
        GateOp::new(kind, raw.target, controls).map_err(|e| e.to_string())
    }
}

/// `2^n` complex amplitudes of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The all-zero basis state `|0...0>`.
    pub fn new(n_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self {
            n_qubits,
            amplitudes,
        }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, SimError> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return Err(SimError::NotPowerOfTwo(len));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(SimError::NotNormalized(norm));
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies `op` in place.
    pub fn apply(&mut self, op: &GateOp) -> Result<(), SimError> {
        let n_qubits = self.n_qubits;
        if let Some(qubit) = std::iter::once(op.target)
            .chain(op.controls.iter().map(|c| c.qubit))
            .find(|&q| q >= n_qubits)
        {
            return Err(SimError::QubitOutOfRange { qubit, n_qubits });
        }

        let target_bit = 1usize << op.target;
        let mut fixed: Vec<usize> = op.controls.iter().map(|c| c.qubit).collect();
        fixed.push(op.target);
        fixed.sort_unstable();
        let pattern = op
            .controls
            .iter()
            .filter(|c| c.polarity == Polarity::Positive)
            .fold(0usize, |acc, c| acc | (1 << c.qubit));

        let [[m00, m01], [m10, m11]] = op.kind.matrix();
        let free = n_qubits - fixed.len();
        for rest in 0..(1usize << free) {
            let lo = deposit(rest, &fixed) | pattern;
            let hi = lo | target_bit;
            let (a, b) = (self.amplitudes[lo], self.amplitudes[hi]);
            self.amplitudes[lo] = a * m00 + b * m01;
            self.amplitudes[hi] = a * m10 + b * m11;
        }
        Ok(())
    }

    /// `|amplitude|^2` per basis index.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Spreads the bits of `value` over the positions not listed in `fixed`
/// (ascending), leaving the fixed positions zero.
fn deposit(mut value: usize, fixed: &[usize]) -> usize {
    for &p in fixed {
        let low = value & ((1 << p) - 1);
        value = ((value >> p) << (p + 1)) | low;
    }
    value
}

/// Applies `op` to a copy of `state`.
pub fn apply_gate(state: &StateVector, op: &GateOp) -> Result<StateVector, SimError> {
    let mut next = state.clone();
    next.apply(op)?;
    Ok(next)
}

/// Runs circuits from `|0...0>` under a qubit budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Simulator {
    max_qubits: usize,
}

impl Default for Simulator {
    fn default() -> Self {
        Self {
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

impl Simulator {
    pub fn with_max_qubits(max_qubits: usize) -> Self {
        Self { max_qubits }
    }

    /// Reads the budget from `QAUDIO_MAX_QUBITS`, falling back to the default.
    pub fn from_env() -> Result<Self, SimError> {
        match std::env::var(MAX_QUBITS_ENV) {
            Ok(value) => value
                .trim()
                .parse()
                .map(Self::with_max_qubits)
                .map_err(|_| SimError::InvalidBudget(value)),
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn max_qubits(&self) -> usize {
        self.max_qubits
    }

    pub fn run(&self, circuit: &Circuit) -> Result<StateVector, SimError> {
        self.run_ops(circuit.n_qubits(), circuit.ops())
    }

    pub fn run_ops(&self, n_qubits: usize, ops: &[GateOp]) -> Result<StateVector, SimError> {
        if n_qubits > self.max_qubits {
            return Err(SimError::BudgetExceeded {
                requested: n_qubits,
                max: self.max_qubits,
            });
        }
        let mut state = StateVector::new(n_qubits);
        for op in ops {
            state.apply(op)?;
        }
        Ok(state)
    }
}

/// Renders a basis index as an `n_qubits`-character string, highest qubit first.
pub fn format_outcome(index: u64, n_qubits: usize) -> String {
    if n_qubits == 0 {
        return String::new();
    }
    format!("{:0width$b}", index, width = n_qubits)
}

/// Measurement data a decoder can read: nonnegative weight per basis index.
///
/// Weights need not be normalized; decoders divide by [`Outcomes::total`].
pub trait Outcomes {
    fn n_qubits(&self) -> usize;

    fn total(&self) -> f64;

    fn weight(&self, outcome: u64) -> f64;

    /// Outcomes with nonzero weight, ascending by index.
    fn entries(&self) -> Vec<(u64, f64)>;
}

/// Shot counts per measured outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    n_qubits: usize,
    counts: BTreeMap<u64, u64>,
    shots: u64,
}

impl Histogram {
    pub fn from_counts(n_qubits: usize, counts: BTreeMap<u64, u64>) -> Result<Self, SimError> {
        check_outcomes(n_qubits, counts.keys().copied())?;
        let counts: BTreeMap<u64, u64> = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        let shots = counts.values().sum();
        Ok(Self {
            n_qubits,
            counts,
            shots,
        })
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn count(&self, outcome: u64) -> u64 {
        self.counts.get(&outcome).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    /// Observed frequency `count / shots`.
    pub fn frequency(&self, outcome: u64) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.count(outcome) as f64 / self.shots as f64
        }
    }
}

impl Outcomes for Histogram {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn total(&self) -> f64 {
        self.shots as f64
    }

    fn weight(&self, outcome: u64) -> f64 {
        self.count(outcome) as f64
    }

    fn entries(&self) -> Vec<(u64, f64)> {
        self.counts.iter().map(|(&k, &c)| (k, c as f64)).collect()
    }
}

impl fmt::Display for Histogram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (&outcome, &count) in &self.counts {
            writeln!(f, "{}: {}", format_outcome(outcome, self.n_qubits), count)?;
        }
        Ok(())
    }
}

/// The infinite-shot limit of a measurement: exact outcome probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Probabilities {
    n_qubits: usize,
    probs: BTreeMap<u64, f64>,
}

impl Probabilities {
    pub fn from_map(n_qubits: usize, probs: BTreeMap<u64, f64>) -> Result<Self, SimError> {
        check_outcomes(n_qubits, probs.keys().copied())?;
        Ok(Self {
            n_qubits,
            probs: probs.into_iter().filter(|&(_, p)| p > 0.0).collect(),
        })
    }

    pub fn probability(&self, outcome: u64) -> f64 {
        self.probs.get(&outcome).copied().unwrap_or(0.0)
    }

    pub fn probs(&self) -> &BTreeMap<u64, f64> {
        &self.probs
    }

    /// Probabilities keyed by outcome string.
    pub fn by_bitstring(&self) -> BTreeMap<String, f64> {
        self.probs
            .iter()
            .map(|(&k, &p)| (format_outcome(k, self.n_qubits), p))
            .collect()
    }
}

impl Outcomes for Probabilities {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    fn weight(&self, outcome: u64) -> f64 {
        self.probability(outcome)
    }

    fn entries(&self) -> Vec<(u64, f64)> {
        self.probs.iter().map(|(&k, &p)| (k, p)).collect()
    }
}

fn check_outcomes(n_qubits: usize, mut keys: impl Iterator<Item = u64>) -> Result<(), SimError> {
    let limit = 1u128 << n_qubits;
    match keys.find(|&k| k as u128 >= limit) {
        Some(outcome) => Err(SimError::OutcomeOutOfRange { outcome, n_qubits }),
        None => Ok(()),
    }
}

/// Nonzero `|amplitude|^2` entries of `state`.
pub fn exact_probabilities(state: &StateVector) -> Probabilities {
    let probs = state
        .amplitudes
        .iter()
        .enumerate()
        .filter_map(|(i, a)| {
            let p = a.norm_sqr();
            (p > 0.0).then_some((i as u64, p))
        })
        .collect();
    Probabilities {
        n_qubits: state.n_qubits,
        probs,
    }
}

/// Draws `shots` measurements of every qubit from `state`.
///
/// The multinomial draw is a chain of conditional binomials over basis
/// states in index order, driven by a ChaCha8 stream seeded with `seed`, so
/// identical `(state, shots, seed)` inputs always give identical counts.
pub fn sample(state: &StateVector, shots: u64, seed: u64) -> Result<Histogram, SimError> {
    if shots == 0 {
        return Err(SimError::ZeroShots);
    }
    let probs = state.probabilities();
    let mut suffix = vec![0.0; probs.len() + 1];
    for i in (0..probs.len()).rev() {
        suffix[i] = suffix[i + 1] + probs[i];
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    let mut remaining = shots;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if p <= 0.0 {
            continue;
        }
        let share = p / suffix[i];
        let drawn = if share >= 1.0 {
            remaining
        } else {
            Binomial::new(remaining, share)
                .expect("share is a probability")
                .sample(&mut rng)
        };
        if drawn > 0 {
            counts.insert(i as u64, drawn);
            remaining -= drawn;
        }
    }
    Ok(Histogram {
        n_qubits: state.n_qubits,
        counts,
        shots,
    })
}
