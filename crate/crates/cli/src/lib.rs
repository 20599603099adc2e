//! Command implementations behind the `qaudio` binary.
//!
//! Every command reads its inputs from files, writes artifacts to files (or
//! stdout when no output path is given) and reports failures as a
//! [`CliError`] carrying a process exit code.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use qaudio::analysis::{
    compare, plot_histogram, read_outcomes_csv, scheme_comparison_table, AnalysisError,
    OutcomeTable, ReconstructionReport,
};
use qaudio::audio::{load_audio, save_audio, write_csv, AudioError, AudioFormat, DigitalAudio};
use qaudio::circuit::{export_qasm, Circuit, CircuitError, ResourceReport, Scheme};
use qaudio::codecs::{
    decode_with, encode, CodecError, DecodeOptions, Decoded, EncodeOptions, GSource, Quadrature,
};
use qaudio::sim::{exact_probabilities, sample, SimError, Simulator};

/// Failure classes, each with its own exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Unreadable or invalid input files and arguments.
    Input,
    /// A signal the chosen representation cannot encode.
    Degenerate,
    /// The circuit needs more qubits than the simulator allows.
    Budget,
    Other,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Other => 1,
            ErrorKind::Input => 2,
            ErrorKind::Degenerate => 3,
            ErrorKind::Budget => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::Input => "input",
            ErrorKind::Degenerate => "degenerate_signal",
            ErrorKind::Budget => "budget_exceeded",
            ErrorKind::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Input, message)
    }

    fn other(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Other, message)
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }

    /// One-line JSON object for stderr.
    pub fn to_json_line(&self) -> String {
        json!({
            "error": self.kind.name(),
            "exit_code": self.exit_code(),
            "message": self.message,
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.name(), self.message)
    }
}

impl std::error::Error for CliError {}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        let kind = match e {
            SimError::BudgetExceeded { .. } => ErrorKind::Budget,
            _ => ErrorKind::Input,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<CodecError> for CliError {
    fn from(e: CodecError) -> Self {
        match e {
            CodecError::DegenerateSignal => Self::new(ErrorKind::Degenerate, e.to_string()),
            CodecError::Sim(inner) => inner.into(),
            CodecError::Circuit(CircuitError::Gate(inner)) => inner.into(),
            other => Self::input(other.to_string()),
        }
    }
}

impl From<CircuitError> for CliError {
    fn from(e: CircuitError) -> Self {
        match e {
            CircuitError::Gate(inner) => inner.into(),
            other => Self::input(other.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        Self::input(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qaudio",
    version,
    about = "Encode audio into quantum circuits, simulate them and decode the measurements"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the preparation circuit of an audio file (circuit JSON).
    Encode(EncodeArgs),
    /// Simulate a circuit and write its measurement histogram (CSV).
    Simulate(SimulateArgs),
    /// Decode a histogram back to audio using the circuit's metadata.
    Decode(DecodeArgs),
    /// Encode, simulate and decode in one go and report the error.
    Roundtrip(RoundtripArgs),
    /// Compare resource requirements of all representations.
    Report(ReportArgs),
    /// Print a circuit as OpenQASM 3.
    ExportQasm(ExportQasmArgs),
}

#[derive(Debug, Clone, Args)]
pub struct EncodingFlags {
    /// Representation: qpam, sqpam, qsm, uqsm, fpqsm, mqsm or msqpam.
    #[arg(long, value_parser = parse_scheme)]
    pub scheme: Scheme,
    /// Bit depth q of the state-modulation schemes.
    #[arg(long, default_value_t = 8)]
    pub depth: u32,
    /// Integer bits m of fpQSM words.
    #[arg(long, default_value_t = 0)]
    pub integer_bits: u32,
}

impl EncodingFlags {
    fn options(&self) -> EncodeOptions {
        EncodeOptions::new(self.scheme)
            .depth(self.depth)
            .integer_bits(self.integer_bits)
    }
}

#[derive(Debug, Clone, Args)]
pub struct MeasureFlags {
    /// Number of shots; defaults to 4^n for an n-qubit circuit.
    #[arg(long, conflicts_with = "exact")]
    pub shots: Option<u64>,
    /// Seed of the measurement sampler.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use exact outcome probabilities instead of sampling.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum QuadratureArg {
    #[default]
    Sine,
    Cosine,
}

#[derive(Debug, Clone, Args)]
pub struct DecodeFlags {
    /// QPAM only: override the normalization constant g from the circuit.
    #[arg(long, conflicts_with = "g_from_outcomes")]
    pub g: Option<f64>,
    /// QPAM only: take g as the sum of the measured frequencies.
    #[arg(long)]
    pub g_from_outcomes: bool,
    /// SQPAM/MSQPAM only: which amplitude bin is read as the sine term.
    #[arg(long, value_enum, default_value_t = QuadratureArg::Sine)]
    pub quadrature: QuadratureArg,
}

impl DecodeFlags {
    fn options(&self) -> DecodeOptions {
        let g = match (self.g, self.g_from_outcomes) {
            (Some(g), _) => Some(GSource::Explicit(g)),
            (None, true) => Some(GSource::FromOutcomes),
            (None, false) => None,
        };
        DecodeOptions {
            g,
            quadrature: match self.quadrature {
                QuadratureArg::Sine => Quadrature::Sine,
                QuadratureArg::Cosine => Quadrature::Cosine,
            },
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EncodeArgs {
    /// Audio file (.wav or .csv).
    #[arg(long)]
    pub input: PathBuf,
    /// Circuit JSON destination; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub encoding: EncodingFlags,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Circuit JSON.
    #[arg(long)]
    pub input: PathBuf,
    /// Histogram CSV destination; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also draw the histogram as SVG.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[command(flatten)]
    pub measure: MeasureFlags,
}

#[derive(Debug, Clone, Args)]
pub struct DecodeArgs {
    /// Histogram CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Circuit JSON the histogram was measured from.
    #[arg(long)]
    pub circuit: PathBuf,
    /// Audio destination (.wav or .csv); CSV on stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub decode: DecodeFlags,
}

#[derive(Debug, Clone, Args)]
pub struct RoundtripArgs {
    /// Audio file (.wav or .csv).
    #[arg(long)]
    pub input: PathBuf,
    /// Reconstructed audio destination (.wav or .csv).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write the circuit JSON.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    /// Also write the histogram CSV.
    #[arg(long)]
    pub histogram: Option<PathBuf>,
    /// Also draw the histogram as SVG.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub encoding: EncodingFlags,
    #[command(flatten)]
    pub measure: MeasureFlags,
    #[command(flatten)]
    pub decode: DecodeFlags,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Number of samples N.
    #[arg(long, required_unless_present = "circuit")]
    pub samples: Option<usize>,
    /// Bit depth q.
    #[arg(long, default_value_t = 8)]
    pub depth: u32,
    /// Number of channels C.
    #[arg(long, default_value_t = 1)]
    pub channels: usize,
    /// Emit CSV instead of an aligned table.
    #[arg(long)]
    pub csv: bool,
    /// Destination; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Report on an existing circuit JSON instead of N, q and C.
    #[arg(long, conflicts_with_all = ["csv"])]
    pub circuit: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExportQasmArgs {
    /// Circuit JSON.
    #[arg(long)]
    pub input: PathBuf,
    /// Destination; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Rewrite negative controls as X-conjugated positive controls.
    #[arg(long)]
    pub lower: bool,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: CircuitError| e.to_string())
}

/// Runs `cli`, writing anything destined for stdout into `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Encode(args) => cmd_encode(args, out),
        Command::Simulate(args) => cmd_simulate(args, out),
        Command::Decode(args) => cmd_decode(args, out),
        Command::Roundtrip(args) => cmd_roundtrip(args, out),
        Command::Report(args) => cmd_report(args, out),
        Command::ExportQasm(args) => cmd_export_qasm(args, out),
    }
}

pub fn cmd_encode(args: &EncodeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let audio = read_audio(&args.input)?;
    let circuit = encode(&audio, &args.encoding.options())?;
    emit(args.output.as_deref(), &circuit.to_json(), out)
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let circuit = read_circuit(&args.input)?;
    let table = measure(&circuit, &args.measure)?;
    if let Some(path) = &args.plot {
        write_file(
            path,
            &plot_histogram(table.as_outcomes(), &plot_title(&circuit, &table)),
        )?;
    }
    emit(args.output.as_deref(), &table.to_csv(), out)
}

pub fn cmd_decode(args: &DecodeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let circuit = read_circuit(&args.circuit)?;
    let text = read_text(&args.input)?;
    let table = read_outcomes_csv(&text, Some(circuit.n_qubits()))?;
    let decoded = decode_with(&circuit, table.as_outcomes(), &args.decode.options())?;
    write_audio(args.output.as_deref(), &decoded.audio, out)
}

pub fn cmd_roundtrip(args: &RoundtripArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let audio = read_audio(&args.input)?;
    let circuit = encode(&audio, &args.encoding.options())?;
    let table = measure(&circuit, &args.measure)?;
    let decoded = decode_with(&circuit, table.as_outcomes(), &args.decode.options())?;

    if let Some(path) = &args.circuit {
        write_file(path, &circuit.to_json())?;
    }
    if let Some(path) = &args.histogram {
        write_file(path, &table.to_csv())?;
    }
    if let Some(path) = &args.plot {
        write_file(
            path,
            &plot_histogram(table.as_outcomes(), &plot_title(&circuit, &table)),
        )?;
    }
    if let Some(path) = &args.output {
        write_audio(Some(path), &decoded.audio, out)?;
    }
    let report = roundtrip_report(&audio, &circuit, &table, &decoded, &args.encoding)?;
    emit(args.report.as_deref(), &report, out)
}

pub fn cmd_report(args: &ReportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let text = match &args.circuit {
        Some(path) => ResourceReport::for_circuit(&read_circuit(path)?).to_string(),
        None => {
            let samples = args.samples.unwrap_or(0);
            if samples == 0 {
                return Err(CliError::input("--samples must be at least 1"));
            }
            if args.channels == 0 {
                return Err(CliError::input("--channels must be at least 1"));
            }
            let table = scheme_comparison_table(samples, args.depth, args.channels);
            if args.csv {
                table.to_csv()
            } else {
                table.to_string()
            }
        }
    };
    emit(args.output.as_deref(), &text, out)
}

pub fn cmd_export_qasm(args: &ExportQasmArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let circuit = read_circuit(&args.input)?;
    emit(
        args.output.as_deref(),
        &export_qasm(&circuit, args.lower),
        out,
    )
}

/// Shots used when `--shots` is absent: `4^n`, saturating.
pub fn default_shots(n_qubits: usize) -> u64 {
    4u64.checked_pow(n_qubits as u32).unwrap_or(u64::MAX)
}

fn measure(circuit: &Circuit, flags: &MeasureFlags) -> Result<OutcomeTable, CliError> {
    let state = Simulator::from_env()?.run(circuit)?;
    if flags.exact {
        return Ok(OutcomeTable::Exact(exact_probabilities(&state)));
    }
    let shots = flags
        .shots
        .unwrap_or_else(|| default_shots(circuit.n_qubits()));
    if shots == 0 {
        return Err(CliError::input("--shots must be at least 1"));
    }
    Ok(OutcomeTable::Counts(sample(&state, shots, flags.seed)?))
}

fn roundtrip_report(
    audio: &DigitalAudio,
    circuit: &Circuit,
    table: &OutcomeTable,
    decoded: &Decoded,
    encoding: &EncodingFlags,
) -> Result<String, CliError> {
    let mut report: ReconstructionReport = compare(audio, &decoded.audio)?
        .with_scheme(circuit.scheme())
        .with_warnings(&decoded.unobserved);
    if let OutcomeTable::Counts(h) = table {
        report = report.with_shots(h.shots());
    }
    let mut text = report.to_string();
    if let Some(words) = &decoded.words {
        // state-modulation schemes: also score against the quantized input
        let grid = qaudio::audio::quantize(audio, encoding.depth, words.scheme())
            .map_err(|e| CliError::input(e.to_string()))?;
        let mismatched = grid
            .channels()
            .iter()
            .flatten()
            .zip(words.channels().iter().flatten())
            .filter(|(a, b)| a != b)
            .count();
        let grid_report = compare(&grid.dequantize(), &decoded.audio)?;
        text.push_str(&format!(
            "grid max error: {:e}\n",
            grid_report.max_abs_error
        ));
        text.push_str(&format!("word mismatches: {mismatched}\n"));
    }
    Ok(text)
}

fn plot_title(circuit: &Circuit, table: &OutcomeTable) -> String {
    match table {
        OutcomeTable::Counts(h) => format!(
            "{} histogram, {} shots",
            circuit.scheme().label(),
            h.shots()
        ),
        OutcomeTable::Exact(_) => format!("{} exact probabilities", circuit.scheme().label()),
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn read_audio(path: &Path) -> Result<DigitalAudio, CliError> {
    let format = AudioFormat::from_path(path).map_err(|e| CliError::input(e.to_string()))?;
    load_audio(path, format).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn read_circuit(path: &Path) -> Result<Circuit, CliError> {
    Circuit::from_json(&read_text(path)?)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::other(format!("{}: {e}", path.display())))
}

fn write_audio(
    path: Option<&Path>,
    audio: &DigitalAudio,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    match path {
        Some(path) => {
            let format =
                AudioFormat::from_path(path).map_err(|e| CliError::input(e.to_string()))?;
            save_audio(audio, path, format).map_err(|e| match e {
                AudioError::Io(io) => CliError::other(format!("{}: {io}", path.display())),
                other => CliError::input(other.to_string()),
            })
        }
        None => emit(None, &write_csv(audio), out),
    }
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(path) => write_file(path, text),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::other(format!("stdout: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct() {
        let codes: Vec<i32> = [
            ErrorKind::Other,
            ErrorKind::Input,
            ErrorKind::Degenerate,
            ErrorKind::Budget,
        ]
        .iter()
        .map(|k| k.exit_code())
        .collect();
        assert_eq!(codes, vec![1, 2, 3, 4]);
    }

    #[test]
    fn error_classification() {
        assert_eq!(
            CliError::from(CodecError::DegenerateSignal).kind,
            ErrorKind::Degenerate
        );
        let budget = SimError::BudgetExceeded {
            requested: 30,
            max: 26,
        };
        assert_eq!(
            CliError::from(CodecError::Sim(budget.clone())).kind,
            ErrorKind::Budget
        );
        assert_eq!(CliError::from(budget).kind, ErrorKind::Budget);
        assert_eq!(
            CliError::from(CodecError::EmptySignal).kind,
            ErrorKind::Input
        );
    }

    #[test]
    fn error_line_is_json() {
        let line = CliError::new(ErrorKind::Budget, "too \"big\"").to_json_line();
        let value: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(value["error"], "budget_exceeded");
        assert_eq!(value["exit_code"], 4);
        assert_eq!(value["message"], "too \"big\"");
        assert!(!line.contains('\n'));
    }

    #[test]
    fn default_shots_follow_four_to_the_n() {
        assert_eq!(default_shots(0), 1);
        assert_eq!(default_shots(3), 64);
        assert_eq!(default_shots(6), 4096);
        assert_eq!(default_shots(40), u64::MAX);
    }

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from([
            "qaudio",
            "roundtrip",
            "--input",
            "a.csv",
            "--scheme",
            "QSM",
            "--depth",
            "3",
            "--exact",
        ])
        .unwrap();
        match cli.command {
            Command::Roundtrip(args) => {
                assert_eq!(args.encoding.scheme, Scheme::Qsm);
                assert_eq!(args.encoding.depth, 3);
                assert!(args.measure.exact);
                assert_eq!(args.measure.seed, 0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(
            Cli::try_parse_from(["qaudio", "encode", "--input", "a.csv", "--scheme", "frqi"])
                .is_err()
        );
        assert!(Cli::try_parse_from([
            "qaudio", "simulate", "--input", "c.json", "--shots", "5", "--exact"
        ])
        .is_err());
    }
}
