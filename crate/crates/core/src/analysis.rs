//! Reconstruction metrics, representation comparison tables and histogram
//! rendering (CSV and SVG).

use std::collections::BTreeMap;
use std::fmt::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::audio::DigitalAudio;
use crate::circuit::{resource_report, ResourceReport, Scheme};
use crate::codecs::Unobserved;
use crate::sim::{format_outcome, Histogram, Outcomes, Probabilities, SimError};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("signals have {reference} and {reconstructed} samples")]
    LengthMismatch {
        reference: usize,
        reconstructed: usize,
    },
    #[error("signals have {reference} and {reconstructed} channels")]
    ChannelMismatch {
        reference: usize,
        reconstructed: usize,
    },
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Signal-to-noise ratio, `10 log10(sum ref^2 / sum err^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Snr {
    Db(f64),
    /// Zero error against a non-silent reference.
    Lossless,
    /// Silent reference: the ratio has no meaningful value.
    Undefined,
}

impl fmt::Display for Snr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Snr::Db(db) => write!(f, "{db:.3} dB"),
            Snr::Lossless => f.write_str("lossless"),
            Snr::Undefined => f.write_str("undefined"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionReport {
    pub max_abs_error: f64,
    pub mean_squared_error: f64,
    pub snr: Snr,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    /// `(channel, index)` pairs decoded without measurement data.
    pub warnings: Vec<(usize, usize)>,
}

impl ReconstructionReport {
    pub fn with_shots(mut self, shots: u64) -> Self {
        self.shots = Some(shots);
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = Some(scheme);
        self
    }

    pub fn with_warnings(mut self, unobserved: &[Unobserved]) -> Self {
        self.warnings = unobserved.iter().map(|u| (u.channel, u.index)).collect();
        self
    }
}

impl fmt::Display for ReconstructionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(scheme) = self.scheme {
            writeln!(f, "scheme:         {}", scheme.label())?;
        }
        match self.shots {
            Some(shots) => writeln!(f, "shots:          {shots}")?,
            None => writeln!(f, "shots:          exact")?,
        }
        writeln!(f, "samples:        {}", self.samples)?;
        writeln!(f, "max abs error:  {:e}", self.max_abs_error)?;
        writeln!(f, "mse:            {:e}", self.mean_squared_error)?;
        writeln!(f, "snr:            {}", self.snr)?;
        if !self.warnings.is_empty() {
            let list: Vec<String> = self
                .warnings
                .iter()
                .map(|(c, i)| format!("{c}:{i}"))
                .collect();
            writeln!(f, "unobserved:     {}", list.join(" "))?;
        }
        Ok(())
    }
}

/// Error metrics of `reconstructed` against `reference`, over all channels.
pub fn compare(
    reference: &DigitalAudio,
    reconstructed: &DigitalAudio,
) -> Result<ReconstructionReport, AnalysisError> {
    if reference.num_channels() != reconstructed.num_channels() {
        return Err(AnalysisError::ChannelMismatch {
            reference: reference.num_channels(),
            reconstructed: reconstructed.num_channels(),
        });
    }
    if reference.len() != reconstructed.len() {
        return Err(AnalysisError::LengthMismatch {
            reference: reference.len(),
            reconstructed: reconstructed.len(),
        });
    }
    let mut max_abs_error: f64 = 0.0;
    let mut err_energy = 0.0;
    let mut ref_energy = 0.0;
    for (a, b) in reference.channels().iter().zip(reconstructed.channels()) {
        for (&x, &y) in a.iter().zip(b) {
            let e = y - x;
            max_abs_error = max_abs_error.max(e.abs());
            err_energy += e * e;
            ref_energy += x * x;
        }
    }
    let samples = reference.len() * reference.num_channels();
    let snr = if ref_energy == 0.0 {
        Snr::Undefined
    } else if err_energy == 0.0 {
        Snr::Lossless
    } else {
        Snr::Db(10.0 * (ref_energy / err_energy).log10())
    };
    Ok(ReconstructionReport {
        max_abs_error,
        mean_squared_error: err_energy / samples as f64,
        snr,
        samples,
        shots: None,
        scheme: None,
        warnings: Vec::new(),
    })
}

/// Resource estimates for every representation at one problem size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub n_samples: usize,
    pub depth: u32,
    pub channels: usize,
    pub rows: Vec<ResourceReport>,
}

impl ComparisonTable {
    pub fn row(&self, scheme: Scheme) -> Option<&ResourceReport> {
        self.rows.iter().find(|r| r.scheme == scheme)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "scheme,qubits,value_setting_ops,basic_instructions,complexity,retrieval\n",
        );
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.scheme.label(),
                r.qubits,
                r.value_setting_ops,
                r.basic_instructions,
                r.complexity,
                r.retrieval
            )
            .unwrap();
        }
        out
    }
}

impl fmt::Display for ComparisonTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "N = {}, q = {}, C = {}",
            self.n_samples, self.depth, self.channels
        )?;
        writeln!(
            f,
            "{:<8} {:>7} {:>14} {:>20}  {:<14} retrieval",
            "scheme", "qubits", "value-setting", "basic instructions", "preparation"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<8} {:>7} {:>14} {:>20}  {:<14} {}",
                r.scheme.label(),
                r.qubits,
                r.value_setting_ops,
                r.basic_instructions,
                r.complexity,
                r.retrieval
            )?;
        }
        Ok(())
    }
}

pub fn scheme_comparison_table(n_samples: usize, depth: u32, channels: usize) -> ComparisonTable {
    ComparisonTable {
        n_samples,
        depth,
        channels,
        rows: Scheme::ALL
            .into_iter()
            .map(|s| resource_report(s, n_samples, depth, channels))
            .collect(),
    }
}

/// Counts as CSV: header `outcome,count`, quoted bitstrings, ascending order.
pub fn histogram_to_csv(hist: &Histogram) -> String {
    let mut out = String::from("outcome,count\n");
    for (&outcome, &count) in hist.counts() {
        writeln!(
            out,
            "\"{}\",{count}",
            format_outcome(outcome, hist.n_qubits())
        )
        .unwrap();
    }
    out
}

/// Exact probabilities in the same layout. Values always carry a decimal
/// point so [`read_outcomes_csv`] can tell the two apart.
pub fn probabilities_to_csv(probs: &Probabilities) -> String {
    let mut out = String::from("outcome,count\n");
    for (&outcome, &p) in probs.probs() {
        writeln!(
            out,
            "\"{}\",{p:?}",
            format_outcome(outcome, probs.n_qubits())
        )
        .unwrap();
    }
    out
}

/// Either kind of outcome table read back from CSV.
#[derive(Debug, Clone, PartialEq)]
pub enum OutcomeTable {
    Counts(Histogram),
    Exact(Probabilities),
}

impl OutcomeTable {
    pub fn as_outcomes(&self) -> &dyn Outcomes {
        match self {
            OutcomeTable::Counts(h) => h,
            OutcomeTable::Exact(p) => p,
        }
    }

    pub fn to_csv(&self) -> String {
        match self {
            OutcomeTable::Counts(h) => histogram_to_csv(h),
            OutcomeTable::Exact(p) => probabilities_to_csv(p),
        }
    }
}

/// Parses [`histogram_to_csv`] or [`probabilities_to_csv`] output.
///
/// The register width is the bitstring length; an empty table needs it from
/// `n_qubits`, which otherwise must match when given.
pub fn read_outcomes_csv(
    text: &str,
    n_qubits: Option<usize>,
) -> Result<OutcomeTable, AnalysisError> {
    let err = |line: usize, message: String| AnalysisError::Csv { line, message };
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.trim() == "outcome,count" => {}
        Some((i, header)) => {
            return Err(err(
                i + 1,
                format!("expected header outcome,count, found {header:?}"),
            ))
        }
        None => return Err(err(1, "missing header".into())),
    }

    let mut width = n_qubits;
    let mut raw: Vec<(u64, &str, usize)> = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let (key, value) = line
            .rsplit_once(',')
            .ok_or_else(|| err(line_no, "expected two fields".into()))?;
        let bits = key
            .trim()
            .strip_prefix('"')
            .and_then(|k| k.strip_suffix('"'))
            .ok_or_else(|| err(line_no, format!("outcome {key:?} must be quoted")))?;
        match width {
            Some(w) if w != bits.len() => {
                return Err(err(
                    line_no,
                    format!("outcome {bits:?} has {} bits, expected {w}", bits.len()),
                ))
            }
            _ => width = Some(bits.len()),
        }
        if bits.len() > 63 {
            return Err(err(line_no, "outcomes wider than 63 qubits".into()));
        }
        let outcome = if bits.is_empty() {
            0
        } else {
            if !bits.chars().all(|c| c == '0' || c == '1') {
                return Err(err(line_no, format!("outcome {bits:?} is not a bitstring")));
            }
            u64::from_str_radix(bits, 2).expect("checked binary digits")
        };
        raw.push((outcome, value.trim(), line_no));
    }
    let width = width.ok_or_else(|| err(1, "empty table needs a known register width".into()))?;

    let exact = raw.iter().any(|(_, v, _)| v.contains(['.', 'e', 'E']));
    if exact {
        let mut probs = BTreeMap::new();
        for (outcome, value, line_no) in raw {
            let p: f64 = value
                .parse()
                .map_err(|_| err(line_no, format!("bad probability {value:?}")))?;
            if !p.is_finite() || p < 0.0 {
                return Err(err(line_no, format!("bad probability {value:?}")));
            }
            if probs.insert(outcome, p).is_some() {
                return Err(err(line_no, "duplicate outcome".into()));
            }
        }
        Ok(OutcomeTable::Exact(Probabilities::from_map(width, probs)?))
    } else {
        let mut counts = BTreeMap::new();
        for (outcome, value, line_no) in raw {
            let c: u64 = value
                .parse()
                .map_err(|_| err(line_no, format!("bad count {value:?}")))?;
            if counts.insert(outcome, c).is_some() {
                return Err(err(line_no, "duplicate outcome".into()));
            }
        }
        Ok(OutcomeTable::Counts(Histogram::from_counts(width, counts)?))
    }
}

/// Bar chart of normalized outcome weights as a standalone SVG document.
///
/// All coordinates are printed with fixed precision, so equal inputs give
/// byte-identical files.
pub fn plot_histogram(outcomes: &dyn Outcomes, title: &str) -> String {
    const BAR: f64 = 18.0;
    const GAP: f64 = 4.0;
    const PLOT_HEIGHT: f64 = 240.0;
    const MARGIN: f64 = 40.0;
    let entries = outcomes.entries();
    let total = outcomes.total();
    let n_bits = outcomes.n_qubits();
    let label_space = 8.0 + 7.0 * n_bits as f64;

    let width = 2.0 * MARGIN + entries.len().max(1) as f64 * (BAR + GAP);
    let height = PLOT_HEIGHT + 2.0 * MARGIN + label_space;
    let peak = entries.iter().map(|&(_, w)| w).fold(0.0, f64::max);
    let baseline = MARGIN + PLOT_HEIGHT;

    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.1}\" height=\"{height:.1}\" viewBox=\"0 0 {width:.1} {height:.1}\">"
    )
    .unwrap();
    writeln!(svg, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>").unwrap();
    writeln!(
        svg,
        "<text x=\"{MARGIN:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"14\">{}</text>",
        MARGIN / 2.0 + 5.0,
        escape_xml(title)
    )
    .unwrap();
    writeln!(
        svg,
        "<line x1=\"{MARGIN:.1}\" y1=\"{baseline:.1}\" x2=\"{:.1}\" y2=\"{baseline:.1}\" stroke=\"black\"/>",
        width - MARGIN
    )
    .unwrap();
    for (i, &(outcome, weight)) in entries.iter().enumerate() {
        let x = MARGIN + GAP / 2.0 + i as f64 * (BAR + GAP);
        let h = if peak > 0.0 {
            PLOT_HEIGHT * weight / peak
        } else {
            0.0
        };
        let freq = if total > 0.0 { weight / total } else { 0.0 };
        let label = format_outcome(outcome, n_bits);
        writeln!(
            svg,
            "<rect x=\"{x:.1}\" y=\"{:.3}\" width=\"{BAR:.1}\" height=\"{h:.3}\" fill=\"steelblue\"><title>{label}: {freq:.6}</title></rect>",
            baseline - h
        )
        .unwrap();
        let lx = x + BAR / 2.0 + 4.0;
        let ly = baseline + 6.0;
        writeln!(
            svg,
            "<text x=\"{lx:.1}\" y=\"{ly:.1}\" transform=\"rotate(90 {lx:.1} {ly:.1})\" font-family=\"monospace\" font-size=\"11\">{label}</text>"
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape_xml(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Retrieval;
    use proptest::prelude::*;

    fn mono(samples: Vec<f64>) -> DigitalAudio {
        DigitalAudio::mono(samples, 44_100).unwrap()
    }

    #[test]
    fn identical_signals() {
        let a = mono(vec![0.1, -0.5, 0.9]);
        let report = compare(&a, &a).unwrap();
        assert_eq!(report.max_abs_error, 0.0);
        assert_eq!(report.mean_squared_error, 0.0);
        assert_eq!(report.snr, Snr::Lossless);
    }

    #[test]
    fn constant_offset() {
        let report = compare(&mono(vec![0.0; 4]), &mono(vec![0.5; 4])).unwrap();
        assert_eq!(report.max_abs_error, 0.5);
        assert_eq!(report.mean_squared_error, 0.25);
        assert_eq!(report.snr, Snr::Undefined);
    }

    #[test]
    fn snr_in_decibels() {
        let report = compare(&mono(vec![1.0, -1.0]), &mono(vec![1.1, -1.1])).unwrap();
        match report.snr {
            Snr::Db(db) => assert!((db - 20.0).abs() < 1e-9),
            other => panic!("expected dB, got {other:?}"),
        }
    }

    #[test]
    fn shape_mismatches() {
        assert!(matches!(
            compare(&mono(vec![0.0; 3]), &mono(vec![0.0; 4])),
            Err(AnalysisError::LengthMismatch {
                reference: 3,
                reconstructed: 4
            })
        ));
        let stereo = DigitalAudio::new(vec![vec![0.0; 3], vec![0.0; 3]], 44_100).unwrap();
        assert!(matches!(
            compare(&mono(vec![0.0; 3]), &stereo),
            Err(AnalysisError::ChannelMismatch { .. })
        ));
    }

    #[test]
    fn comparison_table_sizes() {
        let small = scheme_comparison_table(64, 16, 1);
        let qubits: Vec<usize> = [Scheme::Qpam, Scheme::Sqpam, Scheme::Qsm]
            .iter()
            .map(|&s| small.row(s).unwrap().qubits)
            .collect();
        assert_eq!(qubits, vec![6, 7, 22]);
        let long = scheme_comparison_table(65536, 16, 1);
        let qubits: Vec<usize> = [Scheme::Qpam, Scheme::Sqpam, Scheme::Qsm]
            .iter()
            .map(|&s| long.row(s).unwrap().qubits)
            .collect();
        assert_eq!(qubits, vec![16, 17, 32]);
        assert_eq!(
            small.row(Scheme::Qpam).unwrap().retrieval,
            Retrieval::Probabilistic
        );
        assert_eq!(
            small.row(Scheme::Qsm).unwrap().retrieval,
            Retrieval::Deterministic
        );
    }

    #[test]
    fn comparison_table_csv() {
        let csv = scheme_comparison_table(64, 16, 2).to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next(),
            Some("scheme,qubits,value_setting_ops,basic_instructions,complexity,retrieval")
        );
        assert_eq!(lines.next(), Some("QPAM,6,63,64,O(N),Probabilistic"));
        assert!(csv.contains("MQSM,23,128,12288,O(CqN log N),Deterministic\n"));
        assert_eq!(csv.lines().count(), 8);
    }

    #[test]
    fn histogram_csv_layout() {
        let hist = Histogram::from_counts(3, BTreeMap::from([(5, 2), (0, 7), (3, 1)])).unwrap();
        assert_eq!(
            histogram_to_csv(&hist),
            "outcome,count\n\"000\",7\n\"011\",1\n\"101\",2\n"
        );
        let back = read_outcomes_csv(&histogram_to_csv(&hist), None).unwrap();
        assert_eq!(back, OutcomeTable::Counts(hist));
    }

    #[test]
    fn probability_csv_round_trip() {
        let probs = Probabilities::from_map(2, BTreeMap::from([(0, 0.25), (3, 0.75)])).unwrap();
        let text = probabilities_to_csv(&probs);
        assert_eq!(text, "outcome,count\n\"00\",0.25\n\"11\",0.75\n");
        assert_eq!(
            read_outcomes_csv(&text, None).unwrap(),
            OutcomeTable::Exact(probs)
        );
        let one = Probabilities::from_map(1, BTreeMap::from([(1, 1.0)])).unwrap();
        assert!(matches!(
            read_outcomes_csv(&probabilities_to_csv(&one), None).unwrap(),
            OutcomeTable::Exact(_)
        ));
    }

    #[test]
    fn csv_errors() {
        assert!(read_outcomes_csv("", None).is_err());
        assert!(read_outcomes_csv("bits,n\n", None).is_err());
        assert!(read_outcomes_csv("outcome,count\n01,3\n", None).is_err());
        assert!(read_outcomes_csv("outcome,count\n\"01\",3\n\"1\",2\n", None).is_err());
        assert!(read_outcomes_csv("outcome,count\n\"0a\",3\n", None).is_err());
        assert!(read_outcomes_csv("outcome,count\n\"01\",-3\n", None).is_err());
        assert!(read_outcomes_csv("outcome,count\n\"01\",3\n\"01\",1\n", None).is_err());
        assert!(read_outcomes_csv("outcome,count\n", None).is_err());
        assert!(matches!(
            read_outcomes_csv("outcome,count\n", Some(2)),
            Ok(OutcomeTable::Counts(h)) if h.shots() == 0
        ));
        assert!(matches!(
            read_outcomes_csv("outcome,count\n\"011\",3\n", Some(2)),
            Err(AnalysisError::Csv { line: 2, .. })
        ));
    }

    #[test]
    fn svg_is_deterministic() {
        let hist = Histogram::from_counts(2, BTreeMap::from([(0, 3), (2, 1)])).unwrap();
        let a = plot_histogram(&hist, "a<b");
        assert_eq!(a, plot_histogram(&hist, "a<b"));
        assert!(a.starts_with("<svg"));
        assert!(a.contains("a&lt;b"));
        assert_eq!(a.matches("fill=\"steelblue\"").count(), 2);
        assert!(a.contains("<title>00: 0.750000</title>"));
    }

    proptest! {
        #[test]
        fn histogram_csv_round_trips(counts in prop::collection::btree_map(0u64..64, 1u64..1000, 0..20)) {
            let hist = Histogram::from_counts(6, counts).unwrap();
            let back = read_outcomes_csv(&histogram_to_csv(&hist), Some(6)).unwrap();
            prop_assert_eq!(back, OutcomeTable::Counts(hist));
        }

        #[test]
        fn table_qubits_follow_register_formulas(n_exp in 0u32..20, q in 1u32..33, c_exp in 0u32..4) {
            let n = 1usize << n_exp;
            let c = 1usize << c_exp;
            let table = scheme_comparison_table(n, q, c);
            let ln = n_exp as usize;
            let lc = c_exp as usize;
            prop_assert_eq!(table.row(Scheme::Qpam).unwrap().qubits, ln);
            prop_assert_eq!(table.row(Scheme::Sqpam).unwrap().qubits, ln + 1);
            prop_assert_eq!(table.row(Scheme::Qsm).unwrap().qubits, ln + q as usize);
            prop_assert_eq!(table.row(Scheme::Mqsm).unwrap().qubits, ln + q as usize + lc);
            prop_assert_eq!(table.row(Scheme::Msqpam).unwrap().qubits, ln + 1 + lc);
        }
    }
}
