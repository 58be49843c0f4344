//! Catalog sweep: every topology × coupling pair is run through the full
//! pipeline (model → Fisher → spectrum → regime analysis → directional
//! report) and flattened into flat records with deterministic ordering,
//! CSV/JSON/SVG emission, and golden-file comparison.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::directional::{default_mass, deviation_tensor};
use crate::expfam::ExpFamilyModel;
use crate::hypergraph::TopologyId;
use crate::regime::{self, ConvergenceModel};
use crate::spectral::eig_sym;
use crate::{Error, Result};

/// CSV schema, in emission order.
pub const COLUMNS: [&str; 17] = [
    "topology",
    "n_nodes",
    "n_edges",
    "J",
    "lambda_min",
    "lambda_max",
    "cond_F",
    "gap",
    "c_star",
    "alpha_pred",
    "alpha_num",
    "abs_err",
    "speedup",
    "alpha_spread",
    "trace_ratio",
    "deviation_fraction",
    "boundary_flag",
];

/// The default coupling grid.
pub fn default_couplings() -> Vec<f64> {
    vec![0.1, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5]
}

/// Sweep plan: which observers, which couplings, which time functional.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub topologies: Vec<TopologyId>,
    pub couplings: Vec<f64>,
    pub model: ConvergenceModel,
    pub w: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            topologies: TopologyId::catalog(),
            couplings: default_couplings(),
            model: ConvergenceModel::model_a(),
            w: 1.0,
        }
    }
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        if self.topologies.is_empty() || self.couplings.is_empty() {
            return Err(Error::Domain("sweep plan is empty".into()));
        }
        for &j in &self.couplings {
            if !(0.1..=1.5).contains(&j) {
                return Err(Error::Domain(format!(
                    "coupling J = {j} outside the calibrated range [0.1, 1.5]"
                )));
            }
        }
        if !(self.w > 0.0 && self.w.is_finite()) {
            return Err(Error::Domain(format!("exponent w = {} must be positive", self.w)));
        }
        Ok(())
    }

    fn pairs(&self) -> Vec<(TopologyId, f64)> {
        let mut out = Vec::with_capacity(self.topologies.len() * self.couplings.len());
        for id in &self.topologies {
            let mut js = self.couplings.clone();
            js.sort_by(|a, b| a.partial_cmp(b).expect("finite couplings"));
            for j in js {
                out.push((*id, j));
            }
        }
        out
    }
}

/// One row of the sweep report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub topology: String,
    pub n_nodes: usize,
    pub n_edges: usize,
    #[serde(rename = "J")]
    pub j: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    #[serde(rename = "cond_F")]
    pub cond_f: f64,
    pub gap: f64,
    pub c_star: f64,
    pub alpha_pred: f64,
    pub alpha_num: f64,
    pub abs_err: f64,
    pub speedup: f64,
    pub alpha_spread: f64,
    pub trace_ratio: f64,
    pub deviation_fraction: f64,
    pub boundary_flag: bool,
}

/// Aggregates over one sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub total: usize,
    pub mean_abs_err: f64,
    pub max_abs_err: f64,
    /// Records with cond_F ≤ 2 (no interior optimum).
    pub classical_count: usize,
    /// Records with cond_F > 2.
    pub mixed_count: usize,
}

/// Report encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Svg,
}

fn annotate(err: Error, id: &TopologyId, j: f64) -> Error {
    let wrap = |m: String| format!("{id} at J = {j}: {m}");
    match err {
        Error::Domain(m) => Error::Domain(wrap(m)),
        Error::Resource(m) => Error::Resource(wrap(m)),
        Error::Numeric(m) => Error::Numeric(wrap(m)),
        Error::Degenerate(m) => Error::Degenerate(wrap(m)),
        Error::Instability(m) => Error::Instability(wrap(m)),
        Error::Dimension(m) => Error::Dimension(wrap(m)),
        Error::Schema(m) => Error::Schema(wrap(m)),
        Error::UnknownTopology(m) => Error::UnknownTopology(wrap(m)),
    }
}

fn record_for(id: &TopologyId, j: f64, model: &ConvergenceModel, w: f64) -> Result<SweepRecord> {
    let exp = ExpFamilyModel::uniform(id, j)?;
    let fisher = exp.fisher()?;
    let spectrum = eig_sym(fisher.matrix())?;
    let label = id.to_string();
    let analysis = regime::analyze(&label, j, &spectrum, model, w)?;
    let optimum = regime::minimize_alpha_numeric(&spectrum, model)?;
    let beta = regime::beta_of_alpha(analysis.alpha_pred)?;
    let (_, report) = deviation_tensor(&fisher, &default_mass(&fisher), beta)?;
    Ok(SweepRecord {
        topology: label,
        n_nodes: exp.host().node_count(),
        n_edges: exp.host().edge_count(),
        j,
        lambda_min: analysis.lambda_min,
        lambda_max: analysis.lambda_max,
        cond_f: analysis.cond_f,
        gap: analysis.gap,
        c_star: analysis.c_star,
        alpha_pred: analysis.alpha_pred,
        alpha_num: analysis.alpha_num,
        abs_err: analysis.abs_err,
        speedup: analysis.speedup,
        alpha_spread: report.alpha_spread,
        trace_ratio: report.trace_ratio,
        deviation_fraction: report.deviation_fraction,
        boundary_flag: optimum.boundary,
    })
}

fn summarize(records: &[SweepRecord]) -> SweepSummary {
    let total = records.len();
    let mean = records.iter().map(|r| r.abs_err).sum::<f64>() / total.max(1) as f64;
    let max = records.iter().map(|r| r.abs_err).fold(0.0f64, f64::max);
    let classical = records.iter().filter(|r| r.cond_f <= 2.0).count();
    SweepSummary {
        total,
        mean_abs_err: mean,
        max_abs_err: max,
        classical_count: classical,
        mixed_count: total - classical,
    }
}

/// Runs the configured sweep with records computed in parallel; the output
/// order is always catalog order then ascending J, independent of
/// scheduling. A failing configuration aborts the sweep, named in the error.
pub fn run_sweep(config: &SweepConfig) -> Result<(Vec<SweepRecord>, SweepSummary)> {
    config.validate()?;
    let records = config
        .pairs()
        .par_iter()
        .map(|(id, j)| record_for(id, *j, &config.model, config.w).map_err(|e| annotate(e, id, *j)))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&records);
    Ok((records, summary))
}

/// Single-threaded variant of `run_sweep`; produces identical records.
pub fn run_sweep_serial(config: &SweepConfig) -> Result<(Vec<SweepRecord>, SweepSummary)> {
    config.validate()?;
    let records = config
        .pairs()
        .iter()
        .map(|(id, j)| record_for(id, *j, &config.model, config.w).map_err(|e| annotate(e, id, *j)))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&records);
    Ok((records, summary))
}

/// Formats a float with 10 significant digits, using fixed notation for
/// moderate exponents and scientific notation otherwise, with trailing
/// zeros trimmed (the conventional %g behavior).
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let sci = format!("{x:.9e}");
    let (_, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..10).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        trim_trailing_zeros(format!("{x:.decimals$}"))
    } else {
        let (mantissa, _) = sci.split_once('e').expect("scientific notation");
        let mantissa = trim_trailing_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    }
}

fn trim_trailing_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn column_text(record: &SweepRecord, column: &str) -> String {
    match column {
        "topology" => record.topology.clone(),
        "n_nodes" => record.n_nodes.to_string(),
        "n_edges" => record.n_edges.to_string(),
        "boundary_flag" => if record.boundary_flag { "1" } else { "0" }.to_string(),
        _ => fmt_g(column_number(record, column).expect("numeric column")),
    }
}

fn column_number(record: &SweepRecord, column: &str) -> Option<f64> {
    Some(match column {
        "n_nodes" => record.n_nodes as f64,
        "n_edges" => record.n_edges as f64,
        "J" => record.j,
        "lambda_min" => record.lambda_min,
        "lambda_max" => record.lambda_max,
        "cond_F" => record.cond_f,
        "gap" => record.gap,
        "c_star" => record.c_star,
        "alpha_pred" => record.alpha_pred,
        "alpha_num" => record.alpha_num,
        "abs_err" => record.abs_err,
        "speedup" => record.speedup,
        "alpha_spread" => record.alpha_spread,
        "trace_ratio" => record.trace_ratio,
        "deviation_fraction" => record.deviation_fraction,
        "boundary_flag" => {
            if record.boundary_flag {
                1.0
            } else {
                0.0
            }
        }
        _ => return None,
    })
}

fn emit_csv(records: &[SweepRecord]) -> Vec<u8> {
    let mut out = String::new();
    out.push_str(&COLUMNS.join(","));
    out.push('\n');
    for record in records {
        let cells: Vec<String> = COLUMNS.iter().map(|c| column_text(record, c)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

fn emit_svg(records: &[SweepRecord]) -> Vec<u8> {
    let (width, height, margin) = (800.0, 600.0, 50.0);
    let plot_w = width - 2.0 * margin;
    let plot_h = height - 2.0 * margin;
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<line x1=\"{margin}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        height - margin,
        width - margin,
        height - margin
    ));
    out.push_str(&format!(
        "<line x1=\"{margin}\" y1=\"{margin}\" x2=\"{margin}\" y2=\"{}\" stroke=\"black\"/>\n",
        height - margin
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"30\" text-anchor=\"middle\" font-family=\"monospace\" \
         font-size=\"16\">relative convergence time vs shift c</text>\n",
        width / 2.0
    ));
    for (idx, record) in records.iter().enumerate() {
        let (lo, hi) = (record.lambda_min, record.lambda_max);
        let time = |c: f64| (hi * (hi + c)).powi(2) / (lo * (lo + c));
        let c_max = (2.0 * record.c_star).max(hi).max(1e-6);
        let t0 = time(0.0);
        let samples = 200usize;
        let mut points = Vec::with_capacity(samples + 1);
        for s in 0..=samples {
            let c = c_max * s as f64 / samples as f64;
            let rel = (time(c) / t0).min(1.5);
            let x = margin + plot_w * s as f64 / samples as f64;
            let y = height - margin - plot_h * (rel / 1.5);
            points.push(format!("{x:.2},{y:.2}"));
        }
        let hue = (idx * 137) % 360;
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"hsl({hue},60%,40%)\" stroke-width=\"1\" \
             points=\"{}\"><title>{} J={}</title></polyline>\n",
            points.join(" "),
            record.topology,
            fmt_g(record.j)
        ));
    }
    out.push_str("</svg>\n");
    out.into_bytes()
}

/// Serializes records as CSV (exact `COLUMNS` order, 10 significant
/// digits), JSON (same field names), or SVG (relative Model A time curves;
/// presentation only).
pub fn emit_report(records: &[SweepRecord], format: ReportFormat) -> Result<Vec<u8>> {
    if records.is_empty() {
        return Err(Error::Domain("no records to report".into()));
    }
    Ok(match format {
        ReportFormat::Csv => emit_csv(records),
        ReportFormat::Json => {
            let mut bytes =
                serde_json::to_vec_pretty(records).expect("records serialize infallibly");
            bytes.push(b'\n');
            bytes
        }
        ReportFormat::Svg => emit_svg(records),
    })
}

/// Per-column absolute tolerances for golden comparisons.
#[derive(Debug, Clone)]
pub struct Tolerances {
    default: f64,
    per_column: BTreeMap<String, f64>,
}

impl Tolerances {
    pub fn uniform(default: f64) -> Self {
        Self { default, per_column: BTreeMap::new() }
    }

    pub fn with_column(mut self, column: &str, tol: f64) -> Self {
        self.per_column.insert(column.to_string(), tol);
        self
    }

    fn for_column(&self, column: &str) -> f64 {
        self.per_column.get(column).copied().unwrap_or(self.default)
    }
}

/// One tolerance violation found by `compare_golden`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenDiff {
    pub topology: String,
    pub j: f64,
    pub column: String,
    pub expected: String,
    pub actual: String,
}

impl std::fmt::Display for GoldenDiff {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} J={}: {} expected {} got {}",
            self.topology,
            fmt_g(self.j),
            self.column,
            self.expected,
            self.actual
        )
    }
}

/// Outcome of a golden comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenCheck {
    pub passed: bool,
    pub diffs: Vec<GoldenDiff>,
}

/// Compares records against a golden CSV. The golden header may be any
/// subset of `COLUMNS` that includes the `topology` and `J` keys; golden
/// rows are matched to records by those keys, numeric cells are compared
/// within the per-column absolute tolerance, and non-numeric cells must
/// match exactly. Records absent from the golden file are ignored; golden
/// rows without a matching record are violations.
pub fn compare_golden(
    records: &[SweepRecord],
    golden: &[u8],
    tolerances: &Tolerances,
) -> Result<GoldenCheck> {
    let text = std::str::from_utf8(golden)
        .map_err(|e| Error::Schema(format!("golden file is not UTF-8: {e}")))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Schema("golden file is empty".into()))?
        .split(',')
        .map(|c| c.trim().to_string())
        .collect();
    for column in &header {
        if !COLUMNS.contains(&column.as_str()) {
            return Err(Error::Schema(format!("unknown golden column '{column}'")));
        }
    }
    let key = |name: &str| header.iter().position(|c| c == name);
    let (topo_idx, j_idx) = match (key("topology"), key("J")) {
        (Some(t), Some(j)) => (t, j),
        _ => {
            return Err(Error::Schema(
                "golden header must include 'topology' and 'J'".into(),
            ))
        }
    };

    let mut diffs = Vec::new();
    for (line_no, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(|c| c.trim()).collect();
        if cells.len() != header.len() {
            return Err(Error::Schema(format!(
                "golden row {} has {} cells for {} columns",
                line_no + 2,
                cells.len(),
                header.len()
            )));
        }
        let topology = cells[topo_idx].to_string();
        let j: f64 = cells[j_idx]
            .parse()
            .map_err(|_| Error::Schema(format!("unparseable J '{}'", cells[j_idx])))?;
        let Some(record) = records
            .iter()
            .find(|r| r.topology == topology && (r.j - j).abs() <= 1e-12)
        else {
            diffs.push(GoldenDiff {
                topology,
                j,
                column: "row".into(),
                expected: "a matching record".into(),
                actual: "none".into(),
            });
            continue;
        };
        for (column, cell) in header.iter().zip(&cells) {
            if column == "topology" {
                continue;
            }
            let ok = match (cell.parse::<f64>(), column_number(record, column)) {
                (Ok(expected), Some(actual)) => {
                    (expected - actual).abs() <= tolerances.for_column(column)
                }
                _ => *cell == column_text(record, column),
            };
            if !ok {
                diffs.push(GoldenDiff {
                    topology: record.topology.clone(),
                    j,
                    column: column.clone(),
                    expected: (*cell).to_string(),
                    actual: column_text(record, column),
                });
            }
        }
    }
    Ok(GoldenCheck { passed: diffs.is_empty(), diffs })
}
