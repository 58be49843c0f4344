//! Command line front end: Fisher matrices, regime analysis, directional
//! deviation reports, gradient-flow curves, the full catalog sweep, and
//! convergence-model comparisons.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use obsgeom::directional::{default_mass, deviation_tensor};
use obsgeom::dynamics::{empirical_alpha, EmpiricalCurve, EtaPolicy};
use obsgeom::expfam::{ExpFamilyModel, FisherMatrix};
use obsgeom::harness::{
    compare_golden, emit_report, fmt_g, run_sweep, ReportFormat, SweepConfig, Tolerances,
};
use obsgeom::hypergraph::TopologyId;
use obsgeom::regime::{
    self, beta_of_alpha, c_star, minimize_alpha_numeric, ConvergenceModel, HessianMode,
    ModelKind, ALPHA_MAX,
};
use obsgeom::spectral::{eig_sym, Spectrum};
use obsgeom::{Error, Result};

#[derive(Parser)]
#[command(
    name = "obsgeom",
    version,
    about = "Exact Fisher geometry and learning-regime analysis for small spin systems"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct Observer {
    /// Catalog topology label (P3-P6, S4-S6, C4-C6, K3-K5).
    #[arg(long)]
    topology: TopologyId,
    /// Uniform edge coupling.
    #[arg(long = "J")]
    j: f64,
}

#[derive(Subcommand)]
enum Verb {
    /// Print the Fisher information matrix and its spectrum.
    Fisher {
        #[command(flatten)]
        observer: Observer,
        /// Emit machine-readable JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Closed-form and numeric regime analysis for one observer.
    Regime {
        #[command(flatten)]
        observer: Observer,
        /// Convergence-time model: A, B, C, D, or W.
        #[arg(long, default_value = "A")]
        model: String,
        /// Exponent of the generalized W family (also sets the c* formula).
        #[arg(long, default_value_t = 1.0)]
        w: f64,
        /// Loss Hessian mode: isotropic or fisher.
        #[arg(long, default_value = "isotropic")]
        hessian: String,
        #[arg(long)]
        json: bool,
    },
    /// Directional regime parameters and the deviation report.
    Directional {
        #[command(flatten)]
        observer: Observer,
        #[arg(long)]
        json: bool,
    },
    /// Measure gradient-flow iteration counts over an alpha grid.
    Dynamics {
        #[command(flatten)]
        observer: Observer,
        /// Grid as start:stop:step within [0, 0.999].
        #[arg(long = "alpha-grid", default_value = "0:0.99:0.01")]
        alpha_grid: String,
        /// Step-size policy: normalized or fixed.
        #[arg(long = "eta-policy", default_value = "normalized")]
        eta_policy: String,
        /// Write the curve to a file (.csv or .svg).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Run the full topology x coupling sweep.
    Sweep {
        /// Write the report to a file (.csv, .json, or .svg); default is
        /// CSV on standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Golden CSV to compare against; mismatches exit with status 2.
        #[arg(long)]
        golden: Option<PathBuf>,
        /// Default absolute tolerance for golden comparison. The default
        /// absorbs the quantization of the 10-significant-digit CSV format,
        /// so a freshly written sweep compares clean against itself.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Per-column tolerance override, as column=value (repeatable).
        #[arg(long = "tol-col")]
        tol_col: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Tabulate numeric minimizers of every convergence-time model.
    Models {
        #[command(flatten)]
        observer: Observer,
        /// Exponent of the generalized W family.
        #[arg(long, default_value_t = 1.0)]
        w: f64,
        #[arg(long)]
        json: bool,
    },
}

/// Die silently when the read end of a pipe closes (e.g. `obsgeom sweep | head`),
/// matching ordinary Unix tool behavior instead of panicking on EPIPE.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() {
    reset_sigpipe();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = i32::from(err.use_stderr());
            let _ = err.print();
            std::process::exit(code);
        }
    };
    match run(cli.verb) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(1);
        }
    }
}

fn parse_kind(s: &str, w: f64) -> Result<ModelKind> {
    match s {
        "A" | "a" => Ok(ModelKind::A),
        "B" | "b" => Ok(ModelKind::B),
        "C" | "c" => Ok(ModelKind::C),
        "D" | "d" => Ok(ModelKind::D),
        "W" | "w" => Ok(ModelKind::W(w)),
        other => Err(Error::Domain(format!(
            "unknown model '{other}' (expected A, B, C, D, or W)"
        ))),
    }
}

fn parse_hessian(s: &str) -> Result<HessianMode> {
    match s {
        "isotropic" | "iso" => Ok(HessianMode::Isotropic),
        "fisher" => Ok(HessianMode::Fisher),
        other => Err(Error::Domain(format!(
            "unknown Hessian mode '{other}' (expected isotropic or fisher)"
        ))),
    }
}

fn parse_policy(s: &str) -> Result<EtaPolicy> {
    match s {
        "normalized" => Ok(EtaPolicy::Normalized),
        "fixed" => Ok(EtaPolicy::Fixed),
        other => Err(Error::Domain(format!(
            "unknown eta policy '{other}' (expected normalized or fixed)"
        ))),
    }
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err(Error::Domain(format!(
            "grid '{s}' is not of the form start:stop:step"
        )));
    };
    let parse = |t: &str| -> Result<f64> {
        t.parse()
            .map_err(|_| Error::Domain(format!("unparseable grid number '{t}'")))
    };
    let (start, stop, step) = (parse(start)?, parse(stop)?, parse(step)?);
    if step.is_nan() || step <= 0.0 || !(0.0..=ALPHA_MAX).contains(&start) || stop < start || stop > ALPHA_MAX {
        return Err(Error::Domain(format!(
            "grid '{s}' must satisfy 0 <= start <= stop <= {ALPHA_MAX} with step > 0"
        )));
    }
    let count = ((stop - start) / step + 0.5).floor() as usize;
    Ok((0..=count)
        .map(|i| (start + i as f64 * step).min(stop))
        .collect())
}

fn observer_pieces(observer: &Observer) -> Result<(ExpFamilyModel, FisherMatrix, Spectrum)> {
    let model = ExpFamilyModel::uniform(&observer.topology, observer.j)?;
    let fisher = model.fisher()?;
    let spectrum = eig_sym(fisher.matrix())?;
    Ok((model, fisher, spectrum))
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable value"));
}

fn run(verb: Verb) -> Result<i32> {
    match verb {
        Verb::Fisher { observer, json } => fisher_verb(&observer, json),
        Verb::Regime { observer, model, w, hessian, json } => {
            regime_verb(&observer, &model, w, &hessian, json)
        }
        Verb::Directional { observer, json } => directional_verb(&observer, json),
        Verb::Dynamics { observer, alpha_grid, eta_policy, out, json } => {
            dynamics_verb(&observer, &alpha_grid, &eta_policy, out.as_deref(), json)
        }
        Verb::Sweep { out, golden, tol, tol_col, json } => {
            sweep_verb(out.as_deref(), golden.as_deref(), tol, &tol_col, json)
        }
        Verb::Models { observer, w, json } => models_verb(&observer, w, json),
    }
}

fn fisher_verb(observer: &Observer, json: bool) -> Result<i32> {
    let (_, fisher, spectrum) = observer_pieces(observer)?;
    let cond = spectrum.lambda_max() / spectrum.lambda_min();
    if json {
        print_json(&serde_json::json!({
            "topology": observer.topology.to_string(),
            "J": observer.j,
            "fisher": fisher.matrix(),
            "eigenvalues": spectrum.eigenvalues(),
            "cond_F": cond,
        }));
        return Ok(0);
    }
    println!("topology {}  J {}", observer.topology, fmt_g(observer.j));
    println!("fisher matrix:");
    for row in fisher.matrix().rows() {
        let cells: Vec<String> = row.iter().map(|&x| fmt_g(x)).collect();
        println!("  {}", cells.join("  "));
    }
    let eigs: Vec<String> = spectrum.eigenvalues().iter().map(|&x| fmt_g(x)).collect();
    println!("eigenvalues: {}", eigs.join("  "));
    println!("cond_F {}", fmt_g(cond));
    Ok(0)
}

fn regime_verb(observer: &Observer, model: &str, w: f64, hessian: &str, json: bool) -> Result<i32> {
    let (_, _, spectrum) = observer_pieces(observer)?;
    let kind = parse_kind(model, w)?;
    let mode = parse_hessian(hessian)?;
    let model = ConvergenceModel::new(kind, mode)?;
    let analysis = regime::analyze(
        &observer.topology.to_string(),
        observer.j,
        &spectrum,
        &model,
        w,
    )?;
    // Condition number of the combined metric at the optimal shift; its
    // square-root-free shifted counterpart (lambda+c*) ratio equals 2 in
    // the mixed regime.
    let cond_g = (analysis.lambda_max * (analysis.lambda_max + analysis.c_star))
        / (analysis.lambda_min * (analysis.lambda_min + analysis.c_star));
    if json {
        let mut value = serde_json::to_value(&analysis).expect("serializable analysis");
        value["cond_g_at_c_star"] = serde_json::json!(cond_g);
        print_json(&value);
        return Ok(0);
    }
    println!("topology {}", analysis.topology);
    for (key, x) in [
        ("J", analysis.j),
        ("lambda_min", analysis.lambda_min),
        ("lambda_max", analysis.lambda_max),
        ("cond_F", analysis.cond_f),
        ("gap", analysis.gap),
        ("c_star", analysis.c_star),
        ("alpha_pred", analysis.alpha_pred),
        ("alpha_num", analysis.alpha_num),
        ("abs_err", analysis.abs_err),
        ("speedup", analysis.speedup),
        ("cond_g_at_c_star", cond_g),
    ] {
        println!("{key} {}", fmt_g(x));
    }
    Ok(0)
}

fn directional_verb(observer: &Observer, json: bool) -> Result<i32> {
    let (_, fisher, spectrum) = observer_pieces(observer)?;
    let cs = c_star(&spectrum, 1.0)?;
    let beta = beta_of_alpha(regime::alpha_of_c(cs))?;
    let (_, report) = deviation_tensor(&fisher, &default_mass(&fisher), beta)?;
    if json {
        let mut value = serde_json::to_value(&report).expect("serializable report");
        value["eigenvalues"] = serde_json::json!(spectrum.eigenvalues());
        print_json(&value);
        return Ok(0);
    }
    println!("topology {}  J {}", observer.topology, fmt_g(observer.j));
    for (key, x) in [
        ("beta", report.beta),
        ("trace_ratio", report.trace_ratio),
        ("alpha_mean", report.alpha_mean),
        ("alpha_spread", report.alpha_spread),
        ("deviation_fraction", report.deviation_fraction),
    ] {
        println!("{key} {}", fmt_g(x));
    }
    println!("directions (grouped by eigenvalue multiplicity):");
    let mut k = 0usize;
    for (value, multiplicity) in spectrum.multiplets() {
        println!(
            "  lambda {} x{multiplicity}  alpha {}  deviation {}  {}",
            fmt_g(value),
            fmt_g(report.alpha_dir[k]),
            fmt_g(report.deviation_eigs[k]),
            report.classification[k]
        );
        k += multiplicity;
    }
    Ok(0)
}

fn dynamics_verb(
    observer: &Observer,
    alpha_grid: &str,
    eta_policy: &str,
    out: Option<&std::path::Path>,
    json: bool,
) -> Result<i32> {
    let (_, _, spectrum) = observer_pieces(observer)?;
    let grid = parse_grid(alpha_grid)?;
    let policy = parse_policy(eta_policy)?;
    let curve = empirical_alpha(&spectrum, policy, &grid)?;
    if let Some(path) = out {
        let bytes = match extension_of(path)? {
            "csv" => curve_csv(&curve),
            "svg" => curve_svg(&curve),
            other => {
                return Err(Error::Domain(format!(
                    "unsupported dynamics output extension '.{other}' (use .csv or .svg)"
                )))
            }
        };
        write_file(path, &bytes)?;
        return Ok(0);
    }
    if json {
        print_json(&serde_json::to_value(&curve).expect("serializable curve"));
        return Ok(0);
    }
    println!("alpha,iterations,converged");
    for p in &curve.points {
        println!("{},{},{}", fmt_g(p.alpha), p.iterations, u8::from(p.converged));
    }
    println!("argmin {}", fmt_g(curve.argmin));
    Ok(0)
}

fn curve_csv(curve: &EmpiricalCurve) -> Vec<u8> {
    let mut out = String::from("alpha,iterations,converged\n");
    for p in &curve.points {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_g(p.alpha),
            p.iterations,
            u8::from(p.converged)
        ));
    }
    out.into_bytes()
}

fn curve_svg(curve: &EmpiricalCurve) -> Vec<u8> {
    let (width, height, margin) = (800.0, 600.0, 50.0);
    let max_iter = curve.points.iter().map(|p| p.iterations).max().unwrap_or(1).max(1) as f64;
    let max_alpha = curve.points.last().map_or(1.0, |p| p.alpha).max(1e-9);
    let points: Vec<String> = curve
        .points
        .iter()
        .map(|p| {
            let x = margin + (width - 2.0 * margin) * p.alpha / max_alpha;
            let y = height - margin - (height - 2.0 * margin) * p.iterations as f64 / max_iter;
            format!("{x:.2},{y:.2}")
        })
        .collect();
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n<rect width=\"100%\" height=\"100%\" \
         fill=\"white\"/>\n<text x=\"{}\" y=\"30\" text-anchor=\"middle\" \
         font-family=\"monospace\" font-size=\"16\">iterations to tolerance vs alpha</text>\n\
         <polyline fill=\"none\" stroke=\"hsl(210,60%,40%)\" stroke-width=\"1.5\" \
         points=\"{}\"/>\n</svg>\n",
        width / 2.0,
        points.join(" ")
    )
    .into_bytes()
}

fn extension_of(path: &std::path::Path) -> Result<&str> {
    path.extension()
        .and_then(|e| e.to_str())
        .ok_or_else(|| Error::Domain(format!("output path {} has no extension", path.display())))
}

fn write_file(path: &std::path::Path, bytes: &[u8]) -> Result<()> {
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(bytes))
        .map_err(|e| Error::Domain(format!("cannot write {}: {e}", path.display())))
}

fn sweep_verb(
    out: Option<&std::path::Path>,
    golden: Option<&std::path::Path>,
    tol: f64,
    tol_col: &[String],
    json: bool,
) -> Result<i32> {
    let config = SweepConfig::default();
    let (records, summary) = run_sweep(&config)?;
    eprintln!(
        "{} records  mean_abs_err {}  max_abs_err {}  classical {}  mixed {}",
        summary.total,
        fmt_g(summary.mean_abs_err),
        fmt_g(summary.max_abs_err),
        summary.classical_count,
        summary.mixed_count
    );

    if let Some(path) = out {
        let format = match extension_of(path)? {
            "csv" => ReportFormat::Csv,
            "json" => ReportFormat::Json,
            "svg" => ReportFormat::Svg,
            other => {
                return Err(Error::Domain(format!(
                    "unsupported sweep output extension '.{other}' (use .csv, .json, or .svg)"
                )))
            }
        };
        write_file(path, &emit_report(&records, format)?)?;
    } else {
        let format = if json { ReportFormat::Json } else { ReportFormat::Csv };
        let bytes = emit_report(&records, format)?;
        std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| Error::Domain(format!("cannot write to stdout: {e}")))?;
    }

    if let Some(path) = golden {
        let bytes = std::fs::read(path)
            .map_err(|e| Error::Domain(format!("cannot read {}: {e}", path.display())))?;
        let mut tolerances = Tolerances::uniform(tol);
        for entry in tol_col {
            let Some((column, value)) = entry.split_once('=') else {
                return Err(Error::Domain(format!(
                    "tolerance override '{entry}' is not of the form column=value"
                )));
            };
            let value: f64 = value
                .parse()
                .map_err(|_| Error::Domain(format!("unparseable tolerance '{value}'")))?;
            tolerances = tolerances.with_column(column, value);
        }
        let check = compare_golden(&records, &bytes, &tolerances)?;
        if !check.passed {
            for diff in &check.diffs {
                eprintln!("golden mismatch: {diff}");
            }
            eprintln!("golden comparison failed with {} mismatches", check.diffs.len());
            return Ok(2);
        }
        eprintln!("golden comparison passed");
    }
    Ok(0)
}

fn models_verb(observer: &Observer, w: f64, json: bool) -> Result<i32> {
    let (_, _, spectrum) = observer_pieces(observer)?;
    let cs = c_star(&spectrum, w)?;
    let alpha_pred = regime::alpha_of_c(cs);
    let kinds = [
        ModelKind::A,
        ModelKind::B,
        ModelKind::C,
        ModelKind::D,
        ModelKind::W(w),
    ];
    let mut rows = Vec::new();
    for mode in [HessianMode::Isotropic, HessianMode::Fisher] {
        for kind in kinds {
            let model = ConvergenceModel::new(kind, mode)?;
            let opt = minimize_alpha_numeric(&spectrum, &model)?;
            rows.push((kind, mode, opt));
        }
    }
    if json {
        let entries: Vec<serde_json::Value> = rows
            .iter()
            .map(|(kind, mode, opt)| {
                serde_json::json!({
                    "model": kind.to_string(),
                    "hessian": mode.to_string(),
                    "alpha_num": opt.alpha,
                    "t_min": opt.value,
                    "boundary": opt.boundary,
                })
            })
            .collect();
        print_json(&serde_json::json!({
            "topology": observer.topology.to_string(),
            "J": observer.j,
            "c_star": cs,
            "alpha_pred": alpha_pred,
            "minimizers": entries,
        }));
        return Ok(0);
    }
    println!("topology {}  J {}", observer.topology, fmt_g(observer.j));
    println!("c_star {}  alpha_pred {}", fmt_g(cs), fmt_g(alpha_pred));
    println!("model  hessian    alpha_num     T_min         boundary");
    for (kind, mode, opt) in rows {
        println!(
            "{:<6} {:<10} {:<13} {:<13} {}",
            kind.to_string(),
            mode.to_string(),
            fmt_g(opt.alpha),
            fmt_g(opt.value),
            if opt.boundary { "yes" } else { "no" }
        );
    }
    Ok(0)
}
