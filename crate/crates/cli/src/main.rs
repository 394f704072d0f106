//! `lolight3`: batch analyses of metric specs with JSON or CSV reports.

mod output;

use clap::{Parser, Subcommand, ValueEnum};
use lolight3::acceptance::run_all;
use lolight3::classify::{classify, normalize_for_classification, ClassInput};
use lolight3::corpus;
use lolight3::curvature::{
    check_parallel_x, gauss_bonnet, leaf_holonomy_alpha, parallel_transport_loop, r_grid, LeafLoop, TRANSPORT_STEPS,
};
use lolight3::deform::{collinearity, path_for_generator, r_sup, verify_along_path, DeformPath};
use lolight3::model::{check_invariance, metric_coords, sample_points, MetricSpec};
use lolight3::normalform::{reduce_closed, reduce_diophantine, NormalForm};
use lolight3::transforms::{check_generator, make_generator, pullback, AffineMapSpec, GeneratorKind};
use lolight3::{Error, Result};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lolight3", version, about = "Lorentzian 3-manifolds with a parallel lightlike field")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Grid size per axis for sampled quantities.
    #[arg(long, global = true, default_value_t = 64)]
    grid: usize,
    /// Pass/fail tolerance; each command has its own default.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// `SPEC` is a path to a JSON spec or `corpus:NAME` for a bundled example.
#[derive(Subcommand)]
enum Command {
    /// Echo the validated spec with invariance checks.
    Inspect { spec: String },
    /// `r` on the grid at `x = 0`.
    Curvature { spec: String },
    /// Sup of `|∇∂x|` on the grid.
    CheckParallel { spec: String },
    /// `∫ r ω̄` on the grid.
    GaussBonnet { spec: String },
    /// Normal form and the coordinate change to it.
    Normalize { spec: String },
    /// Affine classification report.
    Classify { spec: String },
    /// Checks one generator on the spec's normal form.
    VerifyMap {
        spec: String,
        #[arg(long)]
        map: String,
        /// Comma list `name=value`, e.g. `ell=1,A=-1,B=0`.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        params: String,
    },
    /// Checks that a generator stays affine along a deformation to a flat metric.
    Deform {
        spec: String,
        #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
        t: Vec<f64>,
        /// Generator kind; defaults to the generators found by `classify`.
        #[arg(long)]
        map: Option<String>,
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        params: String,
    },
    /// Leaf holonomy at height `z`.
    Holonomy {
        spec: String,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
    },
    /// Runs the acceptance suite.
    Selftest,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Ok,
    Failed,
    Undecided,
}

impl Status {
    fn code(self) -> u8 {
        match self {
            Self::Ok => 0,
            Self::Failed => 1,
            Self::Undecided => 3,
        }
    }
}

struct Outcome {
    report: Value,
    status: Status,
    /// Command-specific table used by `--format csv` instead of the flattened report.
    csv: Option<String>,
}

impl Outcome {
    fn new(report: Value, passed: bool) -> Self {
        Self { report, status: if passed { Status::Ok } else { Status::Failed }, csv: None }
    }
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::VerificationFailed { .. } => 1,
        Error::CertificateMissing(_) => 3,
        _ => 2,
    }
}

fn load_spec(arg: &str) -> Result<MetricSpec> {
    if let Some(name) = arg.strip_prefix("corpus:") {
        let entry = corpus::get(name).ok_or_else(|| Error::InvalidSpec(format!("no bundled spec named {name:?}")))?;
        return entry.spec();
    }
    let text = std::fs::read_to_string(arg).map_err(|e| Error::InvalidSpec(format!("{arg}: {e}")))?;
    MetricSpec::from_json(&text)
}

fn parse_params(s: &str) -> Result<Vec<(String, f64)>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let (k, v) = t.split_once('=').ok_or_else(|| Error::InvalidSpec(format!("parameter {t:?} is not name=value")))?;
            let v = v.trim().parse::<f64>().map_err(|_| Error::InvalidSpec(format!("parameter {t:?} has a bad value")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn normal_form(spec: &MetricSpec) -> Result<NormalForm> {
    match normalize_for_classification(spec)? {
        ClassInput::Normal(nf) => Ok(nf),
        ClassInput::Torus(_) => Err(Error::InvalidSpec("this command needs a gamma lattice".into())),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable report")
}

fn family(spec: &MetricSpec) -> &'static str {
    if !spec.lattice.is_gamma() {
        "torus"
    } else if spec.theta.is_rational() {
        "closed"
    } else {
        "diophantine"
    }
}

fn inspect(spec: &MetricSpec, grid: usize, tol: f64) -> Outcome {
    let metric = metric_coords(spec);
    let invariance = check_invariance(&metric, &spec.lattice);
    let parallel = check_parallel_x(&metric, grid.min(16));
    let report = json!({
        "spec": to_value(spec),
        "family": family(spec),
        "theta_value": spec.theta_value(),
        "lattice_invariance": invariance,
        "parallel_residual": parallel,
        "gauss_bonnet": gauss_bonnet(spec, grid),
        "tol": tol,
    });
    Outcome::new(report, invariance < tol && parallel < tol)
}

fn curvature(spec: &MetricSpec, grid: usize) -> Outcome {
    let vals = r_grid(&metric_coords(spec), grid);
    let rows: Vec<Vec<f64>> = vals.chunks(grid).map(<[f64]>::to_vec).collect();
    let sup = vals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let mut csv = String::from("y,z,r\n");
    for (i, r) in vals.iter().enumerate() {
        let (y, z) = ((i / grid) as f64 / grid as f64, (i % grid) as f64 / grid as f64);
        csv.push_str(&format!("{},{},{}\n", output::format_float(y), output::format_float(z), output::format_float(*r)));
    }
    let report = json!({ "grid": grid, "x": 0.0, "rows_index": "y", "values": rows, "sup_abs": sup });
    Outcome { report, status: Status::Ok, csv: Some(csv) }
}

fn normalize(spec: &MetricSpec, tol: f64) -> Result<Outcome> {
    let (nf, change) = match family(spec) {
        "closed" => {
            let r = reduce_closed(spec)?;
            (NormalForm::Closed(r.nf), r.change)
        }
        "diophantine" => {
            let r = reduce_diophantine(spec)?;
            (NormalForm::Dio(r.nf), r.change)
        }
        _ => return Err(Error::InvalidSpec("torus specs have no normal-form reduction".into())),
    };
    let (g, h) = (metric_coords(spec), metric_coords(&nf.to_spec()));
    let mut residual = 0.0f64;
    for p in sample_points(16) {
        let (a, b) = (pullback(&g, &change, &p), h.eval(&p));
        for i in 0..3 {
            for j in 0..3 {
                residual = residual.max((a[i][j] - b[i][j]).abs());
            }
        }
    }
    let report = json!({
        "normal_form": to_value(&nf),
        "change": to_value(&change.descriptor()),
        "pullback_residual": residual,
        "tol": tol,
    });
    Ok(Outcome::new(report, residual < tol))
}

fn classify_cmd(spec: &MetricSpec, tol: f64) -> Result<Outcome> {
    let rep = classify(&normalize_for_classification(spec)?, &spec.arith)?;
    let checks_pass = rep.generator_checks.iter().all(|c| c.passes(tol, tol.max(1e-7)));
    let status = if rep.is_undecided() {
        Status::Undecided
    } else if checks_pass {
        Status::Ok
    } else {
        Status::Failed
    };
    Ok(Outcome { report: to_value(&rep), status, csv: None })
}

fn generator(spec: &MetricSpec, nf: &NormalForm, kind: &str, params: &str) -> Result<AffineMapSpec> {
    let kind: GeneratorKind = kind.parse()?;
    let params = parse_params(params)?;
    let borrowed: Vec<(&str, f64)> = params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    make_generator(kind, &borrowed, nf, &spec.arith)
}

fn verify_map(spec: &MetricSpec, kind: &str, params: &str, grid: usize, tol: f64) -> Result<Outcome> {
    let nf = normal_form(spec)?;
    let map = generator(spec, &nf, kind, params)?;
    let nf_spec = nf.to_spec();
    let check = check_generator(&metric_coords(&nf_spec), &nf_spec.lattice, &map, grid.min(16));
    let passed = check.passes(tol, tol.max(1e-7));
    let report = json!({ "map": to_value(&map.descriptor()), "check": to_value(&check), "passed": passed, "tol": tol });
    Ok(Outcome::new(report, passed))
}

fn deform(spec: &MetricSpec, ts: &[f64], kind: Option<&str>, params: &str) -> Result<Outcome> {
    let nf = normal_form(spec)?;
    let maps = match kind {
        Some(k) => vec![generator(spec, &nf, k, params)?],
        None => classify(&ClassInput::Normal(nf.clone()), &spec.arith)?.generator_maps,
    };
    let mut passed = true;
    let mut entries = Vec::new();
    if maps.is_empty() {
        let r0 = r_sup(&DeformPath::linear(nf.to_spec()), 0.0)?;
        entries.push(json!({ "map": Value::Null, "path": "linear", "r_sup_t0": r0 }));
    }
    for map in maps {
        let path = path_for_generator(&nf, &spec.arith, &map)?;
        let kind = if matches!(path, DeformPath::Linear(_)) { "linear" } else { "equivariant" };
        let r0 = r_sup(&path, 0.0)?;
        let mut entry = json!({ "map": to_value(&map.descriptor()), "path": kind, "r_sup_t0": r0 });
        match verify_along_path(&path, &map, ts) {
            Ok(ds) => {
                let cs: Vec<f64> = ds.iter().map(|d| d.c).collect();
                entry["samples"] = ts
                    .iter()
                    .zip(&ds)
                    .map(|(t, d)| json!({ "t": t, "C": d.c, "residual": d.residual, "spread": d.spread }))
                    .collect();
                entry["C_collinearity"] = json!(collinearity(ts, &cs));
                entry["passed"] = json!(true);
            }
            Err(Error::VerificationFailed { t, reason }) => {
                passed = false;
                entry["passed"] = json!(false);
                entry["failure"] = json!({ "t": t, "reason": reason });
            }
            Err(e) => return Err(e),
        }
        passed &= r0 < lolight3::deform::PATH_TOL;
        entries.push(entry);
    }
    Ok(Outcome::new(json!({ "t": ts, "paths": entries }), passed))
}

fn holonomy(spec: &MetricSpec, z: f64, tol: f64) -> Result<Outcome> {
    let alpha = leaf_holonomy_alpha(spec, z)?;
    let g1 = parallel_transport_loop(spec, z, LeafLoop::Gamma1, TRANSPORT_STEPS)?;
    let g2 = parallel_transport_loop(spec, z, LeafLoop::Gamma2, TRANSPORT_STEPS)?;
    let gap = |m: &[[f64; 2]; 2], e: [[f64; 2]; 2]| (0..4).map(|i| (m[i / 2][i % 2] - e[i / 2][i % 2]).abs()).fold(0.0, f64::max);
    let e1 = gap(&g1, [[1.0, 0.0], [0.0, 1.0]]);
    let e2 = gap(&g2, [[1.0, alpha], [0.0, 1.0]]);
    let report = json!({
        "z": z,
        "alpha": alpha,
        "gamma1": g1,
        "gamma2": g2,
        "gamma1_error": e1,
        "gamma2_error": e2,
        "steps": TRANSPORT_STEPS,
        "tol": tol,
    });
    Ok(Outcome::new(report, e1 < tol && e2 < tol))
}

fn selftest() -> Outcome {
    let results = run_all();
    for r in &results {
        eprintln!("{}", r.line());
    }
    let passed = results.iter().filter(|r| r.passed).count();
    let report = json!({ "criteria": to_value(&results), "passed": passed, "total": results.len() });
    Outcome::new(report, passed == results.len())
}

fn run(cli: &Cli) -> Result<Outcome> {
    let grid = cli.grid;
    if grid == 0 {
        return Err(Error::InvalidSpec("--grid must be positive".into()));
    }
    let tol = |default: f64| cli.tol.unwrap_or(default);
    match &cli.command {
        Command::Inspect { spec } => Ok(inspect(&load_spec(spec)?, grid, tol(1e-9))),
        Command::Curvature { spec } => Ok(curvature(&load_spec(spec)?, grid)),
        Command::CheckParallel { spec } => {
            let s = load_spec(spec)?;
            let residual = check_parallel_x(&metric_coords(&s), grid);
            let t = tol(1e-9);
            Ok(Outcome::new(json!({ "grid": grid, "residual": residual, "tol": t }), residual < t))
        }
        Command::GaussBonnet { spec } => {
            let s = load_spec(spec)?;
            let value = gauss_bonnet(&s, grid);
            let t = tol(1e-6);
            Ok(Outcome::new(json!({ "grid": grid, "integral": value, "tol": t }), value.abs() < t))
        }
        Command::Normalize { spec } => normalize(&load_spec(spec)?, tol(1e-8)),
        Command::Classify { spec } => classify_cmd(&load_spec(spec)?, tol(1e-8)),
        Command::VerifyMap { spec, map, params } => verify_map(&load_spec(spec)?, map, params, grid, tol(1e-8)),
        Command::Deform { spec, t, map, params } => {
            if t.is_empty() {
                return Err(Error::InvalidSpec("--t needs at least one value".into()));
            }
            deform(&load_spec(spec)?, t, map.as_deref(), params)
        }
        Command::Holonomy { spec, z } => holonomy(&load_spec(spec)?, *z, tol(1e-6)),
        Command::Selftest => Ok(selftest()),
    }
}

fn emit(cli: &Cli, text: &str) -> bool {
    match &cli.out {
        Some(path) => match std::fs::write(path, text) {
            Ok(()) => true,
            Err(e) => {
                eprintln!("error: cannot write {}: {e}", path.display());
                false
            }
        },
        None => {
            print!("{text}");
            true
        }
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(v) = std::env::var("LOLIGHT3_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| format!("LOLIGHT3_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let (report, code, csv) = match run(&cli) {
        Ok(o) => (o.report, o.status.code(), o.csv),
        Err(e) => {
            eprintln!("error: {e}");
            (json!({ "error": e.to_string() }), error_code(&e), None)
        }
    };
    let text = match cli.format {
        Format::Json => output::to_json(&report),
        Format::Csv => csv.unwrap_or_else(|| output::to_csv(&report)),
    };
    if !emit(&cli, &text) {
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
