//! Argument parsing, CSV I/O and command dispatch for the `pucell` binary.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use pucell::bench::{
    equispaced, node_max_error, run_accuracy_experiment, run_shape_sweep, run_timing_experiment, write_reports_csv,
    write_sweep_csv, BenchReport,
};
use pucell::model_io::{read_model, write_model};
use pucell::{
    build_pu_model, franke_at, grid_centers, grid_points, halton, rmse, DatasetSpec, FitOptions, KernelFamily,
    KernelSpec, Model, Point, UncoveredPolicy,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<pucell::Error> for CliError {
    fn from(e: pucell::Error) -> Self {
        use pucell::Error as E;
        match e {
            _ if e.is_numerical() => CliError::Numerical(e.to_string()),
            E::EmptySubdomain { .. } => CliError::Numerical(e.to_string()),
            E::InvalidArgument(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Write Halton nodes with Franke values as CSV.
    Gen,
    /// Fit a model to a node file and save it.
    Fit,
    /// Evaluate a saved model.
    Eval,
    /// RMSE on the evaluation grid for one configuration.
    Accuracy,
    /// RMSE across a range of shape parameters.
    Sweep,
    /// Cell-based versus linear-scan localisation times.
    Timing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Gaussian,
    Wendland,
}

impl From<KernelArg> for KernelFamily {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Gaussian => KernelFamily::Gaussian,
            KernelArg::Wendland => KernelFamily::WendlandC2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Error,
    Nearest,
}

impl From<PolicyArg> for UncoveredPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Error => UncoveredPolicy::Error,
            PolicyArg::Nearest => UncoveredPolicy::NearestLocal,
        }
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be positive and finite, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

/// Partition-of-unity RBF interpolation with cell-based localisation.
#[derive(Debug, Parser)]
#[command(name = "pucell", version, arg_required_else_help = true)]
struct Args {
    command: Command,
    /// Number of Halton nodes.
    #[arg(long, default_value = "4225", value_parser = positive_usize)]
    n: usize,
    /// Number of subdomains (a perfect square unless --centers is given).
    #[arg(long, default_value = "1024", value_parser = positive_usize)]
    d: usize,
    /// Evaluation grid side.
    #[arg(long, default_value = "33", value_parser = positive_usize)]
    side: usize,
    #[arg(long, value_enum, default_value = "wendland")]
    kernel: KernelArg,
    /// α² for the Gaussian, c for Wendland. Default 50 for Gaussian, 1 for Wendland.
    #[arg(long, value_parser = positive_f64)]
    shape: Option<f64>,
    /// Node CSV: x,y,f or x,y (with --franke).
    #[arg(long)]
    nodes: Option<PathBuf>,
    /// Centre CSV: x,y.
    #[arg(long)]
    centers: Option<PathBuf>,
    /// Output path (CSV, or the model file for `fit`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Saved model for `eval`.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Points to evaluate (x,y or x,y,f); defaults to the evaluation grid.
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "nearest")]
    policy: PolicyArg,
    #[arg(long, default_value = "3", value_parser = positive_usize)]
    repeats: usize,
    /// Fit subdomains in parallel.
    #[arg(long)]
    parallel: bool,
    /// Use Franke's function for values missing from the input.
    #[arg(long)]
    franke: bool,
    #[arg(long, value_parser = positive_f64)]
    sweep_min: Option<f64>,
    #[arg(long, value_parser = positive_f64)]
    sweep_max: Option<f64>,
    #[arg(long, default_value = "20", value_parser = positive_usize)]
    sweep_count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub spec: DatasetSpec,
    pub kernel: KernelSpec<f64>,
    pub nodes: Option<PathBuf>,
    pub centers: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub points: Option<PathBuf>,
    pub policy: UncoveredPolicy,
    pub repeats: usize,
    pub parallel: bool,
    pub franke: bool,
    pub sweep: (f64, f64, usize),
}

impl RunConfig {
    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            policy: self.policy,
            parallel: self.parallel,
            ..FitOptions::default()
        }
    }
}

/// Parses `argv` (including the program name). Help and version requests
/// come back as `clap::Error` too; callers print them via `Error::exit`.
pub fn parse_args<I, S>(argv: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let a = Args::try_parse_from(argv)?;
    let family = KernelFamily::from(a.kernel);
    let shape = a.shape.unwrap_or(match family {
        KernelFamily::Gaussian => 50.0,
        KernelFamily::WendlandC2 => 1.0,
    });
    let (lo, hi) = match family {
        KernelFamily::Gaussian => (1.0, 100.0),
        KernelFamily::WendlandC2 => (0.1, 2.0),
    };
    let sweep = (a.sweep_min.unwrap_or(lo), a.sweep_max.unwrap_or(hi), a.sweep_count);
    let usage = |msg: String| clap::Error::raw(clap::error::ErrorKind::ValueValidation, msg + "\n");
    if sweep.0 > sweep.1 {
        return Err(usage(format!("--sweep-min {} exceeds --sweep-max {}", sweep.0, sweep.1)));
    }
    if a.command == Command::Eval && a.model.is_none() {
        return Err(usage("`eval` needs --model PATH".into()));
    }
    Ok(RunConfig {
        command: a.command,
        spec: DatasetSpec::new(a.n, a.d, a.side).map_err(|e| usage(e.to_string()))?,
        kernel: KernelSpec::new(family, shape).map_err(|e| usage(e.to_string()))?,
        nodes: a.nodes,
        centers: a.centers,
        out: a.out,
        model: a.model,
        points: a.points,
        policy: a.policy.into(),
        repeats: a.repeats,
        parallel: a.parallel,
        franke: a.franke,
        sweep,
    })
}

/// Rows of a headerless point file: `x,y` or `x,y,f`, all in the unit square.
pub struct PointFile {
    pub points: Vec<Point>,
    pub values: Option<Vec<f64>>,
}

pub fn read_points(path: &Path) -> Result<PointFile, CliError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut width = None;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |msg: String| CliError::Data(format!("{}:{line}: {msg}", path.display()));
        if !matches!(rec.len(), 2 | 3) {
            return Err(bad(format!("expected 2 or 3 columns, found {}", rec.len())));
        }
        if *width.get_or_insert(rec.len()) != rec.len() {
            return Err(bad(format!("expected {} columns, found {}", width.unwrap(), rec.len())));
        }
        let nums = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| bad(format!("not a number: `{f}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        let p = Point::new(nums[0], nums[1]);
        if !p.in_unit_square() {
            return Err(bad(format!("point ({}, {}) lies outside the unit square", p.x, p.y)));
        }
        points.push(p);
        if let Some(&f) = nums.get(2) {
            if !f.is_finite() {
                return Err(bad(format!("non-finite value `{f}`")));
            }
            values.push(f);
        }
    }
    Ok(PointFile {
        points,
        values: (width == Some(3)).then_some(values),
    })
}

/// Writes `x,y[,f]` rows without a header, with round-trip float formatting.
pub fn write_points<W: Write>(out: W, points: &[Point], values: Option<&[f64]>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (i, p) in points.iter().enumerate() {
        let mut row = vec![p.x.to_string(), p.y.to_string()];
        if let Some(v) = values {
            row.push(v[i].to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn with_output<F>(path: Option<&Path>, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), Box<dyn std::error::Error>>,
{
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| io_err(p, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w).map_err(|e| io_err(p, e))?;
            w.flush().map_err(|e| io_err(p, e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock).map_err(|e| CliError::Data(format!("stdout: {e}")))
        }
    }
}

fn print_report(r: &BenchReport) {
    println!("n = {}, d = {}, evaluation grid {}x{}", r.n, r.d, r.s, r.s);
    println!("kernel = {} shape = {}", r.kernel, r.shape);
    println!("rmse = {:.6e}", r.rmse);
    println!("max node error = {:.3e}", r.node_max_error);
    println!("fit time = {:.3e} s, eval time = {:.3e} s", r.fit_time, r.eval_time);
    println!(
        "uncovered = {}, max overlap = {}, mean subdomain size = {:.2}, empty subdomains = {}",
        r.uncovered_count, r.max_overlap, r.mean_subdomain_size, r.empty_subdomains
    );
}

fn load_centers(cfg: &RunConfig) -> Result<Vec<Point>, CliError> {
    match &cfg.centers {
        Some(p) => Ok(read_points(p)?.points),
        None => Ok(grid_centers(cfg.spec.d)?),
    }
}

fn cmd_gen(cfg: &RunConfig) -> Result<(), CliError> {
    let nodes = halton::<f64>(cfg.spec.n);
    let values: Vec<f64> = nodes.iter().map(franke_at).collect();
    with_output(cfg.out.as_deref(), |w| Ok(write_points(w, &nodes, Some(&values))?))?;
    if cfg.out.is_some() {
        println!("wrote {} nodes", nodes.len());
    }
    Ok(())
}

fn cmd_fit(cfg: &RunConfig) -> Result<(), CliError> {
    let (nodes, values) = match &cfg.nodes {
        Some(path) => {
            let file = read_points(path)?;
            let values = match (file.values, cfg.franke) {
                (_, true) => file.points.iter().map(franke_at).collect(),
                (Some(v), false) => v,
                (None, false) => {
                    return Err(CliError::Data(format!(
                        "{}: two-column node file needs --franke to supply values",
                        path.display()
                    )))
                }
            };
            (file.points, values)
        }
        None => {
            let nodes = halton::<f64>(cfg.spec.n);
            let values = nodes.iter().map(franke_at).collect();
            (nodes, values)
        }
    };
    let centers = load_centers(cfg)?;
    let start = Instant::now();
    let model = build_pu_model(&nodes, &values, &centers, cfg.kernel, cfg.fit_options())?;
    let fit_time = start.elapsed().as_secs_f64();
    println!("n = {}, d = {}, kernel = {}", nodes.len(), centers.len(), cfg.kernel);
    println!("fit time = {fit_time:.3e} s");
    println!("max node error = {:.3e}", node_max_error(&model)?);
    println!(
        "empty subdomains = {}, mean subdomain size = {:.2}, LU fallbacks = {}",
        model.empty_subdomains(),
        model.mean_subdomain_size(),
        model.lu_fallbacks()
    );
    if let Some(out) = &cfg.out {
        with_output(Some(out), |w| Ok(write_model(&model, w)?))?;
        println!("model written to {}", out.display());
    }
    Ok(())
}

fn cmd_eval(cfg: &RunConfig) -> Result<(), CliError> {
    let path = cfg.model.as_deref().expect("checked by parse_args");
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut model: Model = read_model(BufReader::new(file)).map_err(|e| io_err(path, e))?;
    model.set_policy(cfg.policy);
    let (points, exact) = match &cfg.points {
        Some(p) => {
            let f = read_points(p)?;
            let exact = f.values.or_else(|| cfg.franke.then(|| f.points.iter().map(franke_at).collect()));
            (f.points, exact)
        }
        None => {
            let g = grid_points(cfg.spec.s_side)?;
            let exact = g.iter().map(franke_at).collect();
            (g, Some(exact))
        }
    };
    let start = Instant::now();
    let ev = model.evaluate(&points)?;
    let eval_time = start.elapsed().as_secs_f64();
    println!("points = {}, uncovered = {}", points.len(), ev.uncovered_count);
    println!("eval time = {eval_time:.3e} s");
    if let Some(exact) = exact {
        println!("rmse = {:.6e}", rmse(&exact, &ev.values)?);
    }
    if let Some(out) = &cfg.out {
        with_output(Some(out), |w| Ok(write_points(w, &points, Some(&ev.values))?))?;
    }
    Ok(())
}

fn cmd_accuracy(cfg: &RunConfig) -> Result<(), CliError> {
    let r = run_accuracy_experiment(cfg.spec, cfg.kernel, cfg.fit_options())?;
    print_report(&r);
    if let Some(out) = &cfg.out {
        with_output(Some(out), |w| Ok(write_reports_csv(w, std::slice::from_ref(&r))?))?;
    }
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let (lo, hi, count) = cfg.sweep;
    let shapes = equispaced(lo, hi, count);
    let points = run_shape_sweep::<f64>(cfg.spec, cfg.kernel.family(), &shapes, cfg.fit_options())?;
    println!("n = {}, d = {}, kernel = {}", cfg.spec.n, cfg.spec.d, cfg.kernel.family());
    for p in &points {
        match &p.error {
            Some(e) => println!("shape = {:<12} failed: {e}", p.shape),
            None if p.failed => println!("shape = {:<12} failed", p.shape),
            None => println!("shape = {:<12} rmse = {:.6e}", p.shape, p.rmse),
        }
    }
    if let Some(out) = &cfg.out {
        with_output(Some(out), |w| Ok(write_sweep_csv(w, &points)?))?;
    }
    Ok(())
}

fn cmd_timing(cfg: &RunConfig) -> Result<(), CliError> {
    let r = run_timing_experiment(cfg.spec, cfg.kernel, cfg.repeats, cfg.fit_options())?;
    print_report(&r);
    println!(
        "search time (cell) = {:.3e} s, search time (brute force) = {:.3e} s, ratio = {:.2}",
        r.search_time_cell.unwrap_or(f64::NAN),
        r.search_time_brute.unwrap_or(f64::NAN),
        r.search_speedup().unwrap_or(f64::NAN)
    );
    println!("search paths agree = {}", r.paths_agree.unwrap_or(false));
    if let Some(out) = &cfg.out {
        with_output(Some(out), |w| Ok(write_reports_csv(w, std::slice::from_ref(&r))?))?;
    }
    Ok(())
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.command {
        Command::Gen => cmd_gen(cfg),
        Command::Fit => cmd_fit(cfg),
        Command::Eval => cmd_eval(cfg),
        Command::Accuracy => cmd_accuracy(cfg),
        Command::Sweep => cmd_sweep(cfg),
        Command::Timing => cmd_timing(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = parse_args(["pucell", "accuracy"]).unwrap();
        assert_eq!(c.spec, DatasetSpec::new(4225, 1024, 33).unwrap());
        assert_eq!(c.kernel, KernelSpec::wendland(1.0).unwrap());
        assert_eq!(c.policy, UncoveredPolicy::NearestLocal);
        assert_eq!(c.repeats, 3);
        assert!(!c.parallel);
        assert_eq!(c.sweep, (0.1, 2.0, 20));
    }

    #[test]
    fn gaussian_accuracy_config() {
        let c = parse_args(["pucell", "accuracy", "--n", "4225", "--d", "1024", "--kernel", "gaussian", "--shape", "50"])
            .unwrap();
        assert_eq!(c.command, Command::Accuracy);
        assert_eq!(c.kernel, KernelSpec::gaussian(50.0).unwrap());
        assert_eq!((c.spec.n, c.spec.d), (4225, 1024));
        assert_eq!(c.sweep, (1.0, 100.0, 20));
    }

    #[test]
    fn usage_errors() {
        for argv in [
            vec!["pucell"],
            vec!["pucell", "accuracy", "--n", "0"],
            vec!["pucell", "accuracy", "--shape", "-1"],
            vec!["pucell", "accuracy", "--kernel", "cubic"],
            vec!["pucell", "accuracy", "--bogus"],
            vec!["pucell", "accuracy", "--n"],
            vec!["pucell", "eval"],
            vec!["pucell", "sweep", "--sweep-min", "5", "--sweep-max", "1"],
            vec!["pucell", "--n", "10"],
        ] {
            let e = parse_args(argv.clone()).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{argv:?}");
        }
    }

    #[test]
    fn library_errors_map_to_exit_codes() {
        assert_eq!(CliError::from(pucell::Error::AllSubdomainsEmpty).exit_code(), EXIT_NUMERICAL);
        assert_eq!(CliError::from(pucell::Error::InvalidArgument("x".into())).exit_code(), EXIT_USAGE);
        let dup = pucell::Error::DuplicatePoints { first: 0, second: 1 };
        assert_eq!(CliError::from(dup).exit_code(), EXIT_DATA);
    }
}
