//! Error metrics and the experiment drivers: accuracy on Franke's function,
//! shape-parameter sweeps, and the cell-versus-linear-scan timing study.

use std::io::Write;
use std::time::{Duration, Instant};

use crate::cellgrid::{brute_force_range_query_into, subdomain_radius, CellGrid};
use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::point::Point2;
use crate::pu_model::{build_pu_model, FitOptions, PuModel, SearchMethod};
use crate::scalar::Scalar;
use crate::testdata::{franke_at, grid_centers, grid_points, halton, DatasetSpec};

/// Root mean square error `√(Σ (exact_i − approx_i)² / s)`.
pub fn rmse<T: Scalar>(exact: &[T], approx: &[T]) -> Result<T> {
    if exact.is_empty() || exact.len() != approx.len() {
        return Err(Error::invalid(format!(
            "rmse needs two equal nonempty vectors, got lengths {} and {}",
            exact.len(),
            approx.len()
        )));
    }
    let sum: T = exact.iter().zip(approx).map(|(&e, &a)| (e - a) * (e - a)).sum();
    Ok((sum / T::from_usize_lossy(exact.len())).sqrt())
}

/// One experiment configuration and what was measured for it. Times are in
/// seconds; search times are only filled in by the timing experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub n: usize,
    pub d: usize,
    pub s: usize,
    pub kernel: KernelFamily,
    pub shape: f64,
    pub rmse: f64,
    /// Largest `|I(x_i) − f_i|` over nodes covered by some subdomain.
    pub node_max_error: f64,
    pub fit_time: f64,
    pub eval_time: f64,
    pub search_time_cell: Option<f64>,
    pub search_time_brute: Option<f64>,
    pub uncovered_count: usize,
    /// Largest number of subdomains covering one evaluation point.
    pub max_overlap: usize,
    pub mean_subdomain_size: f64,
    pub empty_subdomains: usize,
    /// Whether cell and brute-force localisation produced bit-identical
    /// models and evaluations (timing experiment only).
    pub paths_agree: Option<bool>,
}

impl BenchReport {
    /// `search_time_brute / search_time_cell`, when both were measured.
    pub fn search_speedup(&self) -> Option<f64> {
        Some(self.search_time_brute? / self.search_time_cell?)
    }

    pub const CSV_HEADER: [&'static str; 17] = [
        "n",
        "d",
        "s",
        "kernel",
        "shape",
        "rmse",
        "node_max_error",
        "fit_time",
        "eval_time",
        "search_time_cell",
        "search_time_brute",
        "search_speedup",
        "uncovered_count",
        "max_overlap",
        "mean_subdomain_size",
        "empty_subdomains",
        "paths_agree",
    ];

    fn csv_record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|t| format!("{t:e}")).unwrap_or_default();
        vec![
            self.n.to_string(),
            self.d.to_string(),
            self.s.to_string(),
            self.kernel.name().to_string(),
            self.shape.to_string(),
            format!("{:e}", self.rmse),
            format!("{:e}", self.node_max_error),
            format!("{:e}", self.fit_time),
            format!("{:e}", self.eval_time),
            opt(self.search_time_cell),
            opt(self.search_time_brute),
            opt(self.search_speedup()),
            self.uncovered_count.to_string(),
            self.max_overlap.to_string(),
            self.mean_subdomain_size.to_string(),
            self.empty_subdomains.to_string(),
            self.paths_agree.map(|b| b.to_string()).unwrap_or_default(),
        ]
    }
}

/// Writes reports as CSV with a header row.
pub fn write_reports_csv<W: Write>(out: W, reports: &[BenchReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BenchReport::CSV_HEADER)?;
    for r in reports {
        w.write_record(r.csv_record())?;
    }
    w.flush()?;
    Ok(())
}

/// One point of a shape-parameter sweep. Failed fits carry `rmse = NaN`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub shape: f64,
    pub rmse: f64,
    pub failed: bool,
    pub error: Option<String>,
}

/// Writes `shape,rmse,failed` rows with a header.
pub fn write_sweep_csv<W: Write>(out: W, points: &[SweepPoint]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["shape", "rmse", "failed"])?;
    for p in points {
        w.write_record([p.shape.to_string(), format!("{:e}", p.rmse), p.failed.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `count` equispaced values on `[min, max]`.
pub fn equispaced(min: f64, max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..count)
            .map(|i| min + (max - min) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Nodes, data, centres and evaluation points of one experiment.
#[derive(Clone, Debug)]
pub struct Dataset<T> {
    pub spec: DatasetSpec,
    pub nodes: Vec<Point2<T>>,
    pub values: Vec<T>,
    pub centers: Vec<Point2<T>>,
    pub eval_points: Vec<Point2<T>>,
    pub exact: Vec<T>,
}

impl<T: Scalar> Dataset<T> {
    /// Halton nodes with Franke data, grid centres and the inclusive
    /// evaluation grid.
    pub fn generate(spec: DatasetSpec) -> Result<Self> {
        spec.validate()?;
        let nodes = halton::<T>(spec.n);
        let values = nodes.iter().map(franke_at).collect();
        let centers = grid_centers::<T>(spec.d)?;
        let eval_points = grid_points::<T>(spec.s_side)?;
        let exact = eval_points.iter().map(franke_at).collect();
        Ok(Self {
            spec,
            nodes,
            values,
            centers,
            eval_points,
            exact,
        })
    }
}

fn seconds(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn timed<R>(f: impl FnOnce() -> R) -> (R, f64) {
    let start = Instant::now();
    let r = f();
    (r, seconds(start.elapsed()))
}

/// Largest interpolation error over nodes covered by the model.
pub fn node_max_error<T: Scalar>(model: &PuModel<T>) -> Result<T> {
    let mut worst = T::zero();
    for (i, (p, &f)) in model.nodes().iter().zip(model.values()).enumerate() {
        if model.node_is_covered(i) {
            worst = worst.max((model.eval(p)? - f).abs());
        }
    }
    Ok(worst)
}

fn measure<T: Scalar>(data: &Dataset<T>, kernel: KernelSpec<T>, options: FitOptions) -> Result<(BenchReport, PuModel<T>, Vec<T>)> {
    let (model, fit_time) = timed(|| build_pu_model(&data.nodes, &data.values, &data.centers, kernel, options));
    let model = model?;
    let (eval, eval_time) = timed(|| model.evaluate(&data.eval_points));
    let eval = eval?;
    let report = BenchReport {
        n: data.spec.n,
        d: data.spec.d,
        s: data.eval_points.len(),
        kernel: kernel.family(),
        shape: kernel.shape().as_f64(),
        rmse: rmse(&data.exact, &eval.values)?.as_f64(),
        node_max_error: node_max_error(&model)?.as_f64(),
        fit_time,
        eval_time,
        search_time_cell: None,
        search_time_brute: None,
        uncovered_count: eval.uncovered_count,
        max_overlap: eval.max_overlap(),
        mean_subdomain_size: model.mean_subdomain_size(),
        empty_subdomains: model.empty_subdomains(),
        paths_agree: None,
    };
    Ok((report, model, eval.values))
}

/// Fits and evaluates one configuration on the standard dataset.
pub fn run_accuracy_experiment<T: Scalar>(spec: DatasetSpec, kernel: KernelSpec<T>, options: FitOptions) -> Result<BenchReport> {
    let data = Dataset::<T>::generate(spec)?;
    measure(&data, kernel, options).map(|(r, _, _)| r)
}

/// RMSE as a function of the shape parameter on one shared dataset. Fits
/// that fail numerically are recorded, not propagated.
pub fn run_shape_sweep<T: Scalar>(
    spec: DatasetSpec,
    family: KernelFamily,
    shapes: &[f64],
    options: FitOptions,
) -> Result<Vec<SweepPoint>> {
    if shapes.is_empty() {
        return Err(Error::invalid("shape sweep needs at least one value"));
    }
    let kernels = shapes
        .iter()
        .map(|&s| KernelSpec::new(family, T::lit(s)))
        .collect::<Result<Vec<_>>>()?;
    let data = Dataset::<T>::generate(spec)?;
    let mut out = Vec::with_capacity(shapes.len());
    for (kernel, &shape) in kernels.into_iter().zip(shapes) {
        let point = match measure(&data, kernel, options) {
            Ok((r, _, _)) if r.rmse.is_finite() => SweepPoint {
                shape,
                rmse: r.rmse,
                failed: false,
                error: None,
            },
            Ok(_) => SweepPoint {
                shape,
                rmse: f64::NAN,
                failed: true,
                error: Some("non-finite evaluation".into()),
            },
            Err(e) if e.is_numerical() => SweepPoint {
                shape,
                rmse: f64::NAN,
                failed: true,
                error: Some(e.to_string()),
            },
            Err(e) => return Err(e),
        };
        out.push(point);
    }
    Ok(out)
}

/// Subdomain memberships of every centre and covering sets of every
/// evaluation point.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Localization {
    pub nodes_per_subdomain: Vec<Vec<usize>>,
    pub subdomains_per_point: Vec<Vec<usize>>,
}

/// Localisation through the cell structure, including building it.
pub fn localize_cell<T: Scalar>(data: &Dataset<T>, radius: T) -> Result<Localization> {
    let side = radius.min(T::one());
    let node_grid = CellGrid::build(&data.nodes, side)?;
    let center_grid = CellGrid::build(&data.centers, side)?;
    let nodes_per_subdomain = data
        .centers
        .iter()
        .map(|c| node_grid.range_query(c, radius))
        .collect();
    let subdomains_per_point = data
        .eval_points
        .iter()
        .map(|p| center_grid.range_query(p, radius))
        .collect();
    Ok(Localization {
        nodes_per_subdomain,
        subdomains_per_point,
    })
}

/// Localisation by linear scans.
pub fn localize_brute<T: Scalar>(data: &Dataset<T>, radius: T) -> Localization {
    let scan = |points: &[Point2<T>], queries: &[Point2<T>]| -> Vec<Vec<usize>> {
        queries
            .iter()
            .map(|q| {
                let mut out = Vec::new();
                brute_force_range_query_into(points, q, radius, &mut out);
                out
            })
            .collect()
    };
    Localization {
        nodes_per_subdomain: scan(&data.nodes, &data.centers),
        subdomains_per_point: scan(&data.centers, &data.eval_points),
    }
}

/// Times localisation via the cell structure against linear scans
/// (best of `repeats`), and checks that both search paths give the same
/// model and evaluations.
pub fn run_timing_experiment<T: Scalar>(
    spec: DatasetSpec,
    kernel: KernelSpec<T>,
    repeats: usize,
    options: FitOptions,
) -> Result<BenchReport> {
    if repeats == 0 {
        return Err(Error::invalid("repeats must be at least 1"));
    }
    let data = Dataset::<T>::generate(spec)?;
    let radius = subdomain_radius::<T>(spec.d)?;

    let mut best_cell = f64::INFINITY;
    let mut best_brute = f64::INFINITY;
    let mut cell_loc = Localization::default();
    let mut brute_loc = Localization::default();
    for _ in 0..repeats {
        let (loc, t) = timed(|| localize_cell(&data, radius));
        cell_loc = loc?;
        best_cell = best_cell.min(t);
        let (loc, t) = timed(|| localize_brute(&data, radius));
        brute_loc = loc;
        best_brute = best_brute.min(t);
    }

    let cell_opts = FitOptions {
        search: SearchMethod::CellGrid,
        ..options
    };
    let mut report: Option<BenchReport> = None;
    let mut cell_model = None;
    let mut cell_values = Vec::new();
    for _ in 0..repeats {
        let (r, model, values) = measure(&data, kernel, cell_opts)?;
        report = Some(match report {
            None => r,
            Some(prev) => {
                assert_eq!(prev.rmse.to_bits(), r.rmse.to_bits(), "rmse changed between repeats");
                BenchReport {
                    fit_time: prev.fit_time.min(r.fit_time),
                    eval_time: prev.eval_time.min(r.eval_time),
                    ..prev
                }
            }
        });
        cell_model = Some(model);
        cell_values = values;
    }
    let brute_opts = FitOptions {
        search: SearchMethod::BruteForce,
        ..options
    };
    let (_, brute_model, brute_values) = measure(&data, kernel, brute_opts)?;
    let cell_model = cell_model.expect("at least one repeat");
    let agree = cell_loc == brute_loc
        && cell_model.locals().len() == brute_model.locals().len()
        && cell_model.locals().iter().zip(brute_model.locals()).all(|(a, b)| {
            a.node_indices == b.node_indices && bit_identical(&a.coeffs, &b.coeffs)
        })
        && bit_identical(&cell_values, &brute_values);

    let mut report = report.expect("at least one repeat");
    report.search_time_cell = Some(best_cell);
    report.search_time_brute = Some(best_brute);
    report.paths_agree = Some(agree);
    Ok(report)
}

/// Exact bitwise equality of two scalar slices.
pub fn bit_identical<T: Scalar>(a: &[T], b: &[T]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.integer_decode() == y.integer_decode())
}
