//! Bivariate scattered-data interpolation by the partition-of-unity method.
//!
//! Local radial-basis-function interpolants are fitted on overlapping
//! circular subdomains and blended with compactly supported weights. Node
//! and centre localisation runs on a `q × q` cell partition of the unit
//! square whose cell side equals the subdomain radius, so every search
//! inspects at most nine cells.
//!
//! The numerical code is generic over [`Scalar`] (`f32`, `f64`); the aliases
//! below fix it to `f64`, which is what the experiments use.
//!
//! ```
//! use pucell::{build_pu_model, franke_at, grid_centers, halton, FitOptions, KernelSpec};
//!
//! let nodes = halton::<f64>(1000);
//! let values: Vec<f64> = nodes.iter().map(franke_at).collect();
//! let centers = grid_centers(256).unwrap();
//! let kernel = KernelSpec::wendland(1.0).unwrap();
//! let model = build_pu_model(&nodes, &values, &centers, kernel, FitOptions::default()).unwrap();
//! assert!((model.eval(&nodes[10]).unwrap() - values[10]).abs() < 1e-8);
//! ```

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cellgrid;
pub mod error;
pub mod kernels;
mod linalg;
pub mod model_io;
pub mod point;
pub mod pu_model;
pub mod scalar;
pub mod testdata;

pub use bench::{rmse, BenchReport, SweepPoint};
pub use cellgrid::{brute_force_range_query, cell_index, strip_count, subdomain_radius, CellGrid, QueryStats};
pub use error::{Error, Result};
pub use kernels::{kernel_matrix, kernel_value, KernelFamily, KernelSpec, SymMatrix};
pub use linalg::{SolveMethod, CHOLESKY_PIVOT_FLOOR};
pub use point::Point2;
pub use pu_model::{
    build_pu_model, eval_local, fit_local, weight, Evaluation, FitOptions, LocalInterpolant, LocalSolution,
    PointEval, PuModel, SearchMethod, UncoveredPolicy,
};
pub use scalar::Scalar;
pub use testdata::{franke, franke_at, grid_centers, grid_points, halton, DatasetSpec};

/// Double-precision point.
pub type Point = Point2<f64>;
pub type Kernel = KernelSpec<f64>;
pub type Grid = CellGrid<f64>;
pub type Local = LocalInterpolant<f64>;
pub type Model = PuModel<f64>;
