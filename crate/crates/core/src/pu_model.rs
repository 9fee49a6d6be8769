//! Partition-of-unity interpolant built from local RBF interpolants.
//!
//! Each subdomain is the closed disk of radius `δ = √(2/d)` around one of
//! the `d` centres. A local RBF interpolant is fitted to the nodes inside
//! each disk, and the global interpolant blends them with Shepard-normalised
//! compactly supported weights:
//!
//! ```text
//! I(x) = Σ_j R_j(x) w_j(x) / Σ_k w_k(x),   w_j(x) = ψ(‖x − c_j‖ / δ)
//! ```
//!
//! with `ψ(t) = (1 − t)₊⁴ (4t + 1)`. Since every `R_j` interpolates the data
//! at its own nodes, so does `I`.

use rayon::prelude::*;

use crate::cellgrid::{brute_force_range_query_into, subdomain_radius, CellGrid};
use crate::error::{Error, Result};
use crate::kernels::{kernel_matrix, wendland_c2_profile, KernelSpec};
use crate::linalg::{residual_inf, solve_symmetric, SolveFailure, SolveMethod};
use crate::point::{check_unit_square, Point2};
use crate::scalar::Scalar;

/// What to do at an evaluation point that no subdomain covers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum UncoveredPolicy {
    /// Fail with [`Error::Uncovered`].
    Error,
    /// Evaluate the fitted local interpolant whose centre is nearest.
    #[default]
    NearestLocal,
}

/// How subdomain memberships are found.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SearchMethod {
    #[default]
    CellGrid,
    /// Linear scans over all nodes / centres; reference path.
    BruteForce,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FitOptions {
    pub policy: UncoveredPolicy,
    pub search: SearchMethod,
    /// Fit the local systems on the rayon pool. The result is identical to
    /// a sequential fit.
    pub parallel: bool,
}

/// Solution of one local interpolation problem.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalSolution<T> {
    pub coeffs: Vec<T>,
    /// `‖A c − f‖∞` of the returned coefficients.
    pub residual: T,
    pub method: SolveMethod,
}

/// Solves `A c = f` for the local RBF expansion on `nodes`.
pub fn fit_local<T: Scalar>(nodes: &[Point2<T>], values: &[T], kernel: &KernelSpec<T>) -> Result<LocalSolution<T>> {
    if nodes.is_empty() {
        return Err(Error::EmptySubdomain { subdomain: None });
    }
    if nodes.len() != values.len() {
        return Err(Error::invalid(format!(
            "{} nodes but {} values",
            nodes.len(),
            values.len()
        )));
    }
    let m = nodes.len();
    let a = kernel_matrix(nodes, kernel)?.into_vec();
    let (coeffs, method) = solve_symmetric(&a, m, values).map_err(|failure| {
        let reason = match failure {
            SolveFailure::Singular(k) => format!("pivoted LU broke down at column {k} of {m}"),
            SolveFailure::SmallPivot(k) => format!("Cholesky pivot {k} of {m} below floor"),
        };
        Error::IllConditioned { subdomain: None, reason }
    })?;
    let residual = residual_inf(&a, m, &coeffs, values);
    Ok(LocalSolution {
        coeffs,
        residual,
        method,
    })
}

/// Unnormalised partition-of-unity weight `ψ(‖p − center‖ / radius)`.
pub fn weight<T: Scalar>(p: &Point2<T>, center: &Point2<T>, radius: T) -> T {
    wendland_c2_profile(p.distance(center) / radius)
}

/// One subdomain: its disk, member nodes, and fitted coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalInterpolant<T> {
    pub center: Point2<T>,
    pub radius: T,
    /// Indices into the model's node list, ascending.
    pub node_indices: Vec<usize>,
    /// Empty when the subdomain holds no nodes.
    pub coeffs: Vec<T>,
    pub residual: T,
    pub method: Option<SolveMethod>,
}

impl<T: Scalar> LocalInterpolant<T> {
    pub fn is_fitted(&self) -> bool {
        !self.coeffs.is_empty()
    }

    /// Number of nodes in the subdomain.
    pub fn size(&self) -> usize {
        self.node_indices.len()
    }
}

/// `R_j(p) = Σ_k c_k φ(‖p − x_k‖)` over the subdomain's nodes.
pub fn eval_local<T: Scalar>(local: &LocalInterpolant<T>, nodes: &[Point2<T>], kernel: &KernelSpec<T>, p: &Point2<T>) -> T {
    local
        .node_indices
        .iter()
        .zip(&local.coeffs)
        .map(|(&i, &c)| c * kernel.value_unchecked(p.distance(&nodes[i])))
        .sum()
}

/// Result of evaluating the model at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointEval<T> {
    pub value: T,
    /// Number of fitted subdomains whose closed disk contains the point.
    pub covering: usize,
    /// Set when no subdomain covers the point and the nearest local
    /// interpolant was used instead.
    pub nearest_fallback: bool,
}

/// Values and diagnostics for a batch of evaluation points.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation<T> {
    pub values: Vec<T>,
    /// Per-point covering counts.
    pub covering: Vec<usize>,
    pub uncovered_count: usize,
}

impl<T> Evaluation<T> {
    pub fn max_overlap(&self) -> usize {
        self.covering.iter().copied().max().unwrap_or(0)
    }
}

/// A fitted partition-of-unity interpolant.
#[derive(Clone, Debug, PartialEq)]
pub struct PuModel<T> {
    kernel: KernelSpec<T>,
    nodes: Vec<Point2<T>>,
    values: Vec<T>,
    centers: Vec<Point2<T>>,
    radius: T,
    locals: Vec<LocalInterpolant<T>>,
    options: FitOptions,
    center_grid: CellGrid<T>,
}

fn grid_side<T: Scalar>(radius: T) -> T {
    radius.min(T::one())
}

/// Fits one local interpolant per centre and assembles the model.
pub fn build_pu_model<T: Scalar>(
    nodes: &[Point2<T>],
    values: &[T],
    centers: &[Point2<T>],
    kernel: KernelSpec<T>,
    options: FitOptions,
) -> Result<PuModel<T>> {
    if nodes.len() != values.len() {
        return Err(Error::invalid(format!(
            "{} nodes but {} values",
            nodes.len(),
            values.len()
        )));
    }
    if centers.is_empty() {
        return Err(Error::invalid("at least one subdomain centre is required"));
    }
    check_unit_square(centers)?;
    let radius = subdomain_radius::<T>(centers.len())?;
    let node_grid = match options.search {
        SearchMethod::CellGrid => Some(CellGrid::build(nodes, grid_side(radius))?),
        SearchMethod::BruteForce => {
            check_unit_square(nodes)?;
            None
        }
    };

    let fit_one = |(j, center): (usize, &Point2<T>)| -> Result<LocalInterpolant<T>> {
        let mut members = Vec::new();
        match &node_grid {
            Some(grid) => {
                grid.range_query_into(center, radius, &mut members);
            }
            None => brute_force_range_query_into(nodes, center, radius, &mut members),
        }
        let mut local = LocalInterpolant {
            center: *center,
            radius,
            node_indices: members,
            coeffs: Vec::new(),
            residual: T::zero(),
            method: None,
        };
        if local.node_indices.is_empty() {
            return Ok(local);
        }
        let pts: Vec<Point2<T>> = local.node_indices.iter().map(|&i| nodes[i]).collect();
        let f: Vec<T> = local.node_indices.iter().map(|&i| values[i]).collect();
        let solution = fit_local(&pts, &f, &kernel).map_err(|e| match e {
            Error::DuplicatePoints { first, second } => Error::DuplicatePoints {
                first: local.node_indices[first],
                second: local.node_indices[second],
            },
            other => other.in_subdomain(j),
        })?;
        local.coeffs = solution.coeffs;
        local.residual = solution.residual;
        local.method = Some(solution.method);
        Ok(local)
    };

    let locals: Vec<LocalInterpolant<T>> = if options.parallel {
        centers.par_iter().enumerate().map(fit_one).collect::<Result<_>>()?
    } else {
        centers.iter().enumerate().map(fit_one).collect::<Result<_>>()?
    };

    PuModel::from_parts(kernel, nodes.to_vec(), values.to_vec(), centers.to_vec(), locals, options)
}

impl<T: Scalar> PuModel<T> {
    /// Assembles a model from already-fitted subdomains, e.g. when loading a
    /// saved model. The radius is taken from the locals.
    pub fn from_parts(
        kernel: KernelSpec<T>,
        nodes: Vec<Point2<T>>,
        values: Vec<T>,
        centers: Vec<Point2<T>>,
        locals: Vec<LocalInterpolant<T>>,
        options: FitOptions,
    ) -> Result<Self> {
        if locals.len() != centers.len() || nodes.len() != values.len() {
            return Err(Error::invalid("inconsistent model dimensions"));
        }
        if !locals.iter().any(LocalInterpolant::is_fitted) {
            return Err(Error::AllSubdomainsEmpty);
        }
        let radius = locals[0].radius;
        for local in &locals {
            if local.radius != radius {
                return Err(Error::invalid("subdomains with different radii"));
            }
            if local.is_fitted() && local.coeffs.len() != local.node_indices.len() {
                return Err(Error::invalid("coefficient count does not match subdomain size"));
            }
            if local.node_indices.iter().any(|&i| i >= nodes.len()) {
                return Err(Error::invalid("subdomain references a missing node"));
            }
        }
        let center_grid = CellGrid::build(&centers, grid_side(radius))?;
        Ok(Self {
            kernel,
            nodes,
            values,
            centers,
            radius,
            locals,
            options,
            center_grid,
        })
    }

    pub fn kernel(&self) -> &KernelSpec<T> {
        &self.kernel
    }

    pub fn nodes(&self) -> &[Point2<T>] {
        &self.nodes
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn centers(&self) -> &[Point2<T>] {
        &self.centers
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn locals(&self) -> &[LocalInterpolant<T>] {
        &self.locals
    }

    pub fn options(&self) -> FitOptions {
        self.options
    }

    pub fn set_policy(&mut self, policy: UncoveredPolicy) {
        self.options.policy = policy;
    }

    /// Subdomains that hold no nodes and take no part in evaluation.
    pub fn empty_subdomains(&self) -> usize {
        self.locals.iter().filter(|l| !l.is_fitted()).count()
    }

    /// Mean number of nodes per subdomain, over all `d` subdomains.
    pub fn mean_subdomain_size(&self) -> f64 {
        let total: usize = self.locals.iter().map(LocalInterpolant::size).sum();
        total as f64 / self.locals.len() as f64
    }

    pub fn max_residual(&self) -> T {
        self.locals.iter().map(|l| l.residual).fold(T::zero(), T::max)
    }

    /// Subdomains whose system needed the pivoted-LU fallback.
    pub fn lu_fallbacks(&self) -> usize {
        self.locals
            .iter()
            .filter(|l| l.method == Some(SolveMethod::PivotedLu))
            .count()
    }

    /// Indices of fitted subdomains whose closed disk contains `p`, ascending.
    fn covering_into(&self, p: &Point2<T>, out: &mut Vec<usize>) {
        match self.options.search {
            SearchMethod::CellGrid => {
                self.center_grid.range_query_into(p, self.radius, out);
            }
            SearchMethod::BruteForce => brute_force_range_query_into(&self.centers, p, self.radius, out),
        }
        out.retain(|&j| self.locals[j].is_fitted());
    }

    /// Normalised weights `W_j(p)` of the subdomains covering `p`, as
    /// `(subdomain, weight)` pairs. Empty when `p` is not covered.
    pub fn normalized_weights(&self, p: &Point2<T>) -> Vec<(usize, T)> {
        let mut cover = Vec::new();
        self.covering_into(p, &mut cover);
        let raw: Vec<(usize, T)> = cover
            .into_iter()
            .map(|j| (j, weight(p, &self.centers[j], self.radius)))
            .filter(|&(_, w)| w > T::zero())
            .collect();
        let total: T = raw.iter().map(|&(_, w)| w).sum();
        raw.into_iter().map(|(j, w)| (j, w / total)).collect()
    }

    pub fn eval(&self, p: &Point2<T>) -> Result<T> {
        self.eval_detailed(p).map(|e| e.value)
    }

    pub fn eval_detailed(&self, p: &Point2<T>) -> Result<PointEval<T>> {
        let mut cover = Vec::new();
        self.eval_with_buffer(p, &mut cover)
    }

    fn eval_with_buffer(&self, p: &Point2<T>, cover: &mut Vec<usize>) -> Result<PointEval<T>> {
        if !p.in_unit_square() {
            return Err(Error::OutOfDomain {
                index: None,
                x: p.x.as_f64(),
                y: p.y.as_f64(),
            });
        }
        self.covering_into(p, cover);
        let covering = cover.len();
        let mut num = T::zero();
        let mut den = T::zero();
        for &j in cover.iter() {
            let w = weight(p, &self.centers[j], self.radius);
            if w > T::zero() {
                num = num + w * eval_local(&self.locals[j], &self.nodes, &self.kernel, p);
                den = den + w;
            }
        }
        if den > T::zero() {
            return Ok(PointEval {
                value: num / den,
                covering,
                nearest_fallback: false,
            });
        }
        match self.options.policy {
            UncoveredPolicy::Error => Err(Error::Uncovered {
                x: p.x.as_f64(),
                y: p.y.as_f64(),
            }),
            UncoveredPolicy::NearestLocal => {
                let nearest = self
                    .locals
                    .iter()
                    .enumerate()
                    .filter(|(_, l)| l.is_fitted())
                    .map(|(j, l)| (j, p.distance_squared(&l.center)))
                    .fold(None, |best: Option<(usize, T)>, cur| match best {
                        Some(b) if b.1 <= cur.1 => Some(b),
                        _ => Some(cur),
                    })
                    .map(|(j, _)| j)
                    .ok_or(Error::AllSubdomainsEmpty)?;
                Ok(PointEval {
                    value: eval_local(&self.locals[nearest], &self.nodes, &self.kernel, p),
                    covering,
                    nearest_fallback: true,
                })
            }
        }
    }

    /// Evaluates the model at every point, collecting covering diagnostics.
    pub fn evaluate(&self, points: &[Point2<T>]) -> Result<Evaluation<T>> {
        let mut cover = Vec::new();
        let mut out = Evaluation {
            values: Vec::with_capacity(points.len()),
            covering: Vec::with_capacity(points.len()),
            uncovered_count: 0,
        };
        for p in points {
            let e = self.eval_with_buffer(p, &mut cover)?;
            out.values.push(e.value);
            out.covering.push(e.covering);
            if e.nearest_fallback {
                out.uncovered_count += 1;
            }
        }
        Ok(out)
    }

    /// Whether node `i` lies in at least one fitted subdomain.
    pub fn node_is_covered(&self, i: usize) -> bool {
        let mut cover = Vec::new();
        self.covering_into(&self.nodes[i], &mut cover);
        !cover.is_empty()
    }
}
