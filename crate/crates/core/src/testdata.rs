//! Deterministic inputs for the interpolation experiments: Halton nodes,
//! Franke's test function, evaluation grids and grid-placed subdomain centres.

use crate::error::{Error, Result};
use crate::point::Point2;
use crate::scalar::Scalar;

/// Sizes of one experiment: `n` nodes, `d` subdomains, `s_side²` evaluation points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DatasetSpec {
    pub n: usize,
    pub d: usize,
    pub s_side: usize,
}

impl DatasetSpec {
    pub fn new(n: usize, d: usize, s_side: usize) -> Result<Self> {
        let spec = Self { n, d, s_side };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 || self.s_side == 0 {
            return Err(Error::invalid(format!(
                "dataset sizes must be positive (n={}, d={}, side={})",
                self.n, self.d, self.s_side
            )));
        }
        Ok(())
    }

    pub fn eval_count(&self) -> usize {
        self.s_side * self.s_side
    }
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            n: 4225,
            d: 1024,
            s_side: 33,
        }
    }
}

/// Van der Corput radical inverse of `index` in `base`.
fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut factor = inv;
    let mut r = 0.0;
    while index > 0 {
        r += factor * (index % base) as f64;
        index /= base;
        factor *= inv;
    }
    r
}

/// The first `count` points of the Halton sequence in bases (2, 3), starting
/// at index 1 so that the origin is skipped.
pub fn halton<T: Scalar>(count: usize) -> Vec<Point2<T>> {
    (1..=count as u64)
        .map(|i| Point2::new(T::lit(radical_inverse(i, 2)), T::lit(radical_inverse(i, 3))))
        .collect()
}

/// Franke's bivariate test function.
pub fn franke<T: Scalar>(x: T, y: T) -> T {
    let c = T::lit;
    let (u, v) = (c(9.0) * x, c(9.0) * y);
    let sq = |t: T| t * t;
    let t1 = c(0.75) * (-(sq(u - c(2.0)) + sq(v - c(2.0))) / c(4.0)).exp();
    let t2 = c(0.75) * (-sq(u + c(1.0)) / c(49.0) - (v + c(1.0)) / c(10.0)).exp();
    let t3 = c(0.5) * (-(sq(u - c(7.0)) + sq(v - c(3.0))) / c(4.0)).exp();
    let t4 = c(0.2) * (-sq(u - c(4.0)) - sq(v - c(7.0))).exp();
    t1 + t2 + t3 - t4
}

pub fn franke_at<T: Scalar>(p: &Point2<T>) -> T {
    franke(p.x, p.y)
}

/// `side × side` uniform grid including the boundary of the unit square,
/// row by row (`y` outer, `x` inner).
pub fn grid_points<T: Scalar>(side: usize) -> Result<Vec<Point2<T>>> {
    if side < 2 {
        return Err(Error::invalid(format!("grid side must be at least 2, got {side}")));
    }
    let step = T::from_usize_lossy(side - 1);
    let coord = |i: usize| T::from_usize_lossy(i) / step;
    Ok((0..side)
        .flat_map(|j| (0..side).map(move |i| Point2::new(coord(i), coord(j))))
        .collect())
}

/// `d` subdomain centres on a `√d × √d` grid with spacing `1/√d`, offset by
/// half a spacing from the boundary. `d` must be a perfect square.
pub fn grid_centers<T: Scalar>(d: usize) -> Result<Vec<Point2<T>>> {
    let side = (d as f64).sqrt().round() as usize;
    if d == 0 || side * side != d {
        return Err(Error::invalid(format!(
            "grid-placed centres need a positive perfect-square count, got {d}"
        )));
    }
    let s = T::from_usize_lossy(side);
    let coord = |i: usize| (T::from_usize_lossy(i) + T::lit(0.5)) / s;
    Ok((0..side)
        .flat_map(|j| (0..side).map(move |i| Point2::new(coord(i), coord(j))))
        .collect())
}
