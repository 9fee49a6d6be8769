//! Radial basis functions and interpolation-matrix assembly.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::point::Point2;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    /// `exp(-α² r²)`, globally supported and infinitely smooth.
    Gaussian,
    /// Wendland's C2 function `(1 - c r)₊⁴ (4 c r + 1)`, supported on `r < 1/c`.
    WendlandC2,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::WendlandC2 => "wendland",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "g" => Ok(KernelFamily::Gaussian),
            "wendland" | "wendlandc2" | "w2" => Ok(KernelFamily::WendlandC2),
            other => Err(Error::invalid(format!("unknown kernel family `{other}`"))),
        }
    }
}

/// A kernel family together with its shape parameter.
///
/// For the Gaussian the stored shape is `α²`, so `KernelSpec::gaussian(50.0)`
/// is the kernel `exp(-50 r²)`. For Wendland C2 it is the scale `c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec<T> {
    family: KernelFamily,
    shape: T,
}

impl<T: Scalar> KernelSpec<T> {
    pub fn new(family: KernelFamily, shape: T) -> Result<Self> {
        if !(shape > T::zero()) || !shape.is_finite() {
            return Err(Error::invalid(format!(
                "shape parameter must be positive and finite, got {shape}"
            )));
        }
        Ok(Self { family, shape })
    }

    /// Gaussian with squared shape parameter `alpha_sq`.
    pub fn gaussian(alpha_sq: T) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, alpha_sq)
    }

    pub fn wendland(c: T) -> Result<Self> {
        Self::new(KernelFamily::WendlandC2, c)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn shape(&self) -> T {
        self.shape
    }

    /// Evaluates `φ(r)`.
    ///
    /// # Panics
    ///
    /// If `r` is negative or NaN.
    pub fn value(&self, r: T) -> T {
        assert!(r >= T::zero(), "kernel evaluated at negative radius {r}");
        self.value_unchecked(r)
    }

    #[inline]
    pub(crate) fn value_unchecked(&self, r: T) -> T {
        match self.family {
            KernelFamily::Gaussian => (-self.shape * r * r).exp(),
            KernelFamily::WendlandC2 => wendland_c2_profile(self.shape * r),
        }
    }
}

impl<T: Scalar> fmt::Display for KernelSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            KernelFamily::Gaussian => write!(f, "gaussian(alpha^2={})", self.shape),
            KernelFamily::WendlandC2 => write!(f, "wendland(c={})", self.shape),
        }
    }
}

/// `(1 - t)₊⁴ (4t + 1)`; exactly zero for `t >= 1`.
#[inline]
pub(crate) fn wendland_c2_profile<T: Scalar>(t: T) -> T {
    if t >= T::one() {
        return T::zero();
    }
    let s = T::one() - t;
    let s2 = s * s;
    s2 * s2 * (T::lit(4.0) * t + T::one())
}

/// Checked scalar kernel evaluation; rejects negative or NaN radii.
pub fn kernel_value<T: Scalar>(spec: &KernelSpec<T>, r: T) -> Result<T> {
    if !(r >= T::zero()) {
        return Err(Error::invalid(format!("kernel radius must be nonnegative, got {r}")));
    }
    Ok(spec.value_unchecked(r))
}

/// Dense symmetric interpolation matrix, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub(crate) fn into_vec(self) -> Vec<T> {
        self.data
    }
}

/// Assembles `a_ij = φ(‖x_i − x_j‖₂)`.
///
/// Both triangles are filled from the same computed distance, so the result
/// is exactly symmetric. Coincident points yield [`Error::DuplicatePoints`].
pub fn kernel_matrix<T: Scalar>(points: &[Point2<T>], spec: &KernelSpec<T>) -> Result<SymMatrix<T>> {
    let m = points.len();
    let mut data = vec![T::zero(); m * m];
    for i in 0..m {
        data[i * m + i] = spec.value_unchecked(T::zero());
        for j in (i + 1)..m {
            let r = points[i].distance(&points[j]);
            if r == T::zero() {
                return Err(Error::DuplicatePoints { first: i, second: j });
            }
            let a = spec.value_unchecked(r);
            data[i * m + j] = a;
            data[j * m + i] = a;
        }
    }
    Ok(SymMatrix { dim: m, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn gaussian_values() {
        let g = KernelSpec::gaussian(50.0).unwrap();
        assert_eq!(g.value(0.0), 1.0);
        assert_relative_eq!(g.value(0.1), (-0.5f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(g.value(0.1), 0.606531, epsilon = 1e-6);
    }

    #[test]
    fn wendland_values() {
        let w = KernelSpec::wendland(1.0).unwrap();
        assert_eq!(w.value(0.0), 1.0);
        assert_eq!(w.value(1.0), 0.0);
        assert_eq!(w.value(0.5), 0.1875);
        assert_eq!(w.value(7.0), 0.0);
        let w2 = KernelSpec::wendland(2.0).unwrap();
        assert_eq!(w2.value(0.5), 0.0);
        assert_eq!(w2.value(0.25), 0.1875);
    }

    #[test]
    fn rejects_bad_shape_and_radius() {
        assert!(KernelSpec::gaussian(0.0).is_err());
        assert!(KernelSpec::wendland(-1.0).is_err());
        assert!(KernelSpec::wendland(f64::NAN).is_err());
        let w = KernelSpec::wendland(1.0).unwrap();
        assert!(kernel_value(&w, -0.1).is_err());
        assert!(kernel_value(&w, f64::NAN).is_err());
        assert_eq!(kernel_value(&w, 0.5).unwrap(), 0.1875);
    }

    #[test]
    fn family_parsing() {
        assert_eq!("Gaussian".parse::<KernelFamily>().unwrap(), KernelFamily::Gaussian);
        assert_eq!("wendland".parse::<KernelFamily>().unwrap(), KernelFamily::WendlandC2);
        assert!("multiquadric".parse::<KernelFamily>().is_err());
    }

    #[test]
    fn small_matrices() {
        let w = KernelSpec::wendland(1.0).unwrap();
        let one = kernel_matrix(&[Point2::new(0.3, 0.3)], &w).unwrap();
        assert_eq!(one.as_slice(), &[1.0]);

        let two = kernel_matrix(&[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)], &w).unwrap();
        assert_eq!(two.as_slice(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn duplicate_points_rejected() {
        let g = KernelSpec::gaussian(50.0).unwrap();
        let pts = [Point2::new(0.1, 0.2), Point2::new(0.5, 0.5), Point2::new(0.1, 0.2)];
        assert_eq!(
            kernel_matrix(&pts, &g).unwrap_err(),
            Error::DuplicatePoints { first: 0, second: 2 }
        );
    }

    #[test]
    fn five_point_gaussian_matrix_has_positive_pivots() {
        // Plain Cholesky written out here, independent of the crate's solver.
        let pts = [
            Point2::new(0.12, 0.81),
            Point2::new(0.55, 0.31),
            Point2::new(0.93, 0.07),
            Point2::new(0.40, 0.66),
            Point2::new(0.71, 0.92),
        ];
        let a = kernel_matrix(&pts, &KernelSpec::gaussian(50.0).unwrap()).unwrap();
        let n = a.dim();
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d: f64 = a.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            assert!(d > 0.0, "pivot {j} = {d}");
            l[j * n + j] = d.sqrt();
            for i in (j + 1)..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }

    #[test]
    fn generic_over_f32() {
        let w = KernelSpec::<f32>::wendland(1.0).unwrap();
        assert_eq!(w.value(0.5), 0.1875f32);
    }

    fn point_set() -> impl Strategy<Value = Vec<Point2<f64>>> {
        prop::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), 1..=50).prop_map(|v| {
            let mut pts: Vec<Point2<f64>> = v.into_iter().map(Point2::from).collect();
            pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
            pts.dedup();
            pts
        })
    }

    fn any_kernel() -> impl Strategy<Value = KernelSpec<f64>> {
        prop_oneof![
            (1.0..100.0f64).prop_map(|s| KernelSpec::gaussian(s).unwrap()),
            (0.1..4.0f64).prop_map(|s| KernelSpec::wendland(s).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn matrix_is_exactly_symmetric(pts in point_set(), k in any_kernel()) {
            let a = kernel_matrix(&pts, &k).unwrap();
            for i in 0..a.dim() {
                prop_assert_eq!(a.get(i, i), 1.0);
                for j in 0..a.dim() {
                    prop_assert_eq!(a.get(i, j).to_bits(), a.get(j, i).to_bits());
                }
            }
        }

        #[test]
        fn quadratic_form_is_positive(
            pts in point_set(),
            k in any_kernel(),
            seeds in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 50), 100),
        ) {
            let a = kernel_matrix(&pts, &k).unwrap();
            let m = a.dim();
            for c in &seeds {
                let c = &c[..m];
                let norm2: f64 = c.iter().map(|v| v * v).sum();
                if norm2 == 0.0 {
                    continue;
                }
                let ac = a.mul_vec(c);
                let q: f64 = c.iter().zip(&ac).map(|(x, y)| x * y).sum();
                prop_assert!(q > -1e-12 * norm2, "cᵀAc = {q}, ‖c‖² = {norm2}");
            }
        }

        #[test]
        fn wendland_vanishes_outside_support(c in 0.1..4.0f64, extra in 0.0..10.0f64) {
            let w = KernelSpec::wendland(c).unwrap();
            prop_assert_eq!(w.value(1.0 / c + extra), 0.0);
        }
    }

    #[test]
    fn kernels_are_nonincreasing() {
        let kernels = [
            KernelSpec::gaussian(1.0).unwrap(),
            KernelSpec::gaussian(50.0).unwrap(),
            KernelSpec::wendland(0.1).unwrap(),
            KernelSpec::wendland(1.0).unwrap(),
            KernelSpec::wendland(2.0).unwrap(),
        ];
        for k in kernels {
            let mut prev = k.value(0.0);
            for i in 1..=20_000 {
                let v = k.value(i as f64 * 5e-4);
                assert!(v <= prev, "{k} increases at r = {}", i as f64 * 5e-4);
                prev = v;
            }
        }
    }
}
