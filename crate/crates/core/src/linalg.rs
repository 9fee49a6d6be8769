//! Dense direct solvers for the small local interpolation systems.

use crate::scalar::Scalar;

/// Smallest Cholesky pivot accepted before falling back to pivoted LU.
pub const CHOLESKY_PIVOT_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    Cholesky,
    PivotedLu,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum SolveFailure {
    /// Cholesky pivot below the floor; carries the failing column.
    SmallPivot(usize),
    /// Exactly singular or non-finite LU factor.
    Singular(usize),
}

/// In-place lower Cholesky factor of a row-major `n × n` SPD matrix.
/// The strict upper triangle is left untouched.
pub(crate) fn cholesky_in_place<T: Scalar>(a: &mut [T], n: usize) -> Result<(), SolveFailure> {
    let floor = T::lit(CHOLESKY_PIVOT_FLOOR);
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d = d - a[j * n + k] * a[j * n + k];
        }
        if !(d > floor) {
            return Err(SolveFailure::SmallPivot(j));
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s = s - a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    Ok(())
}

pub(crate) fn cholesky_solve<T: Scalar>(l: &[T], n: usize, b: &mut [T]) {
    for i in 0..n {
        let row = &l[i * n..i * n + i];
        let mut s = b[i];
        for (k, &lik) in row.iter().enumerate() {
            s = s - lik * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s = s - l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// LU factorisation with partial pivoting; returns the row permutation.
pub(crate) fn lu_in_place<T: Scalar>(a: &mut [T], n: usize) -> Result<Vec<usize>, SolveFailure> {
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (p, max) = (k..n)
            .map(|i| (i, a[i * n + k].abs()))
            .fold((k, T::neg_infinity()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(max > T::zero()) || !max.is_finite() {
            return Err(SolveFailure::Singular(k));
        }
        if p != k {
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
            perm.swap(k, p);
        }
        let pivot = a[k * n + k];
        for i in (k + 1)..n {
            let factor = a[i * n + k] / pivot;
            a[i * n + k] = factor;
            if factor != T::zero() {
                for c in (k + 1)..n {
                    a[i * n + c] = a[i * n + c] - factor * a[k * n + c];
                }
            }
        }
    }
    Ok(perm)
}

pub(crate) fn lu_solve<T: Scalar>(lu: &[T], perm: &[usize], n: usize, b: &[T]) -> Vec<T> {
    let mut x: Vec<T> = perm.iter().map(|&p| b[p]).collect();
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s = s - lu[i * n + k] * x[k];
        }
        x[i] = s;
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s = s - lu[i * n + k] * x[k];
        }
        x[i] = s / lu[i * n + i];
    }
    x
}

/// Solves the symmetric system `A x = b` (row-major `A`).
///
/// Cholesky first; if a pivot drops below [`CHOLESKY_PIVOT_FLOOR`] the
/// original matrix is refactored with partial-pivoting LU.
pub(crate) fn solve_symmetric<T: Scalar>(
    a: &[T],
    n: usize,
    b: &[T],
) -> Result<(Vec<T>, SolveMethod), SolveFailure> {
    let mut work = a.to_vec();
    match cholesky_in_place(&mut work, n) {
        Ok(()) => {
            let mut x = b.to_vec();
            cholesky_solve(&work, n, &mut x);
            if x.iter().all(|v| v.is_finite()) {
                return Ok((x, SolveMethod::Cholesky));
            }
        }
        Err(SolveFailure::SmallPivot(_)) => {}
        Err(e) => return Err(e),
    }
    work.copy_from_slice(a);
    let perm = lu_in_place(&mut work, n)?;
    let x = lu_solve(&work, &perm, n, b);
    match x.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(SolveFailure::Singular(i)),
        None => Ok((x, SolveMethod::PivotedLu)),
    }
}

/// `‖A x − b‖∞` for a row-major `A`.
pub(crate) fn residual_inf<T: Scalar>(a: &[T], n: usize, x: &[T], b: &[T]) -> T {
    (0..n)
        .map(|i| {
            let ax: T = a[i * n..(i + 1) * n].iter().zip(x).map(|(&a, &x)| a * x).sum();
            (ax - b[i]).abs()
        })
        .fold(T::zero(), T::max)
}
