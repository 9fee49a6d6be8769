use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point of the plane. Nodes, subdomain centres and evaluation points all
/// use this type; the algorithms in this crate require them to lie in the
/// closed unit square.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    /// Euclidean distance to `other`.
    pub fn distance(&self, other: &Self) -> T {
        self.distance_squared(other).sqrt()
    }

    pub fn distance_squared(&self, other: &Self) -> T {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    /// Whether both coordinates lie in `[0, 1]` (NaN is rejected).
    pub fn in_unit_square(&self) -> bool {
        let unit = |v: T| v >= T::zero() && v <= T::one();
        unit(self.x) && unit(self.y)
    }
}

impl<T: Scalar> From<(T, T)> for Point2<T> {
    fn from((x, y): (T, T)) -> Self {
        Self { x, y }
    }
}

/// Checks that every point lies in the unit square, reporting the first
/// offending index.
pub fn check_unit_square<T: Scalar>(points: &[Point2<T>]) -> Result<()> {
    match points.iter().position(|p| !p.in_unit_square()) {
        Some(index) => Err(Error::OutOfDomain {
            index: Some(index),
            x: points[index].x.as_f64(),
            y: points[index].y.as_f64(),
        }),
        None => Ok(()),
    }
}
