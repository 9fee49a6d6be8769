//! Cell-based partition of the unit square and fixed-radius searching.
//!
//! Points are ordered by `y`, cut into `q` horizontal strips of height
//! `δ`, and each strip is ordered by `x`. Because the strips are cut into
//! `q` cells of width `δ` as well, every cell of the resulting `q × q`
//! structure occupies a contiguous range of the sorted array and one offset
//! table (`cell_start`) describes the whole partition.
//!
//! A query of radius `r` around a point in cell `(v, w)` only has to look at
//! the cells `(v ± i*, w ± i*)` with `i* = ⌈r / δ⌉`, clamped to the grid.
//! In the interpolation setting `r = δ`, so `i* = 1` and at most nine cells
//! are examined.

use std::cmp::Ordering;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::point::{check_unit_square, Point2};
use crate::scalar::Scalar;

/// Radius of each circular subdomain for `d` subdomains: `√(2/d)`.
pub fn subdomain_radius<T: Scalar>(d: usize) -> Result<T> {
    if d == 0 {
        return Err(Error::invalid("number of subdomains must be at least 1"));
    }
    Ok((T::lit(2.0) / T::from_usize_lossy(d)).sqrt())
}

/// Number of strips per axis for cell side `delta`: `⌈1/δ⌉`.
pub fn strip_count<T: Scalar>(delta: T) -> Result<usize> {
    if !(delta > T::zero()) || !delta.is_finite() {
        return Err(Error::invalid(format!("cell side must be positive, got {delta}")));
    }
    let q = (T::one() / delta).ceil();
    q.to_usize()
        .filter(|&q| q >= 1)
        .ok_or_else(|| Error::invalid(format!("cell side {delta} gives an unrepresentable strip count")))
}

/// 1-based cell `(v, w)` holding `p`; `v` counts along `x`, `w` along `y`.
/// Coordinates equal to 1 are clamped into the last strip.
pub fn cell_index<T: Scalar>(p: &Point2<T>, q: usize, delta_cell: T) -> Result<(usize, usize)> {
    if !p.in_unit_square() {
        return Err(Error::OutOfDomain {
            index: None,
            x: p.x.as_f64(),
            y: p.y.as_f64(),
        });
    }
    if q == 0 || !(T::from_usize_lossy(q) * delta_cell >= T::one()) {
        return Err(Error::invalid(format!(
            "a {q}×{q} grid of side {delta_cell} does not cover the unit square"
        )));
    }
    Ok((strip_of(p.x, q, delta_cell) + 1, strip_of(p.y, q, delta_cell) + 1))
}

/// 0-based strip holding coordinate `t`, clamped to `[0, q)`.
#[inline]
fn strip_of<T: Scalar>(t: T, q: usize, delta: T) -> usize {
    let s = (t / delta).floor();
    if !(s > T::zero()) {
        0
    } else {
        s.to_usize().map_or(q - 1, |s| s.min(q - 1))
    }
}

#[inline]
pub(crate) fn in_closed_ball<T: Scalar>(p: &Point2<T>, center: &Point2<T>, radius: T) -> bool {
    p.distance(center) <= radius
}

/// Work done by one range query.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryStats {
    /// Distinct cells whose ranges were scanned.
    pub cells_visited: usize,
    /// Points whose distance to the centre was computed.
    pub candidates: usize,
}

/// Immutable `q × q` cell partition over a sorted copy of a point set.
#[derive(Clone, Debug, PartialEq)]
pub struct CellGrid<T> {
    q: usize,
    delta_cell: T,
    sorted_points: Vec<Point2<T>>,
    /// Cell `k = w·q + v` (0-based) owns `sorted_points[cell_start[k]..cell_start[k+1]]`.
    cell_start: Vec<usize>,
    /// `perm[s]` is the input index of `sorted_points[s]`.
    perm: Vec<usize>,
}

fn cmp_coord<T: Scalar>(a: T, b: T) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

impl<T: Scalar> CellGrid<T> {
    /// Builds the partition with cells of side `delta`.
    ///
    /// An empty point list is fine and yields a grid of empty cells.
    pub fn build(points: &[Point2<T>], delta: T) -> Result<Self> {
        if !(delta > T::zero()) || delta > T::one() {
            return Err(Error::invalid(format!("cell side must lie in (0, 1], got {delta}")));
        }
        check_unit_square(points)?;
        let q = strip_count(delta)?;
        let n = points.len();

        // Order by y, ties by x then input index.
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_unstable_by(|&a, &b| {
            let (pa, pb) = (&points[a], &points[b]);
            cmp_coord(pa.y, pb.y).then(cmp_coord(pa.x, pb.x)).then(a.cmp(&b))
        });

        // Within each horizontal strip, order by x, ties by y then index.
        let mut strip_start = 0;
        while strip_start < n {
            let w = strip_of(points[perm[strip_start]].y, q, delta);
            let len = perm[strip_start..]
                .iter()
                .take_while(|&&i| strip_of(points[i].y, q, delta) == w)
                .count();
            perm[strip_start..strip_start + len].sort_unstable_by(|&a, &b| {
                let (pa, pb) = (&points[a], &points[b]);
                cmp_coord(pa.x, pb.x).then(cmp_coord(pa.y, pb.y)).then(a.cmp(&b))
            });
            strip_start += len;
        }

        let mut counts = vec![0usize; q * q];
        for &i in &perm {
            let p = &points[i];
            counts[strip_of(p.y, q, delta) * q + strip_of(p.x, q, delta)] += 1;
        }
        let mut cell_start = Vec::with_capacity(q * q + 1);
        cell_start.push(0);
        let mut acc = 0;
        for c in counts {
            acc += c;
            cell_start.push(acc);
        }

        let sorted_points = perm.iter().map(|&i| points[i]).collect();
        Ok(Self {
            q,
            delta_cell: delta,
            sorted_points,
            cell_start,
            perm,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn delta_cell(&self) -> T {
        self.delta_cell
    }

    pub fn len(&self) -> usize {
        self.sorted_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted_points.is_empty()
    }

    pub fn sorted_points(&self) -> &[Point2<T>] {
        &self.sorted_points
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn cell_start(&self) -> &[usize] {
        &self.cell_start
    }

    /// Positions in [`sorted_points`](Self::sorted_points) belonging to the
    /// 1-based cell `(v, w)`.
    pub fn cell_range(&self, v: usize, w: usize) -> Range<usize> {
        assert!((1..=self.q).contains(&v) && (1..=self.q).contains(&w), "cell ({v}, {w}) out of range");
        let k = (w - 1) * self.q + (v - 1);
        self.cell_start[k]..self.cell_start[k + 1]
    }

    /// Number of points per cell, in cell order `k = (w-1)·q + (v-1)`.
    pub fn cell_counts(&self) -> Vec<usize> {
        self.cell_start.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Input indices of all points within `radius` of `center` (closed
    /// ball), in ascending order.
    pub fn range_query(&self, center: &Point2<T>, radius: T) -> Vec<usize> {
        let mut out = Vec::new();
        self.range_query_into(center, radius, &mut out);
        out
    }

    /// Like [`range_query`](Self::range_query) but appends into a reused
    /// buffer (cleared first) and reports how much of the grid was touched.
    pub fn range_query_into(&self, center: &Point2<T>, radius: T, out: &mut Vec<usize>) -> QueryStats {
        out.clear();
        let mut stats = QueryStats::default();
        if !(radius >= T::zero()) {
            return stats;
        }
        let reach = (radius / self.delta_cell)
            .ceil()
            .to_usize()
            .unwrap_or(self.q)
            .min(self.q);
        let v = strip_of(center.x, self.q, self.delta_cell);
        let w = strip_of(center.y, self.q, self.delta_cell);
        let (v_lo, v_hi) = (v.saturating_sub(reach), (v + reach).min(self.q - 1));
        let (w_lo, w_hi) = (w.saturating_sub(reach), (w + reach).min(self.q - 1));

        for row in w_lo..=w_hi {
            // Cells of one row are adjacent in the offset table.
            let base = row * self.q;
            stats.cells_visited += v_hi - v_lo + 1;
            let span = self.cell_start[base + v_lo]..self.cell_start[base + v_hi + 1];
            stats.candidates += span.len();
            for s in span {
                if in_closed_ball(&self.sorted_points[s], center, radius) {
                    out.push(self.perm[s]);
                }
            }
        }
        out.sort_unstable();
        stats
    }
}

/// Linear-scan reference for [`CellGrid::range_query`]: every index whose
/// point lies within `radius` of `center`, ascending.
pub fn brute_force_range_query<T: Scalar>(points: &[Point2<T>], center: &Point2<T>, radius: T) -> Vec<usize> {
    let mut out = Vec::new();
    brute_force_range_query_into(points, center, radius, &mut out);
    out
}

pub(crate) fn brute_force_range_query_into<T: Scalar>(
    points: &[Point2<T>],
    center: &Point2<T>,
    radius: T,
    out: &mut Vec<usize>,
) {
    out.clear();
    out.extend(
        points
            .iter()
            .enumerate()
            .filter(|(_, p)| in_closed_ball(p, center, radius))
            .map(|(i, _)| i),
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Point2<f64> {
        Point2::new(x, y)
    }

    #[test]
    fn radius_from_subdomain_count() {
        assert_eq!(subdomain_radius::<f64>(2).unwrap(), 1.0);
        assert!((subdomain_radius::<f64>(1024).unwrap() - 0.044_194_17).abs() < 1e-8);
        assert!((subdomain_radius::<f64>(16384).unwrap() - 0.011_048_54).abs() < 1e-8);
        assert!(subdomain_radius::<f64>(0).is_err());
    }

    #[test]
    fn strips_from_radius() {
        assert_eq!(strip_count(0.5).unwrap(), 2);
        assert_eq!(strip_count((2.0f64 / 1024.0).sqrt()).unwrap(), 23);
        assert_eq!(strip_count((2.0f64 / 16384.0).sqrt()).unwrap(), 91);
        assert_eq!(strip_count(1.0).unwrap(), 1);
        assert!(strip_count(0.0).is_err());
        assert!(strip_count(-0.3).is_err());
    }

    #[test]
    fn cell_indices() {
        let delta = (2.0f64 / 1024.0).sqrt();
        assert_eq!(cell_index(&p(0.0, 0.0), 23, delta).unwrap(), (1, 1));
        assert_eq!(cell_index(&p(0.0, 0.0), 2, 0.5).unwrap(), (1, 1));
        assert_eq!(cell_index(&p(1.0, 1.0), 23, delta).unwrap(), (23, 23));
        assert_eq!(cell_index(&p(1.0, 1.0), 2, 0.5).unwrap(), (2, 2));
        assert_eq!(cell_index(&p(0.5, 0.5), 23, delta).unwrap(), (12, 12));
        assert_eq!(cell_index(&p(0.7, 0.2), 2, 0.5).unwrap(), (2, 1));
        assert!(matches!(cell_index(&p(1.1, 0.5), 2, 0.5), Err(Error::OutOfDomain { .. })));
        assert!(matches!(cell_index(&p(0.5, -0.1), 2, 0.5), Err(Error::OutOfDomain { .. })));
        assert!(cell_index(&p(0.5, 0.5), 1, 0.5).is_err());
    }

    #[test]
    fn empty_grid() {
        let g = CellGrid::<f64>::build(&[], 0.5).unwrap();
        assert_eq!(g.q(), 2);
        assert_eq!(g.cell_start(), &[0, 0, 0, 0, 0]);
        assert!(g.range_query(&p(0.5, 0.5), 0.5).is_empty());
    }

    #[test]
    fn one_point_per_cell() {
        let pts = [p(0.1, 0.1), p(0.9, 0.1), p(0.1, 0.9), p(0.9, 0.9)];
        let g = CellGrid::build(&pts, 0.5).unwrap();
        assert_eq!(g.cell_counts(), vec![1, 1, 1, 1]);
        assert_eq!(g.perm(), &[0, 1, 2, 3]);
        assert_eq!(g.cell_range(2, 1), 1..2);
        assert_eq!(g.cell_range(1, 2), 2..3);
    }

    #[test]
    fn rejects_out_of_domain_points_by_index() {
        let pts = [p(0.1, 0.1), p(0.2, 1.5)];
        assert_eq!(
            CellGrid::build(&pts, 0.5).unwrap_err(),
            Error::OutOfDomain { index: Some(1), x: 0.2, y: 1.5 }
        );
        assert!(CellGrid::build(&pts[..1], 0.0).is_err());
        assert!(CellGrid::build(&pts[..1], 1.5).is_err());
    }

    #[test]
    fn boundary_circle_is_included() {
        let pts = [p(0.75, 0.5), p(0.5, 0.76), p(0.2, 0.2)];
        let g = CellGrid::build(&pts, 0.25).unwrap();
        assert_eq!(g.range_query(&p(0.5, 0.5), 0.25), vec![0]);
    }

    #[test]
    fn brute_force_examples() {
        let pts: Vec<_> = (0..6).map(|i| p(i as f64 * 0.1, 0.3)).collect();
        assert_eq!(brute_force_range_query(&pts, &pts[3], 0.0), vec![3]);
        let line: Vec<_> = (0..5).map(|i| p(i as f64, 0.0)).collect();
        assert_eq!(brute_force_range_query(&line, &line[0], 1.5), vec![0, 1]);
    }

    #[test]
    fn larger_radius_widens_window() {
        let pts = [p(0.05, 0.05), p(0.95, 0.95), p(0.5, 0.5)];
        let g = CellGrid::build(&pts, 0.1).unwrap();
        let mut out = Vec::new();
        let stats = g.range_query_into(&p(0.05, 0.05), 0.3, &mut out);
        assert_eq!(out, vec![0]);
        assert!(stats.cells_visited <= 49);
        assert_eq!(g.range_query(&p(0.5, 0.5), 2.0), vec![0, 1, 2]);
    }

    fn points(max: usize) -> impl Strategy<Value = Vec<Point2<f64>>> {
        prop::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), 0..max)
            .prop_map(|v| v.into_iter().map(Point2::from).collect())
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            pts in points(400),
            d in 1usize..600,
            centers in prop::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), 1..30),
        ) {
            let delta = subdomain_radius::<f64>(d).unwrap().min(1.0);
            let g = CellGrid::build(&pts, delta).unwrap();
            let mut out = Vec::new();
            for c in centers {
                let c = Point2::from(c);
                let stats = g.range_query_into(&c, delta, &mut out);
                prop_assert!(stats.cells_visited <= 9);
                prop_assert_eq!(&out, &brute_force_range_query(&pts, &c, delta));
            }
        }

        #[test]
        fn partition_invariants(pts in points(300), delta in 0.02..=1.0f64) {
            let g = CellGrid::build(&pts, delta).unwrap();
            let q = g.q();
            prop_assert!(q as f64 * delta >= 1.0);
            let starts = g.cell_start();
            prop_assert_eq!(starts.len(), q * q + 1);
            prop_assert_eq!(starts[0], 0);
            prop_assert_eq!(starts[q * q], pts.len());
            prop_assert!(starts.windows(2).all(|w| w[0] <= w[1]));

            let mut seen = vec![false; pts.len()];
            for &i in g.perm() {
                prop_assert!(!seen[i]);
                seen[i] = true;
            }
            for v in 1..=q {
                for w in 1..=q {
                    for s in g.cell_range(v, w) {
                        prop_assert_eq!(cell_index(&g.sorted_points()[s], q, delta).unwrap(), (v, w));
                        prop_assert_eq!(g.sorted_points()[s], pts[g.perm()[s]]);
                    }
                }
            }
            prop_assert_eq!(&CellGrid::build(&pts, delta).unwrap(), &g);
        }
    }
}
