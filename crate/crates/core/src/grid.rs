//! Uniform Cartesian grids in 1 to 3 dimensions.
//!
//! Points are stored as `[f64; 3]` with trailing coordinates fixed at zero
//! below the working dimension; this keeps the hot loops branch-free.

use serde::{Deserialize, Serialize};

pub type Point = [f64; 3];

pub const MAX_DIM: usize = 3;

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

#[inline]
pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// A uniform grid of cubic cells covering an axis-aligned box.
///
/// Cell `(i0, i1, i2)` occupies `lo + h*[i0, i0+1] x ...` and its center is
/// `lo[m] + (i[m] + 0.5) h`. Axes at or above `d` have a single cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub d: usize,
    pub h: f64,
    pub lo: Point,
    pub shape: [usize; 3],
}

impl Grid {
    pub fn new(d: usize, h: f64, lo: Point, shape_d: &[usize]) -> Self {
        assert!((1..=MAX_DIM).contains(&d), "dimension must be 1..=3");
        assert!(h > 0.0, "cell size must be positive");
        let mut shape = [1usize; 3];
        shape[..d].copy_from_slice(shape_d);
        let mut lo3 = [0.0; 3];
        lo3[..d].copy_from_slice(&lo[..d]);
        Grid {
            d,
            h,
            lo: lo3,
            shape,
        }
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1] * self.shape[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, c: [usize; 3]) -> usize {
        (c[0] * self.shape[1] + c[1]) * self.shape[2] + c[2]
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let c2 = idx % self.shape[2];
        let rest = idx / self.shape[2];
        let c1 = rest % self.shape[1];
        let c0 = rest / self.shape[1];
        [c0, c1, c2]
    }

    #[inline]
    pub fn center(&self, c: [usize; 3]) -> Point {
        let mut p = [0.0; 3];
        for m in 0..self.d {
            p[m] = self.lo[m] + (c[m] as f64 + 0.5) * self.h;
        }
        p
    }

    /// Cell containing `p`, or `None` when `p` is outside the box.
    #[inline]
    pub fn cell_of(&self, p: Point) -> Option<[usize; 3]> {
        let mut c = [0usize; 3];
        for m in 0..self.d {
            let t = (p[m] - self.lo[m]) / self.h;
            if t < 0.0 {
                return None;
            }
            let i = t as usize;
            if i >= self.shape[m] {
                return None;
            }
            c[m] = i;
        }
        Some(c)
    }

    /// Signed integer cell coordinates of the lattice extended beyond the
    /// box; used when exterior cells must be counted.
    #[inline]
    pub fn lattice_cell_of(&self, p: Point) -> [i64; 3] {
        let mut c = [0i64; 3];
        for m in 0..self.d {
            c[m] = ((p[m] - self.lo[m]) / self.h).floor() as i64;
        }
        c
    }

    #[inline]
    pub fn lattice_center(&self, c: [i64; 3]) -> Point {
        let mut p = [0.0; 3];
        for m in 0..self.d {
            p[m] = self.lo[m] + (c[m] as f64 + 0.5) * self.h;
        }
        p
    }

    /// True when the signed coordinates land inside the box.
    #[inline]
    pub fn lattice_in_box(&self, c: [i64; 3]) -> bool {
        (0..self.d).all(|m| c[m] >= 0 && (c[m] as usize) < self.shape[m])
    }

    pub fn hi(&self) -> Point {
        let mut hi = self.lo;
        for m in 0..self.d {
            hi[m] = self.lo[m] + self.shape[m] as f64 * self.h;
        }
        hi
    }

    /// Cell volume `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.d as i32)
    }

    /// Iterate over all cell coordinate triples.
    pub fn cells(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        let s = self.shape;
        (0..s[0]).flat_map(move |i| (0..s[1]).flat_map(move |j| (0..s[2]).map(move |k| [i, j, k])))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        let g = Grid::new(3, 0.5, [0.0, 0.0, 0.0], &[4, 3, 2]);
        for idx in 0..g.len() {
            assert_eq!(g.index(g.coords(idx)), idx);
        }
    }

    #[test]
    fn cell_lookup_matches_center() {
        let g = Grid::new(2, 0.25, [-1.0, -1.0, 0.0], &[8, 8]);
        for c in g.cells() {
            let p = g.center(c);
            assert_eq!(g.cell_of(p), Some(c));
        }
        assert_eq!(g.cell_of([5.0, 0.0, 0.0]), None);
    }

    #[test]
    fn one_dimensional_grid_has_unit_cross_axes() {
        let g = Grid::new(1, 0.1, [0.0, 0.0, 0.0], &[10]);
        assert_eq!(g.shape, [10, 1, 1]);
        assert_eq!(g.len(), 10);
        let p = g.center([3, 0, 0]);
        assert!((p[0] - 0.35).abs() < 1e-15);
        assert_eq!(p[1], 0.0);
    }
}
