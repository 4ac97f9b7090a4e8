//! Compressed sparse rows and the one-dimensional difference stencils
//! every chart operator is assembled from.

use crate::geometry::ChartGrid;
use crate::scalar::{lit, Scalar};

#[derive(Clone, Debug)]
pub struct Csr<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Scalar> Csr<T> {
    pub fn from_rows(ncols: usize, rows: Vec<Vec<(usize, T)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in &rows {
            for &(c, v) in row {
                debug_assert!(c < ncols);
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self { nrows: rows.len(), ncols, row_ptr, cols, vals }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    /// `Aᵀ x`.
    pub fn apply_transpose(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.nrows);
        let mut out = vec![T::zero(); self.ncols];
        for (r, &xr) in x.iter().enumerate() {
            if xr == T::zero() {
                continue;
            }
            for (c, v) in self.row(r) {
                out[c] += v * xr;
            }
        }
        out
    }

    /// `|A| |x|`, the cancellation-free magnitude of `A x`.
    pub fn apply_abs(&self, x: &[T]) -> Vec<T> {
        (0..self.nrows).map(|r| self.row(r).map(|(c, v)| v.abs() * x[c].abs()).sum()).collect()
    }

    /// `|Aᵀ| |x|`.
    pub fn apply_transpose_abs(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.ncols];
        for (r, &xr) in x.iter().enumerate() {
            for (c, v) in self.row(r) {
                out[c] += v.abs() * xr.abs();
            }
        }
        out
    }

    /// `Σ_r w_r A_rc²` for every column `c`, i.e. the diagonal of `Aᵀ W A`.
    pub fn weighted_column_squares(&self, w: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.ncols];
        for (r, &wr) in w.iter().enumerate() {
            for (c, v) in self.row(r) {
                out[c] += wr * v * v;
            }
        }
        out
    }
}

/// First-derivative operators along each chart axis.
///
/// Periodic axes use the central stencil with wrap-around. On bounded axes
/// (and next to masked nodes) a node falls back to the second-order one-sided
/// stencil, then to a first-order one when fewer neighbors are available.
#[derive(Clone, Debug)]
pub struct DiffOps<T> {
    pub d1: Csr<T>,
    pub d2: Csr<T>,
}

impl<T: Scalar> DiffOps<T> {
    pub fn new(grid: &ChartGrid<T>) -> Self {
        Self { d1: axis_operator(grid, 0), d2: axis_operator(grid, 1) }
    }

    pub fn axis(&self, k: usize) -> &Csr<T> {
        if k == 0 {
            &self.d1
        } else {
            &self.d2
        }
    }
}

fn axis_operator<T: Scalar>(grid: &ChartGrid<T>, axis: usize) -> Csr<T> {
    let (n_along, h) = if axis == 0 { (grid.n1, grid.d1) } else { (grid.n2, grid.d2) };
    let periodic = grid.periodic[axis];
    let half_inv = lit::<T>(0.5) / h;
    let inv = T::one() / h;
    let two_inv = lit::<T>(2.0) / h;
    let three_half_inv = lit::<T>(1.5) / h;

    let mut rows = Vec::with_capacity(grid.len());
    for i in 0..grid.n1 {
        for j in 0..grid.n2 {
            let idx = grid.index(i, j);
            if !grid.active[idx] {
                rows.push(Vec::new());
                continue;
            }
            let pos = if axis == 0 { i } else { j };
            // neighbor at signed offset along the axis, if it exists and is active
            let nb = |off: isize| -> Option<usize> {
                let p = pos as isize + off;
                let p = if periodic {
                    p.rem_euclid(n_along as isize) as usize
                } else if p < 0 || p >= n_along as isize {
                    return None;
                } else {
                    p as usize
                };
                let k = if axis == 0 { grid.index(p, j) } else { grid.index(i, p) };
                grid.active[k].then_some(k)
            };
            let row = match (nb(-1), nb(1)) {
                (Some(m), Some(p)) => vec![(m, -half_inv), (p, half_inv)],
                (Some(m), None) => match nb(-2) {
                    Some(mm) => vec![(idx, three_half_inv), (m, -two_inv), (mm, half_inv)],
                    None => vec![(idx, inv), (m, -inv)],
                },
                (None, Some(p)) => match nb(2) {
                    Some(pp) => vec![(idx, -three_half_inv), (p, two_inv), (pp, -half_inv)],
                    None => vec![(idx, -inv), (p, inv)],
                },
                (None, None) => Vec::new(),
            };
            rows.push(row);
        }
    }
    Csr::from_rows(grid.len(), rows)
}
