//! Discrete sections sampled at grid nodes.
//!
//! Fields are plain component vectors indexed like [`ChartGrid`](crate::ChartGrid)
//! nodes; they carry no reference to the grid they live on.

use crate::scalar::Scalar;

fn axpy<T: Scalar>(y: &mut [T], a: T, x: &[T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn lincomb<T: Scalar>(a: T, x: &[T], b: T, y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(&xi, &yi)| a * xi + b * yi).collect()
}

fn max_abs<T: Scalar>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

/// Function on the chart: pressure, potentials, divergences.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> ScalarField<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn zeros(len: usize) -> Self {
        Self::constant(len, T::zero())
    }

    pub fn constant(len: usize, c: T) -> Self {
        Self { values: vec![c; len] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, s: T) -> Self {
        Self::new(self.values.iter().map(|&v| v * s).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(lincomb(T::one(), &self.values, -T::one(), &other.values))
    }

    pub fn axpy(&mut self, a: T, x: &Self) {
        axpy(&mut self.values, a, &x.values);
    }

    pub fn max_abs(&self) -> T {
        max_abs(&self.values)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Covariant 1-form `u_1 dx¹ + u_2 dx²`, identified with a vector field through the metric.
#[derive(Clone, Debug, PartialEq)]
pub struct OneFormField<T> {
    pub c1: Vec<T>,
    pub c2: Vec<T>,
}

impl<T: Scalar> OneFormField<T> {
    pub fn new(c1: Vec<T>, c2: Vec<T>) -> Self {
        debug_assert_eq!(c1.len(), c2.len());
        Self { c1, c2 }
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(vec![T::zero(); len], vec![T::zero(); len])
    }

    pub fn len(&self) -> usize {
        self.c1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c1.is_empty()
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [T; 2] {
        [self.c1[idx], self.c2[idx]]
    }

    #[inline]
    pub fn set(&mut self, idx: usize, v: [T; 2]) {
        self.c1[idx] = v[0];
        self.c2[idx] = v[1];
    }

    pub fn component(&self, k: usize) -> &[T] {
        if k == 0 {
            &self.c1
        } else {
            &self.c2
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self::new(self.c1.iter().map(|&v| v * s).collect(), self.c2.iter().map(|&v| v * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.lincomb(T::one(), other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.lincomb(T::one(), other, -T::one())
    }

    /// `a·self + b·other`.
    pub fn lincomb(&self, a: T, other: &Self, b: T) -> Self {
        Self::new(lincomb(a, &self.c1, b, &other.c1), lincomb(a, &self.c2, b, &other.c2))
    }

    pub fn axpy(&mut self, a: T, x: &Self) {
        axpy(&mut self.c1, a, &x.c1);
        axpy(&mut self.c2, a, &x.c2);
    }

    /// Pointwise multiplication by a scalar function.
    pub fn mul_pointwise(&self, f: &[T]) -> Self {
        Self::new(
            self.c1.iter().zip(f).map(|(&u, &w)| u * w).collect(),
            self.c2.iter().zip(f).map(|(&u, &w)| u * w).collect(),
        )
    }

    pub fn max_abs(&self) -> T {
        max_abs(&self.c1).max(max_abs(&self.c2))
    }

    pub fn is_finite(&self) -> bool {
        self.c1.iter().chain(&self.c2).all(|v| v.is_finite())
    }

    /// Flattened `[c1; c2]` view used by the Krylov solvers.
    pub fn to_flat(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(2 * self.len());
        out.extend_from_slice(&self.c1);
        out.extend_from_slice(&self.c2);
        out
    }

    pub fn from_flat(flat: &[T]) -> Self {
        let n = flat.len() / 2;
        Self::new(flat[..n].to_vec(), flat[n..].to_vec())
    }
}

/// 2-form `w dx¹∧dx²`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoFormField<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> TwoFormField<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(vec![T::zero(); len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> T {
        max_abs(&self.values)
    }
}

/// Symmetric covariant 2-tensor; the off-diagonal entry is stored once.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensorField<T> {
    pub s11: Vec<T>,
    pub s12: Vec<T>,
    pub s22: Vec<T>,
}

impl<T: Scalar> SymTensorField<T> {
    pub fn zeros(len: usize) -> Self {
        Self { s11: vec![T::zero(); len], s12: vec![T::zero(); len], s22: vec![T::zero(); len] }
    }

    pub fn len(&self) -> usize {
        self.s11.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s11.is_empty()
    }

    #[inline]
    pub fn get(&self, idx: usize, i: usize, j: usize) -> T {
        match (i, j) {
            (0, 0) => self.s11[idx],
            (1, 1) => self.s22[idx],
            _ => self.s12[idx],
        }
    }

    pub fn lincomb(&self, a: T, other: &Self, b: T) -> Self {
        Self {
            s11: lincomb(a, &self.s11, b, &other.s11),
            s12: lincomb(a, &self.s12, b, &other.s12),
            s22: lincomb(a, &self.s22, b, &other.s22),
        }
    }

    pub fn max_abs(&self) -> T {
        max_abs(&self.s11).max(max_abs(&self.s12)).max(max_abs(&self.s22))
    }
}

/// General covariant 2-tensor, `t[i][j]` holding the `(i, j)` component.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField<T> {
    pub t: [[Vec<T>; 2]; 2],
}

impl<T: Scalar> TensorField<T> {
    pub fn zeros(len: usize) -> Self {
        let z = || vec![T::zero(); len];
        Self { t: [[z(), z()], [z(), z()]] }
    }

    pub fn len(&self) -> usize {
        self.t[0][0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Symmetric part `½(t_ij + t_ji)`.
    pub fn symmetrize(&self) -> SymTensorField<T> {
        let half = T::lit(0.5);
        SymTensorField {
            s11: self.t[0][0].clone(),
            s12: lincomb(half, &self.t[0][1], half, &self.t[1][0]),
            s22: self.t[1][1].clone(),
        }
    }
}
