//! Preconditioned conjugate gradients for the symmetric systems of the stepper.

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOptions {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, max_iter: 5000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    /// `‖b − Ax‖` of the returned iterate over the reference magnitude.
    pub rel_residual: f64,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Solves `Ax = b` for symmetric positive (semi)definite `A`, starting from `x`.
///
/// The residual is measured against `reference` (default `‖b‖`); callers
/// whose right-hand side is the result of cancellation pass its
/// cancellation-free magnitude instead.
///
/// `abs_apply` must return `|A||x|` (entrywise absolute values); it sets the
/// rounding floor below which the residual cannot be driven, so a tolerance
/// tighter than what the arithmetic allows ends the iteration instead of
/// stagnating.
pub fn conjugate_gradient<T: Scalar>(
    apply: impl Fn(&[T]) -> Vec<T>,
    abs_apply: impl Fn(&[T]) -> Vec<T>,
    precondition: impl Fn(&[T]) -> Vec<T>,
    b: &[T],
    x: &mut [T],
    opts: CgOptions,
    reference: Option<T>,
) -> Result<CgOutcome> {
    let b_norm = reference.unwrap_or_else(|| dot(b, b).sqrt());
    if b_norm == T::zero() || dot(b, b) == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok(CgOutcome { iterations: 0, rel_residual: 0.0 });
    }
    let tol = lit::<T>(opts.rel_tol) * b_norm;
    let eps = T::epsilon() * lit::<T>(64.0);
    let floor = |x: &[T]| {
        let m = abs_apply(x);
        let bm: Vec<T> = m.iter().zip(b).map(|(&a, &bb)| a + bb.abs()).collect();
        eps * dot(&bm, &bm).sqrt()
    };

    let ax = apply(x);
    let mut r: Vec<T> = b.iter().zip(&ax).map(|(&bb, &a)| bb - a).collect();
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut r_norm = dot(&r, &r).sqrt();
    for it in 0..opts.max_iter {
        if r_norm <= tol || r_norm <= floor(x) {
            return Ok(CgOutcome { iterations: it, rel_residual: (r_norm / b_norm).to_f64_lossy() });
        }
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap <= T::zero() {
            break;
        }
        let alpha = rz / pap;
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        r_norm = dot(&r, &r).sqrt();
        z = precondition(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..p.len() {
            p[i] = z[i] + beta * p[i];
        }
    }
    // recompute the true residual before judging
    let ax = apply(x);
    let true_r: Vec<T> = b.iter().zip(&ax).map(|(&bb, &a)| bb - a).collect();
    let rn = dot(&true_r, &true_r).sqrt();
    if rn <= tol || rn <= floor(x) {
        return Ok(CgOutcome { iterations: opts.max_iter, rel_residual: (rn / b_norm).to_f64_lossy() });
    }
    Err(Error::ProjectionFailure { residual: (rn / b_norm).to_f64_lossy(), iterations: opts.max_iter })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_spd_system() {
        let a = [[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]];
        let apply = |x: &[f64]| (0..3).map(|i| (0..3).map(|j| a[i][j] * x[j]).sum()).collect::<Vec<f64>>();
        let abs_apply = |x: &[f64]| (0..3).map(|i| (0..3).map(|j| a[i][j] * x[j].abs()).sum()).collect();
        let diag = |r: &[f64]| (0..3).map(|i| r[i] / a[i][i]).collect();
        let b = [1.0, 2.0, 3.0];
        let mut x = [0.0; 3];
        let out = conjugate_gradient(apply, abs_apply, diag, &b, &mut x, CgOptions::default(), None).unwrap();
        let ax = apply(&x);
        for i in 0..3 {
            assert!((ax[i] - b[i]).abs() < 1e-9);
        }
        assert!(out.iterations <= 3);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let mut x = [1.0, 2.0];
        let id = |v: &[f64]| v.to_vec();
        let out = conjugate_gradient(id, id, id, &[0.0, 0.0], &mut x, CgOptions::default(), None).unwrap();
        assert_eq!(x, [0.0, 0.0]);
        assert_eq!(out.iterations, 0);
    }
}
