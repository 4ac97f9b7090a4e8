//! Identity checks with relative residuals and convergence sweeps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::OneFormField;
use crate::geometry::{ManifoldKind, ManifoldSpec};
use crate::field::TwoFormField;
use crate::library::{random_one_form, random_scalar, random_stream, stream_field};
use crate::operators::{Chart, Region};
use crate::scalar::{lit, Scalar};

/// Residuals below this (relative) are treated as exact rounding noise.
pub const EXACT_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub check: String,
    pub manifold: ManifoldKind,
    pub a: f64,
    pub n: usize,
    pub l2_rel: f64,
    pub sup_rel: f64,
    pub observed_order: Option<f64>,
}

impl ResidualReport {
    fn from_fields<T: Scalar>(
        check: &str,
        chart: &Chart<T>,
        residual: &OneFormField<T>,
        reference: &OneFormField<T>,
    ) -> Self {
        let r = Region::Reporting;
        Self {
            check: check.to_string(),
            manifold: chart.kind(),
            a: chart.spec.a.to_f64_lossy(),
            n: chart.n(),
            l2_rel: ratio(chart.norm1(residual, r), chart.norm1(reference, r)),
            sup_rel: ratio(chart.sup1(residual, r), chart.sup1(reference, r)),
            observed_order: None,
        }
    }
}

/// `num/den`, with `0/0 = 0`.
fn ratio<T: Scalar>(num: T, den: T) -> f64 {
    let (n, d) = (num.to_f64_lossy(), den.to_f64_lossy());
    if n == 0.0 {
        0.0
    } else {
        n / d
    }
}

/// `r = −(div∇)u − (dδ + δd)u + Ric(u)`, with `−(div∇)u` as reference.
pub fn weitzenbock_residual<T: Scalar>(chart: &Chart<T>, u: &OneFormField<T>) -> (OneFormField<T>, OneFormField<T>) {
    let lhs = chart.bochner_laplacian(u).scaled(-T::one());
    let hodge = chart.hodge_laplacian(u);
    let r = lhs.add(&hodge).add(&chart.ricci_action(u));
    (r, lhs)
}

pub fn verify_weitzenbock<T: Scalar>(chart: &Chart<T>, u: &OneFormField<T>) -> ResidualReport {
    let (r, lhs) = weitzenbock_residual(chart, u);
    ResidualReport::from_fields("weitzenbock", chart, &r, &lhs)
}

/// `r = 2Def*Def u − (2dδ + δd)u + 2Ric(u)`, with `2Def*Def u` as reference.
pub fn divdef_residual<T: Scalar>(chart: &Chart<T>, u: &OneFormField<T>) -> (OneFormField<T>, OneFormField<T>) {
    let two = lit::<T>(2.0);
    let lhs = chart.def_adjoint(&chart.deformation(u)).scaled(two);
    let dd = chart.exterior_d0(&chart.codifferential_1(u));
    let rhs = dd.scaled(two).add(&chart.codifferential_2(&chart.exterior_d1(u)));
    let r = lhs.sub(&rhs).add(&chart.ricci_action(u).scaled(two));
    (r, lhs)
}

pub fn verify_divdef<T: Scalar>(chart: &Chart<T>, u: &OneFormField<T>) -> ResidualReport {
    let (r, lhs) = divdef_residual(chart, u);
    ResidualReport::from_fields("divdef", chart, &r, &lhs)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DBoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Absolute and relative slack of the `‖du‖ ≤ √2‖∇u‖` check.
pub const D_BOUND_TOL: f64 = 1e-8;
pub const D_BOUND_SLACK: f64 = 0.02;

/// `‖du‖ ≤ √2‖∇u‖` on the reporting region.
pub fn verify_d_bound<T: Scalar>(chart: &Chart<T>, u: &OneFormField<T>) -> DBoundReport {
    let r = Region::Reporting;
    let lhs = chart.norm2(&chart.exterior_d1(u), r).to_f64_lossy();
    let rhs = std::f64::consts::SQRT_2 * chart.norm_tensor(&chart.covariant_derivative(u), r).to_f64_lossy();
    DBoundReport { lhs, rhs, ok: lhs <= rhs * (1.0 + D_BOUND_SLACK) + D_BOUND_TOL }
}

/// Largest accepted `‖δu‖ / (‖du‖ + a‖u‖)` for the sphere norm identity.
pub const DIVERGENCE_TOL: f64 = 1e-6;

/// Relative defect `|‖du‖² − ‖∇u‖² − a²‖u‖²| / ‖du‖²` over the whole band.
pub fn verify_sphere_norm_identity<T: Scalar>(chart: &Chart<T>, u: &OneFormField<T>) -> Result<ResidualReport> {
    if chart.kind() != ManifoldKind::Sphere {
        return Err(Error::InvalidArguments(format!("norm identity needs the sphere, got {}", chart.kind())));
    }
    let r = Region::Chart;
    let a = chart.spec.a;
    let du = chart.norm2(&chart.exterior_d1(u), r);
    let nu = chart.norm1(u, r);
    let div = chart.norm0(&chart.codifferential_1(u), r);
    let scale = du + a * nu;
    if div > lit::<T>(DIVERGENCE_TOL) * scale {
        return Err(Error::RejectedInput(format!(
            "field is not divergence-free: |δu| = {:e} against scale {:e}",
            div.to_f64_lossy(),
            scale.to_f64_lossy()
        )));
    }
    let grad = chart.norm_tensor(&chart.covariant_derivative(u), r);
    let defect = (du * du - grad * grad - a * a * nu * nu).abs();
    let rel = ratio(defect, du * du);
    Ok(ResidualReport {
        check: "sphere_norm_identity".into(),
        manifold: chart.kind(),
        a: a.to_f64_lossy(),
        n: chart.n(),
        l2_rel: rel,
        sup_rel: rel,
        observed_order: None,
    })
}

/// Pairing defects `|⟨Ax, y⟩ − ⟨x, A*y⟩| / (‖x‖‖y‖)` over the whole chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdjointnessReport {
    pub manifold: ManifoldKind,
    pub n: usize,
    pub d0: f64,
    pub d1: f64,
    pub deformation: f64,
    pub covariant: f64,
}

impl AdjointnessReport {
    pub fn max(&self) -> f64 {
        self.d0.max(self.d1).max(self.deformation).max(self.covariant)
    }
}

/// Pairs seeded random fields against each operator and its adjoint.
pub fn adjointness_defects<T: Scalar>(chart: &Chart<T>, seed: u64) -> AdjointnessReport {
    let r = Region::Chart;
    let f = random_scalar(chart, seed);
    let u = random_one_form(chart, seed.wrapping_add(1));
    let v = random_one_form(chart, seed.wrapping_add(2));
    let w = TwoFormField::new(random_scalar(chart, seed.wrapping_add(3)).values);
    let s = chart.deformation(&v);
    let a = chart.covariant_derivative(&v);
    let rel = |lhs: T, rhs: T, nx: T, ny: T| ratio((lhs - rhs).abs(), nx * ny);
    AdjointnessReport {
        manifold: chart.kind(),
        n: chart.n(),
        d0: rel(
            chart.inner1(&chart.exterior_d0(&f), &u, r),
            chart.inner0(&f, &chart.codifferential_1(&u), r),
            chart.norm0(&f, r),
            chart.norm1(&u, r),
        ),
        d1: rel(
            chart.inner2(&chart.exterior_d1(&u), &w, r),
            chart.inner1(&u, &chart.codifferential_2(&w), r),
            chart.norm1(&u, r),
            chart.norm2(&w, r),
        ),
        deformation: rel(
            chart.inner_sym(&chart.deformation(&u), &s, r),
            chart.inner1(&u, &chart.def_adjoint(&s), r),
            chart.norm1(&u, r),
            chart.norm_sym(&s, r),
        ),
        covariant: rel(
            chart.inner_tensor(&chart.covariant_derivative(&u), &a, r),
            chart.inner1(&u, &chart.covariant_adjoint(&a), r),
            chart.norm1(&u, r),
            chart.norm_tensor(&a, r),
        ),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    /// Least-squares slope of `log r` against `log h`; `None` when exact.
    pub order: Option<f64>,
    pub monotone: bool,
    /// Every residual is below [`EXACT_FLOOR`].
    pub exact: bool,
}

impl OrderFit {
    /// Passes an order threshold; exact residuals pass any threshold.
    pub fn at_least(&self, min: f64) -> bool {
        self.exact || self.order.is_some_and(|p| p >= min)
    }
}

/// Fits the observed order of residuals measured at spacings `hs`.
pub fn convergence_order(hs: &[f64], residuals: &[f64]) -> Result<OrderFit> {
    if hs.len() != residuals.len() || hs.len() < 3 {
        return Err(Error::InvalidArguments("a convergence fit needs at least three resolutions".into()));
    }
    let monotone = residuals.windows(2).all(|w| w[1] <= w[0]);
    if residuals.iter().all(|&r| r < EXACT_FLOOR) {
        return Ok(OrderFit { order: None, monotone, exact: true });
    }
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = residuals.iter().map(|r| r.max(f64::MIN_POSITIVE).ln()).collect();
    Ok(OrderFit { order: Some(slope(&xs, &ys)), monotone, exact: false })
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityCheck {
    Weitzenbock,
    Divdef,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub reports: Vec<ResidualReport>,
    pub fit: OrderFit,
}

impl Sweep {
    pub fn finest(&self) -> &ResidualReport {
        self.reports.last().expect("sweep has resolutions")
    }
}

/// Runs an identity check on the seeded test field of the geometry at each
/// resolution. Weitzenböck uses a generic smooth 1-form, div-Def a discrete
/// stream field.
pub fn identity_sweep<T: Scalar>(
    spec: ManifoldSpec<T>,
    check: IdentityCheck,
    resolutions: &[usize],
    seed: u64,
) -> Result<Sweep> {
    let reports = std::thread::scope(|s| {
        let handles: Vec<_> = resolutions
            .iter()
            .map(|&n| {
                s.spawn(move || -> Result<ResidualReport> {
                    let chart = Chart::new(spec, n)?;
                    Ok(match check {
                        IdentityCheck::Weitzenbock => verify_weitzenbock(&chart, &random_one_form(&chart, seed)),
                        IdentityCheck::Divdef => {
                            verify_divdef(&chart, &stream_field(&chart, &random_stream(&chart, seed)))
                        }
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect::<Result<Vec<_>>>()
    })?;
    let hs: Vec<f64> = resolutions.iter().map(|&n| 1.0 / n as f64).collect();
    let l2: Vec<f64> = reports.iter().map(|r| r.l2_rel).collect();
    let fit = convergence_order(&hs, &l2)?;
    let mut reports = reports;
    if let Some(last) = reports.last_mut() {
        last.observed_order = fit.order;
    }
    Ok(Sweep { reports, fit })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let hs = [0.1, 0.05, 0.025];
        let rs: Vec<f64> = hs.iter().map(|h| 3.0 * h * h).collect();
        let fit = convergence_order(&hs, &rs).unwrap();
        assert!((fit.order.unwrap() - 2.0).abs() < 1e-12 && fit.monotone && !fit.exact);
    }

    #[test]
    fn non_monotone_is_flagged() {
        let fit = convergence_order(&[0.1, 0.05, 0.025], &[1e-3, 2e-3, 1e-4]).unwrap();
        assert!(!fit.monotone && fit.order.is_some());
    }

    #[test]
    fn rounding_level_residuals_are_exact() {
        let fit = convergence_order(&[0.1, 0.05, 0.025], &[1e-15, 3e-16, 2e-15]).unwrap();
        assert!(fit.exact && fit.at_least(1.9));
    }

    #[test]
    fn too_few_resolutions() {
        assert!(convergence_order(&[0.1, 0.05], &[1.0, 0.25]).is_err());
    }

    #[test]
    fn zero_field_has_zero_defect() {
        let c = Chart::new(ManifoldSpec::<f64>::sphere(1.0), 16).unwrap();
        let rep = verify_sphere_norm_identity(&c, &OneFormField::zeros(c.len())).unwrap();
        assert_eq!(rep.l2_rel, 0.0);
        let b = verify_d_bound(&c, &OneFormField::zeros(c.len()));
        assert!(b.ok && b.lhs == 0.0 && b.rhs == 0.0);
    }
}
