//! Restricting the Euclidean vector Laplacian of `ℝ³` to the unit sphere.
//!
//! A 1-form on `ℝ³` is sampled in spherical components `(v_r, v_φ, v_θ)` on
//! three shells around `r = 1`. Dropping `v_r` and every radial derivative
//! from `*d*d v` leaves one tangential operator (the Hodge candidate); the
//! coordinate formula for `div∇` with the induced metric gives another (the
//! Bochner candidate). On the unit sphere they differ by `Ric = g`.

pub mod polynomial;

use serde::{Deserialize, Serialize};

use crate::checks::{convergence_order, OrderFit};
use crate::error::{Error, Result};
use crate::field::OneFormField;
use crate::geometry::{ManifoldKind, ManifoldSpec};
use crate::library::{killing, random_stream, stream_field};
use crate::operators::{Chart, Region};
use crate::scalar::{lit, Scalar};

pub use polynomial::{CartesianField, Polynomial};

/// Divergence-free field with non-trivial Cartesian Laplacian, used to
/// exercise the full `*d*d` chain including radial derivatives.
pub const CHAIN_TEST_FIELD: [&str; 3] = ["y^2*z", "x^3", "0"];
/// Divergence-free in `ℝ³`, but its tangential part is not.
pub const DIVERGENCE_WITNESS: [&str; 3] = ["z", "0", "0"];
pub const RIGID_ROTATION: [&str; 3] = ["-y", "x", "0"];

/// Spherical components at one radius, indexed like the sphere chart.
#[derive(Clone, Debug, PartialEq)]
pub struct ShellComponents<T> {
    pub r: Vec<T>,
    pub phi: Vec<T>,
    pub theta: Vec<T>,
}

impl<T: Scalar> ShellComponents<T> {
    pub fn zeros(len: usize) -> Self {
        Self { r: vec![T::zero(); len], phi: vec![T::zero(); len], theta: vec![T::zero(); len] }
    }

    /// The pulled-back 1-form `v_φ dφ + v_θ dθ`.
    pub fn tangential(&self) -> OneFormField<T> {
        OneFormField::new(self.phi.clone(), self.theta.clone())
    }
}

/// A 1-form of `ℝ³` in spherical components on the shells
/// `{1 − h_r, 1, 1 + h_r}` over the nodes of a unit-sphere chart.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalVectorField<T> {
    pub radii: [T; 3],
    pub shells: [ShellComponents<T>; 3],
}

impl<T: Scalar> SphericalVectorField<T> {
    pub fn from_fn(chart: &Chart<T>, h_r: T, f: impl Fn(T, T, T) -> [T; 3]) -> Result<Self> {
        require_unit_sphere(chart)?;
        if !(h_r > T::zero() && h_r < lit(0.5)) {
            return Err(Error::InvalidArguments(format!("shell spacing {h_r} must lie in (0, 0.5)")));
        }
        let radii = [T::one() - h_r, T::one(), T::one() + h_r];
        let shells = radii.map(|r| {
            let mut s = ShellComponents::zeros(chart.len());
            for idx in 0..chart.len() {
                let (phi, theta) = chart.grid.coords(idx);
                let [a, b, c] = f(r, phi, theta);
                s.r[idx] = a;
                s.phi[idx] = b;
                s.theta[idx] = c;
            }
            s
        });
        Ok(Self { radii, shells })
    }

    /// Converts a Cartesian field `v_x dx + v_y dy + v_z dz` exactly at each node.
    pub fn from_cartesian(chart: &Chart<T>, v: &CartesianField, h_r: T) -> Result<Self> {
        Self::from_fn(chart, h_r, |r, phi, theta| to_spherical(v.eval(cartesian_point(r, phi, theta)), r, phi, theta))
    }

    /// Extends a tangential form to the shells with `v_r = 0` and components
    /// independent of `r`.
    pub fn from_tangential(chart: &Chart<T>, vt: &OneFormField<T>, h_r: T) -> Result<Self> {
        let mut out = Self::from_fn(chart, h_r, |_, _, _| [T::zero(); 3])?;
        for s in &mut out.shells {
            s.phi.clone_from(&vt.c1);
            s.theta.clone_from(&vt.c2);
        }
        Ok(out)
    }

    pub fn h_r(&self) -> T {
        self.radii[2] - self.radii[1]
    }

    pub fn unit_shell(&self) -> &ShellComponents<T> {
        &self.shells[1]
    }

    /// `v^T` on the unit sphere.
    pub fn tangential(&self) -> OneFormField<T> {
        self.unit_shell().tangential()
    }
}

fn require_unit_sphere<T: Scalar>(chart: &Chart<T>) -> Result<()> {
    if chart.kind() != ManifoldKind::Sphere || chart.spec.a != T::one() {
        return Err(Error::InvalidArguments("restriction works on the unit-sphere chart (sphere, a = 1)".into()));
    }
    Ok(())
}

fn cartesian_point<T: Scalar>(r: T, phi: T, theta: T) -> [T; 3] {
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    [r * sp * ct, r * sp * st, r * cp]
}

/// Covariant spherical components of a Cartesian covector at `(r, φ, θ)`.
fn to_spherical<T: Scalar>(v: [T; 3], r: T, phi: T, theta: T) -> [T; 3] {
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    [
        v[0] * sp * ct + v[1] * sp * st + v[2] * cp,
        r * (v[0] * cp * ct + v[1] * cp * st - v[2] * sp),
        r * sp * (v[1] * ct - v[0] * st),
    ]
}

/// Componentwise Cartesian Laplacian, computed exactly and converted to
/// spherical components on the shells of `chart`.
pub fn cartesian_laplacian_oracle<T: Scalar>(
    chart: &Chart<T>,
    v: &CartesianField,
    h_r: T,
) -> Result<SphericalVectorField<T>> {
    SphericalVectorField::from_cartesian(chart, &v.laplacian(), h_r)
}

fn d<T: Scalar>(chart: &Chart<T>, axis: usize, f: &[T]) -> Vec<T> {
    chart.diff.axis(axis).apply(f)
}

/// `*d*d v` on the unit shell, radial derivatives by three-point stencils.
/// For divergence-free `v` this is `−Δ v`.
pub fn star_d_star_d<T: Scalar>(chart: &Chart<T>, v: &SphericalVectorField<T>) -> ShellComponents<T> {
    let n = chart.len();
    let h = v.h_r();
    let two = lit::<T>(2.0);
    let [lo, mid, hi] = &v.shells;
    let dr = |a: &[T], b: &[T]| -> Vec<T> { a.iter().zip(b).map(|(&x, &y)| (y - x) / (two * h)).collect() };
    let drr = |a: &[T], m: &[T], b: &[T]| -> Vec<T> {
        (0..a.len()).map(|k| (a[k] - two * m[k] + b[k]) / (h * h)).collect()
    };
    let r = v.radii[1];
    let r2 = r * r;

    let dr_vr = dr(&lo.r, &hi.r);
    let dr_vphi = dr(&lo.phi, &hi.phi);
    let dr_vtheta = dr(&lo.theta, &hi.theta);
    let drr_vphi = drr(&lo.phi, &mid.phi, &hi.phi);
    let drr_vtheta = drr(&lo.theta, &mid.theta, &hi.theta);
    let dphi_dr_vr = d(chart, 0, &dr_vr);
    let dtheta_dr_vr = d(chart, 1, &dr_vr);

    // F_φθ = ∂_φ v_θ − ∂_θ v_φ.
    let dphi_vtheta = d(chart, 0, &mid.theta);
    let dtheta_vphi = d(chart, 1, &mid.phi);
    let f_pt: Vec<T> = (0..n).map(|k| dphi_vtheta[k] - dtheta_vphi[k]).collect();
    let dtheta_fpt = d(chart, 1, &f_pt);
    let sin: Vec<T> = (0..n).map(|k| chart.grid.coords(k).0.sin()).collect();
    let fpt_over_sin: Vec<T> = (0..n).map(|k| f_pt[k] / sin[k]).collect();
    let dphi_fpt_over_sin = d(chart, 0, &fpt_over_sin);

    // F_φr and F_θr for the radial component.
    let dphi_vr = d(chart, 0, &mid.r);
    let dtheta_vr = d(chart, 1, &mid.r);
    let sin_f_phir: Vec<T> = (0..n).map(|k| sin[k] * (dphi_vr[k] - dr_vphi[k])).collect();
    let f_thetar_over_sin: Vec<T> = (0..n).map(|k| (dtheta_vr[k] - dr_vtheta[k]) / sin[k]).collect();
    let a = d(chart, 0, &sin_f_phir);
    let b = d(chart, 1, &f_thetar_over_sin);

    let mut out = ShellComponents::zeros(n);
    for k in 0..n {
        let s = sin[k];
        out.phi[k] = -(drr_vphi[k] - dphi_dr_vr[k]) + dtheta_fpt[k] / (r2 * s * s);
        out.theta[k] = -(drr_vtheta[k] - dtheta_dr_vr[k]) - s * dphi_fpt_over_sin[k] / r2;
        out.r[k] = -(a[k] + b[k]) / (r2 * s);
    }
    out
}

/// The tangential part of `*d*d v` after dropping `v_r` and all radial
/// derivatives, as a formula in `(v_φ, v_θ)` on the unit sphere.
pub fn restricted_star_d_star_d<T: Scalar>(chart: &Chart<T>, vt: &OneFormField<T>) -> OneFormField<T> {
    let n = chart.len();
    let dphi_vtheta = d(chart, 0, &vt.c2);
    let dtheta_vphi = d(chart, 1, &vt.c1);
    let dtt_vphi = d(chart, 1, &dtheta_vphi);
    let dtp_vtheta = d(chart, 1, &dphi_vtheta);
    let dpp_vtheta = d(chart, 0, &dphi_vtheta);
    let dpt_vphi = d(chart, 0, &dtheta_vphi);
    let mut out = OneFormField::zeros(n);
    for k in 0..n {
        let (phi, _) = chart.grid.coords(k);
        let (s, c) = phi.sin_cos();
        let curl = dphi_vtheta[k] - dtheta_vphi[k];
        out.c1[k] = -(dtt_vphi[k] - dtp_vtheta[k]) / (s * s);
        out.c2[k] = curl / s * c - dpp_vtheta[k] + dpt_vphi[k];
    }
    out
}

/// Hodge candidate `Δ_T^H v^T = −(restricted *d*d v)`, the sign matching
/// `Δ_H = −(dδ + δd)`.
pub fn tangential_hodge_candidate<T: Scalar>(chart: &Chart<T>, v: &SphericalVectorField<T>) -> OneFormField<T> {
    restricted_star_d_star_d(chart, &v.tangential()).scaled(-T::one())
}

/// Bochner candidate `Δ_T^B v^T = (div∇) v^T` in the induced metric.
pub fn tangential_bochner_candidate<T: Scalar>(chart: &Chart<T>, vt: &OneFormField<T>) -> OneFormField<T> {
    chart.bochner_laplacian(vt)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceDivergence {
    /// `sup |div_{S²} v^T|` over the reporting region.
    pub sup: f64,
    /// `div_{ℝ³} v`, computed symbolically.
    pub r3_divergence: String,
}

/// Surface divergence of the tangential part `v − (v·n)n` of a Cartesian field.
pub fn surface_divergence_defect<T: Scalar>(chart: &Chart<T>, v: &CartesianField) -> Result<SurfaceDivergence> {
    let field = SphericalVectorField::from_cartesian(chart, v, lit(0.01))?;
    let div = chart.codifferential_1(&field.tangential());
    let sup = (0..chart.len())
        .filter(|&k| chart.in_reporting_region(k))
        .map(|k| div.values[k].abs().to_f64_lossy())
        .fold(0.0, f64::max);
    Ok(SurfaceDivergence { sup, r3_divergence: v.divergence().to_string() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictionReport {
    /// `‖Δ_T^H K − Δ_T^B K‖ / ‖K‖` on the Killing form `K`.
    pub candidate_disagreement_l2: f64,
    /// `‖Δ_T^H v − Δ_T^B v + Ric v‖ / ‖v‖` on a divergence-free stream field.
    pub bw_consistency_residual: f64,
    /// `sup |div_{S²} (z, 0, 0)^T|`.
    pub div_defect_sup: f64,
    pub resolution: usize,
    /// Relative distance of the Hodge candidate from the intrinsic Hodge
    /// Laplacian on the stream field.
    pub hodge_candidate_error: f64,
    /// `⟨Δ_T^H K, K⟩ / ‖K‖²` and `⟨Δ_T^B K, K⟩ / ‖K‖²`.
    pub killing_hodge_eigenvalue: f64,
    pub killing_bochner_eigenvalue: f64,
    /// `sup |div_{S²} (−y, x, 0)^T|`.
    pub rotation_div_sup: f64,
    pub witness_r3_divergence: String,
    /// Relative error of `−*d*d v` against the exact Cartesian Laplacian.
    pub chain_error: f64,
}

fn rel<T: Scalar>(num: T, den: T) -> f64 {
    let (n, d) = (num.to_f64_lossy(), den.to_f64_lossy());
    if n == 0.0 {
        0.0
    } else {
        n / d
    }
}

/// All restriction measurements on the unit sphere at resolution `n`.
pub fn restriction_report<T: Scalar>(spec: ManifoldSpec<T>, n: usize, seed: u64) -> Result<RestrictionReport> {
    let chart = Chart::new(spec, n)?;
    require_unit_sphere(&chart)?;
    let region = Region::Reporting;
    let h_r = chart.h();

    let k = killing(&chart);
    let kf = SphericalVectorField::from_tangential(&chart, &k, h_r)?;
    let hk = tangential_hodge_candidate(&chart, &kf);
    let bk = tangential_bochner_candidate(&chart, &k);
    let kk = chart.inner1(&k, &k, region);

    let v = stream_field(&chart, &random_stream(&chart, seed));
    let vf = SphericalVectorField::from_tangential(&chart, &v, h_r)?;
    let hv = tangential_hodge_candidate(&chart, &vf);
    let bv = tangential_bochner_candidate(&chart, &v);
    let intrinsic = chart.hodge_laplacian(&v);
    let bw = hv.sub(&bv).add(&chart.ricci_action(&v));

    let chain_field = CartesianField::parse(CHAIN_TEST_FIELD)?;
    let sv = SphericalVectorField::from_cartesian(&chart, &chain_field, h_r)?;
    let exact = cartesian_laplacian_oracle(&chart, &chain_field, h_r)?;
    let chain = star_d_star_d(&chart, &sv);
    let (mut err, mut norm) = (T::zero(), T::zero());
    let q = chart.quadrature(region);
    for idx in 0..chart.len() {
        let e = exact.unit_shell();
        for (got, want) in [(chain.r[idx], e.r[idx]), (chain.phi[idx], e.phi[idx]), (chain.theta[idx], e.theta[idx])] {
            err += q[idx] * (got + want).powi(2);
            norm += q[idx] * want.powi(2);
        }
    }

    let witness = CartesianField::parse(DIVERGENCE_WITNESS)?;
    let div = surface_divergence_defect(&chart, &witness)?;
    let rotation = surface_divergence_defect(&chart, &CartesianField::parse(RIGID_ROTATION)?)?;

    Ok(RestrictionReport {
        candidate_disagreement_l2: rel(chart.norm1(&hk.sub(&bk), region), kk.sqrt()),
        bw_consistency_residual: rel(chart.norm1(&bw, region), chart.norm1(&v, region)),
        div_defect_sup: div.sup,
        resolution: n,
        hodge_candidate_error: rel(chart.norm1(&hv.sub(&intrinsic), region), chart.norm1(&intrinsic, region)),
        killing_hodge_eigenvalue: (chart.inner1(&hk, &k, region) / kk).to_f64_lossy(),
        killing_bochner_eigenvalue: (chart.inner1(&bk, &k, region) / kk).to_f64_lossy(),
        rotation_div_sup: rotation.sup,
        witness_r3_divergence: div.r3_divergence,
        chain_error: rel(err.sqrt(), norm.sqrt()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictionSweep {
    pub reports: Vec<RestrictionReport>,
    /// Order of the Hodge candidate's distance from the intrinsic operator.
    pub hodge_order: OrderFit,
    /// Order of the Weitzenböck consistency residual.
    pub bw_order: OrderFit,
}

impl RestrictionSweep {
    pub fn finest(&self) -> &RestrictionReport {
        self.reports.last().expect("sweep has resolutions")
    }
}

pub fn restriction_sweep<T: Scalar>(spec: ManifoldSpec<T>, resolutions: &[usize], seed: u64) -> Result<RestrictionSweep> {
    let reports = std::thread::scope(|s| {
        let handles: Vec<_> =
            resolutions.iter().map(|&n| s.spawn(move || restriction_report(spec, n, seed))).collect();
        handles.into_iter().map(|h| h.join().expect("restriction worker panicked")).collect::<Result<Vec<_>>>()
    })?;
    let hs: Vec<f64> = resolutions.iter().map(|&n| 1.0 / n as f64).collect();
    let pick = |f: fn(&RestrictionReport) -> f64| reports.iter().map(f).collect::<Vec<_>>();
    let hodge_order = convergence_order(&hs, &pick(|r| r.hodge_candidate_error))?;
    let bw_order = convergence_order(&hs, &pick(|r| r.bw_consistency_residual))?;
    Ok(RestrictionSweep { reports, hodge_order, bw_order })
}
