//! Named and seeded test fields.
//!
//! Sphere fields vanish to rounding within `2·phi_min` of the caps; hyperbolic
//! fields are either harmonic differentials (uncut) or Gaussian-damped so they
//! are negligible outside the χ = 1 disk.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{OneFormField, ScalarField};
use crate::geometry::{conformal_factor, ManifoldKind};
use crate::operators::{Chart, Region};
use crate::scalar::{lit, Scalar};

/// Width parameter of the equatorial bump `exp(−k(φ−π/2)²)`.
pub const SPHERE_BUMP_K: f64 = 20.0;
/// Width of the Gaussian envelope on the Poincaré disk.
pub const DISK_GAUSSIAN_SIGMA: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldName {
    Zero,
    Killing,
    Mode,
    HarmonicDf,
    StreamBump,
}

impl FieldName {
    pub const ALL: [FieldName; 5] =
        [FieldName::Zero, FieldName::Killing, FieldName::Mode, FieldName::HarmonicDf, FieldName::StreamBump];

    pub fn as_str(self) -> &'static str {
        match self {
            FieldName::Zero => "zero",
            FieldName::Killing => "killing",
            FieldName::Mode => "mode",
            FieldName::HarmonicDf => "harmonic-df",
            FieldName::StreamBump => "stream-bump",
        }
    }
}

impl fmt::Display for FieldName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FieldName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FieldName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::InvalidArguments(format!("unknown field: {s}")))
    }
}

/// Builds a registry field on `chart`.
pub fn named_field<T: Scalar>(chart: &Chart<T>, name: FieldName) -> Result<OneFormField<T>> {
    let kind = chart.kind();
    match (name, kind) {
        (FieldName::Zero, _) => Ok(OneFormField::zeros(chart.len())),
        (FieldName::Killing, _) => Ok(killing(chart)),
        (FieldName::Mode, ManifoldKind::Torus) => Ok(chart.sample_one_form(|_, y| [y.sin(), T::zero()])),
        (FieldName::HarmonicDf, ManifoldKind::Hyperbolic) => Ok(harmonic_df(chart, 1)),
        (FieldName::StreamBump, _) => Ok(stream_field(chart, &stream_bump(chart))),
        (name, kind) => Err(Error::InvalidArguments(format!("field {name} is not defined on the {kind}"))),
    }
}

/// Killing 1-form: `(0, sin²φ/a²)` on the sphere, the rotation `λ²(−y, x)` on
/// the disk, and the translation `(0, 1)` on the torus.
pub fn killing<T: Scalar>(chart: &Chart<T>) -> OneFormField<T> {
    let spec = chart.spec;
    match spec.kind {
        ManifoldKind::Torus => chart.sample_one_form(|_, _| [T::zero(), T::one()]),
        ManifoldKind::Sphere => chart.sample_one_form(|phi, _| {
            let s = phi.sin();
            [T::zero(), s * s / (spec.a * spec.a)]
        }),
        ManifoldKind::Hyperbolic => chart.sample_one_form(|x, y| {
            let l = conformal_factor(&spec, x, y);
            [-l * l * y, l * l * x]
        }),
    }
}

/// `dF` for `F = Re zᵈ` on the disk chart, without cutoff.
pub fn harmonic_df<T: Scalar>(chart: &Chart<T>, degree: u32) -> OneFormField<T> {
    let d = T::from_usize_lossy(degree as usize);
    chart.sample_one_form(|x, y| {
        // z^{d-1} by repeated complex multiplication
        let (mut re, mut im) = (T::one(), T::zero());
        for _ in 1..degree.max(1) {
            let nre = re * x - im * y;
            im = re * y + im * x;
            re = nre;
        }
        [d * re, -d * im]
    })
}

/// `F = Re zᵈ`.
pub fn harmonic_potential<T: Scalar>(chart: &Chart<T>, degree: u32) -> ScalarField<T> {
    chart.sample_scalar(|x, y| {
        let (mut re, mut im) = (T::one(), T::zero());
        for _ in 0..degree {
            let nre = re * x - im * y;
            im = re * y + im * x;
            re = nre;
        }
        re
    })
}

/// χ·dF.
pub fn harmonic_df_cut<T: Scalar>(chart: &Chart<T>, degree: u32) -> OneFormField<T> {
    harmonic_df(chart, degree).mul_pointwise(&chart.grid.cutoff.values)
}

/// `exp(−k(φ−π/2)²)`.
pub fn sphere_bump<T: Scalar>(phi: T) -> T {
    let s = phi - T::FRAC_PI_2();
    (-lit::<T>(SPHERE_BUMP_K) * s * s).exp()
}

fn disk_gaussian<T: Scalar>(x: T, y: T) -> T {
    let s = lit::<T>(DISK_GAUSSIAN_SIGMA);
    (-(x * x + y * y) / (s * s)).exp()
}

/// Default stream function of each geometry.
pub fn stream_bump<T: Scalar>(chart: &Chart<T>) -> ScalarField<T> {
    match chart.kind() {
        ManifoldKind::Torus => chart.sample_scalar(|x, y| x.sin() * y.cos()),
        ManifoldKind::Sphere => chart.sample_scalar(|phi, theta| sphere_bump(phi) * theta.sin()),
        ManifoldKind::Hyperbolic => chart.sample_scalar(|x, y| disk_gaussian(x, y) * (x + lit::<T>(0.5) * x * y)),
    }
}

/// Divergence-free 1-form with stream function ψ: `u = M1⁻¹(D₂ᵀqψ, −D₁ᵀqψ)`
/// with `q` the quadrature weights, i.e. `u_j = g_ji V^i/√|g|` with
/// `V = (∂₂ψ, −∂₁ψ)` in the interior.
///
/// The discrete codifferential of the result is `W0⁻¹(D₂D₁ − D₁D₂)ᵀqψ`,
/// which vanishes identically on the tensor-product grids.
pub fn stream_field<T: Scalar>(chart: &Chart<T>, psi: &ScalarField<T>) -> OneFormField<T> {
    let q = chart.quadrature(Region::Chart);
    let qpsi: Vec<T> = psi.values.iter().zip(q).map(|(&p, &w)| p * w).collect();
    let x1 = chart.diff.d2.apply_transpose(&qpsi);
    let x2: Vec<T> = chart.diff.d1.apply_transpose(&qpsi).into_iter().map(|v| -v).collect();
    chart.unweigh_one_form(&OneFormField::new(x1, x2))
}

/// Seeded smooth stream function adapted to the geometry.
pub fn random_stream<T: Scalar>(chart: &Chart<T>, seed: u64) -> ScalarField<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match chart.kind() {
        ManifoldKind::Torus => {
            let modes = trig_modes(&mut rng, 3);
            chart.sample_scalar(|x, y| eval_trig(&modes, x, y))
        }
        ManifoldKind::Sphere => {
            let modes = trig_modes(&mut rng, 2);
            chart.sample_scalar(|phi, theta| {
                sphere_bump(phi) * eval_trig(&modes, phi - T::FRAC_PI_2(), theta)
            })
        }
        ManifoldKind::Hyperbolic => {
            let c = poly_coeffs(&mut rng);
            chart.sample_scalar(|x, y| disk_gaussian(x, y) * eval_poly(&c, x, y))
        }
    }
}

/// Seeded smooth 1-form (not divergence-free).
pub fn random_one_form<T: Scalar>(chart: &Chart<T>, seed: u64) -> OneFormField<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match chart.kind() {
        ManifoldKind::Torus => {
            let (m1, m2) = (trig_modes(&mut rng, 3), trig_modes(&mut rng, 3));
            chart.sample_one_form(|x, y| [eval_trig(&m1, x, y), eval_trig(&m2, x, y)])
        }
        ManifoldKind::Sphere => {
            let (m1, m2) = (trig_modes(&mut rng, 2), trig_modes(&mut rng, 2));
            chart.sample_one_form(|phi, theta| {
                let b = sphere_bump(phi);
                let s = phi - T::FRAC_PI_2();
                [b * eval_trig(&m1, s, theta), b * phi.sin() * eval_trig(&m2, s, theta)]
            })
        }
        ManifoldKind::Hyperbolic => {
            let (c1, c2) = (poly_coeffs(&mut rng), poly_coeffs(&mut rng));
            chart.sample_one_form(|x, y| {
                let g = disk_gaussian(x, y);
                [g * eval_poly(&c1, x, y), g * eval_poly(&c2, x, y)]
            })
        }
    }
}

/// Seeded smooth function (for adjointness tests and projections).
pub fn random_scalar<T: Scalar>(chart: &Chart<T>, seed: u64) -> ScalarField<T> {
    random_stream(chart, seed ^ 0x5ca1_ab1e)
}

type Mode = (i32, i32, f64, f64);

fn trig_modes(rng: &mut ChaCha8Rng, kmax: i32) -> Vec<Mode> {
    let mut out = Vec::new();
    for m in 0..=kmax {
        for n in -kmax..=kmax {
            if m == 0 && n <= 0 {
                continue;
            }
            out.push((m, n, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
    }
    out
}

fn eval_trig<T: Scalar>(modes: &[Mode], x: T, y: T) -> T {
    let mut s = T::zero();
    for &(m, n, a, b) in modes {
        let arg = lit::<T>(m as f64) * x + lit::<T>(n as f64) * y;
        s += lit::<T>(a) * arg.cos() + lit::<T>(b) * arg.sin();
    }
    s
}

fn poly_coeffs(rng: &mut ChaCha8Rng) -> [f64; 6] {
    std::array::from_fn(|_| rng.gen_range(-1.0..1.0))
}

fn eval_poly<T: Scalar>(c: &[f64; 6], x: T, y: T) -> T {
    let l = |v: f64| lit::<T>(v);
    l(c[0]) + l(c[1]) * x + l(c[2]) * y + l(c[3]) * x * x + l(c[4]) * x * y + l(c[5]) * y * y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ManifoldSpec;

    #[test]
    fn stream_fields_are_discretely_divergence_free() {
        for spec in [ManifoldSpec::<f64>::torus(), ManifoldSpec::sphere(2.0)] {
            let c = Chart::new(spec, 48).unwrap();
            let u = stream_field(&c, &random_stream(&c, 7));
            let div = c.codifferential_1(&u);
            assert!(div.max_abs() <= 1e-10 * u.max_abs(), "{}", div.max_abs());
        }
    }

    #[test]
    fn names_round_trip() {
        for n in FieldName::ALL {
            assert_eq!(n.as_str().parse::<FieldName>().unwrap(), n);
        }
        assert!("vortex".parse::<FieldName>().is_err());
    }

    #[test]
    fn harmonic_df_degree_two() {
        let c = Chart::new(ManifoldSpec::<f64>::hyperbolic(1.0), 16).unwrap();
        let u = harmonic_df(&c, 2);
        let idx = c.grid.index(10, 5);
        let (x, y) = c.grid.coords(idx);
        assert!((u.c1[idx] - 2.0 * x).abs() < 1e-15 && (u.c2[idx] + 2.0 * y).abs() < 1e-15);
    }
}
