//! Model geometries: the flat torus, the round sphere `S²(1/a)` and the
//! hyperbolic plane `H²(−a²)` in the Poincaré disk chart.
//!
//! Everything here is a pure function of a [`ManifoldSpec`] and a
//! resolution; the resulting grids, metrics and connection coefficients are
//! immutable once built.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, SymTensorField};
use crate::scalar::{lit, Scalar};
use crate::sparse::DiffOps;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    Torus,
    Sphere,
    Hyperbolic,
}

impl ManifoldKind {
    pub const ALL: [ManifoldKind; 3] = [ManifoldKind::Torus, ManifoldKind::Sphere, ManifoldKind::Hyperbolic];

    pub fn as_str(self) -> &'static str {
        match self {
            ManifoldKind::Torus => "torus",
            ManifoldKind::Sphere => "sphere",
            ManifoldKind::Hyperbolic => "hyperbolic",
        }
    }
}

impl fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ManifoldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "torus" => Ok(ManifoldKind::Torus),
            "sphere" => Ok(ManifoldKind::Sphere),
            "hyperbolic" => Ok(ManifoldKind::Hyperbolic),
            other => Err(Error::InvalidArguments(format!("unknown manifold: {other}"))),
        }
    }
}

/// Which model geometry, its curvature scale and its chart truncation.
///
/// `a` is the inverse sphere radius, respectively the square root of minus
/// the sectional curvature of the hyperbolic plane; it is ignored on the
/// torus. `phi_min` only affects the sphere, `r0` only the hyperbolic chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpec<T> {
    pub kind: ManifoldKind,
    pub a: T,
    pub phi_min: T,
    pub r0: T,
}

impl<T: Scalar> ManifoldSpec<T> {
    pub const DEFAULT_PHI_MIN: f64 = 0.3;
    pub const DEFAULT_R0: f64 = 0.99;

    pub fn new(kind: ManifoldKind, a: T) -> Self {
        Self { kind, a, phi_min: lit(Self::DEFAULT_PHI_MIN), r0: lit(Self::DEFAULT_R0) }
    }

    pub fn torus() -> Self {
        Self::new(ManifoldKind::Torus, T::one())
    }

    pub fn sphere(a: T) -> Self {
        Self::new(ManifoldKind::Sphere, a)
    }

    pub fn hyperbolic(a: T) -> Self {
        Self::new(ManifoldKind::Hyperbolic, a)
    }

    pub fn with_phi_min(mut self, phi_min: T) -> Self {
        self.phi_min = phi_min;
        self
    }

    pub fn with_r0(mut self, r0: T) -> Self {
        self.r0 = r0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.a.is_finite() && self.phi_min.is_finite() && self.r0.is_finite();
        if !finite {
            return Err(Error::InvalidSpec("non-finite parameter".into()));
        }
        if self.a <= T::zero() {
            return Err(Error::InvalidSpec(format!("curvature scale a = {} must be positive", self.a)));
        }
        if self.kind == ManifoldKind::Sphere && !(self.phi_min > T::zero() && self.phi_min < T::FRAC_PI_2()) {
            return Err(Error::InvalidSpec(format!("phi_min = {} must lie in (0, pi/2)", self.phi_min)));
        }
        if self.kind == ManifoldKind::Hyperbolic && !(self.r0 > T::zero() && self.r0 < T::one()) {
            return Err(Error::InvalidSpec(format!("r0 = {} must lie in (0, 1)", self.r0)));
        }
        Ok(())
    }

    /// Constant Gaussian curvature `K`, so that `Ric = K g`.
    pub fn gaussian_curvature(&self) -> T {
        match self.kind {
            ManifoldKind::Torus => T::zero(),
            ManifoldKind::Sphere => self.a * self.a,
            ManifoldKind::Hyperbolic => -(self.a * self.a),
        }
    }

    /// Radius `r1 = 0.9 r0` inside which the hyperbolic cutoff is identically one.
    pub fn cutoff_inner_radius(&self) -> T {
        lit::<T>(0.9) * self.r0
    }
}

/// Symmetric 2×2 matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sym2<T> {
    pub xx: T,
    pub xy: T,
    pub yy: T,
}

impl<T: Scalar> Sym2<T> {
    pub fn new(xx: T, xy: T, yy: T) -> Self {
        Self { xx, xy, yy }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::one())
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn diag(xx: T, yy: T) -> Self {
        Self::new(xx, T::zero(), yy)
    }

    pub fn det(&self) -> T {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn inverse(&self) -> Self {
        let det = self.det();
        Self::new(self.yy / det, -self.xy / det, self.xx / det)
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.xx * s, self.xy * s, self.yy * s)
    }

    /// Entry `(i, j)` with zero-based indices.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        match (i, j) {
            (0, 0) => self.xx,
            (1, 1) => self.yy,
            _ => self.xy,
        }
    }

    #[inline]
    pub fn mul_vec(&self, v: [T; 2]) -> [T; 2] {
        [self.xx * v[0] + self.xy * v[1], self.xy * v[0] + self.yy * v[1]]
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [T; 2] {
        let half = lit::<T>(0.5);
        let mean = half * (self.xx + self.yy);
        let dev = (half * (self.xx - self.yy)).hypot(self.xy);
        [mean - dev, mean + dev]
    }
}

/// Node-centered chart discretization.
#[derive(Clone, Debug)]
pub struct ChartGrid<T> {
    pub n1: usize,
    pub n2: usize,
    pub d1: T,
    pub d2: T,
    pub x1: Vec<T>,
    pub x2: Vec<T>,
    pub periodic: [bool; 2],
    /// Nodes carrying unknowns; only the hyperbolic chart masks nodes.
    pub active: Vec<bool>,
    /// Smooth cutoff χ ∈ [0, 1].
    pub cutoff: ScalarField<T>,
}

impl<T: Scalar> ChartGrid<T> {
    #[inline]
    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n2 + j
    }

    /// Chart coordinates of a flat node index.
    #[inline]
    pub fn coords(&self, idx: usize) -> (T, T) {
        (self.x1[idx / self.n2], self.x2[idx % self.n2])
    }

    /// Samples `f(x1, x2)` on active nodes; masked nodes are zero.
    pub fn sample(&self, f: impl Fn(T, T) -> T) -> Vec<T> {
        (0..self.len())
            .map(|idx| {
                if self.active[idx] {
                    let (x, y) = self.coords(idx);
                    f(x, y)
                } else {
                    T::zero()
                }
            })
            .collect()
    }

    pub fn cell_area(&self) -> T {
        self.d1 * self.d2
    }

    /// Representative mesh width used in convergence fits.
    pub fn h(&self) -> T {
        self.d1.max(self.d2)
    }
}

fn uniform<T: Scalar>(start: T, step: T, n: usize) -> Vec<T> {
    (0..n).map(|k| start + step * T::from_usize_lossy(k)).collect()
}

fn smoothstep_cutoff<T: Scalar>(r: T, r1: T, r0: T) -> T {
    if r <= r1 {
        T::one()
    } else if r >= r0 {
        T::zero()
    } else {
        let s = (r - r1) / (r0 - r1);
        let s3 = s * s * s;
        T::one() - s3 * (lit::<T>(10.0) - lit::<T>(15.0) * s + lit::<T>(6.0) * s * s)
    }
}

pub fn build_grid<T: Scalar>(spec: &ManifoldSpec<T>, n: usize) -> Result<ChartGrid<T>> {
    if n < 8 {
        return Err(Error::InvalidResolution(n));
    }
    spec.validate()?;
    let two_pi = T::PI() + T::PI();
    let nn = T::from_usize_lossy(n);
    let grid = match spec.kind {
        ManifoldKind::Torus => {
            let d = two_pi / nn;
            ChartGrid {
                n1: n,
                n2: n,
                d1: d,
                d2: d,
                x1: uniform(T::zero(), d, n),
                x2: uniform(T::zero(), d, n),
                periodic: [true, true],
                active: vec![true; n * n],
                cutoff: ScalarField::constant(n * n, T::one()),
            }
        }
        ManifoldKind::Sphere => {
            let d1 = (T::PI() - spec.phi_min - spec.phi_min) / T::from_usize_lossy(n - 1);
            let d2 = two_pi / nn;
            ChartGrid {
                n1: n,
                n2: n,
                d1,
                d2,
                x1: uniform(spec.phi_min, d1, n),
                x2: uniform(T::zero(), d2, n),
                periodic: [false, true],
                active: vec![true; n * n],
                cutoff: ScalarField::constant(n * n, T::one()),
            }
        }
        ManifoldKind::Hyperbolic => {
            let d = (spec.r0 + spec.r0) / T::from_usize_lossy(n - 1);
            let xs = uniform(-spec.r0, d, n);
            let r1 = spec.cutoff_inner_radius();
            // nodes exactly on the circle r = r0 count as inside
            let tol = lit::<T>(1e-9) * d;
            let mut active = Vec::with_capacity(n * n);
            let mut chi = Vec::with_capacity(n * n);
            for &x in &xs {
                for &y in &xs {
                    let r = x.hypot(y);
                    active.push(r <= spec.r0 + tol);
                    chi.push(smoothstep_cutoff(r, r1, spec.r0));
                }
            }
            prune_isolated(&mut active, n);
            ChartGrid {
                n1: n,
                n2: n,
                d1: d,
                d2: d,
                x1: xs.clone(),
                x2: xs,
                periodic: [false, false],
                active,
                cutoff: ScalarField::new(chi),
            }
        }
    };
    Ok(grid)
}

/// Drops disk nodes with no active neighbour along some axis; no stencil
/// could differentiate there.
fn prune_isolated(active: &mut [bool], n: usize) {
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if !active[i * n + j] {
                    continue;
                }
                let on = |p: isize, q: isize| {
                    p >= 0 && q >= 0 && (p as usize) < n && (q as usize) < n && active[p as usize * n + q as usize]
                };
                let (ii, jj) = (i as isize, j as isize);
                if !(on(ii - 1, jj) || on(ii + 1, jj)) || !(on(ii, jj - 1) || on(ii, jj + 1)) {
                    active[i * n + j] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// Metric data per node. Masked nodes carry the identity and are never used.
#[derive(Clone, Debug)]
pub struct MetricField<T> {
    pub g: Vec<Sym2<T>>,
    pub ginv: Vec<Sym2<T>>,
    pub sqrt_det: Vec<T>,
}

/// Closed-form metric of the chart at coordinates `(x1, x2)`.
pub fn metric_at<T: Scalar>(spec: &ManifoldSpec<T>, x1: T, x2: T) -> Sym2<T> {
    match spec.kind {
        ManifoldKind::Torus => Sym2::identity(),
        ManifoldKind::Sphere => {
            let a2 = spec.a * spec.a;
            let s = x1.sin();
            Sym2::diag(T::one() / a2, s * s / a2)
        }
        ManifoldKind::Hyperbolic => {
            let lambda = conformal_factor(spec, x1, x2);
            Sym2::diag(lambda * lambda, lambda * lambda)
        }
    }
}

/// `λ = 2 / (a (1 − x² − y²))`, so that `g = λ² (dx² + dy²)` on the disk.
pub fn conformal_factor<T: Scalar>(spec: &ManifoldSpec<T>, x: T, y: T) -> T {
    lit::<T>(2.0) / (spec.a * (T::one() - x * x - y * y))
}

pub fn build_metric<T: Scalar>(spec: &ManifoldSpec<T>, grid: &ChartGrid<T>) -> MetricField<T> {
    let len = grid.len();
    let mut g = Vec::with_capacity(len);
    let mut ginv = Vec::with_capacity(len);
    let mut sqrt_det = Vec::with_capacity(len);
    for idx in 0..len {
        if !grid.active[idx] {
            g.push(Sym2::identity());
            ginv.push(Sym2::identity());
            sqrt_det.push(T::one());
            continue;
        }
        let (x1, x2) = grid.coords(idx);
        let m = metric_at(spec, x1, x2);
        g.push(m);
        ginv.push(m.inverse());
        sqrt_det.push(m.det().sqrt());
    }
    MetricField { g, ginv, sqrt_det }
}

/// `gamma[k][i][j] = Γ^k_{ij}`.
pub type Gamma<T> = [[[T; 2]; 2]; 2];

#[derive(Clone, Debug)]
pub struct ChristoffelField<T> {
    pub gamma: Vec<Gamma<T>>,
}

impl<T: Scalar> ChristoffelField<T> {
    /// Largest `|Γ^k_ij − Γ^k_ji|` over all nodes.
    pub fn symmetry_defect(&self) -> T {
        let mut worst = T::zero();
        for g in &self.gamma {
            for gk in g {
                worst = worst.max((gk[0][1] - gk[1][0]).abs());
            }
        }
        worst
    }
}

/// Closed-form Levi-Civita symbols at `(x1, x2)`.
pub fn christoffel_at<T: Scalar>(spec: &ManifoldSpec<T>, x1: T, x2: T) -> Gamma<T> {
    let z = T::zero();
    let mut out = [[[z; 2]; 2]; 2];
    match spec.kind {
        ManifoldKind::Torus => {}
        ManifoldKind::Sphere => {
            let (s, c) = x1.sin_cos();
            out[0][1][1] = -s * c;
            out[1][0][1] = c / s;
            out[1][1][0] = c / s;
        }
        ManifoldKind::Hyperbolic => {
            // g = e^{2σ} δ with σ = ln λ: Γ^k_ij = δ_ik ∂_jσ + δ_jk ∂_iσ − δ_ij ∂_kσ
            let denom = T::one() - x1 * x1 - x2 * x2;
            let dsigma = [lit::<T>(2.0) * x1 / denom, lit::<T>(2.0) * x2 / denom];
            for k in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        let mut v = z;
                        if i == k {
                            v += dsigma[j];
                        }
                        if j == k {
                            v += dsigma[i];
                        }
                        if i == j {
                            v -= dsigma[k];
                        }
                        out[k][i][j] = v;
                    }
                }
            }
        }
    }
    out
}

pub fn christoffel<T: Scalar>(spec: &ManifoldSpec<T>, grid: &ChartGrid<T>) -> ChristoffelField<T> {
    let zero = [[[T::zero(); 2]; 2]; 2];
    let gamma = (0..grid.len())
        .map(|idx| {
            if grid.active[idx] {
                let (x1, x2) = grid.coords(idx);
                christoffel_at(spec, x1, x2)
            } else {
                zero
            }
        })
        .collect();
    ChristoffelField { gamma }
}

/// Levi-Civita symbols from finite differences of the sampled metric,
/// `Γ^k_ij = ½ g^{kl} (∂_i g_jl + ∂_j g_il − ∂_l g_ij)`.
pub fn christoffel_fd<T: Scalar>(grid: &ChartGrid<T>, metric: &MetricField<T>, diff: &DiffOps<T>) -> ChristoffelField<T> {
    let comp = |i: usize, j: usize| -> Vec<T> { metric.g.iter().map(|m| m.get(i, j)).collect() };
    // dg[l][i][j] = ∂_l g_ij
    let mut dg: Vec<Vec<Vec<Vec<T>>>> = Vec::with_capacity(2);
    for l in 0..2 {
        let op = diff.axis(l);
        let mut per_l = Vec::with_capacity(2);
        for i in 0..2 {
            let mut per_i = Vec::with_capacity(2);
            for j in 0..2 {
                per_i.push(op.apply(&comp(i, j)));
            }
            per_l.push(per_i);
        }
        dg.push(per_l);
    }
    let half = lit::<T>(0.5);
    let gamma = (0..grid.len())
        .map(|idx| {
            let mut out = [[[T::zero(); 2]; 2]; 2];
            if !grid.active[idx] {
                return out;
            }
            let ginv = metric.ginv[idx];
            for k in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        let mut v = T::zero();
                        for l in 0..2 {
                            v += ginv.get(k, l) * (dg[i][j][l][idx] + dg[j][i][l][idx] - dg[l][i][j][idx]);
                        }
                        out[k][i][j] = half * v;
                    }
                }
            }
            out
        })
        .collect();
    ChristoffelField { gamma }
}

/// Ricci tensor `Ric = K g` for the constant-curvature model geometries.
pub fn ricci<T: Scalar>(spec: &ManifoldSpec<T>, grid: &ChartGrid<T>, metric: &MetricField<T>) -> SymTensorField<T> {
    let k = spec.gaussian_curvature();
    let mut out = SymTensorField::zeros(grid.len());
    for idx in 0..grid.len() {
        if grid.active[idx] {
            let g = metric.g[idx];
            out.s11[idx] = k * g.xx;
            out.s12[idx] = k * g.xy;
            out.s22[idx] = k * g.yy;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_spacings() {
        let t = build_grid(&ManifoldSpec::<f64>::torus(), 8).unwrap();
        assert_eq!((t.n1, t.n2), (8, 8));
        assert!((t.d1 - 2.0 * PI / 8.0).abs() < 1e-15);

        let s = build_grid(&ManifoldSpec::sphere(1.0f64), 64).unwrap();
        assert!((s.d1 - (PI - 0.6) / 63.0).abs() < 1e-15);
        assert!((s.d2 - 2.0 * PI / 64.0).abs() < 1e-15);
        assert!((s.x1[63] - (PI - 0.3)).abs() < 1e-12);

        let h = build_grid(&ManifoldSpec::hyperbolic(1.0f64), 128).unwrap();
        assert!((h.d1 - 2.0 * 0.99 / 127.0).abs() < 1e-15);
        assert!(!h.active[h.index(0, 0)]);
        assert!(!h.active[h.index(127, 127)]);
        assert!(h.active[h.index(1, 64)]);
        assert!(h.active[h.index(64, 64)]);
    }

    #[test]
    fn torus_with_four_nodes_is_rejected() {
        // n = 4 is arithmetic only; the builder demands n >= 8
        assert_eq!(build_grid(&ManifoldSpec::<f64>::torus(), 4).unwrap_err(), Error::InvalidResolution(4));
    }

    #[test]
    fn invalid_specs() {
        assert!(matches!(build_grid(&ManifoldSpec::sphere(-1.0f64), 16), Err(Error::InvalidSpec(_))));
        assert!(matches!(
            build_grid(&ManifoldSpec::sphere(1.0f64).with_phi_min(2.0), 16),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            build_grid(&ManifoldSpec::hyperbolic(1.0f64).with_r0(1.0), 16),
            Err(Error::InvalidSpec(_))
        ));
        assert!("klein".parse::<ManifoldKind>().is_err());
    }

    #[test]
    fn cutoff_profile() {
        let spec = ManifoldSpec::hyperbolic(1.0f64);
        let grid = build_grid(&spec, 64).unwrap();
        for idx in 0..grid.len() {
            let (x, y) = grid.coords(idx);
            let r = x.hypot(y);
            let chi = grid.cutoff.values[idx];
            assert!((0.0..=1.0).contains(&chi));
            if r <= 0.9 * 0.99 {
                assert_eq!(chi, 1.0);
            }
            if r >= 0.99 {
                assert_eq!(chi, 0.0);
            }
        }
    }

    #[test]
    fn metric_values() {
        let spec = ManifoldSpec::sphere(2.0f64);
        let g = metric_at(&spec, PI / 2.0, 0.3);
        assert!((g.xx - 0.25).abs() < 1e-15 && (g.yy - 0.25).abs() < 1e-15);
        assert!((g.det().sqrt() - 0.25).abs() < 1e-15);
        let h = metric_at(&ManifoldSpec::hyperbolic(1.0f64), 0.0, 0.0);
        assert_eq!(h, Sym2::diag(4.0, 4.0));
        assert_eq!(metric_at(&ManifoldSpec::<f64>::torus(), 1.0, 2.0), Sym2::identity());
    }

    #[test]
    fn christoffel_closed_forms() {
        let t = christoffel_at(&ManifoldSpec::<f64>::torus(), 0.4, 1.0);
        assert!(t.iter().flatten().flatten().all(|&v| v == 0.0));
        let h = christoffel_at(&ManifoldSpec::hyperbolic(1.0f64), 0.0, 0.0);
        assert!(h.iter().flatten().flatten().all(|&v| v == 0.0));
        let phi: f64 = 0.7;
        let s = christoffel_at(&ManifoldSpec::sphere(1.0f64), phi, 0.0);
        assert!((s[0][1][1] + phi.sin() * phi.cos()).abs() < 1e-15);
        assert!((s[1][0][1] - phi.cos() / phi.sin()).abs() < 1e-15);
    }

    #[test]
    fn ricci_is_curvature_times_metric() {
        let spec = ManifoldSpec::sphere(1.0f64);
        let grid = build_grid(&spec, 17).unwrap();
        let metric = build_metric(&spec, &grid);
        let ric = ricci(&spec, &grid, &metric);
        let idx = grid.index(8, 3); // phi = pi/2
        assert!((grid.x1[8] - PI / 2.0).abs() < 1e-12);
        assert!((ric.s11[idx] - 1.0).abs() < 1e-12 && (ric.s22[idx] - 1.0).abs() < 1e-12);

        let spec = ManifoldSpec::hyperbolic(1.0f64);
        let grid = build_grid(&spec, 17).unwrap();
        let metric = build_metric(&spec, &grid);
        let ric = ricci(&spec, &grid, &metric);
        let idx = grid.index(8, 8);
        assert!((ric.s11[idx] + 4.0).abs() < 1e-12 && ric.s12[idx] == 0.0);
    }
}
