//! Discrete exterior calculus and covariant operators on a chart.
//!
//! A [`Chart`] bundles the geometry of one [`ManifoldSpec`] at one resolution
//! together with the weighted inner products. Codifferentials, `Def*` and
//! `∇*` are assembled as exact transposes of the discrete `d`, `Def` and `∇`
//! under those inner products, so every adjointness relation holds to
//! rounding. Closed-form divergence formulas are kept next to them as
//! second-order cross-checks.

mod covariant;
mod exterior;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{OneFormField, ScalarField, SymTensorField, TensorField, TwoFormField};
use crate::geometry::{
    build_grid, build_metric, christoffel, ricci, ChartGrid, ChristoffelField, ManifoldKind, ManifoldSpec,
    MetricField, Sym2,
};
use crate::scalar::{lit, Scalar};
use crate::sparse::DiffOps;

/// Integration domain for inner products and norms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// Every active node of the chart (the disk `r ≤ r0`, the whole sphere band, the torus).
    Chart,
    /// Nodes where χ = 1 and whose stencils stay three nodes clear of chart edges.
    Reporting,
}

/// Nodes kept clear of non-periodic edges in the reporting region.
pub const EDGE_MARGIN: usize = 3;

/// Borrowed field of any kind, for [`Chart::l2_inner`].
#[derive(Clone, Copy, Debug)]
pub enum FieldRef<'a, T> {
    Scalar(&'a ScalarField<T>),
    OneForm(&'a OneFormField<T>),
    TwoForm(&'a TwoFormField<T>),
    SymTensor(&'a SymTensorField<T>),
    Tensor(&'a TensorField<T>),
}

impl<T> FieldRef<'_, T> {
    fn kind(&self) -> &'static str {
        match self {
            FieldRef::Scalar(_) => "scalar",
            FieldRef::OneForm(_) => "1-form",
            FieldRef::TwoForm(_) => "2-form",
            FieldRef::SymTensor(_) => "symmetric tensor",
            FieldRef::Tensor(_) => "tensor",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Chart<T> {
    pub spec: ManifoldSpec<T>,
    pub grid: ChartGrid<T>,
    pub metric: MetricField<T>,
    pub christoffel: ChristoffelField<T>,
    pub ricci: SymTensorField<T>,
    pub diff: DiffOps<T>,
    /// Quadrature weights (cell area, trapezoidal on bounded axes, zero on masked nodes).
    quad: Vec<T>,
    /// `quad` restricted to the reporting region.
    quad_report: Vec<T>,
    report: Vec<bool>,
    /// Nodes at which every stencil touching them is central; there the
    /// transposed codifferential coincides with the strong one.
    interior: Vec<bool>,
    /// `quad·√|g|`: weight of the 0-form inner product.
    w0: Vec<T>,
    /// `quad·√|g|·g⁻¹`: weight of the 1-form inner product.
    m1: Vec<Sym2<T>>,
    m1_inv: Vec<Sym2<T>>,
    /// `quad / √|g|`: weight of the 2-form inner product.
    w2: Vec<T>,
    /// `dginv[m][idx]` = `∂_m g^{..}` stored as a `Sym2`.
    dginv: [Vec<Sym2<T>>; 2],
    /// `dgamma[m][idx][k][i][j]` = `∂_m Γ^k_ij`.
    dgamma: [Vec<crate::geometry::Gamma<T>>; 2],
}

impl<T: Scalar> Chart<T> {
    pub fn new(spec: ManifoldSpec<T>, n: usize) -> Result<Self> {
        let grid = build_grid(&spec, n)?;
        let metric = build_metric(&spec, &grid);
        let christoffel = christoffel(&spec, &grid);
        let ricci = ricci(&spec, &grid, &metric);
        let diff = DiffOps::new(&grid);
        let len = grid.len();

        let area = grid.cell_area();
        let half = lit::<T>(0.5);
        let mut quad = vec![T::zero(); len];
        for i in 0..grid.n1 {
            let fi = if !grid.periodic[0] && (i == 0 || i + 1 == grid.n1) { half } else { T::one() };
            for j in 0..grid.n2 {
                let fj = if !grid.periodic[1] && (j == 0 || j + 1 == grid.n2) { half } else { T::one() };
                let idx = grid.index(i, j);
                if grid.active[idx] {
                    quad[idx] = area * fi * fj;
                }
            }
        }
        let report = reporting_mask(&spec, &grid);
        let interior = interior_mask(&grid);
        let quad_report = quad.iter().zip(&report).map(|(&q, &r)| if r { q } else { T::zero() }).collect();

        let mut w0 = vec![T::zero(); len];
        let mut w2 = vec![T::zero(); len];
        let mut m1 = vec![Sym2::zero(); len];
        let mut m1_inv = vec![Sym2::zero(); len];
        for idx in 0..len {
            if quad[idx] > T::zero() {
                let sg = metric.sqrt_det[idx];
                w0[idx] = quad[idx] * sg;
                w2[idx] = quad[idx] / sg;
                m1[idx] = metric.ginv[idx].scale(quad[idx] * sg);
                m1_inv[idx] = metric.g[idx].scale(T::one() / (quad[idx] * sg));
            }
        }

        let sym_comp = |v: &[Sym2<T>], k: usize| -> Vec<T> {
            v.iter().map(|s| [s.xx, s.xy, s.yy][k]).collect()
        };
        let mut dginv: [Vec<Sym2<T>>; 2] = [vec![Sym2::zero(); len], vec![Sym2::zero(); len]];
        for (m, out) in dginv.iter_mut().enumerate() {
            let op = diff.axis(m);
            let parts: Vec<Vec<T>> = (0..3).map(|k| op.apply(&sym_comp(&metric.ginv, k))).collect();
            for idx in 0..len {
                out[idx] = Sym2::new(parts[0][idx], parts[1][idx], parts[2][idx]);
            }
        }
        let zero_gamma = [[[T::zero(); 2]; 2]; 2];
        let mut dgamma = [vec![zero_gamma; len], vec![zero_gamma; len]];
        for (m, out) in dgamma.iter_mut().enumerate() {
            let op = diff.axis(m);
            for k in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        let comp: Vec<T> = christoffel.gamma.iter().map(|g| g[k][i][j]).collect();
                        let d = op.apply(&comp);
                        for idx in 0..len {
                            out[idx][k][i][j] = d[idx];
                        }
                    }
                }
            }
        }

        Ok(Self {
            spec,
            grid,
            metric,
            christoffel,
            ricci,
            diff,
            quad,
            quad_report,
            report,
            interior,
            w0,
            m1,
            m1_inv,
            w2,
            dginv,
            dgamma,
        })
    }

    pub fn kind(&self) -> ManifoldKind {
        self.spec.kind
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn n(&self) -> usize {
        self.grid.n1
    }

    pub fn h(&self) -> T {
        self.grid.h()
    }

    pub fn is_active(&self, idx: usize) -> bool {
        self.grid.active[idx]
    }

    pub fn in_reporting_region(&self, idx: usize) -> bool {
        self.report[idx]
    }

    pub fn reporting_mask(&self) -> &[bool] {
        &self.report
    }

    /// Nodes whose neighbors up to [`EDGE_MARGIN`] steps along both axes are
    /// active, so every difference row touching them is central.
    pub fn interior_mask(&self) -> &[bool] {
        &self.interior
    }

    pub fn quadrature(&self, region: Region) -> &[T] {
        match region {
            Region::Chart => &self.quad,
            Region::Reporting => &self.quad_report,
        }
    }

    /// Per-node weight `quad·√|g|g⁻¹` of the 1-form inner product on the whole chart.
    pub fn one_form_weight(&self) -> &[Sym2<T>] {
        &self.m1
    }

    pub fn one_form_weight_inverse(&self) -> &[Sym2<T>] {
        &self.m1_inv
    }

    pub fn zero_form_weight(&self) -> &[T] {
        &self.w0
    }

    pub fn two_form_weight(&self) -> &[T] {
        &self.w2
    }

    /// Applies the per-node 1-form weight `quad·√|g|g⁻¹`.
    pub fn weigh_one_form(&self, u: &OneFormField<T>) -> OneFormField<T> {
        apply_blocks(&self.m1, u)
    }

    /// Inverse of [`Chart::weigh_one_form`] (zero on masked nodes).
    pub fn unweigh_one_form(&self, u: &OneFormField<T>) -> OneFormField<T> {
        apply_blocks(&self.m1_inv, u)
    }

    pub fn sample_scalar(&self, f: impl Fn(T, T) -> T) -> ScalarField<T> {
        ScalarField::new(self.grid.sample(f))
    }

    pub fn sample_one_form(&self, f: impl Fn(T, T) -> [T; 2]) -> OneFormField<T> {
        let mut out = OneFormField::zeros(self.len());
        for idx in 0..self.len() {
            if self.is_active(idx) {
                let (x, y) = self.grid.coords(idx);
                out.set(idx, f(x, y));
            }
        }
        out
    }

    /// Zeroes a field outside the reporting region.
    pub fn restrict_to_reporting(&self, u: &OneFormField<T>) -> OneFormField<T> {
        let mask: Vec<T> = self.report.iter().map(|&r| if r { T::one() } else { T::zero() }).collect();
        u.mul_pointwise(&mask)
    }

    // ---- inner products ------------------------------------------------

    pub fn inner0(&self, f: &ScalarField<T>, h: &ScalarField<T>, region: Region) -> T {
        let q = self.quadrature(region);
        let mut s = T::zero();
        for idx in 0..self.len() {
            if q[idx] != T::zero() {
                s += q[idx] * self.metric.sqrt_det[idx] * f.values[idx] * h.values[idx];
            }
        }
        s
    }

    pub fn inner1(&self, u: &OneFormField<T>, v: &OneFormField<T>, region: Region) -> T {
        let q = self.quadrature(region);
        let mut s = T::zero();
        for idx in 0..self.len() {
            if q[idx] != T::zero() {
                let gi = self.metric.ginv[idx];
                let gv = gi.mul_vec(v.at(idx));
                s += q[idx] * self.metric.sqrt_det[idx] * (u.c1[idx] * gv[0] + u.c2[idx] * gv[1]);
            }
        }
        s
    }

    pub fn inner2(&self, w: &TwoFormField<T>, v: &TwoFormField<T>, region: Region) -> T {
        let q = self.quadrature(region);
        let mut s = T::zero();
        for idx in 0..self.len() {
            if q[idx] != T::zero() {
                s += q[idx] * w.values[idx] * v.values[idx] / self.metric.sqrt_det[idx];
            }
        }
        s
    }

    pub fn inner_sym(&self, a: &SymTensorField<T>, b: &SymTensorField<T>, region: Region) -> T {
        let q = self.quadrature(region);
        let mut s = T::zero();
        for idx in 0..self.len() {
            if q[idx] != T::zero() {
                let raised = raise_both(self.metric.ginv[idx], |i, j| b.get(idx, i, j));
                let mut c = T::zero();
                for i in 0..2 {
                    for j in 0..2 {
                        c += a.get(idx, i, j) * raised[i][j];
                    }
                }
                s += q[idx] * self.metric.sqrt_det[idx] * c;
            }
        }
        s
    }

    pub fn inner_tensor(&self, a: &TensorField<T>, b: &TensorField<T>, region: Region) -> T {
        let q = self.quadrature(region);
        let mut s = T::zero();
        for idx in 0..self.len() {
            if q[idx] != T::zero() {
                let raised = raise_both(self.metric.ginv[idx], |i, j| b.t[i][j][idx]);
                let mut c = T::zero();
                for i in 0..2 {
                    for j in 0..2 {
                        c += a.t[i][j][idx] * raised[i][j];
                    }
                }
                s += q[idx] * self.metric.sqrt_det[idx] * c;
            }
        }
        s
    }

    /// Kind-checked inner product.
    pub fn l2_inner(&self, a: FieldRef<'_, T>, b: FieldRef<'_, T>, region: Region) -> Result<T> {
        match (a, b) {
            (FieldRef::Scalar(x), FieldRef::Scalar(y)) if x.len() == self.len() && y.len() == self.len() => {
                Ok(self.inner0(x, y, region))
            }
            (FieldRef::OneForm(x), FieldRef::OneForm(y)) if x.len() == self.len() && y.len() == self.len() => {
                Ok(self.inner1(x, y, region))
            }
            (FieldRef::TwoForm(x), FieldRef::TwoForm(y)) if x.len() == self.len() && y.len() == self.len() => {
                Ok(self.inner2(x, y, region))
            }
            (FieldRef::SymTensor(x), FieldRef::SymTensor(y)) if x.len() == self.len() && y.len() == self.len() => {
                Ok(self.inner_sym(x, y, region))
            }
            (FieldRef::Tensor(x), FieldRef::Tensor(y)) if x.len() == self.len() && y.len() == self.len() => {
                Ok(self.inner_tensor(x, y, region))
            }
            (x, y) => Err(Error::InvalidArguments(format!(
                "cannot pair a {} with a {} on a grid of {} nodes",
                x.kind(),
                y.kind(),
                self.len()
            ))),
        }
    }

    pub fn norm0(&self, f: &ScalarField<T>, region: Region) -> T {
        self.inner0(f, f, region).max(T::zero()).sqrt()
    }

    pub fn norm1(&self, u: &OneFormField<T>, region: Region) -> T {
        self.inner1(u, u, region).max(T::zero()).sqrt()
    }

    pub fn norm2(&self, w: &TwoFormField<T>, region: Region) -> T {
        self.inner2(w, w, region).max(T::zero()).sqrt()
    }

    pub fn norm_sym(&self, s: &SymTensorField<T>, region: Region) -> T {
        self.inner_sym(s, s, region).max(T::zero()).sqrt()
    }

    pub fn norm_tensor(&self, t: &TensorField<T>, region: Region) -> T {
        self.inner_tensor(t, t, region).max(T::zero()).sqrt()
    }

    /// Pointwise metric length `|u|_g`, maximized over the region.
    pub fn sup1(&self, u: &OneFormField<T>, region: Region) -> T {
        let q = self.quadrature(region);
        let mut m = T::zero();
        for idx in 0..self.len() {
            if q[idx] != T::zero() {
                let v = u.at(idx);
                let gv = self.metric.ginv[idx].mul_vec(v);
                m = m.max((v[0] * gv[0] + v[1] * gv[1]).max(T::zero()).sqrt());
            }
        }
        m
    }
}

fn apply_blocks<T: Scalar>(blocks: &[Sym2<T>], u: &OneFormField<T>) -> OneFormField<T> {
    let mut out = OneFormField::zeros(u.len());
    for (idx, b) in blocks.iter().enumerate() {
        out.set(idx, b.mul_vec(u.at(idx)));
    }
    out
}

/// `g^{ia} g^{jb} S_ab`.
fn raise_both<T: Scalar>(ginv: Sym2<T>, s: impl Fn(usize, usize) -> T) -> [[T; 2]; 2] {
    let mut out = [[T::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut v = T::zero();
            for a in 0..2 {
                for b in 0..2 {
                    v += ginv.get(i, a) * ginv.get(j, b) * s(a, b);
                }
            }
            out[i][j] = v;
        }
    }
    out
}

fn interior_mask<T: Scalar>(grid: &ChartGrid<T>) -> Vec<bool> {
    let m = EDGE_MARGIN as isize;
    let on = |p: isize, q: isize| {
        let (n1, n2) = (grid.n1 as isize, grid.n2 as isize);
        let p = if grid.periodic[0] { p.rem_euclid(n1) } else { p };
        let q = if grid.periodic[1] { q.rem_euclid(n2) } else { q };
        p >= 0 && q >= 0 && p < n1 && q < n2 && grid.active[grid.index(p as usize, q as usize)]
    };
    (0..grid.len())
        .map(|idx| {
            let (i, j) = ((idx / grid.n2) as isize, (idx % grid.n2) as isize);
            (-m..=m).all(|k| on(i + k, j) && on(i, j + k))
        })
        .collect()
}

fn reporting_mask<T: Scalar>(spec: &ManifoldSpec<T>, grid: &ChartGrid<T>) -> Vec<bool> {
    let m = EDGE_MARGIN as isize;
    let mut mask = vec![false; grid.len()];
    match spec.kind {
        ManifoldKind::Torus => mask.iter_mut().for_each(|v| *v = true),
        ManifoldKind::Sphere => {
            for i in EDGE_MARGIN..grid.n1.saturating_sub(EDGE_MARGIN) {
                for j in 0..grid.n2 {
                    mask[grid.index(i, j)] = true;
                }
            }
        }
        ManifoldKind::Hyperbolic => {
            let r1 = spec.cutoff_inner_radius();
            for i in 0..grid.n1 {
                for j in 0..grid.n2 {
                    let idx = grid.index(i, j);
                    let (x, y) = grid.coords(idx);
                    if x.hypot(y) > r1 {
                        continue;
                    }
                    let clear = (-m..=m).all(|di| {
                        (-m..=m).all(|dj| {
                            let (p, q) = (i as isize + di, j as isize + dj);
                            p >= 0
                                && q >= 0
                                && (p as usize) < grid.n1
                                && (q as usize) < grid.n2
                                && grid.active[grid.index(p as usize, q as usize)]
                        })
                    });
                    mask[idx] = clear;
                }
            }
        }
    }
    mask
}
