//! Leray projection by a pressure Poisson solve.

use super::krylov::{conjugate_gradient, CgOptions, CgOutcome};
use crate::error::Result;
use crate::field::{OneFormField, ScalarField};
use crate::geometry::ManifoldKind;
use crate::operators::Chart;
use crate::scalar::Scalar;


/// Reusable projector for one chart.
#[derive(Clone, Debug)]
pub struct Projector<T> {
    /// On the disk, pressure unknowns live on interior nodes of the χ = 1
    /// region. They stand in for compactly supported pressures, so harmonic
    /// differentials pass through unchanged.
    pressure_nodes: Vec<bool>,
    /// Diagonal of `dᵀM1 d` on pressure nodes.
    diag: Vec<T>,
    /// Singular system (closed surface): fix the mean of `p`.
    gauge: bool,
    pub opts: CgOptions,
}

#[derive(Clone, Debug)]
pub struct Projection<T> {
    pub u: OneFormField<T>,
    pub p: ScalarField<T>,
    pub solve: CgOutcome,
}

impl<T: Scalar> Projector<T> {
    pub fn new(chart: &Chart<T>) -> Self {
        let grid = &chart.grid;
        let pressure_nodes: Vec<bool> = match chart.kind() {
            ManifoldKind::Torus | ManifoldKind::Sphere => grid.active.clone(),
            ManifoldKind::Hyperbolic => (0..grid.len())
                .map(|idx| {
                    let (x, y) = grid.coords(idx);
                    chart.interior_mask()[idx] && x.hypot(y) <= chart.spec.cutoff_inner_radius()
                })
                .collect(),
        };

        let m1 = chart.one_form_weight();
        let mut diag = vec![T::zero(); grid.len()];
        let (d1, d2) = (&chart.diff.d1, &chart.diff.d2);
        for (r, m) in m1.iter().enumerate() {
            for (c, v) in d1.row(r) {
                diag[c] += m.xx * v * v;
            }
            for (c, v) in d2.row(r) {
                diag[c] += m.yy * v * v;
                if let Some((_, w)) = d1.row(r).find(|&(c1, _)| c1 == c) {
                    diag[c] += (m.xy + m.xy) * v * w;
                }
            }
        }
        let gauge = chart.kind() != ManifoldKind::Hyperbolic;
        Self { pressure_nodes, diag, gauge, opts: CgOptions::default() }
    }

    pub fn is_pressure_node(&self, idx: usize) -> bool {
        self.pressure_nodes[idx]
    }

    fn mask(&self, mut v: Vec<T>) -> Vec<T> {
        for (x, &on) in v.iter_mut().zip(&self.pressure_nodes) {
            if !on {
                *x = T::zero();
            }
        }
        v
    }

    /// `dᵀ M1 w`, restricted to pressure nodes.
    fn divergence_rhs(&self, chart: &Chart<T>, w: &OneFormField<T>) -> Vec<T> {
        let y = chart.weigh_one_form(w);
        let a = chart.diff.d1.apply_transpose(&y.c1);
        let b = chart.diff.d2.apply_transpose(&y.c2);
        self.mask(a.into_iter().zip(b).map(|(x, y)| x + y).collect())
    }

    fn poisson(&self, chart: &Chart<T>, p: &[T]) -> Vec<T> {
        let p = self.mask(p.to_vec());
        self.divergence_rhs(chart, &chart.exterior_d0(&ScalarField::new(p)))
    }

    fn poisson_abs(&self, chart: &Chart<T>, p: &[T]) -> Vec<T> {
        let (d1, d2) = (&chart.diff.d1, &chart.diff.d2);
        let g1 = d1.apply_abs(p);
        let g2 = d2.apply_abs(p);
        let m1 = chart.one_form_weight();
        let mut y1 = vec![T::zero(); p.len()];
        let mut y2 = vec![T::zero(); p.len()];
        for idx in 0..p.len() {
            let m = m1[idx];
            y1[idx] = m.xx.abs() * g1[idx] + m.xy.abs() * g2[idx];
            y2[idx] = m.xy.abs() * g1[idx] + m.yy.abs() * g2[idx];
        }
        let a = d1.apply_transpose_abs(&y1);
        let b = d2.apply_transpose_abs(&y2);
        self.mask(a.into_iter().zip(b).map(|(x, y)| x + y).collect())
    }

    /// Splits `w = u + dp` with `u` discretely co-closed on the pressure nodes.
    pub fn project(&self, chart: &Chart<T>, w: &OneFormField<T>) -> Result<Projection<T>> {
        self.project_from(chart, w, None)
    }

    /// As [`Projector::project`], warm-started from a previous pressure.
    pub fn project_from(
        &self,
        chart: &Chart<T>,
        w: &OneFormField<T>,
        guess: Option<&ScalarField<T>>,
    ) -> Result<Projection<T>> {
        let b = self.divergence_rhs(chart, w);
        // |dᵀ||M1 w|: the size of the data before cancellation
        let y = chart.weigh_one_form(w);
        let m1 = chart.diff.d1.apply_transpose_abs(&y.c1);
        let m2 = chart.diff.d2.apply_transpose_abs(&y.c2);
        let scale = self.mask(m1.into_iter().zip(m2).map(|(x, y)| x + y).collect());
        let reference = scale.iter().map(|&v| v * v).sum::<T>().sqrt();
        let mut p = match guess {
            Some(g) => self.mask(g.values.clone()),
            None => vec![T::zero(); b.len()],
        };
        let solve = conjugate_gradient(
            |x| self.poisson(chart, x),
            |x| self.poisson_abs(chart, x),
            |r| {
                r.iter()
                    .zip(&self.diag)
                    .zip(&self.pressure_nodes)
                    .map(|((&ri, &d), &on)| if on && d > T::zero() { ri / d } else { T::zero() })
                    .collect()
            },
            &b,
            &mut p,
            self.opts,
            Some(reference),
        )?;
        if self.gauge {
            let w0 = chart.zero_form_weight();
            let mask = chart.reporting_mask();
            let (mut s, mut m) = (T::zero(), T::zero());
            for idx in 0..p.len() {
                if mask[idx] {
                    s += w0[idx] * p[idx];
                    m += w0[idx];
                }
            }
            let mean = s / m;
            for (idx, v) in p.iter_mut().enumerate() {
                if self.pressure_nodes[idx] {
                    *v -= mean;
                }
            }
        }
        let p = ScalarField::new(p);
        let u = w.sub(&chart.exterior_d0(&p));
        Ok(Projection { u, p, solve })
    }
}
