use super::Chart;
use crate::field::{OneFormField, ScalarField, TwoFormField};
use crate::scalar::Scalar;

impl<T: Scalar> Chart<T> {
    /// `d f = (∂₁f, ∂₂f)`.
    pub fn exterior_d0(&self, f: &ScalarField<T>) -> OneFormField<T> {
        OneFormField::new(self.diff.d1.apply(&f.values), self.diff.d2.apply(&f.values))
    }

    /// `d u = ∂₁u₂ − ∂₂u₁` (coefficient of `dx¹∧dx²`).
    pub fn exterior_d1(&self, u: &OneFormField<T>) -> TwoFormField<T> {
        let a = self.diff.d1.apply(&u.c2);
        let b = self.diff.d2.apply(&u.c1);
        TwoFormField::new(a.into_iter().zip(b).map(|(x, y)| x - y).collect())
    }

    /// Discrete adjoint of `d` on 0-forms: `W0⁻¹ dᵀ M1 u`.
    pub fn codifferential_1(&self, u: &OneFormField<T>) -> ScalarField<T> {
        let y = self.weigh_one_form(u);
        let mut r = self.diff.d1.apply_transpose(&y.c1);
        let r2 = self.diff.d2.apply_transpose(&y.c2);
        let w0 = self.zero_form_weight();
        for idx in 0..r.len() {
            r[idx] = if w0[idx] > T::zero() { (r[idx] + r2[idx]) / w0[idx] } else { T::zero() };
        }
        ScalarField::new(r)
    }

    /// Discrete adjoint of `d` on 1-forms: `M1⁻¹ dᵀ W2 w`.
    pub fn codifferential_2(&self, w: &TwoFormField<T>) -> OneFormField<T> {
        let z: Vec<T> = w.values.iter().zip(self.two_form_weight()).map(|(&a, &b)| a * b).collect();
        let v1: Vec<T> = self.diff.d2.apply_transpose(&z).into_iter().map(|x| -x).collect();
        let v2 = self.diff.d1.apply_transpose(&z);
        self.unweigh_one_form(&OneFormField::new(v1, v2))
    }

    /// `δu = −|g|^{-1/2} ∂_i(√|g| g^{ij} u_j)` by direct differencing.
    pub fn codifferential_1_analytic(&self, u: &OneFormField<T>) -> ScalarField<T> {
        let n = self.len();
        let mut f1 = vec![T::zero(); n];
        let mut f2 = vec![T::zero(); n];
        for idx in 0..n {
            if self.is_active(idx) {
                let raised = self.metric.ginv[idx].mul_vec(u.at(idx));
                let sg = self.metric.sqrt_det[idx];
                f1[idx] = sg * raised[0];
                f2[idx] = sg * raised[1];
            }
        }
        let a = self.diff.d1.apply(&f1);
        let b = self.diff.d2.apply(&f2);
        let vals = (0..n)
            .map(|idx| if self.is_active(idx) { -(a[idx] + b[idx]) / self.metric.sqrt_det[idx] } else { T::zero() })
            .collect();
        ScalarField::new(vals)
    }

    /// `−(d P δ + δd)` where `P` keeps the codifferential on interior nodes only.
    ///
    /// This is the operator of the quadratic form `‖δu‖²_interior + ‖du‖²`
    /// with free boundary values. Its natural boundary conditions are
    /// `δu = 0` and `i_n du = 0` at the chart edge, which harmonic forms
    /// satisfy. The plain transposed form instead imposes `u·n = 0` there.
    pub fn hodge_laplacian_free_boundary(&self, u: &OneFormField<T>) -> OneFormField<T> {
        let mut div = self.codifferential_1(u);
        for (v, &inside) in div.values.iter_mut().zip(self.interior_mask()) {
            if !inside {
                *v = T::zero();
            }
        }
        let a = self.exterior_d0(&div);
        let b = self.codifferential_2(&self.exterior_d1(u));
        a.add(&b).scaled(-T::one())
    }

    /// Hodge Laplacian `Δ_H = −(dδ + δd)` (non-positive convention).
    pub fn hodge_laplacian(&self, u: &OneFormField<T>) -> OneFormField<T> {
        let a = self.exterior_d0(&self.codifferential_1(u));
        let b = self.codifferential_2(&self.exterior_d1(u));
        a.add(&b).scaled(-T::one())
    }
}

#[cfg(test)]
mod tests {
    use crate::geometry::ManifoldSpec;
    use crate::operators::{Chart, Region};

    #[test]
    fn d_squared_vanishes() {
        let c = Chart::new(ManifoldSpec::<f64>::hyperbolic(1.0), 40).unwrap();
        let f = c.sample_scalar(|x, y| (3.0 * x).sin() * y * y + x.exp());
        let w = c.exterior_d1(&c.exterior_d0(&f));
        // one-sided stencils at the staircase edge need not commute
        for idx in 0..c.len() {
            if c.in_reporting_region(idx) {
                assert!(w.values[idx].abs() < 1e-10);
            }
        }
        let s = Chart::new(ManifoldSpec::<f64>::sphere(1.0), 40).unwrap();
        let f = s.sample_scalar(|p, t| p.cos() * (2.0 * t).sin() + p * p);
        assert!(s.exterior_d1(&s.exterior_d0(&f)).max_abs() < 1e-10);
    }

    #[test]
    fn codifferential_matches_closed_form_on_torus() {
        let c = Chart::new(ManifoldSpec::<f64>::torus(), 64).unwrap();
        let u = c.sample_one_form(|x, y| [x.sin() * y.cos(), (2.0 * x).cos()]);
        let a = c.codifferential_1(&u);
        let b = c.codifferential_1_analytic(&u);
        let exact = c.sample_scalar(|x, y| -x.cos() * y.cos());
        assert!(a.sub(&exact).max_abs() < 5e-3);
        assert!(b.sub(&exact).max_abs() < 5e-3);
        assert!(c.norm0(&a.sub(&b), Region::Chart) < 1e-2);
    }
}
