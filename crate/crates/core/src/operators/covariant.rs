use super::{raise_both, Chart};
use crate::field::{OneFormField, ScalarField, SymTensorField, TensorField};
use crate::scalar::{lit, Scalar};

impl<T: Scalar> Chart<T> {
    /// `(∇u)_ij = ∂_i u_j − Γ^k_ij u_k`.
    pub fn covariant_derivative(&self, u: &OneFormField<T>) -> TensorField<T> {
        let n = self.len();
        let du = [
            [self.diff.d1.apply(&u.c1), self.diff.d1.apply(&u.c2)],
            [self.diff.d2.apply(&u.c1), self.diff.d2.apply(&u.c2)],
        ];
        let mut out = TensorField::zeros(n);
        for idx in 0..n {
            if !self.is_active(idx) {
                continue;
            }
            let g = &self.christoffel.gamma[idx];
            let v = u.at(idx);
            for i in 0..2 {
                for j in 0..2 {
                    out.t[i][j][idx] = du[i][j][idx] - g[0][i][j] * v[0] - g[1][i][j] * v[1];
                }
            }
        }
        out
    }

    /// `Def u = ½(∇_i u_j + ∇_j u_i)`.
    pub fn deformation(&self, u: &OneFormField<T>) -> SymTensorField<T> {
        self.covariant_derivative(u).symmetrize()
    }

    /// Transpose of `∇` against raw weighted components `P_ij`:
    /// `(∇ᵀP)_k = Σ_i D_iᵀ P_ik − Σ_ij Γ^k_ij P_ij`.
    fn nabla_transpose(&self, p: &[[Vec<T>; 2]; 2]) -> OneFormField<T> {
        let n = self.len();
        let mut out = [vec![T::zero(); n], vec![T::zero(); n]];
        for (k, o) in out.iter_mut().enumerate() {
            let a = self.diff.d1.apply_transpose(&p[0][k]);
            let b = self.diff.d2.apply_transpose(&p[1][k]);
            for idx in 0..n {
                let g = &self.christoffel.gamma[idx];
                let mut s = a[idx] + b[idx];
                for i in 0..2 {
                    for j in 0..2 {
                        s -= g[k][i][j] * p[i][j][idx];
                    }
                }
                o[idx] = s;
            }
        }
        let [c1, c2] = out;
        self.unweigh_one_form(&OneFormField::new(c1, c2))
    }

    fn weighted_raise(&self, comp: impl Fn(usize, usize, usize) -> T) -> [[Vec<T>; 2]; 2] {
        let n = self.len();
        let z = || vec![T::zero(); n];
        let mut p = [[z(), z()], [z(), z()]];
        let w0 = self.zero_form_weight();
        for idx in 0..n {
            if w0[idx] == T::zero() {
                continue;
            }
            let r = raise_both(self.metric.ginv[idx], |i, j| comp(idx, i, j));
            for i in 0..2 {
                for j in 0..2 {
                    p[i][j][idx] = w0[idx] * r[i][j];
                }
            }
        }
        p
    }

    /// Discrete adjoint of [`Chart::deformation`].
    pub fn def_adjoint(&self, s: &SymTensorField<T>) -> OneFormField<T> {
        let p = self.weighted_raise(|idx, i, j| s.get(idx, i, j));
        self.nabla_transpose(&p)
    }

    /// Discrete adjoint of [`Chart::covariant_derivative`].
    pub fn covariant_adjoint(&self, a: &TensorField<T>) -> OneFormField<T> {
        let p = self.weighted_raise(|idx, i, j| a.t[i][j][idx]);
        self.nabla_transpose(&p)
    }

    /// `(Def*S)_j = −g^{ik} ∇_i S_kj` by direct differencing.
    pub fn def_adjoint_analytic(&self, s: &SymTensorField<T>) -> OneFormField<T> {
        let n = self.len();
        let comps = [&s.s11, &s.s12, &s.s22];
        let ds: Vec<[Vec<T>; 3]> = (0..2)
            .map(|m| {
                let op = self.diff.axis(m);
                [op.apply(comps[0]), op.apply(comps[1]), op.apply(comps[2])]
            })
            .collect();
        let slot = |i: usize, j: usize| if i != j { 1 } else if i == 0 { 0 } else { 2 };
        let mut out = OneFormField::zeros(n);
        for idx in 0..n {
            if !self.is_active(idx) {
                continue;
            }
            let g = &self.christoffel.gamma[idx];
            let gi = self.metric.ginv[idx];
            let mut res = [T::zero(); 2];
            for (j, r) in res.iter_mut().enumerate() {
                let mut acc = T::zero();
                for i in 0..2 {
                    for k in 0..2 {
                        let mut nab = ds[i][slot(k, j)][idx];
                        for l in 0..2 {
                            nab -= g[l][i][k] * s.get(idx, l, j) + g[l][i][j] * s.get(idx, k, l);
                        }
                        acc += gi.get(i, k) * nab;
                    }
                }
                *r = -acc;
            }
            out.set(idx, res);
        }
        out
    }

    /// `−∇*∇u`, assembled by transpose.
    pub fn rough_laplacian(&self, u: &OneFormField<T>) -> OneFormField<T> {
        self.covariant_adjoint(&self.covariant_derivative(u)).scaled(-T::one())
    }

    /// Bochner Laplacian `g^{μλ}∇_μ∇_λ v_β` expanded in coordinates.
    pub fn bochner_laplacian(&self, u: &OneFormField<T>) -> OneFormField<T> {
        let n = self.len();
        let dv = [
            [self.diff.d1.apply(&u.c1), self.diff.d1.apply(&u.c2)],
            [self.diff.d2.apply(&u.c1), self.diff.d2.apply(&u.c2)],
        ];
        let mut out = OneFormField::zeros(n);
        // ∂_μ(g^{μλ} ∂_λ v_β)
        for beta in 0..2 {
            let mut flux = [vec![T::zero(); n], vec![T::zero(); n]];
            for idx in 0..n {
                if !self.is_active(idx) {
                    continue;
                }
                let gi = self.metric.ginv[idx];
                for (mu, f) in flux.iter_mut().enumerate() {
                    f[idx] = gi.get(mu, 0) * dv[0][beta][idx] + gi.get(mu, 1) * dv[1][beta][idx];
                }
            }
            let a = self.diff.d1.apply(&flux[0]);
            let b = self.diff.d2.apply(&flux[1]);
            let c = if beta == 0 { &mut out.c1 } else { &mut out.c2 };
            for idx in 0..n {
                c[idx] = a[idx] + b[idx];
            }
        }
        for idx in 0..n {
            if !self.is_active(idx) {
                continue;
            }
            let g = &self.christoffel.gamma[idx];
            let gi = self.metric.ginv[idx];
            let v = u.at(idx);
            let dvi = |m: usize, t: usize| dv[m][t][idx];
            let mut acc = out.at(idx);
            for (beta, a) in acc.iter_mut().enumerate() {
                let mut s = T::zero();
                for mu in 0..2 {
                    for lam in 0..2 {
                        for tau in 0..2 {
                            s -= self.dginv[mu][idx].get(mu, lam) * g[tau][lam][beta] * v[tau];
                            s -= gi.get(mu, lam) * self.dgamma[mu][idx][tau][lam][beta] * v[tau];
                            s -= gi.get(mu, lam) * g[tau][lam][beta] * dvi(mu, tau);
                        }
                    }
                }
                for mu in 0..2 {
                    for sig in 0..2 {
                        for tau in 0..2 {
                            s += g[mu][mu][sig] * gi.get(sig, tau) * dvi(tau, beta);
                            s -= gi.get(mu, tau) * g[sig][mu][beta] * dvi(tau, sig);
                        }
                    }
                }
                for sig in 0..2 {
                    for lam in 0..2 {
                        for tau in 0..2 {
                            let gm = g[0][0][sig] + g[1][1][sig];
                            s -= gi.get(sig, lam) * gm * g[tau][lam][beta] * v[tau];
                        }
                    }
                }
                for mu in 0..2 {
                    for lam in 0..2 {
                        for sig in 0..2 {
                            for tau in 0..2 {
                                s += gi.get(mu, lam) * g[sig][mu][beta] * g[tau][lam][sig] * v[tau];
                            }
                        }
                    }
                }
                *a += s;
            }
            out.set(idx, acc);
        }
        out
    }

    /// `u ↦ Ric(u♯, ·)`.
    pub fn ricci_action(&self, u: &OneFormField<T>) -> OneFormField<T> {
        let n = self.len();
        let mut out = OneFormField::zeros(n);
        for idx in 0..n {
            if !self.is_active(idx) {
                continue;
            }
            let raised = self.metric.ginv[idx].mul_vec(u.at(idx));
            let r = |i: usize, j: usize| self.ricci.get(idx, i, j);
            out.set(idx, [r(0, 0) * raised[0] + r(0, 1) * raised[1], r(1, 0) * raised[0] + r(1, 1) * raised[1]]);
        }
        out
    }

    /// `T = −p g + 2ν Def u − (2/3)ν (div u) g`, with `div u = −δu`.
    pub fn stress_tensor(&self, u: &OneFormField<T>, p: &ScalarField<T>, nu: T) -> SymTensorField<T> {
        let def = self.deformation(u);
        let div = self.codifferential_1(u);
        let two = lit::<T>(2.0);
        let c = lit::<T>(2.0 / 3.0);
        let n = self.len();
        let mut out = SymTensorField::zeros(n);
        for idx in 0..n {
            if !self.is_active(idx) {
                continue;
            }
            let g = self.metric.g[idx];
            let iso = -p.values[idx] + c * nu * div.values[idx];
            out.s11[idx] = iso * g.xx + two * nu * def.s11[idx];
            out.s12[idx] = iso * g.xy + two * nu * def.s12[idx];
            out.s22[idx] = iso * g.yy + two * nu * def.s22[idx];
        }
        out
    }
}
