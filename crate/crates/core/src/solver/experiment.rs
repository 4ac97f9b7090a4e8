//! Energy identities, decay-rate fits and the explicit weak solution on the disk.

use serde::{Deserialize, Serialize};

use super::{EnergyLedger, ViscosityChoice};
use crate::error::{Error, Result};
use crate::geometry::{ManifoldKind, ManifoldSpec};
use crate::library::harmonic_df;
use crate::operators::{Chart, Region};
use crate::scalar::{lit, Scalar};

/// Running defect `E_k − E_0 − W_k + ν Σ_{j≤k} dt_j Diss_j` of the energy
/// balance, with the dissipation matched to the viscous operator.
pub fn energy_identity_defect(ledger: &EnergyLedger, choice: ViscosityChoice, nu: f64) -> Vec<f64> {
    let Some(first) = ledger.rows.first() else {
        return Vec::new();
    };
    let mut acc = 0.0;
    let mut out = vec![0.0];
    for w in ledger.rows.windows(2) {
        let r = &w[1];
        let diss = match choice {
            ViscosityChoice::Hodge => r.Dd,
            ViscosityChoice::Bochner => r.G,
            ViscosityChoice::DeformationEbinMarsden => r.Ddef,
        };
        acc += (r.t - w[0].t) * nu * diss;
        out.push(r.E - first.E - r.W + acc);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Fitted `λ` in `E(t) ≈ E(0) e^{−λt}`.
    pub rate: f64,
    /// `max_k |E_k/E_0 − 1|`.
    pub max_rel_change: f64,
    /// `∫ G dt` by the trapezoidal rule.
    pub integrated_gradient: f64,
}

/// Least-squares fit of `ln E` against `t`.
pub fn decay_fit(ledger: &EnergyLedger) -> Result<DecayFit> {
    let rows = &ledger.rows;
    if rows.len() < 2 || rows[0].E <= 0.0 {
        return Err(Error::InvalidArguments("decay fit needs two rows and positive initial energy".into()));
    }
    let e0 = rows[0].E;
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.E > 0.0).map(|r| (r.t, r.E.ln())).collect();
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let me = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - me)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    let max_rel_change = rows.iter().map(|r| (r.E / e0 - 1.0).abs()).fold(0.0, f64::max);
    let integrated_gradient = rows.windows(2).map(|w| 0.5 * (w[1].t - w[0].t) * (w[0].G + w[1].G)).sum();
    Ok(DecayFit { rate: -sxy / sxx, max_rel_change, integrated_gradient })
}

pub const WEAK_SOLUTION_TIME_NODES: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakSolutionRow {
    pub t: f64,
    /// `½‖v(t)‖²`
    pub e: f64,
    /// `∫₀ᵗ ⟨f(τ), v(τ)⟩ dτ`
    pub w: f64,
    /// `∫₀ᵗ ‖∇v(τ)‖² dτ`
    pub d: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakSolutionReport {
    pub a: f64,
    pub r0: f64,
    pub n: usize,
    pub degree: u32,
    pub t_final: f64,
    pub time_nodes: usize,
    pub df_norm_sq: f64,
    pub grad_df_norm_sq: f64,
    /// `max_t |E(t) − (8/9) t^{3/2} ‖dF‖²| / ((8/9) T^{3/2} ‖dF‖²)`.
    pub energy_law_rel_err: f64,
    /// `|E(T) − W(T)| / E(T)`.
    pub work_balance_rel_err: f64,
    pub defect: f64,
    pub rows: Vec<WeakSolutionRow>,
}

/// Evaluates `v(t) = (4/3) t^{3/4} dF` under the forcing `f(t) = t^{−1/4} dF`
/// at uniformly spaced time nodes (no time stepping) and integrates the
/// energy, work and gradient budgets by the trapezoidal rule.
pub fn energy_equality_experiment<T: Scalar>(
    spec: ManifoldSpec<T>,
    n: usize,
    t_final: T,
    time_nodes: usize,
    degree: u32,
    region: Region,
) -> Result<WeakSolutionReport> {
    if spec.kind != ManifoldKind::Hyperbolic {
        return Err(Error::InvalidArguments("the weak-solution experiment runs on the hyperbolic chart".into()));
    }
    if time_nodes < 2 || !(t_final > T::zero()) {
        return Err(Error::InvalidArguments("need at least two time nodes and T > 0".into()));
    }
    let chart = Chart::new(spec, n)?;
    let df = harmonic_df(&chart, degree);
    let nab = chart.covariant_derivative(&df);
    let df_sq = chart.inner1(&df, &df, region);
    let grad_sq = chart.inner_tensor(&nab, &nab, region);

    let (c43, c34) = (lit::<T>(4.0 / 3.0), lit::<T>(0.75));
    let half = lit::<T>(0.5);
    let mut rows = Vec::with_capacity(time_nodes);
    let (mut w, mut d) = (T::zero(), T::zero());
    let (mut prev_power, mut prev_grad, mut prev_t) = (T::zero(), T::zero(), T::zero());
    for k in 0..time_nodes {
        let t = t_final * T::from_usize_lossy(k) / T::from_usize_lossy(time_nodes - 1);
        let s = c43 * t.powf(c34);
        let v = df.scaled(s);
        let e = half * chart.inner1(&v, &v, region);
        // ⟨f, v⟩ = t^{−1/4}·(4/3)t^{3/4}‖dF‖², finite as t → 0
        let power = if t > T::zero() { chart.inner1(&df.scaled(t.powf(lit(-0.25))), &v, region) } else { T::zero() };
        let nv = chart.covariant_derivative(&v);
        let grad = chart.inner_tensor(&nv, &nv, region);
        if k > 0 {
            let dt = t - prev_t;
            w += half * dt * (power + prev_power);
            d += half * dt * (grad + prev_grad);
        }
        rows.push(WeakSolutionRow { t: t.to_f64_lossy(), e: e.to_f64_lossy(), w: w.to_f64_lossy(), d: d.to_f64_lossy() });
        prev_power = power;
        prev_grad = grad;
        prev_t = t;
    }
    let df_sq = df_sq.to_f64_lossy();
    let tf = t_final.to_f64_lossy();
    let law = |t: f64| 8.0 / 9.0 * t.powf(1.5) * df_sq;
    let energy_law_rel_err = rows.iter().map(|r| (r.e - law(r.t)).abs()).fold(0.0, f64::max) / law(tf);
    let last = rows.last().expect("at least two rows");
    Ok(WeakSolutionReport {
        a: spec.a.to_f64_lossy(),
        r0: spec.r0.to_f64_lossy(),
        n,
        degree,
        t_final: tf,
        time_nodes,
        df_norm_sq: df_sq,
        grad_df_norm_sq: grad_sq.to_f64_lossy(),
        energy_law_rel_err,
        work_balance_rel_err: (last.e - last.w).abs() / last.e,
        defect: last.d,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicNormReport {
    pub a: f64,
    pub r0: f64,
    pub n: usize,
    /// `‖dF‖²` over the chart disk `r ≤ r0`.
    pub df_norm_sq: f64,
    /// `π r0²`: `|dF|²_g √g = 1` for `F = Re z` at every curvature.
    pub df_norm_sq_exact: f64,
    pub grad_ratio: f64,
    /// `a² r0²`, the truncated value of `‖∇dF‖² = a²‖dF‖²`.
    pub grad_ratio_exact: f64,
    /// `‖Δ_H dF‖ / ‖dF‖` on the reporting region.
    pub hodge_rel: f64,
}

/// Norms of `dF`, `F = Re z`, on the hyperbolic chart.
pub fn harmonic_form_norms<T: Scalar>(spec: ManifoldSpec<T>, n: usize) -> Result<HarmonicNormReport> {
    if spec.kind != ManifoldKind::Hyperbolic {
        return Err(Error::InvalidArguments("harmonic-form norms need the hyperbolic chart".into()));
    }
    let chart = Chart::new(spec, n)?;
    let df = harmonic_df(&chart, 1);
    let nab = chart.covariant_derivative(&df);
    let df_sq = chart.inner1(&df, &df, Region::Chart).to_f64_lossy();
    let grad_sq = chart.inner_tensor(&nab, &nab, Region::Chart).to_f64_lossy();
    let lap = chart.hodge_laplacian(&df);
    let (a, r0) = (spec.a.to_f64_lossy(), spec.r0.to_f64_lossy());
    Ok(HarmonicNormReport {
        a,
        r0,
        n,
        df_norm_sq: df_sq,
        df_norm_sq_exact: std::f64::consts::PI * r0 * r0,
        grad_ratio: grad_sq / df_sq,
        grad_ratio_exact: a * a * r0 * r0,
        hodge_rel: (chart.norm1(&lap, Region::Reporting) / chart.norm1(&df, Region::Reporting)).to_f64_lossy(),
    })
}
