//! Leray-projected Stokes / Navier–Stokes stepping with a selectable viscous
//! operator, and the energy bookkeeping that goes with it.
//!
//! One step is IMEX Euler: explicit advection and forcing, an implicit viscous
//! solve, then projection.

mod experiment;
mod forcing;
mod krylov;
mod ledger;
mod projection;
mod viscosity;

pub use experiment::{
    decay_fit, energy_equality_experiment, energy_identity_defect, harmonic_form_norms, DecayFit,
    HarmonicNormReport, WeakSolutionReport,
    WEAK_SOLUTION_TIME_NODES,
};
pub use forcing::Forcing;
pub use krylov::{conjugate_gradient, CgOptions, CgOutcome};
pub use ledger::{EnergyLedger, LedgerRow, LEDGER_HEADER};
pub use projection::{Projection, Projector};
pub use viscosity::{apply_viscosity, apply_viscosity_formula, pinned_dofs, ImplicitViscosity, ViscosityChoice};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{OneFormField, ScalarField};
use crate::geometry::ManifoldSpec;
use crate::library::{named_field, FieldName};
use crate::operators::{Chart, Region};
use crate::scalar::{lit, Scalar};

/// Largest accepted `‖δu‖ / ‖u‖` after a projection.
pub const DIVERGENCE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig<T> {
    pub spec: ManifoldSpec<T>,
    pub n: usize,
    pub nu: T,
    pub dt: T,
    pub t_final: T,
    pub choice: ViscosityChoice,
    pub init: FieldName,
    pub forcing: Forcing<T>,
    pub nonlinear: bool,
    /// Region the ledger norms are integrated over.
    pub region: Region,
}

impl<T: Scalar> SolverConfig<T> {
    pub fn stokes(spec: ManifoldSpec<T>, n: usize, choice: ViscosityChoice, init: FieldName) -> Self {
        Self {
            spec,
            n,
            nu: T::one(),
            dt: lit(1e-3),
            t_final: T::one(),
            choice,
            init,
            forcing: Forcing::None,
            nonlinear: false,
            region: Region::Reporting,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        let bad = |what: &str| Err(Error::InvalidSpec(what.to_string()));
        if !(self.dt > T::zero()) {
            return bad("dt must be positive");
        }
        if !(self.nu > T::zero()) {
            return bad("nu must be positive");
        }
        if !(self.t_final >= T::zero()) || !self.t_final.is_finite() {
            return bad("T must be finite and non-negative");
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round().to_usize().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowState<T> {
    pub t: T,
    pub u: OneFormField<T>,
    pub p: ScalarField<T>,
}

/// `(∇_u u)_j = g^{ik} u_k ∇_i u_j`.
pub fn advect<T: Scalar>(chart: &Chart<T>, u: &OneFormField<T>) -> OneFormField<T> {
    let nab = chart.covariant_derivative(u);
    let mut out = OneFormField::zeros(chart.len());
    for idx in 0..chart.len() {
        if !chart.is_active(idx) {
            continue;
        }
        let v = chart.metric.ginv[idx].mul_vec(u.at(idx));
        out.set(
            idx,
            [v[0] * nab.t[0][0][idx] + v[1] * nab.t[1][0][idx], v[0] * nab.t[0][1][idx] + v[1] * nab.t[1][1][idx]],
        );
    }
    out
}

/// Largest stable explicit advection step `1 / max_i |u^i| / d_i`.
pub fn cfl_limit<T: Scalar>(chart: &Chart<T>, u: &OneFormField<T>) -> T {
    let mut m = T::zero();
    for idx in 0..chart.len() {
        if chart.is_active(idx) {
            let v = chart.metric.ginv[idx].mul_vec(u.at(idx));
            m = m.max(v[0].abs() / chart.grid.d1 + v[1].abs() / chart.grid.d2);
        }
    }
    if m == T::zero() {
        T::infinity()
    } else {
        T::one() / m
    }
}

/// A configured stepper: chart, projector and viscous solver built once.
#[derive(Clone, Debug)]
pub struct Solver<T> {
    pub cfg: SolverConfig<T>,
    pub chart: Chart<T>,
    pub projector: Projector<T>,
    pub viscous: ImplicitViscosity<T>,
    forcing_shape: Option<OneFormField<T>>,
}

impl<T: Scalar> Solver<T> {
    pub fn new(cfg: SolverConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let chart = Chart::new(cfg.spec, cfg.n)?;
        Self::with_chart(cfg, chart)
    }

    pub fn with_chart(cfg: SolverConfig<T>, chart: Chart<T>) -> Result<Self> {
        cfg.validate()?;
        let projector = Projector::new(&chart);
        let viscous = ImplicitViscosity::new(&chart, cfg.choice, cfg.dt * cfg.nu);
        let forcing_shape = match cfg.forcing.field() {
            Some(name) => Some(named_field(&chart, name)?),
            None => None,
        };
        Ok(Self { cfg, chart, projector, viscous, forcing_shape })
    }

    /// Projected initial state.
    pub fn initial_state(&self) -> Result<FlowState<T>> {
        let w = named_field(&self.chart, self.cfg.init)?;
        let proj = self.projector.project(&self.chart, &w)?;
        Ok(FlowState { t: T::zero(), u: proj.u, p: ScalarField::zeros(self.chart.len()) })
    }

    /// Forcing at time `t`.
    pub fn forcing_at(&self, t: T) -> Option<OneFormField<T>> {
        let shape = self.forcing_shape.as_ref()?;
        Some(shape.scaled(self.cfg.forcing.amplitude(t)))
    }

    /// Midpoint forcing used over `[t, t + dt]`.
    fn step_forcing(&self, t: T) -> Option<OneFormField<T>> {
        self.forcing_at(t + self.cfg.dt * lit::<T>(0.5))
    }

    pub fn step(&self, state: &FlowState<T>) -> Result<FlowState<T>> {
        self.step_counted(state).map(|(s, _)| s)
    }

    /// One step, also returning the Krylov iteration counts
    /// `[viscous, projection]`.
    pub fn step_counted(&self, state: &FlowState<T>) -> Result<(FlowState<T>, [usize; 2])> {
        let dt = self.cfg.dt;
        let fail = |e: Error| match e {
            Error::StepFailure { reason, .. } => Error::StepFailure { t: state.t.to_f64_lossy(), reason },
            Error::ProjectionFailure { residual, iterations } => Error::StepFailure {
                t: state.t.to_f64_lossy(),
                reason: format!("projection stalled at residual {residual:e} after {iterations} iterations"),
            },
            other => other,
        };
        let mut rhs = state.u.clone();
        if self.cfg.nonlinear {
            rhs.axpy(-dt, &advect(&self.chart, &state.u));
        }
        if let Some(f) = self.step_forcing(state.t) {
            rhs.axpy(dt, &f);
        }
        let mut u = rhs.clone();
        let vis = self.viscous.solve(&self.chart, &rhs, &mut u).map_err(fail)?;
        let guess = state.p.scaled(dt);
        let proj = self.projector.project_from(&self.chart, &u, Some(&guess)).map_err(fail)?;
        if !proj.u.is_finite() {
            return Err(Error::StepFailure { t: state.t.to_f64_lossy(), reason: "non-finite velocity".into() });
        }
        let counts = [vis.iterations, proj.solve.iterations];
        Ok((FlowState { t: state.t + dt, u: proj.u, p: proj.p.scaled(T::one() / dt) }, counts))
    }

    /// `‖δu‖ / ‖u‖` on the reporting region.
    pub fn divergence_ratio(&self, u: &OneFormField<T>) -> T {
        let r = Region::Reporting;
        let nu = self.chart.norm1(u, r);
        if nu == T::zero() {
            return T::zero();
        }
        self.chart.norm0(&self.chart.codifferential_1(u), r) / nu
    }

    pub fn ledger_row(&self, state: &FlowState<T>, work: T) -> LedgerRow {
        LedgerRow::measure(&self.chart, self.cfg.region, state, work)
    }

    /// Steps to `T`, recording a ledger row per step. On failure the ledger
    /// up to the last accepted step is returned with the error.
    pub fn run(&self) -> std::result::Result<(FlowState<T>, EnergyLedger), (EnergyLedger, Error)> {
        let mut ledger = EnergyLedger::default();
        let mut state = match self.initial_state() {
            Ok(s) => s,
            Err(e) => return Err((ledger, e)),
        };
        if self.cfg.nonlinear {
            let lim = cfl_limit(&self.chart, &state.u);
            if self.cfg.dt > lim {
                ledger.warnings.push(format!(
                    "dt = {:e} exceeds the advective CFL limit {:e}",
                    self.cfg.dt.to_f64_lossy(),
                    lim.to_f64_lossy()
                ));
            }
        }
        let mut work = T::zero();
        ledger.rows.push(self.ledger_row(&state, work));
        let mut max_div = T::zero();
        for _ in 0..self.cfg.steps() {
            if let Some(f) = self.step_forcing(state.t) {
                work += self.cfg.dt * self.chart.inner1(&f, &state.u, self.cfg.region);
            }
            state = match self.step_counted(&state) {
                Ok((s, [v, p])) => {
                    ledger.iterations[0] += v;
                    ledger.iterations[1] += p;
                    s
                }
                Err(e) => return Err((ledger, e)),
            };
            max_div = max_div.max(self.divergence_ratio(&state.u));
            ledger.rows.push(self.ledger_row(&state, work));
        }
        ledger.max_divergence_ratio = max_div.to_f64_lossy();
        if ledger.max_divergence_ratio > DIVERGENCE_TOL {
            ledger.warnings.push(format!(
                "divergence ratio {:e} above {:e}",
                ledger.max_divergence_ratio, DIVERGENCE_TOL
            ));
        }
        Ok((state, ledger))
    }
}

/// Builds a solver and runs it.
pub fn run<T: Scalar>(cfg: SolverConfig<T>) -> std::result::Result<(FlowState<T>, EnergyLedger), (EnergyLedger, Error)> {
    match Solver::new(cfg) {
        Ok(s) => s.run(),
        Err(e) => Err((EnergyLedger::default(), e)),
    }
}
