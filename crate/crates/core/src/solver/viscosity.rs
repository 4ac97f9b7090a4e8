//! Viscous operators and the implicit viscous solve.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::krylov::{conjugate_gradient, CgOptions, CgOutcome};
use crate::error::{Error, Result};
use crate::field::OneFormField;
use crate::geometry::ManifoldKind;
use crate::operators::Chart;
use crate::scalar::{lit, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViscosityChoice {
    Hodge,
    Bochner,
    #[serde(rename = "deformation")]
    DeformationEbinMarsden,
}

impl ViscosityChoice {
    pub const ALL: [ViscosityChoice; 3] =
        [ViscosityChoice::Hodge, ViscosityChoice::Bochner, ViscosityChoice::DeformationEbinMarsden];

    pub fn as_str(self) -> &'static str {
        match self {
            ViscosityChoice::Hodge => "hodge",
            ViscosityChoice::Bochner => "bochner",
            ViscosityChoice::DeformationEbinMarsden => "deformation",
        }
    }
}

impl fmt::Display for ViscosityChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ViscosityChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ViscosityChoice::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidArguments(format!("unknown viscosity: {s}")))
    }
}

/// Viscous term of the chosen operator, in the self-adjoint form the stepper
/// integrates: `−(dδ + δd)` (with the free-boundary closure of
/// [`Chart::hodge_laplacian_free_boundary`]), `−∇*∇` and `−2Def*Def`. On
/// co-closed fields the last one equals `Δ_H + 2Ric` up to truncation error.
pub fn apply_viscosity<T: Scalar>(chart: &Chart<T>, u: &OneFormField<T>, choice: ViscosityChoice) -> OneFormField<T> {
    match choice {
        ViscosityChoice::Hodge => chart.hodge_laplacian_free_boundary(u),
        ViscosityChoice::Bochner => chart.rough_laplacian(u),
        ViscosityChoice::DeformationEbinMarsden => {
            chart.def_adjoint(&chart.deformation(u)).scaled(lit::<T>(-2.0))
        }
    }
}

/// The same operators written as formulas: `Δ_H`, the coordinate Bochner
/// Laplacian, and `Δ_H + 2Ric`.
pub fn apply_viscosity_formula<T: Scalar>(
    chart: &Chart<T>,
    u: &OneFormField<T>,
    choice: ViscosityChoice,
) -> OneFormField<T> {
    match choice {
        ViscosityChoice::Hodge => chart.hodge_laplacian(u),
        ViscosityChoice::Bochner => chart.bochner_laplacian(u),
        ViscosityChoice::DeformationEbinMarsden => {
            chart.hodge_laplacian(u).add(&chart.ricci_action(u).scaled(lit::<T>(2.0)))
        }
    }
}

/// Per-node 2×2 blocks, `blocks[idx][r][c]`.
type Block<T> = [[T; 2]; 2];

/// Solves `(I − κ L) u = rhs` with `κ = dt·ν`, through the symmetric form
/// `M1(I − κL)` and block-Jacobi preconditioning.
#[derive(Clone, Debug)]
pub struct ImplicitViscosity<T> {
    pub choice: ViscosityChoice,
    pub kappa: T,
    inv_blocks: Vec<Block<T>>,
    abs_blocks: Vec<Block<T>>,
    /// Flat degrees of freedom held at zero.
    fixed: Vec<bool>,
    pub opts: CgOptions,
}

/// Stencils of the viscous operators couple nodes at most four apart per
/// axis, so probing with colors eight apart isolates every diagonal block.
const PROBE_PERIOD: usize = 8;

fn probe_period(n: usize, periodic: bool) -> usize {
    if !periodic || n % PROBE_PERIOD == 0 {
        return PROBE_PERIOD;
    }
    (PROBE_PERIOD + 1..=n).find(|p| n % p == 0).unwrap_or(n)
}

/// Degrees of freedom pinned to zero in the implicit solve. For the Hodge
/// operator on the sphere the θ-component vanishes on the first and last
/// φ-rows: smooth 1-forms have `u_θ = O(φ²)` at a pole, and without the
/// condition the band would carry the harmonic form `dθ`, which the closed
/// sphere does not have. The other operators have no kernel on the band and
/// keep their natural closure, which leaves Killing fields exact.
pub fn pinned_dofs<T: Scalar>(chart: &Chart<T>, choice: ViscosityChoice) -> Vec<bool> {
    let g = &chart.grid;
    let len = chart.len();
    let mut fixed = vec![false; 2 * len];
    if chart.kind() == ManifoldKind::Sphere && choice == ViscosityChoice::Hodge {
        for i in [0, g.n1 - 1] {
            for j in 0..g.n2 {
                fixed[len + g.index(i, j)] = true;
            }
        }
    }
    fixed
}

fn restrict<T: Scalar>(fixed: &[bool], v: &mut [T]) {
    for (x, &f) in v.iter_mut().zip(fixed) {
        if f {
            *x = T::zero();
        }
    }
}

fn invert_block<T: Scalar>(b: &Block<T>) -> Block<T> {
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    if det != T::zero() {
        return [[b[1][1] / det, -b[0][1] / det], [-b[1][0] / det, b[0][0] / det]];
    }
    let inv = |x: T| if x == T::zero() { T::zero() } else { T::one() / x };
    [[inv(b[0][0]), T::zero()], [T::zero(), inv(b[1][1])]]
}

impl<T: Scalar> ImplicitViscosity<T> {
    pub fn new(chart: &Chart<T>, choice: ViscosityChoice, kappa: T) -> Self {
        let fixed = pinned_dofs(chart, choice);
        let g = &chart.grid;
        let (p1, p2) = (probe_period(g.n1, g.periodic[0]), probe_period(g.n2, g.periodic[1]));
        let len = chart.len();
        let zero = [[T::zero(); 2]; 2];
        let mut blocks = vec![zero; len];
        for ci in 0..p1 {
            for cj in 0..p2 {
                for comp in 0..2 {
                    let mut e = OneFormField::zeros(len);
                    for i in (ci..g.n1).step_by(p1) {
                        for j in (cj..g.n2).step_by(p2) {
                            let idx = g.index(i, j);
                            if chart.is_active(idx) {
                                if comp == 0 {
                                    e.c1[idx] = T::one();
                                } else {
                                    e.c2[idx] = T::one();
                                }
                            }
                        }
                    }
                    let y = system_apply(chart, choice, kappa, &fixed, &e);
                    for i in (ci..g.n1).step_by(p1) {
                        for j in (cj..g.n2).step_by(p2) {
                            let idx = g.index(i, j);
                            blocks[idx][0][comp] = y.c1[idx];
                            blocks[idx][1][comp] = y.c2[idx];
                        }
                    }
                }
            }
        }
        let inv_blocks = blocks.iter().map(invert_block).collect();
        let abs_blocks = blocks.iter().map(|b| [[b[0][0].abs(), b[0][1].abs()], [b[1][0].abs(), b[1][1].abs()]]).collect();
        Self { choice, kappa, inv_blocks, abs_blocks, fixed, opts: CgOptions::default() }
    }

    pub fn solve(&self, chart: &Chart<T>, rhs: &OneFormField<T>, x: &mut OneFormField<T>) -> Result<CgOutcome> {
        let mut b = chart.weigh_one_form(rhs).to_flat();
        restrict(&self.fixed, &mut b);
        let mut flat = x.to_flat();
        restrict(&self.fixed, &mut flat);
        let len = chart.len();
        let blockwise = |blocks: &[Block<T>], v: &[T], abs: bool| -> Vec<T> {
            let mut out = vec![T::zero(); v.len()];
            for idx in 0..len {
                let (a, c) = if abs { (v[idx].abs(), v[len + idx].abs()) } else { (v[idx], v[len + idx]) };
                let bl = &blocks[idx];
                out[idx] = bl[0][0] * a + bl[0][1] * c;
                out[len + idx] = bl[1][0] * a + bl[1][1] * c;
            }
            out
        };
        // stencils have at most 25 nodes per row; used only as a rounding floor
        let spread = lit::<T>(25.0);
        let out = conjugate_gradient(
            |v| system_apply(chart, self.choice, self.kappa, &self.fixed, &OneFormField::from_flat(v)).to_flat(),
            |v| blockwise(&self.abs_blocks, v, true).into_iter().map(|m| m * spread).collect(),
            |r| blockwise(&self.inv_blocks, r, false),
            &b,
            &mut flat,
            self.opts,
            None,
        )
        .map_err(|e| match e {
            Error::ProjectionFailure { residual, iterations } => Error::StepFailure {
                t: f64::NAN,
                reason: format!("viscous solve stalled at residual {residual:e} after {iterations} iterations"),
            },
            other => other,
        })?;
        *x = OneFormField::from_flat(&flat);
        Ok(out)
    }
}

/// `P M1(u − κ L u)` on the free degrees of freedom `P`.
fn system_apply<T: Scalar>(
    chart: &Chart<T>,
    choice: ViscosityChoice,
    kappa: T,
    fixed: &[bool],
    u: &OneFormField<T>,
) -> OneFormField<T> {
    let mut flat = u.to_flat();
    restrict(fixed, &mut flat);
    let u = OneFormField::from_flat(&flat);
    let lu = apply_viscosity(chart, &u, choice);
    let mut out = chart.weigh_one_form(&u.lincomb(T::one(), &lu, -kappa)).to_flat();
    restrict(fixed, &mut out);
    OneFormField::from_flat(&out)
}
