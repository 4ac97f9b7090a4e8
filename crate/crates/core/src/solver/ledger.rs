use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::FlowState;
use crate::format::fmt_e12;
use crate::operators::{Chart, Region};
use crate::scalar::{lit, Scalar};

pub const LEDGER_HEADER: &str = "t,E,G,Dd,Ddef,W";

#[allow(non_snake_case)]
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub t: f64,
    /// `½‖u‖²`
    pub E: f64,
    /// `‖∇u‖²`
    pub G: f64,
    /// `‖du‖²`
    pub Dd: f64,
    /// `2‖Def u‖²`
    pub Ddef: f64,
    /// `∫⟨f, u⟩ dτ`
    pub W: f64,
}

impl LedgerRow {
    pub fn measure<T: Scalar>(chart: &Chart<T>, region: Region, state: &FlowState<T>, work: T) -> Self {
        let u = &state.u;
        let n1 = chart.norm1(u, region);
        let g = chart.norm_tensor(&chart.covariant_derivative(u), region);
        let d = chart.norm2(&chart.exterior_d1(u), region);
        let def = chart.norm_sym(&chart.deformation(u), region);
        Self {
            t: state.t.to_f64_lossy(),
            E: (lit::<T>(0.5) * n1 * n1).to_f64_lossy(),
            G: (g * g).to_f64_lossy(),
            Dd: (d * d).to_f64_lossy(),
            Ddef: (lit::<T>(2.0) * def * def).to_f64_lossy(),
            W: work.to_f64_lossy(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub rows: Vec<LedgerRow>,
    pub warnings: Vec<String>,
    /// Worst `‖δu‖/‖u‖` over the accepted steps.
    pub max_divergence_ratio: f64,
    /// Total Krylov iterations `[viscous, projection]`.
    pub iterations: [usize; 2],
}

impl EnergyLedger {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{LEDGER_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_e12(r.t),
                fmt_e12(r.E),
                fmt_e12(r.G),
                fmt_e12(r.Dd),
                fmt_e12(r.Ddef),
                fmt_e12(r.W)
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ASCII output")
    }

    pub fn is_consistent(&self) -> bool {
        self.rows.iter().all(|r| {
            [r.t, r.E, r.G, r.Dd, r.Ddef, r.W].iter().all(|v| v.is_finite()) && r.E >= 0.0
        }) && self.rows.windows(2).all(|w| w[1].t > w[0].t)
    }
}
