use serde::Serialize;

use mflow_core::checks::OrderFit;
use mflow_core::format::fmt_e12;

/// One pass/fail comparison in a summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Measured value; `null` for exact (rounding-level) convergence fits.
    pub value: Option<f64>,
    pub requirement: String,
    pub pass: bool,
}

impl Check {
    pub fn below(name: &str, value: f64, limit: f64) -> Self {
        Self::new(name, Some(value), format!("< {}", fmt_e12(limit)), value < limit)
    }

    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self::new(name, Some(value), format!("<= {}", fmt_e12(limit)), value <= limit)
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self::new(name, Some(value), format!(">= {}", fmt_e12(limit)), value >= limit)
    }

    pub fn positive(name: &str, value: f64) -> Self {
        Self::new(name, Some(value), "> 0".into(), value > 0.0)
    }

    /// `|value − target| <= rel·|target|`.
    pub fn within(name: &str, value: f64, target: f64, rel: f64) -> Self {
        let ok = (value - target).abs() <= rel * target.abs();
        Self::new(name, Some(value), format!("within {} of {}", fmt_e12(rel), fmt_e12(target)), ok)
    }

    pub fn order(name: &str, fit: &OrderFit, min: f64) -> Self {
        Self::new(name, fit.order, format!(">= {} (or exact)", fmt_e12(min)), fit.at_least(min))
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Self::new(name, None, "holds".into(), ok)
    }

    fn new(name: &str, value: Option<f64>, requirement: String, pass: bool) -> Self {
        Self { name: name.to_string(), value, requirement, pass }
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}
