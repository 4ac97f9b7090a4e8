//! Flags, `key = value` config files and their resolution into one record.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use mflow_core::library::FieldName;
use mflow_core::solver::{Forcing, ViscosityChoice};
use mflow_core::ManifoldKind;

#[derive(Debug, Parser)]
#[command(name = "mflow", version, about = "Vector Laplacians and viscous flow on model surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weitzenböck and div-Def identities, the `‖du‖ ≤ √2‖∇u‖` bound and adjointness.
    Identities(Flags),
    /// `‖du‖² = ‖∇u‖² + a²‖u‖²` for divergence-free fields on the sphere.
    SphereNorms(Flags),
    /// Harmonic forms on the hyperbolic disk: norms, the explicit weak
    /// solution and Stokes decay under each viscous operator.
    Counterexample(Flags),
    /// One Stokes / Navier–Stokes run with an energy ledger.
    Solve(Flags),
    /// Tangential candidates for the restricted vector Laplacian on the unit sphere.
    Restriction(Flags),
}

impl Command {
    pub fn split(self) -> (Experiment, Flags) {
        match self {
            Command::Identities(f) => (Experiment::Identities, f),
            Command::SphereNorms(f) => (Experiment::SphereNorms, f),
            Command::Counterexample(f) => (Experiment::Counterexample, f),
            Command::Solve(f) => (Experiment::Solve, f),
            Command::Restriction(f) => (Experiment::Restriction, f),
        }
    }
}

#[derive(Debug, Default, Clone, clap::Args)]
pub struct Flags {
    /// torus | sphere | hyperbolic
    #[arg(long)]
    pub manifold: Option<String>,
    /// Curvature scale.
    #[arg(long)]
    pub a: Option<f64>,
    /// Grid resolution (finest resolution for sweeps).
    #[arg(long)]
    pub n: Option<usize>,
    /// Hyperbolic chart radius.
    #[arg(long)]
    pub r0: Option<f64>,
    /// Sphere polar-cap angle.
    #[arg(long = "phi-min")]
    pub phi_min: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final time.
    #[arg(long = "T")]
    pub t_final: Option<f64>,
    /// hodge | bochner | deformation
    #[arg(long)]
    pub viscosity: Option<String>,
    /// zero | killing | mode | harmonic-df | stream-bump
    #[arg(long)]
    pub init: Option<String>,
    /// none | steady:<field>[:amp] | power-law:<field>:<amp>:<exp>
    #[arg(long)]
    pub forcing: Option<String>,
    /// Include the advection term.
    #[arg(long)]
    pub nonlinear: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Resolution of the Stokes runs in `counterexample`.
    #[arg(long = "stokes-n")]
    pub stokes_n: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat `key = value` file; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Identities,
    SphereNorms,
    Counterexample,
    Solve,
    Restriction,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Identities => "identities",
            Experiment::SphereNorms => "sphere-norms",
            Experiment::Counterexample => "counterexample",
            Experiment::Solve => "solve",
            Experiment::Restriction => "restriction",
        }
    }

    fn default_manifold(self) -> ManifoldKind {
        match self {
            Experiment::Identities => ManifoldKind::Torus,
            Experiment::SphereNorms | Experiment::Restriction => ManifoldKind::Sphere,
            Experiment::Counterexample => ManifoldKind::Hyperbolic,
            Experiment::Solve => ManifoldKind::Sphere,
        }
    }

    fn default_n(self) -> usize {
        match self {
            Experiment::Identities | Experiment::Counterexample | Experiment::Restriction => 256,
            Experiment::SphereNorms | Experiment::Solve => 128,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A usage or configuration problem (exit code 2).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Fully resolved settings; embedded in every summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub subcommand: Experiment,
    pub manifold: ManifoldKind,
    pub a: f64,
    pub n: usize,
    pub r0: f64,
    pub phi_min: f64,
    pub nu: f64,
    pub dt: f64,
    pub t_final: f64,
    pub viscosity: ViscosityChoice,
    pub init: FieldName,
    pub forcing: String,
    pub nonlinear: bool,
    pub seed: u64,
    pub stokes_n: usize,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn defaults(exp: Experiment) -> Self {
        Self {
            subcommand: exp,
            manifold: exp.default_manifold(),
            a: 1.0,
            n: exp.default_n(),
            r0: 0.99,
            phi_min: 0.3,
            nu: 1.0,
            dt: 1e-3,
            t_final: 1.0,
            viscosity: ViscosityChoice::Hodge,
            init: FieldName::Killing,
            forcing: "none".into(),
            nonlinear: false,
            seed: 42,
            stokes_n: 128,
            out: PathBuf::from("."),
        }
    }

    /// Defaults, overridden by the config file, overridden by flags.
    pub fn resolve(exp: Experiment, flags: &Flags) -> Result<Self, ConfigError> {
        let mut cfg = Self::defaults(exp);
        if let Some(path) = &flags.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
            for (key, value) in parse_key_values(&text)? {
                cfg.set(&key, &value)?;
            }
        }
        let pairs: [(&str, Option<String>); 14] = [
            ("manifold", flags.manifold.clone()),
            ("a", flags.a.map(|v| v.to_string())),
            ("n", flags.n.map(|v| v.to_string())),
            ("r0", flags.r0.map(|v| v.to_string())),
            ("phi_min", flags.phi_min.map(|v| v.to_string())),
            ("nu", flags.nu.map(|v| v.to_string())),
            ("dt", flags.dt.map(|v| v.to_string())),
            ("T", flags.t_final.map(|v| v.to_string())),
            ("viscosity", flags.viscosity.clone()),
            ("init", flags.init.clone()),
            ("forcing", flags.forcing.clone()),
            ("seed", flags.seed.map(|v| v.to_string())),
            ("stokes_n", flags.stokes_n.map(|v| v.to_string())),
            ("out", flags.out.as_ref().map(|p| p.display().to_string())),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        if flags.nonlinear {
            cfg.nonlinear = true;
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn num<V: std::str::FromStr>(key: &str, value: &str) -> Result<V, ConfigError> {
            value.parse().map_err(|_| ConfigError(format!("invalid value for {key}: {value:?}")))
        }
        match key {
            "manifold" => self.manifold = value.parse().map_err(|e: mflow_core::Error| ConfigError(e.to_string()))?,
            "a" => self.a = num(key, value)?,
            "n" => self.n = num(key, value)?,
            "r0" => self.r0 = num(key, value)?,
            "phi_min" | "phi-min" => self.phi_min = num(key, value)?,
            "nu" => self.nu = num(key, value)?,
            "dt" => self.dt = num(key, value)?,
            "T" | "t_final" => self.t_final = num(key, value)?,
            "viscosity" => {
                self.viscosity = value.parse().map_err(|e: mflow_core::Error| ConfigError(e.to_string()))?
            }
            "init" => self.init = value.parse().map_err(|e: mflow_core::Error| ConfigError(e.to_string()))?,
            "forcing" => {
                value.parse::<Forcing<f64>>().map_err(|e| ConfigError(e.to_string()))?;
                self.forcing = value.to_string();
            }
            "nonlinear" => self.nonlinear = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "stokes_n" | "stokes-n" => self.stokes_n = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            other => return Err(ConfigError(format!("unknown config key: {other}"))),
        }
        Ok(())
    }

    fn check(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError(m));
        let fixed = match self.subcommand {
            Experiment::SphereNorms | Experiment::Restriction => Some(ManifoldKind::Sphere),
            Experiment::Counterexample => Some(ManifoldKind::Hyperbolic),
            _ => None,
        };
        if let Some(kind) = fixed.filter(|&k| k != self.manifold) {
            return bad(format!("{} runs on the {kind} only, got --manifold {}", self.subcommand, self.manifold));
        }
        if self.subcommand == Experiment::Restriction && self.a != 1.0 {
            return bad(format!("restriction uses the unit sphere (a = 1), got a = {}", self.a));
        }
        let sweeps = matches!(self.subcommand, Experiment::Identities | Experiment::Restriction);
        let min_n = if sweeps { 32 } else { 8 };
        if self.n < min_n {
            return bad(format!("n = {} is below the minimum {min_n} for {}", self.n, self.subcommand));
        }
        if self.stokes_n < 8 {
            return bad(format!("stokes_n = {} is below 8", self.stokes_n));
        }
        self.spec().validate().map_err(|e| ConfigError(e.to_string()))?;
        self.solver_config().validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(())
    }

    pub fn spec(&self) -> mflow_core::Spec64 {
        mflow_core::Spec64::new(self.manifold, self.a).with_phi_min(self.phi_min).with_r0(self.r0)
    }

    pub fn solver_config(&self) -> mflow_core::Config64 {
        let mut c = mflow_core::Config64::stokes(self.spec(), self.n, self.viscosity, self.init);
        c.nu = self.nu;
        c.dt = self.dt;
        c.t_final = self.t_final;
        c.forcing = self.forcing.parse().unwrap_or(Forcing::None);
        c.nonlinear = self.nonlinear;
        c
    }

    /// `[n/4, n/2, n]` for convergence sweeps.
    pub fn sweep(&self) -> [usize; 3] {
        [self.n / 4, self.n / 2, self.n]
    }
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError(format!("config line {}: expected key = value, got {raw:?}", k + 1)));
        };
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# sphere run\nmanifold = sphere\nn = 64\nphi_min = 0.1\nT = 0.5\n").unwrap();
        let flags = Flags { n: Some(32), config: Some(path), ..Flags::default() };
        let cfg = ExperimentConfig::resolve(Experiment::Solve, &flags).unwrap();
        assert_eq!(cfg.manifold, ManifoldKind::Sphere);
        assert_eq!(cfg.n, 32);
        assert_eq!(cfg.phi_min, 0.1);
        assert_eq!(cfg.t_final, 0.5);
    }

    #[test]
    fn rejects_bad_settings() {
        let with = |f: Flags| ExperimentConfig::resolve(Experiment::Identities, &f);
        let err = with(Flags { manifold: Some("klein".into()), ..Flags::default() }).unwrap_err();
        assert!(err.0.contains("unknown manifold"));
        assert!(with(Flags { a: Some(-1.0), ..Flags::default() }).is_err());
        assert!(with(Flags { n: Some(16), ..Flags::default() }).is_err());
        let err = ExperimentConfig::resolve(
            Experiment::Counterexample,
            &Flags { manifold: Some("torus".into()), ..Flags::default() },
        )
        .unwrap_err();
        assert!(err.0.contains("hyperbolic"));
        assert!(parse_key_values("just words").is_err());
        let mut cfg = ExperimentConfig::defaults(Experiment::Solve);
        assert!(cfg.set("colour", "red").is_err());
        assert!(cfg.set("forcing", "steady:vortex").is_err());
    }
}
