use proptest::prelude::*;

use mflow_core::library::{random_one_form, FieldName};
use mflow_core::solver::{
    energy_identity_defect, run, Forcing, Projector, Solver, SolverConfig, ViscosityChoice, LEDGER_HEADER,
};
use mflow_core::{Chart64, Config64, Region, Spec64};

const CHOICES: [ViscosityChoice; 3] =
    [ViscosityChoice::Hodge, ViscosityChoice::Bochner, ViscosityChoice::DeformationEbinMarsden];

fn geometries() -> [Spec64; 3] {
    [Spec64::torus(), Spec64::sphere(1.0), Spec64::hyperbolic(1.0)]
}

fn short(spec: Spec64, n: usize, choice: ViscosityChoice, init: FieldName, steps: usize) -> Config64 {
    let mut c = SolverConfig::stokes(spec, n, choice, init);
    c.t_final = c.dt * steps as f64;
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn projection_is_idempotent(seed in any::<u64>(), which in 0usize..3) {
        let chart = Chart64::new(geometries()[which], 32).unwrap();
        let proj = Projector::new(&chart);
        let w = random_one_form(&chart, seed);
        let once = proj.project(&chart, &w).unwrap().u;
        let twice = proj.project(&chart, &once).unwrap().u;
        let r = Region::Chart;
        let change = chart.norm1(&twice.sub(&once), r) / chart.norm1(&once, r);
        prop_assert!(change < 1e-8, "{change:e}");
        prop_assert!(chart.norm1(&once, r) <= chart.norm1(&w, r) * (1.0 + 1e-12));
    }
}

#[test]
fn zero_state_stays_zero() {
    for spec in geometries() {
        for choice in CHOICES {
            let (state, ledger) = run(short(spec, 24, choice, FieldName::Zero, 5)).unwrap();
            assert_eq!(state.u.max_abs(), 0.0);
            assert!(ledger.rows.iter().all(|r| r.E == 0.0 && r.W == 0.0));
        }
    }
}

#[test]
fn energy_identity_with_forcing() {
    // Backward Euler drops ½‖uⁿ⁺¹ − uⁿ‖² per step, so the defect is O(dt).
    // Starting from rest keeps every mode in the asymptotic regime.
    for spec in geometries() {
        for choice in CHOICES {
            let defect = |steps: usize| {
                let mut cfg = short(spec, 32, choice, FieldName::Zero, steps);
                cfg.dt = 0.1 / steps as f64;
                cfg.t_final = 0.1;
                cfg.forcing = "steady:stream-bump:2".parse().unwrap();
                cfg.region = Region::Chart;
                let (_, ledger) = run(cfg).unwrap();
                let work = ledger.rows.last().unwrap().W;
                assert!(work > 0.0);
                let d = energy_identity_defect(&ledger, choice, cfg.nu);
                (d.iter().fold(0.0f64, |m, x| m.max(x.abs())), work)
            };
            let ((coarse, work), (fine, _)) = (defect(20), defect(40));
            let tag = format!("{:?} {choice}: {coarse:e} -> {fine:e} vs W(T) {work:e}", spec.kind);
            assert!(fine < 5e-2 * work, "{tag}");
            assert!((1.8..2.2).contains(&(coarse / fine)), "{tag}");
        }
    }
}

#[test]
fn killing_data_is_steady_under_deformation_viscosity() {
    // Def k = 0 holds to O(h²) on the grid.
    for spec in [Spec64::sphere(1.0), Spec64::sphere(2.0)] {
        let drift = |n: usize| {
            let cfg = short(spec, n, ViscosityChoice::DeformationEbinMarsden, FieldName::Killing, 10);
            let (_, ledger) = run(cfg).unwrap();
            let e0 = ledger.rows[0].E;
            ledger.rows.iter().fold(0.0f64, |m, r| m.max((r.E / e0 - 1.0).abs()))
        };
        let (coarse, fine) = (drift(32), drift(64));
        assert!(fine < 5e-5 && coarse / fine > 3.5, "a={}: {coarse:e} -> {fine:e}", spec.a);
    }
}

#[test]
fn harmonic_data_is_steady_under_hodge_viscosity() {
    let cfg = short(Spec64::hyperbolic(1.0), 48, ViscosityChoice::Hodge, FieldName::HarmonicDf, 10);
    let (state, ledger) = run(cfg).unwrap();
    let e0 = ledger.rows[0].E;
    assert!(ledger.rows.iter().all(|r| (r.E / e0 - 1.0).abs() < 1e-12));
    assert!(ledger.rows.iter().all(|r| r.G > 0.0));
    assert!(state.u.is_finite());
}

#[test]
fn decay_ordering_on_the_sphere() {
    // Killing data: E ∝ e^{-4a²t} (Hodge), e^{-2a²t} (Bochner), constant (deformation).
    let e = |choice| {
        let cfg = short(Spec64::sphere(1.0).with_phi_min(0.05), 32, choice, FieldName::Killing, 20);
        let (_, ledger) = run(cfg).unwrap();
        let (first, last) = (ledger.rows[0].E, ledger.rows.last().unwrap().E);
        -(last / first).ln() / 0.02
    };
    let (h, b, d) = (e(ViscosityChoice::Hodge), e(ViscosityChoice::Bochner), e(ViscosityChoice::DeformationEbinMarsden));
    assert!((h - 4.0).abs() < 0.4, "hodge {h}");
    assert!((b - 2.0).abs() < 0.2, "bochner {b}");
    assert!(d.abs() < 1e-2, "deformation {d}");
}

#[test]
fn nonlinear_steps_keep_fields_divergence_free() {
    let mut cfg = short(Spec64::torus(), 32, ViscosityChoice::Hodge, FieldName::StreamBump, 10);
    cfg.nonlinear = true;
    cfg.nu = 0.1;
    let solver = Solver::new(cfg).unwrap();
    let (state, ledger) = solver.run().unwrap();
    assert!(ledger.max_divergence_ratio < 1e-8);
    assert!(solver.divergence_ratio(&state.u) < 1e-8);
    assert!(ledger.rows.last().unwrap().E < ledger.rows[0].E);
}

#[test]
fn invalid_configs_are_rejected() {
    let base = short(Spec64::torus(), 16, ViscosityChoice::Hodge, FieldName::Mode, 1);
    for bad in [Config64 { dt: 0.0, ..base }, Config64 { nu: -1.0, ..base }, Config64 { t_final: f64::NAN, ..base }] {
        assert!(Solver::new(bad).is_err());
    }
    let mode_on_sphere = short(Spec64::sphere(1.0), 16, ViscosityChoice::Hodge, FieldName::Mode, 1);
    assert!(run(mode_on_sphere).is_err());
}

#[test]
fn ledger_csv_format() {
    let (_, ledger) = run(short(Spec64::torus(), 16, ViscosityChoice::Bochner, FieldName::Mode, 2)).unwrap();
    let csv = ledger.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(LEDGER_HEADER));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 6);
    assert_eq!(first[0], "0.000000000000e+00");
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn forcing_specs_round_trip() {
    for s in ["none", "steady:killing:2", "power-law:harmonic-df:1:-0.25"] {
        let f: Forcing<f64> = s.parse().unwrap();
        assert_eq!(f.to_string().parse::<Forcing<f64>>().unwrap(), f);
    }
    assert!("steady".parse::<Forcing<f64>>().is_err());
}
