use proptest::prelude::*;

use mflow_core::checks::{
    adjointness_defects, identity_sweep, verify_d_bound, verify_sphere_norm_identity, IdentityCheck,
};
use mflow_core::library::{harmonic_df, killing, random_one_form, random_stream, stream_field};
use mflow_core::{Chart64, OneForm64, Region, Spec64};

const R: Region = Region::Reporting;

fn geometries() -> Vec<Spec64> {
    vec![Spec64::torus(), Spec64::sphere(1.0), Spec64::sphere(2.0), Spec64::hyperbolic(1.0), Spec64::hyperbolic(2.0)]
}

fn rel(chart: &Chart64, got: &OneForm64, want: &OneForm64) -> f64 {
    chart.norm1(&got.sub(want), R) / chart.norm1(want, R)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn operators_pair_with_their_adjoints(seed in any::<u64>(), which in 0usize..5) {
        let chart = Chart64::new(geometries()[which], 32).unwrap();
        let r = adjointness_defects(&chart, seed);
        prop_assert!(r.max() <= 1e-12, "{r:?}");
    }

    #[test]
    fn d_bound_holds_for_random_forms(seed in any::<u64>(), which in 0usize..5) {
        let chart = Chart64::new(geometries()[which], 48).unwrap();
        let r = verify_d_bound(&chart, &random_one_form(&chart, seed));
        prop_assert!(r.ok, "{r:?}");
    }
}

#[test]
fn adjointness_at_production_resolution() {
    for spec in geometries() {
        let r = adjointness_defects(&Chart64::new(spec, 128).unwrap(), 7);
        assert!(r.max() <= 1e-12, "{r:?}");
    }
}

#[test]
fn weitzenbock_and_divdef_converge_at_second_order() {
    for spec in geometries() {
        for check in [IdentityCheck::Weitzenbock, IdentityCheck::Divdef] {
            let sweep = identity_sweep(spec, check, &[64, 128, 256], 42).unwrap();
            assert!(sweep.finest().l2_rel < 5e-3, "{:?} {check:?}: {:?}", spec.kind, sweep.finest());
            assert!(sweep.fit.at_least(1.9), "{:?} {check:?}: {:?}", spec.kind, sweep.fit);
        }
    }
}

#[test]
fn transposed_codifferential_matches_closed_form_inside() {
    for spec in geometries() {
        let errs: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| {
                let chart = Chart64::new(spec, n).unwrap();
                let u = random_one_form(&chart, 3);
                let (a, b) = (chart.codifferential_1(&u), chart.codifferential_1_analytic(&u));
                let diff = mflow_core::ScalarField::new(a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect());
                chart.norm0(&diff, R) / chart.norm0(&b, R).max(1e-300)
            })
            .collect();
        assert!(errs[2] < 1e-2, "{:?}: {errs:?}", spec.kind);
        assert!(errs[2] < errs[1] && errs[1] < errs[0] || errs[2] < 1e-12, "{:?}: {errs:?}", spec.kind);
    }
}

#[test]
fn killing_forms_are_eigenforms_on_the_sphere() {
    for a in [1.0, 2.0] {
        let chart = Chart64::new(Spec64::sphere(a), 128).unwrap();
        let k = killing(&chart);
        let a2 = a * a;
        let errs = [
            chart.norm_sym(&chart.deformation(&k), R) / chart.norm1(&k, R),
            rel(&chart, &chart.hodge_laplacian(&k), &k.scaled(-2.0 * a2)),
            rel(&chart, &chart.bochner_laplacian(&k), &k.scaled(-a2)),
            rel(&chart, &chart.rough_laplacian(&k), &k.scaled(-a2)),
        ];
        assert!(errs.iter().all(|&e| e < 5e-3), "a={a}: {errs:?}");
    }
}

#[test]
fn harmonic_differentials_on_the_disk() {
    for a in [1.0, 2.0] {
        let chart = Chart64::new(Spec64::hyperbolic(a), 128).unwrap();
        let df = harmonic_df(&chart, 1);
        let errs = [
            chart.norm1(&chart.hodge_laplacian(&df), R) / chart.norm1(&df, R),
            rel(&chart, &chart.bochner_laplacian(&df), &df.scaled(-a * a)),
        ];
        assert!(errs[0] < 1e-10 && errs[1] < 5e-3, "a={a}: {errs:?}");
    }
}

#[test]
fn disk_killing_form_has_vanishing_deformation() {
    // λ² grows toward the reporting edge, so only the rate is tight.
    let def = |n: usize| {
        let chart = Chart64::new(Spec64::hyperbolic(1.0), n).unwrap();
        let k = killing(&chart);
        chart.norm_sym(&chart.deformation(&k), R) / chart.norm1(&k, R)
    };
    let (coarse, fine) = (def(128), def(256));
    assert!(fine < 1e-2 && coarse / fine > 3.5, "{coarse:e} -> {fine:e}");
}

#[test]
fn sphere_norm_identity_on_stream_fields() {
    for a in [1.0, 2.0] {
        let chart = Chart64::new(Spec64::sphere(a), 128).unwrap();
        let u = stream_field(&chart, &random_stream(&chart, 11));
        let r = verify_sphere_norm_identity(&chart, &u).unwrap();
        assert!(r.l2_rel < 1e-2, "{r:?}");
        let bad = random_one_form(&chart, 11);
        assert!(verify_sphere_norm_identity(&chart, &bad).is_err());
    }
}

#[test]
fn flat_laplacians_coincide_on_divergence_free_fields() {
    let chart = Chart64::new(Spec64::torus(), 64).unwrap();
    let u = stream_field(&chart, &random_stream(&chart, 5));
    let h = chart.hodge_laplacian(&u);
    let b = chart.bochner_laplacian(&u);
    let d = chart.def_adjoint(&chart.deformation(&u)).scaled(-2.0);
    let h2 = chart.h() * chart.h();
    for other in [&b, &d] {
        assert!(h.sub(other).max_abs() <= h2 * h.max_abs());
    }
}
