use mflow_core::library::killing;
use mflow_core::restriction::{
    restriction_sweep, star_d_star_d, surface_divergence_defect, tangential_bochner_candidate,
    tangential_hodge_candidate, CHAIN_TEST_FIELD,
};
use mflow_core::{CartesianField, Chart64, Error, Polynomial, Region, Spec64, SphericalField64};

const R: Region = Region::Reporting;

fn unit(n: usize) -> Chart64 {
    Chart64::new(Spec64::sphere(1.0), n).unwrap()
}

#[test]
fn killing_form_under_both_candidates() {
    let chart = unit(128);
    let k = killing(&chart);
    let kf = SphericalField64::from_tangential(&chart, &k, chart.h()).unwrap();
    let h = tangential_hodge_candidate(&chart, &kf);
    let b = tangential_bochner_candidate(&chart, &k);
    let nk = chart.norm1(&k, R);
    assert!(chart.norm1(&h.sub(&k.scaled(-2.0)), R) / nk < 5e-3);
    assert!(chart.norm1(&b.sub(&k.scaled(-1.0)), R) / nk < 5e-3);
}

#[test]
fn polynomial_laplacians() {
    let p = CartesianField::parse(["x^2", "0", "0"]).unwrap();
    let want = CartesianField::parse(["2", "0", "0"]).unwrap();
    assert_eq!(p.laplacian(), want);

    let rot = CartesianField::parse(["-y*z", "x*z", "0"]).unwrap();
    assert!(rot.is_divergence_free());
    assert_eq!(rot.laplacian(), CartesianField::zero());

    // Δ((x + y)²z) = 2z + 2z
    let q = Polynomial::parse("(x + y)^2 * z - 3/2").unwrap();
    assert_eq!(q.laplacian(), Polynomial::parse("4*z").unwrap());
}

#[test]
fn transcendental_input_is_rejected() {
    for src in ["sin(x)", "exp(z)", "x^y", "2^-1"] {
        assert!(matches!(Polynomial::parse(src), Err(Error::UnsupportedInput(_))), "{src}");
    }
    assert!(CartesianField::parse(["x", "sin(y)", "0"]).is_err());
}

#[test]
fn surface_divergence_of_the_witness() {
    // (z,0,0) has div_{S²}(v^T) = −3xz; |3 sinφ cosφ cosθ| peaks at 3/2.
    let chart = unit(128);
    let witness = CartesianField::parse(["z", "0", "0"]).unwrap();
    assert!(witness.is_divergence_free());
    let div = surface_divergence_defect(&chart, &witness).unwrap();
    assert!((div.sup - 1.5).abs() < 5e-3, "{div:?}");
    assert_eq!(div.r3_divergence, "0");

    let field = SphericalField64::from_cartesian(&chart, &witness, 0.01).unwrap();
    let got = chart.codifferential_1(&field.tangential());
    let mut worst = 0.0f64;
    for k in (0..chart.len()).filter(|&k| chart.in_reporting_region(k)) {
        let (phi, theta) = chart.grid.coords(k);
        let oracle = 3.0 * phi.sin() * theta.cos() * phi.cos();
        worst = worst.max((got.values[k] - oracle).abs());
    }
    assert!(worst < 1e-2, "{worst:e}");

    let rotation = CartesianField::parse(["-y", "x", "0"]).unwrap();
    assert!(surface_divergence_defect(&chart, &rotation).unwrap().sup < 1e-10);
}

#[test]
fn star_d_star_d_chain_matches_the_cartesian_laplacian() {
    let field = CartesianField::parse(CHAIN_TEST_FIELD).unwrap();
    assert!(field.is_divergence_free());
    let err = |n: usize| {
        let chart = unit(n);
        let h = chart.h();
        let v = SphericalField64::from_cartesian(&chart, &field, h).unwrap();
        let exact = SphericalField64::from_cartesian(&chart, &field.laplacian(), h).unwrap();
        let got = star_d_star_d(&chart, &v);
        let e = exact.unit_shell();
        let (mut num, mut den) = (0.0, 0.0);
        for k in (0..chart.len()).filter(|&k| chart.in_reporting_region(k)) {
            for (g, w) in [(got.r[k], e.r[k]), (got.phi[k], e.phi[k]), (got.theta[k], e.theta[k])] {
                num += (g + w).powi(2);
                den += w * w;
            }
        }
        (num / den).sqrt()
    };
    let (coarse, fine) = (err(64), err(128));
    assert!(fine < 5e-3 && coarse / fine > 3.5, "{coarse:e} -> {fine:e}");
}

#[test]
fn sweep_converges_and_candidates_disagree() {
    let sweep = restriction_sweep(Spec64::sphere(1.0), &[64, 128, 256], 42).unwrap();
    assert!(sweep.hodge_order.at_least(1.9), "{:?}", sweep.hodge_order);
    assert!(sweep.bw_order.at_least(1.9), "{:?}", sweep.bw_order);
    let f = sweep.finest();
    assert!((f.candidate_disagreement_l2 - 1.0).abs() < 1e-2, "{f:?}");
    assert!((f.killing_hodge_eigenvalue + 2.0).abs() < 1e-2, "{f:?}");
    assert!((f.killing_bochner_eigenvalue + 1.0).abs() < 1e-2, "{f:?}");
    assert!(f.div_defect_sup >= 0.1);
}

#[test]
fn non_unit_sphere_is_rejected() {
    assert!(restriction_sweep(Spec64::sphere(2.0), &[32, 64, 128], 1).is_err());
    assert!(restriction_sweep(Spec64::hyperbolic(1.0), &[32, 64, 128], 1).is_err());
}
