use mflow_core::checks::convergence_order;
use mflow_core::geometry::{christoffel_at, christoffel_fd, metric_at, Gamma};
use mflow_core::{Chart64, ManifoldKind, Spec64};

fn specs() -> Vec<Spec64> {
    vec![Spec64::torus(), Spec64::sphere(1.0), Spec64::sphere(2.0), Spec64::hyperbolic(1.0), Spec64::hyperbolic(0.5)]
}

/// A fixed set of points away from the chart edges, the same at every `n`.
fn well_inside(spec: &Spec64, x1: f64, x2: f64) -> bool {
    match spec.kind {
        ManifoldKind::Torus => true,
        ManifoldKind::Sphere => (x1 - std::f64::consts::FRAC_PI_2).abs() <= 1.0,
        ManifoldKind::Hyperbolic => x1.hypot(x2) <= 0.8,
    }
}

/// Largest difference between finite-difference and closed-form symbols.
fn christoffel_error(spec: Spec64, n: usize) -> f64 {
    let chart = Chart64::new(spec, n).unwrap();
    let fd = christoffel_fd(&chart.grid, &chart.metric, &chart.diff);
    let mut worst: f64 = 0.0;
    for idx in 0..chart.len() {
        let (x1, x2) = chart.grid.coords(idx);
        if !chart.is_active(idx) || !well_inside(&spec, x1, x2) {
            continue;
        }
        let (a, b) = (&fd.gamma[idx], &chart.christoffel.gamma[idx]);
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    worst = worst.max((a[k][i][j] - b[k][i][j]).abs());
                }
            }
        }
    }
    worst
}

#[test]
fn finite_difference_christoffels_converge_at_second_order() {
    for spec in specs() {
        let ns = [32, 64, 128];
        let errs: Vec<f64> = ns.iter().map(|&n| christoffel_error(spec, n)).collect();
        let hs: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
        let fit = convergence_order(&hs, &errs).unwrap();
        assert!(fit.at_least(1.9), "{:?}: errors {errs:?}, fit {fit:?}", spec.kind);
    }
}

fn gamma_derivative(spec: &Spec64, x: [f64; 2], axis: usize) -> Gamma<f64> {
    let h = 1e-5;
    let mut p = x;
    let mut m = x;
    p[axis] += h;
    m[axis] -= h;
    let (gp, gm) = (christoffel_at(spec, p[0], p[1]), christoffel_at(spec, m[0], m[1]));
    let mut out = [[[0.0; 2]; 2]; 2];
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                out[k][i][j] = (gp[k][i][j] - gm[k][i][j]) / (2.0 * h);
            }
        }
    }
    out
}

/// `R_ij = ∂_k Γ^k_ij − ∂_j Γ^k_ik + Γ^k_kl Γ^l_ij − Γ^k_jl Γ^l_ik`.
fn ricci_oracle(spec: &Spec64, x: [f64; 2]) -> [[f64; 2]; 2] {
    let g = christoffel_at(spec, x[0], x[1]);
    let dg = [gamma_derivative(spec, x, 0), gamma_derivative(spec, x, 1)];
    let mut r = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut v = 0.0;
            for k in 0..2 {
                v += dg[k][k][i][j] - dg[j][k][i][k];
                for l in 0..2 {
                    v += g[k][k][l] * g[l][i][j] - g[k][j][l] * g[l][i][k];
                }
            }
            r[i][j] = v;
        }
    }
    r
}

#[test]
fn ricci_matches_curvature_computed_from_christoffels() {
    for spec in specs() {
        let chart = Chart64::new(spec, 32).unwrap();
        for idx in (0..chart.len()).filter(|&i| chart.in_reporting_region(i)).step_by(37) {
            let (x1, x2) = chart.grid.coords(idx);
            let want = ricci_oracle(&spec, [x1, x2]);
            let got = [[chart.ricci.s11[idx], chart.ricci.s12[idx]], [chart.ricci.s12[idx], chart.ricci.s22[idx]]];
            let scale = metric_at(&spec, x1, x2).xx.abs().max(1.0);
            for i in 0..2 {
                for j in 0..2 {
                    assert!(
                        (want[i][j] - got[i][j]).abs() < 1e-5 * scale,
                        "{:?} at ({x1}, {x2}): {want:?} vs {got:?}",
                        spec.kind
                    );
                }
            }
        }
    }
}

#[test]
fn sphere_band_area_is_zonal_integral() {
    // ‖1‖² = 4π cos(phi_min) / a² on the band of the sphere of radius 1/a
    for (a, phi_min) in [(1.0, 0.3), (2.0, 0.3), (1.0, 0.1)] {
        let chart = Chart64::new(Spec64::sphere(a).with_phi_min(phi_min), 256).unwrap();
        let one = chart.sample_scalar(|_, _| 1.0);
        let area = chart.inner0(&one, &one, mflow_core::Region::Chart);
        let exact = 4.0 * std::f64::consts::PI * phi_min.cos() / (a * a);
        assert!((area / exact - 1.0).abs() < 1e-4, "a={a}: {area} vs {exact}");
    }
}
