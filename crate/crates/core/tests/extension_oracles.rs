//! Oracle checks for the degenerate-elliptic extension solver: mode profiles
//! against an independent Bessel evaluation, the ladder invariant linking the
//! direct and iterated extractions, a maximum principle for the synthesized
//! solution, and the Poisson-kernel quadrature cross-check.

mod common;

use std::f64::consts::PI;

use confrac::extension::{
    apply_p_gamma, check_downshift, dtn_extract, dtn_iterated_extract, poisson_kernel_compare,
    solve_extension, solve_mode, GradedMesh,
};
use confrac::make_params;
use confrac::spectral::GridFunction;

#[test]
fn oracle_reduces_to_exponential_at_half() {
    // K_{1/2}(z) = sqrt(pi / 2z) e^{-z} collapses the profile to e^{-y}
    for y in [0.1, 0.5, 1.0, 3.0, 8.0] {
        let u = common::mode_oracle(0.5, 1.0, y);
        assert!((u - (-y).exp()).abs() < 1e-10, "y = {y}");
    }
}

#[test]
fn oracle_satisfies_mode_equation() {
    // central-difference residual of U'' + (a/y) U' - k^2 U
    for (gamma, kmag) in [(0.3, 1.0), (0.7, 2.0)] {
        let a = 1.0 - 2.0 * gamma;
        let e = 1e-3;
        for y in [0.5, 1.0, 2.0] {
            let um = common::mode_oracle(gamma, kmag, y - e);
            let u0 = common::mode_oracle(gamma, kmag, y);
            let up = common::mode_oracle(gamma, kmag, y + e);
            let d2 = (up - 2.0 * u0 + um) / (e * e);
            let d1 = (up - um) / (2.0 * e);
            let res = d2 + a / y * d1 - kmag * kmag * u0;
            assert!(res.abs() < 1e-4, "gamma={gamma} y={y}: {res}");
        }
    }
}

#[test]
fn solver_matches_bessel_oracle() {
    for (gamma, kmag) in [(0.3, 1.0), (0.7, 2.0)] {
        let p = make_params(2, gamma).unwrap();
        let mesh = GradedMesh::with_default_grading(12.0 / kmag, 8192, p.gamma0).unwrap();
        let prof = solve_mode(kmag, &p, &mesh).unwrap();
        let mut worst = 0.0f64;
        for (j, &y) in mesh.nodes().iter().enumerate() {
            if !(0.05 / kmag..=6.0 / kmag).contains(&y) {
                continue;
            }
            let oracle = common::mode_oracle(gamma, kmag, y);
            worst = worst.max((prof.values[j] - oracle).abs() / oracle.abs());
        }
        assert!(worst < 1e-5, "gamma={gamma} kmag={kmag}: worst rel {worst}");
    }
}

#[test]
fn ladder_invariant_links_extractions() {
    // with k = 1 the fitted coefficients at gamma and at its fractional part
    // are tied by the ladder constants: the iterated estimate is the
    // coefficient of the m-times-reduced profile, A_m h_m, so c_m times it
    // must reproduce the direct estimate h_0 at the fractional order
    let p = make_params(3, 1.25).unwrap();
    let p0 = make_params(3, 0.25).unwrap();
    let mesh = GradedMesh::with_default_grading(8.0, 4096, p.gamma0).unwrap();
    let h_m = dtn_iterated_extract(&solve_mode(1.0, &p, &mesh).unwrap())
        .unwrap()
        .h_estimate;
    let h_0 = dtn_extract(&solve_mode(1.0, &p0, &mesh).unwrap())
        .unwrap()
        .h_estimate;
    let rel = (p.c_m * h_m - h_0).abs() / h_0.abs();
    assert!(rel < 1e-3, "rel = {rel}");
}

#[test]
fn downshift_between_adjacent_rungs() {
    let pm = make_params(3, 1.25).unwrap();
    let pm1 = make_params(3, 0.25).unwrap();
    let mesh = GradedMesh::new(16.0, 4096, 4.0).unwrap();
    let a = solve_mode(1.0, &pm, &mesh).unwrap();
    let b = solve_mode(1.0, &pm1, &mesh).unwrap();
    let rep = check_downshift(&a, &b, None).unwrap();
    assert!(rep.nodes_checked > 1000);
    assert!(rep.first_order_residual < 1e-3, "{rep:?}");
    assert!(rep.second_order_residual < 1e-3, "{rep:?}");
}

#[test]
fn synthesis_obeys_maximum_principle() {
    let p = make_params(2, 0.4).unwrap();
    let f = GridFunction::sample_1d(64, 2.0 * PI, |x| {
        let t = (x - PI) / 0.4;
        (-0.5 * t * t).exp()
    })
    .unwrap();
    let mesh = GradedMesh::with_default_grading(8.0, 1024, p.gamma0).unwrap();
    let sol = solve_extension(&f, &p, &mesh).unwrap();
    for y0 in [0.05, 0.3, 1.0] {
        let u = sol.boundary_value_at(y0);
        assert!(u.max_abs() <= f.max_abs() + 1e-10, "y0 = {y0}");
    }
    // continuity down to the boundary
    let near = sol.boundary_value_at(1e-9);
    assert!(near.rel_l2_error(&f).unwrap() < 1e-6);
}

#[test]
fn operator_application_is_linear() {
    let p = make_params(2, 0.4).unwrap();
    let mesh = GradedMesh::with_default_grading(8.0, 1024, p.gamma0).unwrap();
    let f = GridFunction::sample_1d(32, 2.0 * PI, |x| x.cos()).unwrap();
    let g = GridFunction::sample_1d(32, 2.0 * PI, |x| (2.0 * x).sin()).unwrap();
    let combo = GridFunction::new(
        vec![32],
        vec![2.0 * PI],
        f.values()
            .iter()
            .zip(g.values())
            .map(|(a, b)| a + 2.0 * b)
            .collect(),
    )
    .unwrap();
    let pf = apply_p_gamma(&f, &p, &mesh).unwrap();
    let pg = apply_p_gamma(&g, &p, &mesh).unwrap();
    let pc = apply_p_gamma(&combo, &p, &mesh).unwrap();
    let want = GridFunction::new(
        vec![32],
        vec![2.0 * PI],
        pf.values()
            .iter()
            .zip(pg.values())
            .map(|(a, b)| a + 2.0 * b)
            .collect(),
    )
    .unwrap();
    assert!(pc.rel_l2_error(&want).unwrap() < 1e-10);
}

#[test]
fn poisson_kernel_agrees_with_synthesis() {
    let p = make_params(2, 0.5).unwrap();
    let f = GridFunction::sample_1d(64, 2.0 * PI, |x| {
        let t = (x - PI) / 0.3;
        (-0.5 * t * t).exp()
    })
    .unwrap();
    let mesh = GradedMesh::with_default_grading(8.0, 2048, p.gamma0).unwrap();
    let rep = poisson_kernel_compare(&f, &p, &mesh, 0.1, 32).unwrap();
    assert!(rep.synthesis_norm > 0.0);
    assert!(rep.rel_discrepancy < 1e-2, "{rep:?}");
}
