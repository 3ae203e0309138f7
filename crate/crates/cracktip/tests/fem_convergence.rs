//! Convergence and naturalness checks for the slit-disk solver against the
//! closed-form references.

use cracktip::exact::ExactSolution;
use cracktip::fem::{
    assemble, boundary_map, energy_product, l2_error, l2_norm, solve_dirichlet, Field, Potential,
};
use cracktip::frequency::compute_trace;
use cracktip::geometry::{CrackGeometry, CrackProfile};
use cracktip::slitmesh::make_slit_disk;

fn flat_geom() -> CrackGeometry {
    CrackGeometry::build(CrackProfile::half_line(), 10.0).unwrap()
}

fn solve_reference(
    sol: &ExactSolution,
    levels: u32,
    base: usize,
) -> (cracktip::slitmesh::SlitMesh, Field, f64) {
    let geom = flat_geom();
    let mesh = make_slit_disk(1.0, levels, 0.5, base).unwrap();
    let f = sol.potential();
    let (k, m) = assemble(&mesh, &geom, &f, &Default::default()).unwrap();
    let bc = boundary_map(&mesh, |p, s| sol.value(p, s));
    let (u, _) = solve_dirichlet(&mesh, &k, &m, &bc).unwrap();
    let rel = l2_error(&mesh, &u, |p, s| sol.value(p, s)) / l2_norm(&mesh, |p, s| sol.value(p, s));
    (mesh, u, rel)
}

#[test]
fn crack_harmonic_accuracy_at_reference_mesh() {
    let sol = ExactSolution::CrackHarmonic { k: 1, amplitude: 1.0 };
    let (_, _, rel) = solve_reference(&sol, 8, 64);
    println!("r^(1/2)cos(θ/2) relative L2 error: {rel:.3e}");
    assert!(rel <= 0.01, "relative error {rel} above 1%");
}

#[test]
fn bessel_accuracy_at_reference_mesh() {
    let sol = ExactSolution::BesselMode { k: 1, lambda: 1.0, amplitude: 1.0 };
    let (_, _, rel) = solve_reference(&sol, 8, 64);
    println!("J_(1/2)(r)cos(θ/2) relative L2 error: {rel:.3e}");
    assert!(rel <= 0.015, "relative error {rel} above 1.5%");
}

#[test]
fn graded_refinement_rate() {
    // refine angular resolution and grading depth together
    let sol = ExactSolution::CrackHarmonic { k: 1, amplitude: 1.0 };
    let mut errors = Vec::new();
    for (base, levels) in [(16usize, 6u32), (32, 7), (64, 8)] {
        let (_, _, rel) = solve_reference(&sol, levels, base);
        errors.push(rel);
    }
    let r1 = (errors[0] / errors[1]).log2();
    let r2 = (errors[1] / errors[2]).log2();
    println!("solution errors {errors:?}, rates {r1:.2}, {r2:.2}");
    assert!(r1 >= 0.9 && r2 >= 0.9, "rates {r1:.2}, {r2:.2} below 0.9");
}

#[test]
fn interpolant_error_rate_for_singular_solution() {
    // nodal interpolation of r^{1/2}cos(θ/2) on the graded mesh
    let sol = ExactSolution::CrackHarmonic { k: 1, amplitude: 1.0 };
    let mut errors = Vec::new();
    for (base, levels) in [(16usize, 6u32), (32, 7), (64, 8)] {
        let mesh = make_slit_disk(1.0, levels, 0.5, base).unwrap();
        let interp = Field::interpolate(&mesh, |p, s| sol.value(p, s)).unwrap();
        let rel =
            l2_error(&mesh, &interp, |p, s| sol.value(p, s)) / l2_norm(&mesh, |p, s| sol.value(p, s));
        errors.push(rel);
    }
    let rate = (errors[0] / errors[2]).log2() / 2.0;
    println!("interpolant errors {errors:?}, mean rate {rate:.2}");
    assert!(rate >= 0.9, "interpolation rate {rate} below 0.9");
}

#[test]
fn crack_jump_is_genuine() {
    // the discrete solution must stay discontinuous across the slit: upper
    // traces near +r^{1/2}, lower near -r^{1/2}, gap far above the solver
    // tolerance
    let sol = ExactSolution::CrackHarmonic { k: 1, amplitude: 1.0 };
    let (mesh, u, _) = solve_reference(&sol, 6, 32);
    let mut checked = 0;
    for &(up, lo) in &mesh.crack_pairs {
        let p = mesh.coords2(up);
        if mesh.outer_boundary.contains(&up) {
            continue; // fixed by Dirichlet data
        }
        let vu = u.values[up as usize];
        let vl = u.values[lo as usize];
        let want = p[0].sqrt();
        assert!(
            (vu - vl).abs() > 10.0 * 1e-10,
            "trace gap {} at r = {} too small",
            (vu - vl).abs(),
            p[0]
        );
        assert!(vu > 0.0 && vl < 0.0, "sign structure at r = {}", p[0]);
        if p[0] >= 0.05 {
            // value accuracy away from the tip (the nodal error is largest
            // right at the singularity)
            assert!((vu - want).abs() < 0.05 * want, "upper trace {vu} vs {want}");
            assert!((vl + want).abs() < 0.05 * want, "lower trace {vl} vs {want}");
        }
        checked += 1;
    }
    assert!(checked > 5, "too few interior crack pairs checked");
}

#[test]
fn energy_identity_cross_check() {
    // uᵀ(K - M_f)u over the whole mesh equals the frequency module's
    // E(r) as r → R: two independent integration routes over the same
    // discrete field (assembly quadrature vs clipped triangle quadrature)
    let geom = flat_geom();
    let mesh = make_slit_disk(1.0, 6, 0.5, 32).unwrap();
    let sol = ExactSolution::CrackHarmonic { k: 1, amplitude: 1.0 };
    let f = Potential::zero();
    let (k, m) = assemble(&mesh, &geom, &f, &Default::default()).unwrap();
    let interp = Field::interpolate(&mesh, |p, s| sol.value(p, s)).unwrap();
    let energy = energy_product(&k, &m, &interp);
    // r must stay below the inradius of the inscribed boundary polygon
    let r = 0.98;
    let trace = compute_trace(&mesh, &interp, &geom, &f, &[r], &Default::default()).unwrap();
    let e = trace.e_vals[0];
    // for the k = 1 harmonic the energy is linear in the radius, so the two
    // routes relate by E(r) ≈ r · uᵀSu
    let rel = (e / energy - r).abs();
    println!("assembled energy {energy:.6}, clipped E({r}) = {e:.6}, ratio defect {rel:.2e}");
    assert!(rel < 5e-3, "energy routes disagree by {rel:.3e}");
    // and both sit near the closed form π/2
    assert!((energy - std::f64::consts::PI / 2.0).abs() < 0.01);
}

#[test]
fn galerkin_residual_at_free_vertices() {
    let sol = ExactSolution::BesselMode { k: 1, lambda: 1.0, amplitude: 1.0 };
    let geom = flat_geom();
    let mesh = make_slit_disk(1.0, 5, 0.5, 32).unwrap();
    let f = sol.potential();
    let (k, m) = assemble(&mesh, &geom, &f, &Default::default()).unwrap();
    let bc = boundary_map(&mesh, |p, s| sol.value(p, s));
    let (_, stats) = solve_dirichlet(&mesh, &k, &m, &bc).unwrap();
    println!("residual {:.2e} on {} free dofs", stats.residual, stats.free_dofs);
    // solve_dirichlet enforces this; recorded here as the module invariant
    assert!(stats.residual <= 1e-10 * 1.0);
}

#[test]
fn radial_power_scenario_solves() {
    // |x|^{-1/2} potential (ε = 0.75) with tip-aware quadrature
    let geom = flat_geom();
    let mesh = make_slit_disk(1.0, 6, 0.5, 32).unwrap();
    let f = Potential::radial_power(0.5, 0.75).unwrap();
    let opts = cracktip::fem::AssembleOptions { tip_aware_quadrature: true };
    let (k, m) = assemble(&mesh, &geom, &f, &opts).unwrap();
    let harmonic = ExactSolution::CrackHarmonic { k: 1, amplitude: 1.0 };
    let bc = boundary_map(&mesh, |p, s| harmonic.value(p, s));
    let (u, _) = solve_dirichlet(&mesh, &k, &m, &bc).unwrap();
    // no exact reference; the solve must stay bounded and nontrivial
    let max = u.values.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    assert!(max.is_finite() && max > 0.5 && max < 10.0, "max |u| = {max}");
}
