//! Slit-sphere eigensolver checks beyond the acceptance criterion: trace
//! norms on the cut, refinement stability, and the Rayleigh-quotient
//! consistency of the returned pairs.

use cracktip::slitmesh::make_slit_sphere;
use cracktip::spectrum::{
    cluster_report, eigensolve_slit_sphere, mu_exact, trace_nonvanishing_check, EigenFn,
};
use cracktip::sparse::dot;

#[test]
fn eigenfunction_traces_do_not_vanish() {
    let mesh = make_slit_sphere(32).unwrap();
    let basis = eigensolve_slit_sphere(&mesh, 4).unwrap();
    // analytic k = 1 mode: Ψ = ρ^{1/2} cos(t/2) normalized in L²(S²) has
    // side-trace norm 2/π on each side of the cut
    let want = 2.0 / std::f64::consts::PI;
    for e in &basis.entries {
        let EigenFn::Mesh(field) = &e.eigenfunction else { panic!("mesh eigenfunction expected") };
        let tn = trace_nonvanishing_check(&mesh, field).unwrap();
        assert!(tn > 0.1, "k = {}: trace norm {tn}", e.k);
        if e.k == 1 {
            assert!(
                (tn - want).abs() / want < 0.1,
                "k = 1 trace norm {tn} vs analytic {want}"
            );
        }
    }
}

#[test]
fn trace_norm_stable_under_refinement() {
    let mut norms = Vec::new();
    for res in [16usize, 32] {
        let mesh = make_slit_sphere(res).unwrap();
        let basis = eigensolve_slit_sphere(&mesh, 2).unwrap();
        let EigenFn::Mesh(field) = &basis.entries[1].eigenfunction else { unreachable!() };
        norms.push(trace_nonvanishing_check(&mesh, field).unwrap());
    }
    let rel = (norms[0] - norms[1]).abs() / norms[1];
    println!("trace norms {norms:?}, refinement drift {:.2}%", rel * 100.0);
    assert!(rel < 0.1, "trace norm unstable under refinement: {norms:?}");
}

#[test]
fn rayleigh_quotient_consistency() {
    let mesh = make_slit_sphere(16).unwrap();
    let (k_mat, m_mat) = cracktip::spectrum::assemble_surface(&mesh);
    let basis = eigensolve_slit_sphere(&mesh, 6).unwrap();
    for e in &basis.entries {
        let EigenFn::Mesh(field) = &e.eigenfunction else { unreachable!() };
        let kx = k_mat.apply(&field.values);
        let mx = m_mat.apply(&field.values);
        let rq = dot(&kx, &field.values) / dot(&mx, &field.values);
        assert!(
            (rq - e.mu).abs() <= 1e-10 * (1.0 + e.mu.abs()),
            "Rayleigh defect {} for μ = {}",
            (rq - e.mu).abs(),
            e.mu
        );
    }
}

#[test]
fn mass_orthonormality_of_eigenvectors() {
    let mesh = make_slit_sphere(16).unwrap();
    let (_, m_mat) = cracktip::spectrum::assemble_surface(&mesh);
    let basis = eigensolve_slit_sphere(&mesh, 5).unwrap();
    for (i, a) in basis.entries.iter().enumerate() {
        for (j, b) in basis.entries.iter().enumerate() {
            let EigenFn::Mesh(fa) = &a.eigenfunction else { unreachable!() };
            let EigenFn::Mesh(fb) = &b.eigenfunction else { unreachable!() };
            let ip = dot(&m_mat.apply(&fa.values), &fb.values);
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((ip - want).abs() < 1e-3, "⟨Y_{i}, Y_{j}⟩ = {ip}");
        }
    }
}

/// Slow: the tighter 1.5% cluster tolerance at resolution 128 (several
/// minutes single-threaded). Run explicitly with `--ignored`.
#[test]
#[ignore]
fn cluster_means_at_resolution_128() {
    let mesh = make_slit_sphere(128).unwrap();
    let basis = eigensolve_slit_sphere(&mesh, 12).unwrap();
    let eigs: Vec<f64> = basis.entries.iter().map(|e| e.mu).collect();
    let rows = cluster_report(&eigs, 3);
    for k in 1..=4u32 {
        let row = rows.iter().find(|r| r.k == k).unwrap();
        let dev = (row.mean - mu_exact(k, 3)).abs() / mu_exact(k, 3);
        println!("k = {k}: mean {:.6} vs {:.4} ({:.3}%)", row.mean, row.formula, dev * 100.0);
        assert!(dev <= 0.015, "cluster k = {k} deviates {:.3}%", dev * 100.0);
    }
}
