//! Frequency traces of finite-element solutions against the closed-form
//! quadrature oracle.

use cracktip::exact::ExactSolution;
use cracktip::fem::{assemble, boundary_map, solve_dirichlet};
use cracktip::frequency::compute_trace;
use cracktip::geometry::{CrackGeometry, CrackProfile};
use cracktip::slitmesh::make_slit_disk;

#[test]
fn fem_bessel_trace_matches_oracle() {
    // N(r) of the discrete solution tracks the closed form r·cot(r) - 1/2,
    // decreasing in r (equivalently: increasing toward 1/2 as r → 0)
    let geom = CrackGeometry::build(CrackProfile::half_line(), 10.0).unwrap();
    let mesh = make_slit_disk(1.0, 8, 0.5, 64).unwrap();
    let sol = ExactSolution::BesselMode { k: 1, lambda: 1.0, amplitude: 1.0 };
    let f = sol.potential();
    let (k, m) = assemble(&mesh, &geom, &f, &Default::default()).unwrap();
    let bc = boundary_map(&mesh, |p, s| sol.value(p, s));
    let (u, _) = solve_dirichlet(&mesh, &k, &m, &bc).unwrap();

    let radii: Vec<f64> = (0..9).map(|j| 0.75 * 2.0f64.powf(-(j as f64) / 2.0)).rev().collect();
    let trace = compute_trace(&mesh, &u, &geom, &f, &radii, &Default::default()).unwrap();
    for (i, &r) in radii.iter().enumerate() {
        let (h_oracle, _, n_oracle) = sol.closed_form_hen(r).unwrap();
        let n_err = (trace.n_vals[i] - n_oracle).abs() / n_oracle.abs();
        let h_err = (trace.h_vals[i] - h_oracle).abs() / h_oracle;
        assert!(n_err < 0.02, "N({r}) = {} vs oracle {n_oracle} ({n_err:.3})", trace.n_vals[i]);
        assert!(h_err < 0.02, "H({r}) off by {h_err:.3}");
    }
    // decreasing in r across the resolved range
    for w in trace.n_vals.windows(2) {
        assert!(w[1] < w[0] + 1e-6, "N must decrease in r: {:?}", trace.n_vals);
    }
}
