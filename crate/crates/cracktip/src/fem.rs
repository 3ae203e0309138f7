//! P1 finite elements for `-div(A∇U) = f̃ U` on a slit disk: natural Neumann
//! conditions on both crack sides, Dirichlet data on the outer circle.
//!
//! Sign convention: the assembled system is `(stiffness - mass_f)·U = rhs`.
//! Crack edges contribute no boundary terms — the duplicated-vertex topology
//! makes the Neumann condition natural.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::geometry::CrackGeometry;
use crate::quad::{TRI3, TRI7};
use crate::slitmesh::SlitMesh;
use crate::sparse::{self, CgStats, SparseSym, TripletBuilder};
use crate::{Error, Result, Side};

/// Which hypothesis of the underlying theory the potential is filed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HypothesisClass {
    /// `f ∈ W^{1, N/2+ε}`.
    H1,
    /// `|f(x)| ≤ c |x|^{-2+2ε}`.
    H2,
}

#[derive(Debug, Clone)]
pub enum PotentialKind {
    Constant(f64),
    /// `f(x) = c |x|^{-2+2ε}`.
    RadialPower { c: f64, epsilon: f64 },
    /// Per-vertex nodal values, interpolated P1.
    Sampled(Vec<f64>),
}

/// A potential together with its hypothesis class and the ε entering the
/// remainder exponent `δ = 4ε/(N+2ε)`.
#[derive(Debug, Clone)]
pub struct Potential {
    pub kind: PotentialKind,
    pub hypothesis: HypothesisClass,
    pub epsilon: f64,
}

impl Potential {
    pub fn zero() -> Self {
        Potential { kind: PotentialKind::Constant(0.0), hypothesis: HypothesisClass::H1, epsilon: 1.0 }
    }

    pub fn constant(c: f64, hypothesis: HypothesisClass, epsilon: f64) -> Self {
        Potential { kind: PotentialKind::Constant(c), hypothesis, epsilon }
    }

    /// `f = c|x|^{-2+2ε}`; the exponent must stay above -2 for integrability.
    pub fn radial_power(c: f64, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "radial power ε = {epsilon} outside (0, 1]: exponent -2+2ε must exceed -2"
            )));
        }
        Ok(Potential { kind: PotentialKind::RadialPower { c, epsilon }, hypothesis: HypothesisClass::H2, epsilon })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, PotentialKind::Constant(c) if c == 0.0)
    }

    /// Exponent of the radial factor, if any.
    pub fn power_exponent(&self) -> Option<f64> {
        match self.kind {
            PotentialKind::RadialPower { epsilon, .. } => Some(-2.0 + 2.0 * epsilon),
            _ => None,
        }
    }

    /// Pointwise value for the analytic kinds. `None` for sampled potentials
    /// (those are evaluated against a mesh).
    pub fn eval(&self, p: [f64; 2]) -> Option<f64> {
        match self.kind {
            PotentialKind::Constant(c) => Some(c),
            PotentialKind::RadialPower { c, epsilon } => {
                let r2 = p[0] * p[0] + p[1] * p[1];
                Some(c * r2.powf((-2.0 + 2.0 * epsilon) / 2.0))
            }
            PotentialKind::Sampled(_) => None,
        }
    }
}

/// Degree-of-freedom vector over a SlitMesh; crack sides are independent
/// because their vertices carry distinct ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(mesh: &SlitMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.vertex_count() {
            return Err(Error::InvalidArgument(format!(
                "field length {} vs vertex count {}",
                values.len(),
                mesh.vertex_count()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("field contains non-finite entries".into()));
        }
        Ok(Field { values })
    }

    pub fn zeros(mesh: &SlitMesh) -> Self {
        Field { values: vec![0.0; mesh.vertex_count()] }
    }

    /// Nodal interpolant of a side-aware function. Off-slit vertices get the
    /// Upper tag, which is inert away from the branch cut.
    pub fn interpolate(mesh: &SlitMesh, f: impl Fn([f64; 2], Side) -> f64) -> Result<Self> {
        let mut values = vec![0.0; mesh.vertex_count()];
        let lower: std::collections::HashSet<u32> = mesh.lower_slit_ids().into_iter().collect();
        for (i, v) in mesh.vertices.iter().enumerate() {
            let side = if lower.contains(&(i as u32)) { Side::Lower } else { Side::Upper };
            values[i] = f([v[0], v[1]], side);
        }
        Field::new(mesh, values)
    }

    pub fn scale(&mut self, a: f64) {
        self.values.iter_mut().for_each(|v| *v *= a);
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AssembleOptions {
    /// Enables 7-point + one-subdivision quadrature on tip-adjacent
    /// triangles. Mandatory for radial powers with exponent ≤ -1.5.
    pub tip_aware_quadrature: bool,
}

/// P1 gradients of the barycentric functions on a triangle.
fn p1_gradients(coords: [[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let [a, b, c] = coords;
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let area = 0.5 * det;
    let g = [
        [(b[1] - c[1]) / det, (c[0] - b[0]) / det],
        [(c[1] - a[1]) / det, (a[0] - c[0]) / det],
        [(a[1] - b[1]) / det, (b[0] - a[0]) / det],
    ];
    (g, area)
}

fn local_stiffness(coords: [[f64; 2]; 3], a_at: &dyn Fn([f64; 2]) -> [f64; 4]) -> [[f64; 3]; 3] {
    let (g, area) = p1_gradients(coords);
    let mut k = [[0.0; 3]; 3];
    for &(bary, w) in TRI3.iter() {
        let x = [
            bary[0] * coords[0][0] + bary[1] * coords[1][0] + bary[2] * coords[2][0],
            bary[0] * coords[0][1] + bary[1] * coords[1][1] + bary[2] * coords[2][1],
        ];
        let a = a_at(x);
        for i in 0..3 {
            let agi = [a[0] * g[i][0] + a[1] * g[i][1], a[2] * g[i][0] + a[3] * g[i][1]];
            for j in 0..3 {
                k[i][j] += w * area * (agi[0] * g[j][0] + agi[1] * g[j][1]);
            }
        }
    }
    k
}

/// Local mass with weight `f̃`; optionally with the refined tip rule.
fn local_mass(
    coords: [[f64; 2]; 3],
    f_at: &dyn Fn([f64; 2], [f64; 3]) -> f64,
    refined: bool,
) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    if !refined {
        let (_, area) = p1_gradients(coords);
        for &(bary, w) in TRI3.iter() {
            let x = [
                bary[0] * coords[0][0] + bary[1] * coords[1][0] + bary[2] * coords[2][0],
                bary[0] * coords[0][1] + bary[1] * coords[1][1] + bary[2] * coords[2][1],
            ];
            let fv = f_at(x, bary);
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += w * area * fv * bary[i] * bary[j];
                }
            }
        }
        return m;
    }
    // one level of midpoint subdivision, 7-point rule per sub-triangle
    let mid = |p: [f64; 2], q: [f64; 2]| [[(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0]][0];
    let [p0, p1, p2] = coords;
    let m01 = mid(p0, p1);
    let m12 = mid(p1, p2);
    let m20 = mid(p2, p0);
    // sub-triangle corners with their barycentric coordinates in the parent
    let subs: [([[f64; 2]; 3], [[f64; 3]; 3]); 4] = [
        ([p0, m01, m20], [[1.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.5, 0.0, 0.5]]),
        ([m01, p1, m12], [[0.5, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.5, 0.5]]),
        ([m20, m12, p2], [[0.5, 0.0, 0.5], [0.0, 0.5, 0.5], [0.0, 0.0, 1.0]]),
        ([m01, m12, m20], [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]),
    ];
    for (sub, parent_bary) in subs.iter() {
        let (_, area) = p1_gradients(*sub);
        for &(sb, w) in TRI7.iter() {
            let x = [
                sb[0] * sub[0][0] + sb[1] * sub[1][0] + sb[2] * sub[2][0],
                sb[0] * sub[0][1] + sb[1] * sub[1][1] + sb[2] * sub[2][1],
            ];
            // barycentric coordinates with respect to the parent triangle
            let mut bary = [0.0; 3];
            for i in 0..3 {
                bary[i] = sb[0] * parent_bary[0][i] + sb[1] * parent_bary[1][i] + sb[2] * parent_bary[2][i];
            }
            let fv = f_at(x, bary);
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += w * area * fv * bary[i] * bary[j];
                }
            }
        }
    }
    m
}

/// Assemble stiffness `∫ A∇φ_i·∇φ_j` and weighted mass `∫ f̃ φ_i φ_j`.
///
/// Per-triangle local matrices are computed in parallel and merged in
/// triangle order, so the result is independent of the thread count.
pub fn assemble(
    mesh: &SlitMesh,
    geom: &CrackGeometry,
    f: &Potential,
    opts: &AssembleOptions,
) -> Result<(SparseSym, SparseSym)> {
    if mesh.dim != 2 {
        return Err(Error::InvalidArgument("volume assembly expects a slit disk mesh".into()));
    }
    if geom.dimension() != 2 {
        return Err(Error::InvalidArgument(
            "the straightened volume problem is two-dimensional; use an N = 2 geometry".into(),
        ));
    }
    if let Some(expo) = f.power_exponent() {
        if expo <= -1.5 && !opts.tip_aware_quadrature {
            return Err(Error::InvalidArgument(format!(
                "radial potential with exponent {expo} needs the tip-aware quadrature flag"
            )));
        }
    }
    if let PotentialKind::Sampled(vals) = &f.kind {
        if vals.len() != mesh.vertex_count() {
            return Err(Error::InvalidArgument("sampled potential length mismatch".into()));
        }
    }

    let tip_set: std::collections::HashSet<u32> = mesh.tip_vertices.iter().copied().collect();
    let refine_tip = matches!(f.kind, PotentialKind::RadialPower { .. });

    let locals: Vec<([u32; 3], [[f64; 3]; 3], [[f64; 3]; 3])> = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|t| {
            let tri = mesh.triangles[t];
            let coords = mesh.tri_coords2(t);
            let a_at = |x: [f64; 2]| -> [f64; 4] {
                let a = geom.matrix_a(&x);
                [a[0], a[1], a[2], a[3]]
            };
            let k = local_stiffness(coords, &a_at);
            let f_at = |x: [f64; 2], bary: [f64; 3]| -> f64 {
                // f̃ = |det J_F| (f∘F) with det ≡ 1 for the shear map
                match &f.kind {
                    PotentialKind::Sampled(vals) => {
                        (0..3).map(|i| bary[i] * vals[tri[i] as usize]).sum()
                    }
                    _ => {
                        let fx = geom.map(&x);
                        f.eval([fx[0], fx[1]]).unwrap()
                    }
                }
            };
            let refined = refine_tip
                && opts_tip_refined(&tip_set, tri)
                && f.power_exponent().is_some();
            let m = local_mass(coords, &f_at, refined);
            (tri, k, m)
        })
        .collect();

    let n = mesh.vertex_count();
    let mut kb = TripletBuilder::new(n);
    let mut mb = TripletBuilder::new(n);
    for (tri, k, m) in locals {
        for i in 0..3 {
            for j in 0..3 {
                kb.push(tri[i], tri[j], k[i][j]);
                mb.push(tri[i], tri[j], m[i][j]);
            }
        }
    }
    Ok((kb.build(), mb.build()))
}

fn opts_tip_refined(tip_set: &std::collections::HashSet<u32>, tri: [u32; 3]) -> bool {
    tri.iter().any(|v| tip_set.contains(v))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
    pub free_dofs: usize,
    pub direct: bool,
}

/// Residual contract of the discrete weak form at free vertices.
const RESIDUAL_REL: f64 = 1e-10;

/// Solve `(stiffness - mass_f) U = 0` with the given Dirichlet values on the
/// outer boundary, by row/column elimination (symmetry-preserving).
///
/// Small reduced systems go through a dense Cholesky factorization; larger
/// ones through Jacobi-preconditioned CG at relative tolerance 1e-13. Either
/// route reports `IndefiniteSystem` when positivity fails, which signals a
/// potential outside the smallness regime.
pub fn solve_dirichlet(
    mesh: &SlitMesh,
    stiffness: &SparseSym,
    mass_f: &SparseSym,
    boundary_values: &BTreeMap<u32, f64>,
) -> Result<(Field, SolveStats)> {
    let n = mesh.vertex_count();
    for &id in &mesh.outer_boundary {
        if !boundary_values.contains_key(&id) {
            return Err(Error::InvalidArgument(format!(
                "boundary value missing for outer vertex {id}"
            )));
        }
    }
    let system = stiffness.sub(mass_f);

    let mut is_fixed = vec![false; n];
    let mut full = vec![0.0; n];
    for (&id, &g) in boundary_values {
        if id as usize >= n {
            return Err(Error::InvalidArgument(format!("boundary vertex {id} out of range")));
        }
        is_fixed[id as usize] = true;
        full[id as usize] = g;
    }
    let free: Vec<usize> = (0..n).filter(|&i| !is_fixed[i]).collect();

    // rhs = -S_fb g
    let sg = system.apply(&full);
    let rhs: Vec<f64> = free.iter().map(|&i| -sg[i]).collect();
    let reduced = system.restrict(&free);

    let mut stats = SolveStats { free_dofs: free.len(), ..Default::default() };
    let x = if free.len() <= 1500 {
        stats.direct = true;
        sparse::dense_cholesky_solve(&reduced, &rhs)?
    } else {
        let attempt = sparse::cg_solve(&reduced, &rhs, 1e-13, 40 * free.len() + 2000);
        let (x, cg): (Vec<f64>, CgStats) = match attempt {
            Ok(ok) => ok,
            Err(Error::SolverFail(_)) => {
                // near machine-precision stagnation: retry at a tolerance the
                // conditioning supports and let the ∞-norm contract decide
                sparse::cg_solve(&reduced, &rhs, 3e-11, 40 * free.len() + 2000)?
            }
            Err(e) => return Err(e),
        };
        stats.iterations = cg.iterations;
        x
    };

    for (slot, &i) in x.iter().zip(&free) {
        full[i] = *slot;
    }

    // verify the discrete weak form at every free vertex
    let resid = system.apply(&full);
    let scale = rhs.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1e-300);
    let worst = free.iter().map(|&i| resid[i].abs()).fold(0.0f64, f64::max);
    if worst > RESIDUAL_REL * scale {
        return Err(Error::SolverFail(format!(
            "free-vertex residual {worst:.3e} above {RESIDUAL_REL:.0e}·‖rhs‖ = {:.3e}",
            RESIDUAL_REL * scale
        )));
    }
    stats.residual = worst;
    Ok((Field { values: full }, stats))
}

/// Side-aware Dirichlet data on the outer circle.
pub fn boundary_map(
    mesh: &SlitMesh,
    f: impl Fn([f64; 2], Side) -> f64,
) -> BTreeMap<u32, f64> {
    let lower: std::collections::HashSet<u32> = mesh.lower_slit_ids().into_iter().collect();
    let mut map = BTreeMap::new();
    for &id in &mesh.outer_boundary {
        let side = if lower.contains(&id) { Side::Lower } else { Side::Upper };
        let v = mesh.vertices[id as usize];
        map.insert(id, f([v[0], v[1]], side));
    }
    map
}

/// `√∫ (field - reference)²` by the 3-point order-2 triangle rule.
pub fn l2_error(
    mesh: &SlitMesh,
    field: &Field,
    reference: impl Fn([f64; 2], Side) -> f64,
) -> f64 {
    let sides = mesh.side_classification();
    let mut total = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let coords = mesh.tri_coords2(t);
        let (_, area) = p1_gradients(coords);
        let side = sides[t].unwrap_or(Side::Upper);
        for &(bary, w) in TRI3.iter() {
            let x = [
                bary[0] * coords[0][0] + bary[1] * coords[1][0] + bary[2] * coords[2][0],
                bary[0] * coords[0][1] + bary[1] * coords[1][1] + bary[2] * coords[2][1],
            ];
            let uh: f64 = (0..3).map(|i| bary[i] * field.values[tri[i] as usize]).sum();
            let d = uh - reference(x, side);
            total += w * area * d * d;
        }
    }
    total.sqrt()
}

/// `√∫ reference²` with the same rule, for relative errors.
pub fn l2_norm(mesh: &SlitMesh, reference: impl Fn([f64; 2], Side) -> f64) -> f64 {
    l2_error(mesh, &Field::zeros(mesh), |p, s| -reference(p, s))
}

/// Piecewise-constant gradient of a P1 field per triangle.
pub fn triangle_gradients(mesh: &SlitMesh, field: &Field) -> Vec<[f64; 2]> {
    (0..mesh.triangles.len())
        .map(|t| {
            let tri = mesh.triangles[t];
            let (g, _) = p1_gradients(mesh.tri_coords2(t));
            let mut grad = [0.0; 2];
            for i in 0..3 {
                let u = field.values[tri[i] as usize];
                grad[0] += u * g[i][0];
                grad[1] += u * g[i][1];
            }
            grad
        })
        .collect()
}

/// Area-weighted per-vertex gradient recovery. Side-aware for free: the two
/// slit sides carry distinct vertex ids.
pub fn recovered_gradients(mesh: &SlitMesh, field: &Field) -> Vec<[f64; 2]> {
    let tg = triangle_gradients(mesh, field);
    let mut acc = vec![[0.0f64; 2]; mesh.vertex_count()];
    let mut wsum = vec![0.0f64; mesh.vertex_count()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let a = mesh.area2(t);
        for &v in tri {
            acc[v as usize][0] += a * tg[t][0];
            acc[v as usize][1] += a * tg[t][1];
            wsum[v as usize] += a;
        }
    }
    for (a, w) in acc.iter_mut().zip(&wsum) {
        if *w > 0.0 {
            a[0] /= w;
            a[1] /= w;
        }
    }
    acc
}

/// `uᵀ (stiffness - mass_f) u`, the discrete energy.
pub fn energy_product(stiffness: &SparseSym, mass_f: &SparseSym, u: &Field) -> f64 {
    let s = stiffness.sub(mass_f);
    let su = s.apply(&u.values);
    u.values.iter().zip(&su).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CrackProfile;
    use crate::slitmesh::make_slit_disk;

    fn flat_geometry() -> CrackGeometry {
        CrackGeometry::build(CrackProfile::half_line(), 10.0).unwrap()
    }

    #[test]
    fn reference_triangle_stiffness() {
        let coords = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let k = local_stiffness(coords, &|_| [1.0, 0.0, 0.0, 1.0]);
        let want = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - want[i][j]).abs() < 1e-14, "K[{i}][{j}] = {}", k[i][j]);
            }
        }
    }

    #[test]
    fn constants_in_stiffness_kernel() {
        let mesh = make_slit_disk(1.0, 2, 0.5, 16).unwrap();
        let geom = flat_geometry();
        let (k, _) = assemble(&mesh, &geom, &Potential::zero(), &Default::default()).unwrap();
        let ones = vec![1.0; mesh.vertex_count()];
        let k1 = k.apply(&ones);
        let worst = k1.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        assert!(worst < 1e-12, "row sums up to {worst}");
    }

    #[test]
    fn mass_row_sums_give_mesh_area() {
        let mesh = make_slit_disk(1.0, 2, 0.5, 32).unwrap();
        let geom = flat_geometry();
        let f = Potential::constant(1.0, HypothesisClass::H1, 1.0);
        let (_, m) = assemble(&mesh, &geom, &f, &Default::default()).unwrap();
        let total: f64 = m.values.iter().sum();
        let area = mesh.total_area();
        assert!((total - area).abs() < 1e-10, "Σ mass = {total} vs area {area}");
    }

    #[test]
    fn assembled_matrices_are_symmetric() {
        let mesh = make_slit_disk(1.0, 2, 0.5, 16).unwrap();
        let geom = flat_geometry();
        let f = Potential::constant(0.3, HypothesisClass::H1, 1.0);
        let (k, m) = assemble(&mesh, &geom, &f, &Default::default()).unwrap();
        assert!(k.symmetry_defect() <= 1e-12);
        assert!(m.symmetry_defect() <= 1e-12);
    }

    #[test]
    fn p1_reproduces_linear_solutions_exactly() {
        // u = x is harmonic, has zero normal derivative on the slit, and is
        // in the P1 space, so the discrete solution matches it nodally.
        let mesh = make_slit_disk(1.0, 2, 0.5, 16).unwrap();
        let geom = flat_geometry();
        let (k, m) = assemble(&mesh, &geom, &Potential::zero(), &Default::default()).unwrap();
        let bc = boundary_map(&mesh, |p, _| p[0]);
        let (u, stats) = solve_dirichlet(&mesh, &k, &m, &bc).unwrap();
        for (i, v) in mesh.vertices.iter().enumerate() {
            assert!(
                (u.values[i] - v[0]).abs() < 1e-10,
                "vertex {i}: {} vs {}",
                u.values[i],
                v[0]
            );
        }
        assert!(stats.residual <= 1e-10 * 1.0_f64.max(stats.residual));
    }

    #[test]
    fn singular_radial_power_needs_tip_flag() {
        let mesh = make_slit_disk(1.0, 1, 0.5, 16).unwrap();
        let geom = flat_geometry();
        let f = Potential::radial_power(1.0, 0.2).unwrap(); // exponent -1.6
        assert!(assemble(&mesh, &geom, &f, &Default::default()).is_err());
        let opts = AssembleOptions { tip_aware_quadrature: true };
        assert!(assemble(&mesh, &geom, &f, &opts).is_ok());
        // milder powers work without the flag
        let f = Potential::radial_power(1.0, 0.75).unwrap(); // exponent -0.5
        assert!(assemble(&mesh, &geom, &f, &Default::default()).is_ok());
    }

    #[test]
    fn sampled_potential_matches_constant() {
        // nodal samples of a constant must assemble the same weighted mass
        let mesh = make_slit_disk(1.0, 2, 0.5, 16).unwrap();
        let geom = flat_geometry();
        let c = 0.7;
        let constant = Potential::constant(c, HypothesisClass::H1, 1.0);
        let sampled = Potential {
            kind: PotentialKind::Sampled(vec![c; mesh.vertex_count()]),
            hypothesis: HypothesisClass::H1,
            epsilon: 1.0,
        };
        let (_, m1) = assemble(&mesh, &geom, &constant, &Default::default()).unwrap();
        let (_, m2) = assemble(&mesh, &geom, &sampled, &Default::default()).unwrap();
        assert_eq!(m1.values.len(), m2.values.len());
        for (a, b) in m1.values.iter().zip(&m2.values) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
        // length mismatch is rejected
        let bad = Potential {
            kind: PotentialKind::Sampled(vec![c; 3]),
            hypothesis: HypothesisClass::H1,
            epsilon: 1.0,
        };
        assert!(assemble(&mesh, &geom, &bad, &Default::default()).is_err());
    }

    #[test]
    fn radial_power_epsilon_validation() {
        assert!(Potential::radial_power(1.0, 0.0).is_err());
        assert!(Potential::radial_power(1.0, -0.2).is_err());
        assert!(Potential::radial_power(1.0, 0.4).is_ok());
    }

    #[test]
    fn strong_potential_reports_indefinite() {
        // -Δu = λu with λ far above the first Dirichlet eigenvalue of the
        // disk makes (K - M_f) indefinite
        let mesh = make_slit_disk(1.0, 1, 0.5, 16).unwrap();
        let geom = flat_geometry();
        let f = Potential::constant(500.0, HypothesisClass::H1, 1.0);
        let (k, m) = assemble(&mesh, &geom, &f, &Default::default()).unwrap();
        let bc = boundary_map(&mesh, |_, _| 1.0);
        assert!(matches!(
            solve_dirichlet(&mesh, &k, &m, &bc),
            Err(Error::IndefiniteSystem)
        ));
    }

    #[test]
    fn l2_error_basics() {
        let mesh = make_slit_disk(1.0, 1, 0.5, 32).unwrap();
        // interpolant of a linear reference has zero error
        let f = Field::interpolate(&mesh, |p, _| 2.0 * p[0] - p[1]).unwrap();
        let e = l2_error(&mesh, &f, |p, _| 2.0 * p[0] - p[1]);
        assert!(e < 1e-13, "error {e}");
        // constant-1 field against reference 0 integrates the mesh area
        let ones = Field::new(&mesh, vec![1.0; mesh.vertex_count()]).unwrap();
        let e = l2_error(&mesh, &ones, |_, _| 0.0);
        assert!((e - mesh.total_area().sqrt()).abs() < 1e-12);
    }

    #[test]
    fn missing_boundary_values_rejected() {
        let mesh = make_slit_disk(1.0, 1, 0.5, 16).unwrap();
        let geom = flat_geometry();
        let (k, m) = assemble(&mesh, &geom, &Potential::zero(), &Default::default()).unwrap();
        let bc = BTreeMap::new();
        assert!(solve_dirichlet(&mesh, &k, &m, &bc).is_err());
    }
}
