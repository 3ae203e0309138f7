//! Crack-straightening geometry.
//!
//! The curved crack `Γ = {(y', y_{N-1}, 0): g(y') ≤ y_{N-1}}` is mapped onto
//! the flat reference crack by the shear
//!
//! ```text
//! F(y', y_{N-1}, y_N) = (y', y_{N-1} + g(y'), y_N),
//! ```
//!
//! which fixes the last coordinate, satisfies `F(y',0,0) = (y', g(y'), 0)`
//! and has `det J_F ≡ 1`. The induced coefficient matrix is
//! `A = |det J_F| J_F⁻¹ J_F⁻ᵀ`, with the derived fields
//! `μ(y) = A(y)y·y/|y|²` and `β(y) = A(y)y/μ(y)`.
//!
//! All evaluators are pure and safe to call concurrently.

use std::sync::Arc;

use crate::{Error, Result};

/// Tolerance for the `g(0) = 0`, `∇g(0) = 0` profile checks.
const PROFILE_TOL: f64 = 1e-10;

/// The height function `g` describing the crack front.
#[derive(Clone)]
pub enum ProfileKind {
    /// `N = 2`: the crack is the half-line, no height function.
    HalfLine,
    /// `g(y') = Σ c_j y_1^j` depending on the first transverse coordinate
    /// only. Requires `c_0 = c_1 = 0`.
    Polynomial(Vec<f64>),
    /// Arbitrary `g` given as a closure on `y' ∈ R^{N-2}`.
    Custom(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for ProfileKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProfileKind::HalfLine => write!(f, "HalfLine"),
            ProfileKind::Polynomial(c) => write!(f, "Polynomial({c:?})"),
            ProfileKind::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CrackProfile {
    pub dimension: usize,
    pub kind: ProfileKind,
    /// Lipschitz constant of `∇g`.
    pub lipschitz_grad_bound: f64,
}

impl CrackProfile {
    /// The trivial half-line profile (`N = 2`).
    pub fn half_line() -> Self {
        CrackProfile { dimension: 2, kind: ProfileKind::HalfLine, lipschitz_grad_bound: 0.0 }
    }

    /// Polynomial profile `g(y') = Σ_j coeffs[j] y_1^j` for `N ≥ 3`.
    pub fn polynomial(dimension: usize, coeffs: Vec<f64>, lipschitz_grad_bound: f64) -> Result<Self> {
        if dimension < 3 {
            return Err(Error::InvalidProfile(format!(
                "polynomial profile needs dimension ≥ 3, got {dimension}"
            )));
        }
        if lipschitz_grad_bound < 0.0 {
            return Err(Error::InvalidProfile("negative Lipschitz bound".into()));
        }
        let p = CrackProfile {
            dimension,
            kind: ProfileKind::Polynomial(coeffs),
            lipschitz_grad_bound,
        };
        p.check_origin()?;
        Ok(p)
    }

    /// Closure-backed profile for `N ≥ 3`; validated at the origin by
    /// evaluation and a central finite-difference gradient.
    pub fn custom(
        dimension: usize,
        g: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
        lipschitz_grad_bound: f64,
    ) -> Result<Self> {
        if dimension < 3 {
            return Err(Error::InvalidProfile(format!(
                "custom profile needs dimension ≥ 3, got {dimension}"
            )));
        }
        let p = CrackProfile { dimension, kind: ProfileKind::Custom(g), lipschitz_grad_bound };
        p.check_origin()?;
        Ok(p)
    }

    fn check_origin(&self) -> Result<()> {
        let m = self.dimension - 2;
        let origin = vec![0.0; m];
        let g0 = self.eval_g(&origin);
        if g0.abs() > PROFILE_TOL {
            return Err(Error::InvalidProfile(format!("g(0) = {g0:.3e}, expected 0")));
        }
        let grad0 = self.grad_g_fd(&origin);
        let norm: f64 = grad0.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > PROFILE_TOL {
            return Err(Error::InvalidProfile(format!("|∇g(0)| = {norm:.3e}, expected 0")));
        }
        Ok(())
    }

    pub fn eval_g(&self, yprime: &[f64]) -> f64 {
        match &self.kind {
            ProfileKind::HalfLine => 0.0,
            ProfileKind::Polynomial(c) => {
                let x = yprime.first().copied().unwrap_or(0.0);
                c.iter().rev().fold(0.0, |acc, &cj| acc * x + cj)
            }
            ProfileKind::Custom(g) => g(yprime),
        }
    }

    /// `∇g(y')`, analytic for polynomial profiles, central differences otherwise.
    pub fn grad_g(&self, yprime: &[f64]) -> Vec<f64> {
        match &self.kind {
            ProfileKind::HalfLine => vec![],
            ProfileKind::Polynomial(c) => {
                let x = yprime.first().copied().unwrap_or(0.0);
                let mut d = 0.0;
                for (j, &cj) in c.iter().enumerate().skip(1).rev() {
                    d = d * x + j as f64 * cj;
                }
                let mut grad = vec![0.0; yprime.len()];
                if !grad.is_empty() {
                    grad[0] = d;
                }
                grad
            }
            ProfileKind::Custom(_) => self.grad_g_fd(yprime),
        }
    }

    fn grad_g_fd(&self, yprime: &[f64]) -> Vec<f64> {
        let h = 1e-6;
        let mut grad = vec![0.0; yprime.len()];
        let mut pt = yprime.to_vec();
        for i in 0..yprime.len() {
            pt[i] = yprime[i] + h;
            let fp = self.eval_g(&pt);
            pt[i] = yprime[i] - h;
            let fm = self.eval_g(&pt);
            pt[i] = yprime[i];
            grad[i] = (fp - fm) / (2.0 * h);
        }
        grad
    }

    /// Second derivative of a polynomial profile in `y_1`; used by the
    /// analytic `dA` path.
    fn poly_second_derivative(&self, x: f64) -> Option<f64> {
        match &self.kind {
            ProfileKind::Polynomial(c) => {
                let mut d2 = 0.0;
                for (j, &cj) in c.iter().enumerate().skip(2).rev() {
                    d2 = d2 * x + (j * (j - 1)) as f64 * cj;
                }
                Some(d2)
            }
            _ => None,
        }
    }
}

/// A square matrix stored row-major; the dimensions here are tiny (N ≤ 4 in
/// practice) so no sparse or BLAS machinery is warranted.
pub type Mat = Vec<f64>;

/// The crack geometry on a ball of validity radius `r1`.
#[derive(Debug, Clone)]
pub struct CrackGeometry {
    pub profile: CrackProfile,
    pub r1: f64,
}

/// Summary of invariant sampling over random points in `B_{r1}`.
#[derive(Debug, Clone, Default)]
pub struct InvariantReport {
    pub samples: usize,
    pub max_symmetry_defect: f64,
    pub ellipticity_violations: usize,
    pub mu_violations: usize,
    /// Largest radius at which any bound failed; `None` when all pass.
    pub largest_violating_radius: Option<f64>,
}

impl CrackGeometry {
    /// Build the geometry, validating the profile and radius.
    pub fn build(profile: CrackProfile, r1: f64) -> Result<Self> {
        if !(r1 > 0.0) {
            return Err(Error::InvalidArgument(format!("r1 = {r1} must be positive")));
        }
        profile.check_origin()?;
        Ok(CrackGeometry { profile, r1 })
    }

    pub fn dimension(&self) -> usize {
        self.profile.dimension
    }

    /// The straightening map `F`.
    pub fn map(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dimension();
        debug_assert_eq!(y.len(), n);
        let mut out = y.to_vec();
        if n >= 3 {
            out[n - 2] += self.profile.eval_g(&y[..n - 2]);
        }
        out
    }

    /// Jacobian `J_F(y)`; depends only on `y''`, and `J_F(0) = Id`.
    pub fn jacobian(&self, y: &[f64]) -> Mat {
        let n = self.dimension();
        let mut j = identity(n);
        if n >= 3 {
            let grad = self.profile.grad_g(&y[..n - 2]);
            for (i, gi) in grad.iter().enumerate() {
                j[(n - 2) * n + i] = *gi;
            }
        }
        j
    }

    /// `det J_F`, identically 1 for the shear construction.
    pub fn det_jacobian(&self, _y: &[f64]) -> f64 {
        1.0
    }

    /// Coefficient matrix `A(y) = |det J_F| J_F⁻¹ J_F⁻ᵀ`.
    ///
    /// For the shear the closed form is `Id` modified in the `(y', y_{N-1})`
    /// block: `A[N-2][i] = A[i][N-2] = -∂g/∂y_i` and
    /// `A[N-2][N-2] = 1 + |∇g|²`. The last row and column stay `e_N`.
    pub fn matrix_a(&self, y: &[f64]) -> Mat {
        let n = self.dimension();
        let mut a = identity(n);
        if n >= 3 {
            let grad = self.profile.grad_g(&y[..n - 2]);
            let s2: f64 = grad.iter().map(|x| x * x).sum();
            for (i, gi) in grad.iter().enumerate() {
                a[(n - 2) * n + i] = -gi;
                a[i * n + (n - 2)] = -gi;
            }
            a[(n - 2) * n + (n - 2)] = 1.0 + s2;
        }
        a
    }

    /// `μ(y) = A(y)y·y/|y|²` and `β(y) = A(y)y/μ(y)`, for `0 < |y| < r1`.
    pub fn mu_beta(&self, y: &[f64]) -> Result<(f64, Vec<f64>)> {
        let n = self.dimension();
        let norm2: f64 = y.iter().map(|x| x * x).sum();
        if norm2 == 0.0 {
            return Err(Error::InvalidArgument(
                "μ has a removable singularity at y = 0; use the limit value 1".into(),
            ));
        }
        if norm2.sqrt() >= self.r1 {
            return Err(Error::InvalidArgument(format!(
                "|y| = {} outside the validity ball r1 = {}",
                norm2.sqrt(),
                self.r1
            )));
        }
        let a = self.matrix_a(y);
        let ay = mat_vec(&a, y, n);
        let mu = y.iter().zip(&ay).map(|(yi, ai)| yi * ai).sum::<f64>() / norm2;
        let beta = ay.iter().map(|&v| v / mu).collect();
        Ok((mu, beta))
    }

    /// The vector `dA(y)zz` with components `Σ_{h,k} ∂a_{kh}/∂y_i z_h z_k`.
    ///
    /// Analytic for polynomial profiles; central finite differences with
    /// step 1e-6 otherwise (`g` is only C^{1,1} in general, so the hessian of
    /// `g` may fail to exist pointwise — callers supply smooth profiles when
    /// they need trustworthy values).
    pub fn d_a(&self, y: &[f64], z: &[f64]) -> Vec<f64> {
        let n = self.dimension();
        debug_assert_eq!(z.len(), n);
        if n == 2 {
            return vec![0.0; 2]; // constant A
        }
        if let Some(p2) = self.profile.poly_second_derivative(y[0]) {
            // entries depending on y_1 only: a[N-2][0] = -g'(y_1),
            // a[N-2][N-2] = 1 + g'(y_1)²
            let p1 = self.profile.grad_g(&y[..n - 2])[0];
            let mut out = vec![0.0; n];
            out[0] = -2.0 * p2 * z[0] * z[n - 2] + 2.0 * p1 * p2 * z[n - 2] * z[n - 2];
            return out;
        }
        let h = 1e-6;
        let mut out = vec![0.0; n];
        let mut pt = y.to_vec();
        for i in 0..n {
            pt[i] = y[i] + h;
            let ap = self.matrix_a(&pt);
            pt[i] = y[i] - h;
            let am = self.matrix_a(&pt);
            pt[i] = y[i];
            let mut s = 0.0;
            for hh in 0..n {
                for kk in 0..n {
                    s += (ap[kk * n + hh] - am[kk * n + hh]) / (2.0 * h) * z[hh] * z[kk];
                }
            }
            out[i] = s;
        }
        out
    }

    /// `div β(y)` by central finite differences of `β`.
    pub fn div_beta(&self, y: &[f64]) -> Result<f64> {
        let n = self.dimension();
        let h = 1e-6;
        let mut s = 0.0;
        let mut pt = y.to_vec();
        for i in 0..n {
            pt[i] = y[i] + h;
            let (_, bp) = self.mu_beta(&pt)?;
            pt[i] = y[i] - h;
            let (_, bm) = self.mu_beta(&pt)?;
            pt[i] = y[i];
            s += (bp[i] - bm[i]) / (2.0 * h);
        }
        Ok(s)
    }

    /// Sample the proved bounds at quasi-random points of `B_{r1}` and unit
    /// directions: symmetry of `A`, the ellipticity window `[½, 2]`, the `μ`
    /// window `[½, 2]`, and the block identity `A e_N = det J_F · e_N`.
    ///
    /// The sampler is a deterministic low-discrepancy sweep so reports are
    /// reproducible.
    pub fn sample_invariants(&self, samples: usize) -> InvariantReport {
        let n = self.dimension();
        let mut report = InvariantReport { samples, ..Default::default() };
        let mut state = 0x853C49E6748FEA9Bu64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..samples {
            // rejection-sample a point in the ball and a unit direction
            let mut y = vec![0.0; n];
            loop {
                for yi in y.iter_mut() {
                    *yi = (2.0 * next() - 1.0) * self.r1;
                }
                let r2: f64 = y.iter().map(|v| v * v).sum();
                if r2 < self.r1 * self.r1 && r2 > 0.0 {
                    break;
                }
            }
            let mut z = vec![0.0; n];
            loop {
                for zi in z.iter_mut() {
                    *zi = 2.0 * next() - 1.0;
                }
                let r2: f64 = z.iter().map(|v| v * v).sum();
                if r2 > 1e-4 && r2 <= 1.0 {
                    let r = r2.sqrt();
                    z.iter_mut().for_each(|v| *v /= r);
                    break;
                }
            }
            let radius = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            let a = self.matrix_a(&y);
            let mut bad = false;

            let mut sym: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    sym = sym.max((a[i * n + j] - a[j * n + i]).abs());
                }
            }
            report.max_symmetry_defect = report.max_symmetry_defect.max(sym);

            let az = mat_vec(&a, &z, n);
            let quad: f64 = az.iter().zip(&z).map(|(a, b)| a * b).sum();
            if !(0.5 - 1e-12..=2.0 + 1e-12).contains(&quad) {
                report.ellipticity_violations += 1;
                bad = true;
            }
            if let Ok((mu, _)) = self.mu_beta(&y) {
                if !(0.5 - 1e-12..=2.0 + 1e-12).contains(&mu) {
                    report.mu_violations += 1;
                    bad = true;
                }
            }
            if bad {
                report.largest_violating_radius = Some(
                    report
                        .largest_violating_radius
                        .map_or(radius, |r: f64| r.max(radius)),
                );
            }
        }
        report
    }
}

pub fn identity(n: usize) -> Mat {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

pub fn mat_vec(m: &[f64], v: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|i| (0..n).map(|j| m[i * n + j] * v[j]).sum()).collect()
}

/// Gaussian elimination inverse for the small matrices used in tests to
/// cross-check the closed-form `A` against `|det J| J⁻¹ J⁻ᵀ`.
pub fn invert(m: &[f64], n: usize) -> Option<Mat> {
    let mut a = m.to_vec();
    let mut inv = identity(n);
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        if a[piv * n + col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
                inv.swap(col * n + j, piv * n + j);
            }
        }
        let d = a[col * n + col];
        for j in 0..n {
            a[col * n + j] /= d;
            inv[col * n + j] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = a[r * n + col];
                for j in 0..n {
                    a[r * n + j] -= f * a[col * n + j];
                    inv[r * n + j] -= f * inv[col * n + j];
                }
            }
        }
    }
    Some(inv)
}

pub fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Mat {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

pub fn transpose(a: &[f64], n: usize) -> Mat {
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = a[i * n + j];
        }
    }
    t
}

pub fn determinant(m: &[f64], n: usize) -> f64 {
    let mut a = m.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        if a[piv * n + col].abs() < 1e-300 {
            return 0.0;
        }
        if piv != col {
            det = -det;
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
        }
        det *= a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            for j in col..n {
                a[r * n + j] -= f * a[col * n + j];
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic_geometry() -> CrackGeometry {
        let p = CrackProfile::polynomial(3, vec![0.0, 0.0, 1.0], 2.0).unwrap();
        CrackGeometry::build(p, 0.3).unwrap()
    }

    /// Independent route: assemble A from J_F by explicit inversion.
    fn a_from_jacobian(geom: &CrackGeometry, y: &[f64]) -> Mat {
        let n = geom.dimension();
        let j = geom.jacobian(y);
        let jinv = invert(&j, n).unwrap();
        let jinv_t = transpose(&jinv, n);
        let det = determinant(&j, n).abs();
        mat_mul(&jinv, &jinv_t, n).iter().map(|v| v * det).collect()
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(CrackGeometry::build(CrackProfile::half_line(), 0.0).is_err());
        assert!(CrackGeometry::build(CrackProfile::half_line(), -1.0).is_err());
        // g(0) ≠ 0
        assert!(CrackProfile::polynomial(3, vec![0.5], 0.0).is_err());
        // ∇g(0) ≠ 0
        assert!(CrackProfile::polynomial(3, vec![0.0, 0.3], 1.0).is_err());
        // beyond-tolerance offsets are caught for closures too
        let g = Arc::new(|y: &[f64]| 1e-6 + y[0] * y[0]);
        assert!(CrackProfile::custom(3, g, 2.0).is_err());
    }

    #[test]
    fn two_dimensional_geometry_is_trivial() {
        let geom = CrackGeometry::build(CrackProfile::half_line(), 1.0).unwrap();
        let y = [0.3, -0.2];
        assert_eq!(geom.map(&y), vec![0.3, -0.2]);
        assert_eq!(geom.matrix_a(&y), identity(2));
        let (mu, beta) = geom.mu_beta(&y).unwrap();
        assert_eq!(mu, 1.0);
        assert_eq!(beta, vec![0.3, -0.2]);
        assert_eq!(geom.d_a(&y, &[1.0, 2.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn shear_matrix_matches_hand_computation() {
        // g(y1) = y1² at (0.1, 0.1, 0): A = [[1,-0.2,0],[-0.2,1.04,0],[0,0,1]]
        let geom = quadratic_geometry();
        let y = [0.1, 0.1, 0.0];
        let a = geom.matrix_a(&y);
        let expect = [1.0, -0.2, 0.0, -0.2, 1.04, 0.0, 0.0, 0.0, 1.0];
        for (got, want) in a.iter().zip(expect) {
            assert!((got - want).abs() < 1e-14, "A mismatch: {a:?}");
        }
        let (mu, beta) = geom.mu_beta(&y).unwrap();
        assert!((mu - 0.82).abs() < 1e-14);
        let want_beta = [0.08 / 0.82, 0.084 / 0.82, 0.0];
        for (b, w) in beta.iter().zip(want_beta) {
            assert!((b - w).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_a_equals_generic_formula() {
        let geom = quadratic_geometry();
        for y in [[0.1, 0.1, 0.0], [0.05, -0.1, 0.12], [-0.2, 0.01, 0.1], [0.0, 0.0, 0.25]] {
            let a = geom.matrix_a(&y);
            let a_ref = a_from_jacobian(&geom, &y);
            for (g, w) in a.iter().zip(&a_ref) {
                assert!((g - w).abs() < 1e-12, "closed form vs J-route at {y:?}");
            }
        }
    }

    #[test]
    fn map_restricts_to_crack_front() {
        // F(y', 0, 0) = (y', g(y'), 0)
        let geom = quadratic_geometry();
        for y1 in [-0.25, -0.1, 0.0, 0.07, 0.29] {
            let im = geom.map(&[y1, 0.0, 0.0]);
            assert_eq!(im[0], y1);
            assert!((im[1] - y1 * y1).abs() < 1e-15);
            assert_eq!(im[2], 0.0);
        }
    }

    #[test]
    fn identity_on_the_axis() {
        // J_F depends only on y''; at y'' = 0 it is the identity, so A = Id
        // along the y_N-axis.
        let p = CrackProfile::custom(3, Arc::new(|y: &[f64]| (y[0].cos() - 1.0) * -2.0), 2.0).unwrap();
        let geom = CrackGeometry::build(p, 0.3).unwrap();
        for t in [0.05, -0.1, 0.2] {
            let a = geom.matrix_a(&[0.0, 0.0, t]);
            for (g, w) in a.iter().zip(identity(3)) {
                assert!((g - w).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn da_matches_symbolic_derivative() {
        // z = e2: (dAzz)_1 = ∂a22/∂y1 = 8 y1, other components 0
        let geom = quadratic_geometry();
        let z = [0.0, 1.0, 0.0];
        for y in [[0.1, 0.05, 0.0], [-0.12, 0.0, 0.1], [0.2, -0.05, 0.02]] {
            let da = geom.d_a(&y, &z);
            assert!((da[0] - 8.0 * y[0]).abs() < 1e-12, "dA at {y:?}: {da:?}");
            assert!(da[1].abs() < 1e-12);
            assert!(da[2].abs() < 1e-12);
        }
        // finite-difference route agrees with the analytic one
        let p = CrackProfile::custom(3, Arc::new(|y: &[f64]| y[0] * y[0]), 2.0).unwrap();
        let fd_geom = CrackGeometry::build(p, 0.3).unwrap();
        let y = [0.11, -0.03, 0.05];
        let da_fd = fd_geom.d_a(&y, &z);
        let da_an = geom.d_a(&y, &z);
        for (a, b) in da_fd.iter().zip(&da_an) {
            assert!((a - b).abs() < 1e-6, "fd {da_fd:?} vs analytic {da_an:?}");
        }
    }

    #[test]
    fn da_is_quadratic_in_z() {
        let geom = quadratic_geometry();
        let y = [0.1, 0.1, 0.05];
        let z = [0.3, -0.7, 0.2];
        let z2: Vec<f64> = z.iter().map(|v| 2.0 * v).collect();
        let d1 = geom.d_a(&y, &z);
        let d2 = geom.d_a(&y, &z2);
        for (a, b) in d1.iter().zip(&d2) {
            assert!((4.0 * a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn mu_rejects_origin() {
        let geom = quadratic_geometry();
        assert!(geom.mu_beta(&[0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn invariant_sampling_is_clean_for_quadratic_profile() {
        let geom = quadratic_geometry();
        let report = geom.sample_invariants(10_000);
        assert!(report.max_symmetry_defect <= 1e-12);
        assert_eq!(report.ellipticity_violations, 0, "{report:?}");
        assert_eq!(report.mu_violations, 0, "{report:?}");
        assert!(report.largest_violating_radius.is_none());
    }

    #[test]
    fn block_structure_last_row() {
        // A(y) e_N = det J_F(y) · e_N: the shear leaves the y_N direction
        // untouched
        let geom = quadratic_geometry();
        let n = 3;
        for y in [[0.1, 0.1, 0.0], [0.2, -0.05, 0.1], [-0.15, 0.2, -0.1]] {
            let a = geom.matrix_a(&y);
            let en = [0.0, 0.0, 1.0];
            let aen = mat_vec(&a, &en, n);
            let det = geom.det_jacobian(&y);
            assert!((aen[0]).abs() < 1e-15 && (aen[1]).abs() < 1e-15);
            assert!((aen[2] - det).abs() < 1e-15);
        }
    }

    #[test]
    fn beta_deviation_is_second_order() {
        // |β(y) - y| ≤ C|y|²: fit the log-log slope on a shrinking sequence
        let geom = quadratic_geometry();
        let dir = [0.6, 0.5, 0.624_499_799_839_84]; // unit-ish direction
        let mut logs = Vec::new();
        for j in 0..10 {
            let t = 0.25 * 0.7f64.powi(j);
            let y: Vec<f64> = dir.iter().map(|d| d * t).collect();
            let (_, beta) = geom.mu_beta(&y).unwrap();
            let dev: f64 =
                beta.iter().zip(&y).map(|(b, yi)| (b - yi) * (b - yi)).sum::<f64>().sqrt();
            let r = t;
            logs.push((r.ln(), dev.ln()));
        }
        let slope = fit_slope(&logs);
        assert!(slope >= 1.9, "slope {slope}");
    }

    #[test]
    fn mu_and_div_beta_first_order() {
        let geom = quadratic_geometry();
        let dir = [0.55, 0.6, 0.581_807_5];
        let mut mu_logs = Vec::new();
        let mut div_logs = Vec::new();
        for j in 0..10 {
            let t = 0.25 * 0.7f64.powi(j);
            let y: Vec<f64> = dir.iter().map(|d| d * t).collect();
            let (mu, _) = geom.mu_beta(&y).unwrap();
            mu_logs.push((t.ln(), (mu - 1.0).abs().ln()));
            let db = geom.div_beta(&y).unwrap();
            div_logs.push((t.ln(), (db - 3.0).abs().ln()));
        }
        let s_mu = fit_slope(&mu_logs);
        let s_div = fit_slope(&div_logs[..7]); // FD noise pollutes the smallest radii
        assert!(s_mu >= 0.9, "μ slope {s_mu}");
        assert!(s_div >= 0.9, "div β slope {s_div}");
    }

    #[test]
    fn a_tends_to_identity_first_order() {
        let geom = quadratic_geometry();
        let mut worst_ratio: f64 = 0.0;
        for j in 1..12 {
            let t = 0.25 * 0.75f64.powi(j);
            let y = [t * 0.8, t * 0.6, 0.0];
            let a = geom.matrix_a(&y);
            let dev = a
                .iter()
                .zip(identity(3))
                .map(|(g, w)| (g - w).abs())
                .fold(0.0f64, f64::max);
            worst_ratio = worst_ratio.max(dev / t);
        }
        assert!(worst_ratio.is_finite() && worst_ratio < 10.0, "C = {worst_ratio}");
    }

    fn fit_slope(pts: &[(f64, f64)]) -> f64 {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    }
}
