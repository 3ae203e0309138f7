//! Sparse symmetric linear algebra: CSR storage, Jacobi-preconditioned
//! conjugate gradients with curvature detection, a dense Cholesky for small
//! reduced systems, and a shift-invert Lanczos eigensolver for the pencil
//! `K x = μ M x`.

use crate::{Error, Result};

/// Symmetric sparse matrix in CSR form. Both triangles are stored so that
/// mat-vec is a plain row sweep.
#[derive(Debug, Clone)]
pub struct SparseSym {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<u32>,
    pub values: Vec<f64>,
}

/// Accumulates (row, col, value) contributions; duplicates are summed.
#[derive(Debug)]
pub struct TripletBuilder {
    n: usize,
    entries: Vec<(u32, u32, f64)>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn push(&mut self, row: u32, col: u32, value: f64) {
        debug_assert!((row as usize) < self.n && (col as usize) < self.n);
        self.entries.push((row, col, value));
    }

    pub fn build(mut self) -> SparseSym {
        // stable sort keeps duplicate insertion order, so the merge below is
        // deterministic regardless of how contributions were produced
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values = Vec::with_capacity(self.entries.len());
        let mut it = self.entries.iter().peekable();
        while let Some(&(r, c, v)) = it.next() {
            let mut sum = v;
            while let Some(&&(r2, c2, v2)) = it.peek() {
                if r2 == r && c2 == c {
                    sum += v2;
                    it.next();
                } else {
                    break;
                }
            }
            row_ptr[r as usize + 1] += 1;
            col_idx.push(c);
            values.push(sum);
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseSym { n: self.n, row_ptr, col_idx, values }
    }
}

impl SparseSym {
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k] as usize];
            }
            y[i] = s;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[k] as usize == i {
                    d[i] = self.values[k];
                }
            }
        }
        d
    }

    /// Largest absolute entry of `A - Aᵀ`; 0 for exactly symmetric storage.
    pub fn symmetry_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k] as usize;
                let aji = self.get(j, i);
                defect = defect.max((self.values[k] - aji).abs());
            }
        }
        defect
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        for k in self.row_ptr[i]..self.row_ptr[i + 1] {
            if self.col_idx[k] as usize == j {
                return self.values[k];
            }
        }
        0.0
    }

    /// `self - other` on the union pattern.
    pub fn sub(&self, other: &SparseSym) -> SparseSym {
        assert_eq!(self.n, other.n);
        let mut b = TripletBuilder::new(self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                b.push(i as u32, self.col_idx[k], self.values[k]);
            }
            for k in other.row_ptr[i]..other.row_ptr[i + 1] {
                b.push(i as u32, other.col_idx[k], -other.values[k]);
            }
        }
        b.build()
    }

    /// `self + shift * other` on the union pattern.
    pub fn add_scaled(&self, other: &SparseSym, shift: f64) -> SparseSym {
        assert_eq!(self.n, other.n);
        let mut b = TripletBuilder::new(self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                b.push(i as u32, self.col_idx[k], self.values[k]);
            }
            for k in other.row_ptr[i]..other.row_ptr[i + 1] {
                b.push(i as u32, other.col_idx[k], shift * other.values[k]);
            }
        }
        b.build()
    }

    /// Restrict to the index set `keep` (ascending); returns the submatrix.
    pub fn restrict(&self, keep: &[usize]) -> SparseSym {
        let mut map = vec![u32::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new as u32;
        }
        let mut b = TripletBuilder::new(keep.len());
        for (new_i, &old_i) in keep.iter().enumerate() {
            for k in self.row_ptr[old_i]..self.row_ptr[old_i + 1] {
                let j = map[self.col_idx[k] as usize];
                if j != u32::MAX {
                    b.push(new_i as u32, j, self.values[k]);
                }
            }
        }
        b.build()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CgStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Jacobi-preconditioned CG for an SPD system.
///
/// Returns `IndefiniteSystem` when a search direction with non-positive
/// curvature is met, which is how the fem layer detects that the potential
/// term has destroyed positivity.
pub fn cg_solve(
    a: &SparseSym,
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, CgStats)> {
    let n = a.n;
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], CgStats::default()));
    }
    let diag = a.diagonal();
    let inv_diag: Vec<f64> = diag
        .iter()
        .map(|&d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    if diag.iter().any(|&d| d <= 0.0) {
        return Err(Error::IndefiniteSystem);
    }

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut iterations = 0;
    for it in 0..max_iter {
        iterations = it + 1;
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::IndefiniteSystem);
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rnorm = norm2(&r);
        if rnorm <= rel_tol * bnorm {
            return Ok((x, CgStats { iterations, residual: rnorm }));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverFail(format!(
        "CG did not reach tolerance {rel_tol:.1e} in {iterations} iterations (residual {:.3e})",
        norm2(&r) / bnorm
    )))
}

/// Dense Cholesky solve for small reduced systems. `Err(IndefiniteSystem)`
/// when a pivot is non-positive.
pub fn dense_cholesky_solve(a: &SparseSym, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.n;
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for k in a.row_ptr[i]..a.row_ptr[i + 1] {
            m[i * n + a.col_idx[k] as usize] = a.values[k];
        }
    }
    // in-place lower Cholesky
    for j in 0..n {
        let mut d = m[j * n + j];
        for k in 0..j {
            d -= m[j * n + k] * m[j * n + k];
        }
        if d <= 0.0 {
            return Err(Error::IndefiniteSystem);
        }
        let d = d.sqrt();
        m[j * n + j] = d;
        for i in j + 1..n {
            let mut s = m[i * n + j];
            for k in 0..j {
                s -= m[i * n + k] * m[j * n + k];
            }
            m[i * n + j] = s / d;
        }
    }
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            x[i] -= m[i * n + k] * x[k];
        }
        x[i] /= m[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            x[i] -= m[k * n + i] * x[k];
        }
        x[i] /= m[i * n + i];
    }
    Ok(x)
}

/// Eigen-decomposition of a small dense symmetric matrix by cyclic Jacobi
/// rotations. Returns eigenvalues ascending with matching eigenvectors
/// (columns of the returned matrix, stored row-major `vecs[i*n+j]` = i-th
/// component of the j-th vector).
pub fn jacobi_eigen(mat: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = mat.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if off.sqrt() < 1e-15 * (1.0 + norm2(&a)) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vecs = vec![0.0; n * n];
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            vecs[i * n + new_j] = v[i * n + old_j];
        }
    }
    (vals, vecs)
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

/// Lowest eigenpairs of `K x = μ M x` (`K` positive semidefinite, `M`
/// positive definite) by shift-invert Lanczos with full reorthogonalization
/// in the M-inner product.
///
/// Deterministic: the starting vector comes from a fixed recurrence and every
/// inner solve runs the same preconditioned CG. Eigenvalues are returned
/// ascending, vectors M-orthonormal, `value` set to the Rayleigh quotient.
pub fn lanczos_smallest(
    k_mat: &SparseSym,
    m_mat: &SparseSym,
    count: usize,
    residual_tol: f64,
) -> Result<Vec<EigenPair>> {
    let n = k_mat.n;
    assert_eq!(n, m_mat.n);
    if count == 0 || count > n {
        return Err(Error::InvalidArgument(format!(
            "eigenpair count {count} out of range for n = {n}"
        )));
    }
    let sigma = 1.0;
    let shifted = k_mat.add_scaled(m_mat, sigma);

    let m_ip = |x: &[f64], y: &[f64]| -> f64 { dot(&m_mat.apply(x), y) };

    // fixed pseudo-random start: xorshift from a constant seed
    let mut state = 0x9E3779B97F4A7C15u64;
    let mut start = vec![0.0; n];
    for s in start.iter_mut() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        *s = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
    }

    let mut m_steps = (2 * count + 24).min(n);
    let max_steps = (8 * count + 120).min(n);
    loop {
        let pairs = lanczos_run(&shifted, m_mat, &m_ip, &start, m_steps, sigma, count)?;
        let worst = pairs.iter().map(|p| p.residual).fold(0.0f64, f64::max);
        if worst <= residual_tol || m_steps >= max_steps {
            if worst > residual_tol {
                return Err(Error::SolverFail(format!(
                    "eigensolver residual {worst:.2e} above {residual_tol:.1e} after {m_steps} Lanczos steps"
                )));
            }
            return Ok(pairs);
        }
        m_steps = (m_steps + 24).min(max_steps);
    }
}

fn lanczos_run(
    shifted: &SparseSym,
    m_mat: &SparseSym,
    m_ip: &dyn Fn(&[f64], &[f64]) -> f64,
    start: &[f64],
    steps: usize,
    sigma: f64,
    count: usize,
) -> Result<Vec<EigenPair>> {
    let n = shifted.n;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut alphas = Vec::with_capacity(steps);
    let mut betas = Vec::with_capacity(steps);

    let mut q = start.to_vec();
    let nq = m_ip(&q, &q).sqrt();
    q.iter_mut().for_each(|x| *x /= nq);
    basis.push(q);

    for j in 0..steps {
        let qj = basis[j].clone();
        let rhs = m_mat.apply(&qj);
        let (mut w, _) = cg_solve(shifted, &rhs, 1e-13, 200 * n + 1000)?;
        let alpha = m_ip(&w, &qj);
        alphas.push(alpha);
        for i in 0..n {
            w[i] -= alpha * qj[i];
        }
        if j > 0 {
            let beta_prev: f64 = betas[j - 1];
            for i in 0..n {
                w[i] -= beta_prev * basis[j - 1][i];
            }
        }
        // full reorthogonalization, twice
        for _ in 0..2 {
            for qb in &basis {
                let c = m_ip(&w, qb);
                for i in 0..n {
                    w[i] -= c * qb[i];
                }
            }
        }
        let beta = m_ip(&w, &w).sqrt();
        if j + 1 == steps {
            break;
        }
        if beta < 1e-14 {
            // invariant subspace: continue with a fresh deterministic vector
            let mut fresh = vec![0.0; n];
            for (i, f) in fresh.iter_mut().enumerate() {
                *f = ((i as f64) * 0.754_877_666 + 0.1).sin();
            }
            for qb in &basis {
                let c = m_ip(&fresh, qb);
                for i in 0..n {
                    fresh[i] -= c * qb[i];
                }
            }
            let nf = m_ip(&fresh, &fresh).sqrt();
            if nf < 1e-14 {
                break;
            }
            fresh.iter_mut().for_each(|x| *x /= nf);
            betas.push(0.0);
            basis.push(fresh);
            continue;
        }
        betas.push(beta);
        let qn: Vec<f64> = w.iter().map(|&x| x / beta).collect();
        basis.push(qn);
    }

    let m = alphas.len();
    let mut tri = vec![0.0; m * m];
    for i in 0..m {
        tri[i * m + i] = alphas[i];
        if i + 1 < m && i < betas.len() {
            tri[i * m + i + 1] = betas[i];
            tri[(i + 1) * m + i] = betas[i];
        }
    }
    let (theta, z) = jacobi_eigen(&tri, m);

    // largest θ of the shifted-inverted operator ↔ smallest μ of the pencil
    let mut picks: Vec<usize> = (0..m).collect();
    picks.sort_by(|&a, &b| theta[b].partial_cmp(&theta[a]).unwrap());
    let picks = &picks[..count.min(m)];

    let mut pairs = Vec::with_capacity(picks.len());
    for &jz in picks {
        let mut x = vec![0.0; n];
        for (jb, qb) in basis.iter().enumerate().take(m) {
            let c = z[jb * m + jz];
            for i in 0..n {
                x[i] += c * qb[i];
            }
        }
        let nx = m_ip(&x, &x).sqrt();
        x.iter_mut().for_each(|v| *v /= nx);
        let sx = shifted.apply(&x);
        let mx = m_mat.apply(&x);
        let kx: Vec<f64> = sx.iter().zip(&mx).map(|(s, m)| s - sigma * m).collect();
        let mu = dot(&kx, &x) / dot(&mx, &x);
        let res: Vec<f64> = kx.iter().zip(&mx).map(|(k, m)| k - mu * m).collect();
        // ‖Sx‖ stays away from zero even for the zero eigenvalue, which makes
        // the relative residual meaningful across the whole spectrum
        let scale = norm2(&sx).max(1e-300);
        pairs.push(EigenPair { value: mu, vector: x, residual: norm2(&res) / scale });
    }
    pairs.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap());
    Ok(pairs)
}
