//! The Almgren frequency machinery on discrete fields:
//!
//! ```text
//! H(r) = r^{1-N} ∮_{∂B_r} μ U² dS,
//! E(r) = r^{2-N} ∫_{B_r} (A∇U·∇U - f̃ U²) dy,
//! N(r) = E(r)/H(r),
//! ```
//!
//! together with numerical audits of the almost-monotonicity of `N`, the
//! growth `H(r) ≤ α r^{2γ}`, the doubling bounds, and Richardson
//! extrapolation of `γ = lim_{r→0} N(r)`.

use rayon::prelude::*;

use crate::exact::ExactSolution;
use crate::fem::{Field, Potential, PotentialKind};
use crate::geometry::CrackGeometry;
use crate::quad::TRI3;
use crate::slitmesh::SlitMesh;
use crate::{Error, Result, Side};

/// Sampled `(H, E, N)` values over increasing radii.
#[derive(Debug, Clone)]
pub struct FrequencyTrace {
    /// Ambient dimension `N` of the problem the trace came from.
    pub dimension: usize,
    pub radii: Vec<f64>,
    pub h_vals: Vec<f64>,
    pub e_vals: Vec<f64>,
    pub n_vals: Vec<f64>,
    /// Remainder exponent `δ = 4ε/(N+2ε)`.
    pub delta: f64,
    /// Filled by [`estimate_gamma`].
    pub gamma_estimate: Option<f64>,
    /// Filled by [`audit_monotonicity`].
    pub monotonicity_constant: Option<f64>,
}

impl FrequencyTrace {
    /// Assemble a trace from precomputed samples, enforcing positivity of
    /// `H` and ordering of the radii.
    pub fn from_samples(
        dimension: usize,
        radii: Vec<f64>,
        h_vals: Vec<f64>,
        e_vals: Vec<f64>,
        delta: f64,
    ) -> Result<Self> {
        if radii.len() != h_vals.len() || radii.len() != e_vals.len() {
            return Err(Error::InvalidArgument("trace arrays must have equal length".into()));
        }
        if radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("radii must increase strictly".into()));
        }
        for (&r, &h) in radii.iter().zip(&h_vals) {
            if !(h > 0.0) {
                return Err(Error::HNotPositive { radius: r, value: h });
            }
        }
        let n_vals = e_vals.iter().zip(&h_vals).map(|(e, h)| e / h).collect();
        Ok(FrequencyTrace {
            dimension,
            radii,
            h_vals,
            e_vals,
            n_vals,
            delta,
            gamma_estimate: None,
            monotonicity_constant: None,
        })
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TraceOptions {
    /// Sample angles on each circle (midpoint rule; staggered off the slit).
    pub angles: usize,
    /// Minimum mesh layers strictly inside the smallest radius.
    pub min_layers: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { angles: 256, min_layers: 8 }
    }
}

/// `(H, E, N)` along the given radii for a discrete field.
///
/// `H` comes from a midpoint-angle circle quadrature of the interpolated
/// field; `E` from exact per-triangle integration with triangles straddling
/// `∂B_r` clipped against the disk (arcs refined by chords).
pub fn compute_trace(
    mesh: &SlitMesh,
    field: &Field,
    geom: &CrackGeometry,
    f: &Potential,
    radii: &[f64],
    opts: &TraceOptions,
) -> Result<FrequencyTrace> {
    if mesh.dim != 2 || geom.dimension() != 2 {
        return Err(Error::InvalidArgument("frequency traces are computed on slit disks".into()));
    }
    if field.values.len() != mesh.vertex_count() {
        return Err(Error::InvalidArgument("field/mesh size mismatch".into()));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) || radii.is_empty() {
        return Err(Error::InvalidArgument("radii must be a nonempty increasing list".into()));
    }
    let r_min = radii[0];
    let layers = mesh.layers_inside(r_min);
    if layers < opts.min_layers {
        return Err(Error::RadiusTooSmall { radius: r_min, layers, need: opts.min_layers });
    }
    let locator = mesh.locator();
    let grads = crate::fem::triangle_gradients(mesh, field);

    let samples: Vec<Result<(f64, f64)>> = radii
        .par_iter()
        .map(|&r| {
            let h = circle_h(mesh, field, geom, &locator, r, opts.angles)?;
            let e = disk_energy(mesh, field, geom, f, &grads, r)?;
            Ok((h, e))
        })
        .collect();

    let mut h_vals = Vec::with_capacity(radii.len());
    let mut e_vals = Vec::with_capacity(radii.len());
    for (sample, &r) in samples.into_iter().zip(radii) {
        let (h, e) = sample?;
        if !(h > 0.0) {
            return Err(Error::HNotPositive { radius: r, value: h });
        }
        h_vals.push(h);
        e_vals.push(e);
    }
    FrequencyTrace::from_samples(2, radii.to_vec(), h_vals, e_vals, delta_exponent(2, f.epsilon))
}

/// Trace of an exact solution through the closed-form `(H, E, N)` route.
pub fn trace_from_exact(solution: &ExactSolution, radii: &[f64]) -> Result<FrequencyTrace> {
    if radii.windows(2).any(|w| w[0] >= w[1]) || radii.is_empty() {
        return Err(Error::InvalidArgument("radii must be a nonempty increasing list".into()));
    }
    let mut h_vals = Vec::with_capacity(radii.len());
    let mut e_vals = Vec::with_capacity(radii.len());
    for &r in radii {
        let (h, e, _) = solution.closed_form_hen(r)?;
        h_vals.push(h);
        e_vals.push(e);
    }
    FrequencyTrace::from_samples(2, radii.to_vec(), h_vals, e_vals, 1.0)
}

/// `δ = 4ε/(N+2ε)`, the remainder exponent of the monotonicity formula.
pub fn delta_exponent(dimension: usize, epsilon: f64) -> f64 {
    4.0 * epsilon / (dimension as f64 + 2.0 * epsilon)
}

pub(crate) fn circle_h(
    mesh: &SlitMesh,
    field: &Field,
    geom: &CrackGeometry,
    locator: &crate::slitmesh::PointLocator<'_>,
    r: f64,
    angles: usize,
) -> Result<f64> {
    let dtheta = 2.0 * std::f64::consts::PI / angles as f64;
    let mut sum = 0.0;
    for s in 0..angles {
        // staggered angles never hit the slit exactly
        let theta = (s as f64 + 0.5) * dtheta;
        let p = [r * theta.cos(), r * theta.sin()];
        let side = if theta < std::f64::consts::PI { Side::Upper } else { Side::Lower };
        let (t, bary) = locator.locate(p, side).ok_or_else(|| {
            Error::InvalidArgument(format!("circle point ({}, {}) not inside the mesh", p[0], p[1]))
        })?;
        let tri = mesh.triangles[t];
        let u: f64 = (0..3).map(|i| bary[i] * field.values[tri[i] as usize]).sum();
        let (mu, _) = geom.mu_beta(&p)?;
        sum += mu * u * u * dtheta;
    }
    // r^{1-N} ∮ μU² dS = ∫ μU² dθ for N = 2
    Ok(sum)
}

fn disk_energy(
    mesh: &SlitMesh,
    field: &Field,
    geom: &CrackGeometry,
    f: &Potential,
    grads: &[[f64; 2]],
    r: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let coords = mesh.tri_coords2(t);
        let radii: Vec<f64> = coords.iter().map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt()).collect();
        let polygon = if radii.iter().all(|&x| x <= r + 1e-15) {
            coords.to_vec()
        } else {
            let poly = clip_triangle_to_disk(coords, r);
            if poly.len() < 3 {
                continue;
            }
            poly
        };
        // fan-triangulate the clipped polygon, keep the parent's constant
        // gradient, interpolate U and f̃ at quadrature points
        let grad = grads[t];
        for w in 1..polygon.len() - 1 {
            let sub = [polygon[0], polygon[w], polygon[w + 1]];
            let area = crate::quad::tri_area(sub[0], sub[1], sub[2]);
            if area.abs() < 1e-300 {
                continue;
            }
            for &(bary, wq) in TRI3.iter() {
                let x = [
                    bary[0] * sub[0][0] + bary[1] * sub[1][0] + bary[2] * sub[2][0],
                    bary[0] * sub[0][1] + bary[1] * sub[1][1] + bary[2] * sub[2][1],
                ];
                let a = geom.matrix_a(&x);
                let agrad = [a[0] * grad[0] + a[1] * grad[1], a[2] * grad[0] + a[3] * grad[1]];
                let energy = agrad[0] * grad[0] + agrad[1] * grad[1];
                let u = interp_in_parent(mesh, field, t, x);
                let ftil = match &f.kind {
                    PotentialKind::Sampled(vals) => {
                        let pb = parent_bary(coords, x);
                        (0..3).map(|i| pb[i] * vals[tri[i] as usize]).sum()
                    }
                    _ => {
                        let fx = geom.map(&x);
                        f.eval([fx[0], fx[1]]).unwrap()
                    }
                };
                total += wq * area * (energy - ftil * u * u);
            }
        }
    }
    // r^{2-N} = 1 for N = 2
    Ok(total)
}

fn parent_bary(coords: [[f64; 2]; 3], p: [f64; 2]) -> [f64; 3] {
    let [a, b, c] = coords;
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
    let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

fn interp_in_parent(mesh: &SlitMesh, field: &Field, t: usize, p: [f64; 2]) -> f64 {
    let tri = mesh.triangles[t];
    let bary = parent_bary(mesh.tri_coords2(t), p);
    (0..3).map(|i| bary[i] * field.values[tri[i] as usize]).sum()
}

/// Intersection of a CCW triangle with the disk of radius `r`, as a polygon
/// whose circle arcs are refined by 6 chord points each (area error well
/// under 0.1% at production resolutions).
pub fn clip_triangle_to_disk(coords: [[f64; 2]; 3], r: f64) -> Vec<[f64; 2]> {
    #[derive(Clone, Copy)]
    enum Pt {
        Interior([f64; 2]),
        /// circle point with its angle; `entering` = crossing into the disk
        Circle([f64; 2], f64, bool),
    }
    let inside = |p: [f64; 2]| p[0] * p[0] + p[1] * p[1] <= r * r;
    // one chord per ≤ 0.05 rad of arc keeps the area defect below 0.1%
    let arc_points = |from: f64, span: f64, out: &mut Vec<[f64; 2]>| {
        let m = ((span / 0.05).ceil() as usize).max(2);
        for s in 1..m {
            let th = from + span * s as f64 / m as f64;
            out.push([r * th.cos(), r * th.sin()]);
        }
    };
    let mut walk: Vec<Pt> = Vec::new();
    for e in 0..3 {
        let a = coords[e];
        let b = coords[(e + 1) % 3];
        if inside(a) {
            walk.push(Pt::Interior(a));
        }
        // |a + t d|² = r²
        let d = [b[0] - a[0], b[1] - a[1]];
        let qa = d[0] * d[0] + d[1] * d[1];
        let qb = 2.0 * (a[0] * d[0] + a[1] * d[1]);
        let qc = a[0] * a[0] + a[1] * a[1] - r * r;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc <= 0.0 || qa == 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        let t1 = (-qb - sq) / (2.0 * qa);
        let t2 = (-qb + sq) / (2.0 * qa);
        for (t, entering) in [(t1, true), (t2, false)] {
            if t > 1e-12 && t < 1.0 - 1e-12 {
                let p = [a[0] + t * d[0], a[1] + t * d[1]];
                walk.push(Pt::Circle(p, p[1].atan2(p[0]), entering));
            }
        }
    }
    if walk.is_empty() {
        // either fully outside, or the disk sits strictly inside the triangle
        let bary = parent_bary(coords, [0.0, 0.0]);
        if bary.iter().all(|&b| b > 0.0) {
            let mut out = vec![[r, 0.0]];
            arc_points(0.0, 2.0 * std::f64::consts::PI, &mut out);
            return out;
        }
        return Vec::new();
    }
    let mut out: Vec<[f64; 2]> = Vec::new();
    let n = walk.len();
    for i in 0..n {
        match walk[i] {
            Pt::Interior(p) => out.push(p),
            Pt::Circle(p, ang, entering) => {
                out.push(p);
                if !entering {
                    // walking exits the disk here; the region boundary follows
                    // the arc CCW to the next entering circle point
                    let mut target = None;
                    for j in 1..=n {
                        if let Pt::Circle(_, ang2, true) = walk[(i + j) % n] {
                            target = Some(ang2);
                            break;
                        }
                    }
                    if let Some(ang2) = target {
                        let mut span = ang2 - ang;
                        while span <= 0.0 {
                            span += 2.0 * std::f64::consts::PI;
                        }
                        arc_points(ang, span, &mut out);
                    }
                }
            }
        }
    }
    out
}

/// Relative gauge `η_f(r) = ‖f‖_{L^{N/2+ε}(B_r)} · r^{4ε/(N+2ε)}` with the
/// (unknown) Sobolev constant set to 1. Useful for comparisons across radii,
/// not as an absolute smallness certificate.
pub fn eta_gauge(f: &Potential, r: f64, epsilon: f64, dimension: usize) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument("gauge radius must be positive".into()));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidArgument(format!("ε = {epsilon} outside (0, 1]")));
    }
    let n = dimension as f64;
    let p = n / 2.0 + epsilon;
    let norm = match f.kind {
        PotentialKind::Constant(c) => {
            let vol = match dimension {
                2 => std::f64::consts::PI * r * r,
                3 => 4.0 / 3.0 * std::f64::consts::PI * r * r * r,
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "gauge implemented for N ∈ {{2, 3}}, got {dimension}"
                    )))
                }
            };
            c.abs() * vol.powf(1.0 / p)
        }
        PotentialKind::RadialPower { c, epsilon: ef } => {
            let omega = match dimension {
                2 => 2.0 * std::f64::consts::PI,
                3 => 4.0 * std::f64::consts::PI,
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "gauge implemented for N ∈ {{2, 3}}, got {dimension}"
                    )))
                }
            };
            let e = (-2.0 + 2.0 * ef) * p + n - 1.0;
            if e <= -1.0 {
                return Err(Error::InvalidArgument(format!(
                    "potential |x|^{} is not L^{p}-integrable near the tip",
                    -2.0 + 2.0 * ef
                )));
            }
            (c.abs().powf(p) * omega * r.powf(e + 1.0) / (e + 1.0)).powf(1.0 / p)
        }
        PotentialKind::Sampled(_) => {
            return Err(Error::InvalidArgument(
                "the gauge of a sampled potential is not defined without a mesh".into(),
            ))
        }
    };
    Ok(norm * r.powf(delta_exponent(dimension, epsilon)))
}

/// Smallest `C ≥ 0` such that `r ↦ N(r) + C·r^δ` is nondecreasing across
/// consecutive samples within `slack`; plus the pairs still failing for that
/// `C` at slack zero.
pub fn audit_monotonicity(trace: &FrequencyTrace, slack: f64) -> (f64, Vec<(usize, usize)>) {
    let mut fitted: f64 = 0.0;
    for w in 0..trace.len().saturating_sub(1) {
        let dn = trace.n_vals[w] - trace.n_vals[w + 1];
        let dr = trace.radii[w + 1].powf(trace.delta) - trace.radii[w].powf(trace.delta);
        if dr > 0.0 {
            fitted = fitted.max((dn - slack) / dr);
        }
    }
    let mut violations = Vec::new();
    for w in 0..trace.len().saturating_sub(1) {
        let lhs = trace.n_vals[w + 1] + fitted * trace.radii[w + 1].powf(trace.delta);
        let rhs = trace.n_vals[w] + fitted * trace.radii[w].powf(trace.delta);
        // strict check up to quadrature noise
        if lhs < rhs - 1e-9 {
            violations.push((w, w + 1));
        }
    }
    (fitted, violations)
}

/// Richardson extrapolation of `N(r)` to `r = 0` assuming an `O(r^δ)`
/// remainder, on the three smallest radii; `k0 = round(2γ)`.
pub fn estimate_gamma(trace: &FrequencyTrace) -> Result<(f64, u32)> {
    if trace.len() < 3 {
        return Err(Error::InvalidArgument("γ extrapolation needs at least 3 radii".into()));
    }
    let r_max = *trace.radii.last().unwrap();
    if trace.radii[0] > r_max / 20.0 {
        return Err(Error::InvalidArgument(format!(
            "smallest radius {} must reach {} (r_max/20) for extrapolation",
            trace.radii[0],
            r_max / 20.0
        )));
    }
    let ext = |ra: f64, na: f64, rb: f64, nb: f64| -> f64 {
        // N = γ + C r^δ at two radii rb < ra
        let pa = ra.powf(trace.delta);
        let pb = rb.powf(trace.delta);
        (nb * pa - na * pb) / (pa - pb)
    };
    let gamma = ext(trace.radii[1], trace.n_vals[1], trace.radii[0], trace.n_vals[0]);
    let _upper = ext(trace.radii[2], trace.n_vals[2], trace.radii[1], trace.n_vals[1]);
    let k0 = (2.0 * gamma).round();
    if (2.0 * gamma - k0).abs() > 0.1 || k0 < 0.0 {
        return Err(Error::HalfIntegerMismatch { gamma });
    }
    Ok((gamma, k0 as u32))
}

/// `sup H(r)/r^{2γ}` over the samples and the extrapolated limit at `r → 0`,
/// which must be positive.
pub fn audit_h_growth(trace: &FrequencyTrace, gamma: f64) -> Result<(f64, f64)> {
    if trace.len() < 3 {
        return Err(Error::InvalidArgument("growth audit needs at least 3 radii".into()));
    }
    let g: Vec<f64> = trace
        .radii
        .iter()
        .zip(&trace.h_vals)
        .map(|(&r, &h)| h / r.powf(2.0 * gamma))
        .collect();
    let upper_alpha = g.iter().cloned().fold(f64::MIN, f64::max);
    let pa = trace.radii[1].powf(trace.delta);
    let pb = trace.radii[0].powf(trace.delta);
    let limit = (g[0] * pa - g[1] * pb) / (pa - pb);
    if !(limit > 0.0) {
        return Err(Error::NonPositiveLimit { value: limit });
    }
    Ok((upper_alpha, limit))
}

/// Fitted doubling constant: smallest `C₁` with
/// `1/C₁ ≤ H(Tλ)/H(λ) ≤ C₁` across sample pairs with ratio `T ∈ [1, 2]`.
pub fn fitted_doubling_constant(trace: &FrequencyTrace) -> f64 {
    let mut c1: f64 = 1.0;
    for i in 0..trace.len() {
        for j in i + 1..trace.len() {
            let t = trace.radii[j] / trace.radii[i];
            if t <= 2.0 + 1e-12 {
                let ratio = trace.h_vals[j] / trace.h_vals[i];
                c1 = c1.max(ratio.max(1.0 / ratio));
            }
        }
    }
    c1
}

/// Violations of the lower bound `N(r) ≥ -2η_f(r)` (gauge with S = 1).
pub fn lower_bound_violations(trace: &FrequencyTrace, f: &Potential) -> Result<Vec<(f64, f64, f64)>> {
    let mut out = Vec::new();
    for (&r, &n) in trace.radii.iter().zip(&trace.n_vals) {
        let eta = eta_gauge(f, r, f.epsilon, trace.dimension)?;
        if n < -2.0 * eta {
            out.push((r, n, -2.0 * eta));
        }
    }
    Ok(out)
}
