//! Quadrature kernels: adaptive Simpson on intervals, fixed triangle rules,
//! Gauss–Legendre panels, and graded geometric panels for integrable endpoint
//! singularities.

/// Adaptive Simpson with absolute tolerance.
///
/// The integrand is assumed finite on `[a, b]`. Recursion depth is capped at
/// 48 bisections, deep enough for `r^{-1+δ}`-type integrands at tolerance
/// 1e-12 on unit-scale intervals.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // forcing the first subdivisions defeats aliasing on integrands whose
    // oscillation matches the dyadic sample pattern
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48, 4)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    forced: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || (forced == 0 && delta.abs() <= 15.0 * tol) {
        left + right + delta / 15.0
    } else {
        let fnext = forced.saturating_sub(1);
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, fnext)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, fnext)
    }
}

/// 8-point Gauss–Legendre nodes and weights on [-1, 1].
pub const GAUSS8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

/// ∫_a^b f by a single 8-point Gauss panel.
pub fn gauss8(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    GAUSS8.iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

/// ∫_0^r f(s) ds for an integrand with an integrable singularity at 0
/// (behaviour `s^{-1+δ}`, δ > 0).
///
/// Geometric panels `[r/2^{j+1}, r/2^j]` accumulate toward the origin, each
/// integrated by an 8-point Gauss rule. Once panel sums decay geometrically,
/// the remaining tail is estimated by Richardson extrapolation of the ratio.
pub fn graded_panels(f: &dyn Fn(f64) -> f64, r: f64, rel_tol: f64) -> f64 {
    assert!(r > 0.0, "graded_panels needs r > 0");
    let mut total = 0.0;
    let mut prev_panel = f64::NAN;
    let mut prev_rho = f64::NAN;
    let mut last_rho = f64::NAN;
    let mut hi = r;
    for j in 0..200 {
        let lo = 0.5 * hi;
        let panel = gauss8(f, lo, hi);
        total += panel;
        if prev_panel.is_finite() && prev_panel.abs() > 0.0 {
            let rho = panel / prev_panel;
            last_rho = rho;
            let small = panel.abs() <= rel_tol * total.abs().max(f64::MIN_POSITIVE);
            // for power-law integrands the panel sums are exactly geometric,
            // so a stabilized ratio makes the tail sum exact
            let stable = j >= 4
                && prev_rho.is_finite()
                && (rho - prev_rho).abs() <= 1e-9 * (1.0 + rho.abs());
            if rho.abs() < 0.9999 && (small || stable) {
                total += panel * rho / (1.0 - rho);
                return total;
            }
            prev_rho = rho;
        }
        prev_panel = panel;
        hi = lo;
        if hi < f64::MIN_POSITIVE * 1e10 {
            break;
        }
    }
    if last_rho.is_finite() && last_rho.abs() < 0.9999 && prev_panel.is_finite() {
        total += prev_panel * last_rho / (1.0 - last_rho);
    }
    total
}

/// Midedge 3-point triangle rule (degree 2): barycentric points and weights.
pub const TRI3: [([f64; 3], f64); 3] = [
    ([0.5, 0.5, 0.0], 1.0 / 3.0),
    ([0.0, 0.5, 0.5], 1.0 / 3.0),
    ([0.5, 0.0, 0.5], 1.0 / 3.0),
];

/// 7-point triangle rule (degree 5), all points interior.
pub const TRI7: [([f64; 3], f64); 7] = [
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
    (
        [0.059_715_871_789_77, 0.470_142_064_105_115, 0.470_142_064_105_115],
        0.132_394_152_788_506,
    ),
    (
        [0.470_142_064_105_115, 0.059_715_871_789_77, 0.470_142_064_105_115],
        0.132_394_152_788_506,
    ),
    (
        [0.470_142_064_105_115, 0.470_142_064_105_115, 0.059_715_871_789_77],
        0.132_394_152_788_506,
    ),
    (
        [0.797_426_985_353_087, 0.101_286_507_323_456, 0.101_286_507_323_456],
        0.125_939_180_544_827,
    ),
    (
        [0.101_286_507_323_456, 0.797_426_985_353_087, 0.101_286_507_323_456],
        0.125_939_180_544_827,
    ),
    (
        [0.101_286_507_323_456, 0.101_286_507_323_456, 0.797_426_985_353_087],
        0.125_939_180_544_827,
    ),
];

/// Signed area of triangle (a, b, c) in the plane.
pub fn tri_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}
