//! Stage pipelines behind the subcommands. Every run writes its artifacts
//! plus a manifest with config hash, per-stage timings, audit results and
//! per-file digests. Identical configs produce bit-identical numeric tables.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use serde::{Deserialize, Serialize};

use cracktip::blowup::{
    alpha_coefficients, parseval_partial_sums, verify_blowup, BlowupOptions, PhiCombo, USource,
};
use cracktip::exact::ExactSolution;
use cracktip::fem::{
    assemble, boundary_map, solve_dirichlet, AssembleOptions, Field, HypothesisClass, Potential,
};
use cracktip::frequency::{
    audit_h_growth, audit_monotonicity, compute_trace, estimate_gamma, eta_gauge,
    fitted_doubling_constant, lower_bound_violations, trace_from_exact, FrequencyTrace,
};
use cracktip::geometry::{CrackGeometry, CrackProfile};
use cracktip::io as ctio;
use cracktip::slitmesh::{make_slit_disk, make_slit_sphere, SlitMesh};
use cracktip::spectrum::{basis_circle, cluster_report, eigensolve_slit_sphere, EigenFn};

use crate::config::{RunConfig, Scenario};
use crate::manifest::{write_error_record, Manifest, SolverStats};

pub struct RunContext {
    pub config: RunConfig,
    pub config_text: String,
    pub out_dir: PathBuf,
}

impl RunContext {
    /// Parse the config file first; the output directory is only created for
    /// valid configurations, so malformed input leaves no partial artifacts.
    pub fn prepare(config_path: &Path, out_dir: &Path) -> anyhow::Result<Self> {
        let config_text = std::fs::read_to_string(config_path)
            .with_context(|| format!("reading {}", config_path.display()))?;
        let config = RunConfig::from_toml(&config_text).map_err(|e| anyhow!("config: {e}"))?;
        std::fs::create_dir_all(out_dir)?;
        Ok(RunContext { config, config_text, out_dir: out_dir.to_path_buf() })
    }
}

/// Scalar results of a run, exported as `summary.json`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k0: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monotonicity_constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doubling_constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_limit: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub alpha: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_spread: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_slope: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub eigenvalues: Vec<f64>,
    pub all_checks_pass: bool,
}

/// How deep the pipeline runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Depth {
    Solve,
    Frequency,
    Blowup,
}

struct VolumeState {
    mesh: SlitMesh,
    field: Field,
    potential: Potential,
    exact: Option<ExactSolution>,
    solver: Option<SolverStats>,
}

fn flat_geom(radius: f64) -> CrackGeometry {
    CrackGeometry::build(CrackProfile::half_line(), 10.0 * radius.max(1.0)).unwrap()
}

fn exact_solution(cfg: &RunConfig) -> ExactSolution {
    match cfg.scenario {
        Scenario::ExactHarmonic => {
            ExactSolution::CrackHarmonic { k: cfg.k, amplitude: cfg.amplitude }
        }
        Scenario::ExactBessel => ExactSolution::BesselMode {
            k: cfg.k,
            lambda: cfg.potential.c,
            amplitude: cfg.amplitude,
        },
        _ => unreachable!("exact_solution only for exact scenarios"),
    }
}

fn volume_stage(ctx: &RunContext, manifest: &mut Manifest) -> anyhow::Result<VolumeState> {
    let cfg = &ctx.config;
    let geom = flat_geom(cfg.mesh.radius);
    let t0 = Instant::now();
    let mesh = make_slit_disk(
        cfg.mesh.radius,
        cfg.mesh.levels,
        cfg.mesh.grading_ratio,
        cfg.mesh.base_resolution,
    )?;
    manifest.stage("mesh", t0.elapsed().as_millis());

    let t0 = Instant::now();
    let state = match cfg.scenario {
        Scenario::ExactHarmonic | Scenario::ExactBessel => {
            let sol = exact_solution(cfg);
            let field = Field::interpolate(&mesh, |p, s| sol.value(p, s))?;
            let potential = sol.potential();
            VolumeState { mesh, field, potential, exact: Some(sol), solver: None }
        }
        Scenario::FemConstantPotential | Scenario::FemRadialPotential => {
            let potential = match cfg.scenario {
                Scenario::FemConstantPotential => {
                    Potential::constant(cfg.potential.c, HypothesisClass::H1, cfg.potential.epsilon)
                }
                _ => Potential::radial_power(cfg.potential.c, cfg.potential.epsilon)?,
            };
            let opts = AssembleOptions { tip_aware_quadrature: true };
            let (k, m) = assemble(&mesh, &geom, &potential, &opts)?;
            // manufactured Dirichlet data: the Bessel mode of the constant
            // potential, or the k = 1 crack harmonic otherwise
            let data: Box<dyn Fn([f64; 2], cracktip::Side) -> f64> = match cfg.scenario {
                Scenario::FemConstantPotential if cfg.potential.c > 0.0 => {
                    let sol = ExactSolution::BesselMode {
                        k: cfg.k,
                        lambda: cfg.potential.c,
                        amplitude: cfg.amplitude,
                    };
                    Box::new(move |p, s| sol.value(p, s))
                }
                _ => {
                    let sol =
                        ExactSolution::CrackHarmonic { k: cfg.k.max(1), amplitude: cfg.amplitude };
                    Box::new(move |p, s| sol.value(p, s))
                }
            };
            let bc = boundary_map(&mesh, data);
            let (field, stats) = solve_dirichlet(&mesh, &k, &m, &bc)?;
            VolumeState {
                mesh,
                field,
                potential,
                exact: None,
                solver: Some(SolverStats {
                    iterations: stats.iterations,
                    residual: stats.residual,
                    free_dofs: stats.free_dofs,
                }),
            }
        }
        Scenario::SphereSpectrum => bail!("volume stage does not apply to sphere_spectrum"),
    };
    manifest.stage("solve", t0.elapsed().as_millis());
    Ok(state)
}

fn frequency_stage(
    ctx: &RunContext,
    state: &VolumeState,
    manifest: &mut Manifest,
    summary: &mut Summary,
) -> anyhow::Result<FrequencyTrace> {
    let cfg = &ctx.config;
    let t0 = Instant::now();
    let radii = cfg.trace_radii();
    let trace = match &state.exact {
        Some(sol) => trace_from_exact(sol, &radii)?,
        None => compute_trace(
            &state.mesh,
            &state.field,
            &flat_geom(cfg.mesh.radius),
            &state.potential,
            &radii,
            &Default::default(),
        )?,
    };
    manifest.check("h_positive", true, "H(r) > 0 at all sampled radii".into());

    let (gamma, k0) = estimate_gamma(&trace)?;
    summary.gamma = Some(gamma);
    summary.k0 = Some(k0);
    manifest.check(
        "gamma_half_integer",
        (2.0 * gamma - k0 as f64).abs() <= 0.1,
        format!("γ = {gamma:.6}, k0 = {k0}"),
    );

    let slack = cfg.tolerances.monotonicity_slack;
    let (fitted_c, _) = audit_monotonicity(&trace, slack);
    let beyond_slack = (0..trace.len() - 1)
        .filter(|&w| {
            let lhs = trace.n_vals[w + 1] + fitted_c * trace.radii[w + 1].powf(trace.delta);
            let rhs = trace.n_vals[w] + fitted_c * trace.radii[w].powf(trace.delta);
            // the argmax pair sits exactly on the slack boundary
            lhs < rhs - slack - 1e-12
        })
        .count();
    summary.monotonicity_constant = Some(fitted_c);
    manifest.check(
        "monotonicity",
        fitted_c.is_finite() && beyond_slack == 0,
        format!("fitted C = {fitted_c:.4}, violations beyond slack: {beyond_slack}"),
    );

    let (upper_alpha, limit) = audit_h_growth(&trace, gamma)?;
    summary.h_limit = Some(limit);
    manifest.check(
        "h_growth",
        limit > 0.0 && upper_alpha.is_finite(),
        format!("sup H/r^2γ = {upper_alpha:.4e}, limit = {limit:.4e} > 0"),
    );

    let c1 = fitted_doubling_constant(&trace);
    summary.doubling_constant = Some(c1);
    manifest.check("doubling", c1.is_finite(), format!("C₁ = {c1:.4}"));

    let violations = lower_bound_violations(&trace, &state.potential)?;
    manifest.check(
        "frequency_lower_bound",
        violations.is_empty(),
        format!("N(r) ≥ -2η(r) violations: {}", violations.len()),
    );

    let eta = eta_gauge(
        &state.potential,
        *radii.last().unwrap(),
        state.potential.epsilon,
        2,
    )?;
    manifest.check("eta_gauge_finite", eta.is_finite(), format!("η(R) = {eta:.4e} (S = 1 gauge)"));

    manifest.stage("frequency", t0.elapsed().as_millis());
    Ok(trace)
}

fn blowup_stage(
    ctx: &RunContext,
    state: &VolumeState,
    trace: &FrequencyTrace,
    manifest: &mut Manifest,
    summary: &mut Summary,
) -> anyhow::Result<String> {
    let cfg = &ctx.config;
    let t0 = Instant::now();
    let geom = flat_geom(cfg.mesh.radius);
    let basis = basis_circle(8);
    let k0 = summary.k0.expect("frequency stage ran first");

    let source = match &state.exact {
        Some(sol) => USource::exact(sol, cfg.mesh.radius),
        None => USource::fem(&state.mesh, &state.field),
    };
    // α at three mid radii of the trace
    let n = trace.radii.len();
    let r_list = [trace.radii[n / 3], trace.radii[n / 2], trace.radii[2 * n / 3]];
    let rep = alpha_coefficients(&source, &geom, &state.potential, &basis, k0, &r_list)?;
    summary.alpha = rep.alphas.iter().map(|&(a, _)| a).collect();
    summary.alpha_spread = rep.alphas.iter().map(|&(_, s)| s).fold(None, |acc: Option<f64>, s| {
        Some(acc.map_or(s, |a| a.max(s)))
    });
    manifest.check("alpha_nonzero", rep.nonzero, format!("α = {:?}", summary.alpha));
    manifest.check(
        "alpha_forms_agree",
        rep.form_defect <= 1e-8 * (1.0 + summary.alpha[0].abs()),
        format!("two-form defect {:.2e}", rep.form_defect),
    );

    let phi = PhiCombo { k0, alphas: summary.alpha.clone() };
    let lambdas = cfg.lambda_schedule();
    let opts = BlowupOptions { tolerate_floor: true, ..Default::default() };
    let rep = verify_blowup(&source, &geom, &state.potential, &basis, k0, &phi, &lambdas, &opts)?;
    summary.decay_slope = Some(rep.decay_slope);
    // homogeneous inputs land on the quadrature floor immediately: the
    // decreasing-error contract is vacuous there
    let err_scale = summary.alpha.iter().fold(1.0f64, |m, a| m.max(a.abs()));
    let at_floor = rep.value_errors.iter().all(|&e| e <= 1e-9 * err_scale);
    let initial_decay = rep.value_errors[1] < rep.value_errors[0];
    let (pass, detail) = if at_floor {
        (true, "errors at the quadrature floor (homogeneous input)".to_string())
    } else if state.exact.is_some() {
        (
            rep.monotone_values && rep.monotone_gradients,
            "errors decreasing along the whole schedule".to_string(),
        )
    } else {
        let detail = match rep.first_violation {
            None => "errors decreasing along the whole schedule".to_string(),
            Some(i) => format!("discretization floor reached at λ = {}", rep.lambdas[i]),
        };
        (initial_decay, detail)
    };
    manifest.check("blowup_convergence", pass, detail);

    if state.exact.is_some() {
        let lam = trace.radii[n / 2];
        let (sums, h) = parseval_partial_sums(&source, lam, &basis, 8)?;
        let defect = (sums[8] - h).abs() / h;
        manifest.check(
            "parseval_partial_sums",
            defect <= 0.01,
            format!("Σ|φ|² at K = 8 within {:.3e} of H({lam:.3})", defect),
        );
    }

    // blowup report table
    let mut csv = String::from("lambda,value_error,gradient_error,phi_k0,upsilon_k0\n");
    for i in 0..rep.lambdas.len() {
        csv.push_str(&format!(
            "{:?},{:?},{:?},{:?},{:?}\n",
            rep.lambdas[i],
            rep.value_errors[i],
            rep.gradient_errors[i],
            rep.phi_samples[i].1,
            rep.upsilon_samples[i].1,
        ));
    }
    manifest.stage("blowup", t0.elapsed().as_millis());
    Ok(csv)
}

/// Volume pipeline (every scenario except sphere_spectrum) to the given
/// depth; returns the summary.
pub fn run_volume(ctx: &RunContext, depth: Depth) -> anyhow::Result<Summary> {
    let cfg = &ctx.config;
    let mut manifest = Manifest::new(cfg.scenario.name(), &ctx.config_text);
    let mut summary = Summary { scenario: cfg.scenario.name().to_string(), ..Default::default() };

    let result = (|| -> anyhow::Result<()> {
        let state = volume_stage(ctx, &mut manifest)?;
        manifest.solver = state.solver.clone();
        manifest.emit(&ctx.out_dir, "mesh.txt", &ctio::mesh_to_text(&state.mesh))?;
        manifest.emit(&ctx.out_dir, "field.txt", &ctio::field_to_text(&state.field))?;

        if depth >= Depth::Frequency {
            let trace = frequency_stage(ctx, &state, &mut manifest, &mut summary)?;
            let gamma = summary.gamma.unwrap();
            manifest.emit(&ctx.out_dir, "trace.csv", &ctio::trace_to_csv(&trace, gamma))?;

            if depth >= Depth::Blowup {
                let csv = blowup_stage(ctx, &state, &trace, &mut manifest, &mut summary)?;
                manifest.emit(&ctx.out_dir, "blowup_report.csv", &csv)?;
            }
        }
        Ok(())
    })();

    match result {
        Ok(()) => {
            summary.all_checks_pass = manifest.all_pass();
            manifest.emit(
                &ctx.out_dir,
                "summary.json",
                &serde_json::to_string_pretty(&summary)?,
            )?;
            manifest.write(&ctx.out_dir)?;
            if !summary.all_checks_pass {
                bail!("run completed with failing checks; see run_manifest.json");
            }
            Ok(summary)
        }
        Err(e) => {
            write_error_record(&ctx.out_dir, "volume_pipeline", &format!("{e:#}"));
            Err(e)
        }
    }
}

/// Sphere-spectrum pipeline.
pub fn run_spectrum(ctx: &RunContext) -> anyhow::Result<Summary> {
    let cfg = &ctx.config;
    let mut manifest = Manifest::new(cfg.scenario.name(), &ctx.config_text);
    let mut summary = Summary { scenario: cfg.scenario.name().to_string(), ..Default::default() };

    let result = (|| -> anyhow::Result<()> {
        let t0 = Instant::now();
        let mesh = make_slit_sphere(cfg.mesh.resolution)?;
        manifest.stage("mesh", t0.elapsed().as_millis());
        manifest.emit(&ctx.out_dir, "mesh.txt", &ctio::mesh_to_text(&mesh))?;

        let t0 = Instant::now();
        let basis = eigensolve_slit_sphere(&mesh, cfg.schedule.eigenpairs)?;
        manifest.stage("eigensolve", t0.elapsed().as_millis());

        summary.eigenvalues = basis.entries.iter().map(|e| e.mu).collect();
        let rows_csv: Vec<(u32, f64, f64)> =
            basis.entries.iter().map(|e| (e.k, e.mu, e.residual)).collect();
        manifest.emit(&ctx.out_dir, "eigenvalues.csv", &ctio::eigen_table_to_csv(&rows_csv))?;

        let worst_res = basis.entries.iter().map(|e| e.residual).fold(0.0f64, f64::max);
        manifest.check(
            "eigen_residuals",
            worst_res <= 1e-10,
            format!("worst pencil residual {worst_res:.2e}"),
        );

        let rows = cluster_report(&summary.eigenvalues, 3);
        let tol = if cfg.mesh.resolution >= 64 { 0.03 } else { 0.05 };
        let mut worst_dev: f64 = 0.0;
        for row in rows.iter().filter(|r| r.k >= 1 && r.k <= 4) {
            worst_dev = worst_dev.max(row.deviation);
        }
        let mut cluster_csv = String::from("k,count,mean,formula,deviation\n");
        for row in &rows {
            cluster_csv.push_str(&format!(
                "{},{},{:?},{:?},{:?}\n",
                row.k, row.count, row.mean, row.formula, row.deviation
            ));
        }
        manifest.emit(&ctx.out_dir, "clusters.csv", &cluster_csv)?;
        manifest.check(
            "spectrum_formula",
            worst_dev <= tol,
            format!("worst cluster deviation {:.3}% (tol {:.0}%)", worst_dev * 100.0, tol * 100.0),
        );

        let mut nonvanishing = String::from("index,k,trace_norm\n");
        let mut min_norm = f64::MAX;
        for (i, e) in basis.entries.iter().enumerate() {
            if let EigenFn::Mesh(field) = &e.eigenfunction {
                let tn = cracktip::spectrum::trace_nonvanishing_check(&mesh, field)?;
                min_norm = min_norm.min(tn);
                nonvanishing.push_str(&format!("{i},{},{tn:?}\n", e.k));
                manifest.emit(&ctx.out_dir, &format!("eigvec_{i:03}.txt"), &ctio::field_to_text(field))?;
            }
        }
        manifest.emit(&ctx.out_dir, "nonvanishing.csv", &nonvanishing)?;
        manifest.check(
            "trace_nonvanishing",
            min_norm > 0.0,
            format!("smallest side-trace norm {min_norm:.4}"),
        );
        Ok(())
    })();

    match result {
        Ok(()) => {
            summary.all_checks_pass = manifest.all_pass();
            manifest.emit(&ctx.out_dir, "summary.json", &serde_json::to_string_pretty(&summary)?)?;
            manifest.write(&ctx.out_dir)?;
            if !summary.all_checks_pass {
                bail!("run completed with failing checks; see run_manifest.json");
            }
            Ok(summary)
        }
        Err(e) => {
            write_error_record(&ctx.out_dir, "spectrum_pipeline", &format!("{e:#}"));
            Err(e)
        }
    }
}

// ---------------------------------------------------------------------------
// compare and validate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct DiffReport {
    pub scenario: String,
    /// (metric, relative difference)
    pub diffs: Vec<(String, f64)>,
    pub max_diff: f64,
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Per-metric relative differences between two completed runs of the same
/// scenario (used for refinement studies).
pub fn compare_runs(dir_a: &Path, dir_b: &Path) -> anyhow::Result<DiffReport> {
    let ma = Manifest::load(dir_a)?;
    let mb = Manifest::load(dir_b)?;
    if ma.scenario != mb.scenario {
        return Err(cracktip::Error::ScenarioMismatch { a: ma.scenario, b: mb.scenario }.into());
    }
    let mut diffs: Vec<(String, f64)> = Vec::new();

    let ta = dir_a.join("trace.csv");
    let tb = dir_b.join("trace.csv");
    if ta.exists() && tb.exists() {
        let ra = ctio::trace_from_csv(&std::fs::read_to_string(&ta)?)?;
        let rb = ctio::trace_from_csv(&std::fs::read_to_string(&tb)?)?;
        if ra.len() != rb.len() {
            bail!("trace tables have different lengths");
        }
        for (col, name) in [(1usize, "trace_H"), (2, "trace_E"), (3, "trace_N")] {
            let d = ra
                .iter()
                .zip(&rb)
                .map(|(x, y)| rel_diff(x[col], y[col]))
                .fold(0.0f64, f64::max);
            diffs.push((name.to_string(), d));
        }
    }

    let sa = dir_a.join("summary.json");
    let sb = dir_b.join("summary.json");
    if sa.exists() && sb.exists() {
        let xa: Summary = serde_json::from_str(&std::fs::read_to_string(&sa)?)?;
        let xb: Summary = serde_json::from_str(&std::fs::read_to_string(&sb)?)?;
        if let (Some(a), Some(b)) = (xa.gamma, xb.gamma) {
            diffs.push(("gamma".into(), rel_diff(a, b)));
        }
        for (i, (a, b)) in xa.alpha.iter().zip(&xb.alpha).enumerate() {
            diffs.push((format!("alpha_{i}"), rel_diff(*a, *b)));
        }
        for (i, (a, b)) in xa.eigenvalues.iter().zip(&xb.eigenvalues).enumerate() {
            diffs.push((format!("eigenvalue_{i}"), rel_diff(*a, *b)));
        }
    }
    let max_diff = diffs.iter().map(|&(_, d)| d).fold(0.0f64, f64::max);
    Ok(DiffReport { scenario: ma.scenario, diffs, max_diff })
}

/// Verify a completed run directory: manifest digests and check outcomes.
pub fn validate_run(dir: &Path) -> anyhow::Result<()> {
    let manifest = Manifest::load(dir)?;
    let bad = manifest.verify_digests(dir)?;
    if !bad.is_empty() {
        bail!("digest mismatches: {bad:?}");
    }
    let failing: Vec<&str> = manifest
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.as_str())
        .collect();
    if !failing.is_empty() {
        bail!("failing checks: {failing:?}");
    }
    println!(
        "run ok: scenario {}, {} files verified, {} checks pass",
        manifest.scenario,
        manifest.files.len(),
        manifest.checks.len()
    );
    Ok(())
}
