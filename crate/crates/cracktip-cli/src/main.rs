use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cracktip_cli::config::RunConfig;
use cracktip_cli::runner::{self, Depth, RunContext};

/// Crack-tip experiments: slit-domain solves, Almgren frequency traces, the
/// spectrum on the sphere with a cut, and blow-up asymptotics.
#[derive(Parser)]
#[command(name = "cracktip", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for artifacts and the manifest.
    #[arg(long)]
    output: PathBuf,
    /// Override the mode index k.
    #[arg(long)]
    k: Option<u32>,
    /// Override the amplitude.
    #[arg(long)]
    amplitude: Option<f64>,
    /// Override the grading depth.
    #[arg(long)]
    levels: Option<u32>,
    /// Override the angular base resolution.
    #[arg(long)]
    base_resolution: Option<usize>,
    /// Override the grading ratio.
    #[arg(long)]
    grading_ratio: Option<f64>,
    /// Override the potential coefficient c.
    #[arg(long)]
    potential_c: Option<f64>,
    /// Override the hypothesis ε.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Override the sphere resolution.
    #[arg(long)]
    resolution: Option<usize>,
}

impl RunArgs {
    fn context(&self) -> anyhow::Result<RunContext> {
        let mut ctx = RunContext::prepare(&self.config, &self.output)?;
        let cfg = &mut ctx.config;
        if let Some(v) = self.k {
            cfg.k = v;
        }
        if let Some(v) = self.amplitude {
            cfg.amplitude = v;
        }
        if let Some(v) = self.levels {
            cfg.mesh.levels = v;
        }
        if let Some(v) = self.base_resolution {
            cfg.mesh.base_resolution = v;
        }
        if let Some(v) = self.grading_ratio {
            cfg.mesh.grading_ratio = v;
        }
        if let Some(v) = self.potential_c {
            cfg.potential.c = v;
        }
        if let Some(v) = self.epsilon {
            cfg.potential.epsilon = v;
        }
        if let Some(v) = self.resolution {
            cfg.mesh.resolution = v;
        }
        cfg.validate().map_err(|e| anyhow::anyhow!("config: {e}"))?;
        Ok(ctx)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Mesh and solve the scenario; write mesh and field artifacts.
    Solve(RunArgs),
    /// Solve, then compute the (H, E, N) trace with all frequency audits.
    Frequency(RunArgs),
    /// Full pipeline: solve, frequency trace, and blow-up analysis.
    Blowup(RunArgs),
    /// Slit-sphere eigensolve with cluster and trace reports.
    Spectrum(RunArgs),
    /// Validate a config file or a completed run directory.
    Validate {
        /// Run directory with a manifest to verify.
        #[arg(long, conflicts_with = "config")]
        run: Option<PathBuf>,
        /// Config file to parse and validate only.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Per-metric relative differences between two runs of one scenario.
    Compare { dir_a: PathBuf, dir_b: PathBuf },
}

fn main() -> ExitCode {
    // the only environment variable honored: worker thread count
    if let Ok(threads) = std::env::var("CRACKTIP_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Solve(args) => {
            let ctx = args.context()?;
            runner::run_volume(&ctx, Depth::Solve)?;
            println!("solve complete: artifacts in {}", ctx.out_dir.display());
        }
        Command::Frequency(args) => {
            let ctx = args.context()?;
            let summary = runner::run_volume(&ctx, Depth::Frequency)?;
            println!(
                "frequency complete: γ = {:.6}, k0 = {}, artifacts in {}",
                summary.gamma.unwrap_or(f64::NAN),
                summary.k0.map_or("-".to_string(), |k| k.to_string()),
                ctx.out_dir.display()
            );
        }
        Command::Blowup(args) => {
            let ctx = args.context()?;
            let summary = runner::run_volume(&ctx, Depth::Blowup)?;
            println!(
                "blowup complete: k0 = {}, α = {:?}, decay slope {:.2}, artifacts in {}",
                summary.k0.map_or("-".to_string(), |k| k.to_string()),
                summary.alpha,
                summary.decay_slope.unwrap_or(f64::NAN),
                ctx.out_dir.display()
            );
        }
        Command::Spectrum(args) => {
            let ctx = args.context()?;
            let summary = runner::run_spectrum(&ctx)?;
            println!(
                "spectrum complete: {} eigenvalues, artifacts in {}",
                summary.eigenvalues.len(),
                ctx.out_dir.display()
            );
        }
        Command::Validate { run, config } => match (run, config) {
            (Some(dir), None) => runner::validate_run(&dir)?,
            (None, Some(path)) => {
                let text = std::fs::read_to_string(&path)?;
                RunConfig::from_toml(&text).map_err(|e| anyhow::anyhow!("config: {e}"))?;
                println!("config ok: {}", path.display());
            }
            _ => anyhow::bail!("pass exactly one of --run or --config"),
        },
        Command::Compare { dir_a, dir_b } => {
            let report = runner::compare_runs(&dir_a, &dir_b)?;
            println!("scenario: {}", report.scenario);
            for (name, d) in &report.diffs {
                println!("{name}: {d:.6e}");
            }
            println!("max relative difference: {:.6e}", report.max_diff);
        }
    }
    Ok(())
}
