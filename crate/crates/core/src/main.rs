use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use critwave::dynamics::Verdict;
use critwave::experiment::{
    run_experiment, run_quadrant_sweep, run_static_suite, ExperimentSpec, Lab, StaticOptions,
};
use critwave::spectral::{ConstantsFile, SpectralData};

/// Ground states, modulation and blow-up / scattering experiments for the
/// focusing energy-critical wave equation.
#[derive(Parser)]
#[command(name = "critwave", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for independent runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for every random choice; recorded in the outputs.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the spectral constants, optionally verifying a stored file.
    Constants {
        #[arg(long, default_value_t = 3)]
        d: usize,
        /// Stored constants file to compare against.
        #[arg(long)]
        verify: Option<PathBuf>,
    },
    /// Run the static check suite.
    Static {
        /// Override the radial node count of the ground-state checks.
        #[arg(long)]
        grid_n: Option<usize>,
        /// Uniform spacing for the ground-state checks.
        #[arg(long)]
        uniform: bool,
        /// Stored constants file to compare against.
        #[arg(long)]
        constants: Option<PathBuf>,
    },
    /// Evolve a single experiment in both time directions.
    Evolve,
    /// Run the four-quadrant sweep.
    Quadrant {
        /// Amplitudes, overriding the configuration.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        /// Number of randomly perturbed variants.
        #[arg(long)]
        perturbed: Option<usize>,
    },
}

const EXIT_UNDETERMINED: u8 = 2;
const EXIT_FAILURE: u8 = 3;

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")
        .with_context(|| format!("writing {}", path.display()))
}

fn load_spec(common: &Common, default_name: &str) -> Result<ExperimentSpec> {
    let mut spec = match &common.config {
        Some(path) => ExperimentSpec::load(path)?,
        None => ExperimentSpec::named(default_name),
    };
    if let Some(out) = &common.out {
        spec.out = Some(out.clone());
    }
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    Ok(spec)
}

fn constants(common: &Common, d: usize, verify: Option<&Path>) -> Result<u8> {
    let spec = SpectralData::build_default(d)?;
    let file = spec.constants();
    println!("d = {d}: k = {:.15}, a_W = {:.15}, b_W = {:.15}", file.k, file.a_w, file.b_w);
    if let Some(dir) = &common.out {
        let path = dir.join(format!("constants_d{d}.json"));
        std::fs::create_dir_all(dir)?;
        file.write(&path)?;
        println!("wrote {}", path.display());
    }
    if let Some(path) = verify {
        let stored = ConstantsFile::read(path).with_context(|| format!("reading {}", path.display()))?;
        if let Err(e) = spec.verify_against(&stored, 1e-10) {
            println!("FAIL {e}");
            return Ok(EXIT_FAILURE);
        }
        println!("matches {}", path.display());
    }
    Ok(0)
}

fn static_suite(common: &Common, grid_n: Option<usize>, uniform: bool, constants: Option<&Path>) -> Result<u8> {
    let mut opts = match &common.config {
        Some(path) => toml::from_str::<StaticOptions>(&std::fs::read_to_string(path)?)?,
        None => StaticOptions::default(),
    };
    if grid_n.is_some() {
        opts.grid_n = grid_n;
    }
    opts.grid_uniform |= uniform;
    if let Some(seed) = common.seed {
        opts.seed = seed;
    }
    let stored = constants.map(ConstantsFile::read).transpose()?;
    let report = run_static_suite(&opts, stored.as_ref())?;
    for c in &report.checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("{tag} {:<28} {:>12.4e} (tol {:.1e}) {}", c.name, c.value, c.tolerance, c.detail);
    }
    if let Some(dir) = &common.out {
        write_json(&dir.join("static_report.json"), &report)?;
    }
    Ok(if report.all_pass() { 0 } else { EXIT_FAILURE })
}

fn evolve(common: &Common) -> Result<u8> {
    if common.config.is_none() {
        bail!("evolve needs --config with an experiment recipe");
    }
    let spec = load_spec(common, "experiment")?;
    let lab = Lab::for_experiment(&spec)?;
    let outcome = run_experiment(&lab, &spec)?;
    let rec = &outcome.record;
    println!(
        "{}: backward {}, forward {}, ejection rate {}",
        outcome.name,
        rec.verdict_backward,
        rec.verdict_forward,
        rec.ejection_rate_fit.map_or("n/a".into(), |r| format!("{r:.5} (k = {:.5})", lab.spec.k))
    );
    let undetermined = [rec.verdict_backward, rec.verdict_forward].contains(&Verdict::Undetermined);
    Ok(if undetermined { EXIT_UNDETERMINED } else { 0 })
}

fn quadrant(common: &Common, eps: Option<Vec<f64>>, perturbed: Option<usize>) -> Result<u8> {
    let mut spec = load_spec(common, "quadrant")?;
    if let Some(eps) = eps {
        spec.sweep.eps = eps;
    }
    if let Some(n) = perturbed {
        spec.sweep.perturbed = n;
    }
    let lab = Lab::for_experiment(&spec)?;
    let table = run_quadrant_sweep(&lab, &spec)?;
    let tol = spec.sweep.linear_tolerance;
    let mut failed = false;
    for r in &table.rows {
        let linear_ok = r.linear_deviation.is_nan() || r.linear_deviation <= tol;
        let ok = r.matches() && linear_ok && !r.one_pass_violation;
        failed |= !ok && !r.undetermined();
        println!(
            "a = ({:+},{:+}) eps = {:.0e} v{:<2} backward {:<12} forward {:<12} rate {:<9} linear {:.3e} {}",
            r.a1,
            r.a2,
            r.eps,
            r.variant,
            r.verdict_backward.to_string(),
            r.verdict_forward.to_string(),
            r.ejection_rate.map_or("n/a".into(), |v| format!("{v:.5}")),
            r.linear_deviation,
            if ok { "ok" } else { "MISMATCH" }
        );
    }
    Ok(if failed {
        EXIT_FAILURE
    } else if table.undetermined() > 0 {
        EXIT_UNDETERMINED
    } else {
        0
    })
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let code = match &cli.command {
        Command::Constants { d, verify } => constants(&cli.common, *d, verify.as_deref())?,
        Command::Static {
            grid_n,
            uniform,
            constants,
        } => static_suite(&cli.common, *grid_n, *uniform, constants.as_deref())?,
        Command::Evolve => evolve(&cli.common)?,
        Command::Quadrant { eps, perturbed } => quadrant(&cli.common, eps.clone(), *perturbed)?,
    };
    Ok(ExitCode::from(code))
}
