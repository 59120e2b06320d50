//! `refrac` — design and verify particle-embedded refraction materials from
//! JSON scenario configs.

mod config;
mod pipeline;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use pipeline::{Ctx, Mode};

#[derive(Parser)]
#[command(name = "refrac", version, about = "Material design by small impedance particles")]
struct Cli {
    /// Scenario config (JSON); required by every subcommand except `capacitance`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Placement seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (overrides the config; default "out").
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Continuum solver kernel.
    #[arg(long, global = true, value_enum, default_value_t = Mode::FreeKernel)]
    mode: Mode,

    /// Worker threads for the linear algebra (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the particle recipe (density, impedance) for the target.
    Design,
    /// Place particles, solve the many-body system, export the solution.
    Simulate {
        /// Target particle count; the radius follows from the recipe.
        #[arg(long)]
        m: Option<usize>,
        /// Particle radius (alternative to --m).
        #[arg(long)]
        radius: Option<f64>,
        /// Import a particle configuration instead of placing one.
        #[arg(long)]
        particles: Option<PathBuf>,
    },
    /// Solve the limiting volume integral equation.
    Continuum,
    /// Run a particle-count schedule and compare against the continuum limit.
    Converge,
    /// Capacitance of a mesh, or an icosphere refinement study.
    Capacitance {
        /// Surface mesh (OFF or STL) to evaluate.
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// Icosphere refinement levels for the study (ignored with --mesh).
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// Ball radius for the study (ignored with --mesh).
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Run the oracle/consistency checks for the scenario.
    Validate {
        /// Also check this recipe file against the scenario target.
        #[arg(long)]
        recipe: Option<PathBuf>,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    if let Some(n) = cli.threads {
        // OpenBLAS reads its thread count at first use; rayon's global pool
        // can only be sized before anything touches it.
        std::env::set_var("OPENBLAS_NUM_THREADS", n.to_string());
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }

    let ctx = Ctx {
        config: cli.config,
        seed: cli.seed,
        out: cli.out,
        mode: cli.mode,
    };

    let outcome = match &cli.command {
        Command::Design => pipeline::cmd_design(&ctx),
        Command::Simulate { m, radius, particles } => {
            pipeline::cmd_simulate(&ctx, *m, *radius, particles.as_deref())
        }
        Command::Continuum => pipeline::cmd_continuum(&ctx),
        Command::Converge => pipeline::cmd_converge(&ctx),
        Command::Capacitance { mesh, levels, radius } => {
            pipeline::cmd_capacitance(&ctx, mesh.as_deref(), *levels, *radius)
        }
        Command::Validate { recipe } => pipeline::cmd_validate(&ctx, recipe.as_deref()),
    };

    if let Err(f) = outcome {
        eprintln!("error: {}", f.message);
        std::process::exit(f.code);
    }
}
