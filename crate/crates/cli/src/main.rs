mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use output::{Meta, Status};

#[derive(Parser)]
#[command(name = "levy-spde", version, about = "Stochastic heat and wave equations driven by Lévy-type operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Treat inconclusive results as failures.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Existence test for the heat equation (Hawkes integral).
    Exists,
    /// Energy functionals E(λ; φ) and F(ε; φ).
    Energy,
    /// The spatial function h(r).
    H,
    /// Lower indices of Re Ψ, the energy and h.
    Indices,
    /// Integral test for a.s. continuity.
    Barlow,
    /// Gauge function checks.
    Gauge,
    /// Two-sided moment inequalities for heat and wave solutions.
    MomentsVerify,
    /// Sample the heat solution on a periodic lattice.
    SimulateHeat,
    /// Sample the wave solution on a periodic lattice.
    SimulateWave,
    /// Empirical Hölder exponents from simulated heat fields.
    HolderEmpirical,
    /// Grid maxima of the heat solution under refinement.
    SupProbe,
    /// Local-time identity for a symmetric chain on Z_N.
    MarkovIdentity,
    /// Monte Carlo checks of chain occupation moments.
    MarkovMc,
    /// Occupation densities of a Lévy process near a point.
    LevyOccupation,
    /// Transition densities on the lattice.
    Density,
    /// Picard iteration for the semilinear heat equation.
    Semilinear,
    /// Aggregate the JSON sidecars in the output directory.
    Report,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Exists => "exists",
            Command::Energy => "energy",
            Command::H => "h",
            Command::Indices => "indices",
            Command::Barlow => "barlow",
            Command::Gauge => "gauge",
            Command::MomentsVerify => "moments-verify",
            Command::SimulateHeat => "simulate-heat",
            Command::SimulateWave => "simulate-wave",
            Command::HolderEmpirical => "holder-empirical",
            Command::SupProbe => "sup-probe",
            Command::MarkovIdentity => "markov-identity",
            Command::MarkovMc => "markov-mc",
            Command::LevyOccupation => "levy-occupation",
            Command::Density => "density",
            Command::Semilinear => "semilinear",
            Command::Report => "report",
        }
    }
}

fn run(cli: &Cli) -> Result<Status, String> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    let cfg = config::load(cli.config.as_deref())?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(1);
    let start = Instant::now();
    use commands as c;
    let report = match cli.command {
        Command::Exists => c::exists(&cfg),
        Command::Energy => c::energy(&cfg),
        Command::H => c::h(&cfg),
        Command::Indices => c::indices(&cfg),
        Command::Barlow => c::barlow(&cfg),
        Command::Gauge => c::gauge(&cfg),
        Command::MomentsVerify => c::moments_verify(&cfg),
        Command::SimulateHeat => c::simulate_heat(&cfg, seed),
        Command::SimulateWave => c::simulate_wave(&cfg, seed),
        Command::HolderEmpirical => c::holder_empirical(&cfg, seed),
        Command::SupProbe => c::sup_probe(&cfg, seed),
        Command::MarkovIdentity => c::markov_identity(&cfg, seed),
        Command::MarkovMc => c::markov_mc(&cfg, seed),
        Command::LevyOccupation => c::levy_occupation(&cfg, seed),
        Command::Density => c::density(&cfg),
        Command::Semilinear => c::semilinear(&cfg, seed),
        Command::Report => c::report(&cli.out),
    }?;
    let name = cli.command.name();
    let meta = Meta {
        subcommand: name,
        config: &cfg,
        config_path: cli.config.as_deref(),
        seed,
        wall_time: start.elapsed().as_secs_f64(),
    };
    let path = output::write(&cli.out, &report, &meta)?;
    let (pass, fail, inc) = report.counts();
    for ch in report.checks.iter().filter(|ch| ch.status != Status::Pass) {
        eprintln!("{name}: {:?} {}: {}", ch.status, ch.name, ch.detail);
    }
    let status = report.status();
    println!(
        "{name}: {} ({pass} pass, {fail} fail, {inc} inconclusive) -> {}",
        serde_json::to_value(status).unwrap_or_default().as_str().unwrap_or(""),
        path.display()
    );
    Ok(status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Ok(Status::Inconclusive) => ExitCode::from(if cli.strict { 1 } else { 2 }),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
