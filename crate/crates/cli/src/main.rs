//! `deepvqe`: runs the divide-and-conquer eigensolver stage by stage or end
//! to end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use deep_vqe::pipeline::{
    block_spectrum, estimate_resources, reproduce_table1, resources_text, run_staged, table1_csv,
    table1_text, RunConfig, Stage, Table1Config,
};

#[derive(Parser)]
#[command(name = "deepvqe", version, about = "Divide-and-conquer variational eigensolver")]
struct Cli {
    /// Worker threads for parallel restarts (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Overrides the seed base of both VQE stages.
    #[arg(long)]
    seed: Option<u64>,

    /// Artifact directory; existing artifacts are reused, new ones saved.
    #[arg(long, default_value = "artifacts")]
    resume: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// First VQE on one block.
    SolveBlock(Common),
    /// Local basis and effective Hamiltonian of the chain.
    BuildEffective(Common),
    /// Second VQE on the encoded effective Hamiltonian.
    SolveEffective(Common),
    /// Reference solvers: block spectrum, effective and whole-system energies.
    Oracle(Common),
    /// All stages; writes the results document.
    Pipeline {
        #[command(flatten)]
        common: Common,
        /// Stop after this stage (solve-block, build-effective, solve-effective, oracle).
        #[arg(long)]
        stage: Option<String>,
        /// Results document path (overrides `output` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run without an artifact directory.
        #[arg(long)]
        no_artifacts: bool,
    },
    /// The 4×N Heisenberg table.
    ReproduceTable1 {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Qubit and term counts for a hierarchy of l×l blockings.
    EstimateResources {
        /// Block sides per level, e.g. `2 2 2 2`.
        #[arg(required = true)]
        plan: Vec<usize>,
        /// JSON output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_json<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

fn run_config(common: &Common) -> Result<RunConfig> {
    let cfg: RunConfig = read_json(common.config.as_deref())?;
    Ok(match common.seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run_stage(common: &Common, stage: Stage) -> Result<()> {
    let cfg = run_config(common)?;
    run_staged(&cfg, Some(&common.resume), Some(stage))?;
    let artifact = common.resume.join(stage.artifact());
    if stage == Stage::Oracle {
        let spectrum = block_spectrum(&cfg).map_err(|e| e.in_stage("oracle"))?;
        println!(
            "block ground energy {:.10} (degeneracy {})",
            spectrum.ground_energy, spectrum.degeneracy
        );
        let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&artifact)?)?;
        println!("{}", serde_json::to_string_pretty(&report)?);
    }
    println!("{}: {}", stage.name(), artifact.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::SolveBlock(c) => run_stage(&c, Stage::SolveBlock),
        Command::BuildEffective(c) => run_stage(&c, Stage::BuildEffective),
        Command::SolveEffective(c) => run_stage(&c, Stage::SolveEffective),
        Command::Oracle(c) => run_stage(&c, Stage::Oracle),
        Command::Pipeline {
            common,
            stage,
            out,
            no_artifacts,
        } => {
            let cfg = run_config(&common)?;
            let stop = stage.as_deref().map(str::parse::<Stage>).transpose()?;
            let dir = (!no_artifacts).then_some(common.resume.as_path());
            match run_staged(&cfg, dir, stop)? {
                Some(results) => {
                    print!("{}", results.to_text());
                    if let Some(path) = out.or(cfg.output) {
                        write(&path, &serde_json::to_string_pretty(&results)?)?;
                        println!("results: {}", path.display());
                    }
                }
                None => println!("stopped after {}", stop.map_or("", |s| s.name())),
            }
            Ok(())
        }
        Command::ReproduceTable1 { config, seed, out } => {
            let mut cfg: Table1Config = read_json(config.as_deref())?;
            if let Some(s) = seed {
                cfg.first_vqe.seed_base = s;
                cfg.second_vqe.seed_base = s;
            }
            let rows = reproduce_table1(&cfg)?;
            print!("{}", table1_text(&rows));
            if let Some(path) = out {
                write(&path, &table1_csv(&rows))?;
            }
            Ok(())
        }
        Command::EstimateResources { plan, out } => {
            let report = estimate_resources(&plan)?;
            print!("{}", resources_text(&report));
            if let Some(path) = out {
                write(&path, &serde_json::to_string_pretty(&report)?)?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
