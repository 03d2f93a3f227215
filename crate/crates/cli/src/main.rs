mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use vqsd_core::state::{off_diagonal_average, purity, random_density_matrix};
use vqsd_core::{
    grow_depth, train, verify_diagonalization, AnsatzKind, AnsatzParams, DensityMatrix, Error, TrainConfig,
    VerifyThresholds,
};

use crate::config::{Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "vqsd", version, about = "Variational diagonalization of density matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random density matrix (Ginibre ensemble) to a JSON file.
    GenState {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a fixed ansatz and write its history, parameters and report.
    Train(RunArgs),
    /// Grow a brick-wall circuit until the objective stops improving.
    DepthSweep(RunArgs),
    /// Check how well a parameter file diagonalizes a state.
    Verify {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        params: PathBuf,
        /// Output directory for the report files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = VerifyThresholds::default().eigenvalue_gap)]
        eigenvalue_gap: f64,
        #[arg(long, default_value_t = VerifyThresholds::default().off_diagonal_average)]
        off_diagonal: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// One of fig2, fig3, fig4, app-depth-sweep.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shots: Option<u64>,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig> {
        config::load(
            self.config.as_deref(),
            &Overrides {
                preset: self.preset.clone(),
                out: self.out.clone(),
                seed: self.seed,
                shots: self.shots,
            },
        )
    }
}

/// Outcome of a command that ran to completion.
enum Status {
    Ok,
    Failed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::GenState { n, rank, seed, out } => gen_state(n, rank, seed, &out),
        Command::Train(args) => args.load().and_then(|run| cmd_train(&run)),
        Command::DepthSweep(args) => args.load().and_then(|run| cmd_depth_sweep(&run)),
        Command::Verify {
            state,
            params,
            out,
            eigenvalue_gap,
            off_diagonal,
        } => cmd_verify(
            &state,
            &params,
            &out,
            VerifyThresholds {
                eigenvalue_gap,
                off_diagonal_average: off_diagonal,
            },
        ),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn gen_state(n: usize, rank: usize, seed: u64, out: &Path) -> Result<Status> {
    let rho = random_density_matrix(n, rank, seed)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    write_json(out, &rho)?;
    println!("purity: {:.12}", purity(&rho));
    println!("off_diagonal_average: {:.12e}", off_diagonal_average(&rho));
    Ok(Status::Ok)
}

fn stem(run: &RunConfig, n: usize, blocks: &str) -> String {
    let t = &run.train;
    format!(
        "{}_n{}_{}_{}_m{}_seed{}",
        run.name, n, t.objective, t.ansatz, blocks, t.seed
    )
}

fn block_label(train: &TrainConfig) -> String {
    match train.ansatz {
        AnsatzKind::UniversalPauli => "0".into(),
        AnsatzKind::BrickWall => train.blocks.to_string(),
    }
}

fn prepare_out_dir(run: &RunConfig) -> Result<()> {
    fs::create_dir_all(&run.out_dir).with_context(|| format!("creating output directory {}", run.out_dir.display()))
}

fn cmd_train(run: &RunConfig) -> Result<Status> {
    prepare_out_dir(run)?;
    let rho = run.train.state.load()?;
    let n = rho.n_qubits();
    let outcome = match train(&run.train) {
        Err(Error::Aborted { epoch, partial }) => {
            let base = run.out_dir.join(stem(run, n, &block_label(&run.train)));
            write_text(&base.with_extension("aborted.csv"), &partial.to_csv(run.train.record_wall_clock))?;
            anyhow::bail!("training aborted at epoch {epoch}: objective became non-finite");
        }
        other => other?,
    };
    let report = verify_diagonalization(&rho, &outcome.params, run.verify)?;
    let base = run.out_dir.join(stem(run, n, &block_label(&run.train)));
    let path = |suffix: &str| PathBuf::from(format!("{}_{suffix}", base.display()));

    write_text(&path("record.csv"), &outcome.record.to_csv(run.train.record_wall_clock))?;
    write_json(&path("summary.json"), &serde_json::json!({ "config": run, "record": outcome.record }))?;
    write_json(&path("params.json"), &outcome.params)?;
    write_json(&path("evolved.json"), &outcome.evolved)?;
    write_text(&path("report.txt"), &report.to_text())?;
    write_json(&path("report.json"), &report)?;

    let record = &outcome.record;
    println!(
        "epochs: {}  converged: {}  best objective ({}): {:.12}",
        record.epochs_run,
        record.converged,
        run.train.objective,
        record.best_objective
    );
    print!("{}", report.to_text());
    println!("outputs: {}_*", base.display());
    Ok(if record.converged && report.passed {
        Status::Ok
    } else {
        Status::Failed
    })
}

fn cmd_depth_sweep(run: &RunConfig) -> Result<Status> {
    let sweep = run.sweep.unwrap_or_default();
    prepare_out_dir(run)?;
    let n = run.train.state.load()?.n_qubits();
    let result = grow_depth(&run.train, &sweep)?;
    let range = format!("{}-{}", sweep.m_start, sweep.m_max);
    let base = run.out_dir.join(stem(run, n, &range));
    write_text(&PathBuf::from(format!("{}_sweep.csv", base.display())), &result.to_csv())?;
    write_json(
        &PathBuf::from(format!("{}_sweep.json", base.display())),
        &serde_json::json!({ "config": run, "sweep": sweep, "result": result }),
    )?;
    for (row, record) in result.rows.iter().zip(&result.records) {
        let stage = run.out_dir.join(stem(run, n, &row.m.to_string()));
        write_text(
            &PathBuf::from(format!("{}_record.csv", stage.display())),
            &record.to_csv(run.train.record_wall_clock),
        )?;
    }
    print!("{}", result.to_csv());
    match result.converged_m {
        Some(m) => {
            println!("converged at m = {m}");
            Ok(Status::Ok)
        }
        None => {
            println!("not converged by m_max = {}", sweep.m_max);
            Ok(Status::Failed)
        }
    }
}

fn cmd_verify(state: &Path, params: &Path, out: &Path, thresholds: VerifyThresholds) -> Result<Status> {
    let rho: DensityMatrix = read_json(state)?;
    let params: AnsatzParams = read_json(params)?;
    let report = verify_diagonalization(&rho, &params, thresholds)?;
    fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))?;
    write_text(&out.join("verify_report.txt"), &report.to_text())?;
    write_json(&out.join("verify_report.json"), &report)?;
    print!("{}", report.to_text());
    Ok(if report.passed { Status::Ok } else { Status::Failed })
}
