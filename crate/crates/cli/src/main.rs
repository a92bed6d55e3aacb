#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mfg_core::{run_experiment, Error, ExperimentConfig, Overrides};
use serde_json::json;

mod plot;

#[derive(Parser)]
#[command(name = "mfg", version, about = "Two-state mean field game experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by an INI config file.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// shock | paradigm | consumer
    #[arg(long)]
    model: Option<String>,
    /// nplayer | hjb | scalar | density | compare
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    n_grid: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    /// Comma-separated times, `stride:K` or `all`.
    #[arg(long)]
    snapshots: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also write SVG line plots.
    #[arg(long)]
    plot: bool,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            model: self.model.clone(),
            solver: self.solver.clone(),
            n_grid: self.n_grid,
            dt: self.dt,
            t_final: self.t_final,
            snapshots: self.snapshots.clone(),
            out_dir: self.out_dir.clone(),
            plot: self.plot.then_some(true),
        }
    }
}

fn exit_code(kind: &str) -> u8 {
    match kind {
        "config" => 2,
        "numerical" => 3,
        _ => 1,
    }
}

fn fail(kind: &str, message: impl ToString) -> ExitCode {
    eprintln!(
        "{}",
        json!({ "error": kind, "message": message.to_string() })
    );
    ExitCode::from(exit_code(kind))
}

fn run(args: &RunArgs) -> Result<serde_json::Value, Error> {
    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    cfg.apply(&args.overrides())?;
    let out = run_experiment(&cfg)?;
    let mut files = out.files;
    if cfg.plot {
        files.extend(plot::plot_outputs(&cfg, &files)?);
    }
    Ok(json!({
        "status": "ok",
        "model": cfg.model_choice().name(),
        "solver": cfg.solver.name(),
        "out_dir": cfg.out_dir.display().to_string(),
        "files": files.len(),
        "cfl_warnings": out.cfl_warnings,
    }))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or_default();
            return fail("config", first.trim_start_matches("error: "));
        }
    };
    match cli.command {
        Command::Run(args) => match run(&args) {
            Ok(summary) => {
                println!("{summary}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(e.kind(), e),
        },
    }
}
