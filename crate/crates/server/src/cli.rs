use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use huntboard_core::report::{emit_heuristic_rubric, generate_handover, RUBRIC_FILE_NAME};
use huntboard_core::scenario::{generate_scenario, signals_json};
use huntboard_core::store::{DataDir, FsyncPolicy};
use huntboard_core::{BoardId, EntityId};

use crate::scenario::{run_scripted_scenario, ScenarioOptions};
use crate::service::{self, ClockKind, ServiceConfig};

#[derive(Debug, Parser)]
#[command(name = "huntboard", version, about = "Collaborative investigation board for threat hunters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the board service.
    Serve(ServeArgs),
    /// Synthetic anomaly feed and scripted walkthrough.
    #[command(subcommand)]
    Scenario(ScenarioCommand),
    #[command(subcommand)]
    Export(ExportCommand),
    #[command(subcommand)]
    Emit(EmitCommand),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FsyncArg {
    EveryEvent,
    Interval,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ClockArg {
    System,
    Synthetic,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "HUNTBOARD_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, env = "HUNTBOARD_BIND", default_value = "127.0.0.1")]
    pub bind: IpAddr,
    #[arg(long, env = "HUNTBOARD_DATA_DIR")]
    pub data_dir: PathBuf,
    /// Checklist template file (TOML). Bundled templates when omitted.
    #[arg(long, env = "HUNTBOARD_TEMPLATE")]
    pub template: Option<PathBuf>,
    #[arg(long, env = "HUNTBOARD_FSYNC", value_enum, default_value_t = FsyncArg::EveryEvent)]
    pub fsync: FsyncArg,
    #[arg(long, env = "HUNTBOARD_FSYNC_INTERVAL_MS", default_value_t = 200)]
    pub fsync_interval_ms: u64,
    #[arg(long, env = "HUNTBOARD_LOG_LEVEL", default_value = "info")]
    pub log_level: String,
    /// `synthetic` gives reproducible server timestamps.
    #[arg(long, env = "HUNTBOARD_CLOCK", value_enum, default_value_t = ClockArg::System)]
    pub clock: ClockArg,
}

impl ServeArgs {
    pub fn config(&self) -> ServiceConfig {
        ServiceConfig {
            addr: SocketAddr::new(self.bind, self.port),
            data_dir: Some(self.data_dir.clone()),
            template: self.template.clone(),
            fsync: match self.fsync {
                FsyncArg::EveryEvent => FsyncPolicy::EveryEvent,
                FsyncArg::Interval => FsyncPolicy::Interval(Duration::from_millis(self.fsync_interval_ms)),
            },
            clock: match self.clock {
                ClockArg::System => ClockKind::System,
                ClockArg::Synthetic => ClockKind::Synthetic,
            },
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum ScenarioCommand {
    /// Drive the full walkthrough against a running service.
    Run {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, env = "HUNTBOARD_ENDPOINT", default_value = "http://127.0.0.1:8080")]
        endpoint: String,
        #[arg(long, default_value = "acme")]
        board: String,
    },
    /// Write the generated signal list as JSON.
    Signals {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ExportCommand {
    /// Render a handover report from the logs on disk.
    Handover {
        #[arg(long, env = "HUNTBOARD_DATA_DIR")]
        data_dir: PathBuf,
        #[arg(long)]
        board: String,
        #[arg(long)]
        storyline: String,
        #[arg(long)]
        checklist: Option<String>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum EmitCommand {
    /// Write the evaluation rubric document.
    Rubric {
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

pub fn log_level(cli: &Cli) -> &str {
    match &cli.command {
        Command::Serve(args) => &args.log_level,
        _ => "warn",
    }
}

pub async fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Serve(args) => {
            let running = service::start(args.config()).await?;
            println!("listening on {}", running.base_url());
            running
                .run_until(async {
                    let _ = tokio::signal::ctrl_c().await;
                })
                .await?;
        }
        Command::Scenario(ScenarioCommand::Run { seed, endpoint, board }) => {
            let options = ScenarioOptions { board, ..ScenarioOptions::new(seed) };
            let outcome = run_scripted_scenario(&endpoint, &options).await?;
            println!(
                "scenario complete: board={} storyline={} checklist={} seq={} steps={}",
                outcome.board, outcome.storyline_id, outcome.checklist_id, outcome.final_seq, outcome.steps
            );
        }
        Command::Scenario(ScenarioCommand::Signals { seed, out }) => {
            let doc = signals_json(&generate_scenario(seed));
            match out {
                Some(path) => std::fs::write(&path, doc + "\n").with_context(|| format!("writing {}", path.display()))?,
                None => println!("{doc}"),
            }
        }
        Command::Export(ExportCommand::Handover { data_dir, board, storyline, checklist, out_dir }) => {
            let written = export_handover(&data_dir, &board, &storyline, checklist.as_deref(), &out_dir)?;
            for path in written {
                println!("{}", path.display());
            }
        }
        Command::Emit(EmitCommand::Rubric { out_dir }) => {
            println!("{}", emit_rubric(&out_dir)?.display());
        }
    }
    Ok(())
}

/// Writes `handover-<board>-<seq>.{md,json}` into `out_dir`.
pub fn export_handover(
    data_dir: &Path,
    board: &str,
    storyline: &str,
    checklist: Option<&str>,
    out_dir: &Path,
) -> anyhow::Result<Vec<PathBuf>> {
    let board = BoardId::new(board)?;
    let storyline: EntityId = storyline.parse()?;
    let checklist: Option<EntityId> = checklist.map(str::parse).transpose()?;
    let dir = DataDir::open(data_dir, FsyncPolicy::EveryEvent)?;
    let Some(found) = dir.recover()?.into_iter().find(|b| b.meta.board_id == board) else {
        bail!("board {board} not found in {}", data_dir.display());
    };
    let state = found.state;
    let at = state.last_event_at.unwrap_or_else(huntboard_core::time::standard_start);
    let report = generate_handover(&state, storyline, checklist, at)?;
    std::fs::create_dir_all(out_dir)?;
    let md = out_dir.join(report.markdown_file_name());
    let json = out_dir.join(report.json_file_name());
    std::fs::write(&md, report.to_markdown())?;
    std::fs::write(&json, report.to_json() + "\n")?;
    Ok(vec![md, json])
}

pub fn emit_rubric(out_dir: &Path) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(RUBRIC_FILE_NAME);
    std::fs::write(&path, emit_heuristic_rubric() + "\n")?;
    Ok(path)
}
