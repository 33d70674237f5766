//! The `ml-quest` command line: level generation and validation, headless
//! simulation and replay, the session server, and survey reports.

pub mod protocol;
pub mod registry;
pub mod server;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use mlquest_core::levelgen::{generate, generate_campaign, validate, GenConfig};
use mlquest_core::session::{autoplay_script, format_script, parse_script, replay};
use mlquest_core::{GameEvent, InputCommand, LevelFile, LevelSpec};
use mlquest_survey::{report, ReportOptions, SdKind, SurveyDataset, SurveyInstrument};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable naming the default campaign directory.
pub const DATA_DIR_ENV: &str = "ML_QUEST_DATA_DIR";
pub const LOG_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "ml-quest", version, about = "Headless ML-Quest engine tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate one level file, or a whole campaign directory.
    Gen {
        #[arg(long, required_unless_present = "campaign", value_parser = clap::value_parser!(u8).range(1..=3))]
        level: Option<u8>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; standard output when omitted.
        #[arg(long, conflicts_with = "campaign")]
        out: Option<PathBuf>,
        /// Write level1.json, level2.json and level3.json into this directory.
        #[arg(long, conflicts_with = "level")]
        campaign: Option<PathBuf>,
    },
    /// Check a level file against its invariants.
    Validate {
        file: PathBuf,
        /// Require the file to hold this level.
        #[arg(long)]
        level: Option<u8>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run a command script through a campaign and print the event log.
    Simulate {
        #[arg(long, env = DATA_DIR_ENV)]
        campaign: PathBuf,
        #[arg(long, required_unless_present = "autoplay")]
        script: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Play with the built-in reference player instead of a script.
        #[arg(long, conflicts_with = "script")]
        autoplay: bool,
        /// Save the commands that were played.
        #[arg(long)]
        script_out: Option<PathBuf>,
        /// Save a replayable log document.
        #[arg(long)]
        log_out: Option<PathBuf>,
    },
    /// Re-run a saved log document and verify its hash.
    Replay { file: PathBuf },
    /// Serve sessions over NDJSON/TCP and optionally WebSocket.
    Serve {
        #[arg(long, env = DATA_DIR_ENV)]
        campaign: PathBuf,
        #[arg(long, default_value_t = 7878)]
        port: u16,
        #[arg(long)]
        ws_port: Option<u16>,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
    /// Questionnaire analysis.
    Survey {
        #[command(subcommand)]
        command: SurveyCommand,
    },
}

#[derive(Subcommand, Debug)]
enum SurveyCommand {
    /// Print item, demographic and correlation tables for a response file.
    Analyze {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Divide by n instead of n - 1.
        #[arg(long)]
        population_sd: bool,
        /// Add the correctness factor to the correlation matrix.
        #[arg(long)]
        include_c: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Failed(_) => EXIT_FAILED,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn read_level(path: &Path) -> Result<LevelSpec, CliError> {
    LevelFile::from_json(&read(path)?).map(|f| f.spec).map_err(|e| io_err(path, e))
}

/// The three level files of a campaign directory.
pub fn load_campaign(dir: &Path) -> Result<Vec<LevelSpec>, String> {
    (1..=3u8)
        .map(|n| {
            let path = dir.join(format!("level{n}.json"));
            let spec = read_level(&path).map_err(|e| e.to_string())?;
            if spec.level() != n {
                return Err(format!("{}: holds a level-{} spec", path.display(), spec.level()));
            }
            Ok(spec)
        })
        .collect()
}

/// A replayable simulation record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogDocument {
    pub version: u32,
    pub seed: u64,
    pub levels: Vec<LevelSpec>,
    pub commands: Vec<InputCommand>,
    pub completed: bool,
    pub log_hash: String,
    pub events: Vec<GameEvent>,
}

fn hex(h: u64) -> String {
    format!("{h:016x}")
}

fn print_events(out: &mut dyn Write, events: &[GameEvent]) -> std::io::Result<()> {
    for e in events {
        writeln!(out, "{e}")?;
    }
    Ok(())
}

fn exec(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let w = |e: std::io::Error| CliError::Io(e.to_string());
    match cli.command {
        Command::Gen { level, seed, out: file, campaign } => {
            if let Some(dir) = campaign {
                let levels = generate_campaign(seed).map_err(|e| CliError::Usage(e.to_string()))?;
                fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
                for spec in levels {
                    let path = dir.join(format!("level{}.json", spec.level()));
                    write(&path, &LevelFile::new(spec).to_json())?;
                    writeln!(out, "wrote {}", path.display()).map_err(w)?;
                }
                return Ok(EXIT_OK);
            }
            let level = level.ok_or_else(|| CliError::Usage("--level is required".into()))?;
            let spec = generate(level, &GenConfig::with_seed(seed)).map_err(|e| CliError::Usage(e.to_string()))?;
            let text = LevelFile::new(spec).to_json();
            match file {
                Some(path) => write(&path, &text)?,
                None => out.write_all(text.as_bytes()).map_err(w)?,
            }
            Ok(EXIT_OK)
        }
        Command::Validate { file, level, format } => {
            let spec = read_level(&file)?;
            let r = validate(&spec, level.unwrap_or(spec.level()));
            match format {
                Format::Text => writeln!(out, "{r}").map_err(w)?,
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&r).expect("report serializes")).map_err(w)?,
            }
            Ok(if r.passed { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Simulate { campaign, script, seed, autoplay, script_out, log_out } => {
            let levels = load_campaign(&campaign).map_err(CliError::Io)?;
            let commands = match script {
                Some(path) if !autoplay => parse_script(&read(&path)?).map_err(|e| io_err(&path, e))?,
                _ => autoplay_script(levels.clone(), seed, 100_000).map_err(|e| CliError::Failed(e.to_string()))?,
            };
            if let Some(path) = script_out {
                write(&path, &format_script(&commands))?;
            }
            let r = replay(levels.clone(), seed, &commands).map_err(|e| CliError::Failed(e.to_string()))?;
            print_events(out, &r.log).map_err(w)?;
            writeln!(out, "completed: {}", r.completed).map_err(w)?;
            writeln!(out, "rejected: {}", r.rejected).map_err(w)?;
            writeln!(out, "score: {}", r.final_score).map_err(w)?;
            writeln!(out, "log_hash: {}", hex(r.log_hash)).map_err(w)?;
            if let Some(path) = log_out {
                let doc = LogDocument {
                    version: LOG_VERSION,
                    seed,
                    levels,
                    commands,
                    completed: r.completed,
                    log_hash: hex(r.log_hash),
                    events: r.log,
                };
                let mut text = serde_json::to_string_pretty(&doc).expect("log serializes");
                text.push('\n');
                write(&path, &text)?;
            }
            Ok(EXIT_OK)
        }
        Command::Replay { file } => {
            let doc: LogDocument = serde_json::from_str(&read(&file)?).map_err(|e| io_err(&file, e))?;
            if doc.version != LOG_VERSION {
                return Err(io_err(&file, format!("unsupported version {}", doc.version)));
            }
            let r = replay(doc.levels, doc.seed, &doc.commands).map_err(|e| CliError::Failed(e.to_string()))?;
            let hash = hex(r.log_hash);
            if hash != doc.log_hash || r.log != doc.events || r.completed != doc.completed {
                writeln!(out, "MISMATCH: recorded {} but replay gives {hash}", doc.log_hash).map_err(w)?;
                return Ok(EXIT_FAILED);
            }
            writeln!(out, "verified {} events, log_hash: {hash}", r.log.len()).map_err(w)?;
            Ok(EXIT_OK)
        }
        Command::Serve { campaign, port, ws_port, host } => {
            let levels = load_campaign(&campaign).map_err(CliError::Io)?;
            let registry = Arc::new(registry::SessionRegistry::new(levels));
            let bind = |p: u16| TcpListener::bind((host.as_str(), p)).map_err(|e| CliError::Io(format!("{host}:{p}: {e}")));
            let tcp = bind(port)?;
            if let Some(p) = ws_port {
                let ws = bind(p)?;
                let reg = Arc::clone(&registry);
                std::thread::spawn(move || server::run_websocket(ws, reg));
                writeln!(out, "websocket on {}", ws_addr(&host, p)).map_err(w)?;
            }
            writeln!(out, "ndjson on {host}:{port}").map_err(w)?;
            out.flush().map_err(w)?;
            server::run_tcp(tcp, registry);
            Ok(EXIT_OK)
        }
        Command::Survey { command: SurveyCommand::Analyze { file, format, population_sd, include_c } } => {
            let instrument = SurveyInstrument::default();
            let data = SurveyDataset::from_csv(read(&file)?.as_bytes(), &instrument).map_err(|e| io_err(&file, e))?;
            let opts = ReportOptions { sd: if population_sd { SdKind::Population } else { SdKind::Sample }, correlate_c: include_c };
            let r = report(&data, &instrument, opts).map_err(|e| io_err(&file, e))?;
            let text = match format {
                Format::Text => r.render_text(),
                Format::Json => r.to_json(),
            };
            out.write_all(text.as_bytes()).map_err(w)?;
            Ok(EXIT_OK)
        }
    }
}

fn ws_addr(host: &str, port: u16) -> String {
    format!("ws://{host}:{port}")
}

/// Run the command line; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match exec(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "ml-quest: {e}");
            e.code()
        }
    }
}
