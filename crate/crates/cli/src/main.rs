//! `doa` drives the adaptation service from the command line.
//!
//! Every subcommand talks HTTP to a service instance: `--server` points at
//! a running one, otherwise a private instance is spun up on a loopback
//! port for the duration of the command. `doa serve` runs the service in
//! the foreground.

use std::path::{self, Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use doa_api::{ApiErrorKind, EvalRequest, RunRequest, SynthRequest};
use doa_client::{ClientError, DoaClient};

#[derive(Parser)]
#[command(name = "doa", version, about = "Distractor-aware online-adaptation pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Start the HTTP service in the foreground.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7233")]
        addr: String,
    },
    /// Run the pipeline over a sequence directory.
    Run {
        /// Flat key=value TOML configuration.
        #[arg(long)]
        config: PathBuf,
        /// Sequence root with frames/, flow/, proposals/.
        #[arg(long)]
        sequence: PathBuf,
        /// Output directory for all artifacts.
        #[arg(long)]
        out: PathBuf,
        /// Force evaluation when gt/ and predictions/ exist.
        #[arg(long)]
        eval: bool,
        /// Use a running service instead of a private instance.
        #[arg(long)]
        server: Option<String>,
    },
    /// Generate a synthetic scene from a JSON spec.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        server: Option<String>,
    },
    /// Score predictions against ground-truth masks.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Where to write metrics.json.
        #[arg(long)]
        out: PathBuf,
        /// Boundary tolerance in pixels (default: 0.8% of the diagonal).
        #[arg(long)]
        tolerance: Option<u32>,
        /// Score the first and last annotated frames too.
        #[arg(long)]
        include_endpoints: bool,
        #[arg(long)]
        server: Option<String>,
    },
}

struct Failure {
    message: String,
    code: u8,
}

impl Failure {
    fn new(message: impl Into<String>, code: u8) -> Self {
        Failure {
            message: message.into(),
            code,
        }
    }
}

impl From<ClientError> for Failure {
    fn from(err: ClientError) -> Self {
        let code = match err.api().map(|a| a.kind) {
            Some(ApiErrorKind::NoForeground) => 2,
            Some(ApiErrorKind::Format) | Some(ApiErrorKind::Io) => 3,
            Some(ApiErrorKind::Dimension) => 4,
            Some(ApiErrorKind::Internal) | None => 1,
        };
        Failure::new(err.to_string(), code)
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Failure::new(err.to_string(), 3)
    }
}

/// Connects to `--server`, or hosts a private service on an ephemeral
/// loopback port so the command still flows through the HTTP surface.
async fn client_for(server: Option<String>) -> Result<DoaClient, Failure> {
    match server {
        Some(url) => Ok(DoaClient::new(url)),
        None => {
            let listener = tokio::net::TcpListener::bind(("127.0.0.1", 0)).await?;
            let addr = listener.local_addr()?;
            tokio::spawn(async move {
                if let Err(err) = doa_service::serve(listener).await {
                    eprintln!("embedded service failed: {err}");
                }
            });
            Ok(DoaClient::new(format!("http://{addr}")))
        }
    }
}

/// Absolute form of a path the server should resolve; the path may not
/// exist yet (output directories).
fn absolute(path: &Path) -> Result<String, Failure> {
    let abs = path::absolute(path)?;
    Ok(abs.to_string_lossy().into_owned())
}

async fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Serve { addr } => {
            let listener = tokio::net::TcpListener::bind(&addr).await?;
            println!("listening on http://{}", listener.local_addr()?);
            doa_service::serve(listener).await?;
            Ok(())
        }
        Command::Run {
            config,
            sequence,
            out,
            eval,
            server,
        } => {
            let client = client_for(server).await?;
            let response = client
                .run(&RunRequest {
                    sequence_dir: absolute(&sequence)?,
                    out_dir: absolute(&out)?,
                    config_path: Some(absolute(&config)?),
                    eval: eval.then_some(true),
                })
                .await?;
            println!(
                "sequence {}: {} frames, {} plan records ({} one-shot)",
                response.sequence, response.frames, response.plan_records, response.one_shot_frames
            );
            println!("pseudo ground truth: {}", response.artifacts.pseudo_gt);
            println!("plan: {}", response.artifacts.plan);
            let selected: usize = response.hard_negatives.values().map(Vec::len).sum();
            println!("hard negatives selected: {selected}");
            if let Some(metrics) = &response.metrics {
                println!(
                    "metrics: J mean {:.4}, F mean {:.4} -> {}",
                    metrics.j_mean,
                    metrics.f_mean,
                    response.artifacts.metrics.as_deref().unwrap_or("-")
                );
            }
            Ok(())
        }
        Command::Synth { spec, out, server } => {
            let client = client_for(server).await?;
            let response = client
                .synth(&SynthRequest {
                    spec_path: absolute(&spec)?,
                    out_dir: absolute(&out)?,
                })
                .await?;
            println!(
                "generated {} frames, {} objects; manifest: {}",
                response.frames, response.objects, response.manifest_path
            );
            Ok(())
        }
        Command::Eval {
            pred,
            gt,
            out,
            tolerance,
            include_endpoints,
            server,
        } => {
            let client = client_for(server).await?;
            let response = client
                .eval(&EvalRequest {
                    pred_dir: absolute(&pred)?,
                    gt_dir: absolute(&gt)?,
                    out_path: absolute(&out)?,
                    tolerance,
                    exclude_endpoints: Some(!include_endpoints),
                })
                .await?;
            println!(
                "{}: J mean {:.4}, F mean {:.4} over {} frames -> {}",
                response.report.sequence,
                response.report.j_mean,
                response.report.f_mean,
                response.report.frames.len(),
                response.out_path
            );
            Ok(())
        }
    }
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match execute(cli.command).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
