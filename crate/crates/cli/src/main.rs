//! `hanstream`: serve a story, replay or classify traces, render scene snapshots,
//! validate stories, and drive a running server.
//!
//! Exit codes: 0 success, 1 validation error, 2 runtime error.

mod commands;
mod remote;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "hanstream", version, about = "Gesture-driven data presentations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the session server for a story.
    Serve {
        #[arg(long)]
        story: PathBuf,
        #[arg(long)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Directory served at `/` (the browser bundle).
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
        /// Append every accepted message of the default session to this trace file.
        #[arg(long)]
        record: Option<PathBuf>,
    },
    /// Run a trace through a story headlessly and write the outbound message log.
    Replay {
        #[arg(long)]
        story: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify every hand of every trace frame.
    Classify {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render one scene as a standalone SVG document.
    Render {
        #[arg(long)]
        story: PathBuf,
        #[arg(long)]
        scene: String,
        #[arg(long)]
        scale: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        tx: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        ty: Option<f64>,
        /// Time index for trajectory scenes.
        #[arg(long)]
        time: Option<f64>,
        /// Mark id to highlight, with its tooltip.
        #[arg(long)]
        highlight: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a story and its data.
    Validate {
        #[arg(long)]
        story: PathBuf,
    },
    /// Send a trace to a running server as the presenter.
    Stream {
        #[arg(long, default_value = "http://127.0.0.1:8080")]
        url: String,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        session: Option<String>,
        /// Write every message received from the server here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Pace messages by their trace timestamps instead of sending at once.
        #[arg(long)]
        realtime: bool,
    },
    /// Show live sessions on a running server.
    Status {
        #[arg(long, default_value = "http://127.0.0.1:8080")]
        url: String,
        #[arg(long)]
        session: Option<String>,
    },
}

/// A failed command: the message and which side of the exit-code contract it falls on.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }
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
        Command::Serve {
            story,
            port,
            host,
            static_dir,
            record,
        } => remote::serve(story, &host, port, static_dir, record),
        Command::Replay { story, trace, out } => commands::replay(&story, &trace, &out),
        Command::Classify { trace, out } => commands::classify(&trace, out.as_deref()),
        Command::Render {
            story,
            scene,
            scale,
            tx,
            ty,
            time,
            highlight,
            out,
        } => commands::render(&commands::RenderArgs {
            story,
            scene,
            scale,
            tx,
            ty,
            time,
            highlight,
            out,
        }),
        Command::Validate { story } => commands::validate(&story),
        Command::Stream {
            url,
            trace,
            session,
            out,
            realtime,
        } => remote::stream(&url, &trace, session.as_deref(), out.as_deref(), realtime),
        Command::Status { url, session } => remote::status(&url, session.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
