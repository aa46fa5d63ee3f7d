//! Commands that run or talk to a server.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use hanstream_client::{Client, ClientError};
use hanstream_core::session::{OutboundMessage, Role};
use hanstream_server::{ServerConfig, ServerError};
use tokio::net::TcpListener;

use crate::commands::{load_story, load_trace};
use crate::CliError;

/// Quiet period after the last send that ends a stream.
const SETTLE: Duration = Duration::from_millis(500);

fn runtime() -> Result<tokio::runtime::Runtime, CliError> {
    tokio::runtime::Runtime::new().map_err(|e| CliError::Runtime(format!("cannot start runtime: {e}")))
}

fn client_error(e: ClientError) -> CliError {
    match e {
        ClientError::Rejected { code, detail, .. } => CliError::Validation(format!("[{code}] {detail}")),
        ClientError::Url(m) => CliError::Validation(format!("invalid server url: {m}")),
        other => CliError::Runtime(other.to_string()),
    }
}

pub fn serve(
    story: PathBuf,
    host: &str,
    port: u16,
    static_dir: Option<PathBuf>,
    record: Option<PathBuf>,
) -> Result<(), CliError> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    let config = ServerConfig {
        story,
        static_dir,
        record,
        ..Default::default()
    };
    // Fail on a bad story before binding.
    load_story(&config.story)?;
    let rt = runtime()?;
    rt.block_on(async move {
        let listener = TcpListener::bind((host, port))
            .await
            .map_err(|e| CliError::Runtime(format!("cannot bind {host}:{port}: {e}")))?;
        if let Ok(addr) = listener.local_addr() {
            eprintln!("listening on http://{addr}");
        }
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        hanstream_server::serve(listener, config, shutdown).await.map_err(server_error)
    })
}

fn server_error(e: ServerError) -> CliError {
    if e.is_validation() {
        CliError::Validation(e.to_string())
    } else {
        CliError::Runtime(e.to_string())
    }
}

pub fn stream(url: &str, trace: &Path, session: Option<&str>, out: Option<&Path>, realtime: bool) -> Result<(), CliError> {
    let records = load_trace(trace)?;
    let mut log = match out {
        Some(path) => Some(BufWriter::new(
            File::create(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?,
        )),
        None => None,
    };
    let client = Client::new(url).map_err(client_error)?;
    let rt = runtime()?;
    let (states, errors, last) = rt.block_on(async {
        let conn = client.connect(Role::Presenter, session).await.map_err(client_error)?;
        let (mut tx, mut rx) = conn.split();
        let sender = tokio::spawn(async move {
            let mut prev_t = records.first().map(|r| r.t).unwrap_or(0);
            let sent = records.len();
            for rec in records {
                if realtime && rec.t > prev_t {
                    tokio::time::sleep(Duration::from_millis((rec.t - prev_t) as u64)).await;
                }
                prev_t = prev_t.max(rec.t);
                tx.send(&rec.msg).await?;
            }
            Ok::<_, ClientError>((tx, sent))
        });
        let (mut states, mut errors, mut last) = (0u64, 0u64, None);
        let mut sender = sender;
        let mut finished = None;
        loop {
            tokio::select! {
                res = &mut sender, if finished.is_none() => {
                    let (tx, sent) = res.map_err(|e| CliError::Runtime(e.to_string()))?.map_err(client_error)?;
                    eprintln!("sent {sent} messages");
                    finished = Some(tx);
                }
                msg = rx.next() => {
                    let msg = match msg {
                        None => break,
                        Some(r) => r.map_err(client_error)?,
                    };
                    match &msg {
                        OutboundMessage::SceneState(s) => {
                            states += 1;
                            last = Some(s.scene_id.clone());
                        }
                        OutboundMessage::Error { code, detail } => {
                            errors += 1;
                            eprintln!("server error [{code}]: {detail}");
                        }
                        _ => {}
                    }
                    if let Some(w) = log.as_mut() {
                        serde_json::to_writer(&mut *w, &msg)
                            .map_err(std::io::Error::from)
                            .and_then(|_| w.write_all(b"\n"))
                            .map_err(|e| CliError::Runtime(e.to_string()))?;
                    }
                }
                _ = tokio::time::sleep(SETTLE), if finished.is_some() => break,
            }
        }
        if let Some(mut tx) = finished {
            let _ = tx.close().await;
        }
        Ok::<_, CliError>((states, errors, last))
    })?;
    if let Some(w) = log.as_mut() {
        w.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    println!("scene states: {states}");
    println!("errors: {errors}");
    println!("final scene: {}", last.as_deref().unwrap_or("-"));
    Ok(())
}

pub fn status(url: &str, session: Option<&str>) -> Result<(), CliError> {
    let client = Client::new(url).map_err(client_error)?;
    let rt = runtime()?;
    let value = rt.block_on(async {
        match session {
            Some(id) => client.session(id).await.map(|s| serde_json::to_value(s).expect("status serializes")),
            None => client.sessions().await.map(|s| serde_json::to_value(s).expect("status serializes")),
        }
    });
    let value = value.map_err(client_error)?;
    println!("{}", serde_json::to_string_pretty(&value).expect("json value serializes"));
    Ok(())
}
