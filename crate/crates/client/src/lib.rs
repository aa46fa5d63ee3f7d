//! Thin client for a running hanstream server: the HTTP JSON API plus a typed
//! WebSocket connection.

use std::time::Duration;

use futures::stream::{SplitSink, SplitStream};
use futures::{SinkExt, StreamExt};
use hanstream_core::landmark::HandFrame;
use hanstream_core::session::{InboundMessage, OutboundMessage, Role, SceneState, SessionStatus, StoryInfo};
use hanstream_core::story::{NavCommand, StoryScript};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};
use url::Url;

type Socket = WebSocketStream<MaybeTlsStream<TcpStream>>;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("invalid server url: {0}")]
    Url(String),
    #[error("http: {0}")]
    Http(#[from] reqwest::Error),
    #[error("websocket: {0}")]
    Ws(#[from] tokio_tungstenite::tungstenite::Error),
    /// The server answered with an error body.
    #[error("{code}: {detail}")]
    Rejected { status: Option<u16>, code: String, detail: String },
    #[error("protocol: {0}")]
    Protocol(String),
    #[error("timed out waiting for the server")]
    Timeout,
}

impl ClientError {
    pub fn code(&self) -> Option<&str> {
        match self {
            ClientError::Rejected { code, .. } => Some(code),
            _ => None,
        }
    }
}

#[derive(Debug, Deserialize)]
struct ErrorBody {
    code: String,
    detail: String,
}

/// Handle on one server, addressed by its base URL (for example `http://127.0.0.1:8080`).
#[derive(Debug, Clone)]
pub struct Client {
    base: Url,
    http: reqwest::Client,
}

impl Client {
    pub fn new(base: &str) -> Result<Self, ClientError> {
        let mut base = Url::parse(base).map_err(|e| ClientError::Url(e.to_string()))?;
        if !matches!(base.scheme(), "http" | "https") {
            return Err(ClientError::Url(format!("unsupported scheme `{}`", base.scheme())));
        }
        if !base.path().ends_with('/') {
            let path = format!("{}/", base.path());
            base.set_path(&path);
        }
        Ok(Client {
            base,
            http: reqwest::Client::new(),
        })
    }

    pub fn base(&self) -> &Url {
        &self.base
    }

    fn url(&self, path: &str) -> Result<Url, ClientError> {
        self.base.join(path).map_err(|e| ClientError::Url(e.to_string()))
    }

    /// WebSocket endpoint derived from the base URL.
    pub fn ws_url(&self) -> Result<Url, ClientError> {
        let mut url = self.url("ws")?;
        let scheme = if url.scheme() == "https" { "wss" } else { "ws" };
        url.set_scheme(scheme).map_err(|_| ClientError::Url("cannot derive websocket url".into()))?;
        Ok(url)
    }

    async fn read<T: DeserializeOwned>(resp: reqwest::Response) -> Result<T, ClientError> {
        let status = resp.status();
        if status.is_success() {
            return Ok(resp.json().await?);
        }
        let body = resp.bytes().await?;
        Err(match serde_json::from_slice::<ErrorBody>(&body) {
            Ok(e) => ClientError::Rejected {
                status: Some(status.as_u16()),
                code: e.code,
                detail: e.detail,
            },
            Err(_) => ClientError::Rejected {
                status: Some(status.as_u16()),
                code: "http_error".into(),
                detail: String::from_utf8_lossy(&body).into_owned(),
            },
        })
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T, ClientError> {
        Self::read(self.http.get(self.url(path)?).send().await?).await
    }

    pub async fn health(&self) -> Result<serde_json::Value, ClientError> {
        self.get("api/health").await
    }

    pub async fn sessions(&self) -> Result<Vec<SessionStatus>, ClientError> {
        self.get("api/sessions").await
    }

    pub async fn session(&self, id: &str) -> Result<SessionStatus, ClientError> {
        self.get(&format!("api/sessions/{id}")).await
    }

    pub async fn story_info(&self, id: &str) -> Result<StoryInfo, ClientError> {
        self.get(&format!("api/sessions/{id}/info")).await
    }

    pub async fn scene_state(&self, id: &str) -> Result<SceneState, ClientError> {
        self.get(&format!("api/sessions/{id}/state")).await
    }

    pub async fn story(&self, id: &str) -> Result<StoryScript, ClientError> {
        self.get(&format!("api/sessions/{id}/story")).await
    }

    /// Replaces a session's story; the previous story stays active on rejection.
    pub async fn put_story(&self, id: &str, story: &serde_json::Value) -> Result<StoryInfo, ClientError> {
        let url = self.url(&format!("api/sessions/{id}/story"))?;
        Self::read(self.http.put(url).json(story).send().await?).await
    }

    pub async fn create_session(&self, story: &serde_json::Value) -> Result<SessionStatus, ClientError> {
        Self::read(self.http.post(self.url("api/sessions")?).json(story).send().await?).await
    }

    pub async fn delete_session(&self, id: &str) -> Result<(), ClientError> {
        let resp = self.http.delete(self.url(&format!("api/sessions/{id}"))?).send().await?;
        if resp.status().is_success() {
            return Ok(());
        }
        Self::read::<serde_json::Value>(resp).await.map(|_| ())
    }

    pub async fn validate(&self, story: &serde_json::Value) -> Result<StoryInfo, ClientError> {
        Self::read(self.http.post(self.url("api/validate")?).json(story).send().await?).await
    }

    /// Opens `/ws` and joins `session` (the server default when `None`).
    pub async fn connect(&self, role: Role, session: Option<&str>) -> Result<Connection, ClientError> {
        let (socket, _) = tokio_tungstenite::connect_async(self.ws_url()?.as_str()).await?;
        let (sink, stream) = socket.split();
        let mut conn = Connection {
            tx: Sender { sink },
            rx: Receiver { stream, initial: None },
        };
        conn.tx
            .send(&InboundMessage::Hello {
                role,
                session: session.map(str::to_string),
            })
            .await?;
        let info = match conn.rx.next_within(JOIN_TIMEOUT).await? {
            OutboundMessage::StoryInfo(info) => info,
            OutboundMessage::Error { code, detail } => {
                return Err(ClientError::Rejected {
                    status: None,
                    code,
                    detail,
                })
            }
            other => return Err(ClientError::Protocol(format!("unexpected reply to hello: {other:?}"))),
        };
        let state = match conn.rx.next_within(JOIN_TIMEOUT).await? {
            OutboundMessage::SceneState(s) => s,
            other => return Err(ClientError::Protocol(format!("expected scene state, got {other:?}"))),
        };
        conn.rx.initial = Some((info, state));
        Ok(conn)
    }
}

const JOIN_TIMEOUT: Duration = Duration::from_secs(10);

/// Writing half of a session connection.
pub struct Sender {
    sink: SplitSink<Socket, Message>,
}

impl Sender {
    pub async fn send(&mut self, msg: &InboundMessage) -> Result<(), ClientError> {
        let text = serde_json::to_string(msg).map_err(|e| ClientError::Protocol(e.to_string()))?;
        self.sink.send(Message::Text(text.into())).await?;
        Ok(())
    }

    pub async fn frame(&mut self, frame: HandFrame) -> Result<(), ClientError> {
        self.send(&InboundMessage::LandmarkFrame(frame)).await
    }

    pub async fn control(&mut self, cmd: NavCommand) -> Result<(), ClientError> {
        self.send(&InboundMessage::Control(cmd)).await
    }

    pub async fn close(&mut self) -> Result<(), ClientError> {
        self.sink.close().await?;
        Ok(())
    }
}

/// Reading half of a session connection.
pub struct Receiver {
    stream: SplitStream<Socket>,
    initial: Option<(StoryInfo, SceneState)>,
}

impl Receiver {
    /// The story and scene state received when joining.
    pub fn joined(&self) -> Option<&(StoryInfo, SceneState)> {
        self.initial.as_ref()
    }

    /// Next server message; `None` once the server closes the connection.
    pub async fn next(&mut self) -> Option<Result<OutboundMessage, ClientError>> {
        loop {
            match self.stream.next().await? {
                Ok(Message::Text(text)) => {
                    return Some(
                        serde_json::from_str(text.as_str()).map_err(|e| ClientError::Protocol(e.to_string())),
                    )
                }
                Ok(Message::Close(_)) => return None,
                Ok(_) => continue,
                Err(e) => return Some(Err(e.into())),
            }
        }
    }

    pub async fn next_within(&mut self, limit: Duration) -> Result<OutboundMessage, ClientError> {
        match tokio::time::timeout(limit, self.next()).await {
            Err(_) => Err(ClientError::Timeout),
            Ok(None) => Err(ClientError::Protocol("connection closed".into())),
            Ok(Some(r)) => r,
        }
    }
}

/// A joined WebSocket session.
pub struct Connection {
    tx: Sender,
    rx: Receiver,
}

impl Connection {
    pub fn story_info(&self) -> &StoryInfo {
        &self.rx.initial.as_ref().expect("set on join").0
    }

    pub fn initial_state(&self) -> &SceneState {
        &self.rx.initial.as_ref().expect("set on join").1
    }

    pub async fn send(&mut self, msg: &InboundMessage) -> Result<(), ClientError> {
        self.tx.send(msg).await
    }

    pub async fn frame(&mut self, frame: HandFrame) -> Result<(), ClientError> {
        self.tx.frame(frame).await
    }

    pub async fn control(&mut self, cmd: NavCommand) -> Result<(), ClientError> {
        self.tx.control(cmd).await
    }

    pub async fn next(&mut self) -> Option<Result<OutboundMessage, ClientError>> {
        self.rx.next().await
    }

    pub async fn next_within(&mut self, limit: Duration) -> Result<OutboundMessage, ClientError> {
        self.rx.next_within(limit).await
    }

    /// Separates the halves so sending and receiving can run concurrently.
    pub fn split(self) -> (Sender, Receiver) {
        (self.tx, self.rx)
    }

    pub async fn close(mut self) -> Result<(), ClientError> {
        self.tx.close().await
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn urls_derive_from_base() {
        let c = Client::new("http://localhost:8080").unwrap();
        assert_eq!(c.ws_url().unwrap().as_str(), "ws://localhost:8080/ws");
        assert_eq!(c.url("api/health").unwrap().as_str(), "http://localhost:8080/api/health");
        let c = Client::new("https://example.org/hs").unwrap();
        assert_eq!(c.ws_url().unwrap().as_str(), "wss://example.org/hs/ws");
        assert!(matches!(Client::new("ftp://x"), Err(ClientError::Url(_))));
        assert!(matches!(Client::new("not a url"), Err(ClientError::Url(_))));
    }
}
