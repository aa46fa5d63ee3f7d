use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use futures::{SinkExt, StreamExt};
use hanstream_core::session::{InboundMessage, OutboundMessage};

use crate::hub::{Outbox, SessionHandle};
use crate::{AppState, DEFAULT_SESSION};

pub async fn upgrade(ws: WebSocketUpgrade, State(state): State<Arc<AppState>>) -> Response {
    ws.on_upgrade(move |socket| connection(socket, state))
}

fn reply_error(outbox: &Outbox, code: &str, detail: impl Into<String>) {
    let text = serde_json::to_string(&OutboundMessage::error(code, detail)).expect("error serializes");
    outbox.offer(text.into());
}

/// One client connection. The first Hello picks the session; later messages are
/// forwarded to it in arrival order.
async fn connection(socket: WebSocket, state: Arc<AppState>) {
    let client = state.next_client_id();
    let (mut sink, mut stream) = socket.split();
    let (outbox, mut outgoing) = Outbox::new();

    let writer = tokio::spawn(async move {
        while let Some(text) = outgoing.recv().await {
            if sink.send(Message::Text(text.as_ref().into())).await.is_err() {
                return;
            }
        }
        let _ = sink.close().await;
    });

    let mut joined: Option<SessionHandle> = None;
    loop {
        let frame = tokio::select! {
            frame = stream.next() => frame,
            _ = outbox.kick.notified() => break,
        };
        let text = match frame {
            Some(Ok(Message::Text(text))) => text,
            Some(Ok(Message::Binary(_))) => {
                reply_error(&outbox, "bad_message", "binary frames are not supported");
                continue;
            }
            Some(Ok(Message::Close(_))) | Some(Err(_)) | None => break,
            Some(Ok(_)) => continue,
        };
        let msg = match serde_json::from_str::<InboundMessage>(text.as_str()) {
            Ok(msg) => msg,
            Err(e) => {
                reply_error(&outbox, "bad_message", e.to_string());
                continue;
            }
        };
        match msg {
            InboundMessage::Hello { role, session } => {
                let id = session.as_deref().unwrap_or(DEFAULT_SESSION);
                let Some(handle) = state.session(id) else {
                    reply_error(&outbox, "unknown_session", format!("no session `{id}`"));
                    continue;
                };
                if let Some(prev) = joined.take() {
                    if prev.id() != handle.id() {
                        prev.leave(client);
                    }
                }
                if handle.join(client, role, outbox.clone()).is_ok() {
                    joined = Some(handle);
                } else {
                    reply_error(&outbox, "session_closed", format!("session `{id}` has shut down"));
                }
            }
            msg => match &joined {
                Some(handle) => {
                    if handle.inbound(client, msg).is_err() {
                        reply_error(&outbox, "session_closed", format!("session `{}` has shut down", handle.id()));
                        joined = None;
                    }
                }
                None => reply_error(&outbox, "not_joined", "send hello first"),
            },
        }
    }
    if let Some(handle) = joined {
        handle.leave(client);
    }
    drop(outbox);
    let _ = writer.await;
}
