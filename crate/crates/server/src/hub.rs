//! One task per session: serial processing, bounded frame queue, ordered fan-out.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::sync::Arc;

use hanstream_core::session::{
    ClientId, Envelope, InboundMessage, InboundQueue, OutboundMessage, Recipient, Role, SceneState, Session,
    SessionStatus, StoryInfo,
};
use hanstream_core::story::StoryScript;
use hanstream_core::trace::write_jsonl;
use tokio::sync::{mpsc, oneshot, Notify};

/// Messages a client may have waiting before it is considered lagging and dropped.
pub const OUTBOX_CAPACITY: usize = 256;

/// Serialized outbound messages for one connection, plus a switch the session
/// flips when it disconnects the client.
#[derive(Debug, Clone)]
pub struct Outbox {
    pub tx: mpsc::Sender<Arc<str>>,
    pub kick: Arc<Notify>,
}

impl Outbox {
    pub fn new() -> (Self, mpsc::Receiver<Arc<str>>) {
        let (tx, rx) = mpsc::channel(OUTBOX_CAPACITY);
        (
            Outbox {
                tx,
                kick: Arc::new(Notify::new()),
            },
            rx,
        )
    }

    /// Queues a message; false if the client is gone or lagging.
    pub fn offer(&self, text: Arc<str>) -> bool {
        self.tx.try_send(text).is_ok()
    }
}

pub(crate) enum Command {
    Join { client: ClientId, role: Role, outbox: Outbox },
    Leave { client: ClientId },
    Inbound { client: ClientId, msg: InboundMessage },
    Info(oneshot::Sender<StoryInfo>),
    State(oneshot::Sender<SceneState>),
    Status(oneshot::Sender<SessionStatus>),
    Script(oneshot::Sender<StoryScript>),
    UpdateStory(serde_json::Value, oneshot::Sender<Result<StoryInfo, (String, String)>>),
    Close,
}

#[derive(Debug, thiserror::Error)]
#[error("session `{0}` has shut down")]
pub struct SessionGone(pub String);

/// Cheap, cloneable address of a running session task.
#[derive(Debug, Clone)]
pub struct SessionHandle {
    id: String,
    tx: mpsc::UnboundedSender<Command>,
}

impl SessionHandle {
    /// Starts the session task. With `record`, every accepted inbound message is
    /// appended to that file as a trace line.
    pub fn spawn(id: String, mut session: Session, record: Option<File>) -> Self {
        let (tx, rx) = mpsc::unbounded_channel();
        let recorder = record.map(BufWriter::new);
        if recorder.is_some() {
            session.start_recording();
        }
        let task = SessionTask {
            id: id.clone(),
            session,
            queue: InboundQueue::new(),
            clients: BTreeMap::new(),
            recorder,
        };
        tokio::spawn(task.run(rx));
        SessionHandle { id, tx }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn is_closed(&self) -> bool {
        self.tx.is_closed()
    }

    pub(crate) fn send(&self, cmd: Command) -> Result<(), SessionGone> {
        self.tx.send(cmd).map_err(|_| SessionGone(self.id.clone()))
    }

    pub fn join(&self, client: ClientId, role: Role, outbox: Outbox) -> Result<(), SessionGone> {
        self.send(Command::Join { client, role, outbox })
    }

    pub fn leave(&self, client: ClientId) {
        let _ = self.send(Command::Leave { client });
    }

    pub fn inbound(&self, client: ClientId, msg: InboundMessage) -> Result<(), SessionGone> {
        self.send(Command::Inbound { client, msg })
    }

    pub fn close(&self) {
        let _ = self.send(Command::Close);
    }

    async fn ask<T>(&self, make: impl FnOnce(oneshot::Sender<T>) -> Command) -> Result<T, SessionGone> {
        let (reply, rx) = oneshot::channel();
        self.send(make(reply))?;
        rx.await.map_err(|_| SessionGone(self.id.clone()))
    }

    pub async fn info(&self) -> Result<StoryInfo, SessionGone> {
        self.ask(Command::Info).await
    }

    pub async fn state(&self) -> Result<SceneState, SessionGone> {
        self.ask(Command::State).await
    }

    pub async fn status(&self) -> Result<SessionStatus, SessionGone> {
        self.ask(Command::Status).await
    }

    pub async fn script(&self) -> Result<StoryScript, SessionGone> {
        self.ask(Command::Script).await
    }

    /// Replaces the story and broadcasts the result; the error code and detail on rejection.
    pub async fn update_story(&self, doc: serde_json::Value) -> Result<Result<StoryInfo, (String, String)>, SessionGone> {
        self.ask(|reply| Command::UpdateStory(doc, reply)).await
    }
}

struct SessionTask {
    id: String,
    session: Session,
    queue: InboundQueue,
    clients: BTreeMap<ClientId, Outbox>,
    recorder: Option<BufWriter<File>>,
}

fn encode(msg: &OutboundMessage) -> Arc<str> {
    serde_json::to_string(msg).expect("outbound messages serialize").into()
}

impl SessionTask {
    async fn run(mut self, mut rx: mpsc::UnboundedReceiver<Command>) {
        loop {
            if self.queue.is_empty() {
                match rx.recv().await {
                    Some(cmd) => {
                        if !self.accept(cmd) {
                            break;
                        }
                    }
                    None => break,
                }
            }
            let mut open = true;
            while let Ok(cmd) = rx.try_recv() {
                if !self.accept(cmd) {
                    open = false;
                    break;
                }
            }
            if !open {
                break;
            }
            let dropped = self.queue.take_dropped();
            if dropped > 0 {
                self.session.note_queue_drops(dropped);
                tracing::debug!(session = %self.id, dropped, "dropped stale frames");
            }
            if let Some((client, msg)) = self.queue.pop() {
                let out = self.session.handle_message(client, msg);
                self.deliver(client, None, out);
                self.flush_recording();
            }
            tokio::task::yield_now().await;
        }
        for outbox in self.clients.values() {
            outbox.kick.notify_one();
        }
        tracing::info!(session = %self.id, "session closed");
    }

    /// Handles one command; false once the session should stop.
    fn accept(&mut self, cmd: Command) -> bool {
        match cmd {
            Command::Inbound { client, msg } => self.queue.push(client, msg),
            Command::Join { client, role, outbox } => {
                let out = self.session.join(client, role);
                let joined = self.session.presenter() == Some(client) || self.session.viewers().any(|v| v == client);
                self.deliver(client, Some(&outbox), out);
                if joined {
                    self.clients.insert(client, outbox);
                }
            }
            Command::Leave { client } => {
                self.session.leave(client);
                self.clients.remove(&client);
            }
            Command::Info(reply) => {
                let _ = reply.send(self.session.story_info());
            }
            Command::State(reply) => {
                let _ = reply.send(self.session.snapshot());
            }
            Command::Status(reply) => {
                let state = self.session.snapshot();
                let _ = reply.send(SessionStatus {
                    id: self.id.clone(),
                    title: self.session.story().script.title.clone(),
                    scene_id: state.scene_id,
                    presenter: self.session.presenter().is_some(),
                    viewers: self.session.viewers().count(),
                    seq: state.seq,
                    stats: self.session.stats(),
                });
            }
            Command::Script(reply) => {
                let _ = reply.send(self.session.story().script.clone());
            }
            Command::UpdateStory(doc, reply) => {
                let out = self.session.update_story(doc);
                let result = match out.first().map(|e| &e.msg) {
                    Some(OutboundMessage::Error { code, detail }) => Err((code.clone(), detail.clone())),
                    _ => Ok(self.session.story_info()),
                };
                if result.is_ok() {
                    let broadcast = out.into_iter().filter(|e| e.to == Recipient::Everyone).collect();
                    self.deliver(0, None, broadcast);
                }
                self.flush_recording();
                let _ = reply.send(result);
            }
            Command::Close => return false,
        }
        true
    }

    /// Sends envelopes in order. `direct` is used for a sender not yet registered.
    fn deliver(&mut self, sender: ClientId, direct: Option<&Outbox>, out: Vec<Envelope>) {
        let mut lagging = Vec::new();
        for env in out {
            let text = encode(&env.msg);
            match env.to {
                Recipient::Sender => {
                    if let Some(outbox) = direct.or_else(|| self.clients.get(&sender)) {
                        if !outbox.offer(text) && direct.is_none() {
                            lagging.push(sender);
                        }
                    }
                }
                Recipient::Everyone => {
                    for (id, outbox) in &self.clients {
                        if !outbox.offer(text.clone()) {
                            lagging.push(*id);
                        }
                    }
                }
            }
        }
        lagging.sort_unstable();
        lagging.dedup();
        for id in lagging {
            if let Some(outbox) = self.clients.remove(&id) {
                tracing::warn!(session = %self.id, client = id, "disconnecting lagging client");
                outbox.kick.notify_one();
            }
            self.session.leave(id);
        }
    }

    fn flush_recording(&mut self) {
        let Some(w) = self.recorder.as_mut() else {
            return;
        };
        let records = self.session.take_recording();
        if records.is_empty() {
            return;
        }
        if let Err(e) = write_jsonl(&mut *w, &records).and_then(|_| w.flush()) {
            tracing::error!(session = %self.id, error = %e, "trace recording stopped");
            self.recorder = None;
        }
    }
}
