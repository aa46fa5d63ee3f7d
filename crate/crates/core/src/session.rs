//! Session protocol and the per-session frame pipeline.
//!
//! A [`Session`] is transport-agnostic: callers feed it decoded inbound
//! messages tagged with a client id and deliver the returned envelopes.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::gesture::{recognize, DebounceState, GestureConfig, GestureEvent, GestureKind, Phase};
use crate::interaction::{apply_gesture_event, Interaction, InteractionConfig, InteractionState};
use crate::landmark::{mirror_frame, HandFrame, Handedness, Point2, Smoother, DEFAULT_RESET_AFTER_MS, DEFAULT_SMOOTHING_ALPHA};
use crate::scene::{render_scene, RenderCommand, Scene, ViewTransform};
use crate::story::{navigate, parse_story, NavCommand, Story, StoryState, TransitionPlan};
use crate::trace::TraceRecord;

pub type ClientId = u64;

/// Frames kept waiting per session before the oldest are dropped.
pub const MAX_QUEUED_FRAMES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Presenter,
    Viewer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InboundMessage {
    Hello {
        role: Role,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        session: Option<String>,
    },
    LandmarkFrame(HandFrame),
    Control(NavCommand),
    PlannerUpdate {
        story: serde_json::Value,
    },
}

/// Presenter feedback: the active gesture and where it is anchored on screen.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Hud {
    pub gesture: Option<GestureKind>,
    pub anchors: Vec<Point2>,
    pub time_label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneState {
    pub seq: u64,
    pub scene_id: String,
    pub render_commands: Vec<RenderCommand>,
    pub transform: ViewTransform,
    pub hud: Hud,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSummary {
    pub id: String,
    pub kind: String,
    pub gestures: BTreeSet<Interaction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoryInfo {
    pub title: String,
    pub scenes: Vec<SceneSummary>,
    pub current: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OutboundMessage {
    SceneState(SceneState),
    StoryInfo(StoryInfo),
    TransitionPlan(TransitionPlan),
    Error { code: String, detail: String },
}

impl OutboundMessage {
    pub fn error(code: &str, detail: impl Into<String>) -> Self {
        OutboundMessage::Error {
            code: code.to_string(),
            detail: detail.into(),
        }
    }

    pub fn as_scene_state(&self) -> Option<&SceneState> {
        match self {
            OutboundMessage::SceneState(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recipient {
    Sender,
    Everyone,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub to: Recipient,
    pub msg: OutboundMessage,
}

impl Envelope {
    fn sender(msg: OutboundMessage) -> Self {
        Envelope {
            to: Recipient::Sender,
            msg,
        }
    }

    fn everyone(msg: OutboundMessage) -> Self {
        Envelope {
            to: Recipient::Everyone,
            msg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub gesture: GestureConfig,
    pub smoothing_alpha: f64,
    pub reset_after_ms: i64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            gesture: GestureConfig::default(),
            smoothing_alpha: DEFAULT_SMOOTHING_ALPHA,
            reset_after_ms: DEFAULT_RESET_AFTER_MS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SessionStats {
    pub frames: u64,
    pub out_of_order: u64,
    pub queue_dropped: u64,
    /// Gesture Starts applied, by kind.
    pub gestures: BTreeMap<String, u64>,
    pub inconsistent_events: u64,
}

/// Server-side summary of a live session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionStatus {
    pub id: String,
    pub title: String,
    pub scene_id: String,
    pub presenter: bool,
    pub viewers: usize,
    pub seq: u64,
    pub stats: SessionStats,
}

#[derive(Debug, Clone)]
pub struct Session {
    story: Story,
    nav: StoryState,
    scene: Scene,
    icfg: InteractionConfig,
    cfg: SessionConfig,
    smoother: Smoother,
    debounce: DebounceState,
    interaction: InteractionState,
    hud: BTreeMap<Option<Handedness>, (GestureKind, Vec<Point2>)>,
    seq: u64,
    last_ts: Option<i64>,
    presenter: Option<ClientId>,
    viewers: BTreeSet<ClientId>,
    stats: SessionStats,
    recording: Option<Vec<TraceRecord>>,
}

impl Session {
    pub fn new(story: Story) -> Self {
        Self::with_config(story, SessionConfig::default())
    }

    pub fn with_config(story: Story, cfg: SessionConfig) -> Self {
        Session {
            scene: story.scene(0),
            icfg: story.interaction_config(0),
            nav: StoryState::default(),
            story,
            smoother: Smoother::new(cfg.smoothing_alpha, cfg.reset_after_ms),
            cfg,
            debounce: DebounceState::new(),
            interaction: InteractionState::new(),
            hud: BTreeMap::new(),
            seq: 0,
            last_ts: None,
            presenter: None,
            viewers: BTreeSet::new(),
            stats: SessionStats::default(),
            recording: None,
        }
    }

    pub fn story(&self) -> &Story {
        &self.story
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn current_index(&self) -> usize {
        self.nav.current
    }

    pub fn interaction(&self) -> &InteractionState {
        &self.interaction
    }

    pub fn stats(&self) -> SessionStats {
        let mut s = self.stats.clone();
        s.inconsistent_events = self.interaction.diagnostics.inconsistent;
        s
    }

    pub fn note_queue_drops(&mut self, n: u64) {
        self.stats.queue_dropped += n;
    }

    pub fn presenter(&self) -> Option<ClientId> {
        self.presenter
    }

    pub fn viewers(&self) -> impl Iterator<Item = ClientId> + '_ {
        self.viewers.iter().copied()
    }

    /// Starts keeping every accepted presenter message as a trace record.
    pub fn start_recording(&mut self) {
        self.recording.get_or_insert_with(Vec::new);
    }

    pub fn take_recording(&mut self) -> Vec<TraceRecord> {
        self.recording.as_mut().map(std::mem::take).unwrap_or_default()
    }

    fn record(&mut self, msg: &InboundMessage) {
        if let Some(rec) = self.recording.as_mut() {
            rec.push(TraceRecord {
                t: self.last_ts.unwrap_or(0),
                msg: msg.clone(),
            });
        }
    }

    pub fn story_info(&self) -> StoryInfo {
        StoryInfo {
            title: self.story.script.title.clone(),
            scenes: self
                .story
                .script
                .scenes
                .iter()
                .map(|d| SceneSummary {
                    id: d.id.clone(),
                    kind: d.chart.kind_name().to_string(),
                    gestures: d.gestures.clone(),
                })
                .collect(),
            current: self.nav.current,
        }
    }

    /// Current scene state at the current sequence number.
    pub fn snapshot(&self) -> SceneState {
        let hud_gesture = self
            .hud
            .get(&None)
            .or_else(|| self.hud.values().next())
            .map(|(k, _)| *k);
        let anchors = match self.hud.get(&None) {
            Some((_, a)) => a.clone(),
            None => self.hud.values().flat_map(|(_, a)| a.iter().copied()).collect(),
        };
        SceneState {
            seq: self.seq,
            scene_id: self.story.def(self.nav.current).id.clone(),
            render_commands: render_scene(&self.scene),
            transform: self.scene.transform,
            hud: Hud {
                gesture: hud_gesture,
                anchors,
                time_label: self.scene.time_label().map(str::to_string),
            },
        }
    }

    fn next_state(&mut self) -> OutboundMessage {
        self.seq += 1;
        OutboundMessage::SceneState(self.snapshot())
    }

    pub fn join(&mut self, client: ClientId, role: Role) -> Vec<Envelope> {
        match role {
            Role::Presenter => match self.presenter {
                Some(p) if p != client => {
                    return vec![Envelope::sender(OutboundMessage::error(
                        "presenter_taken",
                        "this session already has a presenter",
                    ))]
                }
                _ => {
                    self.viewers.remove(&client);
                    self.presenter = Some(client);
                }
            },
            Role::Viewer => {
                if self.presenter == Some(client) {
                    self.presenter = None;
                }
                self.viewers.insert(client);
            }
        }
        vec![
            Envelope::sender(OutboundMessage::StoryInfo(self.story_info())),
            Envelope::sender(OutboundMessage::SceneState(self.snapshot())),
        ]
    }

    pub fn leave(&mut self, client: ClientId) {
        if self.presenter == Some(client) {
            self.presenter = None;
        }
        self.viewers.remove(&client);
    }

    /// Decodes one text message; malformed input is answered to the sender only.
    pub fn handle_text(&mut self, client: ClientId, text: &str) -> Vec<Envelope> {
        match serde_json::from_str::<InboundMessage>(text) {
            Ok(msg) => self.handle_message(client, msg),
            Err(e) => vec![Envelope::sender(OutboundMessage::error("bad_message", e.to_string()))],
        }
    }

    pub fn handle_message(&mut self, client: ClientId, msg: InboundMessage) -> Vec<Envelope> {
        if let InboundMessage::Hello { role, .. } = msg {
            return self.join(client, role);
        }
        if self.presenter != Some(client) {
            let (code, detail) = if self.viewers.contains(&client) {
                ("not_presenter", "only the presenter may drive the session")
            } else {
                ("not_joined", "send hello first")
            };
            return vec![Envelope::sender(OutboundMessage::error(code, detail))];
        }
        match msg {
            InboundMessage::Hello { .. } => unreachable!(),
            InboundMessage::LandmarkFrame(frame) => {
                if self.last_ts.is_some_and(|t| frame.timestamp_ms <= t) {
                    self.stats.out_of_order += 1;
                    return Vec::new();
                }
                self.last_ts = Some(frame.timestamp_ms);
                self.record(&InboundMessage::LandmarkFrame(frame.clone()));
                vec![Envelope::everyone(OutboundMessage::SceneState(self.process_frame(&frame)))]
            }
            InboundMessage::Control(cmd) => {
                self.record(&InboundMessage::Control(cmd.clone()));
                self.control(&cmd)
            }
            InboundMessage::PlannerUpdate { story } => self.update_story(story),
        }
    }

    /// Runs one presenter frame through recognition, interaction, and rendering.
    pub fn process_frame(&mut self, frame: &HandFrame) -> SceneState {
        self.stats.frames += 1;
        let screen = mirror_frame(frame);
        let smoothed = self.smoother.smooth(&screen);
        let raw = recognize(&smoothed, &self.cfg.gesture);
        let events = self.debounce.step(&raw, frame.timestamp_ms, &self.cfg.gesture);
        for ev in &events {
            if !self.icfg.allows(ev.kind) {
                continue;
            }
            self.track_hud(ev);
            if ev.phase == Phase::Start {
                *self.stats.gestures.entry(ev.kind.as_str().to_string()).or_default() += 1;
            }
            apply_gesture_event(&mut self.scene, &mut self.interaction, ev, &self.icfg);
        }
        self.scene.tick();
        self.seq += 1;
        self.snapshot()
    }

    fn track_hud(&mut self, ev: &GestureEvent) {
        if ev.phase == Phase::End {
            self.hud.remove(&ev.hand);
            return;
        }
        let anchors = match ev.zoom {
            Some(z) => vec![z.left_palm, z.right_palm],
            None => ev.anchor.into_iter().collect(),
        };
        self.hud.insert(ev.hand, (ev.kind, anchors));
    }

    fn switch_scene(&mut self, index: usize) {
        self.scene = self.story.scene(index);
        if let Some(saved) = self.nav.saved.get(&self.story.def(index).id) {
            self.scene.restore(saved);
        }
        self.icfg = self.story.interaction_config(index);
        self.interaction.reset();
        self.debounce = DebounceState::new();
        self.hud.clear();
    }

    fn control(&mut self, cmd: &NavCommand) -> Vec<Envelope> {
        let outgoing = self.scene.persist();
        let (next, plan) = match navigate(&self.nav, &self.story.script, cmd, outgoing) {
            Ok(r) => r,
            Err(e) => return vec![Envelope::sender(OutboundMessage::error("unknown_scene", e.to_string()))],
        };
        let mut out = Vec::new();
        if let Some(plan) = plan {
            self.nav = next;
            self.switch_scene(self.nav.current);
            out.push(Envelope::everyone(OutboundMessage::TransitionPlan(plan)));
        }
        out.push(Envelope::everyone(OutboundMessage::StoryInfo(self.story_info())));
        out.push(Envelope::everyone(self.next_state()));
        out
    }

    /// Replaces the story, keeping the current scene if its id survives. On
    /// failure the old story stays active and the error goes to the sender.
    pub fn update_story(&mut self, doc: serde_json::Value) -> Vec<Envelope> {
        let bytes = serde_json::to_vec(&doc).expect("json value serializes");
        self.record(&InboundMessage::PlannerUpdate { story: doc });
        let story = match parse_story(&bytes, &self.story.base_dir) {
            Ok(s) => s,
            Err(e) => {
                return vec![Envelope::sender(OutboundMessage::error(
                    "invalid_story",
                    format!("{}: {e}", e.code()),
                ))]
            }
        };
        let current_id = self.story.def(self.nav.current).id.clone();
        self.nav = StoryState {
            current: story.script.index_of(&current_id).unwrap_or(0),
            saved: BTreeMap::new(),
        };
        self.story = story;
        self.switch_scene(self.nav.current);
        vec![
            Envelope::everyone(OutboundMessage::StoryInfo(self.story_info())),
            Envelope::everyone(self.next_state()),
        ]
    }
}

/// Bounded inbound queue: beyond [`MAX_QUEUED_FRAMES`] waiting landmark frames the
/// oldest frame is discarded. Other messages are never dropped.
#[derive(Debug, Default)]
pub struct InboundQueue {
    items: VecDeque<(ClientId, InboundMessage)>,
    frames: usize,
    dropped: u64,
}

impl InboundQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, client: ClientId, msg: InboundMessage) {
        if matches!(msg, InboundMessage::LandmarkFrame(_)) {
            self.frames += 1;
            if self.frames > MAX_QUEUED_FRAMES {
                let oldest = self
                    .items
                    .iter()
                    .position(|(_, m)| matches!(m, InboundMessage::LandmarkFrame(_)))
                    .expect("frame count tracks queued frames");
                self.items.remove(oldest);
                self.frames -= 1;
                self.dropped += 1;
            }
        }
        self.items.push_back((client, msg));
    }

    pub fn pop(&mut self) -> Option<(ClientId, InboundMessage)> {
        let item = self.items.pop_front()?;
        if matches!(item.1, InboundMessage::LandmarkFrame(_)) {
            self.frames -= 1;
        }
        Some(item)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Frames dropped since the last call.
    pub fn take_dropped(&mut self) -> u64 {
        std::mem::take(&mut self.dropped)
    }
}
