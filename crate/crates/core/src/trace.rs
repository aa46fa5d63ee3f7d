//! Newline-delimited JSON traces: recording, headless replay, and per-frame classification.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::gesture::{read_hand, GestureConfig, HandKind};
use crate::landmark::{mirror_frame, Handedness};
use crate::session::{InboundMessage, OutboundMessage, Role, SceneState, Session, SessionConfig};
use crate::story::Story;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: i64,
    pub msg: InboundMessage,
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("line {line}: {detail}")]
    Line { line: usize, detail: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Parses a trace. Blank lines are skipped; line numbers are 1-based.
pub fn read_trace(reader: impl BufRead) -> Result<Vec<TraceRecord>, TraceError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| TraceError::Line {
            line: i + 1,
            detail: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(mut w: impl Write, items: &[T]) -> io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplaySummary {
    pub frames: u64,
    pub messages: u64,
    /// Gesture Starts applied, by kind.
    pub gestures: BTreeMap<String, u64>,
    pub final_state: SceneState,
    pub final_scene: String,
}

const REPLAY_CLIENT: u64 = 1;

/// Runs a trace through a fresh session as its presenter, at logical time.
/// Every message the presenter would receive after joining goes to `sink`.
pub fn replay_trace(
    story: Story,
    records: impl IntoIterator<Item = TraceRecord>,
    cfg: SessionConfig,
    mut sink: impl FnMut(&OutboundMessage) -> io::Result<()>,
) -> io::Result<ReplaySummary> {
    let mut session = Session::with_config(story, cfg);
    session.join(REPLAY_CLIENT, Role::Presenter);
    let mut messages = 0;
    for rec in records {
        for env in session.handle_message(REPLAY_CLIENT, rec.msg) {
            messages += 1;
            sink(&env.msg)?;
        }
    }
    let final_state = session.snapshot();
    let stats = session.stats();
    Ok(ReplaySummary {
        frames: stats.frames,
        messages,
        gestures: stats.gestures,
        final_scene: final_state.scene_id.clone(),
        final_state,
    })
}

/// Replays into a JSON-lines writer.
pub fn replay_to_writer(story: Story, records: Vec<TraceRecord>, cfg: SessionConfig, mut w: impl Write) -> io::Result<ReplaySummary> {
    let summary = replay_trace(story, records, cfg, |msg| {
        serde_json::to_writer(&mut w, msg)?;
        w.write_all(b"\n")
    })?;
    w.flush()?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurlAngles {
    pub thumb: f64,
    pub index: f64,
    pub middle: f64,
    pub ring: f64,
    pub pinky: f64,
}

/// One classified hand of one trace frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedHand {
    pub t: i64,
    pub hand: Handedness,
    pub kind: HandKind,
    pub angles: Option<CurlAngles>,
}

/// Per-hand static classification of every landmark frame in a trace, after
/// mirroring and without smoothing or debouncing.
pub fn classify_trace(records: &[TraceRecord], cfg: &GestureConfig) -> Vec<ClassifiedHand> {
    let mut out = Vec::new();
    for rec in records {
        let InboundMessage::LandmarkFrame(frame) = &rec.msg else {
            continue;
        };
        for hand in &mirror_frame(frame).hands {
            let reading = read_hand(hand, cfg);
            out.push(ClassifiedHand {
                t: frame.timestamp_ms,
                hand: hand.handedness,
                kind: reading.gesture.kind,
                angles: reading.profile.map(|p| CurlAngles {
                    thumb: p.thumb.angle_deg,
                    index: p.index.angle_deg,
                    middle: p.middle.angle_deg,
                    ring: p.ring.angle_deg,
                    pinky: p.pinky.angle_deg,
                }),
            });
        }
    }
    out
}
