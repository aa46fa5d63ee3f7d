use std::fmt;

use serde::{Deserialize, Serialize};

use super::classify::{HandKind, RawGesture, ZoomCandidate};
use super::GestureConfig;
use crate::landmark::{Handedness, Point2};

/// Gesture kinds that carry a lifecycle. `Zoom` is the two-hand open-palm gesture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GestureKind {
    Point,
    Pinch,
    Fist,
    OpenPalm,
    Zoom,
}

impl GestureKind {
    pub fn from_hand(kind: HandKind) -> Option<GestureKind> {
        match kind {
            HandKind::Point => Some(GestureKind::Point),
            HandKind::Pinch => Some(GestureKind::Pinch),
            HandKind::Fist => Some(GestureKind::Fist),
            HandKind::OpenPalm => Some(GestureKind::OpenPalm),
            HandKind::None => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GestureKind::Point => "point",
            GestureKind::Pinch => "pinch",
            GestureKind::Fist => "fist",
            GestureKind::OpenPalm => "open_palm",
            GestureKind::Zoom => "zoom",
        }
    }
}

impl fmt::Display for GestureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Start,
    Update,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GestureEvent {
    pub phase: Phase,
    pub kind: GestureKind,
    /// Owning hand; `None` for two-hand zoom.
    pub hand: Option<Handedness>,
    pub anchor: Option<Point2>,
    pub zoom: Option<ZoomCandidate>,
    pub timestamp_ms: i64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Observation {
    kind: GestureKind,
    anchor: Option<Point2>,
    zoom: Option<ZoomCandidate>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Active {
    kind: GestureKind,
    absent: u32,
    last: Observation,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct Slot {
    streak: Option<(GestureKind, u32)>,
    active: Option<Active>,
}

impl Slot {
    fn step(
        &mut self,
        observed: Option<Observation>,
        cfg: &GestureConfig,
        hand: Option<Handedness>,
        ts: i64,
        out: &mut Vec<GestureEvent>,
    ) {
        let event = |phase, obs: &Observation| GestureEvent {
            phase,
            kind: obs.kind,
            hand,
            anchor: obs.anchor,
            zoom: obs.zoom,
            timestamp_ms: ts,
        };

        self.streak = match (observed, self.streak) {
            (Some(o), Some((k, n))) if k == o.kind => Some((k, n.saturating_add(1))),
            (Some(o), _) => Some((o.kind, 1)),
            (None, _) => None,
        };

        if let Some(active) = self.active.as_mut() {
            match observed {
                Some(o) if o.kind == active.kind => {
                    active.absent = 0;
                    active.last = o;
                    out.push(event(Phase::Update, &o));
                    return;
                }
                _ => {
                    active.absent += 1;
                    if active.absent < cfg.release_frames {
                        return;
                    }
                    out.push(event(Phase::End, &active.last));
                    self.active = None;
                }
            }
        }

        if let (Some(o), Some((_, n))) = (observed, self.streak) {
            if n >= cfg.activation_frames {
                self.active = Some(Active {
                    kind: o.kind,
                    absent: 0,
                    last: o,
                });
                out.push(event(Phase::Start, &o));
            }
        }
    }

    fn force_end(&mut self, hand: Option<Handedness>, ts: i64, out: &mut Vec<GestureEvent>) {
        if let Some(active) = self.active.take() {
            out.push(GestureEvent {
                phase: Phase::End,
                kind: active.kind,
                hand,
                anchor: active.last.anchor,
                zoom: active.last.zoom,
                timestamp_ms: ts,
            });
        }
        self.streak = None;
    }
}

/// Debounce bookkeeping for one session: one slot per hand plus the zoom slot.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DebounceState {
    left: Slot,
    right: Slot,
    zoom: Slot,
}

impl DebounceState {
    pub fn new() -> Self {
        Self::default()
    }

    /// The active kind for a hand, or for zoom when `hand` is `None`.
    pub fn active(&self, hand: Option<Handedness>) -> Option<GestureKind> {
        let slot = match hand {
            Some(Handedness::Left) => &self.left,
            Some(Handedness::Right) => &self.right,
            None => &self.zoom,
        };
        slot.active.map(|a| a.kind)
    }

    /// Consumes one frame's recognition result and returns the lifecycle events it triggers.
    ///
    /// Within a frame events are ordered zoom first, then Left, then Right. While zoom is
    /// active, per-hand gestures are ended immediately and do not accumulate.
    pub fn step(&mut self, raw: &RawGesture, ts: i64, cfg: &GestureConfig) -> Vec<GestureEvent> {
        let mut zoom_events = Vec::new();
        let zoom_obs = raw.two_hand.map(|z| Observation {
            kind: GestureKind::Zoom,
            anchor: Some(z.midpoint()),
            zoom: Some(z),
        });
        self.zoom.step(zoom_obs, cfg, None, ts, &mut zoom_events);

        let mut out = Vec::new();
        if self.zoom.active.is_some() {
            self.left.force_end(Some(Handedness::Left), ts, &mut out);
            self.right.force_end(Some(Handedness::Right), ts, &mut out);
            out.extend(zoom_events);
            return out;
        }
        out.extend(zoom_events);

        for (side, slot) in [
            (Handedness::Left, &mut self.left),
            (Handedness::Right, &mut self.right),
        ] {
            let obs = raw.hand(side).and_then(|h| {
                GestureKind::from_hand(h.kind).map(|kind| Observation {
                    kind,
                    anchor: h.anchor,
                    zoom: None,
                })
            });
            slot.step(obs, cfg, Some(side), ts, &mut out);
        }
        out
    }
}

/// Functional wrapper over [`DebounceState::step`].
pub fn debounce_step(
    mut state: DebounceState,
    raw: &RawGesture,
    ts: i64,
    cfg: &GestureConfig,
) -> (DebounceState, Vec<GestureEvent>) {
    let events = state.step(raw, ts, cfg);
    (state, events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gesture::classify::HandGesture;

    fn raw(kind: HandKind) -> RawGesture {
        RawGesture {
            hands: vec![HandGesture {
                handedness: Handedness::Right,
                kind,
                anchor: (kind != HandKind::None).then(|| Point2::new(0.5, 0.5)),
            }],
            two_hand: None,
        }
    }

    fn run(kinds: &[HandKind], cfg: &GestureConfig) -> Vec<Vec<(Phase, GestureKind)>> {
        let mut st = DebounceState::new();
        kinds
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                st.step(&raw(k), i as i64, cfg)
                    .into_iter()
                    .map(|e| (e.phase, e.kind))
                    .collect()
            })
            .collect()
    }

    use HandKind::{Fist, None as Nothing, Point};

    #[test]
    fn start_on_activation_frame() {
        let out = run(&[Point, Point, Point, Point], &GestureConfig::default());
        assert!(out[0].is_empty() && out[1].is_empty());
        assert_eq!(out[2], vec![(Phase::Start, GestureKind::Point)]);
        assert_eq!(out[3], vec![(Phase::Update, GestureKind::Point)]);
    }

    #[test]
    fn streak_resets_on_gap() {
        let out = run(&[Point, Point, Nothing, Point], &GestureConfig::default());
        assert!(out.iter().all(Vec::is_empty));
    }

    #[test]
    fn end_after_release_frames() {
        let out = run(&[Point, Point, Point, Nothing, Nothing], &GestureConfig::default());
        assert!(out[3].is_empty());
        assert_eq!(out[4], vec![(Phase::End, GestureKind::Point)]);
    }

    #[test]
    fn kind_change_counts_as_absence() {
        let out = run(&[Point, Point, Point, Fist, Fist, Fist], &GestureConfig::default());
        assert!(out[3].is_empty());
        assert_eq!(out[4], vec![(Phase::End, GestureKind::Point)]);
        assert_eq!(out[5], vec![(Phase::Start, GestureKind::Fist)]);
    }

    #[test]
    fn single_frame_thresholds_switch_within_a_frame() {
        let cfg = GestureConfig {
            activation_frames: 1,
            release_frames: 1,
            ..GestureConfig::default()
        };
        let out = run(&[Point, Fist], &cfg);
        assert_eq!(out[0], vec![(Phase::Start, GestureKind::Point)]);
        assert_eq!(
            out[1],
            vec![(Phase::End, GestureKind::Point), (Phase::Start, GestureKind::Fist)]
        );
    }

    #[test]
    fn zoom_preempts_hands() {
        let cfg = GestureConfig {
            release_frames: 5,
            ..GestureConfig::default()
        };
        let mut st = DebounceState::new();
        for i in 0..3 {
            st.step(&raw(Point), i, &cfg);
        }
        assert_eq!(st.active(Some(Handedness::Right)), Some(GestureKind::Point));
        let palms = RawGesture {
            hands: vec![],
            two_hand: Some(ZoomCandidate {
                left_palm: Point2::new(0.3, 0.5),
                right_palm: Point2::new(0.7, 0.5),
            }),
        };
        let mut all = Vec::new();
        for i in 3..6 {
            all.push(st.step(&palms, i, &cfg));
        }
        assert_eq!(all[2].len(), 2);
        assert_eq!((all[2][0].phase, all[2][0].kind), (Phase::End, GestureKind::Point));
        assert_eq!((all[2][1].phase, all[2][1].kind), (Phase::Start, GestureKind::Zoom));
        assert_eq!(all[2][1].anchor, Some(Point2::new(0.5, 0.5)));
        assert_eq!(st.active(None), Some(GestureKind::Zoom));
    }
}
