//! Gesture arbitration: turns debounced gesture events into scene mutations.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::gesture::{GestureEvent, GestureKind, Phase};
use crate::landmark::{Handedness, Point2};
use crate::scene::{PinchTarget, Scene, ViewTransform, DEFAULT_HIT_RADIUS};

/// Minimum palm separation accepted at zoom start.
pub const MIN_ZOOM_DISTANCE: f64 = 1e-4;

/// Interactions a story scene can enable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interaction {
    Point,
    Pinch,
    Pan,
    Zoom,
}

impl Interaction {
    pub const ALL: [Interaction; 4] = [Interaction::Point, Interaction::Pinch, Interaction::Pan, Interaction::Zoom];

    /// Default set for a scene that does not list its gestures.
    pub fn defaults() -> BTreeSet<Interaction> {
        [Interaction::Point, Interaction::Pan, Interaction::Zoom].into()
    }

    /// Interaction driven by a gesture kind. Single-hand open palm drives nothing.
    pub fn for_kind(kind: GestureKind) -> Option<Interaction> {
        match kind {
            GestureKind::Point => Some(Interaction::Point),
            GestureKind::Pinch => Some(Interaction::Pinch),
            GestureKind::Fist => Some(Interaction::Pan),
            GestureKind::Zoom => Some(Interaction::Zoom),
            GestureKind::OpenPalm => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Interaction::Point => "point",
            Interaction::Pinch => "pinch",
            Interaction::Pan => "pan",
            Interaction::Zoom => "zoom",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionConfig {
    pub enabled: BTreeSet<Interaction>,
    pub s_min: f64,
    pub s_max: f64,
    pub hit_radius: f64,
}

impl Default for InteractionConfig {
    fn default() -> Self {
        InteractionConfig {
            enabled: Interaction::ALL.into(),
            s_min: ViewTransform::MIN_SCALE,
            s_max: ViewTransform::MAX_SCALE,
            hit_radius: DEFAULT_HIT_RADIUS,
        }
    }
}

impl InteractionConfig {
    pub fn with_enabled(enabled: BTreeSet<Interaction>) -> Self {
        InteractionConfig {
            enabled,
            ..Default::default()
        }
    }

    pub fn allows(&self, kind: GestureKind) -> bool {
        Interaction::for_kind(kind).is_some_and(|i| self.enabled.contains(&i))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    Idle,
    Pointing {
        hand: Handedness,
    },
    DraggingNode {
        hand: Handedness,
        node: String,
    },
    ScrubbingTime {
        hand: Handedness,
        entity: String,
    },
    Panning {
        hand: Handedness,
        anchor: Point2,
        start_translate: (f64, f64),
    },
    Zooming {
        d0: f64,
        start: ViewTransform,
        focal: Point2,
    },
}

impl Mode {
    fn owner(&self) -> Option<(Option<Handedness>, GestureKind)> {
        match self {
            Mode::Idle => None,
            Mode::Pointing { hand } => Some((Some(*hand), GestureKind::Point)),
            Mode::DraggingNode { hand, .. } | Mode::ScrubbingTime { hand, .. } => {
                Some((Some(*hand), GestureKind::Pinch))
            }
            Mode::Panning { hand, .. } => Some((Some(*hand), GestureKind::Fist)),
            Mode::Zooming { .. } => Some((None, GestureKind::Zoom)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Idle => "idle",
            Mode::Pointing { .. } => "pointing",
            Mode::DraggingNode { .. } => "dragging_node",
            Mode::ScrubbingTime { .. } => "scrubbing_time",
            Mode::Panning { .. } => "panning",
            Mode::Zooming { .. } => "zooming",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Update or End with no matching Start.
    pub inconsistent: u64,
    /// Single-hand modes cancelled by a zoom.
    pub preempted: u64,
    /// Starts ignored because another mode was active or nothing was under the gesture.
    pub ignored: u64,
}

type Stream = (Option<Handedness>, GestureKind);

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionState {
    pub mode: Mode,
    pub diagnostics: Diagnostics,
    /// Streams whose Start was ignored or cancelled; their Updates and End are dropped quietly.
    suppressed: BTreeSet<(u8, GestureKind)>,
}

impl Default for InteractionState {
    fn default() -> Self {
        InteractionState {
            mode: Mode::Idle,
            diagnostics: Diagnostics::default(),
            suppressed: BTreeSet::new(),
        }
    }
}

fn stream_key((hand, kind): Stream) -> (u8, GestureKind) {
    let h = match hand {
        None => 0,
        Some(Handedness::Left) => 1,
        Some(Handedness::Right) => 2,
    };
    (h, kind)
}

impl InteractionState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Drops any mode without touching a scene. Used on scene switches.
    pub fn reset(&mut self) {
        self.mode = Mode::Idle;
        self.suppressed.clear();
    }

    fn suppress(&mut self, s: Stream) {
        self.suppressed.insert(stream_key(s));
    }
}

/// Rescales about `focal` so the world point rendered there stays put.
pub fn zoom_about(t: ViewTransform, focal: Point2, s_new: f64) -> ViewTransform {
    if s_new == t.s {
        return t;
    }
    let world = t.invert(focal);
    ViewTransform::new(s_new, focal.x - s_new * world.x, focal.y - s_new * world.y)
}

pub fn pan_update(t: ViewTransform, anchor: Point2, current: Point2, start_translate: (f64, f64)) -> ViewTransform {
    ViewTransform::new(
        t.s,
        start_translate.0 + (current.x - anchor.x),
        start_translate.1 + (current.y - anchor.y),
    )
}

/// Leaves the current single-hand mode, undoing its transient scene effects.
fn cancel(scene: &mut Scene, mode: &Mode) {
    match mode {
        Mode::Pointing { .. } => scene.clear_highlight(),
        Mode::DraggingNode { node, .. } => {
            let _ = scene.release_node(node);
        }
        Mode::ScrubbingTime { .. } => scene.release_entity(),
        Mode::Panning { .. } | Mode::Zooming { .. } | Mode::Idle => {}
    }
}

fn point_at(scene: &mut Scene, p: Point2, cfg: &InteractionConfig) {
    match scene.hit_test(p, cfg.hit_radius).map(str::to_string) {
        Some(id) => {
            scene.set_highlight(&id);
        }
        None => scene.clear_highlight(),
    }
}

pub fn apply_gesture_event(scene: &mut Scene, st: &mut InteractionState, ev: &GestureEvent, cfg: &InteractionConfig) {
    if !cfg.allows(ev.kind) {
        return;
    }
    let stream = (ev.hand, ev.kind);
    match ev.phase {
        Phase::Start => start(scene, st, ev, cfg),
        Phase::Update | Phase::End => {
            if st.mode.owner() == Some(stream) {
                if ev.phase == Phase::Update {
                    update(scene, st, ev, cfg);
                } else {
                    let mode = std::mem::replace(&mut st.mode, Mode::Idle);
                    cancel(scene, &mode);
                }
            } else if st.suppressed.contains(&stream_key(stream)) {
                if ev.phase == Phase::End {
                    st.suppressed.remove(&stream_key(stream));
                }
            } else {
                st.diagnostics.inconsistent += 1;
            }
        }
    }
}

fn start(scene: &mut Scene, st: &mut InteractionState, ev: &GestureEvent, cfg: &InteractionConfig) {
    let stream = (ev.hand, ev.kind);
    st.suppressed.remove(&stream_key(stream));

    if ev.kind == GestureKind::Zoom {
        let Some(z) = ev.zoom else {
            st.diagnostics.inconsistent += 1;
            return;
        };
        let d0 = z.palm_distance();
        if d0 < MIN_ZOOM_DISTANCE || matches!(st.mode, Mode::Zooming { .. }) {
            st.diagnostics.ignored += 1;
            st.suppress(stream);
            return;
        }
        if let Some(owner) = st.mode.owner() {
            let mode = std::mem::replace(&mut st.mode, Mode::Idle);
            cancel(scene, &mode);
            st.diagnostics.preempted += 1;
            st.suppress(owner);
        }
        st.mode = Mode::Zooming {
            d0,
            start: scene.transform,
            focal: z.midpoint(),
        };
        return;
    }

    let (Some(hand), Some(anchor)) = (ev.hand, ev.anchor) else {
        st.diagnostics.inconsistent += 1;
        return;
    };
    if st.mode != Mode::Idle {
        st.diagnostics.ignored += 1;
        st.suppress(stream);
        return;
    }
    match ev.kind {
        GestureKind::Point => {
            point_at(scene, anchor, cfg);
            st.mode = Mode::Pointing { hand };
        }
        GestureKind::Pinch => {
            let target = scene
                .hit_test(anchor, cfg.hit_radius)
                .map(str::to_string)
                .and_then(|id| scene.pinch_target(&id));
            match target {
                Some(PinchTarget::Node(node)) if scene.drag_node(&node, anchor).is_ok() => {
                    st.mode = Mode::DraggingNode { hand, node };
                }
                Some(PinchTarget::Entity(entity)) if scene.grab_entity(&entity) => {
                    st.mode = Mode::ScrubbingTime { hand, entity };
                }
                _ => {
                    st.diagnostics.ignored += 1;
                    st.suppress(stream);
                }
            }
        }
        GestureKind::Fist => {
            st.mode = Mode::Panning {
                hand,
                anchor,
                start_translate: (scene.transform.tx, scene.transform.ty),
            };
        }
        GestureKind::OpenPalm | GestureKind::Zoom => {
            st.suppress(stream);
        }
    }
}

fn update(scene: &mut Scene, st: &mut InteractionState, ev: &GestureEvent, cfg: &InteractionConfig) {
    match &st.mode {
        Mode::Zooming { d0, start, focal } => {
            if let Some(z) = ev.zoom {
                let s = (start.s * z.palm_distance() / d0).clamp(cfg.s_min, cfg.s_max);
                scene.transform = zoom_about(*start, *focal, s);
            }
        }
        Mode::Pointing { .. } => {
            if let Some(p) = ev.anchor {
                point_at(scene, p, cfg);
            }
        }
        Mode::DraggingNode { node, .. } => {
            if let Some(p) = ev.anchor {
                let node = node.clone();
                let _ = scene.drag_node(&node, p);
            }
        }
        Mode::ScrubbingTime { .. } => {
            if let Some(p) = ev.anchor {
                scene.scrub_to(p);
            }
        }
        Mode::Panning {
            anchor, start_translate, ..
        } => {
            if let Some(p) = ev.anchor {
                scene.transform = pan_update(scene.transform, *anchor, p, *start_translate);
            }
        }
        Mode::Idle => {}
    }
}
