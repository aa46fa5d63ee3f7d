//! Hand landmark data model: validation, selfie mirroring, and temporal smoothing.
//!
//! All coordinates live in the normalized viewport space `[0,1]²` with the
//! origin at the top-left corner. Frames arriving from clients are raw model
//! output; [`mirror_frame`] is applied once on ingest so that presenter motion
//! matches on-screen motion.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Number of landmarks in the hand topology.
pub const LANDMARK_COUNT: usize = 21;

pub const WRIST: usize = 0;
pub const THUMB_CMC: usize = 1;
pub const THUMB_MCP: usize = 2;
pub const THUMB_IP: usize = 3;
pub const THUMB_TIP: usize = 4;
pub const INDEX_MCP: usize = 5;
pub const INDEX_PIP: usize = 6;
pub const INDEX_DIP: usize = 7;
pub const INDEX_TIP: usize = 8;
pub const MIDDLE_MCP: usize = 9;
pub const MIDDLE_PIP: usize = 10;
pub const MIDDLE_DIP: usize = 11;
pub const MIDDLE_TIP: usize = 12;
pub const RING_MCP: usize = 13;
pub const RING_PIP: usize = 14;
pub const RING_DIP: usize = 15;
pub const RING_TIP: usize = 16;
pub const PINKY_MCP: usize = 17;
pub const PINKY_PIP: usize = 18;
pub const PINKY_DIP: usize = 19;
pub const PINKY_TIP: usize = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LandmarkError {
    #[error("hand {hand} has {count} landmarks, expected 21")]
    WrongLandmarkCount { hand: usize, count: usize },
    #[error("frame contains two {0} hands")]
    DuplicateHandedness(Handedness),
    #[error("frame contains {0} hands, at most 2 allowed")]
    TooManyHands(usize),
    #[error("hand {hand} landmark {index} has a non-finite coordinate")]
    NonFinite { hand: usize, index: usize },
    #[error("hand {hand} confidence {value} outside [0,1]")]
    BadConfidence { hand: usize, value: f64 },
}

/// A point in normalized viewport (or world) coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y, z: None }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn midpoint(&self, other: &Point2) -> Point2 {
        Point2::new((self.x + other.x) / 2.0, (self.y + other.y) / 2.0)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_none_or(f64::is_finite)
    }

    fn clamped(self) -> Point2 {
        Point2 {
            x: self.x.clamp(0.0, 1.0),
            y: self.y.clamp(0.0, 1.0),
            z: self.z,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Handedness {
    Left,
    Right,
}

impl Handedness {
    pub fn opposite(self) -> Handedness {
        match self {
            Handedness::Left => Handedness::Right,
            Handedness::Right => Handedness::Left,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Handedness::Left => "Left",
            Handedness::Right => "Right",
        }
    }
}

impl fmt::Display for Handedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One detected hand. Construct through deserialization or [`HandLandmarks::new`];
/// both paths validate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WireHand", into = "WireHand")]
pub struct HandLandmarks {
    pub handedness: Handedness,
    pub points: [Point2; LANDMARK_COUNT],
    pub confidence: f64,
}

#[derive(Serialize, Deserialize)]
struct WireHand {
    handedness: Handedness,
    #[serde(default = "full_confidence")]
    confidence: f64,
    landmarks: Vec<Point2>,
}

fn full_confidence() -> f64 {
    1.0
}

impl TryFrom<WireHand> for HandLandmarks {
    type Error = LandmarkError;

    fn try_from(wire: WireHand) -> Result<Self, Self::Error> {
        HandLandmarks::validated(0, wire.handedness, &wire.landmarks, wire.confidence)
    }
}

impl From<HandLandmarks> for WireHand {
    fn from(hand: HandLandmarks) -> Self {
        WireHand {
            handedness: hand.handedness,
            confidence: hand.confidence,
            landmarks: hand.points.to_vec(),
        }
    }
}

impl HandLandmarks {
    pub fn new(
        handedness: Handedness,
        points: &[Point2],
        confidence: f64,
    ) -> Result<Self, LandmarkError> {
        Self::validated(0, handedness, points, confidence)
    }

    fn validated(
        hand: usize,
        handedness: Handedness,
        points: &[Point2],
        confidence: f64,
    ) -> Result<Self, LandmarkError> {
        let points: [Point2; LANDMARK_COUNT] =
            points
                .try_into()
                .map_err(|_| LandmarkError::WrongLandmarkCount {
                    hand,
                    count: points.len(),
                })?;
        if let Some(index) = points.iter().position(|p| !p.is_finite()) {
            return Err(LandmarkError::NonFinite { hand, index });
        }
        if !(0.0..=1.0).contains(&confidence) {
            return Err(LandmarkError::BadConfidence {
                hand,
                value: confidence,
            });
        }
        Ok(HandLandmarks {
            handedness,
            points: points.map(Point2::clamped),
            confidence,
        })
    }

    pub fn point(&self, index: usize) -> Point2 {
        self.points[index]
    }

    /// Wrist to middle-finger MCP distance; the scale reference for pinch detection.
    pub fn hand_size(&self) -> f64 {
        self.points[WRIST].distance(&self.points[MIDDLE_MCP])
    }

    /// Mean of the wrist and the four finger MCP joints.
    pub fn palm_centroid(&self) -> Point2 {
        let ids = [WRIST, INDEX_MCP, MIDDLE_MCP, RING_MCP, PINKY_MCP];
        let (sx, sy) = ids.iter().fold((0.0, 0.0), |(sx, sy), &i| {
            (sx + self.points[i].x, sy + self.points[i].y)
        });
        Point2::new(sx / ids.len() as f64, sy / ids.len() as f64)
    }

    pub fn mirrored(&self) -> HandLandmarks {
        HandLandmarks {
            handedness: self.handedness.opposite(),
            points: self.points.map(|p| Point2 { x: 1.0 - p.x, ..p }),
            confidence: self.confidence,
        }
    }
}

/// Free-function form of [`HandLandmarks::hand_size`].
pub fn hand_size(hand: &HandLandmarks) -> f64 {
    hand.hand_size()
}

/// A timestamped set of zero to two hands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WireFrame")]
pub struct HandFrame {
    pub timestamp_ms: i64,
    pub hands: Vec<HandLandmarks>,
}

#[derive(Deserialize)]
struct WireFrame {
    timestamp_ms: i64,
    #[serde(default)]
    hands: Vec<WireHand>,
}

impl TryFrom<WireFrame> for HandFrame {
    type Error = LandmarkError;

    fn try_from(wire: WireFrame) -> Result<Self, Self::Error> {
        let hands = wire
            .hands
            .into_iter()
            .enumerate()
            .map(|(i, h)| HandLandmarks::validated(i, h.handedness, &h.landmarks, h.confidence))
            .collect::<Result<Vec<_>, _>>()?;
        HandFrame::new(wire.timestamp_ms, hands)
    }
}

impl HandFrame {
    pub fn new(timestamp_ms: i64, hands: Vec<HandLandmarks>) -> Result<Self, LandmarkError> {
        if hands.len() > 2 {
            return Err(LandmarkError::TooManyHands(hands.len()));
        }
        if hands.len() == 2 && hands[0].handedness == hands[1].handedness {
            return Err(LandmarkError::DuplicateHandedness(hands[0].handedness));
        }
        Ok(HandFrame {
            timestamp_ms,
            hands,
        })
    }

    pub fn empty(timestamp_ms: i64) -> Self {
        HandFrame {
            timestamp_ms,
            hands: Vec::new(),
        }
    }

    pub fn hand(&self, handedness: Handedness) -> Option<&HandLandmarks> {
        self.hands.iter().find(|h| h.handedness == handedness)
    }
}

/// Reflects every landmark horizontally and swaps handedness labels.
pub fn mirror_frame(frame: &HandFrame) -> HandFrame {
    HandFrame {
        timestamp_ms: frame.timestamp_ms,
        hands: frame.hands.iter().map(HandLandmarks::mirrored).collect(),
    }
}

pub const DEFAULT_SMOOTHING_ALPHA: f64 = 0.5;
pub const DEFAULT_RESET_AFTER_MS: i64 = 500;

#[derive(Debug, Clone, PartialEq)]
struct HandHistory {
    last_seen_ms: i64,
    points: [Point2; LANDMARK_COUNT],
}

/// Per-landmark exponential smoothing keyed by handedness.
#[derive(Debug, Clone, PartialEq)]
pub struct Smoother {
    alpha: f64,
    reset_after_ms: i64,
    history: BTreeMap<Handedness, HandHistory>,
}

impl Default for Smoother {
    fn default() -> Self {
        Smoother::new(DEFAULT_SMOOTHING_ALPHA, DEFAULT_RESET_AFTER_MS)
    }
}

impl Smoother {
    /// # Panics
    /// If `alpha` is outside `(0, 1]`.
    pub fn new(alpha: f64, reset_after_ms: i64) -> Self {
        assert!(alpha > 0.0 && alpha <= 1.0, "smoothing alpha must lie in (0,1]");
        Smoother {
            alpha,
            reset_after_ms,
            history: BTreeMap::new(),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tracked_hands(&self) -> impl Iterator<Item = Handedness> + '_ {
        self.history.keys().copied()
    }

    pub fn reset(&mut self) {
        self.history.clear();
    }

    pub fn smooth(&mut self, frame: &HandFrame) -> HandFrame {
        let now = frame.timestamp_ms;
        let reset_after = self.reset_after_ms;
        self.history
            .retain(|_, h| now.saturating_sub(h.last_seen_ms) < reset_after);

        let alpha = self.alpha;
        let hands = frame
            .hands
            .iter()
            .map(|hand| {
                let points = match self.history.get(&hand.handedness) {
                    Some(prev) => {
                        let mut out = hand.points;
                        for (o, last) in out.iter_mut().zip(prev.points.iter()) {
                            *o = blend(alpha, last, o);
                        }
                        out
                    }
                    None => hand.points,
                };
                self.history.insert(
                    hand.handedness,
                    HandHistory {
                        last_seen_ms: now,
                        points,
                    },
                );
                HandLandmarks { points, ..*hand }
            })
            .collect();
        HandFrame {
            timestamp_ms: now,
            hands,
        }
    }
}

fn blend(alpha: f64, last: &Point2, new: &Point2) -> Point2 {
    let mix = |l: f64, n: f64| alpha * n + (1.0 - alpha) * l;
    Point2 {
        x: mix(last.x, new.x),
        y: mix(last.y, new.y),
        z: match (last.z, new.z) {
            (Some(l), Some(n)) => Some(mix(l, n)),
            (_, n) => n,
        },
    }
}

/// Functional wrapper over [`Smoother::smooth`].
pub fn smooth_frame(mut state: Smoother, frame: &HandFrame) -> (Smoother, HandFrame) {
    let out = state.smooth(frame);
    (state, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_hand(handedness: Handedness, x: f64, y: f64) -> HandLandmarks {
        HandLandmarks::new(handedness, &[Point2::new(x, y); LANDMARK_COUNT], 0.9).unwrap()
    }

    fn frame(ts: i64, hands: Vec<HandLandmarks>) -> HandFrame {
        HandFrame::new(ts, hands).unwrap()
    }

    #[test]
    fn mirror_reflects_and_swaps() {
        let f = frame(7, vec![flat_hand(Handedness::Left, 0.3, 0.6)]);
        let m = mirror_frame(&f);
        assert_eq!(m.timestamp_ms, 7);
        assert_eq!(m.hands[0].handedness, Handedness::Right);
        assert!((m.hands[0].points[0].x - 0.7).abs() < 1e-15);
        assert_eq!(m.hands[0].points[0].y, 0.6);
    }

    #[test]
    fn mirror_fixed_point_and_involution() {
        let f = frame(
            1,
            vec![
                flat_hand(Handedness::Left, 0.5, 0.2),
                flat_hand(Handedness::Right, 0.25, 0.75),
            ],
        );
        assert_eq!(mirror_frame(&f).hands[0].points[3].x, 0.5);
        assert_eq!(mirror_frame(&mirror_frame(&f)), f);
    }

    #[test]
    fn smoothing_examples() {
        let mut s = Smoother::new(0.5, 500);
        s.smooth(&frame(0, vec![flat_hand(Handedness::Right, 0.0, 0.0)]));
        let a = s.smooth(&frame(33, vec![flat_hand(Handedness::Right, 1.0, 1.0)]));
        assert_eq!(a.hands[0].points[0].x, 0.5);
        let b = s.smooth(&frame(66, vec![flat_hand(Handedness::Right, 1.0, 1.0)]));
        assert_eq!(b.hands[0].points[0].x, 0.75);

        let mut id = Smoother::new(1.0, 500);
        id.smooth(&frame(0, vec![flat_hand(Handedness::Right, 0.9, 0.1)]));
        let out = id.smooth(&frame(1, vec![flat_hand(Handedness::Right, 0.42, 0.42)]));
        assert_eq!(out.hands[0].points[5].x, 0.42);
    }

    #[test]
    fn new_hand_passes_through_and_stale_history_drops() {
        let mut s = Smoother::default();
        let out = s.smooth(&frame(0, vec![flat_hand(Handedness::Left, 0.2, 0.2)]));
        assert_eq!(out.hands[0].points[0].x, 0.2);
        s.smooth(&frame(100, vec![]));
        assert_eq!(s.tracked_hands().count(), 1);
        // Absent for 500 ms: history gone, next appearance passes through unsmoothed.
        let out = s.smooth(&frame(500, vec![flat_hand(Handedness::Left, 0.8, 0.8)]));
        assert_eq!(out.hands[0].points[0].x, 0.8);
    }

    #[test]
    fn hand_size_examples() {
        let mut pts = [Point2::new(0.5, 0.5); LANDMARK_COUNT];
        pts[WRIST] = Point2::new(0.5, 0.9);
        let h = HandLandmarks::new(Handedness::Left, &pts, 1.0).unwrap();
        assert!((hand_size(&h) - 0.4).abs() < 1e-12);

        pts[WRIST] = Point2::new(0.0, 0.0);
        pts[MIDDLE_MCP] = Point2::new(0.3, 0.4);
        let h = HandLandmarks::new(Handedness::Left, &pts, 1.0).unwrap();
        assert!((hand_size(&h) - 0.5).abs() < 1e-12);
        assert!((hand_size(&h.mirrored()) - 0.5).abs() < 1e-12);

        let h = flat_hand(Handedness::Left, 0.3, 0.3);
        assert_eq!(hand_size(&h), 0.0);
    }

    #[test]
    fn validation_rejects_bad_frames() {
        let err = HandLandmarks::new(Handedness::Left, &[Point2::new(0.1, 0.1); 20], 1.0);
        assert!(matches!(err, Err(LandmarkError::WrongLandmarkCount { count: 20, .. })));
        let err = HandFrame::new(
            0,
            vec![
                flat_hand(Handedness::Left, 0.1, 0.1),
                flat_hand(Handedness::Left, 0.2, 0.2),
            ],
        );
        assert_eq!(err, Err(LandmarkError::DuplicateHandedness(Handedness::Left)));
        let err = HandLandmarks::new(Handedness::Left, &[Point2::new(f64::NAN, 0.1); 21], 1.0);
        assert!(matches!(err, Err(LandmarkError::NonFinite { index: 0, .. })));
    }

    #[test]
    fn coordinates_are_clamped() {
        let h = HandLandmarks::new(Handedness::Left, &[Point2::new(-0.2, 1.3); 21], 1.0).unwrap();
        assert_eq!(h.points[0], Point2::new(0.0, 1.0));
    }

    #[test]
    fn json_shape() {
        let pts: Vec<String> = (0..21)
            .map(|i| format!(r#"{{"x":{},"y":0.5}}"#, i as f64 / 40.0))
            .collect();
        let json = format!(
            r#"{{"timestamp_ms":12,"hands":[{{"handedness":"Right","confidence":0.8,"landmarks":[{}]}}]}}"#,
            pts.join(",")
        );
        let f: HandFrame = serde_json::from_str(&json).unwrap();
        assert_eq!(f.hands[0].handedness, Handedness::Right);
        assert_eq!(f.hands[0].points[4].x, 0.1);
        let back = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<HandFrame>(&back).unwrap(), f);

        let short = r#"{"timestamp_ms":1,"hands":[{"handedness":"Left","landmarks":[{"x":0,"y":0}]}]}"#;
        let err = serde_json::from_str::<HandFrame>(short).unwrap_err();
        assert!(err.to_string().contains("expected 21"));
    }
}
