use serde::{Deserialize, Serialize};

use super::curl::{CurlClass, CurlProfile, Finger};
use super::GestureConfig;
use crate::landmark::{Handedness, HandLandmarks, Point2, INDEX_TIP, THUMB_TIP};

/// Static pose recognised for a single hand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HandKind {
    Point,
    Pinch,
    Fist,
    OpenPalm,
    None,
}

impl HandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            HandKind::Point => "point",
            HandKind::Pinch => "pinch",
            HandKind::Fist => "fist",
            HandKind::OpenPalm => "open_palm",
            HandKind::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HandGesture {
    pub handedness: Handedness,
    pub kind: HandKind,
    /// Index tip for Point, thumb/index midpoint for Pinch, palm centroid for
    /// Fist and OpenPalm; absent for None.
    pub anchor: Option<Point2>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoomCandidate {
    pub left_palm: Point2,
    pub right_palm: Point2,
}

impl ZoomCandidate {
    pub fn palm_distance(&self) -> f64 {
        self.left_palm.distance(&self.right_palm)
    }

    pub fn midpoint(&self) -> Point2 {
        self.left_palm.midpoint(&self.right_palm)
    }
}

/// Per-frame recognition result for all hands in view.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RawGesture {
    pub hands: Vec<HandGesture>,
    pub two_hand: Option<ZoomCandidate>,
}

impl RawGesture {
    pub fn hand(&self, handedness: Handedness) -> Option<&HandGesture> {
        self.hands.iter().find(|h| h.handedness == handedness)
    }
}

fn all_class(profile: &CurlProfile, fingers: &[Finger], class: CurlClass) -> bool {
    fingers.iter().all(|&f| profile.class(f) == class)
}

/// Rules in precedence order: Pinch, Point, Fist, OpenPalm.
pub fn classify_hand(hand: &HandLandmarks, profile: &CurlProfile, cfg: &GestureConfig) -> HandGesture {
    use Finger::*;
    const OTHERS: [Finger; 3] = [Middle, Ring, Pinky];

    let thumb_tip = hand.point(THUMB_TIP);
    let index_tip = hand.point(INDEX_TIP);
    let size = hand.hand_size();

    let (kind, anchor) = if size > 0.0
        && thumb_tip.distance(&index_tip) < cfg.pinch_ratio * size
        && all_class(profile, &OTHERS, CurlClass::NoCurl)
    {
        (HandKind::Pinch, Some(thumb_tip.midpoint(&index_tip)))
    } else if profile.class(Index) == CurlClass::NoCurl
        && OTHERS.iter().all(|&f| profile.class(f) != CurlClass::NoCurl)
    {
        (HandKind::Point, Some(index_tip))
    } else if all_class(profile, &[Index, Middle, Ring, Pinky], CurlClass::FullCurl)
        && profile.class(Thumb) != CurlClass::NoCurl
    {
        (HandKind::Fist, Some(hand.palm_centroid()))
    } else if all_class(profile, &Finger::ALL, CurlClass::NoCurl) {
        (HandKind::OpenPalm, Some(hand.palm_centroid()))
    } else {
        (HandKind::None, None)
    };

    HandGesture {
        handedness: hand.handedness,
        kind,
        anchor,
    }
}

/// Reports hands Left-first and flags a zoom candidate when both palms are open.
pub fn combine_hands(hands: &[HandGesture]) -> RawGesture {
    let mut hands = hands.to_vec();
    hands.sort_by_key(|h| h.handedness);
    let palm = |side: Handedness| {
        hands
            .iter()
            .find(|h| h.handedness == side && h.kind == HandKind::OpenPalm)
            .and_then(|h| h.anchor)
    };
    let two_hand = match (palm(Handedness::Left), palm(Handedness::Right)) {
        (Some(left_palm), Some(right_palm)) => Some(ZoomCandidate {
            left_palm,
            right_palm,
        }),
        _ => None,
    };
    RawGesture { hands, two_hand }
}
