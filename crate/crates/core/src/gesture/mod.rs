//! Static hand-pose recognition from finger curl, two-hand combination, and
//! debouncing into Start/Update/End lifecycles.

mod classify;
mod curl;
mod debounce;

pub use classify::{
    classify_hand, combine_hands, HandGesture, HandKind, RawGesture, ZoomCandidate,
};
pub use curl::{classify_angle, curl_angle, curl_profile, CurlClass, CurlProfile, Finger, FingerCurl};
pub use debounce::{debounce_step, DebounceState, GestureEvent, GestureKind, Phase};

use serde::{Deserialize, Serialize};

use crate::landmark::{HandFrame, HandLandmarks};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum GestureError {
    #[error("finger joints coincide; curl is undefined")]
    DegenerateFinger,
    #[error("invalid gesture config: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GestureConfig {
    pub no_curl_min_deg: f64,
    pub full_curl_max_deg: f64,
    /// Pinch distance threshold as a fraction of hand size.
    pub pinch_ratio: f64,
    pub activation_frames: u32,
    pub release_frames: u32,
}

impl Default for GestureConfig {
    fn default() -> Self {
        GestureConfig {
            no_curl_min_deg: 130.0,
            full_curl_max_deg: 60.0,
            pinch_ratio: 0.25,
            activation_frames: 3,
            release_frames: 2,
        }
    }
}

impl GestureConfig {
    pub fn validate(&self) -> Result<(), GestureError> {
        if !(self.full_curl_max_deg > 0.0
            && self.full_curl_max_deg < self.no_curl_min_deg
            && self.no_curl_min_deg <= 180.0)
        {
            return Err(GestureError::InvalidConfig(
                "need 0 < full_curl_max_deg < no_curl_min_deg <= 180",
            ));
        }
        if self.pinch_ratio.is_nan() || self.pinch_ratio <= 0.0 {
            return Err(GestureError::InvalidConfig("pinch_ratio must be positive"));
        }
        if self.activation_frames < 1 || self.release_frames < 1 {
            return Err(GestureError::InvalidConfig("frame counts must be at least 1"));
        }
        Ok(())
    }
}

/// Classification of one hand including its curl profile (absent when a finger is degenerate).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandReading {
    pub gesture: HandGesture,
    pub profile: Option<CurlProfile>,
}

pub fn read_hand(hand: &HandLandmarks, cfg: &GestureConfig) -> HandReading {
    match curl_profile(hand, cfg) {
        Ok(profile) => HandReading {
            gesture: classify_hand(hand, &profile, cfg),
            profile: Some(profile),
        },
        Err(_) => HandReading {
            gesture: HandGesture {
                handedness: hand.handedness,
                kind: HandKind::None,
                anchor: None,
            },
            profile: None,
        },
    }
}

/// Curl, classify, and combine every hand of an already mirrored and smoothed frame.
pub fn recognize(frame: &HandFrame, cfg: &GestureConfig) -> RawGesture {
    let hands: Vec<HandGesture> = frame
        .hands
        .iter()
        .map(|h| read_hand(h, cfg).gesture)
        .collect();
    combine_hands(&hands)
}
