use serde::{Deserialize, Serialize};

use super::{GestureConfig, GestureError};
use crate::landmark::{HandLandmarks, Point2};

/// How curled a finger is. Ordered by straightness: `FullCurl < HalfCurl < NoCurl`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurlClass {
    FullCurl,
    HalfCurl,
    NoCurl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Finger {
    Thumb,
    Index,
    Middle,
    Ring,
    Pinky,
}

impl Finger {
    pub const ALL: [Finger; 5] = [
        Finger::Thumb,
        Finger::Index,
        Finger::Middle,
        Finger::Ring,
        Finger::Pinky,
    ];

    /// Landmark triple (base, joint, tip) whose angle at the joint measures curl.
    pub fn joints(self) -> (usize, usize, usize) {
        match self {
            Finger::Thumb => (1, 2, 4),
            Finger::Index => (5, 6, 8),
            Finger::Middle => (9, 10, 12),
            Finger::Ring => (13, 14, 16),
            Finger::Pinky => (17, 18, 20),
        }
    }
}

/// Interior angle at `mid`, in degrees, via the law of cosines.
///
/// A straight finger gives 180°. Coincident points have no defined angle.
pub fn curl_angle(start: Point2, mid: Point2, end: Point2) -> Result<f64, GestureError> {
    let p = start.distance(&mid);
    let q = mid.distance(&end);
    let r = start.distance(&end);
    if p == 0.0 || q == 0.0 || r == 0.0 {
        return Err(GestureError::DegenerateFinger);
    }
    let cos = ((p * p + q * q - r * r) / (2.0 * p * q)).clamp(-1.0, 1.0);
    Ok(cos.acos().to_degrees())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FingerCurl {
    pub angle_deg: f64,
    pub class: CurlClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurlProfile {
    pub thumb: FingerCurl,
    pub index: FingerCurl,
    pub middle: FingerCurl,
    pub ring: FingerCurl,
    pub pinky: FingerCurl,
}

impl CurlProfile {
    pub fn get(&self, finger: Finger) -> FingerCurl {
        match finger {
            Finger::Thumb => self.thumb,
            Finger::Index => self.index,
            Finger::Middle => self.middle,
            Finger::Ring => self.ring,
            Finger::Pinky => self.pinky,
        }
    }

    pub fn class(&self, finger: Finger) -> CurlClass {
        self.get(finger).class
    }
}

pub fn classify_angle(angle_deg: f64, cfg: &GestureConfig) -> CurlClass {
    if angle_deg >= cfg.no_curl_min_deg {
        CurlClass::NoCurl
    } else if angle_deg < cfg.full_curl_max_deg {
        CurlClass::FullCurl
    } else {
        CurlClass::HalfCurl
    }
}

pub fn curl_profile(hand: &HandLandmarks, cfg: &GestureConfig) -> Result<CurlProfile, GestureError> {
    let finger = |f: Finger| -> Result<FingerCurl, GestureError> {
        let (a, b, c) = f.joints();
        let angle_deg = curl_angle(hand.point(a), hand.point(b), hand.point(c))?;
        Ok(FingerCurl {
            angle_deg,
            class: classify_angle(angle_deg, cfg),
        })
    };
    Ok(CurlProfile {
        thumb: finger(Finger::Thumb)?,
        index: finger(Finger::Index)?,
        middle: finger(Finger::Middle)?,
        ring: finger(Finger::Ring)?,
        pinky: finger(Finger::Pinky)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    // Independent route: angle between the two arms from the dot product.
    fn dot_angle(a: Point2, b: Point2, c: Point2) -> f64 {
        let (ux, uy) = (a.x - b.x, a.y - b.y);
        let (vx, vy) = (c.x - b.x, c.y - b.y);
        let cos = (ux * vx + uy * vy) / (ux.hypot(uy) * vx.hypot(vy));
        cos.clamp(-1.0, 1.0).acos().to_degrees()
    }

    #[test]
    fn known_angles() {
        assert_eq!(curl_angle(p(0., 0.), p(0., 1.), p(0., 2.)).unwrap(), 180.0);
        assert!((curl_angle(p(0., 0.), p(0., 1.), p(1., 1.)).unwrap() - 90.0).abs() < 1e-9);
        let c = p(0.5, 1.0 + 3f64.sqrt() / 2.0);
        let oracle = dot_angle(p(0., 0.), p(0., 1.), c);
        assert!((oracle - 150.0).abs() < 1e-9);
        assert!((curl_angle(p(0., 0.), p(0., 1.), c).unwrap() - oracle).abs() < 1e-9);
    }

    #[test]
    fn coincident_points_are_degenerate() {
        assert_eq!(
            curl_angle(p(0.2, 0.2), p(0.2, 0.2), p(0.5, 0.5)),
            Err(GestureError::DegenerateFinger)
        );
        assert_eq!(
            curl_angle(p(0.2, 0.2), p(0.4, 0.4), p(0.2, 0.2)),
            Err(GestureError::DegenerateFinger)
        );
    }

    #[test]
    fn threshold_boundaries() {
        let cfg = GestureConfig::default();
        assert_eq!(classify_angle(100.0, &cfg), CurlClass::HalfCurl);
        assert_eq!(classify_angle(59.999, &cfg), CurlClass::FullCurl);
        assert_eq!(classify_angle(60.0, &cfg), CurlClass::HalfCurl);
        assert_eq!(classify_angle(130.0, &cfg), CurlClass::NoCurl);
        assert_eq!(classify_angle(129.999, &cfg), CurlClass::HalfCurl);
        assert!(CurlClass::NoCurl > CurlClass::HalfCurl && CurlClass::HalfCurl > CurlClass::FullCurl);
    }
}
