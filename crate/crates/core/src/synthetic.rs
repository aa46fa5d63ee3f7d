//! Procedurally constructed hands with exact finger-curl angles.
//!
//! Used to build fixtures, demo traces, and classifier tests without a
//! camera. Hands are laid out in a local frame (wrist at the origin,
//! fingers pointing up, wrist-to-middle-MCP length 1) and then rotated,
//! scaled, and translated into viewport space.

use crate::landmark::{
    HandFrame, HandLandmarks, Handedness, Point2, INDEX_TIP, LANDMARK_COUNT, THUMB_TIP,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pose {
    Point,
    Pinch,
    Fist,
    OpenPalm,
    /// Every finger half curled; classifies as no gesture.
    Relaxed,
}

impl Pose {
    /// Joint angles (degrees) for thumb, index, middle, ring, pinky.
    pub fn angles(self) -> [f64; 5] {
        match self {
            Pose::Point => [150.0, 178.0, 40.0, 35.0, 40.0],
            Pose::Pinch => [120.0, 110.0, 172.0, 170.0, 168.0],
            Pose::Fist => [100.0, 30.0, 28.0, 32.0, 35.0],
            Pose::OpenPalm => [170.0, 176.0, 178.0, 175.0, 172.0],
            Pose::Relaxed => [100.0, 100.0, 100.0, 100.0, 100.0],
        }
    }
}

// Local layout: MCP position and pointing direction (unit vector) per finger.
const FINGER_BASES: [((f64, f64), (f64, f64)); 4] = [
    ((-0.30, -0.95), (-0.12, -0.99)),
    ((0.00, -1.00), (0.00, -1.00)),
    ((0.25, -0.95), (0.10, -0.99)),
    ((0.45, -0.85), (0.22, -0.97)),
];
const PROXIMAL: f64 = 0.45;
const DISTAL: f64 = 0.45;
const THUMB_CMC: (f64, f64) = (-0.20, -0.20);
const THUMB_MCP: (f64, f64) = (-0.45, -0.45);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticHand {
    pub pose: Pose,
    /// Thumb, index, middle, ring, pinky joint angles in degrees.
    pub angles: [f64; 5],
    /// Thumb tip offset from the index tip for pinch poses, in hand units.
    pub pinch_gap: f64,
    /// Counter-clockwise rotation in radians.
    pub rotation: f64,
    /// Wrist to middle-MCP distance in viewport units.
    pub size: f64,
    /// Where the palm centroid lands.
    pub center: Point2,
}

impl SyntheticHand {
    pub fn new(pose: Pose) -> Self {
        SyntheticHand {
            pose,
            angles: pose.angles(),
            pinch_gap: 0.05,
            rotation: 0.0,
            size: 0.15,
            center: Point2::new(0.5, 0.6),
        }
    }

    pub fn with_angles(mut self, angles: [f64; 5]) -> Self {
        self.angles = angles;
        self
    }

    pub fn with_size(mut self, size: f64) -> Self {
        self.size = size;
        self
    }

    pub fn with_rotation(mut self, radians: f64) -> Self {
        self.rotation = radians;
        self
    }

    pub fn at(mut self, center: Point2) -> Self {
        self.center = center;
        self
    }

    fn local_points(&self) -> [(f64, f64); LANDMARK_COUNT] {
        let mut pts = [(0.0, 0.0); LANDMARK_COUNT];
        for (f, &(base, dir)) in FINGER_BASES.iter().enumerate() {
            let mcp = 5 + 4 * f;
            let pip = add(base, scale(dir, PROXIMAL));
            let tip = add(pip, scale(rotate(dir, bend(self.angles[f + 1])), DISTAL));
            pts[mcp] = base;
            pts[mcp + 1] = pip;
            pts[mcp + 2] = lerp(pip, tip, 0.5);
            pts[mcp + 3] = tip;
        }
        pts[1] = THUMB_CMC;
        pts[2] = THUMB_MCP;
        let thumb_dir = normalize(sub(THUMB_MCP, THUMB_CMC));
        let thumb_tip = if self.pose == Pose::Pinch {
            add(pts[INDEX_TIP], (0.0, self.pinch_gap))
        } else {
            add(THUMB_MCP, scale(rotate(thumb_dir, -bend(self.angles[0])), 0.5))
        };
        pts[3] = lerp(THUMB_MCP, thumb_tip, 0.5);
        pts[THUMB_TIP] = thumb_tip;
        pts
    }

    /// Builds the hand in viewport space with its palm centroid at `center`.
    ///
    /// # Panics
    /// If the placed hand leaves the unit square.
    pub fn build(&self, handedness: Handedness) -> HandLandmarks {
        let (s, c) = self.rotation.sin_cos();
        let placed = self.local_points().map(|(x, y)| {
            let (rx, ry) = (x * c + y * s, -x * s + y * c);
            (rx * self.size, ry * self.size)
        });
        let centroid = [0, 5, 9, 13, 17]
            .iter()
            .fold((0.0, 0.0), |acc, &i| add(acc, scale(placed[i], 0.2)));
        let offset = sub((self.center.x, self.center.y), centroid);
        let points: Vec<Point2> = placed
            .iter()
            .map(|&p| {
                let (x, y) = add(p, offset);
                Point2::new(x, y)
            })
            .collect();
        assert!(
            points.iter().all(|p| (0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y)),
            "synthetic hand does not fit in the viewport"
        );
        HandLandmarks::new(handedness, &points, 1.0).expect("21 finite points")
    }

    /// Builds the hand so that its gesture anchor (index tip for Point, pinch
    /// midpoint for Pinch, palm centroid otherwise) lands on `target`.
    pub fn build_anchored(&self, handedness: Handedness, target: Point2) -> HandLandmarks {
        let probe = self.build(handedness);
        let anchor = match self.pose {
            Pose::Point => probe.point(INDEX_TIP),
            Pose::Pinch => probe.point(THUMB_TIP).midpoint(&probe.point(INDEX_TIP)),
            _ => probe.palm_centroid(),
        };
        let shifted = Point2::new(
            self.center.x + target.x - anchor.x,
            self.center.y + target.y - anchor.y,
        );
        self.at(shifted).build(handedness)
    }
}

/// Packs screen-space hands into the raw (unmirrored) frame a client would send.
pub fn raw_frame(timestamp_ms: i64, screen_hands: Vec<HandLandmarks>) -> HandFrame {
    let screen = HandFrame::new(timestamp_ms, screen_hands).expect("distinct handedness");
    crate::landmark::mirror_frame(&screen)
}

fn bend(angle_deg: f64) -> f64 {
    (180.0 - angle_deg).to_radians()
}

fn rotate((x, y): (f64, f64), a: f64) -> (f64, f64) {
    let (s, c) = a.sin_cos();
    (x * c - y * s, x * s + y * c)
}

fn add(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 + b.0, a.1 + b.1)
}

fn sub(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 - b.0, a.1 - b.1)
}

fn scale(a: (f64, f64), k: f64) -> (f64, f64) {
    (a.0 * k, a.1 * k)
}

fn lerp(a: (f64, f64), b: (f64, f64), u: f64) -> (f64, f64) {
    add(a, scale(sub(b, a), u))
}

fn normalize(a: (f64, f64)) -> (f64, f64) {
    let n = a.0.hypot(a.1);
    (a.0 / n, a.1 / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gesture::{curl_profile, Finger, GestureConfig};

    #[test]
    fn angles_are_reproduced() {
        let cfg = GestureConfig::default();
        for pose in [Pose::Point, Pose::Fist, Pose::OpenPalm, Pose::Relaxed] {
            let hand = SyntheticHand::new(pose).with_rotation(0.4).build(Handedness::Left);
            let profile = curl_profile(&hand, &cfg).unwrap();
            for (i, f) in Finger::ALL.iter().enumerate() {
                let got = profile.get(*f).angle_deg;
                assert!((got - pose.angles()[i]).abs() < 1e-6, "{pose:?} {f:?}: {got}");
            }
        }
    }

    #[test]
    fn hand_size_matches_requested() {
        let hand = SyntheticHand::new(Pose::OpenPalm).with_size(0.2).build(Handedness::Right);
        assert!((hand.hand_size() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn anchored_build_hits_target() {
        let target = Point2::new(0.4, 0.35);
        let hand = SyntheticHand::new(Pose::Point).build_anchored(Handedness::Right, target);
        assert!(hand.point(INDEX_TIP).distance(&target) < 1e-12);
    }
}
