#![allow(dead_code)]

use std::path::PathBuf;

use hanstream_core::landmark::{HandLandmarks, Handedness, Point2};
use hanstream_core::scene::{LiveState, Scene};
use hanstream_core::session::InboundMessage;
use hanstream_core::story::{parse_story_file, NavCommand, Story};
use hanstream_core::synthetic::{raw_frame, Pose, SyntheticHand};
use hanstream_core::trace::TraceRecord;

pub const FRAME_MS: i64 = 33;

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn demo_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../demo")
}

pub fn golden_story() -> Story {
    parse_story_file(&golden_dir().join("story.json")).expect("golden story parses")
}

/// Screen position of an entity's bubble at time `t`.
pub fn bubble_at(scene: &Scene, entity: &str, t: f64) -> Point2 {
    let LiveState::DimpVis { built, .. } = &scene.live else {
        panic!("not a dimpvis scene")
    };
    scene.transform.apply(built.get(entity).expect("entity").point_at(t))
}

pub fn lerp(a: Point2, b: Point2, u: f64) -> Point2 {
    Point2::new(a.x + (b.x - a.x) * u, a.y + (b.y - a.y) * u)
}

/// Accumulates a synthetic presenter trace at a fixed frame interval.
pub struct TraceBuilder {
    pub t: i64,
    pub records: Vec<TraceRecord>,
}

impl TraceBuilder {
    pub fn new() -> Self {
        TraceBuilder {
            t: 0,
            records: Vec::new(),
        }
    }

    pub fn frame(&mut self, hands: Vec<HandLandmarks>) {
        self.records.push(TraceRecord {
            t: self.t,
            msg: InboundMessage::LandmarkFrame(raw_frame(self.t, hands)),
        });
        self.t += FRAME_MS;
    }

    pub fn idle(&mut self, n: usize) {
        for _ in 0..n {
            self.frame(Vec::new());
        }
    }

    pub fn control(&mut self, cmd: NavCommand) {
        self.records.push(TraceRecord {
            t: self.t - FRAME_MS,
            msg: InboundMessage::Control(cmd),
        });
    }

    pub fn frames(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r.msg, InboundMessage::LandmarkFrame(_)))
            .count()
    }
}

pub fn pointing(target: Point2) -> HandLandmarks {
    SyntheticHand::new(Pose::Point)
        .with_size(0.1)
        .build_anchored(Handedness::Right, target)
}

pub fn pinching(target: Point2) -> HandLandmarks {
    SyntheticHand::new(Pose::Pinch)
        .with_size(0.1)
        .build_anchored(Handedness::Right, target)
}

pub fn fist(center: Point2) -> HandLandmarks {
    SyntheticHand::new(Pose::Fist).with_size(0.1).at(center).build(Handedness::Right)
}

pub fn open_palm(hand: Handedness, center: Point2) -> HandLandmarks {
    SyntheticHand::new(Pose::OpenPalm).with_size(0.08).at(center).build(hand)
}

/// Drags a pinch from the entity's bubble at `from` to its bubble at `to`,
/// holding at the end so smoothing settles.
pub fn pinch_scrub(b: &mut TraceBuilder, scene: &Scene, entity: &str, from: f64, to: f64, steps: usize, hold: usize) {
    let start = bubble_at(scene, entity, from);
    for _ in 0..4 {
        b.frame(vec![pinching(start)]);
    }
    for i in 1..=steps {
        let t = from + (to - from) * i as f64 / steps as f64;
        b.frame(vec![pinching(bubble_at(scene, entity, t))]);
    }
    let end = bubble_at(scene, entity, to);
    for _ in 0..hold {
        b.frame(vec![pinching(end)]);
    }
}

/// The 500-frame replay fixture: point, pinch-scrub, pan, zoom, then Next.
pub fn golden_trace(story: &Story) -> Vec<TraceRecord> {
    let scene = story.scene(0);
    let mut b = TraceBuilder::new();
    b.idle(20);

    let japan = bubble_at(&scene, "Japan", 0.0);
    for i in 0..100 {
        let wobble = 0.004 * ((i as f64) * 0.3).sin();
        b.frame(vec![pointing(Point2::new(japan.x + wobble, japan.y))]);
    }
    b.idle(20);

    pinch_scrub(&mut b, &scene, "Indonesia", 0.0, 2.0, 80, 36);
    b.idle(20);

    for i in 0..100 {
        let u = i as f64 / 99.0;
        b.frame(vec![fist(lerp(Point2::new(0.45, 0.55), Point2::new(0.55, 0.6), u))]);
    }
    b.idle(20);

    for i in 0..100 {
        let spread = 0.14 + 0.06 * (i as f64 / 99.0);
        b.frame(vec![
            open_palm(Handedness::Left, Point2::new(0.5 - spread, 0.6)),
            open_palm(Handedness::Right, Point2::new(0.5 + spread, 0.6)),
        ]);
    }
    b.idle(500 - b.frames());
    b.control(NavCommand::Next);
    assert_eq!(b.frames(), 500);
    b.records
}
