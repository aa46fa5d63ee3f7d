use serde::{Deserialize, Serialize};

use super::{Layer, Mark, Scene, Shape, Style, ViewTransform};
use crate::landmark::Point2;

const CHAR_WIDTH: f64 = 0.012;
const LINE_HEIGHT: f64 = 0.035;
const BOX_PAD: f64 = 0.01;
const BOX_OFFSET: f64 = 0.015;

/// A mark's geometry in screen space, tagged with its layer and style token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderCommand {
    pub layer: Layer,
    pub id: String,
    pub shape: Shape,
    pub style: Style,
}

/// Distance from a world point to a hit mark, or `None` if it misses.
pub(crate) fn hit_distance(mark: &Mark, p: Point2, hit_radius: f64) -> Option<f64> {
    if !mark.hit {
        return None;
    }
    match mark.shape {
        Shape::Rect { x, y, w, h } => (p.x >= x && p.x <= x + w && p.y >= y && p.y <= y + h).then_some(0.0),
        Shape::Circle { cx, cy, r } => {
            let d = p.distance(&Point2::new(cx, cy));
            (d <= r + hit_radius).then(|| (d - r).max(0.0))
        }
        Shape::Polyline { .. } | Shape::Text { .. } => None,
    }
}

pub(super) fn hit_test(scene: &Scene, screen: Point2, hit_radius: f64) -> Option<&str> {
    let p = scene.transform.invert(screen);
    let mut best: Option<(f64, &Mark)> = None;
    for mark in &scene.marks {
        if let Some(d) = hit_distance(mark, p, hit_radius) {
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, mark));
            }
        }
    }
    best.map(|(_, m)| m.id.as_str())
}

fn transform_shape(shape: &Shape, t: &ViewTransform) -> Shape {
    match shape {
        Shape::Rect { x, y, w, h } => {
            let p = t.apply(Point2::new(*x, *y));
            Shape::Rect {
                x: p.x,
                y: p.y,
                w: w * t.s,
                h: h * t.s,
            }
        }
        Shape::Circle { cx, cy, r } => {
            let p = t.apply(Point2::new(*cx, *cy));
            Shape::Circle {
                cx: p.x,
                cy: p.y,
                r: r * t.s,
            }
        }
        Shape::Polyline { points } => Shape::Polyline {
            points: points.iter().map(|p| t.apply(*p)).collect(),
        },
        Shape::Text { x, y, content } => {
            let p = t.apply(Point2::new(*x, *y));
            Shape::Text {
                x: p.x,
                y: p.y,
                content: content.clone(),
            }
        }
    }
}

fn command(mark: &Mark, t: &ViewTransform) -> RenderCommand {
    RenderCommand {
        layer: mark.layer,
        id: mark.id.clone(),
        shape: transform_shape(&mark.shape, t),
        style: mark.style.clone(),
    }
}

/// Tooltip box placed beside the anchor, flipped to stay inside the unit viewport.
fn tooltip_commands(anchor: Point2, lines: &[String]) -> Vec<RenderCommand> {
    let chars = lines.iter().map(|l| l.chars().count()).max().unwrap_or(0);
    let w = CHAR_WIDTH * chars as f64 + 2.0 * BOX_PAD;
    let h = LINE_HEIGHT * lines.len() as f64 + BOX_PAD * 1.5;
    let mut x = anchor.x + BOX_OFFSET;
    if x + w > 1.0 {
        x = anchor.x - BOX_OFFSET - w;
    }
    let mut y = anchor.y - BOX_OFFSET - h;
    if y < 0.0 {
        y = anchor.y + BOX_OFFSET;
    }
    let mut out = Vec::with_capacity(lines.len() + 1);
    out.push(RenderCommand {
        layer: Layer::Overlay,
        id: "tooltip".into(),
        shape: Shape::Rect { x, y, w, h },
        style: Style::role("tooltip"),
    });
    for (i, line) in lines.iter().enumerate() {
        out.push(RenderCommand {
            layer: Layer::Overlay,
            id: format!("tooltip:{i}"),
            shape: Shape::Text {
                x: x + BOX_PAD,
                y: y + BOX_PAD + LINE_HEIGHT * (i as f64 + 0.75),
                content: line.clone(),
            },
            style: Style::role("tooltip_text"),
        });
    }
    out
}

/// Screen-space drawing commands in layer order.
pub fn render_scene(scene: &Scene) -> Vec<RenderCommand> {
    let t = &scene.transform;
    let mut out: Vec<RenderCommand> = Vec::with_capacity(scene.marks.len() + 4);
    for layer in [Layer::Background, Layer::Marks] {
        out.extend(scene.marks.iter().filter(|m| m.layer == layer).map(|m| command(m, t)));
    }
    if let Some(mark) = scene.highlight.as_deref().and_then(|id| scene.mark(id)) {
        let mut cmd = command(mark, t);
        cmd.layer = Layer::Highlight;
        cmd.style.emphasis = true;
        out.push(cmd);
        if let Some(tip) = &scene.tooltip {
            out.extend(tooltip_commands(t.apply(tip.anchor), &tip.lines));
        }
    }
    out
}
