//! Standalone SVG transcription of render commands.

use std::fmt::Write;

use crate::scene::{RenderCommand, Shape, Style};

pub const SVG_SIZE: f64 = 1000.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

fn color(style: &Style) -> &'static str {
    match style.color {
        Some(c) => PALETTE[c as usize % PALETTE.len()],
        None => match style.role.as_str() {
            "edge" | "trail" => "#999999",
            "tooltip" => "#ffffff",
            _ => "#333333",
        },
    }
}

/// Fixed three-decimal formatting of a unit coordinate in SVG pixels.
fn px(v: f64) -> String {
    let s = format!("{:.3}", v * SVG_SIZE);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

fn emphasis(style: &Style) -> &'static str {
    if style.emphasis {
        r##" stroke="#000000" stroke-width="3""##
    } else {
        ""
    }
}

/// Renders commands in order into an SVG document of [`SVG_SIZE`] pixels square.
pub fn render_svg(commands: &[RenderCommand]) -> String {
    let size = SVG_SIZE as u32;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n"
    );
    out.push_str(&format!("<rect width=\"{size}\" height=\"{size}\" fill=\"#ffffff\"/>\n"));
    for cmd in commands {
        let c = color(&cmd.style);
        let id = escape(&cmd.id);
        let layer = serde_json::to_value(cmd.layer).ok();
        let layer = layer.as_ref().and_then(|v| v.as_str()).unwrap_or("");
        let common = format!("data-id=\"{id}\" data-layer=\"{layer}\"");
        let em = emphasis(&cmd.style);
        let _ = match &cmd.shape {
            Shape::Rect { x, y, w, h } => {
                let stroke = if cmd.style.role == "tooltip" { r##" stroke="#333333""## } else { "" };
                writeln!(
                    out,
                    "<rect {common} x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{c}\"{stroke}{em}/>",
                    px(*x),
                    px(*y),
                    px(*w),
                    px(*h)
                )
            }
            Shape::Circle { cx, cy, r } => writeln!(
                out,
                "<circle {common} cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{c}\" fill-opacity=\"0.8\"{em}/>",
                px(*cx),
                px(*cy),
                px(*r)
            ),
            Shape::Polyline { points } => {
                let pts: Vec<String> = points.iter().map(|p| format!("{},{}", px(p.x), px(p.y))).collect();
                let width = if cmd.style.emphasis { 4 } else { 2 };
                writeln!(
                    out,
                    "<polyline {common} points=\"{}\" fill=\"none\" stroke=\"{c}\" stroke-width=\"{width}\"/>",
                    pts.join(" ")
                )
            }
            Shape::Text { x, y, content } => writeln!(
                out,
                "<text {common} x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"16\" fill=\"#222222\">{}</text>",
                px(*x),
                px(*y),
                escape(content)
            ),
        };
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Layer;

    #[test]
    fn formats_and_escapes() {
        assert_eq!(px(0.5), "500");
        assert_eq!(px(0.12345), "123.45");
        assert_eq!(px(-0.0), "0");
        let cmds = vec![RenderCommand {
            layer: Layer::Background,
            id: "label:a<b".into(),
            shape: Shape::Text {
                x: 0.1,
                y: 0.2,
                content: "R&D".into(),
            },
            style: Style::role("label"),
        }];
        let svg = render_svg(&cmds);
        assert!(svg.contains(">R&amp;D</text>"));
        assert!(svg.contains("data-id=\"label:a&lt;b\""));
        assert_eq!(svg, render_svg(&cmds));
    }
}
