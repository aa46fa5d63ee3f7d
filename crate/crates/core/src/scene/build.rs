use super::*;
use crate::data::{format_number, ColumnType, Value};
use crate::dimpvis::build_trajectories;
use crate::scale::{BandScale, LinearScale};

const BAR_PADDING: f64 = 0.2;
const LABEL_GAP: f64 = 0.035;

pub(super) fn live_state(spec: &ChartSpec, data: &SceneData, plot: &PlotArea) -> Result<LiveState, SceneError> {
    match (spec, data) {
        (ChartSpec::Network(_), SceneData::Graph(graph)) => {
            let params = LayoutParams::default();
            let init = layout::init_layout(graph)?;
            let run = layout::run_until_stable(init, graph, &params);
            Ok(LiveState::Network {
                layout: run.state,
                params,
            })
        }
        (ChartSpec::Network(_), SceneData::Table(_)) => {
            Err(SceneError::spec("data", "network charts need a graph document"))
        }
        (ChartSpec::DimpVis(s), SceneData::Table(d)) => {
            for f in [&s.entity_field, &s.time_field, &s.x_field, &s.y_field]
                .into_iter()
                .chain(s.size_field.as_ref())
            {
                require(d, f)?;
            }
            for f in [&s.x_field, &s.y_field].into_iter().chain(s.size_field.as_ref()) {
                require_numeric(d, f)?;
            }
            let built = build_trajectories(d, s, plot)?;
            let cursor = initial_cursor(built.time_labels.clone());
            Ok(LiveState::DimpVis {
                built,
                state: DimpState {
                    cursor,
                    grabbed: None,
                    window: dimpvis::DEFAULT_WINDOW,
                },
            })
        }
        (_, SceneData::Graph(_)) => Err(SceneError::spec("data", "tabular chart bound to a graph document")),
        (ChartSpec::Bar(_) | ChartSpec::MultiLine(_), SceneData::Table(_)) => Ok(LiveState::Static),
    }
}

fn require(d: &Dataset, field: &str) -> Result<usize, SceneError> {
    d.column_index(field)
        .ok_or_else(|| SceneError::spec(field, "no such column"))
}

fn require_numeric(d: &Dataset, field: &str) -> Result<usize, SceneError> {
    let i = require(d, field)?;
    let numeric = match d.columns[i].ty {
        ColumnType::Number => true,
        ColumnType::TimeIndex => d.values(i).all(|v| v.as_f64().is_some()),
        ColumnType::Text => false,
    };
    if numeric {
        Ok(i)
    } else {
        Err(SceneError::spec(field, "column is not numeric"))
    }
}

fn num(v: &Value) -> f64 {
    v.as_f64().expect("column checked numeric")
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn axes(plot: &PlotArea) -> Vec<Mark> {
    let line = |id: &str, a: (f64, f64), b: (f64, f64)| Mark {
        id: id.to_string(),
        shape: Shape::Polyline {
            points: vec![Point2::new(a.0, a.1), Point2::new(b.0, b.1)],
        },
        layer: Layer::Background,
        datum: DatumRef::None,
        hit: false,
        style: Style::role("axis"),
    };
    vec![
        line("axis:x", (plot.x0, plot.y1), (plot.x1, plot.y1)),
        line("axis:y", (plot.x0, plot.y0), (plot.x0, plot.y1)),
    ]
}

fn text(id: String, x: f64, y: f64, content: String, role: &str) -> Mark {
    Mark {
        id,
        shape: Shape::Text { x, y, content },
        layer: Layer::Background,
        datum: DatumRef::None,
        hit: false,
        style: Style::role(role),
    }
}

pub(super) fn marks(scene: &Scene) -> Result<Vec<Mark>, SceneError> {
    match (&scene.spec, &*scene.data, &scene.live) {
        (ChartSpec::Bar(s), SceneData::Table(d), _) => bar_marks(s, d, &scene.plot),
        (ChartSpec::MultiLine(s), SceneData::Table(d), _) => multiline_marks(s, d, &scene.plot),
        (ChartSpec::Network(_), SceneData::Graph(g), LiveState::Network { layout, .. }) => {
            Ok(network_marks(g, layout))
        }
        (ChartSpec::DimpVis(s), SceneData::Table(d), LiveState::DimpVis { built, state }) => {
            Ok(dimpvis_marks(s, d, &scene.plot, built, state))
        }
        _ => Err(SceneError::spec("kind", "chart spec does not match its data")),
    }
}

fn bar_marks(spec: &BarSpec, d: &Dataset, plot: &PlotArea) -> Result<Vec<Mark>, SceneError> {
    let cat = require(d, &spec.category_field)?;
    let val = require_numeric(d, &spec.value_field)?;
    let mut categories: Vec<String> = Vec::with_capacity(d.len());
    for v in d.values(cat) {
        let c = v.to_string();
        if categories.contains(&c) {
            return Err(SceneError::spec(&spec.category_field, format!("duplicate category `{c}`")));
        }
        categories.push(c);
    }
    if d.values(val).any(|v| num(v) < 0.0) {
        return Err(SceneError::spec(&spec.value_field, "negative values are not supported"));
    }
    let max = d.values(val).map(num).fold(0.0, f64::max);
    let bands = BandScale::new(categories.clone(), plot.width(), BAR_PADDING)
        .map_err(|_| SceneError::spec(&spec.category_field, "no categories"))?;
    let height = LinearScale::new((0.0, max), (0.0, plot.height())).ok();

    let mut out = axes(plot);
    let mut bars = Vec::with_capacity(d.len());
    for (row, c) in categories.iter().enumerate() {
        let band = bands.band_at(row);
        let h = height.map_or(0.0, |s| s.scale(num(&d.rows[row][val])));
        let x = plot.x0 + band.offset;
        out.push(text(
            format!("label:{c}"),
            x + band.width / 2.0,
            plot.y1 + LABEL_GAP,
            c.clone(),
            "label",
        ));
        bars.push(Mark {
            id: format!("bar:{c}"),
            shape: Shape::Rect {
                x,
                y: plot.y1 - h,
                w: band.width,
                h,
            },
            layer: Layer::Marks,
            datum: DatumRef::Row(row),
            hit: true,
            style: Style::colored("bar", 0),
        });
    }
    out.push(text(
        "tick:y-max".into(),
        plot.x0 - 0.01,
        plot.y0,
        format_number(max),
        "tick",
    ));
    out.extend(bars);
    Ok(out)
}

fn multiline_marks(spec: &MultiLineSpec, d: &Dataset, plot: &PlotArea) -> Result<Vec<Mark>, SceneError> {
    let xc = require_numeric(d, &spec.x_field)?;
    let yc = require_numeric(d, &spec.y_field)?;
    let sc = require(d, &spec.series_field)?;

    let x_scale = LinearScale::or_midpoint(extent(d.values(xc).map(num)), (plot.x0, plot.x1));
    let y_scale = LinearScale::or_midpoint(extent(d.values(yc).map(num)), (plot.y1, plot.y0));

    let mut series: Vec<(String, Vec<usize>)> = Vec::new();
    for (row, r) in d.rows.iter().enumerate() {
        let name = r[sc].to_string();
        match series.iter_mut().find(|(n, _)| *n == name) {
            Some((_, rows)) => rows.push(row),
            None => series.push((name, vec![row])),
        }
    }

    let mut out = axes(plot);
    let mut points = Vec::with_capacity(d.len());
    for (color, (name, rows)) in series.iter_mut().enumerate() {
        rows.sort_by(|&a, &b| num(&d.rows[a][xc]).total_cmp(&num(&d.rows[b][xc])));
        let pts: Vec<Point2> = rows
            .iter()
            .map(|&r| Point2::new(x_scale.scale(num(&d.rows[r][xc])), y_scale.scale(num(&d.rows[r][yc]))))
            .collect();
        for (&row, p) in rows.iter().zip(&pts) {
            points.push(Mark {
                id: format!("point:{row}"),
                shape: Shape::Circle {
                    cx: p.x,
                    cy: p.y,
                    r: POINT_RADIUS,
                },
                layer: Layer::Marks,
                datum: DatumRef::Row(row),
                hit: true,
                style: Style::colored("point", color),
            });
        }
        out.push(Mark {
            id: format!("series:{name}"),
            shape: Shape::Polyline { points: pts },
            layer: Layer::Marks,
            datum: DatumRef::None,
            hit: false,
            style: Style::colored("line", color),
        });
    }
    out.extend(points);
    Ok(out)
}

fn network_marks(g: &GraphData, layout: &LayoutState) -> Vec<Mark> {
    let pos = &layout.positions;
    let mut out = Vec::with_capacity(g.links.len() + 2 * g.len());
    for (i, &(s, t)) in g.edges().iter().enumerate() {
        out.push(Mark {
            id: format!("edge:{i}"),
            shape: Shape::Polyline {
                points: vec![pos[s], pos[t]],
            },
            layer: Layer::Marks,
            datum: DatumRef::None,
            hit: false,
            style: Style::role("edge"),
        });
    }
    for (i, node) in g.nodes.iter().enumerate() {
        out.push(Mark {
            id: format!("node:{}", node.id),
            shape: Shape::Circle {
                cx: pos[i].x,
                cy: pos[i].y,
                r: NODE_RADIUS,
            },
            layer: Layer::Marks,
            datum: DatumRef::Node(i),
            hit: true,
            style: Style::colored("node", 0),
        });
    }
    for (i, node) in g.nodes.iter().enumerate() {
        let mut m = text(
            format!("node-label:{}", node.id),
            pos[i].x + NODE_RADIUS * 1.5,
            pos[i].y,
            node.label.clone().unwrap_or_else(|| node.id.clone()),
            "label",
        );
        m.layer = Layer::Marks;
        out.push(m);
    }
    out
}

fn dimpvis_marks(spec: &DimpVisSpec, d: &Dataset, plot: &PlotArea, built: &Trajectories, state: &DimpState) -> Vec<Mark> {
    let mut out = axes(plot);
    out.push(text("label:x".into(), plot.x1, plot.y1 + LABEL_GAP, spec.x_field.clone(), "label"));
    out.push(text("label:y".into(), plot.x0, plot.y0 - 0.01, spec.y_field.clone(), "label"));
    out.push(text(
        "time-label".into(),
        plot.x1 - 0.12,
        plot.y1 - 0.05,
        state.cursor.label().to_string(),
        "time_label",
    ));
    let _ = d;
    if let Some(traj) = state.grabbed.as_deref().and_then(|e| built.get(e)) {
        out.push(Mark {
            id: format!("trail:{}", traj.entity),
            shape: Shape::Polyline {
                points: traj.local_segment(state.cursor.t, state.window).to_vec(),
            },
            layer: Layer::Background,
            datum: DatumRef::None,
            hit: false,
            style: Style::role("trail"),
        });
    }
    let placements = dimpvis::positions_at(&built.trajectories, state.cursor.t);
    for (i, (traj, p)) in built.trajectories.iter().zip(placements).enumerate() {
        out.push(Mark {
            id: format!("bubble:{}", traj.entity),
            shape: Shape::Circle {
                cx: p.position.x,
                cy: p.position.y,
                r: p.size,
            },
            layer: Layer::Marks,
            datum: DatumRef::Entity(i),
            hit: true,
            style: Style::colored("bubble", i),
        });
    }
    out
}
