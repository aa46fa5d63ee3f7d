//! Chart scenes: specs bound to data, world-space marks, the view transform,
//! highlight state, hit-testing, and render-command generation.

mod build;
mod render;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use render::{render_scene, RenderCommand};

use crate::data::{DataError, Dataset};
use crate::dimpvis::{self, DimpState, DimpVisError, TimeCursor, Trajectories};
use crate::landmark::Point2;
use crate::layout::{self, GraphData, GraphError, LayoutParams, LayoutState};

pub const DEFAULT_HIT_RADIUS: f64 = 0.02;
pub const POINT_RADIUS: f64 = 0.01;
pub const NODE_RADIUS: f64 = 0.015;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SceneError {
    #[error("field `{field}`: {detail}")]
    Spec { field: String, detail: String },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    DimpVis(#[from] DimpVisError),
}

impl SceneError {
    fn spec(field: &str, detail: impl Into<String>) -> Self {
        SceneError::Spec {
            field: field.to_string(),
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarSpec {
    pub category_field: String,
    pub value_field: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiLineSpec {
    pub x_field: String,
    pub y_field: String,
    pub series_field: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    #[serde(default = "default_nodes_key")]
    pub nodes_source: String,
    #[serde(default = "default_links_key")]
    pub links_source: String,
}

fn default_nodes_key() -> String {
    "nodes".into()
}

fn default_links_key() -> String {
    "links".into()
}

impl Default for NetworkSpec {
    fn default() -> Self {
        NetworkSpec {
            nodes_source: default_nodes_key(),
            links_source: default_links_key(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimpVisSpec {
    pub entity_field: String,
    pub time_field: String,
    pub x_field: String,
    pub y_field: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size_field: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ChartSpec {
    #[serde(rename = "bar")]
    Bar(BarSpec),
    #[serde(rename = "multiline")]
    MultiLine(MultiLineSpec),
    #[serde(rename = "network")]
    Network(NetworkSpec),
    #[serde(rename = "dimpvis")]
    DimpVis(DimpVisSpec),
}

impl ChartSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ChartSpec::Bar(_) => "bar",
            ChartSpec::MultiLine(_) => "multiline",
            ChartSpec::Network(_) => "network",
            ChartSpec::DimpVis(_) => "dimpvis",
        }
    }

    /// Pinch-drag is only meaningful on charts with draggable points.
    pub fn supports_pinch(&self) -> bool {
        matches!(self, ChartSpec::Network(_) | ChartSpec::DimpVis(_))
    }

    /// Column to parse as a sortable time key when loading this chart's data.
    pub fn time_field(&self) -> Option<&str> {
        match self {
            ChartSpec::DimpVis(s) => Some(&s.time_field),
            _ => None,
        }
    }
}

/// Data bound to a scene: a table for most charts, a graph for networks.
#[derive(Debug, Clone, PartialEq)]
pub enum SceneData {
    Table(Dataset),
    Graph(GraphData),
}

/// Region of world space `[0,1]²` reserved for data marks; axes and labels sit around it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlotArea {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Default for PlotArea {
    fn default() -> Self {
        PlotArea {
            x0: 0.1,
            y0: 0.05,
            x1: 0.95,
            y1: 0.9,
        }
    }
}

impl PlotArea {
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }
}

/// `screen = world · s + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewTransform {
    pub s: f64,
    pub tx: f64,
    pub ty: f64,
}

impl Default for ViewTransform {
    fn default() -> Self {
        ViewTransform::IDENTITY
    }
}

impl ViewTransform {
    pub const IDENTITY: ViewTransform = ViewTransform {
        s: 1.0,
        tx: 0.0,
        ty: 0.0,
    };
    pub const MIN_SCALE: f64 = 0.25;
    pub const MAX_SCALE: f64 = 8.0;

    pub fn new(s: f64, tx: f64, ty: f64) -> Self {
        ViewTransform { s, tx, ty }
    }

    pub fn apply(&self, world: Point2) -> Point2 {
        Point2::new(world.x * self.s + self.tx, world.y * self.s + self.ty)
    }

    pub fn invert(&self, screen: Point2) -> Point2 {
        Point2::new((screen.x - self.tx) / self.s, (screen.y - self.ty) / self.s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Background,
    Marks,
    Highlight,
    Overlay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    Rect { x: f64, y: f64, w: f64, h: f64 },
    Circle { cx: f64, cy: f64, r: f64 },
    Polyline { points: Vec<Point2> },
    Text { x: f64, y: f64, content: String },
}

/// Renderer-agnostic style token. Clients choose concrete colours.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Style {
    pub role: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<u32>,
    #[serde(default)]
    pub emphasis: bool,
}

impl Style {
    pub fn role(role: &str) -> Self {
        Style {
            role: role.to_string(),
            color: None,
            emphasis: false,
        }
    }

    pub fn colored(role: &str, color: usize) -> Self {
        Style {
            color: Some(color as u32),
            ..Style::role(role)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatumRef {
    None,
    Row(usize),
    Node(usize),
    Entity(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mark {
    pub id: String,
    pub shape: Shape,
    pub layer: Layer,
    pub datum: DatumRef,
    pub hit: bool,
    pub style: Style,
}

impl Mark {
    /// Where a tooltip attaches: top centre of a rect, top of a circle.
    pub fn anchor(&self) -> Point2 {
        match &self.shape {
            Shape::Rect { x, y, w, .. } => Point2::new(x + w / 2.0, *y),
            Shape::Circle { cx, cy, r } => Point2::new(*cx, cy - r),
            Shape::Polyline { points } => points.first().copied().unwrap_or_default(),
            Shape::Text { x, y, .. } => Point2::new(*x, *y),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tooltip {
    /// World-space attachment point.
    pub anchor: Point2,
    pub lines: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LiveState {
    Static,
    Network {
        layout: LayoutState,
        params: LayoutParams,
    },
    DimpVis {
        built: Trajectories,
        state: DimpState,
    },
}

/// Per-scene state kept across story navigation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenePersist {
    pub transform: ViewTransform,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Vec<Point2>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub spec: ChartSpec,
    pub data: Arc<SceneData>,
    pub plot: PlotArea,
    pub marks: Vec<Mark>,
    pub transform: ViewTransform,
    pub highlight: Option<String>,
    pub tooltip: Option<Tooltip>,
    pub live: LiveState,
}

/// What a pinch landed on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PinchTarget {
    Node(String),
    Entity(String),
}

impl Scene {
    pub fn build(spec: &ChartSpec, data: Arc<SceneData>) -> Result<Scene, SceneError> {
        let plot = PlotArea::default();
        let live = build::live_state(spec, &data, &plot)?;
        let mut scene = Scene {
            spec: spec.clone(),
            data,
            plot,
            marks: Vec::new(),
            transform: ViewTransform::IDENTITY,
            highlight: None,
            tooltip: None,
            live,
        };
        scene.marks = build::marks(&scene)?;
        Ok(scene)
    }

    pub fn mark(&self, id: &str) -> Option<&Mark> {
        self.marks.iter().find(|m| m.id == id)
    }

    pub fn table(&self) -> Option<&Dataset> {
        match &*self.data {
            SceneData::Table(d) => Some(d),
            SceneData::Graph(_) => None,
        }
    }

    pub fn graph(&self) -> Option<&GraphData> {
        match &*self.data {
            SceneData::Graph(g) => Some(g),
            SceneData::Table(_) => None,
        }
    }

    pub fn dimp_state(&self) -> Option<&DimpState> {
        match &self.live {
            LiveState::DimpVis { state, .. } => Some(state),
            _ => None,
        }
    }

    pub fn time_label(&self) -> Option<&str> {
        self.dimp_state().map(|s| s.cursor.label())
    }

    pub fn layout(&self) -> Option<&LayoutState> {
        match &self.live {
            LiveState::Network { layout, .. } => Some(layout),
            _ => None,
        }
    }

    /// Recomputes marks after live state changed and re-anchors the tooltip.
    pub fn refresh(&mut self) {
        if matches!(self.live, LiveState::Static) {
            return;
        }
        self.marks = build::marks(self).expect("live scenes were validated at build");
        if let Some(id) = self.highlight.clone() {
            self.set_highlight(&id);
        }
    }

    pub fn hit_test(&self, screen: Point2, hit_radius: f64) -> Option<&str> {
        render::hit_test(self, screen, hit_radius)
    }

    pub fn set_highlight(&mut self, id: &str) -> bool {
        let Some(mark) = self.mark(id) else {
            self.clear_highlight();
            return false;
        };
        let tooltip = Tooltip {
            anchor: mark.anchor(),
            lines: self.describe(&mark.datum),
        };
        self.highlight = Some(id.to_string());
        self.tooltip = Some(tooltip);
        true
    }

    pub fn clear_highlight(&mut self) {
        self.highlight = None;
        self.tooltip = None;
    }

    fn describe(&self, datum: &DatumRef) -> Vec<String> {
        match (datum, &*self.data, &self.live) {
            (DatumRef::Row(r), SceneData::Table(d), _) => d.describe_row(*r),
            (DatumRef::Entity(e), SceneData::Table(d), LiveState::DimpVis { built, state }) => {
                d.describe_row(built.trajectories[*e].row_at(state.cursor.t))
            }
            (DatumRef::Node(i), SceneData::Graph(g), _) => {
                let node = &g.nodes[*i];
                let mut lines = vec![format!("id: {}", node.id)];
                if let Some(label) = &node.label {
                    lines.push(format!("label: {label}"));
                }
                lines.push(format!("degree: {}", g.degree(*i)));
                lines
            }
            _ => Vec::new(),
        }
    }

    pub fn pinch_target(&self, mark_id: &str) -> Option<PinchTarget> {
        let mark = self.mark(mark_id)?;
        match (&mark.datum, &*self.data, &self.live) {
            (DatumRef::Node(i), SceneData::Graph(g), _) => Some(PinchTarget::Node(g.nodes[*i].id.clone())),
            (DatumRef::Entity(e), _, LiveState::DimpVis { built, .. }) => {
                Some(PinchTarget::Entity(built.trajectories[*e].entity.clone()))
            }
            _ => None,
        }
    }

    /// Pins a network node under the given screen point.
    pub fn drag_node(&mut self, id: &str, screen: Point2) -> Result<(), GraphError> {
        let world = self.transform.invert(screen);
        let (LiveState::Network { layout, .. }, SceneData::Graph(graph)) = (&mut self.live, &*self.data) else {
            return Err(GraphError::UnknownNode(id.to_string()));
        };
        layout::drag_node(layout, graph, id, world)?;
        self.refresh();
        Ok(())
    }

    pub fn release_node(&mut self, id: &str) -> Result<(), GraphError> {
        let (LiveState::Network { layout, .. }, SceneData::Graph(graph)) = (&mut self.live, &*self.data) else {
            return Err(GraphError::UnknownNode(id.to_string()));
        };
        layout::release_node(layout, graph, id)
    }

    /// One layout integration step while the network is moving or a node is held.
    pub fn tick(&mut self) {
        let (LiveState::Network { layout, params }, SceneData::Graph(graph)) = (&mut self.live, &*self.data) else {
            return;
        };
        if layout.pinned.is_empty() && layout.kinetic_energy() < params.energy_epsilon {
            return;
        }
        layout::layout_step(layout, graph, params);
        self.refresh();
    }

    pub fn grab_entity(&mut self, entity: &str) -> bool {
        let LiveState::DimpVis { built, state } = &mut self.live else {
            return false;
        };
        if built.get(entity).is_none() {
            return false;
        }
        state.grabbed = Some(entity.to_string());
        self.refresh();
        true
    }

    /// Projects a screen-space drag onto the grabbed entity's trajectory and
    /// moves global time there. Returns the new time.
    pub fn scrub_to(&mut self, screen: Point2) -> Option<f64> {
        let world = self.transform.invert(screen);
        let LiveState::DimpVis { built, state } = &mut self.live else {
            return None;
        };
        let traj = built.get(state.grabbed.as_deref()?)?;
        let t = dimpvis::project_drag(traj, world, state.cursor.t, state.window);
        state.cursor.set(t);
        self.refresh();
        Some(t)
    }

    pub fn release_entity(&mut self) {
        if let LiveState::DimpVis { state, .. } = &mut self.live {
            state.grabbed = None;
            self.refresh();
        }
    }

    pub fn set_time(&mut self, t: f64) {
        if let LiveState::DimpVis { state, .. } = &mut self.live {
            state.cursor.set(t);
            self.refresh();
        }
    }

    pub fn persist(&self) -> ScenePersist {
        ScenePersist {
            transform: self.transform,
            time: self.dimp_state().map(|s| s.cursor.t),
            layout: self.layout().map(|l| l.positions.clone()),
        }
    }

    /// Restores transform, time, and node positions. Transient interaction
    /// state (highlight, grabs, pins, velocities) starts fresh.
    pub fn restore(&mut self, saved: &ScenePersist) {
        self.transform = saved.transform;
        self.clear_highlight();
        match &mut self.live {
            LiveState::DimpVis { state, .. } => {
                state.grabbed = None;
                if let Some(t) = saved.time {
                    state.cursor.set(t);
                }
            }
            LiveState::Network { layout, .. } => {
                if let Some(pos) = &saved.layout {
                    if pos.len() == layout.positions.len() {
                        layout.positions = pos.clone();
                        layout.velocities.iter_mut().for_each(|v| *v = (0.0, 0.0));
                        layout.pinned.clear();
                    }
                }
            }
            LiveState::Static => {}
        }
        self.refresh();
    }
}

/// Free-function form of [`Scene::build`].
pub fn build_scene(spec: &ChartSpec, data: Arc<SceneData>) -> Result<Scene, SceneError> {
    Scene::build(spec, data)
}

/// Free-function form of [`Scene::hit_test`] returning an owned id.
pub fn hit_test(scene: &Scene, screen: Point2, hit_radius: f64) -> Option<String> {
    scene.hit_test(screen, hit_radius).map(str::to_string)
}

pub(crate) fn initial_cursor(labels: Vec<String>) -> TimeCursor {
    TimeCursor { t: 0.0, labels }
}
