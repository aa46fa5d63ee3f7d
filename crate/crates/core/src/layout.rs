//! Deterministic spring-embedder layout for network scenes.
//!
//! Forces are evaluated from the positions at the start of a step for every
//! node, then integrated with damped semi-implicit Euler. Pinned nodes are
//! excluded from integration and keep their pin exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize};

use crate::landmark::Point2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("self-loop on node `{0}`")]
    SelfLoop(String),
    #[error("link {0} has a negative or non-finite weight")]
    InvalidWeight(usize),
    #[error("malformed graph document: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    #[serde(deserialize_with = "id_string")]
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    #[serde(deserialize_with = "id_string")]
    pub source: String,
    #[serde(deserialize_with = "id_string")]
    pub target: String,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

/// Node ids may be written as JSON strings or integers.
fn id_string<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Id {
        Text(String),
        Int(i64),
    }
    Ok(match Id::deserialize(d)? {
        Id::Text(s) => s,
        Id::Int(i) => i.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphData {
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
    #[serde(skip)]
    edges: Vec<(usize, usize)>,
}

impl GraphData {
    pub fn new(nodes: Vec<Node>, links: Vec<Link>) -> Result<Self, GraphError> {
        let mut index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.id.as_str(), i).is_some() {
                return Err(GraphError::DuplicateNode(n.id.clone()));
            }
        }
        let mut edges = Vec::with_capacity(links.len());
        for (i, l) in links.iter().enumerate() {
            let lookup = |id: &str| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| GraphError::UnknownNode(id.to_string()))
            };
            let (s, t) = (lookup(&l.source)?, lookup(&l.target)?);
            if s == t {
                return Err(GraphError::SelfLoop(l.source.clone()));
            }
            if !(l.weight >= 0.0 && l.weight.is_finite()) {
                return Err(GraphError::InvalidWeight(i));
            }
            edges.push((s, t));
        }
        Ok(GraphData {
            nodes,
            links,
            edges,
        })
    }

    /// Parses `{"nodes": [...], "links": [...]}`; the two keys can be renamed.
    pub fn from_json(source: &[u8], nodes_key: &str, links_key: &str) -> Result<Self, GraphError> {
        let mut doc: serde_json::Map<String, serde_json::Value> =
            serde_json::from_slice(source).map_err(|e| GraphError::Malformed(e.to_string()))?;
        let mut take = |key: &str| doc.remove(key).unwrap_or(serde_json::Value::Array(vec![]));
        let nodes: Vec<Node> = serde_json::from_value(take(nodes_key))
            .map_err(|e| GraphError::Malformed(format!("{nodes_key}: {e}")))?;
        let links: Vec<Link> = serde_json::from_value(take(links_key))
            .map_err(|e| GraphError::Malformed(format!("{links_key}: {e}")))?;
        GraphData::new(nodes, links)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    /// Link endpoints as node indices, in link order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|&&(s, t)| s == node || t == node).count()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutParams {
    pub k_spring: f64,
    pub rest_length: f64,
    pub k_repulse: f64,
    pub k_center: f64,
    pub damping: f64,
    pub dt: f64,
    pub energy_epsilon: f64,
    pub max_iterations: usize,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            k_spring: 30.0,
            rest_length: 0.15,
            k_repulse: 0.0005,
            k_center: 1.0,
            damping: 0.85,
            dt: 0.02,
            energy_epsilon: 1e-6,
            max_iterations: 2000,
        }
    }
}

const CENTER: (f64, f64) = (0.5, 0.5);
const INIT_RADIUS: f64 = 0.3;
const MIN_DISTANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutState {
    pub positions: Vec<Point2>,
    pub velocities: Vec<(f64, f64)>,
    pub pinned: BTreeMap<usize, Point2>,
}

impl LayoutState {
    pub fn kinetic_energy(&self) -> f64 {
        self.velocities
            .iter()
            .map(|(vx, vy)| 0.5 * (vx * vx + vy * vy))
            .sum()
    }

    pub fn is_pinned(&self, node: usize) -> bool {
        self.pinned.contains_key(&node)
    }
}

/// Places nodes on a circle about the centre at golden-ratio angular spacing.
pub fn init_layout(graph: &GraphData) -> Result<LayoutState, GraphError> {
    if graph.is_empty() {
        return Err(GraphError::EmptyGraph);
    }
    let inv_phi = 2.0 / (1.0 + 5f64.sqrt());
    let positions = (0..graph.len())
        .map(|i| {
            let a = i as f64 * std::f64::consts::TAU * inv_phi;
            Point2::new(CENTER.0 + INIT_RADIUS * a.cos(), CENTER.1 + INIT_RADIUS * a.sin())
        })
        .collect();
    Ok(LayoutState {
        positions,
        velocities: vec![(0.0, 0.0); graph.len()],
        pinned: BTreeMap::new(),
    })
}

/// Unit vector from `j` towards `i` plus their clamped distance. Coincident
/// nodes separate along x, antisymmetrically in (i, j).
fn separation(pi: Point2, pj: Point2, i: usize, j: usize) -> ((f64, f64), f64) {
    let (dx, dy) = (pi.x - pj.x, pi.y - pj.y);
    let d = dx.hypot(dy);
    let dir = if d > 0.0 {
        (dx / d, dy / d)
    } else if i < j {
        (-1.0, 0.0)
    } else {
        (1.0, 0.0)
    };
    (dir, d)
}

pub fn layout_step(state: &mut LayoutState, graph: &GraphData, params: &LayoutParams) {
    let n = state.positions.len();
    let pos = &state.positions;
    let mut force = vec![(0.0, 0.0); n];

    if params.k_repulse != 0.0 {
        for i in 0..n {
            for j in (i + 1)..n {
                let (dir, d) = separation(pos[i], pos[j], i, j);
                let d = d.max(MIN_DISTANCE);
                let f = params.k_repulse / (d * d);
                force[i].0 += f * dir.0;
                force[i].1 += f * dir.1;
                force[j].0 -= f * dir.0;
                force[j].1 -= f * dir.1;
            }
        }
    }

    for &(s, t) in graph.edges() {
        let (dir, d) = separation(pos[s], pos[t], s, t);
        let f = -params.k_spring * (d - params.rest_length);
        force[s].0 += f * dir.0;
        force[s].1 += f * dir.1;
        force[t].0 -= f * dir.0;
        force[t].1 -= f * dir.1;
    }

    for (i, f) in force.iter_mut().enumerate() {
        f.0 += params.k_center * (CENTER.0 - pos[i].x);
        f.1 += params.k_center * (CENTER.1 - pos[i].y);
    }

    for (i, f) in force.into_iter().enumerate() {
        if let Some(pin) = state.pinned.get(&i) {
            state.positions[i] = *pin;
            state.velocities[i] = (0.0, 0.0);
            continue;
        }
        let v = &mut state.velocities[i];
        v.0 = params.damping * (v.0 + f.0 * params.dt);
        v.1 = params.damping * (v.1 + f.1 * params.dt);
        let p = &mut state.positions[i];
        p.x += v.0 * params.dt;
        p.y += v.1 * params.dt;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutRun {
    pub state: LayoutState,
    pub iterations: usize,
    pub converged: bool,
}

/// Steps at least once, then until kinetic energy drops below the threshold
/// or the iteration budget runs out.
pub fn run_until_stable(mut state: LayoutState, graph: &GraphData, params: &LayoutParams) -> LayoutRun {
    let mut iterations = 0;
    while iterations < params.max_iterations.max(1) {
        layout_step(&mut state, graph, params);
        iterations += 1;
        if state.kinetic_energy() < params.energy_epsilon {
            return LayoutRun {
                state,
                iterations,
                converged: true,
            };
        }
    }
    LayoutRun {
        state,
        iterations,
        converged: false,
    }
}

/// Pins a node at `pos` with zero velocity.
pub fn drag_node(state: &mut LayoutState, graph: &GraphData, id: &str, pos: Point2) -> Result<(), GraphError> {
    let i = graph
        .index_of(id)
        .ok_or_else(|| GraphError::UnknownNode(id.to_string()))?;
    let pos = Point2::new(pos.x, pos.y);
    state.pinned.insert(i, pos);
    state.positions[i] = pos;
    state.velocities[i] = (0.0, 0.0);
    Ok(())
}

/// Unpins a node; it resumes free integration from where it is.
pub fn release_node(state: &mut LayoutState, graph: &GraphData, id: &str) -> Result<(), GraphError> {
    let i = graph
        .index_of(id)
        .ok_or_else(|| GraphError::UnknownNode(id.to_string()))?;
    state.pinned.remove(&i);
    Ok(())
}
