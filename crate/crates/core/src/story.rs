//! Story scripts: ordered scenes with data bindings, enabled interactions, and
//! transitions; plus navigation with per-scene state persistence.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::data::{load_dataset, DataFormat};
use crate::interaction::{Interaction, InteractionConfig};
use crate::layout::GraphData;
use crate::scene::{ChartSpec, Scene, SceneData, SceneError, ScenePersist};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionKind {
    #[default]
    Cut,
    Fade,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transition {
    pub kind: TransitionKind,
    #[serde(default)]
    pub duration_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDef {
    pub id: String,
    pub chart: ChartSpec,
    /// Data file, relative to the story file's directory.
    pub data: String,
    #[serde(default = "Interaction::defaults")]
    pub gestures: BTreeSet<Interaction>,
    #[serde(default)]
    pub transition: Transition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoryScript {
    pub title: String,
    pub scenes: Vec<SceneDef>,
}

impl StoryScript {
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.scenes.iter().position(|s| s.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StoryError {
    #[error("schema error at `{path}`: {detail}")]
    Schema { path: String, detail: String },
    #[error("duplicate scene id `{0}`")]
    DuplicateId(String),
    #[error("scene `{scene}` enables {gesture}, which its chart does not support")]
    UnsupportedGesture { scene: String, gesture: &'static str },
    #[error("data file `{0}` cannot be read")]
    MissingData(String),
    #[error("scene `{scene}`: {source}")]
    InvalidData { scene: String, source: SceneError },
}

impl StoryError {
    /// Stable machine-readable code used on the wire and in CLI output.
    pub fn code(&self) -> &'static str {
        match self {
            StoryError::Schema { .. } => "schema_error",
            StoryError::DuplicateId(_) => "duplicate_id",
            StoryError::UnsupportedGesture { .. } => "unsupported_gesture",
            StoryError::MissingData(_) => "missing_data",
            StoryError::InvalidData { .. } => "invalid_data",
        }
    }
}

/// A validated script with every scene built once from its data.
#[derive(Debug, Clone)]
pub struct Story {
    pub script: StoryScript,
    pub base_dir: PathBuf,
    initial: Vec<Scene>,
}

impl Story {
    pub fn len(&self) -> usize {
        self.script.scenes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.script.scenes.is_empty()
    }

    /// Fresh copy of scene `index` as built from its data.
    pub fn scene(&self, index: usize) -> Scene {
        self.initial[index].clone()
    }

    pub fn def(&self, index: usize) -> &SceneDef {
        &self.script.scenes[index]
    }

    pub fn interaction_config(&self, index: usize) -> InteractionConfig {
        InteractionConfig::with_enabled(self.def(index).gestures.clone())
    }
}

fn schema(path: impl Into<String>, detail: impl Into<String>) -> StoryError {
    StoryError::Schema {
        path: path.into(),
        detail: detail.into(),
    }
}

/// Parses a story document and eagerly loads and checks every scene's data.
pub fn parse_story(document: &[u8], base_dir: &Path) -> Result<Story, StoryError> {
    let de = &mut serde_json::Deserializer::from_slice(document);
    let script: StoryScript = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(path, e.into_inner().to_string())
    })?;
    load_story(script, base_dir)
}

pub fn parse_story_file(path: &Path) -> Result<Story, StoryError> {
    let bytes = std::fs::read(path).map_err(|_| StoryError::MissingData(path.display().to_string()))?;
    parse_story(&bytes, path.parent().unwrap_or(Path::new(".")))
}

/// Validates an already-deserialized script.
pub fn load_story(script: StoryScript, base_dir: &Path) -> Result<Story, StoryError> {
    if script.scenes.is_empty() {
        return Err(schema("scenes", "a story needs at least one scene"));
    }
    let mut seen = BTreeSet::new();
    for def in &script.scenes {
        if !seen.insert(def.id.as_str()) {
            return Err(StoryError::DuplicateId(def.id.clone()));
        }
    }
    let mut cache: BTreeMap<(String, Option<String>), Arc<SceneData>> = BTreeMap::new();
    let mut initial = Vec::with_capacity(script.scenes.len());
    for (i, def) in script.scenes.iter().enumerate() {
        if def.gestures.contains(&Interaction::Pinch) && !def.chart.supports_pinch() {
            return Err(StoryError::UnsupportedGesture {
                scene: def.id.clone(),
                gesture: Interaction::Pinch.as_str(),
            });
        }
        let key = (def.data.clone(), def.chart.time_field().map(str::to_string));
        let data = match cache.get(&key) {
            Some(d) => d.clone(),
            None => {
                let d = Arc::new(load_scene_data(i, def, base_dir)?);
                cache.insert(key, d.clone());
                d
            }
        };
        let scene = Scene::build(&def.chart, data).map_err(|source| StoryError::InvalidData {
            scene: def.id.clone(),
            source,
        })?;
        initial.push(scene);
    }
    Ok(Story {
        script,
        base_dir: base_dir.to_path_buf(),
        initial,
    })
}

fn load_scene_data(index: usize, def: &SceneDef, base_dir: &Path) -> Result<SceneData, StoryError> {
    let path = base_dir.join(&def.data);
    let bytes = std::fs::read(&path).map_err(|_| StoryError::MissingData(def.data.clone()))?;
    let invalid = |source: SceneError| StoryError::InvalidData {
        scene: def.id.clone(),
        source,
    };
    match &def.chart {
        ChartSpec::Network(spec) => GraphData::from_json(&bytes, &spec.nodes_source, &spec.links_source)
            .map(SceneData::Graph)
            .map_err(|e| invalid(e.into())),
        chart => {
            let format = DataFormat::from_extension(&path)
                .ok_or_else(|| schema(format!("scenes[{index}].data"), "expected a .csv or .json file"))?;
            load_dataset(&bytes, format, chart.time_field())
                .map(SceneData::Table)
                .map_err(|e| invalid(e.into()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum NavCommand {
    Next,
    Prev,
    Goto { id: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionPlan {
    pub from: String,
    pub to: String,
    pub transition: Transition,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no scene with id `{0}`")]
pub struct UnknownScene(pub String);

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StoryState {
    pub current: usize,
    pub saved: BTreeMap<String, ScenePersist>,
}

/// Moves to another scene. `outgoing` is the current scene's state, saved for
/// a later return. At either end Next/Prev leave the state alone and yield no plan.
pub fn navigate(
    state: &StoryState,
    script: &StoryScript,
    cmd: &NavCommand,
    outgoing: ScenePersist,
) -> Result<(StoryState, Option<TransitionPlan>), UnknownScene> {
    let last = script.scenes.len() - 1;
    let target = match cmd {
        NavCommand::Next => (state.current + 1).min(last),
        NavCommand::Prev => state.current.saturating_sub(1),
        NavCommand::Goto { id } => script.index_of(id).ok_or_else(|| UnknownScene(id.clone()))?,
    };
    if target == state.current {
        return Ok((state.clone(), None));
    }
    let from = &script.scenes[state.current];
    let mut next = state.clone();
    next.saved.insert(from.id.clone(), outgoing);
    next.current = target;
    let plan = TransitionPlan {
        from: from.id.clone(),
        to: script.scenes[target].id.clone(),
        transition: from.transition,
    };
    Ok((next, Some(plan)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::ViewTransform;

    fn fixture_dir() -> PathBuf {
        let dir = std::env::temp_dir().join(format!("hanstream-story-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("bars.csv"), "c,v\nA,1\nB,2\nC,3\n").unwrap();
        dir
    }

    fn doc(scenes: &str) -> Vec<u8> {
        format!(r#"{{"title": "t", "scenes": [{scenes}]}}"#).into_bytes()
    }

    const BAR: &str = r#"{"kind": "bar", "category_field": "c", "value_field": "v"}"#;
    const LINE: &str = r#"{"kind": "multiline", "x_field": "v", "y_field": "v", "series_field": "c"}"#;

    #[test]
    fn minimal_story_defaults() {
        let dir = fixture_dir();
        let story = parse_story(&doc(&format!(r#"{{"id": "a", "chart": {BAR}, "data": "bars.csv"}}"#)), &dir).unwrap();
        assert_eq!(story.def(0).gestures, Interaction::defaults());
        assert_eq!(story.def(0).transition, Transition::default());
    }

    #[test]
    fn error_table() {
        let dir = fixture_dir();
        let dup = doc(&format!(
            r#"{{"id": "a", "chart": {BAR}, "data": "bars.csv"}}, {{"id": "a", "chart": {BAR}, "data": "bars.csv"}}"#
        ));
        assert_eq!(parse_story(&dup, &dir).unwrap_err().code(), "duplicate_id");

        let pinch = doc(&format!(r#"{{"id": "l", "chart": {LINE}, "data": "bars.csv", "gestures": ["point", "pinch"]}}"#));
        assert_eq!(
            parse_story(&pinch, &dir).unwrap_err(),
            StoryError::UnsupportedGesture {
                scene: "l".into(),
                gesture: "pinch"
            }
        );

        let missing = doc(&format!(r#"{{"id": "a", "chart": {BAR}, "data": "nope.csv"}}"#));
        assert_eq!(parse_story(&missing, &dir).unwrap_err().code(), "missing_data");

        let kind = doc(r#"{"id": "a", "chart": {"kind": "pie"}, "data": "bars.csv"}"#);
        let err = parse_story(&kind, &dir).unwrap_err();
        assert!(matches!(&err, StoryError::Schema { path, .. } if path.starts_with("scenes[0].chart")), "{err:?}");

        let field = doc(r#"{"id": "a", "chart": {"kind": "bar", "category_field": "c", "value_field": "zz"}, "data": "bars.csv"}"#);
        assert_eq!(parse_story(&field, &dir).unwrap_err().code(), "invalid_data");
    }

    #[test]
    fn navigation_clamps_and_persists() {
        let dir = fixture_dir();
        let story = parse_story(
            &doc(&format!(
                r#"{{"id": "a", "chart": {BAR}, "data": "bars.csv", "transition": {{"kind": "fade", "duration_ms": 300}}}},
                   {{"id": "b", "chart": {BAR}, "data": "bars.csv"}}"#
            )),
            &dir,
        )
        .unwrap();
        let script = &story.script;
        let zoomed = ScenePersist {
            transform: ViewTransform::new(2.0, -0.5, -0.5),
            time: None,
            layout: None,
        };
        let s0 = StoryState::default();
        let (s1, plan) = navigate(&s0, script, &NavCommand::Next, zoomed.clone()).unwrap();
        assert_eq!(s1.current, 1);
        assert_eq!(plan.unwrap().transition.kind, TransitionKind::Fade);
        let (s2, plan) = navigate(&s1, script, &NavCommand::Next, story.scene(1).persist()).unwrap();
        assert_eq!((s2.current, plan), (1, None));
        let (s3, _) = navigate(&s2, script, &NavCommand::Prev, story.scene(1).persist()).unwrap();
        assert_eq!(s3.current, 0);
        assert_eq!(s3.saved["a"], zoomed);
        assert_eq!(
            navigate(&s3, script, &NavCommand::Goto { id: "zz".into() }, zoomed).unwrap_err(),
            UnknownScene("zz".into())
        );
    }

    #[test]
    fn script_round_trips() {
        let dir = fixture_dir();
        let story = parse_story(&doc(&format!(r#"{{"id": "a", "chart": {BAR}, "data": "bars.csv"}}"#)), &dir).unwrap();
        let json = serde_json::to_vec(&story.script).unwrap();
        assert_eq!(parse_story(&json, &dir).unwrap().script, story.script);
    }
}
