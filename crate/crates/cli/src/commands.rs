//! Offline batch commands.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use hanstream_core::gesture::GestureConfig;
use hanstream_core::scene::{render_scene, ViewTransform};
use hanstream_core::session::SessionConfig;
use hanstream_core::story::{parse_story, Story};
use hanstream_core::svg::render_svg;
use hanstream_core::trace::{classify_trace, read_trace, replay_to_writer, write_jsonl, TraceError, TraceRecord};

use crate::CliError;

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

pub fn load_story(path: &Path) -> Result<Story, CliError> {
    let bytes = std::fs::read(path).map_err(|e| io_error(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_story(&bytes, base).map_err(|e| CliError::Validation(format!("{}: [{}] {e}", path.display(), e.code())))
}

pub fn load_trace(path: &Path) -> Result<Vec<TraceRecord>, CliError> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    read_trace(BufReader::new(file)).map_err(|e| match e {
        TraceError::Line { .. } => CliError::Validation(format!("{}: {e}", path.display())),
        TraceError::Io(e) => io_error(path, e),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| io_error(path, e))
}

pub fn replay(story: &Path, trace: &Path, out: &Path) -> Result<(), CliError> {
    let story = load_story(story)?;
    let records = load_trace(trace)?;
    let w = create(out)?;
    let summary = replay_to_writer(story, records, SessionConfig::default(), w).map_err(|e| io_error(out, e))?;
    println!("frames: {}", summary.frames);
    println!("messages: {}", summary.messages);
    let gestures: Vec<String> = summary.gestures.iter().map(|(k, n)| format!("{k}={n}")).collect();
    println!("gestures: {}", if gestures.is_empty() { "none".to_string() } else { gestures.join(" ") });
    println!("final scene: {} (seq {})", summary.final_scene, summary.final_state.seq);
    Ok(())
}

pub fn classify(trace: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let records = load_trace(trace)?;
    let lines = classify_trace(&records, &GestureConfig::default());
    match out {
        Some(path) => {
            let mut w = create(path)?;
            write_jsonl(&mut w, &lines).and_then(|_| w.flush()).map_err(|e| io_error(path, e))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write_jsonl(&mut w, &lines).and_then(|_| w.flush()).map_err(|e| CliError::Runtime(e.to_string()))
        }
    }
}

pub struct RenderArgs {
    pub story: PathBuf,
    pub scene: String,
    pub scale: Option<f64>,
    pub tx: Option<f64>,
    pub ty: Option<f64>,
    pub time: Option<f64>,
    pub highlight: Option<String>,
    pub out: PathBuf,
}

pub fn render(args: &RenderArgs) -> Result<(), CliError> {
    let story = load_story(&args.story)?;
    let Some(index) = story.script.index_of(&args.scene) else {
        let ids: Vec<&str> = story.script.scenes.iter().map(|s| s.id.as_str()).collect();
        return Err(CliError::Validation(format!(
            "unknown scene `{}` (available: {})",
            args.scene,
            ids.join(", ")
        )));
    };
    let mut scene = story.scene(index);
    if let Some(t) = args.time {
        let Some(state) = scene.dimp_state() else {
            return Err(CliError::Validation(format!("scene `{}` has no time axis", args.scene)));
        };
        let max_t = state.cursor.max_t();
        if !(0.0..=max_t).contains(&t) {
            return Err(CliError::Validation(format!("--time must lie in [0, {max_t}]")));
        }
        scene.set_time(t);
    }
    if args.scale.is_some() || args.tx.is_some() || args.ty.is_some() {
        let s = args.scale.unwrap_or(1.0);
        if !(ViewTransform::MIN_SCALE..=ViewTransform::MAX_SCALE).contains(&s) {
            return Err(CliError::Validation(format!(
                "--scale must lie in [{}, {}]",
                ViewTransform::MIN_SCALE,
                ViewTransform::MAX_SCALE
            )));
        }
        let (tx, ty) = (args.tx.unwrap_or(0.0), args.ty.unwrap_or(0.0));
        if !tx.is_finite() || !ty.is_finite() {
            return Err(CliError::Validation("--tx and --ty must be finite".into()));
        }
        scene.transform = ViewTransform::new(s, tx, ty);
    }
    if let Some(id) = &args.highlight {
        if !scene.set_highlight(id) {
            return Err(CliError::Validation(format!("no mark `{id}` in scene `{}`", args.scene)));
        }
    }
    let svg = render_svg(&render_scene(&scene));
    let mut w = create(&args.out)?;
    w.write_all(svg.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| io_error(&args.out, e))
}

pub fn validate(path: &Path) -> Result<(), CliError> {
    let story = load_story(path)?;
    println!("ok: \"{}\" ({} scenes)", story.script.title, story.len());
    for def in &story.script.scenes {
        let gestures: Vec<&str> = def.gestures.iter().map(|g| g.as_str()).collect();
        println!("  {:<16} {:<10} {:<20} [{}]", def.id, def.chart.kind_name(), def.data, gestures.join(", "));
    }
    Ok(())
}
