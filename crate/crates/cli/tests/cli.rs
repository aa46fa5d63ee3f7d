use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};

use hanstream_core::landmark::Handedness;
use hanstream_core::session::InboundMessage;
use hanstream_core::synthetic::{raw_frame, Pose, SyntheticHand};
use hanstream_core::trace::{write_jsonl, TraceRecord};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hanstream"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn golden(name: &str) -> String {
    root().join("crates/core/tests/golden").join(name).display().to_string()
}

fn demo_story() -> String {
    root().join("demo/story.json").display().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_exit_codes() {
    let ok = run(&["validate", "--story", &demo_story()]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    assert!(stdout(&ok).contains("4 scenes"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"title": "t", "scenes": [{"id": "a", "chart": {"kind": "pie"}, "data": "x.csv"}]}"#).unwrap();
    let out = run(&["validate", "--story", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("[schema_error]"), "{}", stderr(&out));

    let out = run(&["validate", "--story", s(&dir.path().join("absent.json"))]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["validate", "--story", &demo_story(), "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("Usage"));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn replay_matches_the_golden_log() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    let story = golden("story.json");
    let trace = golden("trace.jsonl");
    let out = run(&["replay", "--story", &story, "--trace", &trace, "--out", s(&a)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("frames: 500"), "{text}");
    assert!(text.contains("pinch=1"), "{text}");
    assert!(text.contains("final scene: regions"), "{text}");
    run(&["replay", "--story", &story, "--trace", &trace, "--out", s(&b)]);
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    assert_eq!(first, std::fs::read(golden("replay.jsonl")).unwrap());

    let missing = run(&["replay", "--story", &story, "--trace", s(&dir.path().join("none.jsonl")), "--out", s(&a)]);
    assert_eq!(missing.status.code(), Some(2));

    let broken = dir.path().join("broken.jsonl");
    std::fs::write(&broken, "{\"t\":0,\"msg\":{\"type\":\"control\",\"command\":\"next\"}}\n{oops\n").unwrap();
    let out = run(&["replay", "--story", &story, "--trace", s(&broken), "--out", s(&a)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

fn open_palm_trace(path: &Path, n: i64) {
    let hand = SyntheticHand::new(Pose::OpenPalm).build(Handedness::Left);
    let records: Vec<TraceRecord> = (0..n)
        .map(|i| TraceRecord {
            t: i * 33,
            msg: InboundMessage::LandmarkFrame(raw_frame(i * 33, vec![hand.clone()])),
        })
        .collect();
    let mut buf = Vec::new();
    write_jsonl(&mut buf, &records).unwrap();
    std::fs::write(path, buf).unwrap();
}

#[test]
fn classify_open_palms() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("palms.jsonl");
    open_palm_trace(&trace, 12);
    let out = run(&["classify", "--trace", s(&trace)]);
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<serde_json::Value> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 12);
    for l in &lines {
        assert_eq!(l["kind"], "open_palm");
        // Built in screen space, sent raw, mirrored back on ingest.
        assert_eq!(l["hand"], "Left");
        assert!(l["angles"]["index"].as_f64().unwrap() > 130.0);
    }

    let file = dir.path().join("out.jsonl");
    assert_eq!(run(&["classify", "--trace", s(&trace), "--out", s(&file)]).status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&file).unwrap(), stdout(&out));

    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let out = run(&["classify", "--trace", s(&empty)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());

    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "\n\nnot json\n").unwrap();
    let out = run(&["classify", "--trace", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 3"));
}

fn attr(tag: &str, name: &str) -> f64 {
    let key = format!(" {name}=\"");
    let start = tag.find(&key).unwrap() + key.len();
    let end = start + tag[start..].find('"').unwrap();
    tag[start..end].parse().unwrap()
}

fn bar_tags(svg: &str) -> Vec<String> {
    svg.lines().filter(|l| l.contains("data-id=\"bar:")).map(str::to_string).collect()
}

#[test]
fn render_bar_scene() {
    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("plain.svg");
    let again = dir.path().join("again.svg");
    let zoomed = dir.path().join("zoomed.svg");
    let story = demo_story();
    let base = ["render", "--story", story.as_str(), "--scene", "regions"];
    let out = bin().args(base).args(["--out", s(&plain)]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    bin().args(base).args(["--out", s(&again)]).output().unwrap();
    let svg = std::fs::read_to_string(&plain).unwrap();
    assert_eq!(svg, std::fs::read_to_string(&again).unwrap());
    assert!(svg.starts_with("<svg"));
    let bars = bar_tags(&svg);
    assert_eq!(bars.len(), 5);

    let out = bin()
        .args(base)
        .args(["--scale", "2", "--tx", "-0.1", "--ty", "-0.5", "--out", s(&zoomed)])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let zbars = bar_tags(&std::fs::read_to_string(&zoomed).unwrap());
    for (p, z) in bars.iter().zip(&zbars) {
        assert!((attr(z, "x") - (2.0 * attr(p, "x") - 100.0)).abs() < 0.01);
        assert!((attr(z, "y") - (2.0 * attr(p, "y") - 500.0)).abs() < 0.01);
        assert!((attr(z, "width") - 2.0 * attr(p, "width")).abs() < 0.01);
    }

    let out = bin().args(base).args(["--highlight", "bar:Asia", "--out", s(&plain)]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let svg = std::fs::read_to_string(&plain).unwrap();
    let layers: Vec<&str> = svg
        .lines()
        .filter_map(|l| l.split("data-layer=\"").nth(1))
        .map(|r| &r[..r.find('"').unwrap()])
        .collect();
    let order = |l: &str| ["background", "marks", "highlight", "overlay"].iter().position(|x| *x == l).unwrap();
    assert!(layers.windows(2).all(|w| order(w[0]) <= order(w[1])));
    assert!(svg.contains("1395"));

    let out = run(&["render", "--story", &story, "--scene", "nope", "--out", s(&plain)]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["render", "--story", &story, "--scene", "regions", "--scale", "20", "--out", s(&plain)]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["render", "--story", &story, "--scene", "fertility", "--time", "2", "--out", s(&plain)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(&plain).unwrap().contains(">1960</text>"));
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn start_server(story: &str, record: &Path) -> (Server, String) {
    let mut child = bin()
        .args(["serve", "--story", story, "--port", "0", "--record", s(record)])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stderr.take().unwrap()).lines();
    let url = loop {
        let line = lines.next().expect("server prints its address").unwrap();
        if let Some(rest) = line.strip_prefix("listening on ") {
            break rest.trim().to_string();
        }
    };
    std::thread::spawn(move || for _ in lines {});
    (Server(child), url)
}

#[test]
fn serve_stream_and_status() {
    let dir = tempfile::tempdir().unwrap();
    let recorded = dir.path().join("recorded.jsonl");
    let (_server, url) = start_server(&golden("story.json"), &recorded);

    let log = dir.path().join("log.jsonl");
    let out = run(&["stream", "--url", &url, "--trace", &golden("trace.jsonl"), "--out", s(&log)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("final scene: regions"), "{text}");
    assert!(text.contains("errors: 0"), "{text}");

    let out = run(&["status", "--url", &url, "--session", "default"]);
    assert_eq!(out.status.code(), Some(0));
    let status: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(status["scene_id"], "regions");
    let frames = status["stats"]["frames"].as_u64().unwrap();
    let dropped = status["stats"]["queue_dropped"].as_u64().unwrap();
    assert_eq!(frames + dropped, 500);

    // The server's own recording replays to exactly what the presenter received.
    let replayed = dir.path().join("replayed.jsonl");
    let out = run(&["replay", "--story", &golden("story.json"), "--trace", s(&recorded), "--out", s(&replayed)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(std::fs::read(&replayed).unwrap(), std::fs::read(&log).unwrap());

    let out = run(&["status", "--url", &url, "--session", "nope"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["status", "--url", "http://127.0.0.1:1"]);
    assert_eq!(out.status.code(), Some(2));
}
