use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use futures::{SinkExt, StreamExt};
use hanstream_core::session::{InboundMessage, OutboundMessage, Role, SessionConfig};
use hanstream_core::story::{parse_story_file, NavCommand};
use hanstream_core::synthetic::{raw_frame, Pose, SyntheticHand};
use hanstream_core::landmark::{Handedness, Point2};
use hanstream_core::trace::{read_trace, replay_trace};
use hanstream_server::{serve, ServerConfig};
use serde_json::{json, Value};
use tokio::net::{TcpListener, TcpStream};
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};

type Ws = WebSocketStream<MaybeTlsStream<TcpStream>>;

fn demo_story() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../demo/story.json")
}

async fn start(record: Option<PathBuf>) -> SocketAddr {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let config = ServerConfig {
        story: demo_story(),
        record,
        ..Default::default()
    };
    tokio::spawn(serve(listener, config, std::future::pending()));
    addr
}

async fn connect(addr: SocketAddr) -> Ws {
    let (ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/ws")).await.unwrap();
    ws
}

async fn send(ws: &mut Ws, msg: &InboundMessage) {
    ws.send(Message::Text(serde_json::to_string(msg).unwrap().into())).await.unwrap();
}

async fn recv(ws: &mut Ws) -> OutboundMessage {
    loop {
        let frame = tokio::time::timeout(Duration::from_secs(5), ws.next())
            .await
            .expect("message within 5s")
            .expect("stream open")
            .unwrap();
        if let Message::Text(text) = frame {
            return serde_json::from_str(text.as_str()).unwrap();
        }
    }
}

async fn hello(ws: &mut Ws, role: Role) -> (OutboundMessage, OutboundMessage) {
    send(ws, &InboundMessage::Hello { role, session: None }).await;
    (recv(ws).await, recv(ws).await)
}

fn error_code(msg: &OutboundMessage) -> &str {
    match msg {
        OutboundMessage::Error { code, .. } => code,
        other => panic!("expected an error, got {other:?}"),
    }
}

#[tokio::test]
async fn join_replies_with_story_and_state() {
    let addr = start(None).await;
    let mut ws = connect(addr).await;
    let (info, state) = hello(&mut ws, Role::Presenter).await;
    let OutboundMessage::StoryInfo(info) = info else { panic!("{info:?}") };
    assert_eq!(info.current, 0);
    assert_eq!(info.scenes.len(), 4);
    let state = state.as_scene_state().expect("scene state").clone();
    assert_eq!(state.scene_id, "regions");
    assert_eq!(state.seq, 0);
    assert!(!state.render_commands.is_empty());
}

#[tokio::test]
async fn roles_and_errors() {
    let addr = start(None).await;
    let mut presenter = connect(addr).await;
    let mut viewer = connect(addr).await;
    let mut stranger = connect(addr).await;

    send(&mut stranger, &InboundMessage::Control(NavCommand::Next)).await;
    assert_eq!(error_code(&recv(&mut stranger).await), "not_joined");

    hello(&mut presenter, Role::Presenter).await;
    hello(&mut viewer, Role::Viewer).await;

    send(&mut stranger, &InboundMessage::Hello { role: Role::Presenter, session: None }).await;
    assert_eq!(error_code(&recv(&mut stranger).await), "presenter_taken");
    send(&mut stranger, &InboundMessage::Hello { role: Role::Viewer, session: Some("nope".into()) }).await;
    assert_eq!(error_code(&recv(&mut stranger).await), "unknown_session");

    send(&mut viewer, &InboundMessage::LandmarkFrame(raw_frame(1, Vec::new()))).await;
    assert_eq!(error_code(&recv(&mut viewer).await), "not_presenter");

    viewer.send(Message::Text("{not json".into())).await.unwrap();
    assert_eq!(error_code(&recv(&mut viewer).await), "bad_message");

    // Errors went only to their senders: the presenter's next message is its own frame's state.
    send(&mut presenter, &InboundMessage::LandmarkFrame(raw_frame(1, Vec::new()))).await;
    let state = recv(&mut presenter).await;
    assert_eq!(state.as_scene_state().unwrap().seq, 1);
    assert_eq!(recv(&mut viewer).await.as_scene_state().unwrap().seq, 1);
}

#[tokio::test]
async fn viewers_receive_broadcasts_in_seq_order() {
    let addr = start(None).await;
    let mut presenter = connect(addr).await;
    let mut viewers = Vec::new();
    for _ in 0..3 {
        let mut v = connect(addr).await;
        hello(&mut v, Role::Viewer).await;
        viewers.push(v);
    }
    hello(&mut presenter, Role::Presenter).await;

    send(&mut presenter, &InboundMessage::Control(NavCommand::Next)).await;
    for i in 1..=5 {
        send(&mut presenter, &InboundMessage::LandmarkFrame(raw_frame(i, Vec::new()))).await;
    }
    for v in viewers.iter_mut() {
        assert!(matches!(recv(v).await, OutboundMessage::TransitionPlan(p) if p.from == "regions" && p.to == "life"));
        assert!(matches!(recv(v).await, OutboundMessage::StoryInfo(i) if i.current == 1));
        let mut seqs = Vec::new();
        for _ in 0..6 {
            seqs.push(recv(v).await.as_scene_state().unwrap().seq);
        }
        assert_eq!(seqs, vec![1, 2, 3, 4, 5, 6]);
    }
}

#[tokio::test]
async fn http_api_manages_sessions_and_stories() {
    let addr = start(None).await;
    let base = format!("http://{addr}/api");
    let http = reqwest::Client::new();

    let health: Value = http.get(format!("{base}/health")).send().await.unwrap().json().await.unwrap();
    assert_eq!(health["status"], "ok");

    let sessions: Value = http.get(format!("{base}/sessions")).send().await.unwrap().json().await.unwrap();
    assert_eq!(sessions[0]["id"], "default");
    assert_eq!(sessions[0]["scene_id"], "regions");

    let story: Value = http.get(format!("{base}/sessions/default/story")).send().await.unwrap().json().await.unwrap();
    assert_eq!(story["scenes"].as_array().unwrap().len(), 4);

    // Planner save: reorder [A,B,C,D] -> [B,C,A,D] and read it back.
    let mut reordered = story.clone();
    let scenes = reordered["scenes"].as_array_mut().unwrap();
    let first = scenes.remove(0);
    scenes.insert(2, first);
    let resp = http.put(format!("{base}/sessions/default/story")).json(&reordered).send().await.unwrap();
    assert_eq!(resp.status(), 200);
    let info: Value = resp.json().await.unwrap();
    assert_eq!(info["current"], 2);
    let back: Value = http.get(format!("{base}/sessions/default/story")).send().await.unwrap().json().await.unwrap();
    assert_eq!(back, reordered);

    // A rejected save keeps the previous story.
    let mut dup = reordered.clone();
    let copy = dup["scenes"][0].clone();
    dup["scenes"].as_array_mut().unwrap().push(copy);
    let resp = http.put(format!("{base}/sessions/default/story")).json(&dup).send().await.unwrap();
    assert_eq!(resp.status(), 422);
    let err: Value = resp.json().await.unwrap();
    assert_eq!(err["code"], "invalid_story");
    assert!(err["detail"].as_str().unwrap().starts_with("duplicate_id"));
    let still: Value = http.get(format!("{base}/sessions/default/story")).send().await.unwrap().json().await.unwrap();
    assert_eq!(still, reordered);

    let resp = http.post(format!("{base}/validate")).json(&dup).send().await.unwrap();
    assert_eq!(resp.status(), 422);
    let resp = http.post(format!("{base}/validate")).json(&story).send().await.unwrap();
    assert_eq!(resp.status(), 200);

    let created = http.post(format!("{base}/sessions")).json(&json!({
        "title": "solo",
        "scenes": [{"id": "bars", "chart": {"kind": "bar", "category_field": "region", "value_field": "population"}, "data": "regions.csv"}]
    })).send().await.unwrap();
    assert_eq!(created.status(), 201);
    let created: Value = created.json().await.unwrap();
    let id = created["id"].as_str().unwrap().to_string();
    assert_ne!(id, "default");
    let state: Value = http.get(format!("{base}/sessions/{id}/state")).send().await.unwrap().json().await.unwrap();
    assert_eq!(state["scene_id"], "bars");

    let mut ws = connect(addr).await;
    send(&mut ws, &InboundMessage::Hello { role: Role::Viewer, session: Some(id.clone()) }).await;
    assert!(matches!(recv(&mut ws).await, OutboundMessage::StoryInfo(i) if i.title == "solo"));

    assert_eq!(http.delete(format!("{base}/sessions/{id}")).send().await.unwrap().status(), 204);
    assert_eq!(http.get(format!("{base}/sessions/{id}")).send().await.unwrap().status(), 404);

    let missing = http.get(format!("{base}/sessions/nope/state")).send().await.unwrap();
    assert_eq!(missing.status(), 404);
    let index = http.get(format!("http://{addr}/")).send().await.unwrap().text().await.unwrap();
    assert!(index.contains("/ws"));
}

#[tokio::test]
async fn recorded_session_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    let trace_path = dir.path().join("live.jsonl");
    let addr = start(Some(trace_path.clone())).await;
    let mut ws = connect(addr).await;
    hello(&mut ws, Role::Presenter).await;

    // Point at the Asia bar for a while, then move on and back.
    let scene = parse_story_file(&demo_story()).unwrap().scene(0);
    let bar = scene.mark("bar:Asia").unwrap().anchor();
    let target = Point2::new(bar.x, bar.y + 0.05);
    let hand = SyntheticHand::new(Pose::Point).with_size(0.1).build_anchored(Handedness::Right, target);
    let mut live = Vec::new();
    let mut inbound = Vec::new();
    for i in 0..30 {
        inbound.push(InboundMessage::LandmarkFrame(raw_frame(i * 33, vec![hand.clone()])));
    }
    inbound.push(InboundMessage::Control(NavCommand::Next));
    inbound.push(InboundMessage::Control(NavCommand::Prev));
    for msg in &inbound {
        send(&mut ws, msg).await;
        // Lock-step so no frame is dropped by backpressure.
        let expected = if matches!(msg, InboundMessage::Control(_)) { 3 } else { 1 };
        for _ in 0..expected {
            live.push(serde_json::to_string(&recv(&mut ws).await).unwrap());
        }
    }
    let highlighted = live.iter().any(|l| l.contains("\"layer\":\"highlight\""));
    assert!(highlighted, "pointing never highlighted the bar");

    let text = std::fs::read(&trace_path).unwrap();
    let records = read_trace(&text[..]).unwrap();
    assert_eq!(records.len(), inbound.len());
    let mut replayed = Vec::new();
    let story = parse_story_file(&demo_story()).unwrap();
    replay_trace(story, records, SessionConfig::default(), |m| {
        replayed.push(serde_json::to_string(m).unwrap());
        Ok(())
    })
    .unwrap();
    assert_eq!(replayed, live);
}
