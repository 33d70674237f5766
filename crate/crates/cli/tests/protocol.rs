use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use mlquest_cli::protocol::{ClientMessage, RejectReason, ServerMessage};
use mlquest_cli::registry::SessionRegistry;
use mlquest_cli::server;
use mlquest_core::autoplay::next_command;
use mlquest_core::event::EventKind;
use mlquest_core::levelgen::generate_campaign;
use mlquest_core::{Campaign, Direction, InputCommand, LevelSpec};

fn levels(seed: u64) -> Vec<LevelSpec> {
    generate_campaign(seed).unwrap().to_vec()
}

fn open(reg: &SessionRegistry, seed: u64) -> String {
    match reg.handle_line(&format!(r#"{{"version":1,"type":"open","seed":{seed}}}"#)) {
        ServerMessage::Opened { session_id, .. } => session_id,
        other => panic!("{other:?}"),
    }
}

fn command(id: &str, seq: u64, c: InputCommand) -> ClientMessage {
    ClientMessage::Command { version: 1, session_id: id.into(), seq, command: c }
}

#[test]
fn move_updates_snapshot() {
    let reg = SessionRegistry::new(levels(1));
    let id = open(&reg, 1);
    let c = Campaign::new(levels(1), 1).unwrap();
    let cmd = next_command(&c.current).unwrap();
    let line = serde_json::to_string(&command(&id, 1, cmd)).unwrap();
    match reg.handle_line(&line) {
        ServerMessage::Update { seq_ack, snapshot, events, .. } => {
            assert_eq!(seq_ack, 1);
            assert_eq!(snapshot.tick, 1);
            assert!(matches!(events[0].kind, EventKind::Move { agent: 0, .. }));
            let player = snapshot.agents.iter().find(|a| a.id == 0).unwrap();
            assert_ne!(player.pos, c.current.player().pos);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn wire_format_of_commands() {
    let msg: ClientMessage = serde_json::from_str(r#"{"version":1,"type":"command","session_id":"s1","seq":3,"command":{"move":"north"}}"#).unwrap();
    assert_eq!(msg, command("s1", 3, InputCommand::Move(Direction::North)));
    let ack: ClientMessage = serde_json::from_str(r#"{"version":1,"type":"command","session_id":"s1","seq":4,"command":"acknowledge"}"#).unwrap();
    assert_eq!(ack, command("s1", 4, InputCommand::Acknowledge));
    let reg = SessionRegistry::new(levels(1));
    let unknown_field = reg.handle_line(r#"{"version":1,"type":"open","seed":1,"colour":"red"}"#);
    assert!(matches!(unknown_field, ServerMessage::Reject { error: RejectReason::BadMessage, .. }));
    let bad_version = reg.handle_line(r#"{"version":2,"type":"open"}"#);
    assert!(matches!(bad_version, ServerMessage::Reject { error: RejectReason::BadVersion, .. }));
}

#[test]
fn out_of_order_seq_is_rejected_without_effect() {
    let reg = SessionRegistry::new(levels(2));
    let id = open(&reg, 2);
    let c = Campaign::new(levels(2), 2).unwrap();
    let first = next_command(&c.current).unwrap();
    assert!(matches!(reg.handle(command(&id, 5, first)), ServerMessage::Update { .. }));
    let r = reg.handle(command(&id, 4, first));
    assert!(matches!(r, ServerMessage::Reject { error: RejectReason::BadSeq, seq: Some(4), .. }), "{r:?}");
    // The session continues from seq 5 as if 4 never arrived.
    match reg.handle(command(&id, 6, InputCommand::Acknowledge)) {
        ServerMessage::Reject { error: RejectReason::InvalidCommand, .. } => {}
        other => panic!("{other:?}"),
    }
    match reg.handle(command(&id, 7, next_command(&{
        let mut c = c.clone();
        c.apply(first).unwrap();
        c
    }.current).unwrap())) {
        ServerMessage::Update { snapshot, .. } => assert_eq!(snapshot.tick, 2),
        other => panic!("{other:?}"),
    }
    assert!(matches!(reg.handle(command("s999", 1, first)), ServerMessage::Reject { error: RejectReason::UnknownSession, .. }));
}

#[test]
fn events_are_exactly_the_delta() {
    let reg = SessionRegistry::new(levels(3));
    let id = open(&reg, 3);
    let mut mirror = Campaign::new(levels(3), 3).unwrap();
    let mut received = Vec::new();
    let mut seq = 0;
    while !mirror.finished {
        let cmd = next_command(&mirror.current).unwrap_or(InputCommand::Next);
        mirror.apply(cmd).unwrap();
        seq += 1;
        match reg.handle(command(&id, seq, cmd)) {
            ServerMessage::Update { events, snapshot, .. } => {
                received.extend(events);
                assert_eq!(*snapshot, mirror.snapshot());
            }
            other => panic!("{other:?}"),
        }
    }
    assert_eq!(received, mirror.log());
}

fn spawn_tcp(reg: Arc<SessionRegistry>) -> u16 {
    let l = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = l.local_addr().unwrap().port();
    thread::spawn(move || server::run_tcp(l, reg));
    port
}

#[test]
fn scripted_client_over_tcp_completes_level_3() {
    let port = spawn_tcp(Arc::new(SessionRegistry::new(levels(4))));
    let stream = TcpStream::connect(("127.0.0.1", port)).unwrap();
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut writer = stream;
    let mut send = |msg: &str| -> ServerMessage {
        writer.write_all(msg.as_bytes()).unwrap();
        writer.write_all(b"\n").unwrap();
        let mut line = String::new();
        reader.read_line(&mut line).unwrap();
        serde_json::from_str(&line).unwrap()
    };
    let ServerMessage::Opened { session_id, .. } = send(r#"{"version":1,"type":"open","seed":4}"#) else { panic!() };
    let mut mirror = Campaign::new(levels(4), 4).unwrap();
    let mut updates = Vec::new();
    let mut seq = 0;
    while !mirror.finished {
        let cmd = next_command(&mirror.current).unwrap_or(InputCommand::Next);
        mirror.apply(cmd).unwrap();
        seq += 1;
        updates.push(send(&serde_json::to_string(&command(&session_id, seq, cmd)).unwrap()));
    }
    let completing = updates.iter().rposition(|u| match u {
        ServerMessage::Update { events, .. } => events.iter().any(|e| matches!(e.kind, EventKind::LevelCompleted { level: 3, .. })),
        _ => false,
    });
    let completing = completing.expect("an update carried LevelCompleted for level 3");
    // Only the outcome acknowledgement may follow it.
    assert!(updates.len() - completing <= 2);
    let ServerMessage::Update { snapshot, .. } = &updates[completing] else { unreachable!() };
    assert!(snapshot.modal.as_ref().is_some_and(|m| m.outcome.is_some()));
    let garbage = send("not json");
    assert!(matches!(garbage, ServerMessage::Reject { error: RejectReason::BadMessage, .. }));
}

#[test]
fn websocket_speaks_the_same_messages() {
    let reg = Arc::new(SessionRegistry::new(levels(5)));
    let l = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = l.local_addr().unwrap().port();
    thread::spawn(move || server::run_websocket(l, reg));
    let (mut ws, _) = tungstenite::connect(format!("ws://127.0.0.1:{port}")).unwrap();
    ws.send(tungstenite::Message::text(r#"{"version":1,"type":"open","seed":5}"#)).unwrap();
    let reply = ws.read().unwrap().into_text().unwrap();
    let msg: ServerMessage = serde_json::from_str(&reply).unwrap();
    let ServerMessage::Opened { session_id, .. } = msg else { panic!("{msg:?}") };
    let c = Campaign::new(levels(5), 5).unwrap();
    let cmd = next_command(&c.current).unwrap();
    ws.send(tungstenite::Message::text(serde_json::to_string(&command(&session_id, 1, cmd)).unwrap())).unwrap();
    let reply: ServerMessage = serde_json::from_str(&ws.read().unwrap().into_text().unwrap()).unwrap();
    assert!(matches!(reply, ServerMessage::Update { seq_ack: 1, .. }));
}

#[test]
fn snapshot_schema_covers_every_hud_element() {
    let c = Campaign::new(levels(6), 6).unwrap();
    let v = serde_json::to_value(c.snapshot()).unwrap();
    for key in ["level", "tick", "phase", "tiles", "minimap", "agents", "items", "hud", "modal"] {
        assert!(v.get(key).is_some(), "snapshot.{key}");
    }
    let hud = &v["hud"];
    // score, warning, instruction board, slope labels, health bar, Bob tag,
    // red-men-reached count, distance meters, population, Next button.
    for key in [
        "score",
        "health",
        "instructions",
        "warning",
        "slope_readouts",
        "distance_meters",
        "active_bob",
        "red_men_reached",
        "population",
        "next_enabled",
    ] {
        assert!(hud.get(key).is_some(), "hud.{key}");
    }
    // The learning-outcome prompt travels in the modal.
    let mut done = c.clone();
    while !done.current.is_completed() {
        done.apply(next_command(&done.current).unwrap()).unwrap();
    }
    let m = serde_json::to_value(done.snapshot()).unwrap();
    assert_eq!(m["modal"]["kind"], "outcome");
    for key in ["concept_name", "definition", "mapping"] {
        assert!(m["modal"]["outcome"].get(key).is_some(), "outcome.{key}");
    }
}

#[test]
fn snapshots_stay_under_64_kib() {
    for seed in 0..10 {
        let mut c = Campaign::new(levels(seed), seed).unwrap();
        let mut biggest = 0;
        while !c.finished {
            biggest = biggest.max(serde_json::to_string(&c.snapshot()).unwrap().len());
            let cmd = next_command(&c.current).unwrap_or(InputCommand::Next);
            c.apply(cmd).unwrap();
        }
        assert!(biggest < 64 * 1024, "seed {seed}: {biggest} bytes");
    }
}
