use futures::{SinkExt, StreamExt};
use hidden_agenda::harness::EpisodeRecord;
use hidden_agenda::{GameConfig, Phase, PlayerAction, WinCondition};
use hidden_agenda_service::protocol::{decode_server, encode, ErrorCode, NoticeCode, PublicEvent};
use hidden_agenda_service::{router, AppState, ClientMessage, FrameMode, SeatRequest, ServerConfig, ServerMessage, SessionConfig};
use std::net::SocketAddr;
use std::time::Duration;
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio_tungstenite::tungstenite::Message;

type Ws = tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<tokio::net::TcpStream>>;

async fn start(config: ServerConfig) -> SocketAddr {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, router(AppState::new(config))).await });
    addr
}

async fn connect(addr: SocketAddr) -> Ws {
    tokio_tungstenite::connect_async(format!("ws://{addr}/ws")).await.unwrap().0
}

async fn send(ws: &mut Ws, m: &ClientMessage) {
    ws.send(Message::text(encode(m))).await.unwrap();
}

async fn recv_text(ws: &mut Ws) -> String {
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(10), ws.next())
            .await
            .expect("server went quiet")
            .expect("socket closed")
            .unwrap();
        if let Message::Text(t) = msg {
            return t.to_string();
        }
    }
}

async fn recv(ws: &mut Ws) -> ServerMessage {
    decode_server(&recv_text(ws).await).unwrap()
}

async fn create(ws: &mut Ws, config: SessionConfig) -> String {
    send(ws, &ClientMessage::CreateSession { config }).await;
    match recv(ws).await {
        ServerMessage::SessionCreated { session, .. } => session,
        other => panic!("expected session_created, got {other:?}"),
    }
}

async fn join(ws: &mut Ws, session: &str, seat: SeatRequest) -> ServerMessage {
    send(
        ws,
        &ClientMessage::Join {
            session: session.into(),
            seat,
            frame_mode: FrameMode::Sprites,
        },
    )
    .await;
    recv(ws).await
}

async fn health(addr: SocketAddr) -> serde_json::Value {
    let mut s = tokio::net::TcpStream::connect(addr).await.unwrap();
    s.write_all(b"GET /health HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n").await.unwrap();
    let mut buf = String::new();
    s.read_to_string(&mut buf).await.unwrap();
    let body = buf.split("\r\n\r\n").nth(1).unwrap();
    serde_json::from_str(body).unwrap()
}

fn expected_error(m: ServerMessage, want: ErrorCode) {
    match m {
        ServerMessage::Error { code, .. } => assert_eq!(code, want),
        other => panic!("expected error {want:?}, got {other:?}"),
    }
}

/// A human plays seat 2 for 300 ticks through one voting round; the saved
/// replay verifies and carries exactly the actions the client sent.
#[tokio::test]
async fn scripted_transcript_yields_a_verifiable_record() {
    let dir = tempfile::tempdir().unwrap();
    let addr = start(ServerConfig {
        grace: Duration::from_millis(200),
        record_dir: Some(dir.path().to_path_buf()),
    })
    .await;
    let mut ws = connect(addr).await;
    let session = create(
        &mut ws,
        SessionConfig {
            game: GameConfig {
                episode_limit: 300,
                ..GameConfig::default()
            },
            seed: 21,
            human_seat: Some(2),
            tick_rate: 30,
            ..SessionConfig::default()
        },
    )
    .await;
    let ServerMessage::Joined { role, seat, .. } = join(&mut ws, &session, SeatRequest::Player(2)).await else {
        panic!("join refused")
    };
    assert_eq!(seat, SeatRequest::Player(2));
    assert!(role.is_some());
    assert_eq!(health(addr).await["sessions"], 1);

    let moves = [PlayerAction::MoveN, PlayerAction::TurnRight, PlayerAction::MoveE, PlayerAction::MoveW];
    let mut sent: Vec<PlayerAction> = Vec::new();
    let mut last_tick = None;
    let mut stale = 0;
    let mut voting_seen = false;
    let mut ends = 0;
    loop {
        let text = recv_text(&mut ws).await;
        // Roles are revealed only by the end-of-episode message.
        if !text.contains(r#""type":"episode_end""#) {
            for word in ["Impostor", "Crewmate"] {
                assert!(!text.contains(word), "role leaked: {text}");
            }
        }
        match decode_server(&text).unwrap() {
            ServerMessage::Frame(f) => {
                if let Some(t) = last_tick {
                    assert_eq!(f.tick, t + 1, "ticks must advance one at a time");
                }
                last_tick = Some(f.tick);
                voting_seen |= f.events.iter().any(|e| matches!(e, PublicEvent::VotingStarted { .. }));
                if f.tick >= 300 {
                    continue;
                }
                let action = match f.phase {
                    Phase::Situation => moves[f.tick as usize % 4],
                    Phase::Voting if f.tick % 3 == 0 => PlayerAction::VoteAbstain,
                    Phase::Voting => PlayerAction::VoteFor((f.tick % 5) as u8),
                };
                assert_eq!(sent.len() as u64, f.tick);
                sent.push(action);
                send(&mut ws, &ClientMessage::Action { tick: f.tick, action }).await;
            }
            ServerMessage::Notice { code, .. } => {
                assert_eq!(code, NoticeCode::StaleTick);
                stale += 1;
            }
            ServerMessage::EpisodeEnd { tick, win, roles, .. } => {
                assert_eq!((tick, win), (300, WinCondition::DrawTimeout));
                assert_eq!(roles.len(), 5);
                ends += 1;
                break;
            }
            other => panic!("unexpected {other:?}"),
        }
    }
    assert_eq!(ends, 1);
    assert!(voting_seen, "the transcript should span a voting round");

    // The replay appears once the owner task has written it.
    let path = dir.path().join(format!("{session}.json"));
    for _ in 0..50 {
        if path.exists() {
            break;
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
    let record = EpisodeRecord::load(&path).unwrap();
    record.verify().unwrap();
    assert_eq!(record.steps, 300);
    let played: Vec<char> = record.actions.iter().map(|a| a.chars().nth(2).unwrap()).collect();
    let mismatched = played
        .iter()
        .zip(&sent)
        .filter(|(got, want)| **got != want.code())
        .inspect(|(got, _)| assert_eq!(**got, '.', "a missed tick must fall back to Noop"))
        .count();
    assert_eq!(mismatched, stale, "only ticks reported stale may differ");

    // The session is dropped after its grace period.
    tokio::time::sleep(Duration::from_millis(400)).await;
    assert_eq!(health(addr).await["sessions"], 0);
}

#[tokio::test]
async fn joins_and_errors() {
    let addr = start(ServerConfig::default()).await;
    let mut a = connect(addr).await;
    let mut b = connect(addr).await;

    expected_error(join(&mut a, "s999", SeatRequest::Spectator).await, ErrorCode::UnknownSession);
    send(
        &mut a,
        &ClientMessage::Action {
            tick: 0,
            action: PlayerAction::Noop,
        },
    )
    .await;
    expected_error(recv(&mut a).await, ErrorCode::NotJoined);
    a.send(Message::text(r#"{"v":9,"type":"leave"}"#)).await.unwrap();
    expected_error(recv(&mut a).await, ErrorCode::UnsupportedVersion);
    a.send(Message::text("{}")).await.unwrap();
    expected_error(recv(&mut a).await, ErrorCode::Malformed);
    send(
        &mut a,
        &ClientMessage::CreateSession {
            config: SessionConfig {
                tick_rate: 60,
                ..SessionConfig::default()
            },
        },
    )
    .await;
    expected_error(recv(&mut a).await, ErrorCode::InvalidConfig);

    let session = create(
        &mut a,
        SessionConfig {
            human_seat: Some(1),
            tick_rate: 1,
            ..SessionConfig::default()
        },
    )
    .await;
    expected_error(join(&mut b, &session, SeatRequest::Player(3)).await, ErrorCode::BadSeat);
    assert!(matches!(join(&mut a, &session, SeatRequest::Player(1)).await, ServerMessage::Joined { .. }));
    let ServerMessage::Frame(first) = recv(&mut a).await else { panic!() };
    assert_eq!(first.tick, 0);
    assert!(first.seat.is_some() && first.overlay.is_none());
    expected_error(join(&mut b, &session, SeatRequest::Player(1)).await, ErrorCode::SeatTaken);

    // Spectators may watch but not act.
    let ServerMessage::Joined { role, .. } = join(&mut b, &session, SeatRequest::Spectator).await else {
        panic!()
    };
    assert!(role.is_none());
    let ServerMessage::Frame(watch) = recv(&mut b).await else { panic!() };
    assert_eq!(watch.overlay.as_ref().map(|o| o.players.len()), Some(5));
    send(
        &mut b,
        &ClientMessage::Action {
            tick: 0,
            action: PlayerAction::Fire,
        },
    )
    .await;
    expected_error(recv(&mut b).await, ErrorCode::NotSeated);

    // At one tick per second the open tick is still 0.
    send(
        &mut a,
        &ClientMessage::Action {
            tick: 5,
            action: PlayerAction::MoveN,
        },
    )
    .await;
    match recv(&mut a).await {
        ServerMessage::Notice { code, .. } => assert_eq!(code, NoticeCode::FutureTick),
        other => panic!("{other:?}"),
    }
    send(
        &mut a,
        &ClientMessage::Action {
            tick: 0,
            action: PlayerAction::MoveN,
        },
    )
    .await;
    let ServerMessage::Frame(next) = recv(&mut a).await else { panic!() };
    assert_eq!(next.tick, 1);
    send(
        &mut a,
        &ClientMessage::Action {
            tick: 0,
            action: PlayerAction::MoveN,
        },
    )
    .await;
    match recv(&mut a).await {
        ServerMessage::Notice { code, .. } => assert_eq!(code, NoticeCode::StaleTick),
        other => panic!("{other:?}"),
    }
    assert_eq!(health(addr).await["sessions"], 1);

    // When everyone leaves, the session goes away.
    send(&mut a, &ClientMessage::Leave).await;
    send(&mut b, &ClientMessage::Leave).await;
    for _ in 0..50 {
        if health(addr).await["sessions"] == 0 {
            return;
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
    panic!("session outlived its viewers");
}
