//! WebSocket front end. Each session runs in its own task that owns the
//! [`Session`]; connections talk to it over channels.

use crate::protocol::{
    decode_client, encode, ClientMessage, ErrorCode, FrameMode, ProtocolError, SeatRequest, ServerMessage,
};
use crate::session::Session;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use hidden_agenda::{PlayerAction, PlayerId};
use serde::Serialize;
use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;
use tokio::sync::{mpsc, oneshot};

pub const ADDR_ENV: &str = "HIDDEN_AGENDA_ADDR";
pub const DEFAULT_ADDR: &str = "127.0.0.1:8080";

#[derive(Clone, Debug)]
pub struct ServerConfig {
    /// How long a finished session stays around before it is dropped.
    pub grace: Duration,
    /// Where finished episodes are saved as replays, if anywhere.
    pub record_dir: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            grace: Duration::from_secs(5),
            record_dir: None,
        }
    }
}

type Outbox = mpsc::UnboundedSender<String>;

/// Why a join was turned down.
type Refusal = (ErrorCode, String);

enum Command {
    Join {
        client: u64,
        seat: SeatRequest,
        mode: FrameMode,
        out: Outbox,
        reply: oneshot::Sender<Result<(), Refusal>>,
    },
    Action {
        client: u64,
        tick: u64,
        action: PlayerAction,
    },
    Leave {
        client: u64,
    },
}

struct Handle {
    tx: mpsc::UnboundedSender<Command>,
}

struct Shared {
    config: ServerConfig,
    sessions: Mutex<HashMap<String, Handle>>,
    next_session: AtomicU64,
    next_client: AtomicU64,
}

#[derive(Clone)]
pub struct AppState(Arc<Shared>);

impl AppState {
    pub fn new(config: ServerConfig) -> Self {
        AppState(Arc::new(Shared {
            config,
            sessions: Mutex::new(HashMap::new()),
            next_session: AtomicU64::new(1),
            next_client: AtomicU64::new(1),
        }))
    }

    pub fn session_count(&self) -> usize {
        self.0.sessions.lock().expect("session table lock").len()
    }

    fn lookup(&self, id: &str) -> Option<mpsc::UnboundedSender<Command>> {
        self.0.sessions.lock().expect("session table lock").get(id).map(|h| h.tx.clone())
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/ws", get(upgrade))
        .with_state(state)
}

/// Binds `addr` and serves until the process ends.
pub async fn serve(addr: SocketAddr, config: ServerConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(AppState::new(config))).await
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    sessions: usize,
}

async fn health(State(app): State<AppState>) -> Json<Health> {
    Json(Health {
        status: "ok",
        sessions: app.session_count(),
    })
}

async fn upgrade(ws: WebSocketUpgrade, State(app): State<AppState>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| connection(socket, app))
}

struct Joined {
    tx: mpsc::UnboundedSender<Command>,
}

async fn connection(socket: WebSocket, app: AppState) {
    let client = app.0.next_client.fetch_add(1, Ordering::Relaxed);
    let (mut sink, mut stream) = socket.split();
    let (out, mut outbox) = mpsc::unbounded_channel::<String>();
    let writer = tokio::spawn(async move {
        while let Some(text) = outbox.recv().await {
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
    });
    let mut joined: Option<Joined> = None;
    while let Some(Ok(msg)) = stream.next().await {
        let text = match msg {
            Message::Text(t) => t,
            Message::Close(_) => break,
            _ => continue,
        };
        match decode_client(&text) {
            Ok(m) => handle(m, client, &app, &out, &mut joined).await,
            Err(e) => {
                let code = match e {
                    ProtocolError::Version(_) => ErrorCode::UnsupportedVersion,
                    _ => ErrorCode::Malformed,
                };
                let _ = out.send(encode(&ServerMessage::error(code, e.to_string())));
            }
        }
    }
    if let Some(j) = joined {
        let _ = j.tx.send(Command::Leave { client });
    }
    drop(out);
    let _ = writer.await;
}

async fn handle(msg: ClientMessage, client: u64, app: &AppState, out: &Outbox, joined: &mut Option<Joined>) {
    let reply = |m: ServerMessage| {
        let _ = out.send(encode(&m));
    };
    match msg {
        ClientMessage::CreateSession { config } => {
            match Session::new(config.clone()) {
                Ok(session) => {
                    let id = format!("s{}", app.0.next_session.fetch_add(1, Ordering::Relaxed));
                    let (tx, rx) = mpsc::unbounded_channel();
                    app.0
                        .sessions
                        .lock()
                        .expect("session table lock")
                        .insert(id.clone(), Handle { tx });
                    tokio::spawn(run_session(id.clone(), session, rx, app.clone()));
                    reply(ServerMessage::SessionCreated {
                        session: id,
                        seat: config.human_seat,
                        config,
                    });
                }
                Err(e) => reply(ServerMessage::error(ErrorCode::InvalidConfig, e.to_string())),
            }
        }
        ClientMessage::Join {
            session,
            seat,
            frame_mode,
        } => {
            if joined.is_some() {
                return reply(ServerMessage::error(ErrorCode::AlreadyJoined, "leave the current session first"));
            }
            let Some(tx) = app.lookup(&session) else {
                return reply(ServerMessage::error(ErrorCode::UnknownSession, session));
            };
            let (rtx, rrx) = oneshot::channel();
            let cmd = Command::Join {
                client,
                seat,
                mode: frame_mode,
                out: out.clone(),
                reply: rtx,
            };
            if tx.send(cmd).is_err() {
                return reply(ServerMessage::error(ErrorCode::EpisodeOver, session));
            }
            match rrx.await {
                Ok(Ok(())) => *joined = Some(Joined { tx }),
                Ok(Err((code, detail))) => reply(ServerMessage::error(code, detail)),
                Err(_) => reply(ServerMessage::error(ErrorCode::EpisodeOver, session)),
            }
        }
        ClientMessage::Action { tick, action } => match joined {
            Some(j) => {
                let _ = j.tx.send(Command::Action { client, tick, action });
            }
            None => reply(ServerMessage::error(ErrorCode::NotJoined, "join a session first")),
        },
        ClientMessage::Leave => {
            if let Some(j) = joined.take() {
                let _ = j.tx.send(Command::Leave { client });
            }
        }
    }
}

struct Viewer {
    seat: Option<PlayerId>,
    mode: FrameMode,
    out: Outbox,
}

impl Viewer {
    fn send(&self, m: &ServerMessage) {
        let _ = self.out.send(encode(m));
    }
}

struct Owner {
    id: String,
    session: Session,
    viewers: HashMap<u64, Viewer>,
    human: Option<u64>,
}

impl Owner {
    fn join(&mut self, client: u64, seat: SeatRequest, mode: FrameMode, out: Outbox) -> Result<(), Refusal> {
        if self.session.is_over() {
            return Err((ErrorCode::EpisodeOver, self.id.clone()));
        }
        let seat = match seat {
            SeatRequest::Spectator => None,
            SeatRequest::Player(p) if Some(p) == self.session.human_seat() => {
                if self.human.is_some() {
                    return Err((ErrorCode::SeatTaken, format!("seat {p} is taken")));
                }
                self.human = Some(client);
                Some(p)
            }
            SeatRequest::Player(p) => {
                return Err((ErrorCode::BadSeat, format!("seat {p} is not open to humans in this session")))
            }
        };
        let card = seat.and_then(|_| self.session.role_card());
        let viewer = Viewer { seat, mode, out };
        viewer.send(&ServerMessage::Joined {
            session: self.id.clone(),
            seat: seat.map_or(SeatRequest::Spectator, SeatRequest::Player),
            role: card.map(|c| c.role),
            color: card.map(|c| c.color),
            tick_rate: self.session.config().tick_rate,
            frame_mode: mode,
        });
        viewer.send(&ServerMessage::Frame(Box::new(self.session.frame(seat, mode))));
        self.viewers.insert(client, viewer);
        Ok(())
    }

    fn action(&mut self, client: u64, tick: u64, action: PlayerAction) {
        let Some(viewer) = self.viewers.get(&client) else { return };
        if self.human != Some(client) {
            return viewer.send(&ServerMessage::error(ErrorCode::NotSeated, "spectators cannot act"));
        }
        if let Err(code) = self.session.submit(tick, action) {
            viewer.send(&ServerMessage::Notice {
                code,
                detail: format!("action for tick {tick} discarded; open tick is {}", self.session.tick()),
            });
        }
    }

    fn leave(&mut self, client: u64) {
        self.viewers.remove(&client);
        if self.human == Some(client) {
            self.human = None;
        }
    }

    /// Steps once and broadcasts. Returns true once the episode is over.
    fn tick(&mut self) -> bool {
        let report = match self.session.advance() {
            Ok(r) => r,
            Err(e) => {
                tracing::error!(session = %self.id, error = %e, "step failed");
                return true;
            }
        };
        for v in self.viewers.values() {
            v.send(&ServerMessage::Frame(Box::new(self.session.frame(v.seat, v.mode))));
        }
        if let Some(win) = report.terminal {
            let end = ServerMessage::EpisodeEnd {
                tick: report.tick,
                win,
                returns: self.session.returns().to_vec(),
                roles: self.session.record().roles.clone(),
            };
            for v in self.viewers.values() {
                v.send(&end);
            }
            return true;
        }
        false
    }
}

async fn run_session(id: String, session: Session, mut rx: mpsc::UnboundedReceiver<Command>, app: AppState) {
    let period = Duration::from_secs_f64(1.0 / f64::from(session.config().tick_rate));
    let mut owner = Owner {
        id,
        session,
        viewers: HashMap::new(),
        human: None,
    };
    let mut ticker: Option<tokio::time::Interval> = None;
    let mut ended = false;
    loop {
        let next_tick = async {
            match ticker.as_mut() {
                Some(t) => {
                    t.tick().await;
                }
                None => std::future::pending().await,
            }
        };
        tokio::select! {
            cmd = rx.recv() => match cmd {
                Some(Command::Join { client, seat, mode, out, reply }) => {
                    let r = owner.join(client, seat, mode, out);
                    let _ = reply.send(r);
                    if ticker.is_none() && !owner.viewers.is_empty() {
                        // The first tick window opens now and closes one period later.
                        let mut t = tokio::time::interval_at(tokio::time::Instant::now() + period, period);
                        t.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
                        ticker = Some(t);
                    }
                }
                Some(Command::Action { client, tick, action }) => owner.action(client, tick, action),
                Some(Command::Leave { client }) => {
                    owner.leave(client);
                    if owner.viewers.is_empty() && ticker.is_some() {
                        break;
                    }
                }
                None => break,
            },
            _ = next_tick => {
                if owner.tick() {
                    ended = true;
                    break;
                }
            }
        }
    }
    if ended {
        if let Some(dir) = &app.0.config.record_dir {
            let path = dir.join(format!("{}.json", owner.id));
            if let Err(e) = owner.session.record().save(&path) {
                tracing::warn!(session = %owner.id, error = %e, "could not save replay");
            }
        }
        // Late joins during the grace period get a clear refusal.
        let grace = tokio::time::sleep(app.0.config.grace);
        tokio::pin!(grace);
        loop {
            tokio::select! {
                _ = &mut grace => break,
                cmd = rx.recv() => match cmd {
                    Some(Command::Join { reply, .. }) => {
                        let _ = reply.send(Err((ErrorCode::EpisodeOver, owner.id.clone())));
                    }
                    Some(Command::Action { client, .. }) => {
                        if let Some(v) = owner.viewers.get(&client) {
                            v.send(&ServerMessage::error(ErrorCode::EpisodeOver, "the episode has ended"));
                        }
                    }
                    Some(Command::Leave { client }) => owner.leave(client),
                    None => break,
                },
            }
        }
    }
    app.0.sessions.lock().expect("session table lock").remove(&owner.id);
    tracing::debug!(session = %owner.id, "session closed");
}

/// `HIDDEN_AGENDA_ADDR` if set, else the default address.
pub fn default_addr() -> String {
    std::env::var(ADDR_ENV).unwrap_or_else(|_| DEFAULT_ADDR.to_string())
}
