//! Session protocol transports: a websocket endpoint and standard streams.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Result;
use axum::extract::ws::{Message as WsMessage, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use tower_http::services::ServeDir;
use tracing::{debug, info};

use dockpuzzle_core::game::GameConfig;
use dockpuzzle_core::protocol::{encode, ProtocolSession};
use dockpuzzle_core::{LevelPack, QuizBank};

/// Immutable data shared by all connections.
#[derive(Debug, Clone)]
pub struct ServerState {
    packs: BTreeMap<String, Arc<LevelPack>>,
    bank: Arc<QuizBank>,
    game: GameConfig,
    seed: u64,
}

impl ServerState {
    pub fn new(pack: Arc<LevelPack>, bank: Arc<QuizBank>, game: GameConfig, seed: u64) -> Self {
        let mut packs = BTreeMap::new();
        packs.insert(pack.pack_id.clone(), pack);
        Self {
            packs,
            bank,
            game,
            seed,
        }
    }

    /// A fresh protocol endpoint for one connection.
    pub fn connection(&self) -> ProtocolSession {
        ProtocolSession::new(self.packs.clone(), self.bank.clone(), self.game, self.seed)
    }
}

/// Handle every line of `input`, writing responses to `output` as they are produced.
pub fn serve_lines<R: BufRead, W: Write>(
    state: &ServerState,
    input: R,
    mut output: W,
) -> Result<()> {
    let mut session = state.connection();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        for msg in session.handle_line(&line) {
            writeln!(output, "{}", encode(&msg))?;
        }
        output.flush()?;
    }
    Ok(())
}

pub fn run_stdio(state: &ServerState) -> Result<()> {
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    serve_lines(state, stdin.lock(), stdout.lock())
}

pub fn router(state: ServerState, static_dir: Option<PathBuf>) -> Router {
    let app = Router::new()
        .route("/session", get(session_upgrade))
        .with_state(Arc::new(state));
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

pub async fn run_socket(state: ServerState, addr: &str, static_dir: Option<PathBuf>) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    info!(addr = %listener.local_addr()?, "serving /session");
    axum::serve(listener, router(state, static_dir)).await?;
    Ok(())
}

async fn session_upgrade(
    ws: WebSocketUpgrade,
    State(state): State<Arc<ServerState>>,
) -> impl IntoResponse {
    ws.on_upgrade(move |socket| connection(socket, state))
}

/// One websocket frame may carry several NDJSON lines; each reply is its own frame.
async fn connection(socket: WebSocket, state: Arc<ServerState>) {
    let (mut tx, mut rx) = socket.split();
    let mut session = state.connection();
    while let Some(Ok(frame)) = rx.next().await {
        let text = match frame {
            WsMessage::Text(t) => t.to_string(),
            WsMessage::Binary(b) => String::from_utf8_lossy(&b).into_owned(),
            WsMessage::Close(_) => break,
            _ => continue,
        };
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            for msg in session.handle_line(line) {
                if tx.send(WsMessage::Text(encode(&msg).into())).await.is_err() {
                    debug!("client went away");
                    return;
                }
            }
        }
    }
}
