//! Newline-delimited JSON session protocol.
//!
//! Every line is one envelope `{"seq": n, "kind": "...", "payload": {...}}`.
//! Clients send `join`, `input` and `tick_ack`; the server answers with
//! `hello`, `snapshot` and the game's event messages. Unknown fields are
//! ignored on decode.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::engine::ChargeContribution;
use crate::game::{
    GameConfig, GameError, GameEvent, InputEvent, LevelPack, LevelSpec, QuizPrompt, RoundStat,
    RoundSummary, Session, Snapshot, SoundCue,
};
use crate::quiz::{QuizBank, Tier};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("schema violation at {0}")]
    SchemaViolation(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Join {
    pub pack_id: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tier: Option<Tier>,
    /// Begin at this level instead of level 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_level: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickAck {
    /// Seconds of game time to advance.
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hello {
    pub protocol_version: u32,
    pub pack_id: String,
    pub seed: u64,
    pub level_spec: LevelSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreUpdate {
    pub candidate: usize,
    pub percent: f64,
    pub overlap_area: f64,
    pub per_charge: Vec<ChargeContribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cue {
    pub cue: SoundCue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinAnimation {
    pub candidate: usize,
    pub entry: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifeLost {
    pub lives_remaining: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub question_id: String,
    pub correct: bool,
    pub correct_index: usize,
    pub explanation: String,
    pub points_awarded: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Info {
    pub piece_id: String,
    pub display_name: String,
    pub blurb: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameOver {
    pub won: bool,
    pub points: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

/// Message body; the variant name is the envelope `kind`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum ProtocolMessage {
    Join(Join),
    Input(InputEvent),
    TickAck(TickAck),
    Hello(Hello),
    Snapshot(Box<Snapshot>),
    ScoreUpdate(ScoreUpdate),
    SoundCue(Cue),
    WinAnimation(WinAnimation),
    RoundEnd(RoundStat),
    LifeLost(LifeLost),
    Quiz(QuizPrompt),
    Explanation(Explanation),
    Info(Info),
    LevelEnd(RoundSummary),
    GameOver(GameOver),
    Error(ErrorBody),
}

impl ProtocolMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            ProtocolMessage::Join(_) => "join",
            ProtocolMessage::Input(_) => "input",
            ProtocolMessage::TickAck(_) => "tick_ack",
            ProtocolMessage::Hello(_) => "hello",
            ProtocolMessage::Snapshot(_) => "snapshot",
            ProtocolMessage::ScoreUpdate(_) => "score_update",
            ProtocolMessage::SoundCue(_) => "sound_cue",
            ProtocolMessage::WinAnimation(_) => "win_animation",
            ProtocolMessage::RoundEnd(_) => "round_end",
            ProtocolMessage::LifeLost(_) => "life_lost",
            ProtocolMessage::Quiz(_) => "quiz",
            ProtocolMessage::Explanation(_) => "explanation",
            ProtocolMessage::Info(_) => "info",
            ProtocolMessage::LevelEnd(_) => "level_end",
            ProtocolMessage::GameOver(_) => "game_over",
            ProtocolMessage::Error(_) => "error",
        }
    }

    pub fn is_inbound(&self) -> bool {
        matches!(
            self,
            ProtocolMessage::Join(_) | ProtocolMessage::Input(_) | ProtocolMessage::TickAck(_)
        )
    }
}

/// One envelope on the wire.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Message {
    pub seq: u64,
    #[serde(flatten)]
    pub body: ProtocolMessage,
}

impl Message {
    pub fn new(seq: u64, body: ProtocolMessage) -> Self {
        Self { seq, body }
    }
}

/// Serialize one envelope as a single JSON line, without the trailing newline.
pub fn encode(msg: &Message) -> String {
    serde_json::to_string(msg).expect("protocol messages serialize")
}

fn violation(path: impl Into<String>) -> ProtocolError {
    ProtocolError::SchemaViolation(path.into())
}

fn payload<T: DeserializeOwned>(value: Value) -> Result<T, ProtocolError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let mut path = String::from("payload");
        let inner = e.path().to_string();
        if inner != "." {
            if !inner.starts_with('[') {
                path.push('.');
            }
            path.push_str(&inner);
        }
        let message = e.inner().to_string();
        if let Some(rest) = message.strip_prefix("missing field `") {
            if let Some(field) = rest.split('`').next() {
                path.push('.');
                path.push_str(field);
            }
        }
        violation(path)
    })
}

/// Input payloads are decoded per variant so that errors keep their field path.
fn input_payload(value: Value) -> Result<InputEvent, ProtocolError> {
    #[derive(Deserialize)]
    struct Drag {
        candidate: usize,
        dx: f64,
        dy: f64,
    }
    #[derive(Deserialize)]
    struct Candidate {
        candidate: usize,
    }
    #[derive(Deserialize)]
    struct MaybeCandidate {
        #[serde(default)]
        candidate: Option<usize>,
    }
    #[derive(Deserialize)]
    struct Choice {
        choice: usize,
    }
    let kind = match value.get("type") {
        Some(Value::String(t)) => t.clone(),
        _ => return Err(violation("payload.type")),
    };
    Ok(match kind.as_str() {
        "drag" => {
            let d: Drag = payload(value)?;
            InputEvent::Drag {
                candidate: d.candidate,
                dx: d.dx,
                dy: d.dy,
            }
        }
        "double_tap" => InputEvent::DoubleTap {
            candidate: payload::<Candidate>(value)?.candidate,
        },
        "select_info" => InputEvent::SelectInfo {
            candidate: payload::<MaybeCandidate>(value)?.candidate,
        },
        "answer_quiz" => InputEvent::AnswerQuiz {
            choice: payload::<Choice>(value)?.choice,
        },
        "skip_quiz" => InputEvent::SkipQuiz,
        "dismiss" => InputEvent::Dismiss,
        _ => return Err(violation("payload.type")),
    })
}

/// Parse one envelope.
pub fn decode(text: &str) -> Result<Message, ProtocolError> {
    let value: Value = serde_json::from_str(text).map_err(|_| violation("$"))?;
    let Value::Object(mut map) = value else {
        return Err(violation("$"));
    };
    let seq = map
        .get("seq")
        .and_then(Value::as_u64)
        .ok_or_else(|| violation("seq"))?;
    let kind = match map.get("kind") {
        Some(Value::String(k)) => k.clone(),
        _ => return Err(violation("kind")),
    };
    let body = map.remove("payload").ok_or_else(|| violation("payload"))?;
    let body = match kind.as_str() {
        "join" => ProtocolMessage::Join(payload(body)?),
        "input" => ProtocolMessage::Input(input_payload(body)?),
        "tick_ack" => ProtocolMessage::TickAck(payload(body)?),
        "hello" => ProtocolMessage::Hello(payload(body)?),
        "snapshot" => ProtocolMessage::Snapshot(payload(body)?),
        "score_update" => ProtocolMessage::ScoreUpdate(payload(body)?),
        "sound_cue" => ProtocolMessage::SoundCue(payload(body)?),
        "win_animation" => ProtocolMessage::WinAnimation(payload(body)?),
        "round_end" => ProtocolMessage::RoundEnd(payload(body)?),
        "life_lost" => ProtocolMessage::LifeLost(payload(body)?),
        "quiz" => ProtocolMessage::Quiz(payload(body)?),
        "explanation" => ProtocolMessage::Explanation(payload(body)?),
        "info" => ProtocolMessage::Info(payload(body)?),
        "level_end" => ProtocolMessage::LevelEnd(payload(body)?),
        "game_over" => ProtocolMessage::GameOver(payload(body)?),
        "error" => ProtocolMessage::Error(payload(body)?),
        _ => return Err(violation("kind")),
    };
    Ok(Message { seq, body })
}

fn event_message(event: GameEvent, session: &Session) -> ProtocolMessage {
    match event {
        GameEvent::StateUpdate => ProtocolMessage::Snapshot(Box::new(session.snapshot())),
        GameEvent::ScoreUpdate {
            candidate,
            percent,
            overlap_area,
            per_charge,
        } => ProtocolMessage::ScoreUpdate(ScoreUpdate {
            candidate,
            percent,
            overlap_area,
            per_charge,
        }),
        GameEvent::SoundCue { cue } => ProtocolMessage::SoundCue(Cue { cue }),
        GameEvent::WinAnimation { candidate, entry } => {
            ProtocolMessage::WinAnimation(WinAnimation { candidate, entry })
        }
        GameEvent::RoundEnd(stat) => ProtocolMessage::RoundEnd(stat),
        GameEvent::LifeLost { lives_remaining } => {
            ProtocolMessage::LifeLost(LifeLost { lives_remaining })
        }
        GameEvent::LevelEnd(summary) => ProtocolMessage::LevelEnd(summary),
        GameEvent::Quiz(prompt) => ProtocolMessage::Quiz(prompt),
        GameEvent::Explanation {
            question_id,
            correct,
            correct_index,
            explanation,
            points_awarded,
        } => ProtocolMessage::Explanation(Explanation {
            question_id,
            correct,
            correct_index,
            explanation,
            points_awarded,
        }),
        GameEvent::Info {
            piece_id,
            display_name,
            blurb,
        } => ProtocolMessage::Info(Info {
            piece_id,
            display_name,
            blurb,
        }),
        GameEvent::GameOver { won, points } => ProtocolMessage::GameOver(GameOver { won, points }),
    }
}

fn error_body(code: &str, message: impl Into<String>) -> ProtocolMessage {
    ProtocolMessage::Error(ErrorBody {
        code: code.into(),
        message: message.into(),
    })
}

fn game_error_code(e: &GameError) -> &'static str {
    match e {
        GameError::InvalidPack(_) => "invalid_pack",
        GameError::IllegalInPhase { .. } => "illegal_in_phase",
        GameError::InvalidCandidate(_) => "invalid_candidate",
        GameError::InvalidTick(_) => "invalid_tick",
        GameError::InvalidInput(_) => "invalid_input",
        GameError::Quiz(_) => "quiz",
    }
}

/// Server side of one connection.
#[derive(Debug)]
pub struct ProtocolSession {
    packs: BTreeMap<String, Arc<LevelPack>>,
    bank: Arc<QuizBank>,
    config: GameConfig,
    default_seed: u64,
    session: Option<Session>,
    out_seq: u64,
    last_in_seq: Option<u64>,
}

impl ProtocolSession {
    pub fn new(
        packs: BTreeMap<String, Arc<LevelPack>>,
        bank: Arc<QuizBank>,
        config: GameConfig,
        default_seed: u64,
    ) -> Self {
        Self {
            packs,
            bank,
            config,
            default_seed,
            session: None,
            out_seq: 0,
            last_in_seq: None,
        }
    }

    pub fn with_pack(
        pack: Arc<LevelPack>,
        bank: Arc<QuizBank>,
        config: GameConfig,
        seed: u64,
    ) -> Self {
        let mut packs = BTreeMap::new();
        packs.insert(pack.pack_id.clone(), pack);
        Self::new(packs, bank, config, seed)
    }

    pub fn game(&self) -> Option<&Session> {
        self.session.as_ref()
    }

    fn emit(&mut self, out: &mut Vec<Message>, body: ProtocolMessage) {
        self.out_seq += 1;
        out.push(Message::new(self.out_seq, body));
    }

    /// Handle one decoded inbound message.
    pub fn handle(&mut self, msg: Message) -> Vec<Message> {
        let mut out = Vec::new();
        if self.last_in_seq.is_some_and(|last| msg.seq <= last) {
            self.emit(
                &mut out,
                error_body("seq", format!("seq {} is not increasing", msg.seq)),
            );
            return out;
        }
        self.last_in_seq = Some(msg.seq);
        match msg.body {
            ProtocolMessage::Join(join) => self.join(join, &mut out),
            ProtocolMessage::Input(input) => {
                let Some(session) = self.session.as_mut() else {
                    self.emit(&mut out, error_body("not_joined", "join first"));
                    return out;
                };
                let result = session.handle_input(&input);
                self.events(result, &mut out);
            }
            ProtocolMessage::TickAck(tick) => {
                let Some(session) = self.session.as_mut() else {
                    self.emit(&mut out, error_body("not_joined", "join first"));
                    return out;
                };
                let result = session.tick(tick.dt);
                self.events(result, &mut out);
            }
            other => {
                self.emit(
                    &mut out,
                    error_body(
                        "unexpected_kind",
                        format!("{} is server-to-client", other.kind()),
                    ),
                );
            }
        }
        out
    }

    /// Decode and handle one raw line; malformed lines produce an error message.
    pub fn handle_line(&mut self, line: &str) -> Vec<Message> {
        match decode(line) {
            Ok(msg) => self.handle(msg),
            Err(ProtocolError::SchemaViolation(path)) => {
                let mut out = Vec::new();
                self.emit(&mut out, error_body("schema_violation", path));
                out
            }
        }
    }

    fn join(&mut self, join: Join, out: &mut Vec<Message>) {
        if self.session.is_some() {
            self.emit(out, error_body("already_joined", "session already joined"));
            return;
        }
        let Some(pack) = self.packs.get(&join.pack_id).cloned() else {
            self.emit(
                out,
                error_body("unknown_pack", format!("no pack {:?}", join.pack_id)),
            );
            return;
        };
        let seed = join.seed.unwrap_or(self.default_seed);
        let mut config = self.config;
        if let Some(tier) = join.tier {
            config.tier = tier;
        }
        let created = Session::create(pack, self.bank.clone(), config, seed).and_then(|mut s| {
            if let Some(level) = join.start_level {
                s.jump_to_level(level)?;
            }
            Ok(s)
        });
        match created {
            Ok(session) => {
                let hello = Hello {
                    protocol_version: PROTOCOL_VERSION,
                    pack_id: join.pack_id,
                    seed,
                    level_spec: *session.level_spec(),
                };
                let snapshot = session.snapshot();
                self.session = Some(session);
                self.emit(out, ProtocolMessage::Hello(hello));
                self.emit(out, ProtocolMessage::Snapshot(Box::new(snapshot)));
            }
            Err(e) => self.emit(out, error_body(game_error_code(&e), e.to_string())),
        }
    }

    fn events(&mut self, result: Result<Vec<GameEvent>, GameError>, out: &mut Vec<Message>) {
        match result {
            Ok(events) => {
                for e in events {
                    let body = event_message(e, self.session.as_ref().expect("joined"));
                    self.emit(out, body);
                }
            }
            Err(e) => self.emit(out, error_body(game_error_code(&e), e.to_string())),
        }
    }
}

/// Feed inbound NDJSON lines to a fresh connection and collect the outbound lines.
pub fn replay<'a>(
    session: &mut ProtocolSession,
    inbound: impl IntoIterator<Item = &'a str>,
) -> Vec<String> {
    let mut out = Vec::new();
    for line in inbound {
        if line.trim().is_empty() {
            continue;
        }
        out.extend(session.handle_line(line).iter().map(encode));
    }
    out
}
