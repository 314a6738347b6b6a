//! Level, round and quiz loop over a pack of puzzle pieces.
//!
//! A [`Session`] owns one game. Inputs and clock ticks go in, [`GameEvent`]s
//! come out in a deterministic order; all randomness flows from one seeded
//! ChaCha stream.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{
    self, ChargeContribution, DockScore, DynamicsState, EngineConfig, MotionFlags, PlayArea,
};
use crate::geometry::{ChargePoint, Pose2D, SlicePiece};
use crate::pdb::Side;
use crate::quiz::{QuizBank, QuizDeck, QuizError, QuizQuestion, Tier};
use crate::Vec2;

/// The seven level rows of the published design.
pub const LEVEL_COUNT: usize = 7;

/// The ten complexes the default pack is built from.
pub const DEFAULT_ENTRIES: [&str; 10] = [
    "1acb", "1atn", "1avx", "1buh", "1bvn", "1emv", "1fss", "1grn", "2ptc", "4kc3",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSpec {
    pub level: u32,
    /// Unique dockable pairs the level is designed around.
    pub n_proteins: u32,
    pub charges_visible: bool,
    pub n_rounds: u32,
    pub rotation_required: bool,
    pub candidates_per_round: u32,
    pub moving: bool,
    pub gravity: bool,
    /// Seconds per round.
    pub round_time_limit: f64,
}

/// Default level rows.
pub fn level_table() -> Vec<LevelSpec> {
    // (n_proteins, charges, rounds, rotation, candidates, moving, gravity, time)
    let rows = [
        (3, false, 1, false, 3, false, false, 60.0),
        (4, false, 1, true, 3, false, false, 60.0),
        (17, true, 2, false, 3, false, false, 60.0),
        (10, true, 3, false, 3, true, false, 45.0),
        (17, true, 3, true, 3, false, false, 45.0),
        (15, true, 5, true, 3, true, true, 40.0),
        (18, true, 5, true, 4, true, true, 40.0),
    ];
    rows.iter()
        .enumerate()
        .map(|(i, &(n, c, r, rot, k, m, g, t))| LevelSpec {
            level: i as u32 + 1,
            n_proteins: n,
            charges_visible: c,
            n_rounds: r,
            rotation_required: rot,
            candidates_per_round: k,
            moving: m,
            gravity: g,
            round_time_limit: t,
        })
        .collect()
}

/// Level rows plus the pieces they draw from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelPack {
    pub pack_id: String,
    pub levels: Vec<LevelSpec>,
    pub pieces: Vec<SlicePiece>,
}

/// The two pieces of one complex.
#[derive(Debug, Clone, Copy)]
pub struct EntryPieces<'a> {
    pub receptor: Option<&'a SlicePiece>,
    pub ligand: Option<&'a SlicePiece>,
}

impl LevelPack {
    pub fn new(
        pack_id: impl Into<String>,
        levels: Vec<LevelSpec>,
        mut pieces: Vec<SlicePiece>,
    ) -> Self {
        pieces.sort_by(|a, b| a.piece_id.cmp(&b.piece_id));
        Self {
            pack_id: pack_id.into(),
            levels,
            pieces,
        }
    }

    pub fn piece(&self, id: &str) -> Option<&SlicePiece> {
        self.pieces.iter().find(|p| p.piece_id == id)
    }

    pub fn entries(&self) -> BTreeMap<&str, EntryPieces<'_>> {
        let mut out: BTreeMap<&str, EntryPieces<'_>> = BTreeMap::new();
        for p in &self.pieces {
            let slot = out.entry(p.source_entry.as_str()).or_insert(EntryPieces {
                receptor: None,
                ligand: None,
            });
            match p.side {
                Side::Receptor => slot.receptor = Some(p),
                Side::Ligand => slot.ligand = Some(p),
            }
        }
        out
    }

    /// Entries with both pieces present, in code order.
    pub fn complete_entries(&self) -> Vec<&str> {
        self.entries()
            .into_iter()
            .filter(|(_, e)| e.receptor.is_some() && e.ligand.is_some())
            .map(|(k, _)| k)
            .collect()
    }

    pub fn level(&self, level: u32) -> Option<&LevelSpec> {
        self.levels.iter().find(|l| l.level == level)
    }

    /// Reasons the pack cannot host a session; empty when playable.
    pub fn playability_issues(&self) -> Vec<String> {
        let mut issues = Vec::new();
        for n in 1..=LEVEL_COUNT as u32 {
            match self.levels.iter().filter(|l| l.level == n).count() {
                0 => issues.push(format!("level {n} missing")),
                1 => {}
                k => issues.push(format!("level {n} defined {k} times")),
            }
        }
        for l in &self.levels {
            if !(1..=LEVEL_COUNT as u32).contains(&l.level) {
                issues.push(format!("level {} outside 1..=7", l.level));
            }
            if l.n_rounds == 0 || l.candidates_per_round == 0 {
                issues.push(format!("level {} has no rounds or no candidates", l.level));
            }
            if !(l.round_time_limit.is_finite() && l.round_time_limit > 0.0) {
                issues.push(format!("level {} time limit must be positive", l.level));
            }
        }
        let entries = self.entries();
        let complete = self.complete_entries().len();
        let ligands = entries.values().filter(|e| e.ligand.is_some()).count();
        if complete == 0 {
            issues.push("no entry has both a receptor and a ligand piece".into());
        }
        let need = self
            .levels
            .iter()
            .map(|l| l.candidates_per_round as usize)
            .max()
            .unwrap_or(0);
        if ligands < need {
            issues.push(format!(
                "{need} candidates per round need ligand pieces from {need} entries, pack has {ligands}"
            ));
        }
        for p in &self.pieces {
            if p.outline.len() < 3 {
                issues.push(format!("piece {} has a degenerate outline", p.piece_id));
            }
        }
        issues
    }

    /// Differences from the published level design and entry list.
    pub fn level_table_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let reference = level_table();
        for want in &reference {
            match self.level(want.level) {
                None => out.push(format!("level {} missing", want.level)),
                Some(got) if got != want => out.push(format!(
                    "level {} differs from the reference row: {:?}",
                    want.level, got
                )),
                Some(_) => {}
            }
        }
        if self.levels.len() != reference.len() {
            out.push(format!(
                "pack has {} level rows, expected 7",
                self.levels.len()
            ));
        }
        let complete = self.complete_entries();
        for code in DEFAULT_ENTRIES {
            if !complete.contains(&code) {
                out.push(format!("entry {code} missing"));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GameConfig {
    pub lives: u32,
    pub base_points: u64,
    /// Bonus points per second left on the clock.
    pub time_bonus_rate: f64,
    pub quiz_bonus: u64,
    pub rotation_step_deg: f64,
    pub tier: Tier,
    /// Largest integration step; longer ticks are subdivided.
    pub max_substep: f64,
    pub snapshot_hz: f64,
    /// Seconds between repeated weak-dock cues.
    pub weak_cue_interval: f64,
    pub engine: EngineConfig,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            lives: 3,
            base_points: 100,
            time_bonus_rate: 10.0,
            quiz_bonus: 50,
            rotation_step_deg: 15.0,
            tier: Tier::Gcse,
            max_substep: 0.05,
            snapshot_hz: 30.0,
            weak_cue_interval: 1.0,
            engine: EngineConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Tutorial,
    Playing,
    Quiz,
    RoundEnd,
    LevelEnd,
    GameOver,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Phase::Tutorial => "tutorial",
            Phase::Playing => "playing",
            Phase::Quiz => "quiz",
            Phase::RoundEnd => "round_end",
            Phase::LevelEnd => "level_end",
            Phase::GameOver => "game_over",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InputEvent {
    Drag {
        candidate: usize,
        dx: f64,
        dy: f64,
    },
    DoubleTap {
        candidate: usize,
    },
    /// Info page for a candidate, or for the receptor when `candidate` is absent.
    SelectInfo {
        #[serde(default)]
        candidate: Option<usize>,
    },
    AnswerQuiz {
        choice: usize,
    },
    SkipQuiz,
    Dismiss,
}

impl InputEvent {
    pub fn name(&self) -> &'static str {
        match self {
            InputEvent::Drag { .. } => "drag",
            InputEvent::DoubleTap { .. } => "double_tap",
            InputEvent::SelectInfo { .. } => "select_info",
            InputEvent::AnswerQuiz { .. } => "answer_quiz",
            InputEvent::SkipQuiz => "skip_quiz",
            InputEvent::Dismiss => "dismiss",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SoundCue {
    Repulsion,
    Win,
    Weak,
    LifeLost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundStat {
    pub level: u32,
    pub round: u32,
    pub time_taken: f64,
    pub first_selection_correct: bool,
    pub points_awarded: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub level: u32,
    pub total_points: u64,
    pub mean_time: f64,
    pub precision: f64,
    pub rounds: Vec<RoundStat>,
}

/// A quiz question without its answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuizPrompt {
    pub question_id: String,
    pub tier: Tier,
    pub prompt: String,
    pub choices: Vec<String>,
}

impl From<&QuizQuestion> for QuizPrompt {
    fn from(q: &QuizQuestion) -> Self {
        Self {
            question_id: q.id.clone(),
            tier: q.tier,
            prompt: q.prompt.clone(),
            choices: q.choices.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum GameEvent {
    /// The observable state changed; carries no payload of its own.
    StateUpdate,
    ScoreUpdate {
        candidate: usize,
        percent: f64,
        overlap_area: f64,
        per_charge: Vec<ChargeContribution>,
    },
    SoundCue {
        cue: SoundCue,
    },
    WinAnimation {
        candidate: usize,
        entry: String,
    },
    RoundEnd(RoundStat),
    LifeLost {
        lives_remaining: u32,
    },
    LevelEnd(RoundSummary),
    Quiz(QuizPrompt),
    Explanation {
        question_id: String,
        correct: bool,
        correct_index: usize,
        explanation: String,
        points_awarded: u64,
    },
    Info {
        piece_id: String,
        display_name: String,
        blurb: String,
    },
    GameOver {
        won: bool,
        points: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("invalid level pack: {}", .0.join("; "))]
    InvalidPack(Vec<String>),
    #[error("{event} is not allowed in phase {phase}")]
    IllegalInPhase { event: String, phase: Phase },
    #[error("no candidate {0}")]
    InvalidCandidate(usize),
    #[error("invalid tick length {0}")]
    InvalidTick(f64),
    #[error("invalid input value: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Quiz(#[from] QuizError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub piece_id: String,
    pub dynamics: DynamicsState,
}

/// Observable state of one game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub phase: Phase,
    /// 0-based index into the level list.
    pub level_index: usize,
    /// 0-based round within the level.
    pub round_index: u32,
    pub lives: u32,
    pub points: u64,
    pub timer_remaining: f64,
    pub entry: String,
    pub receptor: String,
    pub candidates: Vec<Candidate>,
    pub selected: Option<usize>,
    pub rng_seed: u64,
    pub round_stats: Vec<RoundStat>,
    pub last_percent: Option<f64>,
    pub quiz: Option<QuizPrompt>,
    pub play_area: PlayArea,
}

/// Drawn piece as shown to the client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceView {
    pub piece_id: String,
    pub display_name: String,
    pub outline: Vec<Vec2>,
    pub charges: Vec<ChargePoint>,
}

impl PieceView {
    fn of(piece: &SlicePiece) -> Self {
        Self {
            piece_id: piece.piece_id.clone(),
            display_name: piece.display_name.clone(),
            outline: piece.outline.clone(),
            charges: piece.charges.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateView {
    pub index: usize,
    pub piece: PieceView,
    pub pose: Pose2D,
    pub velocity: Vec2,
}

/// Self-contained picture of a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub phase: Phase,
    pub level: LevelSpec,
    pub round: u32,
    pub lives: u32,
    pub points: u64,
    pub timer_remaining: f64,
    pub receptor: PieceView,
    pub candidates: Vec<CandidateView>,
    pub selected: Option<usize>,
    pub percent: Option<f64>,
    pub quiz: Option<QuizPrompt>,
    pub play_area: PlayArea,
    pub round_stats: Vec<RoundStat>,
}

/// Pieces in play for the current round, charges already hidden if needed.
#[derive(Debug, Clone)]
struct RoundPieces {
    receptor: SlicePiece,
    candidates: Vec<SlicePiece>,
}

#[derive(Debug, Clone)]
pub struct Session {
    state: GameState,
    pack: Arc<LevelPack>,
    bank: Arc<QuizBank>,
    config: GameConfig,
    rng: ChaCha8Rng,
    deck: QuizDeck,
    round: RoundPieces,
    used_entries: Vec<String>,
    first_pick: Option<bool>,
    current_question: Option<QuizQuestion>,
    since_snapshot: f64,
    since_weak_cue: f64,
}

fn round_points(config: &GameConfig, remaining: f64) -> u64 {
    config.base_points + (remaining.max(0.0) * config.time_bonus_rate).ceil() as u64
}

/// Rotate `pose` by `delta` about the local point `pivot`.
fn rotate_about(pose: &Pose2D, pivot: &Vec2, delta: f64) -> Pose2D {
    let anchor = pose.apply(pivot);
    let turned = Pose2D::new(0.0, 0.0, pose.theta + delta);
    let moved = turned.apply(pivot);
    Pose2D::new(anchor.x - moved.x, anchor.y - moved.y, turned.theta)
}

impl Session {
    pub fn create(
        pack: Arc<LevelPack>,
        bank: Arc<QuizBank>,
        config: GameConfig,
        seed: u64,
    ) -> Result<Session, GameError> {
        let issues = pack.playability_issues();
        if !issues.is_empty() {
            return Err(GameError::InvalidPack(issues));
        }
        let mut levels = pack.levels.clone();
        levels.sort_by_key(|l| l.level);
        let pack = if levels != pack.levels {
            Arc::new(LevelPack {
                levels,
                ..(*pack).clone()
            })
        } else {
            pack
        };
        let placeholder = pack.pieces[0].clone();
        let mut session = Session {
            state: GameState {
                phase: Phase::Tutorial,
                level_index: 0,
                round_index: 0,
                lives: config.lives,
                points: 0,
                timer_remaining: 0.0,
                entry: String::new(),
                receptor: String::new(),
                candidates: Vec::new(),
                selected: None,
                rng_seed: seed,
                round_stats: Vec::new(),
                last_percent: None,
                quiz: None,
                play_area: PlayArea {
                    min: Vec2::zeros(),
                    max: Vec2::zeros(),
                },
            },
            pack,
            bank,
            config,
            rng: ChaCha8Rng::seed_from_u64(seed),
            deck: QuizDeck::default(),
            round: RoundPieces {
                receptor: placeholder,
                candidates: Vec::new(),
            },
            used_entries: Vec::new(),
            first_pick: None,
            current_question: None,
            since_snapshot: 0.0,
            since_weak_cue: 0.0,
        };
        session.setup_round(None);
        Ok(session)
    }

    /// Restart at the tutorial of `level`, keeping lives and points.
    pub fn jump_to_level(&mut self, level: u32) -> Result<(), GameError> {
        let index = self
            .pack
            .levels
            .iter()
            .position(|l| l.level == level)
            .ok_or_else(|| GameError::InvalidInput(format!("no level {level}")))?;
        self.state.level_index = index;
        self.state.round_index = 0;
        self.state.phase = Phase::Tutorial;
        self.state.quiz = None;
        self.current_question = None;
        self.first_pick = None;
        self.setup_round(None);
        Ok(())
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn pack(&self) -> &LevelPack {
        &self.pack
    }

    pub fn level_spec(&self) -> &LevelSpec {
        &self.pack.levels[self.state.level_index]
    }

    /// Receptor piece in play, with charges hidden on hidden-charge levels.
    pub fn receptor_piece(&self) -> &SlicePiece {
        &self.round.receptor
    }

    pub fn candidate_piece(&self, index: usize) -> Option<&SlicePiece> {
        self.round.candidates.get(index)
    }

    /// Index of the true partner and the pose that docks it. Intended for
    /// scripted play and tests; never sent to clients.
    pub fn solution(&self) -> Option<(usize, Pose2D)> {
        self.round
            .candidates
            .iter()
            .position(|c| engine::is_true_partner(&self.round.receptor, c))
            .map(|i| (i, self.round.candidates[i].canonical_pose))
    }

    fn spec(&self) -> LevelSpec {
        self.pack.levels[self.state.level_index]
    }

    fn prepare(&self, piece: &SlicePiece) -> SlicePiece {
        if self.spec().charges_visible {
            piece.clone()
        } else {
            piece.without_charges()
        }
    }

    /// Draw a target complex (or reuse `target`), decoys, and start poses.
    fn setup_round(&mut self, target: Option<String>) {
        let spec = self.spec();
        let complete: Vec<String> = self
            .pack
            .complete_entries()
            .into_iter()
            .map(String::from)
            .collect();
        let entry = match target {
            Some(e) => e,
            None => {
                let mut fresh: Vec<&String> = complete
                    .iter()
                    .filter(|e| !self.used_entries.contains(e))
                    .collect();
                if fresh.is_empty() {
                    self.used_entries.clear();
                    fresh = complete.iter().collect();
                }
                let pick = (*fresh
                    .choose(&mut self.rng)
                    .expect("pack has a complete entry"))
                .clone();
                self.used_entries.push(pick.clone());
                pick
            }
        };
        let entries = self.pack.entries();
        let pieces = entries[entry.as_str()];
        let receptor = self.prepare(pieces.receptor.expect("complete entry"));
        let mut chosen = vec![self.prepare(pieces.ligand.expect("complete entry"))];
        let decoy_pool: Vec<&SlicePiece> = entries
            .iter()
            .filter(|(code, _)| **code != entry.as_str())
            .filter_map(|(_, e)| e.ligand)
            .collect();
        let want = spec.candidates_per_round as usize - 1;
        for d in decoy_pool.choose_multiple(&mut self.rng, want) {
            chosen.push(self.prepare(d));
        }
        chosen.shuffle(&mut self.rng);

        let r_rec = receptor.circumradius();
        let r_max = chosen.iter().map(|c| c.circumradius()).fold(0.0, f64::max);
        let area = PlayArea::around(&receptor, r_rec + 2.0 * r_max + 10.0);
        let center = receptor.centroid();
        let ring = r_rec + r_max + 5.0;
        let offset = self.rng.random_range(0.0..std::f64::consts::TAU);
        let flags = MotionFlags {
            shaking: spec.moving,
            gravity: spec.gravity,
        };
        let n = chosen.len();
        let mut candidates = Vec::with_capacity(n);
        for (k, piece) in chosen.iter().enumerate() {
            let theta = if spec.rotation_required {
                let steps = self.rng.random_range(1..24u32) as f64;
                (steps * self.config.rotation_step_deg).to_radians()
            } else {
                0.0
            };
            let angle = offset + k as f64 * std::f64::consts::TAU / n as f64;
            let spot = center + Vec2::new(angle.cos(), angle.sin()) * ring;
            let local = piece.centroid();
            let turned = Pose2D::new(0.0, 0.0, theta).apply(&local);
            let t = area.clamp(&(spot - turned));
            let mut dynamics = DynamicsState::at_rest(Pose2D::new(t.x, t.y, theta), flags);
            if spec.moving {
                dynamics.shake_phase = self.rng.random_range(0.0..std::f64::consts::TAU);
            }
            candidates.push(Candidate {
                piece_id: piece.piece_id.clone(),
                dynamics,
            });
        }
        self.state.entry = entry;
        self.state.receptor = receptor.piece_id.clone();
        self.state.candidates = candidates;
        self.state.selected = None;
        self.state.last_percent = None;
        self.state.timer_remaining = spec.round_time_limit;
        self.state.play_area = area;
        self.round = RoundPieces {
            receptor,
            candidates: chosen,
        };
        self.since_snapshot = 0.0;
        self.since_weak_cue = 0.0;
    }

    fn illegal(&self, event: &InputEvent) -> GameError {
        GameError::IllegalInPhase {
            event: event.name().into(),
            phase: self.state.phase,
        }
    }

    fn check_candidate(&self, index: usize) -> Result<(), GameError> {
        if index < self.state.candidates.len() {
            Ok(())
        } else {
            Err(GameError::InvalidCandidate(index))
        }
    }

    pub fn handle_input(&mut self, event: &InputEvent) -> Result<Vec<GameEvent>, GameError> {
        let phase = self.state.phase;
        let mut out = Vec::new();
        match (phase, event) {
            (Phase::Playing, InputEvent::Drag { candidate, dx, dy }) => {
                self.check_candidate(*candidate)?;
                if !(dx.is_finite() && dy.is_finite()) {
                    return Err(GameError::InvalidInput("drag delta must be finite".into()));
                }
                self.select(*candidate);
                let c = &mut self.state.candidates[*candidate].dynamics;
                let moved = self
                    .state
                    .play_area
                    .clamp(&(c.pose.translation() + Vec2::new(*dx, *dy)));
                c.pose = Pose2D::new(moved.x, moved.y, c.pose.theta);
                self.after_pose_change(*candidate, &mut out);
                out.push(GameEvent::StateUpdate);
            }
            (Phase::Playing, InputEvent::DoubleTap { candidate }) => {
                self.check_candidate(*candidate)?;
                self.select(*candidate);
                let pivot = self.round.candidates[*candidate].centroid();
                let c = &mut self.state.candidates[*candidate].dynamics;
                let step = self.config.rotation_step_deg.to_radians();
                let turned = rotate_about(&c.pose, &pivot, step);
                let t = self.state.play_area.clamp(&turned.translation());
                c.pose = Pose2D::new(t.x, t.y, turned.theta);
                self.after_pose_change(*candidate, &mut out);
                out.push(GameEvent::StateUpdate);
            }
            (Phase::Playing | Phase::Tutorial, InputEvent::SelectInfo { candidate }) => {
                let piece = match candidate {
                    Some(i) => {
                        self.check_candidate(*i)?;
                        &self.round.candidates[*i]
                    }
                    None => &self.round.receptor,
                };
                out.push(GameEvent::Info {
                    piece_id: piece.piece_id.clone(),
                    display_name: piece.display_name.clone(),
                    blurb: piece.blurb.clone(),
                });
                if phase == Phase::Playing {
                    out.push(GameEvent::StateUpdate);
                }
            }
            (Phase::Tutorial, InputEvent::Dismiss) => {
                self.state.phase = Phase::Playing;
                out.push(GameEvent::StateUpdate);
            }
            (Phase::RoundEnd, InputEvent::Dismiss) => {
                self.state.round_index += 1;
                self.first_pick = None;
                self.setup_round(None);
                self.state.phase = Phase::Playing;
                out.push(GameEvent::StateUpdate);
            }
            (Phase::LevelEnd, InputEvent::Dismiss) => {
                let q = self
                    .deck
                    .draw(&self.bank, self.config.tier, &mut self.rng)
                    .ok()
                    .cloned();
                match q {
                    Some(q) => {
                        let prompt = QuizPrompt::from(&q);
                        self.state.quiz = Some(prompt.clone());
                        self.current_question = Some(q);
                        self.state.phase = Phase::Quiz;
                        out.push(GameEvent::Quiz(prompt));
                    }
                    None => self.advance_level(&mut out),
                }
                out.push(GameEvent::StateUpdate);
            }
            (Phase::Quiz, InputEvent::AnswerQuiz { choice }) => {
                let q = self
                    .current_question
                    .take()
                    .expect("quiz phase has a question");
                if *choice >= q.choices.len() {
                    self.current_question = Some(q);
                    return Err(GameError::InvalidInput(format!(
                        "choice {choice} out of range"
                    )));
                }
                let correct = *choice == q.correct_index;
                let award = if correct { self.config.quiz_bonus } else { 0 };
                self.state.points += award;
                out.push(GameEvent::Explanation {
                    question_id: q.id.clone(),
                    correct,
                    correct_index: q.correct_index,
                    explanation: q.explanation.clone(),
                    points_awarded: award,
                });
                self.state.quiz = None;
                self.advance_level(&mut out);
                out.push(GameEvent::StateUpdate);
            }
            (Phase::Quiz, InputEvent::SkipQuiz) => {
                self.current_question = None;
                self.state.quiz = None;
                self.advance_level(&mut out);
                out.push(GameEvent::StateUpdate);
            }
            _ => return Err(self.illegal(event)),
        }
        Ok(out)
    }

    fn select(&mut self, candidate: usize) {
        if self.first_pick.is_none() {
            self.first_pick = Some(engine::is_true_partner(
                &self.round.receptor,
                &self.round.candidates[candidate],
            ));
        }
        self.state.selected = Some(candidate);
    }

    fn score(&self, candidate: usize) -> DockScore {
        engine::score_pose(
            &self.round.receptor,
            &self.round.candidates[candidate],
            &self.state.candidates[candidate].dynamics.pose,
            &self.config.engine,
        )
    }

    fn after_pose_change(&mut self, candidate: usize, out: &mut Vec<GameEvent>) {
        let score = self.score(candidate);
        self.state.last_percent = Some(score.percent);
        out.push(GameEvent::ScoreUpdate {
            candidate,
            percent: score.percent,
            overlap_area: score.overlap_area,
            per_charge: score.per_charge.clone(),
        });
        let piece = &self.round.candidates[candidate];
        let partner = engine::is_true_partner(&self.round.receptor, piece);
        if partner && engine::check_snap(&score, &self.config.engine) {
            let dynamics = &mut self.state.candidates[candidate].dynamics;
            dynamics.pose = piece.canonical_pose;
            dynamics.velocity = Vec2::zeros();
            dynamics.angular_velocity = 0.0;
            self.state.last_percent = Some(100.0);
            self.win_round(candidate, out);
            return;
        }
        let pose = self.state.candidates[candidate].dynamics.pose;
        let kick = engine::repulsion_impulse(
            &self.round.receptor,
            piece,
            &pose,
            partner,
            &score,
            &self.config.engine,
        );
        if kick != Vec2::zeros() {
            self.state.candidates[candidate].dynamics.velocity += kick;
            out.push(GameEvent::SoundCue {
                cue: SoundCue::Repulsion,
            });
        }
    }

    fn win_round(&mut self, candidate: usize, out: &mut Vec<GameEvent>) {
        let spec = self.spec();
        let remaining = self.state.timer_remaining.max(0.0);
        let award = round_points(&self.config, remaining);
        self.state.points += award;
        let stat = RoundStat {
            level: spec.level,
            round: self.state.round_index + 1,
            time_taken: spec.round_time_limit - remaining,
            first_selection_correct: self.first_pick.unwrap_or(false),
            points_awarded: award,
        };
        self.state.round_stats.push(stat.clone());
        out.push(GameEvent::WinAnimation {
            candidate,
            entry: self.state.entry.clone(),
        });
        out.push(GameEvent::SoundCue { cue: SoundCue::Win });
        out.push(GameEvent::RoundEnd(stat));
        if self.state.round_index + 1 >= spec.n_rounds {
            self.state.phase = Phase::LevelEnd;
            let summary = self.level_summary();
            out.push(GameEvent::LevelEnd(summary));
        } else {
            self.state.phase = Phase::RoundEnd;
        }
    }

    fn advance_level(&mut self, out: &mut Vec<GameEvent>) {
        if self.state.level_index + 1 >= self.pack.levels.len() {
            self.state.phase = Phase::GameOver;
            out.push(GameEvent::GameOver {
                won: true,
                points: self.state.points,
            });
            return;
        }
        self.state.level_index += 1;
        self.state.round_index = 0;
        self.state.round_stats.clear();
        self.first_pick = None;
        self.used_entries.clear();
        self.setup_round(None);
        self.state.phase = Phase::Tutorial;
    }

    fn level_summary(&self) -> RoundSummary {
        let spec = self.spec();
        let rounds: Vec<RoundStat> = self
            .state
            .round_stats
            .iter()
            .filter(|s| s.level == spec.level)
            .cloned()
            .collect();
        let n = rounds.len().max(1) as f64;
        RoundSummary {
            level: spec.level,
            total_points: self.state.points,
            mean_time: rounds.iter().map(|r| r.time_taken).sum::<f64>() / n,
            precision: rounds.iter().filter(|r| r.first_selection_correct).count() as f64
                / spec.n_rounds.max(1) as f64,
            rounds,
        }
    }

    /// End-of-level statistics.
    pub fn round_summary(&self) -> Result<RoundSummary, GameError> {
        if self.state.phase != Phase::LevelEnd {
            return Err(GameError::IllegalInPhase {
                event: "round_summary".into(),
                phase: self.state.phase,
            });
        }
        Ok(self.level_summary())
    }

    /// Advance the clock. Outside the playing phase the clock is ignored.
    pub fn tick(&mut self, dt: f64) -> Result<Vec<GameEvent>, GameError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(GameError::InvalidTick(dt));
        }
        let mut out = Vec::new();
        if self.state.phase != Phase::Playing {
            return Ok(out);
        }
        let steps = (dt / self.config.max_substep).ceil().max(1.0) as usize;
        let h = dt / steps as f64;
        for _ in 0..steps {
            for c in &mut self.state.candidates {
                c.dynamics = engine::step_dynamics(
                    &c.dynamics,
                    h.min(0.1),
                    &self.config.engine,
                    &self.state.play_area,
                )
                .expect("substep within bounds");
            }
        }
        self.state.timer_remaining -= dt;

        if let Some(sel) = self.state.selected {
            let score = self.score(sel);
            self.state.last_percent = Some(score.percent);
            let weak = score.percent > 0.0
                && score.percent < self.config.engine.weak_threshold
                && score.overlap_area > 0.0;
            if weak {
                self.since_weak_cue += dt;
                if self.since_weak_cue >= self.config.weak_cue_interval {
                    self.since_weak_cue = 0.0;
                    out.push(GameEvent::SoundCue {
                        cue: SoundCue::Weak,
                    });
                }
            } else {
                self.since_weak_cue = self.config.weak_cue_interval;
            }
        }

        if self.state.timer_remaining <= 0.0 {
            self.state.timer_remaining = 0.0;
            self.state.lives = self.state.lives.saturating_sub(1);
            out.push(GameEvent::LifeLost {
                lives_remaining: self.state.lives,
            });
            out.push(GameEvent::SoundCue {
                cue: SoundCue::LifeLost,
            });
            if self.state.lives == 0 {
                self.state.phase = Phase::GameOver;
                out.push(GameEvent::GameOver {
                    won: false,
                    points: self.state.points,
                });
            } else {
                let entry = self.state.entry.clone();
                self.setup_round(Some(entry));
            }
            out.push(GameEvent::StateUpdate);
            return Ok(out);
        }

        self.since_snapshot += dt;
        if self.since_snapshot + 1e-12 >= 1.0 / self.config.snapshot_hz {
            self.since_snapshot = 0.0;
            out.push(GameEvent::StateUpdate);
        }
        Ok(out)
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            phase: self.state.phase,
            level: self.spec(),
            round: self.state.round_index + 1,
            lives: self.state.lives,
            points: self.state.points,
            timer_remaining: self.state.timer_remaining,
            receptor: PieceView::of(&self.round.receptor),
            candidates: self
                .state
                .candidates
                .iter()
                .zip(&self.round.candidates)
                .enumerate()
                .map(|(index, (c, piece))| CandidateView {
                    index,
                    piece: PieceView::of(piece),
                    pose: c.dynamics.pose,
                    velocity: c.dynamics.velocity,
                })
                .collect(),
            selected: self.state.selected,
            percent: self.state.last_percent,
            quiz: self.state.quiz.clone(),
            play_area: self.state.play_area,
            round_stats: self.state.round_stats.clone(),
        }
    }
}
