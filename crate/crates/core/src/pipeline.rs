//! Ingest, build, validate and simulate: the stages behind the command-line tool.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use tracing::{info, warn};

use crate::charges::{find_salt_bridges, BridgeReport, ChargeConfig, ChargeError};
use crate::engine::{self, EngineConfig};
use crate::game::{level_table, GameConfig, InputEvent, LevelPack, Phase, DEFAULT_ENTRIES};
use crate::geometry::{
    self, extract_footprint, fit_interface_plane, make_piece_pair, polygon, split_halves,
    ContactParams, FootprintParams, GeometryError, PieceMeta, SlicePiece,
};
use crate::pdb::{parse_structure, select_pair, PdbError, Side, StructureModel};
use crate::protocol::{encode, Join, Message, ProtocolMessage, ProtocolSession, TickAck};
use crate::quiz::QuizBank;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("no input structures found")]
    NoInputs,
    #[error("{count} file(s) failed to parse")]
    IngestFailed { count: usize },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: PdbError },
    #[error("entry {0} not in configuration")]
    UnknownEntry(String),
    #[error("script line {line}: {message}")]
    Script { line: usize, message: String },
    #[error("invalid pack: {0}")]
    Pack(String),
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// One complex to slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryStanza {
    pub pdb_code: String,
    /// File name inside `pdb_dir`; defaults to `<pdb_code>.pdb`.
    #[serde(default)]
    pub file: Option<String>,
    pub receptor_chains: Vec<char>,
    pub ligand_chains: Vec<char>,
    #[serde(default)]
    pub display_name: String,
    #[serde(default)]
    pub receptor_name: String,
    #[serde(default)]
    pub ligand_name: String,
    #[serde(default)]
    pub blurb: String,
}

impl EntryStanza {
    pub fn file_name(&self) -> String {
        self.file
            .clone()
            .unwrap_or_else(|| format!("{}.pdb", self.pdb_code))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub pack_id: String,
    pub pdb_dir: PathBuf,
    pub cache_dir: PathBuf,
    pub output_dir: PathBuf,
    pub charges: ChargeConfig,
    pub contact: ContactParams,
    pub footprint: FootprintParams,
    pub engine: EngineConfig,
    pub game: GameConfig,
    #[serde(rename = "entry")]
    pub entries: Vec<EntryStanza>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            pack_id: "default".into(),
            pdb_dir: PathBuf::from("fixtures/pdb"),
            cache_dir: PathBuf::from("build/cache"),
            output_dir: PathBuf::from("build/assets"),
            charges: ChargeConfig::default(),
            contact: ContactParams::default(),
            footprint: FootprintParams::default(),
            engine: EngineConfig::default(),
            game: GameConfig::default(),
            entries: Vec::new(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        let mut config: PipelineConfig =
            toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        config.check()?;
        config.game.engine = config.engine;
        Ok(config)
    }

    /// Load a config file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut config.pdb_dir,
            &mut config.cache_dir,
            &mut config.output_dir,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    fn check(&self) -> Result<(), PipelineError> {
        let mut seen = std::collections::BTreeSet::new();
        for e in &self.entries {
            if !seen.insert(e.pdb_code.as_str()) {
                return Err(PipelineError::Config(format!(
                    "entry {} listed twice",
                    e.pdb_code
                )));
            }
            if e.receptor_chains.is_empty() || e.ligand_chains.is_empty() {
                return Err(PipelineError::Config(format!(
                    "entry {} needs receptor and ligand chains",
                    e.pdb_code
                )));
            }
        }
        self.footprint
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn entry(&self, code: &str) -> Option<&EntryStanza> {
        self.entries.iter().find(|e| e.pdb_code == code)
    }

    /// Codes of the reference entry list missing from this config.
    pub fn missing_reference_entries(&self) -> Vec<&'static str> {
        DEFAULT_ENTRIES
            .iter()
            .copied()
            .filter(|c| self.entry(c).is_none())
            .collect()
    }

    /// Restrict to one entry.
    pub fn only(&self, code: &str) -> Result<Self, PipelineError> {
        let entry = self
            .entry(code)
            .ok_or_else(|| PipelineError::UnknownEntry(code.into()))?
            .clone();
        Ok(Self {
            entries: vec![entry],
            ..self.clone()
        })
    }
}

/// Write `bytes` to `path` via a temporary file and rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|s| s.to_str()).unwrap_or("")
    ));
    let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    f.write_all(bytes).map_err(|e| io_err(&tmp, e))?;
    f.sync_all().map_err(|e| io_err(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CacheRecord {
    source: String,
    source_sha256: String,
    structure_sha256: String,
    structure: StructureModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CacheStatus {
    /// Cache entry matched the source; nothing rewritten.
    Hit,
    Created,
    /// Source changed or cache entry was corrupt.
    Rebuilt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestEntry {
    pub code: String,
    pub source: PathBuf,
    pub sha256: String,
    pub status: CacheStatus,
    pub atoms: usize,
    pub chains: Vec<char>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub entries: Vec<IngestEntry>,
    pub failures: Vec<(PathBuf, String)>,
}

fn code_of(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("unknown")
        .to_ascii_lowercase()
}

fn cache_path(cache_dir: &Path, code: &str) -> PathBuf {
    cache_dir.join(format!("{code}.json"))
}

/// Read a cached structure if it is intact and matches `source_sha`.
fn read_cache(path: &Path, source_sha: Option<&str>) -> Option<StructureModel> {
    let text = fs::read_to_string(path).ok()?;
    let record: CacheRecord = serde_json::from_str(&text).ok()?;
    let body = serde_json::to_vec(&record.structure).ok()?;
    if sha256_hex(&body) != record.structure_sha256 {
        warn!(path = %path.display(), "cache checksum mismatch");
        return None;
    }
    if source_sha.is_some_and(|s| s != record.source_sha256) {
        return None;
    }
    Some(record.structure)
}

/// Parse one PDB file through the cache.
pub fn ingest_file(
    path: &Path,
    cache_dir: &Path,
) -> Result<(StructureModel, IngestEntry), PipelineError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let sha = sha256_hex(&bytes);
    let code = code_of(path);
    let cpath = cache_path(cache_dir, &code);
    let existed = cpath.exists();
    let (structure, status) = match read_cache(&cpath, Some(&sha)) {
        Some(s) => (s, CacheStatus::Hit),
        None => {
            let text = String::from_utf8_lossy(&bytes);
            let mut s = parse_structure(&text).map_err(|source| PipelineError::Parse {
                path: path.to_path_buf(),
                source,
            })?;
            if s.entry_id == "unkn" || s.entry_id.is_empty() {
                s.entry_id = code.clone();
            }
            let body = serde_json::to_vec(&s).expect("structure serializes");
            let record = CacheRecord {
                source: path.display().to_string(),
                source_sha256: sha.clone(),
                structure_sha256: sha256_hex(&body),
                structure: s.clone(),
            };
            let text = serde_json::to_vec(&record).expect("cache record serializes");
            write_atomic(&cpath, &text)?;
            let status = if existed {
                CacheStatus::Rebuilt
            } else {
                CacheStatus::Created
            };
            (s, status)
        }
    };
    let entry = IngestEntry {
        code,
        source: path.to_path_buf(),
        sha256: sha,
        status,
        atoms: structure.atom_count(),
        chains: structure.chain_ids(),
    };
    Ok((structure, entry))
}

/// Expand directories into their `*.pdb` files, sorted.
pub fn collect_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>, PipelineError> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| io_err(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| {
                    f.extension().and_then(|x| x.to_str()).is_some_and(|x| {
                        x.eq_ignore_ascii_case("pdb") || x.eq_ignore_ascii_case("ent")
                    })
                })
                .collect();
            files.sort();
            out.extend(files);
        } else if p.exists() {
            out.push(p.clone());
        } else {
            return Err(io_err(p, "no such file or directory"));
        }
    }
    if out.is_empty() {
        return Err(PipelineError::NoInputs);
    }
    Ok(out)
}

/// Parse every input into the cache. Fails if any file fails.
pub fn ingest(paths: &[PathBuf], cache_dir: &Path) -> Result<IngestReport, PipelineError> {
    let files = collect_inputs(paths)?;
    let results: Vec<_> = files
        .par_iter()
        .map(|f| (f.clone(), ingest_file(f, cache_dir)))
        .collect();
    let mut report = IngestReport::default();
    for (path, r) in results {
        match r {
            Ok((_, entry)) => report.entries.push(entry),
            Err(e) => report.failures.push((path, e.to_string())),
        }
    }
    Ok(report)
}

/// Per-entry outcome of a build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryReport {
    pub code: String,
    pub receptor_atoms: usize,
    pub ligand_atoms: usize,
    pub bridges: usize,
    pub charges_kept: usize,
    pub receptor_area: f64,
    pub ligand_area: f64,
    pub receptor_vertices: usize,
    pub ligand_vertices: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub pack_id: String,
    pub entries: Vec<EntryReport>,
    pub skipped: Vec<(String, String)>,
    pub level_table_violations: Vec<String>,
}

/// Everything derived from one complex.
#[derive(Debug, Clone)]
pub struct EntryAssets {
    pub receptor: SlicePiece,
    pub ligand: SlicePiece,
    pub bridges: BridgeReport,
    pub report: EntryReport,
}

#[derive(Debug, Error)]
pub enum EntryError {
    #[error(transparent)]
    Pdb(#[from] PdbError),
    #[error(transparent)]
    Charges(#[from] ChargeError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Slice one parsed complex into its two pieces.
pub fn process_entry(
    structure: &StructureModel,
    stanza: &EntryStanza,
    config: &PipelineConfig,
) -> Result<EntryAssets, EntryError> {
    let mut structure = structure.clone();
    structure.entry_id = stanza.pdb_code.clone();
    let pair = select_pair(
        &structure,
        &stanza.receptor_chains.iter().copied().collect(),
        &stanza.ligand_chains.iter().copied().collect(),
    )?;
    let bridges = match find_salt_bridges(&pair, &config.charges) {
        Ok(b) => b,
        Err(ChargeError::NoBridges { .. }) => {
            warn!(entry = %stanza.pdb_code, "no salt bridges; pieces will carry no charges");
            Vec::new()
        }
        Err(e) => return Err(e.into()),
    };
    let plane = fit_interface_plane(&pair, &bridges, &config.contact)?;
    let (rec_half, lig_half) = split_halves(&pair, &plane, f64::INFINITY)?;
    let rec_outline = extract_footprint(&rec_half.atoms, &plane, &config.footprint)?;
    let lig_outline = extract_footprint(&lig_half.atoms, &plane, &config.footprint)?;
    let meta = PieceMeta {
        receptor_name: stanza.receptor_name.clone(),
        ligand_name: stanza.ligand_name.clone(),
        blurb: stanza.blurb.clone(),
    };
    let (receptor, ligand) = make_piece_pair(
        &pair,
        &plane,
        &bridges,
        rec_outline,
        lig_outline,
        &config.footprint,
        &meta,
    )?;
    let report = EntryReport {
        code: stanza.pdb_code.clone(),
        receptor_atoms: rec_half.atoms.len(),
        ligand_atoms: lig_half.atoms.len(),
        bridges: bridges.len(),
        charges_kept: receptor.charges.len(),
        receptor_area: receptor.area(),
        ligand_area: ligand.area(),
        receptor_vertices: receptor.outline.len(),
        ligand_vertices: ligand.outline.len(),
    };
    Ok(EntryAssets {
        receptor,
        ligand,
        bridges: BridgeReport::new(&pair, &config.charges, bridges),
        report,
    })
}

/// Load an entry's structure through the cache, ingesting it if needed.
pub fn load_structure(
    stanza: &EntryStanza,
    config: &PipelineConfig,
) -> Result<StructureModel, PipelineError> {
    let path = config.pdb_dir.join(stanza.file_name());
    ingest_file(&path, &config.cache_dir).map(|(s, _)| s)
}

pub const PACK_FILE: &str = "level_pack.json";

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("asset serializes");
    v.push(b'\n');
    v
}

/// Build pieces and the level pack into `config.output_dir`.
pub fn build(config: &PipelineConfig) -> Result<(LevelPack, BuildReport), PipelineError> {
    let results: Vec<(String, Result<EntryAssets, String>)> = config
        .entries
        .par_iter()
        .map(|stanza| {
            let result = load_structure(stanza, config)
                .map_err(|e| e.to_string())
                .and_then(|s| process_entry(&s, stanza, config).map_err(|e| e.to_string()));
            (stanza.pdb_code.clone(), result)
        })
        .collect();

    let out = &config.output_dir;
    let mut pieces = Vec::new();
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for (code, result) in results {
        match result {
            Ok(assets) => {
                for piece in [&assets.receptor, &assets.ligand] {
                    write_atomic(
                        &out.join("pieces").join(format!("{}.json", piece.piece_id)),
                        &to_json(piece),
                    )?;
                }
                write_atomic(
                    &out.join("reports").join(format!("{code}_bridges.txt")),
                    assets.bridges.to_text().as_bytes(),
                )?;
                info!(entry = %code, charges = assets.report.charges_kept, "built");
                pieces.push(assets.receptor);
                pieces.push(assets.ligand);
                entries.push(assets.report);
            }
            Err(message) => {
                warn!(entry = %code, %message, "skipped");
                skipped.push((code, message));
            }
        }
    }
    let pack = LevelPack::new(config.pack_id.clone(), level_table(), pieces);
    let report = BuildReport {
        pack_id: config.pack_id.clone(),
        entries,
        skipped,
        level_table_violations: pack.level_table_violations(),
    };
    write_atomic(&out.join(PACK_FILE), &to_json(&pack))?;
    write_atomic(&out.join("build_report.json"), &to_json(&report))?;
    Ok((pack, report))
}

pub fn load_pack(path: &Path) -> Result<LevelPack, PipelineError> {
    let path = if path.is_dir() {
        path.join(PACK_FILE)
    } else {
        path.to_path_buf()
    };
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Pack(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub subject: String,
    pub rule: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pieces_checked: usize,
    pub violations: Vec<Violation>,
    pub level_table: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.level_table.is_empty()
    }
}

/// Check every asset invariant of a pack.
pub fn validate_pack(pack: &LevelPack, engine_config: &EngineConfig) -> ValidationReport {
    let mut v = Vec::new();
    let mut push = |subject: &str, rule: &str, detail: String| {
        v.push(Violation {
            subject: subject.into(),
            rule: rule.into(),
            detail,
        })
    };
    if pack.pieces.is_empty() {
        push(&pack.pack_id, "non_empty", "pack has no pieces".into());
    }
    for p in &pack.pieces {
        let id = p.piece_id.as_str();
        if p.outline.len() < 3 {
            push(
                id,
                "outline_vertices",
                format!("{} vertices", p.outline.len()),
            );
            continue;
        }
        if !p.outline.iter().all(|q| q.x.is_finite() && q.y.is_finite()) {
            push(id, "finite", "non-finite outline vertex".into());
            continue;
        }
        if polygon::signed_area(&p.outline) <= 0.0 {
            push(
                id,
                "orientation",
                "outline is not counter-clockwise with positive area".into(),
            );
        }
        if !polygon::is_simple(&p.outline) {
            push(id, "simple_polygon", "outline self-intersects".into());
        }
        if !p.canonical_pose.is_finite() {
            push(id, "finite", "canonical pose is not finite".into());
        }
        let reach = p.provenance.footprint.probe + p.provenance.footprint.grid_step;
        for c in &p.charges {
            let d = polygon::distance_to_region(&p.outline, &c.position);
            if d > reach + 1e-9 {
                push(
                    id,
                    "charge_near_outline",
                    format!(
                        "bridge {} charge is {d:.3} A from the outline",
                        c.bridge_index
                    ),
                );
            }
        }
        let idx = p.bridge_indices();
        if idx.windows(2).any(|w| w[0] == w[1]) {
            push(id, "charge_pairing", "duplicate bridge_index".into());
        }
        if p.side == Side::Receptor && p.canonical_pose != geometry::Pose2D::IDENTITY {
            push(
                id,
                "receptor_pose",
                "receptor canonical pose is not the identity".into(),
            );
        }
    }
    for (code, e) in pack.entries() {
        let (Some(r), Some(l)) = (e.receptor, e.ligand) else {
            push(
                code,
                "pair_complete",
                "entry lacks a receptor or ligand piece".into(),
            );
            continue;
        };
        if r.bridge_indices() != l.bridge_indices() {
            push(
                code,
                "charge_pairing",
                format!(
                    "receptor bridges {:?} != ligand bridges {:?}",
                    r.bridge_indices(),
                    l.bridge_indices()
                ),
            );
            continue;
        }
        if r.outline.len() < 3 || l.outline.len() < 3 {
            continue;
        }
        let score = engine::score_pose(r, l, &l.canonical_pose, engine_config);
        if (score.percent - 100.0).abs() > 1e-9 {
            push(
                code,
                "canonical_score",
                format!("score at canonical pose is {}", score.percent),
            );
        }
        if !engine::check_snap(&score, engine_config) {
            push(
                code,
                "canonical_snap",
                "canonical pose does not snap".into(),
            );
        }
        let stripped = engine::score_pose(
            &r.without_charges(),
            &l.without_charges(),
            &l.canonical_pose,
            engine_config,
        );
        if (stripped.percent - 100.0).abs() > 1e-9 {
            push(
                code,
                "canonical_score_hidden",
                format!(
                    "charge-free score at canonical pose is {}",
                    stripped.percent
                ),
            );
        }
    }
    ValidationReport {
        pieces_checked: pack.pieces.len(),
        violations: v,
        level_table: pack.level_table_violations(),
    }
}

/// One step of a simulation script.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum ScriptStep {
    Join(Join),
    Input(InputEvent),
    TickAck(TickAck),
    /// Let the clock run for `seconds` in ticks of `step` seconds.
    Idle {
        seconds: f64,
        #[serde(default)]
        step: Option<f64>,
    },
    /// Rotate and drag the true partner into its docked pose.
    Solve,
}

pub fn parse_script(text: &str) -> Result<Vec<ScriptStep>, PipelineError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| PipelineError::Script {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Script used when none is given: dock level 1, skip its quiz, then idle
/// through level 2 until the game is lost.
pub fn demo_script(pack_id: &str) -> Vec<ScriptStep> {
    vec![
        ScriptStep::Join(Join {
            pack_id: pack_id.into(),
            seed: None,
            tier: None,
            start_level: None,
        }),
        ScriptStep::Input(InputEvent::Dismiss),
        ScriptStep::Solve,
        ScriptStep::Input(InputEvent::Dismiss),
        ScriptStep::Input(InputEvent::SkipQuiz),
        ScriptStep::Input(InputEvent::Dismiss),
        ScriptStep::Idle {
            seconds: 181.0,
            step: None,
        },
    ]
}

pub const DEFAULT_IDLE_STEP: f64 = 1.0;

/// Inbound and outbound NDJSON lines of one simulated connection.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Transcript {
    pub inbound: Vec<String>,
    pub outbound: Vec<String>,
}

impl Transcript {
    pub fn outbound_text(&self) -> String {
        let mut s = self.outbound.join("\n");
        s.push('\n');
        s
    }

    pub fn inbound_text(&self) -> String {
        let mut s = self.inbound.join("\n");
        s.push('\n');
        s
    }
}

fn solve_inputs(session: &ProtocolSession) -> Vec<InputEvent> {
    let Some(game) = session.game() else {
        return Vec::new();
    };
    if game.state().phase != Phase::Playing {
        return Vec::new();
    }
    let Some((idx, target)) = game.solution() else {
        return Vec::new();
    };
    let step = game.config().rotation_step_deg.to_radians();
    let piece = game.candidate_piece(idx).expect("solution index valid");
    let pose = game.state().candidates[idx].dynamics.pose;
    let missing = (target.theta - pose.theta).rem_euclid(std::f64::consts::TAU);
    let taps = ((missing / step).round() as usize)
        % ((std::f64::consts::TAU / step).round() as usize).max(1);
    // Predict the pose after the taps to size the drag.
    let pivot = piece.centroid();
    let mut p = pose;
    for _ in 0..taps {
        let anchor = p.apply(&pivot);
        let turned = geometry::Pose2D::new(0.0, 0.0, p.theta + step);
        let moved = turned.apply(&pivot);
        p = geometry::Pose2D::new(anchor.x - moved.x, anchor.y - moved.y, turned.theta);
    }
    let mut inputs = vec![InputEvent::DoubleTap { candidate: idx }; taps];
    inputs.push(InputEvent::Drag {
        candidate: idx,
        dx: target.tx - p.tx,
        dy: target.ty - p.ty,
    });
    inputs
}

/// Run a script against a fresh connection.
pub fn simulate(
    pack: Arc<LevelPack>,
    bank: Arc<QuizBank>,
    game: GameConfig,
    seed: u64,
    script: &[ScriptStep],
) -> Transcript {
    let mut session = ProtocolSession::with_pack(pack, bank, game, seed);
    let mut transcript = Transcript::default();
    let mut seq = 0u64;
    let mut send = |body: ProtocolMessage, session: &mut ProtocolSession, t: &mut Transcript| {
        seq += 1;
        let msg = Message::new(seq, body);
        t.inbound.push(encode(&msg));
        t.outbound.extend(session.handle(msg).iter().map(encode));
    };
    for step in script {
        match step {
            ScriptStep::Join(j) => send(
                ProtocolMessage::Join(j.clone()),
                &mut session,
                &mut transcript,
            ),
            ScriptStep::Input(i) => send(
                ProtocolMessage::Input(i.clone()),
                &mut session,
                &mut transcript,
            ),
            ScriptStep::TickAck(t) => send(
                ProtocolMessage::TickAck(t.clone()),
                &mut session,
                &mut transcript,
            ),
            ScriptStep::Idle { seconds, step } => {
                let h = step.unwrap_or(DEFAULT_IDLE_STEP);
                let n = (seconds / h).round() as usize;
                for _ in 0..n {
                    send(
                        ProtocolMessage::TickAck(TickAck { dt: h }),
                        &mut session,
                        &mut transcript,
                    );
                }
            }
            ScriptStep::Solve => {
                for input in solve_inputs(&session) {
                    send(ProtocolMessage::Input(input), &mut session, &mut transcript);
                }
            }
        }
    }
    transcript
}

/// Summary counts per outbound kind, for logs.
pub fn kind_counts(outbound: &[String]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for line in outbound {
        if let Ok(v) = serde_json::from_str::<serde_json::Value>(line) {
            if let Some(k) = v.get("kind").and_then(|k| k.as_str()) {
                *counts.entry(k.to_string()).or_insert(0) += 1;
            }
        }
    }
    counts
}
