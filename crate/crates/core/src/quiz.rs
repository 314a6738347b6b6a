//! Tiered multiple-choice quiz bank.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const QUIZ_SCHEMA_VERSION: u32 = 1;

/// Placeholder bank shipped with the crate.
pub const SAMPLE_BANK: &str = include_str!("../data/quiz_bank.json");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuizError {
    #[error("schema violation at {0}")]
    SchemaViolation(String),
    #[error("duplicate question id {0:?}")]
    DuplicateId(String),
    #[error("no questions for tier {0:?}")]
    EmptyBank(Tier),
    #[error("cannot read quiz bank: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tier {
    #[serde(rename = "GCSE")]
    Gcse,
    #[serde(rename = "A_Level")]
    ALevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuizQuestion {
    pub id: String,
    pub tier: Tier,
    pub prompt: String,
    pub choices: Vec<String>,
    pub correct_index: usize,
    pub explanation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuizBank {
    pub version: u32,
    pub questions: Vec<QuizQuestion>,
}

impl QuizBank {
    pub fn sample() -> QuizBank {
        load_bank(SAMPLE_BANK).expect("bundled quiz bank is valid")
    }

    pub fn tier_count(&self, tier: Tier) -> usize {
        self.questions.iter().filter(|q| q.tier == tier).count()
    }

    pub fn get(&self, id: &str) -> Option<&QuizQuestion> {
        self.questions.iter().find(|q| q.id == id)
    }
}

/// Parse and validate a bank from JSON text.
pub fn load_bank(text: &str) -> Result<QuizBank, QuizError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let bank: QuizBank = serde_path_to_error::deserialize(de)
        .map_err(|e| QuizError::SchemaViolation(e.path().to_string()))?;
    if bank.version != QUIZ_SCHEMA_VERSION {
        return Err(QuizError::SchemaViolation("version".into()));
    }
    let mut ids = BTreeSet::new();
    for (i, q) in bank.questions.iter().enumerate() {
        let at = |field: &str| QuizError::SchemaViolation(format!("questions[{i}].{field}"));
        if q.id.trim().is_empty() {
            return Err(at("id"));
        }
        if q.choices.len() != 3 {
            return Err(at("choices"));
        }
        if q.correct_index >= q.choices.len() {
            return Err(at("correct_index"));
        }
        if q.explanation.trim().is_empty() {
            return Err(at("explanation"));
        }
        if !ids.insert(q.id.as_str()) {
            return Err(QuizError::DuplicateId(q.id.clone()));
        }
    }
    Ok(bank)
}

pub fn load_bank_file(path: &Path) -> Result<QuizBank, QuizError> {
    let text = std::fs::read_to_string(path).map_err(|e| QuizError::Io(e.to_string()))?;
    load_bank(&text)
}

/// Per-session draw state: questions are not repeated until a tier is exhausted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuizDeck {
    used: BTreeMap<Tier, BTreeSet<usize>>,
}

impl QuizDeck {
    pub fn draw<'b, R: Rng + ?Sized>(
        &mut self,
        bank: &'b QuizBank,
        tier: Tier,
        rng: &mut R,
    ) -> Result<&'b QuizQuestion, QuizError> {
        let pool: Vec<usize> = (0..bank.questions.len())
            .filter(|&i| bank.questions[i].tier == tier)
            .collect();
        if pool.is_empty() {
            return Err(QuizError::EmptyBank(tier));
        }
        let used = self.used.entry(tier).or_default();
        if pool.iter().all(|i| used.contains(i)) {
            used.clear();
        }
        let fresh: Vec<usize> = pool.into_iter().filter(|i| !used.contains(i)).collect();
        let pick = fresh[rng.random_range(0..fresh.len())];
        used.insert(pick);
        Ok(&bank.questions[pick])
    }
}

/// Stateless single draw.
pub fn draw_question<'b, R: Rng + ?Sized>(
    bank: &'b QuizBank,
    tier: Tier,
    rng: &mut R,
) -> Result<&'b QuizQuestion, QuizError> {
    QuizDeck::default().draw(bank, tier, rng)
}
