//! Asset pipeline and headless engine for a 2D protein-docking puzzle.
//!
//! The pipeline turns crystallographic complexes into pairs of flat puzzle
//! pieces: it parses the PDB file ([`pdb`]), finds inter-chain salt bridges
//! ([`charges`]), fits the interface plane and traces each partner's
//! silhouette on it ([`geometry`]). The engine scores candidate placements
//! against the crystal pose ([`engine`]) and runs the level/round/quiz loop
//! ([`game`], [`quiz`]) behind a newline-delimited JSON protocol
//! ([`protocol`]). [`pipeline`] chains everything for the command-line tool.

pub mod charges;
pub mod engine;
pub mod game;
pub mod geometry;
pub mod pdb;
pub mod pipeline;
pub mod protocol;
pub mod quiz;

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;

pub use charges::{ChargeConfig, ChargeSign, ChargeSite, SaltBridge};
pub use engine::{DockScore, DynamicsState, EngineConfig};
pub use game::{GameEvent, GameState, InputEvent, LevelPack, LevelSpec, Phase, Session};
pub use geometry::{FootprintParams, InterfacePlane, Pose2D, SlicePiece};
pub use pdb::{AtomRecord, ComplexPair, Side, StructureModel};
pub use protocol::ProtocolMessage;
pub use quiz::{QuizBank, QuizQuestion, Tier};
