//! Interface plane, footprint polygons, and rigid 2D poses.

pub mod footprint;
pub mod piece;
pub mod plane;
pub mod polygon;
pub mod pose;

use thiserror::Error;

use crate::pdb::Side;

pub use footprint::{extract_footprint, FootprintParams};
pub use piece::{make_piece_pair, ChargePoint, PieceMeta, SlicePiece};
pub use plane::{fit_interface_plane, split_halves, ContactParams, Half, InterfacePlane};
pub use pose::{normalize_angle, Pose2D};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("no inter-partner heavy-atom contact")]
    NoContact,
    #[error("{0:?} half is empty after the split")]
    DegenerateSplit(Side),
    #[error("no usable footprint: {0}")]
    EmptyFootprint(String),
    #[error("invalid geometry parameter: {0}")]
    InvalidParams(String),
}
