//! Dock scoring, snap detection, repulsion, and piece dynamics.
//!
//! Every pose here is the candidate's placement in the receptor's frame; the
//! receptor itself sits at the identity.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Pose2D, SlicePiece};
use crate::pdb::Side;
use crate::Vec2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("timestep {0} outside (0, 0.1] s")]
    InvalidTimestep(f64),
}

/// Tunable engine constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    /// Charge displacement (Å) at which a contribution reaches zero.
    pub d_tol: f64,
    pub snap_threshold: f64,
    pub weak_threshold: f64,
    /// Repulsion gain, Å/(s·Ų).
    pub k_rep: f64,
    /// Overlap area (Ų) beyond which repulsion stops growing.
    pub a_cap: f64,
    /// Gravity, Å/s².
    pub g0: f64,
    /// Linear and angular damping rate, 1/s.
    pub damping: f64,
    pub shake_amplitude: f64,
    pub shake_omega: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            d_tol: 5.0,
            snap_threshold: 95.0,
            weak_threshold: 40.0,
            k_rep: 2.0,
            a_cap: 100.0,
            g0: 50.0,
            damping: 1.5,
            shake_amplitude: 2.0,
            shake_omega: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargeContribution {
    pub bridge_index: usize,
    pub distance: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DockScore {
    pub percent: f64,
    pub per_charge: Vec<ChargeContribution>,
    pub overlap_area: f64,
}

/// Identity check: same source entry, opposite sides, same bridge set.
pub fn is_true_partner(receptor: &SlicePiece, candidate: &SlicePiece) -> bool {
    receptor.source_entry == candidate.source_entry
        && receptor.side == Side::Receptor
        && candidate.side == Side::Ligand
        && receptor.bridge_indices() == candidate.bridge_indices()
}

/// Area shared by the receptor and the candidate placed at `pose`.
pub fn overlap_area(receptor: &SlicePiece, candidate: &SlicePiece, pose: &Pose2D) -> f64 {
    let placed = candidate.triangles().transformed(|p| pose.apply(p));
    receptor.triangles().intersection_area(&placed)
}

/// Linear falloff of one displacement.
pub fn contribution(distance: f64, d_tol: f64) -> f64 {
    (1.0 - distance / d_tol).max(0.0)
}

/// Score from geometry alone, without the overlap term.
pub fn score_charges(
    receptor: &SlicePiece,
    candidate: &SlicePiece,
    pose: &Pose2D,
    config: &EngineConfig,
) -> (f64, Vec<ChargeContribution>) {
    if !is_true_partner(receptor, candidate) {
        return (0.0, Vec::new());
    }
    let target = candidate.canonical_pose;
    if candidate.charges.is_empty() {
        // Charge-free pieces: centroid error plus arc length of the angular error.
        let c = candidate.centroid();
        let shift = (pose.apply(&c) - target.apply(&c)).norm();
        let turn = pose.angle_to(&target).abs() * candidate.circumradius();
        let percent = 100.0 * contribution(shift + turn, config.d_tol);
        return (percent.clamp(0.0, 100.0), Vec::new());
    }
    let per_charge: Vec<ChargeContribution> = candidate
        .charges
        .iter()
        .map(|q| {
            let distance = (pose.apply(&q.position) - target.apply(&q.position)).norm();
            ChargeContribution {
                bridge_index: q.bridge_index,
                distance,
                contribution: contribution(distance, config.d_tol),
            }
        })
        .collect();
    let mean = per_charge.iter().map(|c| c.contribution).sum::<f64>() / per_charge.len() as f64;
    ((100.0 * mean).clamp(0.0, 100.0), per_charge)
}

pub fn score_pose(
    receptor: &SlicePiece,
    candidate: &SlicePiece,
    pose: &Pose2D,
    config: &EngineConfig,
) -> DockScore {
    let (percent, per_charge) = score_charges(receptor, candidate, pose, config);
    DockScore {
        percent,
        per_charge,
        overlap_area: overlap_area(receptor, candidate, pose),
    }
}

/// Score with both pieces placed independently; only the relative pose matters.
pub fn score_placed(
    receptor: &SlicePiece,
    receptor_pose: &Pose2D,
    candidate: &SlicePiece,
    candidate_pose: &Pose2D,
    config: &EngineConfig,
) -> DockScore {
    let relative = receptor_pose.inverse().compose(candidate_pose);
    score_pose(receptor, candidate, &relative, config)
}

/// A dock snaps when the score reaches the threshold and the pieces touch.
pub fn check_snap(score: &DockScore, config: &EngineConfig) -> bool {
    score.percent >= config.snap_threshold && score.overlap_area > 0.0
}

/// Velocity kick pushing an overlapping wrong or weak match away from the receptor.
pub fn repulsion_impulse(
    receptor: &SlicePiece,
    candidate: &SlicePiece,
    pose: &Pose2D,
    true_partner: bool,
    score: &DockScore,
    config: &EngineConfig,
) -> Vec2 {
    if score.overlap_area <= 0.0 || (true_partner && score.percent >= config.weak_threshold) {
        return Vec2::zeros();
    }
    let axis = pose.apply(&candidate.centroid()) - receptor.centroid();
    let dir = if axis.norm() > 1e-9 {
        axis.normalize()
    } else {
        Vec2::new(0.0, 1.0)
    };
    dir * (config.k_rep * score.overlap_area.min(config.a_cap))
}

/// Rectangle bounding piece translations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlayArea {
    pub min: Vec2,
    pub max: Vec2,
}

impl PlayArea {
    /// Receptor bounding box grown by `margin` on every side.
    pub fn around(piece: &SlicePiece, margin: f64) -> PlayArea {
        let [x0, y0, x1, y1] = piece.triangles().bounds();
        PlayArea {
            min: Vec2::new(x0 - margin, y0 - margin),
            max: Vec2::new(x1 + margin, y1 + margin),
        }
    }

    pub fn contains(&self, p: &Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn clamp(&self, p: &Vec2) -> Vec2 {
        Vec2::new(
            p.x.clamp(self.min.x, self.max.x),
            p.y.clamp(self.min.y, self.max.y),
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotionFlags {
    pub shaking: bool,
    pub gravity: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsState {
    pub pose: Pose2D,
    pub velocity: Vec2,
    pub angular_velocity: f64,
    pub flags: MotionFlags,
    /// Seconds integrated so far.
    pub time: f64,
    pub shake_phase: f64,
    /// Shake displacement currently included in `pose`.
    pub shake_offset: f64,
}

impl DynamicsState {
    pub fn at_rest(pose: Pose2D, flags: MotionFlags) -> Self {
        Self {
            pose,
            velocity: Vec2::zeros(),
            angular_velocity: 0.0,
            flags,
            time: 0.0,
            shake_phase: 0.0,
            shake_offset: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.pose.is_finite()
            && self.velocity.iter().all(|v| v.is_finite())
            && self.angular_velocity.is_finite()
    }
}

/// One step: damp, apply gravity, integrate, add the shake delta, clamp.
pub fn step_dynamics(
    state: &DynamicsState,
    dt: f64,
    config: &EngineConfig,
    area: &PlayArea,
) -> Result<DynamicsState, EngineError> {
    if !(dt > 0.0 && dt <= 0.1) {
        return Err(EngineError::InvalidTimestep(dt));
    }
    let mut next = *state;
    let keep = (1.0 - config.damping * dt).max(0.0);
    next.velocity *= keep;
    next.angular_velocity *= keep;
    if state.flags.gravity {
        next.velocity.y -= config.g0 * dt;
    }
    let mut pos = state.pose.translation() + next.velocity * dt;
    let theta = state.pose.theta + next.angular_velocity * dt;
    next.time = state.time + dt;
    if state.flags.shaking {
        let offset =
            config.shake_amplitude * (config.shake_omega * next.time + state.shake_phase).sin();
        pos.x += offset - state.shake_offset;
        next.shake_offset = offset;
    }
    let clamped = area.clamp(&pos);
    if clamped.x != pos.x {
        next.velocity.x = 0.0;
    }
    if clamped.y != pos.y {
        next.velocity.y = 0.0;
    }
    next.pose = Pose2D::new(clamped.x, clamped.y, theta);
    Ok(next)
}
