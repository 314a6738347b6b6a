use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::Vec2;

/// Wrap an angle into (-pi, pi].
pub fn normalize_angle(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    } else if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Rigid 2D placement: rotate by `theta` about the origin, then translate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2D {
    pub tx: f64,
    pub ty: f64,
    pub theta: f64,
}

impl Pose2D {
    pub const IDENTITY: Pose2D = Pose2D {
        tx: 0.0,
        ty: 0.0,
        theta: 0.0,
    };

    pub fn new(tx: f64, ty: f64, theta: f64) -> Self {
        Self {
            tx,
            ty,
            theta: normalize_angle(theta),
        }
    }

    pub fn translation(&self) -> Vec2 {
        Vec2::new(self.tx, self.ty)
    }

    pub fn is_finite(&self) -> bool {
        self.tx.is_finite() && self.ty.is_finite() && self.theta.is_finite()
    }

    pub fn apply(&self, p: &Vec2) -> Vec2 {
        let (s, c) = self.theta.sin_cos();
        Vec2::new(c * p.x - s * p.y + self.tx, s * p.x + c * p.y + self.ty)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Pose2D) -> Pose2D {
        let t = self.apply(&other.translation());
        Pose2D::new(t.x, t.y, self.theta + other.theta)
    }

    pub fn inverse(&self) -> Pose2D {
        let (s, c) = self.theta.sin_cos();
        Pose2D::new(
            -(c * self.tx + s * self.ty),
            s * self.tx - c * self.ty,
            -self.theta,
        )
    }

    /// Smallest signed rotation taking `other.theta` to `self.theta`.
    pub fn angle_to(&self, other: &Pose2D) -> f64 {
        normalize_angle(self.theta - other.theta)
    }
}
