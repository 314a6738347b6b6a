//! Score range, canonical-pose and departure checks over every built entry.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dockpuzzle_core::engine::{score_charges, score_pose, EngineConfig};
use dockpuzzle_core::{Pose2D, SlicePiece};

pub fn perturbed(target: &Pose2D, rng: &mut ChaCha8Rng) -> Pose2D {
    // Mix of near, mid and far perturbations.
    let scale = [0.5, 5.0, 60.0][rng.random_range(0..3)];
    Pose2D::new(
        target.tx + rng.random_range(-scale..scale),
        target.ty + rng.random_range(-scale..scale),
        target.theta + rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
    )
}

pub fn entries() -> Vec<(&'static str, SlicePiece, SlicePiece)> {
    super::built()
        .iter()
        .map(|(code, b)| {
            let code: &'static str = super::CODES.iter().find(|c| **c == code).unwrap();
            (code, b.assets.receptor.clone(), b.assets.ligand.clone())
        })
        .collect()
}

/// `n` random poses per entry, with and without charges.
pub fn perturbations_stay_in_range(n: usize) {
    let cfg = EngineConfig::default();
    for (code, r, l) in entries() {
        let mut rng = ChaCha8Rng::seed_from_u64(code.bytes().map(u64::from).sum());
        for (rec, lig) in [
            (r.clone(), l.clone()),
            (r.without_charges(), l.without_charges()),
        ] {
            for _ in 0..n {
                let pose = perturbed(&lig.canonical_pose, &mut rng);
                let (percent, per_charge) = score_charges(&rec, &lig, &pose, &cfg);
                assert!((0.0..=100.0).contains(&percent), "{code}: {percent}");
                assert!(per_charge
                    .iter()
                    .all(|c| (0.0..=1.0).contains(&c.contribution)));
            }
        }
    }
}

pub fn canonical_pose_scores_100() {
    let cfg = EngineConfig::default();
    for (code, r, l) in entries() {
        let s = score_pose(&r, &l, &l.canonical_pose, &cfg);
        assert!((s.percent - 100.0).abs() <= 1e-9, "{code}: {}", s.percent);
        assert!(s.overlap_area > 0.0, "{code}");
        let hidden = score_pose(
            &r.without_charges(),
            &l.without_charges(),
            &l.canonical_pose,
            &cfg,
        );
        assert!(
            (hidden.percent - 100.0).abs() <= 1e-9,
            "{code}: {}",
            hidden.percent
        );
    }
}

/// Walk away from the canonical pose along `trials` random lines per entry.
pub fn departure_is_monotone(trials: usize) {
    let cfg = EngineConfig::default();
    for (code, r, l) in entries() {
        let mut rng = ChaCha8Rng::seed_from_u64(7 + code.len() as u64);
        let c = l.canonical_pose;
        for trial in 0..trials {
            // Direction in pose space; rotation in radians per unit step.
            let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let spin = if trial % 4 == 0 {
                0.0
            } else {
                rng.random_range(-0.05..0.05)
            };
            let (dx, dy) = (angle.cos(), angle.sin());
            let mut last = 100.0 + 1e-9;
            let mut t = 0.0;
            loop {
                let pose = Pose2D::new(c.tx + t * dx, c.ty + t * dy, c.theta + t * spin);
                let (percent, per_charge) = score_charges(&r, &l, &pose, &cfg);
                assert!(
                    percent <= last + 1e-9,
                    "{code} trial {trial} t={t}: {percent} > {last}"
                );
                last = percent;
                let done = if per_charge.is_empty() {
                    percent == 0.0
                } else {
                    per_charge.iter().all(|q| q.distance >= cfg.d_tol)
                };
                if done {
                    assert_eq!(percent, 0.0, "{code}");
                    break;
                }
                t += 0.05;
                assert!(t < 200.0, "{code}: departure never left tolerance");
            }
        }
    }
}

pub fn decoys_score_zero() {
    let cfg = EngineConfig::default();
    let all = entries();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (i, (_, r, _)) in all.iter().enumerate() {
        let (_, _, decoy) = &all[(i + 1) % all.len()];
        for _ in 0..200 {
            let pose = perturbed(&decoy.canonical_pose, &mut rng);
            assert_eq!(score_charges(r, decoy, &pose, &cfg).0, 0.0);
        }
        assert_eq!(score_charges(r, decoy, &decoy.canonical_pose, &cfg).0, 0.0);
    }
}
