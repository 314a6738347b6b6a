mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{cloud, random_unit, residual, weighted_centroid};

use dockpuzzle_core::charges::find_salt_bridges;
use dockpuzzle_core::geometry::fit_interface_plane;
use dockpuzzle_core::geometry::plane::{contact_midpoints, fit_weighted_plane, plane_from_points};
use dockpuzzle_core::Vec3;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn fitted_plane_beats_random_planes_through_centroid(
        seed in any::<u64>(),
        n in 8usize..300,
        spread in 2.0f64..20.0,
        thickness in 0.0f64..6.0,
    ) {
        let points = cloud(seed, n, spread, thickness);
        let fit = fit_weighted_plane(&points).unwrap();
        let c = weighted_centroid(&points);
        let best = residual(&points, &fit.centroid, &fit.axes[0]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
        let scale = points.iter().map(|(_, w)| w).sum::<f64>() * spread * spread;
        for _ in 0..1000 {
            let candidate = residual(&points, &c, &random_unit(&mut rng));
            prop_assert!(best <= candidate + 1e-12 * scale, "{best} > {candidate}");
        }
        // The minimum residual is the smallest eigenvalue of the scatter matrix.
        prop_assert!((best - fit.eigenvalues[0]).abs() <= 1e-9 * scale.max(1.0));
    }

    #[test]
    fn interface_frame_is_orthonormal_and_oriented(seed in any::<u64>(), n in 8usize..200) {
        let points = cloud(seed, n, 10.0, 1.0);
        let toward = Vec3::new(0.3, -0.2, 0.9);
        let plane = plane_from_points(&points, &toward).unwrap();
        let (nrm, u, v) = (plane.normal, plane.in_plane_u, plane.in_plane_v);
        for (a, b) in [(nrm, u), (nrm, v), (u, v)] {
            prop_assert!(a.dot(&b).abs() < 1e-9);
        }
        for a in [nrm, u, v] {
            prop_assert!((a.norm() - 1.0).abs() < 1e-9);
        }
        prop_assert!(nrm.dot(&toward) >= 0.0);
        prop_assert!((nrm.cross(&u) - v).norm() < 1e-9);
    }
}

#[test]
fn exact_plane_is_recovered() {
    let n = Vec3::new(1.0, 2.0, -2.0) / 3.0;
    let u = n.cross(&Vec3::x()).normalize();
    let v = n.cross(&u);
    let points: Vec<(Vec3, f64)> = (0..50)
        .map(|i| {
            let (a, b) = ((i % 7) as f64 - 3.0, (i / 7) as f64 - 3.5);
            (Vec3::new(5.0, -1.0, 2.0) + u * a * 1.3 + v * b * 0.7, 1.0)
        })
        .collect();
    let fit = fit_weighted_plane(&points).unwrap();
    assert!(fit.axes[0].dot(&n).abs() > 1.0 - 1e-12);
    assert!(residual(&points, &fit.centroid, &fit.axes[0]) < 1e-18);
}

#[test]
fn fixture_interface_planes_beat_random_planes() {
    let cfg = common::config();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for code in ["2ptc", "1emv", "1buh"] {
        let pair = common::pair(code);
        let bridges = find_salt_bridges(&pair, &cfg.charges).unwrap_or_default();
        let plane = fit_interface_plane(&pair, &bridges, &cfg.contact).unwrap();
        let mut points: Vec<(Vec3, f64)> = contact_midpoints(&pair, cfg.contact.contact_cutoff)
            .into_iter()
            .map(|p| (p, 1.0))
            .collect();
        points.extend(
            bridges
                .iter()
                .map(|b| (b.midpoint(), cfg.contact.bridge_weight)),
        );
        let best = residual(&points, &plane.origin, &plane.normal);
        for _ in 0..1000 {
            assert!(best <= residual(&points, &plane.origin, &random_unit(&mut rng)) + 1e-6);
        }
    }
}
