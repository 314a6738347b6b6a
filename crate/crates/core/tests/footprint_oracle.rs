mod common;

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dockpuzzle_core::charges::find_salt_bridges;
use dockpuzzle_core::geometry::footprint::{extract_footprint, FootprintParams};
use dockpuzzle_core::geometry::{fit_interface_plane, polygon, split_halves, InterfacePlane};
use dockpuzzle_core::pdb::{select_pair, StructureModel};
use dockpuzzle_core::pipeline::process_entry;
use dockpuzzle_core::{AtomRecord, Vec3};

fn bondi(element: &str) -> f64 {
    match element {
        "N" => 1.55,
        "O" => 1.52,
        "S" | "P" => 1.80,
        "H" => 1.20,
        _ => 1.70,
    }
}

/// Area of the largest 4-connected covered region with its holes filled,
/// rasterised at `px` Å per pixel from pixel-center coverage tests.
fn raster_area(atoms: &[AtomRecord], plane: &InterfacePlane, p: &FootprintParams, px: f64) -> f64 {
    let disks: Vec<(f64, f64, f64)> = atoms
        .iter()
        .filter(|a| (a.position - plane.origin).dot(&plane.normal).abs() <= p.slab)
        .map(|a| {
            let d = a.position - plane.origin;
            (
                d.dot(&plane.in_plane_u),
                d.dot(&plane.in_plane_v),
                bondi(&a.element) + p.probe,
            )
        })
        .collect();
    let pad = 4.0;
    let xmin = disks
        .iter()
        .map(|d| d.0 - d.2)
        .fold(f64::INFINITY, f64::min)
        - pad;
    let ymin = disks
        .iter()
        .map(|d| d.1 - d.2)
        .fold(f64::INFINITY, f64::min)
        - pad;
    let xmax = disks
        .iter()
        .map(|d| d.0 + d.2)
        .fold(f64::NEG_INFINITY, f64::max)
        + pad;
    let ymax = disks
        .iter()
        .map(|d| d.1 + d.2)
        .fold(f64::NEG_INFINITY, f64::max)
        + pad;
    let nx = ((xmax - xmin) / px).ceil() as usize;
    let ny = ((ymax - ymin) / px).ceil() as usize;
    let mut covered = vec![false; nx * ny];
    for &(cx, cy, r) in &disks {
        let i0 = ((cx - r - xmin) / px).floor().max(0.0) as usize;
        let i1 = (((cx + r - xmin) / px).ceil() as usize).min(nx - 1);
        let j0 = ((cy - r - ymin) / px).floor().max(0.0) as usize;
        let j1 = (((cy + r - ymin) / px).ceil() as usize).min(ny - 1);
        for j in j0..=j1 {
            let y = ymin + (j as f64 + 0.5) * px;
            for i in i0..=i1 {
                let x = xmin + (i as f64 + 0.5) * px;
                if (x - cx).powi(2) + (y - cy).powi(2) <= r * r {
                    covered[j * nx + i] = true;
                }
            }
        }
    }
    let neighbours = |k: usize| {
        let (i, j) = (k % nx, k / nx);
        let mut v = Vec::with_capacity(4);
        if i > 0 {
            v.push(k - 1);
        }
        if i + 1 < nx {
            v.push(k + 1);
        }
        if j > 0 {
            v.push(k - nx);
        }
        if j + 1 < ny {
            v.push(k + nx);
        }
        v
    };
    // Label covered components.
    let mut label = vec![usize::MAX; nx * ny];
    let mut sizes = Vec::new();
    for start in 0..nx * ny {
        if !covered[start] || label[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut size = 0;
        let mut queue = VecDeque::from([start]);
        label[start] = id;
        while let Some(k) = queue.pop_front() {
            size += 1;
            for n in neighbours(k) {
                if covered[n] && label[n] == usize::MAX {
                    label[n] = id;
                    queue.push_back(n);
                }
            }
        }
        sizes.push(size);
    }
    let biggest = (0..sizes.len()).max_by_key(|&i| sizes[i]).unwrap();
    // Flood the outside from the border through pixels not in the component.
    let mut outside = vec![false; nx * ny];
    let mut queue: VecDeque<usize> = (0..nx * ny)
        .filter(|&k| {
            let (i, j) = (k % nx, k / nx);
            (i == 0 || j == 0 || i == nx - 1 || j == ny - 1) && label[k] != biggest
        })
        .collect();
    for &k in &queue {
        outside[k] = true;
    }
    while let Some(k) = queue.pop_front() {
        for n in neighbours(k) {
            if !outside[n] && label[n] != biggest {
                outside[n] = true;
                queue.push_back(n);
            }
        }
    }
    let inside = outside.iter().filter(|o| !**o).count();
    inside as f64 * px * px
}

fn halves(code: &str) -> (Vec<AtomRecord>, Vec<AtomRecord>, InterfacePlane) {
    let cfg = common::config();
    let pair = common::pair(code);
    let bridges = find_salt_bridges(&pair, &cfg.charges).unwrap_or_default();
    let plane = fit_interface_plane(&pair, &bridges, &cfg.contact).unwrap();
    let (r, l) = split_halves(&pair, &plane, f64::INFINITY).unwrap();
    (r.atoms, l.atoms, plane)
}

#[test]
fn footprint_area_matches_pixel_oracle_within_3_percent() {
    let params = common::config().footprint;
    for code in common::CODES {
        let (rec, lig, plane) = halves(code);
        for (name, atoms) in [("receptor", &rec), ("ligand", &lig)] {
            let outline = extract_footprint(atoms, &plane, &params).unwrap();
            let got = polygon::area(&outline);
            let want = raster_area(atoms, &plane, &params, 0.1);
            let rel = (got - want).abs() / want;
            assert!(
                rel <= 0.03,
                "{code} {name}: polygon {got:.1} vs raster {want:.1} ({rel:.4})"
            );
            assert!(polygon::is_simple(&outline), "{code} {name}");
        }
    }
}

fn rigid(seed: u64) -> (nalgebra::Rotation3<f64>, Vec3) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axis = nalgebra::Unit::new_normalize(Vec3::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    ));
    let rot =
        nalgebra::Rotation3::from_axis_angle(&axis, rng.random_range(0.0..std::f64::consts::TAU));
    let shift = Vec3::new(
        rng.random_range(-80.0..80.0),
        rng.random_range(-80.0..80.0),
        rng.random_range(-80.0..80.0),
    );
    (rot, shift)
}

fn transformed(s: &StructureModel, rot: &nalgebra::Rotation3<f64>, shift: &Vec3) -> StructureModel {
    let mut s = s.clone();
    for c in &mut s.chains {
        for r in &mut c.residues {
            for a in &mut r.atoms {
                a.position = rot * a.position + shift;
            }
        }
    }
    s
}

#[test]
fn pieces_are_invariant_under_rigid_motion_of_the_complex() {
    let cfg = common::config();
    for (k, code) in ["2ptc", "1emv", "1atn", "1acb"].into_iter().enumerate() {
        let stanza = cfg.entry(code).unwrap();
        let base = common::structure(code);
        let a = process_entry(&base, stanza, &cfg).unwrap();
        let (rot, shift) = rigid(k as u64 + 1);
        let b = process_entry(&transformed(&base, &rot, &shift), stanza, &cfg).unwrap();
        assert_eq!(a.report.bridges, b.report.bridges, "{code}");
        assert_eq!(
            a.receptor.bridge_indices(),
            b.receptor.bridge_indices(),
            "{code}"
        );
        for (x, y) in [(&a.receptor, &b.receptor), (&a.ligand, &b.ligand)] {
            let rel = (x.area() - y.area()).abs() / x.area();
            assert!(
                rel < 0.02,
                "{code} {}: {} vs {}",
                x.piece_id,
                x.area(),
                y.area()
            );
            // Charge layout in the piece frame is intrinsic.
            for (p, q) in x.charges.iter().zip(&y.charges) {
                assert!((p.position - q.position).norm() < 1e-6, "{code}");
            }
        }
        let pair = select_pair(
            &base,
            &stanza.receptor_chains.iter().copied().collect(),
            &stanza.ligand_chains.iter().copied().collect(),
        )
        .unwrap();
        let moved = transformed(&pair.structure, &rot, &shift);
        assert_eq!(moved.atom_count(), pair.structure.atom_count());
    }
}

#[test]
fn larger_probe_never_shrinks_the_footprint() {
    let base = common::config().footprint;
    for code in ["2ptc", "1buh", "4kc3", "1fss"] {
        let (rec, lig, plane) = halves(code);
        for atoms in [&rec, &lig] {
            let mut last = 0.0;
            for probe in [0.0, 0.7, 1.4, 2.1, 2.8] {
                let p = FootprintParams { probe, ..base };
                let area = polygon::area(&extract_footprint(atoms, &plane, &p).unwrap());
                assert!(area >= last, "{code} probe {probe}: {area} < {last}");
                last = area;
            }
        }
    }
}

#[test]
fn finer_grid_converges_to_the_raster_area() {
    let base = common::config().footprint;
    let (rec, _, plane) = halves("1emv");
    let want = raster_area(&rec, &plane, &base, 0.05);
    for h in [0.5, 0.25] {
        let p = FootprintParams {
            grid_step: h,
            simplify_tol: h / 2.0,
            ..base
        };
        let got = polygon::area(&extract_footprint(&rec, &plane, &p).unwrap());
        assert!((got - want).abs() / want < 0.02, "h={h}: {got} vs {want}");
    }
}
