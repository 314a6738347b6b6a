//! Silhouette of a protein half on the interface plane.
//!
//! Atoms near the plane are projected onto it as disks of radius
//! `vdW + probe`. The union of disks is sampled as the field
//! `f(p) = max_i (r_i - |p - c_i|)` on a square grid, and the zero level set
//! is traced by marching squares. Only the outer boundary of the largest
//! region is kept, then simplified by Douglas–Peucker.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::plane::InterfacePlane;
use super::polygon;
use super::GeometryError;
use crate::pdb::AtomRecord;
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FootprintParams {
    pub grid_step: f64,
    /// Half-thickness of the projection slab, in Å.
    pub slab: f64,
    pub probe: f64,
    pub simplify_tol: f64,
    /// Contours enclosing less than this area (Ų) are rejected.
    pub min_area: f64,
}

impl Default for FootprintParams {
    fn default() -> Self {
        Self {
            grid_step: 0.5,
            slab: 6.0,
            probe: 1.4,
            simplify_tol: 0.25,
            min_area: 10.0,
        }
    }
}

impl FootprintParams {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        let nonneg = |x: f64| x.is_finite() && x >= 0.0;
        if !positive(self.grid_step) {
            return Err(GeometryError::InvalidParams(format!(
                "grid_step {}",
                self.grid_step
            )));
        }
        if !nonneg(self.slab) || !nonneg(self.probe) || !nonneg(self.simplify_tol) {
            return Err(GeometryError::InvalidParams(
                "slab, probe and simplify_tol must be non-negative".into(),
            ));
        }
        if !nonneg(self.min_area) {
            return Err(GeometryError::InvalidParams(format!(
                "min_area {}",
                self.min_area
            )));
        }
        Ok(())
    }
}

/// Bondi van der Waals radius in Å; unknown elements get the carbon value.
pub fn vdw_radius(element: &str) -> f64 {
    match element.to_ascii_uppercase().as_str() {
        "C" => 1.70,
        "N" => 1.55,
        "O" => 1.52,
        "S" => 1.80,
        "P" => 1.80,
        "H" => 1.20,
        _ => 1.70,
    }
}

/// A projected atom: in-plane center and disk radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: Vec2,
    pub radius: f64,
}

/// Disks of all atoms within `params.slab` of the plane.
pub fn project_disks(
    atoms: &[AtomRecord],
    plane: &InterfacePlane,
    params: &FootprintParams,
) -> Vec<Disk> {
    atoms
        .iter()
        .filter(|a| plane.signed_distance(&a.position).abs() <= params.slab)
        .map(|a| Disk {
            center: plane.project(&a.position),
            radius: vdw_radius(&a.element) + params.probe,
        })
        .collect()
}

/// Sampled field over grid nodes `(x0 + i·h, y0 + j·h)`.
struct Field {
    x0: f64,
    y0: f64,
    h: f64,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl Field {
    fn sample(disks: &[Disk], h: f64) -> Field {
        let pad = 2.0 * h;
        let (mut lo, mut hi) = (
            Vec2::new(f64::INFINITY, f64::INFINITY),
            Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for d in disks {
            let r = d.radius + pad;
            lo = lo.inf(&(d.center - Vec2::new(r, r)));
            hi = hi.sup(&(d.center + Vec2::new(r, r)));
        }
        // Anchor nodes to integer multiples of h in the plane frame.
        let i0 = (lo.x / h).floor() as i64 - 1;
        let j0 = (lo.y / h).floor() as i64 - 1;
        let i1 = (hi.x / h).ceil() as i64 + 1;
        let j1 = (hi.y / h).ceil() as i64 + 1;
        let nx = (i1 - i0 + 1) as usize;
        let ny = (j1 - j0 + 1) as usize;
        let mut field = Field {
            x0: i0 as f64 * h,
            y0: j0 as f64 * h,
            h,
            nx,
            ny,
            values: vec![-pad; nx * ny],
        };
        for d in disks {
            let reach = d.radius + pad;
            let ia = (((d.center.x - reach) - field.x0) / h).floor().max(0.0) as usize;
            let ib = ((((d.center.x + reach) - field.x0) / h).ceil() as usize).min(nx - 1);
            let ja = (((d.center.y - reach) - field.y0) / h).floor().max(0.0) as usize;
            let jb = ((((d.center.y + reach) - field.y0) / h).ceil() as usize).min(ny - 1);
            for j in ja..=jb {
                let y = field.y0 + j as f64 * h;
                for i in ia..=ib {
                    let x = field.x0 + i as f64 * h;
                    let dist = ((x - d.center.x).powi(2) + (y - d.center.y).powi(2)).sqrt();
                    let v = d.radius - dist;
                    let slot = &mut field.values[j * nx + i];
                    if v > *slot {
                        *slot = v;
                    }
                }
            }
        }
        field
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    fn node(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(self.x0 + i as f64 * self.h, self.y0 + j as f64 * self.h)
    }
}

/// Grid edge: `(vertical, i, j)`; horizontal edges join (i,j)-(i+1,j),
/// vertical edges join (i,j)-(i,j+1).
type EdgeKey = (bool, usize, usize);

/// Closed zero-level contours of `f`, each oriented with the inside on the left.
fn marching_squares(field: &Field) -> Vec<Vec<Vec2>> {
    let inside = |i: usize, j: usize| field.at(i, j) > 0.0;
    let mut next: HashMap<EdgeKey, EdgeKey> = HashMap::new();
    let mut points: HashMap<EdgeKey, Vec2> = HashMap::new();

    let mut edge_point = |key: EdgeKey| -> Vec2 {
        *points.entry(key).or_insert_with(|| {
            let (vertical, i, j) = key;
            let (a, b) = if vertical {
                ((i, j), (i, j + 1))
            } else {
                ((i, j), (i + 1, j))
            };
            let (fa, fb) = (field.at(a.0, a.1), field.at(b.0, b.1));
            let t = (fa / (fa - fb)).clamp(0.0, 1.0);
            let (pa, pb) = (field.node(a.0, a.1), field.node(b.0, b.1));
            pa + (pb - pa) * t
        })
    };

    for j in 0..field.ny - 1 {
        for i in 0..field.nx - 1 {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let ins = corners.map(|(a, b)| inside(a, b));
            let case = ins
                .iter()
                .enumerate()
                .fold(0u8, |acc, (k, &b)| acc | ((b as u8) << k));
            if case == 0 || case == 15 {
                continue;
            }
            // Edge k joins corner k and corner k+1.
            let edges: [EdgeKey; 4] = [
                (false, i, j),
                (true, i + 1, j),
                (false, i, j + 1),
                (true, i, j),
            ];
            // Directed segments (from edge, to edge) with the inside on the left.
            // Corner k lies between edges k-1 and k; corners run counter-clockwise.
            let mut segments: Vec<(usize, usize)> = Vec::with_capacity(2);
            let cut = |k: usize| {
                if ins[k] {
                    (k, (k + 3) % 4)
                } else {
                    ((k + 3) % 4, k)
                }
            };
            let count = ins.iter().filter(|&&b| b).count();
            if count == 1 || count == 3 {
                let odd = (0..4).find(|&k| ins[k] == (count == 1)).unwrap_or(0);
                segments.push(cut(odd));
            } else if ins[0] == ins[2] {
                // Saddle: resolve with the cell-center average.
                let center = corners.iter().map(|&(a, b)| field.at(a, b)).sum::<f64>() / 4.0;
                let center_in = center > 0.0;
                for (k, &inside) in ins.iter().enumerate() {
                    if inside != center_in {
                        segments.push(cut(k));
                    }
                }
            } else if ins[0] == ins[3] {
                // Left or right column inside: the contour runs vertically.
                segments.push(if ins[0] { (0, 2) } else { (2, 0) });
            } else {
                // Bottom or top row inside: the contour runs horizontally.
                segments.push(if ins[0] { (1, 3) } else { (3, 1) });
            }
            for (ea, eb) in segments {
                edge_point(edges[ea]);
                edge_point(edges[eb]);
                next.insert(edges[ea], edges[eb]);
            }
        }
    }

    let mut keys: Vec<EdgeKey> = next.keys().copied().collect();
    keys.sort_unstable();
    let mut visited: HashMap<EdgeKey, bool> = HashMap::new();
    let mut loops = Vec::new();
    for start in keys {
        if visited.contains_key(&start) {
            continue;
        }
        let mut ring = Vec::new();
        let mut cur = start;
        loop {
            visited.insert(cur, true);
            ring.push(points[&cur]);
            match next.get(&cur) {
                Some(&n) if n == start => break,
                Some(&n) if !visited.contains_key(&n) => cur = n,
                _ => {
                    ring.clear();
                    break;
                }
            }
        }
        dedupe_ring(&mut ring);
        if ring.len() >= 3 {
            loops.push(ring);
        }
    }
    loops
}

fn dedupe_ring(ring: &mut Vec<Vec2>) {
    const EPS: f64 = 1e-9;
    ring.dedup_by(|a, b| (*a - *b).norm() < EPS);
    while ring.len() > 1 && (ring[0] - ring[ring.len() - 1]).norm() < EPS {
        ring.pop();
    }
}

fn douglas_peucker(ring: &[Vec2], chain: &[usize], tol: f64, out: &mut Vec<usize>) {
    // Appends every kept index of `chain` except the last.
    if chain.len() < 3 {
        out.push(chain[0]);
        return;
    }
    let (a, b) = (ring[chain[0]], ring[chain[chain.len() - 1]]);
    let (mut worst, mut worst_d) = (0, -1.0);
    for (k, &i) in chain.iter().enumerate().take(chain.len() - 1).skip(1) {
        let d = polygon::point_segment_distance(&ring[i], &a, &b);
        if d > worst_d {
            worst = k;
            worst_d = d;
        }
    }
    if worst_d > tol {
        douglas_peucker(ring, &chain[..=worst], tol, out);
        douglas_peucker(ring, &chain[worst..], tol, out);
    } else {
        out.push(chain[0]);
    }
}

/// Total-least-squares line (point, unit direction) through `points`.
fn fit_line(points: &[Vec2]) -> (Vec2, Vec2) {
    let n = points.len() as f64;
    let c = points.iter().sum::<Vec2>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let d = p - c;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    (c, Vec2::new(angle.cos(), angle.sin()))
}

/// Douglas–Peucker on a closed ring, split at the vertex farthest from the
/// centroid and the vertex farthest from that one.
///
/// Kept vertices are then moved to the intersection of the least-squares
/// lines through the raw points on either side, when that intersection lies
/// within `tol` of the vertex. Chords of a convex arc otherwise all fall
/// inside it and the area shrinks systematically.
pub fn simplify_ring(ring: &[Vec2], tol: f64) -> Vec<Vec2> {
    if ring.len() <= 4 || tol <= 0.0 {
        return ring.to_vec();
    }
    let c = polygon::centroid(ring);
    let far = |from: &Vec2| {
        ring.iter()
            .enumerate()
            .max_by(|x, y| (x.1 - from).norm().total_cmp(&(y.1 - from).norm()))
            .map(|(k, _)| k)
            .unwrap_or(0)
    };
    let a = far(&c);
    let b = far(&ring[a]);
    let n = ring.len();
    let (lo, hi) = (a.min(b), a.max(b));
    let first: Vec<usize> = (lo..=hi).collect();
    let second: Vec<usize> = (hi..n).chain(0..=lo).collect();
    let mut kept = Vec::new();
    douglas_peucker(ring, &first, tol, &mut kept);
    douglas_peucker(ring, &second, tol, &mut kept);

    let m = kept.len();
    if m < 3 {
        return kept.iter().map(|&i| ring[i]).collect();
    }
    // Line through the raw points from kept[k] to kept[k + 1], inclusive.
    let lines: Vec<(Vec2, Vec2)> = (0..m)
        .map(|k| {
            let (s, e) = (kept[k], kept[(k + 1) % m]);
            let len = (e + n - s) % n;
            let pts: Vec<Vec2> = (0..=len).map(|t| ring[(s + t) % n]).collect();
            fit_line(&pts)
        })
        .collect();
    (0..m)
        .map(|k| {
            let v = ring[kept[k]];
            let (p1, d1) = lines[(k + m - 1) % m];
            let (p2, d2) = lines[k];
            let denom = d1.perp(&d2);
            if denom.abs() < 1e-9 {
                return v;
            }
            let t = (p2 - p1).perp(&d2) / denom;
            let x = p1 + d1 * t;
            if (x - v).norm() <= tol {
                x
            } else {
                v
            }
        })
        .collect()
}

/// All closed outer contours of the disk union, largest first.
pub fn disk_union_contours(disks: &[Disk], grid_step: f64) -> Vec<Vec<Vec2>> {
    if disks.is_empty() {
        return Vec::new();
    }
    let field = Field::sample(disks, grid_step);
    let mut loops: Vec<Vec<Vec2>> = marching_squares(&field)
        .into_iter()
        .filter(|r| polygon::signed_area(r) > 0.0)
        .collect();
    loops.sort_by(|a, b| polygon::signed_area(b).total_cmp(&polygon::signed_area(a)));
    loops
}

/// Footprint polygon (counter-clockwise) of `atoms` on `plane`.
pub fn extract_footprint(
    atoms: &[AtomRecord],
    plane: &InterfacePlane,
    params: &FootprintParams,
) -> Result<Vec<Vec2>, GeometryError> {
    params.validate()?;
    let disks = project_disks(atoms, plane, params);
    footprint_from_disks(&disks, params)
}

pub fn footprint_from_disks(
    disks: &[Disk],
    params: &FootprintParams,
) -> Result<Vec<Vec2>, GeometryError> {
    params.validate()?;
    if disks.is_empty() {
        return Err(GeometryError::EmptyFootprint(
            "no atom within the projection slab".into(),
        ));
    }
    let raw = disk_union_contours(disks, params.grid_step)
        .into_iter()
        .next()
        .ok_or_else(|| GeometryError::EmptyFootprint("no closed contour".into()))?;
    let area = polygon::area(&raw);
    if area < params.min_area {
        return Err(GeometryError::EmptyFootprint(format!(
            "largest contour encloses {area:.3} A^2"
        )));
    }
    let mut tol = params.simplify_tol;
    for _ in 0..2 {
        let simplified = simplify_ring(&raw, tol);
        if simplified.len() >= 3
            && polygon::signed_area(&simplified) > 0.0
            && polygon::is_simple(&simplified)
        {
            return Ok(simplified);
        }
        tol *= 0.5;
    }
    Ok(raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn disk(x: f64, y: f64, r: f64) -> Disk {
        Disk {
            center: Vec2::new(x, y),
            radius: r,
        }
    }

    #[test]
    fn single_disk_is_close_to_a_circle() {
        let params = FootprintParams::default();
        let poly = footprint_from_disks(&[disk(0.0, 0.0, 3.1)], &params).unwrap();
        let expected = PI * 3.1 * 3.1;
        assert!((polygon::area(&poly) - expected).abs() / expected < 0.05);
        assert!(polygon::signed_area(&poly) > 0.0);
        assert!(polygon::is_simple(&poly));
    }

    #[test]
    fn raw_contour_is_ccw_and_tight() {
        let loops = disk_union_contours(&[disk(0.3, -0.2, 3.1)], 0.5);
        assert_eq!(loops.len(), 1);
        let expected = PI * 3.1 * 3.1;
        assert!((polygon::area(&loops[0]) - expected).abs() / expected < 0.01);
        for p in &loops[0] {
            assert!(((p - Vec2::new(0.3, -0.2)).norm() - 3.1).abs() < 0.05);
        }
    }

    #[test]
    fn keeps_largest_of_two_clusters() {
        let disks = [
            disk(0.0, 0.0, 3.1),
            disk(40.0, 0.0, 3.1),
            disk(42.0, 0.0, 3.1),
            disk(41.0, 1.5, 3.1),
        ];
        let poly = footprint_from_disks(&disks, &FootprintParams::default()).unwrap();
        let c = polygon::centroid(&poly);
        assert!(c.x > 35.0);
    }

    #[test]
    fn ring_hole_is_filled() {
        // Disks on a circle of radius 8 enclose a hole; only the outer boundary survives.
        let disks: Vec<Disk> = (0..24)
            .map(|k| {
                let t = k as f64 * 2.0 * PI / 24.0;
                disk(8.0 * t.cos(), 8.0 * t.sin(), 2.0)
            })
            .collect();
        let loops = disk_union_contours(&disks, 0.5);
        assert_eq!(loops.len(), 1);
        assert!(polygon::area(&loops[0]) > PI * 9.0 * 9.0);
    }

    #[test]
    fn saddle_configuration_closes() {
        // Two disks touching diagonally produce saddle cells.
        let disks = [disk(0.0, 0.0, 1.8), disk(2.5, 2.5, 1.8)];
        for loop_ in disk_union_contours(&disks, 0.5) {
            assert!(polygon::is_simple(&loop_));
        }
    }

    #[test]
    fn tiny_footprint_rejected() {
        let err = footprint_from_disks(&[disk(0.0, 0.0, 1.0)], &FootprintParams::default());
        assert!(matches!(err, Err(GeometryError::EmptyFootprint(_))));
        let err = footprint_from_disks(&[], &FootprintParams::default());
        assert!(matches!(err, Err(GeometryError::EmptyFootprint(_))));
    }

    #[test]
    fn simplify_keeps_square_corners() {
        let mut ring = Vec::new();
        for k in 0..10 {
            ring.push(Vec2::new(k as f64, 0.0));
        }
        for k in 0..10 {
            ring.push(Vec2::new(10.0, k as f64));
        }
        for k in 0..10 {
            ring.push(Vec2::new(10.0 - k as f64, 10.0));
        }
        for k in 0..10 {
            ring.push(Vec2::new(0.0, 10.0 - k as f64));
        }
        let s = simplify_ring(&ring, 0.25);
        assert_eq!(s.len(), 4);
        assert!((polygon::area(&s) - 100.0).abs() < 1e-12);
    }

    #[test]
    fn vdw_table() {
        assert_eq!(vdw_radius("C"), 1.70);
        assert_eq!(vdw_radius("O"), 1.52);
        assert_eq!(vdw_radius("Se"), 1.70);
    }
}
