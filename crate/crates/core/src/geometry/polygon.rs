//! Simple-polygon utilities: area, centroid, hit testing and exact
//! intersection area via ear-clipped triangles.

use crate::Vec2;

fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Shoelace area; positive for counter-clockwise rings.
pub fn signed_area(ring: &[Vec2]) -> f64 {
    let n = ring.len();
    if n < 3 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..n {
        sum += cross(&ring[i], &ring[(i + 1) % n]);
    }
    0.5 * sum
}

pub fn area(ring: &[Vec2]) -> f64 {
    signed_area(ring).abs()
}

pub fn perimeter(ring: &[Vec2]) -> f64 {
    let n = ring.len();
    (0..n).map(|i| (ring[(i + 1) % n] - ring[i]).norm()).sum()
}

/// Area centroid. Falls back to the vertex mean for degenerate rings.
pub fn centroid(ring: &[Vec2]) -> Vec2 {
    let n = ring.len();
    let a = signed_area(ring);
    if n == 0 {
        return Vec2::zeros();
    }
    if a.abs() < 1e-12 {
        return ring.iter().sum::<Vec2>() / n as f64;
    }
    let mut c = Vec2::zeros();
    for i in 0..n {
        let p = ring[i];
        let q = ring[(i + 1) % n];
        let w = cross(&p, &q);
        c += (p + q) * w;
    }
    c / (6.0 * a)
}

/// Largest vertex distance from `center`.
pub fn circumradius(ring: &[Vec2], center: &Vec2) -> f64 {
    ring.iter().map(|p| (p - center).norm()).fold(0.0, f64::max)
}

/// Even-odd point-in-polygon test.
pub fn contains(ring: &[Vec2], p: &Vec2) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let a = ring[i];
        let b = ring[j];
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn point_segment_distance(p: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

pub fn distance_to_boundary(ring: &[Vec2], p: &Vec2) -> f64 {
    let n = ring.len();
    (0..n)
        .map(|i| point_segment_distance(p, &ring[i], &ring[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Distance from `p` to the closed region bounded by `ring` (zero inside).
pub fn distance_to_region(ring: &[Vec2], p: &Vec2) -> f64 {
    if contains(ring, p) {
        0.0
    } else {
        distance_to_boundary(ring, p)
    }
}

fn orient(a: &Vec2, b: &Vec2, c: &Vec2) -> f64 {
    cross(&(b - a), &(c - a))
}

fn on_segment(a: &Vec2, b: &Vec2, p: &Vec2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test, touching included.
pub fn segments_intersect(a: &Vec2, b: &Vec2, c: &Vec2, d: &Vec2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// True when the ring has at least three vertices, positive area, and no two
/// non-adjacent edges touch.
pub fn is_simple(ring: &[Vec2]) -> bool {
    let n = ring.len();
    if n < 3 || area(ring) <= 0.0 {
        return false;
    }
    if ring.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return false;
    }
    for i in 0..n {
        if ring[i] == ring[(i + 1) % n] {
            return false;
        }
    }
    let bbox: Vec<(f64, f64, f64, f64)> = (0..n)
        .map(|i| {
            let a = ring[i];
            let b = ring[(i + 1) % n];
            (a.x.min(b.x), a.x.max(b.x), a.y.min(b.y), a.y.max(b.y))
        })
        .collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let (a0, a1, a2, a3) = bbox[i];
            let (b0, b1, b2, b3) = bbox[j];
            if a1 < b0 || b1 < a0 || a3 < b2 || b3 < a2 {
                continue;
            }
            if segments_intersect(&ring[i], &ring[(i + 1) % n], &ring[j], &ring[(j + 1) % n]) {
                return false;
            }
        }
    }
    // Adjacent edges folding back onto each other.
    for i in 0..n {
        let a = ring[(i + n - 1) % n];
        let b = ring[i];
        let c = ring[(i + 1) % n];
        if orient(&a, &b, &c) == 0.0 && (a - b).dot(&(c - b)) > 0.0 {
            return false;
        }
    }
    true
}

pub type Triangle = [Vec2; 3];

fn point_in_triangle(p: &Vec2, t: &Triangle) -> bool {
    let d1 = orient(&t[0], &t[1], p);
    let d2 = orient(&t[1], &t[2], p);
    let d3 = orient(&t[2], &t[0], p);
    d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0
}

/// Ear-clipping triangulation of a simple polygon (either orientation).
/// Output triangles are counter-clockwise.
pub fn triangulate(ring: &[Vec2]) -> Vec<Triangle> {
    let mut idx: Vec<usize> = (0..ring.len()).collect();
    if signed_area(ring) < 0.0 {
        idx.reverse();
    }
    let mut out = Vec::with_capacity(ring.len().saturating_sub(2));
    let mut guard = 0usize;
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for k in 0..m {
            let ia = idx[(k + m - 1) % m];
            let ib = idx[k];
            let ic = idx[(k + 1) % m];
            let tri = [ring[ia], ring[ib], ring[ic]];
            if orient(&tri[0], &tri[1], &tri[2]) <= 0.0 {
                continue;
            }
            let blocked = idx
                .iter()
                .any(|&q| q != ia && q != ib && q != ic && point_in_triangle(&ring[q], &tri));
            if blocked {
                continue;
            }
            out.push(tri);
            idx.remove(k);
            clipped = true;
            break;
        }
        if !clipped {
            // Numerically degenerate remainder: drop a collinear vertex.
            guard += 1;
            if guard > ring.len() {
                break;
            }
            let m = idx.len();
            let k = (0..m)
                .min_by(|&a, &b| {
                    let fa = orient(
                        &ring[idx[(a + m - 1) % m]],
                        &ring[idx[a]],
                        &ring[idx[(a + 1) % m]],
                    )
                    .abs();
                    let fb = orient(
                        &ring[idx[(b + m - 1) % m]],
                        &ring[idx[b]],
                        &ring[idx[(b + 1) % m]],
                    )
                    .abs();
                    fa.total_cmp(&fb)
                })
                .unwrap_or(0);
            idx.remove(k);
        }
    }
    if idx.len() == 3 {
        let tri = [ring[idx[0]], ring[idx[1]], ring[idx[2]]];
        if orient(&tri[0], &tri[1], &tri[2]) > 0.0 {
            out.push(tri);
        }
    }
    out
}

/// Area of the intersection of two convex counter-clockwise polygons
/// (Sutherland–Hodgman clipping).
pub fn convex_intersection_area(subject: &[Vec2], clip: &[Vec2]) -> f64 {
    let mut output: Vec<Vec2> = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % m];
        let input = std::mem::take(&mut output);
        let k = input.len();
        for j in 0..k {
            let p = input[j];
            let q = input[(j + 1) % k];
            let dp = orient(&a, &b, &p);
            let dq = orient(&a, &b, &q);
            if dp >= 0.0 {
                output.push(p);
                if dq < 0.0 {
                    output.push(p + (q - p) * (dp / (dp - dq)));
                }
            } else if dq >= 0.0 {
                output.push(p + (q - p) * (dp / (dp - dq)));
            }
        }
    }
    area(&output)
}

/// Triangle soup with per-triangle bounding boxes for overlap queries.
#[derive(Debug, Clone, Default)]
pub struct TriangleSet {
    pub triangles: Vec<Triangle>,
    boxes: Vec<[f64; 4]>,
}

fn tri_box(t: &Triangle) -> [f64; 4] {
    [
        t[0].x.min(t[1].x).min(t[2].x),
        t[0].x.max(t[1].x).max(t[2].x),
        t[0].y.min(t[1].y).min(t[2].y),
        t[0].y.max(t[1].y).max(t[2].y),
    ]
}

impl TriangleSet {
    pub fn from_ring(ring: &[Vec2]) -> Self {
        Self::from_triangles(triangulate(ring))
    }

    pub fn from_triangles(triangles: Vec<Triangle>) -> Self {
        let boxes = triangles.iter().map(tri_box).collect();
        Self { triangles, boxes }
    }

    pub fn area(&self) -> f64 {
        self.triangles.iter().map(|t| area(t)).sum()
    }

    pub fn bounds(&self) -> [f64; 4] {
        self.boxes.iter().fold(
            [
                f64::INFINITY,
                f64::NEG_INFINITY,
                f64::INFINITY,
                f64::NEG_INFINITY,
            ],
            |acc, b| {
                [
                    acc[0].min(b[0]),
                    acc[1].max(b[1]),
                    acc[2].min(b[2]),
                    acc[3].max(b[3]),
                ]
            },
        )
    }

    pub fn transformed(&self, f: impl Fn(&Vec2) -> Vec2) -> Self {
        Self::from_triangles(
            self.triangles
                .iter()
                .map(|t| [f(&t[0]), f(&t[1]), f(&t[2])])
                .collect(),
        )
    }

    /// Exact area of the intersection of the two triangulated regions.
    pub fn intersection_area(&self, other: &TriangleSet) -> f64 {
        let a = self.bounds();
        let b = other.bounds();
        if a[1] < b[0] || b[1] < a[0] || a[3] < b[2] || b[3] < a[2] {
            return 0.0;
        }
        // Sweep over x-sorted boxes of the other set.
        let mut order: Vec<usize> = (0..other.triangles.len()).collect();
        order.sort_by(|&i, &j| other.boxes[i][0].total_cmp(&other.boxes[j][0]));
        let max_width = other.boxes.iter().map(|b| b[1] - b[0]).fold(0.0, f64::max);
        let mut total = 0.0;
        for (ti, tb) in self.triangles.iter().zip(&self.boxes) {
            let lo = tb[0] - max_width;
            let start = order.partition_point(|&j| other.boxes[j][0] < lo);
            for &j in &order[start..] {
                let ob = &other.boxes[j];
                if ob[0] > tb[1] {
                    break;
                }
                if ob[1] < tb[0] || ob[3] < tb[2] || tb[3] < ob[2] {
                    continue;
                }
                total += convex_intersection_area(ti, &other.triangles[j]);
            }
        }
        total
    }
}

/// Exact intersection area of two simple polygons.
pub fn intersection_area(a: &[Vec2], b: &[Vec2]) -> f64 {
    TriangleSet::from_ring(a).intersection_area(&TriangleSet::from_ring(b))
}
