//! Least-squares interface plane through the contact region.

use std::collections::HashMap;

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::charges::SaltBridge;
use crate::pdb::{AtomRecord, ComplexPair, Side};
use crate::{Vec2, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactParams {
    /// Inter-partner heavy-atom distance defining a contact, in Å.
    pub contact_cutoff: f64,
    /// Weight of each salt-bridge midpoint relative to an ordinary contact.
    pub bridge_weight: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        Self {
            contact_cutoff: 5.0,
            bridge_weight: 3.0,
        }
    }
}

/// Plane with an orthonormal in-plane frame. `normal` points from the
/// receptor side toward the ligand side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfacePlane {
    pub origin: Vec3,
    pub normal: Vec3,
    pub in_plane_u: Vec3,
    pub in_plane_v: Vec3,
}

impl InterfacePlane {
    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(&(p - self.origin))
    }

    /// Coordinates of `p` projected into the (u, v) frame.
    pub fn project(&self, p: &Vec3) -> Vec2 {
        let d = p - self.origin;
        Vec2::new(d.dot(&self.in_plane_u), d.dot(&self.in_plane_v))
    }
}

/// Result of a weighted principal-axis fit.
#[derive(Debug, Clone, Copy)]
pub struct PlaneFit {
    pub centroid: Vec3,
    /// Eigenvectors sorted by ascending eigenvalue; column 0 is the normal.
    pub axes: [Vec3; 3],
    pub eigenvalues: [f64; 3],
}

/// Weighted total-least-squares plane through `points`.
pub fn fit_weighted_plane(points: &[(Vec3, f64)]) -> Option<PlaneFit> {
    let total: f64 = points.iter().map(|(_, w)| w).sum();
    if points.is_empty() || total <= 0.0 {
        return None;
    }
    let centroid = points.iter().map(|(p, w)| p * *w).sum::<Vec3>() / total;
    let mut cov = Matrix3::zeros();
    for (p, w) in points {
        let d = p - centroid;
        cov += d * d.transpose() * *w;
    }
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let axes = order.map(|i| eig.eigenvectors.column(i).into_owned().normalize());
    let eigenvalues = order.map(|i| eig.eigenvalues[i]);
    Some(PlaneFit {
        centroid,
        axes,
        eigenvalues,
    })
}

/// Sum of weighted squared distances of `points` to the plane (`origin`, `normal`).
pub fn weighted_residual(points: &[(Vec3, f64)], origin: &Vec3, normal: &Vec3) -> f64 {
    let n = normal.normalize();
    points
        .iter()
        .map(|(p, w)| {
            let d = n.dot(&(p - origin));
            w * d * d
        })
        .sum()
}

fn cell_of(p: &Vec3, size: f64) -> (i64, i64, i64) {
    (
        (p.x / size).floor() as i64,
        (p.y / size).floor() as i64,
        (p.z / size).floor() as i64,
    )
}

/// Midpoints of every receptor–ligand heavy-atom pair closer than `cutoff`.
///
/// Order is deterministic: receptor atoms in structure order, then ligand
/// atoms in structure order.
pub fn contact_midpoints(pair: &ComplexPair, cutoff: f64) -> Vec<Vec3> {
    let receptor = pair.side_heavy_atoms(Side::Receptor);
    let ligand = pair.side_heavy_atoms(Side::Ligand);
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, a) in ligand.iter().enumerate() {
        grid.entry(cell_of(&a.position, cutoff))
            .or_default()
            .push(i);
    }
    let cutoff2 = cutoff * cutoff;
    let mut out = Vec::new();
    let mut hits: Vec<usize> = Vec::new();
    for r in &receptor {
        let (cx, cy, cz) = cell_of(&r.position, cutoff);
        hits.clear();
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = grid.get(&(cx + dx, cy + dy, cz + dz)) {
                        hits.extend(list.iter().copied().filter(|&j| {
                            (ligand[j].position - r.position).norm_squared() <= cutoff2
                        }));
                    }
                }
            }
        }
        hits.sort_unstable();
        out.extend(
            hits.iter()
                .map(|&j| (r.position + ligand[j].position) * 0.5),
        );
    }
    out
}

fn side_centroid(atoms: &[&AtomRecord]) -> Vec3 {
    atoms.iter().map(|a| a.position).sum::<Vec3>() / atoms.len().max(1) as f64
}

/// Fit the interface plane of a complex.
///
/// The plane minimises squared distances to the contact midpoints, with each
/// salt-bridge midpoint counted `bridge_weight` times. The in-plane `u` axis
/// is the dominant principal direction of the contact cloud, signed by its
/// third moment, so the frame moves rigidly with the input coordinates.
pub fn fit_interface_plane(
    pair: &ComplexPair,
    bridges: &[SaltBridge],
    params: &ContactParams,
) -> Result<InterfacePlane, GeometryError> {
    let midpoints = contact_midpoints(pair, params.contact_cutoff);
    if midpoints.is_empty() {
        return Err(GeometryError::NoContact);
    }
    let mut weighted: Vec<(Vec3, f64)> = midpoints.into_iter().map(|p| (p, 1.0)).collect();
    weighted.extend(bridges.iter().map(|b| (b.midpoint(), params.bridge_weight)));

    let rec = side_centroid(&pair.side_heavy_atoms(Side::Receptor));
    let lig = side_centroid(&pair.side_heavy_atoms(Side::Ligand));
    plane_from_points(&weighted, &(lig - rec)).ok_or(GeometryError::NoContact)
}

/// Plane through weighted points with the normal oriented along `toward`.
pub fn plane_from_points(points: &[(Vec3, f64)], toward: &Vec3) -> Option<InterfacePlane> {
    let fit = fit_weighted_plane(points)?;
    let mut normal = fit.axes[0];
    if normal.dot(toward) < 0.0 {
        normal = -normal;
    }
    let mut u = fit.axes[2];
    u -= normal * normal.dot(&u);
    u = u.normalize();
    let third: f64 = points
        .iter()
        .map(|(p, w)| {
            let s = u.dot(&(p - fit.centroid));
            w * s * s * s
        })
        .sum();
    let scale: f64 = points
        .iter()
        .map(|(p, w)| w * (p - fit.centroid).norm().powi(3))
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    if third / scale < -1e-9 {
        u = -u;
    } else if third.abs() / scale <= 1e-9 {
        // Symmetric cloud: fall back to a fixed tie-break.
        let k = (0..3)
            .max_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs()))
            .unwrap_or(0);
        if u[k] < 0.0 {
            u = -u;
        }
    }
    let v = normal.cross(&u).normalize();
    Some(InterfacePlane {
        origin: fit.centroid,
        normal,
        in_plane_u: u,
        in_plane_v: v,
    })
}

/// One partner's atoms retained after cutting at the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Half {
    pub side: Side,
    pub atoms: Vec<AtomRecord>,
}

/// Cut the complex at the plane. Receptor atoms are kept up to `slab_keep`
/// on the ligand side, ligand atoms up to `slab_keep` on the receptor side.
pub fn split_halves(
    pair: &ComplexPair,
    plane: &InterfacePlane,
    slab_keep: f64,
) -> Result<(Half, Half), GeometryError> {
    let receptor: Vec<AtomRecord> = pair
        .side_heavy_atoms(Side::Receptor)
        .into_iter()
        .filter(|a| plane.signed_distance(&a.position) <= slab_keep)
        .cloned()
        .collect();
    let ligand: Vec<AtomRecord> = pair
        .side_heavy_atoms(Side::Ligand)
        .into_iter()
        .filter(|a| plane.signed_distance(&a.position) >= -slab_keep)
        .cloned()
        .collect();
    if receptor.is_empty() {
        return Err(GeometryError::DegenerateSplit(Side::Receptor));
    }
    if ligand.is_empty() {
        return Err(GeometryError::DegenerateSplit(Side::Ligand));
    }
    Ok((
        Half {
            side: Side::Receptor,
            atoms: receptor,
        },
        Half {
            side: Side::Ligand,
            atoms: ligand,
        },
    ))
}
