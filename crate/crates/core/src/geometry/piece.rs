//! Puzzle pieces: footprint outline, charge points, and docked pose.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::footprint::FootprintParams;
use super::plane::InterfacePlane;
use super::polygon::{self, TriangleSet};
use super::pose::Pose2D;
use super::GeometryError;
use crate::charges::{ChargeSign, SaltBridge};
use crate::pdb::{ComplexPair, Side};
use crate::Vec2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargePoint {
    /// In the piece's local frame.
    pub position: Vec2,
    pub sign: ChargeSign,
    pub bridge_index: usize,
}

/// Residue-level description of a bridge kept on a piece pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeRecord {
    pub bridge_index: usize,
    pub positive: String,
    pub negative: String,
    pub distance: f64,
}

/// How a piece was derived from its source structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub chains: Vec<char>,
    pub plane: InterfacePlane,
    pub footprint: FootprintParams,
    pub bridges: Vec<BridgeRecord>,
    /// Bridges whose projected endpoints fell off a footprint, by rank in the
    /// sorted bridge list.
    pub dropped_bridges: Vec<BridgeRecord>,
}

/// Lazily built triangulation of an outline. Never serialized and ignored by
/// equality.
#[derive(Debug, Clone, Default)]
pub struct TriangulationCache(Arc<OnceLock<TriangleSet>>);

impl PartialEq for TriangulationCache {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlicePiece {
    pub piece_id: String,
    pub source_entry: String,
    pub side: Side,
    /// Counter-clockwise simple polygon in the piece's local frame, Å.
    pub outline: Vec<Vec2>,
    pub charges: Vec<ChargePoint>,
    /// Places the local frame in the receptor's frame at the crystal pose.
    pub canonical_pose: Pose2D,
    pub display_name: String,
    pub blurb: String,
    pub provenance: Provenance,
    #[serde(skip)]
    pub triangulation: TriangulationCache,
}

impl SlicePiece {
    pub fn area(&self) -> f64 {
        polygon::area(&self.outline)
    }

    pub fn centroid(&self) -> Vec2 {
        polygon::centroid(&self.outline)
    }

    pub fn circumradius(&self) -> f64 {
        polygon::circumradius(&self.outline, &self.centroid())
    }

    pub fn triangles(&self) -> &TriangleSet {
        self.triangulation
            .0
            .get_or_init(|| TriangleSet::from_ring(&self.outline))
    }

    /// Outline vertices placed by `pose`.
    pub fn placed_outline(&self, pose: &Pose2D) -> Vec<Vec2> {
        self.outline.iter().map(|p| pose.apply(p)).collect()
    }

    pub fn bridge_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.charges.iter().map(|c| c.bridge_index).collect();
        v.sort_unstable();
        v
    }

    /// Copy with charges removed, as shown on hidden-charge levels.
    pub fn without_charges(&self) -> SlicePiece {
        SlicePiece {
            charges: Vec::new(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("piece serializes")
    }

    pub fn from_json(text: &str) -> Result<SlicePiece, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Text shown on a pair's info page.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PieceMeta {
    pub receptor_name: String,
    pub ligand_name: String,
    pub blurb: String,
}

fn site_label(site: &crate::charges::ChargeSite) -> String {
    let icode = if site.insertion_code == ' ' {
        String::new()
    } else {
        site.insertion_code.to_string()
    };
    format!(
        "{}:{}{}{}:{}",
        site.chain_id, site.residue_name, site.residue_seq, icode, site.atom_name
    )
}

/// Build the receptor and ligand pieces of one complex.
///
/// Both outlines are in the plane frame. The receptor keeps that frame with an
/// identity pose; the ligand is recentred on its outline centroid and its
/// canonical pose translates it back. A bridge becomes a charge on each piece
/// only if both projected endpoints lie within `probe + grid_step` of their
/// piece's outline region.
pub fn make_piece_pair(
    pair: &ComplexPair,
    plane: &InterfacePlane,
    bridges: &[SaltBridge],
    receptor_outline: Vec<Vec2>,
    ligand_outline: Vec<Vec2>,
    params: &FootprintParams,
    meta: &PieceMeta,
) -> Result<(SlicePiece, SlicePiece), GeometryError> {
    for (outline, side) in [
        (&receptor_outline, Side::Receptor),
        (&ligand_outline, Side::Ligand),
    ] {
        if outline.len() < 3 || polygon::signed_area(outline) <= 0.0 || !polygon::is_simple(outline)
        {
            return Err(GeometryError::EmptyFootprint(format!(
                "{side:?} outline is not a simple counter-clockwise polygon"
            )));
        }
    }
    let reach = params.probe + params.grid_step;
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut rec_charges = Vec::new();
    let mut lig_charges = Vec::new();
    for (rank, bridge) in bridges.iter().enumerate() {
        let rs = bridge.site_on(pair, Side::Receptor);
        let ls = bridge.site_on(pair, Side::Ligand);
        let rp = plane.project(&rs.position);
        let lp = plane.project(&ls.position);
        let record = |index| BridgeRecord {
            bridge_index: index,
            positive: site_label(&bridge.positive_site),
            negative: site_label(&bridge.negative_site),
            distance: bridge.distance,
        };
        if polygon::distance_to_region(&receptor_outline, &rp) > reach
            || polygon::distance_to_region(&ligand_outline, &lp) > reach
        {
            dropped.push(record(rank));
            continue;
        }
        let index = kept.len();
        kept.push(record(index));
        rec_charges.push(ChargePoint {
            position: rp,
            sign: rs.sign,
            bridge_index: index,
        });
        lig_charges.push(ChargePoint {
            position: lp,
            sign: ls.sign,
            bridge_index: index,
        });
    }

    let center = polygon::centroid(&ligand_outline);
    let ligand_local: Vec<Vec2> = ligand_outline.iter().map(|p| p - center).collect();
    for c in &mut lig_charges {
        c.position -= center;
    }

    let provenance = |side: Side| Provenance {
        chains: match side {
            Side::Receptor => pair.receptor.iter().copied().collect(),
            Side::Ligand => pair.ligand.iter().copied().collect(),
        },
        plane: *plane,
        footprint: *params,
        bridges: kept.clone(),
        dropped_bridges: dropped.clone(),
    };
    let entry = pair.structure.entry_id.clone();
    let receptor = SlicePiece {
        piece_id: format!("{entry}_receptor"),
        source_entry: entry.clone(),
        side: Side::Receptor,
        outline: receptor_outline,
        charges: rec_charges,
        canonical_pose: Pose2D::IDENTITY,
        display_name: meta.receptor_name.clone(),
        blurb: meta.blurb.clone(),
        provenance: provenance(Side::Receptor),
        triangulation: TriangulationCache::default(),
    };
    let ligand = SlicePiece {
        piece_id: format!("{entry}_ligand"),
        source_entry: entry,
        side: Side::Ligand,
        outline: ligand_local,
        charges: lig_charges,
        canonical_pose: Pose2D::new(center.x, center.y, 0.0),
        display_name: meta.ligand_name.clone(),
        blurb: meta.blurb.clone(),
        provenance: provenance(Side::Ligand),
        triangulation: TriangulationCache::default(),
    };
    Ok((receptor, ligand))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charges::{find_salt_bridges, ChargeConfig};
    use crate::pdb::{parse_structure, select_pair};
    use crate::Vec3;

    fn square(cx: f64, cy: f64, h: f64) -> Vec<Vec2> {
        vec![
            Vec2::new(cx - h, cy - h),
            Vec2::new(cx + h, cy - h),
            Vec2::new(cx + h, cy + h),
            Vec2::new(cx - h, cy + h),
        ]
    }

    fn line(serial: usize, name: &str, res: &str, chain: char, seq: i32, p: Vec3) -> String {
        format!(
            "ATOM  {serial:5} {name:<4} {res} {chain}{seq:4}    {:8.3}{:8.3}{:8.3}  1.00  0.00",
            p.x, p.y, p.z
        )
    }

    fn xy_plane() -> InterfacePlane {
        InterfacePlane {
            origin: Vec3::zeros(),
            normal: Vec3::new(0.0, 0.0, 1.0),
            in_plane_u: Vec3::new(1.0, 0.0, 0.0),
            in_plane_v: Vec3::new(0.0, 1.0, 0.0),
        }
    }

    fn lys_glu_pair(glu_at: Vec3) -> ComplexPair {
        let text = [
            line(1, "NZ", "LYS", 'A', 1, Vec3::new(0.0, 0.0, -1.0)),
            line(2, "OE1", "GLU", 'B', 1, glu_at),
        ]
        .join("\n");
        let s = parse_structure(&text).unwrap();
        select_pair(&s, &['A'].into(), &['B'].into()).unwrap()
    }

    #[test]
    fn one_bridge_gives_one_charge_each() {
        let pair = lys_glu_pair(Vec3::new(2.0, 0.0, 1.0));
        let bridges = find_salt_bridges(&pair, &ChargeConfig::default()).unwrap();
        let (r, l) = make_piece_pair(
            &pair,
            &xy_plane(),
            &bridges,
            square(0.0, 0.0, 4.0),
            square(2.0, 0.0, 4.0),
            &FootprintParams::default(),
            &PieceMeta::default(),
        )
        .unwrap();
        assert_eq!(r.charges.len(), 1);
        assert_eq!(l.charges.len(), 1);
        assert_eq!(r.charges[0].bridge_index, 0);
        assert_eq!(l.charges[0].bridge_index, 0);
        assert_eq!(r.charges[0].sign, ChargeSign::Positive);
        assert_eq!(l.charges[0].sign, ChargeSign::Negative);
        assert_eq!(r.canonical_pose, Pose2D::IDENTITY);
        // Canonical pose puts the ligand charge back at its projected position.
        let placed = l.canonical_pose.apply(&l.charges[0].position);
        assert!((placed - Vec2::new(2.0, 0.0)).norm() < 1e-12);
        assert!((placed - r.charges[0].position).norm() <= bridges[0].distance);
        assert!(polygon::centroid(&l.outline).norm() < 1e-12);
    }

    #[test]
    fn zero_bridges_give_empty_charges() {
        let pair = lys_glu_pair(Vec3::new(2.0, 0.0, 1.0));
        let (r, l) = make_piece_pair(
            &pair,
            &xy_plane(),
            &[],
            square(0.0, 0.0, 4.0),
            square(2.0, 0.0, 4.0),
            &FootprintParams::default(),
            &PieceMeta::default(),
        )
        .unwrap();
        assert!(r.charges.is_empty() && l.charges.is_empty());
    }

    #[test]
    fn off_footprint_bridge_is_dropped_from_both() {
        let pair = lys_glu_pair(Vec3::new(2.0, 0.0, 1.0));
        let bridges = find_salt_bridges(&pair, &ChargeConfig::default()).unwrap();
        let (r, l) = make_piece_pair(
            &pair,
            &xy_plane(),
            &bridges,
            square(0.0, 0.0, 4.0),
            square(20.0, 0.0, 4.0),
            &FootprintParams::default(),
            &PieceMeta::default(),
        )
        .unwrap();
        assert!(r.charges.is_empty() && l.charges.is_empty());
        assert_eq!(r.provenance.dropped_bridges.len(), 1);
    }

    #[test]
    fn json_round_trip() {
        let pair = lys_glu_pair(Vec3::new(2.0, 0.0, 1.0));
        let bridges = find_salt_bridges(&pair, &ChargeConfig::default()).unwrap();
        let (r, _) = make_piece_pair(
            &pair,
            &xy_plane(),
            &bridges,
            square(0.0, 0.0, 4.0),
            square(2.0, 0.0, 4.0),
            &FootprintParams::default(),
            &PieceMeta::default(),
        )
        .unwrap();
        let back = SlicePiece::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!((back.triangles().area() - 64.0).abs() < 1e-9);
    }
}
