//! Charged side-chain sites and inter-partner salt bridges.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pdb::{AtomRecord, ComplexPair, Side};
use crate::Vec3;

pub const DEFAULT_BRIDGE_CUTOFF: f64 = 4.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChargeError {
    #[error("salt-bridge cutoff must be positive and finite, got {0}")]
    InvalidCutoff(f64),
    #[error("no inter-chain salt bridges within {cutoff} A")]
    NoBridges { cutoff: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChargeSign {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeConfig {
    pub cutoff: f64,
    pub include_histidine: bool,
}

impl Default for ChargeConfig {
    fn default() -> Self {
        Self {
            cutoff: DEFAULT_BRIDGE_CUTOFF,
            include_histidine: true,
        }
    }
}

/// Sign of a side-chain charge carrier, or `None` for any other atom.
///
/// Chain termini are not considered.
pub fn charge_sign(residue: &str, atom: &str, include_histidine: bool) -> Option<ChargeSign> {
    match (residue, atom) {
        ("ASP", "OD1" | "OD2") | ("GLU", "OE1" | "OE2") => Some(ChargeSign::Negative),
        ("LYS", "NZ") | ("ARG", "NH1" | "NH2" | "NE") => Some(ChargeSign::Positive),
        ("HIS", "ND1" | "NE2") if include_histidine => Some(ChargeSign::Positive),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeSite {
    pub chain_id: char,
    pub residue_seq: i32,
    pub insertion_code: char,
    pub residue_name: String,
    pub atom_name: String,
    pub position: Vec3,
    pub sign: ChargeSign,
}

/// Identity of the residue a site belongs to.
pub type ResidueKey = (char, i32, char);

impl ChargeSite {
    fn from_atom(atom: &AtomRecord, sign: ChargeSign) -> Self {
        Self {
            chain_id: atom.chain_id,
            residue_seq: atom.residue_seq,
            insertion_code: atom.insertion_code,
            residue_name: atom.residue_name.clone(),
            atom_name: atom.name.clone(),
            position: atom.position,
            sign,
        }
    }

    pub fn residue_key(&self) -> ResidueKey {
        (self.chain_id, self.residue_seq, self.insertion_code)
    }

    fn sort_key(&self) -> (char, i32, char, &str) {
        (
            self.chain_id,
            self.residue_seq,
            self.insertion_code,
            self.atom_name.as_str(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaltBridge {
    pub positive_site: ChargeSite,
    pub negative_site: ChargeSite,
    pub distance: f64,
}

impl SaltBridge {
    pub fn midpoint(&self) -> Vec3 {
        (self.positive_site.position + self.negative_site.position) * 0.5
    }

    pub fn residue_pair(&self) -> (ResidueKey, ResidueKey) {
        (
            self.positive_site.residue_key(),
            self.negative_site.residue_key(),
        )
    }

    /// The endpoint lying on `side` of the pair.
    pub fn site_on(&self, pair: &ComplexPair, side: Side) -> &ChargeSite {
        if pair.side_of(self.positive_site.chain_id) == Some(side) {
            &self.positive_site
        } else {
            &self.negative_site
        }
    }
}

/// All charged side-chain atoms of both partners, ordered by chain, residue
/// number and atom name. Hetero records never carry charges.
pub fn find_charge_sites(pair: &ComplexPair, config: &ChargeConfig) -> Vec<ChargeSite> {
    let mut sites: Vec<ChargeSite> = pair
        .structure
        .atoms()
        .filter(|a| !a.hetero && pair.side_of(a.chain_id).is_some())
        .filter_map(|a| {
            charge_sign(&a.residue_name, &a.name, config.include_histidine)
                .map(|s| ChargeSite::from_atom(a, s))
        })
        .collect();
    sites.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    sites
}

fn bridge_order(a: &SaltBridge, b: &SaltBridge) -> Ordering {
    a.distance
        .total_cmp(&b.distance)
        .then_with(|| a.positive_site.sort_key().cmp(&b.positive_site.sort_key()))
        .then_with(|| a.negative_site.sort_key().cmp(&b.negative_site.sort_key()))
}

/// Salt bridges spanning the receptor/ligand partition, one per residue pair
/// (the closest atom pair), sorted by ascending distance.
pub fn find_salt_bridges(
    pair: &ComplexPair,
    config: &ChargeConfig,
) -> Result<Vec<SaltBridge>, ChargeError> {
    let cutoff = config.cutoff;
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(ChargeError::InvalidCutoff(cutoff));
    }
    let sites = find_charge_sites(pair, config);
    let (positives, negatives): (Vec<_>, Vec<_>) =
        sites.iter().partition(|s| s.sign == ChargeSign::Positive);

    let mut best: BTreeMap<(ResidueKey, ResidueKey), SaltBridge> = BTreeMap::new();
    for p in &positives {
        for n in &negatives {
            if pair.side_of(p.chain_id) == pair.side_of(n.chain_id) {
                continue;
            }
            let distance = (p.position - n.position).norm();
            if distance > cutoff {
                continue;
            }
            let candidate = SaltBridge {
                positive_site: (*p).clone(),
                negative_site: (*n).clone(),
                distance,
            };
            best.entry((p.residue_key(), n.residue_key()))
                .and_modify(|b| {
                    if bridge_order(&candidate, b) == Ordering::Less {
                        *b = candidate.clone();
                    }
                })
                .or_insert(candidate);
        }
    }
    let mut bridges: Vec<SaltBridge> = best.into_values().collect();
    bridges.sort_by(bridge_order);
    if bridges.is_empty() {
        return Err(ChargeError::NoBridges { cutoff });
    }
    Ok(bridges)
}

/// Machine-readable bridge annotation for one complex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeReport {
    pub entry_id: String,
    pub cutoff: f64,
    pub charge_sites: usize,
    pub bridges: Vec<SaltBridge>,
}

impl BridgeReport {
    pub fn new(pair: &ComplexPair, config: &ChargeConfig, bridges: Vec<SaltBridge>) -> Self {
        Self {
            entry_id: pair.structure.entry_id.clone(),
            cutoff: config.cutoff,
            charge_sites: find_charge_sites(pair, config).len(),
            bridges,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# salt bridges for {} (cutoff {} A, {} charged sites)\n",
            self.entry_id, self.cutoff, self.charge_sites
        );
        for (i, b) in self.bridges.iter().enumerate() {
            let p = &b.positive_site;
            let n = &b.negative_site;
            let _ = writeln!(
                out,
                "{i:3}  {}:{}{}:{}  {}:{}{}:{}  {:.3}",
                p.chain_id,
                p.residue_name,
                p.residue_seq,
                p.atom_name,
                n.chain_id,
                n.residue_name,
                n.residue_seq,
                n.atom_name,
                b.distance
            );
        }
        out
    }
}
