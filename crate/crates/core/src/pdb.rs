//! Fixed-column PDB ingestion and docking-partner selection.
//!
//! Only ATOM/HETATM records of the first model are read. Alternate locations
//! other than ' ' and 'A' are dropped, as are waters. Non-water hetero atoms
//! are kept but flagged so later stages can ignore them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdbError {
    #[error("malformed record at line {line_no}: {reason}")]
    MalformedRecord { line_no: usize, reason: String },
    #[error("no atoms survived filtering")]
    EmptyStructure,
    #[error("unknown chain '{0}'")]
    UnknownChain(char),
    #[error("receptor and ligand selections overlap")]
    OverlappingSelection,
    #[error("empty chain selection")]
    EmptySelection,
}

/// One parsed ATOM or HETATM record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomRecord {
    pub serial: i64,
    pub name: String,
    pub alt_loc: char,
    pub residue_name: String,
    pub chain_id: char,
    pub residue_seq: i32,
    pub insertion_code: char,
    pub position: Vec3,
    pub element: String,
    pub hetero: bool,
    /// 1-based line number in the source text.
    pub line_no: usize,
}

impl AtomRecord {
    pub fn is_hydrogen(&self) -> bool {
        self.element == "H" || self.element == "D"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueModel {
    pub name: String,
    pub seq: i32,
    pub insertion_code: char,
    pub atoms: Vec<AtomRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainModel {
    pub chain_id: char,
    pub residues: Vec<ResidueModel>,
}

impl ChainModel {
    pub fn atoms(&self) -> impl Iterator<Item = &AtomRecord> {
        self.residues.iter().flat_map(|r| r.atoms.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureModel {
    pub entry_id: String,
    pub chains: Vec<ChainModel>,
}

impl StructureModel {
    pub fn chain(&self, id: char) -> Option<&ChainModel> {
        self.chains.iter().find(|c| c.chain_id == id)
    }

    pub fn chain_ids(&self) -> Vec<char> {
        self.chains.iter().map(|c| c.chain_id).collect()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &AtomRecord> {
        self.chains.iter().flat_map(|c| c.atoms())
    }

    pub fn atom_count(&self) -> usize {
        self.atoms().count()
    }
}

/// Which docking partner a chain (or piece) belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Receptor,
    Ligand,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Receptor => Side::Ligand,
            Side::Ligand => Side::Receptor,
        }
    }
}

/// The two docking partners of a complex, restricted to the selected chains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexPair {
    pub receptor: BTreeSet<char>,
    pub ligand: BTreeSet<char>,
    pub structure: StructureModel,
}

impl ComplexPair {
    pub fn side_of(&self, chain_id: char) -> Option<Side> {
        if self.receptor.contains(&chain_id) {
            Some(Side::Receptor)
        } else if self.ligand.contains(&chain_id) {
            Some(Side::Ligand)
        } else {
            None
        }
    }

    /// Atoms of one partner, in structure order.
    pub fn side_atoms(&self, side: Side) -> impl Iterator<Item = &AtomRecord> {
        let chains = match side {
            Side::Receptor => &self.receptor,
            Side::Ligand => &self.ligand,
        };
        self.structure
            .chains
            .iter()
            .filter(move |c| chains.contains(&c.chain_id))
            .flat_map(|c| c.atoms())
    }

    /// Heavy, non-hetero atoms of one partner; the set every geometric stage works on.
    pub fn side_heavy_atoms(&self, side: Side) -> Vec<&AtomRecord> {
        self.side_atoms(side)
            .filter(|a| !a.hetero && !a.is_hydrogen())
            .collect()
    }

    /// Copy with receptor and ligand roles exchanged.
    pub fn swapped(&self) -> ComplexPair {
        ComplexPair {
            receptor: self.ligand.clone(),
            ligand: self.receptor.clone(),
            structure: self.structure.clone(),
        }
    }
}

fn column(line: &str, start: usize, end: usize) -> &str {
    // 1-based inclusive columns; short lines yield empty/partial fields.
    let bytes = line.as_bytes();
    let s = (start - 1).min(bytes.len());
    let e = end.min(bytes.len());
    line.get(s..e).unwrap_or("")
}

fn column_char(line: &str, col: usize) -> char {
    column(line, col, col).chars().next().unwrap_or(' ')
}

fn parse_f64(
    line: &str,
    start: usize,
    end: usize,
    line_no: usize,
    what: &str,
) -> Result<f64, PdbError> {
    let raw = column(line, start, end).trim();
    let value: f64 = raw.parse().map_err(|_| PdbError::MalformedRecord {
        line_no,
        reason: format!("{what} field {raw:?} is not a number"),
    })?;
    if !value.is_finite() {
        return Err(PdbError::MalformedRecord {
            line_no,
            reason: format!("{what} field is not finite"),
        });
    }
    Ok(value)
}

/// Parse one ATOM/HETATM line. `line_no` is 1-based.
pub fn parse_atom_line(line: &str, line_no: usize) -> Result<AtomRecord, PdbError> {
    let hetero = line.starts_with("HETATM");
    let name = column(line, 13, 16).trim().to_string();
    if name.is_empty() {
        return Err(PdbError::MalformedRecord {
            line_no,
            reason: "empty atom name".into(),
        });
    }
    let residue_seq: i32 =
        column(line, 23, 26)
            .trim()
            .parse()
            .map_err(|_| PdbError::MalformedRecord {
                line_no,
                reason: "residue sequence number is not an integer".into(),
            })?;
    let x = parse_f64(line, 31, 38, line_no, "x")?;
    let y = parse_f64(line, 39, 46, line_no, "y")?;
    let z = parse_f64(line, 47, 54, line_no, "z")?;
    // Large files overflow the serial field (hybrid-36); fall back to the line number.
    let serial = column(line, 7, 11).trim().parse().unwrap_or(line_no as i64);
    let element = {
        let raw = column(line, 77, 78).trim();
        if raw.is_empty() {
            name.chars()
                .find(|c| c.is_ascii_alphabetic())
                .map(|c| c.to_ascii_uppercase().to_string())
                .unwrap_or_default()
        } else {
            raw.to_ascii_uppercase()
        }
    };
    if element.is_empty() {
        return Err(PdbError::MalformedRecord {
            line_no,
            reason: "no element symbol".into(),
        });
    }
    Ok(AtomRecord {
        serial,
        name,
        alt_loc: column_char(line, 17),
        residue_name: column(line, 18, 20).trim().to_string(),
        chain_id: column_char(line, 22),
        residue_seq,
        insertion_code: column_char(line, 27),
        position: Vec3::new(x, y, z),
        element,
        hetero,
        line_no,
    })
}

/// Parse full PDB file contents into a [`StructureModel`].
///
/// Chains appear in first-seen order; a chain that reappears later (e.g.
/// hetero groups listed after all TER records) is merged into its earlier
/// entry so chain ids stay unique.
pub fn parse_structure(text: &str) -> Result<StructureModel, PdbError> {
    let mut entry_id = String::from("UNKN");
    let mut chains: Vec<ChainModel> = Vec::new();
    let mut seen_model = false;

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.starts_with("HEADER") {
            let code = column(line, 63, 66).trim();
            if !code.is_empty() {
                entry_id = code.to_ascii_lowercase();
            }
            continue;
        }
        if line.starts_with("MODEL") {
            if seen_model {
                break;
            }
            seen_model = true;
            continue;
        }
        if line.starts_with("ENDMDL") {
            break;
        }
        if !(line.starts_with("ATOM  ") || line.starts_with("HETATM")) {
            continue;
        }
        let atom = parse_atom_line(line, line_no)?;
        if !matches!(atom.alt_loc, ' ' | 'A') {
            continue;
        }
        if atom.hetero && matches!(atom.residue_name.as_str(), "HOH" | "WAT" | "DOD") {
            continue;
        }

        let chain = match chains.iter_mut().position(|c| c.chain_id == atom.chain_id) {
            Some(i) => &mut chains[i],
            None => {
                chains.push(ChainModel {
                    chain_id: atom.chain_id,
                    residues: Vec::new(),
                });
                chains.last_mut().expect("just pushed")
            }
        };
        let same_residue = chain.residues.last().is_some_and(|r| {
            r.seq == atom.residue_seq
                && r.insertion_code == atom.insertion_code
                && r.name == atom.residue_name
        });
        if same_residue {
            chain.residues.last_mut().expect("checked").atoms.push(atom);
        } else {
            chain.residues.push(ResidueModel {
                name: atom.residue_name.clone(),
                seq: atom.residue_seq,
                insertion_code: atom.insertion_code,
                atoms: vec![atom],
            });
        }
    }

    if chains.iter().all(|c| c.residues.is_empty()) {
        return Err(PdbError::EmptyStructure);
    }
    Ok(StructureModel { entry_id, chains })
}

/// Restrict a structure to the two docking partners.
pub fn select_pair(
    structure: &StructureModel,
    receptor_sel: &BTreeSet<char>,
    ligand_sel: &BTreeSet<char>,
) -> Result<ComplexPair, PdbError> {
    if receptor_sel.is_empty() || ligand_sel.is_empty() {
        return Err(PdbError::EmptySelection);
    }
    if let Some(&missing) = receptor_sel
        .iter()
        .chain(ligand_sel.iter())
        .find(|id| structure.chain(**id).is_none())
    {
        return Err(PdbError::UnknownChain(missing));
    }
    if !receptor_sel.is_disjoint(ligand_sel) {
        return Err(PdbError::OverlappingSelection);
    }
    let chains = structure
        .chains
        .iter()
        .filter(|c| receptor_sel.contains(&c.chain_id) || ligand_sel.contains(&c.chain_id))
        .cloned()
        .collect();
    Ok(ComplexPair {
        receptor: receptor_sel.clone(),
        ligand: ligand_sel.clone(),
        structure: StructureModel {
            entry_id: structure.entry_id.clone(),
            chains,
        },
    })
}
