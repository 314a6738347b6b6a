#![allow(dead_code)]

pub mod messages;
pub mod score;

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::PathBuf;
use std::sync::OnceLock;

use dockpuzzle_core::charges::{find_salt_bridges, ChargeConfig};
use dockpuzzle_core::game::level_table;
use dockpuzzle_core::pdb::{parse_structure, select_pair};
use dockpuzzle_core::pipeline::{process_entry, EntryAssets, PipelineConfig};
use dockpuzzle_core::{ComplexPair, LevelPack, StructureModel, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CODES: [&str; 10] = [
    "1acb", "1atn", "1avx", "1buh", "1bvn", "1emv", "1fss", "1grn", "2ptc", "4kc3",
];

pub fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn config() -> PipelineConfig {
    PipelineConfig::load(&root().join("pipeline.toml")).expect("default config loads")
}

pub fn fixture_text(code: &str) -> String {
    std::fs::read_to_string(root().join("fixtures/pdb").join(format!("{code}.pdb")))
        .expect("fixture readable")
}

pub fn structure(code: &str) -> StructureModel {
    parse_structure(&fixture_text(code)).expect("fixture parses")
}

pub fn pair(code: &str) -> ComplexPair {
    let cfg = config();
    let stanza = cfg.entry(code).unwrap();
    select_pair(
        &structure(code),
        &stanza.receptor_chains.iter().copied().collect(),
        &stanza.ligand_chains.iter().copied().collect(),
    )
    .unwrap()
}

pub struct Built {
    pub pair: ComplexPair,
    pub assets: EntryAssets,
}

/// Every fixture sliced once per test binary.
pub fn built() -> &'static BTreeMap<String, Built> {
    static CELL: OnceLock<BTreeMap<String, Built>> = OnceLock::new();
    CELL.get_or_init(|| {
        let cfg = config();
        let handles: Vec<_> = CODES
            .iter()
            .map(|code| {
                let cfg = cfg.clone();
                std::thread::spawn(move || {
                    let s = structure(code);
                    let stanza = cfg.entry(code).unwrap();
                    let assets = process_entry(&s, stanza, &cfg).expect("entry slices");
                    (
                        code.to_string(),
                        Built {
                            pair: pair(code),
                            assets,
                        },
                    )
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    })
}

pub fn fixture_pack() -> LevelPack {
    let pieces = built()
        .values()
        .flat_map(|b| [b.assets.receptor.clone(), b.assets.ligand.clone()])
        .collect();
    LevelPack::new("default", level_table(), pieces)
}

/// Minimal fixed-column reader written independently of the library parser:
/// first model only, blank or `A` alternates, waters dropped.
#[derive(Debug, Clone)]
pub struct OracleAtom {
    pub hetero: bool,
    pub name: String,
    pub res_name: String,
    pub chain: char,
    pub res_id: String,
    pub xyz: [f64; 3],
    pub element: String,
}

pub fn oracle_atoms(text: &str) -> Vec<OracleAtom> {
    let mut out = Vec::new();
    for line in text.lines() {
        if line.starts_with("ENDMDL") {
            break;
        }
        let het = line.starts_with("HETATM");
        if !(line.starts_with("ATOM  ") || het) {
            continue;
        }
        let col = |a: usize, b: usize| line.get(a..b.min(line.len())).unwrap_or("");
        let alt = col(16, 17);
        if !(alt == " " || alt == "A" || alt.is_empty()) {
            continue;
        }
        let res_name = col(17, 20).trim().to_string();
        if res_name == "HOH" {
            continue;
        }
        let name = col(12, 16).trim().to_string();
        let mut element = col(76, 78).trim().to_uppercase();
        if element.is_empty() {
            element = name
                .chars()
                .find(|c| c.is_ascii_alphabetic())
                .unwrap()
                .to_string();
        }
        out.push(OracleAtom {
            hetero: het,
            name,
            res_name,
            chain: col(21, 22).chars().next().unwrap(),
            res_id: col(22, 27).to_string(),
            xyz: [
                col(30, 38).trim().parse().unwrap(),
                col(38, 46).trim().parse().unwrap(),
                col(46, 54).trim().parse().unwrap(),
            ],
            element,
        });
    }
    out
}

pub fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// +1 / -1 for charged side-chain atoms, independent of the library table.
pub fn oracle_sign(res: &str, atom: &str) -> i32 {
    let negative = [
        ("ASP", "OD1"),
        ("ASP", "OD2"),
        ("GLU", "OE1"),
        ("GLU", "OE2"),
    ];
    let positive = [
        ("LYS", "NZ"),
        ("ARG", "NE"),
        ("ARG", "NH1"),
        ("ARG", "NH2"),
        ("HIS", "ND1"),
        ("HIS", "NE2"),
    ];
    if negative.contains(&(res, atom)) {
        -1
    } else if positive.contains(&(res, atom)) {
        1
    } else {
        0
    }
}

pub type ResKey = (char, String);

/// All-pairs scan: closest opposite-sign atom pair per residue pair across the
/// receptor/ligand partition.
pub fn brute_force_bridges(code: &str, cutoff: f64) -> BTreeMap<(ResKey, ResKey), f64> {
    let cfg = config();
    let stanza = cfg.entry(code).unwrap();
    let atoms: Vec<_> = oracle_atoms(&fixture_text(code))
        .into_iter()
        .filter(|a| !a.hetero && oracle_sign(&a.res_name, &a.name) != 0)
        .collect();
    let side = |c: char| {
        if stanza.receptor_chains.contains(&c) {
            Some(0)
        } else if stanza.ligand_chains.contains(&c) {
            Some(1)
        } else {
            None
        }
    };
    let mut best: BTreeMap<(ResKey, ResKey), f64> = BTreeMap::new();
    for a in &atoms {
        for b in &atoms {
            if oracle_sign(&a.res_name, &a.name) != 1 || oracle_sign(&b.res_name, &b.name) != -1 {
                continue;
            }
            let (Some(sa), Some(sb)) = (side(a.chain), side(b.chain)) else {
                continue;
            };
            if sa == sb {
                continue;
            }
            let d = dist(&a.xyz, &b.xyz);
            if d <= cutoff {
                let k = (
                    (a.chain, a.res_id.trim().to_string()),
                    (b.chain, b.res_id.trim().to_string()),
                );
                let e = best.entry(k).or_insert(f64::INFINITY);
                *e = e.min(d);
            }
        }
    }
    best
}

pub fn module_bridges(code: &str, cutoff: f64) -> Vec<((ResKey, ResKey), f64)> {
    let cfg = ChargeConfig {
        cutoff,
        ..ChargeConfig::default()
    };
    let key = |c: char, seq: i32, ins: char| (c, format!("{seq}{ins}").trim().to_string());
    match find_salt_bridges(&pair(code), &cfg) {
        Ok(list) => list
            .iter()
            .map(|b| {
                let p = &b.positive_site;
                let n = &b.negative_site;
                (
                    (
                        key(p.chain_id, p.residue_seq, p.insertion_code),
                        key(n.chain_id, n.residue_seq, n.insertion_code),
                    ),
                    b.distance,
                )
            })
            .collect(),
        Err(_) => Vec::new(),
    }
}

pub fn residual(points: &[(Vec3, f64)], origin: &Vec3, normal: &Vec3) -> f64 {
    let n = normal / normal.norm();
    points
        .iter()
        .map(|(p, w)| w * (p - origin).dot(&n).powi(2))
        .sum()
}

pub fn weighted_centroid(points: &[(Vec3, f64)]) -> Vec3 {
    let total: f64 = points.iter().map(|(_, w)| w).sum();
    points.iter().map(|(p, w)| p * *w).sum::<Vec3>() / total
}

pub fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..TAU);
    let r = (1.0 - z * z).sqrt();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

/// A flattened, noisy, randomly oriented contact-like cloud with weights 1 or 3.
pub fn cloud(seed: u64, n: usize, spread: f64, thickness: f64) -> Vec<(Vec3, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = random_unit(&mut rng);
    let helper = if normal.x.abs() < 0.9 {
        Vec3::x()
    } else {
        Vec3::y()
    };
    let u = normal.cross(&helper).normalize();
    let v = normal.cross(&u);
    let center = Vec3::new(
        rng.random_range(-50.0..50.0),
        rng.random_range(-50.0..50.0),
        rng.random_range(-50.0..50.0),
    );
    (0..n)
        .map(|_| {
            let p = center
                + u * rng.random_range(-spread..spread)
                + v * rng.random_range(-0.6 * spread..0.6 * spread)
                + normal * rng.random_range(-thickness..thickness);
            let w = if rng.random_bool(0.1) { 3.0 } else { 1.0 };
            (p, w)
        })
        .collect()
}
