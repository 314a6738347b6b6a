mod common;

use std::collections::BTreeMap;

use common::{fixture_text, oracle_atoms, structure, CODES};

/// (code, chain, atoms, residues, hetero atoms), counted with an independent
/// column reader and frozen.
const GOLDEN: &[(&str, char, usize, usize, usize)] = &[
    ("1acb", 'A', 1767, 241, 0),
    ("1acb", 'B', 522, 63, 0),
    ("1atn", 'A', 2897, 371, 0),
    ("1atn", 'B', 2034, 258, 0),
    ("1avx", 'A', 1687, 223, 0),
    ("1avx", 'B', 1265, 172, 0),
    ("1buh", 'A', 2311, 287, 0),
    ("1buh", 'B', 605, 70, 0),
    ("1bvn", 'A', 3907, 496, 0),
    ("1bvn", 'B', 536, 71, 0),
    ("1emv", 'A', 651, 83, 0),
    ("1emv", 'B', 1039, 131, 0),
    ("1fss", 'A', 4103, 537, 0),
    ("1fss", 'B', 470, 61, 0),
    ("1grn", 'A', 1474, 191, 0),
    ("1grn", 'B', 1504, 198, 0),
    ("2ptc", 'E', 1743, 224, 1),
    ("2ptc", 'I', 440, 58, 0),
    ("4kc3", 'A', 1244, 159, 0),
    ("4kc3", 'B', 2383, 310, 0),
];

#[test]
fn parser_counts_match_frozen_golden() {
    for &(code, chain, atoms, residues, het) in GOLDEN {
        let s = structure(code);
        let c = s
            .chain(chain)
            .unwrap_or_else(|| panic!("{code} lacks chain {chain}"));
        assert_eq!(c.atoms().count(), atoms, "{code}:{chain} atoms");
        assert_eq!(c.residues.len(), residues, "{code}:{chain} residues");
        assert_eq!(
            c.atoms().filter(|a| a.hetero).count(),
            het,
            "{code}:{chain} hetero"
        );
    }
}

#[test]
fn parser_agrees_with_oracle_reader_atom_by_atom() {
    for code in CODES {
        let oracle = oracle_atoms(&fixture_text(code));
        let parsed: Vec<_> = structure(code).atoms().cloned().collect();
        assert_eq!(parsed.len(), oracle.len(), "{code}");
        let mut by_chain: BTreeMap<char, usize> = BTreeMap::new();
        for o in &oracle {
            *by_chain.entry(o.chain).or_default() += 1;
        }
        let s = structure(code);
        for (chain, n) in by_chain {
            assert_eq!(s.chain(chain).unwrap().atoms().count(), n, "{code}:{chain}");
        }
        // Chains are stored grouped, so compare as multisets keyed by identity.
        let key = |chain: char, res: &str, name: &str| format!("{chain}|{}|{name}", res.trim());
        let mut want: BTreeMap<String, [f64; 3]> = BTreeMap::new();
        for o in &oracle {
            want.insert(key(o.chain, &o.res_id, &o.name), o.xyz);
        }
        for a in &parsed {
            let res = format!("{}{}", a.residue_seq, a.insertion_code);
            let xyz = want
                .get(&key(a.chain_id, &res, &a.name))
                .unwrap_or_else(|| panic!("{code}: unexpected atom {res} {}", a.name));
            for (k, want) in xyz.iter().enumerate() {
                assert_eq!(a.position[k], *want, "{code} {res} {}", a.name);
            }
        }
    }
}

#[test]
fn every_fixture_has_the_configured_chains() {
    let cfg = common::config();
    assert!(cfg.missing_reference_entries().is_empty());
    assert_eq!(cfg.entries.len(), 10);
    for e in &cfg.entries {
        let s = structure(&e.pdb_code);
        for c in e.receptor_chains.iter().chain(&e.ligand_chains) {
            assert!(s.chain(*c).is_some(), "{} chain {c}", e.pdb_code);
        }
    }
}
