//! Fixture loading shared by the benchmarks.

use std::path::PathBuf;

use dockpuzzle_core::game::level_table;
use dockpuzzle_core::pdb::{parse_structure, select_pair};
use dockpuzzle_core::pipeline::{process_entry, EntryAssets, PipelineConfig};
use dockpuzzle_core::{ComplexPair, LevelPack};

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn default_config() -> PipelineConfig {
    PipelineConfig::load(&workspace_root().join("pipeline.toml")).expect("default config loads")
}

/// Parse one configured entry straight from its PDB file, bypassing the cache.
pub fn load_entry(config: &PipelineConfig, code: &str) -> (ComplexPair, EntryAssets) {
    let stanza = config.entry(code).expect("entry configured");
    let text =
        std::fs::read_to_string(config.pdb_dir.join(stanza.file_name())).expect("fixture readable");
    let structure = parse_structure(&text).expect("fixture parses");
    let pair = select_pair(
        &structure,
        &stanza.receptor_chains.iter().copied().collect(),
        &stanza.ligand_chains.iter().copied().collect(),
    )
    .expect("chains present");
    let assets = process_entry(&structure, stanza, config).expect("entry slices");
    (pair, assets)
}

pub fn fixture_pack(config: &PipelineConfig) -> LevelPack {
    let pieces = config
        .entries
        .iter()
        .flat_map(|e| {
            let (_, a) = load_entry(config, &e.pdb_code);
            [a.receptor, a.ligand]
        })
        .collect();
    LevelPack::new(config.pack_id.clone(), level_table(), pieces)
}
