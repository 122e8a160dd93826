#![allow(dead_code)]

pub mod cypher_grammar;

use std::path::PathBuf;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn kgforge() -> std::process::Command {
    let mut cmd = std::process::Command::new(env!("CARGO_BIN_EXE_kgforge"));
    cmd.env_remove("ONTOLOGY_API_KEY").env("RUST_LOG", "error");
    cmd
}

/// Copies the recorded ontology cache so tests cannot modify the fixture.
pub fn cache_copy(dir: &std::path::Path) -> PathBuf {
    let target = dir.join("cache");
    std::fs::create_dir_all(&target).unwrap();
    for entry in std::fs::read_dir(fixtures().join("cache")).unwrap() {
        let entry = entry.unwrap();
        std::fs::copy(entry.path(), target.join(entry.file_name())).unwrap();
    }
    target
}
