//! Shared helpers for the integration and acceptance suites.
#![allow(dead_code)]

use std::path::PathBuf;

/// Directory holding the user-supplied benchmark CSVs. Defaults to
/// `<workspace>/data`, overridable with MOLBENCH_DATA_DIR.
pub fn data_dir() -> PathBuf {
    match std::env::var("MOLBENCH_DATA_DIR") {
        Ok(dir) => PathBuf::from(dir),
        Err(_) => PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"),
    }
}

/// Resolve a dataset file. `None` means the file is absent and the caller
/// should skip (or fail when MOLBENCH_REQUIRE_DATA=1).
pub fn dataset_path(name: &str, criterion: &str) -> Option<PathBuf> {
    let path = data_dir().join(name);
    if path.exists() {
        return Some(path);
    }
    if std::env::var("MOLBENCH_REQUIRE_DATA").ok().as_deref() == Some("1") {
        panic!("{criterion}: required dataset {name} not found at {}", path.display());
    }
    println!(
        "{criterion} SKIP: dataset {name} not found at {} (supply it or set MOLBENCH_DATA_DIR; see README)",
        path.display()
    );
    None
}
