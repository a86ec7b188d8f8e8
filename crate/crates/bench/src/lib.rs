//! Shared fixtures for benchmarks.

use endwalk::gensys::{build_system, BuildOptions, PolynomialSystem};
use endwalk::GraphTemplate;

pub fn data_path(name: &str) -> String {
    format!("{}/../../data/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

pub fn template(name: &str) -> GraphTemplate {
    GraphTemplate::from_path(data_path(name)).expect("bundled template")
}

pub fn system(name: &str) -> PolynomialSystem {
    build_system(&template(name), BuildOptions::default()).expect("bundled template builds")
}
