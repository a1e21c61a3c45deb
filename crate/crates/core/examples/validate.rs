//! Run every cross-check on a configuration file and print the report.
//!
//! Usage: cargo run --release --example validate [config.json]

use std::path::PathBuf;

use carpetlab::harness::{cmd_validate, RunConfig};

fn main() -> carpetlab::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/moving.json"));
    let report = cmd_validate(&RunConfig::load(&path)?)?;
    println!("{report}");
    if !report.passed {
        std::process::exit(3);
    }
    Ok(())
}
