//! Render the carpet of a packet at rest a quarter of the way into the box
//! as a 16-bit PGM, with its metadata sidecar.
//!
//! Usage: cargo run --release --example carpet_image [output.pgm]

use std::path::PathBuf;

use carpetlab::harness::{cmd_carpet, RunConfig};

fn main() -> carpetlab::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("carpet.pgm"));
    let mut config = RunConfig::gaussian(0.25, 0.05, 0.0);
    config.grid.nx = 256;
    config.grid.nt = 256;
    let run = cmd_carpet(&config, Some(&out))?;
    let (lo, hi) = run.grid.min_max();
    println!(
        "wrote {} ({}×{}, W in [{lo:.3e}, {hi:.3}])",
        run.path.display(),
        run.grid.nx,
        run.grid.nt
    );
    println!("metadata in {}", run.sidecar.display());
    Ok(())
}
