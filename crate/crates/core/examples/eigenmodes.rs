//! Spectrum, eigenfunctions and revival time of the box.

use carpetlab::boxmodel::{eigenfunction, eigenphase, BoxConfig};

fn main() -> carpetlab::Result<()> {
    let cfg = BoxConfig::new(1.0, 2.0, 1.0)?;
    println!("revival time T = {:.12}", cfg.revival_time());
    for m in 1..=4 {
        let samples: Vec<String> = [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|f| format!("{:+.6}", eigenfunction(&cfg, m, f * cfg.length()).unwrap()))
            .collect();
        println!(
            "m = {m}: phase at T/8 = {:.6} rad, u_m at x/L = 0, 1/4, 1/2, 3/4, 1: {}",
            eigenphase(&cfg, m, cfg.revival_time() / 8.0),
            samples.join(" ")
        );
    }
    Ok(())
}
