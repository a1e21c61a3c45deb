//! Expand a Gaussian packet in box eigenmodes and follow its density.

use carpetlab::boxmodel::BoxConfig;
use carpetlab::numerics::{integrate_real, Quadrature};
use carpetlab::propagator::probability_direct;
use carpetlab::wavepacket::{auto_mode_cutoff, expand, GaussianPacket};

fn main() -> carpetlab::Result<()> {
    let cfg = BoxConfig::unit();
    let packet = GaussianPacket::from_scaled(&cfg, 0.3, 0.05, 25.0)?;
    let cutoff = auto_mode_cutoff(&packet, &cfg);
    let state = expand(&packet, &cfg, cutoff)?;
    println!(
        "M_max = {cutoff}, truncation residual = {:.3e}",
        state.truncation_residual()
    );

    for frac in [0.0, 0.1, 0.25, 0.5, 1.0] {
        let t = frac * cfg.revival_time();
        let norm = integrate_real(
            |x| probability_direct(&state, &cfg, x, t),
            0.0,
            1.0,
            Quadrature::default(),
        )?;
        let mean = integrate_real(
            |x| x * probability_direct(&state, &cfg, x, t),
            0.0,
            1.0,
            Quadrature::default(),
        )?;
        println!("t/T = {frac:<5} norm = {norm:.12}  <x>/L = {mean:.6}");
    }
    Ok(())
}
