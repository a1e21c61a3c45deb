//! Propagate a packet by integrating the truncated Green's function against
//! it, and compare with the eigenmode sum.

use carpetlab::boxmodel::BoxConfig;
use carpetlab::numerics::{integrate, Quadrature};
use carpetlab::propagator::{evolve, green_truncated};
use carpetlab::wavepacket::{auto_mode_cutoff, expand, GaussianPacket, InitialState};

fn main() -> carpetlab::Result<()> {
    let cfg = BoxConfig::unit();
    let packet = GaussianPacket::from_scaled(&cfg, 0.5, 0.06, -10.0)?;
    let cutoff = auto_mode_cutoff(&packet, &cfg);
    let state = expand(&packet, &cfg, cutoff)?;
    let t = 0.13 * cfg.revival_time();
    for x in [0.1, 0.35, 0.5, 0.8] {
        let chained = integrate(
            |xs| green_truncated(&cfg, x, t, xs, cutoff) * packet.amplitude(xs),
            0.0,
            1.0,
            Quadrature::default(),
        )?
        .value;
        let direct = evolve(&state, &cfg, x, t);
        println!(
            "x = {x:<4} ∫Gφ = {chained:.10}  Σψ_m = {direct:.10}  |Δ| = {:.2e}",
            (chained - direct).norm()
        );
    }
    Ok(())
}
