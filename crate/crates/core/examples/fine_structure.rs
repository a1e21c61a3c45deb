//! Transverse cuts through the two main diagonals of a moving packet's
//! carpet, split into classical, mirror and interference parts.

use carpetlab::boxmodel::BoxConfig;
use carpetlab::carpet::{term_decomposition, uniform, LineTruncation};
use carpetlab::wavepacket::GaussianPacket;

fn main() -> carpetlab::Result<()> {
    let cfg = BoxConfig::unit();
    let packet = GaussianPacket::from_scaled(&cfg, 0.25, 0.05, 20.0 * std::f64::consts::PI)?;
    let tau = 0.157;
    let t = tau * cfg.revival_time();
    let trunc = LineTruncation::auto(&packet, &cfg, t);
    for (label, center) in [("n = +1", 2.0 * tau), ("n = -1", 1.0 - 2.0 * tau)] {
        println!("{label} diagonal at t/T = {tau}, x/L around {center:.3}");
        println!(
            "{:>9} {:>12} {:>12} {:>12}",
            "x/L", "classical", "mirror", "interference"
        );
        for x in uniform((center - 0.04, center + 0.04), 17) {
            let parts = term_decomposition(&packet, &cfg, x, t, &trunc);
            println!(
                "{x:>9.4} {:>12.5} {:>12.5} {:>12.5}",
                parts.classical, parts.mirror, parts.interference
            );
        }
    }
    Ok(())
}
