//! List the strongest trace families of a packet at rest and of a moving one.

use carpetlab::boxmodel::BoxConfig;
use carpetlab::carpet::{trace_catalog, TraceClass};
use carpetlab::wavepacket::GaussianPacket;

fn main() -> carpetlab::Result<()> {
    let cfg = BoxConfig::unit();
    for kbar in [0.0, 20.0 * std::f64::consts::PI] {
        let packet = GaussianPacket::from_scaled(&cfg, 0.25, 0.05, kbar)?;
        let events = trace_catalog(&packet, &cfg, 1e-3)?;
        println!(
            "k̄L = {kbar:.3}: {} families above 1e-3 of the strongest",
            events.len()
        );
        for class in [
            TraceClass::Classical,
            TraceClass::Mirror,
            TraceClass::Interference,
        ] {
            for e in events.iter().filter(|e| e.term_class == class).take(4) {
                println!(
                    "  {:<12} n = {:>3} l = {:>2} from x/L = {:.2}  weight {:.4}  {:?}",
                    format!("{:?}", e.term_class),
                    e.n,
                    e.l,
                    e.origin_x_over_length,
                    e.weight,
                    e.classification
                );
            }
        }
    }
    Ok(())
}
