//! The kernel's double sum over eigenmode pairs against its regrouping into
//! Dirichlet kernels along spacetime lines.

use carpetlab::boxmodel::BoxConfig;
use carpetlab::propagator::{
    d_pair_sum_truncated, d_resummed_terms, d_resummed_truncated, kernel_truncated, DArgs, DRoute,
    DTruncation,
};

fn main() {
    let trunc = DTruncation { k_m: 24, k_k: 24 };
    let args = DArgs {
        eta: 0.21,
        zeta: -0.37,
        xi: 0.4,
        tau: 0.113,
    };
    let pair = d_pair_sum_truncated(&args, &trunc);
    let lines = d_resummed_truncated(&args, &trunc);
    println!("pair sum   = {pair:.12}");
    println!("regrouped  = {lines:.12}");
    println!("difference = {:.3e}", (pair - lines).norm());

    let mut terms = d_resummed_terms(&args, &trunc);
    terms.sort_by(|a, b| b.1.norm().total_cmp(&a.1.norm()));
    println!("largest line contributions:");
    for (n, value) in terms.iter().take(5) {
        println!("  n = {n:>3}: {value:.6}");
    }

    let cfg = BoxConfig::unit();
    let a = kernel_truncated(&cfg, 0.3, 0.2, 0.45, 0.6, &trunc, DRoute::PairSum);
    let b = kernel_truncated(&cfg, 0.3, 0.2, 0.45, 0.6, &trunc, DRoute::Resummed);
    println!("kernel via pairs {a:.10}, via lines {b:.10}");
}
