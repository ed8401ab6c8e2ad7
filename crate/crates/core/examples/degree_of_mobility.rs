//! Compute the degree of mobility D(g): the dimension of the space of
//! solutions (a, λ, μ) of the linear system
//!
//!     a_{ij;k} = λ_i g_{jk} + λ_j g_{ik}
//!     λ_{i;j}  = μ g_{ij} + B a_{ij}
//!     μ_{,i}   = 2 B λ_i
//!
//! for a constant B.  D counts the essentially different metrics sharing
//! geodesics with g.  The engine closes the system into a connection on the
//! fiber (a_{i≤j}, λ, μ) and measures the flat-section space by rank.
//!
//! ```bash
//! cargo run --release --example degree_of_mobility
//! ```

use geodesic_mobility::error::Result;
use geodesic_mobility::mobility;
use geodesic_mobility::prolong::ProlongOpts;
use geodesic_mobility::corpus;

fn main() -> Result<()> {
    let opts = ProlongOpts::default();

    // flat space attains the maximum (n+1)(n+2)/2
    for (name, b) in [("flat3", 0.0), ("sphere2", -1.0), ("sphere3", -1.0), ("hyperbolic2", 1.0)] {
        let m = corpus::get(name)?.metric;
        let rep = mobility::degree(&m, b, &opts)?;
        let max = (m.dim + 1) * (m.dim + 2) / 2;
        println!(
            "{name:12} B = {b:5.1}:  D = {:2}   (maximum for dim {} is {max})",
            rep.d, m.dim
        );
    }

    // when B is unknown, scan a grid and keep the value maximizing D
    println!("\nsearching B for sphere2:");
    let s2 = corpus::get("sphere2")?.metric;
    let search = mobility::search_b(&s2, &opts)?;
    println!(
        "  best B = {}  with D = {}  ({} grid values conclusive, {} inconclusive)",
        search.best_b,
        search.best_dim,
        search.results.len(),
        search.inconclusive.len()
    );
    let shown: Vec<String> = search
        .results
        .iter()
        .filter(|(_, d)| *d > 1)
        .map(|(b, d)| format!("B = {b}: D = {d}"))
        .collect();
    println!("  grid values with D > 1: {}", shown.join(", "));
    Ok(())
}
