//! The cone route to the degree of mobility, and metrics built to realize
//! a prescribed degree.
//!
//! Solutions of the mobility system with B = −1 over a base (M, g)
//! correspond exactly to parallel symmetric (0,2)-tensors on the cone
//! dr² + r²g.  Counting parallel forms on the cone therefore recovers D(g),
//! and the holonomy decomposition of the cone reveals the structure
//! constants k and ℓ with D = k(k+1)/2 + ℓ.
//!
//! The `realization(n, k, [k1,…,kℓ])` corpus entries go the other way: they
//! glue a flat factor ℝ^k with ℓ cone factors into an (n+1)-dimensional
//! cone whose base metric has exactly the prescribed degree.
//!
//! ```bash
//! cargo run --release --example mobility_via_cones
//! ```

use geodesic_mobility::error::Result;
use geodesic_mobility::mobility;
use geodesic_mobility::prolong::ProlongOpts;
use geodesic_mobility::corpus;

fn main() -> Result<()> {
    let opts = ProlongOpts::default();

    // constant-curvature bases short-circuit: their cones are flat
    let s2 = corpus::get("sphere2")?.metric;
    let rep = mobility::cone_mobility(&s2, &opts)?;
    println!(
        "sphere2 via cone: D = {}, constant curvature = {}, route = {}",
        rep.d, rep.constant_curvature, rep.route
    );

    println!("\nrealization metrics (n-dim base with D = k(k+1)/2 + ℓ):");
    for name in [
        "realization(7,0,[4,4])",
        "realization(5,2,[4])",
        "realization(8,0,[3,3,3])",
        "realization(6,1,[3,3])",
    ] {
        let e = corpus::get(name)?;
        let n = e.metric.dim - 1;
        let rep = mobility::cone_mobility_of_total(&e.metric, n, name, &opts)?;
        println!(
            "  {name:26}  D = {}  (k = {:?}, ℓ = {:?}, bounds ok = {:?})",
            rep.d, rep.k, rep.ell, rep.bounds_ok
        );
    }

    // number of essential projective transformations is D − 1 generically
    let e = corpus::get("realization(5,2,[4])")?;
    let rep = mobility::cone_mobility_of_total(&e.metric, 5, &e.name, &opts)?;
    let iso = mobility::proj_iso_report(&rep);
    println!(
        "\nprojective symmetry count for realization(5,2,[4]): expected {} (band {:?})",
        iso.expected, iso.band
    );
    Ok(())
}
