//! Evaluate a metric's connection and curvature at a point.
//!
//! Metrics are given by coordinate expressions; all derivatives are exact
//! (forward-mode truncated series), so the curvature tensor printed here
//! carries no finite-difference error.
//!
//! ```bash
//! cargo run --release --example curvature_at_a_point
//! ```

use geodesic_mobility::error::Result;
use geodesic_mobility::{corpus, geometry, sampling};

fn main() -> Result<()> {
    for name in ["sphere2", "hyperbolic3", "example1"] {
        let m = corpus::get(name)?.metric;
        let p = sampling::base_point(&m, 42)?;
        let geo = geometry::riemann(&m, &p, 0)?;
        println!("{name} (dim {}) at {:?}", m.dim, p);
        println!("  signature        (+{}, -{})", geo.signature.0, geo.signature.1);
        println!("  max |Γ^i_jk|     {:.6}", {
            let n = m.dim;
            let mut w = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        w = w.max(geo.gamma_at(i, j, k).abs());
                    }
                }
            }
            w
        });
        println!("  max |R^i_jkl|    {:.6}", geo.max_abs_riemann());

        // sectional curvature of the x1-x2 plane, when it is nondegenerate:
        // K = R_1212 / (g_11 g_22 − g_12²)
        let low = geo.riemann_lower();
        let n = m.dim;
        let r1212 = low[((0 * n + 1) * n + 0) * n + 1];
        let denom = geo.g[(0, 0)] * geo.g[(1, 1)] - geo.g[(0, 1)] * geo.g[(0, 1)];
        if denom.abs() > 1e-12 {
            println!("  K(x1, x2 plane)  {:.6}", r1212 / denom);
        }
        println!();
    }
    Ok(())
}
