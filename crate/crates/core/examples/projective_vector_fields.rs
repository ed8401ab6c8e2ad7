//! Test whether a vector field preserves the geodesics of a metric.
//!
//! For a field v the engine forms the candidate solution
//!     a^v = L_v g − 1/(n+1) · tr(g⁻¹ L_v g) · g
//! with λ read off from the trace identity, then checks the defining
//! equation a_{ij;k} = λ_i g_jk + λ_j g_ik at sample points.  The residual
//! vanishes exactly when v is projective for g.
//!
//! ```bash
//! cargo run --release --example projective_vector_fields
//! ```

use geodesic_mobility::error::Result;
use geodesic_mobility::expr::parse;
use geodesic_mobility::{corpus, pairs, sampling};

fn main() -> Result<()> {
    let g = corpus::get("flat3")?.metric;
    let pts = sampling::sample_points(&g, 42, 20)?;

    // (x1·x1, x1·x2, x1·x3) generates genuine projective (non-affine) flow
    let v = vec![parse("x1*x1")?, parse("x1*x2")?, parse("x1*x3")?];
    let rep = pairs::projective_field_solution(&g, &v, &pts)?;
    println!(
        "v = x1·x: projective = {}, residual {:.2e}, |λ| = {:.3}",
        rep.is_projective,
        rep.residual,
        rep.lambda.norm()
    );

    // a rotation is an isometry: projective with the trivial solution a = 0
    let v = vec![parse("-x2")?, parse("x1")?, parse("0")?];
    let rep = pairs::projective_field_solution(&g, &v, &pts)?;
    println!(
        "rotation: projective = {}, residual {:.2e}, |a| = {:.2e} (isometries act trivially)",
        rep.is_projective,
        rep.residual,
        rep.a.norm()
    );

    // a generic cubic field does not preserve geodesics
    let v = vec![parse("x1^3")?, parse("0")?, parse("0")?];
    let rep = pairs::projective_field_solution(&g, &v, &pts)?;
    println!(
        "v = (x1³, 0, 0): projective = {}, residual {:.2e}",
        rep.is_projective, rep.residual
    );
    Ok(())
}
