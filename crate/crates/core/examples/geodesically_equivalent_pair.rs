//! Certify that two explicit metrics share their geodesics, and exhibit the
//! rescaling law for the companion constant B.
//!
//! From a candidate pair (g, ḡ), the engine forms
//!     φ    = 1/(2(n+1)) · log |det ḡ / det g|
//!     a_ij = e^{2φ} ḡ^{pq} g_pi g_qj
//! and checks the Levi-Civita comparison equation and the defining equation
//! of the mobility system at sample points.  A genuine pair passes at
//! round-off level; perturbing one metric component flips the verdict.
//!
//! ```bash
//! cargo run --release --example geodesically_equivalent_pair
//! ```

use geodesic_mobility::error::Result;
use geodesic_mobility::expr::Expr;
use geodesic_mobility::geometry::MetricSpec;
use geodesic_mobility::{corpus, pairs, sampling};

fn main() -> Result<()> {
    let e = corpus::get("flat_projective_pair3")?;
    let g = e.metric;
    let gbar = e.gbar.unwrap();
    let pts = sampling::sample_points(&g, 42, 20)?;

    let rep = pairs::check_geodesic_equiv(&g, &gbar, &pts)?;
    println!(
        "flat3 vs its projective pullback: equivalent = {}, residuals {:.2e} / {:.2e}",
        rep.equivalent, rep.max_lc_residual, rep.max_basic_residual
    );

    // a small perturbation of ḡ_11 destroys the equivalence
    let mut bent = gbar.clone();
    bent.comps[0] = Expr::Add(
        Box::new(bent.comps[0].clone()),
        Box::new(geodesic_mobility::expr::parse("0.001*x1^2")?),
    );
    let rep = pairs::check_geodesic_equiv(&g, &bent, &pts)?;
    println!(
        "after perturbing ḡ_11:            equivalent = {}, residuals {:.2e} / {:.2e}",
        rep.equivalent, rep.max_lc_residual, rep.max_basic_residual
    );

    // rescaling law: ḡ = c·g is trivially equivalent, and the companion
    // constant transforms as B̄ = B/c
    println!("\nrescaling law (sphere2, B = −1):");
    let s2 = corpus::get("sphere2")?.metric;
    for c in [2.0, 1.0 / 3.0, -1.0] {
        let scaled = scale(&s2, c)?;
        let p = &pts_of(&s2)?[0];
        let sol = pairs::pair_solution(&s2, &scaled, -1.0, p)?;
        let bb = pairs::bar_b(&s2, &scaled, &sol, p)?;
        println!("  c = {c:6.3}:  B̄ = {bb:9.6}  (B/c = {:9.6})", -1.0 / c);
    }
    Ok(())
}

fn pts_of(m: &MetricSpec) -> Result<Vec<Vec<f64>>> {
    sampling::sample_points(m, 42, 5)
}

fn scale(m: &MetricSpec, c: f64) -> Result<MetricSpec> {
    let comps: Vec<Expr> = m
        .comps
        .iter()
        .map(|e| Expr::Mul(Box::new(Expr::Num(c)), Box::new(e.clone())))
        .collect();
    let coords: Vec<&str> = m.coords.iter().map(|s| s.as_str()).collect();
    MetricSpec::new(&format!("{}*{c}", m.label), &coords, comps, &m.sample_box)
}
