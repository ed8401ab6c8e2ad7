//! Degree of mobility D(g): the dimension of the space of solutions of the
//! linearized geodesic-equivalence equation, computed two ways.
//!
//! Route "extended-system": solutions correspond to flat sections of a linear
//! connection on the fiber (a, λ, μ) of dimension n(n+1)/2 + n + 1, for a
//! fixed value of the metric constant B:
//!   a_{ij,k} = λ_i g_{jk} + λ_j g_{ik},
//!   λ_{i,j}  = μ g_{ij} + B a_{ij},
//!   μ_{,i}   = 2B λ_i.
//!
//! Route "cone-parallel" (B = −1): D equals the dimension of the space of
//! parallel symmetric (0,2)-tensors on the cone dr² + r²g, and the structure
//! numbers are k = parallel 1-forms on the cone, ℓ = D − k(k+1)/2.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::collections::BTreeMap;

use crate::cone::{build_cone, ExtendedSolution};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{self, MetricSpec};
use crate::jets::Jet;
use crate::prolong::{
    self, invariant_covectors, invariant_symforms, matrix_to_sym, sym_pairs, Connection,
    ProlongOpts,
};
use crate::sampling;

/// Outcome of a mobility computation.
#[derive(Clone, Debug, Serialize)]
pub struct MobilityReport {
    pub label: String,
    /// dimension of the underlying metric g
    pub dim: usize,
    pub route: String,
    #[serde(rename = "D")]
    pub d: usize,
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<i64>,
    pub constant_curvature: bool,
    /// k ≤ n−2 and 1 ≤ ℓ ≤ ⌊(n−k+1)/3⌋, when applicable
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds_ok: Option<bool>,
    pub seed: u64,
    pub diagnostics: BTreeMap<String, serde_json::Value>,
}

/// The flat-section connection of the extended system for the constant B.
/// Fiber coordinates: (a_{ij} for i ≤ j, λ_1..λ_n, μ).
pub fn extended_connection(m: &MetricSpec, b: f64) -> Connection {
    let spec = m.clone();
    let n = m.dim;
    let pairs = sym_pairs(n);
    let na = pairs.len();
    let nf = na + n + 1;
    Connection::new(
        m.clone(),
        nf,
        Box::new(move |point, order| {
            let g = spec.eval_jets(point, order)?;
            let gamma = geometry::christoffel_jets(&spec, point, order)?;
            let zero = Jet::constant(0.0, n, order);
            let col_a = |i: usize, j: usize| {
                let (a, bb) = if i <= j { (i, j) } else { (j, i) };
                pairs.iter().position(|&x| x == (a, bb)).unwrap()
            };
            let mut out = Vec::with_capacity(n);
            for kdir in 0..n {
                // ∂_k s + C_k s = 0, so C_k = −(coefficients of the RHS)
                let mut ck = vec![zero.clone(); nf * nf];
                let mut add = |row: usize, col: usize, val: &Jet| {
                    ck[row * nf + col] = ck[row * nf + col].sub(val);
                };
                for (row, &(i, j)) in pairs.iter().enumerate() {
                    // ∂_k a_ij = Γ^p_{ki} a_pj + Γ^p_{kj} a_ip + λ_i g_jk + λ_j g_ik
                    for p in 0..n {
                        add(row, col_a(p, j), gamma.get(&[p, kdir, i]));
                        add(row, col_a(i, p), gamma.get(&[p, kdir, j]));
                    }
                    add(row, na + i, &g[j * n + kdir]);
                    add(row, na + j, &g[i * n + kdir]);
                }
                for i in 0..n {
                    // ∂_k λ_i = Γ^p_{ki} λ_p + μ g_ik + B a_ik
                    let row = na + i;
                    for p in 0..n {
                        add(row, na + p, gamma.get(&[p, kdir, i]));
                    }
                    add(row, na + n, &g[i * n + kdir]);
                    add(row, col_a(i, kdir), &Jet::constant(b, n, order));
                }
                // ∂_k μ = 2B λ_k
                add(na + n, na + kdir, &Jet::constant(2.0 * b, n, order));
                out.push(ck);
            }
            Ok(out)
        }),
    )
}

/// Decode a fiber vector of the extended connection into (a, λ, μ).
pub fn decode_extended(v: &DVector<f64>, n: usize) -> ExtendedSolution {
    let na = n * (n + 1) / 2;
    let a = prolong::sym_to_matrix(&DVector::from_iterator(na, v.iter().take(na).copied()), n);
    let lambda = DVector::from_fn(n, |i, _| v[na + i]);
    ExtendedSolution {
        a,
        lambda,
        mu: v[na + n],
    }
}

/// Encode (a, λ, μ) as a fiber vector of the extended connection.
pub fn encode_extended(sol: &ExtendedSolution) -> DVector<f64> {
    let n = sol.lambda.len();
    let na = n * (n + 1) / 2;
    let mut v = DVector::zeros(na + n + 1);
    let av = matrix_to_sym(&sol.a);
    for i in 0..na {
        v[i] = av[i];
    }
    for i in 0..n {
        v[na + i] = sol.lambda[i];
    }
    v[na + n] = sol.mu;
    v
}

/// D(g) through the extended system at a fixed B.
pub fn degree(m: &MetricSpec, b: f64, opts: &ProlongOpts) -> Result<MobilityReport> {
    let conn = extended_connection(m, b);
    let fs = conn.flat_sections(opts)?;
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert(
        "generator_count".into(),
        serde_json::json!(fs.generator_count),
    );
    // The metric itself solves the system: (a = g, λ = 0, μ = −B) must lie
    // in the span of the reported basis.
    let g = m.matrix_at(&fs.point)?;
    let sg = encode_extended(&ExtendedSolution {
        a: g,
        lambda: DVector::zeros(m.dim),
        mu: -b,
    });
    let sg_unit = &sg / sg.norm();
    let resid = if fs.dim > 0 {
        let proj = &fs.basis * (fs.basis.transpose() * &sg_unit);
        (proj - &sg_unit).norm()
    } else {
        1.0
    };
    diagnostics.insert("metric_section_residual".into(), serde_json::json!(resid));
    if resid > 1e-8 {
        return Err(Error::Verification(format!(
            "the metric itself is not among the computed solutions (residual {resid:.3e})"
        )));
    }
    Ok(MobilityReport {
        label: m.label.clone(),
        dim: m.dim,
        route: "extended-system".into(),
        d: fs.dim,
        b: Some(b),
        k: None,
        ell: None,
        constant_curvature: false,
        bounds_ok: None,
        seed: opts.seed,
        diagnostics,
    })
}

/// g' = −B·g, which has B(g') = −1 and the same degree of mobility.
///
/// (For ḡ = c·g the solution spaces are identified by (a, λ, μ) ↦
/// (c·a, λ, μ/c), under which the constant transforms as B̄ = B/c; taking
/// c = −B lands on B̄ = −1.)
pub fn rescale_to_b_minus1(m: &MetricSpec, b: f64) -> Result<MetricSpec> {
    if b == 0.0 {
        return Err(Error::Malformed("rescaling requires B != 0".into()));
    }
    let factor = -b;
    let comps = m
        .comps
        .iter()
        .map(|e| Expr::Mul(Box::new(Expr::Num(factor)), Box::new(e.clone())))
        .collect();
    let coords: Vec<&str> = m.coords.iter().map(|s| s.as_str()).collect();
    let mut out = MetricSpec::new(
        &format!("{}*({:+.6})", m.label, factor),
        &coords,
        comps,
        &m.sample_box,
    )?;
    out.signature_hint = None;
    Ok(out)
}

/// Result of a B-sweep.
#[derive(Clone, Debug, Serialize)]
pub struct BSearch {
    /// (B, D) for every conclusive grid value
    pub results: Vec<(f64, usize)>,
    pub inconclusive: Vec<f64>,
    pub best_b: f64,
    pub best_dim: usize,
    /// off-grid candidate found by golden-section refinement, if better
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refined_b: Option<f64>,
    pub seed: u64,
}

/// Candidate grid: 0 and ± 41 log-spaced magnitudes in [1e-3, 1e3].
pub fn default_b_grid() -> Vec<f64> {
    let mut out = vec![0.0];
    for i in 0..41 {
        let mag = 10f64.powf(-3.0 + 6.0 * i as f64 / 40.0);
        out.push(mag);
        out.push(-mag);
    }
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

fn stacked_singular_values(gens: &[DMatrix<f64>], nf: usize) -> Vec<f64> {
    let rows: usize = gens.len() * nf;
    let mut m = DMatrix::zeros(rows, nf);
    for (i, g) in gens.iter().enumerate() {
        m.view_mut((i * nf, 0), (nf, nf)).copy_from(g);
    }
    let svd = nalgebra::SVD::new(m, false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| a.total_cmp(b));
    sv.resize(nf, 0.0); // thin SVD reports min(rows, nf) values
    sv
}

/// Sweep candidate values of B and report the dimension for each; the value
/// maximizing D is flagged.  A golden-section refinement of the rank-drop
/// indicator looks for an off-grid maximizer between the best grid points.
pub fn search_b(m: &MetricSpec, opts: &ProlongOpts) -> Result<BSearch> {
    let grid = default_b_grid();
    let p = sampling::base_point(m, opts.seed)?;
    let nf = m.dim * (m.dim + 1) / 2 + m.dim + 1;
    let mut results = Vec::new();
    let mut inconclusive = Vec::new();
    let mut indicators: Vec<(f64, Vec<f64>)> = Vec::new();
    for &b in &grid {
        let conn = extended_connection(m, b);
        match conn.flat_sections_at(&p, opts) {
            Ok(fs) => {
                let gens = conn.generators(&p, opts)?;
                indicators.push((b, stacked_singular_values(&gens, nf)));
                results.push((b, fs.dim));
            }
            Err(Error::RankIndecision { .. }) => inconclusive.push(b),
            Err(e) => return Err(e),
        }
    }
    if results.is_empty() {
        return Err(Error::RankIndecision {
            above: 0.0,
            below: 0.0,
            ratio: 1.0,
        });
    }
    let (best_b, best_dim) = results
        .iter()
        .copied()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.abs().total_cmp(&a.0.abs())))
        .unwrap();
    // Refinement: minimize the (best_dim+1)-th smallest stacked singular
    // value around its grid minimum; a true maximizer between grid points
    // drives it to zero.
    let mut refined_b = None;
    if best_dim < nf {
        let idx_best = indicators
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .1[best_dim].total_cmp(&b.1 .1[best_dim]))
            .map(|(i, _)| i)
            .unwrap();
        let lo = indicators[idx_best.saturating_sub(1)].0;
        let hi = indicators[(idx_best + 1).min(indicators.len() - 1)].0;
        if hi > lo {
            let ind = |b: f64| -> f64 {
                let conn = extended_connection(m, b);
                match conn.generators(&p, opts) {
                    Ok(gens) => stacked_singular_values(&gens, nf)[best_dim],
                    Err(_) => f64::INFINITY,
                }
            };
            let phi = (5f64.sqrt() - 1.0) / 2.0;
            let (mut a, mut b_hi) = (lo, hi);
            let mut x1 = b_hi - phi * (b_hi - a);
            let mut x2 = a + phi * (b_hi - a);
            let (mut f1, mut f2) = (ind(x1), ind(x2));
            for _ in 0..40 {
                if f1 < f2 {
                    b_hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b_hi - phi * (b_hi - a);
                    f1 = ind(x1);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + phi * (b_hi - a);
                    f2 = ind(x2);
                }
            }
            let cand = (a + b_hi) / 2.0;
            let conn = extended_connection(m, cand);
            if let Ok(fs) = conn.flat_sections_at(&p, opts) {
                if fs.dim > best_dim {
                    refined_b = Some(cand);
                }
            }
        }
    }
    Ok(BSearch {
        results,
        inconclusive,
        best_b: refined_b.unwrap_or(best_b),
        best_dim,
        refined_b,
        seed: opts.seed,
    })
}

fn floor_div(a: usize, b: usize) -> usize {
    a / b
}

/// Mobility through the cone route: build the cone over `base`, compute the
/// parallel symmetric forms and parallel 1-forms on it.
pub fn cone_mobility(base: &MetricSpec, opts: &ProlongOpts) -> Result<MobilityReport> {
    let c = build_cone(base)?;
    cone_mobility_of_total(&c.total, base.dim, &base.label, opts)
}

/// Same, for a metric that is already a cone (dim = n + 1 over a virtual
/// base of dimension n).
pub fn cone_mobility_of_total(
    total: &MetricSpec,
    base_dim: usize,
    label: &str,
    opts: &ProlongOpts,
) -> Result<MobilityReport> {
    let n = base_dim;
    let nn = total.dim;
    assert_eq!(nn, n + 1);
    let conn = prolong::tangent_connection(total);
    let p = sampling::base_point(total, opts.seed)?;
    // constant-curvature detection: the cone is flat
    let mut max_r = 0.0f64;
    for q in sampling::sample_points(total, opts.seed, 20)? {
        max_r = max_r.max(geometry::riemann(total, &q, 0)?.max_abs_riemann());
    }
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("cone_max_abs_riemann".into(), serde_json::json!(max_r));
    if max_r < 1e-8 {
        // cone flat ⟺ base has constant curvature: D attains the maximum
        // and the structure numbers k, ℓ do not apply
        return Ok(MobilityReport {
            label: label.to_string(),
            dim: n,
            route: "cone-parallel".into(),
            d: (n + 1) * (n + 2) / 2,
            b: Some(-1.0),
            k: None,
            ell: None,
            constant_curvature: true,
            bounds_ok: None,
            seed: opts.seed,
            diagnostics,
        });
    }
    let gens = conn.generators(&p, opts)?;
    let sym = invariant_symforms(&gens, nn, opts.svd_tol)?;
    let cov = invariant_covectors(&gens, nn, opts.svd_tol)?;
    let d = sym.ncols();
    let k = cov.ncols();
    let ell = d as i64 - (k * (k + 1) / 2) as i64;
    let bounds_ok = k <= n.saturating_sub(2)
        && ell >= 1
        && ell <= floor_div(n - k + 1, 3) as i64;
    diagnostics.insert("generator_count".into(), serde_json::json!(gens.len()));
    // the cone metric itself must be among the parallel forms
    let ghat = matrix_to_sym(&total.matrix_at(&p)?);
    let gu = &ghat / ghat.norm();
    let proj = &sym * (sym.transpose() * &gu);
    let resid = (proj - &gu).norm();
    diagnostics.insert("cone_metric_residual".into(), serde_json::json!(resid));
    if resid > 1e-7 {
        return Err(Error::Verification(format!(
            "cone metric missing from the parallel forms (residual {resid:.3e})"
        )));
    }
    Ok(MobilityReport {
        label: label.to_string(),
        dim: n,
        route: "cone-parallel".into(),
        d,
        b: Some(-1.0),
        k: Some(k),
        ell: Some(ell),
        constant_curvature: false,
        bounds_ok: Some(bounds_ok),
        seed: opts.seed,
        diagnostics,
    })
}

/// Expected dimension gap between the projective and isometry algebras.
#[derive(Clone, Debug, Serialize)]
pub struct ProjIsoReport {
    /// generic value D − 1
    pub expected: i64,
    /// [D−2, D−1]: the lower end occurs only in the special B = 0 case
    pub band: (i64, i64),
    /// the formula needs D ≥ 3
    pub applicable: bool,
}

pub fn proj_iso_report(r: &MobilityReport) -> ProjIsoReport {
    let d = r.d as i64;
    ProjIsoReport {
        expected: d - 1,
        band: (d - 2, d - 1),
        applicable: r.d >= 3,
    }
}

/// The one-parameter family of solutions generated by a gradient λ with
/// λ_{i,j} = g_ij (the B = 0, μ = 1 case):
/// a(t) = t λλᵀ + g, λ(t) = tλ, μ(t) = t.
#[derive(Clone, Debug)]
pub struct MuFamily {
    /// a(t) components as expressions (n×n, row-major)
    pub a: Vec<Expr>,
    pub lambda: Vec<Expr>,
    pub mu: f64,
    pub t: f64,
    pub max_residual: f64,
}

/// Build and verify the family at sampled points.  `lambda` are the covector
/// components λ_i as expressions; they must satisfy λ_{i,j} = g_ij.
pub fn mu_family(m: &MetricSpec, lambda: &[Expr], t: f64, seed: u64) -> Result<MuFamily> {
    let n = m.dim;
    assert_eq!(lambda.len(), n);
    let tnum = Expr::Num(t);
    let mut a = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            // a_ij = t λ_i λ_j + g_ij
            let prod = Expr::Mul(
                Box::new(tnum.clone()),
                Box::new(Expr::Mul(
                    Box::new(lambda[i].clone()),
                    Box::new(lambda[j].clone()),
                )),
            );
            a.push(Expr::Add(Box::new(prod), Box::new(m.component(i, j).clone())));
        }
    }
    let lam_t: Vec<Expr> = lambda
        .iter()
        .map(|l| Expr::Mul(Box::new(tnum.clone()), Box::new(l.clone())))
        .collect();
    // residuals of the full system at sample points
    let mut max_res = 0.0f64;
    let a_field = geometry::TensorField {
        upper: vec![false, false],
        comps: a.clone(),
    };
    let lam_field = geometry::TensorField {
        upper: vec![false],
        comps: lam_t.clone(),
    };
    for p in sampling::sample_points(m, seed, 10)? {
        let g = m.matrix_at(&p)?;
        let da = geometry::cov_deriv(m, &a_field, &p)?;
        let lam_vals: Vec<f64> = lam_t
            .iter()
            .map(|e| e.eval(&p, &m.coords))
            .collect::<Result<_>>()?;
        for i in 0..n {
            for j in 0..n {
                for kk in 0..n {
                    let r = da[(i * n + j) * n + kk]
                        - lam_vals[i] * g[(j, kk)]
                        - lam_vals[j] * g[(i, kk)];
                    max_res = max_res.max(r.abs());
                }
            }
        }
        // λ(t)_{i,j} = μ(t) g_ij
        let dl = geometry::cov_deriv(m, &lam_field, &p)?;
        for i in 0..n {
            for j in 0..n {
                max_res = max_res.max((dl[i * n + j] - t * g[(i, j)]).abs());
            }
        }
    }
    if max_res > 1e-8 {
        return Err(Error::Verification(format!(
            "family residual {max_res:.3e} exceeds 1e-8 (is λ_{{i,j}} = g_ij satisfied?)"
        )));
    }
    Ok(MuFamily {
        a,
        lambda: lam_t,
        mu: t,
        t,
        max_residual: max_res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn flat3() -> MetricSpec {
        MetricSpec::from_strings(
            "flat3",
            &["x1", "x2", "x3"],
            &[("1,1", "1"), ("2,2", "1"), ("3,3", "1")],
            &[(-2.0, 2.0), (-2.0, 2.0), (-2.0, 2.0)],
        )
        .unwrap()
    }

    fn sphere2() -> MetricSpec {
        MetricSpec::from_strings(
            "sphere2",
            &["x1", "x2"],
            &[
                ("1,1", "4/(1 + x1^2 + x2^2)^2"),
                ("2,2", "4/(1 + x1^2 + x2^2)^2"),
            ],
            &[(-1.0, 1.0), (-1.0, 1.0)],
        )
        .unwrap()
    }

    fn hyperbolic2() -> MetricSpec {
        MetricSpec::from_strings(
            "hyperbolic2",
            &["x1", "x2"],
            &[
                ("1,1", "4/(1 - x1^2 - x2^2)^2"),
                ("2,2", "4/(1 - x1^2 - x2^2)^2"),
            ],
            &[(-0.6, 0.6), (-0.6, 0.6)],
        )
        .unwrap()
    }

    #[test]
    fn flat3_b0_max_mobility() {
        let r = degree(&flat3(), 0.0, &ProlongOpts::default()).unwrap();
        assert_eq!(r.d, 10);
    }

    #[test]
    fn sphere2_b_minus1_max_mobility() {
        // maximum for n = 2 is (n+1)(n+2)/2 = 6, attained at B = −1
        let r = degree(&sphere2(), -1.0, &ProlongOpts::default()).unwrap();
        assert_eq!(r.d, 6);
    }

    #[test]
    fn sphere2_wrong_b_collapses() {
        let r = degree(&sphere2(), 0.0, &ProlongOpts::default()).unwrap();
        assert_eq!(r.d, 1);
        let r = degree(&sphere2(), 1.0, &ProlongOpts::default()).unwrap();
        assert!(r.d <= 2);
    }

    #[test]
    fn hyperbolic2_maximizes_at_plus1() {
        let r = degree(&hyperbolic2(), 1.0, &ProlongOpts::default()).unwrap();
        assert_eq!(r.d, 6);
        let r = degree(&hyperbolic2(), -1.0, &ProlongOpts::default()).unwrap();
        assert!(r.d <= 2);
    }

    #[test]
    fn search_b_sphere() {
        let s = search_b(&sphere2(), &ProlongOpts::default()).unwrap();
        assert_eq!(s.best_dim, 6);
        assert!((s.best_b + 1.0).abs() < 1e-9, "best B = {}", s.best_b);
        for &(b, d) in &s.results {
            if (b + 1.0).abs() > 1e-9 {
                assert!(d <= 2, "B = {b} gave D = {d}");
            }
        }
    }

    #[test]
    fn rescaled_sphere_keeps_mobility() {
        // g/4 is the sphere of radius 1/2 and has B = −4
        let m = sphere2();
        let quarter = MetricSpec::new(
            "sphere2/4",
            &["x1", "x2"],
            m.comps
                .iter()
                .map(|e| Expr::Mul(Box::new(Expr::Num(0.25)), Box::new(e.clone())))
                .collect(),
            &m.sample_box,
        )
        .unwrap();
        let r = degree(&quarter, -4.0, &ProlongOpts::default()).unwrap();
        assert_eq!(r.d, 6);
        let rescaled = rescale_to_b_minus1(&quarter, -4.0).unwrap();
        let r2 = degree(&rescaled, -1.0, &ProlongOpts::default()).unwrap();
        assert_eq!(r2.d, 6);
        assert!(rescale_to_b_minus1(&quarter, 0.0).is_err());
    }

    #[test]
    fn cone_route_sphere_constant_curvature() {
        let r = cone_mobility(&sphere2(), &ProlongOpts::default()).unwrap();
        assert!(r.constant_curvature);
        assert_eq!(r.d, 6);
        assert_eq!(r.k, None);
    }

    #[test]
    fn extended_matches_cone_route_on_sphere() {
        let ext = degree(&sphere2(), -1.0, &ProlongOpts::default()).unwrap();
        let cone = cone_mobility(&sphere2(), &ProlongOpts::default()).unwrap();
        assert_eq!(ext.d, cone.d);
    }

    #[test]
    fn proj_iso_formula() {
        let mut r = degree(&flat3(), 0.0, &ProlongOpts::default()).unwrap();
        let p = proj_iso_report(&r);
        assert_eq!(p.expected, 9);
        assert!(p.applicable);
        r.d = 2;
        assert!(!proj_iso_report(&r).applicable);
    }

    #[test]
    fn mu_family_flat() {
        // λ_i = x_i satisfies λ_{i,j} = δ_ij = g_ij on flat R³
        let m = flat3();
        let lambda = vec![
            parse("x1").unwrap(),
            parse("x2").unwrap(),
            parse("x3").unwrap(),
        ];
        let fam = mu_family(&m, &lambda, 0.1, 42).unwrap();
        assert!(fam.max_residual < 1e-10);
        // t = 0 degenerates to (g, 0, 0)
        let fam0 = mu_family(&m, &lambda, 0.0, 42).unwrap();
        let p = [0.3, -0.2, 0.5];
        for i in 0..3 {
            for j in 0..3 {
                let v = fam0.a[i * 3 + j].eval(&p, &m.coords).unwrap();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-14);
            }
        }
        // a(t) stays nondegenerate for small t on the box
        for q in sampling::sample_points(&m, 42, 10).unwrap() {
            let a = DMatrix::from_fn(3, 3, |i, j| fam.a[i * 3 + j].eval(&q, &m.coords).unwrap());
            assert!(a.determinant().abs() > 0.1);
        }
        // a wrong λ is rejected
        let bad = vec![
            parse("x1^2").unwrap(),
            parse("0").unwrap(),
            parse("0").unwrap(),
        ];
        assert!(mu_family(&m, &bad, 0.1, 42).is_err());
    }

    #[test]
    fn encode_decode_round_trip() {
        let sol = ExtendedSolution {
            a: DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 2.0]),
            lambda: DVector::from_vec(vec![3.0, -1.0]),
            mu: 7.0,
        };
        let v = encode_extended(&sol);
        let back = decode_extended(&v, 2);
        assert_eq!(back, sol);
    }
}
