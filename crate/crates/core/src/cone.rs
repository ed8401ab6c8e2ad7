//! Metric cones: building dr² + r²g over a base, recognizing cone metrics
//! through the characteristic function v (v_{,ij} = g_ij, v_{,i}v,^i = 2v),
//! gluing products of cones, and the packing of a solution triple (a, λ, μ)
//! on the base into a symmetric 2-tensor on the cone.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::geometry::{self, MetricSpec};

pub const DEFAULT_R_RANGE: (f64, f64) = (0.5, 3.0);

/// A base metric together with its cone.
#[derive(Clone, Debug)]
pub struct ConeBuild {
    pub base: MetricSpec,
    pub total: MetricSpec,
    pub r_name: String,
}

/// Build the cone dr² + r²·g over `base`, with `r` as the first coordinate.
pub fn build_cone(base: &MetricSpec) -> Result<ConeBuild> {
    build_cone_named(base, "r", DEFAULT_R_RANGE)
}

pub fn build_cone_named(
    base: &MetricSpec,
    r_name: &str,
    r_range: (f64, f64),
) -> Result<ConeBuild> {
    let n = base.dim;
    if n == 0 {
        return Err(Error::Malformed("cone needs a base of dimension >= 1".into()));
    }
    if base.coords.iter().any(|c| c == r_name) {
        return Err(Error::Malformed(format!(
            "cone coordinate `{r_name}` collides with a base coordinate"
        )));
    }
    if r_range.0 <= 0.0 {
        return Err(Error::Malformed("cone r-range must be positive".into()));
    }
    let nn = n + 1;
    let r2 = Expr::Pow(
        Box::new(Expr::Var(r_name.to_string())),
        Box::new(Expr::Num(2.0)),
    );
    let mut comps = vec![Expr::Num(0.0); nn * nn];
    comps[0] = Expr::Num(1.0);
    for i in 0..n {
        for j in 0..n {
            comps[(i + 1) * nn + (j + 1)] = Expr::Mul(
                Box::new(r2.clone()),
                Box::new(base.component(i, j).clone()),
            );
        }
    }
    let mut coords: Vec<&str> = vec![r_name];
    for c in &base.coords {
        coords.push(c);
    }
    let mut sample_box = vec![r_range];
    sample_box.extend_from_slice(&base.sample_box);
    let total = MetricSpec::new(
        &format!("cone({})", base.label),
        &coords,
        comps,
        &sample_box,
    )?;
    Ok(ConeBuild {
        base: base.clone(),
        total,
        r_name: r_name.to_string(),
    })
}

/// Closed-form cone Christoffel table at `point` = (r, x): the base symbols
/// in the base block, Γ^i_{0j} = (1/r)δ^i_j, Γ^0_{jk} = −r·g_jk(x).
pub fn cone_christoffel_closed(c: &ConeBuild, point: &[f64]) -> Result<Vec<f64>> {
    let n = c.base.dim;
    let nn = n + 1;
    let r = point[0];
    if r <= 0.0 {
        return Err(Error::Malformed(format!("cone radius must be positive, got {r}")));
    }
    let base_pt = &point[1..];
    let g = c.base.matrix_at(base_pt)?;
    let base_gamma = geometry::christoffel(&c.base, base_pt)?;
    let mut out = vec![0.0; nn * nn * nn];
    let mut set = |i: usize, j: usize, k: usize, v: f64| {
        out[(i * nn + j) * nn + k] = v;
    };
    for i in 0..n {
        set(i + 1, 0, i + 1, 1.0 / r);
        set(i + 1, i + 1, 0, 1.0 / r);
    }
    for j in 0..n {
        for k in 0..n {
            set(0, j + 1, k + 1, -r * g[(j, k)]);
            for i in 0..n {
                set(i + 1, j + 1, k + 1, base_gamma[(i * n + j) * n + k]);
            }
        }
    }
    Ok(out)
}

/// Result of testing whether (M, g) is a cone around the sampled points,
/// witnessed by the candidate function v.
#[derive(Clone, Debug)]
pub struct HomReport {
    /// max |v_{,ij} − g_ij|
    pub hessian_residual: f64,
    /// max |v_{,i} v,^i − 2v|
    pub gradient_residual: f64,
    pub min_v: f64,
    pub max_v: f64,
    /// both residuals < 1e-8 and v > 0 at all samples
    pub cone_compatible: bool,
    /// residuals pass but v < 0 everywhere: cone structure for −g
    pub cone_for_negated: bool,
}

pub const HOM_TOL: f64 = 1e-8;

/// Check the cone criterion v_{,ij} = g_ij and v_{,i}v,^i = 2v at points.
pub fn check_hom(m: &MetricSpec, v: &Expr, points: &[Vec<f64>]) -> Result<HomReport> {
    let n = m.dim;
    let mut hr = 0.0f64;
    let mut gr = 0.0f64;
    let mut min_v = f64::INFINITY;
    let mut max_v = f64::NEG_INFINITY;
    for p in points {
        let g = m.matrix_at(p)?;
        let ginv = g.clone().try_inverse().ok_or(Error::DegenerateMetric {
            det: g.determinant(),
        })?;
        let gamma = geometry::christoffel(m, p)?;
        let vj = v.eval_jet(p, 2, &m.coords)?;
        let val = vj.value();
        min_v = min_v.min(val);
        max_v = max_v.max(val);
        let grad = vj.gradient();
        for i in 0..n {
            for j in 0..n {
                let mut alpha = vec![0u8; n];
                alpha[i] += 1;
                alpha[j] += 1;
                let mut hess = vj.partial(&alpha)?;
                for q in 0..n {
                    hess -= gamma[(q * n + i) * n + j] * grad[q];
                }
                hr = hr.max((hess - g[(i, j)]).abs());
            }
        }
        let mut sq = 0.0;
        for i in 0..n {
            for j in 0..n {
                sq += ginv[(i, j)] * grad[i] * grad[j];
            }
        }
        gr = gr.max((sq - 2.0 * val).abs());
    }
    let residuals_ok = hr < HOM_TOL && gr.abs() < HOM_TOL.max(1e-8 * max_v.abs());
    Ok(HomReport {
        hessian_residual: hr,
        gradient_residual: gr,
        min_v,
        max_v,
        cone_compatible: residuals_ok && min_v > 0.0,
        cone_for_negated: residuals_ok && max_v < 0.0,
    })
}

/// A metric together with a verified cone function.
#[derive(Clone, Debug)]
pub struct VerifiedConeFactor {
    pub metric: MetricSpec,
    pub v: Expr,
}

/// Verify a (metric, v) pair at seeded sample points, producing a factor
/// usable by [`glue_product`].
pub fn verify_factor(metric: MetricSpec, v: Expr, seed: u64) -> Result<VerifiedConeFactor> {
    let pts = crate::sampling::sample_points(&metric, seed, 10)?;
    let rep = check_hom(&metric, &v, &pts)?;
    if !rep.cone_compatible {
        return Err(Error::Verification(format!(
            "factor `{}` fails the cone criterion (hessian residual {:.3e}, gradient residual {:.3e}, min v {:.3e})",
            metric.label, rep.hessian_residual, rep.gradient_residual, rep.min_v
        )));
    }
    Ok(VerifiedConeFactor { metric, v })
}

/// Direct product of verified cone factors; the product is again a cone with
/// w = sum of the factor functions.
pub fn glue_product(factors: &[VerifiedConeFactor]) -> Result<(MetricSpec, Expr)> {
    if factors.is_empty() {
        return Err(Error::Malformed("cannot glue an empty product".into()));
    }
    let mut coords: Vec<String> = Vec::new();
    for f in factors {
        for c in &f.metric.coords {
            if coords.contains(c) {
                return Err(Error::Malformed(format!(
                    "coordinate name collision `{c}` while gluing"
                )));
            }
            coords.push(c.clone());
        }
    }
    let n: usize = factors.iter().map(|f| f.metric.dim).sum();
    let mut comps = vec![Expr::Num(0.0); n * n];
    let mut sample_box = Vec::with_capacity(n);
    let mut off = 0;
    for f in factors {
        let d = f.metric.dim;
        for i in 0..d {
            for j in 0..d {
                comps[(off + i) * n + (off + j)] = f.metric.component(i, j).clone();
            }
        }
        sample_box.extend_from_slice(&f.metric.sample_box);
        off += d;
    }
    let label = factors
        .iter()
        .map(|f| f.metric.label.clone())
        .collect::<Vec<_>>()
        .join(" x ");
    let coord_refs: Vec<&str> = coords.iter().map(|s| s.as_str()).collect();
    let product = MetricSpec::new(&label, &coord_refs, comps, &sample_box)?;
    let w = factors
        .iter()
        .map(|f| f.v.clone())
        .reduce(|a, b| Expr::Add(Box::new(a), Box::new(b)))
        .unwrap();
    Ok((product, w))
}

/// A solution triple on the base, evaluated at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedSolution {
    pub a: DMatrix<f64>,
    pub lambda: DVector<f64>,
    pub mu: f64,
}

/// Pack (a, λ, μ) at base point x and radius r into the symmetric 2-tensor
/// on the cone: A_00 = μ, A_0i = −r λ_i, A_ij = r² a_ij.
pub fn pack_parallel(sol: &ExtendedSolution, r: f64) -> DMatrix<f64> {
    let n = sol.lambda.len();
    let nn = n + 1;
    let mut a = DMatrix::zeros(nn, nn);
    a[(0, 0)] = sol.mu;
    for i in 0..n {
        a[(0, i + 1)] = -r * sol.lambda[i];
        a[(i + 1, 0)] = -r * sol.lambda[i];
        for j in 0..n {
            a[(i + 1, j + 1)] = r * r * sol.a[(i, j)];
        }
    }
    a
}

/// Inverse of [`pack_parallel`].
pub fn unpack_parallel(a: &DMatrix<f64>, r: f64) -> ExtendedSolution {
    let nn = a.nrows();
    let n = nn - 1;
    let mu = a[(0, 0)];
    let lambda = DVector::from_fn(n, |i, _| -a[(0, i + 1)] / r);
    let base_a = DMatrix::from_fn(n, n, |i, j| a[(i + 1, j + 1)] / (r * r));
    ExtendedSolution {
        a: base_a,
        lambda,
        mu,
    }
}

/// Parse helper used by tests and the corpus: v as an expression string.
pub fn parse_v(src: &str) -> Result<Expr> {
    parse(src)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;

    fn circle() -> MetricSpec {
        MetricSpec::from_strings("s1", &["theta"], &[("1,1", "1")], &[(-1.0, 1.0)]).unwrap()
    }

    fn flat_lorentz2() -> MetricSpec {
        MetricSpec::from_strings(
            "lorentz2",
            &["t", "x"],
            &[("1,1", "-1"), ("2,2", "1")],
            &[(-1.0, 1.0), (-1.0, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn cone_over_circle_is_flat_plane() {
        let c = build_cone(&circle()).unwrap();
        assert_eq!(c.total.dim, 2);
        let geo = geometry::riemann(&c.total, &[1.7, 0.3], 0).unwrap();
        assert!(geo.max_abs_riemann() < 1e-10);
    }

    #[test]
    fn lorentzian_cone_components() {
        let c = build_cone(&flat_lorentz2()).unwrap();
        let g = c.total.matrix_at(&[2.0, 0.1, 0.2]).unwrap();
        assert_eq!(g[(0, 0)], 1.0);
        assert_eq!(g[(1, 1)], -4.0);
        assert_eq!(g[(2, 2)], 4.0);
        assert_eq!(g[(0, 1)], 0.0);
    }

    #[test]
    fn cone_rejects_dim0_and_collision() {
        let zero = MetricSpec::new("pt", &[], vec![], &[]).unwrap();
        assert!(build_cone(&zero).is_err());
        let with_r =
            MetricSpec::from_strings("hasr", &["r"], &[("1,1", "1")], &[(0.5, 1.0)]).unwrap();
        assert!(build_cone(&with_r).is_err());
    }

    #[test]
    fn closed_form_christoffels_match_evaluation() {
        let base = MetricSpec::from_strings(
            "sphere2",
            &["x1", "x2"],
            &[
                ("1,1", "4/(1 + x1^2 + x2^2)^2"),
                ("2,2", "4/(1 + x1^2 + x2^2)^2"),
            ],
            &[(-1.0, 1.0), (-1.0, 1.0)],
        )
        .unwrap();
        let c = build_cone(&base).unwrap();
        for p in sampling::sample_points(&c.total, 42, 20).unwrap() {
            let closed = cone_christoffel_closed(&c, &p).unwrap();
            let direct = geometry::christoffel(&c.total, &p).unwrap();
            for (a, b) in closed.iter().zip(&direct) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
        // spot values at r = 1: Γ^i_{0k} = δ^i_k
        let p = [1.0, 0.2, -0.3];
        let closed = cone_christoffel_closed(&c, &p).unwrap();
        let nn = 3;
        for i in 1..nn {
            for k in 1..nn {
                let expect = if i == k { 1.0 } else { 0.0 };
                assert!((closed[(i * nn) * nn + k] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn base_flat_r1_gamma0() {
        let base =
            MetricSpec::from_strings("flat1", &["x"], &[("1,1", "1")], &[(-1.0, 1.0)]).unwrap();
        let c = build_cone(&base).unwrap();
        let closed = cone_christoffel_closed(&c, &[1.4, 0.0]).unwrap();
        // Γ^0_{11} = −r
        assert!((closed[(0 * 2 + 1) * 2 + 1] + 1.4).abs() < 1e-12);
    }

    #[test]
    fn check_hom_on_cone() {
        let c = build_cone(&circle()).unwrap();
        let v = parse("r^2/2").unwrap();
        let pts = sampling::sample_points(&c.total, 42, 10).unwrap();
        let rep = check_hom(&c.total, &v, &pts).unwrap();
        assert!(rep.cone_compatible, "{rep:?}");
        assert!(rep.hessian_residual < 1e-10);
        assert!(rep.gradient_residual < 1e-10);
    }

    #[test]
    fn check_hom_flat_plane() {
        let m = MetricSpec::from_strings(
            "flat2",
            &["x", "y"],
            &[("1,1", "1"), ("2,2", "1")],
            &[(0.2, 1.0), (0.2, 1.0)],
        )
        .unwrap();
        let v = parse("(x^2 + y^2)/2").unwrap();
        let pts = sampling::sample_points(&m, 42, 10).unwrap();
        assert!(check_hom(&m, &v, &pts).unwrap().cone_compatible);
    }

    #[test]
    fn check_hom_sphere_negative() {
        let m = MetricSpec::from_strings(
            "sphere2",
            &["x1", "x2"],
            &[
                ("1,1", "4/(1 + x1^2 + x2^2)^2"),
                ("2,2", "4/(1 + x1^2 + x2^2)^2"),
            ],
            &[(-1.0, 1.0), (-1.0, 1.0)],
        )
        .unwrap();
        let v = parse("1").unwrap();
        let pts = sampling::sample_points(&m, 42, 5).unwrap();
        let rep = check_hom(&m, &v, &pts).unwrap();
        assert!(!rep.cone_compatible);
        assert!(rep.hessian_residual > 0.1);
    }

    #[test]
    fn glue_two_cones_flat4() {
        let c1 = build_cone_named(&circle(), "r1", DEFAULT_R_RANGE).unwrap();
        let t2 = MetricSpec::from_strings("s1b", &["phi"], &[("1,1", "1")], &[(-1.0, 1.0)]).unwrap();
        let c2 = build_cone_named(&t2, "r2", DEFAULT_R_RANGE).unwrap();
        let f1 = verify_factor(c1.total, parse("r1^2/2").unwrap(), 42).unwrap();
        let f2 = verify_factor(c2.total, parse("r2^2/2").unwrap(), 42).unwrap();
        let (prod, w) = glue_product(&[f1, f2]).unwrap();
        assert_eq!(prod.dim, 4);
        let pts = sampling::sample_points(&prod, 42, 10).unwrap();
        let rep = check_hom(&prod, &w, &pts).unwrap();
        assert!(rep.cone_compatible, "{rep:?}");
        // flat R⁴ in double-polar coordinates
        let geo = geometry::riemann(&prod, &pts[0], 0).unwrap();
        assert!(geo.max_abs_riemann() < 1e-9);
    }

    #[test]
    fn glue_rejects_collision_and_unverified() {
        let c1 = build_cone(&circle()).unwrap();
        let t2 = MetricSpec::from_strings("s1b", &["phi"], &[("1,1", "1")], &[(-1.0, 1.0)]).unwrap();
        let c2 = build_cone(&t2).unwrap(); // also uses "r"
        let f1 = verify_factor(c1.total.clone(), parse("r^2/2").unwrap(), 42).unwrap();
        let f2 = verify_factor(c2.total.clone(), parse("r^2/2").unwrap(), 42).unwrap();
        assert!(glue_product(&[f1, f2]).is_err());
        // unverified factor: wrong v
        assert!(verify_factor(c1.total, parse("r^3").unwrap(), 42).is_err());
    }

    #[test]
    fn two_dim_hom_implies_flat() {
        // any 2-dim metric passing check_hom must be flat
        let c = build_cone(&circle()).unwrap();
        for p in sampling::sample_points(&c.total, 42, 10).unwrap() {
            let geo = geometry::riemann(&c.total, &p, 0).unwrap();
            assert!(geo.max_abs_riemann() < 1e-8);
        }
    }

    #[test]
    fn pack_unpack_round_trip() {
        let sol = ExtendedSolution {
            a: DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, -2.0]),
            lambda: DVector::from_vec(vec![0.7, -1.1]),
            mu: 0.25,
        };
        let a = pack_parallel(&sol, 1.7);
        assert_eq!(a[(0, 0)], 0.25);
        assert!((a[(0, 1)] + 1.7 * 0.7).abs() < 1e-15);
        assert!((a[(1, 2)] - 1.7 * 1.7 * 0.3).abs() < 1e-15);
        let back = unpack_parallel(&a, 1.7);
        assert!((back.a - sol.a).amax() < 1e-14);
        assert!((back.lambda - sol.lambda).amax() < 1e-14);
        assert_eq!(back.mu, sol.mu);
    }

    #[test]
    fn packed_metric_is_cone_metric() {
        // (a = g, λ = 0, μ = 1) packs to the cone metric itself at (r, x)
        let base = circle();
        let c = build_cone(&base).unwrap();
        let r = 1.3;
        let x = [0.4];
        let sol = ExtendedSolution {
            a: base.matrix_at(&x).unwrap(),
            lambda: DVector::zeros(1),
            mu: 1.0,
        };
        let a = pack_parallel(&sol, r);
        let mut p = vec![r];
        p.extend_from_slice(&x);
        let ghat = c.total.matrix_at(&p).unwrap();
        assert!((a - ghat).amax() < 1e-13);
    }
}
