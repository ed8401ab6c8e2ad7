//! Analysis of metric pairs sharing geodesics.
//!
//! Two metrics g and ḡ on the same chart share unparametrized geodesics
//! exactly when the Levi-Civita residual
//!     ḡ_{ij;k} − 2 ḡ_ij φ_k − ḡ_ik φ_j − ḡ_jk φ_i
//! vanishes, where ";" is the g-covariant derivative and
//!     φ = 1/(2(n+1)) · log |det ḡ / det g|.
//! Each such ḡ produces a solution (a, λ) of the linear system
//!     a_{ij;k} = λ_i g_jk + λ_j g_ik
//! via a_ij = e^{2φ} ḡ^{pq} g_pi g_qj and λ_i = −e^{2φ} φ_p ḡ^{pq} g_qi,
//! which is how pairs plug into the degree-of-mobility machinery.

use nalgebra::{DMatrix, DVector};

use crate::cone::ExtendedSolution;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{christoffel_jets, jet_mat_det, jet_mat_inv, JetTensor, MetricSpec};
use crate::jets::Jet;

/// Residual below which a pair counts as geodesically equivalent.
pub const EQUIV_TOL: f64 = 1e-7;
/// Residual below which the verdict is marked "strong".
pub const STRONG_TOL: f64 = 1e-9;

/// φ together with the induced (a, λ), all as jets at one point.
pub struct PairJets {
    /// jet of φ, one order higher than `a` and `lambda`
    pub phi: Jet,
    /// a_ij as a (0,2) jet tensor
    pub a: JetTensor,
    /// λ_i as a (0,1) jet tensor
    pub lambda: JetTensor,
}

/// The conformal weight φ of the pair at a point.
pub fn phi_of_pair(g: &MetricSpec, gbar: &MetricSpec, point: &[f64]) -> Result<f64> {
    Ok(pair_jets(g, gbar, point, 0)?.phi.value())
}

/// Evaluate φ, a, λ as jets of the requested order (φ one order higher,
/// so that its gradient is available at full order).
pub fn pair_jets(
    g: &MetricSpec,
    gbar: &MetricSpec,
    point: &[f64],
    order: usize,
) -> Result<PairJets> {
    let n = g.dim;
    if gbar.dim != n {
        return Err(Error::Malformed(format!(
            "pair dimensions differ: {} vs {}",
            n, gbar.dim
        )));
    }
    let gj = g.eval_jets(point, order + 1)?;
    let gbj = gbar.eval_jets(point, order + 1)?;
    let det_g = jet_mat_det(&gj, n)?;
    let det_gb = jet_mat_det(&gbj, n)?;
    let phi = det_gb
        .div(&det_g)?
        .compose_elementary("abs")?
        .compose_elementary("log")?
        .scale(1.0 / (2.0 * (n as f64 + 1.0)));
    let gb_inv = jet_mat_inv(&gbj, n)?;
    let e2phi = phi.scale(2.0).compose_elementary("exp")?.truncate(order);
    let gt: Vec<Jet> = gj.iter().map(|j| j.truncate(order)).collect();
    let gbit: Vec<Jet> = gb_inv.iter().map(|j| j.truncate(order)).collect();
    let phi_grad: Vec<Jet> = (0..n).map(|p| phi.diff(p)).collect();

    let mut a_comps = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Jet::constant(0.0, n, order);
            for p in 0..n {
                for q in 0..n {
                    acc = acc.add(&gbit[p * n + q].mul(&gt[p * n + i]).mul(&gt[q * n + j]));
                }
            }
            a_comps.push(acc.mul(&e2phi));
        }
    }
    let mut l_comps = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = Jet::constant(0.0, n, order);
        for p in 0..n {
            for q in 0..n {
                acc = acc.add(&phi_grad[p].mul(&gbit[p * n + q]).mul(&gt[q * n + i]));
            }
        }
        l_comps.push(acc.mul(&e2phi).scale(-1.0));
    }
    Ok(PairJets {
        phi,
        a: JetTensor {
            n,
            upper: vec![false, false],
            comps: a_comps,
        },
        lambda: JetTensor {
            n,
            upper: vec![false],
            comps: l_comps,
        },
    })
}

/// Numeric (a, λ) of the pair at a point, cross-checked against the trace
/// identity λ_k = ½ ∂_k (a_ij g^ij).
pub fn a_lambda_of_pair(
    g: &MetricSpec,
    gbar: &MetricSpec,
    point: &[f64],
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = g.dim;
    let pj = pair_jets(g, gbar, point, 1)?;
    let gj = g.eval_jets(point, 1)?;
    let ginv = jet_mat_inv(&gj, n)?;
    let mut trace = Jet::constant(0.0, n, 1);
    for i in 0..n {
        for j in 0..n {
            trace = trace.add(&pj.a.comps[i * n + j].mul(&ginv[i * n + j]));
        }
    }
    let lam = DVector::from_iterator(n, pj.lambda.comps.iter().map(|j| j.value()));
    let scale = 1.0 + lam.amax();
    for k in 0..n {
        let alt = 0.5 * trace.diff(k).value();
        if (alt - lam[k]).abs() > 1e-6 * scale {
            return Err(Error::Verification(format!(
                "trace identity for λ_{} failed: direct {} vs ½∂(tr) {}",
                k + 1,
                lam[k],
                alt
            )));
        }
    }
    let a = DMatrix::from_fn(n, n, |i, j| pj.a.comps[i * n + j].value());
    Ok((a, lam))
}

/// Outcome of the pointwise geodesic-equivalence test.
#[derive(Clone, Debug)]
pub struct EquivReport {
    /// max relative residual of the Levi-Civita comparison equation
    pub max_lc_residual: f64,
    /// max relative residual of a_{ij;k} − λ_i g_jk − λ_j g_ik
    pub max_basic_residual: f64,
    pub equivalent: bool,
    pub strong: bool,
}

/// Check geodesic equivalence of (g, ḡ) at the given sample points.
pub fn check_geodesic_equiv(
    g: &MetricSpec,
    gbar: &MetricSpec,
    points: &[Vec<f64>],
) -> Result<EquivReport> {
    let n = g.dim;
    let mut max_lc = 0.0f64;
    let mut max_basic = 0.0f64;
    for p in points {
        let gamma = christoffel_jets(g, p, 1)?;
        let pj = pair_jets(g, gbar, p, 1)?;
        let phi_k: Vec<f64> = (0..n).map(|k| pj.phi.diff(k).value()).collect();
        let gb = JetTensor {
            n,
            upper: vec![false, false],
            comps: gbar.eval_jets(p, 1)?,
        };
        let gb_val = gb.values();
        let gb_cov = gb.covd(&gamma).values();
        let gb_scale = gb_val.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let phi_scale = phi_k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let lc_ref = 1.0 + gb_cov.iter().fold(0.0f64, |m, v| m.max(v.abs())) + gb_scale * phi_scale;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let r = gb_cov[(i * n + j) * n + k]
                        - 2.0 * gb_val[i * n + j] * phi_k[k]
                        - gb_val[i * n + k] * phi_k[j]
                        - gb_val[j * n + k] * phi_k[i];
                    max_lc = max_lc.max(r.abs() / lc_ref);
                }
            }
        }
        max_basic = max_basic.max(basic_residual(g, p, &gamma, &pj.a, &pj.lambda)?);
    }
    Ok(EquivReport {
        max_lc_residual: max_lc,
        max_basic_residual: max_basic,
        equivalent: max_lc < EQUIV_TOL && max_basic < EQUIV_TOL,
        strong: max_lc < STRONG_TOL && max_basic < STRONG_TOL,
    })
}

/// Relative residual of a_{ij;k} − λ_i g_jk − λ_j g_ik at one point.
fn basic_residual(
    g: &MetricSpec,
    point: &[f64],
    gamma: &JetTensor,
    a: &JetTensor,
    lambda: &JetTensor,
) -> Result<f64> {
    let n = g.dim;
    let a_cov = a.covd(gamma).values();
    let lam: Vec<f64> = lambda.comps.iter().map(|j| j.value()).collect();
    let g_val: Vec<f64> = g.eval_jets(point, 0)?.iter().map(|j| j.value()).collect();
    let scale = 1.0
        + a_cov.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        + lam.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            * g_val.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let r = a_cov[(i * n + j) * n + k]
                    - lam[i] * g_val[j * n + k]
                    - lam[j] * g_val[i * n + k];
                worst = worst.max(r.abs() / scale);
            }
        }
    }
    Ok(worst)
}

/// The full extended solution (a, λ, μ) induced by the pair, given the
/// constant B of g; μ is recovered from the trace of λ_{i;j} = μ g + B a.
pub fn pair_solution(
    g: &MetricSpec,
    gbar: &MetricSpec,
    b: f64,
    point: &[f64],
) -> Result<ExtendedSolution> {
    let n = g.dim;
    let gamma = christoffel_jets(g, point, 1)?;
    let pj = pair_jets(g, gbar, point, 1)?;
    let lam_cov = pj.lambda.covd(&gamma).values();
    let gj = g.eval_jets(point, 0)?;
    let ginv = jet_mat_inv(&gj, n)?;
    let mut tr_lam = 0.0;
    let mut tr_a = 0.0;
    for i in 0..n {
        for j in 0..n {
            let gij = ginv[i * n + j].value();
            tr_lam += gij * lam_cov[i * n + j];
            tr_a += gij * pj.a.comps[i * n + j].value();
        }
    }
    Ok(ExtendedSolution {
        a: DMatrix::from_fn(n, n, |i, j| pj.a.comps[i * n + j].value()),
        lambda: DVector::from_iterator(n, pj.lambda.comps.iter().map(|j| j.value())),
        mu: (tr_lam - b * tr_a) / n as f64,
    })
}

/// The constant of ḡ, computed from the pair data on the g side:
/// B̄ = −e^{−2φ} (μ + φ_p λ^p), indices raised with g.
pub fn bar_b(
    g: &MetricSpec,
    gbar: &MetricSpec,
    sol: &ExtendedSolution,
    point: &[f64],
) -> Result<f64> {
    let n = g.dim;
    let pj = pair_jets(g, gbar, point, 0)?;
    let gj = g.eval_jets(point, 0)?;
    let ginv = jet_mat_inv(&gj, n)?;
    let mut phil = 0.0;
    for p in 0..n {
        for q in 0..n {
            phil += pj.phi.diff(p).value() * ginv[p * n + q].value() * sol.lambda[q];
        }
    }
    Ok(-(-2.0 * pj.phi.value()).exp() * (sol.mu + phil))
}

/// Result of testing whether a vector field is projective for g.
#[derive(Clone, Debug)]
pub struct ProjectiveFieldReport {
    pub a: DMatrix<f64>,
    pub lambda: DVector<f64>,
    /// max relative residual of a_{ij;k} − λ_i g_jk − λ_j g_ik over the points
    pub residual: f64,
    pub is_projective: bool,
}

/// Build the candidate solution attached to a vector field v:
///     a^v = L_v g − 1/(n+1) · tr(g⁻¹ L_v g) · g
/// with λ from the trace identity, and test the defining equation at the
/// given points.  v is projective for g exactly when the residual vanishes.
pub fn projective_field_solution(
    g: &MetricSpec,
    v: &[Expr],
    points: &[Vec<f64>],
) -> Result<ProjectiveFieldReport> {
    let n = g.dim;
    if v.len() != n {
        return Err(Error::Malformed(format!(
            "vector field has {} components, metric dimension is {}",
            v.len(),
            n
        )));
    }
    if points.is_empty() {
        return Err(Error::Malformed("no sample points given".into()));
    }
    let mut worst = 0.0f64;
    let mut a_out = DMatrix::zeros(n, n);
    let mut lam_out = DVector::zeros(n);
    for (pt_idx, p) in points.iter().enumerate() {
        let order = 1;
        let gj = g.eval_jets(p, order + 1)?;
        let vj: Vec<Jet> = v
            .iter()
            .map(|e| e.eval_jet(p, order + 1, &g.coords))
            .collect::<Result<Vec<_>>>()?;
        // (L_v g)_ij = v^k ∂_k g_ij + g_kj ∂_i v^k + g_ik ∂_j v^k
        let mut lie = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Jet::constant(0.0, n, order);
                for k in 0..n {
                    acc = acc.add(&vj[k].truncate(order).mul(&gj[i * n + j].diff(k)));
                    acc = acc.add(&gj[k * n + j].truncate(order).mul(&vj[k].diff(i)));
                    acc = acc.add(&gj[i * n + k].truncate(order).mul(&vj[k].diff(j)));
                }
                lie.push(acc);
            }
        }
        let ginv = jet_mat_inv(&gj, n)?;
        let mut tr = Jet::constant(0.0, n, order);
        for i in 0..n {
            for j in 0..n {
                tr = tr.add(&ginv[i * n + j].truncate(order).mul(&lie[i * n + j]));
            }
        }
        let tr_frac = tr.scale(1.0 / (n as f64 + 1.0));
        let mut a_comps = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                a_comps.push(lie[i * n + j].sub(&tr_frac.mul(&gj[i * n + j].truncate(order))));
            }
        }
        let a = JetTensor {
            n,
            upper: vec![false, false],
            comps: a_comps,
        };
        // λ_k = ½ ∂_k (a_ij g^ij); a_ij g^ij = tr(L_vg) − n/(n+1)·tr = tr/(n+1)
        let lambda = JetTensor {
            n,
            upper: vec![false],
            comps: (0..n)
                .map(|k| tr_frac.diff(k).scale(0.5))
                .collect(),
        };
        let gamma = christoffel_jets(g, p, 1)?;
        worst = worst.max(basic_residual(g, p, &gamma, &a, &lambda)?);
        if pt_idx == 0 {
            a_out = DMatrix::from_fn(n, n, |i, j| a.comps[i * n + j].value());
            lam_out = DVector::from_iterator(n, lambda.comps.iter().map(|j| j.value()));
        }
    }
    Ok(ProjectiveFieldReport {
        a: a_out,
        lambda: lam_out,
        residual: worst,
        is_projective: worst < EQUIV_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::expr::parse;
    use crate::sampling;

    fn scaled(m: &MetricSpec, c: f64) -> MetricSpec {
        let comps: Vec<Expr> = m
            .comps
            .iter()
            .map(|e| Expr::Mul(Box::new(Expr::Num(c)), Box::new(e.clone())))
            .collect();
        let coord_refs: Vec<&str> = m.coords.iter().map(|s| s.as_str()).collect();
        let mut out =
            MetricSpec::new(&format!("{}x{c}", m.label), &coord_refs, comps, &m.sample_box)
                .unwrap();
        out.signature_hint = None;
        out
    }

    #[test]
    fn phi_is_antisymmetric_under_swap() {
        let e = corpus::get("flat_projective_pair3").unwrap();
        let gbar = e.gbar.unwrap();
        for p in sampling::sample_points(&e.metric, 7, 5).unwrap() {
            let fwd = phi_of_pair(&e.metric, &gbar, &p).unwrap();
            let bwd = phi_of_pair(&gbar, &e.metric, &p).unwrap();
            assert!((fwd + bwd).abs() < 1e-12, "{fwd} vs {bwd}");
            assert!(fwd.abs() > 1e-6, "φ should not vanish for this pair");
        }
    }

    #[test]
    fn conformal_pair_closed_form() {
        // ḡ = c·g  ⇒  a = |c|^{n/(n+1)} c⁻¹ g, λ = 0, B̄ = B/c
        let e = corpus::get("sphere2").unwrap();
        for &c in &[2.0, -0.5] {
            let gbar = scaled(&e.metric, c);
            let pts = sampling::sample_points(&e.metric, 3, 5).unwrap();
            let kappa = c.abs().powf(2.0 / 3.0) / c;
            for p in &pts {
                let (a, lam) = a_lambda_of_pair(&e.metric, &gbar, p).unwrap();
                let g = e.metric.matrix_at(p).unwrap();
                assert!((a.clone() - g * kappa).amax() < 1e-10 * a.amax());
                assert!(lam.amax() < 1e-10);
                let sol = pair_solution(&e.metric, &gbar, -1.0, p).unwrap();
                let bb = bar_b(&e.metric, &gbar, &sol, p).unwrap();
                assert!(
                    (bb - (-1.0 / c)).abs() < 1e-8,
                    "c = {c}: B̄ = {bb}, expected {}",
                    -1.0 / c
                );
            }
            let rep = check_geodesic_equiv(&e.metric, &gbar, &pts).unwrap();
            assert!(rep.strong, "{rep:?}");
        }
    }

    #[test]
    fn projective_pullback_pair_is_equivalent() {
        let e = corpus::get("flat_projective_pair3").unwrap();
        let gbar = e.gbar.unwrap();
        let pts = sampling::sample_points(&e.metric, 11, 8).unwrap();
        let rep = check_geodesic_equiv(&e.metric, &gbar, &pts).unwrap();
        assert!(rep.equivalent, "{rep:?}");
        // ḡ is a pullback of a flat metric, so its constant vanishes too
        for p in &pts {
            let sol = pair_solution(&e.metric, &gbar, 0.0, p).unwrap();
            let bb = bar_b(&e.metric, &gbar, &sol, p).unwrap();
            assert!(bb.abs() < 1e-7, "B̄ = {bb}");
        }
    }

    #[test]
    fn unrelated_metrics_are_rejected() {
        let g = corpus::get("sphere2").unwrap().metric;
        let mut h = corpus::get("hyperbolic2").unwrap().metric;
        h.sample_box = g.sample_box.clone();
        let pts = sampling::sample_points(&g, 5, 6).unwrap();
        let rep = check_geodesic_equiv(&g, &h, &pts).unwrap();
        assert!(!rep.equivalent, "{rep:?}");
        assert!(rep.max_lc_residual > 1e-3);
    }

    #[test]
    fn special_projective_field_on_flat_space() {
        // v^k = x1·x_k is projective for the flat metric:
        // a_ij = δ_i1 x_j + δ_j1 x_i, λ = e_1
        let g = corpus::get("flat3").unwrap().metric;
        let v = vec![
            parse("x1*x1").unwrap(),
            parse("x1*x2").unwrap(),
            parse("x1*x3").unwrap(),
        ];
        let pts = sampling::sample_points(&g, 9, 6).unwrap();
        let rep = projective_field_solution(&g, &v, &pts).unwrap();
        assert!(rep.is_projective, "{rep:?}");
        let p = &pts[0];
        assert!((rep.a[(0, 1)] - p[1]).abs() < 1e-10);
        assert!((rep.a[(0, 0)] - 2.0 * p[0]).abs() < 1e-10);
        assert!(rep.a[(1, 2)].abs() < 1e-10);
        assert!((rep.lambda[0] - 1.0).abs() < 1e-10 && rep.lambda[1].abs() < 1e-10);

        // a mere diffeomorphism generator that is not projective
        let w = vec![
            parse("x1^3").unwrap(),
            parse("0").unwrap(),
            parse("0").unwrap(),
        ];
        let rep = projective_field_solution(&g, &w, &pts).unwrap();
        assert!(!rep.is_projective, "{rep:?}");
    }

    #[test]
    fn killing_field_gives_zero_solution() {
        // rotations are affine, so a^v is proportional to g with λ = 0;
        // for a Killing field the traceless part vanishes entirely
        let g = corpus::get("flat3").unwrap().metric;
        let v = vec![
            parse("-x2").unwrap(),
            parse("x1").unwrap(),
            parse("0").unwrap(),
        ];
        let pts = sampling::sample_points(&g, 13, 4).unwrap();
        let rep = projective_field_solution(&g, &v, &pts).unwrap();
        assert!(rep.is_projective);
        assert!(rep.a.amax() < 1e-12 && rep.lambda.amax() < 1e-12);
    }
}
