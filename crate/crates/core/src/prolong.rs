//! Flat sections of a linear connection on a trivialized bundle.
//!
//! A connection is given by its coefficient matrices C_k(x): sections s with
//! ∂_k s + C_k s = 0.  On a simply-connected chart the flat sections are in
//! bijection with fiber vectors at a point annihilated by the holonomy
//! algebra; for real-analytic data that algebra is generated by the
//! connection curvature F_kl and its covariant derivatives, supplemented
//! here by curvature sampled at other points and transported back.
//!
//! The joint kernel of those generators is computed by rank-revealing SVD
//! with an explicit indecision error when singular values straddle the
//! tolerance without a clear gap.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{christoffel_jets, MetricSpec};
use crate::jets::Jet;
use crate::sampling;

pub type CoeffFn = Box<dyn Fn(&[f64], usize) -> Result<Vec<Vec<Jet>>> + Send + Sync>;

/// Linear connection on a trivial bundle over the chart of `base`.
/// `coeff(point, order)` returns, for each base direction k, the N×N matrix
/// C_k as jets of the requested order (row-major).
pub struct Connection {
    pub base: MetricSpec,
    pub fiber_dim: usize,
    coeff: CoeffFn,
}

/// Engine options; the defaults match the documented tolerances.
#[derive(Clone, Debug)]
pub struct ProlongOpts {
    /// Covariant-derivative depth of the curvature generators.
    pub deriv_order: usize,
    /// Curvature sampled at this many extra points, transported back.
    pub extra_points: usize,
    /// Relative singular-value tolerance for rank decisions.
    pub svd_tol: f64,
    pub seed: u64,
    /// Transport resolution: integrator steps per unit coordinate length.
    pub steps_per_unit: f64,
}

impl Default for ProlongOpts {
    fn default() -> Self {
        ProlongOpts {
            deriv_order: 2,
            extra_points: 8,
            svd_tol: 1e-8,
            seed: sampling::DEFAULT_SEED,
            steps_per_unit: 200.0,
        }
    }
}

/// Result of a flat-section computation.
#[derive(Clone, Debug)]
pub struct FlatSections {
    pub dim: usize,
    /// fiber_dim × dim matrix; columns are the flat-section values at `point`.
    pub basis: DMatrix<f64>,
    pub point: Vec<f64>,
    pub generator_count: usize,
}

impl Connection {
    pub fn new(base: MetricSpec, fiber_dim: usize, coeff: CoeffFn) -> Connection {
        Connection {
            base,
            fiber_dim,
            coeff,
        }
    }

    pub fn coeff_jets(&self, point: &[f64], order: usize) -> Result<Vec<Vec<Jet>>> {
        (self.coeff)(point, order)
    }

    pub fn coeff_values(&self, point: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        let n = self.fiber_dim;
        Ok(self
            .coeff_jets(point, 0)?
            .into_iter()
            .map(|c| DMatrix::from_fn(n, n, |i, j| c[i * n + j].value()))
            .collect())
    }

    /// Connection curvature F_kl = ∂_k C_l − ∂_l C_k + [C_k, C_l] for k < l.
    pub fn curvature(&self, point: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        Ok(self
            .curvature_jets(point, 0)?
            .into_iter()
            .map(|f| jet_mat_values(&f, self.fiber_dim))
            .collect())
    }

    fn curvature_jets(&self, point: &[f64], order: usize) -> Result<Vec<Vec<Jet>>> {
        let nb = self.base.dim;
        let nf = self.fiber_dim;
        let c = self.coeff_jets(point, order + 1)?;
        let mut out = Vec::new();
        for k in 0..nb {
            for l in k + 1..nb {
                let mut f = Vec::with_capacity(nf * nf);
                for i in 0..nf {
                    for j in 0..nf {
                        let mut acc = c[l][i * nf + j].diff(k).sub(&c[k][i * nf + j].diff(l));
                        for p in 0..nf {
                            acc.add_scaled(
                                &c[k][i * nf + p].mul(&c[l][p * nf + j]).truncate(order),
                                1.0,
                            );
                            acc.add_scaled(
                                &c[l][i * nf + p].mul(&c[k][p * nf + j]).truncate(order),
                                -1.0,
                            );
                        }
                        f.push(acc);
                    }
                }
                out.push(f);
            }
        }
        Ok(out)
    }

    /// Holonomy-algebra generators at `point`: curvature, its covariant
    /// derivatives up to `opts.deriv_order`, and curvature at sampled points
    /// transported back along coordinate staircase paths.
    pub fn generators(&self, point: &[f64], opts: &ProlongOpts) -> Result<Vec<DMatrix<f64>>> {
        let nf = self.fiber_dim;
        let d = opts.deriv_order;
        let c = self.coeff_jets(point, d + 1)?;
        let mut gens: Vec<DMatrix<f64>> = Vec::new();
        let mut level = self.curvature_jets(point, d)?;
        for x in &level {
            gens.push(jet_mat_values(x, nf));
        }
        for _ in 0..d {
            let mut next = Vec::new();
            for x in &level {
                let order = x[0].order;
                for m in 0..self.base.dim {
                    // ∇_m X = ∂_m X + [C_m, X]
                    let mut dx = Vec::with_capacity(nf * nf);
                    for i in 0..nf {
                        for j in 0..nf {
                            let mut acc = x[i * nf + j].diff(m);
                            for p in 0..nf {
                                acc.add_scaled(
                                    &c[m][i * nf + p].mul(&x[p * nf + j]).truncate(order - 1),
                                    1.0,
                                );
                                acc.add_scaled(
                                    &x[i * nf + p].mul(&c[m][p * nf + j]).truncate(order - 1),
                                    -1.0,
                                );
                            }
                            dx.push(acc);
                        }
                    }
                    gens.push(jet_mat_values(&dx, nf));
                    next.push(dx);
                }
            }
            level = next;
        }
        // curvature at other points, conjugated by transport
        if opts.extra_points > 0 {
            let pts = sampling::sample_points(&self.base, opts.seed.wrapping_add(1), opts.extra_points)?;
            for q in &pts {
                let fq = self.curvature(q)?;
                let path = staircase(q, point);
                let t = self.transport(&path, DMatrix::identity(nf, nf), opts.steps_per_unit)?;
                let tinv = t.clone().try_inverse().ok_or(Error::RankIndecision {
                    above: 0.0,
                    below: 0.0,
                    ratio: 0.0,
                })?;
                for f in fq {
                    gens.push(&t * f * &tinv);
                }
            }
        }
        Ok(gens)
    }

    /// Transport fiber columns along a polyline: solves S' = −C(γ') S with a
    /// classical 4th-order integrator.
    pub fn transport(
        &self,
        path: &[Vec<f64>],
        sections: DMatrix<f64>,
        steps_per_unit: f64,
    ) -> Result<DMatrix<f64>> {
        let nb = self.base.dim;
        let mut s = sections;
        for seg in path.windows(2) {
            let (a, b) = (&seg[0], &seg[1]);
            let len: f64 = (0..nb)
                .map(|i| (b[i] - a[i]).powi(2))
                .sum::<f64>()
                .sqrt();
            if len == 0.0 {
                continue;
            }
            let steps = ((len * steps_per_unit).ceil() as usize).max(8);
            let dx: Vec<f64> = (0..nb).map(|i| (b[i] - a[i]) / steps as f64).collect();
            let cdir = |t: f64| -> Result<DMatrix<f64>> {
                let pt: Vec<f64> = (0..nb).map(|i| a[i] + (b[i] - a[i]) * t).collect();
                let cs = self.coeff_values(&pt)?;
                let mut m = DMatrix::zeros(self.fiber_dim, self.fiber_dim);
                for k in 0..nb {
                    m += &cs[k] * dx[k];
                }
                Ok(m)
            };
            for step in 0..steps {
                let t0 = step as f64 / steps as f64;
                let th = t0 + 0.5 / steps as f64;
                let t1 = t0 + 1.0 / steps as f64;
                let c0 = cdir(t0)?;
                let ch = cdir(th)?;
                let c1 = cdir(t1)?;
                let k1 = -(&c0 * &s);
                let k2 = -(&ch * (&s + &k1 * 0.5));
                let k3 = -(&ch * (&s + &k2 * 0.5));
                let k4 = -(&c1 * (&s + &k3));
                s += (k1 + k2 * 2.0 + k3 * 2.0 + k4) / 6.0;
            }
        }
        Ok(s)
    }

    /// Dimension and basis of the space of flat sections.
    pub fn flat_sections(&self, opts: &ProlongOpts) -> Result<FlatSections> {
        let p = sampling::base_point(&self.base, opts.seed)?;
        self.flat_sections_at(&p, opts)
    }

    pub fn flat_sections_at(&self, point: &[f64], opts: &ProlongOpts) -> Result<FlatSections> {
        let gens = self.generators(point, opts)?;
        let basis = joint_kernel(&gens, self.fiber_dim, opts.svd_tol)?;
        Ok(FlatSections {
            dim: basis.ncols(),
            basis,
            point: point.to_vec(),
            generator_count: gens.len(),
        })
    }
}

fn jet_mat_values(m: &[Jet], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| m[i * n + j].value())
}

/// Axis-aligned staircase path from `a` to `b` (one coordinate at a time).
pub fn staircase(a: &[f64], b: &[f64]) -> Vec<Vec<f64>> {
    let mut path = vec![a.to_vec()];
    let mut cur = a.to_vec();
    for i in 0..a.len() {
        if cur[i] != b[i] {
            cur[i] = b[i];
            path.push(cur.clone());
        }
    }
    path
}

/// Joint kernel of a set of fiber endomorphisms, as an orthonormal basis
/// matrix (n × dim).  Errors with `RankIndecision` when singular values
/// straddle the tolerance with a gap ratio below 10.
pub fn joint_kernel(gens: &[DMatrix<f64>], n: usize, tol_rel: f64) -> Result<DMatrix<f64>> {
    // Treat generators that are zero to round-off as absent.
    let ref_norm = gens
        .iter()
        .map(|g| g.norm())
        .fold(0.0f64, f64::max);
    let mut k = DMatrix::<f64>::identity(n, n);
    if ref_norm < 1e-9 {
        // all generators vanish to round-off: everything is invariant
        return Ok(k);
    }
    let active: Vec<&DMatrix<f64>> = gens
        .iter()
        .filter(|g| g.norm() > 1e-9 * ref_norm)
        .collect();
    loop {
        let before = k.ncols();
        for g in &active {
            if k.ncols() == 0 {
                return Ok(k);
            }
            let m = *g * &k;
            let tol = tol_rel * g.norm();
            let svd = nalgebra::SVD::new(m, false, true);
            let vt = svd.v_t.as_ref().unwrap();
            let mut sv: Vec<(f64, usize)> = svd
                .singular_values
                .iter()
                .copied()
                .zip(0..)
                .collect();
            sv.sort_by(|a, b| b.0.total_cmp(&a.0));
            let nonzero = sv.iter().filter(|&&(s, _)| s >= tol).count();
            if nonzero > 0 && nonzero < sv.len() {
                let above = sv[nonzero - 1].0;
                let below = sv[nonzero].0;
                if below > 0.0 && above / below < 10.0 {
                    return Err(Error::RankIndecision {
                        above,
                        below,
                        ratio: above / below,
                    });
                }
            }
            if nonzero == 0 {
                continue; // g annihilates all of k already
            }
            let keep: Vec<usize> = sv[nonzero..].iter().map(|&(_, i)| i).collect();
            let mut v_small = DMatrix::zeros(k.ncols(), keep.len());
            for (col, &i) in keep.iter().enumerate() {
                for row in 0..k.ncols() {
                    v_small[(row, col)] = vt[(i, row)];
                }
            }
            k = &k * v_small;
        }
        if k.ncols() == before {
            return Ok(k);
        }
    }
}

/// Vectors annihilated by every generator.
pub fn invariant_vectors(gens: &[DMatrix<f64>], n: usize, tol: f64) -> Result<DMatrix<f64>> {
    joint_kernel(gens, n, tol)
}

/// Covectors invariant under the dual action (kernel of the transposes).
pub fn invariant_covectors(gens: &[DMatrix<f64>], n: usize, tol: f64) -> Result<DMatrix<f64>> {
    let t: Vec<DMatrix<f64>> = gens.iter().map(|g| g.transpose()).collect();
    joint_kernel(&t, n, tol)
}

/// Symmetric bilinear forms h with h(G·,·) + h(·,G·) = 0 for all generators.
pub fn invariant_symforms(gens: &[DMatrix<f64>], n: usize, tol: f64) -> Result<DMatrix<f64>> {
    let induced: Vec<DMatrix<f64>> = gens.iter().map(|g| induce_sym2_cotangent(g)).collect();
    joint_kernel(&induced, n * (n + 1) / 2, tol)
}

/// Index pairs (i ≤ j) enumerating the symmetric-matrix fiber.
pub fn sym_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            out.push((i, j));
        }
    }
    out
}

/// Decode a sym-fiber coordinate vector into the symmetric matrix.
pub fn sym_to_matrix(v: &DVector<f64>, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for (idx, (i, j)) in sym_pairs(n).into_iter().enumerate() {
        m[(i, j)] = v[idx];
        m[(j, i)] = v[idx];
    }
    m
}

/// Encode a symmetric matrix into sym-fiber coordinates.
pub fn matrix_to_sym(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    DVector::from_iterator(
        n * (n + 1) / 2,
        sym_pairs(n).into_iter().map(|(i, j)| m[(i, j)]),
    )
}

/// Action induced on symmetric (0,2)-forms by a tangent endomorphism X:
/// (X·h) = −(Xᵀ h + h X), expressed in the sym-fiber coordinates.
pub fn induce_sym2_cotangent(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let pairs = sym_pairs(n);
    let nn = pairs.len();
    let mut out = DMatrix::zeros(nn, nn);
    for (col, &(a, b)) in pairs.iter().enumerate() {
        let mut h = DMatrix::zeros(n, n);
        h[(a, b)] = 1.0;
        h[(b, a)] = 1.0;
        let act = -(x.transpose() * &h + &h * x);
        for (row, &(i, j)) in pairs.iter().enumerate() {
            out[(row, col)] = act[(i, j)];
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Connections on concrete bundles

/// The Levi-Civita connection on the tangent bundle: (C_k)^i_j = Γ^i_{kj}.
pub fn tangent_connection(m: &MetricSpec) -> Connection {
    let spec = m.clone();
    let n = m.dim;
    Connection::new(
        m.clone(),
        n,
        Box::new(move |point, order| {
            let gamma = christoffel_jets(&spec, point, order)?;
            let mut out = Vec::with_capacity(n);
            for k in 0..n {
                let mut ck = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        ck.push(gamma.get(&[i, k, j]).clone());
                    }
                }
                out.push(ck);
            }
            Ok(out)
        }),
    )
}

/// The induced connection on symmetric (0,2)-tensors:
/// ∂_k h_ij − Γ^p_{ki} h_pj − Γ^p_{kj} h_ip = 0 for parallel h.
pub fn sym2_cotangent_connection(m: &MetricSpec) -> Connection {
    let spec = m.clone();
    let n = m.dim;
    let pairs = sym_pairs(n);
    let nf = pairs.len();
    Connection::new(
        m.clone(),
        nf,
        Box::new(move |point, order| {
            let gamma = christoffel_jets(&spec, point, order)?;
            let zero = Jet::constant(0.0, n, order);
            let mut out = Vec::with_capacity(n);
            for k in 0..n {
                let mut ck = vec![zero.clone(); nf * nf];
                for (row, &(i, j)) in pairs.iter().enumerate() {
                    // (C_k h)_ij = −Γ^p_{ki} h_pj − Γ^p_{kj} h_ip
                    for p in 0..n {
                        let (a, b) = if p <= j { (p, j) } else { (j, p) };
                        let col = pairs.iter().position(|&x| x == (a, b)).unwrap();
                        let t = gamma.get(&[p, k, i]);
                        ck[row * nf + col] = ck[row * nf + col].sub(t);
                        let (a, b) = if i <= p { (i, p) } else { (p, i) };
                        let col = pairs.iter().position(|&x| x == (a, b)).unwrap();
                        let t = gamma.get(&[p, k, j]);
                        ck[row * nf + col] = ck[row * nf + col].sub(t);
                    }
                }
                out.push(ck);
            }
            Ok(out)
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::build_cone;
    use crate::geometry;

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

    #[test]
    fn flat_tangent_full_dim() {
        let c = tangent_connection(&flat3());
        let fs = c.flat_sections(&ProlongOpts::default()).unwrap();
        assert_eq!(fs.dim, 3);
    }

    #[test]
    fn sphere_tangent_no_parallel_vectors() {
        let c = tangent_connection(&sphere2());
        let fs = c.flat_sections(&ProlongOpts::default()).unwrap();
        assert_eq!(fs.dim, 0);
    }

    #[test]
    fn curvature_matches_riemann_endomorphisms() {
        let m = sphere2();
        let c = tangent_connection(&m);
        let p = [0.3, -0.4];
        let f = c.curvature(&p).unwrap();
        let geo = geometry::riemann(&m, &p, 0).unwrap();
        // F_kl with (k,l) = (0,1): (F_01)^i_j = R^i_{j01}
        assert_eq!(f.len(), 1);
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (f[0][(i, j)] - geo.riemann_at(i, j, 0, 1)).abs() < 1e-8,
                    "({i},{j})"
                );
            }
        }
    }

    #[test]
    fn cone_over_sphere_invariants() {
        // cone over unit S² = flat R³: every fiber vector invariant
        let c = build_cone(&sphere2()).unwrap();
        let conn = tangent_connection(&c.total);
        let opts = ProlongOpts::default();
        let p = sampling::base_point(&c.total, opts.seed).unwrap();
        let gens = conn.generators(&p, &opts).unwrap();
        let cov = invariant_covectors(&gens, 3, opts.svd_tol).unwrap();
        assert_eq!(cov.ncols(), 3);
        let sym = invariant_symforms(&gens, 3, opts.svd_tol).unwrap();
        assert_eq!(sym.ncols(), 6);
    }

    #[test]
    fn sym2_connection_on_flat_cone() {
        let c = build_cone(&sphere2()).unwrap();
        let conn = sym2_cotangent_connection(&c.total);
        let fs = conn.flat_sections(&ProlongOpts::default()).unwrap();
        assert_eq!(fs.dim, 6);
    }

    #[test]
    fn sym2_flat_sections_transport_home() {
        // transport a flat section around loops: must return to itself
        let c = build_cone(&sphere2()).unwrap();
        let conn = sym2_cotangent_connection(&c.total);
        let opts = ProlongOpts::default();
        let fs = conn.flat_sections(&opts).unwrap();
        let p = fs.point.clone();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..3 {
            let mut loop_path = vec![p.clone()];
            for _ in 0..3 {
                loop_path.push(sampling::point_in_box(&mut rng, &c.total.sample_box));
            }
            loop_path.push(p.clone());
            let out = conn
                .transport(&loop_path, fs.basis.clone(), 400.0)
                .unwrap();
            assert!(
                (&out - &fs.basis).amax() < 1e-6,
                "transport defect {}",
                (&out - &fs.basis).amax()
            );
        }
    }

    #[test]
    fn sphere_metric_is_parallel_symform() {
        // the metric itself must appear in the invariant symforms
        let m = sphere2();
        let conn = tangent_connection(&m);
        let opts = ProlongOpts::default();
        let p = sampling::base_point(&m, opts.seed).unwrap();
        let gens = conn.generators(&p, &opts).unwrap();
        let sym = invariant_symforms(&gens, 2, opts.svd_tol).unwrap();
        assert_eq!(sym.ncols(), 1); // only const·g on S²
        let g = m.matrix_at(&p).unwrap();
        let gv = matrix_to_sym(&g);
        // gv must lie in the span of sym's columns
        let proj = &sym * (sym.transpose() * &gv);
        assert!((proj - &gv).amax() < 1e-7 * gv.amax());
    }

    #[test]
    fn induced_action_formula() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 4;
        let x = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let mut h = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        h = (&h + h.transpose()) / 2.0;
        let act = induce_sym2_cotangent(&x);
        let hv = matrix_to_sym(&h);
        let got = sym_to_matrix(&(act * hv), n);
        let want = -(x.transpose() * &h + &h * &x);
        assert!((got - want).amax() < 1e-12);
    }

    #[test]
    fn monotone_in_generators() {
        let m = sphere2();
        let conn = tangent_connection(&m);
        let opts = ProlongOpts::default();
        let p = sampling::base_point(&m, opts.seed).unwrap();
        let gens = conn.generators(&p, &opts).unwrap();
        let d_few = invariant_symforms(&gens[..1], 2, opts.svd_tol)
            .unwrap()
            .ncols();
        let d_all = invariant_symforms(&gens, 2, opts.svd_tol).unwrap().ncols();
        assert!(d_all <= d_few);
    }

    #[test]
    fn seed_independence() {
        let m = sphere2();
        let conn = tangent_connection(&m);
        let mut dims = std::collections::HashSet::new();
        for seed in [42, 43, 44, 45, 46] {
            let opts = ProlongOpts {
                seed,
                ..Default::default()
            };
            dims.insert(conn.flat_sections(&opts).unwrap().dim);
        }
        assert_eq!(dims.len(), 1);
    }

    #[test]
    fn staircase_path() {
        let p = staircase(&[0.0, 1.0, 2.0], &[1.0, 1.0, 0.0]);
        assert_eq!(
            p,
            vec![
                vec![0.0, 1.0, 2.0],
                vec![1.0, 1.0, 2.0],
                vec![1.0, 1.0, 0.0]
            ]
        );
    }
}
