//! Metric algebra and curvature: Christoffel symbols, the Riemann tensor and
//! its covariant derivatives, signatures, and parallel transport.
//!
//! All derivatives are taken through jets of the metric components, so the
//! curvature quantities are exact to round-off.  The only integration in the
//! module is parallel transport (classical fixed-step RK4).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::jets::Jet;

/// Relative determinant tolerance for degeneracy rejection.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// A metric in an explicit coordinate chart.  The single source of geometric
/// truth: everything downstream evaluates these component expressions.
#[derive(Clone, Debug)]
pub struct MetricSpec {
    pub label: String,
    pub dim: usize,
    pub coords: Vec<String>,
    /// Full n×n table (mirrored from the stored upper triangle).
    pub comps: Vec<Expr>,
    pub sample_box: Vec<(f64, f64)>,
    pub signature_hint: Option<(usize, usize)>,
}

impl MetricSpec {
    /// Build from the upper triangle given as ("i,j", expression-source)
    /// pairs with 1-based i ≤ j; missing entries are zero.
    pub fn from_strings(
        label: &str,
        coords: &[&str],
        entries: &[(&str, &str)],
        sample_box: &[(f64, f64)],
    ) -> Result<MetricSpec> {
        let n = coords.len();
        let mut comps = vec![Expr::Num(0.0); n * n];
        for (key, src) in entries {
            let (i, j) = parse_key(key, n)?;
            let e = parse(src)?;
            comps[i * n + j] = e.clone();
            comps[j * n + i] = e;
        }
        MetricSpec::new(label, coords, comps, sample_box)
    }

    pub fn new(
        label: &str,
        coords: &[&str],
        comps: Vec<Expr>,
        sample_box: &[(f64, f64)],
    ) -> Result<MetricSpec> {
        let n = coords.len();
        if comps.len() != n * n {
            return Err(Error::Malformed(format!(
                "metric `{label}`: component table has {} entries, expected {}",
                comps.len(),
                n * n
            )));
        }
        if sample_box.len() != n {
            return Err(Error::Malformed(format!(
                "metric `{label}`: sample box dimension {} != {}",
                sample_box.len(),
                n
            )));
        }
        Ok(MetricSpec {
            label: label.to_string(),
            dim: n,
            coords: coords.iter().map(|s| s.to_string()).collect(),
            comps,
            sample_box: sample_box.to_vec(),
            signature_hint: None,
        })
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.comps[i * self.dim + j]
    }

    /// Jet table of the components at a point, row-major n×n.
    pub fn eval_jets(&self, point: &[f64], order: usize) -> Result<Vec<Jet>> {
        self.comps
            .iter()
            .map(|e| e.eval_jet(point, order, &self.coords))
            .collect()
    }

    pub fn matrix_at(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        let jets = self.eval_jets(point, 0)?;
        Ok(DMatrix::from_fn(self.dim, self.dim, |i, j| {
            jets[i * self.dim + j].value()
        }))
    }

    pub fn det_at(&self, point: &[f64]) -> Result<f64> {
        Ok(self.matrix_at(point)?.determinant())
    }

    pub fn is_nondegenerate_at(&self, point: &[f64]) -> Result<bool> {
        let g = self.matrix_at(point)?;
        let scale = g.amax().max(1e-300).powi(self.dim as i32);
        Ok(g.determinant().abs() > DEGENERACY_TOL * scale)
    }

    pub fn signature_at(&self, point: &[f64]) -> Result<(usize, usize)> {
        let g = self.matrix_at(point)?;
        Ok(signature_of(&g))
    }
}

fn parse_key(key: &str, n: usize) -> Result<(usize, usize)> {
    let bad = || Error::Malformed(format!("bad component key `{key}` for dim {n}"));
    let (a, b) = key.split_once(',').ok_or_else(bad)?;
    let i: usize = a.trim().parse().map_err(|_| bad())?;
    let j: usize = b.trim().parse().map_err(|_| bad())?;
    if i < 1 || j < 1 || i > n || j > n || i > j {
        return Err(bad());
    }
    Ok((i - 1, j - 1))
}

/// Signature (positive count, negative count) of a symmetric matrix, with
/// eigenvalues below 1e-10 of the largest counted as zero.
pub fn signature_of(g: &DMatrix<f64>) -> (usize, usize) {
    let sym = nalgebra::SymmetricEigen::new(g.clone());
    let scale = sym.eigenvalues.amax().max(1e-300);
    let mut p = 0;
    let mut q = 0;
    for &e in sym.eigenvalues.iter() {
        if e > 1e-10 * scale {
            p += 1;
        } else if e < -1e-10 * scale {
            q += 1;
        }
    }
    (p, q)
}

// ---------------------------------------------------------------------------
// Jet-valued matrix algebra

/// Invert an n×n matrix of jets by Gauss–Jordan elimination, pivoting on the
/// constant terms.
pub fn jet_mat_inv(a: &[Jet], n: usize) -> Result<Vec<Jet>> {
    let order = a[0].order;
    let nvars = a[0].nvars;
    let mut m: Vec<Jet> = a.to_vec();
    let mut inv: Vec<Jet> = (0..n * n)
        .map(|idx| Jet::constant(if idx % n == idx / n { 1.0 } else { 0.0 }, nvars, order))
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r1, &r2| {
                m[r1 * n + col]
                    .value()
                    .abs()
                    .total_cmp(&m[r2 * n + col].value().abs())
            })
            .unwrap();
        if m[pivot * n + col].value().abs() < 1e-300 {
            return Err(Error::DegenerateMetric { det: 0.0 });
        }
        if pivot != col {
            for c in 0..n {
                m.swap(col * n + c, pivot * n + c);
                inv.swap(col * n + c, pivot * n + c);
            }
        }
        let inv_piv = m[col * n + col].recip()?;
        for c in 0..n {
            m[col * n + c] = m[col * n + c].mul(&inv_piv);
            inv[col * n + c] = inv[col * n + c].mul(&inv_piv);
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * n + col].clone();
            if f.coeffs.iter().all(|&c| c == 0.0) {
                continue;
            }
            for c in 0..n {
                let t = f.mul(&m[col * n + c]);
                m[r * n + c] = m[r * n + c].sub(&t);
                let t = f.mul(&inv[col * n + c]);
                inv[r * n + c] = inv[r * n + c].sub(&t);
            }
        }
    }
    Ok(inv)
}

/// Determinant of an n×n matrix of jets (elimination on a copy).
pub fn jet_mat_det(a: &[Jet], n: usize) -> Result<Jet> {
    let order = a[0].order;
    let nvars = a[0].nvars;
    let mut m: Vec<Jet> = a.to_vec();
    let mut det = Jet::constant(1.0, nvars, order);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r1, &r2| {
                m[r1 * n + col]
                    .value()
                    .abs()
                    .total_cmp(&m[r2 * n + col].value().abs())
            })
            .unwrap();
        if m[pivot * n + col].value().abs() < 1e-300 {
            return Ok(Jet::constant(0.0, nvars, order));
        }
        if pivot != col {
            for c in 0..n {
                m.swap(col * n + c, pivot * n + c);
            }
            det = det.neg();
        }
        det = det.mul(&m[col * n + col]);
        let inv_piv = m[col * n + col].recip()?;
        for r in col + 1..n {
            let f = m[r * n + col].mul(&inv_piv);
            for c in col..n {
                let t = f.mul(&m[col * n + c]);
                m[r * n + c] = m[r * n + c].sub(&t);
            }
        }
    }
    Ok(det)
}

// ---------------------------------------------------------------------------
// Tensors of jets and covariant differentiation

/// A tensor at a point whose components carry jets, all slots of dimension n.
/// `upper[a]` marks the a-th index as contravariant.
#[derive(Clone, Debug)]
pub struct JetTensor {
    pub n: usize,
    pub upper: Vec<bool>,
    pub comps: Vec<Jet>,
}

impl JetTensor {
    pub fn rank(&self) -> usize {
        self.upper.len()
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        &self.comps[self.flat(idx)]
    }

    /// Numeric component values (constant terms).
    pub fn values(&self) -> Vec<f64> {
        self.comps.iter().map(|j| j.value()).collect()
    }

    /// Levi-Civita covariant derivative; the new (lower) derivative index is
    /// appended last.  `gamma` is the Γ^i_jk table as jets (index [i][j][k]).
    /// The result's jet order drops by one.
    pub fn covd(&self, gamma: &JetTensor) -> JetTensor {
        let n = self.n;
        let rank = self.rank();
        let order = self.comps[0].order;
        assert!(order >= 1, "covariant derivative needs jet order >= 1");
        let mut upper = self.upper.clone();
        upper.push(false);
        let out_len = self.comps.len() * n;
        let mut comps: Vec<Jet> = Vec::with_capacity(out_len);
        let mut idx = vec![0usize; rank];
        for flat_i in 0..self.comps.len() {
            // decode flat index
            {
                let mut rem = flat_i;
                for a in (0..rank).rev() {
                    idx[a] = rem % n;
                    rem /= n;
                }
            }
            for m in 0..n {
                let mut acc = self.comps[flat_i].diff(m);
                let mut jdx = idx.clone();
                for a in 0..rank {
                    let ia = idx[a];
                    for p in 0..n {
                        jdx[a] = p;
                        let t = self.get(&jdx);
                        let coef = if self.upper[a] {
                            gamma.get(&[ia, m, p]) // +Γ^{i_a}_{m p} T^{…p…}
                        } else {
                            jdx[a] = ia;
                            let gamma_t = gamma.get(&[p, m, ia]); // −Γ^p_{m i_a}
                            jdx[a] = p;
                            acc.add_scaled(&gamma_t.mul(self.get(&jdx)).truncate(order - 1), -1.0);
                            continue;
                        };
                        acc.add_scaled(&coef.mul(t).truncate(order - 1), 1.0);
                    }
                    jdx[a] = ia;
                }
                comps.push(acc);
            }
        }
        JetTensor { n, upper, comps }
    }
}

/// Christoffel symbols Γ^i_jk as jets of the given order (requires metric
/// jets of order+1).
pub fn christoffel_jets(m: &MetricSpec, point: &[f64], order: usize) -> Result<JetTensor> {
    let n = m.dim;
    let g = m.eval_jets(point, order + 1)?;
    if !m.is_nondegenerate_at(point)? {
        return Err(Error::DegenerateMetric {
            det: m.det_at(point)?,
        });
    }
    let ginv = jet_mat_inv(&g, n)?;
    // ∂ tables at the target order
    let mut dg = vec![Vec::new(); n]; // dg[k][i*n+j] = ∂_k g_ij
    for k in 0..n {
        dg[k] = g.iter().map(|j| j.diff(k)).collect::<Vec<_>>();
    }
    let mut comps = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = Jet::constant(0.0, g[0].nvars, order);
                for al in 0..n {
                    // ½ g^{i al} (∂_j g_{al k} + ∂_k g_{j al} − ∂_al g_{jk})
                    let inner = dg[j][al * n + k]
                        .add(&dg[k][j * n + al])
                        .sub(&dg[al][j * n + k]);
                    acc.add_scaled(&ginv[i * n + al].truncate(order).mul(&inner), 0.5);
                }
                comps.push(acc);
            }
        }
    }
    Ok(JetTensor {
        n,
        upper: vec![true, false, false],
        comps,
    })
}

/// Christoffel values Γ^i_jk at a point.
pub fn christoffel(m: &MetricSpec, point: &[f64]) -> Result<Vec<f64>> {
    Ok(christoffel_jets(m, point, 0)?.values())
}

/// Riemann tensor R^i_jkl as jets of the given order (metric jets of
/// order+2 consumed).
pub fn riemann_jets(m: &MetricSpec, point: &[f64], order: usize) -> Result<JetTensor> {
    let n = m.dim;
    let gamma = christoffel_jets(m, point, order + 1)?;
    let mut comps = Vec::with_capacity(n * n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    // R^i_jkl = ∂_k Γ^i_lj − ∂_l Γ^i_kj + Γ^i_kp Γ^p_lj − Γ^i_lp Γ^p_kj
                    let mut acc = gamma
                        .get(&[i, l, j])
                        .diff(k)
                        .sub(&gamma.get(&[i, k, j]).diff(l));
                    for p in 0..n {
                        acc.add_scaled(
                            &gamma.get(&[i, k, p]).mul(gamma.get(&[p, l, j])).truncate(order),
                            1.0,
                        );
                        acc.add_scaled(
                            &gamma.get(&[i, l, p]).mul(gamma.get(&[p, k, j])).truncate(order),
                            -1.0,
                        );
                    }
                    comps.push(acc);
                }
            }
        }
    }
    Ok(JetTensor {
        n,
        upper: vec![true, false, false, false],
        comps,
    })
}

/// Curvature data at a point.  `riemann[i][j][k][l]` (flattened) is R^i_jkl;
/// the covariant-derivative tables append derivative indices last.
#[derive(Clone, Debug)]
pub struct GeometryAtPoint {
    pub point: Vec<f64>,
    pub g: DMatrix<f64>,
    pub ginv: DMatrix<f64>,
    pub gamma: Vec<f64>,
    pub riemann: Vec<f64>,
    pub nabla_r: Option<Vec<f64>>,
    pub nabla2_r: Option<Vec<f64>>,
    pub signature: (usize, usize),
}

/// Evaluate curvature (and optionally ∇R, ∇∇R for `deriv_order` 1, 2).
pub fn riemann(m: &MetricSpec, point: &[f64], deriv_order: usize) -> Result<GeometryAtPoint> {
    assert!(deriv_order <= 2);
    let g = m.matrix_at(point)?;
    let ginv = g.clone().try_inverse().ok_or(Error::DegenerateMetric {
        det: g.determinant(),
    })?;
    let gamma_jets = christoffel_jets(m, point, deriv_order.max(1))?;
    let r_jets = riemann_jets(m, point, deriv_order)?;
    let mut nabla_r = None;
    let mut nabla2_r = None;
    if deriv_order >= 1 {
        let dr = r_jets.covd(&gamma_jets);
        if deriv_order == 2 {
            nabla2_r = Some(dr.covd(&gamma_jets).values());
        }
        nabla_r = Some(dr.values());
    }
    Ok(GeometryAtPoint {
        point: point.to_vec(),
        g: g.clone(),
        ginv,
        gamma: gamma_jets.values(),
        riemann: r_jets.values(),
        nabla_r,
        nabla2_r,
        signature: signature_of(&g),
    })
}

impl GeometryAtPoint {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn gamma_at(&self, i: usize, j: usize, k: usize) -> f64 {
        let n = self.dim();
        self.gamma[(i * n + j) * n + k]
    }

    pub fn riemann_at(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.dim();
        self.riemann[((i * n + j) * n + k) * n + l]
    }

    /// Fully covariant R_ijkl = g_ip R^p_jkl.
    pub fn riemann_lower(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n * n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut acc = 0.0;
                        for p in 0..n {
                            acc += self.g[(i, p)] * self.riemann_at(p, j, k, l);
                        }
                        out[((i * n + j) * n + k) * n + l] = acc;
                    }
                }
            }
        }
        out
    }

    pub fn max_abs_riemann(&self) -> f64 {
        self.riemann.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
    }
}

// ---------------------------------------------------------------------------
// Covariant derivative of an expression-given tensor field

/// Tensor field given by component expressions with a declared variance.
#[derive(Clone, Debug)]
pub struct TensorField {
    pub upper: Vec<bool>,
    /// Row-major components, n^rank entries.
    pub comps: Vec<Expr>,
}

impl TensorField {
    pub fn eval_jets(
        &self,
        m: &MetricSpec,
        point: &[f64],
        order: usize,
    ) -> Result<JetTensor> {
        let comps = self
            .comps
            .iter()
            .map(|e| e.eval_jet(point, order, &m.coords))
            .collect::<Result<Vec<_>>>()?;
        Ok(JetTensor {
            n: m.dim,
            upper: self.upper.clone(),
            comps,
        })
    }
}

/// Covariant derivative of a tensor field at a point; derivative index last.
pub fn cov_deriv(m: &MetricSpec, t: &TensorField, point: &[f64]) -> Result<Vec<f64>> {
    let gamma = christoffel_jets(m, point, 1)?;
    let jt = t.eval_jets(m, point, 1)?;
    Ok(jt.covd(&gamma).values())
}

// ---------------------------------------------------------------------------
// Parallel transport

/// What is carried along the curve.
#[derive(Clone, Debug)]
pub enum Fiber {
    /// Components v^i of a tangent vector.
    Vector(DVector<f64>),
    /// A (1,1)-tensor L^i_j.
    Endo(DMatrix<f64>),
    /// A (0,2)-tensor h_ij.
    Bilinear(DMatrix<f64>),
}

fn transport_rhs(gamma: &[f64], n: usize, dx: &[f64], f: &Fiber) -> Fiber {
    let g = |i: usize, j: usize, k: usize| gamma[(i * n + j) * n + k];
    // Γ(dx)^i_j = Γ^i_mj dx^m
    let mut gd = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for m in 0..n {
                acc += g(i, m, j) * dx[m];
            }
            gd[(i, j)] = acc;
        }
    }
    match f {
        Fiber::Vector(v) => Fiber::Vector(-(&gd * v)),
        Fiber::Endo(l) => Fiber::Endo(l * &gd - &gd * l),
        Fiber::Bilinear(h) => Fiber::Bilinear(gd.transpose() * h + h * &gd),
    }
}

fn fiber_axpy(a: &mut Fiber, b: &Fiber, s: f64) {
    match (a, b) {
        (Fiber::Vector(x), Fiber::Vector(y)) => *x += y * s,
        (Fiber::Endo(x), Fiber::Endo(y)) => *x += y * s,
        (Fiber::Bilinear(x), Fiber::Bilinear(y)) => *x += y * s,
        _ => unreachable!(),
    }
}

/// Parallel-transport a fiber along a polyline with a classical 4th-order
/// integrator, `steps` per segment.
pub fn parallel_transport(
    m: &MetricSpec,
    path: &[Vec<f64>],
    fiber: Fiber,
    steps: usize,
) -> Result<Fiber> {
    let n = m.dim;
    let mut f = fiber;
    for seg in path.windows(2) {
        let (a, b) = (&seg[0], &seg[1]);
        let dx: Vec<f64> = (0..n).map(|i| (b[i] - a[i]) / steps as f64).collect();
        if dx.iter().all(|&d| d == 0.0) {
            continue;
        }
        for s in 0..steps {
            let t0 = s as f64 / steps as f64;
            let at = |t: f64| -> Vec<f64> {
                (0..n).map(|i| a[i] + (b[i] - a[i]) * t).collect()
            };
            let g0 = christoffel(m, &at(t0))?;
            let gh = christoffel(m, &at(t0 + 0.5 / steps as f64))?;
            let g1 = christoffel(m, &at(t0 + 1.0 / steps as f64))?;
            let k1 = transport_rhs(&g0, n, &dx, &f);
            let mut f2 = f.clone();
            fiber_axpy(&mut f2, &k1, 0.5);
            let k2 = transport_rhs(&gh, n, &dx, &f2);
            let mut f3 = f.clone();
            fiber_axpy(&mut f3, &k2, 0.5);
            let k3 = transport_rhs(&gh, n, &dx, &f3);
            let mut f4 = f.clone();
            fiber_axpy(&mut f4, &k3, 1.0);
            let k4 = transport_rhs(&g1, n, &dx, &f4);
            fiber_axpy(&mut f, &k1, 1.0 / 6.0);
            fiber_axpy(&mut f, &k2, 2.0 / 6.0);
            fiber_axpy(&mut f, &k3, 2.0 / 6.0);
            fiber_axpy(&mut f, &k4, 1.0 / 6.0);
        }
    }
    Ok(f)
}
