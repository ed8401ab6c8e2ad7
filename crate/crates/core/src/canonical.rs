//! Simultaneous block form of a symmetric nondegenerate bilinear form G and
//! a G-self-adjoint endomorphism L.
//!
//! There is a basis in which L is block-diagonal with elementary Jordan
//! blocks and G is block-diagonal with matching ±F_m blocks, where F_m is
//! the antidiagonal-ones matrix.  Real eigenvalue blocks carry a sign ε and
//! the pair (εF_m, J_m(ρ)); a complex-conjugate pair α ± iβ produces a
//! single real block of even size 2m with G = F_{2m} and L built from 2×2
//! rotation-scaling cells C = [[α, β], [−β, α]] with identity cells on the
//! superdiagonal.
//!
//! The construction is chain-based: inside each generalized eigenspace a
//! top-of-chain vector t with G(t, N^{m−1}t) ≠ 0 is selected, rescaled, and
//! then corrected by multiples of N^d t (top of chain first) until every
//! pairing G(t, N^k t) with k < m−1 vanishes; the chain N^{m−1}t, …, t then
//! reproduces an exact ±F_m (or F_{2m}) Gram matrix and its G-orthogonal
//! complement is invariant, so the process recurses.  Real eigenvalues are
//! processed in real arithmetic; complex pairs over ℂ with the bilinear
//! (unconjugated) extension of G, normalizing the top pairing to 2i so the
//! real and imaginary parts of the chain deliver the F_{2m} block.

use nalgebra::{Complex, ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::signature_of;

type CMat = DMatrix<Complex<f64>>;

/// Default eigenvalue clustering tolerance, relative to ‖L‖.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-7;

/// True iff L is self-adjoint with respect to G, i.e. G·L is symmetric.
pub fn check_self_adjoint(g: &DMatrix<f64>, l: &DMatrix<f64>) -> bool {
    let gl = g * l;
    let asym = (&gl - gl.transpose()).norm();
    asym < 1e-10 * gl.norm().max(1e-300)
}

/// Eigenvalue data of one block.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockEigen {
    Real(f64),
    /// the conjugate pair re ± i·im, im > 0
    ComplexPair { re: f64, im: f64 },
}

/// One elementary block of the pair form.
#[derive(Clone, Debug)]
pub struct PairBlock {
    pub eigen: BlockEigen,
    /// real dimension of the block (2m for a complex pair)
    pub size: usize,
    /// sign of the F_m block; None for complex blocks (always +F_{2m})
    pub epsilon: Option<i8>,
}

/// The full decomposition: blocks, the change of basis P, and the resulting
/// block matrices, satisfying Pᵀ G P = block_g and P⁻¹ L P = block_l.
#[derive(Clone, Debug)]
pub struct PairBlocks {
    pub blocks: Vec<PairBlock>,
    pub p: DMatrix<f64>,
    pub block_g: DMatrix<f64>,
    pub block_l: DMatrix<f64>,
    /// max relative residual of the two reconstruction identities
    pub residual: f64,
}

/// Jordan data for one eigenvalue of a plain square matrix.
#[derive(Clone, Debug)]
pub struct EigenStructure {
    /// (re, im); complex eigenvalues are reported with im > 0 only
    pub eigenvalue: (f64, f64),
    pub algebraic: usize,
    pub geometric: usize,
    /// Jordan block sizes, descending
    pub partition: Vec<usize>,
}

// ---------------------------------------------------------------------------
// Eigenvalue clustering

/// Single-linkage clustering of eigenvalues at absolute tolerance `tol_abs`;
/// errors if two clusters are closer than 10× the tolerance.
fn cluster_eigenvalues(eigs: &[Complex<f64>], tol_abs: f64) -> Result<Vec<Vec<usize>>> {
    let n = eigs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for i in 0..n {
        for j in i + 1..n {
            if (eigs[i] - eigs[j]).norm() <= tol_abs {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(c) => clusters[c].push(i),
            None => {
                root_of[r] = Some(clusters.len());
                clusters.push(vec![i]);
            }
        }
    }
    // indecision: distinct clusters too close to call
    for a in 0..clusters.len() {
        for b in a + 1..clusters.len() {
            for &i in &clusters[a] {
                for &j in &clusters[b] {
                    let d = (eigs[i] - eigs[j]).norm();
                    if d < 10.0 * tol_abs {
                        return Err(Error::ClusterIndecision {
                            value: format!(
                                "{} and {} are {:.3e} apart (tolerance {:.3e})",
                                eigs[i], eigs[j], d, tol_abs
                            ),
                        });
                    }
                }
            }
        }
    }
    Ok(clusters)
}

fn cluster_mean(eigs: &[Complex<f64>], cluster: &[usize]) -> Complex<f64> {
    let sum: Complex<f64> = cluster.iter().map(|&i| eigs[i]).sum();
    sum / Complex::new(cluster.len() as f64, 0.0)
}

// ---------------------------------------------------------------------------
// Chain extraction, generic over real (ε-blocks) and complex (2i) scalars

/// Scalar the chain machinery runs over; fixes the normalization of the
/// top-of-chain self-pairing.
trait ChainScalar: ComplexField<RealField = f64> + Copy {
    /// Canonical value for G(t, N^{m−1} t), given its raw value `f`.
    fn chain_target(f: Self) -> Self;
}

impl ChainScalar for f64 {
    fn chain_target(f: f64) -> f64 {
        if f >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl ChainScalar for Complex<f64> {
    fn chain_target(_: Complex<f64>) -> Complex<f64> {
        Complex::new(0.0, 2.0)
    }
}

/// Orthonormal basis of the space spanned by the right singular vectors of
/// `m` belonging to its `d` smallest singular values.
fn smallest_singular_basis<T: ChainScalar>(m: &DMatrix<T>, d: usize) -> DMatrix<T> {
    // the thin SVD of a wide matrix omits exactly the null directions we
    // are after, so pad with zero rows to square first
    let n = m.ncols();
    let padded = if m.nrows() < n {
        let mut sq = DMatrix::<T>::zeros(n, n);
        sq.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        sq
    } else {
        m.clone()
    };
    let svd = nalgebra::SVD::new(padded, false, true);
    let vt = svd.v_t.as_ref().unwrap();
    let mut order: Vec<(f64, usize)> = svd
        .singular_values
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = DMatrix::<T>::zeros(n, d);
    for (col, &(_, row)) in order.iter().take(d).enumerate() {
        out.set_column(col, &vt.row(row).transpose().map(|z| z.conjugate()));
    }
    out
}

fn matpow<T: ChainScalar>(m: &DMatrix<T>, k: usize) -> DMatrix<T> {
    let n = m.nrows();
    let mut acc = DMatrix::<T>::identity(n, n);
    for _ in 0..k {
        acc = &acc * m;
    }
    acc
}

/// Bilinear (no conjugation) pairing xᵀ G y.
fn bilin<T: ChainScalar>(g: &DMatrix<T>, x: &DVector<T>, y: &DVector<T>) -> T {
    (x.transpose() * g * y)[(0, 0)]
}

/// Index of nilpotency of N on the current subspace: the smallest m with
/// N^m below the noise floor of the eigenvalue clustering.
///
/// Entries of genuine chain structure are of order `op_scale`; the residue
/// after a true power vanishes is clustering noise of order `tol_abs`
/// amplified by at most op_scale^{k−1}, hence the threshold shape.
fn nilpotency_index<T: ChainScalar>(n_mat: &DMatrix<T>, op_scale: f64, tol_abs: f64) -> usize {
    let dim = n_mat.nrows();
    let mut p = DMatrix::<T>::identity(dim, dim);
    for k in 1..=dim {
        p = &p * n_mat;
        let floor = 100.0 * dim as f64 * tol_abs * op_scale.powi(k as i32 - 1);
        if p.norm() <= floor {
            return k;
        }
    }
    dim + 1
}

/// One Jordan chain inside a generalized eigenspace carrying the bilinear
/// form `g_sub` and the (approximately nilpotent) operator `n_sub`.
///
/// Returns the chain (bottom N^{m−1}t first, top t last) and the value the
/// top pairing was normalized to: ε = ±1 over ℝ, 2i over ℂ.
fn extract_chain<T: ChainScalar>(
    g_sub: &DMatrix<T>,
    n_sub: &DMatrix<T>,
    op_scale: f64,
    tol_abs: f64,
) -> Result<(Vec<DVector<T>>, T)> {
    let dim = n_sub.nrows();
    let m = nilpotency_index(n_sub, op_scale, tol_abs);
    if m > dim {
        return Err(Error::Verification(
            "restricted operator is not nilpotent; eigenvalue clustering too tight".into(),
        ));
    }
    let p_top = matpow(n_sub, m - 1);
    // pick t maximizing |G(t, N^{m−1} t)| among singular directions of the
    // symmetric matrix S = G N^{m−1}
    let s_mat = g_sub * &p_top;
    let svd = nalgebra::SVD::new(s_mat.clone(), false, true);
    let vt = svd.v_t.as_ref().unwrap();
    let mut cands: Vec<DVector<T>> = (0..vt.nrows())
        .map(|row| vt.row(row).transpose().map(|z| z.conjugate()))
        .collect();
    // mixtures rescue the case where every individual singular direction is
    // isotropic for the bilinear pairing
    for r1 in 0..vt.nrows().min(4) {
        for r2 in r1 + 1..vt.nrows().min(4) {
            let mix = (cands[r1].clone() + cands[r2].clone())
                .scale(std::f64::consts::FRAC_1_SQRT_2);
            cands.push(mix);
        }
    }
    let mut best: Option<(f64, DVector<T>)> = None;
    for cand in cands {
        let f = bilin(g_sub, &cand, &(&p_top * &cand));
        if best.as_ref().map_or(true, |(bf, _)| f.norm1() > *bf) {
            best = Some((f.norm1(), cand));
        }
    }
    let (fnorm, mut t) = best.unwrap();
    if s_mat.norm() < 1e-300 || fnorm < 1e-10 * s_mat.norm() {
        return Err(Error::Verification(
            "could not find a chain top with nonzero self-pairing".into(),
        ));
    }
    let f = bilin(g_sub, &t, &(&p_top * &t));
    let target = T::chain_target(f);
    // rescale so that G(t, N^{m−1} t) = target exactly (this also removes
    // any stray complex phase in the singular vector)
    let s = (target / f).sqrt();
    t *= s;
    // kill the sub-leading self-pairings, top of chain first: a correction
    // t ← t + c N^d t only disturbs pairings G(t, N^k t) with k ≤ m−1−d
    for d in 1..m {
        let k = m - 1 - d;
        let s_val = bilin(g_sub, &t, &(matpow(n_sub, k) * &t));
        let c = -s_val / (target + target);
        t = &t + matpow(n_sub, d) * &t * c;
    }
    let chain: Vec<DVector<T>> = (0..m).map(|j| matpow(n_sub, m - 1 - j) * &t).collect();
    Ok((chain, target))
}

/// G-orthogonal complement of the chain span inside the current subspace,
/// as an orthonormal column basis.
fn deflate<T: ChainScalar>(g_sub: &DMatrix<T>, chain: &[DVector<T>]) -> DMatrix<T> {
    let dim = g_sub.nrows();
    let mut constraints = DMatrix::<T>::zeros(chain.len(), dim);
    for (r, v) in chain.iter().enumerate() {
        constraints.set_row(r, &(v.transpose() * g_sub));
    }
    smallest_singular_basis(&constraints, dim - chain.len())
}

// ---------------------------------------------------------------------------
// The decomposition

/// The canonical simultaneous block form of (G, L).
///
/// `tol` is the eigenvalue clustering tolerance relative to ‖L‖; pass
/// [`DEFAULT_CLUSTER_TOL`] unless the spectrum is known to be tighter.
pub fn canonical_pair_form(g: &DMatrix<f64>, l: &DMatrix<f64>, tol: f64) -> Result<PairBlocks> {
    let n = g.nrows();
    if g.ncols() != n || l.nrows() != n || l.ncols() != n {
        return Err(Error::Malformed("G and L must be square of equal size".into()));
    }
    if (g - g.transpose()).norm() > 1e-10 * g.norm() {
        return Err(Error::Malformed("G is not symmetric".into()));
    }
    let lu = g.clone().lu();
    if !lu.is_invertible() {
        return Err(Error::DegenerateMetric {
            det: lu.determinant(),
        });
    }
    if !check_self_adjoint(g, l) {
        return Err(Error::Malformed(
            "L is not self-adjoint with respect to G".into(),
        ));
    }

    let op_scale = l.norm().max(1.0);
    let tol_abs = tol * op_scale;
    let eigs_vec = l.complex_eigenvalues();
    let eigs: Vec<Complex<f64>> = eigs_vec.iter().copied().collect();
    let clusters = cluster_eigenvalues(&eigs, tol_abs)?;

    let mut blocks: Vec<PairBlock> = Vec::new();
    let mut columns: Vec<DVector<f64>> = Vec::new();
    let mut block_g = DMatrix::<f64>::zeros(n, n);
    let mut block_l = DMatrix::<f64>::zeros(n, n);

    let mut handled_conjugates: Vec<usize> = Vec::new();
    for (ci, cluster) in clusters.iter().enumerate() {
        if handled_conjugates.contains(&ci) {
            continue;
        }
        let mean = cluster_mean(&eigs, cluster);
        let multiplicity = cluster.len();

        if mean.im.abs() <= tol_abs {
            // real eigenvalue: full real arithmetic
            let rho = mean.re;
            let shifted = l - DMatrix::<f64>::identity(n, n) * rho;
            let q = smallest_singular_basis(&matpow(&shifted, multiplicity), multiplicity);
            let mut n_sub =
                q.transpose() * l * &q - DMatrix::<f64>::identity(multiplicity, multiplicity) * rho;
            let mut g_sub = q.transpose() * g * &q;
            let mut basis = q;
            loop {
                let (chain, target) = extract_chain(&g_sub, &n_sub, op_scale, tol_abs)?;
                let m = chain.len();
                let start = columns.len();
                let eps: i8 = if target >= 0.0 { 1 } else { -1 };
                for v in &chain {
                    columns.push(&basis * v);
                }
                for i in 0..m {
                    block_g[(start + i, start + m - 1 - i)] = eps as f64;
                    block_l[(start + i, start + i)] = rho;
                    if i + 1 < m {
                        block_l[(start + i, start + i + 1)] = 1.0;
                    }
                }
                blocks.push(PairBlock {
                    eigen: BlockEigen::Real(rho),
                    size: m,
                    epsilon: Some(eps),
                });
                if basis.ncols() == m {
                    break;
                }
                let keep = deflate(&g_sub, &chain);
                n_sub = keep.transpose() * &n_sub * &keep;
                g_sub = keep.transpose() * &g_sub * &keep;
                basis = &basis * &keep;
            }
        } else {
            if mean.im < 0.0 {
                continue; // processed together with the im > 0 partner
            }
            // find and mark the conjugate cluster
            let conj = clusters
                .iter()
                .position(|c| (cluster_mean(&eigs, c) - mean.conj()).norm() <= tol_abs)
                .ok_or_else(|| {
                    Error::Verification(format!(
                        "complex eigenvalue {mean} has no conjugate partner"
                    ))
                })?;
            handled_conjugates.push(conj);
            let lambda = mean;
            let lc: CMat = l.map(|x| Complex::new(x, 0.0));
            let gc: CMat = g.map(|x| Complex::new(x, 0.0));
            let shifted = &lc - CMat::identity(n, n) * lambda;
            let q = smallest_singular_basis(&matpow(&shifted, multiplicity), multiplicity);
            let mut n_sub =
                q.adjoint() * &lc * &q - CMat::identity(multiplicity, multiplicity) * lambda;
            let mut g_sub = q.transpose() * &gc * &q;
            let mut basis = q;
            loop {
                let (chain, _target) = extract_chain(&g_sub, &n_sub, op_scale, tol_abs)?;
                let m = chain.len();
                let start = columns.len();
                // real block of size 2m from the complex chain w_1..w_m:
                // basis (Re w_1, Im w_1, …, Re w_m, Im w_m)
                for v in &chain {
                    let full = &basis * v;
                    columns.push(full.map(|z| z.re));
                    columns.push(full.map(|z| z.im));
                }
                let (alpha, beta) = (lambda.re, lambda.im);
                let sz = 2 * m;
                for i in 0..sz {
                    block_g[(start + i, start + sz - 1 - i)] = 1.0;
                }
                for k in 0..m {
                    let o = start + 2 * k;
                    block_l[(o, o)] = alpha;
                    block_l[(o, o + 1)] = beta;
                    block_l[(o + 1, o)] = -beta;
                    block_l[(o + 1, o + 1)] = alpha;
                    if k + 1 < m {
                        block_l[(o, o + 2)] = 1.0;
                        block_l[(o + 1, o + 3)] = 1.0;
                    }
                }
                blocks.push(PairBlock {
                    eigen: BlockEigen::ComplexPair {
                        re: alpha,
                        im: beta,
                    },
                    size: sz,
                    epsilon: None,
                });
                if basis.ncols() == m {
                    break;
                }
                let keep = deflate(&g_sub, &chain);
                n_sub = keep.adjoint() * &n_sub * &keep;
                g_sub = keep.transpose() * &g_sub * &keep;
                basis = &basis * &keep;
            }
        }
    }

    let p = DMatrix::from_columns(&columns);
    let res_g = (p.transpose() * g * &p - &block_g).norm() / g.norm();
    let lp = l * &p;
    let res_l = (&lp - &p * &block_l).norm() / lp.norm().max(1.0);
    let residual = res_g.max(res_l);
    let sig_in = signature_of(g);
    let sig_out = signature_of(&block_g);
    if sig_in != sig_out {
        return Err(Error::Verification(format!(
            "signature changed: {sig_in:?} vs {sig_out:?}"
        )));
    }
    if residual > 1e-8 {
        return Err(Error::Verification(format!(
            "pair form reconstruction residual {residual:.3e} exceeds 1e-8"
        )));
    }
    Ok(PairBlocks {
        blocks,
        p,
        block_g,
        block_l,
        residual,
    })
}

/// Jordan structure (eigenvalues with multiplicities and block-size
/// partitions) of a plain square matrix, via rank sequences of (L − ρI)^k.
pub fn jordan_structure(l: &DMatrix<f64>, tol: f64) -> Result<Vec<EigenStructure>> {
    let n = l.nrows();
    if l.ncols() != n {
        return Err(Error::Malformed("L must be square".into()));
    }
    let tol_abs = tol * l.norm().max(1.0);
    let eigs_vec = l.complex_eigenvalues();
    let eigs: Vec<Complex<f64>> = eigs_vec.iter().copied().collect();
    let clusters = cluster_eigenvalues(&eigs, tol_abs)?;
    let lc: CMat = l.map(|x| Complex::new(x, 0.0));
    let mut out = Vec::new();
    for cluster in &clusters {
        let mean = cluster_mean(&eigs, cluster);
        let real_case = mean.im.abs() <= tol_abs;
        if !real_case && mean.im < 0.0 {
            continue; // report each conjugate pair once, via im > 0
        }
        let lambda = if real_case {
            Complex::new(mean.re, 0.0)
        } else {
            mean
        };
        let d = cluster.len();
        let shifted = &lc - CMat::identity(n, n) * lambda;
        // rank sequence; nullity is capped at the algebraic multiplicity
        let mut nullities = vec![0usize];
        let mut power = CMat::identity(n, n);
        // singular values are judged against ‖L − λI‖^k, not against the
        // largest singular value of the power itself: a (numerically)
        // nilpotent power has only noise-level singular values, and a
        // relative-to-itself cut would count that noise as rank
        let shift_scale = shifted.norm().max(1.0);
        let mut scale_k = 1.0;
        loop {
            power = &power * &shifted;
            scale_k *= shift_scale;
            let mut sv: Vec<f64> = nalgebra::SVD::new(power.clone(), false, false)
                .singular_values
                .iter()
                .copied()
                .collect();
            sv.sort_by(|a, b| a.total_cmp(b));
            let cut = 1e-8 * scale_k;
            let nullity = sv.iter().filter(|&&s| s < cut).count().min(d);
            let prev = *nullities.last().unwrap();
            nullities.push(nullity.max(prev));
            if nullity >= d || nullities.len() > n {
                break;
            }
        }
        // number of blocks of size ≥ k is nullity_k − nullity_{k−1}
        let mut partition = Vec::new();
        for k in 1..nullities.len() {
            let ge_k = nullities[k] - nullities[k - 1];
            while partition.len() < ge_k {
                partition.push(0);
            }
            for b in partition.iter_mut().take(ge_k) {
                *b = k;
            }
        }
        partition.sort_unstable_by(|a, b| b.cmp(a));
        if partition.iter().sum::<usize>() != d {
            return Err(Error::Verification(format!(
                "jordan partition {partition:?} does not sum to multiplicity {d} for {lambda}"
            )));
        }
        out.push(EigenStructure {
            eigenvalue: (lambda.re, lambda.im),
            algebraic: d,
            geometric: nullities[1],
            partition,
        });
    }
    out.sort_by(|a, b| {
        a.eigenvalue
            .0
            .total_cmp(&b.eigenvalue.0)
            .then(a.eigenvalue.1.total_cmp(&b.eigenvalue.1))
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn fm(m: usize) -> DMatrix<f64> {
        DMatrix::from_fn(m, m, |i, j| if i + j == m - 1 { 1.0 } else { 0.0 })
    }

    fn diag(vals: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_row_slice(vals))
    }

    #[test]
    fn self_adjoint_check() {
        let g = diag(&[1.0, -1.0, 1.0]);
        assert!(check_self_adjoint(&g, &DMatrix::identity(3, 3)));
        let mut l = DMatrix::zeros(3, 3);
        l[(0, 1)] = 1.0;
        assert!(!check_self_adjoint(&g, &l)); // G·L is strictly upper triangular
        l[(1, 0)] = -1.0;
        // the rotation generator in a (+,−) plane is self-adjoint: G·L is
        // symmetric because the sign of G absorbs the antisymmetry of L
        assert!(check_self_adjoint(&g, &l));
    }

    #[test]
    fn diagonal_pair_splits_into_unit_blocks() {
        let g = DMatrix::identity(2, 2);
        let l = diag(&[2.0, 2.0]);
        let pb = canonical_pair_form(&g, &l, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(pb.blocks.len(), 2);
        for b in &pb.blocks {
            assert_eq!(b.size, 1);
            assert_eq!(b.eigen, BlockEigen::Real(2.0));
            assert_eq!(b.epsilon, Some(1));
        }
    }

    #[test]
    fn indefinite_diagonal_signs() {
        let g = diag(&[1.0, -1.0]);
        let l = diag(&[3.0, 5.0]);
        let pb = canonical_pair_form(&g, &l, DEFAULT_CLUSTER_TOL).unwrap();
        let mut eps: Vec<i8> = pb.blocks.iter().map(|b| b.epsilon.unwrap()).collect();
        eps.sort_unstable();
        assert_eq!(eps, vec![-1, 1]);
    }

    #[test]
    fn nilpotent_block_with_antidiagonal_form() {
        // G = F_2, L = one nilpotent Jordan cell: already canonical
        let g = fm(2);
        let mut l = DMatrix::zeros(2, 2);
        l[(0, 1)] = 1.0;
        let pb = canonical_pair_form(&g, &l, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(pb.blocks.len(), 1);
        assert_eq!(pb.blocks[0].size, 2);
        assert_eq!(pb.blocks[0].eigen, BlockEigen::Real(0.0));
    }

    #[test]
    fn complex_rotation_pair() {
        // 4-dim split-signature pair with eigenvalues ±i of multiplicity 2:
        // two complex blocks of size 2
        let g = DMatrix::from_fn(4, 4, |i, j| {
            if i / 2 == j / 2 && i != j { 1.0 } else { 0.0 }
        });
        let mut l = DMatrix::zeros(4, 4);
        l[(0, 1)] = 1.0;
        l[(1, 0)] = -1.0;
        l[(2, 3)] = 1.0;
        l[(3, 2)] = -1.0;
        assert!(check_self_adjoint(&g, &l));
        let pb = canonical_pair_form(&g, &l, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(pb.blocks.len(), 2);
        for b in &pb.blocks {
            assert_eq!(b.size, 2);
            assert_eq!(b.eigen, BlockEigen::ComplexPair { re: 0.0, im: 1.0 });
            assert_eq!(b.epsilon, None);
        }
        assert_eq!(signature_of(&pb.block_g), (2, 2));
    }

    #[test]
    fn complex_size_four_block() {
        // L = [[C, I], [0, C]] with C the standard rotation, G = F_4:
        // a single complex block of real size 4
        let g = fm(4);
        let mut l = DMatrix::zeros(4, 4);
        l[(0, 1)] = 1.0;
        l[(1, 0)] = -1.0;
        l[(2, 3)] = 1.0;
        l[(3, 2)] = -1.0;
        l[(0, 2)] = 1.0;
        l[(1, 3)] = 1.0;
        assert!(check_self_adjoint(&g, &l));
        let pb = canonical_pair_form(&g, &l, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(pb.blocks.len(), 1);
        assert_eq!(pb.blocks[0].size, 4);
        assert_eq!(
            pb.blocks[0].eigen,
            BlockEigen::ComplexPair { re: 0.0, im: 1.0 }
        );
    }

    /// Random self-adjoint pair of the given signature: conjugate a random
    /// block form by a random invertible matrix.
    fn random_pair(rng: &mut ChaCha8Rng, sig: (usize, usize)) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = sig.0 + sig.1;
        loop {
            let mut g0 = DMatrix::zeros(n, n);
            let mut l0 = DMatrix::zeros(n, n);
            let mut pos = sig.0;
            let mut neg = sig.1;
            let mut idx = 0;
            while idx < n {
                // mostly size-1 blocks, occasionally a 2-chain when the
                // signature still has room for a (+,−) pair
                let two = idx + 2 <= n && pos >= 1 && neg >= 1 && rng.gen_bool(0.4);
                let rho: f64 = rng.gen_range(-2.0..2.0);
                if two {
                    let eps: f64 = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    g0[(idx, idx + 1)] = eps;
                    g0[(idx + 1, idx)] = eps;
                    l0[(idx, idx)] = rho;
                    l0[(idx + 1, idx + 1)] = rho;
                    l0[(idx, idx + 1)] = 1.0;
                    pos -= 1;
                    neg -= 1;
                    idx += 2;
                } else if pos > 0 && (neg == 0 || rng.gen_bool(0.5)) {
                    g0[(idx, idx)] = 1.0;
                    l0[(idx, idx)] = rho;
                    pos -= 1;
                    idx += 1;
                } else {
                    g0[(idx, idx)] = -1.0;
                    l0[(idx, idx)] = rho;
                    neg -= 1;
                    idx += 1;
                }
            }
            let p: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            if p.determinant().abs() < 0.1 {
                continue;
            }
            let pinv = p.clone().try_inverse().unwrap();
            return (p.transpose() * g0 * &p, &pinv * l0 * &p);
        }
    }

    #[test]
    fn random_round_trips_all_signatures() {
        for &sig in &[(0usize, 4usize), (1, 3), (2, 2)] {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + sig.0 as u64);
            let mut done = 0;
            let mut attempts = 0;
            while done < 100 {
                attempts += 1;
                assert!(attempts < 1000, "too many indecisions for {sig:?}");
                let (g, l) = random_pair(&mut rng, sig);
                match canonical_pair_form(&g, &l, DEFAULT_CLUSTER_TOL) {
                    Ok(pb) => {
                        // canonical_pair_form itself enforces the 1e-8
                        // residual and the signature; check the tiling too
                        assert_eq!(
                            pb.blocks.iter().map(|b| b.size).sum::<usize>(),
                            sig.0 + sig.1
                        );
                        assert!(pb.residual < 1e-8);
                        done += 1;
                    }
                    // random eigenvalues occasionally collide near the
                    // clustering threshold; skip those draws
                    Err(Error::ClusterIndecision { .. }) => continue,
                    Err(e) => panic!("{sig:?}: {e}"),
                }
            }
        }
    }

    #[test]
    fn characteristic_polynomial_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (g, l) = random_pair(&mut rng, (2, 2));
        let pb = canonical_pair_form(&g, &l, DEFAULT_CLUSTER_TOL).unwrap();
        let mut before: Vec<Complex<f64>> = l.complex_eigenvalues().iter().copied().collect();
        let mut after: Vec<Complex<f64>> =
            pb.block_l.complex_eigenvalues().iter().copied().collect();
        let key = |z: &Complex<f64>| (z.re, z.im);
        before.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        after.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).norm() < 1e-7 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn jordan_structure_reports() {
        // nilpotent 2-block ⊕ zero
        let mut l = DMatrix::zeros(3, 3);
        l[(0, 1)] = 1.0;
        let js = jordan_structure(&l, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(js.len(), 1);
        assert_eq!(js[0].eigenvalue, (0.0, 0.0));
        assert_eq!(js[0].partition, vec![2, 1]);
        assert_eq!(js[0].geometric, 2);

        let js = jordan_structure(&diag(&[1.0, 2.0, 3.0]), DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(js.len(), 3);
        assert!(js.iter().all(|e| e.partition == vec![1]));

        // rotation: one conjugate pair, reported once
        let mut rot = DMatrix::zeros(2, 2);
        rot[(0, 1)] = 1.0;
        rot[(1, 0)] = -1.0;
        let js = jordan_structure(&rot, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(js.len(), 1);
        assert_eq!(js[0].eigenvalue, (0.0, 1.0));
    }

    #[test]
    fn clustering_indecision_is_reported() {
        // separation between tol·‖L‖ and 10·tol·‖L‖: too close to call
        let l = diag(&[1.0, 1.0 + 3e-6, 5.0]);
        let g = DMatrix::identity(3, 3);
        match canonical_pair_form(&g, &l, 1e-7) {
            Err(Error::ClusterIndecision { .. }) => {}
            other => panic!("expected clustering indecision, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        let g = DMatrix::identity(2, 2);
        let mut l = DMatrix::zeros(2, 2);
        l[(0, 1)] = 1.0; // not self-adjoint w.r.t. the identity
        assert!(matches!(
            canonical_pair_form(&g, &l, DEFAULT_CLUSTER_TOL),
            Err(Error::Malformed(_))
        ));
        let degenerate = DMatrix::zeros(2, 2);
        assert!(canonical_pair_form(&degenerate, &DMatrix::identity(2, 2), 1e-7).is_err());
    }

    #[test]
    fn corpus_example_pairs() {
        use crate::corpus;
        // the 4-dim corpus example: L is self-adjoint at the reference point
        let e1 = corpus::get("example1").unwrap();
        let p = [1.0, 1.0, 2.0, 3.0];
        let g = e1.metric.matrix_at(&p).unwrap();
        let lt = e1.l_field.as_ref().unwrap().eval_jets(&e1.metric, &p, 0).unwrap();
        let l = DMatrix::from_fn(4, 4, |i, j| lt.comps[i * 4 + j].value());
        assert!(check_self_adjoint(&g, &l));

        // the 6-dim cone example: L̂ is nilpotent with L̂² = 0 and Jordan
        // partition (2,2,2); its top-left 2×2 block against the top-left
        // metric block is a single nilpotent chain of size 2
        let e2 = corpus::get("example2").unwrap();
        let q = [1.0, 0.0, 1.0, 1.0, 1.0, 1.0];
        let gh = e2.metric.matrix_at(&q).unwrap();
        let lt = e2.l_field.as_ref().unwrap().eval_jets(&e2.metric, &q, 0).unwrap();
        let lh = DMatrix::from_fn(6, 6, |i, j| lt.comps[i * 6 + j].value());
        assert!(check_self_adjoint(&gh, &lh));
        assert!((&lh * &lh).norm() < 1e-12);
        let js = jordan_structure(&lh, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(js.len(), 1);
        assert_eq!(js[0].eigenvalue, (0.0, 0.0));
        assert_eq!(js[0].partition, vec![2, 2, 2]);

        let g2 = gh.view((0, 0), (2, 2)).clone_owned();
        let l2 = lh.view((0, 0), (2, 2)).clone_owned();
        let pb = canonical_pair_form(&g2, &l2, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(pb.blocks.len(), 1);
        assert_eq!(pb.blocks[0].size, 2);
        assert_eq!(pb.blocks[0].eigen, BlockEigen::Real(0.0));
    }
}
