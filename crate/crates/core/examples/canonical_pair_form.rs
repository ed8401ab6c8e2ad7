//! Simultaneous normal form of a symmetric scalar product G and a
//! G-self-adjoint endomorphism L.
//!
//! A change of basis P takes the pair to block-diagonal shape: for each
//! real Jordan block, G becomes ±F_m (the antidiagonal of ones) with L a
//! single Jordan block; complex-conjugate eigenvalue pairs α ± iβ give a
//! real block of even size with 2×2 rotation cells.
//!
//! ```bash
//! cargo run --release --example canonical_pair_form
//! ```

use geodesic_mobility::canonical::{canonical_pair_form, jordan_structure, DEFAULT_CLUSTER_TOL};
use geodesic_mobility::error::Result;
use geodesic_mobility::{corpus, sampling};
use nalgebra::DMatrix;

fn show(m: &DMatrix<f64>) {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:6.2}", m[(i, j)])).collect();
        println!("    [{}]", row.join(" "));
    }
}

fn main() -> Result<()> {
    // two independent rotation cells: eigenvalues ±i with two blocks of size 2
    let g = DMatrix::from_fn(4, 4, |i, j| if i / 2 == j / 2 && i != j { 1.0 } else { 0.0 });
    let mut l = DMatrix::zeros(4, 4);
    l[(0, 1)] = 1.0;
    l[(1, 0)] = -1.0;
    l[(2, 3)] = 1.0;
    l[(3, 2)] = -1.0;
    let pb = canonical_pair_form(&g, &l, DEFAULT_CLUSTER_TOL)?;
    println!("two rotation cells: blocks = {:?}, residual {:.2e}", pb.blocks, pb.residual);

    // one chained complex block of size 4
    let f4 = DMatrix::from_fn(4, 4, |i, j| if i + j == 3 { 1.0 } else { 0.0 });
    let mut jc = l.clone();
    jc[(0, 2)] = 1.0;
    jc[(1, 3)] = 1.0;
    let pb = canonical_pair_form(&f4, &jc, DEFAULT_CLUSTER_TOL)?;
    println!("chained pair:       blocks = {:?}, residual {:.2e}", pb.blocks, pb.residual);
    println!("  normal form of G:");
    show(&pb.block_g);
    println!("  normal form of L:");
    show(&pb.block_l);

    // the parallel endomorphism of the 6-dim cone example, at a point:
    // nilpotent with three 2×2 Jordan blocks
    let e = corpus::get("example2")?;
    let m = &e.metric;
    let p = sampling::base_point(m, 42)?;
    let lv = e.l_field.as_ref().unwrap().eval_jets(m, &p, 0)?;
    let n = m.dim;
    let lm = DMatrix::from_fn(n, n, |i, j| lv.comps[i * n + j].value());
    let js = jordan_structure(&lm, DEFAULT_CLUSTER_TOL)?;
    println!("\nexample2 endomorphism at a sample point:");
    for s in &js {
        println!(
            "  eigenvalue {:?}: algebraic {}, geometric {}, partition {:?}",
            s.eigenvalue, s.algebraic, s.geometric, s.partition
        );
    }
    Ok(())
}
