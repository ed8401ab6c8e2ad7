//! The two-way dictionary between solutions of the mobility system on a
//! base metric and parallel symmetric (0,2)-tensors on its cone.
//!
//! A solution (a, λ, μ) with B = −1 on (M, g) packs into the cone tensor
//!     A_00 = μ,  A_0i = −r λ_i,  A_ij = r² a_ij
//! which is parallel for dr² + r²g — and conversely every parallel form
//! unpacks into a solution.  This example walks both directions on the
//! sphere, using the generic flat-section engine on each side.
//!
//! ```bash
//! cargo run --release --example parallel_tensors_on_cones
//! ```

use geodesic_mobility::error::Result;
use geodesic_mobility::prolong::{self, ProlongOpts};
use geodesic_mobility::{cone, corpus, mobility, sampling};
use nalgebra::DMatrix;

fn main() -> Result<()> {
    let opts = ProlongOpts::default();
    let base = corpus::get("sphere2")?.metric;
    let n = base.dim;

    // base side: flat sections of the mobility connection with B = −1
    let x0 = sampling::base_point(&base, opts.seed)?;
    let ext = mobility::extended_connection(&base, -1.0);
    let fs = ext.flat_sections_at(&x0, &opts)?;
    println!("solutions over sphere2 with B = −1: D = {}", fs.dim);

    // cone side: flat sections of the symmetric-form connection
    let built = cone::build_cone(&base)?;
    let conn = prolong::sym2_cotangent_connection(&built.total);
    let mut c0 = vec![1.0];
    c0.extend_from_slice(&x0);
    let cfs = conn.flat_sections_at(&c0, &opts)?;
    println!("parallel symmetric forms on the cone:  {}", cfs.dim);
    assert_eq!(fs.dim, cfs.dim, "the two counts must agree");

    // pack one base solution and check it lies in the cone's parallel space
    let sol = mobility::decode_extended(&fs.basis.column(0).clone_owned(), n);
    let packed = prolong::matrix_to_sym(&cone::pack_parallel(&sol, 1.0));
    // residual of packed against span(cfs.basis): project and compare
    let basis = &cfs.basis;
    let gram = basis.transpose() * basis;
    let coef = gram
        .try_inverse()
        .expect("basis is orthonormal-ish")
        * (basis.transpose() * &packed);
    let recon: nalgebra::DVector<f64> = basis * coef;
    println!(
        "packed base solution vs parallel span: residual {:.3e}",
        (&packed - recon).norm() / packed.norm()
    );

    // unpack a cone form and display the solution triple at the basepoint
    let amat = prolong::sym_to_matrix(&cfs.basis.column(0).clone_owned(), n + 1);
    let back = cone::unpack_parallel(&amat, 1.0);
    println!("\none parallel form, unpacked at r = 1:");
    print_mat("  a =", &back.a);
    println!("  λ = {:?}", back.lambda.iter().copied().collect::<Vec<f64>>());
    println!("  μ = {:.6}", back.mu);
    Ok(())
}

fn print_mat(label: &str, m: &DMatrix<f64>) {
    println!("{label}");
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:9.5}", m[(i, j)])).collect();
        println!("    [{}]", row.join(" "));
    }
}
