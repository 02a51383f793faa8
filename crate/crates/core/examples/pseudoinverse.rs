//! Pseudoinverse of a tall complex matrix, its Hermitian embedding, and the
//! four Penrose conditions.

use num_complex::Complex64;
use qfit::linalg::{condition_estimate, embed, pseudoinverse, ComplexMatrix};

fn main() -> qfit::Result<()> {
    let c = Complex64::new;
    let f = ComplexMatrix::from_row_major(
        3,
        2,
        vec![c(1.0, 0.0), c(0.0, 1.0), c(0.5, 0.0), c(1.0, -0.5), c(0.0, 0.0), c(2.0, 0.0)],
    )?;
    let cond = condition_estimate(&f)?;
    println!("sigma_max {:.4}  sigma_min {:.4}  kappa {:.4}", cond.sigma_max, cond.sigma_min, cond.kappa);

    let p = pseudoinverse(&f)?.into_dmatrix();
    let a = f.as_dmatrix();
    let ap = a * &p;
    let pa = &p * a;
    println!("|A P A - A|    = {:.2e}", (a * &p * a - a).norm());
    println!("|P A P - P|    = {:.2e}", (&p * a * &p - &p).norm());
    println!("|(AP)* - AP|   = {:.2e}", (ap.adjoint() - &ap).norm());
    println!("|(PA)* - PA|   = {:.2e}", (pa.adjoint() - &pa).norm());

    let h = embed(&f)?;
    println!("embedding: {}x{} ({} parameter rows, {} data rows)", h.dim(), h.dim(), h.params(), h.data());
    let eig = h.matrix().as_dmatrix().clone().symmetric_eigenvalues();
    let mut values: Vec<f64> = eig.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    println!("eigenvalues: {values:.4?}");
    Ok(())
}
