// Storage order, mode-m flattenings and the exact way back.

use std::error::Error;

use nucbound::{DenseTensor, Matrix};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // Entries are stored with the last index varying fastest.
    let a = DenseTensor::new(vec![2, 2, 2], (1..=8).map(f64::from).collect())?;
    println!("A =\n{a}");

    for mode in 1..=3 {
        let flat = a.flatten(mode)?;
        println!(
            "A_({mode}) is {}x{}: {:?}",
            flat.rows(),
            flat.cols(),
            flat.data()
        );
        let back = DenseTensor::unflatten(&flat, a.shape(), mode)?;
        if back != a {
            return Err(format!("mode {mode} roundtrip changed the tensor").into());
        }
    }

    // The inner product and the Hilbert–Schmidt norm do not depend on the
    // mode used to flatten.
    let b = DenseTensor::rank_one(&[[1.0, -1.0], [2.0, 0.5], [0.0, 1.0]])?;
    let ab = a.inner(&b)?;
    for mode in 1..=3 {
        let fm: f64 = a.flatten(mode)?.inner(&b.flatten(mode)?)?;
        let fro = a.flatten(mode)?.frobenius();
        println!("mode {mode}: <A_(m), B_(m)> = {fm}, |A_(m)|_F = {fro:.12}");
        if (fm - ab).abs() > 1e-12 * ab.abs().max(1.0) {
            return Err("flattened inner product disagrees".into());
        }
    }
    println!("<A, B> = {ab}, |A|_HS = {:.12}", a.hs_norm());

    let m = Matrix::outer(&[1.0, 2.0], &[3.0, 4.0, 5.0])?;
    println!("a rank-one matrix: {:?}", m.data());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
