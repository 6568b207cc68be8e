// Bounds for tensors of order four and five, where the fibers of each
// flattening are themselves bounded recursively.

use std::error::Error;

use nucbound::{analyze_mode, full_report, hs_upper_bound, DenseTensor, DEFAULT_CERT_TOL};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for shape in [vec![2, 3, 3, 4], vec![2, 2, 2, 3, 3]] {
        let n: usize = shape.iter().product();
        // A deterministic, non-degenerate filling.
        let data: Vec<f64> = (0..n)
            .map(|k| ((k * 7919 % 101) as f64 - 50.0) / 50.0)
            .collect();
        let a = DenseTensor::new(shape.clone(), data)?;
        let report = full_report(&a, DEFAULT_CERT_TOL)?;
        println!("shape {shape:?}");
        for m in 1..=a.order() {
            let analysis = analyze_mode(&a, m)?;
            println!(
                "  mode {m}: |A_(m)|_* = {:.6}, refined = {:.6}, coarse = {:.6}",
                analysis.flattening_nuclear, analysis.refined_upper, analysis.coarse_upper
            );
        }
        println!(
            "  interval [{:.6}, {:.6}], hash {:.6}, Hilbert–Schmidt bound {:.6}",
            report.lower,
            report.upper,
            report.hash_norm,
            hs_upper_bound(&a)
        );
        if report.lower > report.upper {
            return Err("empty interval".into());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
