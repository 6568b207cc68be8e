// The 1×J×J tensor Σ_i (1/√J)·1⊗e_i⊗e_i: its first flattening has nuclear
// norm 1 while the tensor itself has nuclear norm √J, the largest gap the
// flattening bounds allow.

use std::error::Error;

use nucbound::oracle::dual_lower_estimate;
use nucbound::{full_report, DenseTensor, DEFAULT_CERT_TOL};

fn sharp(j: usize) -> Result<DenseTensor, Box<dyn Error>> {
    let mut data = vec![0.0; j * j];
    for i in 0..j {
        data[i * j + i] = 1.0 / (j as f64).sqrt();
    }
    Ok(DenseTensor::new(vec![1, j, j], data)?)
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for j in [2usize, 4, 8] {
        let a = sharp(j)?;
        let report = full_report(&a, DEFAULT_CERT_TOL)?;
        let dual = dual_lower_estimate(&a)?;
        let first = &report.per_mode[0];
        println!(
            "J = {j}: |A_(1)|_* = {:.12}, coarse bound = {:.12}, interval = [{:.12}, {:.12}], dual = {:.12}, certified by mode {:?}",
            first.flattening_nuclear,
            first.coarse_upper,
            report.lower,
            report.upper,
            dual,
            report.certificate.as_ref().map(|c| c.mode),
        );
        let root = (j as f64).sqrt();
        if (report.lower - root).abs() > 1e-8 * root || (report.upper - root).abs() > 1e-8 * root {
            return Err(format!("interval for J = {j} is not [√J, √J]").into());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
