// The full interval for a random 3-tensor, with every mode's ingredients.

use std::error::Error;

use nucbound::{full_report, io, DenseTensor, DEFAULT_CERT_TOL};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let shape = vec![3, 4, 5];
    let data: Vec<f64> = (0..60).map(|_| StandardNormal.sample(&mut rng)).collect();
    let a = DenseTensor::new(shape, data)?;

    let report = full_report(&a, DEFAULT_CERT_TOL)?;
    print!("{}", io::pretty_report(&report));

    // hash ≤ lower ≤ upper ≤ every coarse bound.
    let ok = report.hash_norm <= report.lower
        && report.lower <= report.upper
        && report
            .per_mode
            .iter()
            .all(|m| report.upper <= m.coarse_upper);
    if !ok {
        return Err("bound chain violated".into());
    }
    println!("relative gap: {:.3}", report.gap() / report.upper);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
