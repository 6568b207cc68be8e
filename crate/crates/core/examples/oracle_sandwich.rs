// Independent estimates of the true nuclear norm of a small tensor, checked
// against the flattening interval.

use std::error::Error;

use nucbound::oracle::{primal_estimate, spectral_lower_estimate, spectral_upper_bound};
use nucbound::{lower_bound, upper_bound, DenseTensor, OracleConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let a = DenseTensor::new(
        vec![2, 2, 2],
        vec![0.9, -0.3, 0.2, 0.5, -0.1, 0.7, 0.4, 0.6],
    )?;
    let a = a.scaled(1.0 / a.hs_norm());

    let config = OracleConfig {
        restarts: 10,
        seed: 7,
        ..OracleConfig::for_tensor(&a)
    };
    let est = primal_estimate(&a, &config)?;
    println!(
        "spectral norm in [{:.9}, {:.9}]",
        spectral_lower_estimate(&a, 10, 7)?,
        spectral_upper_bound(&a)
    );
    println!("dual lower    {:.9}", est.dual_lower);
    println!(
        "flattening    [{:.9}, {:.9}]",
        lower_bound(&a),
        upper_bound(&a)
    );
    println!(
        "primal upper  {:.9} ({} terms, residual {:.1e}, {} runs)",
        est.primal_upper,
        est.decomposition.len(),
        est.relative_residual,
        est.runs
    );
    for term in &est.decomposition {
        println!("  {:.6} · {:.4?}", term.lambda, term.factors);
    }
    if est.dual_lower > est.primal_upper + 1e-9 || est.primal_upper > upper_bound(&a) + 1e-3 {
        return Err("estimates are not sandwiched".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
