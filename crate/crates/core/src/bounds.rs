//! Computable bounds on the tensor nuclear norm from mode-wise flattenings.
//!
//! For every mode `m` the flattening `A_(m)` is factored as
//! `Σ σ_i x_i ⊗ z_i`. Each right singular vector `z_i` is folded back into a
//! tensor `Z_i` over the remaining modes, and
//!
//! ```text
//! ‖A_(m)‖_* ≤ ‖A‖_* ≤ Σ σ_i ‖Z_i‖_* ≤ ‖A_(m)‖_* · max_i ‖Z_i‖_* ≤ coarse_m
//! ```
//!
//! where `coarse_m = √(∏ remaining dims without the largest) · ‖A_(m)‖_*`.
//! The reported interval is `[max_m ‖A_(m)‖_*, min_m Σ σ_i ‖Z_i‖_*]`.
//!
//! When every `Z_i` has nuclear norm one (all rank one), the interval
//! collapses and a [`TightnessCertificate`] carries the explicit
//! decomposition that attains it.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, Svd, DEFAULT_TRUNC_TOL};
use crate::tensor::{check_mode, dot, norm2, DenseTensor, Matrix};

/// Default tolerance on `|‖Z_i‖_* − 1|` for issuing a certificate.
pub const DEFAULT_CERT_TOL: f64 = 1e-6;

/// Everything the bounds need from one flattening.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeAnalysis {
    pub mode: usize,
    /// `‖A_(m)‖_*`, the sum of all singular values.
    pub flattening_nuclear: f64,
    /// Singular values retained after numerical-rank truncation.
    pub sigma: Vec<f64>,
    /// `‖Z_i‖_*` per retained singular vector. Exact when the fibers are
    /// matrices or vectors; otherwise the recursive upper bound of the fiber.
    pub z_nuclear: Vec<f64>,
    pub z_nuclear_max: f64,
    pub z_exact: bool,
    /// Mass of the singular values dropped by truncation.
    pub truncated_mass: f64,
    /// `Σ σ_i ‖Z_i‖_*`, plus the dropped mass times the coarse factor.
    pub refined_upper: f64,
    pub coarse_upper: f64,
}

/// Lower/upper interval for `‖A‖_*` together with all per-mode detail.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundsReport {
    pub shape: Vec<usize>,
    pub per_mode: Vec<ModeAnalysis>,
    pub lower: f64,
    /// Mode attaining `lower` (smallest index on ties).
    pub lower_mode: usize,
    pub upper: f64,
    /// Mode attaining `upper` (smallest index on ties).
    pub upper_mode: usize,
    pub hash_norm: f64,
    pub hs_upper: f64,
    pub certificate: Option<TightnessCertificate>,
    pub certification_tol: f64,
    pub truncation_tol: f64,
}

impl BoundsReport {
    pub fn min_coarse_upper(&self) -> f64 {
        self.per_mode
            .iter()
            .map(|m| m.coarse_upper)
            .fold(f64::INFINITY, f64::min)
    }

    /// `upper - lower`.
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Evidence that `‖A‖_* = ‖A_(mode)‖_*` for a 3-tensor, with
/// `A = Σ_i weights_i · x_i ⊗ u_i ⊗ v_i`.
///
/// `x_i` lives on `mode`; `u_i` and `v_i` live on the other two modes in
/// increasing order.
#[derive(Clone, Debug, PartialEq)]
pub struct TightnessCertificate {
    pub shape: Vec<usize>,
    pub mode: usize,
    pub value: f64,
    pub weights: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub max_z_deviation: f64,
}

impl TightnessCertificate {
    pub fn terms(&self) -> usize {
        self.weights.len()
    }

    /// Rebuilds `Σ w_i x_i ⊗ u_i ⊗ v_i` in the original mode order.
    pub fn reconstruct(&self) -> DenseTensor {
        let mut data = vec![0.0; self.shape.iter().product()];
        for i in 0..self.terms() {
            let factors: [&[f64]; 3] = match self.mode {
                1 => [&self.x[i], &self.u[i], &self.v[i]],
                2 => [&self.u[i], &self.x[i], &self.v[i]],
                _ => [&self.u[i], &self.v[i], &self.x[i]],
            };
            let term = DenseTensor::rank_one(&factors).expect("certificate factors are valid");
            for (d, t) in data.iter_mut().zip(term.data()) {
                *d += self.weights[i] * t;
            }
        }
        DenseTensor::new(self.shape.clone(), data).expect("finite reconstruction")
    }

    /// `max_{i,j} |⟨u_i,u_j⟩⟨v_i,v_j⟩ − δ_ij|`.
    pub fn cross_gram_deviation(&self) -> f64 {
        let r = self.terms();
        let mut worst = 0.0f64;
        for i in 0..r {
            for j in 0..r {
                let g = dot(&self.u[i], &self.u[j]) * dot(&self.v[i], &self.v[j]);
                let delta = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - delta).abs());
            }
        }
        worst
    }
}

/// `√(∏ dims / max dims)`, i.e. the square root of the product of all
/// dimensions except one copy of the largest. Empty input gives 1.
fn sqrt_all_but_largest(dims: &[usize]) -> f64 {
    let Some(&largest) = dims.iter().max() else {
        return 1.0;
    };
    let product: f64 = dims.iter().map(|&d| d as f64).product();
    (product / largest as f64).sqrt()
}

/// Nuclear norm (or a certified upper bound of it) of a fiber tensor given by
/// its lexicographic storage.
fn fiber_nuclear(z: &[f64], shape: &[usize]) -> f64 {
    match shape.len() {
        0 | 1 => norm2(z),
        2 => {
            let m = Matrix::new(shape[0], shape[1], z.to_vec()).expect("finite singular vector");
            linalg::nuclear_norm(&m)
        }
        _ => {
            let t = DenseTensor::from_fiber(z, shape).expect("fiber matches remaining shape");
            upper_bound(&t)
        }
    }
}

fn analyze(a: &DenseTensor, mode: usize) -> Result<(ModeAnalysis, Svd)> {
    let flat = a.flatten(mode)?;
    let remaining = a.remaining_shape(mode)?;
    let factor = sqrt_all_but_largest(&remaining);

    let mut svd = linalg::svd(&flat, 0.0)?;
    let flattening_nuclear: f64 = svd.sigma.iter().fold(0.0, |acc, x| acc + x);
    let cutoff = DEFAULT_TRUNC_TOL * svd.sigma.first().copied().unwrap_or(0.0);
    let keep = svd.sigma.iter().take_while(|&&s| s >= cutoff).count();
    let truncated_mass: f64 = svd.sigma[keep..].iter().fold(0.0, |acc, x| acc + x);
    svd.sigma.truncate(keep);
    svd.left.truncate(keep);
    svd.right.truncate(keep);

    let z_nuclear: Vec<f64> = svd
        .right
        .iter()
        .map(|z| fiber_nuclear(z, &remaining))
        .collect();
    let z_exact = remaining.len() <= 2;
    let z_nuclear_max = z_nuclear.iter().copied().fold(0.0, f64::max);
    let refined_upper = svd
        .sigma
        .iter()
        .zip(&z_nuclear)
        .map(|(s, z)| s * z)
        .fold(0.0, |acc, x| acc + x)
        + truncated_mass * factor;

    let analysis = ModeAnalysis {
        mode,
        flattening_nuclear,
        sigma: svd.sigma.clone(),
        z_nuclear,
        z_nuclear_max,
        z_exact,
        truncated_mass,
        refined_upper,
        coarse_upper: factor * flattening_nuclear,
    };
    Ok((analysis, svd))
}

/// Runs the flattening analysis for one mode.
pub fn analyze_mode(a: &DenseTensor, mode: usize) -> Result<ModeAnalysis> {
    analyze(a, mode).map(|(analysis, _)| analysis)
}

/// `max_m ‖A_(m)‖_*`, a lower bound on `‖A‖_*`.
pub fn lower_bound(a: &DenseTensor) -> f64 {
    (1..=a.order())
        .into_par_iter()
        .map(|m| linalg::nuclear_norm(&a.flatten(m).expect("mode in range")))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

/// `min_m Σ σ_i ‖Z_i‖_*`, an upper bound on `‖A‖_*`.
pub fn upper_bound(a: &DenseTensor) -> f64 {
    (1..=a.order())
        .into_par_iter()
        .map(|m| analyze_mode(a, m).expect("mode in range").refined_upper)
        .collect::<Vec<_>>()
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// `√(∏ remaining dims without the largest) · ‖A_(mode)‖_*`.
pub fn coarse_upper_bound(a: &DenseTensor, mode: usize) -> Result<f64> {
    let remaining = a.remaining_shape(mode)?;
    Ok(sqrt_all_but_largest(&remaining) * linalg::nuclear_norm(&a.flatten(mode)?))
}

/// Mean of the flattening nuclear norms over all modes.
pub fn hash_norm(a: &DenseTensor) -> f64 {
    let sum: f64 = (1..=a.order())
        .map(|m| linalg::nuclear_norm(&a.flatten(m).expect("mode in range")))
        .fold(0.0, |acc, x| acc + x);
    sum / a.order() as f64
}

/// `√(∏ all dims without the largest) · ‖A‖_HS`, an upper bound on `‖A‖_*`
/// obtained by splitting the tensor into its fibers along the largest mode.
pub fn hs_upper_bound(a: &DenseTensor) -> f64 {
    sqrt_all_but_largest(a.shape()) * a.hs_norm()
}

fn check_cert_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(tol))
    }
}

fn build_certificate(
    a: &DenseTensor,
    analysis: &ModeAnalysis,
    svd: &Svd,
    tol: f64,
) -> Option<TightnessCertificate> {
    if analysis.sigma.is_empty() {
        return None;
    }
    let max_z_deviation = analysis
        .z_nuclear
        .iter()
        .map(|z| (z - 1.0).abs())
        .fold(0.0, f64::max);
    if max_z_deviation > tol {
        return None;
    }
    let remaining = a.remaining_shape(analysis.mode).ok()?;
    let mut u = Vec::with_capacity(svd.rank());
    let mut v = Vec::with_capacity(svd.rank());
    for z in &svd.right {
        let zm = Matrix::new(remaining[0], remaining[1], z.clone()).ok()?;
        let pair = linalg::svd(&zm, DEFAULT_TRUNC_TOL).ok()?;
        u.push(pair.left.first()?.clone());
        v.push(pair.right.first()?.clone());
    }
    Some(TightnessCertificate {
        shape: a.shape().to_vec(),
        mode: analysis.mode,
        value: analysis.flattening_nuclear,
        weights: svd.sigma.clone(),
        x: svd.left.clone(),
        u,
        v,
        max_z_deviation,
    })
}

/// Checks whether every `Z_i` of the given mode is rank one to within `tol`
/// and, if so, returns the decomposition proving `‖A‖_* = ‖A_(mode)‖_*`.
/// Only order-3 tensors are supported.
pub fn certify_tightness(
    a: &DenseTensor,
    mode: usize,
    tol: f64,
) -> Result<Option<TightnessCertificate>> {
    check_cert_tol(tol)?;
    if a.order() != 3 {
        return Err(Error::UnsupportedOrder(a.order()));
    }
    check_mode(mode, 3)?;
    let (analysis, svd) = analyze(a, mode)?;
    Ok(build_certificate(a, &analysis, &svd, tol))
}

/// Full set of bounds for `A`: every mode analysed, the interval, the mean
/// flattening norm, the Hilbert–Schmidt bound and, for 3-tensors, the first
/// mode (if any) that certifies tightness at `tol`.
pub fn full_report(a: &DenseTensor, tol: f64) -> Result<BoundsReport> {
    check_cert_tol(tol)?;
    let analyses: Vec<(ModeAnalysis, Svd)> = (1..=a.order())
        .into_par_iter()
        .map(|m| analyze(a, m))
        .collect::<Result<_>>()?;

    let mut lower_mode = 1;
    let mut upper_mode = 1;
    for (k, (m, _)) in analyses.iter().enumerate() {
        if m.flattening_nuclear > analyses[lower_mode - 1].0.flattening_nuclear {
            lower_mode = k + 1;
        }
        if m.refined_upper < analyses[upper_mode - 1].0.refined_upper {
            upper_mode = k + 1;
        }
    }

    let certificate = if a.order() == 3 {
        analyses
            .iter()
            .find_map(|(m, svd)| build_certificate(a, m, svd, tol))
    } else {
        None
    };

    let per_mode: Vec<ModeAnalysis> = analyses.into_iter().map(|(m, _)| m).collect();
    let hash_norm = per_mode
        .iter()
        .map(|m| m.flattening_nuclear)
        .fold(0.0, |acc, x| acc + x)
        / per_mode.len() as f64;
    Ok(BoundsReport {
        shape: a.shape().to_vec(),
        lower: per_mode[lower_mode - 1].flattening_nuclear,
        upper: per_mode[upper_mode - 1].refined_upper,
        lower_mode,
        upper_mode,
        hash_norm,
        hs_upper: hs_upper_bound(a),
        certificate,
        certification_tol: tol,
        truncation_tol: DEFAULT_TRUNC_TOL,
        per_mode,
    })
}
