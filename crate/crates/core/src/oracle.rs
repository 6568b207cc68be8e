//! Small-scale estimators of the true tensor spectral and nuclear norms.
//!
//! These are independent of the flattening bounds and exist to check them:
//! the nuclear norm is estimated from above by searching for cheap rank-one
//! decompositions, and from below through duality with a certified upper
//! bound on the spectral norm.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::tensor::{dot, increment, norm2, DenseTensor, Matrix};

const MU_START: f64 = 1.0;
const MU_GROWTH: f64 = 10.0;
const PENALTY_STAGES: usize = 5;
const STEPS_PER_STAGE: usize = 500;
const POLISH_SWEEPS: usize = 200;
const POWER_SWEEPS: usize = 1000;

pub const DEFAULT_RESTARTS: usize = 20;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-9;

/// One term `λ · f_1 ⊗ … ⊗ f_N` with unit factors and `λ ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOneTerm {
    pub lambda: f64,
    pub factors: Vec<Vec<f64>>,
}

/// Result of [`primal_estimate`].
#[derive(Clone, Debug, PartialEq)]
pub struct OracleEstimate {
    /// `Σ |λ_s|` of the decomposition found.
    pub primal_upper: f64,
    /// Certified lower bound `‖A‖²_HS / spectral_upper_bound(A)`.
    pub dual_lower: f64,
    pub decomposition: Vec<RankOneTerm>,
    pub relative_residual: f64,
    pub converged: bool,
    pub restarts_used: usize,
    /// Total descent runs, across every term budget up to `max_terms`.
    pub runs: usize,
    pub max_terms: usize,
    pub seed: u64,
}

impl OracleEstimate {
    pub fn reconstruct(&self, shape: &[usize]) -> Result<DenseTensor> {
        let mut data = vec![0.0; shape.iter().product()];
        for term in &self.decomposition {
            let t = DenseTensor::rank_one(&term.factors)?;
            for (d, x) in data.iter_mut().zip(t.data()) {
                *d += term.lambda * x;
            }
        }
        DenseTensor::new(shape.to_vec(), data)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleConfig {
    pub max_terms: usize,
    pub restarts: usize,
    pub seed: u64,
    pub residual_tol: f64,
}

impl OracleConfig {
    /// Defaults for `a`: `max_terms` is the product of the two smallest
    /// dimensions.
    pub fn for_tensor(a: &DenseTensor) -> Self {
        Self {
            max_terms: default_max_terms(a.shape()),
            restarts: DEFAULT_RESTARTS,
            seed: DEFAULT_SEED,
            residual_tol: DEFAULT_RESIDUAL_TOL,
        }
    }
}

pub fn default_max_terms(shape: &[usize]) -> usize {
    let mut dims = shape.to_vec();
    dims.sort_unstable();
    dims.iter().take(2).product::<usize>().max(1)
}

fn seeded(seed: u64, restart: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart as u64))
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm2(&v);
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Contraction of `data` with every factor except `skip`, giving a vector
/// along mode `skip`.
fn contract_except(data: &[f64], shape: &[usize], factors: &[Vec<f64>], skip: usize) -> Vec<f64> {
    let mut out = vec![0.0; shape[skip]];
    let mut index = vec![0usize; shape.len()];
    for &a in data {
        let mut w = a;
        for (k, f) in factors.iter().enumerate() {
            if k != skip {
                w *= f[index[k]];
            }
        }
        out[index[skip]] += w;
        increment(&mut index, shape);
    }
    out
}

fn evaluate(data: &[f64], shape: &[usize], factors: &[Vec<f64>]) -> f64 {
    dot(&contract_except(data, shape, factors, 0), &factors[0])
}

/// Largest `⟨A, v_1 ⊗ … ⊗ v_N⟩` over unit vectors found by alternating
/// maximization from `restarts` random starts. Always a lower bound on the
/// spectral norm.
pub fn spectral_lower_estimate(a: &DenseTensor, restarts: usize, seed: u64) -> Result<f64> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    if a.is_zero() {
        return Ok(0.0);
    }
    let shape = a.shape();
    let values: Vec<f64> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeded(seed, r);
            let mut factors: Vec<Vec<f64>> =
                shape.iter().map(|&d| random_unit(d, &mut rng)).collect();
            let mut value = evaluate(a.data(), shape, &factors);
            for _ in 0..POWER_SWEEPS {
                let previous = value;
                for k in 0..shape.len() {
                    let c = contract_except(a.data(), shape, &factors, k);
                    let n = norm2(&c);
                    if n > 0.0 {
                        factors[k] = c.into_iter().map(|x| x / n).collect();
                        value = n;
                    }
                }
                if value - previous <= 1e-15 * value.abs() {
                    break;
                }
            }
            evaluate(a.data(), shape, &factors)
        })
        .collect();
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// `min_m σ_1(A_(m))`. Every unit rank-one tensor flattens to a unit
/// rank-one matrix, so this bounds the tensor spectral norm from above.
pub fn spectral_upper_bound(a: &DenseTensor) -> f64 {
    (1..=a.order())
        .map(|m| linalg::spectral_norm(&a.flatten(m).expect("mode in range")))
        .fold(f64::INFINITY, f64::min)
}

/// `‖A‖²_HS / spectral_upper_bound(A)`: the pairing of `A` with
/// `A / spectral_upper_bound(A)`, a tensor of spectral norm at most one.
pub fn dual_lower_estimate(a: &DenseTensor) -> Result<f64> {
    if a.is_zero() {
        return Err(Error::ZeroTensor);
    }
    let hs = a.hs_norm();
    Ok(hs * hs / spectral_upper_bound(a))
}

/// Index bookkeeping shared by every run on one shape.
struct Layout {
    shape: Vec<usize>,
    /// Offset of mode `k` inside one term's block of parameters.
    offsets: Vec<usize>,
    /// Parameters per term (the sum of the dimensions).
    stride: usize,
    /// For entry `e` and mode `k`, `offsets[k] + i_k(e)`.
    index: Vec<usize>,
    entries: usize,
}

impl Layout {
    fn new(shape: &[usize]) -> Self {
        let n = shape.len();
        let mut offsets = Vec::with_capacity(n);
        let mut stride = 0;
        for &d in shape {
            offsets.push(stride);
            stride += d;
        }
        let entries: usize = shape.iter().product();
        let mut index = Vec::with_capacity(entries * n);
        let mut multi = vec![0usize; n];
        for _ in 0..entries {
            index.extend(multi.iter().zip(&offsets).map(|(i, o)| i + o));
            increment(&mut multi, shape);
        }
        Self {
            shape: shape.to_vec(),
            offsets,
            stride,
            index,
            entries,
        }
    }

    fn order(&self) -> usize {
        self.shape.len()
    }
}

/// Factor vectors of a fixed number of terms, stored flat: mode `k` of term
/// `s` is `params[s * stride + offsets[k]..][..shape[k]]`.
#[derive(Clone)]
struct Factors<'a> {
    layout: &'a Layout,
    terms: usize,
    params: Vec<f64>,
}

impl<'a> Factors<'a> {
    fn random(layout: &'a Layout, terms: usize, rng: &mut ChaCha8Rng) -> Self {
        let scale = (1.0 / terms as f64).powf(1.0 / layout.order() as f64);
        let mut params = Vec::with_capacity(terms * layout.stride);
        for _ in 0..terms {
            for &d in &layout.shape {
                params.extend(random_unit(d, rng).into_iter().map(|x| x * scale));
            }
        }
        Self {
            layout,
            terms,
            params,
        }
    }

    fn factor(&self, s: usize, k: usize) -> &[f64] {
        &self.params[s * self.layout.stride + self.layout.offsets[k]..][..self.layout.shape[k]]
    }

    fn factor_mut(&mut self, s: usize, k: usize) -> &mut [f64] {
        let start = s * self.layout.stride + self.layout.offsets[k];
        &mut self.params[start..][..self.layout.shape[k]]
    }

    fn weight(&self, s: usize) -> f64 {
        (0..self.layout.order())
            .map(|k| norm2(self.factor(s, k)))
            .product()
    }

    fn penalty(&self) -> f64 {
        (0..self.terms).map(|s| self.weight(s)).sum()
    }

    /// Writes `Σ_s ⊗_k p_{s,k} − target` into `out`.
    fn residual_into(&self, target: &[f64], out: &mut [f64]) {
        let l = self.layout;
        let n = l.order();
        out.iter_mut().zip(target).for_each(|(o, t)| *o = -t);
        for s in 0..self.terms {
            let p = &self.params[s * l.stride..][..l.stride];
            for (e, o) in out.iter_mut().enumerate() {
                let idx = &l.index[e * n..][..n];
                *o += idx.iter().map(|&i| p[i]).product::<f64>();
            }
        }
    }

    fn residual(&self, target: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.layout.entries];
        self.residual_into(target, &mut r);
        r
    }

    fn objective(&self, target: &[f64], mu: f64, scratch: &mut [f64]) -> f64 {
        self.residual_into(target, scratch);
        mu * dot(scratch, scratch) + self.penalty()
    }

    /// Objective value, with its gradient written into `grad`.
    fn objective_and_gradient(
        &self,
        target: &[f64],
        mu: f64,
        scratch: &mut [f64],
        grad: &mut [f64],
    ) -> f64 {
        let l = self.layout;
        let n = l.order();
        self.residual_into(target, scratch);
        let value = mu * dot(scratch, scratch) + self.penalty();
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut prefix = vec![1.0; n + 1];
        for s in 0..self.terms {
            let base = s * l.stride;
            let p = &self.params[base..][..l.stride];
            let g = &mut grad[base..][..l.stride];
            for (e, &r) in scratch.iter().enumerate() {
                let idx = &l.index[e * n..][..n];
                for k in 0..n {
                    prefix[k + 1] = prefix[k] * p[idx[k]];
                }
                let mut suffix = 2.0 * mu * r;
                for k in (0..n).rev() {
                    g[idx[k]] += prefix[k] * suffix;
                    suffix *= p[idx[k]];
                }
            }
            let norms: Vec<f64> = (0..n).map(|k| norm2(self.factor(s, k))).collect();
            let w: f64 = norms.iter().product();
            if w > 0.0 {
                for ((&nk, &off), &dim) in norms.iter().zip(&l.offsets).zip(&l.shape) {
                    let c = w / (nk * nk);
                    for i in off..off + dim {
                        g[i] += c * p[i];
                    }
                }
            }
        }
        value
    }

    /// Rescales the factors of each term to equal norms; the represented
    /// tensor and the penalty are unchanged.
    fn rebalance(&mut self) {
        let n = self.layout.order();
        for s in 0..self.terms {
            let norms: Vec<f64> = (0..n).map(|k| norm2(self.factor(s, k))).collect();
            let w: f64 = norms.iter().product();
            if w > 0.0 {
                let target = w.powf(1.0 / n as f64);
                for (k, nk) in norms.iter().enumerate() {
                    let c = target / nk;
                    self.factor_mut(s, k).iter_mut().for_each(|x| *x *= c);
                }
            }
        }
    }

    /// Gradient descent on the penalized objective. Trial steps follow the
    /// Barzilai–Borwein rule and are cut back until the Armijo condition
    /// holds.
    fn descend(&mut self, target: &[f64], mu: f64) {
        let len = self.params.len();
        let mut scratch = vec![0.0; self.layout.entries];
        let mut grad = vec![0.0; len];
        let mut next_grad = vec![0.0; len];
        let mut trial = self.clone();

        self.rebalance();
        let mut value = self.objective_and_gradient(target, mu, &mut scratch, &mut grad);
        let mut step = 1.0 / mu;
        for it in 1..=STEPS_PER_STAGE {
            let gg = dot(&grad, &grad);
            if gg <= 1e-30 {
                return;
            }
            let mut accepted = false;
            for _ in 0..60 {
                for ((t, x), g) in trial.params.iter_mut().zip(&self.params).zip(&grad) {
                    *t = x - step * g;
                }
                let v = trial.objective(target, mu, &mut scratch);
                if v <= value - 1e-4 * step * gg {
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                return;
            }
            let rebalance = it % 50 == 0;
            if rebalance {
                trial.rebalance();
            }
            let v = trial.objective_and_gradient(target, mu, &mut scratch, &mut next_grad);
            let (mut ss, mut sy) = (0.0, 0.0);
            for i in 0..len {
                let sd = trial.params[i] - self.params[i];
                ss += sd * sd;
                sy += sd * (next_grad[i] - grad[i]);
            }
            std::mem::swap(&mut self.params, &mut trial.params);
            std::mem::swap(&mut grad, &mut next_grad);
            let decrease = value - v;
            value = v;
            if decrease <= 1e-14 * value {
                return;
            }
            step = if !rebalance && sy > 0.0 {
                (ss / sy).clamp(1e-12, 1e6)
            } else {
                step * 2.0
            };
        }
    }

    /// Drives the residual to zero with minimum-norm least-squares
    /// corrections of one mode at a time, staying close to the current
    /// factors.
    fn polish(&mut self, target: &[f64], tol: f64) -> f64 {
        self.drop_empty_terms();
        let mut res = norm2(&self.residual(target));
        if self.terms == 0 {
            return res;
        }
        for _ in 0..POLISH_SWEEPS {
            if res <= tol {
                break;
            }
            let before = res;
            for k in 0..self.layout.order() {
                self.correct_mode(target, k);
            }
            self.rebalance();
            res = norm2(&self.residual(target));
            if res > 0.999 * before {
                break;
            }
        }
        res
    }

    fn drop_empty_terms(&mut self) {
        let stride = self.layout.stride;
        let keep: Vec<usize> = (0..self.terms)
            .filter(|&s| self.weight(s) > 1e-14)
            .collect();
        let mut params = Vec::with_capacity(keep.len() * stride);
        for &s in &keep {
            params.extend_from_slice(&self.params[s * stride..][..stride]);
        }
        self.terms = keep.len();
        self.params = params;
    }

    fn correct_mode(&mut self, target: &[f64], k: usize) {
        let shape = self.layout.shape.clone();
        let residual = DenseTensor::new(shape.clone(), self.residual(target))
            .expect("finite residual")
            .scaled(-1.0);
        let r_k = residual.flatten(k + 1).expect("mode in range");
        let cols = r_k.cols();
        // Row s of `design` is the product of the non-k factors of term s,
        // laid out like the columns of the mode-k flattening.
        let mut design = Vec::with_capacity(self.terms * cols);
        for s in 0..self.terms {
            let mut block = vec![1.0];
            for j in (0..shape.len()).filter(|&j| j != k) {
                let f = self.factor(s, j);
                block = block
                    .iter()
                    .flat_map(|&h| f.iter().map(move |&x| h * x))
                    .collect();
            }
            design.extend(block);
        }
        let Ok(design) = Matrix::new(self.terms, cols, design) else {
            return;
        };
        // Minimum-norm least squares through the truncated pseudo-inverse:
        // delta = R_k · Σ_r right_r σ_r⁻¹ left_rᵀ.
        let Ok(svd) = linalg::svd(&design, 1e-10) else {
            return;
        };
        for i in 0..r_k.rows() {
            let row = r_k.row(i);
            let coeffs: Vec<f64> = svd
                .right
                .iter()
                .zip(&svd.sigma)
                .map(|(v, s)| dot(row, v) / s)
                .collect();
            for s in 0..self.terms {
                let d: f64 = coeffs.iter().zip(&svd.left).map(|(c, u)| c * u[s]).sum();
                self.factor_mut(s, k)[i] += d;
            }
        }
    }

    fn into_terms(self, scale: f64) -> Vec<RankOneTerm> {
        (0..self.terms)
            .filter_map(|s| {
                let w = self.weight(s);
                (w > 0.0).then(|| RankOneTerm {
                    lambda: w * scale,
                    factors: (0..self.layout.order())
                        .map(|k| {
                            let f = self.factor(s, k);
                            let n = norm2(f);
                            f.iter().map(|x| x / n).collect()
                        })
                        .collect(),
                })
            })
            .collect()
    }
}

struct Run {
    terms: Vec<RankOneTerm>,
    value: f64,
    residual: f64,
}

fn single_run(
    unit: &[f64],
    layout: &Layout,
    terms: usize,
    seed: u64,
    restart: usize,
    tol: f64,
    scale: f64,
) -> Run {
    let mut rng = seeded(seed, restart);
    let mut f = Factors::random(layout, terms, &mut rng);
    let mut mu = MU_START;
    for _ in 0..PENALTY_STAGES {
        f.descend(unit, mu);
        mu *= MU_GROWTH;
    }
    let residual = f.polish(unit, 0.1 * tol);
    let value = f.penalty() * scale;
    Run {
        terms: f.into_terms(scale),
        value,
        residual,
    }
}

/// Searches for a decomposition `A = Σ λ_s f_s^1 ⊗ … ⊗ f_s^N` with small
/// `Σ |λ_s|`, giving an upper estimate of the nuclear norm.
///
/// Each run minimizes `μ‖Σ_s p_s ⊗ q_s ⊗ … − A‖² + Σ_s ‖p_s‖‖q_s‖…` by
/// backtracking gradient descent while `μ` grows geometrically, then removes
/// the remaining residual with least-squares corrections. Runs are made for
/// every term budget `1..=max_terms` and `restarts` seeds each (restart `k`
/// is seeded with `seed + k`); the smallest value among runs that reach the
/// residual tolerance wins. Because every smaller budget is included, the
/// result never increases with `max_terms`.
///
/// If no run reaches the tolerance, [`Error::DidNotConverge`] carries the
/// run with the smallest residual.
pub fn primal_estimate(a: &DenseTensor, config: &OracleConfig) -> Result<OracleEstimate> {
    if config.max_terms == 0 || config.restarts == 0 {
        return Err(Error::InvalidArgument(
            "max_terms and restarts must be at least 1".into(),
        ));
    }
    if !(config.residual_tol.is_finite() && config.residual_tol > 0.0) {
        return Err(Error::InvalidTolerance(config.residual_tol));
    }
    let mut estimate = OracleEstimate {
        primal_upper: 0.0,
        dual_lower: 0.0,
        decomposition: Vec::new(),
        relative_residual: 0.0,
        converged: true,
        restarts_used: config.restarts,
        runs: 0,
        max_terms: config.max_terms,
        seed: config.seed,
    };
    if a.is_zero() {
        return Ok(estimate);
    }

    let hs = a.hs_norm();
    let unit: Vec<f64> = a.data().iter().map(|x| x / hs).collect();
    let layout = Layout::new(a.shape());
    let jobs: Vec<(usize, usize)> = (1..=config.max_terms)
        .flat_map(|t| (0..config.restarts).map(move |k| (t, k)))
        .collect();
    let runs: Vec<Run> = jobs
        .par_iter()
        .map(|&(t, k)| single_run(&unit, &layout, t, config.seed, k, config.residual_tol, hs))
        .collect();

    let feasible = runs
        .iter()
        .filter(|r| r.residual <= config.residual_tol)
        .min_by(|x, y| x.value.total_cmp(&y.value));
    let (best, converged) = match feasible {
        Some(r) => (r, true),
        None => (
            runs.iter()
                .min_by(|x, y| x.residual.total_cmp(&y.residual))
                .expect("at least one run"),
            false,
        ),
    };

    estimate.primal_upper = best.value;
    estimate.decomposition = best.terms.clone();
    estimate.relative_residual = best.residual;
    estimate.converged = converged;
    estimate.runs = runs.len();
    estimate.dual_lower = dual_lower_estimate(a)?;
    if converged {
        Ok(estimate)
    } else {
        Err(Error::DidNotConverge {
            best: Box::new(estimate),
        })
    }
}

/// `⟨A, f_1 ⊗ … ⊗ f_N⟩` for explicit factors.
pub fn rank_one_pairing(a: &DenseTensor, factors: &[Vec<f64>]) -> f64 {
    evaluate(a.data(), a.shape(), factors)
}
