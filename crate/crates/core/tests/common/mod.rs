#![allow(dead_code)]

use nucbound::{DenseTensor, Matrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn uniform(lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> f64 {
    Uniform::new(lo, hi).unwrap().sample(rng)
}

pub fn uniform_usize(lo: usize, hi_inclusive: usize, rng: &mut ChaCha8Rng) -> usize {
    Uniform::new_inclusive(lo, hi_inclusive)
        .unwrap()
        .sample(rng)
}

pub fn gaussian_tensor(shape: &[usize], rng: &mut ChaCha8Rng) -> DenseTensor {
    let n = shape.iter().product();
    DenseTensor::new(shape.to_vec(), gaussian(n, rng)).unwrap()
}

pub fn unit_hs(a: DenseTensor) -> DenseTensor {
    let n = a.hs_norm();
    a.scaled(1.0 / n)
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::new(rows, cols, gaussian(rows * cols, rng)).unwrap()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn random_unit(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let v = gaussian(dim, rng);
    let n = norm(&v);
    v.into_iter().map(|x| x / n).collect()
}

/// `r` orthonormal vectors in `R^dim` by Gram–Schmidt on Gaussian draws.
pub fn orthonormal(dim: usize, r: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    assert!(r <= dim);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(r);
    while basis.len() < r {
        let mut v = gaussian(dim, rng);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = norm(&v);
        if n > 1e-6 {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

pub fn rank_one_sum(weights: &[f64], factors: &[Vec<Vec<f64>>], shape: &[usize]) -> DenseTensor {
    let mut data = vec![0.0; shape.iter().product()];
    for (w, f) in weights.iter().zip(factors) {
        let t = DenseTensor::rank_one(f).unwrap();
        data.iter_mut().zip(t.data()).for_each(|(d, x)| *d += w * x);
    }
    DenseTensor::new(shape.to_vec(), data).unwrap()
}

/// A tensor `Σ σ_i x_i ⊗ u_i ⊗ v_i` with orthonormal `x_i`, orthonormal `u_i`
/// and arbitrary unit `v_i`. Returns it with `Σ σ_i`.
pub fn orthogonal_terms_tensor(
    shape: [usize; 3],
    r: usize,
    rng: &mut ChaCha8Rng,
) -> (DenseTensor, f64) {
    let x = orthonormal(shape[0], r, rng);
    let u = orthonormal(shape[1], r, rng);
    let sigma: Vec<f64> = (0..r).map(|_| uniform(0.2, 2.0, rng)).collect();
    let factors: Vec<Vec<Vec<f64>>> = (0..r)
        .map(|i| vec![x[i].clone(), u[i].clone(), random_unit(shape[2], rng)])
        .collect();
    (rank_one_sum(&sigma, &factors, &shape), sigma.iter().sum())
}

/// `Σ_i (1/√J) · 1 ⊗ e_i ⊗ e_i` of shape `1 × J × J`.
pub fn sharp_instance(j: usize) -> DenseTensor {
    let mut data = vec![0.0; j * j];
    let c = 1.0 / (j as f64).sqrt();
    for i in 0..j {
        data[i * j + i] = c;
    }
    DenseTensor::new(vec![1, j, j], data).unwrap()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(a.abs()).max(1e-300)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn jacobi_eigenvalues(n: usize, sym: &[f64]) -> Vec<f64> {
    let mut a = sym.to_vec();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    eig
}

/// `M Mᵀ` as a flat row-major `rows × rows` matrix.
pub fn gram_rows(m: &Matrix) -> Vec<f64> {
    let r = m.rows();
    let mut g = vec![0.0; r * r];
    for i in 0..r {
        for j in 0..r {
            g[i * r + j] = dot(m.row(i), m.row(j));
        }
    }
    g
}
