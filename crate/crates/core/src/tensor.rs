//! Dense real tensors, matrices and the mode-m flattening isomorphism.
//!
//! Storage is lexicographic in the multi-index with the last index varying
//! fastest. Modes are numbered from 1, so an order-N tensor has modes
//! `1..=N`.

use std::fmt;

use crate::error::{Error, Result};

/// An order-N array of finite `f64` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

/// A dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

fn check_shape(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() || shape.contains(&0) {
        return Err(Error::InvalidShape(shape.to_vec()));
    }
    Ok(shape.iter().product())
}

fn check_finite(data: &[f64]) -> Result<()> {
    match data.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFiniteEntry {
            index,
            value: data[index],
        }),
        None => Ok(()),
    }
}

pub(crate) fn check_mode(mode: usize, order: usize) -> Result<()> {
    if mode == 0 || mode > order {
        Err(Error::ModeOutOfRange { mode, order })
    } else {
        Ok(())
    }
}

impl DenseTensor {
    /// Builds a tensor from its shape and lexicographically ordered entries.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected = check_shape(&shape)?;
        if data.len() != expected {
            return Err(Error::ShapeDataMismatch {
                shape,
                expected,
                found: data.len(),
            });
        }
        check_finite(&data)?;
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        let len = check_shape(shape)?;
        Ok(Self {
            shape: shape.to_vec(),
            data: vec![0.0; len],
        })
    }

    /// Outer product `v_1 ⊗ v_2 ⊗ … ⊗ v_N`, whose entry at `(i_1, …, i_N)`
    /// is `v_1[i_1] · … · v_N[i_N]`.
    pub fn rank_one<V: AsRef<[f64]>>(vectors: &[V]) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidShape(Vec::new()));
        }
        for (k, v) in vectors.iter().enumerate() {
            let v = v.as_ref();
            if v.is_empty() {
                return Err(Error::EmptyVector(k));
            }
            check_finite(v)?;
        }
        let shape: Vec<usize> = vectors.iter().map(|v| v.as_ref().len()).collect();
        let mut data = vec![1.0];
        for v in vectors {
            let v = v.as_ref();
            data = data
                .iter()
                .flat_map(|&head| v.iter().map(move |&x| head * x))
                .collect();
        }
        Self::new(shape, data)
    }

    /// Reshapes a vector into a tensor of `shape` whose lexicographic storage
    /// is the vector itself. Used to turn right singular vectors of a
    /// flattening back into fibers over the remaining modes.
    pub fn from_fiber(z: &[f64], shape: &[usize]) -> Result<Self> {
        Self::new(shape.to_vec(), z.to_vec())
    }

    /// Inverse of [`DenseTensor::flatten`].
    pub fn unflatten(matrix: &Matrix, shape: &[usize], mode: usize) -> Result<Self> {
        let len = check_shape(shape)?;
        check_mode(mode, shape.len())?;
        let (outer, dim, inner) = split_at_mode(shape, mode);
        if matrix.rows != dim || matrix.cols != outer * inner {
            return Err(Error::ShapeMismatch {
                left: vec![matrix.rows, matrix.cols],
                right: vec![dim, outer * inner],
            });
        }
        let mut data = vec![0.0; len];
        for o in 0..outer {
            for i in 0..dim {
                let src = &matrix.data[i * matrix.cols + o * inner..][..inner];
                data[(o * dim + i) * inner..][..inner].copy_from_slice(src);
            }
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Entry at a zero-based multi-index.
    pub fn get(&self, index: &[usize]) -> Option<f64> {
        if index.len() != self.shape.len() || index.iter().zip(&self.shape).any(|(i, d)| i >= d) {
            return None;
        }
        let offset = index
            .iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &d)| acc * d + i);
        Some(self.data[offset])
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0.0)
    }

    /// `⟨A, B⟩ = Σ a·b` over all multi-indices.
    pub fn inner(&self, other: &DenseTensor) -> Result<f64> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                left: self.shape.clone(),
                right: other.shape.clone(),
            });
        }
        Ok(dot(&self.data, &other.data))
    }

    /// Hilbert–Schmidt norm, the square root of the sum of squared entries.
    pub fn hs_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    /// Mode-m flattening: an `I_m × ∏_{i≠m} I_i` matrix whose column index is
    /// the lexicographic rank of the remaining multi-index (remaining modes
    /// in increasing order, last index fastest).
    pub fn flatten(&self, mode: usize) -> Result<Matrix> {
        check_mode(mode, self.order())?;
        let (outer, dim, inner) = split_at_mode(&self.shape, mode);
        let cols = outer * inner;
        let mut data = vec![0.0; dim * cols];
        for o in 0..outer {
            for i in 0..dim {
                let src = &self.data[(o * dim + i) * inner..][..inner];
                data[i * cols + o * inner..][..inner].copy_from_slice(src);
            }
        }
        Ok(Matrix {
            rows: dim,
            cols,
            data,
        })
    }

    /// Shape with `mode` removed, i.e. the shape of a mode-m fiber's
    /// complement.
    pub fn remaining_shape(&self, mode: usize) -> Result<Vec<usize>> {
        check_mode(mode, self.order())?;
        Ok(self
            .shape
            .iter()
            .enumerate()
            .filter(|&(k, _)| k + 1 != mode)
            .map(|(_, &d)| d)
            .collect())
    }

    /// Reorders the modes: axis `k` of the result is axis `perm[k]` of
    /// `self` (zero-based, like `ndarray::permuted_axes`).
    pub fn permute_modes(&self, perm: &[usize]) -> Result<Self> {
        let n = self.order();
        let mut seen = vec![false; n];
        if perm.len() != n
            || perm
                .iter()
                .any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidArgument(format!(
                "{perm:?} is not a permutation of 0..{n}"
            )));
        }
        let shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let strides = strides(&self.shape);
        let mut index = vec![0usize; n];
        let mut data = Vec::with_capacity(self.data.len());
        for _ in 0..self.data.len() {
            let offset: usize = index.iter().zip(perm).map(|(&i, &p)| i * strides[p]).sum();
            data.push(self.data[offset]);
            increment(&mut index, &shape);
        }
        Ok(Self { shape, data })
    }
}

impl fmt::Display for DenseTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims: Vec<String> = self.shape.iter().map(|d| d.to_string()).collect();
        write!(f, "DenseTensor({})", dims.join("×"))
    }
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidShape(vec![rows, cols]));
        }
        if data.len() != rows * cols {
            return Err(Error::ShapeDataMismatch {
                shape: vec![rows, cols],
                expected: rows * cols,
                found: data.len(),
            });
        }
        check_finite(&data)?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        let data = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        Self::new(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let n = values.len();
        let mut data = vec![0.0; n * n];
        for (i, &v) in values.iter().enumerate() {
            data[i * n + i] = v;
        }
        Self::new(n, n, data)
    }

    /// `u vᵀ`.
    pub fn outer(u: &[f64], v: &[f64]) -> Result<Self> {
        let data = u
            .iter()
            .flat_map(|&a| v.iter().map(move |&b| a * b))
            .collect();
        Self::new(u.len(), v.len(), data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..][..self.cols]
    }

    pub fn frobenius(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn inner(&self, other: &Matrix) -> Result<f64> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::ShapeMismatch {
                left: vec![self.rows, self.cols],
                right: vec![other.rows, other.cols],
            });
        }
        Ok(dot(&self.data, &other.data))
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            data.extend((0..self.rows).map(|r| self.get(r, c)));
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// `xᵀ M y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.rows).map(|r| x[r] * dot(self.row(r), y)).sum()
    }
}

/// Splits a shape around `mode` into (product before, dimension, product after).
fn split_at_mode(shape: &[usize], mode: usize) -> (usize, usize, usize) {
    let outer = shape[..mode - 1].iter().product();
    let inner = shape[mode..].iter().product();
    (outer, shape[mode - 1], inner)
}

pub(crate) fn strides(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * shape[k + 1];
    }
    strides
}

/// Advances a lexicographic multi-index (last index fastest), wrapping to
/// all zeros after the final index.
pub(crate) fn increment(index: &mut [usize], shape: &[usize]) {
    for k in (0..index.len()).rev() {
        index[k] += 1;
        if index[k] < shape[k] {
            return;
        }
        index[k] = 0;
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
