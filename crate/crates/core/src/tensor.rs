//! Dense real tensors.
//!
//! A [`Tensor`] is a shape plus a row-major `Vec<f64>`. Every public operation
//! allocates a fresh result and refuses to return non-finite entries.
//! Contractions sum in ascending index order so results are reproducible
//! bit for bit.
//!
//! The Frobenius maps on a space with a fixed basis live here too:
//! copy ([`frobenius_delta`]), merge ([`frobenius_mu`]), delete
//! ([`frobenius_iota`]) and unit ([`frobenius_zeta`]).

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default upper bound on the number of entries a tensor product may create.
pub const DEFAULT_MAX_ENTRIES: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("data length {actual} does not match shape {shape:?} (expected {expected})")]
    DataLength {
        shape: Vec<usize>,
        expected: usize,
        actual: usize,
    },
    #[error("shape {0:?} has a zero-sized dimension")]
    ZeroDim(Vec<usize>),
    #[error("{op}: expected shape {expected:?}, got {actual:?}")]
    ShapeMismatch {
        op: &'static str,
        expected: Vec<usize>,
        actual: Vec<usize>,
    },
    #[error("{op}: expected an order-{expected} tensor, got order {actual}")]
    Order {
        op: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("axis {axis} out of range for a tensor of order {order}")]
    AxisOutOfRange { axis: usize, order: usize },
    #[error("cannot contract axis {axis_a} (dim {dim_a}) with axis {axis_b} (dim {dim_b})")]
    AxisMismatch {
        axis_a: usize,
        dim_a: usize,
        axis_b: usize,
        dim_b: usize,
    },
    #[error("self-contraction needs two distinct axes, got {0} twice")]
    SameAxis(usize),
    #[error("{0:?} is not a permutation of the tensor axes")]
    BadPermutation(Vec<usize>),
    #[error("tensor of {size} entries exceeds the cap of {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("{0} produced a non-finite value")]
    NonFinite(&'static str),
    #[error("cosine similarity is undefined for a zero vector")]
    ZeroNorm,
}

pub type Result<T> = std::result::Result<T, TensorError>;

/// Dense tensor of `f64` in row-major order. An empty shape is a scalar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor", into = "RawTensor")]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl TryFrom<RawTensor> for Tensor {
    type Error = TensorError;

    fn try_from(raw: RawTensor) -> Result<Self> {
        Tensor::new(raw.shape, raw.data)
    }
}

impl From<Tensor> for RawTensor {
    fn from(t: Tensor) -> Self {
        RawTensor {
            shape: t.shape,
            data: t.data,
        }
    }
}

fn element_count(shape: &[usize]) -> Option<usize> {
    shape.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d))
}

fn ensure_finite(data: &[f64], op: &'static str) -> Result<()> {
    if data.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(TensorError::NonFinite(op))
    }
}

fn row_major_strides(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * shape[i + 1];
    }
    strides
}

impl Tensor {
    /// Builds a tensor, checking the data length, that every dimension is
    /// positive and that every entry is finite.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(TensorError::ZeroDim(shape));
        }
        let expected = element_count(&shape).ok_or(TensorError::TooLarge {
            size: usize::MAX,
            cap: DEFAULT_MAX_ENTRIES,
        })?;
        if data.len() != expected {
            return Err(TensorError::DataLength {
                shape,
                expected,
                actual: data.len(),
            });
        }
        ensure_finite(&data, "construction")?;
        Ok(Tensor { shape, data })
    }

    pub fn scalar(value: f64) -> Result<Self> {
        Tensor::new(Vec::new(), vec![value])
    }

    pub fn vector(data: Vec<f64>) -> Result<Self> {
        Tensor::new(vec![data.len()], data)
    }

    /// Row-major matrix from a list of equally long rows.
    pub fn matrix(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(TensorError::ShapeMismatch {
                    op: "matrix",
                    expected: vec![cols],
                    actual: vec![row.len()],
                });
            }
            data.extend_from_slice(row);
        }
        Tensor::new(vec![rows.len(), cols], data)
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        Tensor::filled(shape, 0.0)
    }

    pub fn ones(shape: &[usize]) -> Result<Self> {
        Tensor::filled(shape, 1.0)
    }

    fn filled(shape: &[usize], value: f64) -> Result<Self> {
        let n = element_count(shape).ok_or(TensorError::TooLarge {
            size: usize::MAX,
            cap: DEFAULT_MAX_ENTRIES,
        })?;
        Tensor::new(shape.to_vec(), vec![value; n])
    }

    /// Builds a tensor by evaluating `f` at every multi-index in row-major order.
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let n = element_count(shape).ok_or(TensorError::TooLarge {
            size: usize::MAX,
            cap: DEFAULT_MAX_ENTRIES,
        })?;
        let mut data = Vec::with_capacity(n);
        let mut index = vec![0usize; shape.len()];
        for _ in 0..n {
            data.push(f(&index));
            increment(&mut index, shape);
        }
        Tensor::new(shape.to_vec(), data)
    }

    /// `delta(shape)[i, j, ...] = 1` when all indices agree, else 0.
    pub fn diagonal(shape: &[usize]) -> Result<Self> {
        Tensor::from_fn(shape, |idx| {
            if idx.windows(2).all(|w| w[0] == w[1]) {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Tensor::diagonal(&[dim, dim])
    }

    /// Unit vector `e_k` of length `dim`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(TensorError::AxisOutOfRange { axis: k, order: dim });
        }
        Tensor::from_fn(&[dim], |idx| if idx[0] == k { 1.0 } else { 0.0 })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
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

    pub fn as_scalar(&self) -> Option<f64> {
        self.shape.is_empty().then(|| self.data[0])
    }

    pub fn strides(&self) -> Vec<usize> {
        row_major_strides(&self.shape)
    }

    /// Entry at a full multi-index. Panics on an out-of-range index.
    pub fn get(&self, index: &[usize]) -> f64 {
        assert_eq!(index.len(), self.order(), "index order mismatch");
        let offset = index
            .iter()
            .zip(self.strides())
            .zip(&self.shape)
            .map(|((&i, s), &d)| {
                assert!(i < d, "index {i} out of range for dim {d}");
                i * s
            })
            .sum::<usize>();
        self.data[offset]
    }

    pub(crate) fn expect_order(&self, op: &'static str, order: usize) -> Result<()> {
        if self.order() == order {
            Ok(())
        } else {
            Err(TensorError::Order {
                op,
                expected: order,
                actual: self.order(),
            })
        }
    }

    pub(crate) fn expect_shape(&self, op: &'static str, shape: &[usize]) -> Result<()> {
        if self.shape == shape {
            Ok(())
        } else {
            Err(TensorError::ShapeMismatch {
                op,
                expected: shape.to_vec(),
                actual: self.shape.clone(),
            })
        }
    }

    /// `self += alpha * x`. On error `self` is left unchanged.
    pub fn axpy(&mut self, alpha: f64, x: &Tensor) -> Result<()> {
        x.expect_shape("axpy", &self.shape)?;
        let updated: Vec<f64> = self.data.iter().zip(&x.data).map(|(a, b)| a + alpha * b).collect();
        ensure_finite(&updated, "axpy")?;
        self.data = updated;
        Ok(())
    }

    /// Euclidean norm of the flattened data.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest absolute entry-wise difference; `None` when shapes differ.
    pub fn max_abs_diff(&self, other: &Tensor) -> Option<f64> {
        (self.shape == other.shape).then(|| {
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
    }
}

/// Advances a row-major multi-index. Wraps to all zeros after the last index.
pub(crate) fn increment(index: &mut [usize], shape: &[usize]) {
    for axis in (0..shape.len()).rev() {
        index[axis] += 1;
        if index[axis] < shape[axis] {
            return;
        }
        index[axis] = 0;
    }
}

/// Tensor product with the default size cap.
pub fn tensor_product(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    tensor_product_capped(a, b, DEFAULT_MAX_ENTRIES)
}

/// `(a ⊗ b)[I, J] = a[I] * b[J]`; the result shape is `a.shape ++ b.shape`.
pub fn tensor_product_capped(a: &Tensor, b: &Tensor, max_entries: usize) -> Result<Tensor> {
    let size = a.len().checked_mul(b.len()).unwrap_or(usize::MAX);
    if size > max_entries {
        return Err(TensorError::TooLarge {
            size,
            cap: max_entries,
        });
    }
    let mut data = Vec::with_capacity(size);
    for &x in &a.data {
        data.extend(b.data.iter().map(|&y| x * y));
    }
    ensure_finite(&data, "tensor_product")?;
    let shape = a.shape.iter().chain(&b.shape).copied().collect();
    Ok(Tensor { shape, data })
}

fn check_axis(t: &Tensor, axis: usize) -> Result<()> {
    if axis < t.order() {
        Ok(())
    } else {
        Err(TensorError::AxisOutOfRange {
            axis,
            order: t.order(),
        })
    }
}

/// Sums `a` and `b` over one shared axis.
///
/// The result shape is `a.shape` without `axis_a` followed by `b.shape`
/// without `axis_b`. Each output entry accumulates from `0.0` in ascending
/// order of the summed index.
pub fn contract(a: &Tensor, axis_a: usize, b: &Tensor, axis_b: usize) -> Result<Tensor> {
    check_axis(a, axis_a)?;
    check_axis(b, axis_b)?;
    let k_dim = a.shape[axis_a];
    if k_dim != b.shape[axis_b] {
        return Err(TensorError::AxisMismatch {
            axis_a,
            dim_a: k_dim,
            axis_b,
            dim_b: b.shape[axis_b],
        });
    }

    let a_pre: usize = a.shape[..axis_a].iter().product();
    let a_post: usize = a.shape[axis_a + 1..].iter().product();
    let b_pre: usize = b.shape[..axis_b].iter().product();
    let b_post: usize = b.shape[axis_b + 1..].iter().product();

    let mut data = Vec::with_capacity(a_pre * a_post * b_pre * b_post);
    for p in 0..a_pre {
        for q in 0..a_post {
            let a_base = p * k_dim * a_post + q;
            for r in 0..b_pre {
                for s in 0..b_post {
                    let b_base = r * k_dim * b_post + s;
                    let mut acc = 0.0;
                    for k in 0..k_dim {
                        acc += a.data[a_base + k * a_post] * b.data[b_base + k * b_post];
                    }
                    data.push(acc);
                }
            }
        }
    }
    ensure_finite(&data, "contract")?;

    let shape = a
        .shape
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != axis_a)
        .map(|(_, &d)| d)
        .chain(
            b.shape
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != axis_b)
                .map(|(_, &d)| d),
        )
        .collect();
    Ok(Tensor { shape, data })
}

/// Trace of `a` over two of its own axes; both axes are removed.
pub fn self_contract(a: &Tensor, axis_1: usize, axis_2: usize) -> Result<Tensor> {
    check_axis(a, axis_1)?;
    check_axis(a, axis_2)?;
    if axis_1 == axis_2 {
        return Err(TensorError::SameAxis(axis_1));
    }
    let k_dim = a.shape[axis_1];
    if k_dim != a.shape[axis_2] {
        return Err(TensorError::AxisMismatch {
            axis_a: axis_1,
            dim_a: k_dim,
            axis_b: axis_2,
            dim_b: a.shape[axis_2],
        });
    }

    let strides = a.strides();
    let diag_stride = strides[axis_1] + strides[axis_2];
    let kept: Vec<usize> = (0..a.order())
        .filter(|&i| i != axis_1 && i != axis_2)
        .collect();
    let shape: Vec<usize> = kept.iter().map(|&i| a.shape[i]).collect();
    let kept_strides: Vec<usize> = kept.iter().map(|&i| strides[i]).collect();
    let n: usize = shape.iter().product();

    let mut data = Vec::with_capacity(n);
    let mut index = vec![0usize; shape.len()];
    for _ in 0..n {
        let base: usize = index.iter().zip(&kept_strides).map(|(i, s)| i * s).sum();
        let mut acc = 0.0;
        for k in 0..k_dim {
            acc += a.data[base + k * diag_stride];
        }
        data.push(acc);
        increment(&mut index, &shape);
    }
    ensure_finite(&data, "self_contract")?;
    Ok(Tensor { shape, data })
}

/// Reorders axes: axis `i` of the result is axis `perm[i]` of `a`.
pub fn permute(a: &Tensor, perm: &[usize]) -> Result<Tensor> {
    let mut seen = vec![false; a.order()];
    if perm.len() != a.order() {
        return Err(TensorError::BadPermutation(perm.to_vec()));
    }
    for &p in perm {
        if p >= a.order() || seen[p] {
            return Err(TensorError::BadPermutation(perm.to_vec()));
        }
        seen[p] = true;
    }
    let strides = a.strides();
    let shape: Vec<usize> = perm.iter().map(|&p| a.shape[p]).collect();
    let src_strides: Vec<usize> = perm.iter().map(|&p| strides[p]).collect();
    let mut data = Vec::with_capacity(a.len());
    let mut index = vec![0usize; shape.len()];
    for _ in 0..a.len() {
        let offset: usize = index.iter().zip(&src_strides).map(|(i, s)| i * s).sum();
        data.push(a.data[offset]);
        increment(&mut index, &shape);
    }
    Ok(Tensor { shape, data })
}

fn zip_with(a: &Tensor, b: &Tensor, op: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
    b.expect_shape(op, &a.shape)?;
    let data: Vec<f64> = a.data.iter().zip(&b.data).map(|(&x, &y)| f(x, y)).collect();
    ensure_finite(&data, op)?;
    Ok(Tensor {
        shape: a.shape.clone(),
        data,
    })
}

/// Elementwise product of two tensors of identical shape.
pub fn pointwise_mul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    zip_with(a, b, "pointwise_mul", |x, y| x * y)
}

pub fn add(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    zip_with(a, b, "add", |x, y| x + y)
}

pub fn sub(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    zip_with(a, b, "sub", |x, y| x - y)
}

pub fn scale(a: &Tensor, factor: f64) -> Result<Tensor> {
    let data: Vec<f64> = a.data.iter().map(|x| x * factor).collect();
    ensure_finite(&data, "scale")?;
    Ok(Tensor {
        shape: a.shape.clone(),
        data,
    })
}

/// Applies `f` to every entry.
pub fn map(a: &Tensor, f: impl Fn(f64) -> f64) -> Result<Tensor> {
    let data: Vec<f64> = a.data.iter().map(|&x| f(x)).collect();
    ensure_finite(&data, "map")?;
    Ok(Tensor {
        shape: a.shape.clone(),
        data,
    })
}

/// Cosine of the angle between two equally shaped tensors, clamped to [-1, 1].
pub fn cosine_similarity(a: &Tensor, b: &Tensor) -> Result<f64> {
    b.expect_shape("cosine_similarity", &a.shape)?;
    let dot: f64 = a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum();
    let denom = a.norm() * b.norm();
    if denom == 0.0 {
        return Err(TensorError::ZeroNorm);
    }
    Ok((dot / denom).clamp(-1.0, 1.0))
}

/// Δ: embeds a vector into the diagonal of a square matrix.
pub fn frobenius_delta(v: &Tensor) -> Result<Tensor> {
    v.expect_order("frobenius_delta", 1)?;
    let d = v.shape[0];
    Tensor::from_fn(&[d, d], |idx| if idx[0] == idx[1] { v.data[idx[0]] } else { 0.0 })
}

/// μ: the diagonal of a square matrix.
pub fn frobenius_mu(m: &Tensor) -> Result<Tensor> {
    m.expect_order("frobenius_mu", 2)?;
    let (rows, cols) = (m.shape[0], m.shape[1]);
    if rows != cols {
        return Err(TensorError::ShapeMismatch {
            op: "frobenius_mu",
            expected: vec![rows, rows],
            actual: m.shape.clone(),
        });
    }
    Tensor::vector((0..rows).map(|i| m.data[i * cols + i]).collect())
}

/// ι: sends every basis vector to 1, so a vector maps to the sum of its entries.
pub fn frobenius_iota(v: &Tensor) -> Result<f64> {
    v.expect_order("frobenius_iota", 1)?;
    let sum: f64 = v.data.iter().sum();
    if sum.is_finite() {
        Ok(sum)
    } else {
        Err(TensorError::NonFinite("frobenius_iota"))
    }
}

/// ζ: the unit of the Frobenius algebra, the sum of all basis vectors.
pub fn frobenius_zeta(dim: usize) -> Result<Tensor> {
    Tensor::ones(&[dim])
}
