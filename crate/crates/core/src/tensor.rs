//! Dense row-major tensors with axis permutation and pairwise contraction.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} needs {len} entries, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> C64) -> Self {
        let len: usize = shape.iter().product();
        let mut idx = vec![0; shape.len()];
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(f(&idx));
            for ax in (0..shape.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < shape[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        Self { shape, data }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        let st = strides(&self.shape);
        self.data[idx.iter().zip(&st).map(|(i, s)| i * s).sum::<usize>()]
    }

    pub fn reshape(self, shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, self.data)
    }

    /// Reorders axes: axis `i` of the result is axis `perm[i]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let r = self.rank();
        let mut seen = vec![false; r];
        if perm.len() != r
            || perm
                .iter()
                .any(|&p| p >= r || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::Shape(format!(
                "{perm:?} is not a permutation of {r} axes"
            )));
        }
        let old = strides(&self.shape);
        let shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let moved: Vec<usize> = perm.iter().map(|&p| old[p]).collect();
        let len = self.data.len();
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0; r];
        let mut offset = 0usize;
        for _ in 0..len {
            data.push(self.data[offset]);
            for ax in (0..r).rev() {
                idx[ax] += 1;
                offset += moved[ax];
                if idx[ax] < shape[ax] {
                    break;
                }
                offset -= moved[ax] * shape[ax];
                idx[ax] = 0;
            }
        }
        Ok(Self { shape, data })
    }

    /// Contracts `pairs` of (axis of `self`, axis of `other`). The result carries
    /// the free axes of `self` in order, followed by the free axes of `other`.
    pub fn contract(&self, other: &Tensor, pairs: &[(usize, usize)]) -> Result<Tensor> {
        for &(a, b) in pairs {
            if a >= self.rank() || b >= other.rank() {
                return Err(Error::Shape(format!(
                    "contraction axis ({a},{b}) out of range"
                )));
            }
            if self.shape[a] != other.shape[b] {
                return Err(Error::Shape(format!(
                    "contracted legs differ: {} vs {}",
                    self.shape[a], other.shape[b]
                )));
            }
        }
        let free_a: Vec<usize> = (0..self.rank())
            .filter(|i| !pairs.iter().any(|p| p.0 == *i))
            .collect();
        let free_b: Vec<usize> = (0..other.rank())
            .filter(|i| !pairs.iter().any(|p| p.1 == *i))
            .collect();
        let perm_a: Vec<usize> = free_a
            .iter()
            .copied()
            .chain(pairs.iter().map(|p| p.0))
            .collect();
        let perm_b: Vec<usize> = pairs
            .iter()
            .map(|p| p.1)
            .chain(free_b.iter().copied())
            .collect();
        let a = self.permute(&perm_a)?;
        let b = other.permute(&perm_b)?;
        let rows: usize = free_a.iter().map(|&i| self.shape[i]).product();
        let inner: usize = pairs.iter().map(|p| self.shape[p.0]).product();
        let cols: usize = free_b.iter().map(|&i| other.shape[i]).product();
        let ma = ComplexMatrix::new(rows, inner, a.data)?;
        let mb = ComplexMatrix::new(inner, cols, b.data)?;
        let prod = ma.matmul(&mb)?;
        let shape: Vec<usize> = free_a
            .iter()
            .map(|&i| self.shape[i])
            .chain(free_b.iter().map(|&i| other.shape[i]))
            .collect();
        Tensor::new(shape, prod.into_data())
    }

    /// Entrywise max difference; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        if self.shape != other.shape {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Self {
            shape,
            data: vec![ZERO; len],
        }
    }
}

impl From<ComplexMatrix> for Tensor {
    fn from(m: ComplexMatrix) -> Self {
        let shape = vec![m.rows(), m.cols()];
        Self {
            shape,
            data: m.into_data(),
        }
    }
}
