use serde::{Deserialize, Serialize};

use super::NumericsError;

/// Dense row-major tensor of 64-bit floats.
///
/// Rank is arbitrary but almost everything in this crate is a vector
/// (`[n]`) or a matrix (`[rows, cols]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Tensor {
        let len = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; len],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Tensor, NumericsError> {
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(NumericsError::ShapeMismatch(format!(
                "shape {:?} needs {} values, got {}",
                shape,
                expected,
                data.len()
            )));
        }
        let t = Tensor {
            shape: shape.to_vec(),
            data,
        };
        t.validate_finite("from_vec")?;
        Ok(t)
    }

    pub fn vector(data: Vec<f64>) -> Result<Tensor, NumericsError> {
        let n = data.len();
        Tensor::from_vec(&[n], data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
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

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Rows of a rank-2 tensor.
    pub fn rows(&self) -> usize {
        debug_assert_eq!(self.shape.len(), 2);
        self.shape[0]
    }

    /// Columns of a rank-2 tensor.
    pub fn cols(&self) -> usize {
        debug_assert_eq!(self.shape.len(), 2);
        self.shape[1]
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols() + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        let cols = self.cols();
        self.data[r * cols + c] = v;
    }

    /// One row of a rank-2 tensor as a slice.
    pub fn row(&self, r: usize) -> &[f64] {
        let cols = self.cols();
        &self.data[r * cols..(r + 1) * cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        let cols = self.cols();
        &mut self.data[r * cols..(r + 1) * cols]
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn validate_finite(&self, context: &str) -> Result<(), NumericsError> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(NumericsError::NonFinite {
                context: context.to_string(),
            })
        }
    }

    /// Matrix product of two rank-2 tensors.
    pub fn matmul(&self, other: &Tensor) -> Result<Tensor, NumericsError> {
        if self.shape.len() != 2 || other.shape.len() != 2 {
            return Err(NumericsError::ShapeMismatch(format!(
                "matmul needs rank-2 operands, got {:?} and {:?}",
                self.shape, other.shape
            )));
        }
        if self.cols() != other.rows() {
            return Err(NumericsError::ShapeMismatch(format!(
                "matmul inner dimensions disagree: {:?} x {:?}",
                self.shape, other.shape
            )));
        }
        self.validate_finite("matmul lhs")?;
        other.validate_finite("matmul rhs")?;
        let (m, k, n) = (self.rows(), self.cols(), other.cols());
        let mut out = Tensor::zeros(&[m, n]);
        for i in 0..m {
            for p in 0..k {
                let a = self.data[i * k + p];
                if a == 0.0 {
                    continue;
                }
                let row = &other.data[p * n..(p + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for j in 0..n {
                    dst[j] += a * row[j];
                }
            }
        }
        Ok(out)
    }

    /// `self[rows x cols] * x[cols]`. Shapes are debug-asserted; this is the
    /// hot path inside the recurrent cells.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(self.shape.len(), 2);
        debug_assert_eq!(self.cols(), x.len());
        let (m, k) = (self.rows(), self.cols());
        let mut out = vec![0.0; m];
        for i in 0..m {
            let row = &self.data[i * k..(i + 1) * k];
            let mut acc = 0.0;
            for j in 0..k {
                acc += row[j] * x[j];
            }
            out[i] = acc;
        }
        out
    }

    /// `self^T * x`, i.e. out[j] = sum_i self[i][j] * x[i]. Used by the
    /// backward passes.
    pub fn matvec_transposed(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(self.shape.len(), 2);
        debug_assert_eq!(self.rows(), x.len());
        let (m, k) = (self.rows(), self.cols());
        let mut out = vec![0.0; k];
        for i in 0..m {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            let row = &self.data[i * k..(i + 1) * k];
            for j in 0..k {
                out[j] += xi * row[j];
            }
        }
        out
    }

    /// Rank-1 update `self += a * b^T`, accumulating gradient outer products.
    pub fn add_outer(&mut self, a: &[f64], b: &[f64]) {
        debug_assert_eq!(self.shape.len(), 2);
        debug_assert_eq!(self.rows(), a.len());
        debug_assert_eq!(self.cols(), b.len());
        let k = self.cols();
        for i in 0..a.len() {
            let ai = a[i];
            if ai == 0.0 {
                continue;
            }
            let row = &mut self.data[i * k..(i + 1) * k];
            for j in 0..k {
                row[j] += ai * b[j];
            }
        }
    }

    /// `self += scale * other`, elementwise.
    pub fn add_scaled(&mut self, other: &Tensor, scale: f64) {
        debug_assert_eq!(self.shape, other.shape);
        for (d, o) in self.data.iter_mut().zip(&other.data) {
            *d += scale * o;
        }
    }
}

/// Identity matrix of the given size.
pub fn identity(n: usize) -> Tensor {
    let mut t = Tensor::zeros(&[n, n]);
    for i in 0..n {
        t.set(i, i, 1.0);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_identity() {
        let a = Tensor::from_vec(&[2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let out = identity(2).matmul(&a).unwrap();
        assert_eq!(out, a);
    }

    #[test]
    fn matmul_one_by_one() {
        let a = Tensor::from_vec(&[1, 2], vec![1.0, 2.0]).unwrap();
        let b = Tensor::from_vec(&[2, 1], vec![3.0, 4.0]).unwrap();
        let out = a.matmul(&b).unwrap();
        assert_eq!(out.shape(), &[1, 1]);
        assert_eq!(out.data()[0], 11.0);
    }

    #[test]
    fn matmul_shape_mismatch() {
        let a = Tensor::zeros(&[2, 3]);
        let b = Tensor::zeros(&[2, 3]);
        assert!(matches!(
            a.matmul(&b),
            Err(NumericsError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn from_vec_rejects_nan() {
        let r = Tensor::from_vec(&[2], vec![1.0, f64::NAN]);
        assert!(matches!(r, Err(NumericsError::NonFinite { .. })));
    }

    #[test]
    fn from_vec_rejects_bad_length() {
        assert!(Tensor::from_vec(&[3], vec![1.0]).is_err());
    }

    #[test]
    fn matvec_and_transpose_agree_with_matmul() {
        let a = Tensor::from_vec(&[2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let x = vec![1.0, -1.0, 2.0];
        assert_eq!(a.matvec(&x), vec![5.0, 11.0]);
        let y = vec![1.0, 2.0];
        assert_eq!(a.matvec_transposed(&y), vec![9.0, 12.0, 15.0]);
    }

    #[test]
    fn add_outer_accumulates() {
        let mut g = Tensor::zeros(&[2, 2]);
        g.add_outer(&[1.0, 2.0], &[3.0, 4.0]);
        g.add_outer(&[1.0, 0.0], &[1.0, 1.0]);
        assert_eq!(g.data(), &[4.0, 5.0, 6.0, 8.0]);
    }
}
