use serde::{Deserialize, Serialize};

use super::real::Real;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::constant(0.0); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn matmul(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// `self * other^T`.
    pub fn matmul_t(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, other.cols, "matmul_t shape mismatch");
        Matrix::from_fn(self.rows, other.rows, |i, j| {
            let mut acc = T::constant(0.0);
            for k in 0..self.cols {
                acc += self.get(i, k) * other.get(j, k);
            }
            acc
        })
    }

    pub fn add(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.shape(), other.shape(), "add shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    /// Add a `1 x cols` row vector to every row.
    pub fn add_row(&self, bias: &Matrix<T>) -> Matrix<T> {
        assert_eq!((1, self.cols), bias.shape(), "bias shape mismatch");
        Matrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c) + bias.get(0, c))
    }

    /// Row-wise softmax; entries where `mask(r, c)` is false get weight 0.
    pub fn softmax_rows(&self, mask: impl Fn(usize, usize) -> bool) -> Matrix<T> {
        let mut out = Matrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            let shift = (0..self.cols)
                .filter(|&c| mask(r, c))
                .map(|c| self.get(r, c).value())
                .fold(f64::NEG_INFINITY, f64::max);
            let mut total = T::constant(0.0);
            for c in (0..self.cols).filter(|&c| mask(r, c)) {
                let e = (self.get(r, c) - T::constant(shift)).exp();
                out.data[r * self.cols + c] = e;
                total += e;
            }
            for c in (0..self.cols).filter(|&c| mask(r, c)) {
                out.data[r * self.cols + c] = out.data[r * self.cols + c] / total;
            }
        }
        out
    }

    pub fn sum(&self) -> T {
        let mut acc = T::constant(0.0);
        for &x in &self.data {
            acc += x;
        }
        acc
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn values(&self) -> Matrix<f64> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.value()).collect(),
        }
    }
}

impl Matrix<f64> {
    pub fn lift<T: Real>(&self) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| T::constant(x)).collect(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols.max(1)).map(<[f64]>::to_vec).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_and_transpose_product() {
        let a = Matrix::from_fn(2, 3, |r, c| (r * 3 + c) as f64);
        let b = Matrix::from_fn(3, 2, |r, c| (r + c) as f64);
        let ab = a.matmul(&b);
        assert_eq!(ab.data, vec![5.0, 8.0, 14.0, 26.0]);
        let bt = Matrix::from_fn(2, 3, |r, c| b.get(c, r));
        assert_eq!(a.matmul_t(&bt), ab);
    }

    #[test]
    fn masked_softmax() {
        let m = Matrix::from_fn(2, 2, |_, c| c as f64);
        let s = m.softmax_rows(|r, c| c <= r);
        assert_eq!(s.data[0], 1.0);
        assert_eq!(s.data[1], 0.0);
        let e = 1f64.exp();
        assert!((s.data[3] - e / (1.0 + e)).abs() < 1e-15);
    }
}
