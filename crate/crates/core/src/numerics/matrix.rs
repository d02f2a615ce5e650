use serde::{Deserialize, Serialize};

use super::{NumericsError, SeededRng};

/// Dense row-major matrix of `f64` values.
///
/// Problem sizes here stay small (at most a few hundred rows/columns), so a
/// flat `Vec` with plain loops is all the linear algebra the crate needs.
/// Public operations verify shapes and reject non-finite results instead of
/// letting NaN/Inf propagate silently.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from a flat row-major buffer. Panics if the length
    /// does not equal `rows * cols`; that is a programming error, not a
    /// recoverable condition.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(
            data.len(),
            rows * cols,
            "matrix buffer length {} does not match {}x{}",
            data.len(),
            rows,
            cols
        );
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows passed to Matrix::from_rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Glorot-uniform initialization: entries drawn uniformly from
    /// `[-sqrt(6/(rows+cols)), sqrt(6/(rows+cols)))`, deterministic for a
    /// given rng state.
    pub fn glorot(rows: usize, cols: usize, rng: &mut SeededRng) -> Result<Self, NumericsError> {
        if rows == 0 || cols == 0 {
            return Err(NumericsError::ZeroDimension { rows, cols });
        }
        let limit = (6.0 / (rows + cols) as f64).sqrt();
        let data = (0..rows * cols)
            .map(|_| rng.next_range(-limit, limit))
            .collect();
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn row_mut(&mut self, row: usize) -> &mut [f64] {
        &mut self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Standard matrix product.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix, NumericsError> {
        if self.cols != other.rows {
            return Err(self.shape_error("matmul", other));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let out_row = out.row_mut(i);
            for (k, &a_ik) in a_row.iter().enumerate() {
                let b_row = other.row(k);
                for (o, &b_kj) in out_row.iter_mut().zip(b_row) {
                    *o += a_ik * b_kj;
                }
            }
        }
        out.ensure_finite("matmul")?;
        Ok(out)
    }

    /// Entrywise sum.
    pub fn add(&self, other: &Matrix) -> Result<Matrix, NumericsError> {
        self.zip_with("add", other, |a, b| a + b)
    }

    /// Entrywise (Hadamard) product.
    pub fn hadamard(&self, other: &Matrix) -> Result<Matrix, NumericsError> {
        self.zip_with("hadamard", other, |a, b| a * b)
    }

    /// Entrywise logistic sigmoid. Output is always in `[0, 1]`.
    pub fn sigmoid(&self) -> Matrix {
        self.map(sigmoid_scalar)
    }

    /// Entrywise hyperbolic tangent.
    pub fn tanh(&self) -> Matrix {
        self.map(f64::tanh)
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Result<Matrix, NumericsError> {
        let out = self.map(|x| x * factor);
        out.ensure_finite("scale")?;
        Ok(out)
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    fn zip_with(
        &self,
        op: &'static str,
        other: &Matrix,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Matrix, NumericsError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(self.shape_error(op, other));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        let out = Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        };
        out.ensure_finite(op)?;
        Ok(out)
    }

    fn shape_error(&self, op: &'static str, other: &Matrix) -> NumericsError {
        NumericsError::ShapeMismatch {
            op,
            left_rows: self.rows,
            left_cols: self.cols,
            right_rows: other.rows,
            right_cols: other.cols,
        }
    }

    pub fn ensure_finite(&self, op: &'static str) -> Result<(), NumericsError> {
        for (idx, &x) in self.data.iter().enumerate() {
            if !x.is_finite() {
                return Err(NumericsError::NonFinite {
                    op,
                    row: idx / self.cols.max(1),
                    col: idx % self.cols.max(1),
                });
            }
        }
        Ok(())
    }
}

/// Numerically stable logistic sigmoid: branches on the sign of `z` so the
/// exponential never overflows, saturating cleanly to 0 and 1.
pub fn sigmoid_scalar(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_identity_is_noop() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let out = Matrix::identity(2).matmul(&a).unwrap();
        assert_eq!(out, a);
    }

    #[test]
    fn matmul_row_times_column() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0]]);
        let b = Matrix::from_rows(&[vec![3.0], vec![4.0]]);
        let out = a.matmul(&b).unwrap();
        assert_eq!((out.rows(), out.cols()), (1, 1));
        assert_eq!(out.get(0, 0), 11.0);
    }

    #[test]
    fn matmul_matches_triple_loop_oracle() {
        let mut rng = SeededRng::new(11);
        let a = Matrix::glorot(5, 4, &mut rng).unwrap();
        let b = Matrix::glorot(4, 3, &mut rng).unwrap();
        let out = a.matmul(&b).unwrap();
        for i in 0..5 {
            for j in 0..3 {
                let mut expect = 0.0;
                for k in 0..4 {
                    expect += a.get(i, k) * b.get(k, j);
                }
                assert!((out.get(i, j) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matmul_shape_mismatch_names_both_shapes() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(2, 3);
        let err = a.matmul(&b).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2x3"), "got: {msg}");
    }

    #[test]
    fn sigmoid_midpoint_and_saturation() {
        assert_eq!(sigmoid_scalar(0.0), 0.5);
        let hi = sigmoid_scalar(500.0);
        let lo = sigmoid_scalar(-500.0);
        assert!(hi.is_finite() && lo.is_finite());
        assert!((0.0..=1.0).contains(&hi) && (0.0..=1.0).contains(&lo));
        assert!(hi > 0.999_999);
        assert!(lo < 1e-6);
    }

    #[test]
    fn tanh_is_odd_at_zero() {
        let m = Matrix::zeros(1, 1);
        assert_eq!(m.tanh().get(0, 0), 0.0);
    }

    #[test]
    fn elementwise_shape_mismatch_is_an_error() {
        let a = Matrix::zeros(2, 2);
        let b = Matrix::zeros(2, 3);
        assert!(a.add(&b).is_err());
        assert!(a.hadamard(&b).is_err());
    }

    #[test]
    fn add_overflow_is_reported_not_silent() {
        let a = Matrix::from_vec(1, 1, vec![f64::MAX]);
        let err = a.add(&a).unwrap_err();
        assert!(matches!(err, NumericsError::NonFinite { op: "add", .. }));
    }

    #[test]
    fn glorot_single_entry_within_bound() {
        for seed in [0u64, 1, 99] {
            let mut rng = SeededRng::new(seed);
            let m = Matrix::glorot(1, 1, &mut rng).unwrap();
            let limit = 3.0_f64.sqrt();
            assert!(m.get(0, 0).abs() <= limit);
        }
    }

    #[test]
    fn glorot_is_deterministic_per_seed() {
        let a = Matrix::glorot(7, 5, &mut SeededRng::new(42)).unwrap();
        let b = Matrix::glorot(7, 5, &mut SeededRng::new(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn glorot_large_sample_mean_near_zero() {
        let m = Matrix::glorot(100, 100, &mut SeededRng::new(7)).unwrap();
        let mean = m.as_slice().iter().sum::<f64>() / 10_000.0;
        // Var of U(-a, a) is a^2/3 with a = sqrt(6/200).
        let std_err = ((6.0 / 200.0) / 3.0_f64).sqrt() / 100.0;
        assert!(mean.abs() < 3.0 * std_err, "mean {mean} vs 3se {}", 3.0 * std_err);
    }

    #[test]
    fn glorot_zero_dimension_rejected() {
        let err = Matrix::glorot(0, 4, &mut SeededRng::new(1)).unwrap_err();
        assert!(matches!(err, NumericsError::ZeroDimension { .. }));
    }
}
