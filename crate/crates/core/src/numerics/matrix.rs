use std::fmt;
use std::ops::Mul;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense complex matrix with finite entries.
///
/// A thin newtype over `nalgebra::DMatrix<Complex64>`. Zero-column (or zero-row)
/// matrices are allowed: they are how empty subspaces are represented.
#[derive(Clone, PartialEq)]
pub struct CMatrix(DMatrix<C64>);

impl CMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Config(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Self::try_from(DMatrix::from_row_slice(rows, cols, entries))
    }

    /// Builds a real-valued matrix from row-major entries.
    pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        let c: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_row_slice(rows, cols, &c)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        CMatrix(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        let n = values.len();
        CMatrix(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// i.i.d. circularly-symmetric complex Gaussian entries with unit variance
    /// (real and imaginary parts each `N(0, 1/2)`).
    pub fn random_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        CMatrix(DMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng)))
    }

    pub(crate) fn from_inner(m: DMatrix<C64>) -> Self {
        debug_assert!(m.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        CMatrix(m)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for r in 0..self.rows() {
            for c in 0..self.cols() {
                out.push(self.0[(r, c)]);
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        CMatrix(self.0.adjoint())
    }

    pub fn scale(&self, factor: f64) -> Self {
        CMatrix(self.0.map(|z| z * factor))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Column block `[start, start + count)`.
    pub fn columns(&self, start: usize, count: usize) -> Self {
        CMatrix(self.0.columns(start, count).into_owned())
    }

    pub fn column(&self, index: usize) -> Vec<C64> {
        self.0.column(index).iter().copied().collect()
    }

    pub fn sub(&self, other: &CMatrix) -> Self {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in subtraction");
        CMatrix(&self.0 - &other.0)
    }

    pub fn add(&self, other: &CMatrix) -> Self {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in addition");
        CMatrix(&self.0 + &other.0)
    }

    /// Horizontal concatenation `[a₁ a₂ …]`; all blocks must share the row count.
    pub fn hstack(blocks: &[&CMatrix]) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::Config("hstack of an empty list".into()))?;
        let rows = first.rows();
        if let Some(b) = blocks.iter().find(|b| b.rows() != rows) {
            return Err(Error::Config(format!(
                "hstack row mismatch: {} vs {}",
                rows,
                b.rows()
            )));
        }
        let cols: usize = blocks.iter().map(|b| b.cols()).sum();
        let mut out = DMatrix::zeros(rows, cols);
        let mut at = 0;
        for b in blocks {
            out.columns_mut(at, b.cols()).copy_from(&b.0);
            at += b.cols();
        }
        Ok(CMatrix(out))
    }

    /// Vertical concatenation; all blocks must share the column count.
    pub fn vstack(blocks: &[&CMatrix]) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::Config("vstack of an empty list".into()))?;
        let cols = first.cols();
        if let Some(b) = blocks.iter().find(|b| b.cols() != cols) {
            return Err(Error::Config(format!(
                "vstack column mismatch: {} vs {}",
                cols,
                b.cols()
            )));
        }
        let rows: usize = blocks.iter().map(|b| b.rows()).sum();
        let mut out = DMatrix::zeros(rows, cols);
        let mut at = 0;
        for b in blocks {
            out.rows_mut(at, b.rows()).copy_from(&b.0);
            at += b.rows();
        }
        Ok(CMatrix(out))
    }

    /// `‖Q*Q − I‖_F`, the orthonormality defect of the columns.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.adjoint().mul(self);
        gram.sub(&CMatrix::identity(self.cols())).frobenius_norm()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }
}

impl TryFrom<DMatrix<C64>> for CMatrix {
    type Error = Error;

    fn try_from(m: DMatrix<C64>) -> Result<Self> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Config("matrix has non-finite entries".into()));
        }
        Ok(CMatrix(m))
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(
            self.cols(),
            rhs.rows(),
            "inner dimension mismatch: {:?} * {:?}",
            self.shape(),
            rhs.shape()
        );
        CMatrix(&self.0 * &rhs.0)
    }
}

impl Mul<&CMatrix> for CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        (&self).mul(rhs)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMatrix{:?}{}", self.shape(), self.0)
    }
}

/// One `CN(0, 1)` draw.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn rejects_non_finite_entries() {
        let bad = [C64::new(f64::NAN, 0.0)];
        assert!(CMatrix::from_row_slice(1, 1, &bad).is_err());
        let inf = [C64::new(0.0, f64::INFINITY)];
        assert!(CMatrix::from_row_slice(1, 1, &inf).is_err());
    }

    #[test]
    fn rejects_wrong_entry_count() {
        assert!(CMatrix::from_real_rows(2, 2, &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn row_major_round_trip() {
        let m = CMatrix::from_real_rows(2, 3, &[1., 2., 3., 4., 5., 6.]).unwrap();
        assert_eq!(m.get(0, 2), C64::new(3.0, 0.0));
        assert_eq!(m.get(1, 0), C64::new(4.0, 0.0));
        let back = CMatrix::from_row_slice(2, 3, &m.to_row_major()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn stacking_checks_shapes() {
        let a = CMatrix::zeros(2, 1);
        let b = CMatrix::zeros(3, 1);
        assert!(CMatrix::hstack(&[&a, &b]).is_err());
        let v = CMatrix::vstack(&[&a, &b]).unwrap();
        assert_eq!(v.shape(), (5, 1));
        let h = CMatrix::hstack(&[&a, &a, &a]).unwrap();
        assert_eq!(h.shape(), (2, 3));
    }

    #[test]
    fn gaussian_entries_have_unit_power() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let m = CMatrix::random_gaussian(200, 200, &mut rng);
        let mean_power = m.frobenius_norm().powi(2) / 40_000.0;
        assert!((mean_power - 1.0).abs() < 0.02, "{mean_power}");
    }
}
