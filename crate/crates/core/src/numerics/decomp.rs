use nalgebra::linalg::{Cholesky, SymmetricEigen, SVD};
use nalgebra::DMatrix;
use serde::Serialize;

use super::matrix::{CMatrix, C64};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 10_000;

/// Relative Hermitian-symmetry tolerance accepted by [`hermitian_eig`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Economy singular value decomposition `a = U·diag(S)·V*`.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMatrix,
    /// Nonincreasing.
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> CMatrix {
        let s = CMatrix::from_diagonal(&self.singular_values);
        &(&self.u * &s) * &self.v.adjoint()
    }
}

/// Outcome of a numerical rank decision.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankDecision {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub tolerance: f64,
}

impl RankDecision {
    fn from_singular_values(rows: usize, cols: usize, singular_values: Vec<f64>) -> Self {
        let largest = singular_values.first().copied().unwrap_or(0.0);
        let tolerance = if largest == 0.0 {
            f64::EPSILON
        } else {
            rows.max(cols) as f64 * f64::EPSILON * largest
        };
        let rank = singular_values.iter().filter(|&&s| s > tolerance).count();
        RankDecision {
            rank,
            singular_values,
            tolerance,
        }
    }

    /// True when some singular value lies within a factor `margin` of the tolerance on
    /// either side, i.e. the rank decision is not clear-cut.
    pub fn is_borderline(&self, margin: f64) -> bool {
        let lo = self.tolerance / margin;
        let hi = self.tolerance * margin;
        self.singular_values.iter().any(|&s| s > lo && s < hi)
    }
}

/// Sorted SVD of `m` with the factor matrices reordered accordingly.
fn sorted_svd(m: DMatrix<C64>) -> Result<(DMatrix<C64>, Vec<f64>, DMatrix<C64>)> {
    let (rows, cols) = m.shape();
    let p = rows.min(cols);
    if p == 0 {
        return Ok((DMatrix::zeros(rows, 0), Vec::new(), DMatrix::zeros(cols, 0)));
    }
    let svd = SVD::try_new(m, true, true, f64::EPSILON, MAX_SWEEPS)
        .ok_or_else(|| Error::Factorization(format!("SVD of a {rows}x{cols} matrix")))?;
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V*");
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let s: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut u_sorted = DMatrix::zeros(rows, p);
    let mut v_sorted = DMatrix::zeros(cols, p);
    for (dst, &src) in order.iter().enumerate() {
        u_sorted.set_column(dst, &u.column(src));
        v_sorted.set_column(dst, &v_t.row(src).adjoint());
    }
    Ok((u_sorted, s, v_sorted))
}

pub fn svd(a: &CMatrix) -> Result<Svd> {
    let (u, s, v) = sorted_svd(a.inner().clone())?;
    Ok(Svd {
        u: CMatrix::from_inner(u),
        singular_values: s,
        v: CMatrix::from_inner(v),
    })
}

/// Singular values of `a` (length `min(rows, cols)`) and a full `cols × cols` unitary `V`
/// whose columns are ordered by nonincreasing singular value (zero-padded).
fn full_right_factor(a: &CMatrix) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    if rows >= cols {
        let (_, s, v) = sorted_svd(a.inner().clone())?;
        return Ok((s, v));
    }
    // Wide input: pad with zero rows so the economy factor is the full V.
    let mut padded = DMatrix::zeros(cols, cols);
    padded.rows_mut(0, rows).copy_from(a.inner());
    let (_, mut s, v) = sorted_svd(padded)?;
    s.truncate(rows);
    Ok((s, v))
}

pub fn numerical_rank(a: &CMatrix) -> Result<RankDecision> {
    let s = singular_values(a)?;
    Ok(RankDecision::from_singular_values(a.rows(), a.cols(), s))
}

pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    if a.rows().min(a.cols()) == 0 {
        return Ok(Vec::new());
    }
    let svd = SVD::try_new(a.inner().clone(), false, false, f64::EPSILON, MAX_SWEEPS)
        .ok_or_else(|| Error::Factorization(format!("SVD of a {:?} matrix", a.shape())))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

fn null_basis_traced(a: &CMatrix) -> Result<(CMatrix, RankDecision)> {
    let (s, v) = full_right_factor(a)?;
    let decision = RankDecision::from_singular_values(a.rows(), a.cols(), s);
    let cols = a.cols();
    let basis = CMatrix::from_inner(v.columns(decision.rank, cols - decision.rank).into_owned());
    Ok((basis, decision))
}

/// Orthonormal basis of `null(a) = {x : a x = 0}`, with `a.cols − rank(a)` columns.
pub fn null_basis(a: &CMatrix) -> Result<CMatrix> {
    Ok(null_basis_traced(a)?.0)
}

/// Orthonormal `N` with `N*·a = 0`, with `a.rows − rank(a)` columns.
pub fn left_null_basis(a: &CMatrix) -> Result<CMatrix> {
    null_basis(&a.adjoint())
}

/// The `count` right singular vectors of `a` with the smallest singular values
/// (counting the implicit zero singular values of a wide matrix).
///
/// When `dim null(a) ≥ count` the result lies in the null space; otherwise it spans the
/// least-gain directions of `a`.
pub fn trailing_right_singular_vectors(a: &CMatrix, count: usize) -> Result<CMatrix> {
    let cols = a.cols();
    if count > cols {
        return Err(Error::Config(format!(
            "requested {count} directions from a matrix with {cols} columns"
        )));
    }
    let (_, v) = full_right_factor(a)?;
    Ok(CMatrix::from_inner(
        v.columns(cols - count, count).into_owned(),
    ))
}

/// Intersection of the left null spaces of `mats`, via the recursion
/// `Γ₁ = leftnull(A₁)`, `Zᵢ = null(Aᵢ*·Γᵢ₋₁)`, `Γᵢ = Γᵢ₋₁·Zᵢ`.
///
/// Returns an orthonormal basis of `∩ᵢ null(Aᵢ*)`. An empty intermediate null space ends
/// the recursion with a 0-column matrix.
pub fn intersect_null_spaces(mats: &[&CMatrix]) -> Result<CMatrix> {
    Ok(intersect_null_spaces_traced(mats)?.0)
}

/// [`intersect_null_spaces`] plus the rank decision taken at every step.
pub fn intersect_null_spaces_traced(mats: &[&CMatrix]) -> Result<(CMatrix, Vec<RankDecision>)> {
    let first = mats
        .first()
        .ok_or_else(|| Error::Config("intersection of an empty list".into()))?;
    let n = first.rows();
    if let Some(bad) = mats.iter().find(|a| a.rows() != n) {
        return Err(Error::Config(format!(
            "null-space intersection needs a common row dimension: {} vs {}",
            n,
            bad.rows()
        )));
    }
    let mut decisions = Vec::with_capacity(mats.len());
    let (mut gamma, d) = null_basis_traced(&first.adjoint())?;
    decisions.push(d);
    for a in &mats[1..] {
        if gamma.cols() == 0 {
            break;
        }
        let (z, d) = null_basis_traced(&(&a.adjoint() * &gamma))?;
        decisions.push(d);
        gamma = &gamma * &z;
    }
    Ok((gamma, decisions))
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    /// Nondecreasing.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, column `i` pairs with `values[i]`.
    pub vectors: CMatrix,
}

pub fn hermitian_eig(a: &CMatrix) -> Result<HermitianEig> {
    if !a.is_square() {
        return Err(Error::ContractViolation(format!(
            "eigendecomposition of a non-square {:?} matrix",
            a.shape()
        )));
    }
    let asym = a.sub(&a.adjoint()).frobenius_norm();
    if asym > HERMITIAN_TOLERANCE * a.frobenius_norm().max(1.0) {
        return Err(Error::ContractViolation(format!(
            "matrix is not Hermitian (‖A − A*‖_F = {asym:e})"
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(HermitianEig {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::try_new(a.inner().clone(), f64::EPSILON, MAX_SWEEPS)
        .ok_or_else(|| Error::Factorization(format!("Hermitian eigensolver, n = {n}")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianEig {
        values,
        vectors: CMatrix::from_inner(vectors),
    })
}

/// `log₂ det(a)` for Hermitian positive definite `a`.
pub fn log2_det_hpd(a: &CMatrix) -> Result<f64> {
    let chol = Cholesky::new(a.inner().clone())
        .ok_or_else(|| Error::Numerics("matrix is not positive definite".into()))?;
    let l = chol.l_dirty();
    let ln_det: f64 = (0..a.rows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum();
    Ok(ln_det / std::f64::consts::LN_2)
}

/// `a^{-1/2}` for Hermitian positive definite `a`.
pub fn inverse_sqrt_hpd(a: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eig(a)?;
    if eig.values.iter().any(|&v| v <= 0.0) {
        return Err(Error::Numerics("matrix is not positive definite".into()));
    }
    let d: Vec<f64> = eig.values.iter().map(|v| v.sqrt().recip()).collect();
    Ok(&(&eig.vectors * &CMatrix::from_diagonal(&d)) * &eig.vectors.adjoint())
}

/// Solves `a x = b` for Hermitian positive definite `a`.
pub fn solve_hpd(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let chol = Cholesky::new(a.inner().clone())
        .ok_or_else(|| Error::Numerics("matrix is not positive definite".into()))?;
    Ok(CMatrix::from_inner(chol.solve(b.inner())))
}
