//! Complex dense linear algebra kernel.
//!
//! Everything here is a pure function of its inputs. Rank decisions use the
//! tolerance `max(rows, cols) · ε · σ_max` (or `ε` for an all-zero matrix), and every
//! subspace basis returned is orthonormal.

mod decomp;
mod matrix;

pub use decomp::{
    hermitian_eig, intersect_null_spaces, intersect_null_spaces_traced, inverse_sqrt_hpd,
    left_null_basis, log2_det_hpd, null_basis, numerical_rank, singular_values, solve_hpd, svd,
    trailing_right_singular_vectors, HermitianEig, RankDecision, Svd, HERMITIAN_TOLERANCE,
};
pub use matrix::{complex_gaussian, CMatrix, C64};
