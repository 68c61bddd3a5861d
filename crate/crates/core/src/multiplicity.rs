//! Multiplicity of the common null space of `K` tall random matrices, and the cyclic
//! index groups used by generalized null-space alignment.
//!
//! For `K` generic `n×m` matrices (`n > m`), the left null spaces of any `γ` of them meet
//! in a subspace of dimension `μ = n − γm`, and any `γ+1` of them meet only in `{0}`, where
//! `γ = min(⌈(n−m)/m⌉, K)`. `γ` is the geometric and `μ` the algebraic multiplicity.

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::MAX_REGENERATIONS;
use crate::numerics::{intersect_null_spaces_traced, numerical_rank, CMatrix};

/// Most tuples checked per tuple size before switching to random sampling.
pub const TUPLE_CAP: usize = 50;

/// A rank decision with a singular value within this factor of the tolerance forces a
/// fresh draw of the matrices.
pub const BORDERLINE_MARGIN: f64 = 10.0;

/// Largest `‖A_i*·Γ‖_F` accepted for an intersection basis `Γ`.
pub const INTERSECTION_RESIDUAL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MultiplicityReport {
    /// Row dimension of every matrix.
    pub n: usize,
    /// Column dimension of every matrix.
    pub m: usize,
    /// Number of matrices.
    #[serde(rename = "K")]
    pub k: usize,
    /// Geometric multiplicity.
    pub gamma: usize,
    /// Algebraic multiplicity.
    pub mu: usize,
    pub verified_numerically: bool,
}

fn check_domain(n: usize, m: usize, k: usize) -> Result<()> {
    if m == 0 || k == 0 {
        return Err(Error::Domain(format!(
            "need m ≥ 1 and K ≥ 1, got m = {m}, K = {k}"
        )));
    }
    if n <= m {
        return Err(Error::Domain(format!(
            "multiplicity needs n > m, got n = {n}, m = {m}"
        )));
    }
    Ok(())
}

/// Closed-form `γ = min(⌈(n−m)/m⌉, K)` and `μ = n − γm`.
///
/// When `γ` is capped at `K`, `μ` can exceed `m`.
pub fn multiplicity_formula(n: usize, m: usize, k: usize) -> Result<MultiplicityReport> {
    check_domain(n, m, k)?;
    let gamma = (n - m).div_ceil(m).min(k);
    Ok(MultiplicityReport {
        n,
        m,
        k,
        gamma,
        mu: n - gamma * m,
        verified_numerically: false,
    })
}

/// Every `size`-subset of `0..k` when there are at most [`TUPLE_CAP`] of them, otherwise
/// `TUPLE_CAP` distinct random subsets.
fn tuples(k: usize, size: usize, rng: &mut ChaCha20Rng) -> Vec<Vec<usize>> {
    let all = (0..k).combinations(size);
    if binomial_at_most(k, size, TUPLE_CAP) {
        return all.collect();
    }
    let mut picked = BTreeSet::new();
    while picked.len() < TUPLE_CAP {
        let mut t = sample(rng, k, size).into_vec();
        t.sort_unstable();
        picked.insert(t);
    }
    picked.into_iter().collect()
}

/// `C(k, size) ≤ cap`, without overflow.
fn binomial_at_most(k: usize, size: usize, cap: usize) -> bool {
    let size = size.min(k - size);
    let mut c: u128 = 1;
    for i in 0..size {
        c = c * (k - i) as u128 / (i + 1) as u128;
        if c > cap as u128 {
            return false;
        }
    }
    true
}

enum TupleOutcome {
    Ok,
    Borderline,
    Mismatch { tuple: Vec<usize>, found: usize },
}

fn check_tuple(mats: &[CMatrix], tuple: &[usize], expected: usize) -> Result<TupleOutcome> {
    let picked: Vec<&CMatrix> = tuple.iter().map(|&i| &mats[i]).collect();
    let (gamma, decisions) = intersect_null_spaces_traced(&picked)?;
    if decisions.iter().any(|d| d.is_borderline(BORDERLINE_MARGIN)) {
        return Ok(TupleOutcome::Borderline);
    }
    if gamma.cols() != expected {
        return Ok(TupleOutcome::Mismatch {
            tuple: tuple.iter().map(|i| i + 1).collect(),
            found: gamma.cols(),
        });
    }
    let worst = picked
        .iter()
        .map(|a| (&a.adjoint() * &gamma).frobenius_norm())
        .fold(0.0, f64::max);
    if worst > INTERSECTION_RESIDUAL {
        return Err(Error::Numerics(format!(
            "intersection basis for tuple {tuple:?} leaves residual {worst:e}"
        )));
    }
    Ok(TupleOutcome::Ok)
}

/// Draws `K` random `n×m` Gaussian matrices and checks the closed form on them: every
/// checked `γ`-tuple must intersect in exactly `μ` dimensions and, when `γ < K`, every
/// checked `(γ+1)`-tuple in none.
///
/// Draws whose rank decisions are borderline are discarded and redrawn, at most
/// [`MAX_REGENERATIONS`] times. Tuple indices in a verification error are 1-based.
pub fn multiplicity_numeric(n: usize, m: usize, k: usize, seed: u64) -> Result<MultiplicityReport> {
    let mut report = multiplicity_formula(n, m, k)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut checks: Vec<(Vec<usize>, usize)> = tuples(k, report.gamma, &mut rng)
        .into_iter()
        .map(|t| (t, report.mu))
        .collect();
    if report.gamma < k {
        checks.extend(
            tuples(k, report.gamma + 1, &mut rng)
                .into_iter()
                .map(|t| (t, 0)),
        );
    }

    for _ in 0..=MAX_REGENERATIONS {
        let mats: Vec<CMatrix> = (0..k)
            .map(|_| CMatrix::random_gaussian(n, m, &mut rng))
            .collect();
        let mut usable = true;
        for a in &mats {
            let d = numerical_rank(a)?;
            if d.rank < m || d.is_borderline(BORDERLINE_MARGIN) {
                usable = false;
            }
        }
        if !usable {
            continue;
        }
        let outcomes: Vec<(usize, TupleOutcome)> = checks
            .par_iter()
            .map(|(t, expected)| check_tuple(&mats, t, *expected).map(|o| (*expected, o)))
            .collect::<Result<_>>()?;
        if outcomes
            .iter()
            .any(|(_, o)| matches!(o, TupleOutcome::Borderline))
        {
            continue;
        }
        if let Some((expected, TupleOutcome::Mismatch { tuple, found })) = outcomes
            .into_iter()
            .find(|(_, o)| matches!(o, TupleOutcome::Mismatch { .. }))
        {
            return Err(Error::VerificationFailure {
                tuple,
                expected,
                found,
            });
        }
        report.verified_numerically = true;
        return Ok(report);
    }
    Err(Error::Numerics(format!(
        "every draw of {k} {n}x{m} matrices had a borderline rank decision"
    )))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndexGroups {
    #[serde(rename = "K")]
    pub k: usize,
    pub gamma: usize,
    /// `groups[k-1]` is `Π_k`, with 1-based user indices.
    pub groups: Vec<Vec<usize>>,
}

/// Cyclic groups `Π_k = {π_k, …, π_{γ+k−1}}` with `π_i = ((i−1) mod K) + 1`.
pub fn index_groups(k: usize, gamma: usize) -> Result<IndexGroups> {
    if gamma == 0 || gamma > k {
        return Err(Error::Domain(format!(
            "γ must lie in [1, K] = [1, {k}], got {gamma}"
        )));
    }
    let pi = |i: usize| (i - 1) % k + 1;
    let groups = (1..=k)
        .map(|start| (start..start + gamma).map(pi).collect())
        .collect();
    Ok(IndexGroups { k, gamma, groups })
}
