//! Linear interference-nulling schemes for the uplink and their numerical certificates.
//!
//! Every scheme produces per-user precoders `T_{ℓk}` (`M×β`, unit-norm columns) and
//! per-cell combiners `P_m` (`Kβ×N`). A design is certified when every out-of-cell
//! interferer is projected to (numerically) zero and every cell can still separate its
//! own `Kβ` streams.
//!
//! Orientation: `H_{m,ℓk}` is the `N×M` channel from user `k` of cell `ℓ` to base
//! station `m`, as returned by [`ChannelSet::uplink`]. All indices are 0-based except
//! the cyclic index groups, which follow [`crate::multiplicity::index_groups`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bounds::phi;
use crate::error::{Error, Result};
use crate::multiplicity::index_groups;
use crate::network::{ChannelSet, Direction, NetworkConfig};
use crate::numerics::{
    intersect_null_spaces, numerical_rank, singular_values, trailing_right_singular_vectors,
    CMatrix,
};

/// Relative zero-interference threshold `‖P_m H_{m,ℓk} T_{ℓk}‖_F / ‖H_{m,ℓk}‖_F`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Upper end of the band `[RESIDUAL_TOLERANCE, BORDERLINE_RESIDUAL]` flagged as borderline.
pub const BORDERLINE_RESIDUAL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum SchemeId {
    /// Two cells, `M = Kβ+β`, `N = Kβ`: each user nulls its cross link.
    TxZf,
    /// Two cells, `M = Kβ`, `N = Kβ+β`: null-space interference alignment.
    NsiaTwoCell,
    /// Any `L ≥ 2` with antennas from [`dimension_rule`].
    NsiaGeneral { gamma: usize },
    /// `M = β`, `N = LKβ`: each base station nulls every out-of-cell user.
    RxZf,
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeId::TxZf => write!(f, "tx_zf"),
            SchemeId::NsiaTwoCell => write!(f, "nsia_two_cell"),
            SchemeId::NsiaGeneral { gamma } => write!(f, "nsia_general(γ={gamma})"),
            SchemeId::RxZf => write!(f, "rx_zf"),
        }
    }
}

/// Antennas required by generalized NSIA with multiplicity `γ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DimensionRule {
    pub gamma: usize,
    /// `M = (K−γ)β + β`.
    pub tx: usize,
    /// `N = (L−1)γM + β` for `γ < K`, `(L−1)γM + Kβ` for `γ = K`.
    pub rx: usize,
}

pub fn dimension_rule(
    cells: usize,
    users: usize,
    streams: usize,
    gamma: usize,
) -> Result<DimensionRule> {
    if gamma == 0 || gamma > users {
        return Err(Error::Domain(format!(
            "γ must lie in [1, K] = [1, {users}], got {gamma}"
        )));
    }
    if cells < 2 || streams == 0 {
        return Err(Error::Domain(format!(
            "need L ≥ 2 and β ≥ 1, got L = {cells}, β = {streams}"
        )));
    }
    let tx = (users - gamma) * streams + streams;
    let tail = if gamma < users {
        streams
    } else {
        users * streams
    };
    let rule = DimensionRule {
        gamma,
        tx,
        rx: (cells - 1) * gamma * tx + tail,
    };
    if streams == 1 {
        debug_assert_eq!(rule.tx + rule.rx, phi(gamma, cells, users)? + 1);
    }
    Ok(rule)
}

/// `(M, N)` a scheme is defined for.
pub fn scheme_dimensions(
    scheme: SchemeId,
    cells: usize,
    users: usize,
    streams: usize,
) -> Result<(usize, usize)> {
    let (k, b) = (users, streams);
    match scheme {
        SchemeId::TxZf | SchemeId::NsiaTwoCell if cells != 2 => Err(Error::Config(format!(
            "{scheme} is a two-cell scheme, got L = {cells}"
        ))),
        SchemeId::TxZf => Ok((k * b + b, k * b)),
        SchemeId::NsiaTwoCell => Ok((k * b, k * b + b)),
        SchemeId::NsiaGeneral { gamma } => {
            let r = dimension_rule(cells, users, streams, gamma)?;
            Ok((r.tx, r.rx))
        }
        SchemeId::RxZf => Ok((b, cells * k * b)),
    }
}

/// Precoders and combiners of one linear scheme on one channel realization.
#[derive(Clone, Debug)]
pub struct LinearDesign {
    pub scheme_id: SchemeId,
    pub cells: usize,
    pub users_per_cell: usize,
    pub streams_per_user: usize,
    /// `precoders[ℓ·K + k] = T_{ℓk}`.
    pub precoders: Vec<CMatrix>,
    /// `combiners[m] = P_m`.
    pub combiners: Vec<CMatrix>,
}

impl LinearDesign {
    pub fn precoder(&self, cell: usize, user: usize) -> &CMatrix {
        &self.precoders[cell * self.users_per_cell + user]
    }

    pub fn combiner(&self, cell: usize) -> &CMatrix {
        &self.combiners[cell]
    }

    /// `G_m = [H_{m,m1}T_{m1} … H_{m,mK}T_{mK}]`, the in-cell effective channel.
    pub fn in_cell_effective(&self, channels: &ChannelSet, m: usize) -> Result<CMatrix> {
        let blocks: Vec<CMatrix> = (0..self.users_per_cell)
            .map(|k| channels.uplink(m, m, k) * self.precoder(m, k))
            .collect();
        CMatrix::hstack(&blocks.iter().collect::<Vec<_>>())
    }
}

/// Checks geometry and antennas against the scheme and returns `(L, K, β)`.
fn check_setup(
    scheme: SchemeId,
    channels: &ChannelSet,
    cfg: &NetworkConfig,
) -> Result<(usize, usize, usize)> {
    cfg.validate()?;
    if channels.direction != Direction::Uplink {
        return Err(Error::Config("schemes operate on uplink channels".into()));
    }
    if channels.cells != cfg.cells || channels.users_per_cell != cfg.users_per_cell {
        return Err(Error::Config(format!(
            "channel set is {}x{} but the config is {}x{}",
            channels.cells, channels.users_per_cell, cfg.cells, cfg.users_per_cell
        )));
    }
    let (l, k, b) = (cfg.cells, cfg.users_per_cell, cfg.streams);
    let wanted = scheme_dimensions(scheme, l, k, b)?;
    match cfg.homogeneous_antennas() {
        Some(have) if have == wanted => Ok((l, k, b)),
        Some((m, n)) => Err(Error::Config(format!(
            "{scheme} with L={l}, K={k}, β={b} needs (M, N) = {wanted:?}, got ({m}, {n})"
        ))),
        None => Err(Error::Config(format!(
            "{scheme} needs homogeneous antennas"
        ))),
    }
}

/// `P` from conjugate-transposed basis blocks `[N₁ … N_K]*`.
fn stack_adjoints(bases: &[CMatrix]) -> Result<CMatrix> {
    let rows: Vec<CMatrix> = bases.iter().map(CMatrix::adjoint).collect();
    CMatrix::vstack(&rows.iter().collect::<Vec<_>>())
}

/// The `count` least-gain left directions of `a`, returned as rows (`count × a.rows`).
fn left_null_rows(a: &CMatrix, count: usize) -> Result<CMatrix> {
    Ok(trailing_right_singular_vectors(&a.adjoint(), count)?.adjoint())
}

fn other_cells(cells: usize, m: usize) -> impl Iterator<Item = usize> + Clone {
    (0..cells).filter(move |&l| l != m)
}

/// `H̃_{m,m̄k}`: cross channels from user `k` of every other cell, concatenated in cell order.
pub fn aggregated_interference(channels: &ChannelSet, m: usize, k: usize) -> Result<CMatrix> {
    let blocks: Vec<&CMatrix> = other_cells(channels.cells, m)
        .map(|l| channels.uplink(m, l, k))
        .collect();
    CMatrix::hstack(&blocks)
}

/// Transmit zero forcing: `T_{ℓk}` spans `null(H_{m,ℓk})` for the other cell `m`, `P_m = I`.
pub fn tx_zero_forcing(channels: &ChannelSet, cfg: &NetworkConfig) -> Result<LinearDesign> {
    let (l, k, b) = check_setup(SchemeId::TxZf, channels, cfg)?;
    let mut precoders = Vec::with_capacity(l * k);
    for cell in 0..l {
        let other = 1 - cell;
        for user in 0..k {
            precoders.push(trailing_right_singular_vectors(
                channels.uplink(other, cell, user),
                b,
            )?);
        }
    }
    Ok(LinearDesign {
        scheme_id: SchemeId::TxZf,
        cells: l,
        users_per_cell: k,
        streams_per_user: b,
        precoders,
        combiners: vec![CMatrix::identity(k * b); l],
    })
}

/// Two-cell null-space alignment: `P_m = [N_{m,m̄1} … N_{m,m̄K}]*` from the left null
/// spaces of the cross channels, then `T_{m̄k}` spans `null(P_m H_{m,m̄k})`.
pub fn nsia_two_cell(channels: &ChannelSet, cfg: &NetworkConfig) -> Result<LinearDesign> {
    let (l, k, b) = check_setup(SchemeId::NsiaTwoCell, channels, cfg)?;
    let combiners = (0..l)
        .map(|m| {
            let rows: Vec<CMatrix> = (0..k)
                .map(|user| left_null_rows(channels.uplink(m, 1 - m, user), b))
                .collect::<Result<_>>()?;
            CMatrix::vstack(&rows.iter().collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut precoders = Vec::with_capacity(l * k);
    for cell in 0..l {
        let m = 1 - cell;
        for user in 0..k {
            let projected = &combiners[m] * channels.uplink(m, cell, user);
            precoders.push(trailing_right_singular_vectors(&projected, b)?);
        }
    }
    Ok(LinearDesign {
        scheme_id: SchemeId::NsiaTwoCell,
        cells: l,
        users_per_cell: k,
        streams_per_user: b,
        precoders,
        combiners,
    })
}

/// Generalized null-space alignment with multiplicity `γ`.
///
/// Per cell `m`, the left null spaces of the aggregated interferers `H̃_{m,m̄k}` are
/// intersected over each cyclic group `Π_j`; `β` columns of each intersection (or `Kβ`
/// columns of the single intersection when `γ = K`) form `P_m`. Each `T_{ℓk}` is then the
/// `β` least-gain right directions of `[P_m H_{m,ℓk}]` stacked over all `m ≠ ℓ`, so one
/// precoder serves every other cell at once. When that stack has no `β`-dimensional null
/// space the design is still returned and its certificate reports the residual.
pub fn nsia_general(
    channels: &ChannelSet,
    cfg: &NetworkConfig,
    gamma: usize,
) -> Result<LinearDesign> {
    let scheme = SchemeId::NsiaGeneral { gamma };
    let (l, k, b) = check_setup(scheme, channels, cfg)?;
    let (m_tx, n_rx) = cfg.homogeneous_antennas().expect("checked by check_setup");
    if n_rx <= (l - 1) * m_tx {
        return Err(Error::Config(format!(
            "aggregation needs N > (L−1)M, got N = {n_rx}, (L−1)M = {}",
            (l - 1) * m_tx
        )));
    }
    let groups = index_groups(k, gamma)?;
    let mut combiners = Vec::with_capacity(l);
    for m in 0..l {
        let aggregated: Vec<CMatrix> = (0..k)
            .map(|user| aggregated_interference(channels, m, user))
            .collect::<Result<_>>()?;
        let (sets, take): (Vec<Vec<usize>>, usize) = if gamma < k {
            (groups.groups.clone(), b)
        } else {
            (vec![(1..=k).collect()], k * b)
        };
        let mut bases = Vec::with_capacity(sets.len());
        for group in sets {
            let members: Vec<&CMatrix> = group.iter().map(|&u| &aggregated[u - 1]).collect();
            let common = intersect_null_spaces(&members)?;
            if common.cols() < take {
                return Err(Error::VerificationFailure {
                    tuple: group,
                    expected: take,
                    found: common.cols(),
                });
            }
            bases.push(common.columns(0, take));
        }
        combiners.push(stack_adjoints(&bases)?);
    }
    let mut precoders = Vec::with_capacity(l * k);
    for cell in 0..l {
        for user in 0..k {
            let projected: Vec<CMatrix> = other_cells(l, cell)
                .map(|m| &combiners[m] * channels.uplink(m, cell, user))
                .collect();
            let stacked = CMatrix::vstack(&projected.iter().collect::<Vec<_>>())?;
            precoders.push(trailing_right_singular_vectors(&stacked, b)?);
        }
    }
    Ok(LinearDesign {
        scheme_id: scheme,
        cells: l,
        users_per_cell: k,
        streams_per_user: b,
        precoders,
        combiners,
    })
}

/// Receive zero forcing: `P_m` spans the left null space of every out-of-cell channel,
/// `T_{ℓk} = I_β`.
pub fn rx_zero_forcing(channels: &ChannelSet, cfg: &NetworkConfig) -> Result<LinearDesign> {
    let (l, k, b) = check_setup(SchemeId::RxZf, channels, cfg)?;
    let combiners = (0..l)
        .map(|m| {
            let blocks: Vec<&CMatrix> = other_cells(l, m)
                .flat_map(|cell| (0..k).map(move |user| (cell, user)))
                .map(|(cell, user)| channels.uplink(m, cell, user))
                .collect();
            left_null_rows(&CMatrix::hstack(&blocks)?, k * b)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LinearDesign {
        scheme_id: SchemeId::RxZf,
        cells: l,
        users_per_cell: k,
        streams_per_user: b,
        precoders: vec![CMatrix::identity(b); l * k],
        combiners,
    })
}

/// Builds `scheme` on one channel realization.
pub fn construct(
    scheme: SchemeId,
    channels: &ChannelSet,
    cfg: &NetworkConfig,
) -> Result<LinearDesign> {
    match scheme {
        SchemeId::TxZf => tx_zero_forcing(channels, cfg),
        SchemeId::NsiaTwoCell => nsia_two_cell(channels, cfg),
        SchemeId::NsiaGeneral { gamma } => nsia_general(channels, cfg, gamma),
        SchemeId::RxZf => rx_zero_forcing(channels, cfg),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellDiagnostics {
    pub cell: usize,
    /// Worst relative out-of-cell residual into this cell.
    pub residual: f64,
    /// Every in-cell `T_{mk}` has rank `β`.
    pub precoder_ranks_ok: bool,
    pub combiner_rank: usize,
    /// `rank(P_m G_m)`.
    pub effective_rank: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchemeCertificate {
    pub scheme: SchemeId,
    pub residual_max: f64,
    pub ranks_ok: bool,
    /// `Kβ` for every cell that passes; `KLβ` exactly when the whole design passes.
    pub achieved_streams: usize,
    pub passed: bool,
    /// Some residual lies in `[RESIDUAL_TOLERANCE, BORDERLINE_RESIDUAL]`.
    pub borderline: bool,
    pub per_cell: Vec<CellDiagnostics>,
}

fn shapes_consistent(design: &LinearDesign, channels: &ChannelSet) -> bool {
    let (l, k, b) = (design.cells, design.users_per_cell, design.streams_per_user);
    if channels.direction != Direction::Uplink
        || channels.cells != l
        || channels.users_per_cell != k
        || design.precoders.len() != l * k
        || design.combiners.len() != l
    {
        return false;
    }
    let precoders_ok = (0..l).all(|cell| {
        (0..k).all(|user| {
            let t = design.precoder(cell, user);
            t.shape() == (channels.uplink(0, cell, user).cols(), b)
        })
    });
    let combiners_ok =
        (0..l).all(|m| design.combiner(m).shape() == (k * b, channels.uplink(m, 0, 0).rows()));
    precoders_ok && combiners_ok
}

fn certify_cell(design: &LinearDesign, channels: &ChannelSet, m: usize) -> Result<CellDiagnostics> {
    let (l, k, b) = (design.cells, design.users_per_cell, design.streams_per_user);
    let p = design.combiner(m);
    let mut residual: f64 = 0.0;
    for cell in other_cells(l, m) {
        for user in 0..k {
            let h = channels.uplink(m, cell, user);
            let leak = &(p * h) * design.precoder(cell, user);
            residual = residual.max(leak.frobenius_norm() / h.frobenius_norm());
        }
    }
    let mut precoder_ranks_ok = true;
    for user in 0..k {
        precoder_ranks_ok &= numerical_rank(design.precoder(m, user))?.rank == b;
    }
    let combiner_rank = numerical_rank(p)?.rank;
    let effective_rank = numerical_rank(&(p * &design.in_cell_effective(channels, m)?))?.rank;
    let passed = residual <= RESIDUAL_TOLERANCE
        && precoder_ranks_ok
        && combiner_rank == k * b
        && effective_rank == k * b;
    Ok(CellDiagnostics {
        cell: m,
        residual,
        precoder_ranks_ok,
        combiner_rank,
        effective_rank,
        passed,
    })
}

fn failed_cell(m: usize) -> CellDiagnostics {
    CellDiagnostics {
        cell: m,
        residual: f64::INFINITY,
        precoder_ranks_ok: false,
        combiner_rank: 0,
        effective_rank: 0,
        passed: false,
    }
}

/// Checks zero interference and decodability of `design` on `channels`.
///
/// Failures, including inconsistent shapes and factorization errors, are reported in the
/// certificate rather than returned as errors.
pub fn certify(design: &LinearDesign, channels: &ChannelSet) -> SchemeCertificate {
    let (l, k, b) = (design.cells, design.users_per_cell, design.streams_per_user);
    let per_cell: Vec<CellDiagnostics> = if shapes_consistent(design, channels) {
        (0..l)
            .map(|m| certify_cell(design, channels, m).unwrap_or_else(|_| failed_cell(m)))
            .collect()
    } else {
        (0..l).map(failed_cell).collect()
    };
    let residual_max = per_cell.iter().map(|c| c.residual).fold(0.0, f64::max);
    let ranks_ok = per_cell
        .iter()
        .all(|c| c.precoder_ranks_ok && c.combiner_rank == k * b && c.effective_rank == k * b);
    let achieved_streams = per_cell.iter().filter(|c| c.passed).count() * k * b;
    let borderline = per_cell
        .iter()
        .any(|c| (RESIDUAL_TOLERANCE..=BORDERLINE_RESIDUAL).contains(&c.residual));
    SchemeCertificate {
        scheme: design.scheme_id,
        residual_max,
        ranks_ok,
        achieved_streams,
        passed: per_cell.iter().all(|c| c.passed),
        borderline,
        per_cell,
    }
}

/// `ranks[m][k] = rank(P_m H̃_{m,m̄k})`: how many dimensions of the aggregated
/// interferer `k` survive the combiner of cell `m`.
///
/// Singular values count only above `RESIDUAL_TOLERANCE · ‖P_m‖_F · ‖H̃‖_F`; a plain
/// relative rank test would count the rounding noise left in a nulled product.
pub fn projected_interference_ranks(
    design: &LinearDesign,
    channels: &ChannelSet,
) -> Result<Vec<Vec<usize>>> {
    (0..design.cells)
        .map(|m| {
            (0..design.users_per_cell)
                .map(|k| {
                    let h = aggregated_interference(channels, m, k)?;
                    let p = design.combiner(m);
                    let floor = RESIDUAL_TOLERANCE * p.frobenius_norm() * h.frobenius_norm();
                    let s = singular_values(&(p * &h))?;
                    Ok(s.iter().filter(|&&x| x > floor).count())
                })
                .collect()
        })
        .collect()
}
