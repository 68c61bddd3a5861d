//! Downlink opportunistic scheduling with local channel knowledge.
//!
//! Each base station has one antenna (`M = 1`) and each user `N = L−1`. User `k` of cell
//! `m` sees its serving channel `h = h_{km,m}` and out-of-cell covariance
//! `W_{km} = Σ_{ℓ≠m} h_{km,ℓ} h*_{km,ℓ}`. With transmit power `ρ` and unit noise:
//!
//! - max-SINR filter: SINR `λ_max = λ_max((I+ρW)⁻¹ ρ h h*) = ρ h*(I+ρW)⁻¹h`;
//! - min-interference filter: the eigenvector of `W` for `σ = λ_min(W)`, so the
//!   received interference power is `ρσ`.
//!
//! A max-SINR scheduler serves `argmax_k λ_max` per cell, a min-interference scheduler
//! `argmin_k σ`. Ties go to the lowest user index.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{db_to_linear, realize_downlink, ChannelSet, Direction, NetworkConfig};
use crate::numerics::{hermitian_eig, inverse_sqrt_hpd, solve_hpd, CMatrix, C64};

/// Relative agreement required between the eigen-solver `λ_max` and `ρ h*(I+ρW)⁻¹h`.
pub const LAMBDA_IDENTITY_TOLERANCE: f64 = 1e-8;

/// Default cap on users per cell in convergence sweeps.
pub const DEFAULT_USER_CAP: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UserStat {
    pub cell: usize,
    pub user: usize,
    /// SINR with the max-SINR filter.
    pub lambda_max: f64,
    /// `λ_min(W)`.
    pub sigma_min: f64,
    /// Unit-norm max-SINR filter, proportional to `(I+ρW)⁻¹h`.
    pub p_maxsinr: Vec<C64>,
    /// Unit-norm eigenvector of `W` for `σ`.
    pub p_mininterf: Vec<C64>,
    /// `log₂(1 + λ_max)`.
    pub rate_max_sinr: f64,
    /// `log₂(1 + ρ|p̃*h|² / (1 + ρσ))`.
    pub rate_min_interf: f64,
}

fn outer(v: &CMatrix) -> CMatrix {
    v * &v.adjoint()
}

fn unit(v: &CMatrix) -> Vec<C64> {
    let norm = v.frobenius_norm();
    v.column(0).into_iter().map(|z| z / norm).collect()
}

fn stat_for(channels: &ChannelSet, rho: f64, cell: usize, user: usize) -> Result<UserStat> {
    let l = channels.cells;
    let n = l - 1;
    let h = channels.downlink(cell, user, cell);
    let mut w = CMatrix::zeros(n, n);
    for tx in (0..l).filter(|&t| t != cell) {
        w = w.add(&outer(channels.downlink(cell, user, tx)));
    }
    let c = CMatrix::identity(n).add(&w.scale(rho));

    let whitened = &inverse_sqrt_hpd(&c)? * h;
    let lambda_max = hermitian_eig(&outer(&whitened).scale(rho))?
        .values
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0);
    let c_inv_h = solve_hpd(&c, h)?;
    let closed = rho * (&h.adjoint() * &c_inv_h).get(0, 0).re;
    if (lambda_max - closed).abs() > LAMBDA_IDENTITY_TOLERANCE * closed.abs().max(f64::MIN_POSITIVE)
    {
        return Err(Error::Numerics(format!(
            "λ_max = {lambda_max:e} disagrees with ρh*(I+ρW)⁻¹h = {closed:e} (cell {cell}, user {user})"
        )));
    }

    let w_eig = hermitian_eig(&w)?;
    let sigma_min = w_eig.values[0].max(0.0);
    let p_mininterf = w_eig.vectors.column(0);
    let gain: f64 = p_mininterf
        .iter()
        .zip(h.column(0))
        .map(|(p, x)| p.conj() * x)
        .sum::<C64>()
        .norm_sqr();
    Ok(UserStat {
        cell,
        user,
        lambda_max,
        sigma_min,
        p_maxsinr: unit(&c_inv_h),
        p_mininterf,
        rate_max_sinr: (1.0 + lambda_max).log2(),
        rate_min_interf: (1.0 + rho * gain / (1.0 + rho * sigma_min)).log2(),
    })
}

/// Per-user statistics for every user of a downlink realization, ordered by cell then user.
pub fn user_stats(channels: &ChannelSet, rho: f64) -> Result<Vec<UserStat>> {
    if channels.direction != Direction::Downlink {
        return Err(Error::Config("scheduling needs downlink channels".into()));
    }
    let l = channels.cells;
    if l < 2 {
        return Err(Error::Config(format!(
            "scheduling needs L ≥ 2 cells, got {l}"
        )));
    }
    if let Some((_, h)) = channels.iter().find(|(_, h)| h.shape() != (l - 1, 1)) {
        return Err(Error::Config(format!(
            "scheduling needs M = 1 and N = L−1 = {}, got a {:?} channel",
            l - 1,
            h.shape()
        )));
    }
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::Config(format!(
            "ρ must be positive and finite, got {rho}"
        )));
    }
    let k = channels.users_per_cell;
    (0..l * k)
        .into_par_iter()
        .map(|i| stat_for(channels, rho, i / k, i % k))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheduler {
    MaxSinr,
    MinInterf,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScheduleOutcome {
    pub scheduler: Scheduler,
    /// `selected[m]` is the user served in cell `m`.
    pub selected: Vec<usize>,
    /// Rate of each selected user with the scheduler's own filter, in bits.
    pub rates: Vec<f64>,
    pub sum_rate: f64,
    /// `ρσ` of each selected user.
    pub interference_power: Vec<f64>,
}

fn by_cell(stats: &[UserStat]) -> Result<Vec<Vec<&UserStat>>> {
    let cells = stats.iter().map(|s| s.cell + 1).max().unwrap_or(0);
    let mut grouped: Vec<Vec<&UserStat>> = vec![Vec::new(); cells];
    for s in stats {
        grouped[s.cell].push(s);
    }
    if cells == 0 {
        return Err(Error::Domain("no users to schedule".into()));
    }
    if let Some(m) = grouped.iter().position(|g| g.is_empty()) {
        return Err(Error::Domain(format!("cell {m} has no users")));
    }
    Ok(grouped)
}

fn schedule(stats: &[UserStat], rho: f64, scheduler: Scheduler) -> Result<ScheduleOutcome> {
    let mut selected = Vec::new();
    let mut rates = Vec::new();
    let mut interference_power = Vec::new();
    for users in by_cell(stats)? {
        let mut best = users[0];
        for &s in &users[1..] {
            let better = match scheduler {
                Scheduler::MaxSinr => s.lambda_max > best.lambda_max,
                Scheduler::MinInterf => s.sigma_min < best.sigma_min,
            };
            let tie = match scheduler {
                Scheduler::MaxSinr => s.lambda_max == best.lambda_max,
                Scheduler::MinInterf => s.sigma_min == best.sigma_min,
            };
            if better || (tie && s.user < best.user) {
                best = s;
            }
        }
        selected.push(best.user);
        rates.push(match scheduler {
            Scheduler::MaxSinr => best.rate_max_sinr,
            Scheduler::MinInterf => best.rate_min_interf,
        });
        interference_power.push(rho * best.sigma_min);
    }
    Ok(ScheduleOutcome {
        scheduler,
        selected,
        sum_rate: rates.iter().sum(),
        rates,
        interference_power,
    })
}

/// Serves `argmax_k λ_max` in each cell.
pub fn schedule_max_sinr(stats: &[UserStat], rho: f64) -> Result<ScheduleOutcome> {
    schedule(stats, rho, Scheduler::MaxSinr)
}

/// Serves `argmin_k σ` in each cell.
pub fn schedule_min_interf(stats: &[UserStat], rho: f64) -> Result<ScheduleOutcome> {
    schedule(stats, rho, Scheduler::MinInterf)
}

/// Downlink geometry used by every scheduling experiment: `M = 1`, `N = L−1`.
pub fn downlink_config(cells: usize, users: usize) -> NetworkConfig {
    NetworkConfig::homogeneous(cells, users, 1, cells.saturating_sub(1), 1)
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Kolmogorov–Smirnov distance between `samples` and the CDF `cdf`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CcdfPoint {
    pub x: f64,
    pub empirical: f64,
    pub theory: f64,
}

/// Empirical statistics of the interference power `ρσ_{k̂m}` under min-interference
/// scheduling, pooled over cells and trials, next to the exponential law with rate
/// `(L−1)K/ρ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterferenceStats {
    pub cells: usize,
    pub users_per_cell: usize,
    pub rho: f64,
    pub trials: u64,
    pub samples: usize,
    pub mean: f64,
    pub mean_theory: f64,
    pub second_moment: f64,
    pub second_moment_theory: f64,
    pub ks_distance: f64,
    pub ccdf: Vec<CcdfPoint>,
}

/// Multiples of the theoretical mean at which the CCDF is reported.
pub const CCDF_GRID: [f64; 7] = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0];

pub fn interference_stats_experiment(
    cells: usize,
    users: usize,
    rho: f64,
    trials: u64,
    seed: u64,
) -> Result<InterferenceStats> {
    if cells < 2 || users == 0 || trials == 0 {
        return Err(Error::Domain(format!(
            "need L ≥ 2, K ≥ 1 and at least one trial, got L = {cells}, K = {users}, trials = {trials}"
        )));
    }
    let cfg = downlink_config(cells, users);
    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let ch = realize_downlink(&cfg, seed, t)?;
            Ok(schedule_min_interf(&user_stats(&ch, rho)?, rho)?.interference_power)
        })
        .collect::<Result<_>>()?;
    let samples: Vec<f64> = per_trial.into_iter().flatten().collect();

    let rate = (cells - 1) as f64 * users as f64 / rho;
    let mean_theory = 1.0 / rate;
    let (mut first, mut second) = (CompensatedSum::default(), CompensatedSum::default());
    for &x in &samples {
        first.add(x);
        second.add(x * x);
    }
    let n = samples.len() as f64;
    let ccdf = CCDF_GRID
        .iter()
        .map(|&mult| {
            let x = mult * mean_theory;
            CcdfPoint {
                x,
                empirical: samples.iter().filter(|&&s| s > x).count() as f64 / n,
                theory: (-rate * x).exp(),
            }
        })
        .collect();
    Ok(InterferenceStats {
        cells,
        users_per_cell: users,
        rho,
        trials,
        samples: samples.len(),
        mean: first.value() / n,
        mean_theory,
        second_moment: second.value() / n,
        second_moment_theory: 2.0 * mean_theory * mean_theory,
        ks_distance: ks_distance(&samples, |x| 1.0 - (-rate * x).exp()),
        ccdf,
    })
}

/// Settings of a multiuser-diversity convergence sweep, where the user count grows as
/// `K(ρ) = ⌈ρ^a / c⌉`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub cells: usize,
    /// Growth exponent `a`.
    pub exponent: f64,
    pub snr_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    /// `c` in `K = ⌈ρ^a / c⌉`. `None` picks `c` so that `K = 10` at the lowest SNR.
    #[serde(default)]
    pub k_constant: Option<f64>,
    /// Largest allowed `K`.
    #[serde(default = "default_user_cap")]
    pub user_cap: usize,
}

fn default_user_cap() -> usize {
    DEFAULT_USER_CAP
}

impl ConvergenceConfig {
    pub fn new(cells: usize, exponent: f64, snr_db: Vec<f64>, trials: u64, seed: u64) -> Self {
        ConvergenceConfig {
            cells,
            exponent,
            snr_db,
            trials,
            seed,
            k_constant: None,
            user_cap: DEFAULT_USER_CAP,
        }
    }

    fn constant(&self) -> f64 {
        self.k_constant.unwrap_or_else(|| {
            let lowest = self.snr_db.iter().copied().fold(f64::INFINITY, f64::min);
            db_to_linear(lowest).powf(self.exponent) / 10.0
        })
    }

    /// `K(ρ)` for every grid point.
    pub fn users_at(&self) -> Result<Vec<usize>> {
        let c = self.constant();
        self.snr_db
            .iter()
            .map(|&db| {
                let k = (db_to_linear(db).powf(self.exponent) / c).ceil();
                if !k.is_finite() || k > self.user_cap as f64 {
                    return Err(Error::Truncated(format!(
                        "K = {k} users per cell at {db} dB exceeds the cap of {}; lower the exponent, \
                         the SNR grid, or raise user_cap",
                        self.user_cap
                    )));
                }
                Ok((k as usize).max(1))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub snr_db: f64,
    pub users_per_cell: usize,
    /// Mean of `Σ_m R_{k̂m} / log₂ρ` under max-SINR scheduling.
    pub normalized_max_sinr: f64,
    /// Same under min-interference scheduling with its own filter.
    pub normalized_min_interf: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceSweep {
    pub config: ConvergenceConfig,
    pub points: Vec<ConvergencePoint>,
    /// Interference-alignment reference `min(L, N) = L−1`.
    pub ia_baseline: f64,
    /// `L`, the limit for growing `K`.
    pub target: f64,
}

pub fn dof_convergence_sweep(cfg: &ConvergenceConfig) -> Result<ConvergenceSweep> {
    if cfg.cells < 2 {
        return Err(Error::Domain(format!("need L ≥ 2, got {}", cfg.cells)));
    }
    if !(cfg.exponent.is_finite() && cfg.exponent >= 0.0) {
        return Err(Error::Domain(format!(
            "exponent must be ≥ 0, got {}",
            cfg.exponent
        )));
    }
    if cfg.snr_db.is_empty() || cfg.trials == 0 {
        return Err(Error::Domain(
            "need a non-empty SNR grid and at least one trial".into(),
        ));
    }
    if let Some(&db) = cfg.snr_db.iter().find(|&&db| !(db.is_finite() && db > 0.0)) {
        return Err(Error::Domain(format!(
            "normalizing by log₂ρ needs ρ > 1, i.e. a positive dB value; got {db}"
        )));
    }
    let users = cfg.users_at()?;
    let mut points = Vec::with_capacity(users.len());
    for (&db, &k) in cfg.snr_db.iter().zip(&users) {
        let rho = db_to_linear(db);
        let net = downlink_config(cfg.cells, k);
        let per_trial: Vec<(f64, f64)> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let stats = user_stats(&realize_downlink(&net, cfg.seed, t)?, rho)?;
                Ok((
                    schedule_max_sinr(&stats, rho)?.sum_rate,
                    schedule_min_interf(&stats, rho)?.sum_rate,
                ))
            })
            .collect::<Result<_>>()?;
        let (mut a, mut b) = (CompensatedSum::default(), CompensatedSum::default());
        for (x, y) in per_trial {
            a.add(x);
            b.add(y);
        }
        let scale = cfg.trials as f64 * rho.log2();
        points.push(ConvergencePoint {
            snr_db: db,
            users_per_cell: k,
            normalized_max_sinr: a.value() / scale,
            normalized_min_interf: b.value() / scale,
        });
    }
    Ok(ConvergenceSweep {
        config: cfg.clone(),
        points,
        ia_baseline: (cfg.cells - 1) as f64,
        target: cfg.cells as f64,
    })
}

/// One `(ρ, trial)` record of a scheduling simulation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScheduleRecord {
    pub snr_db: f64,
    pub trial: u64,
    pub users_per_cell: usize,
    pub outcome: ScheduleOutcome,
}

/// Runs `trials` scheduling rounds at each SNR with `K(ρ)` users from `cfg`, handing
/// every record to `sink` in `(SNR, trial)` order.
pub fn schedule_simulation(
    cfg: &ConvergenceConfig,
    scheduler: Scheduler,
    mut sink: impl FnMut(&ScheduleRecord) -> Result<()>,
) -> Result<()> {
    let users = cfg.users_at()?;
    for (&db, &k) in cfg.snr_db.iter().zip(&users) {
        let rho = db_to_linear(db);
        let net = downlink_config(cfg.cells, k);
        let records: Vec<ScheduleRecord> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let stats = user_stats(&realize_downlink(&net, cfg.seed, t)?, rho)?;
                Ok(ScheduleRecord {
                    snr_db: db,
                    trial: t,
                    users_per_cell: k,
                    outcome: schedule(&stats, rho, scheduler)?,
                })
            })
            .collect::<Result<_>>()?;
        for r in &records {
            sink(r)?;
        }
    }
    Ok(())
}
