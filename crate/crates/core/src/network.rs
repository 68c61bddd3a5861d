//! Network geometry, SNR bookkeeping and seeded channel realization.
//!
//! Uplink channels `H_{m,ℓk}` map user `k` of cell `ℓ` to base station `m` and have shape
//! `N_m × M_{ℓk}`. Downlink channels `H_{km,ℓ}` map transmitter `ℓ` to user `k` of cell
//! `m` and have shape `N × M`. All indices are zero-based in code.
//!
//! A realization is a pure function of `(config, seed, trial_index)`: the generator is
//! ChaCha20 seeded with `seed` and switched to stream `trial_index`, so trials can be
//! produced in any order or in parallel.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{complex_gaussian, numerical_rank, CMatrix, C64};

/// Maximum number of redraws of a rank-deficient channel before giving up.
pub const MAX_REGENERATIONS: u32 = 100;

/// Antenna counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Antennas {
    /// Every user has `tx` antennas and every base station `rx`.
    Homogeneous { tx: usize, rx: usize },
    /// `tx_per_user[ℓ·K + k]` antennas at user `k` of cell `ℓ`, `rx_per_cell[m]` at base
    /// station `m`.
    Heterogeneous {
        tx_per_user: Vec<usize>,
        rx_per_cell: Vec<usize>,
    },
}

/// Distribution of the i.i.d. channel entries. All variants have zero mean and unit
/// variance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FadingDistribution {
    /// Circularly-symmetric complex Gaussian, `CN(0, 1)`.
    #[default]
    Rayleigh,
    /// Real and imaginary parts uniform on `[-√1.5, √1.5]`.
    Uniform,
}

impl FadingDistribution {
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> C64 {
        match self {
            FadingDistribution::Rayleigh => complex_gaussian(rng),
            FadingDistribution::Uniform => {
                let a = 1.5f64.sqrt();
                C64::new(rng.random_range(-a..a), rng.random_range(-a..a))
            }
        }
    }
}

fn default_streams() -> usize {
    1
}

/// Cell/user/antenna/stream geometry plus the SNR grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Number of cells `L`.
    pub cells: usize,
    /// Users per cell `K`.
    pub users_per_cell: usize,
    pub antennas: Antennas,
    /// Streams per user `β`.
    #[serde(default = "default_streams")]
    pub streams: usize,
    /// SNR points `ρ` in dB. Noise variance is 1, so `ρ` is the per-user transmit power.
    #[serde(default)]
    pub snr_db: Vec<f64>,
    #[serde(default)]
    pub distribution: FadingDistribution,
}

impl NetworkConfig {
    /// Homogeneous geometry with an empty SNR grid.
    pub fn homogeneous(cells: usize, users: usize, tx: usize, rx: usize, streams: usize) -> Self {
        NetworkConfig {
            cells,
            users_per_cell: users,
            antennas: Antennas::Homogeneous { tx, rx },
            streams,
            snr_db: Vec::new(),
            distribution: FadingDistribution::Rayleigh,
        }
    }

    pub fn heterogeneous(
        cells: usize,
        users: usize,
        tx_per_user: Vec<usize>,
        rx_per_cell: Vec<usize>,
    ) -> Self {
        NetworkConfig {
            cells,
            users_per_cell: users,
            antennas: Antennas::Heterogeneous {
                tx_per_user,
                rx_per_cell,
            },
            streams: 1,
            snr_db: Vec::new(),
            distribution: FadingDistribution::Rayleigh,
        }
    }

    pub fn with_snr_db(mut self, snr_db: Vec<f64>) -> Self {
        self.snr_db = snr_db;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells == 0 || self.users_per_cell == 0 || self.streams == 0 {
            return Err(Error::Config(
                "cells, users_per_cell and streams must be positive".into(),
            ));
        }
        match &self.antennas {
            Antennas::Homogeneous { tx, rx } => {
                if *tx == 0 || *rx == 0 {
                    return Err(Error::Config("antenna counts must be positive".into()));
                }
            }
            Antennas::Heterogeneous {
                tx_per_user,
                rx_per_cell,
            } => {
                if tx_per_user.len() != self.cells * self.users_per_cell {
                    return Err(Error::Config(format!(
                        "tx_per_user has {} entries, expected L·K = {}",
                        tx_per_user.len(),
                        self.cells * self.users_per_cell
                    )));
                }
                if rx_per_cell.len() != self.cells {
                    return Err(Error::Config(format!(
                        "rx_per_cell has {} entries, expected L = {}",
                        rx_per_cell.len(),
                        self.cells
                    )));
                }
                if tx_per_user.iter().chain(rx_per_cell).any(|&a| a == 0) {
                    return Err(Error::Config("antenna counts must be positive".into()));
                }
            }
        }
        let min_tx = (0..self.cells)
            .flat_map(|l| (0..self.users_per_cell).map(move |k| (l, k)))
            .map(|(l, k)| self.tx_antennas(l, k))
            .min()
            .unwrap_or(0);
        if self.streams > min_tx {
            return Err(Error::Config(format!(
                "{} streams per user need at least that many transmit antennas (smallest user has {min_tx})",
                self.streams
            )));
        }
        if self.snr_db.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("SNR values must be finite".into()));
        }
        Ok(())
    }

    /// Antennas at user `k` of cell `l`.
    pub fn tx_antennas(&self, l: usize, k: usize) -> usize {
        match &self.antennas {
            Antennas::Homogeneous { tx, .. } => *tx,
            Antennas::Heterogeneous { tx_per_user, .. } => tx_per_user[l * self.users_per_cell + k],
        }
    }

    /// Antennas at base station `m`.
    pub fn rx_antennas(&self, m: usize) -> usize {
        match &self.antennas {
            Antennas::Homogeneous { rx, .. } => *rx,
            Antennas::Heterogeneous { rx_per_cell, .. } => rx_per_cell[m],
        }
    }

    /// `(M, N)` when homogeneous.
    pub fn homogeneous_antennas(&self) -> Option<(usize, usize)> {
        match self.antennas {
            Antennas::Homogeneous { tx, rx } => Some((tx, rx)),
            Antennas::Heterogeneous { .. } => None,
        }
    }

    pub fn snr_linear(&self) -> Vec<f64> {
        self.snr_db.iter().map(|&db| db_to_linear(db)).collect()
    }

    pub fn total_users(&self) -> usize {
        self.cells * self.users_per_cell
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Contents of a run configuration file: a [`NetworkConfig`] plus run controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub network: NetworkConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
}

fn default_trials() -> u64 {
    1
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))?;
        cfg.network.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.as_ref().display())))?;
        Self::from_toml_str(&text)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Uplink,
    Downlink,
}

/// Endpoint pair of one channel matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Link {
    /// User `user` of cell `cell` to base station `bs`.
    Uplink { bs: usize, cell: usize, user: usize },
    /// Transmitter `tx` to user `user` of cell `cell`.
    Downlink { cell: usize, user: usize, tx: usize },
}

/// One realization of every channel matrix in the network.
#[derive(Clone, Debug)]
pub struct ChannelSet {
    pub direction: Direction,
    pub cells: usize,
    pub users_per_cell: usize,
    pub seed: u64,
    pub trial_index: u64,
    /// Rank-deficient draws that were discarded.
    pub regenerations: u32,
    matrices: Vec<CMatrix>,
}

impl ChannelSet {
    /// `H_{bs, cell·user}`.
    pub fn uplink(&self, bs: usize, cell: usize, user: usize) -> &CMatrix {
        debug_assert_eq!(self.direction, Direction::Uplink);
        let (l, k) = (self.cells, self.users_per_cell);
        &self.matrices[bs * l * k + cell * k + user]
    }

    /// `H_{user·cell, tx}`.
    pub fn downlink(&self, cell: usize, user: usize, tx: usize) -> &CMatrix {
        debug_assert_eq!(self.direction, Direction::Downlink);
        let (l, k) = (self.cells, self.users_per_cell);
        &self.matrices[cell * k * l + user * l + tx]
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Link, &CMatrix)> + '_ {
        let (l, k) = (self.cells, self.users_per_cell);
        let dir = self.direction;
        self.matrices.iter().enumerate().map(move |(i, h)| {
            let link = match dir {
                Direction::Uplink => Link::Uplink {
                    bs: i / (l * k),
                    cell: (i / k) % l,
                    user: i % k,
                },
                Direction::Downlink => Link::Downlink {
                    cell: i / (k * l),
                    user: (i / l) % k,
                    tx: i % l,
                },
            };
            (link, h)
        })
    }
}

fn trial_rng(seed: u64, trial_index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    rng
}

fn draw_full_rank(
    rows: usize,
    cols: usize,
    dist: FadingDistribution,
    rng: &mut ChaCha20Rng,
    regenerations: &mut u32,
) -> Result<CMatrix> {
    loop {
        let entries: Vec<C64> = (0..rows * cols).map(|_| dist.sample(rng)).collect();
        let h = CMatrix::from_row_slice(rows, cols, &entries)?;
        let full = if rows == 1 || cols == 1 {
            h.frobenius_norm() > 0.0
        } else {
            numerical_rank(&h)?.rank == rows.min(cols)
        };
        if full {
            return Ok(h);
        }
        *regenerations += 1;
        if *regenerations >= MAX_REGENERATIONS {
            return Err(Error::Numerics(format!(
                "{MAX_REGENERATIONS} rank-deficient channel draws; the generator or rank test is broken"
            )));
        }
    }
}

/// Draws every uplink channel `H_{m,ℓk}` for one trial.
pub fn realize_uplink(cfg: &NetworkConfig, seed: u64, trial_index: u64) -> Result<ChannelSet> {
    cfg.validate()?;
    let (l, k) = (cfg.cells, cfg.users_per_cell);
    let mut rng = trial_rng(seed, trial_index);
    let mut regenerations = 0;
    let mut matrices = Vec::with_capacity(l * l * k);
    for m in 0..l {
        for cell in 0..l {
            for user in 0..k {
                matrices.push(draw_full_rank(
                    cfg.rx_antennas(m),
                    cfg.tx_antennas(cell, user),
                    cfg.distribution,
                    &mut rng,
                    &mut regenerations,
                )?);
            }
        }
    }
    Ok(ChannelSet {
        direction: Direction::Uplink,
        cells: l,
        users_per_cell: k,
        seed,
        trial_index,
        regenerations,
        matrices,
    })
}

/// Draws every downlink channel `H_{km,ℓ}` for one trial. Requires homogeneous antennas.
pub fn realize_downlink(cfg: &NetworkConfig, seed: u64, trial_index: u64) -> Result<ChannelSet> {
    cfg.validate()?;
    let (tx, rx) = cfg
        .homogeneous_antennas()
        .ok_or_else(|| Error::Config("the downlink model needs homogeneous antennas".into()))?;
    let (l, k) = (cfg.cells, cfg.users_per_cell);
    let mut rng = trial_rng(seed, trial_index);
    let mut regenerations = 0;
    let mut matrices = Vec::with_capacity(l * k * l);
    for _cell in 0..l {
        for _user in 0..k {
            for _tx in 0..l {
                matrices.push(draw_full_rank(
                    rx,
                    tx,
                    cfg.distribution,
                    &mut rng,
                    &mut regenerations,
                )?);
            }
        }
    }
    Ok(ChannelSet {
        direction: Direction::Downlink,
        cells: l,
        users_per_cell: k,
        seed,
        trial_index,
        regenerations,
        matrices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uplink_is_deterministic() {
        let cfg = NetworkConfig::homogeneous(2, 2, 3, 2, 1);
        let a = realize_uplink(&cfg, 7, 0).unwrap();
        let b = realize_uplink(&cfg, 7, 0).unwrap();
        assert_eq!(a.len(), 8);
        for ((_, x), (_, y)) in a.iter().zip(b.iter()) {
            assert_eq!(x, y);
        }
        let c = realize_uplink(&cfg, 7, 1).unwrap();
        assert_ne!(a.uplink(0, 0, 0), c.uplink(0, 0, 0));
    }

    #[test]
    fn receive_zf_geometry_shapes() {
        let cfg = NetworkConfig::homogeneous(3, 2, 1, 6, 1);
        let ch = realize_uplink(&cfg, 1, 0).unwrap();
        assert_eq!(ch.len(), 18);
        for (_, h) in ch.iter() {
            assert_eq!(h.shape(), (6, 1));
            assert_eq!(numerical_rank(h).unwrap().rank, 1);
        }
    }

    #[test]
    fn heterogeneous_shapes_follow_link_endpoints() {
        let cfg = NetworkConfig::heterogeneous(2, 2, vec![1, 2, 3, 4], vec![5, 6]);
        let ch = realize_uplink(&cfg, 3, 0).unwrap();
        for (link, h) in ch.iter() {
            let Link::Uplink { bs, cell, user } = link else {
                unreachable!()
            };
            assert_eq!(
                h.shape(),
                (cfg.rx_antennas(bs), cfg.tx_antennas(cell, user))
            );
            assert_eq!(h, ch.uplink(bs, cell, user));
        }
    }

    #[test]
    fn downlink_shapes_and_indexing() {
        let cfg = NetworkConfig::homogeneous(3, 10, 1, 2, 1);
        let ch = realize_downlink(&cfg, 9, 4).unwrap();
        assert_eq!(ch.len(), 90);
        for (link, h) in ch.iter() {
            let Link::Downlink { cell, user, tx } = link else {
                unreachable!()
            };
            assert_eq!(h.shape(), (2, 1));
            assert_eq!(h, ch.downlink(cell, user, tx));
        }
        let again = realize_downlink(&cfg, 9, 4).unwrap();
        assert_eq!(ch.downlink(2, 9, 1), again.downlink(2, 9, 1));
    }

    #[test]
    fn validation_errors() {
        assert!(NetworkConfig::homogeneous(0, 1, 1, 1, 1)
            .validate()
            .is_err());
        assert!(NetworkConfig::homogeneous(2, 2, 1, 1, 2)
            .validate()
            .is_err());
        assert!(
            NetworkConfig::heterogeneous(2, 2, vec![1, 1, 1], vec![1, 1])
                .validate()
                .is_err()
        );
        assert!(
            NetworkConfig::heterogeneous(2, 2, vec![1, 1, 1, 1], vec![1])
                .validate()
                .is_err()
        );
        assert!(NetworkConfig::heterogeneous(2, 1, vec![1, 0], vec![1, 1])
            .validate()
            .is_err());
    }

    #[test]
    fn config_file_parses_both_antenna_forms() {
        let text = r#"
            cells = 2
            users_per_cell = 2
            streams = 1
            snr_db = [40, 60, 80]
            seed = 11
            trials = 50
            distribution = "uniform"
            antennas = { tx = 3, rx = 2 }
        "#;
        let cfg = RunConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.network.homogeneous_antennas(), Some((3, 2)));
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.trials, 50);
        assert_eq!(cfg.network.distribution, FadingDistribution::Uniform);
        assert_eq!(cfg.network.snr_linear()[1], 1e6);

        let het = r#"
            cells = 2
            users_per_cell = 1
            antennas = { tx_per_user = [2, 3], rx_per_cell = [4, 1] }
        "#;
        let cfg = RunConfig::from_toml_str(het).unwrap();
        assert_eq!(cfg.network.tx_antennas(1, 0), 3);
        assert_eq!(cfg.network.rx_antennas(1), 1);
        assert_eq!(cfg.network.streams, 1);

        assert!(RunConfig::from_toml_str("cells = 2").is_err());
    }

    #[test]
    fn uniform_entries_have_unit_variance() {
        let cfg = NetworkConfig {
            distribution: FadingDistribution::Uniform,
            ..NetworkConfig::homogeneous(2, 5, 10, 10, 1)
        };
        let mut acc = 0.0;
        let mut n = 0usize;
        for t in 0..50 {
            let ch = realize_uplink(&cfg, 2, t).unwrap();
            for (_, h) in ch.iter() {
                acc += h.frobenius_norm().powi(2);
                n += h.rows() * h.cols();
            }
        }
        assert!((acc / n as f64 - 1.0).abs() < 0.02);
    }
}
