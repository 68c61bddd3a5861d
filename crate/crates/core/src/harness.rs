//! Monte Carlo rate simulation, DoF slope fitting and SNR sweeps.
//!
//! A sweep draws one channel realization per trial (`trial_index = trial`) and reuses it
//! at every SNR point, so rates at different SNRs are paired. Trials are evaluated in
//! parallel chunks and handed to the caller's sink in trial order, which makes every
//! output byte a function of `(config, scheme, trials, seed)` alone.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{outer_bound_general, serialize_rational};
use crate::error::{Error, Result};
use crate::network::{db_to_linear, realize_uplink, ChannelSet, NetworkConfig};
use crate::numerics::{log2_det_hpd, CMatrix};
use crate::scheduler::CompensatedSum;
use crate::schemes::{
    certify, construct, scheme_dimensions, LinearDesign, SchemeCertificate, SchemeId,
};

/// SNR grid used when the config has none.
pub const DEFAULT_SNR_DB: [f64; 5] = [40.0, 50.0, 60.0, 70.0, 80.0];

/// Trials evaluated per parallel batch.
const CHUNK: u64 = 64;

/// SNR-independent pieces of one cell's rate expression.
struct CellTerms {
    /// `P_m P_m*`.
    noise: CMatrix,
    /// `Σ_{ℓ≠m,k} (P_m H_{m,ℓk} T_{ℓk})(…)*`.
    interference: CMatrix,
    /// `(P_m G_m)(P_m G_m)*`.
    signal: CMatrix,
}

fn gram(a: &CMatrix) -> CMatrix {
    a * &a.adjoint()
}

fn cell_terms(design: &LinearDesign, channels: &ChannelSet) -> Result<Vec<CellTerms>> {
    let (l, k) = (design.cells, design.users_per_cell);
    (0..l)
        .map(|m| {
            let p = design.combiner(m);
            let mut interference = CMatrix::zeros(p.rows(), p.rows());
            for cell in (0..l).filter(|&c| c != m) {
                for user in 0..k {
                    let leak = &(p * channels.uplink(m, cell, user)) * design.precoder(cell, user);
                    interference = interference.add(&gram(&leak));
                }
            }
            Ok(CellTerms {
                noise: gram(p),
                interference,
                signal: gram(&(p * &design.in_cell_effective(channels, m)?)),
            })
        })
        .collect()
}

fn rate_from_terms(terms: &[CellTerms], rho: f64, streams: usize) -> Result<f64> {
    let per_stream = rho / streams as f64;
    let mut total = 0.0;
    for t in terms {
        let q = t.noise.add(&t.interference.scale(per_stream));
        let with_signal = q.add(&t.signal.scale(per_stream));
        let base = log2_det_hpd(&q).map_err(|_| {
            Error::Numerics("interference-plus-noise covariance is singular".into())
        })?;
        total += log2_det_hpd(&with_signal)? - base;
    }
    Ok(total)
}

/// Sum rate in bits per channel use:
/// `Σ_m log₂det(Q_m + (ρ/β) S_m S_m*) − log₂det(Q_m)` with `S_m = P_m G_m` and
/// `Q_m = P_m P_m* + (ρ/β) Σ_{ℓ≠m,k} (P_m H_{m,ℓk} T_{ℓk})(…)*`.
///
/// Each stream carries power `ρ/β` on a unit-norm precoder column; residual
/// interference of an imperfect design is treated as noise.
pub fn simulate_rates(design: &LinearDesign, channels: &ChannelSet, rho: f64) -> Result<f64> {
    rate_from_terms(&cell_terms(design, channels)?, rho, design.streams_per_user)
}

/// Ordinary least-squares slope of `(x, y)` points.
pub fn fit_dof_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Domain(format!(
            "a slope needs at least 2 points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= f64::EPSILON * points.iter().map(|p| p.0 * p.0).sum::<f64>() {
        return Err(Error::Domain("abscissae are all equal".into()));
    }
    Ok(sxy / sxx)
}

/// Index of the first grid point used for the slope fit: the upper half of the grid,
/// at least two points.
pub fn fit_start(grid_len: usize) -> usize {
    grid_len - grid_len.div_ceil(2).max(2).min(grid_len)
}

/// One `(SNR, trial)` row of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub snr_db: f64,
    pub trial: u64,
    pub sum_rate_bits: f64,
    pub certificate_passed: bool,
    pub borderline: bool,
    pub residual_max: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub config_echo: NetworkConfig,
    pub scheme_id: SchemeId,
    pub snr_points_db: Vec<f64>,
    pub mean_sum_rate_bits: Vec<f64>,
    /// Least-squares slope of mean sum rate against `log₂ρ` over `fit_points_db`.
    pub dof_slope: f64,
    pub fit_points_db: Vec<f64>,
    #[serde(serialize_with = "serialize_rational")]
    pub bound_sigma_d: BigRational,
    /// Fraction of trials whose certificate passed.
    pub certificates_passed: f64,
    pub borderline_trials: u64,
    pub trials: u64,
    pub seed: u64,
}

/// Realizes, constructs and certifies one trial.
pub fn certified_trial(
    cfg: &NetworkConfig,
    scheme: SchemeId,
    seed: u64,
    trial: u64,
) -> Result<(ChannelSet, LinearDesign, SchemeCertificate)> {
    let channels = realize_uplink(cfg, seed, trial)?;
    let design = construct(scheme, &channels, cfg)?;
    let certificate = certify(&design, &channels);
    Ok((channels, design, certificate))
}

fn check_scheme(cfg: &NetworkConfig, scheme: SchemeId) -> Result<()> {
    cfg.validate()?;
    let wanted = scheme_dimensions(scheme, cfg.cells, cfg.users_per_cell, cfg.streams)?;
    if cfg.homogeneous_antennas() != Some(wanted) {
        return Err(Error::Config(format!(
            "{scheme} needs homogeneous (M, N) = {wanted:?} for this geometry"
        )));
    }
    Ok(())
}

/// Certificates of `trials` independent realizations, in trial order.
pub fn certify_trials(
    cfg: &NetworkConfig,
    scheme: SchemeId,
    trials: u64,
    seed: u64,
) -> Result<Vec<SchemeCertificate>> {
    check_scheme(cfg, scheme)?;
    (0..trials)
        .into_par_iter()
        .map(|t| Ok(certified_trial(cfg, scheme, seed, t)?.2))
        .collect()
}

/// [`run_sweep_with_sink`] without a sink.
pub fn run_sweep(
    cfg: &NetworkConfig,
    scheme: SchemeId,
    trials: u64,
    seed: u64,
) -> Result<SweepResult> {
    run_sweep_with_sink(cfg, scheme, trials, seed, |_| Ok(()))
}

/// Runs `trials` realizations of `scheme` at every SNR of `cfg` (or [`DEFAULT_SNR_DB`]),
/// passing each record to `sink` in `(trial, SNR)` order, and summarizes.
pub fn run_sweep_with_sink(
    cfg: &NetworkConfig,
    scheme: SchemeId,
    trials: u64,
    seed: u64,
    mut sink: impl FnMut(&TrialRecord) -> Result<()>,
) -> Result<SweepResult> {
    check_scheme(cfg, scheme)?;
    if trials == 0 {
        return Err(Error::Config("a sweep needs at least one trial".into()));
    }
    let grid: Vec<f64> = if cfg.snr_db.is_empty() {
        DEFAULT_SNR_DB.to_vec()
    } else {
        cfg.snr_db.clone()
    };
    if grid.len() < 2 {
        return Err(Error::Config(
            "a sweep needs at least two SNR points".into(),
        ));
    }
    let rhos: Vec<f64> = grid.iter().map(|&db| db_to_linear(db)).collect();
    let bound = outer_bound_general(cfg)?.sigma_d;

    let mut sums = vec![CompensatedSum::default(); grid.len()];
    let mut passed = 0u64;
    let mut borderline = 0u64;
    let mut start = 0;
    while start < trials {
        let end = (start + CHUNK).min(trials);
        let batch: Vec<Vec<TrialRecord>> = (start..end)
            .into_par_iter()
            .map(|t| {
                let (channels, design, cert) = certified_trial(cfg, scheme, seed, t)?;
                let terms = cell_terms(&design, &channels)?;
                grid.iter()
                    .zip(&rhos)
                    .map(|(&db, &rho)| {
                        Ok(TrialRecord {
                            snr_db: db,
                            trial: t,
                            sum_rate_bits: rate_from_terms(&terms, rho, cfg.streams)?,
                            certificate_passed: cert.passed,
                            borderline: cert.borderline,
                            residual_max: cert.residual_max,
                        })
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        for records in batch {
            passed += u64::from(records[0].certificate_passed);
            borderline += u64::from(records[0].borderline);
            for (i, r) in records.iter().enumerate() {
                sums[i].add(r.sum_rate_bits);
                sink(r)?;
            }
        }
        start = end;
    }

    let mean: Vec<f64> = sums.iter().map(|s| s.value() / trials as f64).collect();
    let from = fit_start(grid.len());
    let points: Vec<(f64, f64)> = rhos[from..]
        .iter()
        .zip(&mean[from..])
        .map(|(rho, &rate)| (rho.log2(), rate))
        .collect();
    Ok(SweepResult {
        config_echo: cfg.clone(),
        scheme_id: scheme,
        snr_points_db: grid.clone(),
        mean_sum_rate_bits: mean,
        dof_slope: fit_dof_slope(&points)?,
        fit_points_db: grid[from..].to_vec(),
        bound_sigma_d: bound,
        certificates_passed: passed as f64 / trials as f64,
        borderline_trials: borderline,
        trials,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use rand_distr::{Distribution, Normal};

    fn cfg_for(scheme: SchemeId, l: usize, k: usize, b: usize, snr: Vec<f64>) -> NetworkConfig {
        let (m, n) = scheme_dimensions(scheme, l, k, b).unwrap();
        NetworkConfig::homogeneous(l, k, m, n, b).with_snr_db(snr)
    }

    #[test]
    fn slope_of_exact_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 5.0 * i as f64 + 2.0)).collect();
        assert!((fit_dof_slope(&pts).unwrap() - 5.0).abs() < 1e-12);
        assert!((fit_dof_slope(&[(1.0, 3.0), (4.0, 9.0)]).unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(
            fit_dof_slope(&[(1.0, 1.0)]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            fit_dof_slope(&[(2.0, 1.0), (2.0, 3.0)]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn slope_of_noisy_line() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, 0.1).unwrap();
        let pts: Vec<(f64, f64)> = [13.3, 16.6, 19.9, 23.3, 26.6]
            .iter()
            .map(|&x| (x, 4.0 * x + noise.sample(&mut rng)))
            .collect();
        assert!((fit_dof_slope(&pts).unwrap() - 4.0).abs() < 0.1);
    }

    #[test]
    fn fit_uses_upper_half() {
        assert_eq!(fit_start(5), 2);
        assert_eq!(fit_start(3), 1);
        assert_eq!(fit_start(2), 0);
        assert_eq!(fit_start(6), 3);
    }

    #[test]
    fn zero_gain_gives_zero_rate() {
        let cfg = cfg_for(SchemeId::TxZf, 2, 2, 1, vec![]);
        let (ch, mut d, _) = certified_trial(&cfg, SchemeId::TxZf, 0, 0).unwrap();
        for t in &mut d.precoders {
            *t = CMatrix::zeros(t.rows(), t.cols());
        }
        assert_eq!(simulate_rates(&d, &ch, 1e6).unwrap(), 0.0);
    }

    #[test]
    fn rates_grow_with_snr() {
        let cfg = cfg_for(SchemeId::RxZf, 2, 1, 1, vec![]);
        let (ch, d, _) = certified_trial(&cfg, SchemeId::RxZf, 0, 1).unwrap();
        let lo = simulate_rates(&d, &ch, 1e2).unwrap();
        let hi = simulate_rates(&d, &ch, 1e4).unwrap();
        assert!(hi > lo && lo > 0.0);
    }

    #[test]
    fn rx_zf_single_user_slope() {
        let cfg = cfg_for(SchemeId::RxZf, 2, 1, 1, vec![60.0, 70.0, 80.0]);
        let r = run_sweep(&cfg, SchemeId::RxZf, 100, 3).unwrap();
        assert!((r.dof_slope - 2.0).abs() < 0.06, "{}", r.dof_slope);
        assert_eq!(r.certificates_passed, 1.0);
        assert_eq!(r.bound_sigma_d.to_string(), "2");
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        let cfg = cfg_for(SchemeId::TxZf, 2, 2, 1, vec![20.0, 40.0]);
        let collect = || {
            let mut rows = Vec::new();
            let r = run_sweep_with_sink(&cfg, SchemeId::TxZf, 150, 9, |rec| {
                rows.push(rec.clone());
                Ok(())
            })
            .unwrap();
            (rows, r.mean_sum_rate_bits)
        };
        let (a, ma) = collect();
        let (b, mb) = collect();
        assert_eq!(a, b);
        assert_eq!(ma, mb);
        assert_eq!(a.len(), 300);
        assert!(a
            .windows(2)
            .all(|w| (w[0].trial, w[0].snr_db) < (w[1].trial, w[1].snr_db)));
    }

    #[test]
    fn mismatched_dimensions_fail_before_trials() {
        let cfg = NetworkConfig::homogeneous(2, 2, 2, 2, 1);
        let mut calls = 0;
        let r = run_sweep_with_sink(&cfg, SchemeId::TxZf, 10, 0, |_| {
            calls += 1;
            Ok(())
        });
        assert!(matches!(r, Err(Error::Config(_))));
        assert_eq!(calls, 0);
    }
}
