//! Exact degrees-of-freedom outer bounds.
//!
//! Every quantity here is an exact rational (`BigRational`); there is no floating point
//! and no tolerance. `L` is the number of cells, `K` the users per cell, `M`/`N` the
//! transmit/receive antenna counts.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::network::NetworkConfig;

fn rat(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn ratio(num: usize, den: usize) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn min_of(values: impl IntoIterator<Item = BigRational>) -> BigRational {
    values
        .into_iter()
        .reduce(|a, b| if b < a { b } else { a })
        .expect("non-empty branch list")
}

/// Serializes a rational as `{"exact": "8/3", "approx": 2.666…}`.
pub fn serialize_rational<S: Serializer>(
    value: &BigRational,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut s = serializer.serialize_struct("Rational", 2)?;
    s.serialize_field("exact", &value.to_string())?;
    s.serialize_field("approx", &value.to_f64().unwrap_or(f64::NAN))?;
    s.end()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundTheorem {
    /// Per-node antenna counts; `Σ_d ≤ min(ΣM, ΣN, η)`.
    General,
    /// Homogeneous `(M, N)` closed form.
    Homogeneous,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundBranch {
    pub name: &'static str,
    #[serde(serialize_with = "serialize_rational")]
    pub value: BigRational,
}

/// Values of every outer-bound branch and the resulting bound.
#[derive(Clone, Debug, Serialize)]
pub struct DofBoundReport {
    pub theorem: BoundTheorem,
    pub branches: Vec<BoundBranch>,
    /// Minimum over the branches used by `theorem`.
    #[serde(serialize_with = "serialize_rational")]
    pub sigma_d: BigRational,
    pub config_echo: NetworkConfig,
}

impl DofBoundReport {
    pub fn branch(&self, name: &str) -> Option<&BigRational> {
        self.branches
            .iter()
            .find(|b| b.name == name)
            .map(|b| &b.value)
    }
}

/// Antenna sums needed by the per-subset two-user-IC bound for subset `(ℓ, k)`.
struct SubsetSums {
    /// `Σ_q M_{ℓq}`: the cooperating MAC users of cell ℓ.
    mac_tx: usize,
    /// `Σ_{p≠ℓ} M_{pk}`: user k of every other cell.
    ic_tx: usize,
    /// `Σ_{p≠ℓ} N_p`.
    ic_rx: usize,
    /// `N_ℓ`.
    mac_rx: usize,
}

fn subset_sums(cfg: &NetworkConfig, l: usize, k: usize) -> SubsetSums {
    let others = (0..cfg.cells).filter(|&p| p != l);
    SubsetSums {
        mac_tx: (0..cfg.users_per_cell).map(|q| cfg.tx_antennas(l, q)).sum(),
        ic_tx: others.clone().map(|p| cfg.tx_antennas(p, k)).sum(),
        ic_rx: others.map(|p| cfg.rx_antennas(p)).sum(),
        mac_rx: cfg.rx_antennas(l),
    }
}

/// Degrees of freedom of the two-user MIMO interference channel with antenna pairs
/// `(M₁, N₁)`, `(M₂, N₂)`: `min(M₁+M₂, N₁+N₂, max(M₁,N₂), max(M₂,N₁))`.
pub fn two_user_ic_dof(m1: usize, n1: usize, m2: usize, n2: usize) -> usize {
    (m1 + m2).min(n1 + n2).min(m1.max(n2)).min(m2.max(n1))
}

fn require_multicell(cfg: &NetworkConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.cells <= 1 {
        return Err(Error::Domain(format!(
            "the outer bound is defined for L > 1 cells, got L = {}",
            cfg.cells
        )));
    }
    Ok(())
}

/// `(ΣM, ΣN, η, relaxed)` for any antenna layout.
fn general_branches(cfg: &NetworkConfig) -> [BigRational; 4] {
    let (l_count, k_count) = (cfg.cells, cfg.users_per_cell);
    let sum_tx: usize = (0..l_count)
        .flat_map(|l| (0..k_count).map(move |k| (l, k)))
        .map(|(l, k)| cfg.tx_antennas(l, k))
        .sum();
    let sum_rx: usize = (0..l_count).map(|m| cfg.rx_antennas(m)).sum();
    let repeats = k_count + l_count - 1;
    let mut eta_num = 0usize;
    let mut relaxed_num = 0usize;
    for l in 0..l_count {
        for k in 0..k_count {
            let s = subset_sums(cfg, l, k);
            eta_num += two_user_ic_dof(s.mac_tx, s.mac_rx, s.ic_tx, s.ic_rx);
            relaxed_num += s.mac_tx.max(s.ic_rx).min(s.ic_tx.max(s.mac_rx));
        }
    }
    let eta = ratio(eta_num, repeats);
    let relaxed = min_of([rat(sum_tx), rat(sum_rx), ratio(relaxed_num, repeats)]);
    [rat(sum_tx), rat(sum_rx), eta, relaxed]
}

/// `Σ_d ≤ min(Σ M_{ℓk}, Σ N_ℓ, η(W))` for arbitrary per-node antenna counts.
///
/// `η(W)` sums, over the `KL` message subsets, the two-user-IC bound of the
/// `(1, L−1)` MAC-IC reduction and divides by `K+L−1`, the number of subsets each
/// message appears in. The `relaxed` branch is the simplified bound obtained by upper
/// bounding `η`; it is reported for comparison and never smaller than `sigma_d`.
pub fn outer_bound_general(cfg: &NetworkConfig) -> Result<DofBoundReport> {
    require_multicell(cfg)?;
    let [tx, rx, eta, relaxed] = general_branches(cfg);
    let sigma_d = min_of([tx.clone(), rx.clone(), eta.clone()]);
    Ok(DofBoundReport {
        theorem: BoundTheorem::General,
        branches: vec![
            BoundBranch {
                name: "cooperative_tx",
                value: tx,
            },
            BoundBranch {
                name: "cooperative_rx",
                value: rx,
            },
            BoundBranch {
                name: "eta",
                value: eta,
            },
            BoundBranch {
                name: "relaxed",
                value: relaxed,
            },
        ],
        sigma_d,
        config_echo: cfg.clone(),
    })
}

/// `Σ_d ≤ min(KLM, LN, KL/(K+L−1)·max(KM,(L−1)N), KL/(K+L−1)·max((L−1)M,N))`.
///
/// The report also carries the general-form `eta` and `relaxed` branches; `sigma_d` is
/// the minimum of the four closed-form branches only.
pub fn outer_bound_homogeneous(cfg: &NetworkConfig) -> Result<DofBoundReport> {
    require_multicell(cfg)?;
    let (m, n) = cfg
        .homogeneous_antennas()
        .ok_or_else(|| Error::Config("closed-form bound needs homogeneous antennas".into()))?;
    let (l, k) = (cfg.cells, cfg.users_per_cell);
    let scale = ratio(k * l, k + l - 1);
    let mac_side = &scale * rat((k * m).max((l - 1) * n));
    let ic_side = &scale * rat(((l - 1) * m).max(n));
    let closed = [rat(k * l * m), rat(l * n), mac_side, ic_side];
    let sigma_d = min_of(closed.iter().cloned());
    let [_, _, eta, relaxed] = general_branches(cfg);
    let [tx, rx, mac_side, ic_side] = closed;
    Ok(DofBoundReport {
        theorem: BoundTheorem::Homogeneous,
        branches: vec![
            BoundBranch {
                name: "cooperative_tx",
                value: tx,
            },
            BoundBranch {
                name: "cooperative_rx",
                value: rx,
            },
            BoundBranch {
                name: "mac_alignment",
                value: mac_side,
            },
            BoundBranch {
                name: "ic_alignment",
                value: ic_side,
            },
            BoundBranch {
                name: "eta",
                value: eta,
            },
            BoundBranch {
                name: "relaxed",
                value: relaxed,
            },
        ],
        sigma_d,
        config_echo: cfg.clone(),
    })
}

/// Bound for the `(L−1, 1)` MAC-IC uplink HetNet: one `K`-user MAC cell (users with
/// `mac_tx[q]` antennas, base station with `mac_rx`) next to an `(L−1)`-user
/// interference channel with pairs `(ic_tx[p], ic_rx[p])`.
pub fn outer_bound_hetnet(
    mac_tx: &[usize],
    mac_rx: usize,
    ic_tx: &[usize],
    ic_rx: &[usize],
) -> Result<BigRational> {
    if mac_tx.is_empty() {
        return Err(Error::Domain("the MAC cell needs at least one user".into()));
    }
    if ic_tx.is_empty() {
        return Err(Error::Domain(
            "the interference-channel side needs at least one pair".into(),
        ));
    }
    if ic_tx.len() != ic_rx.len() {
        return Err(Error::Config(format!(
            "{} IC transmitters but {} IC receivers",
            ic_tx.len(),
            ic_rx.len()
        )));
    }
    let mac_tx_sum: usize = mac_tx.iter().sum();
    let ic_tx_sum: usize = ic_tx.iter().sum();
    let ic_rx_sum: usize = ic_rx.iter().sum();
    Ok(rat(two_user_ic_dof(
        mac_tx_sum, mac_rx, ic_tx_sum, ic_rx_sum,
    )))
}

/// Distributed versus selected-and-shared transmission for `L = K = 2`, `M = N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransmissionComparison {
    /// Outer bound of the 2-cell, 2-user MAC with every user transmitting its own message.
    #[serde(serialize_with = "serialize_rational")]
    pub sigma_dist: BigRational,
    /// Known DoF of the 2×2 MIMO X channel, `4M/3`.
    #[serde(serialize_with = "serialize_rational")]
    pub sigma_shared: BigRational,
    pub shared_wins_or_ties: bool,
}

pub fn compare_dist_vs_shared(
    cells: usize,
    users: usize,
    tx: usize,
    rx: usize,
) -> Result<TransmissionComparison> {
    if cells != 2 || users != 2 {
        return Err(Error::Domain(format!(
            "the comparison covers L = K = 2 only, got L = {cells}, K = {users}"
        )));
    }
    if tx != rx || tx == 0 {
        return Err(Error::Domain(format!(
            "the comparison needs M = N ≥ 1, got M = {tx}, N = {rx}"
        )));
    }
    let sigma_dist = outer_bound_homogeneous(&NetworkConfig::homogeneous(2, 2, tx, rx, 1))?.sigma_d;
    let sigma_shared = ratio(4 * tx, 3);
    let shared_wins_or_ties = sigma_dist <= sigma_shared;
    Ok(TransmissionComparison {
        sigma_dist,
        sigma_shared,
        shared_wins_or_ties,
    })
}

/// Necessary condition for one interference-free dimension per user with linear
/// processing: `M + N ≥ LK + 1`.
pub fn feasibility_check(tx: usize, rx: usize, cells: usize, users: usize) -> bool {
    tx + rx > cells * users
}

/// `φ(γ) = ((L−1)γ+1)(K+1−γ)` for `1 ≤ γ ≤ K−1`, and `LK` for `γ = K`.
///
/// With one stream per user, the generalized null-space alignment needs exactly
/// `M + N = φ(γ) + 1` antennas.
pub fn phi(gamma: usize, cells: usize, users: usize) -> Result<usize> {
    if gamma == 0 || gamma > users {
        return Err(Error::Domain(format!(
            "γ must lie in [1, K] = [1, {users}], got {gamma}"
        )));
    }
    if cells == 0 {
        return Err(Error::Domain("L must be positive".into()));
    }
    Ok(if gamma == users {
        cells * users
    } else {
        ((cells - 1) * gamma + 1) * (users + 1 - gamma)
    })
}

/// Messages `(cell, user)` in subset `W^{ℓk}`: all of cell ℓ's messages plus user k's
/// message in every other cell.
pub fn message_subset(l: usize, k: usize, cells: usize, users: usize) -> Vec<(usize, usize)> {
    let mac = (0..users).map(|q| (l, q));
    let ic = (0..cells).filter(|&p| p != l).map(|p| (p, k));
    mac.chain(ic).collect()
}

/// `counts[ℓ][k]` = number of the `KL` subsets containing message `W_{ℓk}`.
pub fn message_repetitions(cells: usize, users: usize) -> Vec<Vec<usize>> {
    let mut counts = vec![vec![0; users]; cells];
    for l in 0..cells {
        for k in 0..users {
            for (p, q) in message_subset(l, k, cells, users) {
                counts[p][q] += 1;
            }
        }
    }
    counts
}

/// True when `value` is a whole number.
pub fn is_integer(value: &BigRational) -> bool {
    value.denom() == &BigInt::from(1) || value.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hom(l: usize, k: usize, m: usize, n: usize) -> NetworkConfig {
        NetworkConfig::homogeneous(l, k, m, n, 1)
    }

    #[test]
    fn corollary_examples() {
        assert_eq!(
            outer_bound_homogeneous(&hom(2, 2, 2, 2)).unwrap().sigma_d,
            ratio(8, 3)
        );
        assert_eq!(
            outer_bound_homogeneous(&hom(2, 3, 4, 3)).unwrap().sigma_d,
            rat(6)
        );
        assert_eq!(
            outer_bound_homogeneous(&hom(2, 3, 3, 4)).unwrap().sigma_d,
            rat(6)
        );
        assert_eq!(
            outer_bound_homogeneous(&hom(3, 2, 1, 6)).unwrap().sigma_d,
            rat(6)
        );
    }

    #[test]
    fn general_bound_matches_corollary_example() {
        let cfg = NetworkConfig::heterogeneous(2, 2, vec![2; 4], vec![2; 2]);
        assert_eq!(outer_bound_general(&cfg).unwrap().sigma_d, ratio(8, 3));
    }

    #[test]
    fn general_bound_reduces_to_two_user_ic() {
        // Oracle: min(2M, 2N, max(M, N)) for the two-user MIMO IC.
        for m in 1..6 {
            for n in 1..6 {
                let oracle = (2 * m).min(2 * n).min(m.max(n));
                let r = outer_bound_general(&hom(2, 1, m, n)).unwrap();
                assert_eq!(r.sigma_d, rat(oracle), "M={m} N={n}");
            }
        }
    }

    #[test]
    fn general_report_branches() {
        let r = outer_bound_general(&hom(2, 1, 2, 2)).unwrap();
        assert_eq!(r.branch("cooperative_tx"), Some(&rat(4)));
        assert_eq!(r.branch("cooperative_rx"), Some(&rat(4)));
        assert_eq!(r.branch("eta"), Some(&rat(2)));
        assert!(r.branch("mac_alignment").is_none());
        assert!(r.branch("relaxed").unwrap() >= &r.sigma_d);
    }

    #[test]
    fn single_cell_is_a_domain_error() {
        assert!(matches!(
            outer_bound_general(&hom(1, 2, 2, 2)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            outer_bound_homogeneous(&hom(1, 2, 2, 2)),
            Err(Error::Domain(_))
        ));
        assert!(outer_bound_general(&hom(2, 2, 0, 2)).is_err());
    }

    #[test]
    fn homogeneous_needs_homogeneous_antennas() {
        let cfg = NetworkConfig::heterogeneous(2, 1, vec![1, 2], vec![2, 2]);
        assert!(matches!(
            outer_bound_homogeneous(&cfg),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn hetnet_examples() {
        // Degenerate case is the two-user IC: min(4, 4, 2, 2).
        assert_eq!(outer_bound_hetnet(&[2], 2, &[2], &[2]).unwrap(), rat(2));
        // Hand evaluation: min(2+2+2, 2+2, max(4, 2), max(2, 2)) = 2.
        assert_eq!(outer_bound_hetnet(&[2, 2], 2, &[2], &[2]).unwrap(), rat(2));
        // Degree-1 homogeneity.
        let base = outer_bound_hetnet(&[1, 3], 2, &[2, 1], &[3, 1]).unwrap();
        let doubled = outer_bound_hetnet(&[2, 6], 4, &[4, 2], &[6, 2]).unwrap();
        assert_eq!(doubled, base * rat(2));
        assert!(matches!(
            outer_bound_hetnet(&[2], 2, &[], &[]),
            Err(Error::Domain(_))
        ));
        assert!(outer_bound_hetnet(&[2], 2, &[1, 1], &[1]).is_err());
    }

    #[test]
    fn distributed_vs_shared() {
        let c = compare_dist_vs_shared(2, 2, 3, 3).unwrap();
        assert_eq!(
            (c.sigma_dist, c.sigma_shared, c.shared_wins_or_ties),
            (rat(4), rat(4), true)
        );
        let c = compare_dist_vs_shared(2, 2, 6, 6).unwrap();
        assert_eq!((c.sigma_dist, c.sigma_shared), (rat(8), rat(8)));
        let c = compare_dist_vs_shared(2, 2, 1, 1).unwrap();
        assert_eq!((c.sigma_dist, c.sigma_shared), (ratio(4, 3), ratio(4, 3)));
        assert!(matches!(
            compare_dist_vs_shared(3, 2, 1, 1),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            compare_dist_vs_shared(2, 2, 1, 2),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn feasibility_examples() {
        assert!(feasibility_check(3, 4, 2, 3));
        assert_eq!(3 + 4, 2 * 3 + 1);
        assert!(!feasibility_check(1, 1, 2, 1));
        assert!(feasibility_check(1, 6, 3, 2));
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(1, 3, 3).unwrap(), 9);
        assert_eq!(phi(2, 3, 3).unwrap(), 10);
        assert_eq!(phi(3, 3, 3).unwrap(), 9);
        assert!(matches!(phi(0, 3, 3), Err(Error::Domain(_))));
        assert!(matches!(phi(4, 3, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn phi_boundary_values_and_ordering() {
        for l in 2..=10 {
            for k in 1..=10 {
                assert_eq!(phi(1, l, k).unwrap(), l * k);
                assert_eq!(phi(k, l, k).unwrap(), l * k);
                if k >= 2 {
                    assert!(phi(k - 1, l, k).unwrap() >= phi(1, l, k).unwrap());
                }
                // Concavity on the interior branch.
                for g in 2..k.saturating_sub(1) {
                    let second = phi(g + 1, l, k).unwrap() as i64
                        - 2 * phi(g, l, k).unwrap() as i64
                        + phi(g - 1, l, k).unwrap() as i64;
                    assert!(second <= 0, "L={l} K={k} γ={g}");
                }
            }
        }
    }

    #[test]
    fn theorem_never_exceeds_corollary() {
        for l in 2..=6 {
            for k in 1..=6 {
                for m in 1..=6 {
                    for n in 1..=6 {
                        let cfg = hom(l, k, m, n);
                        let general = outer_bound_general(&cfg).unwrap();
                        let closed = outer_bound_homogeneous(&cfg).unwrap();
                        assert!(general.sigma_d <= closed.sigma_d, "{l} {k} {m} {n}");
                        assert_eq!(general.branch("relaxed").unwrap(), &closed.sigma_d);
                    }
                }
            }
        }
    }

    #[test]
    fn every_message_repeats_k_plus_l_minus_one_times() {
        for l in 1..=4 {
            for k in 1..=4 {
                for row in message_repetitions(l, k) {
                    assert!(row.iter().all(|&c| c == k + l - 1));
                }
            }
        }
    }

    #[test]
    fn report_serializes_exact_values() {
        let r = outer_bound_homogeneous(&hom(2, 2, 2, 2)).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["sigma_d"]["exact"], "8/3");
        assert_eq!(json["theorem"], "homogeneous");
        assert_eq!(json["branches"].as_array().unwrap().len(), 6);
    }
}
