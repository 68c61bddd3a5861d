use mimo_dof::network::{realize_uplink, FadingDistribution, NetworkConfig};
use mimo_dof::C64;

fn entries(cfg: &NetworkConfig, seed: u64, trials: u64) -> Vec<C64> {
    (0..trials)
        .flat_map(|t| {
            realize_uplink(cfg, seed, t)
                .unwrap()
                .iter()
                .flat_map(|(_, h)| h.to_row_major())
                .collect::<Vec<_>>()
        })
        .collect()
}

#[test]
fn mean_entry_power_is_one() {
    // 2·(2·4)·(4·4) = 256 entries per trial.
    let cfg = NetworkConfig::homogeneous(2, 4, 4, 4, 1);
    let all = entries(&cfg, 11, 1_000_000 / 256 + 1);
    assert!(all.len() >= 1_000_000);
    let power = all.iter().map(|z| z.norm_sqr()).sum::<f64>() / all.len() as f64;
    assert!((power - 1.0).abs() <= 0.01, "{power}");
}

#[test]
fn distinct_entries_are_uncorrelated() {
    let cfg = NetworkConfig::homogeneous(2, 1, 2, 1, 1);
    let n = 100_000;
    let (mut corr, mut real_imag) = (C64::new(0.0, 0.0), 0.0);
    for t in 0..n {
        let ch = realize_uplink(&cfg, 12, t).unwrap();
        let a = ch.uplink(0, 0, 0).get(0, 0);
        let b = ch.uplink(1, 1, 0).get(0, 1);
        corr += a * b.conj();
        real_imag += a.re * a.im;
    }
    let corr = corr / n as f64;
    let real_imag = real_imag / n as f64;
    assert!(corr.norm() <= 0.01, "{corr}");
    assert!(real_imag.abs() <= 0.01, "{real_imag}");
}

#[test]
fn uniform_fading_has_unit_power_too() {
    let mut cfg = NetworkConfig::homogeneous(2, 4, 4, 4, 1);
    cfg.distribution = FadingDistribution::Uniform;
    let all = entries(&cfg, 13, 400);
    let power = all.iter().map(|z| z.norm_sqr()).sum::<f64>() / all.len() as f64;
    assert!((power - 1.0).abs() <= 0.01, "{power}");
}
