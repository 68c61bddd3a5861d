//! Downlink opportunistic scheduling: interference statistics and DoF convergence.
use mimo_dof::scheduler::{
    dof_convergence_sweep, interference_stats_experiment, schedule_simulation, ConvergenceConfig,
    Scheduler,
};

fn main() -> mimo_dof::Result<()> {
    let s = interference_stats_experiment(3, 20, 100.0, 2000, 5)?;
    println!(
        "interference power: mean {:.4} (theory {:.4}), KS distance {:.4}",
        s.mean, s.mean_theory, s.ks_distance
    );

    let cfg = ConvergenceConfig::new(3, 1.0, vec![10.0, 20.0, 30.0], 50, 5);
    let sweep = dof_convergence_sweep(&cfg)?;
    for p in &sweep.points {
        println!(
            "{:>4.0} dB K={:<5} max-SINR {:.3}  min-interference {:.3}",
            p.snr_db, p.users_per_cell, p.normalized_max_sinr, p.normalized_min_interf
        );
    }
    println!(
        "alignment baseline {}, target {}",
        sweep.ia_baseline, sweep.target
    );

    let mut best = 0.0f64;
    schedule_simulation(
        &ConvergenceConfig::new(3, 1.0, vec![20.0], 10, 6),
        Scheduler::MaxSinr,
        |rec| {
            best = best.max(rec.outcome.sum_rate);
            Ok(())
        },
    )?;
    println!("best max-SINR sum rate over 10 rounds at 20 dB: {best:.3}");
    Ok(())
}
