//! Outer bounds on the sum DoF for a few homogeneous and heterogeneous networks.
use mimo_dof::bounds::{
    compare_dist_vs_shared, outer_bound_general, outer_bound_hetnet, outer_bound_homogeneous,
};
use mimo_dof::network::NetworkConfig;

fn main() -> mimo_dof::Result<()> {
    for (l, k, m, n) in [(2, 2, 2, 2), (2, 3, 1, 4), (3, 2, 2, 3), (3, 3, 2, 9)] {
        let cfg = NetworkConfig::homogeneous(l, k, m, n, 1);
        let closed = outer_bound_homogeneous(&cfg)?;
        let general = outer_bound_general(&cfg)?;
        println!(
            "L={l} K={k} M={m} N={n}: homogeneous bound {}, general bound {}",
            closed.sigma_d, general.sigma_d
        );
        for b in &closed.branches {
            println!("    {:<16} {}", b.name, b.value);
        }
    }

    let het = NetworkConfig::heterogeneous(2, 2, vec![1, 3, 2, 2], vec![3, 4]);
    println!(
        "heterogeneous antennas: general bound {}",
        outer_bound_general(&het)?.sigma_d
    );

    // One MAC with two 2-antenna users into a 3-antenna receiver, plus two interfering 2x2 links.
    println!(
        "hetnet bound: {}",
        outer_bound_hetnet(&[2, 2], 3, &[2, 2], &[2, 2])?
    );

    let cmp = compare_dist_vs_shared(2, 2, 6, 6)?;
    println!(
        "distributed {} vs shared {} (shared wins or ties: {})",
        cmp.sigma_dist, cmp.sigma_shared, cmp.shared_wins_or_ties
    );
    Ok(())
}
