//! Antenna-count feasibility and the φ(γ) curve that drives the NSIA dimension rule.
use mimo_dof::bounds::{feasibility_check, phi};
use mimo_dof::schemes::dimension_rule;

fn main() -> mimo_dof::Result<()> {
    let (l, k) = (3, 4);
    for gamma in 1..=k {
        let rule = dimension_rule(l, k, 1, gamma)?;
        println!(
            "γ={gamma}: M={} N={} φ(γ)={} feasible={}",
            rule.tx,
            rule.rx,
            phi(gamma, l, k)?,
            feasibility_check(rule.tx, rule.rx, l, k)
        );
    }
    println!(
        "M=2, N=2 at L=2, K=2 feasible: {}",
        feasibility_check(2, 2, 2, 2)
    );
    Ok(())
}
