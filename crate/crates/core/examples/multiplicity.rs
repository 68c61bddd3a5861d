//! Subspace intersection multiplicity: closed form against a numerical check.
use mimo_dof::multiplicity::{index_groups, multiplicity_formula, multiplicity_numeric};

fn main() -> mimo_dof::Result<()> {
    for (n, m, k) in [(6, 1, 3), (7, 2, 3), (9, 2, 3), (10, 3, 2)] {
        let f = multiplicity_formula(n, m, k)?;
        let v = multiplicity_numeric(n, m, k, 7)?;
        println!(
            "n={n} m={m} K={k}: γ={} μ={} (numerically verified: {})",
            f.gamma, f.mu, v.verified_numerically
        );
    }
    let groups = index_groups(5, 3)?;
    println!("cyclic groups of size 3 over 5 users: {:?}", groups.groups);
    Ok(())
}
