//! Loads the bundled TOML configs and draws reproducible channel realizations.
use std::path::Path;

use mimo_dof::network::{realize_uplink, RunConfig};

fn main() -> mimo_dof::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs");
    let mut paths: Vec<_> = std::fs::read_dir(&dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    paths.sort();
    for path in paths {
        let run = RunConfig::load(&path)?;
        let ch = realize_uplink(&run.network, run.seed, 0)?;
        let again = realize_uplink(&run.network, run.seed, 0)?;
        let power: f64 = ch.iter().map(|(_, h)| h.frobenius_norm().powi(2)).sum();
        let entries: usize = ch.iter().map(|(_, h)| h.rows() * h.cols()).sum();
        println!(
            "{}: L={} K={} {} links, mean |h|² {:.3}, reproducible {}",
            path.file_name().unwrap().to_string_lossy(),
            run.network.cells,
            run.network.users_per_cell,
            ch.len(),
            power / entries as f64,
            ch.iter()
                .zip(again.iter())
                .all(|((_, a), (_, b))| a.to_row_major() == b.to_row_major())
        );
    }
    Ok(())
}
