//! Builds each linear scheme on one channel draw, certifies it and dumps the matrices.
use mimo_dof::network::{realize_uplink, NetworkConfig};
use mimo_dof::schemes::{
    certify, construct, projected_interference_ranks, scheme_dimensions, SchemeId,
};
use mimo_dof::textmat::dump_design;

fn main() -> mimo_dof::Result<()> {
    let cases = [
        (SchemeId::TxZf, 2, 2),
        (SchemeId::NsiaTwoCell, 2, 3),
        (SchemeId::NsiaGeneral { gamma: 3 }, 3, 3),
        (SchemeId::NsiaGeneral { gamma: 2 }, 3, 3),
        (SchemeId::RxZf, 3, 2),
    ];
    for (scheme, l, k) in cases {
        let (m, n) = scheme_dimensions(scheme, l, k, 1)?;
        let cfg = NetworkConfig::homogeneous(l, k, m, n, 1);
        let channels = realize_uplink(&cfg, 2024, 0)?;
        let design = construct(scheme, &channels, &cfg)?;
        let cert = certify(&design, &channels);
        println!(
            "{scheme} L={l} K={k} M={m} N={n}: passed={} streams={} residual={:.2e}",
            cert.passed, cert.achieved_streams, cert.residual_max
        );
        println!(
            "    interference ranks per cell: {:?}",
            projected_interference_ranks(&design, &channels)?
        );
    }

    let cfg = NetworkConfig::homogeneous(2, 2, 3, 2, 1);
    let channels = realize_uplink(&cfg, 2024, 0)?;
    let design = construct(SchemeId::TxZf, &channels, &cfg)?;
    print!("{}", dump_design(&design));
    Ok(())
}
