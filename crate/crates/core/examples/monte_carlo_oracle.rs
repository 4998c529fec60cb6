//! Ray-tracing Monte Carlo against Gauss-Legendre quadrature.

use diamond_sil::dipole::Nv100Ensemble;
use diamond_sil::efficiency::{efficiency, efficiency_monte_carlo, MonteCarloConfig, QuadratureConfig};
use diamond_sil::interface::{CollectionOptics, InterfaceConfig};

fn main() -> diamond_sil::Result<()> {
    let pattern = Nv100Ensemble::new(16)?;
    let optics = CollectionOptics::new(0.85)?;
    for interface in [InterfaceConfig::planar(), InterfaceConfig::sil()] {
        let quad = efficiency(&pattern, &interface, &optics, &QuadratureConfig::default())?;
        let mc = efficiency_monte_carlo(&pattern, &interface, &optics, &MonteCarloConfig::new(1_000_000, 1)?)?;
        let se = mc.std_error.unwrap_or(f64::NAN);
        println!(
            "{:?}: quadrature {:.5}, monte carlo {:.5} ± {:.5} ({:+.2} sigma)",
            interface.geometry,
            quad.eta,
            mc.eta,
            se,
            (mc.eta - quad.eta) / se
        );
    }
    Ok(())
}
