//! Collection efficiency vs NA, planar surface and SIL, printed as CSV.

use diamond_sil::efficiency::{sweep_na, QuadratureConfig};
use diamond_sil::interface::InterfaceConfig;

fn main() -> diamond_sil::Result<()> {
    let curve = sweep_na(&InterfaceConfig::default(), 0.05, 0.95, 19, &QuadratureConfig::default(), 16)?;
    diamond_sil::io::write_curve_csv(&curve, std::io::stdout().lock())?;
    Ok(())
}
