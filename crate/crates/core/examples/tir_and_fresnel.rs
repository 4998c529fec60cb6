//! Fresnel transmittance through a flat diamond/air interface and through a SIL.

use diamond_sil::interface::{transmittance, InterfaceConfig, Polarization};

fn main() -> diamond_sil::Result<()> {
    let planar = InterfaceConfig::planar();
    let sil = InterfaceConfig::sil();
    println!("critical angle: {:.3} deg", planar.critical_angle().to_degrees());
    println!("theta_deg,T_s_planar,T_p_planar,T_sil");
    for deg in (0..=30).step_by(2) {
        let t = (deg as f64).to_radians();
        println!(
            "{deg},{:.5},{:.5},{:.5}",
            transmittance(t, Polarization::S, &planar)?,
            transmittance(t, Polarization::P, &planar)?,
            transmittance(t, Polarization::S, &sil)?,
        );
    }
    Ok(())
}
