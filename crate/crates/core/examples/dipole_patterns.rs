//! Angular emission of the four [100] NV orientations and their strain-averaged pair.

use std::f64::consts::PI;

use diamond_sil::dipole::{make_nv_emitter, pair_intensity_sp, Direction, SurfaceOrientation};

fn main() -> diamond_sil::Result<()> {
    println!("NV polar angle: {:.2} deg", diamond_sil::dipole::nv_polar_angle_100().to_degrees());
    println!("theta_deg,phi_deg,nv0,nv1,nv2,nv3");
    for deg in (0..=90).step_by(15) {
        for phi_deg in [0.0, 45.0, 90.0] {
            let dir = Direction::new((deg as f64).to_radians(), phi_deg * PI / 180.0)?;
            let mut line = format!("{deg},{phi_deg}");
            for index in 0..4 {
                let e = make_nv_emitter(SurfaceOrientation::Cut100, index, 0.0)?;
                line.push_str(&format!(",{:.5}", pair_intensity_sp(&dir, &e).total()));
            }
            println!("{line}");
        }
    }
    Ok(())
}
