//! Fit saturation curves for an emitter under a SIL and under a flat surface.

use diamond_sil::photophysics::{
    enhancement_ratio, fit_saturation, saturation_intensity_reduction, SaturationDataset, SaturationPoint,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn noisy(r_inf: f64, i_sat: f64, max_i: f64, seed: u64) -> diamond_sil::Result<SaturationDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(1.0, 0.02).unwrap();
    let points = (1..=12)
        .map(|k| {
            let i = max_i * k as f64 / 12.0;
            let r = r_inf * i / (i + i_sat);
            SaturationPoint { intensity_uw: i, rate_cps: r * noise.sample(&mut rng), rate_err_cps: Some(0.02 * r) }
        })
        .collect();
    SaturationDataset::new(points)
}

fn main() -> diamond_sil::Result<()> {
    let sil = fit_saturation(&noisy(493e3, 61.0, 600.0, 1)?)?;
    let flat = fit_saturation(&noisy(80e3, 1330.0, 8000.0, 2)?)?;
    for (name, fit) in [("SIL", &sil), ("flat", &flat)] {
        println!(
            "{name}: R_inf = {:.0} ± {:.0} cps, I_sat = {:.1} ± {:.1} uW, chi2/dof = {:.2}",
            fit.r_infinity,
            fit.r_infinity_err,
            fit.i_sat,
            fit.i_sat_err,
            fit.chi_squared / fit.dof as f64
        );
    }
    let r = enhancement_ratio(&sil, &flat)?;
    let s = saturation_intensity_reduction(&sil, &flat)?;
    println!("count-rate gain {:.2} ± {:.2}, saturation power reduction {:.1} ± {:.1}", r.value, r.uncertainty, s.value, s.uncertainty);
    Ok(())
}
