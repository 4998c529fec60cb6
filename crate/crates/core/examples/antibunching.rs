//! Simulated HBT measurement of a single two-level emitter with background.

use diamond_sil::photophysics::{
    correlate, g2_two_level_bin_average, hbt_split, simulate_two_level_stream, TwoLevelEmitterParams,
};

fn main() -> diamond_sil::Result<()> {
    let params = TwoLevelEmitterParams::new(2e7, 8e7, 0.1, 0.0)?.with_signal_fraction(0.9)?;
    let stream = simulate_two_level_stream(&params, 2.0, 7)?;
    let (a, b) = hbt_split(&stream, 8);
    println!("detected {} photons ({:.0} /s), signal fraction {:.2}", stream.len(), stream.rate(), params.signal_fraction());

    let h = correlate(&a, &b, 1e-9, 40e-9)?;
    let errs = h.g2_std_error();
    println!("tau_ns,g2,err,model");
    for (i, tau) in h.taus().enumerate() {
        let model = g2_two_level_bin_average(tau, h.bin_width, &params);
        println!("{:.1},{:.4},{:.4},{:.4}", tau * 1e9, h.g2[i], errs[i], model);
    }
    Ok(())
}
