//! Single-emitter photophysics: photon streams from a two-level emitter, HBT
//! coincidence histograms with normalized g2(τ), and saturation-curve fits.

mod correlation;
mod saturation;
mod stream;

pub use correlation::{correlate, g2_two_level_analytic, g2_two_level_bin_average, CoincidenceHistogram};
pub use saturation::{
    enhancement_ratio, fit_saturation, fit_saturation_with, saturation_intensity_reduction, saturation_rate,
    FitOptions, Ratio, SaturationDataset, SaturationFit, SaturationPoint,
};
pub use stream::{hbt_split, simulate_poisson_stream, simulate_two_level_stream, Channel, PhotonStream, TwoLevelEmitterParams};
