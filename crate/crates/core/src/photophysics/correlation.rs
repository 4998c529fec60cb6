use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stream::{PhotonStream, TwoLevelEmitterParams};
use crate::error::{invalid, Error, Result};

const CHUNK: usize = 1 << 14;

/// All-pairs delay histogram between two detectors and its g2 normalization.
///
/// Bin `k` (for `k` in `-n..=n`) is centred on `τ = k · bin_width` and
/// collects delays `t_b - t_a` in `[(k - ½) w, (k + ½) w)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceHistogram {
    pub bin_width: f64,
    pub half_bins: usize,
    pub counts: Vec<u64>,
    pub g2: Vec<f64>,
    /// Expected counts per bin for uncorrelated streams.
    pub poisson_level: f64,
}

impl CoincidenceHistogram {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn tau(&self, bin: usize) -> f64 {
        (bin as f64 - self.half_bins as f64) * self.bin_width
    }

    pub fn taus(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.tau(i))
    }

    pub fn zero_bin(&self) -> usize {
        self.half_bins
    }

    pub fn g2_at_zero(&self) -> f64 {
        self.g2[self.half_bins]
    }

    /// Shot-noise standard error of each g2 value, `√counts / poisson_level`.
    pub fn g2_std_error(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| (c as f64).sqrt() / self.poisson_level)
            .collect()
    }
}

/// Correlate detector streams `a` and `b` within `±tau_max`.
///
/// `g2 = counts / (rate_a · rate_b · bin_width · T)` with `T` the shorter of
/// the two stream durations.
pub fn correlate(a: &PhotonStream, b: &PhotonStream, bin_width: f64, tau_max: f64) -> Result<CoincidenceHistogram> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(invalid("bin width must be positive"));
    }
    if !(tau_max >= bin_width && tau_max.is_finite()) {
        return Err(invalid("tau_max must be at least one bin width"));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyStream(format!(
            "cannot normalize g2 with {} and {} events",
            a.len(),
            b.len()
        )));
    }
    let half_bins = (tau_max / bin_width + 1e-9).floor() as usize;
    let nbins = 2 * half_bins + 1;
    let reach = (half_bins as f64 + 0.5) * bin_width;
    let tb = b.timestamps();

    let counts = a
        .timestamps()
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut hist = vec![0u64; nbins];
            let mut start = tb.partition_point(|&t| t < chunk[0] - reach);
            for &ta in chunk {
                while start < tb.len() && tb[start] < ta - reach {
                    start += 1;
                }
                for &t in &tb[start..] {
                    let delay = t - ta;
                    if delay >= reach {
                        break;
                    }
                    let k = (delay / bin_width + 0.5).floor() + half_bins as f64;
                    if k >= 0.0 && (k as usize) < nbins {
                        hist[k as usize] += 1;
                    }
                }
            }
            hist
        })
        .reduce(
            || vec![0u64; nbins],
            |mut x, y| {
                x.iter_mut().zip(y).for_each(|(xi, yi)| *xi += yi);
                x
            },
        );

    let duration = a.duration().min(b.duration());
    let poisson_level = a.len() as f64 * b.len() as f64 * bin_width / duration;
    let g2 = counts.iter().map(|&c| c as f64 / poisson_level).collect();
    Ok(CoincidenceHistogram {
        bin_width,
        half_bins,
        counts,
        g2,
        poisson_level,
    })
}

/// Closed-form g2(τ) of a two-level emitter with uncorrelated background.
///
/// The ideal emitter gives `1 - exp(-(pump + decay)|τ|)`; mixing in
/// background with signal fraction `ρ` gives `1 - ρ² + ρ² g2_ideal`.
pub fn g2_two_level_analytic(tau: f64, params: &TwoLevelEmitterParams) -> f64 {
    let rho = params.signal_fraction();
    let ideal = 1.0 - (-(params.pump_rate + params.decay_rate) * tau.abs()).exp();
    1.0 - rho * rho + rho * rho * ideal
}

/// [`g2_two_level_analytic`] averaged over a bin `[center - w/2, center + w/2]`.
pub fn g2_two_level_bin_average(center: f64, width: f64, params: &TwoLevelEmitterParams) -> f64 {
    let gamma = params.pump_rate + params.decay_rate;
    let rho = params.signal_fraction();
    // antiderivative of exp(-Γ|τ|)
    let f = |x: f64| x.signum() * (1.0 - (-gamma * x.abs()).exp()) / gamma;
    let mean_exp = (f(center + 0.5 * width) - f(center - 0.5 * width)) / width;
    1.0 - rho * rho * mean_exp
}
