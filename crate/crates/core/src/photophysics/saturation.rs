use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Two-level saturation law `R = R∞ · I / (I + I_sat)`.
pub fn saturation_rate(intensity: f64, r_inf: f64, i_sat: f64) -> Result<f64> {
    if !(intensity >= 0.0) || !(r_inf > 0.0) || !(i_sat > 0.0) {
        return Err(invalid(format!(
            "saturation model needs I >= 0, R∞ > 0, I_sat > 0 (got {intensity}, {r_inf}, {i_sat})"
        )));
    }
    Ok(r_inf * intensity / (intensity + i_sat))
}

/// One measured point: laser intensity in µW, count rate in counts/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationPoint {
    pub intensity_uw: f64,
    pub rate_cps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_err_cps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SaturationDataset {
    pub points: Vec<SaturationPoint>,
}

impl SaturationDataset {
    pub fn new(points: Vec<SaturationPoint>) -> Result<Self> {
        for p in &points {
            if !(p.intensity_uw >= 0.0 && p.intensity_uw.is_finite()) {
                return Err(invalid(format!("intensity must be finite and >= 0, got {}", p.intensity_uw)));
            }
            if !p.rate_cps.is_finite() {
                return Err(invalid("count rate must be finite"));
            }
            if let Some(e) = p.rate_err_cps {
                if !(e > 0.0 && e.is_finite()) {
                    return Err(invalid(format!("rate uncertainty must be positive, got {e}")));
                }
            }
        }
        Ok(Self { points })
    }

    /// Points from the model with no noise.
    pub fn synthetic(intensities: &[f64], r_inf: f64, i_sat: f64) -> Result<Self> {
        let points = intensities
            .iter()
            .map(|&i| {
                Ok(SaturationPoint {
                    intensity_uw: i,
                    rate_cps: saturation_rate(i, r_inf, i_sat)?,
                    rate_err_cps: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }

    fn has_errors(&self) -> bool {
        self.points.iter().all(|p| p.rate_err_cps.is_some())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Adds a term `c · I` for uncorrected linear background.
    pub linear_background: bool,
    pub max_iterations: usize,
    pub step_tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            linear_background: false,
            max_iterations: 200,
            step_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationFit {
    pub r_infinity: f64,
    pub i_sat: f64,
    pub r_infinity_err: f64,
    pub i_sat_err: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub background_slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub background_slope_err: Option<f64>,
    /// Parameter covariance, row-major, in the order `(R∞, I_sat[, c])`.
    pub covariance: Vec<Vec<f64>>,
    /// Unweighted residual sum of squares.
    pub rss: f64,
    pub chi_squared: f64,
    pub dof: usize,
    pub iterations: usize,
    /// `rate - model` for every input point.
    pub residuals: Vec<f64>,
}

impl SaturationFit {
    pub fn rate_at(&self, intensity: f64) -> f64 {
        self.r_infinity * intensity / (intensity + self.i_sat) + self.background_slope.unwrap_or(0.0) * intensity
    }

    fn check_usable(&self) -> Result<()> {
        let ok = |x: f64| x > 0.0 && x.is_finite();
        if !ok(self.r_infinity) || !ok(self.i_sat) {
            return Err(Error::FitFailure(format!(
                "fit has non-physical parameters R∞ = {}, I_sat = {}",
                self.r_infinity, self.i_sat
            )));
        }
        Ok(())
    }
}

/// [`fit_saturation_with`] using default options.
pub fn fit_saturation(data: &SaturationDataset) -> Result<SaturationFit> {
    fit_saturation_with(data, &FitOptions::default())
}

fn model(params: &[f64], intensity: f64) -> f64 {
    let base = params[0] * intensity / (intensity + params[1]);
    base + params.get(2).map_or(0.0, |c| c * intensity)
}

/// Weighted least-squares fit of the saturation law by damped Gauss–Newton
/// (Levenberg–Marquardt).
///
/// Weights are `1/σ_i` when every point carries an uncertainty; parameter
/// errors then come straight from the inverse normal matrix. Without
/// uncertainties, unit weights are used and the covariance is scaled by the
/// reduced χ².
pub fn fit_saturation_with(data: &SaturationDataset, options: &FitOptions) -> Result<SaturationFit> {
    let pts = &data.points;
    if pts.len() < 3 {
        return Err(invalid(format!("saturation fit needs at least 3 points, got {}", pts.len())));
    }
    let mut sorted: Vec<_> = pts.iter().collect();
    sorted.sort_by(|a, b| a.intensity_uw.total_cmp(&b.intensity_uw));
    let mut distinct: Vec<f64> = sorted.iter().map(|p| p.intensity_uw).collect();
    distinct.dedup();
    let n_params = if options.linear_background { 3 } else { 2 };
    if distinct.len() < n_params.max(3) {
        return Err(Error::FitFailure(format!(
            "degenerate data: only {} distinct intensities",
            distinct.len()
        )));
    }
    if sorted.windows(2).all(|w| w[1].rate_cps <= w[0].rate_cps) {
        return Err(Error::FitFailure("degenerate data: rate never increases with intensity".into()));
    }

    let weighted = data.has_errors();
    let sigma: Vec<f64> = pts
        .iter()
        .map(|p| if weighted { p.rate_err_cps.unwrap() } else { 1.0 })
        .collect();
    let max_rate = pts.iter().map(|p| p.rate_cps).fold(f64::NEG_INFINITY, f64::max);
    let r0 = 1.2 * max_rate;
    let i0 = pts
        .iter()
        .min_by(|a, b| (a.rate_cps - 0.5 * r0).abs().total_cmp(&(b.rate_cps - 0.5 * r0).abs()))
        .map(|p| p.intensity_uw)
        .filter(|&i| i > 0.0)
        .unwrap_or(distinct[distinct.len() / 2].max(f64::MIN_POSITIVE));
    let mut params = vec![r0, i0];
    if options.linear_background {
        params.push(0.0);
    }

    let residuals = |p: &[f64]| -> DVector<f64> {
        DVector::from_iterator(pts.len(), pts.iter().zip(&sigma).map(|(pt, s)| (pt.rate_cps - model(p, pt.intensity_uw)) / s))
    };
    let jacobian = |p: &[f64]| -> DMatrix<f64> {
        DMatrix::from_fn(pts.len(), n_params, |i, j| {
            let x = pts[i].intensity_uw;
            let d = match j {
                0 => x / (x + p[1]),
                1 => -p[0] * x / (x + p[1]).powi(2),
                _ => x,
            };
            d / sigma[i]
        })
    };

    let mut r = residuals(&params);
    let mut chi = r.norm_squared();
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = chi == 0.0;
    while !converged {
        if iterations >= options.max_iterations {
            return Err(Error::FitFailure(format!(
                "no convergence after {} iterations (R∞ = {}, I_sat = {})",
                options.max_iterations, params[0], params[1]
            )));
        }
        iterations += 1;
        let j = jacobian(&params);
        let a = j.transpose() * &j;
        let g = j.transpose() * &r;
        loop {
            let mut damped = a.clone();
            for k in 0..n_params {
                damped[(k, k)] += lambda * a[(k, k)].max(f64::MIN_POSITIVE);
            }
            let step = damped.lu().solve(&g);
            let candidate: Option<Vec<f64>> = step
                .as_ref()
                .map(|s| params.iter().zip(s.iter()).map(|(p, d)| p + d).collect());
            let accepted = candidate.filter(|c| c[0] > 0.0 && c[1] > 0.0).and_then(|c| {
                let rc = residuals(&c);
                let chi_c = rc.norm_squared();
                (chi_c.is_finite() && chi_c <= chi).then_some((c, rc, chi_c))
            });
            match accepted {
                Some((c, rc, chi_c)) => {
                    let small = c
                        .iter()
                        .zip(&params)
                        .all(|(new, old)| (new - old).abs() <= options.step_tolerance * (old.abs() + options.step_tolerance));
                    params = c;
                    r = rc;
                    chi = chi_c;
                    lambda = (lambda / 10.0).max(1e-12);
                    converged = small || chi == 0.0;
                    break;
                }
                None => {
                    lambda *= 10.0;
                    if lambda > 1e16 {
                        // no downhill step left: at the minimum to machine precision
                        converged = true;
                        break;
                    }
                }
            }
        }
    }

    let j = jacobian(&params);
    let normal = j.transpose() * &j;
    let inverse = normal
        .try_inverse()
        .ok_or_else(|| Error::FitFailure("singular normal matrix at the solution".into()))?;
    let dof = pts.len().saturating_sub(n_params);
    let scale = if weighted { 1.0 } else { chi / dof.max(1) as f64 };
    let cov = inverse * scale;
    let err = |k: usize| cov[(k, k)].max(0.0).sqrt();

    let fit = SaturationFit {
        r_infinity: params[0],
        i_sat: params[1],
        r_infinity_err: err(0),
        i_sat_err: err(1),
        background_slope: options.linear_background.then(|| params[2]),
        background_slope_err: options.linear_background.then(|| err(2)),
        covariance: (0..n_params).map(|i| (0..n_params).map(|k| cov[(i, k)]).collect()).collect(),
        rss: pts.iter().map(|p| (p.rate_cps - model(&params, p.intensity_uw)).powi(2)).sum(),
        chi_squared: chi,
        dof,
        iterations,
        residuals: pts.iter().map(|p| p.rate_cps - model(&params, p.intensity_uw)).collect(),
    };
    fit.check_usable()?;
    Ok(fit)
}

/// A ratio with its propagated one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub value: f64,
    pub uncertainty: f64,
}

fn ratio(num: f64, num_err: f64, den: f64, den_err: f64) -> Ratio {
    let value = num / den;
    Ratio {
        value,
        uncertainty: value * ((num_err / num).powi(2) + (den_err / den).powi(2)).sqrt(),
    }
}

/// `R∞(a) / R∞(b)`: how much brighter emitter `a` is at saturation.
pub fn enhancement_ratio(fit_a: &SaturationFit, fit_b: &SaturationFit) -> Result<Ratio> {
    fit_a.check_usable()?;
    fit_b.check_usable()?;
    Ok(ratio(fit_a.r_infinity, fit_a.r_infinity_err, fit_b.r_infinity, fit_b.r_infinity_err))
}

/// `I_sat(b) / I_sat(a)`: the factor by which `a` saturates at lower power.
pub fn saturation_intensity_reduction(fit_a: &SaturationFit, fit_b: &SaturationFit) -> Result<Ratio> {
    fit_a.check_usable()?;
    fit_b.check_usable()?;
    Ok(ratio(fit_b.i_sat, fit_b.i_sat_err, fit_a.i_sat, fit_a.i_sat_err))
}
