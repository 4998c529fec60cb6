//! Fraction of emitted photons that reach the collection objective.
//!
//! The collected fraction is
//!
//! ```text
//! η = ∫₀^θm ∫₀^2π [I_s(θ,φ) T_s(θ) + I_p(θ,φ) T_p(θ)] sinθ dφ dθ
//! ```
//!
//! with `θm` the largest internal angle accepted by the objective (see
//! [`max_internal_angle`]). [`efficiency`] evaluates it with Gauss–Legendre
//! nodes in `θ` and the periodic trapezoid rule in `φ`.
//! [`efficiency_monte_carlo`] estimates the same number by tracing
//! individual photons, and serves as an independent check.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dipole::{Averaging, DipoleAxis, Direction, EmitterModel, Nv100Ensemble, RadiationPattern, DIPOLE_PEAK};
use crate::error::{invalid, Result};
use crate::interface::{max_internal_angle, transmittance_sp, CollectionOptics, Geometry, InterfaceConfig};
use crate::quadrature::{gauss_legendre_interval, periodic_trapezoid};

pub const MIN_MONTE_CARLO_RAYS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub n_theta: usize,
    pub n_phi: usize,
    pub target_rel_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            n_theta: 128,
            n_phi: 256,
            target_rel_tol: 1e-6,
        }
    }
}

impl QuadratureConfig {
    pub fn new(n_theta: usize, n_phi: usize, target_rel_tol: f64) -> Result<Self> {
        let cfg = Self {
            n_theta,
            n_phi,
            target_rel_tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.n_theta < 8 || self.n_phi < 8 {
            return Err(invalid(format!(
                "quadrature needs at least 8 nodes per axis (n_theta = {}, n_phi = {})",
                self.n_theta, self.n_phi
            )));
        }
        if !(self.target_rel_tol > 0.0) {
            return Err(invalid("target_rel_tol must be positive"));
        }
        Ok(())
    }

    /// Same rule with twice the nodes on both axes.
    pub fn refined(&self) -> Self {
        Self {
            n_theta: 2 * self.n_theta,
            n_phi: 2 * self.n_phi,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub n_rays: u64,
    pub seed: u64,
    /// Number of independent RNG substreams; results are reproducible for a
    /// fixed `(seed, partitions)`.
    pub partitions: usize,
}

impl MonteCarloConfig {
    pub const DEFAULT_PARTITIONS: usize = 16;

    pub fn new(n_rays: u64, seed: u64) -> Result<Self> {
        let cfg = Self {
            n_rays,
            seed,
            partitions: Self::DEFAULT_PARTITIONS,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.n_rays < MIN_MONTE_CARLO_RAYS {
            return Err(invalid(format!(
                "Monte Carlo needs at least {MIN_MONTE_CARLO_RAYS} rays, got {}",
                self.n_rays
            )));
        }
        if self.partitions == 0 {
            return Err(invalid("Monte Carlo needs at least one partition"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    MonteCarlo,
}

/// Inputs that produced an [`EfficiencyResult`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencySetup {
    pub interface: InterfaceConfig,
    pub na: f64,
    pub theta_max: f64,
    pub averaging: Averaging,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyResult {
    pub eta: f64,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    pub setup: EfficiencySetup,
}

/// Collected fraction of `pattern` by quadrature.
pub fn efficiency<P: RadiationPattern + ?Sized>(
    pattern: &P,
    interface: &InterfaceConfig,
    optics: &CollectionOptics,
    quad: &QuadratureConfig,
) -> Result<EfficiencyResult> {
    quad.validate()?;
    let theta_max = max_internal_angle(optics, interface)?;
    let eta = integrate_cone(pattern, interface, theta_max, quad);
    Ok(EfficiencyResult {
        eta,
        method: Method::Quadrature,
        std_error: None,
        setup: EfficiencySetup {
            interface: *interface,
            na: optics.na,
            theta_max,
            averaging: pattern.averaging(),
            quadrature: Some(*quad),
            monte_carlo: None,
        },
    })
}

fn integrate_cone<P: RadiationPattern + ?Sized>(
    pattern: &P,
    interface: &InterfaceConfig,
    theta_max: f64,
    quad: &QuadratureConfig,
) -> f64 {
    let (thetas, weights) = gauss_legendre_interval(quad.n_theta, 0.0, theta_max);
    let (phis, phi_weight) = periodic_trapezoid(quad.n_phi);
    thetas
        .iter()
        .zip(&weights)
        .map(|(&theta, &w)| {
            let (ts, tp) = transmittance_sp(theta, interface);
            let ring: f64 = phis
                .iter()
                .map(|&phi| {
                    let dir = Direction::new(theta, phi).expect("quadrature node in range");
                    let i = pattern.intensity_sp(&dir);
                    i.s * ts + i.p * tp
                })
                .sum();
            w * theta.sin() * ring * phi_weight
        })
        .sum()
}

/// Transmitted-power tensor of the collection cone.
///
/// With the far-field s/p split, a dipole `d` contributes
/// `(3/8π) [(d·ŝ)² T_s + (d·p̂)² T_p]` at every direction, so its collected
/// fraction is the quadratic form `dᵀ M d` with
/// `M = (3/8π) ∫ (T_s ŝŝᵀ + T_p p̂p̂ᵀ) dΩ` over the cone. Building `M` once
/// makes each additional dipole cost a single 3×3 product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectionTensor {
    matrix: Matrix3<f64>,
    theta_max: f64,
}

impl CollectionTensor {
    pub fn new(interface: &InterfaceConfig, optics: &CollectionOptics, quad: &QuadratureConfig) -> Result<Self> {
        quad.validate()?;
        let theta_max = max_internal_angle(optics, interface)?;
        let (thetas, weights) = gauss_legendre_interval(quad.n_theta, 0.0, theta_max);
        let (phis, phi_weight) = periodic_trapezoid(quad.n_phi);
        let mut matrix = Matrix3::zeros();
        for (&theta, &w) in thetas.iter().zip(&weights) {
            let (ts, tp) = transmittance_sp(theta, interface);
            let mut ring = Matrix3::zeros();
            for &phi in &phis {
                let (s, p) = Direction::new(theta, phi)?.polarization_basis();
                ring += s * s.transpose() * ts + p * p.transpose() * tp;
            }
            matrix += ring * (w * theta.sin() * phi_weight);
        }
        Ok(Self {
            matrix: matrix * DIPOLE_PEAK,
            theta_max,
        })
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    pub fn dipole_efficiency(&self, dipole: &DipoleAxis) -> f64 {
        let d = dipole.vector();
        d.dot(&(self.matrix * d))
    }

    pub fn pair_efficiency(&self, emitter: &EmitterModel) -> f64 {
        let [a, b] = emitter.dipole_pair();
        0.5 * (self.dipole_efficiency(a) + self.dipole_efficiency(b))
    }
}

/// Relative change of η when the quadrature grid is doubled on both axes.
pub fn quadrature_convergence<P: RadiationPattern + ?Sized>(
    pattern: &P,
    interface: &InterfaceConfig,
    optics: &CollectionOptics,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let coarse = efficiency(pattern, interface, optics, quad)?.eta;
    let fine = efficiency(pattern, interface, optics, &quad.refined())?.eta;
    if fine == 0.0 {
        return Ok((coarse - fine).abs());
    }
    Ok(((coarse - fine) / fine).abs())
}

/// η averaged over the four `<111>` NV orientations of a `[100]` sample,
/// both dipoles of each NV, and `n_strain_samples` evenly spaced strain
/// azimuths.
pub fn efficiency_100_averaged(
    interface: &InterfaceConfig,
    optics: &CollectionOptics,
    quad: &QuadratureConfig,
    n_strain_samples: usize,
) -> Result<EfficiencyResult> {
    let ensemble = Nv100Ensemble::new(n_strain_samples)?;
    let tensor = CollectionTensor::new(interface, optics, quad)?;
    let theta_max = tensor.theta_max();
    let etas: Vec<f64> = ensemble.emitters().iter().map(|e| tensor.pair_efficiency(e)).collect();
    let eta = etas.iter().sum::<f64>() / etas.len() as f64;
    Ok(EfficiencyResult {
        eta,
        method: Method::Quadrature,
        std_error: None,
        setup: EfficiencySetup {
            interface: *interface,
            na: optics.na,
            theta_max,
            averaging: ensemble.averaging(),
            quadrature: Some(*quad),
            monte_carlo: None,
        },
    })
}

/// Monte Carlo estimate of η.
///
/// Each ray draws a direction from the emission pattern (uniform proposals on
/// the sphere, rejected against the pattern's peak), picks s or p with
/// probability `I_s / (I_s + I_p)`, and is transmitted with probability
/// `T(θ, pol)` if it falls inside the collection cone. η is the hit fraction
/// times the pattern's total power; the standard error is binomial.
pub fn efficiency_monte_carlo<P: RadiationPattern + ?Sized>(
    pattern: &P,
    interface: &InterfaceConfig,
    optics: &CollectionOptics,
    mc: &MonteCarloConfig,
) -> Result<EfficiencyResult> {
    mc.validate()?;
    let theta_max = max_internal_angle(optics, interface)?;
    let parts = mc.partitions as u64;
    let hits: u64 = (0..parts)
        .into_par_iter()
        .map(|k| {
            let rays = mc.n_rays / parts + u64::from(k < mc.n_rays % parts);
            let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
            rng.set_stream(k);
            trace_rays(pattern, interface, theta_max, rays, &mut rng)
        })
        .sum();
    let n = mc.n_rays as f64;
    let frac = hits as f64 / n;
    let norm = pattern.total_power();
    Ok(EfficiencyResult {
        eta: norm * frac,
        method: Method::MonteCarlo,
        std_error: Some(norm * (frac * (1.0 - frac) / n).sqrt()),
        setup: EfficiencySetup {
            interface: *interface,
            na: optics.na,
            theta_max,
            averaging: pattern.averaging(),
            quadrature: None,
            monte_carlo: Some(*mc),
        },
    })
}

fn trace_rays<P: RadiationPattern + ?Sized>(
    pattern: &P,
    interface: &InterfaceConfig,
    theta_max: f64,
    rays: u64,
    rng: &mut ChaCha8Rng,
) -> u64 {
    let peak = pattern.peak_intensity();
    let mut hits = 0;
    for _ in 0..rays {
        let (dir, intensity) = loop {
            let cos_t = 1.0 - 2.0 * rng.random::<f64>();
            let phi = 2.0 * PI * rng.random::<f64>();
            let dir = Direction::new(cos_t.clamp(-1.0, 1.0).acos(), phi).expect("sampled direction in range");
            let i = pattern.intensity_sp(&dir);
            if rng.random::<f64>() * peak < i.total() {
                break (dir, i);
            }
        };
        let is_s = rng.random::<f64>() * intensity.total() < intensity.s;
        let survive: f64 = rng.random();
        if dir.theta() > theta_max {
            continue;
        }
        let (ts, tp) = transmittance_sp(dir.theta(), interface);
        if survive < if is_s { ts } else { tp } {
            hits += 1;
        }
    }
    hits
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub na: f64,
    pub eta_planar: f64,
    pub eta_sil: f64,
    /// `eta_sil / eta_planar`; absent when the planar value is zero.
    pub ratio: Option<f64>,
}

/// Collection efficiency versus NA for both geometries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyCurve {
    pub rows: Vec<CurveRow>,
}

impl EfficiencyCurve {
    pub fn from_rows(rows: Vec<CurveRow>) -> Result<Self> {
        if rows.windows(2).any(|w| !(w[0].na < w[1].na)) {
            return Err(invalid("curve NA samples must be strictly increasing"));
        }
        Ok(Self { rows })
    }
}

/// Sweep NA over `steps` evenly spaced values in `[na_min, na_max]`.
///
/// `indices` supplies `n_d` and `n_c`; its geometry is ignored, both
/// geometries are evaluated at every sample.
pub fn sweep_na(
    indices: &InterfaceConfig,
    na_min: f64,
    na_max: f64,
    steps: usize,
    quad: &QuadratureConfig,
    n_strain_samples: usize,
) -> Result<EfficiencyCurve> {
    if steps < 2 {
        return Err(invalid(format!("sweep needs at least 2 steps, got {steps}")));
    }
    if !(na_min > 0.0 && na_min < na_max && na_max <= indices.n_collection) {
        return Err(invalid(format!(
            "NA range must satisfy 0 < na_min < na_max <= n_c (got [{na_min}, {na_max}], n_c = {})",
            indices.n_collection
        )));
    }
    let planar = indices.with_geometry(Geometry::Planar);
    let sil = indices.with_geometry(Geometry::HemisphericalSil);
    let rows = (0..steps)
        .map(|k| {
            // rounded to 12 decimals so decimal grids stay on decimal values
            let na = if k + 1 == steps {
                na_max
            } else {
                let raw = na_min + (na_max - na_min) * k as f64 / (steps - 1) as f64;
                (raw * 1e12).round() / 1e12
            };
            let optics = CollectionOptics::new(na)?;
            let eta_planar = efficiency_100_averaged(&planar, &optics, quad, n_strain_samples)?.eta;
            let eta_sil = efficiency_100_averaged(&sil, &optics, quad, n_strain_samples)?.eta;
            let ratio = (eta_planar > 0.0).then(|| eta_sil / eta_planar);
            Ok(CurveRow {
                na,
                eta_planar,
                eta_sil,
                ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EfficiencyCurve::from_rows(rows)
}
