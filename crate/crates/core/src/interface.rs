//! Refraction and power transmission at the diamond surface.
//!
//! Two geometries are modelled. In the planar case, a ray leaving the diamond
//! at internal angle `θ` refracts by Snell's law and is transmitted with the
//! Fresnel power transmittance for its polarization; beyond the critical
//! angle it is totally internally reflected. In the hemispherical SIL case the
//! emitter sits at the centre of the hemisphere, so every ray meets the
//! curved surface at normal incidence and is transmitted with the
//! normal-incidence value `4 n_c n_d / (n_c + n_d)²` for both polarizations.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const DIAMOND_INDEX: f64 = 2.4;
pub const AIR_INDEX: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    #[default]
    Planar,
    #[serde(rename = "sil")]
    HemisphericalSil,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    S,
    P,
}

/// Refractive indices on both sides of the exit surface, plus its shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceConfig {
    pub n_diamond: f64,
    pub n_collection: f64,
    pub geometry: Geometry,
}

impl Default for InterfaceConfig {
    fn default() -> Self {
        Self {
            n_diamond: DIAMOND_INDEX,
            n_collection: AIR_INDEX,
            geometry: Geometry::Planar,
        }
    }
}

impl InterfaceConfig {
    /// Requires `n_diamond >= n_collection > 0`. Equal indices describe an
    /// index-matched (reflection-free) interface.
    pub fn new(n_diamond: f64, n_collection: f64, geometry: Geometry) -> Result<Self> {
        if !(n_collection > 0.0) || !n_diamond.is_finite() || !(n_diamond >= n_collection) {
            return Err(invalid(format!(
                "refractive indices must satisfy n_d >= n_c > 0 (n_d = {n_diamond}, n_c = {n_collection})"
            )));
        }
        Ok(Self {
            n_diamond,
            n_collection,
            geometry,
        })
    }

    /// Diamond/air, flat surface.
    pub fn planar() -> Self {
        Self::default()
    }

    /// Diamond/air, hemispherical SIL.
    pub fn sil() -> Self {
        Self {
            geometry: Geometry::HemisphericalSil,
            ..Self::default()
        }
    }

    pub fn with_geometry(self, geometry: Geometry) -> Self {
        Self { geometry, ..self }
    }

    /// Critical angle `arcsin(n_c / n_d)`, in radians.
    pub fn critical_angle(&self) -> f64 {
        (self.n_collection / self.n_diamond).min(1.0).asin()
    }

    /// Normal-incidence power transmittance `4 n_c n_d / (n_c + n_d)²`.
    pub fn normal_transmittance(&self) -> f64 {
        let (nd, nc) = (self.n_diamond, self.n_collection);
        4.0 * nc * nd / (nc + nd).powi(2)
    }

    fn validate(&self) -> Result<()> {
        Self::new(self.n_diamond, self.n_collection, self.geometry).map(|_| ())
    }
}

/// Numerical aperture of the collection objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollectionOptics {
    pub na: f64,
}

impl CollectionOptics {
    pub fn new(na: f64) -> Result<Self> {
        if !(na > 0.0) || !na.is_finite() {
            return Err(invalid(format!("numerical aperture must be positive, got {na}")));
        }
        Ok(Self { na })
    }
}

/// Outcome of a ray reaching the planar surface from inside the diamond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Refraction {
    Transmitted { theta_c: f64 },
    TotalInternalReflection,
}

fn check_internal_angle(theta_i: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2).contains(&theta_i) {
        return Err(invalid(format!("internal angle {theta_i} outside [0, π/2]")));
    }
    Ok(())
}

/// Snell refraction at the planar surface.
pub fn refraction_angle(theta_i: f64, config: &InterfaceConfig) -> Result<Refraction> {
    config.validate()?;
    check_internal_angle(theta_i)?;
    if config.geometry != Geometry::Planar {
        return Err(invalid("refraction_angle applies to the planar geometry only"));
    }
    if theta_i >= config.critical_angle() {
        return Ok(Refraction::TotalInternalReflection);
    }
    let sin_c = config.n_diamond * theta_i.sin() / config.n_collection;
    Ok(Refraction::Transmitted {
        theta_c: sin_c.min(1.0).asin(),
    })
}

/// Largest internal emission angle that still reaches the objective.
///
/// Planar: `arcsin(NA / n_d)`. SIL: rays leave undeviated, so
/// `arcsin(NA / n_c)`.
pub fn max_internal_angle(optics: &CollectionOptics, config: &InterfaceConfig) -> Result<f64> {
    config.validate()?;
    if !(optics.na > 0.0) {
        return Err(invalid("numerical aperture must be positive"));
    }
    if optics.na > config.n_collection {
        return Err(invalid(format!(
            "NA {} exceeds collection-medium index {}",
            optics.na, config.n_collection
        )));
    }
    let ratio = match config.geometry {
        Geometry::Planar => optics.na / config.n_diamond,
        Geometry::HemisphericalSil => optics.na / config.n_collection,
    };
    Ok(ratio.asin())
}

/// Power transmittance for one polarization.
pub fn transmittance(theta_i: f64, polarization: Polarization, config: &InterfaceConfig) -> Result<f64> {
    config.validate()?;
    check_internal_angle(theta_i)?;
    let (ts, tp) = transmittance_sp(theta_i, config);
    Ok(match polarization {
        Polarization::S => ts,
        Polarization::P => tp,
    })
}

/// `(T_s, T_p)` without argument checks; callers guarantee a valid config
/// and `theta_i` in `[0, π/2]`.
pub(crate) fn transmittance_sp(theta_i: f64, config: &InterfaceConfig) -> (f64, f64) {
    let (nd, nc) = (config.n_diamond, config.n_collection);
    match config.geometry {
        Geometry::HemisphericalSil => {
            let t = config.normal_transmittance();
            (t, t)
        }
        Geometry::Planar => {
            let sin_c = nd * theta_i.sin() / nc;
            if theta_i >= config.critical_angle() || sin_c >= 1.0 {
                return (0.0, 0.0);
            }
            let cos_i = theta_i.cos();
            let cos_c = (1.0 - sin_c * sin_c).sqrt();
            let beam = (nc * cos_c) / (nd * cos_i);
            let ts = 2.0 * nd * cos_i / (nd * cos_i + nc * cos_c);
            let tp = 2.0 * nd * cos_i / (nd * cos_c + nc * cos_i);
            (beam * ts * ts, beam * tp * tp)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Textbook amplitude reflection coefficients; `R = r²`, `T = 1 - R`.
    fn reflectance_oracle(theta_i: f64, nd: f64, nc: f64) -> (f64, f64) {
        let sin_c = nd * theta_i.sin() / nc;
        let cos_c = (1.0 - sin_c * sin_c).sqrt();
        let cos_i = theta_i.cos();
        let rs = (nd * cos_i - nc * cos_c) / (nd * cos_i + nc * cos_c);
        let rp = (nc * cos_i - nd * cos_c) / (nc * cos_i + nd * cos_c);
        (rs * rs, rp * rp)
    }

    #[test]
    fn critical_angle_diamond_air() {
        let cfg = InterfaceConfig::planar();
        assert_relative_eq!(cfg.critical_angle().to_degrees(), 24.62, epsilon = 0.01);
        assert_relative_eq!(cfg.critical_angle(), 0.4298, epsilon = 1e-4);
    }

    #[test]
    fn refraction_examples() {
        let cfg = InterfaceConfig::planar();
        assert_eq!(
            refraction_angle(0.0, &cfg).unwrap(),
            Refraction::Transmitted { theta_c: 0.0 }
        );
        assert_eq!(
            refraction_angle(cfg.critical_angle(), &cfg).unwrap(),
            Refraction::TotalInternalReflection
        );
        assert_eq!(
            refraction_angle(30f64.to_radians(), &cfg).unwrap(),
            Refraction::TotalInternalReflection
        );
        assert!(refraction_angle(-0.1, &cfg).is_err());
        assert!(refraction_angle(1.6, &cfg).is_err());
        assert!(refraction_angle(0.1, &InterfaceConfig::sil()).is_err());
    }

    #[test]
    fn snell_round_trip() {
        let cfg = InterfaceConfig::planar();
        let tc = cfg.critical_angle();
        for k in 0..1000 {
            let ti = tc * k as f64 / 1000.0;
            let Refraction::Transmitted { theta_c } = refraction_angle(ti, &cfg).unwrap() else {
                panic!("unexpected TIR at {ti}");
            };
            let back = (cfg.n_collection * theta_c.sin() / cfg.n_diamond).asin();
            assert!((back - ti).abs() < 1e-12);
        }
    }

    #[test]
    fn max_angle_examples() {
        let optics = CollectionOptics::new(0.85).unwrap();
        let planar = max_internal_angle(&optics, &InterfaceConfig::planar()).unwrap();
        assert_relative_eq!(planar, 0.362_023, epsilon = 1e-6);
        assert_relative_eq!(planar.to_degrees(), 20.7424, epsilon = 1e-4);
        let sil = max_internal_angle(&optics, &InterfaceConfig::sil()).unwrap();
        assert_relative_eq!(sil, 1.01599, epsilon = 1e-5);
        let tiny = max_internal_angle(&CollectionOptics::new(1e-9).unwrap(), &InterfaceConfig::sil()).unwrap();
        assert!(tiny < 1e-8);
        assert!(max_internal_angle(&CollectionOptics { na: 1.2 }, &InterfaceConfig::planar()).is_err());
        assert!(CollectionOptics::new(0.0).is_err());
    }

    #[test]
    fn sil_transmittance_is_constant() {
        let cfg = InterfaceConfig::sil();
        for k in 0..=20 {
            let t = FRAC_PI_2 * k as f64 / 20.0;
            for pol in [Polarization::S, Polarization::P] {
                assert_relative_eq!(transmittance(t, pol, &cfg).unwrap(), 9.6 / 11.56, epsilon = 1e-15);
            }
        }
        assert_relative_eq!(cfg.normal_transmittance(), 0.83045, epsilon = 1e-5);
    }

    #[test]
    fn planar_matches_amplitude_oracle() {
        let cfg = InterfaceConfig::planar();
        assert_relative_eq!(transmittance(0.0, Polarization::S, &cfg).unwrap(), 0.830_449, epsilon = 1e-6);
        assert_relative_eq!(transmittance(0.0, Polarization::P, &cfg).unwrap(), 0.830_449, epsilon = 1e-6);
        let tc = cfg.critical_angle();
        for k in 0..200 {
            let ti = tc * k as f64 / 200.0;
            let (rs, rp) = reflectance_oracle(ti, 2.4, 1.0);
            let ts = transmittance(ti, Polarization::S, &cfg).unwrap();
            let tp = transmittance(ti, Polarization::P, &cfg).unwrap();
            assert!((ts + rs - 1.0).abs() < 1e-12, "s at {ti}");
            assert!((tp + rp - 1.0).abs() < 1e-12, "p at {ti}");
        }
    }

    #[test]
    fn planar_beyond_tir_is_opaque() {
        let cfg = InterfaceConfig::planar();
        for pol in [Polarization::S, Polarization::P] {
            assert_eq!(transmittance(26f64.to_radians(), pol, &cfg).unwrap(), 0.0);
            assert_eq!(transmittance(FRAC_PI_2, pol, &cfg).unwrap(), 0.0);
        }
        assert!(transmittance(2.0, Polarization::S, &cfg).is_err());
    }

    #[test]
    fn planar_s_transmittance_decreasing_and_bounded() {
        let cfg = InterfaceConfig::planar();
        let tc = cfg.critical_angle();
        let mut prev = f64::INFINITY;
        for k in 0..500 {
            let ti = tc * k as f64 / 500.0;
            let (ts, tp) = transmittance_sp(ti, &cfg);
            assert!((0.0..=1.0).contains(&ts) && (0.0..=1.0).contains(&tp));
            assert!(ts <= prev);
            prev = ts;
        }
    }

    #[test]
    fn index_matched_is_transparent() {
        let cfg = InterfaceConfig::new(1.5, 1.5, Geometry::Planar).unwrap();
        let (ts, tp) = transmittance_sp(0.7, &cfg);
        assert_relative_eq!(ts, 1.0, epsilon = 1e-14);
        assert_relative_eq!(tp, 1.0, epsilon = 1e-14);
        assert!(InterfaceConfig::new(1.0, 2.4, Geometry::Planar).is_err());
        assert!(InterfaceConfig::new(2.4, 0.0, Geometry::Planar).is_err());
    }
}
