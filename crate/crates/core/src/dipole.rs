//! Far-field radiation of electric dipoles, split into s and p polarization.
//!
//! Directions are given in the sample frame: `z` is the surface normal (the
//! optical axis of the collection objective), `theta` the polar angle from
//! `z`, and `phi` the azimuth about `z`. A single dipole radiates
//! `3/(8π) [1 - (k·d)²]` per steradian. That pattern is split into the
//! component along `ŝ = ẑ×k / |ẑ×k|` (perpendicular to the plane of
//! incidence) and along `p̂ = ŝ×k`.
//!
//! NV centres emit through two incoherent, orthogonal dipoles in the plane
//! perpendicular to the defect's `<111>` symmetry axis. [`EmitterModel`]
//! builds that pair for the four NV orientations of a `[100]` sample.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Peak of a normalized single-dipole pattern, `3 / (8π)`.
pub const DIPOLE_PEAK: f64 = 3.0 / (8.0 * PI);

const UNIT_NORM_TOL: f64 = 1e-12;

/// Emission direction in the sample frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    theta: f64,
    phi: f64,
}

impl Direction {
    /// `theta` must lie in `[0, π]`; `phi` is wrapped into `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(invalid(format!("polar angle {theta} outside [0, π]")));
        }
        if !phi.is_finite() {
            return Err(invalid("azimuth must be finite"));
        }
        Ok(Self {
            theta,
            phi: wrap_angle(phi),
        })
    }

    /// Direction of a (not necessarily normalized) nonzero vector.
    pub fn from_vector(v: &Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(invalid("direction vector must be nonzero and finite"));
        }
        let theta = (v.z / n).clamp(-1.0, 1.0).acos();
        Self::new(theta, v.y.atan2(v.x))
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn unit_vector(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }

    /// Unit vectors `(ŝ, p̂)` transverse to this direction.
    ///
    /// Along the optical axis `ŝ × k` is undefined; `ŝ = ŷ` is used there.
    pub fn polarization_basis(&self) -> (Vector3<f64>, Vector3<f64>) {
        let k = self.unit_vector();
        let zk = Vector3::z().cross(&k);
        let n = zk.norm();
        let s = if n < 1e-15 { Vector3::y() } else { zk / n };
        let p = s.cross(&k);
        (s, p)
    }
}

pub(crate) fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Unit vector giving a dipole's orientation in the sample frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleAxis(Vector3<f64>);

impl DipoleAxis {
    /// Rejects vectors whose norm differs from 1 by more than 1e-12.
    pub fn new(v: Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || (n - 1.0).abs() > UNIT_NORM_TOL {
            return Err(invalid(format!("dipole axis must be a unit vector, |d| = {n}")));
        }
        Ok(Self(v))
    }

    /// Normalizes any nonzero vector.
    pub fn from_unnormalized(v: Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(invalid("dipole axis must be nonzero and finite"));
        }
        Ok(Self(v / n))
    }

    /// Dipole lying in the surface plane at azimuth `phi`.
    pub fn in_plane(phi: f64) -> Self {
        Self(Vector3::new(phi.cos(), phi.sin(), 0.0))
    }

    /// Dipole at polar angle `theta` and azimuth `phi` in the sample frame.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self(Vector3::new(st * cp, st * sp, ct))
    }

    pub fn vector(&self) -> &Vector3<f64> {
        &self.0
    }
}

/// Intensity per steradian in each polarization.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpIntensity {
    pub s: f64,
    pub p: f64,
}

impl SpIntensity {
    pub fn total(&self) -> f64 {
        self.s + self.p
    }
}

/// How the total dipole intensity is divided between s and p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarizationSplit {
    /// Exact far-field projection: `I_s ∝ (d·ŝ)²`, `I_p ∝ (d·p̂)²`.
    #[default]
    FarField,
    /// Total pattern weighted by `sin²` / `cos²` of the azimuth measured
    /// from the dipole's in-plane projection. For an in-plane dipole this is
    /// `I_s = 3/(8π) [1 - sin²θ cos²φ] sin²φ` and the matching `cos²φ` term
    /// for `I_p`. A dipole along the normal radiates pure p.
    Azimuthal,
}

/// s/p intensity of a single normalized dipole, far-field split.
pub fn dipole_intensity_sp(direction: &Direction, dipole: &DipoleAxis) -> SpIntensity {
    dipole_intensity_sp_with(direction, dipole, PolarizationSplit::FarField)
}

pub fn dipole_intensity_sp_with(
    direction: &Direction,
    dipole: &DipoleAxis,
    split: PolarizationSplit,
) -> SpIntensity {
    let d = dipole.vector();
    match split {
        PolarizationSplit::FarField => {
            let (s, p) = direction.polarization_basis();
            SpIntensity {
                s: DIPOLE_PEAK * d.dot(&s).powi(2),
                p: DIPOLE_PEAK * d.dot(&p).powi(2),
            }
        }
        PolarizationSplit::Azimuthal => {
            let k = direction.unit_vector();
            let total = DIPOLE_PEAK * (1.0 - d.dot(&k).powi(2)).max(0.0);
            let transverse = d.x.hypot(d.y);
            if transverse < 1e-15 {
                return SpIntensity { s: 0.0, p: total };
            }
            let rel = direction.phi() - d.y.atan2(d.x);
            let (sr, cr) = rel.sin_cos();
            SpIntensity {
                s: total * sr * sr,
                p: total * cr * cr,
            }
        }
    }
}

/// Crystal face the sample surface is cut along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SurfaceOrientation {
    #[default]
    #[serde(rename = "[100]")]
    Cut100,
}

/// The four NV symmetry axes in a `[100]` sample frame, surface normal = `z`:
/// `[111]`, `[-1-11]`, `[1-11]`, `[-111]`.
pub const NV_AXES_100: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

/// An NV centre: symmetry axis, strain azimuth, and its two emission dipoles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterModel {
    nv_axis: Vector3<f64>,
    strain_azimuth: f64,
    dipole_pair: [DipoleAxis; 2],
}

impl EmitterModel {
    /// Builds the dipole pair perpendicular to `axis`.
    ///
    /// The reference pair is `u = ẑ×a / |ẑ×a|` (in the surface plane) and
    /// `v = a×u`; both are rotated about `a` by `strain_azimuth`. For an axis
    /// along `z` the reference is `(x̂, ŷ)`.
    pub fn from_axis(axis: Vector3<f64>, strain_azimuth: f64) -> Result<Self> {
        let a = *DipoleAxis::from_unnormalized(axis)?.vector();
        if !strain_azimuth.is_finite() {
            return Err(invalid("strain azimuth must be finite"));
        }
        let strain_azimuth = wrap_angle(strain_azimuth);
        let za = Vector3::z().cross(&a);
        let u = if za.norm() < 1e-12 {
            Vector3::x()
        } else {
            za.normalize()
        };
        let v = a.cross(&u);
        let (s, c) = strain_azimuth.sin_cos();
        let d1 = u * c + v * s;
        let d2 = v * c - u * s;
        Ok(Self {
            nv_axis: a,
            strain_azimuth,
            dipole_pair: [DipoleAxis(d1), DipoleAxis(d2)],
        })
    }

    pub fn nv_axis(&self) -> &Vector3<f64> {
        &self.nv_axis
    }

    pub fn strain_azimuth(&self) -> f64 {
        self.strain_azimuth
    }

    pub fn dipole_pair(&self) -> &[DipoleAxis; 2] {
        &self.dipole_pair
    }
}

/// NV emitter for one of the four `<111>` orientations in a `[100]` sample.
pub fn make_nv_emitter(
    surface: SurfaceOrientation,
    nv_axis_index: usize,
    strain_azimuth: f64,
) -> Result<EmitterModel> {
    match surface {
        SurfaceOrientation::Cut100 => {
            let axis = NV_AXES_100
                .get(nv_axis_index)
                .ok_or_else(|| invalid(format!("NV axis index {nv_axis_index} not in 0..4")))?;
            EmitterModel::from_axis(Vector3::from(*axis), strain_azimuth)
        }
    }
}

/// Mean s/p intensity of the two dipoles of `emitter`.
pub fn pair_intensity_sp(direction: &Direction, emitter: &EmitterModel) -> SpIntensity {
    pair_intensity_sp_with(direction, emitter, PolarizationSplit::FarField)
}

pub fn pair_intensity_sp_with(
    direction: &Direction,
    emitter: &EmitterModel,
    split: PolarizationSplit,
) -> SpIntensity {
    let [d1, d2] = emitter.dipole_pair();
    let a = dipole_intensity_sp_with(direction, d1, split);
    let b = dipole_intensity_sp_with(direction, d2, split);
    SpIntensity {
        s: 0.5 * (a.s + b.s),
        p: 0.5 * (a.p + b.p),
    }
}

/// Anything that radiates a normalized s/p angular pattern.
pub trait RadiationPattern: Sync {
    fn intensity_sp(&self, direction: &Direction) -> SpIntensity;

    /// Upper bound on `I_s + I_p` over all directions.
    fn peak_intensity(&self) -> f64;

    /// Integral of `I_s + I_p` over the full sphere.
    fn total_power(&self) -> f64 {
        1.0
    }

    fn averaging(&self) -> Averaging;
}

/// Which emitter model produced a pattern; echoed in results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Averaging {
    SingleDipole,
    DipolePair,
    Nv100Ensemble { strain_samples: usize },
    Isotropic,
}

impl RadiationPattern for DipoleAxis {
    fn intensity_sp(&self, direction: &Direction) -> SpIntensity {
        dipole_intensity_sp(direction, self)
    }

    fn peak_intensity(&self) -> f64 {
        DIPOLE_PEAK
    }

    fn averaging(&self) -> Averaging {
        Averaging::SingleDipole
    }
}

impl RadiationPattern for EmitterModel {
    fn intensity_sp(&self, direction: &Direction) -> SpIntensity {
        pair_intensity_sp(direction, self)
    }

    fn peak_intensity(&self) -> f64 {
        DIPOLE_PEAK
    }

    fn averaging(&self) -> Averaging {
        Averaging::DipolePair
    }
}

/// Uniform `1/(4π)` emitter with equal s and p content. Test pattern.
#[derive(Debug, Clone, Copy, Default)]
pub struct Isotropic;

impl RadiationPattern for Isotropic {
    fn intensity_sp(&self, _direction: &Direction) -> SpIntensity {
        let half = 0.125 / PI;
        SpIntensity { s: half, p: half }
    }

    fn peak_intensity(&self) -> f64 {
        0.25 / PI
    }

    fn averaging(&self) -> Averaging {
        Averaging::Isotropic
    }
}

/// Equal-weight mixture of NV emitters over the four `[100]` orientations
/// and `strain_samples` uniformly spaced strain azimuths.
#[derive(Debug, Clone)]
pub struct Nv100Ensemble {
    emitters: Vec<EmitterModel>,
    strain_samples: usize,
}

impl Nv100Ensemble {
    pub fn new(strain_samples: usize) -> Result<Self> {
        if strain_samples == 0 {
            return Err(invalid("need at least one strain sample"));
        }
        let mut emitters = Vec::with_capacity(4 * strain_samples);
        for index in 0..NV_AXES_100.len() {
            for k in 0..strain_samples {
                let azimuth = TAU * k as f64 / strain_samples as f64;
                emitters.push(make_nv_emitter(SurfaceOrientation::Cut100, index, azimuth)?);
            }
        }
        Ok(Self {
            emitters,
            strain_samples,
        })
    }

    pub fn emitters(&self) -> &[EmitterModel] {
        &self.emitters
    }
}

impl RadiationPattern for Nv100Ensemble {
    fn intensity_sp(&self, direction: &Direction) -> SpIntensity {
        let n = self.emitters.len() as f64;
        let sum = self
            .emitters
            .iter()
            .map(|e| pair_intensity_sp(direction, e))
            .fold(SpIntensity::default(), |acc, x| SpIntensity {
                s: acc.s + x.s,
                p: acc.p + x.p,
            });
        SpIntensity {
            s: sum.s / n,
            p: sum.p / n,
        }
    }

    fn peak_intensity(&self) -> f64 {
        DIPOLE_PEAK
    }

    fn averaging(&self) -> Averaging {
        Averaging::Nv100Ensemble {
            strain_samples: self.strain_samples,
        }
    }
}

/// Polar angle between every `[100]` NV axis and the surface normal,
/// `arccos(1/√3)`.
pub fn nv_polar_angle_100() -> f64 {
    (1.0 / 3f64.sqrt()).acos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::sphere_integral;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2 as DIAG;

    fn eqs_1_2(theta: f64, phi: f64) -> (f64, f64) {
        let common = DIPOLE_PEAK * (1.0 - theta.sin().powi(2) * phi.cos().powi(2));
        (common * phi.sin().powi(2), common * phi.cos().powi(2))
    }

    #[test]
    fn no_emission_along_dipole_axis() {
        let d = DipoleAxis::in_plane(0.0);
        let dir = Direction::new(PI / 2.0, 0.0).unwrap();
        let i = dipole_intensity_sp(&dir, &d).total();
        assert!(i.abs() < 1e-12, "{i}");
        let back = Direction::new(PI / 2.0, PI).unwrap();
        assert!(dipole_intensity_sp(&back, &d).total() < 1e-12);
    }

    #[test]
    fn normal_emission_of_in_plane_dipole() {
        let d = DipoleAxis::in_plane(0.3);
        let dir = Direction::new(0.0, 0.0).unwrap();
        assert_relative_eq!(dipole_intensity_sp(&dir, &d).total(), 3.0 / (8.0 * PI), epsilon = 1e-15);
        assert_relative_eq!(3.0 / (8.0 * PI), 0.11937, epsilon = 1e-5);
    }

    #[test]
    fn non_unit_dipole_rejected() {
        assert!(DipoleAxis::new(Vector3::new(1.0, 1.0, 0.0)).is_err());
        assert!(DipoleAxis::new(Vector3::new(1.0 + 1e-9, 0.0, 0.0)).is_err());
        assert!(DipoleAxis::new(Vector3::new(DIAG, DIAG, 0.0)).is_ok());
    }

    #[test]
    fn direction_validation() {
        assert!(Direction::new(-0.1, 0.0).is_err());
        assert!(Direction::new(PI + 1e-9, 0.0).is_err());
        assert!(Direction::new(0.1, f64::NAN).is_err());
        let d = Direction::new(0.5, -PI / 2.0).unwrap();
        assert_relative_eq!(d.phi(), 1.5 * PI);
        assert_eq!(Direction::new(0.5, TAU).unwrap().phi(), 0.0);
    }

    #[test]
    fn azimuthal_split_reproduces_in_plane_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = DipoleAxis::in_plane(0.0);
        for _ in 0..1000 {
            let theta = rng.random_range(0.0..PI);
            let phi = rng.random_range(0.0..TAU);
            let dir = Direction::new(theta, phi).unwrap();
            let got = dipole_intensity_sp_with(&dir, &d, PolarizationSplit::Azimuthal);
            let (s, p) = eqs_1_2(theta, phi);
            assert!((got.s - s).abs() < 1e-12 && (got.p - p).abs() < 1e-12);
        }
    }

    #[test]
    fn azimuth_is_measured_from_dipole_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let dphi = rng.random_range(0.0..TAU);
            let theta = rng.random_range(0.0..PI);
            let rel = rng.random_range(0.0..TAU);
            let d = DipoleAxis::in_plane(dphi);
            let dir = Direction::new(theta, dphi + rel).unwrap();
            let got = dipole_intensity_sp_with(&dir, &d, PolarizationSplit::Azimuthal);
            let (s, p) = eqs_1_2(theta, rel);
            assert!((got.s - s).abs() < 1e-12 && (got.p - p).abs() < 1e-12);
        }
    }

    #[test]
    fn splits_agree_on_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..500 {
            let d = DipoleAxis::from_angles(rng.random_range(0.0..PI), rng.random_range(0.0..TAU));
            let dir = Direction::new(rng.random_range(0.0..PI), rng.random_range(0.0..TAU)).unwrap();
            let a = dipole_intensity_sp_with(&dir, &d, PolarizationSplit::FarField);
            let b = dipole_intensity_sp_with(&dir, &d, PolarizationSplit::Azimuthal);
            let frame_free = DIPOLE_PEAK * (1.0 - d.vector().dot(&dir.unit_vector()).powi(2));
            assert!((a.total() - frame_free).abs() < 1e-14);
            assert!((b.total() - frame_free).abs() < 1e-14);
            assert!(a.s >= 0.0 && a.p >= 0.0 && b.s >= 0.0 && b.p >= 0.0);
        }
    }

    #[test]
    fn vertical_dipole_is_pure_p() {
        let d = DipoleAxis::from_angles(0.0, 0.0);
        let dir = Direction::new(1.0, 2.0).unwrap();
        for split in [PolarizationSplit::FarField, PolarizationSplit::Azimuthal] {
            let i = dipole_intensity_sp_with(&dir, &d, split);
            assert!(i.s.abs() < 1e-15);
            assert_relative_eq!(i.p, DIPOLE_PEAK * 1f64.sin().powi(2), epsilon = 1e-15);
        }
    }

    #[test]
    fn full_sphere_normalization() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..10 {
            let d = DipoleAxis::from_angles(rng.random_range(0.0..PI), rng.random_range(0.0..TAU));
            let total = sphere_integral(64, 64, |t, p| {
                dipole_intensity_sp(&Direction::new(t, p).unwrap(), &d).total()
            });
            assert_relative_eq!(total, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn nv_geometry_100() {
        for index in 0..4 {
            let e = make_nv_emitter(SurfaceOrientation::Cut100, index, 0.7).unwrap();
            assert_relative_eq!(e.nv_axis().z, 1.0 / 3f64.sqrt(), epsilon = 1e-15);
            assert_relative_eq!(e.nv_axis().z.acos().to_degrees(), 54.7356, epsilon = 1e-4);
            let [d1, d2] = e.dipole_pair();
            assert!(d1.vector().dot(d2.vector()).abs() < 1e-12);
            assert!(d1.vector().dot(e.nv_axis()).abs() < 1e-12);
            assert!(d2.vector().dot(e.nv_axis()).abs() < 1e-12);
            assert!((d1.vector().norm() - 1.0).abs() < 1e-12);
            assert!((d2.vector().norm() - 1.0).abs() < 1e-12);
        }
        assert!(make_nv_emitter(SurfaceOrientation::Cut100, 4, 0.0).is_err());
    }

    #[test]
    fn full_turn_strain_is_identity() {
        for index in 0..4 {
            let a = make_nv_emitter(SurfaceOrientation::Cut100, index, 0.0).unwrap();
            let b = make_nv_emitter(SurfaceOrientation::Cut100, index, TAU).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn pair_along_nv_axis_radiates_peak() {
        let e = make_nv_emitter(SurfaceOrientation::Cut100, 2, 1.1).unwrap();
        let dir = Direction::from_vector(e.nv_axis()).unwrap();
        // brute force: each dipole is perpendicular to the axis
        let brute: f64 = e
            .dipole_pair()
            .iter()
            .map(|d| DIPOLE_PEAK * (1.0 - d.vector().dot(&dir.unit_vector()).powi(2)))
            .sum::<f64>()
            / 2.0;
        let got = pair_intensity_sp(&dir, &e).total();
        assert_relative_eq!(got, brute, epsilon = 1e-14);
        assert_relative_eq!(got, DIPOLE_PEAK, epsilon = 1e-14);
    }

    #[test]
    fn ensemble_is_normalized_and_bounded() {
        let ens = Nv100Ensemble::new(3).unwrap();
        assert_eq!(ens.emitters().len(), 12);
        let total = sphere_integral(48, 48, |t, p| ens.intensity_sp(&Direction::new(t, p).unwrap()).total());
        assert_relative_eq!(total, 1.0, epsilon = 1e-10);
        assert!(Nv100Ensemble::new(0).is_err());
    }
}
