use std::f64::consts::{PI, TAU};

use diamond_sil::dipole::{
    dipole_intensity_sp, pair_intensity_sp, DipoleAxis, Direction, EmitterModel, DIPOLE_PEAK,
};
use diamond_sil::efficiency::{sweep_na, CollectionTensor, QuadratureConfig};
use diamond_sil::interface::{
    refraction_angle, transmittance, CollectionOptics, Geometry, InterfaceConfig, Polarization, Refraction,
};
use diamond_sil::io;
use diamond_sil::photophysics::{
    fit_saturation, saturation_rate, Channel, PhotonStream, SaturationDataset, SaturationPoint,
};
use nalgebra::Vector3;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn direction() -> impl Strategy<Value = Direction> {
    (-1.0f64..=1.0, 0.0..TAU).prop_map(|(c, p)| Direction::new(c.acos(), p).unwrap())
}

fn unit_vector() -> impl Strategy<Value = Vector3<f64>> {
    (-1.0f64..=1.0, 0.0..TAU).prop_map(|(c, p)| {
        let s = (1.0 - c * c).sqrt();
        Vector3::new(s * p.cos(), s * p.sin(), c)
    })
}

fn dipole() -> impl Strategy<Value = DipoleAxis> {
    unit_vector().prop_map(|v| DipoleAxis::from_unnormalized(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn dipole_intensity_bounded(dir in direction(), d in dipole()) {
        let i = dipole_intensity_sp(&dir, &d);
        prop_assert!(i.s >= 0.0 && i.p >= 0.0);
        prop_assert!(i.total() <= DIPOLE_PEAK * (1.0 + 1e-12));
        let along = d.vector().dot(&dir.unit_vector());
        prop_assert!((i.total() - DIPOLE_PEAK * (1.0 - along * along)).abs() < 1e-12);
    }

    #[test]
    fn dipole_null_along_axis(d in dipole()) {
        let dir = Direction::from_vector(d.vector()).unwrap();
        prop_assert!(dipole_intensity_sp(&dir, &d).total().abs() < 1e-12);
    }

    #[test]
    fn pair_pattern_strain_invariant(dir in direction(), axis in unit_vector(), a in 0.0..TAU, b in 0.0..TAU) {
        let e1 = EmitterModel::from_axis(axis, a).unwrap();
        let e2 = EmitterModel::from_axis(axis, b).unwrap();
        let i1 = pair_intensity_sp(&dir, &e1);
        let i2 = pair_intensity_sp(&dir, &e2);
        prop_assert!((i1.s - i2.s).abs() < 1e-10);
        prop_assert!((i1.p - i2.p).abs() < 1e-10);
    }

    #[test]
    fn snell_round_trip(theta in 0.0..PI / 2.0) {
        let cfg = InterfaceConfig::planar();
        match refraction_angle(theta, &cfg).unwrap() {
            Refraction::Transmitted { theta_c } => {
                prop_assert!(theta < cfg.critical_angle());
                prop_assert!((2.4 * theta.sin() - theta_c.sin()).abs() < 1e-12);
                prop_assert!(theta_c >= theta);
            }
            Refraction::TotalInternalReflection => prop_assert!(theta >= cfg.critical_angle()),
        }
    }

    #[test]
    fn transmittance_in_unit_interval(theta in 0.0..PI / 2.0, nd in 1.0f64..4.0, sil in any::<bool>()) {
        let geometry = if sil { Geometry::HemisphericalSil } else { Geometry::Planar };
        let cfg = InterfaceConfig::new(nd, 1.0, geometry).unwrap();
        for pol in [Polarization::S, Polarization::P] {
            let t = transmittance(theta, pol, &cfg).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&t));
            if sil {
                prop_assert!((t - 4.0 * nd / (1.0 + nd).powi(2)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn saturation_model_monotone_concave(r in 1e3f64..1e7, s in 1.0f64..1e4, i in 0.0f64..1e5, h in 1.0f64..1e3) {
        let f = |x| saturation_rate(x, r, s).unwrap();
        prop_assert!(f(i + h) > f(i));
        prop_assert!(f(i + h) < r);
        if i >= h {
            prop_assert!(f(i + h) - f(i) <= f(i) - f(i - h) + 1e-9 * r);
        }
    }

    #[test]
    fn tensor_bounded(nd in 1.5f64..3.0, na in 0.05f64..1.0, sil in any::<bool>(), d in dipole()) {
        let geometry = if sil { Geometry::HemisphericalSil } else { Geometry::Planar };
        let cfg = InterfaceConfig::new(nd, 1.0, geometry).unwrap();
        let optics = CollectionOptics::new(na).unwrap();
        let t = CollectionTensor::new(&cfg, &optics, &QuadratureConfig::new(32, 64, 1e-6).unwrap()).unwrap();
        let eta = t.dipole_efficiency(&d);
        prop_assert!(eta >= 0.0);
        prop_assert!(eta <= 0.5 * cfg.normal_transmittance().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sweep_monotone_in_na(nd in 1.8f64..2.8, lo in 0.05f64..0.3, hi in 0.5f64..1.0) {
        let cfg = InterfaceConfig::new(nd, 1.0, Geometry::Planar).unwrap();
        let curve = sweep_na(&cfg, lo, hi, 6, &QuadratureConfig::new(48, 96, 1e-6).unwrap(), 4).unwrap();
        for w in curve.rows.windows(2) {
            prop_assert!(w[1].na > w[0].na);
            prop_assert!(w[1].eta_planar >= w[0].eta_planar);
            prop_assert!(w[1].eta_sil >= w[0].eta_sil);
            prop_assert!(w[1].eta_sil > w[1].eta_planar);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn saturation_fit_recovers_parameters(
        r_inf in 5e4f64..1e6,
        i_sat in 20.0f64..2000.0,
        rel in 0.005f64..0.03,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unit = Normal::new(0.0, 1.0).unwrap();
        let points = (0..15)
            .map(|k| {
                let i = i_sat * (0.1 + 10.0 * k as f64 / 14.0);
                let r = saturation_rate(i, r_inf, i_sat).unwrap();
                SaturationPoint { intensity_uw: i, rate_cps: r * (1.0 + rel * unit.sample(&mut rng)), rate_err_cps: Some(rel * r) }
            })
            .collect();
        let fit = fit_saturation(&SaturationDataset::new(points).unwrap()).unwrap();
        // 4σ per parameter keeps the false-failure rate over all cases well below 1e-3
        prop_assert!((fit.r_infinity - r_inf).abs() <= 4.0 * fit.r_infinity_err, "{fit:?}");
        prop_assert!((fit.i_sat - i_sat).abs() <= 4.0 * fit.i_sat_err, "{fit:?}");
    }
}

fn increasing_times() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-12f64..1e-3, 0..200).prop_map(|gaps| {
        gaps.iter()
            .scan(0.0, |t, g| {
                *t += g;
                Some(*t)
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stream_csv_round_trip(ts in increasing_times()) {
        let duration = ts.last().copied().unwrap_or(0.0) + 1e-3;
        let stream = PhotonStream::new(ts, duration, Channel::A).unwrap();
        let mut first = Vec::new();
        io::write_stream_csv(&stream, &mut first).unwrap();
        let back = io::read_stream_csv(first.as_slice(), Some(duration), Channel::A).unwrap();
        prop_assert_eq!(back.timestamps(), stream.timestamps());
        let mut second = Vec::new();
        io::write_stream_csv(&back, &mut second).unwrap();
        prop_assert_eq!(first, second);
    }

    #[test]
    fn histogram_csv_round_trip(rows in prop::collection::vec((-1e-6f64..1e-6, any::<u32>(), 0.0f64..10.0), 0..50)) {
        let rows: Vec<io::HistogramRow> = rows
            .into_iter()
            .map(|(tau_seconds, c, g2)| io::HistogramRow { tau_seconds, counts: c as u64, g2 })
            .collect();
        let mut first = Vec::new();
        io::write_histogram_csv(&rows, &mut first).unwrap();
        let back = io::read_histogram_csv(first.as_slice()).unwrap();
        let mut second = Vec::new();
        io::write_histogram_csv(&back, &mut second).unwrap();
        prop_assert_eq!(first, second);
    }

    #[test]
    fn saturation_csv_round_trip(raw in prop::collection::vec((1e-3f64..1e4, 0.0f64..1e7), 3..30), errors in any::<bool>()) {
        let points: Vec<SaturationPoint> = raw
            .iter()
            .map(|&(i, r)| SaturationPoint { intensity_uw: i, rate_cps: r, rate_err_cps: errors.then_some(1.0 + r * 0.01) })
            .collect();
        let data = SaturationDataset::new(points).unwrap();
        let mut first = Vec::new();
        io::write_saturation_csv(&data, &mut first).unwrap();
        let back = io::read_saturation_csv(first.as_slice()).unwrap();
        let mut second = Vec::new();
        io::write_saturation_csv(&back, &mut second).unwrap();
        prop_assert_eq!(first, second);
    }

    #[test]
    fn json_report_round_trip(eta in 0.0f64..1.0, na in 0.01f64..1.0, seed in any::<u64>()) {
        let report = io::Report {
            config: serde_json::json!({ "na": na, "seed": seed }),
            result: vec![eta, eta / 3.0],
            diagnostics: serde_json::json!({ "note": "x" }),
        };
        let mut first = Vec::new();
        io::write_json(&report, &mut first).unwrap();
        let back: serde_json::Value = io::read_json(first.as_slice()).unwrap();
        let mut second = Vec::new();
        io::write_json(&back, &mut second).unwrap();
        prop_assert_eq!(first, second);
    }
}
