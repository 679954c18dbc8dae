use porefill::curve::PressureSaturationCurve;
use porefill::unitbridge::{build_units, calibrate_pnm, convert_curve, rms_mismatch};
use proptest::prelude::*;
use proptest::strategy::ValueTree;

/// Ascending staircase with distinct pressures of one sign.
fn staircase() -> impl Strategy<Value = PressureSaturationCurve> {
    (
        prop::collection::vec((1.0f64..50.0, 0.01f64..0.3), 3..12),
        10.0f64..500.0,
        prop::bool::ANY,
    )
        .prop_map(|(steps, start, negative)| {
            let mut p = start;
            let mut s = 0.0;
            let mut pts = Vec::new();
            for (dp, ds) in steps {
                p += dp;
                s = (s + ds).min(1.0);
                pts.push((p, s));
            }
            if negative {
                // suction branch: pressures rise towards zero
                pts = pts.iter().rev().map(|&(p, _)| -p).zip(pts.iter().map(|q| q.1)).collect();
            }
            PressureSaturationCurve::new(pts).unwrap()
        })
        .prop_filter("needs saturation spread", |c| {
            let s: Vec<f64> = c.saturations().collect();
            s.last().unwrap() - s.first().unwrap() >= 0.35
        })
}

#[test]
fn ten_scaled_curves_recover_half() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for _ in 0..10 {
        let c = staircase().new_tree(&mut runner).unwrap().current();
        let k = calibrate_pnm(&c, &c.scale_pressure(2.0)).unwrap().pressure_scale_correction;
        assert!((k - 0.5).abs() <= 0.005, "k = {k}");
    }
}

proptest! {
    #[test]
    fn scaled_copies_calibrate_back(c in staircase(), f in 0.05f64..20.0) {
        let cal = calibrate_pnm(&c, &c.scale_pressure(f)).unwrap();
        prop_assert!((cal.pressure_scale_correction * f - 1.0).abs() <= 0.01);
        prop_assert!(cal.residual <= 0.02);
    }

    #[test]
    fn optimum_beats_every_probe(a in staircase(), b in staircase()) {
        if let Ok(cal) = calibrate_pnm(&a, &b) {
            let pts = a.points();
            let (lo, hi) = (pts[0].0, pts[pts.len() - 1].0);
            for i in 0..64 {
                let k = (0.01f64.ln() + (100f64.ln() - 0.01f64.ln()) * i as f64 / 63.0).exp();
                prop_assert!(cal.residual <= rms_mismatch(&a, &b, k, lo, hi) + 1e-12);
            }
        }
    }

    #[test]
    fn unit_round_trips(
        d50 in 1.0f64..100.0, d50_lat in 4.0f64..40.0,
        sigma in 0.01f64..0.1, sigma_lat in 0.05f64..0.5,
        nu in 1e-7f64..1e-5, tau in 0.6f64..2.0, p in -1.0f64..1.0,
    ) {
        let nu_lat = (tau - 0.5) / 3.0;
        let u = build_units(d50, d50_lat, sigma, sigma_lat, nu, nu_lat).unwrap();
        prop_assert!((u.pressure_to_lattice(u.pressure_to_physical(p)) - p).abs() <= 1e-12 * p.abs().max(1.0));
        prop_assert!((u.length_to_physical(d50_lat) - d50 * 1e-6).abs() <= 1e-15);
        prop_assert!((u.time_to_lattice(u.time_to_physical(7.0)) - 7.0).abs() <= 1e-9);
        // Laplace consistency: sigma_lat / R_lat maps to sigma / R
        let r_lat = d50_lat / 2.0;
        let phys = u.pressure_to_physical(sigma_lat / r_lat);
        prop_assert!((phys - sigma / (r_lat * u.dx)).abs() <= 1e-9 * phys);
        let c = PressureSaturationCurve::new(vec![(p, 0.1), (p + 1.0, 0.9)]).unwrap();
        let conv = convert_curve(&c, &u);
        prop_assert_eq!(conv.saturations().collect::<Vec<_>>(), vec![0.1, 0.9]);
    }
}
