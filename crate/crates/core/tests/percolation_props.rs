mod common;

use common::{build, oracle, quantized, blueprint, INLET, OUTLET};
use porefill::netextract::PoreNetwork;
use porefill::pnmperc::{invasion_percolation, FluidPair, PercolationResult};
use proptest::prelude::*;

fn run(net: &PoreNetwork, theta: f64, trapping: bool) -> PercolationResult {
    invasion_percolation(net, &FluidPair::new(0.05, theta).unwrap(), INLET, OUTLET, trapping).unwrap()
}

fn saturation_at(res: &PercolationResult, p: f64) -> f64 {
    res.events
        .iter()
        .filter(|e| e.applied_pressure <= p)
        .map(|e| e.cumulative_saturation)
        .fold(0.0, f64::max)
}

#[test]
fn fifty_random_networks_match_oracle() {
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig {
        cases: 50,
        ..ProptestConfig::default()
    });
    runner
        .run(&(blueprint(20, false), prop::bool::ANY, prop::sample::select(vec![0.0, 30.0, 120.0])), |(s, trapping, theta)| {
            let net = build(&s, quantized);
            let fluids = FluidPair::new(0.05, theta).unwrap();
            let res = invasion_percolation(&net, &fluids, INLET, OUTLET, trapping).unwrap();
            let (order, trapped) = oracle(&net, &fluids, trapping);
            prop_assert_eq!(res.pore_order(), order);
            prop_assert_eq!(res.trapped_pores, trapped);
            Ok(())
        })
        .unwrap();
}

proptest! {
    #[test]
    fn connected_networks_fill_completely(s in blueprint(30, true), theta in 0.0f64..180.0) {
        let net = build(&s, quantized);
        let res = run(&net, theta, false);
        prop_assert_eq!(res.final_saturation, 1.0);
        prop_assert!(res.trapped_pores.is_empty());
    }

    #[test]
    fn trapping_never_fills_more(s in blueprint(20, false), theta in 0.0f64..180.0) {
        let net = build(&s, quantized);
        let with = run(&net, theta, true);
        let without = run(&net, theta, false);
        prop_assert!(with.final_saturation <= without.final_saturation);
    }

    #[test]
    fn saturation_is_monotone(s in blueprint(20, true), theta in 0.0f64..180.0, trapping: bool) {
        let res = run(&build(&s, quantized), theta, trapping);
        for w in res.events.windows(2) {
            prop_assert!(w[0].cumulative_saturation <= w[1].cumulative_saturation);
            prop_assert!(w[0].applied_pressure <= w[1].applied_pressure);
        }
    }

    #[test]
    fn smaller_angle_dominates(s in blueprint(20, true), t1 in 0.0f64..89.0, t2 in 0.0f64..89.0, trapping: bool) {
        let (lo, hi) = (t1.min(t2), t1.max(t2));
        let net = build(&s, quantized);
        let a = run(&net, lo, trapping);
        let b = run(&net, hi, trapping);
        let mut grid: Vec<f64> = a.events.iter().chain(&b.events).map(|e| e.applied_pressure).collect();
        grid.sort_by(f64::total_cmp);
        for p in grid {
            prop_assert!(saturation_at(&a, p) >= saturation_at(&b, p) - 1e-12);
        }
    }

    #[test]
    fn diameter_scaling_divides_pressure(s in blueprint(15, true), k in 1.5f64..4.0, theta in 0.0f64..180.0) {
        let base = build(&s, quantized);
        let scaled = build(&s, |d| quantized(d) * k);
        let a = run(&base, theta, true);
        let b = run(&scaled, theta, true);
        prop_assert_eq!(a.pore_order(), b.pore_order());
        for (ea, eb) in a.events.iter().zip(&b.events) {
            let want = ea.applied_pressure / k;
            prop_assert!((eb.applied_pressure - want).abs() <= 1e-9 * want.abs().max(1.0));
        }
    }

    #[test]
    fn throat_storage_order_is_irrelevant(s in blueprint(15, true), seed: u64, theta in 0.0f64..80.0) {
        // distinct diameters so no tie-break depends on throat ids
        let mut net = build(&s, quantized);
        for (i, t) in net.throats.iter_mut().enumerate() {
            t.diameter = 1.0 + i as f64 * 0.37;
        }
        let mut shuffled = net.clone();
        let m = shuffled.throats.len();
        for i in (1..m).rev() {
            let j = (seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64) >> 33) as usize % (i + 1);
            shuffled.throats.swap(i, j);
        }
        let a = run(&net, theta, true);
        let b = run(&shuffled, theta, true);
        prop_assert_eq!(a.pore_order(), b.pore_order());
        prop_assert_eq!(a.trapped_pores, b.trapped_pores);
        prop_assert_eq!(a.final_saturation, b.final_saturation);
    }
}
