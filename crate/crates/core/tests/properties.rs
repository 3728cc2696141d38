//! Cross-module properties on the public API.

use evsim::calibration::cog_from_axle_loads;
use evsim::drivecycle::{build_schedule, cycle_stats, scale_cycle, CyclePoint};
use evsim::dynamics::step_rk4;
use evsim::energy::{compare_runs, energy_report};
use evsim::sim::simulate;
use evsim::similitude::{scale_factors, ScaleFactors};
use evsim::{presets, DriveCycle, ManeuverSchedule, VehicleConfig};
use proptest::prelude::*;

fn cycle(points: &[(f64, f64)]) -> DriveCycle {
    DriveCycle::new("p", points.iter().map(|&(t, v)| CyclePoint { t, v }).collect()).unwrap()
}

/// Stop, accelerate, cruise and brake; `rise` is the ramp time each way.
fn trapezoid(v: f64, rise: f64, hold: f64) -> DriveCycle {
    cycle(&[(0.0, 0.0), (rise, v), (rise + hold, v), (2.0 * rise + hold, 0.0)])
}

fn coarse(mut cfg: VehicleConfig) -> VehicleConfig {
    cfg.dt = 5e-3;
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn cycle_distance_scales_by_kv_kt(kv in 0.01f64..10.0, kt in 0.01f64..10.0, v in 1.0f64..30.0) {
        let c = trapezoid(v, 7.0, 11.0);
        let f = ScaleFactors::from_primary(kv, kt, 1.0, 1.0);
        let s = scale_cycle(&c, &f);
        prop_assert_eq!(s.len(), c.len());
        let (d0, d1) = (cycle_stats(&c).distance, cycle_stats(&s).distance);
        prop_assert!((d1 / d0 - kv * kt).abs() <= 1e-12 * kv * kt);
    }

    #[test]
    fn factors_round_trip_between_any_vehicles(m in 0.5f64..5000.0, l in 0.1f64..5.0, cf in 10.0f64..1e5) {
        let a = presets::rivian_r1t().params;
        let mut b = a;
        b.mass = m;
        b.wheelbase = l;
        b.cf = cf;
        let there = scale_factors(&a, &b);
        let back = scale_factors(&b, &a);
        let id = there.compose(&back);
        for x in [id.velocity, id.time, id.distance, id.energy, id.acceleration, id.yaw_rate, id.force] {
            prop_assert!((x - 1.0).abs() <= 1e-12);
        }
        prop_assert!((there.distance - there.velocity * there.time).abs() <= 1e-12 * there.distance);
    }

    #[test]
    fn cog_splits_wheelbase(l in 0.05f64..6.0, wf in 0.01f64..2e4, wr in 0.01f64..2e4) {
        let (lf, lr) = cog_from_axle_loads(l, wf, wr).unwrap();
        prop_assert!(lf > 0.0 && lr > 0.0);
        prop_assert!((lf + lr - l).abs() <= 1e-12 * l);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn lane_changes_always_cost_energy(v in 8.0f64..25.0, acc in 0.5f64..2.0, hold in 20.0f64..40.0, offset in 1.0f64..4.0) {
        let cfg = coarse(presets::rivian_r1t());
        let c = trapezoid(v, v / acc, hold);
        let opts = cfg.sim_options(false);
        let straight = simulate(cfg.plant(), &c, &ManeuverSchedule::straight(), &opts).unwrap();
        let sched = build_schedule(straight.distance() + 200.0, 120.0, offset, 60.0).unwrap();
        let lc = simulate(cfg.plant(), &c, &sched, &opts).unwrap();
        let delta = compare_runs(&energy_report(&straight), &energy_report(&lc)).unwrap();
        prop_assert!(delta > 0.0, "delta {}", delta);
    }

    #[test]
    fn battery_energy_never_decreases_without_regen(v in 2.0f64..25.0, acc in 0.5f64..2.0, hold in 1.0f64..20.0) {
        let cfg = coarse(presets::rivian_r1t());
        let tr = simulate(cfg.plant(), &trapezoid(v, v / acc, hold), &ManeuverSchedule::straight(), &cfg.sim_options(false)).unwrap();
        prop_assert!(tr.samples.windows(2).all(|w| w[1].eb >= w[0].eb));
        prop_assert!(tr.samples.iter().all(|s| s.pb >= 0.0));
    }

    #[test]
    fn straight_run_is_open_loop_replay(v in 2.0f64..25.0, acc in 0.5f64..2.0) {
        let cfg = coarse(presets::rivian_r1t());
        let opts = cfg.sim_options(false);
        let tr = simulate(cfg.plant(), &trapezoid(v, v / acc, 5.0), &ManeuverSchedule::straight(), &opts).unwrap();
        for w in tr.samples.windows(2) {
            prop_assert!(w[0].inputs.delta == 0.0 && w[0].state.vy == 0.0 && w[0].state.r == 0.0);
            let next = step_rk4(&w[0].state, &w[0].inputs, &cfg.params, &opts.dynamics, opts.dt).unwrap();
            prop_assert_eq!(next, w[1].state);
        }
    }
}

#[test]
fn regen_recovers_energy_on_braking() {
    let cfg = coarse(presets::rivian_r1t());
    let c = trapezoid(15.0, 8.0, 5.0);
    let plain = simulate(cfg.plant(), &c, &ManeuverSchedule::straight(), &cfg.sim_options(false)).unwrap();
    let regen = simulate(cfg.plant(), &c, &ManeuverSchedule::straight(), &cfg.sim_options(true)).unwrap();
    assert!(regen.final_energy() < plain.final_energy());
    assert!(regen.samples.iter().any(|s| s.pb < 0.0));
}

#[test]
fn single_precision_tracks_double() {
    let wide = presets::rcc();
    let narrow: evsim::config::VehicleConfig<f32> = presets::by_name("rcc").unwrap();
    let f = scale_factors(&wide.params, &presets::rivian_r1t().params);
    let c = scale_cycle(&presets::standin_cycles::<f64>()[0], &f);
    let pts: Vec<CyclePoint<f32>> = c.points().iter().map(|p| CyclePoint { t: p.t as f32, v: p.v as f32 }).collect();
    let c32 = evsim::drivecycle::DriveCycle::new("p32", pts).unwrap();
    let e64 = simulate(wide.plant(), &c, &ManeuverSchedule::straight(), &wide.sim_options(false)).unwrap();
    let e32 = simulate(narrow.plant(), &c32, &evsim::drivecycle::ManeuverSchedule::straight(), &narrow.sim_options(false)).unwrap();
    let (a, b) = (e64.final_energy(), e32.final_energy() as f64);
    assert!(((a - b) / a).abs() < 0.02, "{a} vs {b}");
}

#[test]
fn concurrent_runs_match_serial() {
    let cfg = coarse(presets::rivian_r1t());
    let c = trapezoid(12.0, 6.0, 20.0);
    let run = || simulate(cfg.plant(), &c, &ManeuverSchedule::straight(), &cfg.sim_options(false)).unwrap().to_csv();
    let serial = run();
    let parallel: Vec<String> = std::thread::scope(|s| {
        let hs: Vec<_> = (0..3).map(|_| s.spawn(run)).collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    assert!(parallel.iter().all(|p| *p == serial));
}
