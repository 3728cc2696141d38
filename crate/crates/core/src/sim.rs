//! Closed-loop simulation: driver, bicycle model and powertrain energy path.

use serde::Serialize;

use crate::drivecycle::{cycle_stats, DriveCycle, ManeuverSchedule};
use crate::driver::{rate_limit, speed_command, steering_command, DriverConfig};
use crate::dynamics::{state_derivative, step_rk4, DynamicsOptions, VehicleInputs, VehicleState};
use crate::energy::{integrate_energy, Sample, Trajectory};
use crate::error::{Error, Result};
use crate::params::VehicleParams;
use crate::powertrain::{apply_dead_zone, battery_power, shaft_torque, wheel_to_motor, EfficiencyMap, RegenPolicy};
use crate::scalar::Scalar;

/// Run settings that are not properties of the vehicle or the driver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimOptions<T> {
    /// Integration step [s].
    pub dt: T,
    pub regen: RegenPolicy<T>,
    pub dynamics: DynamicsOptions<T>,
    /// Tracking error bound as a fraction of the cycle's top speed.
    pub divergence_fraction: T,
    /// How long the bound may be exceeded before the run is aborted [s].
    pub divergence_window: T,
}

impl<T: Scalar> SimOptions<T> {
    pub fn with_dt(dt: T) -> Self {
        Self {
            dt,
            regen: RegenPolicy::Disabled,
            dynamics: DynamicsOptions::default(),
            divergence_fraction: T::lit(0.2),
            divergence_window: T::lit(2.0),
        }
    }
}

/// Everything a run needs besides the reference inputs.
#[derive(Debug, Clone, Copy)]
pub struct Plant<'a, T> {
    pub id: &'a str,
    pub params: &'a VehicleParams<T>,
    pub efficiency: &'a EfficiencyMap<T>,
    pub driver: &'a DriverConfig<T>,
}

/// Tracks `cycle` along the lane reference of `schedule`.
///
/// The driver updates its commands every `1/(sample_rate·dt)` steps and
/// holds them in between; steering is slew-limited every step. The
/// acceleration actually applied is clipped so the shaft torque stays inside
/// the motor envelope, and each clipped step is counted.
pub fn simulate<T: Scalar>(
    plant: Plant<'_, T>,
    cycle: &DriveCycle<T>,
    schedule: &ManeuverSchedule<T>,
    opts: &SimOptions<T>,
) -> Result<Trajectory<T>> {
    let Plant { id, params, efficiency, driver } = plant;
    params.validate()?;
    driver.validate()?;
    let dt = opts.dt;
    if !(dt > T::zero()) {
        return Err(Error::param("dt", "must be > 0"));
    }
    let steps = step_count(cycle.duration(), dt)?;
    let hold = (T::one() / (driver.sample_rate * dt)).round().to_usize().unwrap_or(1).max(1);
    let h = T::lit(hold as f64) * dt;

    let sr = params.speed_ratio();
    let bound = opts.divergence_fraction * cycle_stats(cycle).v_max;
    let envelope = efficiency.envelope();
    // Shaft torque is affine in the commanded acceleration: tau = c0 + c1 * a.
    let c1 = params.shaft_inertia * sr + params.wheel_radius * params.mass / (params.diff_efficiency * params.diff_ratio);

    let mut state = VehicleState::straight(cycle.speed_at(T::zero()));
    let mut integrator = T::zero();
    let mut a_cmd = T::zero();
    let mut steer_target = T::zero();
    let mut delta = T::zero();
    let mut over_since: Option<T> = None;
    let mut violations = 0usize;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut power = Vec::with_capacity(steps + 1);

    for k in 0..=steps {
        let t = T::lit(k as f64) * dt;
        let v_ref = cycle.speed_at(t);
        if k % hold == 0 {
            let target = |t: T| apply_dead_zone(sr * cycle.speed_at(t), params) / sr;
            let v_target = target(t);
            let a_ref = (target(t + h) - v_target) / h;
            a_cmd = speed_command(v_target, a_ref, state.vx, &mut integrator, driver, h);
            steer_target = steering_command(&state, schedule, driver, params, &opts.dynamics);
        }
        delta = rate_limit(delta, steer_target, driver.steer_rate_max, dt);

        let coast = state_derivative(&state, &VehicleInputs { a: T::zero(), delta }, params, &opts.dynamics)?;
        let omega = sr * state.vx;
        let c0 = params.shaft_damping * omega + params.shaft_inertia * sr * coast.vx;
        let tau_max = envelope.max_torque(omega);
        let mut a = a_cmd;
        let tau_cmd = c0 + c1 * a;
        if tau_cmd > tau_max {
            a = (tau_max - c0) / c1;
            violations += 1;
        } else if tau_cmd < -tau_max {
            a = (-tau_max - c0) / c1;
            violations += 1;
        }
        let inputs = VehicleInputs { a, delta };

        let d = state_derivative(&state, &inputs, params, &opts.dynamics)?;
        let (load, _) = wheel_to_motor(params.mass * a, state.vx, params);
        let tau = shaft_torque(omega, sr * d.vx, load, params);
        let eta = efficiency.lookup(tau, omega);
        let pb = battery_power(tau, omega, eta, opts.regen)?;
        if !pb.is_finite() {
            return Err(Error::NonFinitePower(k));
        }
        power.push(pb);
        samples.push(Sample { t, state, inputs, tau, omega, pb, eb: T::zero() });

        let err = (state.vx - v_ref).abs();
        if bound > T::zero() && err > bound {
            let since = *over_since.get_or_insert(t);
            if t - since > opts.divergence_window {
                return Err(Error::TrackingDivergence {
                    t: t.as_f64(),
                    error: err.as_f64(),
                    bound: bound.as_f64(),
                    window: opts.divergence_window.as_f64(),
                });
            }
        } else {
            over_since = None;
        }

        if k < steps {
            state = step_rk4(&state, &inputs, params, &opts.dynamics, dt)?;
        }
    }

    for (s, eb) in samples.iter_mut().zip(integrate_energy(&power, dt)?) {
        s.eb = eb;
    }
    Ok(Trajectory {
        dt,
        params_id: id.to_string(),
        schedule_id: schedule.id(),
        samples,
        envelope_violations: violations,
    })
}

/// Number of whole steps covering `duration`, tolerant of rounding in
/// `duration / dt`.
fn step_count<T: Scalar>(duration: T, dt: T) -> Result<usize> {
    let n = duration / dt;
    let r = n.round();
    let n = if (n - r).abs() <= T::lit(1e-6) * r.max(T::one()) { r } else { n.floor() };
    n.to_usize().ok_or_else(|| Error::param("dt", "step count overflows"))
}

/// Largest relative deviation between two equally long trajectories over
/// the dynamic state, used for convergence studies.
pub fn max_state_deviation<T: Scalar>(a: &Trajectory<T>, b: &Trajectory<T>, stride_b: usize) -> T {
    let scale = a.samples.iter().map(|s| s.state.vx.abs()).fold(T::min_positive_value(), T::max);
    let lat = a
        .samples
        .iter()
        .map(|s| s.state.vy.abs().max(s.state.y.abs()))
        .fold(T::min_positive_value(), T::max);
    a.samples
        .iter()
        .zip(b.samples.iter().step_by(stride_b.max(1)))
        .map(|(p, q)| {
            ((p.state.vx - q.state.vx).abs() / scale)
                .max((p.state.vy - q.state.vy).abs() / lat)
                .max((p.state.y - q.state.y).abs() / lat)
        })
        .fold(T::zero(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drivecycle::{build_schedule, CyclePoint};
    use crate::energy::energy_report;
    use crate::powertrain::TorqueEnvelope;
    use crate::presets;
    use approx::assert_relative_eq;

    fn flat(v: f64, duration: f64) -> DriveCycle<f64> {
        DriveCycle::new("flat", vec![CyclePoint { t: 0.0, v }, CyclePoint { t: duration, v }]).unwrap()
    }

    fn ramp(v: f64, rise: f64, hold: f64) -> DriveCycle<f64> {
        DriveCycle::new(
            "ramp",
            vec![CyclePoint { t: 0.0, v: 0.0 }, CyclePoint { t: rise, v }, CyclePoint { t: rise + hold, v }],
        )
        .unwrap()
    }

    fn ideal() -> (VehicleParams<f64>, EfficiencyMap<f64>) {
        let mut p = presets::rivian_r1t().params;
        p.shaft_inertia = 0.0;
        p.shaft_damping = 0.0;
        let map = EfficiencyMap::constant(1.0, TorqueEnvelope::from_params(&p)).unwrap();
        (p, map)
    }

    #[test]
    fn zero_speed_cycle_costs_nothing() {
        let v = presets::rivian_r1t();
        let plant = Plant { id: "ev", params: &v.params, efficiency: &v.efficiency, driver: &v.driver };
        let tr = simulate(plant, &flat(0.0, 5.0), &ManeuverSchedule::straight(), &SimOptions::with_dt(0.01)).unwrap();
        assert_eq!(tr.samples.len(), 501);
        assert_eq!(tr.distance(), 0.0);
        assert_eq!(tr.final_energy(), 0.0);
    }

    #[test]
    fn kinetic_energy_ramp() {
        let (p, map) = ideal();
        let drv = DriverConfig::default();
        let plant = Plant { id: "ideal", params: &p, efficiency: &map, driver: &drv };
        let tr = simulate(plant, &ramp(5.0, 5.0, 15.0), &ManeuverSchedule::straight(), &SimOptions::with_dt(1e-3)).unwrap();
        let v_end = tr.samples.last().unwrap().state.vx;
        assert_relative_eq!(tr.final_energy(), 0.5 * p.mass * v_end * v_end, max_relative = 5e-3);
    }

    #[test]
    fn straight_schedule_never_steers() {
        let v = presets::rivian_r1t();
        let plant = Plant { id: "ev", params: &v.params, efficiency: &v.efficiency, driver: &v.driver };
        let tr = simulate(plant, &ramp(10.0, 10.0, 5.0), &ManeuverSchedule::straight(), &SimOptions::with_dt(0.01)).unwrap();
        assert!(tr.samples.iter().all(|s| s.inputs.delta == 0.0 && s.state.vy == 0.0 && s.state.y == 0.0));
    }

    #[test]
    fn lane_changes_cost_energy() {
        let v = presets::rivian_r1t();
        let plant = Plant { id: "ev", params: &v.params, efficiency: &v.efficiency, driver: &v.driver };
        let cycle = ramp(12.0, 8.0, 40.0);
        let opts = SimOptions::with_dt(5e-3);
        let straight = simulate(plant, &cycle, &ManeuverSchedule::straight(), &opts).unwrap();
        let sched = build_schedule(straight.distance(), 80.0, 3.5, 40.0).unwrap();
        let lc = simulate(plant, &cycle, &sched, &opts).unwrap();
        let (a, b) = (energy_report(&straight), energy_report(&lc));
        assert!(b.efficiency_wh_per_m.unwrap() > a.efficiency_wh_per_m.unwrap());
    }

    #[test]
    fn divergence_is_reported() {
        let v = presets::rivian_r1t();
        let mut drv = v.driver;
        drv.a_max = 0.01;
        let plant = Plant { id: "ev", params: &v.params, efficiency: &v.efficiency, driver: &drv };
        let err = simulate(plant, &ramp(20.0, 2.0, 10.0), &ManeuverSchedule::straight(), &SimOptions::with_dt(0.01))
            .unwrap_err();
        assert!(matches!(err, Error::TrackingDivergence { .. }));
        assert!(err.is_numeric());
    }

    #[test]
    fn envelope_clamp_counts() {
        let v = presets::rivian_r1t();
        let mut p = v.params;
        p.rated_torque = 50.0;
        let map = v.efficiency.clone().with_envelope(TorqueEnvelope::from_params(&p));
        let plant = Plant { id: "weak", params: &p, efficiency: &map, driver: &v.driver };
        let mut opts = SimOptions::with_dt(0.01);
        opts.divergence_window = 1e9;
        let tr = simulate(plant, &ramp(5.0, 2.0, 2.0), &ManeuverSchedule::straight(), &opts).unwrap();
        assert!(tr.envelope_violations > 0);
        assert!(tr.samples.iter().all(|s| s.tau.abs() <= 50.0 * (1.0 + 1e-9)));
    }

    #[test]
    fn deterministic() {
        let v = presets::rcc();
        let plant = Plant { id: "rcc", params: &v.params, efficiency: &v.efficiency, driver: &v.driver };
        let cycle = ramp(2.0, 3.0, 5.0);
        let sched = build_schedule(12.0, 3.0, 0.1, 1.5).unwrap();
        let opts = SimOptions::with_dt(1e-3);
        let a = simulate(plant, &cycle, &sched, &opts).unwrap();
        let b = simulate(plant, &cycle, &sched, &opts).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn step_count_tolerates_rounding() {
        assert_eq!(step_count(0.3, 0.1).unwrap(), 3);
        assert_eq!(step_count(1.0, 0.3).unwrap(), 3);
    }
}
