//! Closed-loop driver: PI speed tracking and pure-pursuit lane keeping.

use serde::Serialize;

use crate::drivecycle::ManeuverSchedule;
use crate::dynamics::{DynamicsOptions, VehicleState};
use crate::error::{Error, Result};
use crate::params::VehicleParams;
use crate::scalar::Scalar;
use crate::similitude::ScaleFactors;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriverConfig<T> {
    /// Proportional speed gain [1/s].
    pub kp_speed: T,
    /// Integral speed gain [1/s²].
    pub ki_speed: T,
    /// Acceleration command saturation [m/s²].
    pub a_max: T,
    /// Command update rate [Hz]; commands are held between updates.
    pub sample_rate: T,
    /// Lookahead per unit speed [s].
    pub lookahead_gain: T,
    pub lookahead_min: T,
    pub lookahead_max: T,
    /// Steering slew limit [rad/s].
    pub steer_rate_max: T,
    /// Weight on the reference acceleration added to the PI output.
    pub feedforward: T,
}

impl<T: Scalar> Default for DriverConfig<T> {
    /// Full-size vehicle defaults.
    fn default() -> Self {
        Self {
            kp_speed: T::lit(2.0),
            ki_speed: T::lit(1.0),
            a_max: T::lit(3.0),
            sample_rate: T::lit(100.0),
            lookahead_gain: T::lit(0.9),
            lookahead_min: T::lit(0.5),
            lookahead_max: T::lit(10.0),
            steer_rate_max: T::lit(6.0),
            feedforward: T::one(),
        }
    }
}

impl<T: Scalar> DriverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("kp_speed", self.kp_speed >= T::zero()),
            ("ki_speed", self.ki_speed >= T::zero()),
            ("a_max", self.a_max > T::zero()),
            ("sample_rate", self.sample_rate > T::zero()),
            ("lookahead_gain", self.lookahead_gain >= T::zero()),
            ("lookahead_min", self.lookahead_min > T::zero()),
            ("lookahead_max", self.lookahead_max >= self.lookahead_min),
            ("steer_rate_max", self.steer_rate_max > T::zero()),
            ("feedforward", self.feedforward >= T::zero()),
        ];
        match checks.iter().find(|(_, ok)| !ok) {
            Some((name, _)) => Err(Error::param(name, "out of range")),
            None => Ok(()),
        }
    }

    /// Equivalent driver for a system whose quantities are `k · x` of this
    /// one's.
    pub fn scaled(&self, f: &ScaleFactors<T>) -> Self {
        Self {
            kp_speed: self.kp_speed / f.time,
            ki_speed: self.ki_speed / (f.time * f.time),
            a_max: self.a_max * f.acceleration,
            sample_rate: self.sample_rate / f.time,
            lookahead_gain: self.lookahead_gain * f.time,
            lookahead_min: self.lookahead_min * f.distance,
            lookahead_max: self.lookahead_max * f.distance,
            steer_rate_max: self.steer_rate_max / f.time,
            feedforward: self.feedforward,
        }
    }

    pub fn lookahead(&self, vx: T) -> T {
        (self.lookahead_gain * vx).max(self.lookahead_min).min(self.lookahead_max)
    }
}

/// PI speed law plus reference-acceleration feedforward, with
/// conditional-integration anti-windup.
///
/// The output uses the integrator value from before this update; the error
/// is then accumulated over `h` unless the output is saturated in the
/// direction of the error.
pub fn speed_command<T: Scalar>(v_ref: T, a_ref: T, v: T, integrator: &mut T, cfg: &DriverConfig<T>, h: T) -> T {
    let err = v_ref - v;
    let raw = cfg.feedforward * a_ref + cfg.kp_speed * err + cfg.ki_speed * *integrator;
    let a = raw.max(-cfg.a_max).min(cfg.a_max);
    let winding = (raw > cfg.a_max && err > T::zero()) || (raw < -cfg.a_max && err < T::zero());
    if !winding {
        *integrator = *integrator + err * h;
    }
    a
}

/// Pure-pursuit steering toward the active lane centre.
///
/// The goal point sits one lookahead ahead along the reference line
/// `y = lane_center(x)`; the command is `atan(2·l·sin α / L)` with `α` the
/// bearing of the goal in the body frame and `L` its distance.
pub fn steering_command<T: Scalar>(
    pose: &VehicleState<T>,
    schedule: &ManeuverSchedule<T>,
    cfg: &DriverConfig<T>,
    params: &VehicleParams<T>,
    options: &DynamicsOptions<T>,
) -> T {
    if pose.vx <= options.low_speed_guard {
        return T::zero();
    }
    let ld = cfg.lookahead(pose.vx);
    let gx = pose.x + ld;
    let gy = schedule.lane_center(gx);
    let (dx, dy) = (gx - pose.x, gy - pose.y);
    let (s, c) = pose.psi.sin_cos();
    let lx = c * dx + s * dy;
    let ly = -s * dx + c * dy;
    let dist = lx.hypot(ly);
    let alpha = ly.atan2(lx);
    let delta = (T::lit(2.0) * params.wheelbase * alpha.sin() / dist).atan();
    delta.max(-options.delta_max).min(options.delta_max)
}

/// Moves `current` toward `target` by at most `rate·dt`.
pub fn rate_limit<T: Scalar>(current: T, target: T, rate: T, dt: T) -> T {
    let step = rate * dt;
    current + (target - current).max(-step).min(step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drivecycle::build_schedule;
    use crate::presets;
    use proptest::prelude::*;

    fn cfg() -> DriverConfig<f64> {
        DriverConfig::default()
    }

    #[test]
    fn on_reference_zero_command() {
        let mut i = 0.0;
        assert_eq!(speed_command(5.0, 0.0, 5.0, &mut i, &cfg(), 0.01), 0.0);
    }

    #[test]
    fn integral_term_only_on_reference() {
        let mut i = 0.3;
        let a = speed_command(5.0, 0.0, 5.0, &mut i, &cfg(), 0.01);
        assert_eq!(a, cfg().ki_speed * 0.3);
    }

    #[test]
    fn proportional_law() {
        let mut i = 0.0;
        let a = speed_command(6.0, 0.0, 5.0, &mut i, &cfg(), 0.01);
        assert_eq!(a, 2.0);
        assert_eq!(i, 0.01);
    }

    #[test]
    fn feedforward_adds_reference_acceleration() {
        let mut i = 0.0;
        assert_eq!(speed_command(5.0, 0.5, 5.0, &mut i, &cfg(), 0.01), 0.5);
        let c = DriverConfig { feedforward: 0.0, ..cfg() };
        assert_eq!(speed_command(5.0, 0.5, 5.0, &mut i, &c, 0.01), 0.0);
    }

    #[test]
    fn saturation_stops_windup() {
        let mut i = 0.0;
        for _ in 0..1000 {
            let a = speed_command(100.0, 0.0, 0.0, &mut i, &cfg(), 0.01);
            assert_eq!(a, cfg().a_max);
        }
        assert_eq!(i, 0.0);
    }

    #[test]
    fn aligned_on_center_zero_steer() {
        let p = presets::rivian_r1t().params;
        let pose = VehicleState::straight(10.0);
        let d = steering_command(&pose, &ManeuverSchedule::straight(), &cfg(), &p, &DynamicsOptions::default());
        assert_eq!(d, 0.0);
    }

    #[test]
    fn steers_toward_center() {
        let p = presets::rivian_r1t().params;
        let opts = DynamicsOptions::default();
        let left = VehicleState { y: 0.4, ..VehicleState::straight(10.0) };
        assert!(steering_command(&left, &ManeuverSchedule::straight(), &cfg(), &p, &opts) < 0.0);
        let right = VehicleState { y: -0.4, ..VehicleState::straight(10.0) };
        assert!(steering_command(&right, &ManeuverSchedule::straight(), &cfg(), &p, &opts) > 0.0);
        let slow = VehicleState { y: 0.4, ..VehicleState::straight(0.01) };
        assert_eq!(steering_command(&slow, &ManeuverSchedule::straight(), &cfg(), &p, &opts), 0.0);
    }

    #[test]
    fn upcoming_lane_change_turns_wheel() {
        let p = presets::rivian_r1t().params;
        let s = build_schedule(500.0, 100.0, 3.5, 60.0).unwrap();
        let pose = VehicleState { x: 110.0, ..VehicleState::straight(15.0) };
        assert!(steering_command(&pose, &s, &cfg(), &p, &DynamicsOptions::default()) > 0.0);
    }

    #[test]
    fn rate_limiter() {
        assert_eq!(rate_limit(0.0, 1.0, 6.0, 0.01), 0.06);
        assert_eq!(rate_limit(0.0, 0.01, 6.0, 0.01), 0.01);
        assert_eq!(rate_limit(0.0, -1.0, 6.0, 0.01), -0.06);
    }

    proptest! {
        #[test]
        fn commands_respect_saturation(
            v_ref in 0.0f64..50.0, a_ref in -5.0f64..5.0, v in 0.0f64..50.0, i0 in -20.0f64..20.0,
            y in -5.0f64..5.0, psi in -1.0f64..1.0, vx in 0.0f64..40.0,
        ) {
            let c = cfg();
            let mut i = i0;
            let a = speed_command(v_ref, a_ref, v, &mut i, &c, 0.01);
            prop_assert!(a.abs() <= c.a_max);
            let p = presets::rivian_r1t().params;
            let opts = DynamicsOptions::default();
            let pose = VehicleState { y, psi, ..VehicleState::straight(vx) };
            let s = build_schedule(400.0, 50.0, 3.0, 30.0).unwrap();
            let d = steering_command(&pose, &s, &c, &p, &opts);
            prop_assert!(d.abs() <= opts.delta_max);
        }
    }
}
