//! Planar single-track (bicycle) model with linear tires, integrated with a
//! fixed-step classical Runge–Kutta scheme.
//!
//! Slip angles use the kinematic definition
//! `αF = atan2(vy + lF·r, vx) − δ`, `αR = atan2(vy − lR·r, vx)`, and each
//! axle carries `−2·C·α`. Below [`DynamicsOptions::low_speed_guard`] the slip
//! angle is undefined and the tire forces are dropped.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::VehicleParams;
use crate::scalar::Scalar;

/// Dynamic state: body-frame velocities, yaw rate and planar pose.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct VehicleState<T> {
    pub vx: T,
    pub vy: T,
    pub r: T,
    pub x: T,
    pub y: T,
    pub psi: T,
}

impl<T: Scalar> VehicleState<T> {
    pub fn at_rest() -> Self {
        let z = T::zero();
        Self { vx: z, vy: z, r: z, x: z, y: z, psi: z }
    }

    pub fn straight(vx: T) -> Self {
        Self { vx, ..Self::at_rest() }
    }

    fn advanced(&self, d: &VehicleStateDerivative<T>, h: T) -> Self {
        Self {
            vx: self.vx + h * d.vx,
            vy: self.vy + h * d.vy,
            r: self.r + h * d.r,
            x: self.x + h * d.x,
            y: self.y + h * d.y,
            psi: self.psi + h * d.psi,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.vx, self.vy, self.r, self.x, self.y, self.psi].iter().all(|v| v.is_finite())
    }
}

/// Commands: net longitudinal acceleration at the CoG and front steer angle.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct VehicleInputs<T> {
    pub a: T,
    pub delta: T,
}

/// Time derivative of every [`VehicleState`] component.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VehicleStateDerivative<T> {
    pub vx: T,
    pub vy: T,
    pub r: T,
    pub x: T,
    pub y: T,
    pub psi: T,
}

impl<T: Scalar> VehicleStateDerivative<T> {
    fn check(&self) -> Result<()> {
        let terms = [
            ("dvx", self.vx),
            ("dvy", self.vy),
            ("dr", self.r),
            ("dx", self.x),
            ("dy", self.y),
            ("dpsi", self.psi),
        ];
        match terms.iter().find(|(_, v)| !v.is_finite()) {
            Some((name, _)) => Err(Error::NonFinite(name.to_string())),
            None => Ok(()),
        }
    }
}

/// Model limits that are not vehicle constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DynamicsOptions<T> {
    /// Longitudinal speed below which tire forces are zeroed [m/s].
    pub low_speed_guard: T,
    /// Steering saturation [rad].
    pub delta_max: T,
}

impl<T: Scalar> Default for DynamicsOptions<T> {
    fn default() -> Self {
        Self { low_speed_guard: T::lit(0.05), delta_max: T::lit(0.45) }
    }
}

/// Outcome of [`slip_angles`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slip<T> {
    Angles { front: T, rear: T },
    /// `vx` is at or below the low-speed guard; no slip angle exists.
    LowSpeed,
}

pub fn slip_angles<T: Scalar>(
    state: &VehicleState<T>,
    delta: T,
    params: &VehicleParams<T>,
    options: &DynamicsOptions<T>,
) -> Slip<T> {
    if state.vx <= options.low_speed_guard {
        return Slip::LowSpeed;
    }
    let front = (state.vy + params.l_front * state.r).atan2(state.vx) - delta;
    let rear = (state.vy - params.l_rear * state.r).atan2(state.vx);
    Slip::Angles { front, rear }
}

/// Axle lateral forces `(FFy, FRy)` from slip angles.
#[inline]
pub fn lateral_forces<T: Scalar>(alpha_f: T, alpha_r: T, params: &VehicleParams<T>) -> (T, T) {
    let two = T::lit(2.0);
    (-two * params.cf * alpha_f, -two * params.cr * alpha_r)
}

/// Axle forces, zero on the low-speed branch.
pub fn tire_forces<T: Scalar>(
    state: &VehicleState<T>,
    delta: T,
    params: &VehicleParams<T>,
    options: &DynamicsOptions<T>,
) -> (T, T) {
    match slip_angles(state, delta, params, options) {
        Slip::Angles { front, rear } => lateral_forces(front, rear, params),
        Slip::LowSpeed => (T::zero(), T::zero()),
    }
}

pub fn state_derivative<T: Scalar>(
    state: &VehicleState<T>,
    inputs: &VehicleInputs<T>,
    params: &VehicleParams<T>,
    options: &DynamicsOptions<T>,
) -> Result<VehicleStateDerivative<T>> {
    let (ffy, fry) = tire_forces(state, inputs.delta, params, options);
    let m = params.mass;
    let (sin_d, cos_d) = inputs.delta.sin_cos();
    let (sin_p, cos_p) = state.psi.sin_cos();
    let d = VehicleStateDerivative {
        vx: inputs.a - (ffy * sin_d - m * state.vy * state.r) / m,
        vy: (ffy * cos_d + fry - m * state.vx * state.r) / m,
        r: (ffy * params.l_front * cos_d - fry * params.l_rear) / params.yaw_inertia,
        x: state.vx * cos_p - state.vy * sin_p,
        y: state.vx * sin_p + state.vy * cos_p,
        psi: state.r,
    };
    d.check()?;
    Ok(d)
}

/// One classical fourth-order Runge–Kutta step with inputs held over `dt`.
pub fn step_rk4<T: Scalar>(
    state: &VehicleState<T>,
    inputs: &VehicleInputs<T>,
    params: &VehicleParams<T>,
    options: &DynamicsOptions<T>,
    dt: T,
) -> Result<VehicleState<T>> {
    if !(dt > T::zero()) {
        return Err(Error::param("dt", "must be > 0"));
    }
    let half = dt / T::lit(2.0);
    let k1 = state_derivative(state, inputs, params, options)?;
    let k2 = state_derivative(&state.advanced(&k1, half), inputs, params, options)?;
    let k3 = state_derivative(&state.advanced(&k2, half), inputs, params, options)?;
    let k4 = state_derivative(&state.advanced(&k3, dt), inputs, params, options)?;
    let two = T::lit(2.0);
    let sixth = dt / T::lit(6.0);
    let combine = |a: T, b: T, c: T, d: T| sixth * (a + two * b + two * c + d);
    let next = VehicleState {
        vx: state.vx + combine(k1.vx, k2.vx, k3.vx, k4.vx),
        vy: state.vy + combine(k1.vy, k2.vy, k3.vy, k4.vy),
        r: state.r + combine(k1.r, k2.r, k3.r, k4.r),
        x: state.x + combine(k1.x, k2.x, k3.x, k4.x),
        y: state.y + combine(k1.y, k2.y, k3.y, k4.y),
        psi: state.psi + combine(k1.psi, k2.psi, k3.psi, k4.psi),
    };
    if !next.is_finite() {
        return Err(Error::NonFinite("integrated state".into()));
    }
    Ok(next)
}
