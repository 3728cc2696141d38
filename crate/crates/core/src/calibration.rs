//! Estimators for constants measured on the bench.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const STANDARD_GRAVITY: f64 = 9.81;

fn positive<T: Scalar>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {v}")))
    }
}

/// Yaw inertia from a bifilar (two-wire) torsional pendulum:
/// `Iz = m·g·d²·T² / (16·π²·L)` with wire spacing `d`, wire length `L` and
/// oscillation period `T`.
pub fn bifilar_inertia<T: Scalar>(m: T, d: T, length: T, period: T, g: T) -> Result<T> {
    positive("m", m)?;
    positive("d", d)?;
    positive("L", length)?;
    positive("T", period)?;
    positive("g", g)?;
    let pi = T::PI();
    Ok(m * g * d * d * period * period / (T::lit(16.0) * pi * pi * length))
}

/// CoG position from static axle loads: the front distance is the rear
/// axle's share of the wheelbase.
pub fn cog_from_axle_loads<T: Scalar>(l: T, w_front: T, w_rear: T) -> Result<(T, T)> {
    positive("l", l)?;
    if !(w_front >= T::zero()) || !(w_rear >= T::zero()) {
        return Err(Error::param("axle load", "must be >= 0"));
    }
    let total = w_front + w_rear;
    if !(total > T::zero()) {
        return Err(Error::param("axle load", "total load must be > 0"));
    }
    let l_front = l * w_rear / total;
    Ok((l_front, l - l_front))
}

/// Shaft damping and inertia from a free spin test: steady speed `omega_s`
/// under torque `tau_s`, and first-order time constant `t_s`.
/// `B = τs/ωs`, `J = B·Ts`.
pub fn estimate_damping_inertia<T: Scalar>(omega_s: T, tau_s: T, t_s: T) -> Result<(T, T)> {
    positive("omega_s", omega_s)?;
    positive("T_s", t_s)?;
    if !tau_s.is_finite() {
        return Err(Error::param("tau_s", "must be finite"));
    }
    let b = tau_s / omega_s;
    Ok((b, b * t_s))
}
