//! Wheel/motor mapping, shaft dynamics, motor electrical relations,
//! efficiency lookup and battery power.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::VehicleParams;
use crate::scalar::Scalar;

/// Load torque on the motor shaft and motor speed for a wheel force `fx`
/// at vehicle speed `vx`.
pub fn wheel_to_motor<T: Scalar>(fx: T, vx: T, params: &VehicleParams<T>) -> (T, T) {
    let load = params.wheel_radius * fx / (params.diff_efficiency * params.diff_ratio);
    let omega = params.speed_ratio() * vx;
    (load, omega)
}

/// Inverse of [`wheel_to_motor`].
pub fn motor_to_wheel<T: Scalar>(load: T, omega: T, params: &VehicleParams<T>) -> (T, T) {
    let fx = load * params.diff_efficiency * params.diff_ratio / params.wheel_radius;
    let vx = omega / params.speed_ratio();
    (fx, vx)
}

/// Motor torque needed to drive the shaft: `J·ω̇ + B·ω + T_L`.
#[inline]
pub fn shaft_torque<T: Scalar>(omega: T, domega: T, load: T, params: &VehicleParams<T>) -> T {
    params.shaft_inertia * domega + params.shaft_damping * omega + load
}

/// dq-frame voltages and currents.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotorElectricalState<T> {
    pub vd: T,
    pub vq: T,
    pub id: T,
    pub iq: T,
}

/// `P_in = 3/2 (Vq·Iq + Vd·Id)`.
pub fn motor_input_power<T: Scalar>(e: &MotorElectricalState<T>) -> T {
    T::lit(1.5) * (e.vq * e.iq + e.vd * e.id)
}

/// Electromagnetic torque `(Np/2)(3/2)·λ·Iq`.
pub fn torque_from_iq<T: Scalar>(iq: T, params: &VehicleParams<T>) -> T {
    torque_constant(params) * iq
}

/// Quadrature current producing `torque`.
pub fn iq_for_torque<T: Scalar>(torque: T, params: &VehicleParams<T>) -> T {
    torque / torque_constant(params)
}

fn torque_constant<T: Scalar>(params: &VehicleParams<T>) -> T {
    params.pole_count / T::lit(2.0) * T::lit(1.5) * params.flux_linkage
}

/// Speed commands below the dead-zone threshold produce no motion.
pub fn apply_dead_zone<T: Scalar>(omega_cmd: T, params: &VehicleParams<T>) -> T {
    if omega_cmd.abs() < params.dead_zone_speed {
        T::zero()
    } else {
        omega_cmd
    }
}

/// Maximum continuous torque: rated torque up to base speed, constant power
/// beyond it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorqueEnvelope<T> {
    pub rated_torque: T,
    pub rated_power: T,
}

impl<T: Scalar> TorqueEnvelope<T> {
    pub fn from_params(params: &VehicleParams<T>) -> Self {
        Self { rated_torque: params.rated_torque, rated_power: params.rated_power }
    }

    pub fn base_speed(&self) -> T {
        self.rated_power / self.rated_torque
    }

    pub fn max_torque(&self, omega: T) -> T {
        let omega = omega.abs();
        if omega * self.rated_torque <= self.rated_power {
            self.rated_torque
        } else {
            self.rated_power / omega
        }
    }
}

/// Shapes for the built-in synthetic maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfficiencyProfile {
    /// Hobby-grade motor: 0.45 to 0.75, poor at low torque and low speed.
    Rcc,
    /// Traction motor: 0.85 to 0.97.
    Ev,
}

impl EfficiencyProfile {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rcc" => Some(Self::Rcc),
            "ev" => Some(Self::Ev),
            _ => None,
        }
    }

    fn bounds(self) -> (f64, f64) {
        match self {
            Self::Rcc => (0.45, 0.75),
            Self::Ev => (0.85, 0.97),
        }
    }
}

/// Motor efficiency over a rectangular (speed, torque) grid.
///
/// `eta[i][j]` is the efficiency at `torque_grid[i]`, `speed_grid[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyMap<T> {
    speed_grid: Vec<T>,
    torque_grid: Vec<T>,
    eta: Vec<Vec<T>>,
    envelope: TorqueEnvelope<T>,
}

impl<T: Scalar> EfficiencyMap<T> {
    pub fn new(
        speed_grid: Vec<T>,
        torque_grid: Vec<T>,
        eta: Vec<Vec<T>>,
        envelope: TorqueEnvelope<T>,
    ) -> Result<Self> {
        if speed_grid.is_empty() || torque_grid.is_empty() {
            return Err(Error::Config("efficiency map has an empty axis".into()));
        }
        for (name, grid) in [("speed", &speed_grid), ("torque", &torque_grid)] {
            if grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Config(format!("{name} grid must be finite and strictly ascending")));
            }
        }
        if eta.len() != torque_grid.len() || eta.iter().any(|row| row.len() != speed_grid.len()) {
            return Err(Error::Config(format!(
                "efficiency body must be {}x{}",
                torque_grid.len(),
                speed_grid.len()
            )));
        }
        if eta.iter().flatten().any(|v| !(*v > T::zero() && *v <= T::one())) {
            return Err(Error::Config("efficiency values must lie in (0, 1]".into()));
        }
        if !(envelope.rated_torque >= T::zero() && envelope.rated_power >= T::zero()) {
            return Err(Error::Config("torque envelope must be non-negative".into()));
        }
        Ok(Self { speed_grid, torque_grid, eta, envelope })
    }

    /// Constant efficiency everywhere.
    pub fn constant(eta: T, envelope: TorqueEnvelope<T>) -> Result<Self> {
        Self::new(vec![T::zero()], vec![T::zero()], vec![vec![eta]], envelope)
    }

    /// Smooth synthetic map on an 11x11 grid spanning `[0, omega_max]` and
    /// `[0, tau_rated]`. Efficiency rises from the profile floor toward its
    /// ceiling as both normalized torque and speed grow.
    pub fn synthetic(profile: EfficiencyProfile, envelope: TorqueEnvelope<T>, omega_max: T) -> Result<Self> {
        const N: usize = 11;
        const KNEE: f64 = 0.15;
        let (lo, hi) = profile.bounds();
        let omega_max = omega_max.as_f64();
        let tau_max = envelope.rated_torque.as_f64();
        let axis = |max: f64| (0..N).map(|i| max * i as f64 / (N - 1) as f64).collect::<Vec<_>>();
        let speeds = axis(omega_max);
        let torques = axis(tau_max);
        let rise = |x: f64| 1.0 - (-x / KNEE).exp();
        let eta = torques
            .iter()
            .map(|tq| {
                speeds
                    .iter()
                    .map(|w| T::lit(lo + (hi - lo) * rise(tq / tau_max) * rise(w / omega_max)))
                    .collect()
            })
            .collect();
        Self::new(
            speeds.into_iter().map(T::lit).collect(),
            torques.into_iter().map(T::lit).collect(),
            eta,
            envelope,
        )
    }

    pub fn speed_grid(&self) -> &[T] {
        &self.speed_grid
    }

    pub fn torque_grid(&self) -> &[T] {
        &self.torque_grid
    }

    pub fn values(&self) -> &[Vec<T>] {
        &self.eta
    }

    pub fn envelope(&self) -> &TorqueEnvelope<T> {
        &self.envelope
    }

    pub fn with_envelope(mut self, envelope: TorqueEnvelope<T>) -> Self {
        self.envelope = envelope;
        self
    }

    /// Same map with axes stretched by the given factors.
    pub fn rescaled(&self, torque_factor: T, speed_factor: T) -> Self {
        Self {
            speed_grid: self.speed_grid.iter().map(|v| *v * speed_factor).collect(),
            torque_grid: self.torque_grid.iter().map(|v| *v * torque_factor).collect(),
            eta: self.eta.clone(),
            envelope: TorqueEnvelope {
                rated_torque: self.envelope.rated_torque * torque_factor,
                rated_power: self.envelope.rated_power * torque_factor * speed_factor,
            },
        }
    }

    pub fn mean(&self) -> T {
        let n = T::lit((self.speed_grid.len() * self.torque_grid.len()) as f64);
        self.eta.iter().flatten().copied().sum::<T>() / n
    }

    pub fn min(&self) -> T {
        self.eta.iter().flatten().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.eta.iter().flatten().copied().fold(T::neg_infinity(), T::max)
    }

    /// Bilinear efficiency at `(|omega|, |tau|)`, clamped to the grid edges.
    pub fn lookup(&self, tau: T, omega: T) -> T {
        let (j, u) = locate(&self.speed_grid, omega.abs());
        let (i, v) = locate(&self.torque_grid, tau.abs());
        let at = |ii: usize, jj: usize| self.eta[ii.min(self.torque_grid.len() - 1)][jj.min(self.speed_grid.len() - 1)];
        let one = T::one();
        (one - v) * ((one - u) * at(i, j) + u * at(i, j + 1)) + v * ((one - u) * at(i + 1, j) + u * at(i + 1, j + 1))
    }

    /// Parses the CSV map format: first row holds the speed grid after a
    /// corner cell, each following row a torque value then efficiencies.
    pub fn from_csv(text: &str, envelope: TorqueEnvelope<T>) -> Result<Self> {
        let mut rows = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, header) = rows.next().ok_or_else(|| Error::Config("efficiency map file is empty".into()))?;
        let speeds = header
            .split(',')
            .skip(1)
            .map(|c| parse_cell::<T>(c, line))
            .collect::<Result<Vec<_>>>()?;
        let mut torques = Vec::new();
        let mut eta = Vec::new();
        for (line, row) in rows {
            let mut cells = row.split(',');
            let tq = parse_cell::<T>(cells.next().unwrap_or(""), line)?;
            let values = cells.map(|c| parse_cell::<T>(c, line)).collect::<Result<Vec<_>>>()?;
            if values.len() != speeds.len() {
                return Err(Error::Parse {
                    line,
                    reason: format!("expected {} efficiency values, found {}", speeds.len(), values.len()),
                });
            }
            torques.push(tq);
            eta.push(values);
        }
        Self::new(speeds, torques, eta, envelope)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("torque_nm\\speed_radps");
        for s in &self.speed_grid {
            let _ = write!(out, ",{s}");
        }
        out.push('\n');
        for (tq, row) in self.torque_grid.iter().zip(&self.eta) {
            let _ = write!(out, "{tq}");
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

fn parse_cell<T: Scalar>(cell: &str, line: usize) -> Result<T> {
    let v: f64 = cell
        .trim()
        .parse()
        .map_err(|_| Error::Parse { line, reason: format!("not a number: `{}`", cell.trim()) })?;
    Ok(T::lit(v))
}

/// Cell index and fractional position of `x` on an ascending grid, clamped.
fn locate<T: Scalar>(grid: &[T], x: T) -> (usize, T) {
    let n = grid.len();
    if n == 1 || x <= grid[0] {
        return (0, T::zero());
    }
    if x >= grid[n - 1] {
        return (n - 1, T::zero());
    }
    let i = grid.partition_point(|g| *g <= x) - 1;
    (i, (x - grid[i]) / (grid[i + 1] - grid[i]))
}

/// Shorthand for [`EfficiencyMap::lookup`].
pub fn efficiency_lookup<T: Scalar>(map: &EfficiencyMap<T>, tau: T, omega: T) -> T {
    map.lookup(tau, omega)
}

/// Treatment of negative mechanical power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RegenPolicy<T> {
    Disabled,
    /// Fraction of braking power returned to the battery.
    Enabled { efficiency: T },
}

/// Battery power for shaft torque `tau` at speed `omega`.
///
/// Propulsion draws `τω/η`, so losses increase the draw. Braking returns
/// `η_regen·τω` (negative) when regeneration is on, nothing otherwise.
pub fn battery_power<T: Scalar>(tau: T, omega: T, eta: T, regen: RegenPolicy<T>) -> Result<T> {
    if !(eta > T::zero()) {
        return Err(Error::Config(format!("efficiency must be > 0, got {eta}")));
    }
    let mech = tau * omega;
    if mech >= T::zero() {
        return Ok(mech / eta);
    }
    Ok(match regen {
        RegenPolicy::Disabled => T::zero(),
        RegenPolicy::Enabled { efficiency } => efficiency * mech,
    })
}
