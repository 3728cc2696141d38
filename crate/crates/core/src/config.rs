//! Flat `key = value` run configuration.
//!
//! Vehicle constants use the keys of [`VehicleParams::KEYS`] and are all
//! required. The remaining keys are optional:
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `name` | identifier used in outputs | file stem or `vehicle` |
//! | `efficiency_profile` | `rcc` or `ev` synthetic map | `ev` |
//! | `efficiency_map` | CSV map path, relative to the config file | none |
//! | `efficiency` | constant efficiency instead of a map | none |
//! | `map_speed_max` | speed axis extent of the synthetic map [rad/s] | `2 × P_rated/tau_rated` |
//! | `map_torque_max` | torque axis extent of the synthetic map [N·m] | `tau_rated` |
//! | `kp_speed` ... `feedforward` | [`DriverConfig`] fields | full-size defaults |
//! | `delta_max`, `low_speed_guard` | [`DynamicsOptions`] fields | 0.45 rad, 0.05 m/s |
//! | `dt` | integration step [s] | 1e-3 |
//! | `lane_change_interval`, `lane_offset`, `lane_change_length` | lane-change geometry [m] | 20, 0.5, 8 |
//! | `regen_efficiency` | fraction recovered when regeneration is on | 0.6 |

use std::collections::BTreeMap;
use std::path::Path;

use crate::driver::DriverConfig;
use crate::dynamics::DynamicsOptions;
use crate::error::{Error, Result};
use crate::params::VehicleParams;
use crate::powertrain::{EfficiencyMap, EfficiencyProfile, RegenPolicy, TorqueEnvelope};
use crate::scalar::Scalar;
use crate::sim::{Plant, SimOptions};
use crate::similitude::ScaleFactors;

const RUN_KEYS: [&str; 22] = [
    "name",
    "efficiency_profile",
    "efficiency_map",
    "efficiency",
    "map_speed_max",
    "map_torque_max",
    "kp_speed",
    "ki_speed",
    "a_max",
    "sample_rate",
    "lookahead_gain",
    "lookahead_min",
    "lookahead_max",
    "steer_rate_max",
    "feedforward",
    "delta_max",
    "low_speed_guard",
    "dt",
    "lane_change_interval",
    "lane_offset",
    "lane_change_length",
    "regen_efficiency",
];

/// Lane-change geometry for one vehicle scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneGeometry<T> {
    pub interval: T,
    pub offset: T,
    pub length: T,
}

/// Parsed configuration: vehicle, efficiency map, driver and run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleConfig<T> {
    pub name: String,
    pub params: VehicleParams<T>,
    pub efficiency: EfficiencyMap<T>,
    pub driver: DriverConfig<T>,
    pub dynamics: DynamicsOptions<T>,
    pub dt: T,
    pub lane: LaneGeometry<T>,
    pub regen_efficiency: T,
}

/// Splits a config file into ordered `(line, key, value)` entries.
fn entries(text: &str) -> Result<Vec<(usize, &str, &str)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: i + 1, reason: format!("expected `key = value`, got `{line}`") })?;
        out.push((i + 1, k.trim(), v.trim()));
    }
    Ok(out)
}

fn number<T: Scalar>(line: usize, key: &str, v: &str) -> Result<T> {
    let x: f64 = v
        .parse()
        .map_err(|_| Error::Parse { line, reason: format!("`{key}`: not a number: `{v}`") })?;
    if !x.is_finite() {
        return Err(Error::Parse { line, reason: format!("`{key}`: must be finite") });
    }
    Ok(T::lit(x))
}

/// Parses a configuration. `base_dir` resolves a relative `efficiency_map`
/// path; `default_name` is used when the file sets no `name`.
pub fn parse_config<T: Scalar>(text: &str, base_dir: Option<&Path>, default_name: &str) -> Result<VehicleConfig<T>> {
    let mut vehicle = Vec::new();
    let mut run: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (line, key, value) in entries(text)? {
        if VehicleParams::<T>::KEYS.contains(&key) {
            vehicle.push((key, number::<T>(line, key, value)?));
        } else if RUN_KEYS.contains(&key) {
            if run.insert(key, (line, value)).is_some() {
                return Err(Error::param(key, "given more than once"));
            }
        } else {
            return Err(Error::UnknownField(key.to_string()));
        }
    }
    let params = VehicleParams::from_pairs(vehicle)?;
    params.validate()?;

    let num = |key: &str| -> Result<Option<T>> {
        run.get(key).map(|(line, v)| number::<T>(*line, key, v)).transpose()
    };
    let or = |key: &str, default: T| -> Result<T> { Ok(num(key)?.unwrap_or(default)) };

    let envelope = TorqueEnvelope::from_params(&params);
    let efficiency = match (run.get("efficiency_map"), num("efficiency")?) {
        (Some(_), Some(_)) => {
            return Err(Error::Config("`efficiency_map` and `efficiency` are mutually exclusive".into()));
        }
        (Some((_, path)), None) => {
            let path = base_dir.map_or_else(|| Path::new(path).to_path_buf(), |d| d.join(path));
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Config(format!("cannot read efficiency map {}: {e}", path.display())))?;
            EfficiencyMap::from_csv(&text, envelope)?
        }
        (None, Some(eta)) => EfficiencyMap::constant(eta, envelope)?,
        (None, None) => {
            let profile_name = run.get("efficiency_profile").map_or("ev", |(_, v)| v);
            let profile = EfficiencyProfile::parse(profile_name)
                .ok_or_else(|| Error::param("efficiency_profile", format!("expected `rcc` or `ev`, got `{profile_name}`")))?;
            let speed_max = or("map_speed_max", T::lit(2.0) * envelope.base_speed())?;
            let torque_max = or("map_torque_max", params.rated_torque)?;
            let axes = TorqueEnvelope { rated_torque: torque_max, rated_power: envelope.rated_power };
            EfficiencyMap::synthetic(profile, axes, speed_max)?.with_envelope(envelope)
        }
    };

    let d = DriverConfig::default();
    let driver = DriverConfig {
        kp_speed: or("kp_speed", d.kp_speed)?,
        ki_speed: or("ki_speed", d.ki_speed)?,
        a_max: or("a_max", d.a_max)?,
        sample_rate: or("sample_rate", d.sample_rate)?,
        lookahead_gain: or("lookahead_gain", d.lookahead_gain)?,
        lookahead_min: or("lookahead_min", d.lookahead_min)?,
        lookahead_max: or("lookahead_max", d.lookahead_max)?,
        steer_rate_max: or("steer_rate_max", d.steer_rate_max)?,
        feedforward: or("feedforward", d.feedforward)?,
    };
    driver.validate()?;
    let o = DynamicsOptions::default();
    let dynamics = DynamicsOptions {
        delta_max: or("delta_max", o.delta_max)?,
        low_speed_guard: or("low_speed_guard", o.low_speed_guard)?,
    };
    if !(dynamics.delta_max > T::zero()) || !(dynamics.low_speed_guard >= T::zero()) {
        return Err(Error::param("delta_max", "steering limit must be > 0 and speed guard >= 0"));
    }
    let dt = or("dt", T::lit(1e-3))?;
    if !(dt > T::zero()) {
        return Err(Error::param("dt", "must be > 0"));
    }
    let lane = LaneGeometry {
        interval: or("lane_change_interval", T::lit(20.0))?,
        offset: or("lane_offset", T::lit(0.5))?,
        length: or("lane_change_length", T::lit(8.0))?,
    };
    if !(lane.length > T::zero()) || !(lane.interval > lane.length) {
        return Err(Error::param("lane_change_interval", "must exceed lane_change_length > 0"));
    }
    let regen_efficiency = or("regen_efficiency", T::lit(0.6))?;
    if !(regen_efficiency >= T::zero() && regen_efficiency <= T::one()) {
        return Err(Error::param("regen_efficiency", "must lie in [0, 1]"));
    }
    let name = run.get("name").map_or(default_name, |(_, v)| v).to_string();
    Ok(VehicleConfig { name, params, efficiency, driver, dynamics, dt, lane, regen_efficiency })
}

impl<T: Scalar> VehicleConfig<T> {
    /// Exactly similar configuration: lengths scaled by `length`, mass by
    /// `mass`, tire stiffness by `stiffness`, and every other setting
    /// (map axes, driver, guard speed, step size, lane geometry) carried over
    /// with the induced factors. Also returns the factors mapping `self`
    /// onto the result.
    pub fn similar(&self, length: T, mass: T, stiffness: T) -> (Self, ScaleFactors<T>) {
        let time = (mass * length / stiffness).sqrt();
        let f = ScaleFactors::from_primary(length / time, time, stiffness * length, stiffness);
        let cfg = Self {
            name: format!("{}-similar", self.name),
            params: self.params.similar(length, mass, stiffness),
            efficiency: self.efficiency.rescaled(stiffness * length, T::one() / time),
            driver: self.driver.scaled(&f),
            dynamics: DynamicsOptions {
                low_speed_guard: self.dynamics.low_speed_guard * f.velocity,
                delta_max: self.dynamics.delta_max,
            },
            dt: self.dt * time,
            lane: LaneGeometry {
                interval: self.lane.interval * length,
                offset: self.lane.offset * length,
                length: self.lane.length * length,
            },
            regen_efficiency: self.regen_efficiency,
        };
        (cfg, f)
    }

    /// Simulation options implied by this configuration.
    pub fn sim_options(&self, regen: bool) -> SimOptions<T> {
        let mut o = SimOptions::with_dt(self.dt);
        o.dynamics = self.dynamics;
        if regen {
            o.regen = RegenPolicy::Enabled { efficiency: self.regen_efficiency };
        }
        o
    }

    pub fn plant(&self) -> Plant<'_, T> {
        Plant { id: &self.name, params: &self.params, efficiency: &self.efficiency, driver: &self.driver }
    }
}

/// Reads and parses a configuration file.
pub fn load_config<T: Scalar>(path: &Path) -> Result<VehicleConfig<T>> {
    let text = std::fs::read_to_string(path)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("vehicle");
    parse_config(&text, path.parent(), stem)
}
