//! Electric-vehicle energy simulation on a planar bicycle model, with a
//! Buckingham-π similitude engine for carrying results between a scaled
//! testbed and a full-size vehicle.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); π-group
//! exponents are exact rationals. The aliases at the crate root fix the
//! scalar to `f64`.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod config;
pub mod drivecycle;
pub mod driver;
pub mod dynamics;
pub mod energy;
pub mod error;
pub mod fmt;
pub mod params;
pub mod powertrain;
pub mod presets;
pub mod reporting;
pub mod scalar;
pub mod sim;
pub mod similitude;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type VehicleParams = params::VehicleParams<f64>;
pub type VehicleState = dynamics::VehicleState<f64>;
pub type VehicleInputs = dynamics::VehicleInputs<f64>;
pub type DynamicsOptions = dynamics::DynamicsOptions<f64>;
pub type EfficiencyMap = powertrain::EfficiencyMap<f64>;
pub type TorqueEnvelope = powertrain::TorqueEnvelope<f64>;
pub type RegenPolicy = powertrain::RegenPolicy<f64>;
pub type Trajectory = energy::Trajectory<f64>;
pub type EnergyReport = energy::EnergyReport<f64>;
pub type DriveCycle = drivecycle::DriveCycle<f64>;
pub type ManeuverSchedule = drivecycle::ManeuverSchedule<f64>;
pub type DriverConfig = driver::DriverConfig<f64>;
pub type ScaleFactors = similitude::ScaleFactors<f64>;
pub type SimOptions = sim::SimOptions<f64>;
pub type VehicleConfig = config::VehicleConfig<f64>;
