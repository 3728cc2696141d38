//! Bundled vehicle configurations (the files under `configs/`).

use crate::config::{parse_config, VehicleConfig};
use crate::drivecycle::{parse_drive_cycle, DriveCycle};
use crate::scalar::Scalar;

pub const RCC_CFG: &str = include_str!("../../../configs/rcc.cfg");
pub const RIVIAN_R1T_CFG: &str = include_str!("../../../configs/rivian_r1t.cfg");
pub const RIVIAN_R1T_MATCHED_CFG: &str = include_str!("../../../configs/rivian_r1t_matched.cfg");

/// Bundled configuration by name, in any scalar width.
pub fn by_name<T: Scalar>(name: &str) -> Option<VehicleConfig<T>> {
    let text = match name {
        "rcc" => RCC_CFG,
        "rivian_r1t" => RIVIAN_R1T_CFG,
        "rivian_r1t_matched" => RIVIAN_R1T_MATCHED_CFG,
        _ => return None,
    };
    Some(parse_config(text, None, name).expect("bundled configuration is valid"))
}

/// The 1/10 scale RC car.
pub fn rcc() -> VehicleConfig<f64> {
    by_name("rcc").unwrap()
}

/// Full-size pick-up with its own yaw inertia, damping and motor map.
pub fn rivian_r1t() -> VehicleConfig<f64> {
    by_name("rivian_r1t").unwrap()
}

/// Full-size pick-up carrying the RC car's constant groups and map shape.
pub fn rivian_r1t_matched() -> VehicleConfig<f64> {
    by_name("rivian_r1t_matched").unwrap()
}

pub const STANDIN_CYCLE_1: &str = include_str!("../../../cycles/udds_standin_1.csv");
pub const STANDIN_CYCLE_2: &str = include_str!("../../../cycles/udds_standin_2.csv");

/// The two bundled full-size urban cycles.
pub fn standin_cycles<T: Scalar>() -> Vec<DriveCycle<T>> {
    [("udds_standin_1", STANDIN_CYCLE_1), ("udds_standin_2", STANDIN_CYCLE_2)]
        .iter()
        .map(|(name, text)| parse_drive_cycle(text, name).expect("bundled cycle is valid"))
        .collect()
}
