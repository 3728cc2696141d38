//! Physical constants describing one vehicle.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// All physical constants of one vehicle, SI units throughout.
///
/// The key-value file format uses the short symbol of each field (`m`, `Iz`,
/// `lF`, ...); see [`VehicleParams::KEYS`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VehicleParams<T> {
    /// Mass [kg].
    pub mass: T,
    /// Yaw moment of inertia about the CoG [kg·m²].
    pub yaw_inertia: T,
    /// CoG to front axle [m].
    pub l_front: T,
    /// CoG to rear axle [m].
    pub l_rear: T,
    /// Wheelbase [m].
    pub wheelbase: T,
    /// Cornering stiffness per front tire [N/rad].
    pub cf: T,
    /// Cornering stiffness per rear tire [N/rad].
    pub cr: T,
    /// Tire radius [m].
    pub wheel_radius: T,
    /// Differential gear ratio.
    pub diff_ratio: T,
    /// Differential efficiency.
    pub diff_efficiency: T,
    /// Effective inertia at the motor shaft [kg·m²].
    pub shaft_inertia: T,
    /// Effective torsional damping at the motor shaft [N·m·s/rad].
    pub shaft_damping: T,
    /// Motor pole count.
    pub pole_count: T,
    /// Permanent-magnet flux linkage [Wb].
    pub flux_linkage: T,
    /// Motor speed below which speed commands produce no motion [rad/s].
    pub dead_zone_speed: T,
    /// Rated motor torque [N·m].
    pub rated_torque: T,
    /// Rated motor power [W].
    pub rated_power: T,
}

impl<T: Scalar> VehicleParams<T> {
    /// File keys, in declaration order.
    pub const KEYS: [&'static str; 17] = [
        "m",
        "Iz",
        "lF",
        "lR",
        "l",
        "CF",
        "CR",
        "rw",
        "Nd",
        "eta_i",
        "J",
        "B",
        "Np",
        "lambda",
        "dead_zone_speed",
        "tau_rated",
        "P_rated",
    ];

    pub fn get(&self, key: &str) -> Option<T> {
        Some(match key {
            "m" => self.mass,
            "Iz" => self.yaw_inertia,
            "lF" => self.l_front,
            "lR" => self.l_rear,
            "l" => self.wheelbase,
            "CF" => self.cf,
            "CR" => self.cr,
            "rw" => self.wheel_radius,
            "Nd" => self.diff_ratio,
            "eta_i" => self.diff_efficiency,
            "J" => self.shaft_inertia,
            "B" => self.shaft_damping,
            "Np" => self.pole_count,
            "lambda" => self.flux_linkage,
            "dead_zone_speed" => self.dead_zone_speed,
            "tau_rated" => self.rated_torque,
            "P_rated" => self.rated_power,
            _ => return None,
        })
    }

    fn slot(&mut self, key: &str) -> Option<&mut T> {
        Some(match key {
            "m" => &mut self.mass,
            "Iz" => &mut self.yaw_inertia,
            "lF" => &mut self.l_front,
            "lR" => &mut self.l_rear,
            "l" => &mut self.wheelbase,
            "CF" => &mut self.cf,
            "CR" => &mut self.cr,
            "rw" => &mut self.wheel_radius,
            "Nd" => &mut self.diff_ratio,
            "eta_i" => &mut self.diff_efficiency,
            "J" => &mut self.shaft_inertia,
            "B" => &mut self.shaft_damping,
            "Np" => &mut self.pole_count,
            "lambda" => &mut self.flux_linkage,
            "dead_zone_speed" => &mut self.dead_zone_speed,
            "tau_rated" => &mut self.rated_torque,
            "P_rated" => &mut self.rated_power,
            _ => return None,
        })
    }

    /// Builds a parameter set from `(key, value)` pairs. Every key in
    /// [`Self::KEYS`] must appear exactly once.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, T)>) -> Result<Self> {
        let mut params = Self::zeroed();
        let mut seen = [false; 17];
        for (key, value) in pairs {
            let idx = Self::KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| Error::UnknownField(key.to_string()))?;
            if seen[idx] {
                return Err(Error::param(key, "given more than once"));
            }
            seen[idx] = true;
            *params.slot(key).expect("key listed in KEYS") = value;
        }
        if let Some(idx) = seen.iter().position(|s| !s) {
            return Err(Error::MissingField(Self::KEYS[idx].to_string()));
        }
        params.validate()?;
        Ok(params)
    }

    fn zeroed() -> Self {
        let z = T::zero();
        Self {
            mass: z,
            yaw_inertia: z,
            l_front: z,
            l_rear: z,
            wheelbase: z,
            cf: z,
            cr: z,
            wheel_radius: z,
            diff_ratio: z,
            diff_efficiency: z,
            shaft_inertia: z,
            shaft_damping: z,
            pole_count: z,
            flux_linkage: z,
            dead_zone_speed: z,
            rated_torque: z,
            rated_power: z,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for key in Self::KEYS {
            let v = self.get(key).expect("key listed in KEYS");
            if !v.is_finite() {
                return Err(Error::param(key, "must be finite"));
            }
        }
        let positive = [
            ("m", self.mass),
            ("Iz", self.yaw_inertia),
            ("CF", self.cf),
            ("CR", self.cr),
            ("rw", self.wheel_radius),
            ("Nd", self.diff_ratio),
            ("l", self.wheelbase),
        ];
        for (name, v) in positive {
            if v <= T::zero() {
                return Err(Error::param(name, format!("must be > 0, got {v}")));
            }
        }
        let non_negative = [
            ("lF", self.l_front),
            ("lR", self.l_rear),
            ("J", self.shaft_inertia),
            ("B", self.shaft_damping),
            ("dead_zone_speed", self.dead_zone_speed),
            ("tau_rated", self.rated_torque),
            ("P_rated", self.rated_power),
        ];
        for (name, v) in non_negative {
            if v < T::zero() {
                return Err(Error::param(name, format!("must be >= 0, got {v}")));
            }
        }
        if self.diff_efficiency <= T::zero() || self.diff_efficiency > T::one() {
            return Err(Error::param("eta_i", "must lie in (0, 1]"));
        }
        let gap = (self.l_front + self.l_rear - self.wheelbase).abs();
        if gap > T::lit(1e-9) * self.wheelbase {
            return Err(Error::param(
                "l",
                format!(
                    "lF + lR = {} does not match wheelbase {}",
                    self.l_front + self.l_rear,
                    self.wheelbase
                ),
            ));
        }
        Ok(())
    }

    /// Geometrically and dynamically similar vehicle.
    ///
    /// Lengths scale by `length`, mass by `mass` and tire stiffness by
    /// `stiffness`; every other constant follows so that all dimensionless
    /// groups of the bicycle/drivetrain model are unchanged. The gear ratio
    /// is kept, so the wheel radius scales with length.
    pub fn similar(&self, length: T, mass: T, stiffness: T) -> Self {
        let time = (mass * length / stiffness).sqrt();
        let torque = stiffness * length;
        Self {
            mass: self.mass * mass,
            yaw_inertia: self.yaw_inertia * mass * length * length,
            l_front: self.l_front * length,
            l_rear: self.l_rear * length,
            wheelbase: self.wheelbase * length,
            cf: self.cf * stiffness,
            cr: self.cr * stiffness,
            wheel_radius: self.wheel_radius * length,
            diff_ratio: self.diff_ratio,
            diff_efficiency: self.diff_efficiency,
            shaft_inertia: self.shaft_inertia * mass * length * length,
            shaft_damping: self.shaft_damping * mass * length * length / time,
            pole_count: self.pole_count,
            flux_linkage: self.flux_linkage * torque,
            dead_zone_speed: self.dead_zone_speed / time,
            rated_torque: self.rated_torque * torque,
            rated_power: self.rated_power * torque / time,
        }
    }

    pub fn cast<U: Scalar>(&self) -> VehicleParams<U> {
        let c = |x: T| U::lit(x.as_f64());
        VehicleParams {
            mass: c(self.mass),
            yaw_inertia: c(self.yaw_inertia),
            l_front: c(self.l_front),
            l_rear: c(self.l_rear),
            wheelbase: c(self.wheelbase),
            cf: c(self.cf),
            cr: c(self.cr),
            wheel_radius: c(self.wheel_radius),
            diff_ratio: c(self.diff_ratio),
            diff_efficiency: c(self.diff_efficiency),
            shaft_inertia: c(self.shaft_inertia),
            shaft_damping: c(self.shaft_damping),
            pole_count: c(self.pole_count),
            flux_linkage: c(self.flux_linkage),
            dead_zone_speed: c(self.dead_zone_speed),
            rated_torque: c(self.rated_torque),
            rated_power: c(self.rated_power),
        }
    }

    /// Motor speed per unit vehicle speed, `Nd / rw` [rad/m].
    #[inline]
    pub fn speed_ratio(&self) -> T {
        self.diff_ratio / self.wheel_radius
    }
}
