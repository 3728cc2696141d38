use serde::Serialize;

use crate::params::VehicleParams;
use crate::scalar::Scalar;

/// Ratios mapping quantities of system B onto system A: `x_A = k · x_B`.
///
/// Velocity follows from matching pi9, time from pi8 and energy from pi4;
/// the kinematic ratios are derived from those two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleFactors<T> {
    pub velocity: T,
    pub time: T,
    pub distance: T,
    pub energy: T,
    pub acceleration: T,
    pub yaw_rate: T,
    /// Force ratio (cornering-stiffness ratio); needed to carry torques and
    /// powers across scales.
    pub force: T,
}

impl<T: Scalar> ScaleFactors<T> {
    pub fn identity() -> Self {
        Self::from_primary(T::one(), T::one(), T::one(), T::one())
    }

    /// Builds the full set from the independent ratios.
    pub fn from_primary(velocity: T, time: T, energy: T, force: T) -> Self {
        Self {
            velocity,
            time,
            distance: velocity * time,
            energy,
            acceleration: velocity / time,
            yaw_rate: T::one() / time,
            force,
        }
    }

    /// Factors mapping A onto B.
    pub fn inverse(&self) -> Self {
        let one = T::one();
        Self::from_primary(one / self.velocity, one / self.time, one / self.energy, one / self.force)
    }

    /// `self` maps B→A, `other` maps C→B; the result maps C→A.
    pub fn compose(&self, other: &Self) -> Self {
        Self::from_primary(
            self.velocity * other.velocity,
            self.time * other.time,
            self.energy * other.energy,
            self.force * other.force,
        )
    }

    /// Power ratio `k_E / k_t`.
    pub fn power(&self) -> T {
        self.energy / self.time
    }

    /// Per-distance energy ratio `k_E / k_d`.
    pub fn energy_per_distance(&self) -> T {
        self.energy / self.distance
    }
}

/// Similitude factors mapping vehicle `b` onto vehicle `a`.
pub fn scale_factors<T: Scalar>(a: &VehicleParams<T>, b: &VehicleParams<T>) -> ScaleFactors<T> {
    let velocity_scale = |p: &VehicleParams<T>| (p.cf * p.wheelbase / p.mass).sqrt();
    let time_scale = |p: &VehicleParams<T>| (p.mass * p.wheelbase / p.cf).sqrt();
    let energy_scale = |p: &VehicleParams<T>| p.cf * p.wheelbase;
    ScaleFactors::from_primary(
        velocity_scale(a) / velocity_scale(b),
        time_scale(a) / time_scale(b),
        energy_scale(a) / energy_scale(b),
        a.cf / b.cf,
    )
}

/// Wh/m of system A predicted from Wh/m measured on system B.
pub fn scaled_efficiency<T: Scalar>(eff_b: T, factors: &ScaleFactors<T>) -> T {
    eff_b * factors.energy_per_distance()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn identical_vehicles() {
        let p = presets::rcc().params;
        let f = scale_factors(&p, &p);
        assert_eq!(f, ScaleFactors::identity());
        assert_eq!(scaled_efficiency(0.0015, &f), 0.0015);
    }

    #[test]
    fn rcc_from_rivian() {
        let f = scale_factors(&presets::rcc().params, &presets::rivian_r1t().params);
        // direct pi9 coefficient ratio
        let oracle = ((3.78f64 / (90.0 * 0.324)).sqrt() / (3152.0 / (40_700.0 * 3.452f64)).sqrt()).recip();
        assert_relative_eq!(f.velocity, oracle, max_relative = 1e-12);
        assert_relative_eq!(f.velocity, 0.4161, epsilon = 1e-4);
        assert_relative_eq!(f.energy, 90.0 * 0.324 / (40_700.0 * 3.452), max_relative = 1e-12);
        assert_relative_eq!(f.energy, 2.076e-4, epsilon = 1e-7);
        assert_relative_eq!(f.distance, 0.324 / 3.452, max_relative = 1e-12);
    }

    #[test]
    fn kinematic_consistency() {
        let f = scale_factors(&presets::rcc().params, &presets::rivian_r1t().params);
        assert_relative_eq!(f.distance, f.velocity * f.time);
        assert_relative_eq!(f.acceleration, f.velocity / f.time);
        assert_relative_eq!(f.yaw_rate, 1.0 / f.time);
    }

    proptest! {
        #[test]
        fn there_and_back(cf in 10.0f64..1e5, m in 0.5f64..5000.0, l in 0.1f64..5.0) {
            let a = presets::rcc().params;
            let mut b = a;
            b.cf = cf;
            b.mass = m;
            b.wheelbase = l;
            let ab = scale_factors(&a, &b);
            let ba = scale_factors(&b, &a);
            let id = ab.compose(&ba);
            for v in [id.velocity, id.time, id.distance, id.energy, id.acceleration, id.yaw_rate, id.force] {
                prop_assert!((v - 1.0).abs() <= 1e-12);
            }
            let inv = ab.inverse();
            prop_assert!((inv.velocity - ba.velocity).abs() <= 1e-12 * ba.velocity);
        }
    }
}
