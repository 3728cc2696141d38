//! Battery energy accumulation, per-run reports and run comparison.

use std::fmt::Write as _;

use serde::Serialize;

use crate::dynamics::{VehicleInputs, VehicleState};
use crate::error::{Error, Result};
use crate::fmt::sig6;
use crate::scalar::Scalar;

const JOULES_PER_WH: f64 = 3600.0;

/// One logged instant of a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample<T> {
    pub t: T,
    pub state: VehicleState<T>,
    pub inputs: VehicleInputs<T>,
    /// Motor shaft torque [N·m].
    pub tau: T,
    /// Motor speed [rad/s].
    pub omega: T,
    /// Battery power [W].
    pub pb: T,
    /// Cumulative battery energy [J].
    pub eb: T,
}

/// Uniformly sampled simulation output.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub dt: T,
    pub params_id: String,
    pub schedule_id: String,
    pub samples: Vec<Sample<T>>,
    /// Steps where the commanded torque had to be clamped to the envelope.
    pub envelope_violations: usize,
}

impl<T: Scalar> Trajectory<T> {
    pub const CSV_HEADER: &'static str = "t,x,y,psi,vx,vy,r,a,delta,tau,omega,Pb,Eb";

    /// Full-precision CSV with one row per sample.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.samples.len() * 160);
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            let st = &s.state;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                s.t, st.x, st.y, st.psi, st.vx, st.vy, st.r, s.inputs.a, s.inputs.delta, s.tau, s.omega, s.pb, s.eb
            );
        }
        out
    }

    /// Longitudinal distance `∫ vx dt` by the trapezoidal rule.
    pub fn distance(&self) -> T {
        let half = self.dt / T::lit(2.0);
        self.samples.windows(2).map(|w| half * (w[0].state.vx + w[1].state.vx)).sum()
    }

    pub fn final_energy(&self) -> T {
        self.samples.last().map_or(T::zero(), |s| s.eb)
    }

    pub fn duration(&self) -> T {
        self.samples.last().map_or(T::zero(), |s| s.t)
    }
}

/// Cumulative trapezoidal integral of a uniformly sampled power series,
/// starting from zero.
pub fn integrate_energy<T: Scalar>(power: &[T], dt: T) -> Result<Vec<T>> {
    if !(dt > T::zero()) {
        return Err(Error::param("dt", "must be > 0"));
    }
    if let Some(idx) = power.iter().position(|p| !p.is_finite()) {
        return Err(Error::NonFinitePower(idx));
    }
    let mut out = Vec::with_capacity(power.len());
    let mut acc = T::zero();
    let half = dt / T::lit(2.0);
    for (i, p) in power.iter().enumerate() {
        if i > 0 {
            acc = acc + half * (power[i - 1] + *p);
        }
        out.push(acc);
    }
    Ok(out)
}

/// Per-run energy summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport<T> {
    pub energy_wh: T,
    pub distance_m: T,
    /// `energy / distance`; absent when nothing was travelled.
    pub efficiency_wh_per_m: Option<T>,
    pub peak_power_w: T,
    /// Percent change in Wh/m relative to a paired baseline run.
    pub delta_percent: Option<T>,
}

pub fn energy_report<T: Scalar>(traj: &Trajectory<T>) -> EnergyReport<T> {
    let energy_wh = traj.final_energy() / T::lit(JOULES_PER_WH);
    let distance_m = traj.distance();
    let efficiency_wh_per_m = (distance_m > T::zero()).then(|| energy_wh / distance_m);
    let peak_power_w = traj.samples.iter().map(|s| s.pb).fold(T::zero(), T::max);
    EnergyReport { energy_wh, distance_m, efficiency_wh_per_m, peak_power_w, delta_percent: None }
}

impl<T: Scalar> EnergyReport<T> {
    /// Report built from measured totals rather than a trajectory.
    pub fn from_totals(energy_wh: T, distance_m: T) -> Self {
        Self {
            energy_wh,
            distance_m,
            efficiency_wh_per_m: (distance_m > T::zero()).then(|| energy_wh / distance_m),
            peak_power_w: T::zero(),
            delta_percent: None,
        }
    }

    pub fn with_delta(mut self, delta_percent: T) -> Self {
        self.delta_percent = Some(delta_percent);
        self
    }

    pub const CSV_HEADER: &'static str = "energy_wh,distance_m,efficiency_wh_per_m,peak_power_w,delta_percent";

    pub fn to_csv_row(&self) -> String {
        let opt = |v: Option<T>| v.map(|v| sig6(v.as_f64())).unwrap_or_default();
        format!(
            "{},{},{},{},{}",
            sig6(self.energy_wh.as_f64()),
            sig6(self.distance_m.as_f64()),
            opt(self.efficiency_wh_per_m),
            sig6(self.peak_power_w.as_f64()),
            opt(self.delta_percent)
        )
    }

    /// Flat JSON object, numbers at six significant digits.
    pub fn to_json(&self) -> String {
        let opt = |v: Option<T>| v.map(|v| sig6(v.as_f64())).unwrap_or_else(|| "null".into());
        format!(
            "{{\n  \"energy_wh\": {},\n  \"distance_m\": {},\n  \"efficiency_wh_per_m\": {},\n  \"peak_power_w\": {},\n  \"delta_percent\": {}\n}}\n",
            sig6(self.energy_wh.as_f64()),
            sig6(self.distance_m.as_f64()),
            opt(self.efficiency_wh_per_m),
            sig6(self.peak_power_w.as_f64()),
            opt(self.delta_percent)
        )
    }
}

/// Percent increase in Wh/m of `with_lc` over `straight`. Negative results
/// are allowed and indicate the lane-change run was cheaper.
pub fn compare_runs<T: Scalar>(straight: &EnergyReport<T>, with_lc: &EnergyReport<T>) -> Result<T> {
    let (Some(base), Some(lc)) = (straight.efficiency_wh_per_m, with_lc.efficiency_wh_per_m) else {
        return Err(Error::Config("both reports need a defined efficiency".into()));
    };
    if base == T::zero() {
        return Err(Error::Config("baseline efficiency is zero".into()));
    }
    Ok(T::lit(100.0) * (lc - base) / base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn rectangle() {
        let e = integrate_energy(&[100.0; 37], 1.0).unwrap();
        assert_eq!(e[0], 0.0);
        assert_relative_eq!(*e.last().unwrap(), 3600.0);
    }

    #[test]
    fn zero_power() {
        assert!(integrate_energy(&[0.0; 10], 0.1).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn linear_ramp_exact() {
        let p: Vec<f64> = (0..=100).map(|i| i as f64).collect();
        let e = integrate_energy(&p, 0.1).unwrap();
        assert_relative_eq!(*e.last().unwrap(), 500.0, epsilon = 1e-9);
    }

    #[test]
    fn bad_sample_identified() {
        assert!(matches!(integrate_energy(&[1.0, f64::NAN, 2.0], 0.1), Err(Error::NonFinitePower(1))));
        assert!(integrate_energy(&[1.0], 0.0).is_err());
    }

    #[test]
    fn measured_rcc_rows() {
        let s1 = EnergyReport::from_totals(0.1265, 99.16);
        assert_relative_eq!(s1.efficiency_wh_per_m.unwrap(), 0.0012757, epsilon = 1e-7);
        let l1 = EnergyReport::from_totals(0.1469, 98.02);
        assert_relative_eq!(l1.efficiency_wh_per_m.unwrap(), 0.0014987, epsilon = 1e-7);
        assert!(EnergyReport::from_totals(0.0, 0.0).efficiency_wh_per_m.is_none());
    }

    #[test]
    fn comparison() {
        let a = EnergyReport::from_totals(1.0, 10.0);
        assert_eq!(compare_runs(&a, &a).unwrap(), 0.0);
        let s1 = EnergyReport::from_totals(0.1265, 99.16);
        let l1 = EnergyReport::from_totals(0.1469, 98.02);
        assert_relative_eq!(compare_runs(&s1, &l1).unwrap(), 17.48, epsilon = 0.01);
        assert!(compare_runs(&l1, &s1).unwrap() < 0.0);
        assert!(compare_runs(&a, &EnergyReport::from_totals(0.0, 0.0)).is_err());
    }

    #[test]
    fn report_formats() {
        let r = EnergyReport::from_totals(0.1265, 99.16);
        assert_eq!(r.to_csv_row(), "0.1265,99.16,0.00127572,0,");
        let json = r.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["delta_percent"], serde_json::Value::Null);
        assert_eq!(v["distance_m"].as_f64(), Some(99.16));
    }

    proptest! {
        #[test]
        fn additivity(p in proptest::collection::vec(0.0f64..1000.0, 2..200), cut in 1usize..199) {
            let cut = cut.min(p.len() - 1);
            let dt = 0.01;
            let whole = *integrate_energy(&p, dt).unwrap().last().unwrap();
            let a = *integrate_energy(&p[..=cut], dt).unwrap().last().unwrap();
            let b = *integrate_energy(&p[cut..], dt).unwrap().last().unwrap();
            prop_assert!((whole - (a + b)).abs() <= 1e-12 * whole.abs().max(1e-12));
        }

        #[test]
        fn non_negative_power_is_monotone(p in proptest::collection::vec(0.0f64..1000.0, 1..100)) {
            let e = integrate_energy(&p, 0.05).unwrap();
            prop_assert!(e.windows(2).all(|w| w[1] >= w[0]));
        }
    }
}
