//! Batch harness: full-size and scaled-car runs over a set of cycles, with
//! and without lane changes, plus the cross-scale comparison tables.

use std::thread;

use serde::Serialize;

use crate::config::VehicleConfig;
use crate::drivecycle::{build_schedule, scale_cycle, DriveCycle, ManeuverSchedule};
use crate::energy::{compare_runs, energy_report, EnergyReport};
use crate::error::{Error, Result};
use crate::fmt::sig6;
use crate::sim::simulate;
use crate::similitude::{scale_factors, scaled_efficiency, ScaleFactors};

/// One hardware run on the scaled car: battery energy [Wh] and distance [m].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchRun {
    pub energy_wh: f64,
    pub distance_m: f64,
}

impl BenchRun {
    pub fn wh_per_m(&self) -> f64 {
        self.energy_wh / self.distance_m
    }
}

/// Measured scaled-car runs, kept for comparison only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchCycle {
    pub label: &'static str,
    pub straight: BenchRun,
    pub lane_change: BenchRun,
    /// Percent change reported alongside the raw runs.
    pub reported_increase_percent: f64,
}

pub const BENCH_CYCLES: [BenchCycle; 2] = [
    BenchCycle {
        label: "Scaled 1",
        straight: BenchRun { energy_wh: 0.1265, distance_m: 99.16 },
        lane_change: BenchRun { energy_wh: 0.1469, distance_m: 98.02 },
        reported_increase_percent: 3.46,
    },
    BenchCycle {
        label: "Scaled 2",
        straight: BenchRun { energy_wh: 0.1427, distance_m: 108.29 },
        lane_change: BenchRun { energy_wh: 0.1709, distance_m: 108.65 },
        reported_increase_percent: 3.78,
    },
];

/// Relative tolerance for the exactly-similar sanity pair.
pub const SANITY_TOLERANCE: f64 = 0.01;
/// Band within which the converted full-size efficiency must match the
/// directly simulated scaled car.
pub const CROSS_SCALE_TOLERANCE: f64 = 0.25;

/// Straight and lane-change reports for one vehicle on one cycle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunPair {
    pub straight: EnergyReport<f64>,
    pub lane_change: EnergyReport<f64>,
    pub increase_percent: f64,
}

impl RunPair {
    pub fn straight_wh_per_m(&self) -> f64 {
        self.straight.efficiency_wh_per_m.unwrap_or(f64::NAN)
    }

    pub fn lane_change_wh_per_m(&self) -> f64 {
        self.lane_change.efficiency_wh_per_m.unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleResult {
    pub cycle: String,
    pub full_size: RunPair,
    pub scaled: RunPair,
    /// Full-size Wh/m converted to the scaled car, straight then lane change.
    pub predicted_wh_per_m: (f64, f64),
    pub bench: Option<BenchCycle>,
}

impl CycleResult {
    /// Worst relative gap between prediction and the simulated scaled car.
    pub fn cross_scale_deviation(&self) -> f64 {
        let d = |pred: f64, sim: f64| ((pred - sim) / sim).abs();
        d(self.predicted_wh_per_m.0, self.scaled.straight_wh_per_m())
            .max(d(self.predicted_wh_per_m.1, self.scaled.lane_change_wh_per_m()))
    }
}

/// Result of the exactly-similar pair run before the tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SanityCheck {
    pub simulated_wh_per_m: f64,
    pub predicted_wh_per_m: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub full_size: String,
    pub scaled: String,
    /// Factors mapping the full-size vehicle onto the scaled car.
    pub factors: ScaleFactors<f64>,
    pub sanity: SanityCheck,
    pub cycles: Vec<CycleResult>,
}

/// Runs straight and lane-change cases side by side.
///
/// The lane-change track covers the straight run's distance so both runs
/// see the same schedule regardless of tracking differences.
pub fn run_pair(cfg: &VehicleConfig<f64>, cycle: &DriveCycle<f64>, regen: bool) -> Result<RunPair> {
    let opts = cfg.sim_options(regen);
    let straight = simulate(cfg.plant(), cycle, &ManeuverSchedule::straight(), &opts)?;
    let track = straight.distance() * 1.05 + cfg.lane.interval;
    let schedule = build_schedule(track, cfg.lane.interval, cfg.lane.offset, cfg.lane.length)?;
    let with_lc = simulate(cfg.plant(), cycle, &schedule, &opts)?;
    pair_from(energy_report(&straight), energy_report(&with_lc))
}

fn pair_from(straight: EnergyReport<f64>, lane_change: EnergyReport<f64>) -> Result<RunPair> {
    let increase_percent = compare_runs(&straight, &lane_change)?;
    Ok(RunPair { lane_change: lane_change.with_delta(increase_percent), straight, increase_percent })
}

/// Simulates `cfg` and an exactly similar copy at the scaled car's size and
/// checks that the converted efficiencies agree within [`SANITY_TOLERANCE`].
pub fn sanity_pair(cfg: &VehicleConfig<f64>, target: &VehicleConfig<f64>, cycle: &DriveCycle<f64>) -> Result<SanityCheck> {
    let (p, t) = (&cfg.params, &target.params);
    let (copy, f) = cfg.similar(t.wheelbase / p.wheelbase, t.mass / p.mass, t.cf / p.cf);
    let small_cycle = scale_cycle(cycle, &f);
    let (big, small) = thread::scope(|s| {
        let big = s.spawn(|| simulate(cfg.plant(), cycle, &ManeuverSchedule::straight(), &cfg.sim_options(false)));
        let small = simulate(copy.plant(), &small_cycle, &ManeuverSchedule::straight(), &copy.sim_options(false));
        (big.join().expect("simulation thread panicked"), small)
    });
    let big = energy_report(&big?).efficiency_wh_per_m;
    let small = energy_report(&small?).efficiency_wh_per_m;
    let (Some(big), Some(small)) = (big, small) else {
        return Err(Error::SanityCheck("sanity cycle covers no distance".into()));
    };
    let predicted = scaled_efficiency(big, &f);
    let deviation = ((predicted - small) / small).abs();
    let check = SanityCheck { simulated_wh_per_m: small, predicted_wh_per_m: predicted, deviation };
    if !(deviation <= SANITY_TOLERANCE) {
        return Err(Error::SanityCheck(format!(
            "similar pair differs by {}% (predicted {} Wh/m, simulated {} Wh/m)",
            sig6(deviation * 100.0),
            sig6(predicted),
            sig6(small)
        )));
    }
    Ok(check)
}

/// Runs the whole comparison: sanity pair first, then every cycle on both
/// vehicles. `cycles` are full-size cycles; the scaled car drives them
/// after conversion with the vehicles' scale factors. Cycles are matched
/// to [`BENCH_CYCLES`] by position.
pub fn run_experiment_suite(
    full_size: &VehicleConfig<f64>,
    scaled: &VehicleConfig<f64>,
    cycles: &[DriveCycle<f64>],
) -> Result<SuiteReport> {
    let first = cycles.first().ok_or_else(|| Error::Config("no drive cycles given".into()))?;
    let sanity = sanity_pair(full_size, scaled, first)?;
    let factors = scale_factors(&scaled.params, &full_size.params);

    let results: Vec<Result<(RunPair, RunPair)>> = thread::scope(|s| {
        let handles: Vec<_> = cycles
            .iter()
            .map(|c| {
                let small = scale_cycle(c, &factors);
                let big = s.spawn(move || run_pair(full_size, c, false));
                let little = s.spawn(move || run_pair(scaled, &small, false));
                (big, little)
            })
            .collect();
        handles
            .into_iter()
            .map(|(b, l)| {
                let b = b.join().expect("simulation thread panicked")?;
                let l = l.join().expect("simulation thread panicked")?;
                Ok((b, l))
            })
            .collect()
    });

    let mut out = Vec::with_capacity(cycles.len());
    for (i, (cycle, r)) in cycles.iter().zip(results).enumerate() {
        let (big, small) = r?;
        let predicted_wh_per_m = (
            scaled_efficiency(big.straight_wh_per_m(), &factors),
            scaled_efficiency(big.lane_change_wh_per_m(), &factors),
        );
        out.push(CycleResult {
            cycle: cycle.name.clone(),
            full_size: big,
            scaled: small,
            predicted_wh_per_m,
            bench: BENCH_CYCLES.get(i).copied(),
        });
    }
    Ok(SuiteReport {
        full_size: full_size.name.clone(),
        scaled: scaled.name.clone(),
        factors,
        sanity,
        cycles: out,
    })
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl SuiteReport {
    /// Full-size energy [kWh], distance [km] and kWh/km per cycle.
    pub fn table_sim_ev_csv(&self) -> String {
        let mut s = String::from(
            "drive_cycle,energy_kwh,distance_km,kwh_per_km,energy_kwh_lc,distance_km_lc,kwh_per_km_lc\n",
        );
        for c in &self.cycles {
            let (a, b) = (&c.full_size.straight, &c.full_size.lane_change);
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                c.cycle,
                a.energy_wh / 1e3,
                a.distance_m / 1e3,
                c.full_size.straight_wh_per_m(),
                b.energy_wh / 1e3,
                b.distance_m / 1e3,
                c.full_size.lane_change_wh_per_m(),
            ));
        }
        s
    }

    /// Scaled-car Wh/m: measured, simulated and predicted from full size.
    pub fn table_rcc_eff_csv(&self) -> String {
        let mut s = String::from(
            "drive_cycle,bench_cycle,actual_wh_per_m,simulated_wh_per_m,predicted_wh_per_m,\
             actual_wh_per_m_lc,simulated_wh_per_m_lc,predicted_wh_per_m_lc,cross_scale_deviation\n",
        );
        for c in &self.cycles {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                c.cycle,
                c.bench.map(|b| b.label).unwrap_or(""),
                opt(c.bench.map(|b| b.straight.wh_per_m())),
                c.scaled.straight_wh_per_m(),
                c.predicted_wh_per_m.0,
                opt(c.bench.map(|b| b.lane_change.wh_per_m())),
                c.scaled.lane_change_wh_per_m(),
                c.predicted_wh_per_m.1,
                c.cross_scale_deviation(),
            ));
        }
        s
    }

    /// Percent increase in Wh/m due to lane changes.
    pub fn table_lc_delta_csv(&self) -> String {
        let mut s = String::from(
            "drive_cycle,bench_cycle,actual_reported_pct,actual_raw_pct,simulated_rcc_pct,simulated_ev_pct\n",
        );
        for c in &self.cycles {
            let raw = c.bench.map(|b| (b.lane_change.wh_per_m() / b.straight.wh_per_m() - 1.0) * 100.0);
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                c.cycle,
                c.bench.map(|b| b.label).unwrap_or(""),
                opt(c.bench.map(|b| b.reported_increase_percent)),
                opt(raw),
                c.scaled.increase_percent,
                c.full_size.increase_percent,
            ));
        }
        s
    }

    /// `(file name, contents)` for every table.
    pub fn tables(&self) -> [(&'static str, String); 3] {
        [
            ("table_sim_ev.csv", self.table_sim_ev_csv()),
            ("table_rcc_eff.csv", self.table_rcc_eff_csv()),
            ("table_lc_delta.csv", self.table_lc_delta_csv()),
        ]
    }

    pub fn max_cross_scale_deviation(&self) -> f64 {
        self.cycles.iter().map(CycleResult::cross_scale_deviation).fold(0.0, f64::max)
    }

    /// Human-readable digest, six significant digits.
    pub fn summary(&self) -> String {
        let f = &self.factors;
        let mut s = format!(
            "{} -> {}: k_v={} k_t={} k_d={} k_E={}\nsanity pair deviation {}%\n",
            self.full_size,
            self.scaled,
            sig6(f.velocity),
            sig6(f.time),
            sig6(f.distance),
            sig6(f.energy),
            sig6(self.sanity.deviation * 100.0)
        );
        for c in &self.cycles {
            s.push_str(&format!(
                "{}: full size {} / {} kWh/km ({:+}%), scaled {} / {} Wh/m ({:+}%), predicted {} / {} Wh/m, deviation {}%\n",
                c.cycle,
                sig6(c.full_size.straight_wh_per_m()),
                sig6(c.full_size.lane_change_wh_per_m()),
                sig6(c.full_size.increase_percent),
                sig6(c.scaled.straight_wh_per_m()),
                sig6(c.scaled.lane_change_wh_per_m()),
                sig6(c.scaled.increase_percent),
                sig6(c.predicted_wh_per_m.0),
                sig6(c.predicted_wh_per_m.1),
                sig6(c.cross_scale_deviation() * 100.0),
            ));
        }
        s
    }
}
