//! Reference speed profiles and lane-change schedules.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::similitude::ScaleFactors;

pub const CYCLE_HEADER: &str = "time_s,speed_mps";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CyclePoint<T> {
    pub t: T,
    pub v: T,
}

/// Time/speed reference, linearly interpolated between samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriveCycle<T> {
    pub name: String,
    points: Vec<CyclePoint<T>>,
}

impl<T: Scalar> DriveCycle<T> {
    /// Validated cycle: time starts at zero and strictly increases, speeds
    /// are finite and non-negative.
    pub fn new(name: impl Into<String>, points: Vec<CyclePoint<T>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Config("drive cycle has no samples".into()));
        }
        for (i, p) in points.iter().enumerate() {
            let line = i + 2;
            if !p.t.is_finite() || !p.v.is_finite() {
                return Err(Error::Parse { line, reason: "non-finite value".into() });
            }
            if p.v < T::zero() {
                return Err(Error::Parse { line, reason: format!("negative speed {}", p.v) });
            }
            if i == 0 && p.t != T::zero() {
                return Err(Error::Parse { line, reason: format!("time must start at 0, found {}", p.t) });
            }
            if i > 0 && p.t <= points[i - 1].t {
                return Err(Error::Parse { line, reason: format!("time {} not after {}", p.t, points[i - 1].t) });
            }
        }
        Ok(Self { name: name.into(), points })
    }

    pub fn points(&self) -> &[CyclePoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn duration(&self) -> T {
        self.points.last().map_or(T::zero(), |p| p.t)
    }

    /// Reference speed at `t`, held at the end values outside the cycle.
    pub fn speed_at(&self, t: T) -> T {
        let pts = &self.points;
        if t <= pts[0].t {
            return pts[0].v;
        }
        let last = pts[pts.len() - 1];
        if t >= last.t {
            return last.v;
        }
        let i = pts.partition_point(|p| p.t <= t) - 1;
        let (a, b) = (pts[i], pts[i + 1]);
        a.v + (b.v - a.v) * (t - a.t) / (b.t - a.t)
    }

    /// Uniform resampling at `dt` over the cycle duration.
    pub fn resample(&self, dt: T) -> Result<Self> {
        if !(dt > T::zero()) {
            return Err(Error::param("dt", "must be > 0"));
        }
        let steps = (self.duration() / dt).floor().to_usize().unwrap_or(0);
        let mut points: Vec<CyclePoint<T>> = (0..=steps)
            .map(|k| {
                let t = T::lit(k as f64) * dt;
                CyclePoint { t, v: self.speed_at(t) }
            })
            .collect();
        if points.last().is_none_or(|p| p.t < self.duration()) {
            points.push(*self.points.last().expect("validated non-empty"));
        }
        Self::new(self.name.clone(), points)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CYCLE_HEADER);
        out.push('\n');
        for p in &self.points {
            let _ = writeln!(out, "{},{}", p.t, p.v);
        }
        out
    }
}

/// Parses the `time_s,speed_mps` CSV format. Blank lines and `#` comments
/// are skipped; errors carry 1-based line numbers.
pub fn parse_drive_cycle<T: Scalar>(text: &str, name: &str) -> Result<DriveCycle<T>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let header = lines.find(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match header {
        Some((_, h)) if h.replace(' ', "") == CYCLE_HEADER => {}
        Some((line, h)) => {
            return Err(Error::Parse { line, reason: format!("expected header `{CYCLE_HEADER}`, found `{h}`") })
        }
        None => return Err(Error::Parse { line: 1, reason: "empty drive-cycle file".into() }),
    }
    let mut points = Vec::new();
    let mut lines_of = Vec::new();
    for (line, l) in lines {
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = l.split(',').map(str::trim).collect();
        if cells.len() != 2 {
            return Err(Error::Parse { line, reason: format!("expected 2 columns, found {}", cells.len()) });
        }
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::Parse { line, reason: format!("not a number: `{s}`") })
        };
        points.push(CyclePoint { t: T::lit(num(cells[0])?), v: T::lit(num(cells[1])?) });
        lines_of.push(line);
    }
    if points.is_empty() {
        return Err(Error::Parse { line: 2, reason: "drive cycle has no samples".into() });
    }
    // Re-map validation errors onto file line numbers.
    DriveCycle::new(name, points).map_err(|e| match e {
        Error::Parse { line, reason } => Error::Parse { line: lines_of[line - 2], reason },
        other => other,
    })
}

/// `t' = k_t·t`, `v' = k_v·v`.
pub fn scale_cycle<T: Scalar>(cycle: &DriveCycle<T>, factors: &ScaleFactors<T>) -> DriveCycle<T> {
    DriveCycle {
        name: format!("{}-scaled", cycle.name),
        points: cycle.points.iter().map(|p| CyclePoint { t: p.t * factors.time, v: p.v * factors.velocity }).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleStats<T> {
    pub duration: T,
    pub distance: T,
    pub v_max: T,
    /// Time-averaged speed.
    pub v_mean: T,
}

pub fn cycle_stats<T: Scalar>(cycle: &DriveCycle<T>) -> CycleStats<T> {
    let half = T::lit(0.5);
    let distance: T = cycle.points.windows(2).map(|w| half * (w[0].v + w[1].v) * (w[1].t - w[0].t)).sum();
    let duration = cycle.duration();
    let v_max = cycle.points.iter().map(|p| p.v).fold(T::zero(), T::max);
    let v_mean = if duration > T::zero() { distance / duration } else { cycle.points[0].v };
    CycleStats { duration, distance, v_max, v_mean }
}

/// A single lateral transition starting at longitudinal position `start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaneChange<T> {
    pub start: T,
    /// Signed lateral displacement of the lane centre [m].
    pub shift: T,
}

/// Lane changes at fixed longitudinal spacing with alternating direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManeuverSchedule<T> {
    pub interval: T,
    pub offset: T,
    pub length: T,
    pub events: Vec<LaneChange<T>>,
}

pub fn build_schedule<T: Scalar>(track_length: T, interval: T, offset: T, lc_length: T) -> Result<ManeuverSchedule<T>> {
    if !(lc_length > T::zero()) {
        return Err(Error::param("lane_change_length", "must be > 0"));
    }
    if !(interval > lc_length) {
        return Err(Error::param("lane_change_interval", "must exceed the lane-change length"));
    }
    if !offset.is_finite() || !track_length.is_finite() {
        return Err(Error::param("lane_offset", "must be finite"));
    }
    let last_start = track_length - lc_length;
    let mut events = Vec::new();
    let mut k = 1usize;
    loop {
        let start = interval * T::lit(k as f64);
        if start > last_start {
            break;
        }
        let shift = if k % 2 == 1 { offset } else { -offset };
        events.push(LaneChange { start, shift });
        k += 1;
    }
    Ok(ManeuverSchedule { interval, offset, length: lc_length, events })
}

impl<T: Scalar> ManeuverSchedule<T> {
    /// Schedule with no events (straight driving).
    pub fn straight() -> Self {
        let z = T::zero();
        Self { interval: z, offset: z, length: T::one(), events: Vec::new() }
    }

    pub fn is_straight(&self) -> bool {
        self.events.is_empty()
    }

    /// Lateral position of the active lane centre at longitudinal position
    /// `x`. Each transition follows a half-cosine over the lane-change length.
    pub fn lane_center(&self, x: T) -> T {
        let mut y = T::zero();
        for ev in &self.events {
            let u = (x - ev.start) / self.length;
            if u <= T::zero() {
                break;
            }
            let blend = if u >= T::one() { T::one() } else { (T::one() - (T::PI() * u).cos()) / T::lit(2.0) };
            y = y + ev.shift * blend;
        }
        y
    }

    /// Every length multiplied by `k`.
    pub fn scaled(&self, k: T) -> Self {
        Self {
            interval: self.interval * k,
            offset: self.offset * k,
            length: self.length * k,
            events: self.events.iter().map(|e| LaneChange { start: e.start * k, shift: e.shift * k }).collect(),
        }
    }

    /// Compact identifier used in run metadata.
    pub fn id(&self) -> String {
        if self.is_straight() {
            "straight".into()
        } else {
            format!("lc-{}m-x{}", self.interval, self.events.len())
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("schedule serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cycle(points: &[(f64, f64)]) -> DriveCycle<f64> {
        DriveCycle::new("t", points.iter().map(|&(t, v)| CyclePoint { t, v }).collect()).unwrap()
    }

    #[test]
    fn parses_two_rows() {
        let c: DriveCycle<f64> = parse_drive_cycle("time_s,speed_mps\n0,0\n1,1\n", "x").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.duration(), 1.0);
    }

    #[test]
    fn empty_body_rejected() {
        assert!(parse_drive_cycle::<f64>("time_s,speed_mps\n", "x").is_err());
        assert!(parse_drive_cycle::<f64>("", "x").is_err());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad_time = "time_s,speed_mps\n0,0\n# note\n2,1\n1,1\n";
        assert!(matches!(parse_drive_cycle::<f64>(bad_time, "x"), Err(Error::Parse { line: 5, .. })));
        let negative = "time_s,speed_mps\n0,0\n1,-1\n";
        assert!(matches!(parse_drive_cycle::<f64>(negative, "x"), Err(Error::Parse { line: 3, .. })));
        let malformed = "time_s,speed_mps\n0,0\n1;1\n";
        assert!(matches!(parse_drive_cycle::<f64>(malformed, "x"), Err(Error::Parse { line: 3, .. })));
        let header = "t,v\n0,0\n";
        assert!(matches!(parse_drive_cycle::<f64>(header, "x"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn write_read_identity() {
        let pts: Vec<(f64, f64)> = (0..500).map(|i| (i as f64 * 0.5, (i as f64 * 0.013).sin().abs() * 12.3)).collect();
        let c = cycle(&pts);
        let back = parse_drive_cycle::<f64>(&c.to_csv(), "t").unwrap();
        assert_eq!(back.len(), 500);
        assert_eq!(back, c);
        assert_eq!(back.duration(), 249.5);
    }

    #[test]
    fn scaling() {
        let c = cycle(&[(0.0, 0.0), (100.0, 10.0)]);
        assert_eq!(scale_cycle(&c, &ScaleFactors::identity()).points(), c.points());
        let f = ScaleFactors::from_primary(0.416, 0.248, 1.0, 1.0);
        let s = scale_cycle(&c, &f);
        assert_relative_eq!(s.points()[1].t, 24.8, epsilon = 1e-12);
        assert_relative_eq!(s.points()[1].v, 4.16, epsilon = 1e-12);
    }

    #[test]
    fn stats() {
        let c = cycle(&[(0.0, 5.0), (20.0, 5.0)]);
        let s = cycle_stats(&c);
        assert_eq!(s.distance, 100.0);
        assert_eq!(s.v_mean, 5.0);
        assert_eq!(cycle_stats(&cycle(&[(0.0, 0.0), (10.0, 0.0)])).distance, 0.0);
    }

    #[test]
    fn interpolation_and_resampling() {
        let c = cycle(&[(0.0, 0.0), (2.0, 4.0), (3.0, 4.0)]);
        assert_eq!(c.speed_at(1.0), 2.0);
        assert_eq!(c.speed_at(10.0), 4.0);
        let r = c.resample(0.5).unwrap();
        assert_eq!(r.len(), 7);
        assert_eq!(r.points()[3].v, 3.0);
        assert_eq!(r.points()[4].v, 4.0);
        assert_relative_eq!(cycle_stats(&r).distance, cycle_stats(&c).distance, epsilon = 1e-12);
    }

    #[test]
    fn schedule_enumeration() {
        let s = build_schedule(150.0, 20.0, 0.5, 8.0).unwrap();
        let starts: Vec<f64> = s.events.iter().map(|e| e.start).collect();
        assert_eq!(starts, [20.0, 40.0, 60.0, 80.0, 100.0, 120.0, 140.0]);
        assert!(s.events.windows(2).all(|w| w[0].shift == -w[1].shift));
        assert!(build_schedule(10.0, 20.0, 0.5, 8.0).unwrap().events.is_empty());
        assert!(build_schedule(150.0, 8.0, 0.5, 8.0).is_err());
        assert!(build_schedule(150.0, 20.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn lane_center_profile() {
        let s = build_schedule(100.0, 20.0, 0.5, 8.0).unwrap();
        assert_eq!(s.lane_center(10.0), 0.0);
        assert_relative_eq!(s.lane_center(24.0), 0.25, epsilon = 1e-12);
        assert_eq!(s.lane_center(30.0), 0.5);
        assert_relative_eq!(s.lane_center(50.0), 0.0, epsilon = 1e-15);
        assert_eq!(ManeuverSchedule::<f64>::straight().lane_center(50.0), 0.0);
    }

    proptest! {
        #[test]
        fn scale_and_unscale(kv in 0.05f64..20.0, kt in 0.05f64..20.0) {
            let c = cycle(&[(0.0, 0.0), (3.0, 2.0), (7.5, 6.0), (9.0, 0.0)]);
            let f = ScaleFactors::from_primary(kv, kt, 1.0, 1.0);
            let s = scale_cycle(&c, &f);
            prop_assert_eq!(s.len(), c.len());
            prop_assert!(s.points().windows(2).all(|w| w[1].t > w[0].t));
            let back = scale_cycle(&s, &f.inverse());
            for (a, b) in back.points().iter().zip(c.points()) {
                prop_assert!((a.t - b.t).abs() <= 1e-12 * b.t.max(1.0));
                prop_assert!((a.v - b.v).abs() <= 1e-12 * b.v.max(1.0));
            }
            let d0 = cycle_stats(&c).distance;
            let d1 = cycle_stats(&s).distance;
            prop_assert!((d1 - kv * kt * d0).abs() <= 1e-12 * d1.max(1e-12));
        }

        #[test]
        fn schedule_is_deterministic(len in 10.0f64..500.0, interval in 9.0f64..60.0, offset in -2.0f64..2.0) {
            let a = build_schedule(len, interval, offset, 8.0).unwrap();
            let b = build_schedule(len, interval, offset, 8.0).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
