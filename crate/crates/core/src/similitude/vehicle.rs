//! The sixteen-quantity set of the bicycle/drivetrain energy model and its
//! thirteen named groups.

use serde::Serialize;

use super::{compute_pi_groups, Dimensions, PiGroupSet, Quantity};
use crate::error::{Error, Result};
use crate::fmt::sig6;
use crate::params::VehicleParams;
use crate::scalar::Scalar;

/// Names of the model quantities, repeating set (m, CF, l) first, then the
/// anchors of pi1..pi13 in order.
const ORDER: [(&str, Dimensions); 16] = [
    ("m", Dimensions::MASS),
    ("CF", Dimensions::FORCE),
    ("l", Dimensions::LENGTH),
    ("delta", Dimensions::NONE),
    ("a", Dimensions::ACCELERATION),
    ("lF", Dimensions::LENGTH),
    ("Eb", Dimensions::ENERGY),
    ("eta", Dimensions::NONE),
    ("Iz", Dimensions::INERTIA),
    ("CR", Dimensions::FORCE),
    ("t", Dimensions::TIME),
    ("vx", Dimensions::VELOCITY),
    ("vy", Dimensions::VELOCITY),
    ("r", Dimensions::FREQUENCY),
    ("J", Dimensions::INERTIA),
    ("B", Dimensions::ROTARY_DAMPING),
];

/// Groups whose value is fixed by the vehicle alone.
pub const CONSTANT_GROUPS: [&str; 6] = ["pi3", "pi5", "pi6", "pi7", "pi12", "pi13"];

/// Variables of the model (time-varying quantities).
const VARIABLES: [&str; 7] = ["delta", "a", "Eb", "t", "vx", "vy", "r"];

pub fn vehicle_quantities() -> Vec<Quantity> {
    ORDER.iter().map(|(n, d)| Quantity::new(*n, *d)).collect()
}

/// Values of pi1..pi13 for one vehicle.
///
/// Groups built on a time-varying quantity hold the coefficient that
/// multiplies that quantity (the group evaluated at unit variable value).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PiValues<T>(pub [T; 13]);

impl<T: Scalar> PiValues<T> {
    /// Value of `pi{n}`, 1-based.
    pub fn pi(&self, n: usize) -> T {
        self.0[n - 1]
    }
}

/// Evaluates the thirteen groups through the generic π engine.
pub fn evaluate_paper_pi_groups<T: Scalar>(params: &VehicleParams<T>, eta: T) -> Result<PiValues<T>> {
    for (name, v) in [("m", params.mass), ("CF", params.cf), ("l", params.wheelbase)] {
        if !(v > T::zero()) {
            return Err(Error::param(name, "must be > 0 to form pi groups"));
        }
    }
    let set = vehicle_group_set()?;
    let values: Vec<T> = set
        .quantities
        .iter()
        .map(|q| match q.name.as_str() {
            "m" => params.mass,
            "CF" => params.cf,
            "l" => params.wheelbase,
            "lF" => params.l_front,
            "eta" => eta,
            "Iz" => params.yaw_inertia,
            "CR" => params.cr,
            "J" => params.shaft_inertia,
            "B" => params.shaft_damping,
            v if VARIABLES.contains(&v) => T::one(),
            other => unreachable!("quantity `{other}` not in model set"),
        })
        .collect();
    let mut out = [T::zero(); 13];
    for (slot, g) in out.iter_mut().zip(&set.groups) {
        *slot = g.evaluate(&values);
    }
    Ok(PiValues(out))
}

fn vehicle_group_set() -> Result<PiGroupSet> {
    let set = compute_pi_groups(&vehicle_quantities())?;
    if set.groups.len() != 13 {
        return Err(Error::Config(format!("expected 13 groups, engine produced {}", set.groups.len())));
    }
    Ok(set)
}

/// Vehicle plus the representative efficiency used for pi5.
#[derive(Debug, Clone, Copy)]
pub struct PiInputs<'a, T> {
    pub params: &'a VehicleParams<T>,
    pub eta: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchRow {
    pub group: String,
    pub formula: String,
    pub value_a: f64,
    pub value_b: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// Constant-group comparison of two vehicles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchReport {
    pub tolerance: f64,
    pub rows: Vec<MatchRow>,
    pub notes: Vec<String>,
}

impl MatchReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn row(&self, group: &str) -> Option<&MatchRow> {
        self.rows.iter().find(|r| r.group == group)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("group,formula,value_a,value_b,ratio,pass\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.group,
                r.formula,
                sig6(r.value_a),
                sig6(r.value_b),
                sig6(r.ratio),
                if r.pass { "pass" } else { "MISMATCH" }
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("match report serializes") + "\n"
    }
}

/// Compares the constant groups of two vehicles; a group passes when its
/// A/B ratio is within `tolerance` of one.
pub fn match_report<T: Scalar>(a: PiInputs<'_, T>, b: PiInputs<'_, T>, tolerance: f64) -> Result<MatchReport> {
    let va = evaluate_paper_pi_groups(a.params, a.eta)?;
    let vb = evaluate_paper_pi_groups(b.params, b.eta)?;
    let set = vehicle_group_set()?;
    let rows = CONSTANT_GROUPS
        .iter()
        .map(|name| {
            let n: usize = name[2..].parse().expect("constant group names are pi<N>");
            let (x, y) = (va.pi(n).as_f64(), vb.pi(n).as_f64());
            let ratio = x / y;
            MatchRow {
                group: name.to_string(),
                formula: set.groups[n - 1].formula(&set.quantities),
                value_a: x,
                value_b: y,
                ratio,
                pass: (ratio - 1.0).abs() <= tolerance,
            }
        })
        .collect();
    let notes = vec![format!(
        "pi3 = lF/l evaluates to {} (A) and {} (B); the published constant-group table lists 0.51, which equals lR/l",
        sig6(va.pi(3).as_f64()),
        sig6(vb.pi(3).as_f64())
    )];
    Ok(MatchReport { tolerance, rows, notes })
}
