//! Buckingham-π analysis over the (M, L, T) basis.
//!
//! Dimension exponents are exact rationals; each π group is a nullspace
//! vector of the dimension matrix. The basis is canonical: Gauss–Jordan
//! elimination takes pivots greedily in input order, so the leading
//! independent quantities become the repeating set and every remaining
//! quantity anchors one group with exponent 1.

mod vehicle;
mod scale;

pub use vehicle::{
    evaluate_paper_pi_groups, match_report, vehicle_quantities, MatchReport, MatchRow, PiValues, PiInputs,
    CONSTANT_GROUPS,
};
pub use scale::{scale_factors, scaled_efficiency, ScaleFactors};

use std::collections::HashSet;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of base dimensions (mass, length, time).
pub const BASE_DIMENSIONS: usize = 3;

/// Exponents over (M, L, T).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Dimensions {
    pub mass: i32,
    pub length: i32,
    pub time: i32,
}

impl Dimensions {
    pub const NONE: Self = Self::new(0, 0, 0);
    pub const MASS: Self = Self::new(1, 0, 0);
    pub const LENGTH: Self = Self::new(0, 1, 0);
    pub const TIME: Self = Self::new(0, 0, 1);
    pub const VELOCITY: Self = Self::new(0, 1, -1);
    pub const ACCELERATION: Self = Self::new(0, 1, -2);
    pub const FREQUENCY: Self = Self::new(0, 0, -1);
    pub const FORCE: Self = Self::new(1, 1, -2);
    pub const ENERGY: Self = Self::new(1, 2, -2);
    pub const INERTIA: Self = Self::new(1, 2, 0);
    /// Torsional damping, N·m·s/rad.
    pub const ROTARY_DAMPING: Self = Self::new(1, 2, -1);

    pub const fn new(mass: i32, length: i32, time: i32) -> Self {
        Self { mass, length, time }
    }

    pub fn as_array(&self) -> [i32; BASE_DIMENSIONS] {
        [self.mass, self.length, self.time]
    }
}

/// A named physical quantity, optionally with a value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub name: String,
    pub value: Option<f64>,
    pub dims: Dimensions,
}

impl Quantity {
    pub fn new(name: impl Into<String>, dims: Dimensions) -> Self {
        Self { name: name.into(), value: None, dims }
    }

    pub fn with_value(mut self, value: f64) -> Self {
        self.value = Some(value);
        self
    }
}

/// Parses a quantity list: one quantity per line as `name value M L T`,
/// whitespace or comma separated; `value` may be `-` when unknown.
pub fn parse_quantities(text: &str) -> Result<Vec<Quantity>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|c| !c.is_empty()).collect();
        let err = |reason: String| Error::Parse { line: i + 1, reason };
        if cells.len() != 5 {
            return Err(err(format!("expected `name value M L T`, found {} fields", cells.len())));
        }
        let value = match cells[1] {
            "-" => None,
            v => Some(v.parse::<f64>().map_err(|_| err(format!("bad value `{v}`")))?),
        };
        let exp = |s: &str| s.parse::<i32>().map_err(|_| err(format!("bad exponent `{s}`")));
        out.push(Quantity {
            name: cells[0].to_string(),
            value,
            dims: Dimensions::new(exp(cells[2])?, exp(cells[3])?, exp(cells[4])?),
        });
    }
    Ok(out)
}

/// Column `j` holds the exponents of quantity `j`; rows are M, L, T.
pub fn dimension_matrix(quantities: &[Quantity]) -> Result<Vec<Vec<i32>>> {
    if quantities.is_empty() {
        return Err(Error::Config("at least one quantity is required".into()));
    }
    let mut seen = HashSet::new();
    for q in quantities {
        if !seen.insert(q.name.as_str()) {
            return Err(Error::DuplicateQuantity(q.name.clone()));
        }
    }
    Ok((0..BASE_DIMENSIONS).map(|row| quantities.iter().map(|q| q.dims.as_array()[row]).collect()).collect())
}

/// A dimensionless monomial `Π q_j^e_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiGroup {
    pub name: String,
    /// Quantity carrying exponent 1 that this group is built around.
    pub anchor: String,
    #[serde(serialize_with = "ser_exponents")]
    pub exponents: Vec<Rational64>,
}

fn ser_exponents<S: serde::Serializer>(e: &[Rational64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(e.iter().map(|r| r.to_string()))
}

impl PiGroup {
    /// Value of the group given one value per quantity.
    pub fn evaluate<T: Scalar>(&self, values: &[T]) -> T {
        self.exponents.iter().zip(values).fold(T::one(), |acc, (e, v)| acc * rational_pow(*v, *e))
    }

    /// Net dimensions, computed exactly.
    pub fn dimensions(&self, quantities: &[Quantity]) -> [Rational64; BASE_DIMENSIONS] {
        let mut net = [Rational64::zero(); BASE_DIMENSIONS];
        for (e, q) in self.exponents.iter().zip(quantities) {
            for (acc, d) in net.iter_mut().zip(q.dims.as_array()) {
                *acc += *e * Rational64::from_integer(d as i64);
            }
        }
        net
    }

    pub fn is_dimensionless(&self, quantities: &[Quantity]) -> bool {
        self.dimensions(quantities).iter().all(Zero::is_zero)
    }

    /// Human-readable monomial such as `t * CF^(1/2) * m^(-1/2) * l^(-1/2)`.
    pub fn formula(&self, quantities: &[Quantity]) -> String {
        let mut parts: Vec<String> = Vec::new();
        let anchor = quantities.iter().position(|q| q.name == self.anchor);
        let order = anchor.into_iter().chain((0..quantities.len()).filter(|i| Some(*i) != anchor));
        for j in order {
            let e = self.exponents[j];
            if e.is_zero() {
                continue;
            }
            let name = &quantities[j].name;
            parts.push(if e.is_one() {
                name.clone()
            } else if e.is_integer() {
                format!("{name}^{e}")
            } else {
                format!("{name}^({e})")
            });
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(" * ")
        }
    }
}

fn rational_pow<T: Scalar>(v: T, e: Rational64) -> T {
    if e.is_zero() {
        T::one()
    } else if e.is_integer() {
        v.powi(e.to_integer() as i32)
    } else if *e.denom() == 2 {
        v.sqrt().powi(*e.numer() as i32)
    } else {
        v.powf(T::lit(e.to_f64().expect("rational exponent converts")))
    }
}

/// Complete π-group basis for a quantity list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiGroupSet {
    pub quantities: Vec<Quantity>,
    pub rank: usize,
    /// Quantities selected as the repeating set (pivot columns).
    pub repeating: Vec<String>,
    pub groups: Vec<PiGroup>,
}

impl PiGroupSet {
    pub fn group(&self, name: &str) -> Option<&PiGroup> {
        self.groups.iter().find(|g| g.name == name)
    }

    pub fn by_anchor(&self, anchor: &str) -> Option<&PiGroup> {
        self.groups.iter().find(|g| g.anchor == anchor)
    }

    /// Evaluates every group from the quantities' stored values.
    pub fn evaluate_stored(&self) -> Result<Vec<f64>> {
        let values = self
            .quantities
            .iter()
            .map(|q| q.value.ok_or_else(|| Error::Config(format!("quantity `{}` has no value", q.name))))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.groups.iter().map(|g| g.evaluate(&values)).collect())
    }
}

/// Gauss–Jordan reduction in place; returns the pivot column of each
/// non-zero row.
fn reduce(m: &mut [Vec<Rational64>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let lead = m[r][c];
        for v in m[r].iter_mut() {
            *v /= lead;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c];
                let pivot_row = m[r].clone();
                for (x, p) in m[i].iter_mut().zip(&pivot_row) {
                    *x -= f * *p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Exact rank of the dimension matrix.
pub fn dimension_rank(quantities: &[Quantity]) -> Result<usize> {
    let mut m = rational_matrix(&dimension_matrix(quantities)?);
    Ok(reduce(&mut m).len())
}

fn rational_matrix(d: &[Vec<i32>]) -> Vec<Vec<Rational64>> {
    d.iter().map(|row| row.iter().map(|v| Rational64::from_integer(*v as i64)).collect()).collect()
}

/// Nullspace basis of the dimension matrix, one group per non-repeating
/// quantity, named `pi1..pip` in input order.
pub fn compute_pi_groups(quantities: &[Quantity]) -> Result<PiGroupSet> {
    let mut m = rational_matrix(&dimension_matrix(quantities)?);
    let pivots = reduce(&mut m);
    let n = quantities.len();
    let mut groups = Vec::with_capacity(n - pivots.len());
    for free in (0..n).filter(|c| !pivots.contains(c)) {
        let mut e = vec![Rational64::zero(); n];
        e[free] = Rational64::one();
        for (row, &p) in pivots.iter().enumerate() {
            e[p] = -m[row][free];
        }
        let group = PiGroup { name: format!("pi{}", groups.len() + 1), anchor: quantities[free].name.clone(), exponents: e };
        debug_assert!(group.is_dimensionless(quantities));
        if !group.is_dimensionless(quantities) {
            return Err(Error::Config(format!("internal: group for `{}` is not dimensionless", group.anchor)));
        }
        groups.push(group);
    }
    Ok(PiGroupSet {
        quantities: quantities.to_vec(),
        rank: pivots.len(),
        repeating: pivots.iter().map(|&p| quantities[p].name.clone()).collect(),
        groups,
    })
}

/// Like [`compute_pi_groups`] but with the named quantities tried first as
/// the repeating set. Groups keep the input order of their anchors and the
/// quantity list keeps its original order.
pub fn compute_pi_groups_with_repeating(quantities: &[Quantity], repeating: &[&str]) -> Result<PiGroupSet> {
    let mut order: Vec<usize> = Vec::with_capacity(quantities.len());
    for name in repeating {
        let idx = quantities
            .iter()
            .position(|q| q.name == *name)
            .ok_or_else(|| Error::Config(format!("repeating quantity `{name}` not in set")))?;
        if !order.contains(&idx) {
            order.push(idx);
        }
    }
    let rest: Vec<usize> = (0..quantities.len()).filter(|i| !order.contains(i)).collect();
    order.extend(rest);
    let permuted: Vec<Quantity> = order.iter().map(|&i| quantities[i].clone()).collect();
    let set = compute_pi_groups(&permuted)?;
    let mut groups: Vec<PiGroup> = set
        .groups
        .into_iter()
        .map(|g| {
            let mut e = vec![Rational64::zero(); quantities.len()];
            for (k, &orig) in order.iter().enumerate() {
                e[orig] = g.exponents[k];
            }
            PiGroup { exponents: e, ..g }
        })
        .collect();
    let position = |g: &PiGroup| quantities.iter().position(|q| q.name == g.anchor).unwrap_or(usize::MAX);
    groups.sort_by_key(position);
    for (i, g) in groups.iter_mut().enumerate() {
        g.name = format!("pi{}", i + 1);
    }
    Ok(PiGroupSet { quantities: quantities.to_vec(), rank: set.rank, repeating: set.repeating, groups })
}

impl fmt::Display for PiGroupSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "quantities: {}, rank: {}, groups: {}", self.quantities.len(), self.rank, self.groups.len())?;
        writeln!(f, "repeating: {}", self.repeating.join(", "))?;
        for g in &self.groups {
            writeln!(f, "{} = {}", g.name, g.formula(&self.quantities))?;
        }
        Ok(())
    }
}

/// Largest absolute exponent, handy for sanity checks on generated bases.
pub fn max_exponent(set: &PiGroupSet) -> Rational64 {
    set.groups.iter().flat_map(|g| g.exponents.iter()).map(|e| e.abs()).max().unwrap_or_else(Rational64::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(name: &str, d: Dimensions) -> Quantity {
        Quantity::new(name, d)
    }

    #[test]
    fn matrix_columns() {
        let d = dimension_matrix(&[q("m", Dimensions::MASS)]).unwrap();
        assert_eq!(d, vec![vec![1], vec![0], vec![0]]);
        let d = dimension_matrix(&[q("Eb", Dimensions::ENERGY)]).unwrap();
        assert_eq!(d, vec![vec![1], vec![2], vec![-2]]);
        let d = dimension_matrix(&[q("CF", Dimensions::FORCE)]).unwrap();
        assert_eq!(d, vec![vec![1], vec![1], vec![-2]]);
    }

    #[test]
    fn duplicate_names_rejected() {
        let err = dimension_matrix(&[q("m", Dimensions::MASS), q("m", Dimensions::LENGTH)]).unwrap_err();
        assert!(matches!(err, Error::DuplicateQuantity(n) if n == "m"));
        assert!(dimension_matrix(&[]).is_err());
    }

    #[test]
    fn single_dimensionless_quantity() {
        let set = compute_pi_groups(&[q("delta", Dimensions::NONE)]).unwrap();
        assert_eq!(set.groups.len(), 1);
        assert_eq!(set.groups[0].anchor, "delta");
        assert_eq!(set.groups[0].exponents, vec![Rational64::one()]);
    }

    #[test]
    fn independent_base_has_no_groups() {
        let set = compute_pi_groups(&[q("m", Dimensions::MASS), q("l", Dimensions::LENGTH), q("t", Dimensions::TIME)])
            .unwrap();
        assert_eq!(set.rank, 3);
        assert!(set.groups.is_empty());
    }

    #[test]
    fn all_dimensionless_each_own_group() {
        let qs = [q("a", Dimensions::NONE), q("b", Dimensions::NONE), q("c", Dimensions::NONE)];
        let set = compute_pi_groups(&qs).unwrap();
        assert_eq!(set.rank, 0);
        assert_eq!(set.groups.len(), 3);
        for (g, qq) in set.groups.iter().zip(&qs) {
            assert_eq!(g.anchor, qq.name);
        }
    }

    #[test]
    fn pendulum_period() {
        let qs = [
            q("l", Dimensions::LENGTH),
            q("g", Dimensions::ACCELERATION),
            q("m", Dimensions::MASS),
            q("T", Dimensions::TIME),
        ];
        let set = compute_pi_groups(&qs).unwrap();
        assert_eq!(set.groups.len(), 1);
        assert_eq!(set.groups[0].formula(&qs), "T * l^(-1/2) * g^(1/2)");
        let v = set.groups[0].evaluate(&[1.0, 9.81, 2.0, 2.0]);
        assert!((v - 2.0 * 9.81f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn quantity_file_parses() {
        let text = "# name value M L T\nm 3.78 1 0 0\nl, 0.324, 0, 1, 0\ndelta - 0 0 0\n";
        let qs = parse_quantities(text).unwrap();
        assert_eq!(qs.len(), 3);
        assert_eq!(qs[1].dims, Dimensions::LENGTH);
        assert_eq!(qs[2].value, None);
        assert!(matches!(parse_quantities("m 1 1 0"), Err(Error::Parse { line: 1, .. })));
    }

    /// Rank from non-vanishing integer minors; independent of elimination.
    fn rank_by_minors(d: &[Vec<i32>]) -> usize {
        let n = d[0].len();
        let det2 = |r: [usize; 2], c: [usize; 2]| {
            d[r[0]][c[0]] as i64 * d[r[1]][c[1]] as i64 - d[r[0]][c[1]] as i64 * d[r[1]][c[0]] as i64
        };
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let det = d[0][a] as i64 * det2([1, 2], [b, c]) - d[0][b] as i64 * det2([1, 2], [a, c])
                        + d[0][c] as i64 * det2([1, 2], [a, b]);
                    if det != 0 {
                        return 3;
                    }
                }
            }
        }
        for rows in [[0, 1], [0, 2], [1, 2]] {
            for a in 0..n {
                for b in a + 1..n {
                    if det2(rows, [a, b]) != 0 {
                        return 2;
                    }
                }
            }
        }
        usize::from(d.iter().flatten().any(|v| *v != 0))
    }

    proptest! {
        #[test]
        fn group_count_is_nullity(dims in proptest::collection::vec((-3i32..=3, -3i32..=3, -3i32..=3), 1..12)) {
            let qs: Vec<Quantity> = dims
                .iter()
                .enumerate()
                .map(|(i, (a, b, c))| q(&format!("q{i}"), Dimensions::new(*a, *b, *c)))
                .collect();
            let set = compute_pi_groups(&qs).unwrap();
            let d = dimension_matrix(&qs).unwrap();
            prop_assert_eq!(set.rank, rank_by_minors(&d));
            prop_assert_eq!(set.groups.len(), qs.len() - set.rank);
            for g in &set.groups {
                prop_assert!(g.is_dimensionless(&qs));
            }
        }
    }
}
