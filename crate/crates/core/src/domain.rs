//! Shared value types: extended reals, boxes, trial points, fidelity
//! ladders, constraint metadata and single blackbox outputs, plus the
//! constraint violation function.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Deref};

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A real number or `+inf`.
///
/// `NaN` never survives construction: it is mapped to `+inf`, the value a
/// failed evaluation (hidden constraint) reports. Ordering is total.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtReal(f64);

impl ExtReal {
    pub const INFINITY: ExtReal = ExtReal(f64::INFINITY);
    pub const ZERO: ExtReal = ExtReal(0.0);

    pub fn new(value: f64) -> Self {
        if value.is_nan() {
            Self::INFINITY
        } else {
            ExtReal(value)
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0 == f64::INFINITY
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn square(self) -> ExtReal {
        if self.is_infinite() {
            self
        } else {
            ExtReal(self.0 * self.0)
        }
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        if self.is_infinite() || rhs.is_infinite() {
            ExtReal::INFINITY
        } else {
            ExtReal::new(self.0 + rhs.0)
        }
    }
}

impl From<f64> for ExtReal {
    fn from(value: f64) -> Self {
        ExtReal::new(value)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

// JSON has no infinity literal, so +inf travels as the string "inf".
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            serializer.serialize_f64(self.0)
        } else if self.0 > 0.0 {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ExtRealVisitor;

        impl Visitor<'_> for ExtRealVisitor {
            type Value = ExtReal;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::new(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::new(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::new(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtReal, E> {
                v.trim()
                    .parse::<f64>()
                    .map(ExtReal::new)
                    .map_err(|_| E::invalid_value(de::Unexpected::Str(v), &self))
            }
        }

        deserializer.deserialize_any(ExtRealVisitor)
    }
}

/// The box `[lower, upper]` of unrelaxable bound constraints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBounds", into = "RawBounds")]
pub struct BoxBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<RawBounds> for BoxBounds {
    type Error = Error;

    fn try_from(raw: RawBounds) -> Result<Self> {
        BoxBounds::new(raw.lower, raw.upper)
    }
}

impl From<BoxBounds> for RawBounds {
    fn from(b: BoxBounds) -> Self {
        RawBounds {
            lower: b.lower,
            upper: b.upper,
        }
    }
}

impl BoxBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::InvalidBounds(format!(
                "lower has {} entries, upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.is_empty() {
            return Err(Error::InvalidBounds("zero-dimensional box".into()));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !l.is_finite() || !u.is_finite() {
                return Err(Error::InvalidBounds(format!("non-finite bound at {i}")));
            }
            if l > u {
                return Err(Error::InvalidBounds(format!(
                    "lower[{i}]={l} > upper[{i}]={u}"
                )));
            }
        }
        Ok(BoxBounds { lower, upper })
    }

    /// The box `[lo, hi]^n`.
    pub fn uniform(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    /// Projects `x` onto the box, coordinate by coordinate.
    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }

    pub fn center(&self) -> TrialPoint {
        TrialPoint::new(
            self.lower
                .iter()
                .zip(&self.upper)
                .map(|(l, u)| 0.5 * (l + u))
                .collect(),
        )
    }
}

/// A point of `R^n` proposed for evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrialPoint(Vec<f64>);

impl TrialPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        TrialPoint(coords)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Bitwise identity key, used for caching evaluations.
    pub fn key(&self) -> Vec<u64> {
        self.0.iter().map(|v| v.to_bits()).collect()
    }
}

impl Deref for TrialPoint {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for TrialPoint {
    fn from(v: Vec<f64>) -> Self {
        TrialPoint(v)
    }
}

/// Strictly increasing fidelities in `[0, 1]`, the last one equal to 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FidelityLadder(Vec<f64>);

impl TryFrom<Vec<f64>> for FidelityLadder {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        FidelityLadder::new(values)
    }
}

impl From<FidelityLadder> for Vec<f64> {
    fn from(l: FidelityLadder) -> Self {
        l.0
    }
}

impl FidelityLadder {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let Some(&last) = values.last() else {
            return Err(Error::InvalidLadder("empty ladder".into()));
        };
        if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidLadder(format!("{bad} lies outside [0, 1]")));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidLadder(
                "values must be strictly increasing".into(),
            ));
        }
        if last != 1.0 {
            return Err(Error::InvalidLadder(format!(
                "last value is {last}, expected 1"
            )));
        }
        Ok(FidelityLadder(values))
    }

    /// The 19-level ladder used for the reference experiments:
    /// `{0, 1e-10, 2^-10, ..., 2^-4, 0.1, 0.2, ..., 0.9, 1}`.
    pub fn reference() -> Self {
        let mut v = vec![0.0, 1e-10];
        v.extend((4..=10).rev().map(|k| 2f64.powi(-k)));
        v.extend((1..=9).map(|k| k as f64 / 10.0));
        v.push(1.0);
        FidelityLadder(v)
    }

    /// Only the true fidelity.
    pub fn top_only() -> Self {
        FidelityLadder(vec![1.0])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn top_index(&self) -> usize {
        self.0.len() - 1
    }

    pub fn has_zero(&self) -> bool {
        self.0[0] == 0.0
    }

    pub fn index_of(&self, fidelity: f64) -> Option<usize> {
        self.0.iter().position(|&v| v == fidelity)
    }
}

/// Number of constraints and which of them are a-priori (0-based indexes).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintMeta {
    pub count: usize,
    pub a_priori: BTreeSet<usize>,
}

impl ConstraintMeta {
    pub fn new(count: usize, a_priori: impl IntoIterator<Item = usize>) -> Result<Self> {
        let a_priori: BTreeSet<usize> = a_priori.into_iter().collect();
        if let Some(&bad) = a_priori.iter().find(|&&j| j >= count) {
            return Err(Error::InvalidConfig(format!(
                "a-priori index {bad} out of range for {count} constraints"
            )));
        }
        Ok(ConstraintMeta { count, a_priori })
    }

    pub fn is_a_priori(&self, j: usize) -> bool {
        self.a_priori.contains(&j)
    }

    /// Indexes of the constraints that need the simulation.
    pub fn filtered(&self) -> Vec<usize> {
        (0..self.count)
            .filter(|j| !self.a_priori.contains(j))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalStatus {
    /// Every output was computed.
    Complete,
    /// Fidelity 0: only a-priori constraints were computed.
    AprioriOnly,
    /// An a-priori constraint is violated; other outputs were not computed.
    AprioriViolated,
    /// The blackbox failed; outputs are all `+inf`.
    Failed,
}

/// One blackbox sub-evaluation.
///
/// Outputs that were not computed (see [`EvalStatus`]) are reported as `+inf`
/// and must not be read; [`EvalOutput::is_computed`] tells them apart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalOutput {
    pub f: ExtReal,
    pub c: Vec<ExtReal>,
    pub fidelity: f64,
    pub time: f64,
    pub status: EvalStatus,
}

impl EvalOutput {
    pub fn failure(m: usize, fidelity: f64, time: f64) -> Self {
        EvalOutput {
            f: ExtReal::INFINITY,
            c: vec![ExtReal::INFINITY; m],
            fidelity,
            time: time.max(0.0),
            status: EvalStatus::Failed,
        }
    }

    /// Builds an output from raw values, applying the a-priori short-circuit:
    /// when an a-priori constraint is violated the remaining outputs are
    /// suppressed; at fidelity 0 only a-priori values are kept.
    pub fn screened(
        f: ExtReal,
        c: Vec<ExtReal>,
        meta: &ConstraintMeta,
        fidelity: f64,
        time: f64,
    ) -> Self {
        let violated = meta.a_priori.iter().any(|&j| c[j] > ExtReal::ZERO);
        let status = if violated {
            EvalStatus::AprioriViolated
        } else if fidelity == 0.0 {
            EvalStatus::AprioriOnly
        } else {
            EvalStatus::Complete
        };
        let (f, c) = match status {
            EvalStatus::Complete => (f, c),
            _ => {
                let c = c
                    .into_iter()
                    .enumerate()
                    .map(|(j, v)| {
                        if meta.is_a_priori(j) {
                            v
                        } else {
                            ExtReal::INFINITY
                        }
                    })
                    .collect();
                (ExtReal::INFINITY, c)
            }
        };
        EvalOutput {
            f,
            c,
            fidelity,
            time: time.max(0.0),
            status,
        }
    }

    pub fn apriori_violated(&self) -> bool {
        self.status == EvalStatus::AprioriViolated
    }

    pub fn failed(&self) -> bool {
        self.status == EvalStatus::Failed
    }

    /// Whether `c[j]` carries a real value.
    pub fn is_computed(&self, j: usize, meta: &ConstraintMeta) -> bool {
        match self.status {
            EvalStatus::Complete => true,
            EvalStatus::Failed => true,
            EvalStatus::AprioriOnly | EvalStatus::AprioriViolated => meta.is_a_priori(j),
        }
    }

    pub fn objective_computed(&self) -> bool {
        matches!(self.status, EvalStatus::Complete | EvalStatus::Failed)
    }
}

/// Constraint violation `h`: the sum of squared positive parts when the
/// point lies in the box and every value is finite, `+inf` otherwise.
pub fn violation_h(c: &[ExtReal], in_box: bool) -> ExtReal {
    if !in_box {
        return ExtReal::INFINITY;
    }
    c.iter().fold(ExtReal::ZERO, |acc, &cj| {
        acc + cj.max(ExtReal::ZERO).square()
    })
}

/// `true` iff every `c_j <= 0`. Infinite values are never feasible.
pub fn is_feasible(c: &[ExtReal]) -> bool {
    c.iter().all(|&cj| cj <= ExtReal::ZERO)
}
