//! t-norms, t-conorms and negation over membership degrees in `[0, 1]`.
//!
//! Three continuous t-norm families are supported, each paired with its dual
//! t-conorm under the standard negation `1 - a`:
//!
//! | family        | t-norm             | t-conorm          |
//! |---------------|--------------------|-------------------|
//! | `product`     | `a * b`            | `a + b - a * b`   |
//! | `goedel`      | `min(a, b)`        | `max(a, b)`       |
//! | `lukasiewicz` | `max(0, a + b - 1)`| `min(1, a + b)`   |
//!
//! The raw kernels pin results into the bounds every t-norm (t-conorm)
//! satisfies, `[0, min(a, b)]` (`[max(a, b), 1]`), so floating-point rounding
//! can never step outside them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::MembershipVector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuzzyError {
    #[error("degree {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("cannot fold an empty list")]
    EmptyList,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("operator {op} expects {expected} operand(s), got {got}")]
    Arity {
        op: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("unknown operator family {0:?} (expected product, goedel or lukasiewicz)")]
    UnknownFamily(String),
}

/// A membership degree in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Degree(f64);

impl Degree {
    pub const ZERO: Degree = Degree(0.0);
    pub const ONE: Degree = Degree(1.0);

    pub fn new(value: f64) -> Result<Self, FuzzyError> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(FuzzyError::OutOfRange(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Degree {
    type Error = FuzzyError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorFamily {
    #[default]
    Product,
    Goedel,
    Lukasiewicz,
}

impl OperatorFamily {
    pub const ALL: [OperatorFamily; 3] = [Self::Product, Self::Goedel, Self::Lukasiewicz];

    pub fn token(self) -> &'static str {
        match self {
            Self::Product => "product",
            Self::Goedel => "goedel",
            Self::Lukasiewicz => "lukasiewicz",
        }
    }

    #[inline]
    pub fn tnorm(self, a: f64, b: f64) -> f64 {
        match self {
            Self::Product => (a * b).min(a).min(b),
            Self::Goedel => a.min(b),
            Self::Lukasiewicz => {
                // a + (1 - a) never rounds above 1, which keeps a ⊓ ¬a at exactly 0
                let sum = a + b;
                if sum <= 1.0 {
                    0.0
                } else {
                    (sum - 1.0).min(a).min(b)
                }
            }
        }
    }

    #[inline]
    pub fn tconorm(self, a: f64, b: f64) -> f64 {
        match self {
            Self::Product => (a + b - a * b).max(a).max(b).min(1.0),
            Self::Goedel => a.max(b),
            Self::Lukasiewicz => (a + b).min(1.0),
        }
    }
}

impl fmt::Display for OperatorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for OperatorFamily {
    type Err = FuzzyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "product" => Ok(Self::Product),
            "goedel" | "godel" | "gödel" | "min" => Ok(Self::Goedel),
            "lukasiewicz" | "łukasiewicz" => Ok(Self::Lukasiewicz),
            _ => Err(FuzzyError::UnknownFamily(s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Negation {
    /// `1 - a`
    #[default]
    Standard,
}

impl Negation {
    #[inline]
    pub fn apply(self, a: f64) -> f64 {
        match self {
            Self::Standard => 1.0 - a,
        }
    }
}

/// The conjunction/disjunction/negation triple used to evaluate composite
/// concepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FuzzyConfig {
    pub family: OperatorFamily,
    #[serde(default)]
    pub negation: Negation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementwiseOp {
    TNorm,
    TConorm,
    Negate,
}

impl FuzzyConfig {
    pub fn new(family: OperatorFamily) -> Self {
        Self {
            family,
            negation: Negation::Standard,
        }
    }

    pub fn tnorm(&self, a: Degree, b: Degree) -> Degree {
        Degree(self.family.tnorm(a.0, b.0))
    }

    pub fn tconorm(&self, a: Degree, b: Degree) -> Degree {
        Degree(self.family.tconorm(a.0, b.0))
    }

    pub fn negate(&self, a: Degree) -> Degree {
        Degree(self.negation.apply(a.0))
    }

    /// Left fold of the t-norm.
    pub fn fold_tnorm(&self, values: &[Degree]) -> Result<Degree, FuzzyError> {
        let (first, rest) = values.split_first().ok_or(FuzzyError::EmptyList)?;
        Ok(rest.iter().fold(*first, |acc, &v| self.tnorm(acc, v)))
    }

    /// Left fold of the t-conorm.
    pub fn fold_tconorm(&self, values: &[Degree]) -> Result<Degree, FuzzyError> {
        let (first, rest) = values.split_first().ok_or(FuzzyError::EmptyList)?;
        Ok(rest.iter().fold(*first, |acc, &v| self.tconorm(acc, v)))
    }

    /// Applies a scalar operator index by index. Binary operators take two
    /// vectors of equal length, negation takes one.
    pub fn elementwise(
        &self,
        op: ElementwiseOp,
        vectors: &[&MembershipVector],
    ) -> Result<MembershipVector, FuzzyError> {
        let values = match (op, vectors) {
            (ElementwiseOp::Negate, [v]) => v.iter().map(|&a| self.negation.apply(a)).collect(),
            (ElementwiseOp::TNorm | ElementwiseOp::TConorm, [u, v]) => {
                let mut out = u.as_slice().to_vec();
                if op == ElementwiseOp::TNorm {
                    self.tnorm_assign(&mut out, v)?;
                } else {
                    self.tconorm_assign(&mut out, v)?;
                }
                out
            }
            (ElementwiseOp::Negate, other) => {
                return Err(FuzzyError::Arity {
                    op: "negate",
                    expected: 1,
                    got: other.len(),
                })
            }
            (_, other) => {
                return Err(FuzzyError::Arity {
                    op: if op == ElementwiseOp::TNorm { "tnorm" } else { "tconorm" },
                    expected: 2,
                    got: other.len(),
                })
            }
        };
        Ok(MembershipVector::from_valid(values))
    }

    /// `acc[i] = tnorm(acc[i], other[i])`
    pub fn tnorm_assign(&self, acc: &mut [f64], other: &[f64]) -> Result<(), FuzzyError> {
        check_dims(acc.len(), other.len())?;
        let family = self.family;
        acc.iter_mut().zip(other).for_each(|(a, &b)| *a = family.tnorm(*a, b));
        Ok(())
    }

    /// `acc[i] = tconorm(acc[i], other[i])`
    pub fn tconorm_assign(&self, acc: &mut [f64], other: &[f64]) -> Result<(), FuzzyError> {
        check_dims(acc.len(), other.len())?;
        let family = self.family;
        acc.iter_mut().zip(other).for_each(|(a, &b)| *a = family.tconorm(*a, b));
        Ok(())
    }

    pub fn negate_assign(&self, acc: &mut [f64]) {
        let negation = self.negation;
        acc.iter_mut().for_each(|a| *a = negation.apply(*a));
    }
}

fn check_dims(left: usize, right: usize) -> Result<(), FuzzyError> {
    if left == right {
        Ok(())
    } else {
        Err(FuzzyError::DimensionMismatch { left, right })
    }
}
