//! Increasing odd homeomorphisms `φ` with closed-form inverses.
//!
//! Three regimes are covered: classic (`ℝ → ℝ`), bounded (`ℝ → (−a, a)`) and
//! singular (`(−a, a) → ℝ`). Only catalog maps are available; each one is
//! probed at construction for `φ(0) = 0`, strict monotonicity and the
//! round trip `φ⁻¹∘φ = id`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Distance kept from the open endpoints `±a` of a bounded range or singular domain.
pub const DOMAIN_MARGIN: f64 = 1e-12;

const PROBE_COUNT: usize = 1000;
const ROUND_TRIP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HomeoError {
    #[error(
        "unknown homeomorphism `{0}` (expected identity, power, mean_curvature or relativistic)"
    )]
    UnknownName(String),
    #[error("`{name}` expects {expected} parameter(s), got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("invalid parameter `{0}`")]
    BadNumber(String),
    #[error("power exponent must satisfy p > 1, got {0}")]
    BadExponent(f64),
    #[error("scale must satisfy a > 0, got {0}")]
    BadScale(f64),
    #[error("construction check failed: {0}")]
    Invariant(String),
}

/// An argument fell outside the open interval where the map is defined.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("value {value} outside the admissible interval ({lo}, {hi})")]
pub struct DomainViolation {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Which of the three regimes a map belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Classic,
    Bounded { a: f64 },
    Singular { a: f64 },
}

impl Kind {
    pub fn scale(&self) -> Option<f64> {
        match *self {
            Kind::Classic => None,
            Kind::Bounded { a } | Kind::Singular { a } => Some(a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Map {
    Identity,
    /// `φ(y) = |y|^{p−2} y`
    Power {
        p: f64,
    },
    /// `φ(y) = a·y/√(1+y²)`
    MeanCurvature {
        a: f64,
    },
    /// `φ(y) = y/√(1−(y/a)²)`
    Relativistic {
        a: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homeomorphism {
    map: Map,
}

impl Homeomorphism {
    pub fn identity() -> Self {
        Self::checked(Map::Identity).expect("identity passes its own checks")
    }

    pub fn power(p: f64) -> Result<Self, HomeoError> {
        if !(p.is_finite() && p > 1.0) {
            return Err(HomeoError::BadExponent(p));
        }
        Self::checked(Map::Power { p })
    }

    pub fn mean_curvature(a: f64) -> Result<Self, HomeoError> {
        check_scale(a)?;
        Self::checked(Map::MeanCurvature { a })
    }

    pub fn relativistic(a: f64) -> Result<Self, HomeoError> {
        check_scale(a)?;
        Self::checked(Map::Relativistic { a })
    }

    /// Builds a catalog map from its name and numeric parameters.
    pub fn catalog_make(name: &str, params: &[f64]) -> Result<Self, HomeoError> {
        let arity = |expected: usize| {
            if params.len() == expected {
                Ok(())
            } else {
                Err(HomeoError::Arity {
                    name: name.to_string(),
                    expected,
                    got: params.len(),
                })
            }
        };
        match name {
            "identity" => arity(0).map(|_| Self::identity()),
            "power" => arity(1).and_then(|_| Self::power(params[0])),
            "mean_curvature" => arity(1).and_then(|_| Self::mean_curvature(params[0])),
            "relativistic" => arity(1).and_then(|_| Self::relativistic(params[0])),
            other => Err(HomeoError::UnknownName(other.to_string())),
        }
    }

    fn checked(map: Map) -> Result<Self, HomeoError> {
        let phi = Self { map };
        phi.verify()?;
        Ok(phi)
    }

    pub fn kind(&self) -> Kind {
        match self.map {
            Map::Identity | Map::Power { .. } => Kind::Classic,
            Map::MeanCurvature { a } => Kind::Bounded { a },
            Map::Relativistic { a } => Kind::Singular { a },
        }
    }

    pub fn name(&self) -> &'static str {
        match self.map {
            Map::Identity => "identity",
            Map::Power { .. } => "power",
            Map::MeanCurvature { .. } => "mean_curvature",
            Map::Relativistic { .. } => "relativistic",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self.map {
            Map::Identity => vec![],
            Map::Power { p } => vec![p],
            Map::MeanCurvature { a } | Map::Relativistic { a } => vec![a],
        }
    }

    /// `φ(y)`. Fails only for a singular map evaluated outside `(−a, a)`.
    pub fn apply(&self, y: f64) -> Result<f64, DomainViolation> {
        match self.map {
            Map::Relativistic { a } => {
                guard(y, a)?;
                let r = y / a;
                Ok(y / ((1.0 - r) * (1.0 + r)).sqrt())
            }
            _ => {
                if !y.is_finite() {
                    return Err(DomainViolation {
                        value: y,
                        lo: f64::NEG_INFINITY,
                        hi: f64::INFINITY,
                    });
                }
                Ok(self.forward_total(y))
            }
        }
    }

    /// `φ⁻¹(x)`. Fails only for a bounded map evaluated outside `(−a, a)`.
    ///
    /// For a singular map the result rounds to `±a` once `|x| ≳ 10⁸·a`;
    /// likewise a bounded `φ` saturates at `±a` for `|y| ≳ 10⁸`.
    pub fn apply_inverse(&self, x: f64) -> Result<f64, DomainViolation> {
        match self.map {
            Map::MeanCurvature { a } => {
                guard(x, a)?;
                let r = x / a;
                Ok(r / ((1.0 - r) * (1.0 + r)).sqrt())
            }
            Map::Identity => finite(x),
            Map::Power { p } => {
                finite(x)?;
                Ok(if p == 2.0 {
                    x
                } else if p == 4.0 {
                    x.cbrt()
                } else {
                    x.signum() * x.abs().powf(1.0 / (p - 1.0))
                })
            }
            Map::Relativistic { a } => {
                finite(x)?;
                let r = x / a;
                Ok(x / 1.0_f64.hypot(r))
            }
        }
    }

    fn forward_total(&self, y: f64) -> f64 {
        match self.map {
            Map::Identity => y,
            Map::Power { p } => {
                if p == 2.0 {
                    y
                } else if p == 4.0 {
                    y * y * y
                } else {
                    y.signum() * y.abs().powf(p - 1.0)
                }
            }
            Map::MeanCurvature { a } => a * y / 1.0_f64.hypot(y),
            Map::Relativistic { .. } => unreachable!("singular map has a guarded domain"),
        }
    }

    /// Quasi-random probe points strictly inside the domain of `φ`.
    pub fn probes(&self, count: usize) -> Vec<f64> {
        let radius = match self.kind() {
            Kind::Singular { a } => a * (1.0 - 1e-3),
            _ => 10.0,
        };
        // Additive recurrence on the golden ratio: low discrepancy, deterministic.
        let step = 0.5 * (5.0_f64.sqrt() - 1.0);
        (0..count)
            .map(|k| {
                let x = (0.5 + k as f64 * step).fract();
                radius * (2.0 * x - 1.0)
            })
            .collect()
    }

    fn verify(&self) -> Result<(), HomeoError> {
        let at_zero = self
            .apply(0.0)
            .map_err(|e| HomeoError::Invariant(e.to_string()))?;
        if at_zero.abs() > 1e-14 {
            return Err(HomeoError::Invariant(format!("φ(0) = {at_zero}")));
        }
        let mut probes = self.probes(PROBE_COUNT);
        for &y in &probes {
            let x = self
                .apply(y)
                .map_err(|e| HomeoError::Invariant(e.to_string()))?;
            if x.signum() != y.signum() && y != 0.0 {
                return Err(HomeoError::Invariant(format!("sign of φ({y}) = {x}")));
            }
            let back = self
                .apply_inverse(x)
                .map_err(|e| HomeoError::Invariant(e.to_string()))?;
            if (back - y).abs() > ROUND_TRIP_TOL * y.abs() {
                return Err(HomeoError::Invariant(format!("φ⁻¹(φ({y})) = {back}")));
            }
        }
        probes.sort_by(f64::total_cmp);
        let mut prev: Option<(f64, f64)> = None;
        for &y in &probes {
            let x = self.apply(y).expect("probes lie in the domain");
            if let Some((py, px)) = prev {
                if py < y && px >= x {
                    return Err(HomeoError::Invariant(format!(
                        "not increasing between {py} and {y}"
                    )));
                }
            }
            prev = Some((y, x));
        }
        Ok(())
    }
}

impl fmt::Display for Homeomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())?;
        for p in self.params() {
            write!(f, " {p}")?;
        }
        Ok(())
    }
}

/// Parses `identity`, `power <p>`, `mean_curvature <a>` or `relativistic <a>`.
impl FromStr for Homeomorphism {
    type Err = HomeoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut words = s.split_whitespace();
        let name = words.next().unwrap_or("");
        let params = words
            .map(|w| {
                w.parse::<f64>()
                    .map_err(|_| HomeoError::BadNumber(w.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::catalog_make(name, &params)
    }
}

fn check_scale(a: f64) -> Result<(), HomeoError> {
    if a.is_finite() && a > 0.0 {
        Ok(())
    } else {
        Err(HomeoError::BadScale(a))
    }
}

fn guard(x: f64, a: f64) -> Result<(), DomainViolation> {
    if x.is_finite() && x.abs() <= a - DOMAIN_MARGIN {
        Ok(())
    } else {
        Err(DomainViolation {
            value: x,
            lo: -a,
            hi: a,
        })
    }
}

fn finite(x: f64) -> Result<f64, DomainViolation> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(DomainViolation {
            value: x,
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        })
    }
}
