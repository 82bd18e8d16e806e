//! Sampled checks of the existence hypotheses, the explicit a-priori bounds
//! they yield, and the planar degree of the reduced map `G`.
//!
//! Hypotheses quantified over all reals are only ever checked on a finite
//! sample box; the resulting verdict is `CheckedOnGrid`, which is evidence
//! and not a proof.

mod degree;
mod growth;
mod signs;

pub use degree::{
    brouwer_degree, brouwer_degree_sampled, g_map, winding, DegreeResult, BOUNDARY_ZERO_RATIO,
    INITIAL_BOUNDARY_SAMPLES, MAX_REFINEMENT_DEPTH, SIMPSON_NODES,
};
pub use growth::{check_growth, GrowthCertificate};
pub use signs::{check_signs, SignCertificate};

use std::fmt;

use thiserror::Error;

use crate::expr::{EvalDomain, Expr, Var};
use crate::function_space::Short;
use crate::homeomorphism::DomainViolation;

pub const DEFAULT_SAMPLES: usize = 101;
/// Slack granted to sampled inequalities.
pub const SAMPLE_SLACK: f64 = 1e-12;
/// Relative agreement required between `dn` and a central difference of `n`.
pub const DERIVATIVE_TOL: f64 = 1e-6;

/// Sampling ranges: `t ∈ [0, T]`, `u ∈ [−x, x]`, `v ∈ [−y, y]`.
///
/// The `u` and `v` axes are the symmetric lattices `k·x/K`, `k = −K..=K`,
/// with `samples = 2K + 1`, so a box with twice the half-width and
/// `2·samples − 1` points contains every point of the smaller one exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox {
    pub x: f64,
    pub y: f64,
    pub samples: usize,
}

impl SampleBox {
    pub fn new(x: f64, y: f64, samples: usize) -> Result<Self, CertificateError> {
        let b = Self { x, y, samples };
        b.validate()?;
        Ok(b)
    }

    /// The square box `[−w, w]²` with the default density.
    pub fn square(w: f64) -> Self {
        Self {
            x: w,
            y: w,
            samples: DEFAULT_SAMPLES,
        }
    }

    fn validate(&self) -> Result<(), CertificateError> {
        if !(self.x.is_finite() && self.x > 0.0 && self.y.is_finite() && self.y > 0.0) {
            return Err(CertificateError::InvalidBox(format!(
                "half-widths must be positive, got X = {}, Y = {}",
                self.x, self.y
            )));
        }
        if self.samples < 3 || self.samples.is_multiple_of(2) {
            return Err(CertificateError::InvalidBox(format!(
                "samples per axis must be odd and at least 3, got {}",
                self.samples
            )));
        }
        Ok(())
    }

    pub fn t_points(&self, length: f64) -> Vec<f64> {
        let last = self.samples - 1;
        (0..self.samples)
            .map(|i| {
                if i == last {
                    length
                } else {
                    length * i as f64 / last as f64
                }
            })
            .collect()
    }

    pub fn u_points(&self) -> Vec<f64> {
        lattice(self.x, self.samples)
    }

    pub fn v_points(&self) -> Vec<f64> {
        lattice(self.y, self.samples)
    }
}

fn lattice(half_width: f64, samples: usize) -> Vec<f64> {
    let k = (samples / 2) as i64;
    let step = half_width / k as f64;
    (-k..=k).map(|j| j as f64 * step).collect()
}

/// The sampled condition that failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    HNonNegative,
    NZeroAtOrigin,
    FluxMonotone,
    GrowthBound,
    Minorant,
    PositiveAboveM2,
    NegativeBelowM1,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::HNonNegative => "h(t) >= 0",
            Condition::NZeroAtOrigin => "n(0) = 0",
            Condition::FluxMonotone => "phi(v)*dn(u)*v >= 0",
            Condition::GrowthBound => "|f| <= f*n(u) + h(t)",
            Condition::Minorant => "f >= c(t)",
            Condition::PositiveAboveM2 => "f > 0 for v >= m2",
            Condition::NegativeBelowM1 => "f < 0 for v <= m1",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    CheckedOnGrid,
    FailedAt {
        t: f64,
        x: f64,
        y: f64,
        condition: Condition,
    },
    /// A hypothesis fails outright; the message carries the offending numbers.
    NotApplicable(String),
}

impl Verdict {
    pub fn is_checked(&self) -> bool {
        matches!(self, Verdict::CheckedOnGrid)
    }

    pub fn keyword(&self) -> &'static str {
        match self {
            Verdict::CheckedOnGrid => "checked_on_grid",
            Verdict::FailedAt { .. } => "failed_at",
            Verdict::NotApplicable(_) => "not_applicable",
        }
    }

    fn write_kv(&self, out: &mut String) {
        kv(out, "verdict", self.keyword());
        match self {
            Verdict::CheckedOnGrid => {}
            Verdict::FailedAt { t, x, y, condition } => {
                kv(out, "failed_condition", condition);
                kv_num(out, "witness_t", *t);
                kv_num(out, "witness_u", *x);
                kv_num(out, "witness_v", *y);
            }
            Verdict::NotApplicable(reason) => kv(out, "reason", reason),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::CheckedOnGrid => f.write_str("checked on grid"),
            Verdict::FailedAt { t, x, y, condition } => {
                write!(f, "{condition} fails at (t, u, v) = ({t}, {x}, {y})")
            }
            Verdict::NotApplicable(reason) => write!(f, "not applicable: {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertificateError {
    #[error("{check} needs a {expected} homeomorphism, got {got}")]
    WrongRegime {
        check: &'static str,
        expected: &'static str,
        got: String,
    },
    #[error("`{key}` may only depend on {allowed}")]
    BadDependency {
        key: &'static str,
        allowed: &'static str,
    },
    #[error("T must be positive, got {0}")]
    BadLength(f64),
    #[error(
        "dn disagrees with the derivative of n at u = {x}: dn = {dn}, central difference = {fd}"
    )]
    DerivativeMismatch { x: f64, dn: f64, fd: f64 },
    #[error("slope thresholds need m1 < m2, got m1 = {m1}, m2 = {m2}")]
    SlopeOrder { m1: f64, m2: f64 },
    #[error("invalid sample box: {0}")]
    InvalidBox(String),
    #[error("{key} at (t, u, v) = ({t}, {u}, {v}): {source}")]
    Eval {
        key: &'static str,
        t: f64,
        u: f64,
        v: f64,
        #[source]
        source: EvalDomain,
    },
    #[error(transparent)]
    Domain(#[from] DomainViolation),
    #[error("radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("G vanishes on the circle of radius {rho} near angle {angle}: min |G| = {min_norm:e}")]
    BoundaryZero { rho: f64, angle: f64, min_norm: f64 },
    #[error("accumulated winding {turns} turns is not within 1e-6 of an integer")]
    NonInteger { turns: f64 },
}

/// Rejects expressions that mention variables outside `allowed`.
fn depends_only(expr: &Expr, key: &'static str, allowed: &[Var]) -> Result<(), CertificateError> {
    let bad = [Var::T, Var::U, Var::V]
        .into_iter()
        .any(|v| !allowed.contains(&v) && expr.uses(v));
    if bad {
        let allowed = match allowed {
            [Var::T] => "t",
            [Var::U] => "u",
            _ => "t, u and v",
        };
        return Err(CertificateError::BadDependency { key, allowed });
    }
    Ok(())
}

fn eval(expr: &Expr, key: &'static str, t: f64, u: f64, v: f64) -> Result<f64, CertificateError> {
    expr.eval(t, u, v).map_err(|source| CertificateError::Eval {
        key,
        t,
        u,
        v,
        source,
    })
}

fn kv(out: &mut String, key: &str, value: impl fmt::Display) {
    use fmt::Write;
    writeln!(out, "{key}={value}").expect("writing to a String");
}

fn kv_num(out: &mut String, key: &str, value: f64) {
    kv(out, key, Short(value));
}

fn kv_opt(out: &mut String, key: &str, value: Option<f64>) {
    match value {
        Some(v) => kv_num(out, key, v),
        None => kv(out, key, "none"),
    }
}

fn box_kv(out: &mut String, b: &SampleBox) {
    kv(
        out,
        "box_u",
        format_args!("[-{}, {}]", Short(b.x), Short(b.x)),
    );
    kv(
        out,
        "box_v",
        format_args!("[-{}, {}]", Short(b.y), Short(b.y)),
    );
    kv(out, "samples_per_axis", b.samples);
}
