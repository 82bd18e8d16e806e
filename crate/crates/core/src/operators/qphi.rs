use crate::function_space::{min_max, sup_norm, Grid};
use crate::homeomorphism::{Homeomorphism, Kind};

use super::OperatorError;

/// The shift `s = Q_φ(h)` with `∫₀ᵀ φ⁻¹(h(t) − s) dt = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QphiResult {
    pub s: f64,
    /// `G_h(s)` at the returned shift.
    pub residual: f64,
    pub iterations: usize,
}

const MAX_POLISH: usize = 60;

/// Solves `G_h(s) = ∫₀ᵀ φ⁻¹(h − s) = 0` on `[min h, max h]`.
///
/// `G_h` is strictly decreasing with `G_h(min h) ≥ 0 ≥ G_h(max h)`, so
/// bisection always converges. It stops once `|G_h| ≤ 10⁻¹²·T` or the bracket
/// is narrower than `10⁻¹³·max(1, |max h|)`; in the latter case an Illinois
/// false-position polish finishes the job on the remaining bracket.
pub fn q_phi(phi: &Homeomorphism, grid: &Grid, h: &[f64]) -> Result<QphiResult, OperatorError> {
    if let Kind::Bounded { a } = phi.kind() {
        let sup = sup_norm(h);
        if !(sup < 0.5 * a) {
            return Err(OperatorError::PreconditionBoundedDomain {
                sup,
                half_a: 0.5 * a,
            });
        }
    }
    let (lo, hi) = min_max(h);
    if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
        // φ⁻¹(0) = 0 pins the shift to the constant value.
        let s = h[0];
        return Ok(QphiResult {
            s,
            residual: g_h(phi, grid, h, s, &mut Vec::new())?,
            iterations: 0,
        });
    }

    let tol = 1e-12 * grid.length();
    let width_tol = 1e-13 * hi.abs().max(1.0);
    let mut scratch = Vec::with_capacity(h.len());
    let mut g = |s: f64| g_h(phi, grid, h, s, &mut scratch);

    let (mut a, mut b) = (lo, hi);
    let (mut ga, mut gb) = (g(a)?, g(b)?);
    if ga < 0.0 || gb > 0.0 {
        return Err(OperatorError::NoSignChange {
            lo,
            hi,
            g_lo: ga,
            g_hi: gb,
        });
    }
    let mut best = if ga.abs() <= gb.abs() {
        (a, ga)
    } else {
        (b, gb)
    };
    let mut iterations = 0;
    if best.1.abs() <= tol {
        return Ok(QphiResult {
            s: best.0,
            residual: best.1,
            iterations,
        });
    }

    while b - a > width_tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let gm = g(mid)?;
        iterations += 1;
        if gm.abs() < best.1.abs() {
            best = (mid, gm);
        }
        if gm.abs() <= tol {
            return Ok(QphiResult {
                s: mid,
                residual: gm,
                iterations,
            });
        }
        if gm > 0.0 {
            (a, ga) = (mid, gm);
        } else {
            (b, gb) = (mid, gm);
        }
    }

    // Illinois polish inside the final bracket.
    let mut side = 0i8;
    for _ in 0..MAX_POLISH {
        if best.1.abs() <= tol || ga == gb {
            break;
        }
        let s = (a * gb - b * ga) / (gb - ga);
        if !(s > a && s < b) {
            break;
        }
        let gs = g(s)?;
        iterations += 1;
        if gs.abs() < best.1.abs() {
            best = (s, gs);
        }
        if gs > 0.0 {
            (a, ga) = (s, gs);
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        } else {
            (b, gb) = (s, gs);
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        }
    }

    Ok(QphiResult {
        s: best.0,
        residual: best.1,
        iterations,
    })
}

fn g_h(
    phi: &Homeomorphism,
    grid: &Grid,
    h: &[f64],
    s: f64,
    scratch: &mut Vec<f64>,
) -> Result<f64, OperatorError> {
    scratch.clear();
    for &x in h {
        scratch.push(phi.apply_inverse(x - s)?);
    }
    Ok(grid.integral(scratch))
}
