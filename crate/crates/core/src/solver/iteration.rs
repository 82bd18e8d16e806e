//! Damped fixed-point iteration with optional Anderson mixing.
//!
//! With `depth = 0` this is plain damped Picard,
//! `u_{k+1} = (1 − θ)u_k + θ·M(u_k)`. With `depth = m > 0` the step is
//! corrected by a least-squares combination of the last `m` residual
//! differences (Anderson type II), which lets the iteration settle on fixed
//! points whose linearisation has eigenvalues outside the unit disk.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::function_space::{sup_norm, GridFunction};
use crate::operators::OperatorError;

pub const THETA_MIN: f64 = 1e-3;
const DIVERGED: f64 = 1e12;

#[derive(Debug, Clone, Copy)]
pub struct IterationConfig {
    /// Relative stopping threshold on `‖M(u) − u‖₁ / (1 + ‖u‖₁)`.
    pub tol: f64,
    pub max_iter: usize,
    pub theta0: f64,
    pub depth: usize,
}

#[derive(Debug, Clone)]
pub struct StageResult {
    /// `M(u_k)` for the last iterate `u_k`.
    pub solution: GridFunction,
    /// The iterate `u_k` itself.
    pub iterate: GridFunction,
    pub iterations: usize,
    /// `‖M(u_k) − u_k‖₁` at the last (or best) iterate.
    pub residual: f64,
    pub converged: bool,
}

/// `‖·‖₁` of a stacked `[u; du]` vector.
fn c1_norm(x: &[f64]) -> f64 {
    let n = x.len() / 2;
    sup_norm(&x[..n]) + sup_norm(&x[n..])
}

fn stack(gf: &GridFunction) -> Vec<f64> {
    let mut x = Vec::with_capacity(2 * gf.u().len());
    x.extend_from_slice(gf.u());
    x.extend_from_slice(gf.du());
    x
}

fn unstack(template: &GridFunction, x: Vec<f64>) -> Option<GridFunction> {
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let n = template.u().len();
    let mut u = x;
    let du = u.split_off(n);
    Some(GridFunction::from_parts_unchecked(*template.grid(), u, du))
}

/// Operator faults that mean "this iterate is outside the map's domain".
fn is_domain_fault(e: &OperatorError) -> bool {
    matches!(
        e,
        OperatorError::OmegaViolation { .. }
            | OperatorError::PreconditionBoundedDomain { .. }
            | OperatorError::Domain(_)
    )
}

pub fn iterate<M>(
    map: M,
    start: GridFunction,
    cfg: &IterationConfig,
) -> Result<StageResult, OperatorError>
where
    M: Fn(&GridFunction) -> Result<GridFunction, OperatorError>,
{
    let mut x = start;
    let mut theta = cfg.theta0.clamp(THETA_MIN, 1.0);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>)> = VecDeque::new();
    // Last iterate at which the map could be evaluated, with its residual.
    let mut safe: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut prev_residual = f64::INFINITY;
    let mut best: Option<(f64, GridFunction, GridFunction)> = None;

    for k in 0..cfg.max_iter {
        let g = match map(&x) {
            Ok(g) => g,
            Err(e) if is_domain_fault(&e) && safe.is_some() && theta > THETA_MIN => {
                // The extrapolated step left the domain: retreat to a short plain step.
                theta = (0.5 * theta).max(THETA_MIN);
                history.clear();
                let (sx, sf) = safe.as_ref().expect("checked above");
                let next: Vec<f64> = sx.iter().zip(sf).map(|(a, b)| a + theta * b).collect();
                x = unstack(&x, next).ok_or(e)?;
                continue;
            }
            Err(e) => return Err(e),
        };
        let xs = stack(&x);
        let gs = stack(&g);
        let f: Vec<f64> = gs.iter().zip(&xs).map(|(a, b)| a - b).collect();
        let residual = c1_norm(&f);
        let scale = 1.0 + c1_norm(&xs);

        if residual <= cfg.tol * scale {
            return Ok(StageResult {
                solution: g,
                iterate: x,
                iterations: k + 1,
                residual,
                converged: true,
            });
        }
        if best.as_ref().is_none_or(|(r, _, _)| residual < *r) {
            best = Some((residual, g.clone(), x.clone()));
        }
        if !residual.is_finite() || residual > DIVERGED * (1.0 + prev_residual.min(1.0)) {
            break;
        }

        if residual > prev_residual {
            theta = (0.5 * theta).max(THETA_MIN);
        } else {
            theta = (1.2 * theta).min(1.0);
        }
        prev_residual = residual;

        if let Some((sx, sf)) = &safe {
            let dx: Vec<f64> = xs.iter().zip(sx).map(|(a, b)| a - b).collect();
            let df: Vec<f64> = f.iter().zip(sf).map(|(a, b)| a - b).collect();
            history.push_back((dx, df));
            while history.len() > cfg.depth {
                history.pop_front();
            }
        }

        let mut next: Vec<f64> = xs.iter().zip(&f).map(|(a, b)| a + theta * b).collect();
        if let Some(gamma) = mixing_coefficients(&history, &f) {
            for ((dx, df), c) in history.iter().zip(gamma.iter()) {
                for i in 0..next.len() {
                    next[i] -= c * (dx[i] + theta * df[i]);
                }
            }
        }
        safe = Some((xs, f));
        match unstack(&x, next) {
            Some(n) => x = n,
            None => break,
        }
    }

    let (residual, solution, iterate) = best.expect("at least one evaluation");
    Ok(StageResult {
        solution,
        iterate,
        iterations: cfg.max_iter,
        residual,
        converged: false,
    })
}

/// `argmin_γ ‖f − ΔF γ‖₂`, dropping directions below a relative singular-value cutoff.
fn mixing_coefficients(
    history: &VecDeque<(Vec<f64>, Vec<f64>)>,
    f: &[f64],
) -> Option<DVector<f64>> {
    if history.is_empty() {
        return None;
    }
    let rows = f.len();
    let cols = history.len();
    let df = DMatrix::from_fn(rows, cols, |i, j| history[j].1[i]);
    let rhs = DVector::from_column_slice(f);
    let svd = df.svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) {
        return None;
    }
    let gamma = svd.solve(&rhs, 1e-10 * smax).ok()?;
    gamma.iter().all(|g| g.is_finite()).then_some(gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::Grid;

    fn cfg(depth: usize) -> IterationConfig {
        IterationConfig {
            tol: 1e-12,
            max_iter: 500,
            theta0: 1.0,
            depth,
        }
    }

    /// Affine map on constants: u ↦ c·u + d with fixed point d/(1 − c).
    fn affine(c: f64, d: f64) -> impl Fn(&GridFunction) -> Result<GridFunction, OperatorError> {
        move |gf: &GridFunction| {
            let u = gf.u().iter().map(|x| c * x + d).collect();
            let du = gf.du().to_vec();
            Ok(GridFunction::from_parts_unchecked(*gf.grid(), u, du))
        }
    }

    #[test]
    fn plain_picard_on_contraction() {
        let g = Grid::new(1.0, 5).unwrap();
        let r = iterate(affine(0.5, 1.0), GridFunction::zero(g), &cfg(0)).unwrap();
        assert!(r.converged);
        assert!((r.solution.u()[0] - 2.0).abs() < 1e-11);
    }

    #[test]
    fn plain_picard_fails_on_expansion_but_mixing_succeeds() {
        let g = Grid::new(1.0, 5).unwrap();
        let r = iterate(affine(1.6, 1.0), GridFunction::zero(g), &cfg(0)).unwrap();
        assert!(!r.converged);
        let r = iterate(affine(1.6, 1.0), GridFunction::zero(g), &cfg(3)).unwrap();
        assert!(r.converged);
        assert!((r.solution.u()[0] + 1.0 / 0.6).abs() < 1e-10);
    }
}
