//! Shooting oracle: classical RK4 on the first-order system
//! `u' = φ⁻¹(w)`, `w' = f(t, u, φ⁻¹(w))`, with root finding on the unknown
//! initial data. It shares no discretisation with the fixed-point path.

use crate::function_space::{Grid, GridFunction};
use crate::homeomorphism::Kind;

use super::{BoundaryClass, ProblemSpec, SolveError};

const SCAN_POINTS: usize = 401;
const NEWTON_MAX: usize = 100;
const NEWTON_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
struct Trajectory {
    u: Vec<f64>,
    du: Vec<f64>,
}

/// A shot that could not be completed (domain exit or evaluation fault).
struct BadShot;

fn shoot(spec: &ProblemSpec, grid: &Grid, u0: f64, w0: f64) -> Result<Trajectory, BadShot> {
    let phi = &spec.phi;
    let f = &spec.f;
    let rhs = |t: f64, u: f64, w: f64| -> Result<(f64, f64), BadShot> {
        let p = phi.apply_inverse(w).map_err(|_| BadShot)?;
        let q = f.eval(t, u, p).map_err(|_| BadShot)?;
        Ok((p, q))
    };
    let h = grid.step();
    let n = grid.len();
    let mut u = Vec::with_capacity(n);
    let mut du = Vec::with_capacity(n);
    let (mut uc, mut wc) = (u0, w0);
    for i in 0..n {
        let t = grid.node(i);
        let (p, _) = rhs(t, uc, wc)?;
        u.push(uc);
        du.push(p);
        if i + 1 == n {
            break;
        }
        let (k1u, k1w) = rhs(t, uc, wc)?;
        let (k2u, k2w) = rhs(t + 0.5 * h, uc + 0.5 * h * k1u, wc + 0.5 * h * k1w)?;
        let (k3u, k3w) = rhs(t + 0.5 * h, uc + 0.5 * h * k2u, wc + 0.5 * h * k2w)?;
        let (k4u, k4w) = rhs(t + h, uc + h * k3u, wc + h * k3w)?;
        uc += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        wc += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        if !(uc.is_finite() && wc.is_finite()) {
            return Err(BadShot);
        }
    }
    Ok(Trajectory { u, du })
}

/// Solves the boundary value problem of `spec` by shooting. Best effort:
/// failure to bracket or to converge is reported as `OracleFailure`.
pub fn shooting_oracle(spec: &ProblemSpec) -> Result<GridFunction, SolveError> {
    spec.validate()?;
    let grid = spec.grid()?;
    let traj = match spec.bc {
        BoundaryClass::DirichletBounded => dirichlet(spec, &grid)?,
        BoundaryClass::ThreePointSingular => newton(
            spec,
            &grid,
            |z| (z[0], z[1]),
            |z, tr| {
                let start = z[0];
                [
                    *tr.u.last().unwrap() - start,
                    *tr.du.last().unwrap() - start,
                ]
            },
        )?,
        BoundaryClass::ThreePointClassic => {
            // Unknowns are u(0) and u'(0); the initial flux is φ(u'(0)).
            let phi = spec.phi;
            newton(
                spec,
                &grid,
                move |z| (z[0], phi.apply(z[1]).unwrap_or(f64::NAN)),
                |z, tr| {
                    let slope = z[1];
                    [
                        *tr.du.last().unwrap() - slope,
                        *tr.u.last().unwrap() - slope,
                    ]
                },
            )?
        }
    };
    GridFunction::new(grid, traj.u, traj.du).map_err(|e| SolveError::OracleFailure(e.to_string()))
}

fn dirichlet(spec: &ProblemSpec, grid: &Grid) -> Result<Trajectory, SolveError> {
    let a = match spec.phi.kind() {
        Kind::Bounded { a } => a,
        _ => unreachable!("validated"),
    };
    let edge = a * (1.0 - 1e-6);
    let end_value = |w0: f64| {
        shoot(spec, grid, 0.0, w0)
            .ok()
            .map(|tr| (*tr.u.last().unwrap(), tr))
    };

    let scan: Vec<(f64, Option<f64>)> = (0..SCAN_POINTS)
        .map(|j| {
            let w0 = -edge + 2.0 * edge * j as f64 / (SCAN_POINTS - 1) as f64;
            (w0, end_value(w0).map(|(r, _)| r))
        })
        .collect();

    // Prefer the bracket closest to w(0) = 0.
    let mut bracket: Option<(f64, f64, f64, f64)> = None;
    for pair in scan.windows(2) {
        let ((w1, r1), (w2, r2)) = (pair[0], pair[1]);
        let (Some(r1), Some(r2)) = (r1, r2) else {
            continue;
        };
        if r1 == 0.0 || r1.signum() != r2.signum() {
            let better = bracket
                .is_none_or(|(a0, b0, _, _)| (0.5 * (w1 + w2)).abs() < (0.5 * (a0 + b0)).abs());
            if better {
                bracket = Some((w1, w2, r1, r2));
            }
        }
    }
    let (mut lo, mut hi, mut r_lo, _) = bracket.ok_or_else(|| {
        SolveError::OracleFailure(
            "no sign change of u(T) over the admissible initial fluxes".into(),
        )
    })?;
    if r_lo == 0.0 {
        return Ok(end_value(lo).expect("scanned").1);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (r, _) = end_value(mid)
            .ok_or_else(|| SolveError::OracleFailure(format!("shot from w(0) = {mid} failed")))?;
        if r == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if r.signum() == r_lo.signum() {
            lo = mid;
            r_lo = r;
        } else {
            hi = mid;
        }
    }
    Ok(end_value(0.5 * (lo + hi))
        .ok_or_else(|| SolveError::OracleFailure("final shot failed".into()))?
        .1)
}

/// Damped Newton with a forward-difference Jacobian on two unknowns.
fn newton<I, R>(
    spec: &ProblemSpec,
    grid: &Grid,
    initial: I,
    residual: R,
) -> Result<Trajectory, SolveError>
where
    I: Fn([f64; 2]) -> (f64, f64),
    R: Fn([f64; 2], &Trajectory) -> [f64; 2],
{
    let eval = |z: [f64; 2]| -> Option<([f64; 2], Trajectory)> {
        let (u0, w0) = initial(z);
        if !(u0.is_finite() && w0.is_finite()) {
            return None;
        }
        let tr = shoot(spec, grid, u0, w0).ok()?;
        let r = residual(z, &tr);
        (r[0].is_finite() && r[1].is_finite()).then_some((r, tr))
    };
    let norm = |r: [f64; 2]| r[0].hypot(r[1]);

    let starts = [
        [0.0, 0.0],
        [0.0, 0.5],
        [0.0, -0.5],
        [0.5, 0.5],
        [-0.5, -0.5],
        [1.0, 1.0],
        [-1.0, -1.0],
    ];
    let mut last_err = String::from("no start point produced a valid shot");
    'starts: for start in starts {
        let mut z = start;
        let Some((mut r, mut tr)) = eval(z) else {
            continue;
        };
        for _ in 0..NEWTON_MAX {
            if r[0].abs().max(r[1].abs()) <= NEWTON_TOL * (1.0 + z[0].abs().max(z[1].abs())) {
                return Ok(tr);
            }
            let mut jac = [[0.0; 2]; 2];
            for j in 0..2 {
                let step = 1e-6 * z[j].abs().max(1.0);
                let mut zp = z;
                zp[j] += step;
                let Some((rp, _)) = eval(zp) else {
                    last_err = format!("Jacobian probe failed near {z:?}");
                    continue 'starts;
                };
                jac[0][j] = (rp[0] - r[0]) / step;
                jac[1][j] = (rp[1] - r[1]) / step;
            }
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if det == 0.0 || !det.is_finite() {
                last_err = format!("singular Jacobian at {z:?}");
                continue 'starts;
            }
            let dz = [
                (jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
                (jac[0][0] * r[1] - jac[1][0] * r[0]) / det,
            ];
            let mut damping = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial = [z[0] - damping * dz[0], z[1] - damping * dz[1]];
                if let Some((rt, trt)) = eval(trial) {
                    if norm(rt) < norm(r) {
                        z = trial;
                        r = rt;
                        tr = trt;
                        accepted = true;
                        break;
                    }
                }
                damping *= 0.5;
            }
            if !accepted {
                // Converged as far as the shot accuracy allows, or stuck.
                if norm(r) <= 1e-10 * (1.0 + z[0].abs().max(z[1].abs())) {
                    return Ok(tr);
                }
                last_err = format!("Newton stalled at {z:?} with residual {}", norm(r));
                continue 'starts;
            }
        }
        last_err = format!("Newton did not converge from {start:?}");
    }
    Err(SolveError::OracleFailure(last_err))
}
