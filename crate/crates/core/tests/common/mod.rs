#![allow(dead_code)]

use phibvp::certificates::g_map;
use phibvp::expr::Expr;
use phibvp::solver::{BoundaryClass, ProblemSpec};

pub fn expr(s: &str) -> Expr {
    Expr::parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

pub fn spec(bc: BoundaryClass, phi: &str, f: &str, length: f64) -> ProblemSpec {
    ProblemSpec::new(bc, phi.parse().unwrap(), expr(f), length).unwrap()
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Fixed problems with curved solutions, two per boundary class.
pub fn battery() -> Vec<(BoundaryClass, &'static str, &'static str, f64)> {
    use BoundaryClass::*;
    vec![
        (DirichletBounded, "mean_curvature 1", "u - 2", 0.1),
        (
            DirichletBounded,
            "mean_curvature 2",
            "sin(3*t) - u + v",
            0.5,
        ),
        (ThreePointSingular, "relativistic 1", "t - 0.5*u", 1.0),
        (
            ThreePointSingular,
            "relativistic 2",
            "cos(2*t) + 0.3*u - 0.2*v",
            1.5,
        ),
        (
            ThreePointClassic,
            "identity",
            "v - 1 + 0.3*cos(2*pi*t)",
            1.0,
        ),
        (
            ThreePointClassic,
            "power 4",
            "exp(v)/2 - 1 + 0.2*sin(2*pi*t)",
            1.0,
        ),
    ]
}

/// Zeros of `G` found by damped Newton from a 16×16 grid of starts inside
/// the disk of radius `rho`.
#[derive(Debug)]
pub struct NewtonDegree {
    /// `Σ sign(det J_G)` over distinct zeros inside the disk.
    pub degree: i64,
    pub zeros: Vec<(f64, f64, f64)>,
    /// Every start converged to a zero.
    pub all_converged: bool,
    /// Every zero found has `|det J_G| > 1e-8`.
    pub nondegenerate: bool,
}

fn jacobian(f: &Expr, length: f64, a: f64, b: f64) -> [[f64; 2]; 2] {
    let step = |z: f64| 1e-6 * z.abs().max(1.0);
    let (ha, hb) = (step(a), step(b));
    let gp = g_map(f, length, a + ha, b).unwrap();
    let gm = g_map(f, length, a - ha, b).unwrap();
    let gq = g_map(f, length, a, b + hb).unwrap();
    let gr = g_map(f, length, a, b - hb).unwrap();
    [
        [(gp.0 - gm.0) / (2.0 * ha), (gq.0 - gr.0) / (2.0 * hb)],
        [(gp.1 - gm.1) / (2.0 * ha), (gq.1 - gr.1) / (2.0 * hb)],
    ]
}

pub fn newton_degree(f: &Expr, length: f64, rho: f64) -> NewtonDegree {
    let mut zeros: Vec<(f64, f64, f64)> = Vec::new();
    let mut all_converged = true;
    let side = 16;
    for i in 0..side {
        for j in 0..side {
            let a0 = -rho + (2.0 * i as f64 + 1.0) * rho / side as f64;
            let b0 = -rho + (2.0 * j as f64 + 1.0) * rho / side as f64;
            if a0.hypot(b0) >= rho {
                continue;
            }
            match newton(f, length, a0, b0) {
                Some((a, b)) => {
                    if a.hypot(b) < rho && !zeros.iter().any(|z| (z.0 - a).hypot(z.1 - b) < 1e-6) {
                        let j = jacobian(f, length, a, b);
                        zeros.push((a, b, j[0][0] * j[1][1] - j[0][1] * j[1][0]));
                    }
                }
                None => all_converged = false,
            }
        }
    }
    NewtonDegree {
        degree: zeros.iter().map(|z| z.2.signum() as i64).sum(),
        nondegenerate: zeros.iter().all(|z| z.2.abs() > 1e-8),
        zeros,
        all_converged,
    }
}

fn newton(f: &Expr, length: f64, mut a: f64, mut b: f64) -> Option<(f64, f64)> {
    let norm = |g: (f64, f64)| g.0.hypot(g.1);
    let mut g = g_map(f, length, a, b).ok()?;
    for _ in 0..200 {
        if norm(g) <= 1e-12 {
            return Some((a, b));
        }
        let j = jacobian(f, length, a, b);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let da = (j[1][1] * g.0 - j[0][1] * g.1) / det;
        let db = (j[0][0] * g.1 - j[1][0] * g.0) / det;
        let mut damping = 1.0;
        loop {
            let (ta, tb) = (a - damping * da, b - damping * db);
            if let Ok(tg) = g_map(f, length, ta, tb) {
                if norm(tg) < norm(g) {
                    (a, b, g) = (ta, tb, tg);
                    break;
                }
            }
            damping *= 0.5;
            if damping < 1e-10 {
                return (norm(g) <= 1e-9).then_some((a, b));
            }
        }
    }
    (norm(g) <= 1e-9).then_some((a, b))
}
