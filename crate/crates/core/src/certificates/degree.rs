use std::f64::consts::{FRAC_PI_2, TAU};

use crate::expr::Expr;

use super::{eval, kv, kv_num, CertificateError};

pub const SIMPSON_NODES: usize = 201;
pub const INITIAL_BOUNDARY_SAMPLES: usize = 256;
pub const MAX_REFINEMENT_DEPTH: usize = 20;
/// `‖G‖` below this fraction of the boundary scale counts as a zero on the circle.
pub const BOUNDARY_ZERO_RATIO: f64 = 1e-9;
const INTEGER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeResult {
    pub rho: f64,
    pub winding: i64,
    pub min_boundary_norm: f64,
    /// Deepest arc bisection that was needed.
    pub refinement_depth: usize,
    /// Boundary evaluations, initial samples included.
    pub evaluations: usize,
}

impl DegreeResult {
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        kv_num(&mut out, "rho", self.rho);
        kv(&mut out, "winding", self.winding);
        kv_num(&mut out, "min_boundary_norm", self.min_boundary_norm);
        kv(&mut out, "refinement_depth", self.refinement_depth);
        kv(&mut out, "boundary_evaluations", self.evaluations);
        out
    }
}

/// The reduced planar map on affine functions `u = a + bt`:
/// `G(a, b) = (aT + bT² − bT − (1/T)∫₀ᵀ f(t, a + bt, b) dt, b − a − bT)`,
/// with the integral by composite Simpson on `SIMPSON_NODES` points.
pub fn g_map(f: &Expr, length: f64, a: f64, b: f64) -> Result<(f64, f64), CertificateError> {
    let intervals = SIMPSON_NODES - 1;
    let h = length / intervals as f64;
    let mut sum = 0.0;
    for i in 0..=intervals {
        let t = if i == intervals { length } else { i as f64 * h };
        let weight = if i == 0 || i == intervals {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += weight * eval(f, "f", t, a + b * t, b)?;
    }
    let integral = sum * h / 3.0;
    Ok((
        a * length + b * length * (length - 1.0) - integral / length,
        b - a - b * length,
    ))
}

/// Degree of `G` on the disk of radius `rho`, from the winding of `G` along
/// its boundary with `INITIAL_BOUNDARY_SAMPLES` starting samples.
pub fn brouwer_degree(f: &Expr, length: f64, rho: f64) -> Result<DegreeResult, CertificateError> {
    brouwer_degree_sampled(f, length, rho, INITIAL_BOUNDARY_SAMPLES)
}

pub fn brouwer_degree_sampled(
    f: &Expr,
    length: f64,
    rho: f64,
    samples: usize,
) -> Result<DegreeResult, CertificateError> {
    if !(length.is_finite() && length > 0.0) {
        return Err(CertificateError::BadLength(length));
    }
    winding(|a, b| g_map(f, length, a, b), rho, samples)
}

/// Winding number of `map` along the circle of radius `rho` about the origin.
///
/// Angle increments between consecutive samples are wrapped to `(−π, π]`;
/// any arc whose increment exceeds `π/2` is bisected, up to
/// `MAX_REFINEMENT_DEPTH` levels. The computation is refused
/// (`BoundaryZero`) when the map comes within `BOUNDARY_ZERO_RATIO` of its
/// largest initial boundary value, or when bisection cannot resolve an arc.
pub fn winding<F>(mut map: F, rho: f64, samples: usize) -> Result<DegreeResult, CertificateError>
where
    F: FnMut(f64, f64) -> Result<(f64, f64), CertificateError>,
{
    if !(rho.is_finite() && rho > 0.0) {
        return Err(CertificateError::BadRadius(rho));
    }
    let samples = samples.max(4);
    let mut point = |angle: f64| map(rho * angle.cos(), rho * angle.sin());

    let angles: Vec<f64> = (0..samples)
        .map(|j| TAU * j as f64 / samples as f64)
        .collect();
    let values = angles
        .iter()
        .map(|&th| point(th))
        .collect::<Result<Vec<_>, _>>()?;
    let norms: Vec<f64> = values.iter().map(|g| g.0.hypot(g.1)).collect();
    let scale = norms.iter().copied().fold(0.0, f64::max);

    let mut walk = Walk {
        rho,
        threshold: BOUNDARY_ZERO_RATIO * scale,
        min_norm: f64::INFINITY,
        min_angle: 0.0,
        depth: 0,
        evaluations: samples,
    };
    for (&th, &n) in angles.iter().zip(&norms) {
        walk.record(th, n)?;
    }

    let mut total = 0.0;
    for j in 0..samples {
        let (a0, g0) = (angles[j], values[j]);
        let (a1, g1) = if j + 1 == samples {
            (TAU, values[0])
        } else {
            (angles[j + 1], values[j + 1])
        };
        total += walk.arc(&mut point, a0, g0, a1, g1, 0)?;
    }

    let turns = total / TAU;
    let winding = turns.round();
    if (turns - winding).abs() > INTEGER_TOL {
        return Err(CertificateError::NonInteger { turns });
    }
    Ok(DegreeResult {
        rho,
        winding: winding as i64,
        min_boundary_norm: walk.min_norm,
        refinement_depth: walk.depth,
        evaluations: walk.evaluations,
    })
}

struct Walk {
    rho: f64,
    threshold: f64,
    min_norm: f64,
    min_angle: f64,
    depth: usize,
    evaluations: usize,
}

impl Walk {
    fn record(&mut self, angle: f64, norm: f64) -> Result<(), CertificateError> {
        if norm < self.min_norm {
            self.min_norm = norm;
            self.min_angle = angle;
        }
        if !(norm > self.threshold) {
            return Err(self.boundary_zero());
        }
        Ok(())
    }

    fn boundary_zero(&self) -> CertificateError {
        CertificateError::BoundaryZero {
            rho: self.rho,
            angle: self.min_angle,
            min_norm: self.min_norm,
        }
    }

    /// Signed angle swept by `G` along the arc `[a0, a1]`.
    fn arc<P>(
        &mut self,
        point: &mut P,
        a0: f64,
        g0: (f64, f64),
        a1: f64,
        g1: (f64, f64),
        depth: usize,
    ) -> Result<f64, CertificateError>
    where
        P: FnMut(f64) -> Result<(f64, f64), CertificateError>,
    {
        let cross = g0.0 * g1.1 - g0.1 * g1.0;
        let dot = g0.0 * g1.0 + g0.1 * g1.1;
        let step = cross.atan2(dot);
        if step.abs() <= FRAC_PI_2 {
            return Ok(step);
        }
        if depth == MAX_REFINEMENT_DEPTH {
            // An unresolvable swing means G passes (numerically) through 0.
            self.min_angle = 0.5 * (a0 + a1);
            return Err(self.boundary_zero());
        }
        let mid = 0.5 * (a0 + a1);
        let gm = point(mid)?;
        self.evaluations += 1;
        self.depth = self.depth.max(depth + 1);
        self.record(mid, gm.0.hypot(gm.1))?;
        Ok(self.arc(point, a0, g0, mid, gm, depth + 1)?
            + self.arc(point, mid, gm, a1, g1, depth + 1)?)
    }
}
