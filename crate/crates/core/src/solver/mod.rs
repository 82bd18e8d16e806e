//! Fixed-point solution of the three boundary value problems, with
//! λ-continuation for the Dirichlet and classic three-point families, and an
//! independent shooting oracle.

mod diagnostics;
mod iteration;
mod shooting;

pub use diagnostics::{bc_residual, ode_residuals, phi_of_derivative};
pub use iteration::{IterationConfig, StageResult};
pub use shooting::shooting_oracle;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::expr::Expr;
use crate::function_space::{sup_norm, Grid, GridError, GridFunction, DEFAULT_NODES};
use crate::homeomorphism::{Homeomorphism, Kind};
use crate::operators::{
    dirichlet_m, dirichlet_source, threepoint_classic_m1, threepoint_singular_m, OperatorError,
};

pub const DEFAULT_TOL_FP: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const DEFAULT_LAMBDA_STEP: f64 = 0.1;
pub const MIN_LAMBDA_STEP: f64 = 1e-3;
pub const DEFAULT_ANDERSON_DEPTH: usize = 5;

/// Boundary conditions, each tied to one regime of `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryClass {
    /// `u(0) = 0 = u(T)`, bounded `φ`.
    DirichletBounded,
    /// `u(T) = u(0) = u'(T)`, singular `φ`.
    ThreePointSingular,
    /// `u(T) = u'(0) = u'(T)`, classic `φ`.
    ThreePointClassic,
}

impl BoundaryClass {
    pub fn keyword(&self) -> &'static str {
        match self {
            BoundaryClass::DirichletBounded => "dirichlet",
            BoundaryClass::ThreePointSingular => "threepoint_singular",
            BoundaryClass::ThreePointClassic => "threepoint_classic",
        }
    }

    fn accepts(&self, kind: Kind) -> bool {
        matches!(
            (self, kind),
            (BoundaryClass::DirichletBounded, Kind::Bounded { .. })
                | (BoundaryClass::ThreePointSingular, Kind::Singular { .. })
                | (BoundaryClass::ThreePointClassic, Kind::Classic)
        )
    }
}

impl fmt::Display for BoundaryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl FromStr for BoundaryClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dirichlet" => Ok(BoundaryClass::DirichletBounded),
            "threepoint_singular" => Ok(BoundaryClass::ThreePointSingular),
            "threepoint_classic" => Ok(BoundaryClass::ThreePointClassic),
            other => Err(format!(
                "unknown problem `{other}` (expected dirichlet, threepoint_singular or threepoint_classic)"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub bc: BoundaryClass,
    pub phi: Homeomorphism,
    pub f: Expr,
    /// Interval length `T`.
    pub length: f64,
    pub grid_n: usize,
    pub tol_fp: f64,
    pub max_iter: usize,
    pub lambda_step: f64,
    pub theta0: f64,
    /// Anderson history length; `0` gives plain damped Picard.
    pub anderson_depth: usize,
}

impl ProblemSpec {
    pub fn new(
        bc: BoundaryClass,
        phi: Homeomorphism,
        f: Expr,
        length: f64,
    ) -> Result<Self, SolveError> {
        let spec = Self {
            bc,
            phi,
            f,
            length,
            grid_n: DEFAULT_NODES,
            tol_fp: DEFAULT_TOL_FP,
            max_iter: DEFAULT_MAX_ITER,
            lambda_step: DEFAULT_LAMBDA_STEP,
            theta0: 1.0,
            anderson_depth: DEFAULT_ANDERSON_DEPTH,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_grid_n(mut self, n: usize) -> Self {
        self.grid_n = n;
        self
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if !self.bc.accepts(self.phi.kind()) {
            return Err(SolveError::InvalidSpec(format!(
                "{} problems need a {} homeomorphism, got {}",
                self.bc,
                match self.bc {
                    BoundaryClass::DirichletBounded => "bounded",
                    BoundaryClass::ThreePointSingular => "singular",
                    BoundaryClass::ThreePointClassic => "classic",
                },
                self.phi
            )));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(SolveError::InvalidSpec(format!(
                "T must be positive, got {}",
                self.length
            )));
        }
        if !(self.tol_fp > 0.0) {
            return Err(SolveError::InvalidSpec(format!(
                "tol must be positive, got {}",
                self.tol_fp
            )));
        }
        if !(self.lambda_step > 0.0 && self.lambda_step <= 1.0) {
            return Err(SolveError::InvalidSpec(format!(
                "lambda_step must lie in (0, 1], got {}",
                self.lambda_step
            )));
        }
        if self.max_iter == 0 {
            return Err(SolveError::InvalidSpec("max_iter must be positive".into()));
        }
        Grid::new(self.length, self.grid_n)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid, SolveError> {
        Ok(Grid::new(self.length, self.grid_n)?)
    }

    /// The fixed-point map at continuation parameter `lambda` (ignored for
    /// the singular class, whose map is λ-free).
    pub fn apply_map(&self, gf: &GridFunction, lambda: f64) -> Result<GridFunction, OperatorError> {
        match self.bc {
            BoundaryClass::DirichletBounded => dirichlet_m(&self.phi, &self.f, gf, lambda),
            BoundaryClass::ThreePointSingular => threepoint_singular_m(&self.phi, &self.f, gf),
            BoundaryClass::ThreePointClassic => {
                threepoint_classic_m1(&self.phi, &self.f, gf, lambda)
            }
        }
    }

    fn iteration_config(&self) -> IterationConfig {
        IterationConfig {
            // Stop a little inside the reported tolerance so that the final
            // M(u_k), which is what gets returned, still meets it.
            tol: 0.1 * self.tol_fp,
            max_iter: self.max_iter,
            theta0: self.theta0,
            depth: self.anderson_depth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaStage {
    pub lambda: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: GridFunction,
    /// `‖u − M(u)‖₁` for the returned `u`, with `M` at `λ = 1`.
    pub fp_residual: f64,
    /// Sup over interior nodes of `|Δφ(u')/Δt − f(t, u, u')|` (centred differences).
    pub ode_residual: f64,
    pub bc_residual: f64,
    pub lambda_path: Vec<LambdaStage>,
    pub converged: bool,
    /// `a/2 − ‖H(N_f u)‖∞` for Dirichlet problems.
    pub omega_margin: Option<f64>,
    pub consistency_defect: f64,
}

impl SolveReport {
    pub fn iterations(&self) -> usize {
        self.lambda_path.iter().map(|s| s.iterations).sum()
    }
}

#[derive(Debug, Clone, Error)]
pub enum SolveError {
    #[error("invalid problem: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("no convergence at lambda = {lambda} after {iterations} iterations (best residual {best_residual:e})")]
    NonConvergence {
        lambda: f64,
        best_residual: f64,
        iterations: usize,
        report: Box<SolveReport>,
    },
    #[error("at lambda = {lambda}: {source}")]
    Domain {
        lambda: f64,
        #[source]
        source: OperatorError,
    },
    #[error("at lambda = {lambda}: {source}")]
    Operator {
        lambda: f64,
        #[source]
        source: OperatorError,
    },
    #[error("shooting oracle failed: {0}")]
    OracleFailure(String),
}

fn stage_error(lambda: f64, source: OperatorError) -> SolveError {
    match source {
        OperatorError::OmegaViolation { .. }
        | OperatorError::PreconditionBoundedDomain { .. }
        | OperatorError::Domain(_) => SolveError::Domain { lambda, source },
        other => SolveError::Operator {
            lambda,
            source: other,
        },
    }
}

/// Finds a fixed point of the problem's operator starting from `u ≡ 0`.
///
/// Dirichlet and classic three-point problems are continued in `λ` from 0
/// to 1, warm-starting each stage; the step is halved (down to `10⁻³`) when
/// an iterate leaves the operator's domain. Singular problems iterate the
/// λ-free map directly.
pub fn solve(spec: &ProblemSpec) -> Result<SolveReport, SolveError> {
    spec.validate()?;
    let grid = spec.grid()?;
    let cfg = spec.iteration_config();
    let mut current = GridFunction::zero(grid);
    let mut path = Vec::new();

    if spec.bc == BoundaryClass::ThreePointSingular {
        let stage = iteration::iterate(|g| spec.apply_map(g, 1.0), current, &cfg)
            .map_err(|e| stage_error(1.0, e))?;
        path.push(LambdaStage {
            lambda: 1.0,
            iterations: stage.iterations,
        });
        return finish(spec, stage, path, 1.0);
    }

    let mut lambda = 0.0;
    let mut last_ok: Option<f64> = None;
    let mut step = spec.lambda_step;
    loop {
        match iteration::iterate(|g| spec.apply_map(g, lambda), current.clone(), &cfg) {
            Ok(stage) if stage.converged => {
                path.push(LambdaStage {
                    lambda,
                    iterations: stage.iterations,
                });
                if lambda >= 1.0 {
                    return finish(spec, stage, path, 1.0);
                }
                current = stage.solution;
                last_ok = Some(lambda);
                lambda = next_lambda(lambda, step);
            }
            Ok(stage) => {
                path.push(LambdaStage {
                    lambda,
                    iterations: stage.iterations,
                });
                return finish(spec, stage, path, lambda);
            }
            Err(
                OperatorError::OmegaViolation { .. }
                | OperatorError::PreconditionBoundedDomain { .. },
            ) if last_ok.is_some() && 0.5 * step >= MIN_LAMBDA_STEP => {
                step *= 0.5;
                lambda = next_lambda(last_ok.expect("guarded"), step);
            }
            Err(e) => return Err(stage_error(lambda, e)),
        }
    }
}

/// `from + step`, snapped to 1 when rounding would leave a sliver stage.
fn next_lambda(from: f64, step: f64) -> f64 {
    let next = from + step;
    if next >= 1.0 - 1e-9 {
        1.0
    } else {
        next
    }
}

fn finish(
    spec: &ProblemSpec,
    stage: StageResult,
    lambda_path: Vec<LambdaStage>,
    lambda: f64,
) -> Result<SolveReport, SolveError> {
    let report = build_report(spec, stage.solution, lambda_path.clone(), stage.converged)
        .map_err(|e| stage_error(lambda, e))?;
    if report.converged {
        return Ok(report);
    }
    // Near roundoff, `M(u_k)` can miss the tolerance that `u_k` meets.
    if stage.converged {
        if let Ok(fallback) = build_report(spec, stage.iterate, lambda_path, true) {
            if fallback.converged {
                return Ok(fallback);
            }
        }
    }
    Err(SolveError::NonConvergence {
        lambda,
        best_residual: stage.residual,
        iterations: stage.iterations,
        report: Box::new(report),
    })
}

/// Evaluates every diagnostic of a candidate solution.
pub fn build_report(
    spec: &ProblemSpec,
    solution: GridFunction,
    lambda_path: Vec<LambdaStage>,
    stage_converged: bool,
) -> Result<SolveReport, OperatorError> {
    let fp_residual = match spec.apply_map(&solution, 1.0) {
        Ok(image) => image.c1_distance(&solution),
        Err(_) => f64::INFINITY,
    };
    let ode_residual = ode_residuals(spec, &solution)?
        .iter()
        .skip(1)
        .take(solution.u().len() - 2)
        .fold(0.0_f64, |m, r| m.max(r.abs()));
    let bc_residual = bc_residual(spec.bc, &solution);
    let omega_margin = match (spec.bc, spec.phi.kind()) {
        (BoundaryClass::DirichletBounded, Kind::Bounded { a }) => {
            Some(0.5 * a - sup_norm(&dirichlet_source(&spec.f, &solution, 1.0)?))
        }
        _ => None,
    };
    let scale = 1.0 + solution.norms().c1;
    let converged = stage_converged && fp_residual <= spec.tol_fp * scale && bc_residual <= 1e-8;
    Ok(SolveReport {
        consistency_defect: solution.consistency_defect(),
        solution,
        fp_residual,
        ode_residual,
        bc_residual,
        lambda_path,
        converged,
        omega_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(bc: BoundaryClass, phi: &str, f: &str, t: f64) -> ProblemSpec {
        ProblemSpec::new(bc, phi.parse().unwrap(), Expr::parse(f).unwrap(), t).unwrap()
    }

    #[test]
    fn regime_compatibility() {
        let r = ProblemSpec::new(
            BoundaryClass::DirichletBounded,
            Homeomorphism::identity(),
            Expr::parse("0").unwrap(),
            1.0,
        );
        assert!(matches!(r, Err(SolveError::InvalidSpec(_))));
        let r = ProblemSpec::new(
            BoundaryClass::ThreePointClassic,
            Homeomorphism::identity(),
            Expr::parse("0").unwrap(),
            -1.0,
        );
        assert!(matches!(r, Err(SolveError::InvalidSpec(_))));
    }

    #[test]
    fn zero_source_gives_zero_solution() {
        for (bc, phi) in [
            (BoundaryClass::DirichletBounded, "mean_curvature 1"),
            (BoundaryClass::ThreePointSingular, "relativistic 1"),
            (BoundaryClass::ThreePointClassic, "power 4"),
        ] {
            let r = solve(&spec(bc, phi, "0", 1.0)).unwrap();
            assert!(r.converged);
            assert!(r
                .solution
                .u()
                .iter()
                .chain(r.solution.du())
                .all(|&x| x == 0.0));
            assert!(r.fp_residual <= 1e-12 && r.ode_residual <= 1e-12 && r.bc_residual <= 1e-12);
        }
    }

    #[test]
    fn dirichlet_worked_example() {
        let r = solve(&spec(
            BoundaryClass::DirichletBounded,
            "mean_curvature 1",
            "u - 2",
            0.1,
        ))
        .unwrap();
        assert!(r.converged);
        assert!(r.bc_residual <= 1e-8);
        assert!(r.ode_residual <= 1e-4);
        assert!(sup_norm(r.solution.du()) <= 4.0 / 3.0 + 1e-6);
        let n = r.solution.u().len();
        assert!(r.solution.u()[1..n - 1].iter().all(|&u| u > 0.0));
        assert!(r.omega_margin.unwrap() > 0.0);
        assert!(r.solution.is_consistent());
        assert_eq!(r.lambda_path.len(), 11);
    }

    #[test]
    fn classic_worked_example() {
        let r = solve(&spec(
            BoundaryClass::ThreePointClassic,
            "power 4",
            "exp(v)/2 - 1",
            1.0,
        ))
        .unwrap();
        let ln2 = 2.0_f64.ln();
        let grid = r.solution.grid();
        let err = grid
            .nodes()
            .zip(r.solution.u())
            .fold(0.0_f64, |m, (t, u)| m.max((u - ln2 * t).abs()));
        assert!(err <= 1e-6, "sup error {err}");
        assert!(r.bc_residual <= 1e-8);
    }

    #[test]
    fn plain_picard_cannot_reach_classic_example() {
        let mut s = spec(
            BoundaryClass::ThreePointClassic,
            "power 4",
            "exp(v)/2 - 1",
            1.0,
        );
        s.anderson_depth = 0;
        s.max_iter = 2000;
        assert!(matches!(solve(&s), Err(SolveError::NonConvergence { .. })));
    }

    #[test]
    fn singular_example_respects_bounds() {
        let r = solve(&spec(
            BoundaryClass::ThreePointSingular,
            "relativistic 1",
            "t - 0.5*u",
            1.0,
        ))
        .unwrap();
        assert!(r.converged);
        assert!(sup_norm(r.solution.du()) < 1.0);
        assert!(r.solution.norms().c1 < 2.0 + 1.0);
        assert!(r.bc_residual <= 1e-10);
    }
}
