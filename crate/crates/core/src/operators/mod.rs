//! Operators on sampled C¹ functions: the Nemytskii substitution, the
//! nonlinear mean-zero shift `Q_φ`, and the fixed-point maps of the three
//! boundary value problems.

mod maps;
mod qphi;

pub use maps::{dirichlet_m, dirichlet_source, threepoint_classic_m1, threepoint_singular_m};
pub use qphi::{q_phi, QphiResult};

use thiserror::Error;

use crate::expr::{EvalDomain, Expr};
use crate::function_space::GridFunction;
use crate::homeomorphism::{DomainViolation, Kind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("f could not be evaluated at node {index} (t = {t}): {source}")]
    Eval {
        index: usize,
        t: f64,
        #[source]
        source: EvalDomain,
    },
    #[error("Q_phi needs ‖h‖∞ < a/2 for a bounded φ, got ‖h‖∞ = {sup} >= a/2 = {half_a}")]
    PreconditionBoundedDomain { sup: f64, half_a: f64 },
    #[error("Q_phi found no sign change on [{lo}, {hi}] (G = {g_lo}, {g_hi})")]
    NoSignChange {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },
    #[error("iterate left the operator domain: ‖λH(N_f u)‖∞ = {sup} >= a/2 = {half_a}")]
    OmegaViolation { sup: f64, half_a: f64 },
    #[error(transparent)]
    Domain(#[from] DomainViolation),
    #[error("operator needs a {expected} homeomorphism, got {got:?}")]
    WrongRegime { expected: &'static str, got: Kind },
}

/// `N_f(u)(t_i) = f(t_i, u(t_i), u'(t_i))`.
pub fn nemytskii(f: &Expr, gf: &GridFunction) -> Result<Vec<f64>, OperatorError> {
    let grid = gf.grid();
    gf.u()
        .iter()
        .zip(gf.du())
        .enumerate()
        .map(|(index, (&u, &du))| {
            let t = grid.node(index);
            f.eval(t, u, du)
                .map_err(|source| OperatorError::Eval { index, t, source })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::Grid;

    #[test]
    fn nemytskii_examples() {
        let g = Grid::new(1.0, 11).unwrap();
        let zero = GridFunction::zero(g);
        let f = Expr::parse("0").unwrap();
        assert!(nemytskii(&f, &zero).unwrap().iter().all(|&x| x == 0.0));

        let f = Expr::parse("u - 2").unwrap();
        assert!(nemytskii(&f, &zero).unwrap().iter().all(|&x| x == -2.0));

        let gf = GridFunction::from_fns(g, |t| 0.5 * t * t, |t| t).unwrap();
        let f = Expr::parse("v").unwrap();
        let n = nemytskii(&f, &gf).unwrap();
        for (i, t) in g.nodes().enumerate() {
            assert_eq!(n[i], t);
        }
    }

    #[test]
    fn nemytskii_reports_node() {
        let g = Grid::new(1.0, 5).unwrap();
        let gf = GridFunction::from_fns(g, |t| t - 0.5, |_| 1.0).unwrap();
        let f = Expr::parse("log(u)").unwrap();
        match nemytskii(&f, &gf) {
            Err(OperatorError::Eval { index, .. }) => assert_eq!(index, 0),
            other => panic!("{other:?}"),
        }
    }
}
