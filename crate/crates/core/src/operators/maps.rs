use crate::expr::Expr;
use crate::function_space::{endpoint_t, sup_norm, Grid, GridFunction};
use crate::homeomorphism::{Homeomorphism, Kind};

use super::{nemytskii, q_phi, OperatorError};

/// `λ·H(N_f(u))`, the argument whose sup-norm decides membership in the
/// Dirichlet operator's domain.
pub fn dirichlet_source(
    f: &Expr,
    gf: &GridFunction,
    lambda: f64,
) -> Result<Vec<f64>, OperatorError> {
    let grid = gf.grid();
    if lambda == 0.0 {
        return Ok(vec![0.0; grid.len()]);
    }
    let n = nemytskii(f, gf)?;
    let mut h = grid.integrate_from_start(&n);
    for x in &mut h {
        *x *= lambda;
    }
    Ok(h)
}

/// `M(λ, u) = H(φ⁻¹[λH(N_f u) − Q_φ(λH(N_f u))])` for a bounded `φ`.
///
/// The output vanishes at both endpoints exactly: the trapezoid closure
/// defect `H(·)(T)` (at most the `Q_φ` tolerance) is removed linearly.
pub fn dirichlet_m(
    phi: &Homeomorphism,
    f: &Expr,
    gf: &GridFunction,
    lambda: f64,
) -> Result<GridFunction, OperatorError> {
    let a = match phi.kind() {
        Kind::Bounded { a } => a,
        got => {
            return Err(OperatorError::WrongRegime {
                expected: "bounded",
                got,
            })
        }
    };
    let grid = *gf.grid();
    let h = dirichlet_source(f, gf, lambda)?;
    let sup = sup_norm(&h);
    let half_a = 0.5 * a;
    if !(sup < half_a) {
        return Err(OperatorError::OmegaViolation { sup, half_a });
    }
    let s = q_phi(phi, &grid, &h)?.s;
    let du = h
        .iter()
        .map(|&x| phi.apply_inverse(x - s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| OperatorError::OmegaViolation { sup, half_a })?;
    let u = close_linearly(&grid, grid.integrate_from_start(&du), 0.0);
    Ok(GridFunction::from_parts_unchecked(grid, u, du))
}

/// `M(u) = φ⁻¹(−Q_φ(K N_f u)) + H(φ⁻¹[K N_f u − Q_φ(K N_f u)])` for a singular `φ`.
pub fn threepoint_singular_m(
    phi: &Homeomorphism,
    f: &Expr,
    gf: &GridFunction,
) -> Result<GridFunction, OperatorError> {
    if !matches!(phi.kind(), Kind::Singular { .. }) {
        return Err(OperatorError::WrongRegime {
            expected: "singular",
            got: phi.kind(),
        });
    }
    let grid = *gf.grid();
    let n = nemytskii(f, gf)?;
    let k = grid.integrate_to_end(&n);
    let s = q_phi(phi, &grid, &k)?.s;
    let du = k
        .iter()
        .map(|&x| phi.apply_inverse(x - s))
        .collect::<Result<Vec<_>, _>>()?;
    let start = phi.apply_inverse(-s)?;
    let u = close_linearly(&grid, grid.integrate_from_start(&du), start);
    Ok(GridFunction::from_parts_unchecked(grid, u, du))
}

/// `M(λ, u) = S(u) + Q(N_f u) + K(φ⁻¹[λH(N_f u − Q(N_f u)) + φ(S(u))])` for a
/// classic `φ`; `λ = 1` is the map whose fixed points solve
/// `u(T) = u'(0) = u'(T)`.
pub fn threepoint_classic_m1(
    phi: &Homeomorphism,
    f: &Expr,
    gf: &GridFunction,
    lambda: f64,
) -> Result<GridFunction, OperatorError> {
    if phi.kind() != Kind::Classic {
        return Err(OperatorError::WrongRegime {
            expected: "classic",
            got: phi.kind(),
        });
    }
    let grid = *gf.grid();
    let n = nemytskii(f, gf)?;
    let q = grid.mean(&n);
    let centred: Vec<f64> = n.iter().map(|x| x - q).collect();
    let end = endpoint_t(gf.u());
    let shift = phi.apply(end)?;
    let du = grid
        .integrate_from_start(&centred)
        .into_iter()
        .map(|x| phi.apply_inverse(lambda * x + shift))
        .collect::<Result<Vec<_>, _>>()?;
    let base = end + q;
    let u = grid
        .integrate_to_end(&du)
        .into_iter()
        .map(|k| base + k)
        .collect();
    Ok(GridFunction::from_parts_unchecked(grid, u, du))
}

/// `start + w(t) − (t/T)·w(T)`; the last node equals `start` exactly.
fn close_linearly(grid: &Grid, mut w: Vec<f64>, start: f64) -> Vec<f64> {
    let end = *w.last().expect("grid has nodes");
    let length = grid.length();
    for (i, x) in w.iter_mut().enumerate() {
        *x = start + (*x - grid.node(i) / length * end);
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mc1() -> Homeomorphism {
        Homeomorphism::mean_curvature(1.0).unwrap()
    }

    #[test]
    fn dirichlet_trivial_cases() {
        let g = Grid::new(0.1, 101).unwrap();
        let gf = GridFunction::from_fns(g, |t| t.sin(), |t| t.cos()).unwrap();
        let f = Expr::parse("u - 2").unwrap();
        let w = dirichlet_m(&mc1(), &f, &gf, 0.0).unwrap();
        assert!(w.u().iter().chain(w.du()).all(|&x| x == 0.0));

        let zero_f = Expr::parse("0").unwrap();
        let w = dirichlet_m(&mc1(), &zero_f, &gf, 0.7).unwrap();
        assert!(w.u().iter().chain(w.du()).all(|&x| x == 0.0));
    }

    #[test]
    fn dirichlet_first_step_of_worked_example() {
        let g = Grid::new(0.1, 1001).unwrap();
        let f = Expr::parse("u - 2").unwrap();
        let w = dirichlet_m(&mc1(), &f, &GridFunction::zero(g), 1.0).unwrap();
        assert_eq!(w.u()[0], 0.0);
        assert_eq!(w.u()[1000], 0.0);
        assert!(sup_norm(w.du()) <= 4.0 / 3.0);
        // N_f = −2 so the slope decreases: concave, positive in the interior.
        assert!(w.u()[500] > 0.0);
        assert!(w.is_consistent());
    }

    #[test]
    fn dirichlet_omega_violation() {
        let g = Grid::new(1.0, 101).unwrap();
        let f = Expr::parse("u - 2").unwrap();
        match dirichlet_m(&mc1(), &f, &GridFunction::zero(g), 1.0) {
            Err(OperatorError::OmegaViolation { sup, half_a }) => {
                assert!((sup - 2.0).abs() < 1e-12);
                assert_eq!(half_a, 0.5);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_regime_is_rejected() {
        let g = Grid::new(1.0, 11).unwrap();
        let f = Expr::parse("0").unwrap();
        let zero = GridFunction::zero(g);
        let id = Homeomorphism::identity();
        assert!(matches!(
            dirichlet_m(&id, &f, &zero, 1.0),
            Err(OperatorError::WrongRegime { .. })
        ));
        assert!(matches!(
            threepoint_singular_m(&id, &f, &zero),
            Err(OperatorError::WrongRegime { .. })
        ));
        assert!(matches!(
            threepoint_classic_m1(&mc1(), &f, &zero, 1.0),
            Err(OperatorError::WrongRegime { .. })
        ));
    }

    #[test]
    fn singular_zero_source() {
        let g = Grid::new(1.0, 101).unwrap();
        let phi = Homeomorphism::relativistic(1.0).unwrap();
        let gf = GridFunction::from_fns(g, |t| t, |_| 1.0).unwrap();
        let w = threepoint_singular_m(&phi, &Expr::parse("0").unwrap(), &gf).unwrap();
        assert!(w.u().iter().chain(w.du()).all(|&x| x == 0.0));
    }

    #[test]
    fn singular_constant_source_chain() {
        // f = 1, T = 1: K(N_f) = t − 1; by oddness Q_φ(t − 1) = −1/2, so
        // w' = φ⁻¹(t − 1/2) and w(0) = φ⁻¹(1/2).
        let g = Grid::new(1.0, 2001).unwrap();
        let phi = Homeomorphism::relativistic(1.0).unwrap();
        let w = threepoint_singular_m(&phi, &Expr::parse("1").unwrap(), &GridFunction::zero(g))
            .unwrap();
        let inv = |x: f64| x / (1.0 + x * x).sqrt();
        assert!((w.u()[0] - inv(0.5)).abs() < 1e-10);
        assert_eq!(w.u()[0], w.u()[2000]);
        assert_eq!(w.du()[2000], w.u()[0]);
        for (i, t) in g.nodes().enumerate() {
            assert!((w.du()[i] - inv(t - 0.5)).abs() < 1e-10);
        }
    }

    #[test]
    fn classic_zero_and_exact_fixed_point() {
        let g = Grid::new(1.0, 1001).unwrap();
        let cube = Homeomorphism::power(4.0).unwrap();
        let w = threepoint_classic_m1(
            &cube,
            &Expr::parse("0").unwrap(),
            &GridFunction::zero(g),
            1.0,
        )
        .unwrap();
        assert!(w.u().iter().chain(w.du()).all(|&x| x == 0.0));

        let ln2 = 2.0_f64.ln();
        let gf = GridFunction::from_fns(g, |t| ln2 * t, |_| ln2).unwrap();
        let f = Expr::parse("exp(v)/2 - 1").unwrap();
        let w = threepoint_classic_m1(&cube, &f, &gf, 1.0).unwrap();
        assert!(w.c1_distance(&gf) <= 1e-10);
    }
}
