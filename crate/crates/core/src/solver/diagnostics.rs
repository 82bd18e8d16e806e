use crate::function_space::{endpoint_0, endpoint_t, GridFunction};
use crate::operators::{nemytskii, OperatorError};

use super::{BoundaryClass, ProblemSpec};

/// `φ(u'(t_i))` at every node.
pub fn phi_of_derivative(spec: &ProblemSpec, gf: &GridFunction) -> Result<Vec<f64>, OperatorError> {
    gf.du()
        .iter()
        .map(|&p| spec.phi.apply(p).map_err(OperatorError::from))
        .collect()
}

/// Node-wise `Δφ(u')/Δt − f(t, u, u')`: centred differences inside, one-sided
/// first-order differences at the two endpoints.
pub fn ode_residuals(spec: &ProblemSpec, gf: &GridFunction) -> Result<Vec<f64>, OperatorError> {
    let flux = phi_of_derivative(spec, gf)?;
    let source = nemytskii(&spec.f, gf)?;
    let h = gf.grid().step();
    let n = flux.len();
    Ok((0..n)
        .map(|i| {
            let slope = if i == 0 {
                (flux[1] - flux[0]) / h
            } else if i + 1 == n {
                (flux[n - 1] - flux[n - 2]) / h
            } else {
                (flux[i + 1] - flux[i - 1]) / (2.0 * h)
            };
            slope - source[i]
        })
        .collect())
}

/// Largest violation of the class's boundary conditions.
pub fn bc_residual(bc: BoundaryClass, gf: &GridFunction) -> f64 {
    let (u0, ut) = (endpoint_0(gf.u()), endpoint_t(gf.u()));
    let (p0, pt) = (endpoint_0(gf.du()), endpoint_t(gf.du()));
    match bc {
        BoundaryClass::DirichletBounded => u0.abs().max(ut.abs()),
        BoundaryClass::ThreePointSingular => (ut - u0).abs().max((pt - u0).abs()),
        BoundaryClass::ThreePointClassic => (ut - p0).abs().max((pt - p0).abs()),
    }
}
