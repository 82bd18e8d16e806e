//! Fixed-point solvers and existence certificates for one-dimensional
//! φ-Laplacian boundary value problems `(φ(u'))' = f(t, u, u')`.

pub mod certificates;
pub mod cli;
pub mod expr;
pub mod function_space;
pub mod homeomorphism;
pub mod operators;
pub mod solver;
