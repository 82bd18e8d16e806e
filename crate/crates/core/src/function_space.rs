//! Sampled C¹ functions on a uniform grid over `[0, T]`.
//!
//! Every integral operator in the crate is built on the composite trapezoid
//! rule implemented here, so the discrete identities between the cumulative
//! integrals, the mean and the endpoint evaluations hold exactly (up to
//! rounding) rather than only to quadrature order.

use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

/// Default number of grid nodes.
pub const DEFAULT_NODES: usize = 1001;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("interval length must be positive and finite, got {0}")]
    BadLength(f64),
    #[error("a grid needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("sample count {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite sample at node {index}")]
    NonFinite { index: usize },
}

/// Uniform grid `t_i = i·T/(n−1)`, `i = 0..n−1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    length: f64,
    nodes: usize,
}

impl Grid {
    pub fn new(length: f64, nodes: usize) -> Result<Self, GridError> {
        if !(length.is_finite() && length > 0.0) {
            return Err(GridError::BadLength(length));
        }
        if nodes < 2 {
            return Err(GridError::TooFewNodes(nodes));
        }
        Ok(Self { length, nodes })
    }

    /// Interval length `T`.
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.nodes
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.length / (self.nodes - 1) as f64
    }

    /// Node `t_i`; the last node is exactly `T`.
    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.nodes {
            self.length
        } else {
            i as f64 * self.length / (self.nodes - 1) as f64
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nodes).map(move |i| self.node(i))
    }

    /// Samples a closure at every node.
    pub fn sample<F: FnMut(f64) -> f64>(&self, mut f: F) -> Vec<f64> {
        self.nodes().map(&mut f).collect()
    }

    /// The grid obtained by inserting a midpoint in every cell (`n → 2n − 1`).
    pub fn refined(&self) -> Self {
        Self {
            length: self.length,
            nodes: 2 * self.nodes - 1,
        }
    }

    /// Cumulative trapezoid integral `w(t_i) = ∫₀^{t_i} v`, with `w(t_0) = 0`.
    ///
    /// Partial sums are compensated, so constant and affine integrands are
    /// reproduced to within a few ulps however long the grid is.
    pub fn integrate_from_start(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.nodes);
        let half = 0.5 * self.step();
        let mut out = Vec::with_capacity(v.len());
        let mut sum = NeumaierSum::default();
        out.push(0.0);
        for pair in v.windows(2) {
            sum.add(half * (pair[0] + pair[1]));
            out.push(sum.value());
        }
        out
    }

    /// `w(t_i) = −∫_{t_i}^T v`, computed as `H(v)(t_i) − H(v)(T)` so that the
    /// two cumulative integrals differ by an exact constant.
    pub fn integrate_to_end(&self, v: &[f64]) -> Vec<f64> {
        let mut w = self.integrate_from_start(v);
        let total = *w.last().expect("grid has at least two nodes");
        for x in &mut w {
            *x -= total;
        }
        w
    }

    /// Trapezoid integral over the whole interval.
    pub fn integral(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.nodes);
        let half = 0.5 * self.step();
        let mut sum = NeumaierSum::default();
        for pair in v.windows(2) {
            sum.add(half * (pair[0] + pair[1]));
        }
        sum.value()
    }

    /// `(1/T)∫₀ᵀ v` with the same trapezoid rule.
    pub fn mean(&self, v: &[f64]) -> f64 {
        self.integral(v) / self.length
    }

    /// `‖v‖_{L¹}`: trapezoid of the node-wise absolute value.
    pub fn l1_norm(&self, v: &[f64]) -> f64 {
        let abs: Vec<f64> = v.iter().map(|x| x.abs()).collect();
        self.integral(&abs)
    }
}

/// Compensated summation (Neumaier's variant of Kahan).
#[derive(Debug, Default, Clone, Copy)]
struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `S(v) = v(T)`.
pub fn endpoint_t(v: &[f64]) -> f64 {
    *v.last().expect("nonempty samples")
}

/// `P(v) = v(0)`.
pub fn endpoint_0(v: &[f64]) -> f64 {
    v[0]
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// `(min v, max v)` over the nodes.
pub fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

/// Node-wise `(v⁺, v⁻)` with `v = v⁺ − v⁻` and both parts non-negative.
pub fn pos_neg_parts(v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let pos = v.iter().map(|&x| x.max(0.0)).collect();
    let neg = v.iter().map(|&x| (-x).max(0.0)).collect();
    (pos, neg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub sup: f64,
    pub l1: f64,
    /// `‖u‖₁ = ‖u‖∞ + ‖u'‖∞`.
    pub c1: f64,
}

/// A C¹ function stored as node samples of `u` and of its derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    u: Vec<f64>,
    du: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, u: Vec<f64>, du: Vec<f64>) -> Result<Self, GridError> {
        for v in [&u, &du] {
            if v.len() != grid.len() {
                return Err(GridError::LengthMismatch {
                    expected: grid.len(),
                    got: v.len(),
                });
            }
            if let Some(index) = v.iter().position(|x| !x.is_finite()) {
                return Err(GridError::NonFinite { index });
            }
        }
        Ok(Self { grid, u, du })
    }

    pub fn zero(grid: Grid) -> Self {
        Self {
            grid,
            u: vec![0.0; grid.len()],
            du: vec![0.0; grid.len()],
        }
    }

    /// Samples `u` and `u'` from closed forms.
    pub fn from_fns<U, D>(grid: Grid, u: U, du: D) -> Result<Self, GridError>
    where
        U: FnMut(f64) -> f64,
        D: FnMut(f64) -> f64,
    {
        let us = grid.sample(u);
        let dus = grid.sample(du);
        Self::new(grid, us, dus)
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, u: Vec<f64>, du: Vec<f64>) -> Self {
        debug_assert_eq!(u.len(), grid.len());
        debug_assert_eq!(du.len(), grid.len());
        Self { grid, u, du }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn du(&self) -> &[f64] {
        &self.du
    }

    pub fn into_parts(self) -> (Grid, Vec<f64>, Vec<f64>) {
        (self.grid, self.u, self.du)
    }

    pub fn norms(&self) -> Norms {
        let sup = sup_norm(&self.u);
        Norms {
            sup,
            l1: self.grid.l1_norm(&self.u),
            c1: sup + sup_norm(&self.du),
        }
    }

    /// `‖self − other‖₁` on a shared grid.
    pub fn c1_distance(&self, other: &GridFunction) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        let du = self
            .u
            .iter()
            .zip(&other.u)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let ddu = self
            .du
            .iter()
            .zip(&other.du)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        du + ddu
    }

    /// `max_i |u(t_i) − u(0) − ∫₀^{t_i} du|`.
    pub fn consistency_defect(&self) -> f64 {
        let integral = self.grid.integrate_from_start(&self.du);
        let u0 = self.u[0];
        self.u
            .iter()
            .zip(&integral)
            .fold(0.0_f64, |m, (u, w)| m.max((u - u0 - w).abs()))
    }

    /// Tolerance used for [`consistency_defect`](Self::consistency_defect):
    /// `10⁻⁶·(1 + ‖du‖∞)`.
    pub fn consistency_tolerance(&self) -> f64 {
        1e-6 * (1.0 + sup_norm(&self.du))
    }

    pub fn is_consistent(&self) -> bool {
        self.consistency_defect() <= self.consistency_tolerance()
    }

    /// Writes `t,u,du` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,u,du")?;
        for (i, t) in self.grid.nodes().enumerate() {
            writeln!(
                out,
                "{},{},{}",
                Sci17(t),
                Sci17(self.u[i]),
                Sci17(self.du[i])
            )?;
        }
        Ok(())
    }
}

/// Scientific notation with 17 significant digits; lossless for `f64`.
#[derive(Debug, Clone, Copy)]
pub struct Sci17(pub f64);

impl fmt::Display for Sci17 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.16e}", self.0)
    }
}

/// Shortest round-trip decimal, switching to exponent form for very small
/// or very large magnitudes.
#[derive(Debug, Clone, Copy)]
pub struct Short(pub f64);

impl fmt::Display for Short {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.0.abs();
        if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
            write!(f, "{:e}", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}
