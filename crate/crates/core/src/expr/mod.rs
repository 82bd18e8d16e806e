//! Scalar expressions `f(t, u, v)` supplied by the user.
//!
//! Variables are `t`, `u` and `v` (the derivative slot). Evaluation is plain
//! IEEE double arithmetic; anything that leaves the real domain or overflows
//! is reported as an [`EvalDomain`] error instead of producing NaN or ∞.

mod lexer;
mod parser;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at position {position}: expected {expected}, found {found}")]
    Syntax {
        position: usize,
        expected: String,
        found: String,
    },
    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },
}

impl ParseError {
    /// Zero-based byte offset of the error in the source text.
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { position, .. }
            | ParseError::UnknownIdentifier { position, .. } => *position,
        }
    }
}

/// Evaluation left the domain of a function or produced a non-finite value.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("{op} is undefined at {value}")]
pub struct EvalDomain {
    pub op: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
    Tanh,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Tanh => "tanh",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    E,
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self, ParseError> {
        parser::parse(src)
    }

    pub fn eval(&self, t: f64, u: f64, v: f64) -> Result<f64, EvalDomain> {
        let x = self.eval_raw(t, u, v)?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(EvalDomain {
                op: "evaluation",
                value: x,
            })
        }
    }

    fn eval_raw(&self, t: f64, u: f64, v: f64) -> Result<f64, EvalDomain> {
        Ok(match self {
            Expr::Num(x) => *x,
            Expr::Pi => std::f64::consts::PI,
            Expr::E => std::f64::consts::E,
            Expr::Var(Var::T) => t,
            Expr::Var(Var::U) => u,
            Expr::Var(Var::V) => v,
            Expr::Neg(a) => -a.eval_raw(t, u, v)?,
            Expr::Binary(op, a, b) => {
                let x = a.eval_raw(t, u, v)?;
                let y = b.eval_raw(t, u, v)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(EvalDomain {
                                op: "division",
                                value: y,
                            });
                        }
                        x / y
                    }
                    BinOp::Pow => {
                        let r = x.powf(y);
                        if r.is_nan() {
                            return Err(EvalDomain { op: "^", value: x });
                        }
                        r
                    }
                }
            }
            Expr::Call(func, a) => {
                let x = a.eval_raw(t, u, v)?;
                match func {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(EvalDomain {
                                op: "log",
                                value: x,
                            });
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(EvalDomain {
                                op: "sqrt",
                                value: x,
                            });
                        }
                        x.sqrt()
                    }
                    Func::Abs => x.abs(),
                    Func::Tanh => x.tanh(),
                }
            }
        })
    }

    /// Whether the expression mentions the given variable.
    pub fn uses(&self, var: Var) -> bool {
        match self {
            Expr::Var(v) => *v == var,
            Expr::Num(_) | Expr::Pi | Expr::E => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.uses(var),
            Expr::Binary(_, a, b) => a.uses(var) || b.uses(var),
        }
    }
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

/// Canonical, fully parenthesised form; parsing it gives back the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Pi => f.write_str("pi"),
            Expr::E => f.write_str("e"),
            Expr::Var(Var::T) => f.write_str("t"),
            Expr::Var(Var::U) => f.write_str("u"),
            Expr::Var(Var::V) => f.write_str("v"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Binary(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {sym} {b})")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(src: &str, t: f64, u: f64, v: f64) -> f64 {
        Expr::parse(src).unwrap().eval(t, u, v).unwrap()
    }

    #[test]
    fn worked_example_kernels() {
        assert_eq!(ev("u - 2", 0.0, 3.0, 0.0), 1.0);
        assert_eq!(ev("u - 2", 0.0, 2.0, 0.0), 0.0);
        assert!(ev("exp(v)/2 - 1", 0.0, 0.0, 2.0_f64.ln()).abs() < 1e-15);
        assert_eq!(ev("0", 1.0, 2.0, 3.0), 0.0);
        assert!((ev("t^2 + sin(pi*t)", 1.0, 0.0, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("2+3*4", 0.0, 0.0, 0.0), 14.0);
        assert_eq!(ev("2^3^2", 0.0, 0.0, 0.0), 512.0);
        assert_eq!(ev("-2^2", 0.0, 0.0, 0.0), -4.0);
    }

    #[test]
    fn malformed_input_reports_position() {
        let err = Expr::parse("1 + * 2").unwrap_err();
        assert_eq!(err.position(), 4);
        assert!(matches!(err, ParseError::Syntax { .. }));
        let err = Expr::parse("u + w").unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownIdentifier {
                name: "w".into(),
                position: 4
            }
        );
        assert_eq!(Expr::parse("u -").unwrap_err().position(), 3);
        assert_eq!(Expr::parse("").unwrap_err().position(), 0);
    }

    #[test]
    fn domain_errors() {
        let e = Expr::parse("log(u)").unwrap();
        assert_eq!(e.eval(0.0, 0.0, 0.0).unwrap_err().op, "log");
        let e = Expr::parse("sqrt(u)").unwrap();
        assert_eq!(e.eval(0.0, -1.0, 0.0).unwrap_err().op, "sqrt");
        let e = Expr::parse("1/u").unwrap();
        assert_eq!(e.eval(0.0, 0.0, 0.0).unwrap_err().op, "division");
        let e = Expr::parse("exp(u)").unwrap();
        assert!(e.eval(0.0, 1000.0, 0.0).is_err());
        let e = Expr::parse("u^0.5").unwrap();
        assert!(e.eval(0.0, -4.0, 0.0).is_err());
    }

    #[test]
    fn canonical_printing() {
        let e = Expr::parse("-2^2 + exp(v)/2").unwrap();
        assert_eq!(e.to_string(), "((-(2.0 ^ 2.0)) + (exp(v) / 2.0))");
        assert!(Expr::parse("u").unwrap().uses(Var::U));
        assert!(!Expr::parse("u").unwrap().uses(Var::V));
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..100.0).prop_map(Expr::Num),
            (1e-9f64..1e-3).prop_map(Expr::Num),
            Just(Expr::Pi),
            Just(Expr::E),
            Just(Expr::Var(Var::T)),
            Just(Expr::Var(Var::U)),
            Just(Expr::Var(Var::V)),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (
                    prop_oneof![
                        Just(BinOp::Add),
                        Just(BinOp::Sub),
                        Just(BinOp::Mul),
                        Just(BinOp::Div),
                        Just(BinOp::Pow)
                    ],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, a, b)| Expr::Binary(
                        op,
                        Box::new(a),
                        Box::new(b)
                    )),
                (
                    prop_oneof![
                        Just(Func::Sin),
                        Just(Func::Exp),
                        Just(Func::Sqrt),
                        Just(Func::Tanh)
                    ],
                    inner
                )
                    .prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(e in arb_expr()) {
            let printed = e.to_string();
            let reparsed = Expr::parse(&printed).unwrap();
            prop_assert_eq!(&reparsed, &e);
            prop_assert_eq!(reparsed.to_string(), printed);
        }

        #[test]
        fn eval_is_deterministic(e in arb_expr(), t in -2.0f64..2.0, u in -2.0f64..2.0, v in -2.0f64..2.0) {
            let a = e.eval(t, u, v);
            let b = e.eval(t, u, v);
            match (a, b) {
                (Ok(x), Ok(y)) => prop_assert_eq!(x.to_bits(), y.to_bits()),
                (Err(x), Err(y)) => prop_assert_eq!(x.op, y.op),
                _ => prop_assert!(false),
            }
        }
    }
}
