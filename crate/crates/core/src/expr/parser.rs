//! Pratt parser with single-token lookahead.
//!
//! Binding powers, loosest first: `+ -`, then `* /`, then unary `-`, then a
//! right-associative `^`. So `-2^2` is `-(2^2)` and `2^3^2` is `2^(3^2)`.

use super::lexer::{tokenize, Spanned, Tok};
use super::{BinOp, Expr, Func, ParseError, Var};

const PREFIX_BP: u8 = 30;

fn infix_binding(tok: &Tok) -> Option<(u8, u8, BinOp)> {
    Some(match tok {
        Tok::Plus => (10, 11, BinOp::Add),
        Tok::Minus => (10, 11, BinOp::Sub),
        Tok::Star => (20, 21, BinOp::Mul),
        Tok::Slash => (20, 21, BinOp::Div),
        Tok::Caret => (41, 40, BinOp::Pow),
        _ => return None,
    })
}

pub(super) fn parse(src: &str) -> Result<Expr, ParseError> {
    if src.trim().is_empty() {
        return Err(ParseError::Syntax {
            position: 0,
            expected: "an expression".into(),
            found: "end of input".into(),
        });
    }
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, at: 0 };
    let expr = p.expr(0)?;
    match p.peek() {
        Tok::End => Ok(expr),
        _ => Err(p.unexpected("an operator or end of input")),
    }
}

struct Parser {
    tokens: Vec<Spanned>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn pos(&self) -> usize {
        self.tokens[self.at].pos
    }

    fn bump(&mut self) -> Spanned {
        let s = self.tokens[self.at].clone();
        if !matches!(s.tok, Tok::End) {
            self.at += 1;
        }
        s
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError::Syntax {
            position: self.pos(),
            expected: expected.to_string(),
            found: self.peek().describe(),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if matches!(self.peek(), Tok::RParen) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected("`)`"))
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.prefix()?;
        while let Some((l_bp, r_bp, op)) = infix_binding(self.peek()) {
            if l_bp < min_bp {
                break;
            }
            self.bump();
            let rhs = self.expr(r_bp)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, ParseError> {
        let Spanned { tok, pos } = self.bump();
        match tok {
            Tok::Num(x) => Ok(Expr::Num(x)),
            Tok::Minus => Ok(Expr::Neg(Box::new(self.expr(PREFIX_BP)?))),
            Tok::Plus => self.expr(PREFIX_BP),
            Tok::LParen => {
                let inner = self.expr(0)?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => self.identifier(name, pos),
            other => Err(ParseError::Syntax {
                position: pos,
                expected: "an operand".into(),
                found: other.describe(),
            }),
        }
    }

    fn identifier(&mut self, name: String, pos: usize) -> Result<Expr, ParseError> {
        if let Some(func) = Func::from_name(&name) {
            if !matches!(self.peek(), Tok::LParen) {
                return Err(self.unexpected(&format!("`(` after `{name}`")));
            }
            self.bump();
            let arg = self.expr(0)?;
            self.expect_rparen()?;
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        match name.as_str() {
            "t" => Ok(Expr::Var(Var::T)),
            "u" => Ok(Expr::Var(Var::U)),
            "v" => Ok(Expr::Var(Var::V)),
            "pi" => Ok(Expr::Pi),
            "e" => Ok(Expr::E),
            _ => Err(ParseError::UnknownIdentifier {
                name,
                position: pos,
            }),
        }
    }
}
