//! Line-oriented `key = value` problem files.
//!
//! ```text
//! # Dirichlet problem with the mean curvature operator
//! problem = dirichlet
//! phi     = mean_curvature 1
//! T       = 0.1
//! f       = "u - 2"
//! ```
//!
//! `#` starts a comment outside double quotes. Values may be quoted; unknown
//! and repeated keys are rejected.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::expr::{Expr, ParseError};
use crate::homeomorphism::Homeomorphism;
use crate::solver::BoundaryClass;

pub const KEYS: [&str; 14] = [
    "problem",
    "phi",
    "T",
    "f",
    "grid_n",
    "h",
    "n",
    "dn",
    "c",
    "m1",
    "m2",
    "rho",
    "lambda_step",
    "tol",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemFileError {
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unterminated quoted value for `{key}`")]
    Unterminated { line: usize, key: String },
    #[error("line {line}: unknown key `{key}` (known keys: {})", KEYS.join(", "))]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` repeats the one on line {first}")]
    DuplicateKey {
        line: usize,
        key: String,
        first: usize,
    },
    #[error("line {line}: invalid value for `{key}`: {message}")]
    BadValue {
        line: usize,
        key: String,
        message: String,
    },
    #[error("line {line}, column {column}: invalid expression for `{key}`: {source}")]
    Expression {
        line: usize,
        column: usize,
        key: String,
        #[source]
        source: ParseError,
    },
    #[error("missing required key `{key}` for the {command} command")]
    MissingKey {
        key: &'static str,
        command: &'static str,
    },
}

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    /// 1-based column where the value text starts.
    column: usize,
    value: String,
}

/// A parsed and type-checked problem file.
#[derive(Debug, Clone, Default)]
pub struct ProblemFile {
    pub problem: Option<BoundaryClass>,
    pub phi: Option<Homeomorphism>,
    pub length: Option<f64>,
    pub f: Option<Expr>,
    pub grid_n: Option<usize>,
    pub h: Option<Expr>,
    pub n: Option<Expr>,
    pub dn: Option<Expr>,
    pub c: Option<Expr>,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub rho: Option<f64>,
    pub lambda_step: Option<f64>,
    pub tol: Option<f64>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, ProblemFileError> {
        let entries = scan(text)?;
        let get = |key: &str| entries.get(key);
        Ok(Self {
            problem: typed(get("problem"), "problem", |s| s.parse::<BoundaryClass>())?,
            phi: typed(get("phi"), "phi", |s| {
                s.parse::<Homeomorphism>().map_err(|e| e.to_string())
            })?,
            length: typed(get("T"), "T", positive)?,
            f: expression(get("f"), "f")?,
            grid_n: typed(get("grid_n"), "grid_n", |s| {
                s.parse::<usize>()
                    .map_err(|_| format!("`{s}` is not a node count"))
            })?,
            h: expression(get("h"), "h")?,
            n: expression(get("n"), "n")?,
            dn: expression(get("dn"), "dn")?,
            c: expression(get("c"), "c")?,
            m1: typed(get("m1"), "m1", finite)?,
            m2: typed(get("m2"), "m2", finite)?,
            rho: typed(get("rho"), "rho", positive)?,
            lambda_step: typed(get("lambda_step"), "lambda_step", positive)?,
            tol: typed(get("tol"), "tol", positive)?,
        })
    }
}

/// Fetches an optional value, failing with `MissingKey` when absent.
pub fn require<'a, T>(
    value: &'a Option<T>,
    key: &'static str,
    command: &'static str,
) -> Result<&'a T, ProblemFileError> {
    value
        .as_ref()
        .ok_or(ProblemFileError::MissingKey { key, command })
}

fn finite(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("`{s}` is not a finite number")),
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let x = finite(s)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(format!("must be positive, got {x}"))
    }
}

fn typed<T, E: ToString>(
    entry: Option<&Entry>,
    key: &str,
    parse: impl Fn(&str) -> Result<T, E>,
) -> Result<Option<T>, ProblemFileError> {
    entry
        .map(|e| {
            parse(&e.value).map_err(|err| ProblemFileError::BadValue {
                line: e.line,
                key: key.to_string(),
                message: err.to_string(),
            })
        })
        .transpose()
}

fn expression(entry: Option<&Entry>, key: &str) -> Result<Option<Expr>, ProblemFileError> {
    entry
        .map(|e| {
            Expr::parse(&e.value).map_err(|source| ProblemFileError::Expression {
                line: e.line,
                column: e.column + source.position(),
                key: key.to_string(),
                source,
            })
        })
        .transpose()
}

fn scan(text: &str) -> Result<BTreeMap<String, Entry>, ProblemFileError> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = strip_comment(raw);
        if content.trim().is_empty() {
            continue;
        }
        let Some(eq) = content.find('=') else {
            return Err(ProblemFileError::Syntax {
                line,
                text: content.trim().to_string(),
            });
        };
        let key = content[..eq].trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(ProblemFileError::Syntax {
                line,
                text: content.trim().to_string(),
            });
        }
        if !KEYS.contains(&key) {
            return Err(ProblemFileError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        if let Some(first) = entries.get(key) {
            return Err(ProblemFileError::DuplicateKey {
                line,
                key: key.to_string(),
                first: first.line,
            });
        }

        let rest = &content[eq + 1..];
        let lead = rest.len() - rest.trim_start().len();
        let trimmed = rest.trim();
        let mut start = eq + 1 + lead;
        let value = if let Some(inner) = trimmed.strip_prefix('"') {
            start += 1;
            inner
                .strip_suffix('"')
                .filter(|v| !v.contains('"'))
                .ok_or_else(|| ProblemFileError::Unterminated {
                    line,
                    key: key.to_string(),
                })?
        } else {
            trimmed
        };
        let column = raw[..start].chars().count() + 1;
        entries.insert(
            key.to_string(),
            Entry {
                line,
                column,
                value: value.to_string(),
            },
        );
    }
    Ok(entries)
}

/// Drops everything from the first `#` that is not inside double quotes.
fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

#[cfg(test)]
mod tests {
    use super::*;

    const WORKED: &str = "# worked example\nproblem = dirichlet\nphi = mean_curvature 1   # bounded\nT = 0.1\nf = \"u - 2\"\n\nh = 4\nn = u\ndn = 1\n";

    #[test]
    fn parses_worked_example() {
        let p = ProblemFile::parse(WORKED).unwrap();
        assert_eq!(p.problem, Some(BoundaryClass::DirichletBounded));
        assert_eq!(p.phi.unwrap().to_string(), "mean_curvature 1");
        assert_eq!(p.length, Some(0.1));
        assert_eq!(p.f.unwrap().eval(0.0, 3.0, 0.0).unwrap(), 1.0);
        assert!(p.grid_n.is_none() && p.rho.is_none());
    }

    #[test]
    fn expression_errors_cite_line_and_column() {
        let err = ProblemFile::parse("T = 1\nf = \"u -\"\n").unwrap_err();
        match &err {
            ProblemFileError::Expression {
                line, column, key, ..
            } => {
                assert_eq!((*line, *column, key.as_str()), (2, 9, "f"));
            }
            e => panic!("{e:?}"),
        }
        assert!(err.to_string().contains("line 2, column 9"));
        let err = ProblemFile::parse("f = u + bogus").unwrap_err();
        assert!(
            matches!(err, ProblemFileError::Expression { column: 9, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn rejects_bad_files() {
        let cases = [
            ("speed = 3", "unknown key"),
            ("T = 1\nT = 2", "repeats"),
            ("T = -1", "positive"),
            ("T = abc", "finite"),
            ("phi = cubic 3", "unknown homeomorphism"),
            ("problem = periodic", "unknown problem"),
            ("grid_n = 10.5", "node count"),
            ("just words", "expected `key = value`"),
            ("f = \"u + 1", "unterminated"),
            ("m1 = inf", "finite"),
        ];
        for (text, needle) in cases {
            let err = ProblemFile::parse(text).unwrap_err().to_string();
            assert!(err.contains(needle), "{text}: {err}");
            assert!(
                err.starts_with("line 1") || err.starts_with("line 2"),
                "{err}"
            );
        }
    }

    #[test]
    fn hash_inside_quotes_is_kept_out_of_comments() {
        assert_eq!(strip_comment("f = \"u\" # note"), "f = \"u\" ");
        assert_eq!(strip_comment("f = \"#\""), "f = \"#\"");
    }

    #[test]
    fn missing_keys() {
        let p = ProblemFile::parse("T = 1").unwrap();
        let err = require(&p.f, "f", "solve").unwrap_err();
        assert_eq!(
            err.to_string(),
            "missing required key `f` for the solve command"
        );
    }
}
