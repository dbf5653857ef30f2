//! DIMACS-XOR text format.
//!
//! The header `p cnf <n> <m>` counts CNF and XOR lines together. CNF
//! clauses are the usual signed-literal lines terminated by `0`. XOR
//! clauses are lines starting with `x`: the XOR of the listed literals must
//! evaluate to true, so an even number of negations means parity 1 and an
//! odd number means parity 0. The canonical writer negates only the first
//! listed variable (`x-2 0` is x2 = 0) and emits `x 0` for the empty
//! unsatisfiable clause. The empty tautological clause, which has no
//! literal to carry a sign, is written as the cancelling pair `x-1 1 0`;
//! the parser folds repeated variables pairwise, recovering `(∅, 0)`.
//!
//! When a formula has no CNF clauses its width is recorded in a `c k <k>`
//! comment so that parsing a written file reproduces the formula exactly.

use crate::formula::{Formula, KClause, Literal, XorClause};
use std::fmt::Write as _;
use std::io::{self, BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DimacsError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("formula is not representable: {0}")]
    Unrepresentable(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn parse_err<T>(line: usize, reason: impl Into<String>) -> Result<T, DimacsError> {
    Err(DimacsError::Parse {
        line,
        reason: reason.into(),
    })
}

/// Renders a formula in canonical DIMACS-XOR form.
pub fn format_dimacs_xor(formula: &Formula) -> Result<String, DimacsError> {
    let mut out = String::new();
    if formula.cnf.is_empty() && formula.k > 0 {
        writeln!(out, "c k {}", formula.k).unwrap();
    }
    writeln!(
        out,
        "p cnf {} {}",
        formula.n,
        formula.cnf.len() + formula.xors.len()
    )
    .unwrap();
    for clause in &formula.cnf {
        for lit in &clause.literals {
            write!(out, "{} ", lit.to_dimacs()).unwrap();
        }
        writeln!(out, "0").unwrap();
    }
    for xor in &formula.xors {
        out.push('x');
        if xor.vars.is_empty() {
            if xor.rhs {
                out.push_str(" 0\n");
            } else {
                // no literal can carry the sign; emit a cancelling pair
                if formula.n == 0 {
                    return Err(DimacsError::Unrepresentable(
                        "empty tautological XOR clause over zero variables".into(),
                    ));
                }
                out.push_str("-1 1 0\n");
            }
            continue;
        }
        for (i, &v) in xor.vars.iter().enumerate() {
            let signed = if i == 0 && !xor.rhs {
                -(v as i64)
            } else {
                v as i64
            };
            if i == 0 {
                write!(out, "{signed}").unwrap();
            } else {
                write!(out, " {signed}").unwrap();
            }
        }
        out.push_str(" 0\n");
    }
    Ok(out)
}

pub fn write_dimacs_xor<W: Write>(formula: &Formula, sink: &mut W) -> Result<(), DimacsError> {
    let text = format_dimacs_xor(formula)?;
    sink.write_all(text.as_bytes())?;
    Ok(())
}

pub fn parse_dimacs_xor_str(source: &str) -> Result<Formula, DimacsError> {
    Parser::default().run(source.lines())
}

pub fn parse_dimacs_xor<R: BufRead>(source: R) -> Result<Formula, DimacsError> {
    let mut text = String::new();
    let mut reader = source;
    reader.read_to_string(&mut text)?;
    parse_dimacs_xor_str(&text)
}

#[derive(Default)]
struct Parser {
    header: Option<(usize, usize, usize)>, // (n, m, header line)
    k_hint: Option<(usize, usize)>,        // (k, line)
    cnf: Vec<KClause>,
    xors: Vec<XorClause>,
}

impl Parser {
    fn run<'a>(mut self, lines: impl Iterator<Item = &'a str>) -> Result<Formula, DimacsError> {
        for (idx, raw) in lines.enumerate() {
            let lineno = idx + 1;
            let line = raw.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('c') {
                self.read_comment(comment, lineno)?;
            } else if line.starts_with('p') {
                self.read_header(line, lineno)?;
            } else if let Some(rest) = line.strip_prefix('x') {
                self.read_xor(rest, lineno)?;
            } else {
                self.read_cnf(line, lineno)?;
            }
        }
        self.finish()
    }

    fn read_comment(&mut self, comment: &str, lineno: usize) -> Result<(), DimacsError> {
        let mut tokens = comment.split_ascii_whitespace();
        if tokens.next() == Some("k") {
            if let Some(value) = tokens.next() {
                if let Ok(k) = value.parse::<usize>() {
                    self.k_hint = Some((k, lineno));
                }
            }
        }
        Ok(())
    }

    fn read_header(&mut self, line: &str, lineno: usize) -> Result<(), DimacsError> {
        if self.header.is_some() {
            return parse_err(lineno, "duplicate header");
        }
        let mut tokens = line.split_ascii_whitespace();
        if tokens.next() != Some("p") || tokens.next() != Some("cnf") {
            return parse_err(lineno, format!("malformed header {line:?}"));
        }
        let n = tokens
            .next()
            .and_then(|t| t.parse::<usize>().ok())
            .ok_or(DimacsError::Parse {
                line: lineno,
                reason: "header variable count is not a number".into(),
            })?;
        let m = tokens
            .next()
            .and_then(|t| t.parse::<usize>().ok())
            .ok_or(DimacsError::Parse {
                line: lineno,
                reason: "header clause count is not a number".into(),
            })?;
        if tokens.next().is_some() {
            return parse_err(lineno, "trailing tokens after header");
        }
        self.header = Some((n, m, lineno));
        Ok(())
    }

    /// Literal tokens of one clause line: every token except the final `0`
    /// terminator must be a nonzero integer within 1..=n.
    fn read_literals(
        &self,
        body: &str,
        lineno: usize,
        glued: Option<&str>,
    ) -> Result<Vec<i64>, DimacsError> {
        let Some((n, _, _)) = self.header else {
            return parse_err(lineno, "clause before header");
        };
        let tokens: Vec<&str> = glued
            .into_iter()
            .chain(body.split_ascii_whitespace())
            .collect();
        let Some((&last, lits)) = tokens.split_last() else {
            return parse_err(lineno, "empty clause line");
        };
        if last != "0" {
            return parse_err(lineno, format!("clause not terminated by 0 (got {last:?})"));
        }
        let mut out = Vec::with_capacity(lits.len());
        for t in lits {
            let code = t.parse::<i64>().map_err(|_| DimacsError::Parse {
                line: lineno,
                reason: format!("invalid literal {t:?}"),
            })?;
            if code == 0 {
                return parse_err(lineno, "variable index 0");
            }
            if code.unsigned_abs() as usize > n {
                return parse_err(lineno, format!("variable {} exceeds n = {n}", code.abs()));
            }
            out.push(code);
        }
        Ok(out)
    }

    fn read_cnf(&mut self, line: &str, lineno: usize) -> Result<(), DimacsError> {
        let codes = self.read_literals(line, lineno, None)?;
        let literals: Vec<Literal> = codes
            .iter()
            .map(|&c| Literal::from_dimacs(c).unwrap())
            .collect();
        let mut vars: Vec<u32> = literals.iter().map(|l| l.var).collect();
        vars.sort_unstable();
        if vars.windows(2).any(|w| w[0] == w[1]) {
            return parse_err(lineno, "repeated variable in CNF clause");
        }
        self.cnf.push(KClause::new(literals));
        Ok(())
    }

    fn read_xor(&mut self, rest: &str, lineno: usize) -> Result<(), DimacsError> {
        // A token glued to the `x` must itself be a literal, so `x0` is
        // invalid while `x 0` is the empty clause.
        let (glued, body) = match rest.find(char::is_whitespace) {
            _ if rest.is_empty() => (None, rest),
            None => (Some(rest), ""),
            Some(0) => (None, rest),
            Some(pos) => (Some(&rest[..pos]), &rest[pos..]),
        };
        if let Some(g) = glued {
            if g.parse::<i64>() == Ok(0) {
                return parse_err(lineno, "variable index 0");
            }
        }
        let codes = self.read_literals(body, lineno, glued)?;
        let negations = codes.iter().filter(|&&c| c < 0).count();
        let vars: Vec<u32> = codes.iter().map(|&c| c.unsigned_abs() as u32).collect();
        let rhs = negations % 2 == 0;
        self.xors.push(XorClause::new(vars, rhs));
        Ok(())
    }

    fn finish(self) -> Result<Formula, DimacsError> {
        let Some((n, m, header_line)) = self.header else {
            return parse_err(0, "missing header");
        };
        let found = self.cnf.len() + self.xors.len();
        if found != m {
            return parse_err(
                header_line,
                format!("header promises {m} clauses but file has {found}"),
            );
        }
        let k = if let Some(first) = self.cnf.first() {
            let k = first.literals.len();
            if let Some(bad) = self.cnf.iter().find(|c| c.literals.len() != k) {
                return parse_err(
                    header_line,
                    format!(
                        "mixed clause widths: expected {k}, found {}",
                        bad.literals.len()
                    ),
                );
            }
            if let Some((hint, hint_line)) = self.k_hint {
                if hint != k {
                    return parse_err(
                        hint_line,
                        format!("k comment says {hint} but clauses have width {k}"),
                    );
                }
            }
            k
        } else {
            self.k_hint.map(|(k, _)| k).unwrap_or(0)
        };
        Ok(Formula {
            n,
            k,
            cnf: self.cnf,
            xors: self.xors,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::RandomModelParams;
    use crate::sample::sample_formula;

    fn lit(code: i64) -> Literal {
        Literal::from_dimacs(code).unwrap()
    }

    #[test]
    fn canonical_text_for_mixed_formula() {
        let f = Formula {
            n: 3,
            k: 3,
            cnf: vec![KClause::new(vec![lit(1), lit(-2), lit(3)])],
            xors: vec![XorClause::new(vec![1, 3], true)],
        };
        assert_eq!(format_dimacs_xor(&f).unwrap(), "p cnf 3 2\n1 -2 3 0\nx1 3 0\n");
    }

    #[test]
    fn rhs_zero_negates_leading_literal() {
        let f = Formula {
            n: 2,
            k: 0,
            cnf: vec![],
            xors: vec![XorClause::new(vec![2], false)],
        };
        let text = format_dimacs_xor(&f).unwrap();
        assert!(text.ends_with("x-2 0\n"), "text was {text:?}");
        let back = parse_dimacs_xor_str(&text).unwrap();
        assert_eq!(back.xors, f.xors);
    }

    #[test]
    fn empty_xor_clause_round_trips_both_parities() {
        for rhs in [false, true] {
            let f = Formula {
                n: 2,
                k: 0,
                cnf: vec![],
                xors: vec![XorClause::new(vec![], rhs)],
            };
            let text = format_dimacs_xor(&f).unwrap();
            let back = parse_dimacs_xor_str(&text).unwrap();
            assert_eq!(back, f, "text was {text:?}");
        }
    }

    #[test]
    fn zero_in_literal_position_is_rejected() {
        let err = parse_dimacs_xor_str("p cnf 2 1\nx 0 0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("variable index 0"), "message: {msg}");
    }

    #[test]
    fn glued_zero_is_rejected() {
        let err = parse_dimacs_xor_str("p cnf 2 1\nx0\n").unwrap_err();
        assert!(err.to_string().contains("variable index 0"));
    }

    #[test]
    fn empty_xor_line_with_space_parses() {
        let f = parse_dimacs_xor_str("p cnf 2 1\nx 0\n").unwrap();
        assert_eq!(f.xors, vec![XorClause::new(vec![], true)]);
    }

    #[test]
    fn out_of_range_variable_is_rejected() {
        let err = parse_dimacs_xor_str("p cnf 2 1\n1 -3 0\n").unwrap_err();
        assert!(err.to_string().contains("exceeds n"));
    }

    #[test]
    fn clause_count_mismatch_is_rejected() {
        let err = parse_dimacs_xor_str("p cnf 2 2\n1 2 0\n").unwrap_err();
        assert!(err.to_string().contains("promises 2"));
    }

    #[test]
    fn k_comment_preserves_width_of_pure_xor_formula() {
        let f = Formula {
            n: 4,
            k: 3,
            cnf: vec![],
            xors: vec![XorClause::new(vec![1, 2, 4], true)],
        };
        let text = format_dimacs_xor(&f).unwrap();
        assert!(text.starts_with("c k 3\n"));
        assert_eq!(parse_dimacs_xor_str(&text).unwrap(), f);
    }

    #[test]
    fn random_formulas_round_trip() {
        for seed in 0..1000u64 {
            let n = 1 + (seed as usize % 12);
            let k = 1 + (seed as usize % n.min(4));
            let params = RandomModelParams::new(k, n, 1.3, 0.8).unwrap();
            let f = sample_formula(&params, seed).unwrap();
            let text = format_dimacs_xor(&f).unwrap();
            let back = parse_dimacs_xor_str(&text).unwrap();
            assert_eq!(back, f, "seed {seed}, text:\n{text}");
        }
    }
}
