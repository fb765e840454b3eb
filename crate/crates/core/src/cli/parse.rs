//! Operator literal syntax.
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := power (('*'|'/') power)*
//! power  := atom ('^' int)?
//! atom   := rational | param | coord | radical | 'd[' coord ']' | '(' expr ')'
//! ```
//!
//! `*` is operator composition (ordinary multiplication between
//! coefficients); `/` is only allowed by a rational times a radical power.
//! Parameters are `k`, `E` and `w` (alias `omega`).

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::opalgebra::{Chart, Coeff, DiffOp, Param, Q};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Deriv(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '0'..='9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((start, Tok::Int(text[start..i].parse().expect("digits"))));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                if word == "d" && i < bytes.len() && bytes[i] == b'[' {
                    let close = text[i..].find(']').ok_or_else(|| Error::Parse {
                        pos: i,
                        message: "unterminated `d[`".into(),
                    })?;
                    let name = text[i + 1..i + close].trim().to_string();
                    i += close + 1;
                    out.push((start, Tok::Deriv(name)));
                } else {
                    out.push((start, Tok::Ident(word.to_string())));
                }
                continue;
            }
            other => {
                return Err(Error::Parse { pos: i, message: format!("unexpected character `{other}`") });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    chart: Chart,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.offset(), message: message.into() })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<DiffOp> {
        let mut negate = false;
        match self.peek() {
            Some(Tok::Minus) => {
                negate = true;
                self.bump();
            }
            Some(Tok::Plus) => {
                self.bump();
            }
            _ => {}
        }
        let first = self.term()?;
        let mut acc = if negate { -&first } else { first };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<DiffOp> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let rhs = self.power()?;
                    acc = acc.compose(&rhs)?;
                }
                Some(Tok::Slash) => {
                    let at = self.offset();
                    self.bump();
                    let rhs = self.power()?;
                    let divisor = as_coefficient(&rhs).and_then(|c| c.as_radical_monomial());
                    let Some((c, n)) = divisor else {
                        return Err(Error::Parse {
                            pos: at,
                            message: "division is only allowed by a rational times a radical power".into(),
                        });
                    };
                    let inv = Coeff::radical_pow(self.chart, -n).scale(&(Q::one() / c));
                    acc = acc.left_mul(&inv);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<DiffOp> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.bump();
        let n = match self.bump() {
            Some(Tok::Int(n)) => n,
            _ => {
                self.pos -= 1;
                return self.err("expected a non-negative integer exponent");
            }
        };
        let n: u32 = n.try_into().map_err(|_| Error::Parse { pos: self.offset(), message: "exponent too large".into() })?;
        let mut out = DiffOp::identity(self.chart);
        for _ in 0..n {
            out = out.compose(&base)?;
        }
        Ok(out)
    }

    fn atom(&mut self) -> Result<DiffOp> {
        let chart = self.chart;
        let at = self.offset();
        match self.bump() {
            Some(Tok::Int(n)) => Ok(DiffOp::multiplication(Coeff::constant(chart, Q::from_integer(n)))),
            Some(Tok::Ident(name)) => {
                if let Some(i) = chart.coord_index(&name) {
                    Ok(DiffOp::multiplication(Coeff::coord(chart, i)))
                } else if name == chart.radical_name() {
                    Ok(DiffOp::multiplication(Coeff::radical(chart)))
                } else if let Some(p) = Param::from_name(&name) {
                    Ok(DiffOp::multiplication(Coeff::param(chart, p)))
                } else {
                    Err(Error::UnknownCoordinate { name, chart })
                }
            }
            Some(Tok::Deriv(name)) => match chart.coord_index(&name) {
                Some(i) => Ok(DiffOp::partial(chart, i)),
                None => Err(Error::UnknownCoordinate { name, chart }),
            },
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                if self.bump() != Some(Tok::RParen) {
                    self.pos -= 1;
                    return self.err("expected `)`");
                }
                Ok(inner)
            }
            Some(_) => Err(Error::Parse { pos: at, message: "unexpected token".into() }),
            None => Err(Error::Parse { pos: at, message: "unexpected end of input".into() }),
        }
    }
}

fn as_coefficient(d: &DiffOp) -> Option<Coeff> {
    if d.is_zero() {
        return Some(Coeff::zero(d.chart()));
    }
    if d.degree() == 0 {
        Some(d.coefficient(&crate::opalgebra::MultiIndex::zero()))
    } else {
        None
    }
}

pub fn parse_operator(text: &str, chart: Chart) -> Result<DiffOp> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(Error::Parse { pos: 0, message: "empty expression".into() });
    }
    let mut p = Parser { toks, pos: 0, end: text.len(), chart };
    let out = p.expr()?;
    if p.pos < p.toks.len() {
        return p.err("trailing input");
    }
    Ok(out)
}

/// Parse an expression that must not contain derivatives.
pub fn parse_coeff(text: &str, chart: Chart) -> Result<Coeff> {
    let d = parse_operator(text, chart)?;
    as_coefficient(&d).ok_or_else(|| Error::Parse {
        pos: 0,
        message: "expected a coefficient, found a differential operator".into(),
    })
}

pub fn parse_rational(text: &str) -> Result<Q> {
    let t = text.trim();
    let parsed = match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad_rational(t))?;
            let d: BigInt = d.trim().parse().map_err(|_| bad_rational(t))?;
            if d.is_zero() {
                return Err(bad_rational(t));
            }
            Q::new(n, d)
        }
        None => Q::from_integer(t.parse().map_err(|_| bad_rational(t))?),
    };
    Ok(parsed)
}

fn bad_rational(t: &str) -> Error {
    Error::InvalidArgument(format!("`{t}` is not a rational number"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::format::format_operator;
    use crate::opalgebra::q;

    #[test]
    fn parses_conformal_laplacian() {
        let text = "(1/(4*R^2)) * d[y1]^2 + (1/(4*R^2)) * d[y2]^2 + (1/(4*R^2)) * d[y3]^2 + (1/(4*R^2)) * d[y0]^2";
        let d = parse_operator(text, Chart::R4).unwrap();
        let expected = DiffOp::laplacian(Chart::R4).left_mul(&Coeff::radical_pow(Chart::R4, -2).scale(&crate::opalgebra::qr(1, 4)));
        assert_eq!(d, expected);
    }

    #[test]
    fn parses_single_derivative() {
        assert_eq!(parse_operator("d[x1]", Chart::R3).unwrap(), DiffOp::partial(Chart::R3, 0));
    }

    #[test]
    fn composition_order_follows_text() {
        let d = parse_operator("d[x1]*x1", Chart::R3).unwrap();
        let printed = format_operator(&d);
        assert_eq!(printed, "1 + x1*d[x1]");
    }

    #[test]
    fn rejects_bad_division_and_names() {
        assert!(matches!(parse_operator("1/(x1+x2)", Chart::R3), Err(Error::Parse { .. })));
        assert!(matches!(parse_operator("d[y1]", Chart::R3), Err(Error::UnknownCoordinate { .. })));
        assert!(matches!(parse_operator("x1 +", Chart::R3), Err(Error::Parse { .. })));
        assert!(matches!(parse_operator("(x1", Chart::R3), Err(Error::Parse { .. })));
        assert!(matches!(parse_operator("x1 $ 2", Chart::R3), Err(Error::Parse { pos: 3, .. })));
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("1/2").unwrap(), crate::opalgebra::qr(1, 2));
        assert_eq!(parse_rational("-3").unwrap(), q(-3));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
