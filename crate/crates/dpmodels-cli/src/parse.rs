//! Equation parser: integer/rational literals, the ambient's variables plus
//! t, operators + - * ^ and parentheses; whitespace-insensitive, with
//! column-accurate syntax errors.

use dpmodels::polyring::{DvrPolynomial, Field};
use dpmodels::Ambient;

#[derive(Debug)]
pub struct ParseError {
    pub column: usize,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "syntax error at column {}: {}", self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(i64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = vec![];
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '+' => {
                out.push((col, Tok::Plus));
                i += 1;
            }
            '-' | '\u{2212}' => {
                out.push((col, Tok::Minus));
                i += 1;
            }
            '*' => {
                out.push((col, Tok::Star));
                i += 1;
            }
            '^' => {
                out.push((col, Tok::Caret));
                i += 1;
            }
            '/' => {
                out.push((col, Tok::Slash));
                i += 1;
            }
            '(' => {
                out.push((col, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((col, Tok::RParen));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let n: i64 = s.parse().map_err(|_| ParseError {
                    column: start + 1,
                    message: format!("integer literal {s} is out of range"),
                })?;
                out.push((start + 1, Tok::Num(n)));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push((start + 1, Tok::Ident(s)));
            }
            other => {
                return Err(ParseError {
                    column: col,
                    message: format!("unexpected character '{other}'"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    ambient: &'a Ambient,
    field: &'a Field,
    end_col: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.toks.get(self.pos)
    }

    fn col(&self) -> usize {
        self.peek().map(|(c, _)| *c).unwrap_or(self.end_col)
    }

    fn bump(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<DvrPolynomial, ParseError> {
        let mut acc = self.term()?;
        while let Some((_, t)) = self.peek() {
            match t {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<DvrPolynomial, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some((_, Tok::Star)) => {
                    self.bump();
                    acc = acc.mul(&self.factor()?);
                }
                // implicit multiplication for juxtaposed atoms
                Some((_, Tok::Ident(_))) | Some((_, Tok::LParen)) | Some((_, Tok::Num(_))) => {
                    acc = acc.mul(&self.factor()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<DvrPolynomial, ParseError> {
        let base = self.atom()?;
        if let Some((_, Tok::Caret)) = self.peek() {
            self.bump();
            let col = self.col();
            match self.bump() {
                Some((_, Tok::Num(n))) if n >= 0 => Ok(base.pow(n as u32)),
                _ => Err(ParseError {
                    column: col,
                    message: "expected a non-negative integer exponent".into(),
                }),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<DvrPolynomial, ParseError> {
        let col = self.col();
        match self.bump() {
            Some((_, Tok::Num(n))) => {
                // rational literal a/b
                if let Some((_, Tok::Slash)) = self.peek() {
                    self.bump();
                    let dcol = self.col();
                    match self.bump() {
                        Some((_, Tok::Num(d))) if d != 0 => Ok(DvrPolynomial::constant(
                            self.ambient,
                            self.field,
                            self.field.from_rational(n, d),
                        )),
                        _ => Err(ParseError {
                            column: dcol,
                            message: "expected a nonzero integer denominator".into(),
                        }),
                    }
                } else {
                    Ok(DvrPolynomial::int(self.ambient, self.field, n))
                }
            }
            Some((c, Tok::Ident(name))) => {
                if name == "t" || self.ambient.var_index(&name).is_some() {
                    Ok(DvrPolynomial::var(self.ambient, self.field, &name))
                } else {
                    Err(ParseError {
                        column: c,
                        message: format!(
                            "unknown variable {name} (ambient has {}, plus t)",
                            self.ambient.vars.join(", ")
                        ),
                    })
                }
            }
            Some((_, Tok::Minus)) => Ok(self.factor()?.neg()),
            Some((_, Tok::LParen)) => {
                let inner = self.expr()?;
                let col = self.col();
                match self.bump() {
                    Some((_, Tok::RParen)) => Ok(inner),
                    _ => Err(ParseError { column: col, message: "expected ')'".into() }),
                }
            }
            Some((c, tok)) => Err(ParseError {
                column: c,
                message: format!("unexpected token {tok:?}"),
            }),
            None => Err(ParseError { column: col, message: "unexpected end of input".into() }),
        }
    }
}

/// Parse an equation in the ambient's variables; checks weighted
/// homogeneity of the expected degree for projective ambients.
pub fn parse_equation(
    text: &str,
    ambient: &Ambient,
    field: &Field,
) -> Result<DvrPolynomial, ParseError> {
    let toks = lex(text)?;
    let end_col = text.chars().count() + 1;
    let mut p = Parser { toks, pos: 0, ambient, field, end_col };
    let poly = p.expr()?;
    if let Some((c, tok)) = p.peek() {
        return Err(ParseError { column: *c, message: format!("unexpected trailing {tok:?}") });
    }
    if let Some(d) = ambient.expected_degree() {
        match poly.weighted_degree_ambient() {
            Ok(got) if got == d => {}
            Ok(got) => {
                return Err(ParseError {
                    column: 1,
                    message: format!("equation has weighted degree {got}, expected {d}"),
                })
            }
            Err(e) => {
                return Err(ParseError {
                    column: 1,
                    message: format!("equation is not weighted-homogeneous: {e}"),
                })
            }
        }
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dpmodels::AmbientSpace;

    #[test]
    fn parses_tangent_cone_family() {
        let a = AmbientSpace::p3();
        let k = Field::rationals();
        let f =
            parse_equation("x0*(x0*x3 + x1^2) + t*x2^3 + t^4*x3^3", &a, &k).unwrap();
        let g = {
            let x0 = DvrPolynomial::var(&a, &k, "x0");
            let x1 = DvrPolynomial::var(&a, &k, "x1");
            let x2 = DvrPolynomial::var(&a, &k, "x2");
            let x3 = DvrPolynomial::var(&a, &k, "x3");
            let t = DvrPolynomial::t(&a, &k);
            x0.mul(&x0.mul(&x3).add(&x1.pow(2)))
                .add(&t.mul(&x2.pow(3)))
                .add(&t.pow(4).mul(&x3.pow(3)))
        };
        assert_eq!(f, g);
    }

    #[test]
    fn parses_smooth_dp2() {
        let a = AmbientSpace::wp2111();
        let k = Field::rationals();
        let f = parse_equation("u^2 + x1^4 + x2^4 + x3^4", &a, &k).unwrap();
        assert_eq!(f.weighted_degree_ambient().unwrap(), 4);
    }

    #[test]
    fn syntax_error_column() {
        let a = AmbientSpace::p3();
        let k = Field::rationals();
        let e = parse_equation("x0 + ", &a, &k).unwrap_err();
        assert_eq!(e.column, 6);
    }

    #[test]
    fn homogeneity_enforced() {
        let a = AmbientSpace::p3();
        let k = Field::rationals();
        assert!(parse_equation("x0^2 + x1^3", &a, &k).is_err());
    }

    #[test]
    fn roundtrip_canonical_form() {
        let a = AmbientSpace::p3();
        let k = Field::rationals();
        let f = parse_equation("x0^3 - 2*x1^3 + 1/2*x2^3 + x3^3", &a, &k).unwrap();
        let g = parse_equation(&f.render(), &a, &k).unwrap();
        assert_eq!(f, g);
        assert_eq!(f.render(), g.render());
    }
}
