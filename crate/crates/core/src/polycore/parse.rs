//! Recursive-descent parser for polynomial expressions in `x` and `y`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := '-' term | factor (('*' | '/') factor)*
//! factor := base ('^' nonneg-int)?
//! base   := 'x' | 'y' | int | '(' expr ')'
//! ```
//! Division is only by nonzero constants, so `x^2*y^2/4` and `3/7` both work.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use super::BivarPoly;

const MAX_EXPONENT: u32 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("negative exponent at position {pos}")]
    NegativeExponent { pos: usize },
    #[error("division by a non-constant or zero expression at position {pos}")]
    BadDivisor { pos: usize },
    #[error("exponent at position {pos} exceeds {MAX_EXPONENT}")]
    ExponentTooLarge { pos: usize },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match *self {
            ParseError::Syntax { pos, .. }
            | ParseError::NegativeExponent { pos }
            | ParseError::BadDivisor { pos }
            | ParseError::ExponentTooLarge { pos } => pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    X,
    Y,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let v: BigInt = text[start..i].parse().expect("digits");
                out.push((start, Tok::Int(v)));
                continue;
            }
            b'x' => Tok::X,
            b'y' => Tok::Y,
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            _ => {
                return Err(ParseError::Syntax {
                    pos: i,
                    msg: format!(
                        "unexpected character {:?}",
                        text[i..].chars().next().unwrap()
                    ),
                })
            }
        };
        out.push((i, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|t| t.0).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|t| t.1.clone());
        self.at += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => Err(ParseError::Syntax {
                pos,
                msg: format!("expected {what}"),
            }),
        }
    }

    fn expr(&mut self) -> Result<BivarPoly, ParseError> {
        let mut acc = self.term()?;
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

    fn term(&mut self) -> Result<BivarPoly, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.bump();
            return Ok(-self.term()?);
        }
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc = &acc * &self.factor()?;
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let pos = self.pos();
                    let d = self.factor()?;
                    let c = match d.coeff((0, 0)) {
                        Some(c) if d.len() == 1 => c.clone(),
                        _ => return Err(ParseError::BadDivisor { pos }),
                    };
                    acc = acc.scale(&(BigRational::from_integer(1.into()) / c));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<BivarPoly, ParseError> {
        let base = self.base()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        let n = match self.bump() {
            Some(Tok::Int(n)) => n,
            Some(Tok::Minus) => return Err(ParseError::NegativeExponent { pos }),
            Some(Tok::LParen) => {
                let inner = self.pos();
                let n = match self.bump() {
                    Some(Tok::Int(n)) => n,
                    Some(Tok::Minus) => return Err(ParseError::NegativeExponent { pos: inner }),
                    _ => {
                        return Err(ParseError::Syntax {
                            pos: inner,
                            msg: "expected integer exponent".into(),
                        })
                    }
                };
                self.expect(Tok::RParen, "')'")?;
                n
            }
            _ => {
                return Err(ParseError::Syntax {
                    pos,
                    msg: "expected integer exponent".into(),
                })
            }
        };
        let n: u32 = match u32::try_from(n) {
            Ok(n) if n <= MAX_EXPONENT => n,
            _ => return Err(ParseError::ExponentTooLarge { pos }),
        };
        Ok(base.pow(n))
    }

    fn base(&mut self) -> Result<BivarPoly, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::X) => Ok(BivarPoly::x()),
            Some(Tok::Y) => Ok(BivarPoly::y()),
            Some(Tok::Int(n)) => Ok(BivarPoly::constant(BigRational::from_integer(n))),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Some(_) => Err(ParseError::Syntax {
                pos,
                msg: "expected x, y, a number or '('".into(),
            }),
            None => Err(ParseError::Syntax {
                pos,
                msg: "unexpected end of input".into(),
            }),
        }
    }
}

/// Parses an expression into canonical sparse form.
pub fn parse_poly(text: &str) -> Result<BivarPoly, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: text.len(),
    };
    let out = p.expr()?;
    if p.at < p.toks.len() {
        return Err(ParseError::Syntax {
            pos: p.pos(),
            msg: "trailing input".into(),
        });
    }
    debug_assert!(out.terms().all(|(_, c)| !c.is_zero()));
    Ok(out)
}
