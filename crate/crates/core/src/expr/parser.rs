use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;

use super::{Expr, ExprAst};
use crate::error::ExprError;

/// Largest exponent accepted; expansion cost grows with it.
const MAX_EXPONENT: u32 = 64;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Number { value: BigRational, integer: bool },
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    pos: usize,
}

fn syntax(pos: usize, message: impl Into<String>) -> ExprError {
    ExprError::Syntax { pos, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let simple = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token { tok, pos: start });
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let (value, integer, end) = lex_number(text, start)?;
            out.push(Token { tok: Tok::Number { value, integer }, pos: start });
            i = end;
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(text[start..i].to_string()), pos: start });
        } else {
            let ch = text[start..].chars().next().unwrap_or('?');
            return Err(syntax(start, format!("unexpected character `{ch}`")));
        }
    }
    out.push(Token { tok: Tok::End, pos: text.len() });
    Ok(out)
}

/// Exact decimal literal: `digits[.digits][e[+-]digits]`.
fn lex_number(text: &str, start: usize) -> Result<(BigRational, bool, usize), ExprError> {
    let bytes = text.as_bytes();
    let mut i = start;
    let digits = |i: &mut usize| {
        let s = *i;
        while *i < bytes.len() && bytes[*i].is_ascii_digit() {
            *i += 1;
        }
        s..*i
    };
    let int_part = digits(&mut i);
    let mut frac_part = i..i;
    let mut integer = true;
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        frac_part = digits(&mut i);
        if frac_part.is_empty() {
            return Err(syntax(i, "expected digits after decimal point"));
        }
        integer = false;
    }
    let mut exp: i64 = 0;
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let epos = i;
        i += 1;
        let mut neg = false;
        if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            neg = bytes[i] == b'-';
            i += 1;
        }
        let e = digits(&mut i);
        if e.is_empty() {
            return Err(syntax(epos, "malformed exponent in number"));
        }
        exp = text[e]
            .parse::<i64>()
            .ok()
            .filter(|v| *v <= 4096)
            .ok_or_else(|| syntax(epos, "number exponent out of range"))?;
        if neg {
            exp = -exp;
        }
        integer = false;
    }
    let mantissa: BigInt = format!("{}{}", &text[int_part], &text[frac_part.clone()]).parse().expect("digits");
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(mantissa * Pow::pow(&ten, scale as u32))
    } else {
        BigRational::new(mantissa, Pow::pow(&ten, (-scale) as u32))
    };
    if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
        return Err(syntax(i, "implicit multiplication is not supported; write `*` between factors"));
    }
    Ok((value, integer, i))
}

struct Parser<'a> {
    tokens: Vec<Token>,
    at: usize,
    state: &'a str,
    param: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while self.peek().tok == Tok::Star {
            self.bump();
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.peek().tok == Tok::Caret {
            self.bump();
            let e = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<u32, ExprError> {
        let t = self.bump();
        let value = match t.tok {
            Tok::Number { value, integer: true } => value.to_integer(),
            Tok::Number { .. } => {
                return Err(ExprError::InvalidExponent { pos: t.pos, message: "exponent must be an integer".into() })
            }
            Tok::Minus => {
                return Err(ExprError::InvalidExponent { pos: t.pos, message: "exponent must be non-negative".into() })
            }
            Tok::Ident(_) => return Err(ExprError::NotPolynomialInState { pos: t.pos }),
            Tok::LParen => {
                let inner = self.exponent()?;
                self.expect_rparen()?;
                BigInt::from(inner)
            }
            other => return Err(syntax(t.pos, format!("expected exponent, found {}", describe(&other)))),
        };
        let value = if self.peek().tok == Tok::Caret {
            self.bump();
            let rhs = self.exponent()?;
            if rhs > 0 && value > BigInt::from(MAX_EXPONENT) {
                value
            } else {
                Pow::pow(value, rhs)
            }
        } else {
            value
        };
        u32::try_from(&value).ok().filter(|v| *v <= MAX_EXPONENT).ok_or_else(|| ExprError::InvalidExponent {
            pos: t.pos,
            message: format!("exponent exceeds the supported maximum of {MAX_EXPONENT}"),
        })
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        let t = self.bump();
        if t.tok == Tok::RParen {
            Ok(())
        } else {
            Err(syntax(t.pos, format!("expected `)`, found {}", describe(&t.tok))))
        }
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let t = self.bump();
        match t.tok {
            Tok::Number { value, .. } => Ok(Expr::Number(value)),
            Tok::Ident(name) if name == self.state => Ok(Expr::State),
            Tok::Ident(name) if name == self.param => Ok(Expr::Param),
            Tok::Ident(name) => Err(ExprError::UnknownSymbol { name, pos: t.pos }),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            other => Err(syntax(t.pos, format!("expected a value, found {}", describe(&other)))),
        }
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Number { .. } => "a number".into(),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

pub fn parse_expression(text: &str, state: &str, param: &str) -> Result<ExprAst, ExprError> {
    if text.trim().is_empty() {
        return Err(ExprError::Empty);
    }
    if state == param {
        return Err(ExprError::SameSymbol(state.to_string()));
    }
    let mut p = Parser { tokens: lex(text)?, at: 0, state, param };
    let root = p.expr()?;
    let t = p.peek();
    if t.tok != Tok::End {
        let message = match t.tok {
            Tok::Ident(_) | Tok::Number { .. } | Tok::LParen => {
                "implicit multiplication is not supported; write `*` between factors".to_string()
            }
            ref other => format!("unexpected {}", describe(other)),
        };
        return Err(syntax(t.pos, message));
    }
    Ok(ExprAst { root, state: state.to_string(), param: param.to_string() })
}
