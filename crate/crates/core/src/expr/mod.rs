//! Expressions in one state variable and one parameter.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr     = term { ("+" | "-") term } ;
//! term     = unary { "*" unary } ;
//! unary    = "-" unary | power ;
//! power    = primary [ "^" exponent ] ;
//! exponent = integer [ "^" exponent ] | "(" exponent ")" ;
//! primary  = number | identifier | "(" expr ")" ;
//! number   = digit { digit } [ "." digit { digit } ] [ ("e" | "E") [ "+" | "-" ] digit { digit } ] ;
//! ```
//!
//! `^` binds tighter than unary minus, so `-x^2` is `-(x^2)`. Products need an
//! explicit `*`.

mod affine;
mod parser;

pub use affine::{extract_affine_system, ParamAffineSystem};
pub use parser::parse_expression;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    /// Non-negative literal.
    Number(BigRational),
    State,
    Param,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

/// A parsed expression together with the symbol names it was parsed against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExprAst {
    pub root: Expr,
    pub state: String,
    pub param: String,
}

impl Expr {
    pub fn eval(&self, x: &BigRational, lambda: &BigRational) -> BigRational {
        match self {
            Expr::Number(n) => n.clone(),
            Expr::State => x.clone(),
            Expr::Param => lambda.clone(),
            Expr::Neg(a) => -a.eval(x, lambda),
            Expr::Add(a, b) => a.eval(x, lambda) + b.eval(x, lambda),
            Expr::Sub(a, b) => a.eval(x, lambda) - b.eval(x, lambda),
            Expr::Mul(a, b) => a.eval(x, lambda) * b.eval(x, lambda),
            Expr::Pow(a, e) => {
                let base = a.eval(x, lambda);
                if *e == 0 {
                    BigRational::one()
                } else {
                    Pow::pow(base, *e)
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            Expr::Number(_) | Expr::State | Expr::Param => 5,
        }
    }
}

impl ExprAst {
    pub fn eval(&self, x: &BigRational, lambda: &BigRational) -> BigRational {
        self.root.eval(x, lambda)
    }
}

/// Exact decimal rendering; literals always have denominators of the form 2^a 5^b.
fn fmt_literal(n: &BigRational) -> String {
    if n.is_integer() {
        return n.numer().to_string();
    }
    let mut den = n.denom().clone();
    let (mut twos, mut fives) = (0u32, 0u32);
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while den.is_multiple_of(&two) {
        den /= &two;
        twos += 1;
    }
    while den.is_multiple_of(&five) {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        // Not expressible as a finite decimal; only reachable for hand-built ASTs.
        return format!("({}*{}^-1)", n.numer(), n.denom());
    }
    let digits = twos.max(fives);
    let scaled = (n * BigRational::from_integer(BigInt::from(10).pow(digits))).to_integer();
    let s = format!("{:0>width$}", scaled.to_string(), width = digits as usize + 1);
    let (int, frac) = s.split_at(s.len() - digits as usize);
    format!("{int}.{frac}")
}

struct Shown<'a> {
    expr: &'a Expr,
    ast: &'a ExprAst,
}

impl fmt::Display for Shown<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |e: &Expr, min: u8, f: &mut fmt::Formatter<'_>| -> fmt::Result {
            let s = Shown { expr: e, ast: self.ast };
            if e.precedence() < min {
                write!(f, "({s})")
            } else {
                write!(f, "{s}")
            }
        };
        match self.expr {
            Expr::Number(n) => write!(f, "{}", fmt_literal(n)),
            Expr::State => write!(f, "{}", self.ast.state),
            Expr::Param => write!(f, "{}", self.ast.param),
            Expr::Neg(a) => {
                write!(f, "-")?;
                sub(a, 3, f)
            }
            Expr::Add(a, b) => {
                sub(a, 1, f)?;
                write!(f, " + ")?;
                sub(b, 2, f)
            }
            Expr::Sub(a, b) => {
                sub(a, 1, f)?;
                write!(f, " - ")?;
                sub(b, 2, f)
            }
            Expr::Mul(a, b) => {
                sub(a, 2, f)?;
                write!(f, "*")?;
                sub(b, 3, f)
            }
            Expr::Pow(a, e) => {
                sub(a, 5, f)?;
                write!(f, "^{e}")
            }
        }
    }
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Shown { expr: &self.root, ast: self })
    }
}

/// Multiplies by the state symbol: `x * (expr)`.
pub fn multiply_by_state(ast: ExprAst) -> ExprAst {
    ExprAst { root: Expr::Mul(Box::new(Expr::State), Box::new(ast.root)), state: ast.state, param: ast.param }
}
