use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{Expr, ExprAst};
use crate::error::ExprError;
use crate::poly::Polynomial;

/// `dx/dt = f(x) + param * g(x)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamAffineSystem {
    pub state: String,
    pub param: String,
    pub f: Polynomial,
    pub g: Polynomial,
}

impl ParamAffineSystem {
    /// `f + lambda * g` as a polynomial in the state.
    pub fn instantiate(&self, lambda: &BigRational) -> Polynomial {
        &self.f + &self.g.scale(lambda)
    }

    pub fn eval(&self, x: &BigRational, lambda: &BigRational) -> BigRational {
        self.f.eval(x) + lambda * self.g.eval(x)
    }

    pub fn eval_f64(&self, x: f64, lambda: f64) -> f64 {
        self.f.eval_f64(x) + lambda * self.g.eval_f64(x)
    }

    /// d/dx [f + lambda g] at x, in floating point.
    pub fn derivative_f64(&self, x: f64, lambda: f64) -> f64 {
        self.f.derivative().eval_f64(x) + lambda * self.g.derivative().eval_f64(x)
    }

    /// Largest degree in the state over both parts.
    pub fn degree(&self) -> usize {
        self.f.degree().unwrap_or(0).max(self.g.degree().unwrap_or(0))
    }

    /// Human-readable `f + param*(g)` form.
    pub fn normal_form(&self) -> String {
        format!("{} + {}*({})", self.f.display(&self.state), self.param, self.g.display(&self.state))
    }
}

/// Polynomial in (x, lambda) stored by lambda power.
#[derive(Clone, Debug, Default)]
struct Bivariate {
    by_param_power: Vec<Polynomial>,
}

impl Bivariate {
    fn constant(c: BigRational) -> Self {
        Self { by_param_power: vec![Polynomial::constant(c)] }.trimmed()
    }

    fn state() -> Self {
        Self { by_param_power: vec![Polynomial::x()] }
    }

    fn param() -> Self {
        Self { by_param_power: vec![Polynomial::zero(), Polynomial::one()] }
    }

    fn one() -> Self {
        Self { by_param_power: vec![Polynomial::one()] }
    }

    fn trimmed(mut self) -> Self {
        while self.by_param_power.last().is_some_and(Polynomial::is_zero) {
            self.by_param_power.pop();
        }
        self
    }

    fn part(&self, k: usize) -> Polynomial {
        self.by_param_power.get(k).cloned().unwrap_or_else(Polynomial::zero)
    }

    fn add(&self, rhs: &Self, sign_rhs: bool) -> Self {
        let n = self.by_param_power.len().max(rhs.by_param_power.len());
        Self {
            by_param_power: (0..n)
                .map(|k| if sign_rhs { &self.part(k) + &rhs.part(k) } else { &self.part(k) - &rhs.part(k) })
                .collect(),
        }
        .trimmed()
    }

    fn mul(&self, rhs: &Self) -> Self {
        if self.by_param_power.is_empty() || rhs.by_param_power.is_empty() {
            return Self::default();
        }
        let mut out = vec![Polynomial::zero(); self.by_param_power.len() + rhs.by_param_power.len() - 1];
        for (i, a) in self.by_param_power.iter().enumerate() {
            for (j, b) in rhs.by_param_power.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Self { by_param_power: out }.trimmed()
    }

    fn neg(&self) -> Self {
        Self { by_param_power: self.by_param_power.iter().map(|p| -p).collect() }
    }

    fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

fn expand(e: &Expr) -> Bivariate {
    match e {
        Expr::Number(n) => Bivariate::constant(n.clone()),
        Expr::State => Bivariate::state(),
        Expr::Param => Bivariate::param(),
        Expr::Neg(a) => expand(a).neg(),
        Expr::Add(a, b) => expand(a).add(&expand(b), true),
        Expr::Sub(a, b) => expand(a).add(&expand(b), false),
        Expr::Mul(a, b) => expand(a).mul(&expand(b)),
        Expr::Pow(a, k) => expand(a).pow(*k),
    }
}

/// Expands over the rationals and splits into the parameter-free part `f`
/// and the coefficient `g` of the parameter.
pub fn extract_affine_system(ast: &ExprAst) -> Result<ParamAffineSystem, ExprError> {
    let expanded = expand(&ast.root);
    let top = expanded.by_param_power.len();
    if top > 2 {
        return Err(ExprError::ParameterNotAffine { param: ast.param.clone(), power: top - 1 });
    }
    let g = expanded.part(1);
    if g.is_zero() {
        return Err(ExprError::NoParameter(ast.param.clone()));
    }
    Ok(ParamAffineSystem { state: ast.state.clone(), param: ast.param.clone(), f: expanded.part(0), g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use num_traits::Zero;
    use proptest::prelude::*;

    fn sys(s: &str, param: &str) -> Result<ParamAffineSystem, ExprError> {
        extract_affine_system(&parse_expression(s, "x", param)?)
    }

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::from_ints(c)
    }

    #[test]
    fn pitchfork_split() {
        let s = sys("lambda*x - x^3", "lambda").unwrap();
        assert_eq!(s.f, p(&[0, 0, 0, -1]));
        assert_eq!(s.g, p(&[0, 1]));
    }

    #[test]
    fn substituted_family_split() {
        let s = sys("c + (1+2*c)*x - x^3", "c").unwrap();
        assert_eq!(s.f, p(&[0, 1, 0, -1]));
        assert_eq!(s.g, p(&[1, 2]));
    }

    #[test]
    fn rejects_quadratic_parameter() {
        assert_eq!(
            sys("lambda^2*x", "lambda"),
            Err(ExprError::ParameterNotAffine { param: "lambda".into(), power: 2 })
        );
        // Cancelling parameter powers are fine.
        let s = sys("lambda^2*x - lambda*lambda*x + lambda", "lambda").unwrap();
        assert_eq!(s.g, Polynomial::one());
    }

    #[test]
    fn rejects_missing_parameter() {
        assert_eq!(sys("x - x^3", "lambda"), Err(ExprError::NoParameter("lambda".into())));
        assert_eq!(sys("x + lambda - lambda", "lambda"), Err(ExprError::NoParameter("lambda".into())));
    }

    #[test]
    fn polar_radial_form() {
        let inner = parse_expression("lambda - lambda*r^2 + r^4", "r", "lambda").unwrap();
        let s = extract_affine_system(&crate::expr::multiply_by_state(inner)).unwrap();
        assert_eq!(s.f, p(&[0, 0, 0, 0, 0, 1]));
        assert_eq!(s.g, p(&[0, 1, 0, -1]));
    }

    fn leaf() -> impl Strategy<Value = Expr> {
        prop_oneof![
            (0i64..20).prop_map(|n| Expr::Number(BigRational::from_integer(n.into()))),
            (0i64..20).prop_map(|n| Expr::Number(BigRational::new(n.into(), 4.into()))),
            Just(Expr::State),
            Just(Expr::Param),
        ]
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        leaf().prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
                (inner, 0u32..4).prop_map(|(a, k)| Expr::Pow(Box::new(a), k)),
            ]
        })
    }

    fn rational() -> impl Strategy<Value = BigRational> {
        (-50i64..50, 1i64..9).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
    }

    proptest! {
        #[test]
        fn expansion_matches_evaluation(
            expr in arb_expr(),
            points in prop::collection::vec((rational(), rational()), 200),
        ) {
            let ast = ExprAst { root: expr, state: "x".into(), param: "lambda".into() };
            let expanded = expand(&ast.root);
            for (x, l) in &points {
                let direct = ast.eval(x, l);
                let mut via = BigRational::zero();
                let mut lp = BigRational::from_integer(1.into());
                for part in &expanded.by_param_power {
                    via += part.eval(x) * &lp;
                    lp *= l;
                }
                prop_assert_eq!(&direct, &via);
            }
            if let Ok(s) = extract_affine_system(&ast) {
                for (x, l) in &points {
                    prop_assert_eq!(ast.eval(x, l), s.eval(x, l));
                }
            }
        }

        #[test]
        fn display_reparses_to_same_expansion(expr in arb_expr()) {
            let ast = ExprAst { root: expr, state: "x".into(), param: "lambda".into() };
            let text = ast.to_string();
            let again = parse_expression(&text, "x", "lambda").unwrap();
            let (a, b) = (expand(&ast.root), expand(&again.root));
            prop_assert_eq!(a.by_param_power, b.by_param_power, "{}", text);
        }
    }
}
