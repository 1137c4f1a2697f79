//! Exact univariate polynomials over the rationals.
//!
//! Coefficients are stored in ascending order of degree: `coeffs[i]` is the
//! coefficient of `x^i`. The zero polynomial has no coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::PolyError;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    coeffs: Vec<BigRational>,
}

/// Converts an `f64` to the rational it represents exactly.
pub fn rational_from_f64(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite float")
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    // `ToPrimitive` on huge numerators/denominators can overflow to inf/NaN,
    // so scale both to a comparable bit length first.
    if let Some(v) = r.to_f64() {
        if v.is_finite() && (v != 0.0 || r.is_zero()) {
            return v;
        }
    }
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits() as i64 - d.bits() as i64;
    let (n, d) = if shift > 0 { (n.clone(), d << (shift as usize)) } else { (n << ((-shift) as usize), d.clone()) };
    let q = BigRational::new(n, d).to_f64().unwrap_or(0.0);
    q * 2f64.powi(shift as i32)
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::monomial(BigRational::one(), 1)
    }

    pub fn monomial(c: BigRational, power: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); power + 1];
        coeffs[power] = c;
        Self::new(coeffs)
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    /// Builds `prod (x - r)` over the given integer roots.
    pub fn from_roots(roots: &[i64]) -> Self {
        roots.iter().fold(Self::one(), |acc, &r| &acc * &Self::from_ints(&[-r, 1]))
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    /// Sign of the leading coefficient; 0 for the zero polynomial.
    pub fn leading_sign(&self) -> i32 {
        match self.leading() {
            Some(c) if c.is_positive() => 1,
            Some(_) => -1,
            None => 0,
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(lead) => {
                let inv = lead.recip();
                self.scale(&inv)
            }
            None => Self::zero(),
        }
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + rational_to_f64(c))
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational_to_f64).collect()
    }

    /// `sum |c_i x^i|`, the natural magnitude against which residuals are judged.
    pub fn eval_scale(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        let mut power = BigRational::one();
        for c in &self.coeffs {
            acc += (c * &power).abs();
            power *= x;
        }
        acc
    }

    /// Euclidean division: `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self), PolyError> {
        let dd = divisor.degree().ok_or(PolyError::DivisionByZero)?;
        let lead_inv = divisor.coeffs[dd].recip();
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree().filter(|&n| n >= dd) else {
            return Ok((Self::zero(), self.clone()));
        };
        let mut quot = vec![BigRational::zero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let q = &rem[k + dd] * &lead_inv;
            if q.is_zero() {
                continue;
            }
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= &q * d;
            }
            quot[k] = q;
        }
        rem.truncate(dd);
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Exact quotient; errors if `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &Self) -> Result<Self, PolyError> {
        let (q, r) = self.div_rem(divisor)?;
        if r.is_zero() {
            Ok(q)
        } else {
            Err(PolyError::InexactDivision)
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Result<Self, PolyError> {
        if self.is_zero() && other.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let mut a = self.monic();
        let mut b = other.monic();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b)?;
            a = b;
            b = r.monic();
        }
        Ok(a.monic())
    }

    /// Yun's square-free decomposition of `monic(self)`: pairwise coprime
    /// square-free factors with their exponents, in increasing exponent order.
    pub fn square_free_factorization(&self) -> Result<Vec<(Self, u32)>, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let p = self.monic();
        if p.degree() == Some(0) {
            return Ok(Vec::new());
        }
        let dp = p.derivative();
        let a0 = p.gcd(&dp)?;
        let mut b = p.div_exact(&a0)?;
        let mut c = dp.div_exact(&a0)?;
        let mut d = &c - &b.derivative();
        let mut out = Vec::new();
        let mut i = 1;
        loop {
            let a = b.gcd(&d)?;
            if a.degree() != Some(0) {
                out.push((a.clone(), i));
            }
            b = b.div_exact(&a)?;
            if b.degree() == Some(0) {
                break;
            }
            c = d.div_exact(&a)?;
            d = &c - &b.derivative();
            i += 1;
        }
        Ok(out)
    }

    /// Scales by a positive rational so all coefficients are coprime integers.
    /// Signs of values are preserved.
    pub fn primitive_integer_coeffs(&self) -> Vec<BigInt> {
        if self.is_zero() {
            return Vec::new();
        }
        let lcm = self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> =
            self.coeffs.iter().map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer()).collect();
        let content = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        ints.into_iter().map(|c| c / &content).collect()
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: Polynomial) -> Polynomial {
        &self + &rhs
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        &self - &rhs
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Renders with a given variable name, highest power first, e.g. `x^3 - 1/2*x + 2`.
pub struct Display<'a> {
    poly: &'a Polynomial,
    var: &'a str,
}

impl Polynomial {
    pub fn display<'a>(&'a self, var: &'a str) -> Display<'a> {
        Display { poly: self, var }
    }
}

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.poly.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let mag = c.abs();
            let var = match i {
                0 => String::new(),
                1 => self.var.to_string(),
                _ => format!("{}^{}", self.var, i),
            };
            if i == 0 {
                write!(f, "{}", fmt_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "{var}")?;
            } else {
                write!(f, "{}*{}", fmt_rational(&mag), var)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({})", self.display("x"))
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<String> = self.coeffs.iter().map(fmt_rational).collect();
        strs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let strs = Vec::<String>::deserialize(d)?;
        let coeffs = strs
            .iter()
            .map(|s| s.parse::<BigRational>().map_err(serde::de::Error::custom))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Polynomial::new(coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::from_ints(c)
    }

    #[test]
    fn derivative_power_rule() {
        assert_eq!(p(&[0, -1, 0, 1]).derivative(), p(&[-1, 0, 3]));
    }

    #[test]
    fn multiply_monomials() {
        assert_eq!(&Polynomial::x() * &p(&[0, 0, 1]), p(&[0, 0, 0, 1]));
    }

    #[test]
    fn evaluate_exact() {
        let two = BigRational::from_integer(2.into());
        assert_eq!(p(&[0, 1, 0, -1]).eval(&two), BigRational::from_integer((-6).into()));
        assert_eq!(p(&[0, 1, 0, -1]).eval_f64(2.0), -6.0);
    }

    #[test]
    fn trailing_zeros_trimmed() {
        let q = p(&[1, 2, 0, 0]);
        assert_eq!(q.degree(), Some(1));
        assert!(p(&[0, 0]).is_zero());
        assert_eq!(p(&[]).degree(), None);
    }

    #[test]
    fn gcd_examples() {
        // -x^3 and x share x.
        assert_eq!(p(&[0, 0, 0, -1]).gcd(&p(&[0, 1])).unwrap(), Polynomial::x());
        assert_eq!(p(&[0, 1, 0, -1]).gcd(&p(&[1, 2])).unwrap(), Polynomial::one());
        let q = p(&[2, 0, -4]);
        assert_eq!(q.gcd(&q).unwrap(), q.monic());
        assert_eq!(q.gcd(&Polynomial::zero()).unwrap(), q.monic());
        assert!(Polynomial::zero().gcd(&Polynomial::zero()).is_err());
    }

    #[test]
    fn square_free_examples() {
        assert_eq!(p(&[0, 0, 1]).square_free_factorization().unwrap(), vec![(Polynomial::x(), 2)]);
        let cubic = p(&[0, -1, 0, 1]);
        assert_eq!(cubic.square_free_factorization().unwrap(), vec![(cubic.clone(), 1)]);
        // (x-1)^2 (x+2) = x^3 - 3x + 2
        let q = p(&[2, -3, 0, 1]);
        assert_eq!(q, Polynomial::from_roots(&[1, 1, -2]));
        let sf = q.square_free_factorization().unwrap();
        assert_eq!(sf, vec![(p(&[2, 1]), 1), (p(&[-1, 1]), 2)]);
        assert!(Polynomial::zero().square_free_factorization().is_err());
    }

    #[test]
    fn div_rem_reconstructs() {
        let a = p(&[3, 0, 2, 5]);
        let b = p(&[1, 2]);
        let (q, r) = a.div_rem(&b).unwrap();
        assert_eq!(&(&q * &b) + &r, a);
        assert!(r.degree().unwrap_or(0) < 1);
    }

    #[test]
    fn display_and_serde() {
        let q = Polynomial::new(vec![
            BigRational::new(1.into(), 2.into()),
            BigRational::from_integer((-1).into()),
            BigRational::zero(),
            BigRational::from_integer(3.into()),
        ]);
        assert_eq!(q.display("x").to_string(), "3*x^3 - x + 1/2");
        let json = serde_json::to_string(&q).unwrap();
        assert_eq!(json, r#"["1/2","-1","0","3"]"#);
        assert_eq!(serde_json::from_str::<Polynomial>(&json).unwrap(), q);
    }

    #[test]
    fn primitive_coeffs_keep_sign() {
        let q = Polynomial::new(vec![BigRational::new((-3).into(), 4.into()), BigRational::new(3.into(), 2.into())]);
        assert_eq!(q.primitive_integer_coeffs(), vec![BigInt::from(-1), BigInt::from(2)]);
    }

    #[test]
    fn huge_rational_to_f64() {
        let big = BigInt::from(3) << 2000usize;
        let r = BigRational::new(big.clone(), big << 1usize);
        assert_eq!(rational_to_f64(&r), 0.5);
    }

    fn small_poly() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(-6i64..=6, 0..6).prop_map(|c| Polynomial::from_ints(&c))
    }

    proptest! {
        #[test]
        fn gcd_divides_both(a in small_poly(), b in small_poly()) {
            prop_assume!(!(a.is_zero() && b.is_zero()));
            let g = a.gcd(&b).unwrap();
            prop_assert!(a.div_rem(&g).unwrap().1.is_zero());
            prop_assert!(b.div_rem(&g).unwrap().1.is_zero());
        }

        #[test]
        fn square_free_remultiplies(
            roots in prop::collection::vec(-4i64..=4, 1..7),
            lead in 1i64..5,
        ) {
            let q = Polynomial::from_roots(&roots).scale(&BigRational::from_integer(lead.into()));
            let sf = q.square_free_factorization().unwrap();
            let mut prod = Polynomial::one();
            for (i, (fac, e)) in sf.iter().enumerate() {
                prop_assert_eq!(fac.gcd(&fac.derivative()).unwrap(), Polynomial::one());
                for (other, _) in &sf[i + 1..] {
                    prop_assert_eq!(fac.gcd(other).unwrap(), Polynomial::one());
                }
                for _ in 0..*e {
                    prod = &prod * fac;
                }
            }
            prop_assert_eq!(prod, q.monic());
        }
    }
}
