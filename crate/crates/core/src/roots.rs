//! Certified real-root isolation.
//!
//! Each square-free factor is isolated with a Sturm sequence evaluated exactly
//! at dyadic points, bisected to the requested width, then polished with a
//! guarded Newton step in `f64`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::PolyError;
use crate::poly::{rational_to_f64, Polynomial};

/// Default bisection width for isolating intervals.
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;
/// Roots closer than this after refinement are merged.
pub const CLUSTER_THRESHOLD: f64 = 1e-8;
/// Relative residual accepted for a refined root.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub value: f64,
    pub multiplicity: u32,
    /// Set when bisection landed exactly on a rational root.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_rational")]
    pub exact: Option<BigRational>,
}

/// Real roots sorted ascending, with multiplicities.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RootSet {
    pub roots: Vec<Root>,
}

impl RootSet {
    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.roots.iter().map(|r| r.value)
    }

    pub fn total_multiplicity(&self) -> u32 {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    /// Multiplicity of the listed root within `tol` of `x`, or 0.
    pub fn multiplicity_near(&self, x: f64, tol: f64) -> u32 {
        self.roots.iter().filter(|r| (r.value - x).abs() <= tol).map(|r| r.multiplicity).sum()
    }
}

/// Value `num / 2^exp`.
#[derive(Clone, Debug)]
struct Dyadic {
    num: BigInt,
    exp: u32,
}

impl Dyadic {
    fn to_rational(&self) -> BigRational {
        BigRational::new(self.num.clone(), BigInt::one() << self.exp as usize)
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(&self.to_rational())
    }

    fn with_exp(&self, exp: u32) -> BigInt {
        &self.num << (exp - self.exp) as usize
    }

    fn midpoint(a: &Dyadic, b: &Dyadic) -> Dyadic {
        let exp = a.exp.max(b.exp);
        Dyadic { num: a.with_exp(exp) + b.with_exp(exp), exp: exp + 1 }
    }
}

/// Sign of `p(num / 2^exp)` for integer coefficients, computed exactly.
fn sign_at(coeffs: &[BigInt], at: &Dyadic) -> i32 {
    let Some(n) = coeffs.len().checked_sub(1) else {
        return 0;
    };
    // Horner on p(a/2^k) * 2^(k n).
    let mut acc = coeffs[n].clone();
    for i in (0..n).rev() {
        acc = acc * &at.num + (&coeffs[i] << (at.exp as usize * (n - i)));
    }
    sign_of(&acc)
}

fn sign_of(v: &BigInt) -> i32 {
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

struct SturmChain {
    chain: Vec<Vec<BigInt>>,
}

impl SturmChain {
    fn new(p: &Polynomial) -> Self {
        let mut polys = vec![p.clone(), p.derivative()];
        loop {
            let n = polys.len();
            let (_, r) = polys[n - 2].div_rem(&polys[n - 1]).expect("nonzero divisor");
            if r.is_zero() {
                break;
            }
            polys.push(-&r);
        }
        Self { chain: polys.iter().map(Polynomial::primitive_integer_coeffs).collect() }
    }

    fn variations(&self, at: &Dyadic) -> usize {
        let mut count = 0;
        let mut last = 0;
        for c in &self.chain {
            let s = sign_at(c, at);
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    /// Number of distinct roots in `(a, b]`.
    fn count(&self, a: &Dyadic, b: &Dyadic) -> usize {
        self.variations(a).saturating_sub(self.variations(b))
    }
}

/// Smallest power of two strictly exceeding every root's magnitude (Cauchy bound).
fn root_bound_exp(p: &Polynomial) -> u32 {
    let coeffs = p.coeffs();
    let lead = coeffs.last().expect("nonzero").abs();
    let max_ratio =
        coeffs[..coeffs.len() - 1]
            .iter()
            .map(|c| c.abs() / &lead)
            .fold(BigRational::zero(), |a, b| if b > a { b } else { a });
    let bound = (max_ratio + BigRational::one()).ceil().to_integer();
    let mut e = 0u32;
    while (BigInt::one() << e as usize) <= bound {
        e += 1;
    }
    e
}

struct Isolated {
    value: f64,
    exact: Option<BigRational>,
}

/// Isolates and refines the real roots of a square-free polynomial.
fn isolate_square_free(q: &Polynomial, tol: f64) -> Vec<Isolated> {
    if q.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let sturm = SturmChain::new(q);
    let ints = &sturm.chain[0];
    let e = root_bound_exp(q);
    let lo = Dyadic { num: -(BigInt::one() << e as usize), exp: 0 };
    let hi = Dyadic { num: BigInt::one() << e as usize, exp: 0 };
    let total = sturm.count(&lo, &hi);
    let mut out = Vec::new();
    // Depth-first, left half first, so output is ascending.
    let mut stack = vec![(lo, hi, total)];
    while let Some((a, b, n)) = stack.pop() {
        match n {
            0 => {}
            1 => out.push(refine(&sturm, ints, q, a, b, tol)),
            _ => {
                let m = Dyadic::midpoint(&a, &b);
                let left = sturm.count(&a, &m);
                stack.push((m.clone(), b, n - left));
                stack.push((a, m, left));
            }
        }
    }
    out
}

/// Narrows `(a, b]`, known to hold exactly one root, below `tol`.
fn refine(sturm: &SturmChain, ints: &[BigInt], q: &Polynomial, mut a: Dyadic, mut b: Dyadic, tol: f64) -> Isolated {
    if sign_at(ints, &b) == 0 {
        return Isolated { value: b.to_f64(), exact: Some(b.to_rational()) };
    }
    let mut sa = sign_at(ints, &a);
    while b.to_f64() - a.to_f64() >= tol {
        let m = Dyadic::midpoint(&a, &b);
        let sm = sign_at(ints, &m);
        if sm == 0 {
            return Isolated { value: m.to_f64(), exact: Some(m.to_rational()) };
        }
        let root_left = if sa != 0 { sm != sa } else { sturm.count(&a, &m) == 1 };
        if root_left {
            b = m;
        } else {
            a = m;
            sa = sm;
        }
    }
    let (lo, hi) = (a.to_f64(), b.to_f64());
    let mid = 0.5 * (lo + hi);
    Isolated { value: polish(q, mid, lo, hi), exact: None }
}

/// One guarded Newton step; kept only if it stays in the bracket and
/// does not increase the residual.
fn polish(q: &Polynomial, x: f64, lo: f64, hi: f64) -> f64 {
    let dq = q.derivative();
    let fx = q.eval_f64(x);
    let dfx = dq.eval_f64(x);
    if dfx == 0.0 || !dfx.is_finite() {
        return x;
    }
    let cand = x - fx / dfx;
    if cand >= lo && cand <= hi && q.eval_f64(cand).abs() <= fx.abs() {
        cand
    } else {
        x
    }
}

/// All real roots with multiplicity, sorted ascending.
pub fn real_roots(p: &Polynomial, tol: f64) -> Result<RootSet, PolyError> {
    let factors = p.square_free_factorization()?;
    let mut roots: Vec<Root> = Vec::new();
    for (factor, mult) in &factors {
        for iso in isolate_square_free(factor, tol) {
            roots.push(Root { value: iso.value, multiplicity: *mult, exact: iso.exact });
        }
    }
    roots.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(RootSet { roots: cluster(roots, CLUSTER_THRESHOLD) })
}

/// Distinct real roots refined to full `f64` precision, without merging
/// nearby ones.
pub fn separated_roots(p: &Polynomial) -> Result<Vec<f64>, PolyError> {
    let sqf = p.div_exact(&p.gcd(&p.derivative())?)?;
    Ok(isolate_square_free(&sqf, f64::MIN_POSITIVE).into_iter().map(|r| r.value).collect())
}

fn cluster(roots: Vec<Root>, threshold: f64) -> Vec<Root> {
    let mut out: Vec<Root> = Vec::with_capacity(roots.len());
    for r in roots {
        match out.last_mut() {
            Some(prev) if r.value - prev.value < threshold => {
                let (m1, m2) = (prev.multiplicity as f64, r.multiplicity as f64);
                prev.value = if prev.exact.is_some() {
                    prev.value
                } else if r.exact.is_some() {
                    r.value
                } else {
                    (prev.value * m1 + r.value * m2) / (m1 + m2)
                };
                prev.exact = prev.exact.take().or(r.exact);
                prev.multiplicity += r.multiplicity;
            }
            _ => out.push(r),
        }
    }
    out
}

/// `|p(r)| <= tol * sum |c_i r^i|`, evaluated exactly at the float `r`.
pub fn residual_ok(p: &Polynomial, r: f64, tol: f64) -> bool {
    let x = crate::poly::rational_from_f64(r);
    let v = p.eval(&x).abs();
    let scale = p.eval_scale(&x);
    rational_to_f64(&v) <= tol * rational_to_f64(&scale)
}

mod opt_rational {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => s.serialize_some(&r.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        Option::<String>::deserialize(d)?.map(|s| s.parse().map_err(serde::de::Error::custom)).transpose()
    }
}
