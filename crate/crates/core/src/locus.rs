//! Root-locus construction of the equilibrium curve.
//!
//! After `h = gcd(f, g)` is split off, the remaining equilibria solve
//! `f1(x) + mu*g1(x) = 0` with both leading coefficients positive and
//! `mu = ±lambda`. Poles are roots of `f1` (equilibria at `mu = 0`), zeros are
//! roots of `g1` (limits as `|mu| -> inf`). Each branch is a monotone piece of
//! `mu(x) = -f1(x)/g1(x)` between consecutive critical points, zeros of `g1`
//! and window edges.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::diagram::{Branch, BranchKind, Endpoint, EndpointKind, Span, Window};
use crate::error::PolyError;
use crate::expr::ParamAffineSystem;
use crate::poly::{rational_to_f64, Polynomial};
use crate::roots::{real_roots, RootSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Monic common factor of `f` and `g`.
    pub h: Polynomial,
    pub f1: Polynomial,
    pub g1: Polynomial,
    /// `s` in `s*(f + lambda g) = h*(f1 + mu g1)`.
    pub sign: i8,
    pub mu_is_minus_lambda: bool,
}

impl Decomposition {
    /// `mu` for a given parameter value.
    pub fn mu_of(&self, lambda: f64) -> f64 {
        if self.mu_is_minus_lambda {
            -lambda
        } else {
            lambda
        }
    }

    /// Parameter value for a given `mu`; the map is its own inverse.
    pub fn lambda_of(&self, mu: f64) -> f64 {
        self.mu_of(mu)
    }

    /// `h * (f1 + mu g1)` as a polynomial in the state, for exact `mu`.
    pub fn locus_polynomial(&self, mu: &BigRational) -> Polynomial {
        &self.h * &(&self.f1 + &self.g1.scale(mu))
    }

    /// Numerator of d(mu)/dx up to sign: `f1' g1 - f1 g1'`.
    pub fn critical_numerator(&self) -> Polynomial {
        &(&self.f1.derivative() * &self.g1) - &(&self.f1 * &self.g1.derivative())
    }

    pub fn mu_at(&self, x: f64) -> f64 {
        -self.f1.eval_f64(x) / self.g1.eval_f64(x)
    }
}

pub fn decompose(sys: &ParamAffineSystem) -> Result<Decomposition, PolyError> {
    if sys.g.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let h = sys.f.gcd(&sys.g)?;
    let f1 = sys.f.div_exact(&h)?;
    let g1 = sys.g.div_exact(&h)?;
    // A zero f1 (f identically 0) has no sign to fix.
    let sf = if f1.leading_sign() < 0 { -1 } else { 1 };
    let sg = g1.leading_sign();
    let f1 = f1.scale(&BigRational::from_integer(sf.into()));
    let g1 = g1.scale(&BigRational::from_integer(sg.into()));
    Ok(Decomposition { h, f1, g1, sign: sf as i8, mu_is_minus_lambda: sf * sg < 0 })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PoleZeroSet {
    pub poles: RootSet,
    pub zeros: RootSet,
}

pub fn poles_zeros(d: &Decomposition, tol: f64) -> Result<PoleZeroSet, PolyError> {
    let roots_or_empty = |p: &Polynomial| {
        if p.is_zero() {
            Ok(RootSet::default())
        } else {
            real_roots(p, tol)
        }
    };
    Ok(PoleZeroSet { poles: roots_or_empty(&d.f1)?, zeros: roots_or_empty(&d.g1)? })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignRegion {
    /// `None` means unbounded below.
    pub lo: Option<f64>,
    /// `None` means unbounded above.
    pub hi: Option<f64>,
    pub mu_sign: i8,
    /// Poles plus zeros strictly above the interval, with multiplicity.
    pub count_above: u32,
}

impl SignRegion {
    pub fn contains(&self, x: f64) -> bool {
        self.lo.is_none_or(|lo| x > lo) && self.hi.is_none_or(|hi| x < hi)
    }
}

/// Splits the state axis at poles and zeros; a region carries `mu > 0` exactly
/// when an odd number of poles and zeros lie above it.
pub fn sign_regions(pz: &PoleZeroSet) -> Vec<SignRegion> {
    let mut points: Vec<(f64, u32)> =
        pz.poles.roots.iter().chain(pz.zeros.roots.iter()).map(|r| (r.value, r.multiplicity)).collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, u32)> = Vec::new();
    for (v, m) in points {
        match merged.last_mut() {
            Some(last) if last.0 == v => last.1 += m,
            _ => merged.push((v, m)),
        }
    }
    let mut above: u32 = merged.iter().map(|p| p.1).sum();
    let mut out = Vec::with_capacity(merged.len() + 1);
    let mut lo = None;
    for (v, m) in &merged {
        above -= m;
        out.push(region(lo, Some(*v), above + m));
        lo = Some(*v);
    }
    out.push(region(lo, None, 0));
    // `above + m` above counted the point itself; recompute honestly.
    let mut running: u32 = 0;
    for (r, (_, m)) in out.iter_mut().rev().skip(1).zip(merged.iter().rev()) {
        running += m;
        r.count_above = running;
        r.mu_sign = if running % 2 == 1 { 1 } else { -1 };
    }
    out
}

fn region(lo: Option<f64>, hi: Option<f64>, count_above: u32) -> SignRegion {
    SignRegion { lo, hi, mu_sign: if count_above % 2 == 1 { 1 } else { -1 }, count_above }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Asymptotes {
    /// Finite limit of the parameter as `|x| -> inf`, if any.
    pub vertical: Option<f64>,
    /// State values approached as the parameter diverges (the zeros).
    pub horizontal: Vec<f64>,
}

/// `-lim_{x->inf} f1/g1` when finite.
pub fn vertical_asymptote(d: &Decomposition) -> Option<f64> {
    let (df, dg) = (d.f1.degree()?, d.g1.degree()?);
    match df.cmp(&dg) {
        std::cmp::Ordering::Greater => None,
        std::cmp::Ordering::Less => Some(0.0),
        std::cmp::Ordering::Equal => {
            let v = -(d.f1.leading()? / d.g1.leading()?);
            Some(rational_to_f64(&v))
        }
    }
}

pub fn horizontal_asymptotes(pz: &PoleZeroSet) -> Vec<f64> {
    pz.zeros.values().collect()
}

/// Roots of `h`: equilibria that do not move with the parameter.
pub fn constant_branches(d: &Decomposition, tol: f64) -> Result<RootSet, PolyError> {
    real_roots(&d.h, tol)
}

/// Default state window: the pole/zero hull padded by twice its spread on
/// each side, or `[-10, 10]` when fewer than two points exist.
pub fn default_x_window(pz: &PoleZeroSet) -> Window {
    let pts: Vec<f64> = pz.poles.values().chain(pz.zeros.values()).collect();
    let lo = pts.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = pts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = hi - lo;
    if pts.len() < 2 || spread <= 0.0 {
        let c = if pts.is_empty() { 0.0 } else { lo };
        return Window::new(c - 10.0, c + 10.0);
    }
    Window::new(lo - 2.0 * spread, hi + 2.0 * spread)
}

/// Grows `w` so it strictly contains every pole and zero.
pub fn expand_to_cover(w: Window, pz: &PoleZeroSet) -> Window {
    let pts: Vec<f64> = pz.poles.values().chain(pz.zeros.values()).collect();
    let lo = pts.iter().copied().fold(w.lo, f64::min);
    let hi = pts.iter().copied().fold(w.hi, f64::max);
    let pad = 0.1 * (hi - lo).max(1.0);
    Window::new(if lo < w.lo { lo - pad } else { w.lo }, if hi > w.hi { hi + pad } else { w.hi })
}

#[derive(Clone, Debug)]
pub struct TraceConfig {
    pub x_window: Window,
    /// Clip window in `mu` coordinates.
    pub mu_window: Window,
    pub domain_min: Option<f64>,
    pub initial_samples: usize,
    pub max_samples: usize,
    /// Largest allowed gap between consecutive samples, per axis.
    pub max_gap_mu: f64,
    pub max_gap_x: f64,
    /// Largest allowed vertical chord error, in state units.
    pub interpolation_tol: f64,
    pub root_tol: f64,
}

impl TraceConfig {
    pub fn new(x_window: Window, mu_window: Window) -> Self {
        Self {
            x_window,
            mu_window,
            domain_min: None,
            initial_samples: 512,
            max_samples: 1 << 16,
            max_gap_mu: mu_window.width() / 800.0,
            max_gap_x: x_window.width() / 600.0,
            interpolation_tol: 1e-6 * x_window.width(),
            root_tol: crate::roots::DEFAULT_ROOT_TOL,
        }
    }

    /// State range actually traced: the window clipped at the domain bound.
    pub fn x_range(&self) -> Window {
        match self.domain_min {
            Some(m) if m > self.x_window.lo => Window::new(m, self.x_window.hi.max(m)),
            _ => self.x_window,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum SplitKind {
    Edge,
    Domain,
    Critical,
    GZero,
}

#[derive(Clone, Copy, Debug)]
struct Split {
    x: f64,
    kinds: [bool; 4],
}

impl Split {
    fn has(&self, k: SplitKind) -> bool {
        self.kinds[k as usize]
    }
}

/// Samples `mu(x)` between consecutive split points. Samples are `(mu, x)`.
pub fn trace_branches(d: &Decomposition, pz: &PoleZeroSet, cfg: &TraceConfig) -> Result<Vec<Branch>, PolyError> {
    let numer = d.critical_numerator();
    if numer.is_zero() || d.f1.is_zero() {
        // mu(x) is constant: equilibria fill the whole line at one parameter value.
        return Ok(Vec::new());
    }
    let range = cfg.x_range();
    let critical = real_roots(&numer, cfg.root_tol)?;
    let h_roots = if d.h.degree().unwrap_or(0) > 0 { real_roots(&d.h, cfg.root_tol)? } else { RootSet::default() };

    let mut splits: Vec<Split> = Vec::new();
    let mut add = |x: f64, k: SplitKind| {
        if let Some(s) = splits.iter_mut().find(|s| (s.x - x).abs() <= 1e-12 * (1.0 + x.abs())) {
            s.kinds[k as usize] = true;
        } else {
            let mut kinds = [false; 4];
            kinds[k as usize] = true;
            splits.push(Split { x, kinds });
        }
    };
    add(
        range.lo,
        if cfg.domain_min.is_some_and(|m| m >= cfg.x_window.lo) { SplitKind::Domain } else { SplitKind::Edge },
    );
    add(range.hi, SplitKind::Edge);
    for c in critical.values().filter(|&c| c >= range.lo && c <= range.hi) {
        // A critical point at a zero of g1 (double zero) is not a turning point.
        if d.g1.eval_f64(c).abs() > 1e-12 * (1.0 + d.g1.eval_scale_f64(c)) {
            add(c, SplitKind::Critical);
        }
    }
    for z in pz.zeros.values().filter(|&z| z >= range.lo && z <= range.hi) {
        add(z, SplitKind::GZero);
    }
    splits.sort_by(|a, b| a.x.total_cmp(&b.x));

    let vertical = vertical_asymptote(d).is_some();
    let mut branches = Vec::new();
    for w in splits.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b.x <= a.x {
            continue;
        }
        if let Some(br) = trace_interval(d, &numer, a, b, cfg, vertical, &h_roots) {
            branches.push(br);
        }
    }
    for (i, b) in branches.iter_mut().enumerate() {
        b.id = format!("trace-{i}");
    }
    Ok(branches)
}

trait ScaleF64 {
    fn eval_scale_f64(&self, x: f64) -> f64;
}

impl ScaleF64 for Polynomial {
    fn eval_scale_f64(&self, x: f64) -> f64 {
        self.to_f64_coeffs().iter().enumerate().map(|(i, c)| (c * x.powi(i as i32)).abs()).sum()
    }
}

/// Value of `mu` at a split, with signed infinity at zeros of `g1`.
fn end_value(d: &Decomposition, s: Split, left: bool, increasing: bool) -> f64 {
    if s.has(SplitKind::GZero) {
        if left == increasing {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    } else {
        d.mu_at(s.x)
    }
}

/// Solves `mu(x) = target` on a monotone stretch by bisection.
fn solve_mu(d: &Decomposition, mut lo: f64, mut hi: f64, target: f64, increasing: bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let below = d.mu_at(mid) < target;
        if below == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // The side that lies inside the window.
    let (ml, mh) = (d.mu_at(lo), d.mu_at(hi));
    if (ml - target).abs() <= (mh - target).abs() {
        lo
    } else {
        hi
    }
}

fn trace_interval(
    d: &Decomposition,
    numer: &Polynomial,
    a: Split,
    b: Split,
    cfg: &TraceConfig,
    vertical: bool,
    h_roots: &RootSet,
) -> Option<Branch> {
    let mid = 0.5 * (a.x + b.x);
    // d(mu)/dx = -numer / g1^2.
    let increasing = numer.eval_f64(mid) < 0.0;
    let (mu_lo, mu_hi) = (cfg.mu_window.lo, cfg.mu_window.hi);
    let va = end_value(d, a, true, increasing);
    let vb = end_value(d, b, false, increasing);
    let (vmin, vmax) = if increasing { (va, vb) } else { (vb, va) };
    if vmax < mu_lo || vmin > mu_hi {
        return None;
    }
    // x at which mu enters / leaves the window.
    let mut start = a.x;
    let mut start_clipped = false;
    let mut end = b.x;
    let mut end_clipped = false;
    let enter = if increasing { mu_lo } else { mu_hi };
    let leave = if increasing { mu_hi } else { mu_lo };
    let outside_left = if increasing { va < mu_lo } else { va > mu_hi };
    let outside_right = if increasing { vb > mu_hi } else { vb < mu_lo };
    if outside_left {
        start = solve_mu(d, a.x, b.x, enter, increasing);
        start_clipped = true;
    }
    if outside_right {
        end = solve_mu(d, a.x, b.x, leave, increasing);
        end_clipped = true;
    }
    if end <= start {
        return None;
    }

    let mut xs = initial_grid(start, end, cfg.initial_samples);
    for r in h_roots.values().filter(|&r| r > start && r < end) {
        xs.push(r);
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let samples = refine(d, &xs, cfg);

    let endpoint = |s: Split, clipped: bool, x: f64| -> Endpoint {
        let kind = if clipped {
            if s.has(SplitKind::GZero) {
                EndpointKind::HorizontalAsymptote
            } else {
                EndpointKind::ParameterClip
            }
        } else if s.has(SplitKind::Critical) {
            if d.f1.eval_f64(x).abs() <= 1e-12 * (1.0 + d.f1.eval_scale_f64(x)) {
                EndpointKind::Pole
            } else {
                EndpointKind::Fold
            }
        } else if s.has(SplitKind::Domain) {
            EndpointKind::DomainBoundary
        } else if vertical {
            EndpointKind::VerticalAsymptote
        } else {
            EndpointKind::WindowEdge
        };
        Endpoint { kind, param: d.mu_at(x), x }
    };
    let start_ep = endpoint(a, start_clipped, start);
    let end_ep = endpoint(b, end_clipped, end);

    // Span boundaries at roots of h, where stability flips.
    let mut spans = Vec::new();
    let mut from = 0;
    for (i, s) in samples.iter().enumerate().skip(1).take(samples.len().saturating_sub(2)) {
        if h_roots.values().any(|r| r == s[1]) {
            spans.push(Span { start: from, end: i, label: None });
            from = i;
        }
    }
    spans.push(Span { start: from, end: samples.len() - 1, label: None });

    Some(Branch {
        id: String::new(),
        kind: BranchKind::Traced,
        samples,
        slope_sign: if increasing { 1 } else { -1 },
        start: start_ep,
        end: end_ep,
        multiplicity: 1,
        spans,
    })
}

fn initial_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| if i == n - 1 { end } else { start + (end - start) * (i as f64) / ((n - 1) as f64) }).collect()
}

/// Inserts midpoints until every consecutive pair is within the gap budget
/// and the chord tracks the curve within the interpolation tolerance.
fn refine(d: &Decomposition, xs: &[f64], cfg: &TraceConfig) -> Vec<[f64; 2]> {
    let pts: Vec<[f64; 2]> = xs.iter().map(|&x| [d.mu_at(x), x]).collect();
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(pts.len() * 2);
    out.push(pts[0]);
    let mut budget = cfg.max_samples.saturating_sub(pts.len());
    for pair in pts.windows(2) {
        // Depth-first with the right half deferred, so output stays ordered.
        let mut stack = vec![(pair[0], pair[1], 0u32)];
        while let Some((p, q, depth)) = stack.pop() {
            let needs = budget > 0 && depth < 48 && needs_split(d, p, q, cfg);
            if needs {
                let xm = 0.5 * (p[1] + q[1]);
                if xm <= p[1] || xm >= q[1] {
                    out.push(q);
                    continue;
                }
                let m = [d.mu_at(xm), xm];
                budget -= 1;
                stack.push((m, q, depth + 1));
                stack.push((p, m, depth + 1));
            } else {
                out.push(q);
            }
        }
    }
    out
}

fn needs_split(d: &Decomposition, p: [f64; 2], q: [f64; 2], cfg: &TraceConfig) -> bool {
    let dmu = (q[0] - p[0]) / cfg.max_gap_mu;
    let dx = (q[1] - p[1]) / cfg.max_gap_x;
    if dmu.hypot(dx) > 1.0 {
        return true;
    }
    let xm = 0.5 * (p[1] + q[1]);
    let mum = d.mu_at(xm);
    let span = q[0] - p[0];
    if span == 0.0 {
        return false;
    }
    let t = (mum - p[0]) / span;
    let chord_x = p[1] + t * (q[1] - p[1]);
    (chord_x - xm).abs() > cfg.interpolation_tol
}

/// Horizontal lines at the roots of `h` across the `mu` window, clipped to
/// the traced state range. Samples are `(mu, x)`.
pub fn constant_branch_lines(d: &Decomposition, roots: &RootSet, cfg: &TraceConfig) -> Vec<Branch> {
    let range = cfg.x_range();
    let w = cfg.mu_window;
    let n = 129;
    roots
        .roots
        .iter()
        .filter(|r| r.value >= range.lo && r.value <= range.hi)
        .enumerate()
        .map(|(i, r)| {
            let x = r.value;
            let mut mus: Vec<f64> = initial_grid(w.lo, w.hi, n);
            // Where the traced curve meets the line, stability may change.
            let g1 = d.g1.eval_f64(x);
            let crossing = (g1 != 0.0).then(|| d.mu_at(x)).filter(|m| *m > w.lo && *m < w.hi);
            if let Some(c) = crossing {
                mus.push(c);
                mus.sort_by(f64::total_cmp);
                mus.dedup();
            }
            let samples: Vec<[f64; 2]> = mus.iter().map(|&m| [m, x]).collect();
            let last = samples.len() - 1;
            let spans = match crossing.and_then(|c| mus.iter().position(|&m| m == c)) {
                Some(k) if r.multiplicity == 1 => {
                    vec![Span { start: 0, end: k, label: None }, Span { start: k, end: last, label: None }]
                }
                _ => vec![Span { start: 0, end: last, label: None }],
            };
            Branch {
                id: format!("const-{i}"),
                kind: BranchKind::Constant,
                samples,
                slope_sign: 0,
                start: Endpoint { kind: EndpointKind::ParameterClip, param: w.lo, x },
                end: Endpoint { kind: EndpointKind::ParameterClip, param: w.hi, x },
                multiplicity: r.multiplicity,
                spans,
            }
        })
        .collect()
}

/// Maps every sample `(mu, x)` to `(-mu, x)`; an involution.
pub fn mirror_branches(branches: &mut [Branch]) {
    for b in branches {
        for s in &mut b.samples {
            s[0] = -s[0];
        }
        b.start.param = -b.start.param;
        b.end.param = -b.end.param;
        b.slope_sign = -b.slope_sign;
        if b.kind == BranchKind::Constant {
            // Keep constant branches ordered by increasing parameter.
            b.samples.reverse();
            let last = b.samples.len() - 1;
            for s in &mut b.spans {
                let (start, end) = (last - s.end, last - s.start);
                s.start = start;
                s.end = end;
            }
            b.spans.reverse();
            std::mem::swap(&mut b.start, &mut b.end);
        }
    }
}

/// Converts a diagram traced in `mu` to the original parameter.
pub fn flip_to_lambda(mut diagram: crate::diagram::Diagram) -> crate::diagram::Diagram {
    use crate::diagram::Axis;
    if diagram.axis == Axis::Lambda {
        return diagram;
    }
    if diagram.decomposition.mu_is_minus_lambda {
        mirror_branches(&mut diagram.branches);
        diagram.asymptotes.vertical = diagram.asymptotes.vertical.map(|v| -v);
        diagram.param_window = diagram.param_window.mirrored();
    }
    diagram.axis = Axis::Lambda;
    diagram
}

/// Samples where the instantiated coefficients cancel this badly get their
/// state re-solved exactly for the stored parameter value.
const CANCELLATION_LIMIT: f64 = 1e6;

/// Moves ill-conditioned samples onto the equilibrium set so that `f + lambda g`
/// is small relative to `sum |c_i(lambda) x^i|`. Samples must be in parameter
/// coordinates.
pub fn polish_samples(diagram: &mut crate::diagram::Diagram) -> Result<(), PolyError> {
    let f = diagram.system.f.to_f64_coeffs();
    let g = diagram.system.g.to_f64_coeffs();
    let n = f.len().max(g.len());
    let coef = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    let sys = diagram.system.clone();
    for b in &mut diagram.branches {
        if b.kind != BranchKind::Traced {
            continue;
        }
        let last = b.samples.len() - 1;
        let (start_is_sample, end_is_sample) =
            ([b.start.param, b.start.x] == b.samples[0], [b.end.param, b.end.x] == b.samples[last]);
        for i in 0..=last {
            let [l, x] = b.samples[i];
            let (mut loose, mut tight, mut pw) = (0.0, 0.0, 1.0);
            for k in 0..n {
                loose += (coef(&f, k) * pw).abs() + (l * coef(&g, k) * pw).abs();
                tight += ((coef(&f, k) + l * coef(&g, k)) * pw).abs();
                pw *= x;
            }
            if loose <= CANCELLATION_LIMIT * tight {
                continue;
            }
            let gap = |j: usize| (b.samples[j][1] - x).abs();
            let radius = match (i, i == last) {
                (0, true) => 1e-6 * (1.0 + x.abs()),
                (0, false) => gap(1),
                (_, true) => gap(i - 1),
                _ => gap(i - 1).min(gap(i + 1)),
            };
            let (nl, nx) = snap_to_curve(&sys, l, x, 0.5 * radius)?;
            // Keep the order of samples along both axes.
            let keeps = |j: usize| {
                let [pl, px] = b.samples[j];
                (nx - px).signum() == (x - px).signum() && (nl - pl) * (l - pl) >= 0.0
            };
            if (i == 0 || keeps(i - 1)) && (i == last || keeps(i + 1)) {
                b.samples[i] = [nl, nx];
            }
        }
        if start_is_sample {
            [b.start.param, b.start.x] = b.samples[0];
        }
        if end_is_sample {
            [b.end.param, b.end.x] = b.samples[last];
        }
    }
    Ok(())
}

/// Nearest point of the equilibrium set to `(lambda, x)` when the residual there
/// is poor. Rounding `lambda` can leave `f + lambda g` cancelling at `x`, or with
/// no nearby real root at all near a fold, so a few neighbouring floats for the
/// parameter are tried and the exact root closest to `x`, within `radius`, is
/// taken at each.
pub fn snap_to_curve(sys: &ParamAffineSystem, lambda: f64, x: f64, radius: f64) -> Result<(f64, f64), PolyError> {
    use crate::diagram::relative_residual;
    use crate::poly::rational_from_f64;
    let mut best = (relative_residual(sys, lambda, x), lambda, x);
    if best.0 <= 1e-10 {
        return Ok((lambda, x));
    }
    let (mut up, mut down) = (lambda, lambda);
    let mut candidates = vec![lambda];
    for _ in 0..8 {
        up = up.next_up();
        down = down.next_down();
        candidates.extend([up, down]);
    }
    for l in candidates {
        let p = sys.instantiate(&rational_from_f64(l));
        if p.degree().unwrap_or(0) == 0 {
            continue;
        }
        let nearest = crate::roots::separated_roots(&p)?
            .into_iter()
            .filter(|r| (r - x).abs() <= radius)
            .min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs()));
        if let Some(r) = nearest {
            let res = relative_residual(sys, l, r);
            if res < best.0 {
                best = (res, l, r);
            }
        }
        if best.0 <= 1e-12 {
            break;
        }
    }
    Ok((best.1, best.2))
}

/// Exact check of `s*(f + lambda g) = h*(f1 + mu g1)` at both parameter powers.
pub fn identity_holds(sys: &ParamAffineSystem, d: &Decomposition) -> bool {
    let s = BigRational::from_integer(i64::from(d.sign).into());
    let mu_per_lambda = if d.mu_is_minus_lambda { -BigRational::one() } else { BigRational::one() };
    let lhs0 = sys.f.scale(&s);
    let lhs1 = sys.g.scale(&s);
    let rhs0 = &d.h * &d.f1;
    let rhs1 = (&d.h * &d.g1).scale(&mu_per_lambda);
    lhs0 == rhs0 && lhs1 == rhs1
}

/// Parameter-space sanity: every coefficient of `g1` zero means `mu` is undefined.
pub fn is_degenerate(d: &Decomposition) -> bool {
    d.g1.is_zero() || d.g1.coeffs().iter().all(|c| c.is_zero() || c.abs().is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{extract_affine_system, parse_expression};

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::from_ints(c)
    }

    fn sys(text: &str, state: &str, param: &str) -> ParamAffineSystem {
        extract_affine_system(&parse_expression(text, state, param).unwrap()).unwrap()
    }

    fn sys_fg(f: &[i64], g: &[i64]) -> ParamAffineSystem {
        ParamAffineSystem { state: "x".into(), param: "lambda".into(), f: p(f), g: p(g) }
    }

    fn values(rs: &RootSet) -> Vec<(f64, u32)> {
        rs.roots.iter().map(|r| (r.value, r.multiplicity)).collect()
    }

    #[test]
    fn decompose_pitchfork() {
        let s = sys("lambda*x - x^3", "x", "lambda");
        let d = decompose(&s).unwrap();
        assert_eq!(d.h, Polynomial::x());
        assert_eq!(d.f1, p(&[0, 0, 1]));
        assert_eq!(d.g1, p(&[1]));
        assert!(d.mu_is_minus_lambda);
        assert!(identity_holds(&s, &d));
    }

    #[test]
    fn decompose_substituted_family() {
        let s = sys("c + (1+2*c)*x - x^3", "x", "c");
        let d = decompose(&s).unwrap();
        assert_eq!(d.h, Polynomial::one());
        assert_eq!(d.f1, p(&[0, -1, 0, 1]));
        assert_eq!(d.g1, p(&[1, 2]));
        assert!(d.mu_is_minus_lambda);
        assert!(identity_holds(&s, &d));
    }

    #[test]
    fn decompose_coprime_positive() {
        let s = sys_fg(&[1, 0, 1], &[0, 1]);
        let d = decompose(&s).unwrap();
        assert_eq!(d.h, Polynomial::one());
        assert_eq!((d.f1.clone(), d.g1.clone()), (p(&[1, 0, 1]), p(&[0, 1])));
        assert!(!d.mu_is_minus_lambda);
        assert_eq!(d.sign, 1);
    }

    #[test]
    fn decompose_rejects_zero_g() {
        assert!(decompose(&sys_fg(&[1, 1], &[])).is_err());
    }

    #[test]
    fn poles_and_zeros_of_fixtures() {
        let d = decompose(&sys("lambda*x - x^3", "x", "lambda")).unwrap();
        let pz = poles_zeros(&d, 1e-12).unwrap();
        assert_eq!(values(&pz.poles), vec![(0.0, 2)]);
        assert!(pz.zeros.is_empty());

        let d = decompose(&sys("c + (1+2*c)*x - x^3", "x", "c")).unwrap();
        let pz = poles_zeros(&d, 1e-12).unwrap();
        assert_eq!(values(&pz.poles), vec![(-1.0, 1), (0.0, 1), (1.0, 1)]);
        assert_eq!(values(&pz.zeros), vec![(-0.5, 1)]);

        let inner = parse_expression("lambda - lambda*r^2 + r^4", "r", "lambda").unwrap();
        let s = extract_affine_system(&crate::expr::multiply_by_state(inner)).unwrap();
        let d = decompose(&s).unwrap();
        assert_eq!(d.f1, p(&[0, 0, 0, 0, 1]));
        assert_eq!(d.g1, p(&[-1, 0, 1]));
        assert!(d.mu_is_minus_lambda);
        let pz = poles_zeros(&d, 1e-12).unwrap();
        assert_eq!(values(&pz.poles), vec![(0.0, 4)]);
        assert_eq!(values(&pz.zeros), vec![(-1.0, 1), (1.0, 1)]);
    }

    fn rs(v: &[(f64, u32)]) -> RootSet {
        RootSet {
            roots: v
                .iter()
                .map(|&(value, multiplicity)| crate::roots::Root { value, multiplicity, exact: None })
                .collect(),
        }
    }

    #[test]
    fn sign_regions_double_pole() {
        let pz = PoleZeroSet { poles: rs(&[(0.0, 2)]), zeros: RootSet::default() };
        let r = sign_regions(&pz);
        assert_eq!(r.len(), 2);
        assert_eq!((r[0].lo, r[0].hi, r[0].count_above, r[0].mu_sign), (None, Some(0.0), 2, -1));
        assert_eq!((r[1].lo, r[1].hi, r[1].count_above, r[1].mu_sign), (Some(0.0), None, 0, -1));
    }

    #[test]
    fn sign_regions_alternate() {
        let pz = PoleZeroSet { poles: rs(&[(-1.0, 1), (0.0, 1), (1.0, 1)]), zeros: rs(&[(-0.5, 1)]) };
        let signs: Vec<i8> = sign_regions(&pz).iter().map(|r| r.mu_sign).collect();
        assert_eq!(signs, vec![-1, 1, -1, 1, -1]);
        // Cross-check against -f1/g1 at interval midpoints.
        let d = Decomposition {
            h: Polynomial::one(),
            f1: p(&[0, -1, 0, 1]),
            g1: p(&[1, 2]),
            sign: -1,
            mu_is_minus_lambda: true,
        };
        for (x, s) in [(-2.0, -1), (-0.75, 1), (-0.25, -1), (0.5, 1), (2.0, -1)] {
            assert_eq!(d.mu_at(x).signum() as i8, s, "x = {x}");
        }
    }

    #[test]
    fn sign_regions_empty() {
        let r = sign_regions(&PoleZeroSet::default());
        assert_eq!(r, vec![SignRegion { lo: None, hi: None, mu_sign: -1, count_above: 0 }]);
    }

    fn dec(f1: &[i64], g1: &[i64]) -> Decomposition {
        Decomposition { h: Polynomial::one(), f1: p(f1), g1: p(g1), sign: 1, mu_is_minus_lambda: false }
    }

    #[test]
    fn vertical_asymptote_cases() {
        assert_eq!(vertical_asymptote(&dec(&[0, -1, 0, 1], &[1, 2])), None);
        assert_eq!(vertical_asymptote(&dec(&[1], &[0, 1])), Some(0.0));
        let d = dec(&[-1, 0, 1], &[2, 0, 1]);
        assert_eq!(vertical_asymptote(&d), Some(-1.0));
        // Independent check: -f1/g1 converges to the same value.
        for x in [1e3, 1e4] {
            assert!((d.mu_at(x) + 1.0).abs() < 4.0 / (x * x));
        }
    }

    #[test]
    fn horizontal_asymptotes_are_zeros() {
        let pz = PoleZeroSet { poles: rs(&[(0.0, 4)]), zeros: rs(&[(-1.0, 1), (1.0, 1)]) };
        assert_eq!(horizontal_asymptotes(&pz), vec![-1.0, 1.0]);
        assert!(horizontal_asymptotes(&PoleZeroSet::default()).is_empty());
    }

    #[test]
    fn constant_branch_roots() {
        let d = decompose(&sys("lambda*x - x^3", "x", "lambda")).unwrap();
        assert_eq!(values(&constant_branches(&d, 1e-12).unwrap()), vec![(0.0, 1)]);
        let d = decompose(&sys("c + (1+2*c)*x - x^3", "x", "c")).unwrap();
        assert!(constant_branches(&d, 1e-12).unwrap().is_empty());
    }

    fn cfg(xw: (f64, f64), mw: (f64, f64)) -> TraceConfig {
        TraceConfig::new(Window::new(xw.0, xw.1), Window::new(mw.0, mw.1))
    }

    #[test]
    fn trace_parabola_splits_at_vertex() {
        let d = decompose(&sys("lambda*x - x^3", "x", "lambda")).unwrap();
        let pz = poles_zeros(&d, 1e-12).unwrap();
        let br = trace_branches(&d, &pz, &cfg((-10.0, 10.0), (-20.0, 20.0))).unwrap();
        assert_eq!(br.len(), 2);
        assert_eq!(br[0].end.kind, EndpointKind::Pole);
        assert_eq!(br[1].start.kind, EndpointKind::Pole);
        assert_eq!((br[0].end.param, br[0].end.x), (0.0, 0.0));
        assert_eq!(br[0].start.kind, EndpointKind::ParameterClip);
        assert_eq!(br[0].slope_sign, 1);
        assert_eq!(br[1].slope_sign, -1);
        for b in &br {
            for s in &b.samples {
                assert!((s[0] + s[1] * s[1]).abs() <= 1e-12 * (1.0 + s[0].abs()));
                assert!(s[0] >= -20.0 - 1e-9);
            }
        }
    }

    #[test]
    fn trace_monotone_line() {
        let d = dec(&[0, 1], &[1]);
        let pz = poles_zeros(&d, 1e-12).unwrap();
        let br = trace_branches(&d, &pz, &cfg((-10.0, 10.0), (-20.0, 20.0))).unwrap();
        assert_eq!(br.len(), 1);
        assert_eq!(br[0].slope_sign, -1);
        assert_eq!(br[0].start.kind, EndpointKind::WindowEdge);
    }

    #[test]
    fn trace_approaches_horizontal_asymptote() {
        let d = decompose(&sys("c + (1+2*c)*x - x^3", "x", "c")).unwrap();
        let pz = poles_zeros(&d, 1e-12).unwrap();
        let br = trace_branches(&d, &pz, &cfg((-5.0, 5.0), (-20.0, 20.0))).unwrap();
        let near_zero: Vec<_> =
            br.iter().flat_map(|b| [b.start, b.end]).filter(|e| e.kind == EndpointKind::HorizontalAsymptote).collect();
        assert_eq!(near_zero.len(), 2);
        for e in near_zero {
            assert!((e.x + 0.5).abs() < 0.1);
            assert!((e.param.abs() - 20.0).abs() < 1e-6);
        }
        // Branches pass mu = 0 at every pole.
        for pole in [-1.0, 0.0, 1.0] {
            assert!(br.iter().any(|b| b.samples.first().unwrap()[1] <= pole && b.samples.last().unwrap()[1] >= pole));
        }
    }

    #[test]
    fn slope_sign_constant_along_branches() {
        for text in ["c + (1+2*c)*x - x^3", "c + (1+0.5*c)*x - x^3", "lambda*x - x^3"] {
            let param = if text.contains('c') { "c" } else { "lambda" };
            let d = decompose(&sys(text, "x", param)).unwrap();
            let pz = poles_zeros(&d, 1e-12).unwrap();
            for b in trace_branches(&d, &pz, &cfg((-8.0, 8.0), (-20.0, 20.0))).unwrap() {
                for w in b.samples.windows(2) {
                    let dm = w[1][0] - w[0][0];
                    assert!(dm == 0.0 || dm.signum() as i8 == b.slope_sign, "{text}: {w:?}");
                }
            }
        }
    }

    #[test]
    fn mirror_is_involution() {
        let d = decompose(&sys("c + (1+2*c)*x - x^3", "x", "c")).unwrap();
        let pz = poles_zeros(&d, 1e-12).unwrap();
        let c = cfg((-5.0, 5.0), (-20.0, 20.0));
        let mut br = trace_branches(&d, &pz, &c).unwrap();
        br.extend(constant_branch_lines(&d, &rs(&[(3.0, 1)]), &c));
        let orig = br.clone();
        mirror_branches(&mut br);
        assert_ne!(br, orig);
        mirror_branches(&mut br);
        assert_eq!(br, orig);
    }

    #[test]
    fn domain_clip() {
        let inner = parse_expression("lambda - lambda*r^2 + r^4", "r", "lambda").unwrap();
        let s = extract_affine_system(&crate::expr::multiply_by_state(inner)).unwrap();
        let d = decompose(&s).unwrap();
        let pz = poles_zeros(&d, 1e-12).unwrap();
        let mut c = cfg((-5.0, 5.0), (-20.0, 20.0));
        c.domain_min = Some(0.0);
        let br = trace_branches(&d, &pz, &c).unwrap();
        assert_eq!(br.len(), 3);
        assert!(br.iter().all(|b| b.samples.iter().all(|s| s[1] >= 0.0)));
        assert_eq!(br[0].start.kind, EndpointKind::Pole);
        assert_eq!(br[0].end.kind, EndpointKind::HorizontalAsymptote);
        assert_eq!(br[1].end.kind, EndpointKind::Fold);
        assert!((br[1].end.x - 2f64.sqrt()).abs() < 1e-12);
    }
}
