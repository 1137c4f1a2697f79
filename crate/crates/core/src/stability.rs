//! Stability labels and bifurcation points.
//!
//! Labels come from sign alternation: `f + lambda*g` is a polynomial in `x`,
//! so between consecutive simple roots its sign flips, and the sign just above
//! a root decides whether that root repels (positive) or attracts.

use crate::diagram::{BifurcationKind, BifurcationPoint, BranchKind, Diagram, StabilityLabel};
use crate::error::{PolyError, StabilityError};
use crate::expr::ParamAffineSystem;
use crate::locus::Decomposition;
use crate::roots::{real_roots, CLUSTER_THRESHOLD};

/// Relative threshold for a vanishing derivative.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Base number of parameter columns used for voting.
pub const VOTE_COLUMNS: usize = 257;
/// Largest tolerated minority share of a span's votes.
pub const VOTE_SPLIT: f64 = 0.1;

/// Label from the sign of d/dx[f + lambda g] at `x`.
pub fn derivative_label(sys: &ParamAffineSystem, lambda: f64, x: f64, eps: f64) -> StabilityLabel {
    let d = sys.derivative_f64(x, lambda);
    let f = sys.f.to_f64_coeffs();
    let g = sys.g.to_f64_coeffs();
    let ax = x.abs().max(1.0);
    let mut scale = 0.0;
    let mut pw = 1.0;
    for i in 1..f.len().max(g.len()) {
        let c = f.get(i).copied().unwrap_or(0.0) + lambda * g.get(i).copied().unwrap_or(0.0);
        scale += (i as f64) * c.abs() * pw;
        pw *= ax;
    }
    if d.abs() <= eps * scale || d == 0.0 {
        StabilityLabel::Degenerate
    } else if d < 0.0 {
        StabilityLabel::Stable
    } else {
        StabilityLabel::Unstable
    }
}

/// Labels equilibria given top-down as `(x, multiplicity)`, starting from the
/// sign of `f + lambda g` at `probe`, which must lie above all of them.
pub fn alternation_labels(
    sys: &ParamAffineSystem,
    lambda: f64,
    probe: f64,
    points: &[(f64, u32)],
) -> Vec<StabilityLabel> {
    let mut sign = sys.eval_f64(probe, lambda).signum();
    points
        .iter()
        .map(|&(_, m)| {
            if m == 1 {
                let label = if sign > 0.0 { StabilityLabel::Unstable } else { StabilityLabel::Stable };
                sign = -sign;
                label
            } else {
                if m % 2 == 1 {
                    sign = -sign;
                }
                StabilityLabel::Degenerate
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default)]
struct Votes {
    stable: usize,
    unstable: usize,
    degenerate: usize,
}

impl Votes {
    fn add(&mut self, l: StabilityLabel) {
        match l {
            StabilityLabel::Stable => self.stable += 1,
            StabilityLabel::Unstable => self.unstable += 1,
            StabilityLabel::Degenerate => self.degenerate += 1,
        }
    }

    fn total(&self) -> usize {
        self.stable + self.unstable + self.degenerate
    }

    fn winner(&self) -> (StabilityLabel, usize) {
        [
            (StabilityLabel::Stable, self.stable),
            (StabilityLabel::Unstable, self.unstable),
            (StabilityLabel::Degenerate, self.degenerate),
        ]
        .into_iter()
        .max_by_key(|&(_, n)| n)
        .unwrap()
    }

    fn decided(&self) -> bool {
        let (_, n) = self.winner();
        self.total() > 0 && (self.total() - n) as f64 <= VOTE_SPLIT * self.total() as f64
    }
}

/// Probe height for the alternation rule: just above the state window.
pub fn probe_height(diagram: &Diagram) -> f64 {
    diagram.x_window.hi + 1e-3 * diagram.x_window.width()
}

/// Casts one column's votes into `votes[branch][span]`.
fn vote_column(diagram: &Diagram, p: f64, probe: f64, votes: &mut [Vec<Votes>]) {
    let pts = diagram.column(p);
    if pts.is_empty() {
        return;
    }
    let xtol = 1e-6 * diagram.x_window.width();
    if pts.windows(2).any(|w| w[0].x - w[1].x <= xtol) {
        return;
    }
    let ptol = 1e-6 * diagram.param_window.width();
    let near_end = pts.iter().any(|c| {
        let b = &diagram.branches[c.branch];
        let (lo, hi) = b.param_range();
        b.kind == BranchKind::Traced && ((p - lo).abs() <= ptol || (p - hi).abs() <= ptol)
    });
    if near_end {
        return;
    }
    let top_down: Vec<(f64, u32)> = pts.iter().map(|c| (c.x, c.multiplicity)).collect();
    let labels = alternation_labels(&diagram.system, p, probe, &top_down);
    for (c, l) in pts.iter().zip(labels) {
        votes[c.branch][c.span].add(l);
    }
}

/// Step-8 labeling: top-down alternation over parameter columns, majority
/// vote per span, with denser columns inside any span that stays split.
pub fn classify_by_alternation(mut diagram: Diagram) -> Result<Diagram, StabilityError> {
    let probe = probe_height(&diagram);
    let w = diagram.param_window;
    let mut votes: Vec<Vec<Votes>> = diagram.branches.iter().map(|b| vec![Votes::default(); b.spans.len()]).collect();
    for i in 0..VOTE_COLUMNS {
        let p = w.lo + w.width() * (i as f64) / ((VOTE_COLUMNS - 1) as f64);
        vote_column(&diagram, p, probe, &mut votes);
    }
    for bi in 0..diagram.branches.len() {
        for si in 0..diagram.branches[bi].spans.len() {
            if votes[bi][si].decided() {
                continue;
            }
            // Refine inside the span's own parameter range.
            let b = &diagram.branches[bi];
            let s = &b.spans[si];
            let (a, z) = (b.samples[s.start][0], b.samples[s.end][0]);
            let (lo, hi) = (a.min(z), a.max(z));
            let mut local: Vec<Vec<Votes>> =
                diagram.branches.iter().map(|b| vec![Votes::default(); b.spans.len()]).collect();
            let n = 129;
            for k in 1..n {
                let p = lo + (hi - lo) * (k as f64) / (n as f64);
                vote_column(&diagram, p, probe, &mut local);
            }
            let v = local[bi][si];
            if v.total() > 0 {
                votes[bi][si] = v;
            }
        }
    }
    for (bi, b) in diagram.branches.iter_mut().enumerate() {
        for (si, s) in b.spans.iter_mut().enumerate() {
            let v = votes[bi][si];
            if v.total() == 0 {
                // No usable column reaches this span: fall back to linearization.
                let mid = &b.samples[(s.start + s.end) / 2];
                s.label = Some(derivative_label(&diagram.system, mid[0], mid[1], DEGENERACY_TOL));
                continue;
            }
            let (label, agree) = v.winner();
            if !v.decided() {
                return Err(StabilityError::AmbiguousLabel { branch: b.id.clone(), agree, total: v.total() });
            }
            s.label = Some(label);
        }
    }
    Ok(diagram)
}

/// Labels every span by the majority derivative sign over its samples.
/// Degenerate samples only win when nothing else is present.
pub fn classify_by_derivative(mut diagram: Diagram) -> Diagram {
    let sys = diagram.system.clone();
    for b in &mut diagram.branches {
        for s in &mut b.spans {
            let mut v = Votes::default();
            for smp in &b.samples[s.start..=s.end] {
                v.add(derivative_label(&sys, smp[0], smp[1], DEGENERACY_TOL));
            }
            s.label = Some(if v.stable + v.unstable == 0 {
                StabilityLabel::Degenerate
            } else if v.stable >= v.unstable {
                StabilityLabel::Stable
            } else {
                StabilityLabel::Unstable
            });
        }
    }
    diagram
}

/// Samples where the span label disagrees with a clear derivative sign.
pub fn derivative_disagreements(diagram: &Diagram) -> usize {
    let mut n = 0;
    for b in &diagram.branches {
        for s in &b.spans {
            let Some(label) = s.label else { continue };
            for smp in &b.samples[s.start..=s.end] {
                let d = derivative_label(&diagram.system, smp[0], smp[1], DEGENERACY_TOL);
                if d != StabilityLabel::Degenerate && label != StabilityLabel::Degenerate && d != label {
                    n += 1;
                }
            }
        }
    }
    n
}

/// Folds at critical points of `mu(x)` and crossings of the traced curve with
/// constant branches, in parameter coordinates of `diagram.axis`.
pub fn detect_bifurcations(diagram: &Diagram, d: &Decomposition) -> Result<Vec<BifurcationPoint>, PolyError> {
    let numer = d.critical_numerator();
    if numer.is_zero() || d.f1.is_zero() {
        return Ok(Vec::new());
    }
    let crit = real_roots(&numer, diagram.tolerances.root)?;
    let h_roots =
        if d.h.degree().unwrap_or(0) > 0 { real_roots(&d.h, diagram.tolerances.root)? } else { Default::default() };
    let flip = diagram.axis == crate::diagram::Axis::Lambda && d.mu_is_minus_lambda;
    let to_param = |mu: f64| if flip { -mu } else { mu };
    let x_lo = diagram.domain_min.map_or(diagram.x_window.lo, |m| m.max(diagram.x_window.lo));
    let in_window = |x: f64, p: f64| x >= x_lo && x <= diagram.x_window.hi && diagram.param_window.contains(p);
    let near = |a: f64, b: f64| (a - b).abs() <= CLUSTER_THRESHOLD * (1.0 + a.abs());

    let mut out = Vec::new();
    for c in &crit.roots {
        if h_roots.values().any(|r| near(r, c.value)) {
            continue;
        }
        let g1 = d.g1.eval_f64(c.value);
        if g1 == 0.0 {
            continue;
        }
        let p = to_param(d.mu_at(c.value));
        if !in_window(c.value, p) {
            continue;
        }
        let kind = if c.multiplicity == 1 { BifurcationKind::Fold } else { BifurcationKind::Degenerate };
        let (p, x) = if diagram.axis == crate::diagram::Axis::Lambda {
            crate::locus::snap_to_curve(&diagram.system, p, c.value, 1e-6 * (1.0 + c.value.abs()))?
        } else {
            (p, c.value)
        };
        out.push(point(diagram, kind, p, x));
    }
    for r in &h_roots.roots {
        let g1 = d.g1.eval_f64(r.value);
        if g1 == 0.0 {
            continue;
        }
        let p = to_param(d.mu_at(r.value));
        if !in_window(r.value, p) {
            continue;
        }
        let mult_n = crit.multiplicity_near(r.value, CLUSTER_THRESHOLD * (1.0 + r.value.abs()));
        let m = r.multiplicity + 1 + mult_n;
        let kind = match (m, r.multiplicity, mult_n) {
            (2, _, _) => BifurcationKind::Transcritical,
            (3, 1, 1) => BifurcationKind::Pitchfork,
            _ => BifurcationKind::Degenerate,
        };
        out.push(point(diagram, kind, p, r.value));
    }
    out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.x.total_cmp(&b.x)));
    Ok(out)
}

fn point(diagram: &Diagram, kind: BifurcationKind, lambda: f64, x: f64) -> BifurcationPoint {
    let tol = |v: f64| 1e-7 * (1.0 + v.abs());
    let branches = diagram
        .branches
        .iter()
        .filter(|b| {
            b.samples
                .iter()
                .chain([[b.start.param, b.start.x], [b.end.param, b.end.x]].iter())
                .any(|s| (s[0] - lambda).abs() <= tol(lambda) && (s[1] - x).abs() <= tol(x))
                || (b.kind == BranchKind::Constant
                    && (b.samples[0][1] - x).abs() <= tol(x)
                    && b.intersect(lambda, 0.0).is_some())
        })
        .map(|b| b.id.clone())
        .collect();
    BifurcationPoint { kind, lambda, x, branches }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{extract_affine_system, parse_expression};

    fn sys(text: &str, state: &str, param: &str) -> ParamAffineSystem {
        extract_affine_system(&parse_expression(text, state, param).unwrap()).unwrap()
    }

    #[test]
    fn derivative_labels() {
        let s = sys("lambda*x - x^3", "x", "lambda");
        assert_eq!(derivative_label(&s, 1.0, 1.0, DEGENERACY_TOL), StabilityLabel::Stable);
        assert_eq!(derivative_label(&s, 0.0, 0.0, DEGENERACY_TOL), StabilityLabel::Degenerate);
        assert_eq!(derivative_label(&s, 1.0, 0.0, DEGENERACY_TOL), StabilityLabel::Unstable);
        let s = sys("c + (1+2*c)*x - x^3", "x", "c");
        assert_eq!(derivative_label(&s, 0.0, 1.0, DEGENERACY_TOL), StabilityLabel::Stable);
    }

    #[test]
    fn alternation_pitchfork_columns() {
        use StabilityLabel::*;
        let s = sys("lambda*x - x^3", "x", "lambda");
        let pts = [(1.0, 1), (0.0, 1), (-1.0, 1)];
        assert_eq!(alternation_labels(&s, 1.0, 10.0, &pts), vec![Stable, Unstable, Stable]);
        assert_eq!(alternation_labels(&s, -1.0, 10.0, &[(0.0, 1)]), vec![Stable]);
    }

    #[test]
    fn alternation_polar_column() {
        use StabilityLabel::*;
        let inner = parse_expression("lambda - lambda*r^2 + r^4", "r", "lambda").unwrap();
        let s = extract_affine_system(&crate::expr::multiply_by_state(inner)).unwrap();
        let (a, b) = (1.902_113_032_590_307, 1.1755705045849463);
        let labels = alternation_labels(&s, 5.0, 10.0, &[(a, 1), (b, 1), (0.0, 1)]);
        assert_eq!(labels, vec![Unstable, Stable, Unstable]);
        for ((x, _), l) in [(a, 1), (b, 1), (0.0, 1)].iter().zip(&labels) {
            assert_eq!(derivative_label(&s, 5.0, *x, DEGENERACY_TOL), *l);
        }
    }

    #[test]
    fn alternation_skips_even_multiplicity() {
        use StabilityLabel::*;
        // x^2 (x - 1) at lambda = 0 with g = 1: roots 1 (simple), 0 (double).
        let s = ParamAffineSystem {
            state: "x".into(),
            param: "lambda".into(),
            f: crate::poly::Polynomial::from_ints(&[0, 0, -1, 1]),
            g: crate::poly::Polynomial::one(),
        };
        assert_eq!(alternation_labels(&s, 0.0, 5.0, &[(1.0, 1), (0.0, 2)]), vec![Unstable, Degenerate]);
    }
}
