//! The diagram object shared by the locus, stability, oracle and render stages.

use serde::{Deserialize, Serialize};

use crate::expr::ParamAffineSystem;
use crate::locus::{Asymptotes, Decomposition, SignRegion};
use crate::poly::rational_from_f64;
use crate::poly::rational_to_f64;
use crate::roots::RootSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityLabel {
    Stable,
    Unstable,
    Degenerate,
}

impl StabilityLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            StabilityLabel::Stable => "stable",
            StabilityLabel::Unstable => "unstable",
            StabilityLabel::Degenerate => "degenerate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchKind {
    /// A piece of the curve `mu(x) = -f1(x)/g1(x)`.
    Traced,
    /// A root of the common factor `h`, present for every parameter value.
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointKind {
    /// Critical point of `mu(x)` that is also a pole (`mu = 0`).
    Pole,
    /// Critical point of `mu(x)`: the branch turns back in the parameter.
    Fold,
    /// Clipped at the parameter window while approaching a zero of `g1`.
    HorizontalAsymptote,
    /// Window edge while the parameter tends to the finite vertical asymptote.
    VerticalAsymptote,
    WindowEdge,
    /// Clipped at the parameter window away from any asymptote.
    ParameterClip,
    DomainBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Endpoint {
    pub kind: EndpointKind,
    pub param: f64,
    pub x: f64,
}

/// A run of samples `start..=end` sharing one stability label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub label: Option<StabilityLabel>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub id: String,
    pub kind: BranchKind,
    /// `(param, x)` pairs. Traced branches are ordered by increasing `x`,
    /// constant branches by increasing parameter.
    pub samples: Vec<[f64; 2]>,
    /// Sign of d(param)/dx along a traced branch; 0 for constant branches.
    pub slope_sign: i8,
    pub start: Endpoint,
    pub end: Endpoint,
    /// Multiplicity of the equilibrium along the branch (root multiplicity in
    /// `h` for constant branches, 1 for traced ones).
    pub multiplicity: u32,
    pub spans: Vec<Span>,
}

impl Branch {
    pub fn span_of_segment(&self, seg: usize) -> usize {
        self.spans
            .iter()
            .position(|s| seg >= s.start && seg < s.end.max(s.start + 1))
            .unwrap_or(self.spans.len().saturating_sub(1))
    }

    pub fn label_of_sample(&self, i: usize) -> Option<StabilityLabel> {
        self.spans.iter().find(|s| i >= s.start && i <= s.end).and_then(|s| s.label)
    }

    pub fn param_range(&self) -> (f64, f64) {
        self.samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s[0]), hi.max(s[0])))
    }

    /// Intersection with the vertical line `param = p`: `(x, segment index)`.
    /// Points within `snap` beyond an end are attached to that end.
    pub fn intersect(&self, p: f64, snap: f64) -> Option<(f64, usize)> {
        let s = &self.samples;
        let n = s.len();
        if n == 0 {
            return None;
        }
        let (lo, hi) = self.param_range();
        if p < lo - snap || p > hi + snap {
            return None;
        }
        if n == 1 {
            return Some((s[0][1], 0));
        }
        let p = p.clamp(lo, hi);
        let ascending = s[n - 1][0] >= s[0][0];
        let k = if ascending { s.partition_point(|v| v[0] < p) } else { s.partition_point(|v| v[0] > p) };
        if k == 0 {
            return Some((s[0][1], 0));
        }
        if k >= n {
            return Some((s[n - 1][1], n - 2));
        }
        let (a, b) = (s[k - 1], s[k]);
        let dp = b[0] - a[0];
        let x = if dp == 0.0 { a[1] } else { a[1] + (p - a[0]) / dp * (b[1] - a[1]) };
        Some((x, k - 1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    pub fn is_valid(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite() && self.hi > self.lo
    }

    pub fn mirrored(&self) -> Self {
        Self { lo: -self.hi, hi: -self.lo }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Horizontal coordinate is the normalized locus gain `mu`.
    Mu,
    /// Horizontal coordinate is the original parameter.
    Lambda,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BifurcationKind {
    Fold,
    Transcritical,
    Pitchfork,
    Degenerate,
}

impl BifurcationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BifurcationKind::Fold => "fold",
            BifurcationKind::Transcritical => "transcritical",
            BifurcationKind::Pitchfork => "pitchfork",
            BifurcationKind::Degenerate => "degenerate",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BifurcationPoint {
    pub kind: BifurcationKind,
    pub lambda: f64,
    pub x: f64,
    pub branches: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Width of the final isolating interval for every root.
    pub root: f64,
    /// Relative equilibrium residual bound.
    pub residual: f64,
    /// Roots closer than this are merged.
    pub cluster: f64,
    /// Relative threshold below which d/dx[f + lambda g] counts as zero.
    pub degeneracy: f64,
    /// Max vertical deviation of a chord from the curve, in state units.
    pub interpolation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagram {
    pub expression: String,
    pub state: String,
    pub parameter: String,
    pub axis: Axis,
    pub system: ParamAffineSystem,
    pub decomposition: Decomposition,
    pub poles: RootSet,
    pub zeros: RootSet,
    pub sign_regions: Vec<SignRegion>,
    pub asymptotes: Asymptotes,
    pub branches: Vec<Branch>,
    pub bifurcation_points: Vec<BifurcationPoint>,
    pub x_window: Window,
    pub param_window: Window,
    pub domain_min: Option<f64>,
    pub tolerances: Tolerances,
}

/// One equilibrium on a vertical line through the diagram.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColumnPoint {
    pub x: f64,
    pub branch: usize,
    pub span: usize,
    pub multiplicity: u32,
}

impl Diagram {
    /// Tolerance for attaching a column to a branch end.
    pub fn snap(&self) -> f64 {
        1e-9 * self.param_window.width().max(1.0)
    }

    /// Every branch crossing `param = p`, sorted by decreasing `x`.
    pub fn column(&self, p: f64) -> Vec<ColumnPoint> {
        let snap = self.snap();
        let mut pts: Vec<ColumnPoint> = self
            .branches
            .iter()
            .enumerate()
            .filter_map(|(bi, b)| {
                b.intersect(p, snap).map(|(x, seg)| ColumnPoint {
                    x,
                    branch: bi,
                    span: b.span_of_segment(seg),
                    multiplicity: b.multiplicity,
                })
            })
            .collect();
        pts.sort_by(|a, b| b.x.total_cmp(&a.x).then(a.branch.cmp(&b.branch)));
        pts
    }

    /// Like [`Diagram::column`], with each interpolated point replaced by the
    /// root of `f + p*g` bracketed by its segment.
    pub fn column_refined(&self, p: f64) -> Vec<ColumnPoint> {
        let mut pts = self.column(p);
        for c in &mut pts {
            let b = &self.branches[c.branch];
            if b.kind != BranchKind::Traced || b.samples.len() < 2 {
                continue;
            }
            let seg = b.intersect(p, self.snap()).map_or(0, |(_, s)| s);
            let (mut lo, mut hi) = (b.samples[seg][1], b.samples[seg + 1][1]);
            let f = |x: f64| self.system.eval_f64(x, p);
            let (flo, fhi) = (f(lo), f(hi));
            if flo == 0.0 {
                c.x = lo;
                continue;
            }
            if fhi == 0.0 {
                c.x = hi;
                continue;
            }
            if flo.signum() == fhi.signum() {
                continue;
            }
            let up = flo < 0.0;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if (f(mid) < 0.0) == up {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            c.x = 0.5 * (lo + hi);
        }
        pts.sort_by(|a, b| b.x.total_cmp(&a.x).then(a.branch.cmp(&b.branch)));
        pts
    }

    pub fn sample_count(&self) -> usize {
        self.branches.iter().map(|b| b.samples.len()).sum()
    }

    /// Largest relative residual `|f + lambda g| / sum |c_i(lambda) x^i|` over
    /// all samples, evaluated exactly at the stored floats.
    pub fn max_relative_residual(&self) -> f64 {
        self.branches
            .iter()
            .flat_map(|b| b.samples.iter())
            .map(|s| relative_residual(&self.system, s[0], s[1]))
            .fold(0.0, f64::max)
    }
}

/// `|f(x) + lambda g(x)| / sum_i |(f_i + lambda g_i) x^i|`, exact at the given floats.
pub fn relative_residual(sys: &ParamAffineSystem, lambda: f64, x: f64) -> f64 {
    let l = rational_from_f64(lambda);
    let xr = rational_from_f64(x);
    let p = sys.instantiate(&l);
    let v = p.eval(&xr);
    let scale = p.eval_scale(&xr);
    if num_traits::Zero::is_zero(&v) {
        return 0.0;
    }
    rational_to_f64(&(num_traits::Signed::abs(&v) / scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn endpoint() -> Endpoint {
        Endpoint { kind: EndpointKind::WindowEdge, param: 0.0, x: 0.0 }
    }

    fn branch(samples: Vec<[f64; 2]>) -> Branch {
        let n = samples.len();
        Branch {
            id: "b".into(),
            kind: BranchKind::Traced,
            samples,
            slope_sign: 1,
            start: endpoint(),
            end: endpoint(),
            multiplicity: 1,
            spans: vec![Span { start: 0, end: n - 1, label: None }],
        }
    }

    #[test]
    fn intersect_interpolates_both_directions() {
        let up = branch(vec![[0.0, 0.0], [1.0, 1.0], [2.0, 4.0]]);
        assert_eq!(up.intersect(1.5, 0.0), Some((2.5, 1)));
        let down = branch(vec![[2.0, 0.0], [1.0, 1.0], [0.0, 4.0]]);
        assert_eq!(down.intersect(0.5, 0.0), Some((2.5, 1)));
        assert_eq!(down.intersect(2.0, 0.0), Some((0.0, 0)));
        assert_eq!(down.intersect(2.5, 0.0), None);
        assert_eq!(down.intersect(2.0 + 1e-12, 1e-9), Some((0.0, 0)));
    }

    #[test]
    fn single_sample_branch() {
        let b = branch(vec![[1.0, 3.0]]);
        assert_eq!(b.intersect(1.0, 0.0), Some((3.0, 0)));
        assert_eq!(b.intersect(1.1, 0.0), None);
    }
}
