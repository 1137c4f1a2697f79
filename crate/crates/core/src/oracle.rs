//! Brute-force check: solve `f + lambda*g = 0` column by column with the exact
//! root isolator and compare against the traced diagram.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::diagram::{Diagram, StabilityLabel, Window};
use crate::error::OracleError;
use crate::expr::ParamAffineSystem;
use crate::poly::{rational_from_f64, rational_to_f64};
use crate::roots::real_roots;
use crate::stability::{derivative_label, DEGENERACY_TOL};

/// Columns this close to a bifurcation are not held to the comparison.
pub const EXEMPT_RADIUS: f64 = 1e-3;
/// Extra columns are placed this close to each bifurcation.
pub const CLUSTER_RADIUS: f64 = 1e-2;
pub const CLUSTER_POINTS: usize = 10;
/// Match radius as a fraction of the state window height.
pub const MATCH_FRACTION: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleEquilibrium {
    pub x: f64,
    pub multiplicity: u32,
    pub stability: StabilityLabel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleColumn {
    pub lambda: f64,
    /// Ascending in `x`.
    pub equilibria: Vec<OracleEquilibrium>,
}

pub fn oracle_equilibria(sys: &ParamAffineSystem, lambda: &BigRational, tol: f64) -> Result<OracleColumn, OracleError> {
    let p = sys.instantiate(lambda);
    if p.is_zero() {
        return Err(OracleError::IdenticallyZero(lambda.to_string()));
    }
    let lf = rational_to_f64(lambda);
    let roots = real_roots(&p, tol).map_err(|_| OracleError::IdenticallyZero(lambda.to_string()))?;
    let equilibria = roots
        .roots
        .iter()
        .map(|r| OracleEquilibrium {
            x: r.value,
            multiplicity: r.multiplicity,
            stability: if r.multiplicity > 1 {
                StabilityLabel::Degenerate
            } else {
                derivative_label(sys, lf, r.value, DEGENERACY_TOL)
            },
        })
        .collect();
    Ok(OracleColumn { lambda: lf, equilibria })
}

/// `n` exact rationals evenly spaced over the window, endpoints included.
pub fn uniform_grid(w: Window, n: usize) -> Vec<BigRational> {
    let lo = rational_from_f64(w.lo);
    let hi = rational_from_f64(w.hi);
    let n = n.max(2);
    let den = BigRational::from_integer(((n - 1) as i64).into());
    (0..n).map(|i| &lo + (&hi - &lo) * BigRational::from_integer((i as i64).into()) / &den).collect()
}

/// `CLUSTER_POINTS` columns within `CLUSTER_RADIUS` of each location, kept
/// inside the window.
pub fn cluster_grid(centers: &[f64], w: Window) -> Vec<BigRational> {
    let half = (CLUSTER_POINTS / 2) as i64;
    let mut out = Vec::new();
    for &c in centers {
        // Snap the center to a short dyadic so the columns stay cheap.
        let scaled = (c * 1048576.0).round().to_i64().unwrap_or(0);
        let center = BigRational::new(scaled.into(), 1048576.into());
        for k in 1..=half {
            let off = BigRational::new((k * 2).into(), 1000.into());
            for v in [&center - &off, &center + &off] {
                if w.contains(rational_to_f64(&v)) {
                    out.push(v);
                }
            }
        }
    }
    out
}

/// Uniform grid plus clusters around every bifurcation of `diagram`.
pub fn default_grid(diagram: &Diagram, n: usize) -> Vec<BigRational> {
    let mut grid = uniform_grid(diagram.param_window, n);
    let centers: Vec<f64> = diagram.bifurcation_points.iter().map(|b| b.lambda).collect();
    grid.extend(cluster_grid(&centers, diagram.param_window));
    grid.sort();
    grid.dedup();
    grid
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnComparison {
    pub lambda: f64,
    /// Largest distance from a diagram point to the nearest oracle point.
    pub diagram_to_oracle: f64,
    pub oracle_to_diagram: f64,
    pub hausdorff: f64,
    pub diagram_points: usize,
    pub oracle_points: usize,
    pub stability_mismatches: usize,
    pub missing: usize,
    pub extra: usize,
    /// Within `EXEMPT_RADIUS` of a bifurcation.
    pub exempt: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub columns: Vec<ColumnComparison>,
    /// Over non-exempt columns.
    pub max_hausdorff: f64,
    /// Over every column, exempt or not.
    pub max_hausdorff_all: f64,
    pub worst_lambda: Option<f64>,
    pub stability_mismatches: usize,
    pub missing: usize,
    pub extra: usize,
    pub exempt_columns: usize,
    pub match_radius: f64,
    pub tolerance: f64,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.max_hausdorff < self.tolerance && self.stability_mismatches == 0
    }

    /// First non-exempt column with a label mismatch, if any.
    pub fn first_mismatch(&self) -> Option<&ColumnComparison> {
        self.columns.iter().find(|c| !c.exempt && c.stability_mismatches > 0)
    }
}

fn one_sided(from: &[f64], to: &[f64], cap: f64) -> f64 {
    if from.is_empty() {
        return 0.0;
    }
    if to.is_empty() {
        return cap;
    }
    from.iter().map(|a| to.iter().map(|b| (a - b).abs()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
}

/// Column-wise comparison; `tol` is the Hausdorff pass threshold.
pub fn compare(diagram: &Diagram, grid: &[BigRational], tol: f64) -> Result<ComparisonReport, OracleError> {
    let height = diagram.x_window.width();
    let radius = MATCH_FRACTION * height;
    let x_lo = diagram.domain_min.map_or(diagram.x_window.lo, |m| m.max(diagram.x_window.lo));
    let x_hi = diagram.x_window.hi;
    let bif: Vec<f64> = diagram.bifurcation_points.iter().map(|b| b.lambda).collect();

    let mut columns = Vec::with_capacity(grid.len());
    for l in grid {
        let oc = oracle_equilibria(&diagram.system, l, diagram.tolerances.root)?;
        let p = oc.lambda;
        let oracle: Vec<&OracleEquilibrium> = oc.equilibria.iter().filter(|e| e.x >= x_lo && e.x <= x_hi).collect();
        let col = diagram.column(p);
        let dx: Vec<f64> = col.iter().map(|c| c.x).collect();
        let ox: Vec<f64> = oracle.iter().map(|e| e.x).collect();
        let a = one_sided(&dx, &ox, height);
        let b = one_sided(&ox, &dx, height);
        let exempt = bif.iter().any(|&c| (p - c).abs() <= EXEMPT_RADIUS);

        let mut mismatches = 0;
        let mut missing = 0;
        for e in &oracle {
            let nearest = col
                .iter()
                .map(|c| ((c.x - e.x).abs(), c))
                .filter(|(d, _)| *d <= radius)
                .min_by(|u, v| u.0.total_cmp(&v.0));
            match nearest {
                None => missing += 1,
                Some((_, c)) => {
                    let label = diagram.branches[c.branch].spans[c.span].label;
                    if label != Some(e.stability) {
                        mismatches += 1;
                    }
                }
            }
        }
        let extra = dx.iter().filter(|x| !ox.iter().any(|o| (*x - o).abs() <= radius)).count();
        columns.push(ColumnComparison {
            lambda: p,
            diagram_to_oracle: a,
            oracle_to_diagram: b,
            hausdorff: a.max(b),
            diagram_points: dx.len(),
            oracle_points: ox.len(),
            stability_mismatches: mismatches,
            missing,
            extra,
            exempt,
        });
    }

    let counted = || columns.iter().filter(|c| !c.exempt);
    let worst = counted().max_by(|a, b| a.hausdorff.total_cmp(&b.hausdorff));
    Ok(ComparisonReport {
        max_hausdorff: worst.map_or(0.0, |c| c.hausdorff),
        max_hausdorff_all: columns.iter().map(|c| c.hausdorff).fold(0.0, f64::max),
        worst_lambda: worst.map(|c| c.lambda),
        stability_mismatches: counted().map(|c| c.stability_mismatches).sum(),
        missing: counted().map(|c| c.missing).sum(),
        extra: counted().map(|c| c.extra).sum(),
        exempt_columns: columns.iter().filter(|c| c.exempt).count(),
        match_radius: radius,
        tolerance: tol,
        columns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{extract_affine_system, parse_expression};
    use StabilityLabel::*;

    fn sys(text: &str, param: &str) -> ParamAffineSystem {
        extract_affine_system(&parse_expression(text, "x", param).unwrap()).unwrap()
    }

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn summary(c: &OracleColumn) -> Vec<(f64, StabilityLabel)> {
        c.equilibria.iter().map(|e| (e.x, e.stability)).collect()
    }

    #[test]
    fn pitchfork_columns() {
        let s = sys("lambda*x - x^3", "lambda");
        let c = oracle_equilibria(&s, &q(4), 1e-12).unwrap();
        assert_eq!(summary(&c), vec![(-2.0, Stable), (0.0, Unstable), (2.0, Stable)]);
        let c = oracle_equilibria(&s, &q(-1), 1e-12).unwrap();
        assert_eq!(summary(&c), vec![(0.0, Stable)]);
    }

    #[test]
    fn substituted_family_at_zero() {
        let s = sys("c + (1+2*c)*x - x^3", "c");
        let c = oracle_equilibria(&s, &q(0), 1e-12).unwrap();
        assert_eq!(summary(&c), vec![(-1.0, Stable), (0.0, Unstable), (1.0, Stable)]);
    }

    #[test]
    fn identically_zero_is_reported() {
        let s = ParamAffineSystem {
            state: "x".into(),
            param: "l".into(),
            f: crate::poly::Polynomial::from_ints(&[0, 2]),
            g: crate::poly::Polynomial::from_ints(&[0, 1]),
        };
        assert!(matches!(oracle_equilibria(&s, &q(-2), 1e-12), Err(OracleError::IdenticallyZero(_))));
    }

    #[test]
    fn grid_is_exact_and_inclusive() {
        let g = uniform_grid(Window::new(-5.0, 5.0), 101);
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], q(-5));
        assert_eq!(g[50], q(0));
        assert_eq!(g[100], q(5));
    }

    #[test]
    fn cluster_stays_near_center() {
        let g = cluster_grid(&[0.0], Window::new(-1.0, 1.0));
        assert_eq!(g.len(), CLUSTER_POINTS);
        for v in &g {
            let d = rational_to_f64(v).abs();
            assert!(d > EXEMPT_RADIUS && d <= CLUSTER_RADIUS);
        }
    }

    #[test]
    fn one_sided_distances() {
        assert_eq!(one_sided(&[], &[], 7.0), 0.0);
        assert_eq!(one_sided(&[1.0], &[], 7.0), 7.0);
        assert_eq!(one_sided(&[1.0, 3.0], &[1.5], 7.0), 1.5);
    }

    #[test]
    fn count_bounded_by_degree() {
        let s = sys("c + (1+2*c)*x - x^3", "c");
        for l in uniform_grid(Window::new(-20.0, 20.0), 41) {
            let c = oracle_equilibria(&s, &l, 1e-12).unwrap();
            let total: u32 = c.equilibria.iter().map(|e| e.multiplicity).sum();
            assert!(total as usize <= s.degree());
        }
    }
}
