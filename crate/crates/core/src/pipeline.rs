//! Parse, decompose, trace, label and detect bifurcations in one call.

use serde::{Deserialize, Serialize};

use crate::diagram::{Axis, Diagram, Tolerances, Window};
use crate::error::PipelineError;
use crate::expr::{extract_affine_system, multiply_by_state, parse_expression};
use crate::locus::{self, TraceConfig};
use crate::roots::{RootSet, CLUSTER_THRESHOLD, DEFAULT_ROOT_TOL, RESIDUAL_TOL};
use crate::stability::{self, DEGENERACY_TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub expression: String,
    pub state: String,
    pub param: String,
    /// Wrap the expression as `state * (expression)`.
    pub multiply_state: bool,
    /// `None` picks the window from poles and zeros.
    pub x_window: Option<Window>,
    pub param_window: Window,
    pub domain_min: Option<f64>,
    pub root_tol: f64,
    /// Canvas used to size the sampling gaps, in pixels.
    pub canvas: (f64, f64),
    /// Largest screen gap between consecutive samples, in pixels.
    pub gap_px: f64,
}

impl Config {
    pub fn new(expression: impl Into<String>, state: impl Into<String>, param: impl Into<String>) -> Self {
        Self {
            expression: expression.into(),
            state: state.into(),
            param: param.into(),
            multiply_state: false,
            x_window: None,
            param_window: Window::new(-20.0, 20.0),
            domain_min: None,
            root_tol: DEFAULT_ROOT_TOL,
            canvas: (800.0, 600.0),
            gap_px: 1.0,
        }
    }

    fn validate(&self) -> Result<(), PipelineError> {
        if !self.param_window.is_valid() {
            return Err(PipelineError::Config(format!(
                "invalid parameter range {}:{}",
                self.param_window.lo, self.param_window.hi
            )));
        }
        if let Some(w) = self.x_window {
            if !w.is_valid() {
                return Err(PipelineError::Config(format!("invalid state range {}:{}", w.lo, w.hi)));
            }
        }
        if self.domain_min.is_some_and(|m| !m.is_finite()) {
            return Err(PipelineError::Config("domain bound must be finite".into()));
        }
        if !(self.root_tol > 0.0 && self.root_tol < 1.0) {
            return Err(PipelineError::Config(format!("tolerance {} out of range", self.root_tol)));
        }
        if self.canvas.0 < 100.0 || self.canvas.1 < 100.0 || self.gap_px <= 0.0 {
            return Err(PipelineError::Config("canvas must be at least 100x100".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub diagram: Diagram,
    /// Real roots of `h`, before clipping to the window.
    pub constant_roots: RootSet,
    /// Real roots of `f1' g1 - f1 g1'`.
    pub critical_points: RootSet,
    /// Samples whose span label contradicts a clear derivative sign.
    pub derivative_disagreements: usize,
}

pub fn analyze(cfg: &Config) -> Result<Analysis, PipelineError> {
    cfg.validate()?;
    let mut ast = parse_expression(&cfg.expression, &cfg.state, &cfg.param)?;
    if cfg.multiply_state {
        ast = multiply_by_state(ast);
    }
    let system = extract_affine_system(&ast)?;
    let d = locus::decompose(&system)?;
    let pz = locus::poles_zeros(&d, cfg.root_tol)?;
    let regions = locus::sign_regions(&pz);
    let constant_roots = locus::constant_branches(&d, cfg.root_tol)?;
    let critical_points = {
        let n = d.critical_numerator();
        if n.is_zero() {
            RootSet::default()
        } else {
            crate::roots::real_roots(&n, cfg.root_tol)?
        }
    };

    let mut x_window = match cfg.x_window {
        Some(w) => locus::expand_to_cover(w, &pz),
        None => locus::default_x_window(&pz),
    };
    if let Some(m) = cfg.domain_min {
        if m >= x_window.hi {
            return Err(PipelineError::Config(format!("domain bound {m} lies above the state window")));
        }
        x_window.lo = x_window.lo.max(m);
    }
    let mu_window = if d.mu_is_minus_lambda { cfg.param_window.mirrored() } else { cfg.param_window };

    let mut tc = TraceConfig::new(x_window, mu_window);
    tc.domain_min = cfg.domain_min;
    tc.root_tol = cfg.root_tol;
    tc.max_gap_mu = cfg.gap_px * mu_window.width() / cfg.canvas.0;
    tc.max_gap_x = cfg.gap_px * x_window.width() / cfg.canvas.1;

    let mut branches = locus::trace_branches(&d, &pz, &tc)?;
    branches.extend(locus::constant_branch_lines(&d, &constant_roots, &tc));

    let asymptotes =
        locus::Asymptotes { vertical: locus::vertical_asymptote(&d), horizontal: locus::horizontal_asymptotes(&pz) };
    let diagram = Diagram {
        expression: ast.to_string(),
        state: cfg.state.clone(),
        parameter: cfg.param.clone(),
        axis: Axis::Mu,
        system,
        decomposition: d.clone(),
        poles: pz.poles.clone(),
        zeros: pz.zeros.clone(),
        sign_regions: regions,
        asymptotes,
        branches,
        bifurcation_points: Vec::new(),
        x_window,
        param_window: mu_window,
        domain_min: cfg.domain_min,
        tolerances: Tolerances {
            root: cfg.root_tol,
            residual: RESIDUAL_TOL,
            cluster: CLUSTER_THRESHOLD,
            degeneracy: DEGENERACY_TOL,
            interpolation: tc.interpolation_tol,
        },
    };
    let mut diagram = locus::flip_to_lambda(diagram);
    locus::polish_samples(&mut diagram)?;
    diagram.bifurcation_points = stability::detect_bifurcations(&diagram, &d)?;
    let diagram = stability::classify_by_alternation(diagram)?;
    let derivative_disagreements = stability::derivative_disagreements(&diagram);
    Ok(Analysis { diagram, constant_roots, critical_points, derivative_disagreements })
}
