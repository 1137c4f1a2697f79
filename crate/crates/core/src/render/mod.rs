//! Output formats: SVG plot, CSV samples, versioned JSON and a Markdown trace.

mod csv;
mod json;
mod svg;
mod trace;

pub use self::csv::to_csv;
pub use self::json::{diagram_from_json, report_from_json, to_json, to_report_json, SCHEMA_VERSION};
pub use self::svg::to_svg;
pub use self::trace::step_trace;

use crate::diagram::{Diagram, Window};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Svg,
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderConfig {
    pub format: Format,
    pub width: u32,
    pub height: u32,
    /// Overrides for the plotted windows.
    pub param_window: Option<Window>,
    pub x_window: Option<Window>,
    /// Largest gap between consecutive samples, in pixels.
    pub gap_px: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self { format: Format::Svg, width: 800, height: 600, param_window: None, x_window: None, gap_px: 1.0 }
    }
}

impl RenderConfig {
    pub fn windows(&self, d: &Diagram) -> (Window, Window) {
        let p = self.param_window.unwrap_or(d.param_window);
        let x = self.x_window.unwrap_or_else(|| {
            let mut w = d.x_window;
            if let Some(m) = d.domain_min {
                w.lo = w.lo.max(m);
            }
            w
        });
        (p, x)
    }
}

/// Plain decimal with 17 significant digits, trailing zeros trimmed.
pub fn fmt_float(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.16e}", v.abs());
    let (mant, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let point = exp + 1;
    let mut s = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (a, b) = digits.split_at(point as usize);
        format!("{a}.{b}")
    };
    if s.contains('.') {
        s = s.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    if v < 0.0 {
        s.insert(0, '-');
    }
    s
}

/// Up to six significant digits for human-facing text.
pub fn fmt_short(v: f64) -> String {
    if v.abs() < 1e-9 {
        return "0".into();
    }
    let mag = v.abs().log10().floor() as i32;
    let decimals = (5 - mag).clamp(0, 12) as usize;
    let s = format!("{v:.decimals$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}
