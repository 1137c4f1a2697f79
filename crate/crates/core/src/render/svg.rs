use std::fmt::Write;

use crate::diagram::{BifurcationKind, BranchKind, Diagram, StabilityLabel, Window};

use super::{fmt_short, RenderConfig};

const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 160.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 50.0;
const TRACED_COLOR: &str = "#1f4e9c";
const CONSTANT_COLOR: &str = "#c0392b";
const ASYMPTOTE_COLOR: &str = "#9a9a9a";

struct Frame {
    p: Window,
    x: Window,
    left: f64,
    top: f64,
    w: f64,
    h: f64,
}

impl Frame {
    fn px(&self, p: f64) -> f64 {
        self.left + (p - self.p.lo) / self.p.width() * self.w
    }

    fn py(&self, x: f64) -> f64 {
        self.top + (self.x.hi - x) / self.x.width() * self.h
    }

    fn inside(&self, p: f64, x: f64) -> bool {
        self.p.contains(p) && self.x.contains(x)
    }
}

fn dash(label: Option<StabilityLabel>) -> &'static str {
    match label {
        Some(StabilityLabel::Stable) => "",
        Some(StabilityLabel::Unstable) => " stroke-dasharray=\"7 4\"",
        Some(StabilityLabel::Degenerate) | None => " stroke-dasharray=\"1.5 3\"",
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Roughly `n` round tick positions across the window.
fn ticks(w: Window, n: usize) -> Vec<f64> {
    let raw = w.width() / n as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (w.lo / step).ceil() as i64;
    let last = (w.hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

/// SVG 1.1 document; the same diagram and config always give the same bytes.
pub fn to_svg(diagram: &Diagram, cfg: &RenderConfig) -> String {
    let (pw, xw) = cfg.windows(diagram);
    let (width, height) = (cfg.width.max(100) as f64, cfg.height.max(100) as f64);
    let f = Frame {
        p: pw,
        x: xw,
        left: MARGIN_LEFT,
        top: MARGIN_TOP,
        w: (width - MARGIN_LEFT - MARGIN_RIGHT).max(20.0),
        h: (height - MARGIN_TOP - MARGIN_BOTTOM).max(20.0),
    };
    let mut s = String::new();
    let _ = writeln!(s, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"11\">",
        width, height, width, height
    );
    let _ = writeln!(s, "<title>{}</title>", esc(&format!("d{}/dt = {}", diagram.state, diagram.expression)));
    let _ = writeln!(s, "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<clipPath id=\"plot\"><rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\"/></clipPath>",
        f.left, f.top, f.w, f.h
    );

    axes(&mut s, &f, diagram);
    asymptotes(&mut s, &f, diagram);

    let mut drawn = 0;
    for b in &diagram.branches {
        let (class, color) = match b.kind {
            BranchKind::Traced => ("traced", TRACED_COLOR),
            BranchKind::Constant => ("constant", CONSTANT_COLOR),
        };
        let _ = writeln!(s, "<g id=\"{}\" class=\"{class}\" clip-path=\"url(#plot)\">", esc(&b.id));
        for span in &b.spans {
            let pts = &b.samples[span.start..=span.end];
            if !pts.iter().any(|q| f.inside(q[0], q[1])) {
                continue;
            }
            drawn += 1;
            let mut d = String::new();
            for (i, q) in pts.iter().enumerate() {
                let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, f.px(q[0]), f.py(q[1]));
            }
            let label = span.label.map_or("unlabeled", |l| l.as_str());
            let _ = writeln!(
                s,
                "<path class=\"{label}\" d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"{}/>",
                dash(span.label)
            );
        }
        let _ = writeln!(s, "</g>");
    }

    for bp in &diagram.bifurcation_points {
        if !f.inside(bp.lambda, bp.x) {
            continue;
        }
        let fill = match bp.kind {
            BifurcationKind::Fold => "#f5b041",
            BifurcationKind::Transcritical => "#58d68d",
            BifurcationKind::Pitchfork => "#af7ac5",
            BifurcationKind::Degenerate => "#7f8c8d",
        };
        let _ = writeln!(
            s,
            "<circle class=\"bifurcation {}\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"4.5\" fill=\"{fill}\" stroke=\"black\" stroke-width=\"1\"><title>{} at ({}, {})</title></circle>",
            bp.kind.as_str(),
            f.px(bp.lambda),
            f.py(bp.x),
            bp.kind.as_str(),
            fmt_short(bp.lambda),
            fmt_short(bp.x)
        );
    }

    if drawn == 0 {
        let _ = writeln!(
            s,
            "<text class=\"warning\" x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" fill=\"#b03a2e\">no equilibria inside the plotted window</text>",
            f.left + f.w / 2.0,
            f.top + f.h / 2.0
        );
    }
    legend(&mut s, &f, diagram);
    s.push_str("</svg>\n");
    s
}

fn axes(s: &mut String, f: &Frame, d: &Diagram) {
    let _ = writeln!(
        s,
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>",
        f.left, f.top, f.w, f.h
    );
    let bottom = f.top + f.h;
    let _ = writeln!(s, "<g class=\"ticks\">");
    for t in ticks(f.p, 8) {
        let x = f.px(t);
        let _ = writeln!(
            s,
            "<line x1=\"{x:.2}\" y1=\"{bottom:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
            bottom + 5.0
        );
        let _ =
            writeln!(s, "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>", bottom + 18.0, fmt_short(t));
    }
    for t in ticks(f.x, 8) {
        let y = f.py(t);
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"black\"/>",
            f.left - 5.0,
            f.left
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            f.left - 8.0,
            y + 4.0,
            fmt_short(t)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"13\">{}</text>",
        f.left + f.w / 2.0,
        bottom + 38.0,
        esc(&d.parameter)
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 {:.2} {:.2})\">{}</text>",
        18.0,
        f.top + f.h / 2.0,
        18.0,
        f.top + f.h / 2.0,
        esc(&d.state)
    );
}

fn asymptotes(s: &mut String, f: &Frame, d: &Diagram) {
    let _ = writeln!(s, "<g class=\"asymptotes\" stroke=\"{ASYMPTOTE_COLOR}\" stroke-width=\"0.75\">");
    for &z in &d.asymptotes.horizontal {
        if f.x.contains(z) {
            let y = f.py(z);
            let _ = writeln!(s, "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\"/>", f.left, f.left + f.w);
        }
    }
    if let Some(v) = d.asymptotes.vertical.filter(|v| f.p.contains(*v)) {
        let x = f.px(v);
        let _ = writeln!(s, "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\"/>", f.top, f.top + f.h);
    }
    let _ = writeln!(s, "</g>");
}

fn legend(s: &mut String, f: &Frame, d: &Diagram) {
    let x0 = f.left + f.w + 15.0;
    let mut y = f.top + 10.0;
    let _ = writeln!(s, "<g class=\"legend\">");
    let mut entry = |s: &mut String, color: &str, width: f64, dash_attr: &str, text: &str| {
        let _ = writeln!(
            s,
            "<line x1=\"{x0:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{color}\" stroke-width=\"{width}\"{dash_attr}/>",
            x0 + 28.0
        );
        let _ = writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\">{text}</text>", x0 + 34.0, y + 4.0);
        y += 18.0;
    };
    entry(s, "black", 2.0, dash(Some(StabilityLabel::Stable)), "stable");
    entry(s, "black", 2.0, dash(Some(StabilityLabel::Unstable)), "unstable");
    entry(s, "black", 2.0, dash(Some(StabilityLabel::Degenerate)), "degenerate");
    entry(s, TRACED_COLOR, 2.0, "", "traced branch");
    if d.branches.iter().any(|b| b.kind == BranchKind::Constant) {
        entry(s, CONSTANT_COLOR, 2.0, "", "constant branch");
    }
    entry(s, ASYMPTOTE_COLOR, 0.75, "", "asymptote");
    let _ = writeln!(
        s,
        "<circle cx=\"{:.2}\" cy=\"{y:.2}\" r=\"4.5\" fill=\"white\" stroke=\"black\"/><text x=\"{:.2}\" y=\"{:.2}\">bifurcation</text>",
        x0 + 14.0,
        x0 + 34.0,
        y + 4.0
    );
    let _ = writeln!(s, "</g>");
}
