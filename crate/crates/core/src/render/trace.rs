use std::fmt::Write;

use crate::diagram::{BranchKind, Diagram, EndpointKind};
use crate::pipeline::Analysis;
use crate::roots::RootSet;

use super::fmt_short;

fn count_word(n: u32) -> String {
    const WORDS: [&str; 11] = ["no", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"];
    WORDS.get(n as usize).map_or_else(|| n.to_string(), |w| w.to_string())
}

fn list(rs: &RootSet) -> String {
    rs.values().map(fmt_short).collect::<Vec<_>>().join(", ")
}

/// "two poles at x=0" style phrase, counting multiplicity.
fn counted(rs: &RootSet, noun: &str, var: &str) -> String {
    let n = rs.total_multiplicity();
    let plural = if n == 1 { "" } else { "s" };
    if n == 0 {
        format!("no {noun}s")
    } else {
        format!("{} {noun}{plural} at {var}={}", count_word(n), list(rs))
    }
}

fn greek(name: &str) -> &str {
    if name == "lambda" {
        "λ"
    } else {
        name
    }
}

fn endpoint(k: EndpointKind) -> &'static str {
    match k {
        EndpointKind::Pole => "pole",
        EndpointKind::Fold => "fold",
        EndpointKind::HorizontalAsymptote => "horizontal asymptote",
        EndpointKind::VerticalAsymptote => "vertical asymptote",
        EndpointKind::WindowEdge => "window edge",
        EndpointKind::ParameterClip => "parameter window",
        EndpointKind::DomainBoundary => "domain boundary",
    }
}

/// Markdown walk-through of the eight construction steps.
pub fn step_trace(a: &Analysis) -> String {
    let d: &Diagram = &a.diagram;
    let dec = &d.decomposition;
    let (x, p) = (d.state.as_str(), greek(&d.parameter));
    let mu_rel = if dec.mu_is_minus_lambda { format!("μ=−{p}") } else { format!("μ={p}") };
    let mut s = String::new();

    let _ = writeln!(s, "# Bifurcation diagram of d{x}/dt = {}\n", d.expression);
    let _ = writeln!(s, "## Step 1: decomposition\n");
    let _ = writeln!(s, "- f({x}) = {}", d.system.f.display(x));
    let _ = writeln!(s, "- g({x}) = {}", d.system.g.display(x));
    let _ = writeln!(s, "- h({x}) = {}", dec.h.display(x));
    let _ = writeln!(s, "- f1({x}) = {}", dec.f1.display(x));
    let _ = writeln!(s, "- g1({x}) = {}", dec.g1.display(x));
    let _ = writeln!(s, "- locus form: h*(f1 + μ*g1) = 0 with {mu_rel}");
    let constant = if a.constant_roots.is_empty() {
        "no constant roots".to_string()
    } else if a.constant_roots.len() == 1 {
        format!("constant root at {x}={}", list(&a.constant_roots))
    } else {
        format!("constant roots at {x}={}", list(&a.constant_roots))
    };
    let _ = writeln!(
        s,
        "- summary: {}, {}, {constant}, {mu_rel}\n",
        counted(&d.poles, "pole", x),
        counted(&d.zeros, "zero", x)
    );

    let _ = writeln!(s, "## Step 2: sign regions\n");
    for r in &d.sign_regions {
        let lo = r.lo.map_or("-inf".to_string(), fmt_short);
        let hi = r.hi.map_or("inf".to_string(), fmt_short);
        let sign = if r.mu_sign > 0 { "μ>0" } else { "μ<0" };
        let _ = writeln!(s, "- ({lo}, {hi}): {} above, {sign}", r.count_above);
    }

    let _ = writeln!(s, "\n## Steps 3-4: asymptotes\n");
    // Reported in the locus variable, before the flip.
    let vertical = match crate::locus::vertical_asymptote(dec) {
        None => "no finite vertical asymptote".to_string(),
        Some(v) => format!("vertical asymptote at μ={}", fmt_short(v)),
    };
    let horizontal = match d.asymptotes.horizontal.len() {
        0 => "no horizontal asymptotes".to_string(),
        1 => format!("horizontal asymptote {x}={}", fmt_short(d.asymptotes.horizontal[0])),
        _ => format!(
            "horizontal asymptotes {x}={}",
            d.asymptotes.horizontal.iter().map(|v| fmt_short(*v)).collect::<Vec<_>>().join(", ")
        ),
    };
    let _ = writeln!(s, "- {vertical}; {horizontal}");

    let _ = writeln!(s, "\n## Step 5: branches\n");
    let traced: Vec<_> = d.branches.iter().filter(|b| b.kind == BranchKind::Traced).collect();
    if traced.is_empty() {
        let _ = writeln!(s, "- no traced branches in the window");
    }
    for b in traced {
        let slope = if b.slope_sign > 0 { "increasing" } else { "decreasing" };
        let _ = writeln!(
            s,
            "- {}: {x} from {} to {}, {p} from {} to {} ({slope}), {} samples; starts at {}, ends at {}",
            b.id,
            fmt_short(b.samples[0][1]),
            fmt_short(b.samples[b.samples.len() - 1][1]),
            fmt_short(b.start.param),
            fmt_short(b.end.param),
            b.samples.len(),
            endpoint(b.start.kind),
            endpoint(b.end.kind)
        );
    }

    let _ = writeln!(s, "\n## Step 6: constant branches\n");
    if a.constant_roots.is_empty() {
        let _ = writeln!(s, "- none (h has no real roots)");
    }
    for r in &a.constant_roots.roots {
        let _ = writeln!(s, "- {x}={} (multiplicity {})", fmt_short(r.value), r.multiplicity);
    }

    let _ = writeln!(s, "\n## Step 7: orientation\n");
    if dec.mu_is_minus_lambda {
        let _ = writeln!(s, "- {mu_rel}: flipped horizontally");
    } else {
        let _ = writeln!(s, "- {mu_rel}: no flip");
    }

    let _ = writeln!(s, "\n## Step 8: stability\n");
    for b in &d.branches {
        let labels: Vec<String> = b
            .spans
            .iter()
            .map(|sp| {
                let (a0, a1) = (b.samples[sp.start][0], b.samples[sp.end][0]);
                format!(
                    "{} for {p} in [{}, {}]",
                    sp.label.map_or("unlabeled", |l| l.as_str()),
                    fmt_short(a0.min(a1)),
                    fmt_short(a0.max(a1))
                )
            })
            .collect();
        let _ = writeln!(s, "- {}: {}", b.id, labels.join("; "));
    }
    if d.bifurcation_points.is_empty() {
        let _ = writeln!(s, "\nNo bifurcation points in the window.");
    } else {
        let _ = writeln!(s, "\nBifurcation points:\n");
        for bp in &d.bifurcation_points {
            let _ =
                writeln!(s, "- {} at ({p}, {x}) = ({}, {})", bp.kind.as_str(), fmt_short(bp.lambda), fmt_short(bp.x));
        }
    }
    s
}
