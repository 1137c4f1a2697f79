use std::path::PathBuf;
use std::process::ExitCode;

use bifurcus::diagram::Window;
use bifurcus::oracle::{compare, default_grid};
use bifurcus::render::{self, Format, RenderConfig};
use bifurcus::{analyze, Config, PipelineError};
use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutFormat {
    Svg,
    Csv,
    Json,
}

/// Bifurcation diagram of dx/dt = f(x) + lambda*g(x) by real-line root locus.
#[derive(Debug, Parser)]
#[command(name = "bifurcus", version)]
struct Args {
    /// Right-hand side, e.g. "lambda*x - x^3".
    #[arg(long)]
    system: String,
    #[arg(long, default_value = "x")]
    state: String,
    #[arg(long)]
    param: String,
    /// State window as lo:hi.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    x_range: Option<Window>,
    /// Parameter window as lo:hi.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true, default_value = "-20:20")]
    param_range: Window,
    /// Lower bound on the state, e.g. 0 for a polar radius.
    #[arg(long, allow_hyphen_values = true)]
    domain_min: Option<f64>,
    /// Treat the expression as the bracket in state*(...).
    #[arg(long)]
    multiply_state: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to the extension of --out, else svg.
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
    /// Print the step-by-step construction as Markdown.
    #[arg(long)]
    trace: bool,
    /// Compare against the brute-force oracle and fail on disagreement.
    #[arg(long)]
    check: bool,
    /// Number of oracle columns.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u32).range(2..))]
    grid: u32,
    /// Root isolation width.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Write the oracle report as JSON to this path.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<Window, String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad lower bound `{a}`"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad upper bound `{b}`"))?;
    let w = Window::new(lo, hi);
    if !w.is_valid() {
        return Err(format!("empty range {s}"));
    }
    Ok(w)
}

fn format_of(args: &Args) -> Format {
    match args.format {
        Some(OutFormat::Svg) => Format::Svg,
        Some(OutFormat::Csv) => Format::Csv,
        Some(OutFormat::Json) => Format::Json,
        None => match args.out.as_ref().and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            _ => Format::Svg,
        },
    }
}

fn exit_code(e: &PipelineError) -> u8 {
    match e {
        PipelineError::Parse(_) | PipelineError::Config(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut cfg = Config::new(&args.system, &args.state, &args.param);
    cfg.multiply_state = args.multiply_state;
    cfg.x_window = args.x_range;
    cfg.param_window = args.param_range;
    cfg.domain_min = args.domain_min;
    cfg.root_tol = args.tol;

    let analysis = match analyze(&cfg) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let d = &analysis.diagram;

    let format = format_of(&args);
    let rc = RenderConfig { format, ..RenderConfig::default() };
    let artifact = match format {
        Format::Svg => render::to_svg(d, &rc),
        Format::Csv => render::to_csv(d),
        Format::Json => render::to_json(d),
    };
    if let Some(path) = &args.out {
        if let Err(e) = std::fs::write(path, &artifact) {
            eprintln!("error: render: cannot write {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    if args.trace {
        print!("{}", render::step_trace(&analysis));
    }

    let points: Vec<String> = d
        .bifurcation_points
        .iter()
        .map(|b| format!("{} at ({}, {})", b.kind.as_str(), render::fmt_short(b.lambda), render::fmt_short(b.x)))
        .collect();
    println!(
        "branches: {}, bifurcations: {}, max residual: {:.3e}",
        d.branches.len(),
        if points.is_empty() { "none".to_string() } else { points.join("; ") },
        d.max_relative_residual()
    );

    if args.check || args.report.is_some() {
        let grid = default_grid(d, args.grid as usize);
        let report = match compare(d, &grid, 1e-4) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: oracle: {e}");
                return ExitCode::from(1);
            }
        };
        if let Some(path) = &args.report {
            if let Err(e) = std::fs::write(path, render::to_report_json(&report)) {
                eprintln!("error: render: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        println!(
            "oracle: {} columns, max hausdorff {:.3e}, stability mismatches {}, missing {}, extra {}",
            report.columns.len(),
            report.max_hausdorff,
            report.stability_mismatches,
            report.missing,
            report.extra
        );
        if args.check && !report.passed() {
            if let Some(c) = report.first_mismatch() {
                eprintln!("check failed: stability mismatch at {} = {}", d.parameter, c.lambda);
            } else if let Some(l) = report.worst_lambda {
                eprintln!("check failed: hausdorff {:.3e} at {} = {l}", report.max_hausdorff, d.parameter);
            }
            return ExitCode::from(3);
        }
    }
    ExitCode::SUCCESS
}
