use bifurcus::diagram::{relative_residual, BifurcationKind, StabilityLabel};
use bifurcus::stability::{classify_by_alternation, classify_by_derivative, derivative_disagreements};
use bifurcus::{analyze, Config, Polynomial};
use proptest::prelude::*;

fn poly(mut c: Vec<i64>, lead: i64) -> Polynomial {
    c.push(lead);
    Polynomial::from_ints(&c)
}

fn expression(f: &Polynomial, g: &Polynomial) -> String {
    format!("{} + lambda*({})", f.display("x"), g.display("x"))
}

fn labels(d: &bifurcus::Diagram) -> Vec<Vec<Option<StabilityLabel>>> {
    d.branches.iter().map(|b| b.spans.iter().map(|s| s.label).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn alternation_agrees_with_linearization(
        f in prop::collection::vec(-4i64..=4, 1..=4),
        lf in 1i64..=3,
        g in prop::collection::vec(-4i64..=4, 0..=3),
        lg in -3i64..=3,
    ) {
        prop_assume!(lg != 0);
        let (f, g) = (poly(f, lf), poly(g, lg));
        let a = analyze(&Config::new(expression(&f, &g), "x", "lambda")).unwrap();
        prop_assert_eq!(derivative_disagreements(&a.diagram), 0);
        // Independent re-labelling by the derivative alone.
        let by_derivative = classify_by_derivative(a.diagram.clone());
        for (b, c) in a.diagram.branches.iter().zip(&by_derivative.branches) {
            for (s, t) in b.spans.iter().zip(&c.spans) {
                if t.label != Some(StabilityLabel::Degenerate) && s.label != Some(StabilityLabel::Degenerate) {
                    prop_assert_eq!(s.label, t.label, "{}", b.id);
                }
            }
        }
    }

    #[test]
    fn labels_survive_positive_scaling(
        f in prop::collection::vec(-4i64..=4, 1..=4),
        g in prop::collection::vec(-4i64..=4, 0..=2),
        k in 2i64..=7,
    ) {
        let (f, g) = (poly(f, 1), poly(g, 1));
        let kq = num_rational::BigRational::from_integer(k.into());
        let a = analyze(&Config::new(expression(&f, &g), "x", "lambda")).unwrap();
        let b = analyze(&Config::new(expression(&f.scale(&kq), &g.scale(&kq)), "x", "lambda")).unwrap();
        prop_assert_eq!(labels(&a.diagram), labels(&b.diagram));
    }

    #[test]
    fn folds_are_non_hyperbolic_equilibria(
        f in prop::collection::vec(-4i64..=4, 2..=4),
        g in prop::collection::vec(-4i64..=4, 0..=2),
    ) {
        let (f, g) = (poly(f, 1), poly(g, 1));
        let a = analyze(&Config::new(expression(&f, &g), "x", "lambda")).unwrap();
        let sys = &a.diagram.system;
        for bp in a.diagram.bifurcation_points.iter().filter(|b| b.kind == BifurcationKind::Fold) {
            prop_assert!(relative_residual(sys, bp.lambda, bp.x) <= 1e-8);
            let fd = sys.f.derivative();
            let gd = sys.g.derivative();
            let scale = fd.to_f64_coeffs().iter().chain(gd.to_f64_coeffs().iter()).zip(0..)
                .map(|(c, i)| c.abs() * bp.x.abs().max(1.0).powi(i % 8) * (1.0 + bp.lambda.abs()))
                .sum::<f64>();
            prop_assert!(sys.derivative_f64(bp.x, bp.lambda).abs() <= 1e-8 * scale);
        }
    }
}

#[test]
fn relabelling_is_stable() {
    let a = analyze(&Config::new("c + (1+2*c)*x - x^3", "x", "c")).unwrap();
    let again = classify_by_alternation(a.diagram.clone()).unwrap();
    assert_eq!(labels(&again), labels(&a.diagram));
}

#[test]
fn constant_branch_exchanges_stability() {
    let a = analyze(&Config::new("lambda*x - x^2", "x", "lambda")).unwrap();
    let d = &a.diagram;
    assert_eq!(d.bifurcation_points.len(), 1);
    assert_eq!(d.bifurcation_points[0].kind, BifurcationKind::Transcritical);
    let c = d.branches.iter().find(|b| b.id == "const-0").unwrap();
    let spans: Vec<_> = c.spans.iter().map(|s| s.label).collect();
    assert_eq!(spans, vec![Some(StabilityLabel::Stable), Some(StabilityLabel::Unstable)]);
}

#[test]
fn single_fold_of_substituted_family() {
    let a = analyze(&Config::new("c + (1+2*c)*x - x^3", "x", "c")).unwrap();
    let folds: Vec<_> = a.diagram.bifurcation_points.iter().filter(|b| b.kind == BifurcationKind::Fold).collect();
    // 4x^3 + 3x^2 - 1 has one real root.
    assert_eq!(folds.len(), 1);
    assert!((folds[0].x - 0.4554100411).abs() < 1e-9);
}

#[test]
fn monotone_line_has_no_bifurcations() {
    let a = analyze(&Config::new("lambda - x", "x", "lambda")).unwrap();
    assert!(a.diagram.bifurcation_points.is_empty());
}
