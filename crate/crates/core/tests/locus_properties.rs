use bifurcus::diagram::{relative_residual, BranchKind, Window};
use bifurcus::locus::{
    decompose, flip_to_lambda, identity_holds, mirror_branches, poles_zeros, sign_regions, trace_branches, TraceConfig,
};
use bifurcus::{analyze, Config, ParamAffineSystem, Polynomial};
use proptest::prelude::*;

fn poly(coeffs: Vec<i64>, lead: i64) -> Polynomial {
    let mut c = coeffs;
    c.push(lead);
    Polynomial::from_ints(&c)
}

/// Coprime pair with positive leading coefficients.
fn coprime_pair() -> impl Strategy<Value = (Polynomial, Polynomial)> {
    (prop::collection::vec(-5i64..=5, 1..=6), 1i64..=4, prop::collection::vec(-5i64..=5, 0..=6), 1i64..=4)
        .prop_map(|(a, la, b, lb)| (poly(a, la), poly(b, lb)))
        .prop_filter("coprime", |(f, g)| f.gcd(g).unwrap().degree() == Some(0))
}

fn system(f: Polynomial, g: Polynomial) -> ParamAffineSystem {
    ParamAffineSystem { state: "x".into(), param: "lambda".into(), f, g }
}

fn as_expression(s: &ParamAffineSystem) -> String {
    format!("{} + lambda*({})", s.f.display("x"), s.g.display("x"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sign_rule_matches_rational_function(
        (f1, g1) in coprime_pair(),
        xs in prop::collection::vec(-6.0f64..6.0, 100),
    ) {
        let sys = system(f1.clone(), g1.clone());
        let d = decompose(&sys).unwrap();
        let pz = poles_zeros(&d, 1e-12).unwrap();
        let regions = sign_regions(&pz);
        for x in xs {
            if pz.poles.values().chain(pz.zeros.values()).any(|r| (r - x).abs() < 1e-6) {
                continue;
            }
            let mu = -f1.eval_f64(x) / g1.eval_f64(x);
            if mu == 0.0 || !mu.is_finite() {
                continue;
            }
            let r = regions.iter().find(|r| r.contains(x)).unwrap();
            prop_assert_eq!(r.mu_sign as f64, mu.signum(), "x = {}", x);
            prop_assert_eq!(r.mu_sign > 0, r.count_above % 2 == 1);
        }
    }

    #[test]
    fn decomposition_identity(
        (f1, g1) in coprime_pair(),
        h in prop::collection::vec(-3i64..=3, 0..=2),
        sf in prop::bool::ANY,
        sg in prop::bool::ANY,
    ) {
        let h = poly(h, 1);
        let flip = |p: Polynomial, neg: bool| if neg { -&p } else { p };
        let sys = system(flip(&h * &f1, sf), flip(&h * &g1, sg));
        let d = decompose(&sys).unwrap();
        prop_assert!(identity_holds(&sys, &d));
        prop_assert_eq!(d.f1.leading_sign(), 1);
        prop_assert_eq!(d.g1.leading_sign(), 1);
        prop_assert_eq!(d.f1.gcd(&d.g1).unwrap(), Polynomial::one());
        prop_assert_eq!(d.mu_is_minus_lambda, sf != sg);
    }

    #[test]
    fn traced_branches_are_monotone_and_on_the_curve((f1, g1) in coprime_pair()) {
        let sys = system(f1, g1);
        let d = decompose(&sys).unwrap();
        let pz = poles_zeros(&d, 1e-12).unwrap();
        let cfg = TraceConfig::new(Window::new(-6.0, 6.0), Window::new(-20.0, 20.0));
        let branches = trace_branches(&d, &pz, &cfg).unwrap();
        for b in &branches {
            for w in b.samples.windows(2) {
                let dm = w[1][0] - w[0][0];
                prop_assert!(dm == 0.0 || dm.signum() as i8 == b.slope_sign, "{:?}", w);
                prop_assert!(w[1][1] > w[0][1]);
            }
            for s in &b.samples {
                let v = d.f1.eval_f64(s[1]) + s[0] * d.g1.eval_f64(s[1]);
                let scale: f64 = d.f1.to_f64_coeffs().iter().zip(0..).map(|(c, i)| (c * s[1].powi(i)).abs()).sum::<f64>()
                    + d.g1.to_f64_coeffs().iter().zip(0..).map(|(c, i)| (s[0] * c * s[1].powi(i)).abs()).sum::<f64>();
                prop_assert!(v.abs() <= 1e-9 * scale.max(f64::MIN_POSITIVE));
                let region = sign_regions(&pz).into_iter().find(|r| r.contains(s[1]));
                if let Some(r) = region {
                    if s[0] != 0.0 {
                        prop_assert_eq!(r.mu_sign as f64, s[0].signum());
                    }
                }
            }
        }
    }

    #[test]
    fn endpoints_at_zero_parameter_are_poles((f1, g1) in coprime_pair()) {
        let d = decompose(&system(f1, g1)).unwrap();
        let pz = poles_zeros(&d, 1e-12).unwrap();
        let cfg = TraceConfig::new(Window::new(-6.0, 6.0), Window::new(-20.0, 20.0));
        for b in trace_branches(&d, &pz, &cfg).unwrap() {
            for e in [b.start, b.end] {
                if e.param == 0.0 {
                    prop_assert!(pz.poles.values().any(|p| (p - e.x).abs() <= 1e-8), "{:?}", e);
                }
            }
        }
    }

    #[test]
    fn large_parameter_means_near_a_zero((f1, g1) in coprime_pair()) {
        // Near a zero of multiplicity m the distance shrinks only like |mu|^(-1/m).
        prop_assume!(g1.degree() == Some(0) || g1.gcd(&g1.derivative()).unwrap().degree() == Some(0));
        let d = decompose(&system(f1, g1)).unwrap();
        let pz = poles_zeros(&d, 1e-12).unwrap();
        let w = Window::new(-6.0, 6.0);
        let cfg = TraceConfig::new(w, Window::new(-1e7, 1e7));
        for b in trace_branches(&d, &pz, &cfg).unwrap() {
            for s in b.samples.iter().filter(|s| s[0].abs() > 1e6) {
                // x - z ~ -f1(z) / (g1'(z) mu), so the radius scales with that constant.
                let near_zero = pz.zeros.values().any(|z| {
                    let k = (d.f1.eval_f64(z) / d.g1.derivative().eval_f64(z)).abs();
                    (z - s[1]).abs() <= 1e-3 * k.max(1.0)
                });
                let escaping = s[1] <= w.lo + 1e-9 || s[1] >= w.hi - 1e-9;
                prop_assert!(near_zero || escaping, "{:?}", s);
            }
        }
    }

    #[test]
    fn mirroring_is_an_involution((f1, g1) in coprime_pair()) {
        let d = decompose(&system(f1, g1)).unwrap();
        let pz = poles_zeros(&d, 1e-12).unwrap();
        let cfg = TraceConfig::new(Window::new(-6.0, 6.0), Window::new(-20.0, 20.0));
        let orig = trace_branches(&d, &pz, &cfg).unwrap();
        let mut b = orig.clone();
        mirror_branches(&mut b);
        mirror_branches(&mut b);
        prop_assert_eq!(b, orig);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_sample_is_an_equilibrium(
        (f1, g1) in coprime_pair(),
        h in prop::collection::vec(-2i64..=2, 0..=1),
        negate in prop::bool::ANY,
    ) {
        let h = poly(h, 1);
        let g = &h * &g1;
        let g = if negate { -&g } else { g };
        let sys = system(&h * &f1, g);
        let a = analyze(&Config::new(as_expression(&sys), "x", "lambda")).unwrap();
        prop_assert_eq!(&a.diagram.system, &sys);
        for b in &a.diagram.branches {
            for s in &b.samples {
                prop_assert!(relative_residual(&sys, s[0], s[1]) <= 1e-9, "{} {:?}", b.id, s);
            }
        }
    }
}

#[test]
fn flip_leaves_positive_relation_alone() {
    let a = analyze(&Config::new("x^2 + 1 + lambda*x", "x", "lambda")).unwrap();
    assert!(!a.diagram.decomposition.mu_is_minus_lambda);
    let again = flip_to_lambda(a.diagram.clone());
    assert_eq!(again, a.diagram);
}

#[test]
fn pitchfork_arms_after_flip() {
    let a = analyze(&Config::new("lambda*x - x^3", "x", "lambda")).unwrap();
    for b in a.diagram.branches.iter().filter(|b| b.kind == BranchKind::Traced) {
        for s in &b.samples {
            assert!(s[0] >= 0.0);
            assert!((s[1] * s[1] - s[0]).abs() <= 1e-12 * (1.0 + s[0]));
        }
    }
}
