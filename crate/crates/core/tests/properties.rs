use std::f64::consts::PI;

use matosc::analysis::{analyze_seeded, InitKind};
use matosc::criteria::{
    check_condition_i, check_condition_iv, condition_iv_integral, find_oscillation_windows, theorem_verdict, Theorem,
    TheoremOptions, WindowOptions, Witness,
};
use matosc::expr::{parse, BinaryOp, ExprNode, UnaryOp};
use matosc::integrate::IntegratorConfig;
use matosc::oscillation::ZeroOptions;
use matosc::system::{preset, Coefficient, Index, PresetId, ProblemFile, DEFAULT_EPS_Q};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Preset coefficient entries against the same formulas written in Rust.
#[test]
fn preset_entries_match_direct_formulas() {
    type Entry = (Coefficient, u8, u8, Box<dyn Fn(f64) -> f64>);
    let (a1, a2, b, alpha, mu, mu1, mu2) = (1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 2f64.sqrt());
    let lambda = 1.3;
    let cases: Vec<(PresetId, f64, Vec<Entry>)> = vec![
        (
            PresetId::example31_default(),
            1.0,
            vec![
                (Coefficient::Q, 0, 0, Box::new(|_| 1.0)),
                (Coefficient::R, 0, 0, Box::new(move |t| -(a1 * (mu1 * t).sin() + a2 * (mu2 * t).sin()))),
                (Coefficient::R, 1, 1, Box::new(move |t| -(a1 * (mu1 * t).sin() + a2 * (mu2 * t).sin()))),
                (Coefficient::R, 0, 1, Box::new(move |t| -(b * (mu * t).cos() / t.powf(alpha)))),
                (Coefficient::R, 1, 0, Box::new(move |t| -(b * (mu * t).cos() / t.powf(alpha)))),
                (Coefficient::P, 0, 1, Box::new(|_| 0.0)),
            ],
        ),
        (
            PresetId::Example32,
            0.0,
            vec![
                (Coefficient::Q, 0, 0, Box::new(|t: f64| t.sin().max(0.0))),
                (Coefficient::Q, 1, 1, Box::new(|t: f64| t.sin().max(0.0))),
                (Coefficient::R, 0, 0, Box::new(|t: f64| t.sin().min(0.0))),
                (Coefficient::R, 1, 1, Box::new(|t: f64| t.sin().min(0.0))),
            ],
        ),
        (
            PresetId::Example33 { lambda },
            0.0,
            vec![
                (Coefficient::Q, 0, 0, Box::new(move |t: f64| lambda * t.sin())),
                (Coefficient::R, 1, 1, Box::new(move |t: f64| -lambda * t.sin())),
            ],
        ),
        (
            PresetId::Thm33Demo,
            0.0,
            vec![
                (Coefficient::R, 0, 1, Box::new(|_| 0.5)),
                (Coefficient::R, 1, 0, Box::new(|_| -0.5)),
            ],
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for (id, t0, entries) in cases {
        let cs = preset(id).unwrap();
        for _ in 0..1000 {
            let t = t0 + rng.gen_range(0.0..200.0);
            for (which, i, j, f) in &entries {
                let got = cs.entry(*which, Index::from_number(i + 1).unwrap(), Index::from_number(j + 1).unwrap(), t).unwrap();
                let want = f(t);
                assert!(close(got, want, 1e-15) || (got - want).abs() < 1e-300, "{id:?} {which:?}[{i}{j}]({t}): {got} vs {want}");
            }
        }
    }
}

fn arb_expr() -> impl Strategy<Value = ExprNode> {
    let leaf = prop_oneof![
        Just(ExprNode::Time),
        (-1e3..1e3f64).prop_map(ExprNode::constant),
        (0u32..20).prop_map(|n| ExprNode::constant(n as f64)),
    ];
    leaf.prop_recursive(5, 48, 2, |inner| {
        let unary = prop_oneof![
            Just(UnaryOp::Neg),
            Just(UnaryOp::Sin),
            Just(UnaryOp::Cos),
            Just(UnaryOp::Exp),
            Just(UnaryOp::Abs),
            Just(UnaryOp::Sqrt),
        ];
        let binary = prop_oneof![
            Just(BinaryOp::Add),
            Just(BinaryOp::Sub),
            Just(BinaryOp::Mul),
            Just(BinaryOp::Div),
            Just(BinaryOp::Pow),
            Just(BinaryOp::Min),
            Just(BinaryOp::Max),
        ];
        prop_oneof![
            (unary, inner.clone()).prop_map(|(op, c)| ExprNode::unary(op, c)),
            (binary, inner.clone(), inner).prop_map(|(op, l, r)| ExprNode::binary(op, l, r)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    // Printing then parsing preserves values, and printing is stable after one pass.
    #[test]
    fn printed_expressions_parse_back(e in arb_expr(), t in -10.0..10.0f64) {
        let printed = e.to_string();
        let back = parse(&printed).unwrap();
        prop_assert_eq!(back.to_string(), parse(&back.to_string()).unwrap().to_string());
        match (e.eval(t), back.eval(t)) {
            (Ok(x), Ok(y)) => prop_assert!(x == y, "{} -> {}: {} vs {}", printed, back, x, y),
            (Err(_), Err(_)) => {}
            (x, y) => prop_assert!(false, "{}: {:?} vs {:?}", printed, x, y),
        }
    }

    // The weighted integral is additive over a split of the interval.
    #[test]
    fn integral_condition_is_additive(lambda in 0.2..3.0f64, a in 0.0..6.0f64, len in 0.5..6.0f64, frac in 0.1..0.9f64) {
        for id in [PresetId::Example33 { lambda }, PresetId::Example32] {
            let cs = preset(id).unwrap();
            let (b, m) = (a + len, a + frac * len);
            let whole = condition_iv_integral(&cs, Index::One, a, a, b, DEFAULT_EPS_Q).unwrap();
            let left = condition_iv_integral(&cs, Index::One, a, a, m, DEFAULT_EPS_Q).unwrap();
            let right = condition_iv_integral(&cs, Index::One, a, m, b, DEFAULT_EPS_Q).unwrap();
            prop_assert!((whole - left - right).abs() <= 1e-9 * (1.0 + whole.abs()), "{} vs {}", whole, left + right);
        }
    }

    #[test]
    fn integral_condition_on_harmonic_system(t1 in 0.0..5.0f64, len in 0.01..8.0f64) {
        let cs = preset(PresetId::Remark34).unwrap();
        let r = check_condition_iv(&cs, Index::One, t1, t1 + len, DEFAULT_EPS_Q).unwrap();
        prop_assert!((r.margin - (len - PI)).abs() <= 1e-9);
    }
}

/// Every window reported by the scanner satisfies both conditions on its own.
#[test]
fn windows_satisfy_the_interval_criterion() {
    for lambda in [1.6, 2.0, 3.0] {
        let cs = preset(PresetId::Example33 { lambda }).unwrap();
        let r = find_oscillation_windows(&cs, Index::One, 30.0, &WindowOptions::default()).unwrap();
        let windows: Vec<(f64, f64)> = r
            .witnesses
            .iter()
            .filter_map(|w| match w {
                Witness::Interval { from, to } => Some((*from, *to)),
                _ => None,
            })
            .collect();
        assert!(windows.len() >= 4, "λ = {lambda}: {windows:?}");
        for w in windows.windows(2) {
            assert!(w[0].1 <= w[1].0, "overlapping windows {w:?}");
        }
        for &(a, b) in &windows {
            let ci = check_condition_i(&cs, Index::One, (a, b), None, DEFAULT_EPS_Q).unwrap();
            assert!(ci.holds(), "λ = {lambda}, [{a}, {b}]: {:?}", ci.notes);
            let iv = check_condition_iv(&cs, Index::One, a, b, DEFAULT_EPS_Q).unwrap();
            assert!(iv.margin >= -1e-8, "λ = {lambda}, [{a}, {b}]: margin {}", iv.margin);
        }
    }
    // Below the threshold no window exists.
    let cs = preset(PresetId::Example33 { lambda: 1.2 }).unwrap();
    let r = find_oscillation_windows(&cs, Index::One, 30.0, &WindowOptions::default()).unwrap();
    assert!(r.fails() && r.margin < 0.0, "{} margin {}", r.verdict, r.margin);
    assert!(r.components.is_empty());
}

fn diagonal_problem(q1: f64, q2: f64, r1: f64, r2: f64, wobble: f64) -> ProblemFile {
    let text = format!(
        r#"{{"t0": 0,
            "params": {{"q1": {q1}, "q2": {q2}, "r1": {r1}, "r2": {r2}, "w": {wobble}}},
            "P": [["0", "0"], ["0", "0"]],
            "Q": [["q1", "0"], ["0", "q2 + w*sin(3*t)"]],
            "R": [["-r1", "0"], ["0", "-r2"]],
            "S": [["0", "0"], ["0", "0"]],
            "q_diagonal": true}}"#
    );
    ProblemFile::from_json(&text).unwrap()
}

/// Whenever the interval criterion holds on `[t1, t2]`, sampled prepared
/// solutions have a zero of `det Φ` there.
#[test]
fn interval_criterion_is_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut exercised = 0;
    for case in 0..12 {
        let (q1, r1) = (rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0));
        let wobble = rng.gen_range(0.0..0.4);
        let q2 = wobble + rng.gen_range(0.0..2.0);
        let r2 = rng.gen_range(-1.0..2.0);
        let cs = diagonal_problem(q1, q2, r1, r2, wobble).build().unwrap();
        let t1 = rng.gen_range(0.0..3.0);
        let t2 = t1 + PI / f64::min(q1, r1) * rng.gen_range(0.9..1.3);
        let report = theorem_verdict(&cs, Theorem::Cor32 { t1, t2 }, &TheoremOptions::new(t2)).unwrap();
        if !report.holds() {
            continue;
        }
        exercised += 1;
        let sols = analyze_seeded(
            &cs,
            InitKind::Symmetric,
            case,
            20,
            (0.0, t2 + 0.5),
            &IntegratorConfig::default(),
            &ZeroOptions::default(),
        )
        .unwrap();
        for (i, s) in sols.iter().enumerate() {
            // A zero sitting exactly on an endpoint may be reported a hair outside.
            assert!(
                s.zeros.count_in(t1 - 1e-7, t2 + 1e-7) >= 1,
                "case {case} (q1 {q1}, r1 {r1}) solution {i}: zeros {:?} miss [{t1}, {t2}]",
                s.zeros.times()
            );
        }
    }
    assert!(exercised >= 5, "only {exercised} cases satisfied the criterion");
}
