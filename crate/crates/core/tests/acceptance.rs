//! End-to-end acceptance checks with their tolerances and time budgets.
//!
//! All criteria run sequentially inside one test so the timings are not
//! disturbed by other tests, and each prints one PASS/FAIL line on stderr.

// `ensure!(x <= tol)` must fail on NaN, hence the negation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;
use std::time::{Duration, Instant};

use matosc::analysis::{analyze_pair, analyze_seeded, InitKind};
use matosc::criteria::{
    check_condition_i, check_condition_iii, check_condition_iv, check_thm34, Criterion, OffDiagonalClosedForm,
    Partition, Witness, III_CHECKPOINTS, III_THRESHOLD,
};
use matosc::integrate::{
    integrate_matrix_system, integrate_prufer, integrate_riccati, integrate_scalar_system, liouville_det,
    prufer_initial, solve, IntegratorConfig, Termination, TrajectoryKind,
};
use matosc::oscillation::{
    classify_on, detect_zeros, scalar_zeros, verify_sign_identity, Classification, SignMode, ZeroKind, ZeroOptions,
};
use matosc::system::{preset, CoefficientSystem, Index, Matrix2, PresetId, DEFAULT_EPS_Q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome, Duration);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn cfg() -> IntegratorConfig {
    IntegratorConfig::default()
}

fn zopts() -> ZeroOptions {
    ZeroOptions::default()
}

fn sharpness_of_pi() -> Outcome {
    let cs = preset(PresetId::Remark34).unwrap();
    for (t1, t2) in [(0.0, PI), (0.1, PI - 0.1), (0.5, 4.0), (1.0, 1.0 + PI), (2.0, 9.0)] {
        let r = check_condition_iv(&cs, Index::One, t1, t2, DEFAULT_EPS_Q).map_err(|e| e.to_string())?;
        let expected = (t2 - t1) - PI;
        ensure!((r.margin - expected).abs() <= 1e-9, "margin {} on [{t1}, {t2}], expected {expected}", r.margin);
        ensure!(r.holds() == (expected >= -1e-9), "verdict {} on [{t1}, {t2}]", r.verdict);
    }
    let exact = check_condition_iv(&cs, Index::One, 0.0, PI, DEFAULT_EPS_Q).unwrap();
    ensure!(exact.holds(), "length π should hold exactly");

    // Φ = sin t·I, Ψ = cos t·I is prepared.
    let tr = integrate_matrix_system(&cs, Matrix2::ZERO, Matrix2::IDENTITY, (0.0, 2.0 * PI + 0.5), &cfg())
        .map_err(|e| e.to_string())?;
    let (inner, _) = classify_on(&tr, (0.1, PI - 0.1), &zopts()).map_err(|e| e.to_string())?;
    ensure!(
        matches!(inner, Classification::NonoscillatoryUpTo { .. }),
        "zero found on [0.1, π - 0.1]: {inner:?}"
    );
    let zeros = detect_zeros(&tr, (0.1, 2.0 * PI + 0.5), &zopts()).map_err(|e| e.to_string())?;
    ensure!(zeros.len() == 2, "expected zeros at π and 2π, got {:?}", zeros.times());
    let mut worst: f64 = 0.0;
    for (z, target) in zeros.zeros.iter().zip([PI, 2.0 * PI]) {
        ensure!(z.kind == ZeroKind::Tangential, "zero at {} is {:?}", z.t, z.kind);
        worst = worst.max((z.t - target).abs());
    }
    ensure!(worst <= 1e-8, "zero location error {worst:e}");
    Ok(format!("margins exact to 1e-9, tangential zeros within {worst:.1e}"))
}

fn half_period_threshold() -> Outcome {
    let iv = |lambda: f64| {
        let cs = preset(PresetId::Example33 { lambda }).unwrap();
        check_condition_iv(&cs, Index::One, 2.0 * PI, 3.0 * PI, DEFAULT_EPS_Q).unwrap()
    };
    let r = iv(FRAC_PI_2);
    ensure!(r.margin.abs() <= 1e-8 && r.holds(), "λ = π/2: {} margin {}", r.verdict, r.margin);
    let r = iv(1.2);
    ensure!((r.margin - (2.4 - PI)).abs() <= 1e-8 && r.fails(), "λ = 1.2: {} margin {}", r.verdict, r.margin);
    let r = iv(2.0);
    ensure!((r.margin - (4.0 - PI)).abs() <= 1e-8 && r.holds(), "λ = 2: {} margin {}", r.verdict, r.margin);

    let cs = preset(PresetId::Example33 { lambda: 2.0 }).unwrap();
    let sols = analyze_seeded(&cs, InitKind::Symmetric, 42, 10, (0.0, 7.0 * PI + 0.1), &cfg(), &zopts())
        .map_err(|e| e.to_string())?;
    for (i, s) in sols.iter().enumerate() {
        for m in 1..=3 {
            let (a, b) = (2.0 * PI * m as f64, (2 * m + 1) as f64 * PI);
            ensure!(s.zeros.count_in(a, b) >= 1, "solution {i} has no zero in window m = {m}");
        }
    }
    Ok("margins 0, 2.4 - π, 4 - π; 10 solutions with a zero in every window".into())
}

fn positive_arches() -> Outcome {
    let cs = preset(PresetId::Example32).unwrap();
    let horizon = 40.0 * PI;
    let ci = check_condition_i(&cs, Index::One, (0.0, horizon), None, DEFAULT_EPS_Q).unwrap();
    ensure!(ci.holds(), "sign condition: {:?}", ci.notes);
    let iii = check_condition_iii(&cs, Index::One, horizon, III_THRESHOLD, DEFAULT_EPS_Q).unwrap();
    ensure!(iii.supported(), "weighted integrals: {}", iii.verdict);
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for w in &iii.witnesses {
        if let Witness::Series { t, values, .. } = w {
            for (&t, &v) in t.iter().zip(values) {
                let n = (t / (2.0 * PI)).round();
                ensure!((t - 2.0 * PI * n).abs() < 1e-9, "checkpoint {t} is not a multiple of 2π");
                worst = worst.max((v - 2.0 * n).abs());
                checked += 1;
            }
        }
    }
    ensure!(checked == 2 * (III_CHECKPOINTS + 1), "expected {} checkpoints, got {checked}", 2 * (III_CHECKPOINTS + 1));
    ensure!(worst <= 1e-6, "partial integral error {worst:e}");
    let sols = analyze_seeded(&cs, InitKind::Symmetric, 42, 10, (0.0, horizon), &cfg(), &zopts())
        .map_err(|e| e.to_string())?;
    let counts: Vec<usize> = sols.iter().map(|s| s.zeros.len()).collect();
    ensure!(counts.iter().all(|&c| c >= 3), "zero counts {counts:?}");
    Ok(format!("partials = 2N within {worst:.1e}; zero counts {counts:?}"))
}

fn quasi_periodic_matrix_equation() -> Outcome {
    let cs = preset(PresetId::example31_default()).unwrap();
    let span = (1.0, 200.0);
    let scalar = integrate_scalar_system(&cs, Index::One, 1.0, 0.0, span, &cfg(), DEFAULT_EPS_Q)
        .map_err(|e| e.to_string())?;
    ensure!(scalar.reached_end(), "scalar integration stopped: {:?}", scalar.termination());
    let phi_zeros = scalar_zeros(&scalar, span, 1e-10).map_err(|e| e.to_string())?;
    ensure!(phi_zeros.len() >= 10, "φ has {} zeros", phi_zeros.len());
    let sols = analyze_seeded(&cs, InitKind::Symmetric, 42, 10, span, &cfg(), &zopts()).map_err(|e| e.to_string())?;
    let counts: Vec<usize> = sols.iter().map(|s| s.zeros.len()).collect();
    ensure!(counts.iter().all(|&c| c >= 5), "det Φ zero counts {counts:?}");
    Ok(format!("φ has {} zeros; det Φ zero counts {counts:?}", phi_zeros.len()))
}

fn invariant_cone() -> Outcome {
    let cs = preset(PresetId::Thm33Demo).unwrap();
    let span = (0.0, 50.0);
    let sols = analyze_seeded(&cs, InitKind::Cone, 42, 10, span, &cfg(), &zopts()).map_err(|e| e.to_string())?;
    let mut nodes = 0;
    for (i, s) in sols.iter().enumerate() {
        let sign = verify_sign_identity(&s.trajectory, SignMode::Same).unwrap();
        ensure!(sign.holds, "solution {i}: {:?}", sign.first_violation);
        ensure!(s.zeros.is_empty(), "solution {i} has zeros {:?}", s.zeros.times());
        nodes += sign.nodes_checked;

        let ric = integrate_riccati(&cs, s.y0, span, &cfg()).map_err(|e| e.to_string())?;
        ensure!(ric.reached_end(), "Riccati flow {i} stopped: {:?}", ric.termination());
        for k in 0..ric.len() {
            let det = Matrix2::from_slice(ric.state(k)).det();
            ensure!(det > 0.0, "det Y = {det} at t = {} for solution {i}", ric.times()[k]);
        }
    }
    Ok(format!("10 cone solutions, {nodes} nodes with equal nonzero signs, det Y > 0"))
}

fn saddle() -> Outcome {
    let cs = preset(PresetId::Thm34Demo).unwrap();
    let p = Partition::trivial(0.0, 10.0).unwrap();
    let r = check_thm34(&cs, Index::One, [&p, &p], DEFAULT_EPS_Q).unwrap();
    for c in [Criterion::Thm34C, Criterion::Thm34D1, Criterion::Thm34D2] {
        let comp = r.component(c).unwrap();
        ensure!(comp.holds(), "{c}: {} {:?}", comp.verdict, comp.notes);
    }
    let s = analyze_pair(&cs, Matrix2::IDENTITY, Matrix2::diag(1.0, -1.0), (0.0, 10.0), &cfg(), &zopts())
        .map_err(|e| e.to_string())?;
    let sign = verify_sign_identity(&s.trajectory, SignMode::Opposite).unwrap();
    ensure!(sign.holds, "{:?}", sign.first_violation);
    Ok(format!("C, D1, D2 hold; opposite signs at {} nodes", sign.nodes_checked))
}

/// `‖Y' + YQY + YP - SY - R‖ / (1 + ‖Y‖²)` for `Y = ΨΦ⁻¹` at `t`.
fn riccati_residual(cs: &CoefficientSystem, tr: &matosc::integrate::Trajectory, t: f64) -> f64 {
    let (phi, psi) = tr.matrix_pair_at(t).unwrap();
    let d = tr.derivative(t).unwrap();
    let (dphi, dpsi) = (Matrix2::from_slice(&d[..4]), Matrix2::from_slice(&d[4..]));
    let inv = phi.inverse().unwrap();
    let y = psi * inv;
    let dy = dpsi * inv - y * dphi * inv;
    let c = cs.values(t).unwrap();
    let res = dy + y * c.q * y + y * c.p - c.s * y - c.r;
    res.norm() / (1.0 + y.norm() * y.norm())
}

fn riccati_machinery() -> Outcome {
    let cs = preset(PresetId::Remark34).unwrap();
    let tr = integrate_riccati(&cs, Matrix2::ZERO, (0.0, 3.0), &cfg()).map_err(|e| e.to_string())?;
    let (t_escape, bracket) = match tr.termination() {
        Termination::BlowUp { t_escape, bracket } => (*t_escape, *bracket),
        other => return Err(format!("no blow-up detected: {other:?}")),
    };
    ensure!((t_escape - FRAC_PI_2).abs() <= 1e-3, "t_escape {t_escape}");
    ensure!(
        bracket.0 - 1e-3 <= FRAC_PI_2 && FRAC_PI_2 <= bracket.1 + 1e-3,
        "bracket {bracket:?} misses π/2"
    );

    // 50 probes each on two zero-free spans.
    let mut worst: f64 = 0.0;
    let spans = [
        (preset(PresetId::Thm33Demo).unwrap(), Matrix2::IDENTITY, Matrix2::new(0.5, 0.2, 0.2, 1.0), (0.0, 10.0)),
        (preset(PresetId::Remark34).unwrap(), Matrix2::IDENTITY, Matrix2::ZERO, (0.0, FRAC_PI_2 - 0.1)),
    ];
    for (cs, phi0, psi0, span) in &spans {
        let tr = integrate_matrix_system(cs, *phi0, *psi0, *span, &cfg()).map_err(|e| e.to_string())?;
        for i in 0..50 {
            let t = span.0 + (span.1 - span.0) * (i as f64 + 0.5) / 50.0;
            worst = worst.max(riccati_residual(cs, &tr, t));
        }
    }
    ensure!(worst <= 1e-6, "scaled Riccati residual {worst:e}");

    let cs = preset(PresetId::Thm33Demo).unwrap();
    let tr = integrate_riccati(&cs, Matrix2::IDENTITY, (0.0, 10.0), &cfg()).map_err(|e| e.to_string())?;
    let mut cf = OffDiagonalClosedForm::new(&cs, &tr).map_err(|e| e.to_string())?;
    let mut cf_worst: f64 = 0.0;
    for i in 0..=100 {
        let t = 0.1 * i as f64;
        let y = tr.riccati_at(t).unwrap();
        let (y12, y21) = cf.eval(t).map_err(|e| e.to_string())?;
        cf_worst = cf_worst.max((y12 - y.a12).abs()).max((y21 - y.a21).abs());
    }
    ensure!(cf_worst <= 1e-6, "closed-form deviation {cf_worst:e}");
    Ok(format!(
        "escape at {t_escape:.9}, residual {worst:.1e}, closed forms within {cf_worst:.1e}"
    ))
}

fn numerics() -> Outcome {
    let cs = preset(PresetId::Thm33Demo).unwrap();
    let tr = integrate_matrix_system(&cs, Matrix2::new(1.0, 0.3, -0.2, 0.8), Matrix2::new(0.4, 0.1, 0.1, 0.9), (0.0, 10.0), &cfg())
        .map_err(|e| e.to_string())?;
    let mut liouville: f64 = 0.0;
    for i in 0..=50 {
        let t = 0.2 * i as f64;
        let direct = tr.matrix_pair_at(t).unwrap().0.det();
        let formula = liouville_det(&cs, &tr, t).map_err(|e| e.to_string())?;
        liouville = liouville.max((formula - direct).abs() / direct.abs());
    }
    ensure!(liouville <= 1e-6, "Liouville relative error {liouville:e}");

    let cs = preset(PresetId::Example33 { lambda: 2.0 }).unwrap();
    let (phi0, psi0) = (0.3, 1.0);
    let direct = integrate_scalar_system(&cs, Index::One, phi0, psi0, (0.0, 20.0), &cfg(), DEFAULT_EPS_Q)
        .map_err(|e| e.to_string())?;
    let (th, lr) = prufer_initial(phi0, psi0);
    let polar = integrate_prufer(&cs, Index::One, th, lr, (0.0, 20.0), &cfg(), DEFAULT_EPS_Q).map_err(|e| e.to_string())?;
    let samples: Vec<f64> = (0..=2000).map(|i| 0.01 * i as f64).collect();
    let max_phi = samples.iter().map(|&t| direct.scalar_at(t).unwrap().0.abs()).fold(0.0, f64::max);
    let mut prufer: f64 = 0.0;
    for &t in &samples {
        let phi = direct.scalar_at(t).unwrap().0;
        if phi.abs() > 0.05 * max_phi {
            let rphi = polar.prufer_reconstruct(t).unwrap().0;
            prufer = prufer.max((phi - rphi).abs() / phi.abs());
        }
    }
    ensure!(prufer <= 1e-6, "Prüfer relative error {prufer:e}");

    // y' + a y² + b y + c = 0 against the same equation with c1 >= c.
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut slack = f64::INFINITY;
    for _ in 0..100 {
        let (a0, a1): (f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..0.5));
        let (b0, c0, dc) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0));
        let (y1_0, dy) = (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0));
        let field = move |extra: f64| {
            move |t: f64, y: &[f64], d: &mut [f64]| {
                let a = (a0 + a1 * t.sin()).max(0.0);
                d[0] = -a * y[0] * y[0] - b0 * y[0] - (c0 + 0.3 * t.cos() + extra);
                Ok(())
            }
        };
        let y1 = solve(TrajectoryKind::Auxiliary, field(dc), 0.0, 5.0, &[y1_0], &cfg(), true).map_err(|e| e.to_string())?;
        let y0 = solve(TrajectoryKind::Auxiliary, field(0.0), 0.0, 5.0, &[y1_0 + dy], &cfg(), true)
            .map_err(|e| e.to_string())?;
        let end = y1.end().min(y0.end());
        for i in 0..=100 {
            let t = (end * i as f64 / 100.0).min(end);
            slack = slack.min(y0.eval(t).unwrap()[0] - y1.eval(t).unwrap()[0]);
        }
    }
    ensure!(slack >= -1e-8, "comparison violated by {slack:e}");
    Ok(format!(
        "Liouville {liouville:.1e}, Prüfer {prufer:.1e}, comparison slack {slack:.1e}"
    ))
}

#[test]
fn acceptance() {
    let criteria: [Check; 8] = [
        ("1 sharpness of the π threshold", sharpness_of_pi, Duration::from_secs(1)),
        ("2 half-period threshold 2λ = π", half_period_threshold, Duration::from_secs(5)),
        ("3 positive arches", positive_arches, Duration::from_secs(5)),
        ("4 quasi-periodic matrix equation", quasi_periodic_matrix_equation, Duration::from_secs(10)),
        ("5 invariant cone", invariant_cone, Duration::from_secs(5)),
        ("6 saddle sign pattern", saddle, Duration::from_secs(2)),
        ("7 Riccati machinery", riccati_machinery, Duration::from_secs(60)),
        ("8 numerics", numerics, Duration::from_secs(60)),
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr();
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let line = match outcome {
            Ok(detail) if elapsed <= budget => format!("PASS {name} ({:.2}s): {detail}", elapsed.as_secs_f64()),
            Ok(detail) => {
                failed.push(name);
                format!(
                    "FAIL {name}: {:.2}s exceeds {:.0}s budget ({detail})",
                    elapsed.as_secs_f64(),
                    budget.as_secs_f64()
                )
            }
            Err(why) => {
                failed.push(name);
                format!("FAIL {name} ({:.2}s): {why}", elapsed.as_secs_f64())
            }
        };
        // Written directly so the line shows even when test output is captured.
        let _ = writeln!(err, "{line}");
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
