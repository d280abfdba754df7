//! Sign-pattern conditions and the per-cell integral inequalities that keep
//! the Riccati solution inside an invariant cone.

use super::conditions::entry_sign;
use super::report::{Criterion, CriterionReport, Verdict, Witness};
use super::{sample_grid, CriteriaError, Partition, SIGN_TOL};
use crate::integrate::{solve, IntegratorConfig, TrajectoryKind};
use crate::system::{Coefficient, CoefficientSystem, CoefficientValues, Index};

/// Points per partition cell at which the running integral is checked.
pub const CELL_SUBGRID: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignPattern {
    /// `r_12 >= 0, r_21 <= 0, p_21 >= 0, s_12 >= 0`.
    Plus,
    /// `r_12 <= 0, r_21 >= 0, p_21 <= 0, s_12 <= 0`.
    Minus,
}

/// One cell integral
/// `J(t) = ∫_ξ^t exp{σ ∫_ξ^τ [a + q·ι(ξ;·)]} g(τ) dτ` with
/// `ι(ξ;s) = κ ∫_ξ^s exp{-∫_u^s a} g(u) du`.
///
/// Integrated as the ODE system for `(A, C, B, J)`:
/// `A' = a`, `C' = e^A g`, `B' = a + q κ e^{-A} C`, `J' = e^{σB} g`.
#[derive(Clone, Copy)]
struct CellIntegral<'a> {
    cs: &'a CoefficientSystem,
    a: fn(&CoefficientValues, Index) -> f64,
    g: fn(&CoefficientValues, Index, f64) -> f64,
    k: Index,
    inner_sign: f64,
    outer_sign: f64,
    eps_q: f64,
}

impl CellIntegral<'_> {
    /// Smallest (or, for `upper`, largest) value of `J` on the cell subgrid, and where.
    fn extreme(&self, from: f64, to: f64, upper: bool) -> Result<(f64, f64), CriteriaError> {
        let me = *self;
        let rhs = move |t: f64, y: &[f64], d: &mut [f64]| {
            let v = me.cs.values(t)?;
            let a = (me.a)(&v, me.k);
            let g = (me.g)(&v, me.k, me.eps_q);
            let inner = me.inner_sign * (-y[0]).exp() * y[1];
            d[0] = a;
            d[1] = y[0].exp() * g;
            d[2] = a + v.q_k(me.k) * inner;
            d[3] = (me.outer_sign * y[2]).exp() * g;
            Ok(())
        };
        let cfg = IntegratorConfig::with_tolerances(1e-10, 1e-13);
        let tr = solve(TrajectoryKind::Auxiliary, rhs, from, to, &[0.0; 4], &cfg, false)?;
        let mut best = (0.0, from);
        for i in 0..CELL_SUBGRID {
            let t = from + (to - from) * i as f64 / CELL_SUBGRID as f64;
            if t > tr.end() {
                break;
            }
            let j = tr.eval(t).unwrap()[3];
            if !j.is_finite() {
                return Err(CriteriaError::InvalidArgument(format!("cell integral overflowed at t = {t}")));
            }
            let better = if upper { j > best.0 } else { j < best.0 };
            if better {
                best = (j, t);
            }
        }
        Ok(best)
    }
}

/// Runs the cell integral over every cell of `partition`; returns the worst
/// value (signed so that nonnegative means satisfied) and its location.
fn scan_cells(cell: CellIntegral<'_>, partition: &Partition, upper: bool) -> Result<(f64, f64), CriteriaError> {
    let mut worst = (f64::INFINITY, partition.start());
    for (a, b) in partition.cells() {
        let (v, t) = cell.extreme(a, b, upper)?;
        let signed = if upper { -v } else { v };
        if signed < worst.0 {
            worst = (signed, t);
        }
    }
    Ok(worst)
}

fn a_kk(v: &CoefficientValues, k: Index) -> f64 {
    v.a(k, k)
}

fn r_kk(v: &CoefficientValues, k: Index, _eps_q: f64) -> f64 {
    v.r.get(k.zero_based(), k.zero_based())
}

fn f_k(v: &CoefficientValues, k: Index, eps_q: f64) -> f64 {
    v.f(k, eps_q)
}

fn check_partition(cs: &CoefficientSystem, p: &Partition) -> Result<(), CriteriaError> {
    if (p.start() - cs.t0()).abs() > 1e-12 * (1.0 + cs.t0().abs()) {
        return Err(CriteriaError::InvalidPartition(format!(
            "partition starts at {} but t0 = {}",
            p.start(),
            cs.t0()
        )));
    }
    Ok(())
}

/// Sign pattern A of the invariant-cone lemma on `[t0, end]`.
fn lemma22_a(cs: &CoefficientSystem, end: f64, mode: SignPattern) -> Result<CriterionReport, CriteriaError> {
    use Coefficient::*;
    use Index::*;
    let points = sample_grid(cs.t0(), end, None)?;
    let plus = mode == SignPattern::Plus;
    let checks: [(&str, Coefficient, Index, Index, bool); 6] = [
        ("q_1 >= 0", Q, One, One, true),
        ("q_2 >= 0", Q, Two, Two, true),
        (if plus { "r_12 >= 0" } else { "r_12 <= 0" }, R, One, Two, plus),
        (if plus { "r_21 <= 0" } else { "r_21 >= 0" }, R, Two, One, !plus),
        (if plus { "p_21 >= 0" } else { "p_21 <= 0" }, P, Two, One, plus),
        (if plus { "s_12 >= 0" } else { "s_12 <= 0" }, S, One, Two, plus),
    ];
    let mut margin = f64::INFINITY;
    for (label, which, row, col, nonneg) in checks {
        let (m, bad) = entry_sign(cs, which, row, col, &points, nonneg)?;
        margin = margin.min(m);
        if let Some(t) = bad {
            return Ok(CriterionReport::new(Criterion::Lemma22A, Verdict::Fails, margin)
                .with_witness(Witness::Point { t })
                .with_note(format!("{label} violated at t = {t}")));
        }
    }
    Ok(CriterionReport::new(Criterion::Lemma22A, Verdict::Holds, margin)
        .with_witness(Witness::Interval { from: cs.t0(), to: end })
        .with_note(format!("{mode:?} sign pattern on {} grid points", points.len())))
}

/// Sign pattern A and the cell inequalities B of the invariant-cone lemma.
///
/// B is first tried through the shortcut `r_kk >= 0`, which makes every cell
/// integral nonnegative; otherwise each cell of `partitions[k]` is integrated.
pub fn check_lemma22(
    cs: &CoefficientSystem,
    partitions: [&Partition; 2],
    mode: SignPattern,
) -> Result<CriterionReport, CriteriaError> {
    for p in partitions {
        check_partition(cs, p)?;
    }
    let end = partitions[0].end().max(partitions[1].end());
    let a = lemma22_a(cs, end, mode)?;

    let mut b_margin = f64::INFINITY;
    let mut b_notes = Vec::new();
    let mut b_witness = Vec::new();
    let mut b_fails = false;
    for k in Index::BOTH {
        let p = partitions[k.zero_based()];
        let points = sample_grid(cs.t0(), p.end(), None)?;
        let (m, bad) = entry_sign(cs, Coefficient::R, k, k, &points, true)?;
        if bad.is_none() {
            b_margin = b_margin.min(m.max(0.0));
            b_notes.push(format!("k = {}: r_kk >= 0 on the grid, so every cell integral is nonnegative", k.number()));
            continue;
        }
        let cell = CellIntegral {
            cs,
            a: a_kk,
            g: r_kk,
            k,
            inner_sign: 1.0,
            outer_sign: 1.0,
            eps_q: 0.0,
        };
        let (worst, t) = scan_cells(cell, p, false)?;
        b_margin = b_margin.min(worst);
        if worst < -SIGN_TOL {
            b_fails = true;
            b_witness.push(Witness::Point { t });
            b_notes.push(format!("k = {}: cell integral {worst:e} < 0 at t = {t}", k.number()));
        } else {
            b_witness.push(Witness::Partition { points: p.points().to_vec() });
            b_notes.push(format!("k = {}: all {} cells nonnegative", k.number(), p.cells().count()));
        }
    }
    let verdict = if b_fails { Verdict::Fails } else { Verdict::Holds };
    let mut b = CriterionReport::new(Criterion::Lemma22B, verdict, b_margin);
    b.witnesses = b_witness;
    b.notes = b_notes;
    if b_fails {
        b.notes.push("no admissible partition found up to horizon among the partitions tried".into());
    }
    Ok(CriterionReport::composite(Criterion::Lemma22, vec![a, b]))
}

/// Sign conditions C and cell inequalities D1, D2 for the distinguished index `j`.
pub fn check_thm34(
    cs: &CoefficientSystem,
    j: Index,
    partitions: [&Partition; 2],
    eps_q: f64,
) -> Result<CriterionReport, CriteriaError> {
    for p in partitions {
        check_partition(cs, p)?;
    }
    let o = j.other();
    let end = partitions[0].end().max(partitions[1].end());
    let points = sample_grid(cs.t0(), end, None)?;

    // C: q_j >= 0, q_{3-j} <= 0, and the two zero-branch provisos.
    let mut c_margin = f64::INFINITY;
    let mut c_fail = None;
    for &t in &points {
        let v = cs.values(t)?;
        let (qj, qo) = (v.q_k(j), v.q_k(o));
        c_margin = c_margin.min(qj).min(-qo);
        let proviso = |k: Index| {
            let ko = k.other();
            v.p.get(k.zero_based(), ko.zero_based()) - v.s.get(ko.zero_based(), k.zero_based())
        };
        let why = if qj < -SIGN_TOL {
            Some(format!("q_{}({t}) = {qj:e} < 0", j.number()))
        } else if qo > SIGN_TOL {
            Some(format!("q_{}({t}) = {qo:e} > 0", o.number()))
        } else if qj.abs() <= eps_q && proviso(j).abs() > SIGN_TOL {
            Some(format!("q_{} vanishes at {t} but p_{}{} != s_{}{}", j.number(), j.number(), o.number(), o.number(), j.number()))
        } else if qo.abs() <= eps_q && proviso(o).abs() > SIGN_TOL {
            Some(format!("q_{} vanishes at {t} but p_{}{} != s_{}{}", o.number(), o.number(), j.number(), j.number(), o.number()))
        } else {
            None
        };
        if let Some(why) = why {
            c_fail = Some((t, why));
            break;
        }
    }
    let c = match c_fail {
        None => CriterionReport::new(Criterion::Thm34C, Verdict::Holds, c_margin)
            .with_witness(Witness::Interval { from: cs.t0(), to: end }),
        Some((t, why)) => CriterionReport::new(Criterion::Thm34C, Verdict::Fails, c_margin)
            .with_witness(Witness::Point { t })
            .with_note(why),
    };

    let d = |criterion: Criterion, k: Index, p: &Partition, nonneg: bool| -> Result<CriterionReport, CriteriaError> {
        let grid = sample_grid(cs.t0(), p.end(), None)?;
        let mut shortcut = f64::INFINITY;
        let mut ok = true;
        for &t in &grid {
            let f = cs.f_k(k, t, eps_q)?;
            let m = if nonneg { f } else { -f };
            shortcut = shortcut.min(m);
            if m < -SIGN_TOL {
                ok = false;
                break;
            }
        }
        let rel = if nonneg { ">= 0" } else { "<= 0" };
        if ok {
            return Ok(CriterionReport::new(criterion, Verdict::Holds, shortcut.max(0.0))
                .with_witness(Witness::Partition { points: p.points().to_vec() })
                .with_note(format!("F_{} {rel} on the grid, so every cell integral is {rel}", k.number())));
        }
        let cell = CellIntegral {
            cs,
            a: a_kk,
            g: f_k,
            k,
            inner_sign: if nonneg { 1.0 } else { -1.0 },
            outer_sign: if nonneg { 1.0 } else { -1.0 },
            eps_q,
        };
        let (worst, t) = scan_cells(cell, p, !nonneg)?;
        Ok(if worst < -SIGN_TOL {
            CriterionReport::new(criterion, Verdict::Fails, worst)
                .with_witness(Witness::Point { t })
                .with_note(format!("cell integral violates {rel} at t = {t}"))
                .with_note("no admissible partition found up to horizon among the partitions tried")
        } else {
            CriterionReport::new(criterion, Verdict::Holds, worst)
                .with_witness(Witness::Partition { points: p.points().to_vec() })
        })
    };
    let d1 = d(Criterion::Thm34D1, j, partitions[0], true)?;
    let d2 = d(Criterion::Thm34D2, o, partitions[1], false)?
        .with_note("weight exponent enters with a minus sign here and a plus sign in D1, as stated");
    Ok(CriterionReport::composite(Criterion::Thm34, vec![c, d1, d2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{preset, PresetId, ProblemFile, DEFAULT_EPS_Q};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn build(json_r: &str, q: &str) -> CoefficientSystem {
        ProblemFile::from_json(&format!(
            r#"{{"t0":0,"P":[["0","0"],["0","0"]],"Q":{q},"R":{json_r},"S":[["0","0"],["0","0"]]}}"#
        ))
        .unwrap()
        .build()
        .unwrap()
    }

    #[test]
    fn demo_satisfies_cone_conditions() {
        let cs = preset(PresetId::Thm33Demo).unwrap();
        let p = Partition::trivial(0.0, 50.0).unwrap();
        let r = check_lemma22(&cs, [&p, &p], SignPattern::Plus).unwrap();
        assert!(r.holds(), "{r:#?}");
        assert!(r.component(Criterion::Lemma22B).unwrap().notes[0].contains("r_kk >= 0"));
        let r = check_lemma22(&cs, [&p, &p], SignPattern::Minus).unwrap();
        assert!(r.component(Criterion::Lemma22A).unwrap().fails());
    }

    #[test]
    fn example32_fails_b() {
        let cs = preset(PresetId::Example32).unwrap();
        let p = Partition::uniform(0.0, 8.0 * PI, 2.0 * PI).unwrap();
        let r = check_lemma22(&cs, [&p, &p], SignPattern::Plus).unwrap();
        assert!(r.component(Criterion::Lemma22A).unwrap().holds());
        let b = r.component(Criterion::Lemma22B).unwrap();
        assert!(b.fails());
        match b.witnesses[0] {
            Witness::Point { t } => assert!(t.sin() <= 0.0 && t > PI, "{t}"),
            ref w => panic!("{w:?}"),
        }
    }

    #[test]
    fn zero_forcing_has_zero_margin() {
        let cs = build(r#"[["0","0"],["0","0"]]"#, r#"[["1","0"],["0","1"]]"#);
        let p = Partition::trivial(0.0, 5.0).unwrap();
        let r = check_lemma22(&cs, [&p, &p], SignPattern::Plus).unwrap();
        let b = r.component(Criterion::Lemma22B).unwrap();
        assert!(b.holds());
        assert_eq!(b.margin, 0.0);
    }

    #[test]
    fn cells_accept_sign_changing_forcing() {
        // With a = q = 0 the cell integral is R(t) - R(ξ) for R = t + 2 sin t, which stays
        // nonnegative from 0 but dips below its value at π right after π.
        let cs = build(r#"[["1 + 2*cos(t)","0"],["0","1"]]"#, r#"[["0","0"],["0","0"]]"#);
        let whole = Partition::trivial(0.0, 3.0 * PI).unwrap();
        let r = check_lemma22(&cs, [&whole, &whole], SignPattern::Plus).unwrap();
        let b = r.component(Criterion::Lemma22B).unwrap();
        assert!(b.holds(), "{b:#?}");
        assert!(b.notes[0].contains("all 1 cells"));
        let split = Partition::new(vec![0.0, PI, 3.0 * PI]).unwrap();
        let r = check_lemma22(&cs, [&split, &split], SignPattern::Plus).unwrap();
        let b = r.component(Criterion::Lemma22B).unwrap();
        assert!(b.fails());
        match b.witnesses[0] {
            Witness::Point { t } => assert!(t > PI && t < 2.0 * PI, "{t}"),
            ref w => panic!("{w:?}"),
        }
    }

    #[test]
    fn saddle_demo_satisfies_c_and_d() {
        let cs = preset(PresetId::Thm34Demo).unwrap();
        let p = Partition::trivial(0.0, 50.0).unwrap();
        let r = check_thm34(&cs, Index::One, [&p, &p], DEFAULT_EPS_Q).unwrap();
        assert!(r.holds(), "{r:#?}");
        for c in [Criterion::Thm34C, Criterion::Thm34D1, Criterion::Thm34D2] {
            assert!(r.component(c).unwrap().holds());
        }
    }

    #[test]
    fn c_fails_on_harmonic_and_example33() {
        let p = Partition::trivial(0.0, 20.0).unwrap();
        for id in [PresetId::Remark34, PresetId::Example33 { lambda: 2.0 }] {
            let cs = preset(id).unwrap();
            let r = check_thm34(&cs, Index::One, [&p, &p], DEFAULT_EPS_Q).unwrap();
            assert!(r.component(Criterion::Thm34C).unwrap().fails(), "{id}");
        }
    }

    #[test]
    fn d_cells_without_shortcut() {
        // F_1 = cos t, a = 0, q_1 = 1: the cell integral from 0 is ∫ e^{1 - cos s} cos s ds,
        // positive up to a little past π/2 and negative at π.
        let cs = build(r#"[["cos(t)","0"],["0","-1"]]"#, r#"[["1","0"],["0","-1"]]"#);
        let short = Partition::new(vec![0.0, FRAC_PI_2 + 0.3]).unwrap();
        let r = check_thm34(&cs, Index::One, [&short, &short], DEFAULT_EPS_Q).unwrap();
        let d1 = r.component(Criterion::Thm34D1).unwrap();
        assert!(d1.holds(), "{d1:#?}");
        assert!(d1.notes.is_empty());
        assert!(r.component(Criterion::Thm34D2).unwrap().holds());
        let long = Partition::new(vec![0.0, PI]).unwrap();
        let r = check_thm34(&cs, Index::One, [&long, &long], DEFAULT_EPS_Q).unwrap();
        let d1 = r.component(Criterion::Thm34D1).unwrap();
        assert!(d1.fails());
        match d1.witnesses[0] {
            Witness::Point { t } => assert!(t > FRAC_PI_2 && t <= PI, "{t}"),
            ref w => panic!("{w:?}"),
        }
    }
}
