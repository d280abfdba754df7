//! Pointwise sign conditions and the integral conditions on `q_j` and `F_j`.

use std::f64::consts::PI;

use super::report::{Criterion, CriterionReport, Verdict, Witness};
use super::{sample_grid, CriteriaError, SIGN_TOL};
use crate::integrate::{integrate_scalar_system, solve, IntegratorConfig, TrajectoryKind};
use crate::oscillation::scalar_zeros;
use crate::quad::{self, Antiderivative, QuadOptions};
use crate::system::{Coefficient, CoefficientSystem, Index};

/// Margin at which the integral condition counts as met.
pub const IV_TOL: f64 = 1e-9;

/// First point of `[a, b]` where `q_1, q_2 >= 0` or the proviso
/// `p_{3-j,j} = s_{j,3-j}` (required where `q_{3-j}` vanishes) is violated,
/// together with the smallest `q_k` seen.
fn scan_condition_i(
    cs: &CoefficientSystem,
    j: Index,
    points: &[f64],
    eps_q: f64,
) -> Result<(f64, Option<(f64, String)>), CriteriaError> {
    let o = j.other();
    let mut margin = f64::INFINITY;
    for &t in points {
        let v = cs.values(t)?;
        let qmin = v.q_k(Index::One).min(v.q_k(Index::Two));
        margin = margin.min(qmin);
        if qmin < -SIGN_TOL {
            let k = if v.q_k(Index::One) <= v.q_k(Index::Two) { 1 } else { 2 };
            return Ok((margin, Some((t, format!("q_{k}({t}) = {qmin:e} < 0")))));
        }
        if v.q_k(o).abs() <= eps_q {
            let d = v.p.get(o.zero_based(), j.zero_based()) - v.s.get(j.zero_based(), o.zero_based());
            if d.abs() > SIGN_TOL {
                return Ok((
                    margin.min(-d.abs()),
                    Some((
                        t,
                        format!(
                            "q_{}({t}) vanishes but p_{}{} - s_{}{} = {d:e}",
                            o.number(),
                            o.number(),
                            j.number(),
                            j.number(),
                            o.number()
                        ),
                    )),
                ));
            }
        }
    }
    Ok((margin, None))
}

fn condition_i_holds_at(cs: &CoefficientSystem, j: Index, t: f64, eps_q: f64) -> Result<bool, CriteriaError> {
    Ok(scan_condition_i(cs, j, &[t], eps_q)?.1.is_none())
}

/// `q_k >= 0` (k = 1, 2) on `[a, b]`, and `p_{3-j,j} = s_{j,3-j}` wherever `|q_{3-j}| <= eps_q`.
///
/// `grid` overrides the default sampling density of 400 points per unit length.
pub fn check_condition_i(
    cs: &CoefficientSystem,
    j: Index,
    interval: (f64, f64),
    grid: Option<usize>,
    eps_q: f64,
) -> Result<CriterionReport, CriteriaError> {
    let (a, b) = interval;
    if !(a < b) || a < cs.t0() {
        return Err(CriteriaError::InvalidArgument(format!("invalid interval [{a}, {b}]")));
    }
    let points = sample_grid(a, b, grid)?;
    let (margin, violation) = scan_condition_i(cs, j, &points, eps_q)?;
    let margin = if margin.is_finite() { margin } else { 0.0 };
    Ok(match violation {
        None => CriterionReport::new(Criterion::CondI, Verdict::Holds, margin)
            .with_witness(Witness::Interval { from: a, to: b })
            .with_note(format!("{} grid points, j = {}", points.len(), j.number())),
        Some((t, why)) => CriterionReport::new(Criterion::CondI, Verdict::Fails, margin)
            .with_witness(Witness::Point { t })
            .with_note(why),
    })
}

/// `A(τ) = ∫_{t1}^τ a_jj`, tabulated on `[t1, t2]`.
fn weight_exponent<'a>(
    cs: &'a CoefficientSystem,
    j: Index,
    t1: f64,
    t2: f64,
) -> Result<Antiderivative<impl FnMut(f64) -> Result<f64, crate::expr::EvalError> + 'a>, CriteriaError> {
    Ok(Antiderivative::new(move |s| cs.a_jk(j, j, s), t1, t2, &QuadOptions::default())?)
}

/// `∫_a^b min[q_j e^{-A}, -F_j e^{A}]` with `A` anchored at `anchor <= a`.
pub fn condition_iv_integral(
    cs: &CoefficientSystem,
    j: Index,
    anchor: f64,
    a: f64,
    b: f64,
    eps_q: f64,
) -> Result<f64, CriteriaError> {
    let mut big_a = weight_exponent(cs, j, anchor, b)?;
    let opts = QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        max_intervals: 20_000,
    };
    let q = quad::integrate(
        |s| {
            let w = big_a.eval(s)?.exp();
            Ok((cs.q_k(j, s)? / w).min(-cs.f_k(j, s, eps_q)? * w))
        },
        a,
        b,
        &opts,
    )?;
    Ok(q.value)
}

/// `∫_{t1}^{t2} min[q_j e^{-∫_{t1} a_jj}, -F_j e^{∫_{t1} a_jj}] - π`; holds when `>= -1e-9`.
pub fn check_condition_iv(
    cs: &CoefficientSystem,
    j: Index,
    t1: f64,
    t2: f64,
    eps_q: f64,
) -> Result<CriterionReport, CriteriaError> {
    if !(cs.t0() <= t1 && t1 < t2 && t2.is_finite()) {
        return Err(CriteriaError::InvalidArgument(format!("invalid interval [{t1}, {t2}]")));
    }
    let margin = condition_iv_integral(cs, j, t1, t1, t2, eps_q)? - PI;
    let verdict = if margin >= -IV_TOL { Verdict::Holds } else { Verdict::Fails };
    Ok(CriterionReport::new(Criterion::CondIV, verdict, margin)
        .with_witness(Witness::Interval { from: t1, to: t2 })
        .with_note(format!("integral = {:.12}, threshold = π", margin + PI)))
}

pub const III_CHECKPOINTS: usize = 20;
pub const III_THRESHOLD: f64 = 10.0;

/// Partial integrals `G_q(T) = ∫_{t0}^T q_j e^{-∫a_jj}` and `G_F(T) = ∫_{t0}^T (-F_j) e^{∫a_jj}`
/// at 20 checkpoints up to `horizon`.
///
/// Divergence cannot be observed numerically, so the best verdict is
/// undecided-at-horizon with a note saying the partials support it.
pub fn check_condition_iii(
    cs: &CoefficientSystem,
    j: Index,
    horizon: f64,
    threshold: f64,
    eps_q: f64,
) -> Result<CriterionReport, CriteriaError> {
    let t0 = cs.t0();
    if !(horizon > t0 && horizon.is_finite()) {
        return Err(CriteriaError::InvalidArgument(format!("horizon {horizon} must exceed t0 = {t0}")));
    }
    let mut big_a = weight_exponent(cs, j, t0, horizon)?;
    let opts = QuadOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        max_intervals: 20_000,
    };
    let checkpoints: Vec<f64> = (0..=III_CHECKPOINTS)
        .map(|i| t0 + (horizon - t0) * i as f64 / III_CHECKPOINTS as f64)
        .collect();
    let (mut gq, mut gf) = (vec![0.0], vec![0.0]);
    for w in checkpoints.windows(2) {
        let q = quad::integrate(|s| Ok(cs.q_k(j, s)? * (-big_a.eval(s)?).exp()), w[0], w[1], &opts)?;
        let f = quad::integrate(|s| Ok(-cs.f_k(j, s, eps_q)? * big_a.eval(s)?.exp()), w[0], w[1], &opts)?;
        gq.push(gq.last().unwrap() + q.value);
        gf.push(gf.last().unwrap() + f.value);
    }
    let n = checkpoints.len();
    let tail = n - 5;
    let nondecreasing = |g: &[f64]| g[tail..].windows(2).all(|w| w[1] >= w[0] - 1e-12);
    let nonincreasing = |g: &[f64]| g[tail..].windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let (gq_t, gf_t) = (gq[n - 1], gf[n - 1]);
    let margin = gq_t.min(gf_t) - threshold;
    let supported = margin >= 0.0 && nondecreasing(&gq) && nondecreasing(&gf);
    let stalled = |g: &[f64], end: f64| end < threshold && nonincreasing(g);
    let failing = stalled(&gq, gq_t) || stalled(&gf, gf_t);

    let mut report = if failing {
        CriterionReport::new(Criterion::CondIII, Verdict::Fails, margin)
            .with_witness(Witness::Interval {
                from: checkpoints[tail],
                to: horizon,
            })
            .with_note("a partial integral stays below the threshold without increasing over the last checkpoints")
    } else {
        let r = CriterionReport::new(Criterion::CondIII, Verdict::UndecidedAtHorizon, margin);
        if supported {
            r.with_note("supported: both partial integrals exceed the threshold and are nondecreasing")
        } else {
            r.with_note("not supported at this horizon")
        }
    };
    report.witnesses.push(Witness::Series {
        label: "G_q".into(),
        t: checkpoints.clone(),
        values: gq,
    });
    report.witnesses.push(Witness::Series {
        label: "G_F".into(),
        t: checkpoints,
        values: gf,
    });
    Ok(report.with_note(format!("threshold = {threshold}, horizon = {horizon}")))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowOptions {
    /// Spacing of candidate left endpoints.
    pub min_gap: f64,
    pub eps_q: f64,
}

impl Default for WindowOptions {
    fn default() -> Self {
        WindowOptions {
            min_gap: 0.1,
            eps_q: crate::system::DEFAULT_EPS_Q,
        }
    }
}

/// Bisects a boolean predicate that is true at `good` and false at `bad`.
fn boundary<F>(mut good: f64, mut bad: f64, mut pred: F) -> Result<f64, CriteriaError>
where
    F: FnMut(f64) -> Result<bool, CriteriaError>,
{
    for _ in 0..200 {
        let mid = 0.5 * (good + bad);
        if mid == good || mid == bad || (good - bad).abs() < 1e-13 {
            break;
        }
        if pred(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(good)
}

/// Greedy search for disjoint intervals `[η_m, ζ_m]` on which the pointwise
/// sign condition holds and the weighted `min[...]` integral reaches `π`.
///
/// Each candidate `η` starts an admissible stretch (refined to where the sign
/// condition begins); the integral is advanced as an ODE and `ζ` is its first
/// crossing of `π`. Two or more windows count as evidence for the infinite family.
pub fn find_oscillation_windows(
    cs: &CoefficientSystem,
    j: Index,
    horizon: f64,
    opts: &WindowOptions,
) -> Result<CriterionReport, CriteriaError> {
    let t0 = cs.t0();
    if !(horizon > t0 && horizon.is_finite() && opts.min_gap > 0.0) {
        return Err(CriteriaError::InvalidArgument(format!("invalid horizon {horizon} or gap {}", opts.min_gap)));
    }
    let eps_q = opts.eps_q;
    let step = (1.0 / 400.0f64).min(opts.min_gap);
    let target = PI - 0.5 * IV_TOL;
    let cfg = IntegratorConfig {
        max_step: Some(0.05),
        ..IntegratorConfig::with_tolerances(1e-12, 1e-14)
    };

    let mut windows: Vec<(f64, f64)> = Vec::new();
    let mut best = f64::NEG_INFINITY;
    let mut stretch: Option<(f64, f64)> = None;
    let mut eta = t0;
    while eta < horizon {
        if !condition_i_holds_at(cs, j, eta, eps_q)? {
            // Walk to the next admissible point and refine where admissibility starts.
            let mut t = eta;
            let mut found = None;
            while t < horizon {
                let next = (t + step).min(horizon);
                if condition_i_holds_at(cs, j, next, eps_q)? {
                    found = Some(boundary(next, t, |s| condition_i_holds_at(cs, j, s, eps_q))?);
                    break;
                }
                if next >= horizon {
                    break;
                }
                t = next;
            }
            match found {
                Some(s) => eta = s,
                None => break,
            }
        }
        // End of the admissible stretch, reused while η stays inside it.
        let end = match stretch {
            Some((s0, s1)) if s0 <= eta && eta < s1 => s1,
            _ => {
                let mut end = eta;
                while end < horizon {
                    let next = (end + step).min(horizon);
                    if !condition_i_holds_at(cs, j, next, eps_q)? {
                        end = boundary(end, next, |s| condition_i_holds_at(cs, j, s, eps_q))?;
                        break;
                    }
                    end = next;
                }
                end
            }
        };
        stretch = Some((eta, end));
        let mut zeta = None;
        if end > eta {
            let rhs = |t: f64, y: &[f64], d: &mut [f64]| {
                let v = cs.values(t)?;
                let w = y[0].exp();
                d[0] = v.a(j, j);
                d[1] = (v.q_k(j) / w).min(-v.f(j, eps_q) * w);
                Ok(())
            };
            let tr = solve(TrajectoryKind::Auxiliary, rhs, eta, end, &[0.0, 0.0], &cfg, false)?;
            let times = tr.times();
            best = best.max(times.iter().enumerate().map(|(i, _)| tr.state(i)[1]).fold(f64::NEG_INFINITY, f64::max));
            if let Some(i) = (1..tr.len()).find(|&i| tr.state(i)[1] >= target) {
                let (mut lo, mut hi) = (times[i - 1], times[i]);
                while hi - lo > 1e-12 {
                    let mid = 0.5 * (lo + hi);
                    if mid == lo || mid == hi {
                        break;
                    }
                    if tr.eval(mid).unwrap()[1] >= target {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                zeta = Some(hi);
            }
        }
        match zeta {
            Some(z) => {
                windows.push((eta, z));
                eta = z + step;
            }
            None => eta += opts.min_gap,
        }
    }

    let mut components = Vec::new();
    let mut margin = f64::INFINITY;
    for &(a, b) in &windows {
        let ci = check_condition_i(cs, j, (a, b), None, eps_q)?;
        let iv = check_condition_iv(cs, j, a, b, eps_q)?;
        margin = margin.min(iv.margin);
        components.push(ci);
        components.push(iv);
    }
    let consistent = components.iter().all(|c| c.holds());
    let verdict = if windows.len() >= 2 && consistent { Verdict::Holds } else { Verdict::Fails };
    let margin = if verdict == Verdict::Holds {
        margin
    } else if best.is_finite() {
        best - PI
    } else {
        -PI
    };
    let mut report = CriterionReport::new(Criterion::WindowsIVm, verdict, margin);
    report.components = components;
    for &(a, b) in &windows {
        report.witnesses.push(Witness::Interval { from: a, to: b });
    }
    if verdict == Verdict::Fails {
        report.witnesses.push(Witness::Interval { from: t0, to: horizon });
    }
    let n = windows.len();
    Ok(report
        .with_note(format!("{n} window(s) found on [{t0}, {horizon}]"))
        .with_note("finite-horizon evidence only; the criterion needs infinitely many windows"))
}

/// Empirical stand-in for oscillation of the reduced scalar system: solutions
/// from `(1, 0)` and `(0, 1)` must each have at least `min_zeros` zeros of `φ`.
pub fn check_condition_ii_empirical(
    cs: &CoefficientSystem,
    j: Index,
    horizon: f64,
    min_zeros: usize,
    cfg: &IntegratorConfig,
    eps_q: f64,
) -> Result<CriterionReport, CriteriaError> {
    let t0 = cs.t0();
    let mut counts = Vec::new();
    let mut last_zeros = Vec::new();
    for (phi0, psi0) in [(1.0, 0.0), (0.0, 1.0)] {
        let tr = integrate_scalar_system(cs, j, phi0, psi0, (t0, horizon), cfg, eps_q)?;
        // A zero exactly at the start is the initial condition, not an oscillation.
        let zeros: Vec<f64> = scalar_zeros(&tr, (t0, tr.end()), 1e-10)?
            .into_iter()
            .filter(|&z| z > t0)
            .collect();
        counts.push(zeros.len());
        last_zeros = zeros;
    }
    let fewest = *counts.iter().min().unwrap();
    let margin = fewest as f64 - min_zeros as f64;
    let note = format!("zeros of φ on [{t0}, {horizon}]: {counts:?} (need {min_zeros} each)");
    let report = if fewest >= min_zeros {
        CriterionReport::new(Criterion::CondIIEmpirical, Verdict::UndecidedAtHorizon, margin)
            .with_witness(Witness::Partition { points: last_zeros })
            .with_note("supported: empirical evidence by integration, not a proof")
    } else {
        CriterionReport::new(Criterion::CondIIEmpirical, Verdict::Fails, margin)
            .with_witness(Witness::Interval { from: t0, to: horizon })
            .with_note("not enough zeros found up to the horizon")
    };
    Ok(report.with_note(note))
}

/// Sign check of one coefficient entry over a grid.
pub(crate) fn entry_sign(
    cs: &CoefficientSystem,
    which: Coefficient,
    row: Index,
    col: Index,
    points: &[f64],
    nonnegative: bool,
) -> Result<(f64, Option<f64>), CriteriaError> {
    let mut margin = f64::INFINITY;
    for &t in points {
        let v = cs.entry(which, row, col, t)?;
        let m = if nonnegative { v } else { -v };
        margin = margin.min(m);
        if m < -SIGN_TOL {
            return Ok((margin, Some(t)));
        }
    }
    Ok((margin, None))
}
