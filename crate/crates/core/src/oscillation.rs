//! Zeros of `det Φ`, prepared-ness and sign identities of concrete solutions.

use serde::Serialize;
use thiserror::Error;

use crate::integrate::{Trajectory, TrajectoryKind};
use crate::system::Matrix2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OscillationError {
    #[error("trajectory on [{start}, {end}] does not cover [{a}, {b}]")]
    NotCovered { a: f64, b: f64, start: f64, end: f64 },
    #[error("expected a matrix-pair trajectory, got {0:?}")]
    WrongKind(TrajectoryKind),
    #[error("{0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroKind {
    /// `det Φ` changes sign.
    Transversal,
    /// `det Φ` touches zero without changing sign.
    Tangential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetZero {
    pub t: f64,
    pub kind: ZeroKind,
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ZeroList {
    pub zeros: Vec<DetZero>,
}

impl ZeroList {
    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.zeros.iter().map(|z| z.t).collect()
    }

    /// Zeros with `t` in `[a, b]`.
    pub fn count_in(&self, a: f64, b: f64) -> usize {
        self.zeros.iter().filter(|z| a <= z.t && z.t <= b).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroOptions {
    /// Final bracket width.
    pub tol_t: f64,
    /// A local minimum of `|det Φ|` counts as a zero when it is below
    /// `touch_tol` times the largest `|det Φ|` on the neighbouring humps.
    pub touch_tol: f64,
    /// Extra samples inside each accepted step.
    pub samples_per_step: usize,
    /// Two sign changes closer than this are one tangential zero split by rounding.
    pub merge_width: f64,
}

impl Default for ZeroOptions {
    fn default() -> Self {
        ZeroOptions {
            tol_t: 1e-10,
            touch_tol: 1e-7,
            samples_per_step: 3,
            merge_width: 1e-6,
        }
    }
}

fn det_phi(traj: &Trajectory, t: f64, buf: &mut [f64]) -> f64 {
    traj.eval_into(t, buf);
    buf[0] * buf[3] - buf[1] * buf[2]
}

fn require_pair(traj: &Trajectory) -> Result<(), OscillationError> {
    if traj.kind() != TrajectoryKind::MatrixPair {
        return Err(OscillationError::WrongKind(traj.kind()));
    }
    Ok(())
}

fn require_cover(traj: &Trajectory, a: f64, b: f64) -> Result<(), OscillationError> {
    if !(a <= b) || !traj.covers(a, b) {
        return Err(OscillationError::NotCovered {
            a,
            b,
            start: traj.start(),
            end: traj.end(),
        });
    }
    Ok(())
}

/// Sample times: the interval ends, every node inside, and evenly spaced points within each step.
fn sample_times(traj: &Trajectory, a: f64, b: f64, per_step: usize) -> Vec<f64> {
    let mut out = vec![a];
    let times = traj.times();
    for w in times.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= a || lo >= b {
            continue;
        }
        for k in 1..=per_step {
            let s = lo + (hi - lo) * k as f64 / (per_step + 1) as f64;
            if s > a && s < b {
                out.push(s);
            }
        }
        if hi > a && hi < b {
            out.push(hi);
        }
    }
    if b > a {
        out.push(b);
    }
    out.dedup();
    out
}

fn bisect(traj: &Trajectory, mut lo: f64, mut hi: f64, tol: f64, buf: &mut [f64]) -> (f64, f64) {
    let mut g_lo = det_phi(traj, lo, buf);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = det_phi(traj, mid, buf);
        if g == 0.0 {
            return (mid, mid);
        }
        if (g > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Golden-section minimisation of `|det Φ|` on `[lo, hi]`.
fn golden_min(traj: &Trajectory, mut lo: f64, mut hi: f64, tol: f64, buf: &mut [f64]) -> (f64, f64, (f64, f64)) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = det_phi(traj, x1, buf).abs();
    let mut f2 = det_phi(traj, x2, buf).abs();
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = det_phi(traj, x1, buf).abs();
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = det_phi(traj, x2, buf).abs();
        }
        if x1 >= x2 {
            break;
        }
    }
    let (t, v) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    (t, v, (lo.min(t), hi.max(t)))
}

/// Zeros of `det Φ` on `[a, b]` for a matrix-pair trajectory.
///
/// Sign changes between samples are bisected down to `tol_t`; local minima of
/// `|det Φ|` are refined by golden section and kept as tangential zeros when
/// small relative to the surrounding humps. The hump scale is local because
/// `det Φ` of a growing solution can span many orders of magnitude.
pub fn detect_zeros(traj: &Trajectory, interval: (f64, f64), opts: &ZeroOptions) -> Result<ZeroList, OscillationError> {
    require_pair(traj)?;
    let (a, b) = interval;
    require_cover(traj, a, b)?;
    if !(opts.tol_t > 0.0 && opts.touch_tol > 0.0) {
        return Err(OscillationError::InvalidArgument("tol_t and touch_tol must be positive".into()));
    }
    let mut buf = [0.0; 8];
    let ts = sample_times(traj, a, b, opts.samples_per_step);
    let gs: Vec<f64> = ts.iter().map(|&t| det_phi(traj, t, &mut buf)).collect();
    let n = ts.len();

    // Indices splitting |det| into humps: sign changes and local minima.
    let is_break = |i: usize| -> bool {
        if i == 0 || i + 1 >= n {
            return true;
        }
        gs[i] == 0.0 || gs[i] * gs[i + 1] < 0.0 || (gs[i].abs() <= gs[i - 1].abs() && gs[i].abs() <= gs[i + 1].abs())
    };
    let breaks: Vec<usize> = (0..n).filter(|&i| is_break(i)).collect();
    let hump_max = |from: usize, to: usize| gs[from..=to].iter().fold(0.0f64, |m, g| m.max(g.abs()));

    let mut zeros = Vec::new();
    for i in 0..n.saturating_sub(1) {
        if gs[i] * gs[i + 1] < 0.0 {
            let (lo, hi) = bisect(traj, ts[i], ts[i + 1], opts.tol_t, &mut buf);
            zeros.push(DetZero {
                t: 0.5 * (lo + hi),
                kind: ZeroKind::Transversal,
                bracket: (lo, hi),
            });
        }
    }
    for (bi, &i) in breaks.iter().enumerate() {
        let g = gs[i];
        let left = if bi > 0 { breaks[bi - 1] } else { 0 };
        let right = breaks.get(bi + 1).copied().unwrap_or(n - 1);
        let scale = hump_max(left, i).max(hump_max(i, right));
        if g == 0.0 {
            let prev = if i > 0 { gs[i - 1] } else { 0.0 };
            let next = if i + 1 < n { gs[i + 1] } else { 0.0 };
            let kind = if prev * next < 0.0 {
                ZeroKind::Transversal
            } else {
                ZeroKind::Tangential
            };
            zeros.push(DetZero {
                t: ts[i],
                kind,
                bracket: (ts[i], ts[i]),
            });
            continue;
        }
        if i == 0 || i + 1 >= n {
            continue;
        }
        let same_sign = gs[i - 1] * g > 0.0 && gs[i + 1] * g > 0.0;
        if !same_sign || !(g.abs() <= gs[i - 1].abs() && g.abs() <= gs[i + 1].abs()) {
            continue;
        }
        let (t, v, bracket) = golden_min(traj, ts[i - 1], ts[i + 1], opts.tol_t, &mut buf);
        if v <= opts.touch_tol * scale {
            zeros.push(DetZero {
                t,
                kind: ZeroKind::Tangential,
                bracket,
            });
        }
    }
    zeros.sort_by(|x, y| x.t.total_cmp(&y.t));

    // Rounding can split a double zero into two close sign changes; and a
    // sampled minimum can sit next to a sign change already found.
    let mut merged: Vec<DetZero> = Vec::with_capacity(zeros.len());
    for z in zeros {
        if let Some(last) = merged.last_mut() {
            if z.bracket.0 - last.bracket.1 <= opts.merge_width {
                let both_sign_changes = last.kind == ZeroKind::Transversal && z.kind == ZeroKind::Transversal;
                let bracket = (last.bracket.0.min(z.bracket.0), last.bracket.1.max(z.bracket.1));
                *last = DetZero {
                    t: if both_sign_changes { 0.5 * (last.t + z.t) } else { last.t },
                    kind: if both_sign_changes { ZeroKind::Tangential } else { last.kind },
                    bracket,
                };
                continue;
            }
        }
        merged.push(z);
    }
    Ok(ZeroList { zeros: merged })
}

/// Sign changes of `φ` (the first component) on `[a, b]`, bisected to `tol_t`.
pub fn scalar_zeros(traj: &Trajectory, interval: (f64, f64), tol_t: f64) -> Result<Vec<f64>, OscillationError> {
    let (a, b) = interval;
    require_cover(traj, a, b)?;
    let ts = sample_times(traj, a, b, 3);
    let phi = |t: f64| traj.eval(t).expect("t within span")[0];
    let mut zeros = Vec::new();
    let mut prev = (ts[0], phi(ts[0]));
    if prev.1 == 0.0 {
        zeros.push(prev.0);
    }
    for &t in &ts[1..] {
        let g = phi(t);
        if g == 0.0 {
            zeros.push(t);
        } else if prev.1 * g < 0.0 {
            let (mut lo, mut hi, g_lo) = (prev.0, t, prev.1);
            while hi - lo > tol_t {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if (phi(mid) > 0.0) == (g_lo > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            zeros.push(0.5 * (lo + hi));
        }
        prev = (t, g);
    }
    Ok(zeros)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PreparedCheck {
    pub is_prepared: bool,
    /// Largest `max|Φ*Ψ - Ψ*Φ| / (1 + ‖Φ‖‖Ψ‖)` over the probes.
    pub max_asymmetry: f64,
    /// `max|Φ*Ψ - Ψ*Φ|` of the initial data, unscaled.
    pub initial_asymmetry: f64,
    pub tolerance: f64,
}

pub const PREPARED_TOL: f64 = 1e-8;

fn asymmetry(phi: Matrix2, psi: Matrix2) -> f64 {
    let a = phi.transpose() * psi - psi.transpose() * phi;
    a.max_abs()
}

/// Whether `Φ*Ψ` stays symmetric along the trajectory.
pub fn check_prepared(traj: &Trajectory, probes: usize) -> Result<PreparedCheck, OscillationError> {
    require_pair(traj)?;
    if probes < 2 {
        return Err(OscillationError::InvalidArgument("at least two probes are needed".into()));
    }
    let (phi0, psi0) = traj.matrix_pair_node(0);
    let initial_asymmetry = asymmetry(phi0, psi0);
    let initial_ok = initial_asymmetry <= 4.0 * f64::EPSILON * (1.0 + phi0.norm() * psi0.norm());
    let (a, b) = (traj.start(), traj.end());
    let mut max_asymmetry = 0.0f64;
    for i in 0..probes {
        let t = a + (b - a) * i as f64 / (probes - 1) as f64;
        let (phi, psi) = traj.matrix_pair_at(t).expect("probe within span");
        max_asymmetry = max_asymmetry.max(asymmetry(phi, psi) / (1.0 + phi.norm() * psi.norm()));
    }
    Ok(PreparedCheck {
        is_prepared: initial_ok && max_asymmetry <= PREPARED_TOL,
        max_asymmetry,
        initial_asymmetry,
        tolerance: PREPARED_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Classification {
    /// At least one zero of `det Φ` on `interval`.
    OscillatoryOn { interval: (f64, f64), zeros: usize },
    /// No zero found up to `horizon`; says nothing beyond it.
    NonoscillatoryUpTo { horizon: f64 },
}

impl Classification {
    pub fn is_oscillatory(&self) -> bool {
        matches!(self, Classification::OscillatoryOn { .. })
    }

    pub fn zero_count(&self) -> usize {
        match self {
            Classification::OscillatoryOn { zeros, .. } => *zeros,
            Classification::NonoscillatoryUpTo { .. } => 0,
        }
    }
}

/// Classification on `[a, b]` together with the zeros found there.
pub fn classify_on(
    traj: &Trajectory,
    interval: (f64, f64),
    opts: &ZeroOptions,
) -> Result<(Classification, ZeroList), OscillationError> {
    let zeros = detect_zeros(traj, interval, opts)?;
    let c = if zeros.is_empty() {
        Classification::NonoscillatoryUpTo { horizon: interval.1 }
    } else {
        Classification::OscillatoryOn {
            interval,
            zeros: zeros.len(),
        }
    };
    Ok((c, zeros))
}

/// Classification on `[start, horizon]`.
pub fn classify_solution(traj: &Trajectory, horizon: f64, opts: &ZeroOptions) -> Result<Classification, OscillationError> {
    Ok(classify_on(traj, (traj.start(), horizon), opts)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignMode {
    /// `sign det Φ = sign det Ψ ≠ 0`.
    Same,
    /// `sign det Φ = -sign det Ψ ≠ 0`.
    Opposite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignViolation {
    pub t: f64,
    pub det_phi: f64,
    pub det_psi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignIdentityReport {
    pub mode: SignMode,
    pub holds: bool,
    pub nodes_checked: usize,
    pub first_violation: Option<SignViolation>,
}

/// Checks the sign relation between `det Φ` and `det Ψ` at every accepted node.
pub fn verify_sign_identity(traj: &Trajectory, mode: SignMode) -> Result<SignIdentityReport, OscillationError> {
    require_pair(traj)?;
    let mut first_violation = None;
    for i in 0..traj.len() {
        let (phi, psi) = traj.matrix_pair_node(i);
        let (dp, ds) = (phi.det(), psi.det());
        let ok = dp != 0.0
            && ds != 0.0
            && match mode {
                SignMode::Same => (dp > 0.0) == (ds > 0.0),
                SignMode::Opposite => (dp > 0.0) != (ds > 0.0),
            };
        if !ok {
            first_violation = Some(SignViolation {
                t: traj.times()[i],
                det_phi: dp,
                det_psi: ds,
            });
            break;
        }
    }
    Ok(SignIdentityReport {
        mode,
        holds: first_violation.is_none(),
        nodes_checked: traj.len(),
        first_violation,
    })
}

/// JSON zero report for one solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroReport {
    pub zeros: Vec<DetZero>,
    pub prepared: bool,
    pub classification: Classification,
}

impl ZeroReport {
    pub fn new(zeros: ZeroList, prepared: &PreparedCheck, classification: Classification) -> Self {
        ZeroReport {
            zeros: zeros.zeros,
            prepared: prepared.is_prepared,
            classification,
        }
    }
}
