//! Dormand-Prince 5(4) with the standard fourth-order continuous extension.

use super::trajectory::{Termination, Trajectory, TrajectoryKind};
use super::{IntegrateError, IntegratorConfig};
use crate::expr::EvalError;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

/// Right-hand side `f(t, y, dy)`.
pub trait Rhs {
    fn eval(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), EvalError>;
}

impl<F> Rhs for F
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), EvalError>,
{
    fn eval(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), EvalError> {
        self(t, y, dy)
    }
}

fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], cfg: &IntegratorConfig) -> f64 {
    let n = err.len() as f64;
    let sum: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sk = cfg.atol + cfg.rtol * a.abs().max(b.abs());
            (e / sk).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

fn max_abs(y: &[f64]) -> f64 {
    y.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn initial_step<R: Rhs>(
    rhs: &mut R,
    t: f64,
    y: &[f64],
    f0: &[f64],
    h_max: f64,
    cfg: &IntegratorConfig,
) -> Result<f64, EvalError> {
    let scaled = |v: &[f64]| {
        let s: f64 = v
            .iter()
            .zip(y)
            .map(|(x, yi)| (x / (cfg.atol + cfg.rtol * yi.abs())).powi(2))
            .sum();
        (s / v.len() as f64).sqrt()
    };
    let d0 = scaled(y);
    let d1 = scaled(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(h_max);
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
    let mut f1 = vec![0.0; y.len()];
    rhs.eval(t + h0, &y1, &mut f1)?;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = scaled(&diff) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(h_max))
}

/// Integrates `y' = f(t, y)` from `t_a` to `t_b`.
///
/// With `detect_blow_up`, the run ends in [`Termination::BlowUp`] once some
/// component exceeds `cfg.escape_norm` while the max-norm has increased over
/// the last three accepted steps, or when the step size underflows while the
/// norm is still growing.
pub fn solve<R: Rhs>(
    kind: TrajectoryKind,
    mut rhs: R,
    t_a: f64,
    t_b: f64,
    y0: &[f64],
    cfg: &IntegratorConfig,
    detect_blow_up: bool,
) -> Result<Trajectory, IntegrateError> {
    cfg.validate()?;
    if !(t_a.is_finite() && t_b.is_finite() && t_a < t_b) {
        return Err(IntegrateError::InvalidSpan { t_a, t_b });
    }
    let n = y0.len();
    let h_max = cfg.max_step.unwrap_or((t_b - t_a) / 100.0);
    let h_min_rel = 1e-14;

    let mut traj = Trajectory {
        kind,
        dim: n,
        times: vec![t_a],
        states: y0.to_vec(),
        dense: Vec::new(),
        termination: Termination::ReachedEnd,
    };

    let mut t = t_a;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    rhs.eval(t, &y, &mut k1)?;
    let mut h = initial_step(&mut rhs, t, &y, &k1, h_max, cfg)?;

    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut norms = [max_abs(&y); 3];
    let mut last_rejected = false;

    while t < t_b {
        if traj.times.len() >= cfg.max_nodes {
            traj.termination = Termination::StepFailure {
                t,
                reason: format!("node limit {} reached", cfg.max_nodes),
            };
            return Ok(traj);
        }
        let h_floor = h_min_rel * t.abs().max(1.0);
        if h < h_floor {
            let growing = norms[0] < norms[1] && norms[1] < norms[2];
            traj.termination = if detect_blow_up && growing {
                Termination::BlowUp {
                    t_escape: t,
                    bracket: (t, t + h_floor),
                }
            } else {
                Termination::StepFailure {
                    t,
                    reason: format!("step size {h:e} underflowed"),
                }
            };
            return Ok(traj);
        }
        let last = t + h >= t_b;
        if last {
            h = t_b - t;
        }

        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        rhs.eval(t + C2 * h, &ytmp, &mut k2)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs.eval(t + C3 * h, &ytmp, &mut k3)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs.eval(t + C4 * h, &ytmp, &mut k4)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs.eval(t + C5 * h, &ytmp, &mut k5)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = if last { t_b } else { t + h };
        rhs.eval(t_new, &ytmp, &mut k6)?;
        for i in 0..n {
            ynew[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        rhs.eval(t_new, &ynew, &mut k7)?;
        for i in 0..n {
            err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let mut e = error_norm(&err, &y, &ynew, cfg);
        if !e.is_finite() || ynew.iter().any(|v| !v.is_finite()) {
            e = f64::INFINITY;
        }

        if e > 1.0 {
            let fac = if e.is_finite() {
                (SAFETY * e.powf(-0.2)).max(FAC_MIN)
            } else {
                FAC_MIN
            };
            h *= fac;
            last_rejected = true;
            continue;
        }

        // Accepted: store dense coefficients for [t, t_new].
        traj.dense.extend_from_slice(&y[..n]);
        for i in 0..n {
            traj.dense.push(ynew[i] - y[i]);
        }
        for i in 0..n {
            traj.dense.push(h * k1[i] - (ynew[i] - y[i]));
        }
        for i in 0..n {
            let ydiff = ynew[i] - y[i];
            let bspl = h * k1[i] - ydiff;
            traj.dense.push(ydiff - h * k7[i] - bspl);
        }
        for i in 0..n {
            traj.dense.push(h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]));
        }
        traj.times.push(t_new);
        traj.states.extend_from_slice(&ynew);

        t = t_new;
        std::mem::swap(&mut y, &mut ynew);
        std::mem::swap(&mut k1, &mut k7);

        let norm = max_abs(&y);
        norms = [norms[1], norms[2], norm];
        if detect_blow_up && norm > cfg.escape_norm && norms[0] < norms[1] && norms[1] < norms[2] {
            let speed = max_abs(&k1);
            let remaining = if speed > 0.0 { norm / speed } else { 0.0 };
            traj.termination = Termination::BlowUp {
                t_escape: t,
                bracket: (t, t + 2.0 * remaining),
            };
            return Ok(traj);
        }

        let mut fac = if e == 0.0 { FAC_MAX } else { (SAFETY * e.powf(-0.2)).clamp(FAC_MIN, FAC_MAX) };
        if last_rejected {
            fac = fac.min(1.0);
        }
        last_rejected = false;
        h = (h * fac).min(h_max);
    }
    Ok(traj)
}
