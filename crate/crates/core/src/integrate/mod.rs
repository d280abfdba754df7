//! Adaptive integration of the matrix system, its Riccati equation, the
//! reduced scalar system and the Prüfer phase equation.

mod rk;
mod trajectory;

use thiserror::Error;

use crate::expr::EvalError;
use crate::quad::{self, QuadError, QuadOptions};
use crate::system::{CoefficientSystem, Index, Matrix2};

pub use rk::{solve, Rhs};
pub use trajectory::{Termination, Trajectory, TrajectoryKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Largest step; `None` means one hundredth of the span.
    pub max_step: Option<f64>,
    pub escape_norm: f64,
    pub max_nodes: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rtol: 1e-9,
            atol: 1e-12,
            max_step: None,
            escape_norm: 1e8,
            max_nodes: 1_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        IntegratorConfig {
            rtol,
            atol,
            ..IntegratorConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        let bad = |what: &str| Err(IntegrateError::InvalidConfig(what.to_string()));
        if !(self.rtol > 0.0 && self.rtol.is_finite()) {
            return bad("rtol must be positive");
        }
        if !(self.atol > 0.0 && self.atol.is_finite()) {
            return bad("atol must be positive");
        }
        if !(self.escape_norm > 0.0) {
            return bad("escape_norm must be positive");
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0 && h.is_finite()) {
                return bad("max_step must be positive");
            }
        }
        if self.max_nodes < 2 {
            return bad("max_nodes must be at least 2");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrateError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("invalid span [{t_a}, {t_b}]")]
    InvalidSpan { t_a: f64, t_b: f64 },
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("Φ is singular at t = {t}")]
    Singular { t: f64 },
    #[error("expected a {expected:?} trajectory, got {found:?}")]
    WrongKind {
        expected: TrajectoryKind,
        found: TrajectoryKind,
    },
    #[error("t = {t} lies outside the integrated span [{start}, {end}]")]
    OutOfSpan { t: f64, start: f64, end: f64 },
}

fn check_span(cs: &CoefficientSystem, span: (f64, f64)) -> Result<(), IntegrateError> {
    let (t_a, t_b) = span;
    if !(t_a >= cs.t0() && t_a < t_b && t_b.is_finite()) {
        return Err(IntegrateError::InvalidSpan { t_a, t_b });
    }
    Ok(())
}

/// `Φ' = PΦ + QΨ, Ψ' = RΦ + SΨ` from `(Φ0, Ψ0)` at `span.0`.
pub fn integrate_matrix_system(
    cs: &CoefficientSystem,
    phi0: Matrix2,
    psi0: Matrix2,
    span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegrateError> {
    check_span(cs, span)?;
    let mut y0 = [0.0; 8];
    y0[..4].copy_from_slice(&phi0.to_array());
    y0[4..].copy_from_slice(&psi0.to_array());
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let c = cs.values(t)?;
        let phi = Matrix2::from_slice(&y[..4]);
        let psi = Matrix2::from_slice(&y[4..]);
        dy[..4].copy_from_slice(&(c.p * phi + c.q * psi).to_array());
        dy[4..].copy_from_slice(&(c.r * phi + c.s * psi).to_array());
        Ok(())
    };
    solve(TrajectoryKind::MatrixPair, rhs, span.0, span.1, &y0, cfg, false)
}

/// `Y' = -YQY - YP + SY + R`, stopping at a detected escape to infinity.
pub fn integrate_riccati(
    cs: &CoefficientSystem,
    y0: Matrix2,
    span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegrateError> {
    check_span(cs, span)?;
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let c = cs.values(t)?;
        let ym = Matrix2::from_slice(y);
        let d = -(ym * c.q * ym) - ym * c.p + c.s * ym + c.r;
        dy.copy_from_slice(&d.to_array());
        Ok(())
    };
    solve(TrajectoryKind::Riccati, rhs, span.0, span.1, &y0.to_array(), cfg, true)
}

/// The reduced scalar system `φ' = p_jj φ + q_j ψ, ψ' = F_j φ + s_jj ψ`.
pub fn integrate_scalar_system(
    cs: &CoefficientSystem,
    j: Index,
    phi0: f64,
    psi0: f64,
    span: (f64, f64),
    cfg: &IntegratorConfig,
    eps_q: f64,
) -> Result<Trajectory, IntegrateError> {
    check_span(cs, span)?;
    let jj = j.zero_based();
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let c = cs.values(t)?;
        let (p, s) = (c.p.get(jj, jj), c.s.get(jj, jj));
        dy[0] = p * y[0] + c.q_k(j) * y[1];
        dy[1] = c.f(j, eps_q) * y[0] + s * y[1];
        Ok(())
    };
    solve(TrajectoryKind::ScalarPair, rhs, span.0, span.1, &[phi0, psi0], cfg, false)
}

/// Prüfer form of the scalar system, anchored at `t1 = span.0`.
///
/// The state is `(θ, ∫p_jj, ∫s_jj, ln ρ)` with
/// `θ' = Q_j cos²θ - R_j sin²θ`, `(ln ρ)' = (Q_j + R_j) sin θ cos θ`,
/// `Q_j = e^{-∫a_jj} q_j`, `R_j = e^{∫a_jj} F_j`, all integrals from `t1`.
pub fn integrate_prufer(
    cs: &CoefficientSystem,
    j: Index,
    theta0: f64,
    log_rho0: f64,
    span: (f64, f64),
    cfg: &IntegratorConfig,
    eps_q: f64,
) -> Result<Trajectory, IntegrateError> {
    check_span(cs, span)?;
    let jj = j.zero_based();
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let c = cs.values(t)?;
        let (p, s) = (c.p.get(jj, jj), c.s.get(jj, jj));
        let w = (y[1] - y[2]).exp();
        let qj = c.q_k(j) / w;
        let rj = w * c.f(j, eps_q);
        let (sn, cn) = y[0].sin_cos();
        dy[0] = qj * cn * cn - rj * sn * sn;
        dy[1] = p;
        dy[2] = s;
        dy[3] = (qj + rj) * sn * cn;
        Ok(())
    };
    solve(TrajectoryKind::Phase, rhs, span.0, span.1, &[theta0, 0.0, 0.0, log_rho0], cfg, false)
}

/// Phase equation only, with `ρ(t1) = 1`.
pub fn integrate_phase(
    cs: &CoefficientSystem,
    j: Index,
    theta0: f64,
    span: (f64, f64),
    cfg: &IntegratorConfig,
    eps_q: f64,
) -> Result<Trajectory, IntegrateError> {
    integrate_prufer(cs, j, theta0, 0.0, span, cfg, eps_q)
}

/// Polar coordinates `(θ, ln ρ)` of a nonzero scalar initial value.
pub fn prufer_initial(phi0: f64, psi0: f64) -> (f64, f64) {
    (phi0.atan2(psi0), phi0.hypot(psi0).ln())
}

fn per_step_integral<F>(traj: &Trajectory, t: f64, mut f: F) -> Result<f64, IntegrateError>
where
    F: FnMut(f64) -> Result<f64, EvalError>,
{
    if !(traj.start()..=traj.end()).contains(&t) {
        return Err(IntegrateError::OutOfSpan {
            t,
            start: traj.start(),
            end: traj.end(),
        });
    }
    let opts = QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-13,
        max_intervals: 64,
    };
    let mut total = 0.0;
    for w in traj.times().windows(2) {
        let (a, b) = (w[0], w[1].min(t));
        if a >= t {
            break;
        }
        // The integrand is smooth inside a step; a few bisections absorb coefficient kinks.
        total += match quad::integrate(&mut f, a, b, &opts) {
            Ok(q) => q.value,
            Err(QuadError::NotConverged { value, .. }) => value,
            Err(e) => return Err(e.into()),
        };
    }
    Ok(total)
}

/// `∫_{t_a}^t tr[P + QY]`, i.e. `ln(det Φ(t) / det Φ(t_a))`, using `Y = ΨΦ⁻¹`
/// for a matrix pair or `Y` itself for a Riccati trajectory.
pub fn liouville_log_ratio(cs: &CoefficientSystem, traj: &Trajectory, t: f64) -> Result<f64, IntegrateError> {
    let kind = traj.kind();
    if !matches!(kind, TrajectoryKind::MatrixPair | TrajectoryKind::Riccati) {
        return Err(IntegrateError::WrongKind {
            expected: TrajectoryKind::Riccati,
            found: kind,
        });
    }
    let mut singular = None;
    let value = per_step_integral(traj, t, |tau| {
        let c = cs.values(tau)?;
        let state = traj.eval(tau).expect("tau within span");
        let y = match kind {
            TrajectoryKind::MatrixPair => {
                let phi = Matrix2::from_slice(&state[..4]);
                let psi = Matrix2::from_slice(&state[4..]);
                match phi.inverse() {
                    Some(inv) => psi * inv,
                    None => {
                        singular.get_or_insert(tau);
                        Matrix2::ZERO
                    }
                }
            }
            _ => Matrix2::from_slice(&state),
        };
        Ok((c.p + c.q * y).trace())
    })?;
    if let Some(t) = singular {
        return Err(IntegrateError::Singular { t });
    }
    Ok(value)
}

/// `det Φ(t) = det Φ(t_a) exp{∫_{t_a}^t tr[P + QY]}` for a matrix-pair trajectory.
pub fn liouville_det(cs: &CoefficientSystem, traj: &Trajectory, t: f64) -> Result<f64, IntegrateError> {
    if traj.kind() != TrajectoryKind::MatrixPair {
        return Err(IntegrateError::WrongKind {
            expected: TrajectoryKind::MatrixPair,
            found: traj.kind(),
        });
    }
    let det0 = Matrix2::from_slice(&traj.state(0)[..4]).det();
    Ok(det0 * liouville_log_ratio(cs, traj, t)?.exp())
}
