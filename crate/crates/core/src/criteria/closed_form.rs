//! Variation-of-constants formulas for the off-diagonal Riccati entries,
//! evaluated by quadrature over the dense diagonal entries.
//!
//! With `E_12 = ∫(q_1 y_11 + q_2 y_22 + a_21)`:
//! `y_12(t) = e^{-E_12(t)} [y_12(t_a) - ∫_{t_a}^t e^{E_12} (p_12 y_11 - s_12 y_22 - r_12)]`,
//! and `y_21` likewise with `a_12` and `p_21 y_22 - s_21 y_11 - r_21`.

use super::CriteriaError;
use crate::expr::EvalError;
use crate::integrate::{IntegrateError, Trajectory, TrajectoryKind};
use crate::quad::{self, Antiderivative, QuadOptions};
use crate::system::{CoefficientSystem, Index, Matrix2};

type Integrand<'a> = Box<dyn FnMut(f64) -> Result<f64, EvalError> + 'a>;

const OPTS: QuadOptions = QuadOptions {
    abs_tol: 1e-12,
    rel_tol: 1e-12,
    max_intervals: 50_000,
};

fn dense_y(traj: &Trajectory, t: f64) -> Result<Matrix2, EvalError> {
    traj.riccati_at(t).ok_or(EvalError::NonFinite {
        expr: "dense Riccati output".into(),
        t,
    })
}

/// Reusable evaluator: the exponents are accumulated once over the whole trajectory.
pub struct OffDiagonalClosedForm<'a> {
    cs: &'a CoefficientSystem,
    traj: &'a Trajectory,
    exponents: [Antiderivative<Integrand<'a>>; 2],
}

impl<'a> OffDiagonalClosedForm<'a> {
    pub fn new(cs: &'a CoefficientSystem, traj: &'a Trajectory) -> Result<Self, CriteriaError> {
        if traj.kind() != TrajectoryKind::Riccati {
            return Err(IntegrateError::WrongKind {
                expected: TrajectoryKind::Riccati,
                found: traj.kind(),
            }
            .into());
        }
        let exponent = |(j, k): (Index, Index)| -> Result<Antiderivative<Integrand<'a>>, CriteriaError> {
            let f: Integrand<'a> = Box::new(move |s| {
                let v = cs.values(s)?;
                let y = dense_y(traj, s)?;
                Ok(v.q_k(Index::One) * y.a11 + v.q_k(Index::Two) * y.a22 + v.a(j, k))
            });
            Ok(Antiderivative::new(f, traj.start(), traj.end(), &OPTS)?)
        };
        Ok(OffDiagonalClosedForm {
            cs,
            traj,
            exponents: [exponent((Index::Two, Index::One))?, exponent((Index::One, Index::Two))?],
        })
    }

    /// `(y_12(t), y_21(t))` from the closed forms.
    pub fn eval(&mut self, t: f64) -> Result<(f64, f64), CriteriaError> {
        let (ta, tb) = (self.traj.start(), self.traj.end());
        if !(ta <= t && t <= tb) {
            return Err(IntegrateError::OutOfSpan { t, start: ta, end: tb }.into());
        }
        let y0 = dense_y(self.traj, ta)?;
        let (cs, traj) = (self.cs, self.traj);
        let mut out = [0.0; 2];
        for (n, ex) in self.exponents.iter_mut().enumerate() {
            let e_t = ex.eval(t)?;
            let forcing = quad::integrate(
                |s| {
                    let v = cs.values(s)?;
                    let y = dense_y(traj, s)?;
                    let g = if n == 0 {
                        v.p.a12 * y.a11 - v.s.a12 * y.a22 - v.r.a12
                    } else {
                        v.p.a21 * y.a22 - v.s.a21 * y.a11 - v.r.a21
                    };
                    Ok((ex.eval(s)? - e_t).exp() * g)
                },
                ta,
                t,
                &OPTS,
            );
            let forcing = match forcing {
                Ok(q) => q.value,
                Err(quad::QuadError::NotConverged { value, .. }) => value,
                Err(e) => return Err(e.into()),
            };
            let start = if n == 0 { y0.a12 } else { y0.a21 };
            out[n] = (-e_t).exp() * start - forcing;
        }
        Ok((out[0], out[1]))
    }
}

/// One-shot form of [`OffDiagonalClosedForm::eval`].
pub fn offdiag_closed_form(cs: &CoefficientSystem, traj: &Trajectory, t: f64) -> Result<(f64, f64), CriteriaError> {
    OffDiagonalClosedForm::new(cs, traj)?.eval(t)
}
