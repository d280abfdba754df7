use std::io::{self, Write};

use serde::Serialize;

use crate::system::Matrix2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    /// `(Φ, Ψ)`, 8 components: Φ row-major then Ψ row-major.
    MatrixPair,
    /// `Y`, 4 components row-major.
    Riccati,
    /// `(φ, ψ)`.
    ScalarPair,
    /// `(θ, ∫p_jj, ∫s_jj, ln ρ)` measured from the span start.
    Phase,
    /// Anything else integrated through [`super::solve`].
    Auxiliary,
}

impl TrajectoryKind {
    pub fn columns(&self, dim: usize) -> Vec<String> {
        let fixed: &[&str] = match self {
            TrajectoryKind::MatrixPair => &[
                "phi11", "phi12", "phi21", "phi22", "psi11", "psi12", "psi21", "psi22",
            ],
            TrajectoryKind::Riccati => &["y11", "y12", "y21", "y22"],
            TrajectoryKind::ScalarPair => &["phi", "psi"],
            TrajectoryKind::Phase => &["theta", "int_p", "int_s", "log_rho"],
            TrajectoryKind::Auxiliary => &[],
        };
        if fixed.len() == dim {
            fixed.iter().map(|s| s.to_string()).collect()
        } else {
            (0..dim).map(|i| format!("y{i}")).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    ReachedEnd,
    /// The state left every bounded set: `t_escape` is the last node reached
    /// and `bracket` an estimated interval holding the escape time.
    BlowUp { t_escape: f64, bracket: (f64, f64) },
    StepFailure { t: f64, reason: String },
}

/// Dense numerical solution.
///
/// Each accepted step stores the five Dormand-Prince interpolation vectors,
/// so the solution can be evaluated (and differentiated) anywhere in span.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub(crate) kind: TrajectoryKind,
    pub(crate) dim: usize,
    pub(crate) times: Vec<f64>,
    pub(crate) states: Vec<f64>,
    pub(crate) dense: Vec<f64>,
    pub(crate) termination: Termination,
}

impl Trajectory {
    pub fn kind(&self) -> TrajectoryKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn termination(&self) -> &Termination {
        &self.termination
    }

    pub fn reached_end(&self) -> bool {
        self.termination == Termination::ReachedEnd
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn covers(&self, a: f64, b: f64) -> bool {
        self.start() <= a && b <= self.end()
    }

    /// Index of the step `[times[i], times[i+1]]` holding `t`.
    fn step_index(&self, t: f64) -> Option<usize> {
        if !(self.start()..=self.end()).contains(&t) || self.len() < 2 {
            return None;
        }
        let i = self.times.partition_point(|&x| x <= t);
        Some(i.saturating_sub(1).min(self.len() - 2))
    }

    fn coeffs(&self, step: usize) -> &[f64] {
        let w = 5 * self.dim;
        &self.dense[step * w..(step + 1) * w]
    }

    /// State at `t`, or `None` outside the integrated span.
    pub fn eval(&self, t: f64) -> Option<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out).then_some(out)
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) -> bool {
        if self.len() == 1 && t == self.start() {
            out.copy_from_slice(self.state(0));
            return true;
        }
        let Some(i) = self.step_index(t) else {
            return false;
        };
        if t == self.times[i] {
            out.copy_from_slice(self.state(i));
            return true;
        }
        if t == self.times[i + 1] {
            out.copy_from_slice(self.state(i + 1));
            return true;
        }
        let h = self.times[i + 1] - self.times[i];
        let th = (t - self.times[i]) / h;
        let th1 = 1.0 - th;
        let c = self.coeffs(i);
        let n = self.dim;
        for (k, o) in out.iter_mut().enumerate() {
            let (r1, r2, r3, r4, r5) = (c[k], c[n + k], c[2 * n + k], c[3 * n + k], c[4 * n + k]);
            *o = r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
        }
        true
    }

    /// Time derivative of the dense interpolant at `t`.
    pub fn derivative(&self, t: f64) -> Option<Vec<f64>> {
        let i = self.step_index(t)?;
        let h = self.times[i + 1] - self.times[i];
        let th = (t - self.times[i]) / h;
        let th1 = 1.0 - th;
        let c = self.coeffs(i);
        let n = self.dim;
        let out = (0..n)
            .map(|k| {
                let (r2, r3, r4, r5) = (c[n + k], c[2 * n + k], c[3 * n + k], c[4 * n + k]);
                let u = r4 + th1 * r5;
                let v = r3 + th * u;
                let dv = u - th * r5;
                let w = r2 + th1 * v;
                let dw = -v + th1 * dv;
                (w + th * dw) / h
            })
            .collect();
        Some(out)
    }

    /// `(Φ, Ψ)` at `t` for a matrix-pair trajectory.
    pub fn matrix_pair_at(&self, t: f64) -> Option<(Matrix2, Matrix2)> {
        debug_assert_eq!(self.kind, TrajectoryKind::MatrixPair);
        let y = self.eval(t)?;
        Some((Matrix2::from_slice(&y[0..4]), Matrix2::from_slice(&y[4..8])))
    }

    pub fn matrix_pair_node(&self, i: usize) -> (Matrix2, Matrix2) {
        let y = self.state(i);
        (Matrix2::from_slice(&y[0..4]), Matrix2::from_slice(&y[4..8]))
    }

    /// `Y` at `t` for a Riccati trajectory.
    pub fn riccati_at(&self, t: f64) -> Option<Matrix2> {
        debug_assert_eq!(self.kind, TrajectoryKind::Riccati);
        self.eval(t).map(|y| Matrix2::from_slice(&y))
    }

    /// `(φ, ψ)` at `t` for a scalar-pair trajectory.
    pub fn scalar_at(&self, t: f64) -> Option<(f64, f64)> {
        self.eval(t).map(|y| (y[0], y[1]))
    }

    /// Prüfer angle at `t` for a phase trajectory.
    pub fn phase_at(&self, t: f64) -> Option<f64> {
        self.eval(t).map(|y| y[0])
    }

    /// `(φ, ψ) = (e^{∫p} ρ sin θ, e^{∫s} ρ cos θ)` rebuilt from a phase trajectory.
    pub fn prufer_reconstruct(&self, t: f64) -> Option<(f64, f64)> {
        debug_assert_eq!(self.kind, TrajectoryKind::Phase);
        let y = self.eval(t)?;
        let (theta, int_p, int_s, log_rho) = (y[0], y[1], y[2], y[3]);
        Some((
            (int_p + log_rho).exp() * theta.sin(),
            (int_s + log_rho).exp() * theta.cos(),
        ))
    }

    /// CSV with header `t,<columns>` and one row per accepted node, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let cols = self.kind.columns(self.dim);
        writeln!(w, "t,{}", cols.join(","))?;
        for i in 0..self.len() {
            write!(w, "{:.16e}", self.times[i])?;
            for v in self.state(i) {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}
