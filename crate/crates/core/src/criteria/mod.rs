//! Sufficient conditions for oscillation and non-oscillation, checked
//! numerically and reported with margins and witnesses.
//!
//! Statements about `[t0, ∞)` can only be checked up to a finite horizon;
//! such verdicts are reported as undecided or carry a note saying so.

mod cells;
mod closed_form;
mod conditions;
mod iterated;
mod report;

use thiserror::Error;

use crate::expr::EvalError;
use crate::integrate::{IntegrateError, IntegratorConfig};
use crate::oscillation::OscillationError;
use crate::quad::QuadError;
use crate::system::{CoefficientSystem, Index, DEFAULT_EPS_Q};

pub use cells::{check_lemma22, check_thm34, SignPattern, CELL_SUBGRID};
pub use closed_form::{offdiag_closed_form, OffDiagonalClosedForm};
pub use conditions::{
    check_condition_i, check_condition_ii_empirical, check_condition_iii, check_condition_iv,
    condition_iv_integral, find_oscillation_windows, WindowOptions, III_CHECKPOINTS, III_THRESHOLD, IV_TOL,
};
pub use iterated::{lagrangian_l_k, quad_i_k, quad_itilde, IteratedIntegral, IteratedKind};
pub use report::{Criterion, CriterionReport, Verdict, Witness};

/// Absolute tolerance of every pointwise sign check.
pub const SIGN_TOL: f64 = 1e-9;

/// Default grid density of sign checks, points per unit length.
pub const GRID_PER_UNIT: f64 = 400.0;
const GRID_MIN: usize = 100;
const GRID_MAX: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriteriaError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error(transparent)]
    Oscillation(#[from] OscillationError),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("{0}")]
    InvalidArgument(String),
}

/// Inclusive uniform grid on `[a, b]` with `grid` points, or 400 per unit
/// length (between 100 and 10^6) when `None`.
pub fn sample_grid(a: f64, b: f64, grid: Option<usize>) -> Result<Vec<f64>, CriteriaError> {
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(CriteriaError::InvalidArgument(format!("invalid grid interval [{a}, {b}]")));
    }
    let n = match grid {
        Some(n) if n < 2 => return Err(CriteriaError::InvalidArgument(format!("grid of {n} points"))),
        Some(n) => n,
        None => ((b - a) * GRID_PER_UNIT).ceil().clamp(GRID_MIN as f64, GRID_MAX as f64) as usize,
    };
    if a == b {
        return Ok(vec![a]);
    }
    let h = (b - a) / (n - 1) as f64;
    let mut points: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
    points[n - 1] = b;
    Ok(points)
}

/// Finite, strictly increasing sequence of times; consecutive points bound the cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    points: Vec<f64>,
}

impl Partition {
    pub fn new(points: Vec<f64>) -> Result<Self, CriteriaError> {
        if points.len() < 2 {
            return Err(CriteriaError::InvalidPartition("need at least two points".into()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(CriteriaError::InvalidPartition("non-finite point".into()));
        }
        if let Some(w) = points.windows(2).find(|w| w[0] >= w[1]) {
            return Err(CriteriaError::InvalidPartition(format!(
                "points must increase strictly: {} then {}",
                w[0], w[1]
            )));
        }
        Ok(Partition { points })
    }

    /// The single cell `[a, b]`.
    pub fn trivial(a: f64, b: f64) -> Result<Self, CriteriaError> {
        Partition::new(vec![a, b])
    }

    /// `a, a + step, ...`, with `b` as the last point.
    pub fn uniform(a: f64, b: f64, step: f64) -> Result<Self, CriteriaError> {
        if !(step > 0.0) || !(b > a) {
            return Err(CriteriaError::InvalidPartition(format!("step {step} on [{a}, {b}]")));
        }
        let n = ((b - a) / step - 1e-9).ceil().max(1.0) as usize;
        let mut points: Vec<f64> = (0..n).map(|i| a + step * i as f64).collect();
        points.push(b);
        Partition::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn cells(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn start(&self) -> f64 {
        self.points[0]
    }

    pub fn end(&self) -> f64 {
        *self.points.last().unwrap()
    }
}

/// Which result to evaluate with [`theorem_verdict`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Theorem {
    /// Sign condition on `q` plus oscillation of the reduced scalar system.
    Thm31,
    /// Sign condition on `q` plus divergence of both weighted integrals.
    Cor31,
    /// Oscillation on `[t1, t2]`.
    Cor32 { t1: f64, t2: f64 },
    /// Non-oscillation through the invariant cone.
    Thm33,
    /// Non-oscillation of the saddle type, distinguished index `j`.
    Thm34 { j: Index },
}

#[derive(Debug, Clone)]
pub struct TheoremOptions {
    pub j: Index,
    pub horizon: f64,
    pub eps_q: f64,
    /// Partitions for the cell conditions; the trivial `[t0, horizon]` when `None`.
    pub partitions: Option<[Partition; 2]>,
    pub sign_pattern: SignPattern,
    pub min_zeros: usize,
    pub threshold: f64,
    pub integrator: IntegratorConfig,
}

impl TheoremOptions {
    pub fn new(horizon: f64) -> Self {
        TheoremOptions {
            j: Index::One,
            horizon,
            eps_q: DEFAULT_EPS_Q,
            partitions: None,
            sign_pattern: SignPattern::Plus,
            min_zeros: 2,
            threshold: III_THRESHOLD,
            integrator: IntegratorConfig::default(),
        }
    }
}

/// Composes the condition checks behind one result.
pub fn theorem_verdict(
    cs: &CoefficientSystem,
    which: Theorem,
    opts: &TheoremOptions,
) -> Result<CriterionReport, CriteriaError> {
    let t0 = cs.t0();
    let (j, eps_q) = (opts.j, opts.eps_q);
    let partitions = || -> Result<[Partition; 2], CriteriaError> {
        match &opts.partitions {
            Some(p) => Ok(p.clone()),
            None => {
                let p = Partition::trivial(t0, opts.horizon)?;
                Ok([p.clone(), p])
            }
        }
    };
    let report = match which {
        Theorem::Thm31 => {
            let i = check_condition_i(cs, j, (t0, opts.horizon), None, eps_q)?;
            let ii = check_condition_ii_empirical(cs, j, opts.horizon, opts.min_zeros, &opts.integrator, eps_q)?;
            CriterionReport::composite(Criterion::Thm31, vec![i, ii])
                .with_note("oscillation of the reduced scalar system is checked by integration only")
        }
        Theorem::Cor31 => {
            let i = check_condition_i(cs, j, (t0, opts.horizon), None, eps_q)?;
            let iii = check_condition_iii(cs, j, opts.horizon, opts.threshold, eps_q)?;
            CriterionReport::composite(Criterion::Cor31, vec![i, iii])
        }
        Theorem::Cor32 { t1, t2 } => {
            let i = check_condition_i(cs, j, (t1, t2), None, eps_q)?;
            let iv = check_condition_iv(cs, j, t1, t2, eps_q)?;
            CriterionReport::composite(Criterion::Cor32, vec![i, iv])
                .with_witness(Witness::Interval { from: t1, to: t2 })
        }
        Theorem::Thm33 => {
            let [p1, p2] = partitions()?;
            let lemma = check_lemma22(cs, [&p1, &p2], opts.sign_pattern)?;
            CriterionReport::composite(Criterion::Thm33, vec![lemma])
                .with_note("finite-horizon evidence: the cell conditions are checked up to the last partition point")
        }
        Theorem::Thm34 { j } => {
            let [p1, p2] = partitions()?;
            let mut r = check_thm34(cs, j, [&p1, &p2], eps_q)?;
            r.notes
                .push("finite-horizon evidence: the cell conditions are checked up to the last partition point".into());
            r
        }
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{preset, PresetId};
    use std::f64::consts::PI;

    #[test]
    fn grid_density_and_bounds() {
        let g = sample_grid(0.0, 1.0, None).unwrap();
        assert_eq!(g.len(), 400);
        assert_eq!((g[0], g[399]), (0.0, 1.0));
        assert_eq!(sample_grid(0.0, 0.01, None).unwrap().len(), 100);
        assert_eq!(sample_grid(0.0, 1e5, None).unwrap().len(), 1_000_000);
        assert_eq!(sample_grid(0.0, 2.0, Some(5)).unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(sample_grid(1.0, 0.0, None).is_err());
        assert!(sample_grid(0.0, 1.0, Some(1)).is_err());
    }

    #[test]
    fn partitions_validate() {
        assert!(Partition::new(vec![0.0]).is_err());
        assert!(Partition::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(Partition::new(vec![0.0, f64::NAN]).is_err());
        let p = Partition::uniform(0.0, 2.0 * PI, PI / 2.0).unwrap();
        assert_eq!(p.points().len(), 5);
        assert_eq!(p.end(), 2.0 * PI);
        let p = Partition::uniform(0.0, 1.0, 0.3).unwrap();
        assert_eq!(p.cells().count(), 4);
        assert_eq!(p.cells().last().unwrap(), (0.8999999999999999, 1.0));
    }

    #[test]
    fn partitions_must_start_at_t0() {
        let cs = preset(PresetId::Thm33Demo).unwrap();
        let p = Partition::trivial(1.0, 5.0).unwrap();
        assert!(matches!(
            check_lemma22(&cs, [&p, &p], SignPattern::Plus),
            Err(CriteriaError::InvalidPartition(_))
        ));
    }

    #[test]
    fn oscillation_corollary_on_positive_arches() {
        let cs = preset(PresetId::Example32).unwrap();
        let r = theorem_verdict(&cs, Theorem::Cor31, &TheoremOptions::new(20.0 * PI)).unwrap();
        assert!(r.supported() && !r.holds(), "{r:#?}");
        assert_eq!(r.verdict, Verdict::UndecidedAtHorizon);
    }

    #[test]
    fn interval_corollary_on_half_period() {
        let cs = preset(PresetId::Example33 { lambda: PI / 2.0 }).unwrap();
        let r = theorem_verdict(
            &cs,
            Theorem::Cor32 {
                t1: 2.0 * PI,
                t2: 3.0 * PI,
            },
            &TheoremOptions::new(3.0 * PI),
        )
        .unwrap();
        assert!(r.holds(), "{r:#?}");
        assert!(r.margin.abs() < 1e-8);
    }

    #[test]
    fn cone_theorem_on_demo() {
        let cs = preset(PresetId::Thm33Demo).unwrap();
        let r = theorem_verdict(&cs, Theorem::Thm33, &TheoremOptions::new(50.0)).unwrap();
        assert!(r.holds(), "{r:#?}");
        let r = theorem_verdict(&cs, Theorem::Thm34 { j: Index::One }, &TheoremOptions::new(50.0)).unwrap();
        assert!(r.fails());
    }

    #[test]
    fn scalar_oscillation_theorem() {
        let cs = preset(PresetId::Remark34).unwrap();
        let r = theorem_verdict(&cs, Theorem::Thm31, &TheoremOptions::new(20.0)).unwrap();
        assert_eq!(r.verdict, Verdict::UndecidedAtHorizon, "{r:#?}");
        let cs = preset(PresetId::Thm34Demo).unwrap();
        let r = theorem_verdict(&cs, Theorem::Thm31, &TheoremOptions::new(20.0)).unwrap();
        assert!(r.fails());
    }
}
