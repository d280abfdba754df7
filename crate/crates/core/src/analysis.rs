//! Seeded initial data and per-solution analysis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::integrate::{integrate_matrix_system, IntegrateError, IntegratorConfig, Termination, Trajectory};
use crate::oscillation::{
    check_prepared, classify_on, Classification, OscillationError, PreparedCheck, ZeroList, ZeroOptions,
};
use crate::system::{CoefficientSystem, Matrix2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    /// `Φ0 = I`, `Ψ0 = Y0` with `Y0` symmetric, entries uniform on `[-2, 2]`.
    /// Such data are prepared at the initial time.
    Symmetric,
    /// `Φ0 = I`, `Ψ0 = Y0` with `y11, y22 ∈ (0.1, 2]`, `y12 ∈ [0, 1]`, `y21 ∈ [-1, 0]`.
    Cone,
}

pub fn sample_y0<R: Rng>(kind: InitKind, rng: &mut R) -> Matrix2 {
    match kind {
        InitKind::Symmetric => {
            let (a, b, d) = (rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0));
            Matrix2::new(a, b, b, d)
        }
        InitKind::Cone => {
            let y11 = 0.1 + rng.gen_range(0.0..1.9f64).max(1e-3);
            let y22 = 0.1 + rng.gen_range(0.0..1.9f64).max(1e-3);
            Matrix2::new(y11, rng.gen_range(0.0..=1.0), -rng.gen_range(0.0..=1.0), y22)
        }
    }
}

/// `n` initial matrices `Y0` drawn from a ChaCha8 stream seeded with `seed`.
pub fn seeded_y0(kind: InitKind, seed: u64, n: usize) -> Vec<Matrix2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sample_y0(kind, &mut rng)).collect()
}

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error(transparent)]
    Oscillation(#[from] OscillationError),
    #[error("integration stopped early: {0:?}")]
    Incomplete(Termination),
}

/// One integrated solution with its zeros and prepared-ness check.
#[derive(Debug, Clone)]
pub struct SolutionAnalysis {
    pub y0: Matrix2,
    pub trajectory: Trajectory,
    pub zeros: ZeroList,
    pub prepared: PreparedCheck,
    pub classification: Classification,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionSummary {
    pub index: usize,
    pub y0: [f64; 4],
    pub nodes: usize,
    pub zero_count: usize,
    pub zeros: Vec<f64>,
    pub tangential: usize,
    pub prepared: bool,
    pub max_asymmetry: f64,
    pub classification: Classification,
}

impl SolutionAnalysis {
    pub fn summary(&self, index: usize) -> SolutionSummary {
        SolutionSummary {
            index,
            y0: self.y0.to_array(),
            nodes: self.trajectory.len(),
            zero_count: self.zeros.len(),
            zeros: self.zeros.times(),
            tangential: self
                .zeros
                .zeros
                .iter()
                .filter(|z| z.kind == crate::oscillation::ZeroKind::Tangential)
                .count(),
            prepared: self.prepared.is_prepared,
            max_asymmetry: self.prepared.max_asymmetry,
            classification: self.classification,
        }
    }
}

pub const PREPARED_PROBES: usize = 200;

/// Integrates `Φ0 = I`, `Ψ0 = y0` over `span` and classifies `det Φ` there.
pub fn analyze_from(
    cs: &CoefficientSystem,
    y0: Matrix2,
    span: (f64, f64),
    cfg: &IntegratorConfig,
    opts: &ZeroOptions,
) -> Result<SolutionAnalysis, AnalysisError> {
    analyze_pair(cs, Matrix2::IDENTITY, y0, span, cfg, opts).map(|mut a| {
        a.y0 = y0;
        a
    })
}

/// Integrates from `(Φ0, Ψ0)` and classifies `det Φ` on `span`.
pub fn analyze_pair(
    cs: &CoefficientSystem,
    phi0: Matrix2,
    psi0: Matrix2,
    span: (f64, f64),
    cfg: &IntegratorConfig,
    opts: &ZeroOptions,
) -> Result<SolutionAnalysis, AnalysisError> {
    let trajectory = integrate_matrix_system(cs, phi0, psi0, span, cfg)?;
    if !trajectory.reached_end() {
        return Err(AnalysisError::Incomplete(trajectory.termination().clone()));
    }
    let (classification, zeros) = classify_on(&trajectory, span, opts)?;
    let prepared = check_prepared(&trajectory, PREPARED_PROBES)?;
    Ok(SolutionAnalysis {
        y0: psi0,
        trajectory,
        zeros,
        prepared,
        classification,
    })
}

/// `n` seeded solutions analysed in parallel; the result order follows the seed stream.
pub fn analyze_seeded(
    cs: &CoefficientSystem,
    kind: InitKind,
    seed: u64,
    n: usize,
    span: (f64, f64),
    cfg: &IntegratorConfig,
    opts: &ZeroOptions,
) -> Result<Vec<SolutionAnalysis>, AnalysisError> {
    seeded_y0(kind, seed, n)
        .into_par_iter()
        .map(|y0| analyze_from(cs, y0, span, cfg, opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{preset, PresetId};

    #[test]
    fn seeds_are_reproducible() {
        assert_eq!(seeded_y0(InitKind::Symmetric, 42, 5), seeded_y0(InitKind::Symmetric, 42, 5));
        assert_ne!(seeded_y0(InitKind::Symmetric, 42, 5), seeded_y0(InitKind::Symmetric, 43, 5));
    }

    #[test]
    fn samples_respect_their_sets() {
        for y in seeded_y0(InitKind::Symmetric, 1, 200) {
            assert_eq!(y.a12, y.a21);
            assert!(y.max_abs() <= 2.0);
        }
        for y in seeded_y0(InitKind::Cone, 1, 200) {
            assert!(y.a11 > 0.1 && y.a22 > 0.1 && y.a11 <= 2.0 && y.a22 <= 2.0);
            assert!((0.0..=1.0).contains(&y.a12) && (-1.0..=0.0).contains(&y.a21));
        }
    }

    #[test]
    fn harmonic_solutions_oscillate() {
        let cs = preset(PresetId::Remark34).unwrap();
        let all = analyze_seeded(
            &cs,
            InitKind::Symmetric,
            42,
            4,
            (0.0, 20.0),
            &IntegratorConfig::default(),
            &ZeroOptions::default(),
        )
        .unwrap();
        for (i, a) in all.iter().enumerate() {
            assert!(a.classification.is_oscillatory());
            assert!(a.prepared.is_prepared);
            // det Φ = cos(t - α) cos(t - β) has two zeros per period π.
            assert!(a.zeros.len() >= 10, "{i}: {}", a.zeros.len());
        }
    }
}
