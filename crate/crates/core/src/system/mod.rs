//! Coefficient matrices of the linear system
//!
//! ```text
//! Φ' = P(t) Φ + Q(t) Ψ
//! Ψ' = R(t) Φ + S(t) Ψ,   t ≥ t0
//! ```
//!
//! with diagonal `Q = diag{q1, q2}`, plus the derived scalars the criteria
//! consume (`a_jk`, `F_k`) and a catalogue of preset systems.

mod matrix;
mod presets;
mod problem;

use thiserror::Error;

use crate::expr::{EvalError, ExprNode, ParseError};

pub use matrix::Matrix2;
pub use presets::{preset, PresetId};
pub use problem::ProblemFile;

/// Default threshold below which `q_{3-k}` is treated as zero in `F_k`.
pub const DEFAULT_EPS_Q: f64 = 1e-12;

/// A 1-based component index `j, k ∈ {1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Index {
    One,
    Two,
}

impl Index {
    pub const BOTH: [Index; 2] = [Index::One, Index::Two];

    /// `3 - k`.
    pub fn other(self) -> Index {
        match self {
            Index::One => Index::Two,
            Index::Two => Index::One,
        }
    }

    pub fn zero_based(self) -> usize {
        match self {
            Index::One => 0,
            Index::Two => 1,
        }
    }

    pub fn number(self) -> u8 {
        self.zero_based() as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Index> {
        match n {
            1 => Some(Index::One),
            2 => Some(Index::Two),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coefficient {
    P,
    Q,
    R,
    S,
}

impl Coefficient {
    pub fn label(self) -> char {
        match self {
            Coefficient::P => 'P',
            Coefficient::Q => 'Q',
            Coefficient::R => 'R',
            Coefficient::S => 'S',
        }
    }
}

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("malformed problem JSON at byte {offset} (line {line}, column {column}): {message}")]
    Json {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("entry {matrix}[{row}][{col}]: {source}")]
    Parse {
        matrix: char,
        row: usize,
        col: usize,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("Q is flagged diagonal but entry {entry} is {value} at t = {t}")]
    NonDiagonalQ { entry: &'static str, t: f64, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("matrix is not symmetric (|k12 - k21| = {0})")]
    NotSymmetric(f64),
}

pub type Entries = [[ExprNode; 2]; 2];

/// All four coefficient matrices evaluated at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientValues {
    pub p: Matrix2,
    pub q: Matrix2,
    pub r: Matrix2,
    pub s: Matrix2,
}

impl CoefficientValues {
    pub fn q_k(&self, k: Index) -> f64 {
        self.q.get(k.zero_based(), k.zero_based())
    }

    /// `a_jk = p_jj - s_kk`.
    pub fn a(&self, j: Index, k: Index) -> f64 {
        self.p.get(j.zero_based(), j.zero_based()) - self.s.get(k.zero_based(), k.zero_based())
    }

    /// `F_k = r_kk - (p_{3-k,k} - s_{k,3-k})^2 / (4 q_{3-k})`, or `r_kk` where `|q_{3-k}| <= eps_q`.
    pub fn f(&self, k: Index, eps_q: f64) -> f64 {
        let (kk, o) = (k.zero_based(), k.other().zero_based());
        let r_kk = self.r.get(kk, kk);
        let q_o = self.q.get(o, o);
        if q_o.abs() > eps_q {
            let d = self.p.get(o, kk) - self.s.get(kk, o);
            r_kk - d * d / (4.0 * q_o)
        } else {
            r_kk
        }
    }
}

/// The four coefficient matrices of the system, as expressions in `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSystem {
    p: Entries,
    q: Entries,
    r: Entries,
    s: Entries,
    t0: f64,
    q_diagonal: bool,
}

const VALIDATION_SAMPLES: usize = 64;
const VALIDATION_SPAN: f64 = 20.0;

impl CoefficientSystem {
    /// Builds a system and checks it by sampling `[t0, t0 + 20]`: every entry
    /// must evaluate finitely, and if `q_diagonal` is set the off-diagonal
    /// entries of `Q` must evaluate to exactly zero.
    ///
    /// Literal-zero off-diagonals in `Q` set `q_diagonal` implicitly.
    pub fn new(
        p: Entries,
        q: Entries,
        r: Entries,
        s: Entries,
        t0: f64,
        q_diagonal: bool,
    ) -> Result<Self, SystemError> {
        if !t0.is_finite() {
            return Err(SystemError::InvalidParameter(format!("t0 = {t0} is not finite")));
        }
        let literal_diag = q[0][1].is_zero_literal() && q[1][0].is_zero_literal();
        let cs = CoefficientSystem {
            p,
            q,
            r,
            s,
            t0,
            q_diagonal: q_diagonal || literal_diag,
        };
        for i in 0..VALIDATION_SAMPLES {
            let t = t0 + VALIDATION_SPAN * i as f64 / (VALIDATION_SAMPLES - 1) as f64;
            let v = cs.values(t)?;
            if q_diagonal {
                for (entry, value) in [("q12", v.q.a12), ("q21", v.q.a21)] {
                    if value != 0.0 {
                        return Err(SystemError::NonDiagonalQ { entry, t, value });
                    }
                }
            }
        }
        Ok(cs)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn q_diagonal(&self) -> bool {
        self.q_diagonal
    }

    pub fn entries(&self, which: Coefficient) -> &Entries {
        match which {
            Coefficient::P => &self.p,
            Coefficient::Q => &self.q,
            Coefficient::R => &self.r,
            Coefficient::S => &self.s,
        }
    }

    pub fn eval_matrix(&self, which: Coefficient, t: f64) -> Result<Matrix2, EvalError> {
        let e = self.entries(which);
        Ok(Matrix2::new(
            e[0][0].eval(t)?,
            e[0][1].eval(t)?,
            e[1][0].eval(t)?,
            e[1][1].eval(t)?,
        ))
    }

    pub fn values(&self, t: f64) -> Result<CoefficientValues, EvalError> {
        Ok(CoefficientValues {
            p: self.eval_matrix(Coefficient::P, t)?,
            q: self.eval_matrix(Coefficient::Q, t)?,
            r: self.eval_matrix(Coefficient::R, t)?,
            s: self.eval_matrix(Coefficient::S, t)?,
        })
    }

    /// Single entry by 1-based indices.
    pub fn entry(&self, which: Coefficient, row: Index, col: Index, t: f64) -> Result<f64, EvalError> {
        self.entries(which)[row.zero_based()][col.zero_based()].eval(t)
    }

    /// `q_k(t)`, the k-th diagonal entry of `Q`.
    pub fn q_k(&self, k: Index, t: f64) -> Result<f64, EvalError> {
        self.entry(Coefficient::Q, k, k, t)
    }

    /// `a_jk(t) = p_jj(t) - s_kk(t)`.
    pub fn a_jk(&self, j: Index, k: Index, t: f64) -> Result<f64, EvalError> {
        Ok(self.entry(Coefficient::P, j, j, t)? - self.entry(Coefficient::S, k, k, t)?)
    }

    /// `F_k(t)`; see [`CoefficientValues::f`].
    pub fn f_k(&self, k: Index, t: f64, eps_q: f64) -> Result<f64, EvalError> {
        let o = k.other();
        let r_kk = self.entry(Coefficient::R, k, k, t)?;
        let q_o = self.q_k(o, t)?;
        if q_o.abs() > eps_q {
            let d = self.entry(Coefficient::P, o, k, t)? - self.entry(Coefficient::S, k, o, t)?;
            Ok(r_kk - d * d / (4.0 * q_o))
        } else {
            Ok(r_kk)
        }
    }
}

/// Eigenvalues `λ+ ≥ λ-` of a symmetric matrix such as the `K(t)` of a
/// second-order equation `Φ'' + K(t) Φ = 0`.
pub fn eigenvalues_k(k: &Matrix2) -> Result<(f64, f64), SystemError> {
    k.symmetric_eigenvalues(1e-12)
        .ok_or(SystemError::NotSymmetric((k.a12 - k.a21).abs()))
}
