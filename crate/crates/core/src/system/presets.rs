//! Concrete systems with known behaviour.

use std::fmt;

use super::{CoefficientSystem, ProblemFile, SystemError};
use crate::expr::Params;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PresetId {
    /// `Φ'' + K(t) Φ = 0` with
    /// `K = [[a1 sin μ1t + a2 sin μ2t, b cos μt / t^α], [b cos μt / t^α, a1 sin μ1t + a2 sin μ2t]]`,
    /// written as `Φ' = Ψ, Ψ' = -K Φ` on `[1, ∞)`.
    Example31 {
        a1: f64,
        a2: f64,
        b: f64,
        alpha: f64,
        mu: f64,
        mu1: f64,
        mu2: f64,
    },
    /// `Q = diag{max(sin t, 0)}`, `R = diag{min(sin t, 0)}`, `P = S = 0`.
    Example32,
    /// `Q = -R = diag{λ sin t, λ sin t}`, `P = S = 0`.
    Example33 { lambda: f64 },
    /// `Q = -R = I`, `P = S = 0`; the harmonic oscillator.
    Remark34,
    /// `Q = I`, `R = [[1, 0.5], [-0.5, 1]]`, `P = S = 0`.
    Thm33Demo,
    /// `Q = R = diag{1, -1}`, `P = S = 0`.
    Thm34Demo,
}

impl PresetId {
    pub const NAMES: [&'static str; 6] = [
        "example31",
        "example32",
        "example33",
        "remark34",
        "thm33_demo",
        "thm34_demo",
    ];

    pub fn example31_default() -> Self {
        PresetId::Example31 {
            a1: 1.0,
            a2: 1.0,
            b: 1.0,
            alpha: 2.0,
            mu: 1.0,
            mu1: 1.0,
            mu2: std::f64::consts::SQRT_2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PresetId::Example31 { .. } => "example31",
            PresetId::Example32 => "example32",
            PresetId::Example33 { .. } => "example33",
            PresetId::Remark34 => "remark34",
            PresetId::Thm33Demo => "thm33_demo",
            PresetId::Thm34Demo => "thm34_demo",
        }
    }

    /// Looks a preset up by name, overriding its default parameters.
    pub fn from_name(name: &str, overrides: &Params) -> Result<Self, SystemError> {
        let mut id = match name {
            "example31" => PresetId::example31_default(),
            "example32" => PresetId::Example32,
            "example33" => PresetId::Example33 {
                lambda: std::f64::consts::FRAC_PI_2,
            },
            "remark34" => PresetId::Remark34,
            "thm33_demo" => PresetId::Thm33Demo,
            "thm34_demo" => PresetId::Thm34Demo,
            _ => {
                return Err(SystemError::InvalidParameter(format!(
                    "unknown preset `{name}` (known: {})",
                    Self::NAMES.join(", ")
                )))
            }
        };
        for (key, &value) in overrides {
            let slot = match (&mut id, key.as_str()) {
                (PresetId::Example31 { a1, .. }, "a1") => a1,
                (PresetId::Example31 { a2, .. }, "a2") => a2,
                (PresetId::Example31 { b, .. }, "b") => b,
                (PresetId::Example31 { alpha, .. }, "alpha") => alpha,
                (PresetId::Example31 { mu, .. }, "mu") => mu,
                (PresetId::Example31 { mu1, .. }, "mu1") => mu1,
                (PresetId::Example31 { mu2, .. }, "mu2") => mu2,
                (PresetId::Example33 { lambda }, "lambda") => lambda,
                _ => {
                    return Err(SystemError::InvalidParameter(format!(
                        "preset `{name}` has no parameter `{key}`"
                    )))
                }
            };
            *slot = value;
        }
        id.validate()?;
        Ok(id)
    }

    pub fn validate(&self) -> Result<(), SystemError> {
        match *self {
            PresetId::Example31 {
                a1,
                a2,
                b,
                alpha,
                mu,
                mu1,
                mu2,
            } => {
                let named = [("a1", a1), ("a2", a2), ("b", b), ("alpha", alpha), ("mu", mu), ("mu1", mu1), ("mu2", mu2)];
                for (n, v) in named {
                    if v == 0.0 || !v.is_finite() {
                        return Err(SystemError::InvalidParameter(format!(
                            "example31 requires {n} finite and nonzero, got {v}"
                        )));
                    }
                }
                if alpha <= 1.0 {
                    return Err(SystemError::InvalidParameter(format!(
                        "example31 requires alpha > 1, got {alpha}"
                    )));
                }
                Ok(())
            }
            PresetId::Example33 { lambda } if !lambda.is_finite() => Err(SystemError::InvalidParameter(
                format!("example33 requires finite lambda, got {lambda}"),
            )),
            _ => Ok(()),
        }
    }

    /// The preset as a problem file, so it can be written out, edited and swept.
    pub fn problem(&self) -> ProblemFile {
        let m = |rows: [[&str; 2]; 2]| rows.map(|r| r.map(str::to_string));
        let zero = m([["0", "0"], ["0", "0"]]);
        let mut params = Params::new();
        let (t0, p, q, r, s) = match *self {
            PresetId::Example31 {
                a1,
                a2,
                b,
                alpha,
                mu,
                mu1,
                mu2,
            } => {
                for (n, v) in [("a1", a1), ("a2", a2), ("b", b), ("alpha", alpha), ("mu", mu), ("mu1", mu1), ("mu2", mu2)] {
                    params.insert(n.to_string(), v);
                }
                let diag = "-(a1*sin(mu1*t) + a2*sin(mu2*t))";
                let off = "-(b*cos(mu*t)/t^alpha)";
                (1.0, zero.clone(), m([["1", "0"], ["0", "1"]]), m([[diag, off], [off, diag]]), zero)
            }
            PresetId::Example32 => (
                0.0,
                zero.clone(),
                m([["max(sin(t), 0)", "0"], ["0", "max(sin(t), 0)"]]),
                m([["min(sin(t), 0)", "0"], ["0", "min(sin(t), 0)"]]),
                zero,
            ),
            PresetId::Example33 { lambda } => {
                params.insert("lambda".to_string(), lambda);
                (
                    0.0,
                    zero.clone(),
                    m([["lambda*sin(t)", "0"], ["0", "lambda*sin(t)"]]),
                    m([["-lambda*sin(t)", "0"], ["0", "-lambda*sin(t)"]]),
                    zero,
                )
            }
            PresetId::Remark34 => (
                0.0,
                zero.clone(),
                m([["1", "0"], ["0", "1"]]),
                m([["-1", "0"], ["0", "-1"]]),
                zero,
            ),
            PresetId::Thm33Demo => (
                0.0,
                zero.clone(),
                m([["1", "0"], ["0", "1"]]),
                m([["1", "0.5"], ["-0.5", "1"]]),
                zero,
            ),
            PresetId::Thm34Demo => (
                0.0,
                zero.clone(),
                m([["1", "0"], ["0", "-1"]]),
                m([["1", "0"], ["0", "-1"]]),
                zero,
            ),
        };
        ProblemFile {
            t0,
            params,
            p,
            q,
            r,
            s,
            q_diagonal: true,
        }
    }
}

impl fmt::Display for PresetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn preset(id: PresetId) -> Result<CoefficientSystem, SystemError> {
    id.validate()?;
    id.problem().build()
}
