//! The weighted iterated integrals `I_k`, `Ĩ_1`, `Ĩ_2` and the function `𝓛_k`.

use serde::Serialize;

use super::CriteriaError;
use crate::expr::EvalError;
use crate::quad::{self, Antiderivative, QuadOptions};
use crate::system::{CoefficientSystem, Index};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IteratedKind {
    /// `I_k(τ;t) = ∫_τ^t exp{-∫_s^t a_kk} r_kk(s) ds`.
    I,
    /// `Ĩ_1(τ;t) = ∫_τ^t exp{-∫_s^t a_jj} F_j(s) ds`.
    Itilde1,
    /// `Ĩ_2(τ;t) = -∫_τ^t exp{-∫_s^t a_{3-j,3-j}} F_{3-j}(s) ds`.
    Itilde2,
}

type Integrand<'a> = Box<dyn FnMut(f64) -> Result<f64, EvalError> + 'a>;

/// `t ↦ ∫_τ^t e^{A(s) - A(t)} g(s) ds` with `A(s) = ∫_τ^s a` tabulated once on `[τ, t_max]`.
pub struct IteratedIntegral<'a> {
    kind: IteratedKind,
    anchor: f64,
    sign: f64,
    weight: Antiderivative<Integrand<'a>>,
    forcing: Integrand<'a>,
    opts: QuadOptions,
}

impl<'a> IteratedIntegral<'a> {
    /// `index` is `k` for [`IteratedKind::I`] and `j` for the other two.
    pub fn new(
        cs: &'a CoefficientSystem,
        kind: IteratedKind,
        index: Index,
        anchor: f64,
        t_max: f64,
        eps_q: f64,
    ) -> Result<Self, CriteriaError> {
        if !(anchor <= t_max) {
            return Err(CriteriaError::InvalidArgument(format!(
                "iterated integral needs anchor {anchor} <= {t_max}"
            )));
        }
        let (k, sign) = match kind {
            IteratedKind::I | IteratedKind::Itilde1 => (index, 1.0),
            IteratedKind::Itilde2 => (index.other(), -1.0),
        };
        let a: Integrand<'a> = Box::new(move |s| cs.a_jk(k, k, s));
        let forcing: Integrand<'a> = match kind {
            IteratedKind::I => Box::new(move |s| cs.entry(crate::system::Coefficient::R, k, k, s)),
            _ => Box::new(move |s| cs.f_k(k, s, eps_q)),
        };
        let opts = QuadOptions::default();
        Ok(IteratedIntegral {
            kind,
            anchor,
            sign,
            weight: Antiderivative::new(a, anchor, t_max, &opts)?,
            forcing,
            opts,
        })
    }

    pub fn kind(&self) -> IteratedKind {
        self.kind
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    /// `∫_τ^s a` for `s` in the tabulated range.
    pub fn exponent(&mut self, s: f64) -> Result<f64, CriteriaError> {
        Ok(self.weight.eval(s)?)
    }

    pub fn eval(&mut self, t: f64) -> Result<f64, CriteriaError> {
        if t == self.anchor {
            return Ok(0.0);
        }
        if !(self.anchor < t && t <= self.weight.upper()) {
            return Err(CriteriaError::InvalidArgument(format!(
                "t = {t} outside [{}, {}]",
                self.anchor,
                self.weight.upper()
            )));
        }
        let a_t = self.weight.eval(t)?;
        let weight = &mut self.weight;
        let forcing = &mut self.forcing;
        let q = quad::integrate(|s| Ok((weight.eval(s)? - a_t).exp() * forcing(s)?), self.anchor, t, &self.opts)?;
        Ok(self.sign * q.value)
    }
}

/// `I_k(τ; t)`.
pub fn quad_i_k(cs: &CoefficientSystem, k: Index, tau: f64, t: f64) -> Result<f64, CriteriaError> {
    IteratedIntegral::new(cs, IteratedKind::I, k, tau, t, crate::system::DEFAULT_EPS_Q)?.eval(t)
}

/// `Ĩ_1(τ; t)` or `Ĩ_2(τ; t)` for the distinguished index `j`.
pub fn quad_itilde(
    cs: &CoefficientSystem,
    j: Index,
    which: Index,
    tau: f64,
    t: f64,
    eps_q: f64,
) -> Result<f64, CriteriaError> {
    let kind = match which {
        Index::One => IteratedKind::Itilde1,
        Index::Two => IteratedKind::Itilde2,
    };
    IteratedIntegral::new(cs, kind, j, tau, t, eps_q)?.eval(t)
}

/// `𝓛_k(u, v, t) = q_{3-k} u v + p_{3-k,k} u - s_{k,3-k} v - r_kk`.
pub fn lagrangian_l_k(cs: &CoefficientSystem, k: Index, u: f64, v: f64, t: f64) -> Result<f64, EvalError> {
    use crate::system::Coefficient::{P, R, S};
    let o = k.other();
    Ok(cs.q_k(o, t)? * u * v + cs.entry(P, o, k, t)? * u - cs.entry(S, k, o, t)? * v - cs.entry(R, k, k, t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{preset, PresetId, ProblemFile, DEFAULT_EPS_Q};
    use proptest::prelude::*;

    fn build(p: [[&str; 2]; 2], q: [[&str; 2]; 2], r: [[&str; 2]; 2], s: [[&str; 2]; 2]) -> CoefficientSystem {
        let m = |x: [[&str; 2]; 2]| x.map(|row| row.map(str::to_string));
        ProblemFile {
            t0: 0.0,
            params: Default::default(),
            p: m(p),
            q: m(q),
            r: m(r),
            s: m(s),
            q_diagonal: true,
        }
        .build()
        .unwrap()
    }

    const Z: [[&str; 2]; 2] = [["0", "0"], ["0", "0"]];
    const ONE: [[&str; 2]; 2] = [["1", "0"], ["0", "1"]];

    #[test]
    fn unweighted_integral_of_one() {
        let cs = build(Z, ONE, ONE, Z);
        assert!((quad_i_k(&cs, Index::One, 0.0, 3.5).unwrap() - 3.5).abs() < 1e-13);
    }

    #[test]
    fn unit_decay_weight() {
        let cs = build(ONE, ONE, ONE, Z);
        for t in [0.5, 2.0, 7.0] {
            let v = quad_i_k(&cs, Index::Two, 0.0, t).unwrap();
            assert!((v - (1.0 - (-t).exp())).abs() < 1e-13, "{t}: {v}");
        }
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let cs = build(ONE, ONE, Z, Z);
        assert_eq!(quad_i_k(&cs, Index::One, 0.0, 4.0).unwrap(), 0.0);
        assert_eq!(quad_i_k(&cs, Index::One, 2.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn itilde_on_the_saddle_demo() {
        let cs = preset(PresetId::Thm34Demo).unwrap();
        for t in [1.0, 4.0] {
            assert!((quad_itilde(&cs, Index::One, Index::One, 0.0, t, DEFAULT_EPS_Q).unwrap() - t).abs() < 1e-13);
            assert!((quad_itilde(&cs, Index::One, Index::Two, 0.0, t, DEFAULT_EPS_Q).unwrap() - t).abs() < 1e-13);
        }
    }

    #[test]
    fn lagrangian_values() {
        // q_2 = 2, p_21 = 3, s_12 = 1, r_11 = 5.
        let cs = build([["0", "0"], ["3", "0"]], [["1", "0"], ["0", "2"]], [["5", "0"], ["0", "0"]], [["0", "1"], ["0", "0"]]);
        assert_eq!(lagrangian_l_k(&cs, Index::One, 0.0, 0.0, 0.0).unwrap(), -5.0);
        assert_eq!(lagrangian_l_k(&cs, Index::One, -0.5, -0.5, 0.0).unwrap(), -5.5);
        assert!(lagrangian_l_k(&cs, Index::One, -0.5, -0.5, 0.0).unwrap() <= cs.f_k(Index::One, 0.0, DEFAULT_EPS_Q).unwrap());
    }

    // With q_{3-k} > 0 the symmetric restriction 𝓛_k(X, X) is a convex parabola
    // whose minimum is -r_kk - d²/(4q), which sits below F_k whenever r_kk > 0:
    // the lower bound 𝓛_k(X, X) >= F_k therefore needs r_kk <= 0.
    #[test]
    fn lagrangian_lower_bound_needs_nonpositive_r() {
        let cs = build([["0", "0"], ["3", "0"]], [["1", "0"], ["0", "2"]], [["5", "0"], ["0", "0"]], [["0", "1"], ["0", "0"]]);
        let f = cs.f_k(Index::One, 0.0, DEFAULT_EPS_Q).unwrap();
        let l = lagrangian_l_k(&cs, Index::One, -0.5, -0.5, 0.0).unwrap();
        assert!(l < f);
    }

    #[test]
    fn symmetric_lagrangian_below_f_for_negative_q() {
        // Saddle demo, k = 1: q_2 = -1, r_11 = 1, no off-diagonal terms.
        let cs = preset(PresetId::Thm34Demo).unwrap();
        let f = cs.f_k(Index::One, 0.0, DEFAULT_EPS_Q).unwrap();
        let worst = (-20_000..=20_000)
            .map(|i| {
                let x = i as f64 / 200.0;
                lagrangian_l_k(&cs, Index::One, x, x, 0.0).unwrap()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(worst <= f + 1e-12, "{worst} > {f}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        // I(τ;t) = e^{-(A(t)-A(m))} I(τ;m) + I(m;t).
        #[test]
        fn additivity(m_frac in 0.05f64..0.95, t in 0.5f64..6.0) {
            let cs = build([["0.3*cos(t)", "0"], ["0", "0"]], ONE, [["sin(2*t) + 0.2", "0"], ["0", "1"]], [["-0.1", "0"], ["0", "0"]]);
            let m = m_frac * t;
            let whole = quad_i_k(&cs, Index::One, 0.0, t).unwrap();
            let left = quad_i_k(&cs, Index::One, 0.0, m).unwrap();
            let right = quad_i_k(&cs, Index::One, m, t).unwrap();
            let a = quad::integrate(|s| cs.a_jk(Index::One, Index::One, s), m, t, &QuadOptions::default()).unwrap().value;
            prop_assert!((whole - ((-a).exp() * left + right)).abs() < 1e-9);
        }

        #[test]
        fn vanishes_at_anchor(tau in 0.0f64..10.0) {
            let cs = preset(PresetId::Example33 { lambda: 2.0 }).unwrap();
            prop_assert_eq!(quad_i_k(&cs, Index::One, tau, tau).unwrap(), 0.0);
        }

        // Saddle demo: 𝓛_1(X, X) = -X² - 1 <= F_1 = 1.
        #[test]
        fn lagrangian_below_f_on_saddle_demo(x in -100.0f64..100.0, t in 0.0f64..50.0) {
            let cs = preset(PresetId::Thm34Demo).unwrap();
            let l = lagrangian_l_k(&cs, Index::One, x, x, t).unwrap();
            prop_assert!(l <= cs.f_k(Index::One, t, DEFAULT_EPS_Q).unwrap() + 1e-9);
        }

        // Positive q_{3-k} and r_kk <= 0: 𝓛_k(X, X) >= F_k.
        #[test]
        fn lagrangian_above_f_for_positive_q(x in -100.0f64..100.0, t in 0.0f64..50.0) {
            for id in [PresetId::Example32, PresetId::Example33 { lambda: 2.0 }, PresetId::Remark34] {
                let cs = preset(id).unwrap();
                for k in Index::BOTH {
                    if cs.q_k(k.other(), t).unwrap() > DEFAULT_EPS_Q && cs.entry(crate::system::Coefficient::R, k, k, t).unwrap() <= 0.0 {
                        let l = lagrangian_l_k(&cs, k, x, x, t).unwrap();
                        prop_assert!(l >= cs.f_k(k, t, DEFAULT_EPS_Q).unwrap() - 1e-9);
                    }
                }
            }
        }
    }
}
