//! Adaptive Gauss-Kronrod (7, 15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::expr::EvalError;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("quadrature on [{a}, {b}] did not converge: error estimate {error:e} after {intervals} subintervals")]
    NotConverged {
        a: f64,
        b: f64,
        value: f64,
        error: f64,
        intervals: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// 15-point Kronrod estimate on `[a, b]` and its difference from the embedded 7-point Gauss rule.
pub fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64), EvalError>
where
    F: FnMut(f64) -> Result<f64, EvalError>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx)? + f(center + dx)?;
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    Ok((kronrod * half, ((kronrod - gauss) * half).abs()))
}

fn panel<F>(f: &mut F, a: f64, b: f64) -> Result<Panel, EvalError>
where
    F: FnMut(f64) -> Result<f64, EvalError>,
{
    let (value, error) = gk15(f, a, b)?;
    Ok(Panel { a, b, value, error })
}

fn refine<F>(f: &mut F, a: f64, b: f64, opts: &QuadOptions) -> Result<(Vec<Panel>, Quadrature), QuadError>
where
    F: FnMut(f64) -> Result<f64, EvalError>,
{
    let mut heap = BinaryHeap::new();
    let first = panel(f, a, b)?;
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    let mut done = Vec::new();
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= tol || heap.is_empty() {
            break;
        }
        if heap.len() + done.len() >= opts.max_intervals {
            return Err(QuadError::NotConverged {
                a,
                b,
                value,
                error,
                intervals: heap.len() + done.len(),
            });
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Cannot be split further in floating point.
            done.push(worst);
            continue;
        }
        let left = panel(f, worst.a, mid)?;
        let right = panel(f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(done);
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    // Re-sum in order so the result does not depend on refinement history.
    let value = panels.iter().map(|p| p.value).sum();
    let error = panels.iter().map(|p| p.error).sum();
    let intervals = panels.len();
    Ok((panels, Quadrature { value, error, intervals }))
}

/// `∫_a^b f` by globally adaptive bisection. `a > b` gives the negated integral.
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<Quadrature, QuadError>
where
    F: FnMut(f64) -> Result<f64, EvalError>,
{
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    if a > b {
        let q = refine(&mut f, b, a, opts)?.1;
        return Ok(Quadrature { value: -q.value, ..q });
    }
    Ok(refine(&mut f, a, b, opts)?.1)
}

/// `s ↦ ∫_a^s f` on `[a, b]`, built once and evaluated many times.
///
/// Construction adaptively partitions `[a, b]` and stores cumulative values at
/// the panel boundaries; evaluation adds one 15-point rule over the partial
/// panel containing `s`.
pub struct Antiderivative<F> {
    f: F,
    knots: Vec<f64>,
    cumulative: Vec<f64>,
}

impl<F> Antiderivative<F>
where
    F: FnMut(f64) -> Result<f64, EvalError>,
{
    pub fn new(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<Self, QuadError> {
        assert!(a <= b, "antiderivative needs a <= b");
        let mut knots = vec![a];
        let mut cumulative = vec![0.0];
        if a < b {
            // Tighter per-panel control so partial panels stay accurate.
            let panels = refine(&mut f, a, b, opts)?.0;
            let mut acc = 0.0;
            for p in panels {
                acc += p.value;
                knots.push(p.b);
                cumulative.push(acc);
            }
        }
        Ok(Antiderivative { f, knots, cumulative })
    }

    pub fn lower(&self) -> f64 {
        self.knots[0]
    }

    pub fn upper(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    /// `∫_a^b f`.
    pub fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn eval(&mut self, s: f64) -> Result<f64, EvalError> {
        let i = match self.knots.binary_search_by(|k| k.total_cmp(&s)) {
            Ok(i) => return Ok(self.cumulative[i]),
            Err(0) => 0,
            Err(i) => i - 1,
        };
        let (base, start) = (self.cumulative[i], self.knots[i]);
        let (partial, _) = gk15(&mut self.f, start, s)?;
        Ok(base + partial)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ok(f: impl Fn(f64) -> f64) -> impl FnMut(f64) -> Result<f64, EvalError> {
        move |x| Ok(f(x))
    }

    #[test]
    fn polynomials_are_exact() {
        let q = integrate(ok(|x| x.powi(7) - 3.0 * x * x), -1.0, 2.0, &QuadOptions::default()).unwrap();
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((q.value - exact).abs() < 1e-13);
        assert_eq!(q.intervals, 1);
    }

    #[test]
    fn kinks_converge() {
        let q = integrate(ok(|x: f64| x.sin().max(0.0)), 0.0, 20.0 * PI, &QuadOptions::default()).unwrap();
        assert!((q.value - 20.0).abs() < 1e-10, "{}", q.value);
    }

    #[test]
    fn reversed_limits_negate() {
        let o = QuadOptions::default();
        let a = integrate(ok(f64::exp), 0.0, 1.0, &o).unwrap().value;
        let b = integrate(ok(f64::exp), 1.0, 0.0, &o).unwrap().value;
        assert_eq!(a, -b);
        assert!((a - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn eval_errors_propagate() {
        let r = integrate(|x: f64| if x > 0.5 { Err(EvalError::NonFinite { expr: "x".into(), t: x }) } else { Ok(x) }, 0.0, 1.0, &QuadOptions::default());
        assert!(matches!(r, Err(QuadError::Eval(_))));
    }

    #[test]
    fn non_convergence_is_reported() {
        let opts = QuadOptions {
            max_intervals: 8,
            ..QuadOptions::default()
        };
        let r = integrate(ok(|x: f64| (1.0 / x.max(1e-300)).sin()), 1e-6, 1.0, &opts);
        assert!(matches!(r, Err(QuadError::NotConverged { .. })));
    }

    #[test]
    fn antiderivative_matches_closed_form() {
        let mut a = Antiderivative::new(ok(f64::cos), 0.0, 10.0, &QuadOptions::default()).unwrap();
        for s in [0.0, 0.3, 1.0, 4.4, 9.99, 10.0] {
            assert!((a.eval(s).unwrap() - s.sin()).abs() < 1e-13, "{s}");
        }
        assert!((a.total() - 10f64.sin()).abs() < 1e-13);
    }
}
