//! Canned end-to-end scenarios with known qualitative outcomes.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use super::{emit, parse_params, CliError, CommonArgs};
use crate::analysis::{analyze_pair, analyze_seeded, InitKind};
use crate::criteria::{
    check_condition_i, Criterion, check_condition_iii, check_condition_iv, find_oscillation_windows, theorem_verdict, Theorem,
    TheoremOptions, WindowOptions, Witness,
};
use crate::expr::Params;
use crate::integrate::{integrate_matrix_system, integrate_scalar_system, IntegratorConfig};
use crate::oscillation::{detect_zeros, scalar_zeros, verify_sign_identity, SignMode, ZeroKind, ZeroOptions};
use crate::system::{preset, Index, Matrix2, PresetId, DEFAULT_EPS_Q};

pub const SCENARIOS: [&str; 6] = ["remark34", "example31", "example32", "example33", "thm33_demo", "thm34_demo"];

#[derive(Debug, Args)]
pub struct ExamplesArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Run only these scenarios (repeatable).
    #[arg(long, value_name = "NAME")]
    pub only: Vec<String>,
    /// Run every scenario (the default).
    #[arg(long, conflicts_with = "only")]
    pub all: bool,
    /// Parameter overrides for the selected scenarios, e.g. `lambda=2`.
    #[arg(long, value_name = "K=V,...")]
    pub params: Option<String>,
    /// Number of seeded solutions per scenario.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub what: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioOutcome {
    pub name: String,
    pub expected: String,
    pub agrees: bool,
    pub checks: Vec<Check>,
}

struct Builder {
    checks: Vec<Check>,
}

impl Builder {
    fn check(&mut self, what: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            what: what.into(),
            ok,
            detail: detail.into(),
        });
    }

    fn finish(self, name: &str, expected: &str) -> ScenarioOutcome {
        ScenarioOutcome {
            name: name.to_string(),
            expected: expected.to_string(),
            agrees: self.checks.iter().all(|c| c.ok),
            checks: self.checks,
        }
    }
}

/// Settings shared by all scenarios.
pub struct ScenarioConfig {
    pub params: Params,
    pub horizon: Option<f64>,
    pub seed: u64,
    pub count: usize,
    pub integrator: IntegratorConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            params: Params::new(),
            horizon: None,
            seed: 42,
            count: 10,
            integrator: IntegratorConfig::default(),
        }
    }
}

pub fn run_scenario(name: &str, sc: &ScenarioConfig) -> Result<ScenarioOutcome, CliError> {
    match name {
        "remark34" => remark34(sc),
        "example31" => example31(sc),
        "example32" => example32(sc),
        "example33" => example33(sc),
        "thm33_demo" => thm33_demo(sc),
        "thm34_demo" => thm34_demo(sc),
        _ => Err(CliError::Input(format!(
            "unknown scenario `{name}` (known: {})",
            SCENARIOS.join(", ")
        ))),
    }
}

fn no_params(name: &str, sc: &ScenarioConfig) -> Result<(), CliError> {
    match sc.params.keys().next() {
        Some(k) => Err(CliError::Input(format!("scenario `{name}` has no parameter `{k}`"))),
        None => Ok(()),
    }
}

fn remark34(sc: &ScenarioConfig) -> Result<ScenarioOutcome, CliError> {
    no_params("remark34", sc)?;
    let cs = preset(PresetId::Remark34)?;
    let horizon = sc.horizon.unwrap_or(3.0 * PI + 0.5);
    let eps = 0.1;
    let mut b = Builder { checks: Vec::new() };

    let full = check_condition_iv(&cs, Index::One, 0.0, PI, DEFAULT_EPS_Q)?;
    b.check("π-threshold integral on [0, π]", full.holds() && full.margin.abs() < 1e-9, format!("margin {:e}", full.margin));
    let short = check_condition_iv(&cs, Index::One, eps, PI - eps, DEFAULT_EPS_Q)?;
    b.check(
        "π-threshold integral on [ε, π - ε]",
        short.fails() && (short.margin + 2.0 * eps).abs() < 1e-9,
        format!("margin {:e}", short.margin),
    );

    // Φ = sin t·I, Ψ = cos t·I.
    let tr = integrate_matrix_system(&cs, Matrix2::ZERO, Matrix2::IDENTITY, (0.0, horizon), &sc.integrator)?;
    let opts = ZeroOptions::default();
    let inner = detect_zeros(&tr, (eps, PI - eps), &opts)?;
    b.check("no zero of det Φ on [ε, π - ε]", inner.is_empty(), format!("{} zero(s)", inner.len()));
    let zeros = detect_zeros(&tr, (eps, horizon), &opts)?;
    let expected = (horizon / PI).floor() as usize;
    let located = zeros
        .zeros
        .iter()
        .enumerate()
        .all(|(k, z)| (z.t - (k + 1) as f64 * PI).abs() < 1e-8 && z.kind == ZeroKind::Tangential);
    b.check(
        "tangential zeros of det Φ at multiples of π",
        zeros.len() == expected && located,
        format!("{:?}", zeros.times()),
    );
    Ok(b.finish("remark34", "the π threshold is sharp: zeros at kπ, none on [ε, π - ε]"))
}

fn example31(sc: &ScenarioConfig) -> Result<ScenarioOutcome, CliError> {
    let id = PresetId::from_name("example31", &sc.params)?;
    let cs = preset(id)?;
    let t0 = cs.t0();
    let horizon = sc.horizon.unwrap_or(200.0);
    let mut b = Builder { checks: Vec::new() };

    let ci = check_condition_i(&cs, Index::One, (t0, horizon), None, DEFAULT_EPS_Q)?;
    b.check("q_1, q_2 >= 0", ci.holds(), format!("margin {:e}", ci.margin));
    let scalar = integrate_scalar_system(&cs, Index::One, 1.0, 0.0, (t0, horizon), &sc.integrator, DEFAULT_EPS_Q)?;
    let phi_zeros = scalar_zeros(&scalar, (t0, scalar.end()), 1e-10)?;
    b.check("reduced scalar φ has >= 10 zeros", phi_zeros.len() >= 10, format!("{} zeros", phi_zeros.len()));
    let sols = analyze_seeded(
        &cs,
        InitKind::Symmetric,
        sc.seed,
        sc.count,
        (t0, horizon),
        &sc.integrator,
        &ZeroOptions::default(),
    )?;
    let counts: Vec<usize> = sols.iter().map(|s| s.zeros.len()).collect();
    b.check(
        "every prepared solution has >= 5 zeros of det Φ",
        counts.iter().all(|&c| c >= 5),
        format!("{counts:?}"),
    );
    Ok(b.finish("example31", "oscillatory"))
}

fn example32(sc: &ScenarioConfig) -> Result<ScenarioOutcome, CliError> {
    no_params("example32", sc)?;
    let cs = preset(PresetId::Example32)?;
    let horizon = sc.horizon.unwrap_or(40.0 * PI);
    let mut b = Builder { checks: Vec::new() };

    let ci = check_condition_i(&cs, Index::One, (0.0, horizon), None, DEFAULT_EPS_Q)?;
    b.check("q_1, q_2 >= 0", ci.holds(), format!("margin {:e}", ci.margin));
    let iii = check_condition_iii(&cs, Index::One, horizon, crate::criteria::III_THRESHOLD, DEFAULT_EPS_Q)?;
    let mut partial_ok = true;
    for w in &iii.witnesses {
        if let Witness::Series { t, values, .. } = w {
            for (&t, &v) in t.iter().zip(values) {
                // Each positive arch of sin contributes 2.
                let n = (t / (2.0 * PI)).round();
                if ((t / (2.0 * PI)) - n).abs() < 1e-9 && (v - 2.0 * n).abs() > 1e-6 {
                    partial_ok = false;
                }
            }
        }
    }
    b.check(
        "weighted integrals grow without bound",
        iii.supported() && partial_ok,
        format!("{} (margin {:.6})", iii.verdict, iii.margin),
    );
    let sols = analyze_seeded(
        &cs,
        InitKind::Symmetric,
        sc.seed,
        sc.count,
        (0.0, horizon),
        &sc.integrator,
        &ZeroOptions::default(),
    )?;
    let counts: Vec<usize> = sols.iter().map(|s| s.zeros.len()).collect();
    b.check(
        "every prepared solution has >= 3 zeros of det Φ",
        counts.iter().all(|&c| c >= 3),
        format!("{counts:?}"),
    );
    Ok(b.finish("example32", "oscillatory"))
}

fn example33(sc: &ScenarioConfig) -> Result<ScenarioOutcome, CliError> {
    let id = PresetId::from_name("example33", &sc.params)?;
    let lambda = match id {
        PresetId::Example33 { lambda } => lambda,
        _ => unreachable!("example33 preset"),
    };
    let cs = preset(id)?;
    let horizon = sc.horizon.unwrap_or(8.0 * PI);
    let mut b = Builder { checks: Vec::new() };
    let sharp = lambda >= FRAC_PI_2 - 1e-9;

    let ray = check_condition_i(&cs, Index::One, (0.0, horizon), None, DEFAULT_EPS_Q)?;
    b.check("q changes sign on the ray", ray.fails(), format!("{}", ray.verdict));
    let cor = theorem_verdict(
        &cs,
        Theorem::Cor32 {
            t1: 2.0 * PI,
            t2: 3.0 * PI,
        },
        &TheoremOptions::new(horizon),
    )?;
    let expected_margin = 2.0 * lambda - PI;
    let iv_margin = cor.component(Criterion::CondIV).map_or(f64::NAN, |c| c.margin);
    b.check(
        "π-threshold integral on [2π, 3π]",
        cor.holds() == sharp && (iv_margin - expected_margin).abs() < 1e-8,
        format!("{} integral margin {:.9} (2λ - π = {:.9})", cor.verdict, iv_margin, expected_margin),
    );
    if sharp {
        let w = find_oscillation_windows(&cs, Index::One, horizon, &WindowOptions::default())?;
        b.check("at least two windows", w.holds(), format!("{} window(s)", w.components.len() / 2));
        let sols = analyze_seeded(
            &cs,
            InitKind::Symmetric,
            sc.seed,
            sc.count,
            (0.0, horizon),
            &sc.integrator,
            &ZeroOptions::default(),
        )?;
        let mut missing = Vec::new();
        for (i, s) in sols.iter().enumerate() {
            for m in 1.. {
                let (a, c) = (2.0 * PI * m as f64, (2 * m + 1) as f64 * PI);
                if c > horizon {
                    break;
                }
                if s.zeros.count_in(a - 1e-6, c + 1e-6) == 0 {
                    missing.push((i, m));
                }
            }
        }
        b.check(
            "every prepared solution has a zero in each [2πm, (2m+1)π]",
            missing.is_empty(),
            format!("missing (solution, m): {missing:?}"),
        );
    }
    let expected = if sharp {
        "oscillatory: the π threshold is met on every [2πm, (2m+1)π]"
    } else {
        "the π threshold is not met, so the criterion is silent"
    };
    Ok(b.finish("example33", expected))
}

fn thm33_demo(sc: &ScenarioConfig) -> Result<ScenarioOutcome, CliError> {
    no_params("thm33_demo", sc)?;
    let cs = preset(PresetId::Thm33Demo)?;
    let horizon = sc.horizon.unwrap_or(50.0);
    let mut b = Builder { checks: Vec::new() };
    let r = theorem_verdict(&cs, Theorem::Thm33, &TheoremOptions::new(horizon))?;
    b.check("cone conditions", r.holds(), format!("{} margin {:e}", r.verdict, r.margin));
    let sols = analyze_seeded(
        &cs,
        InitKind::Cone,
        sc.seed,
        sc.count,
        (0.0, horizon),
        &sc.integrator,
        &ZeroOptions::default(),
    )?;
    let mut bad = Vec::new();
    for (i, s) in sols.iter().enumerate() {
        let sign = verify_sign_identity(&s.trajectory, SignMode::Same)?;
        if !sign.holds || !s.zeros.is_empty() {
            bad.push(i);
        }
    }
    b.check(
        "det Φ never vanishes and has the sign of det Ψ",
        bad.is_empty(),
        format!("violations in solutions {bad:?}"),
    );
    Ok(b.finish("thm33_demo", "nonoscillatory"))
}

fn thm34_demo(sc: &ScenarioConfig) -> Result<ScenarioOutcome, CliError> {
    no_params("thm34_demo", sc)?;
    let cs = preset(PresetId::Thm34Demo)?;
    let horizon = sc.horizon.unwrap_or(10.0);
    let mut b = Builder { checks: Vec::new() };
    let r = theorem_verdict(&cs, Theorem::Thm34 { j: Index::One }, &TheoremOptions::new(horizon))?;
    b.check("saddle conditions", r.holds(), format!("{} margin {:e}", r.verdict, r.margin));
    let s = analyze_pair(
        &cs,
        Matrix2::IDENTITY,
        Matrix2::diag(1.0, -1.0),
        (0.0, horizon),
        &sc.integrator,
        &ZeroOptions::default(),
    )?;
    let sign = verify_sign_identity(&s.trajectory, SignMode::Opposite)?;
    b.check(
        "det Φ and det Ψ have opposite signs",
        sign.holds && s.zeros.is_empty(),
        format!("{} nodes, first violation {:?}", sign.nodes_checked, sign.first_violation),
    );
    Ok(b.finish("thm34_demo", "nonoscillatory"))
}

pub fn examples(a: &ExamplesArgs) -> Result<(), CliError> {
    let names: Vec<String> = if a.only.is_empty() {
        SCENARIOS.iter().map(|s| s.to_string()).collect()
    } else {
        a.only.clone()
    };
    for n in &names {
        if !SCENARIOS.contains(&n.as_str()) {
            return Err(CliError::Input(format!("unknown scenario `{n}` (known: {})", SCENARIOS.join(", "))));
        }
    }
    let sc = ScenarioConfig {
        params: match &a.params {
            Some(p) => parse_params(p)?,
            None => Params::new(),
        },
        horizon: a.common.horizon,
        seed: a.common.seed,
        count: a.count,
        integrator: a.common.integrator()?,
    };
    let outcomes = names
        .par_iter()
        .map(|n| run_scenario(n, &sc))
        .collect::<Result<Vec<_>, _>>()?;
    let mut text = String::new();
    for o in &outcomes {
        let _ = writeln!(text, "{:<11} {:<9} {}", o.name, if o.agrees { "agrees" } else { "DISAGREES" }, o.expected);
        for c in &o.checks {
            let _ = writeln!(text, "    [{}] {}: {}", if c.ok { "ok" } else { "!!" }, c.what, c.detail);
        }
    }
    emit(&a.common, "examples.json", &outcomes, text)?;
    let bad: Vec<&str> = outcomes.iter().filter(|o| !o.agrees).map(|o| o.name.as_str()).collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Mismatch(format!("outcome differs from expectation: {}", bad.join(", "))))
    }
}
