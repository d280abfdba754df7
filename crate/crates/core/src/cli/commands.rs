use std::fmt::Write as _;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use super::{emit, parse_list, parse_time, write_file, CliError, CommonArgs, InitArg, Loaded, ProblemArgs};
use crate::analysis::{analyze_seeded, seeded_y0, InitKind, SolutionSummary};
use crate::criteria::{
    check_condition_i, check_condition_ii_empirical, check_condition_iii, check_condition_iv, check_lemma22,
    find_oscillation_windows, theorem_verdict, CriterionReport, OffDiagonalClosedForm, Partition,
    SignPattern, Theorem, TheoremOptions, WindowOptions,
};
use crate::expr::Params;
use crate::integrate::{integrate_riccati, Termination};
use crate::oscillation::{ZeroOptions, ZeroReport};
use crate::system::{CoefficientSystem, Index, Matrix2, DEFAULT_EPS_Q};

const DEFAULT_SPAN: f64 = 20.0;

fn index_arg(j: u8) -> Index {
    Index::from_number(j).expect("clap restricts j to 1 or 2")
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of seeded solutions.
    #[arg(long, default_value_t = 8)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = InitArg::Symmetric)]
    pub init: InitArg,
}

#[derive(Serialize)]
struct AnalyzeSummary<'a> {
    problem: &'a str,
    t0: f64,
    horizon: f64,
    seed: u64,
    init: InitKind,
    count: usize,
    oscillatory: usize,
    nonoscillatory: usize,
    prepared: usize,
    solutions: Vec<SolutionSummary>,
}

pub fn analyze(a: &AnalyzeArgs) -> Result<(), CliError> {
    let Loaded { label, system, .. } = a.problem.load(&Params::new())?;
    let t0 = system.t0();
    let horizon = a.common.horizon_or(t0 + DEFAULT_SPAN)?;
    if !(horizon > t0) {
        return Err(CliError::Input(format!("horizon {horizon} must exceed t0 = {t0}")));
    }
    let cfg = a.common.integrator()?;
    let init = InitKind::from(a.init);
    let all = analyze_seeded(&system, init, a.common.seed, a.count, (t0, horizon), &cfg, &ZeroOptions::default())?;
    let solutions: Vec<SolutionSummary> = all.iter().enumerate().map(|(i, s)| s.summary(i)).collect();
    if let Some(dir) = &a.common.out {
        for (i, s) in all.iter().enumerate() {
            write_file(dir, &format!("solution_{i:03}.csv"), &s.trajectory.to_csv())?;
            let zr = ZeroReport::new(s.zeros.clone(), &s.prepared, s.classification);
            write_file(dir, &format!("solution_{i:03}_zeros.json"), &super::to_json(&zr))?;
        }
    }
    let summary = AnalyzeSummary {
        problem: &label,
        t0,
        horizon,
        seed: a.common.seed,
        init,
        count: a.count,
        oscillatory: solutions.iter().filter(|s| s.classification.is_oscillatory()).count(),
        nonoscillatory: solutions.iter().filter(|s| !s.classification.is_oscillatory()).count(),
        prepared: solutions.iter().filter(|s| s.prepared).count(),
        solutions,
    };
    let mut text = format!("{label} on [{t0}, {horizon}], seed {}\n", a.common.seed);
    for s in &summary.solutions {
        let status = if s.classification.is_oscillatory() {
            format!("oscillatory, {} zero(s) ({} tangential)", s.zero_count, s.tangential)
        } else {
            format!("no zero up to {horizon}")
        };
        let prep = if s.prepared { "prepared" } else { "not prepared" };
        let _ = writeln!(text, "  #{:<3} {status}; {prep}", s.index);
    }
    let _ = writeln!(
        text,
        "{} oscillatory, {} without zeros, {} of {} prepared",
        summary.oscillatory, summary.nonoscillatory, summary.prepared, summary.count
    );
    emit(&a.common, "summary.json", &summary, text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Plus,
    Minus,
}

#[derive(Debug, Args)]
pub struct CriteriaArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Distinguished index j.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub j: u8,
    #[arg(long, value_parser = parse_time, allow_hyphen_values = true)]
    pub t1: Option<f64>,
    #[arg(long, value_parser = parse_time, allow_hyphen_values = true)]
    pub t2: Option<f64>,
    /// Shorthand for `--params lambda=...`.
    #[arg(long, value_parser = parse_time, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Sign condition on q on [t1, t2], or on [t0, horizon] without them.
    #[arg(long = "cond-I", alias = "cond-i")]
    pub cond_i: bool,
    /// Sign condition on q from t0 up to the horizon.
    #[arg(long = "cond-I-ray", alias = "cond-i-ray")]
    pub cond_i_ray: bool,
    /// Zeros of the reduced scalar system, by integration.
    #[arg(long = "cond-II", alias = "cond-ii")]
    pub cond_ii: bool,
    /// Growth of the two weighted integrals up to the horizon.
    #[arg(long = "cond-III", alias = "cond-iii")]
    pub cond_iii: bool,
    /// The π-threshold integral on [t1, t2].
    #[arg(long = "cond-IV", alias = "cond-iv")]
    pub cond_iv: bool,
    /// Greedy search for π-threshold windows up to the horizon.
    #[arg(long)]
    pub windows: bool,
    #[arg(long)]
    pub lemma22: bool,
    #[arg(long)]
    pub thm31: bool,
    #[arg(long)]
    pub cor31: bool,
    #[arg(long)]
    pub cor32: bool,
    #[arg(long)]
    pub thm33: bool,
    #[arg(long)]
    pub thm34: bool,
    /// Sign pattern for the cone conditions.
    #[arg(long, value_enum, default_value_t = SignArg::Plus)]
    pub sign: SignArg,
    /// Cell boundaries, comma separated, starting at t0.
    #[arg(long, value_name = "T0,T1,...")]
    pub partition: Option<String>,
    /// Uniform cells of this length from t0 to the horizon.
    #[arg(long)]
    pub partition_step: Option<f64>,
    #[arg(long, default_value_t = crate::criteria::III_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0.1)]
    pub min_gap: f64,
    #[arg(long, default_value_t = 2)]
    pub min_zeros: usize,
}

impl CriteriaArgs {
    fn interval(&self) -> Result<(f64, f64), CliError> {
        match (self.t1, self.t2) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(CliError::Input("this check needs --t1 and --t2".into())),
        }
    }

    fn partition(&self, cs: &CoefficientSystem, horizon: f64) -> Result<Option<[Partition; 2]>, CliError> {
        let p = match (&self.partition, self.partition_step) {
            (Some(_), Some(_)) => return Err(CliError::Input("give --partition or --partition-step, not both".into())),
            (Some(list), None) => Partition::new(parse_list(list, "partition")?)?,
            (None, Some(h)) => Partition::uniform(cs.t0(), horizon, h)?,
            (None, None) => return Ok(None),
        };
        Ok(Some([p.clone(), p]))
    }
}

pub fn criteria(a: &CriteriaArgs) -> Result<(), CliError> {
    let mut extra = Params::new();
    if let Some(l) = a.lambda {
        extra.insert("lambda".into(), l);
    }
    let Loaded { label, system: cs, .. } = a.problem.load(&extra)?;
    let t0 = cs.t0();
    let horizon = a.common.horizon_or(t0 + DEFAULT_SPAN)?;
    let j = index_arg(a.j);
    let eps_q = DEFAULT_EPS_Q;
    let mut opts = TheoremOptions::new(horizon);
    opts.j = j;
    opts.partitions = a.partition(&cs, horizon)?;
    opts.sign_pattern = match a.sign {
        SignArg::Plus => SignPattern::Plus,
        SignArg::Minus => SignPattern::Minus,
    };
    opts.min_zeros = a.min_zeros;
    opts.threshold = a.threshold;
    opts.integrator = a.common.integrator()?;

    let any = a.cond_i
        || a.cond_i_ray
        || a.cond_ii
        || a.cond_iii
        || a.cond_iv
        || a.windows
        || a.lemma22
        || a.thm31
        || a.cor31
        || a.cor32
        || a.thm33
        || a.thm34;
    let mut reports: Vec<CriterionReport> = Vec::new();
    if a.cond_i {
        let iv = match (a.t1, a.t2) {
            (Some(t1), Some(t2)) => (t1, t2),
            _ => (t0, horizon),
        };
        reports.push(check_condition_i(&cs, j, iv, None, eps_q)?);
    }
    if a.cond_i_ray {
        reports.push(
            check_condition_i(&cs, j, (t0, horizon), None, eps_q)?
                .with_note(format!("ray [{t0}, ∞) checked up to the horizon {horizon}")),
        );
    }
    if a.cond_ii {
        reports.push(check_condition_ii_empirical(&cs, j, horizon, a.min_zeros, &opts.integrator, eps_q)?);
    }
    if a.cond_iii {
        reports.push(check_condition_iii(&cs, j, horizon, a.threshold, eps_q)?);
    }
    if a.cond_iv {
        let (t1, t2) = a.interval()?;
        reports.push(check_condition_iv(&cs, j, t1, t2, eps_q)?);
    }
    if a.windows {
        let w = WindowOptions { min_gap: a.min_gap, eps_q };
        reports.push(find_oscillation_windows(&cs, j, horizon, &w)?);
    }
    if a.lemma22 {
        let [p1, p2] = match &opts.partitions {
            Some(p) => p.clone(),
            None => {
                let p = Partition::trivial(t0, horizon)?;
                [p.clone(), p]
            }
        };
        reports.push(check_lemma22(&cs, [&p1, &p2], opts.sign_pattern)?);
    }
    let theorems: Vec<Theorem> = if any {
        let mut v = Vec::new();
        if a.thm31 {
            v.push(Theorem::Thm31);
        }
        if a.cor31 {
            v.push(Theorem::Cor31);
        }
        if a.cor32 {
            let (t1, t2) = a.interval()?;
            v.push(Theorem::Cor32 { t1, t2 });
        }
        if a.thm33 {
            v.push(Theorem::Thm33);
        }
        if a.thm34 {
            v.push(Theorem::Thm34 { j });
        }
        v
    } else {
        let mut v = vec![Theorem::Thm31, Theorem::Cor31];
        if let (Some(t1), Some(t2)) = (a.t1, a.t2) {
            v.push(Theorem::Cor32 { t1, t2 });
        }
        v.push(Theorem::Thm33);
        v.push(Theorem::Thm34 { j });
        v
    };
    for th in theorems {
        reports.push(theorem_verdict(&cs, th, &opts)?);
    }

    let mut text = format!("{label}, j = {}, horizon {horizon}\n", j.number());
    for r in &reports {
        write_report(&mut text, r, 1);
    }
    emit(&a.common, "criteria.json", &reports, text)
}

fn write_report(out: &mut String, r: &CriterionReport, depth: usize) {
    let pad = "  ".repeat(depth);
    let _ = writeln!(out, "{pad}{:<18} {:<21} margin {:+.6e}", r.criterion.name(), r.verdict.to_string(), r.margin);
    for n in &r.notes {
        let _ = writeln!(out, "{pad}    {n}");
    }
    for c in &r.components {
        write_report(out, c, depth + 1);
    }
}

#[derive(Debug, Args)]
pub struct RiccatiArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Initial value `y11,y12,y21,y22`.
    #[arg(long, default_value = "0,0,0,0", allow_hyphen_values = true)]
    pub y0: String,
    /// Compare the off-diagonal entries with their closed forms at this many points.
    #[arg(long, default_value_t = 0)]
    pub closed_form_probes: usize,
}

#[derive(Serialize)]
struct RiccatiReport<'a> {
    problem: &'a str,
    y0: [f64; 4],
    span: (f64, f64),
    termination: &'a Termination,
    nodes: usize,
    t_end: f64,
    y_end: [f64; 4],
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form_max_deviation: Option<f64>,
}

pub fn riccati(a: &RiccatiArgs) -> Result<(), CliError> {
    let Loaded { label, system: cs, .. } = a.problem.load(&Params::new())?;
    let y0 = parse_list(&a.y0, "y0")?;
    if y0.len() != 4 {
        return Err(CliError::Input(format!("y0 needs 4 entries, got {}", y0.len())));
    }
    let y0 = Matrix2::from_slice(&y0);
    let t0 = cs.t0();
    let horizon = a.common.horizon_or(t0 + DEFAULT_SPAN)?;
    let cfg = a.common.integrator()?;
    let tr = integrate_riccati(&cs, y0, (t0, horizon), &cfg)?;
    if let Termination::StepFailure { t, reason } = tr.termination() {
        return Err(CliError::Numeric(format!("Riccati integration failed at t = {t}: {reason}")));
    }
    let deviation = if a.closed_form_probes > 0 {
        let mut cf = OffDiagonalClosedForm::new(&cs, &tr)?;
        let mut worst: f64 = 0.0;
        let n = a.closed_form_probes;
        for i in 0..n {
            let t = tr.start() + (tr.end() - tr.start()) * (i + 1) as f64 / n as f64;
            let y = tr.riccati_at(t).expect("probe inside span");
            let (y12, y21) = cf.eval(t)?;
            worst = worst.max((y12 - y.a12).abs()).max((y21 - y.a21).abs());
        }
        Some(worst)
    } else {
        None
    };
    if let Some(dir) = &a.common.out {
        write_file(dir, "riccati.csv", &tr.to_csv())?;
    }
    let report = RiccatiReport {
        problem: &label,
        y0: y0.to_array(),
        span: (t0, horizon),
        termination: tr.termination(),
        nodes: tr.len(),
        t_end: tr.end(),
        y_end: Matrix2::from_slice(tr.last_state()).to_array(),
        closed_form_max_deviation: deviation,
    };
    let mut text = match tr.termination() {
        Termination::BlowUp { t_escape, bracket } => format!(
            "{label}: Y escapes to infinity near t = {t_escape} (bracket [{}, {}])\n",
            bracket.0, bracket.1
        ),
        _ => format!("{label}: Y exists on [{t0}, {horizon}]\n"),
    };
    let _ = writeln!(text, "  nodes {}, Y(end) = {:?}", tr.len(), report.y_end);
    if let Some(d) = deviation {
        let _ = writeln!(text, "  closed-form off-diagonal deviation {d:.3e}");
    }
    emit(&a.common, "riccati.json", &report, text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepCheck {
    /// The π-threshold integral on [t1, t2].
    CondIv,
    /// Sign condition plus growth of the weighted integrals.
    Cor31,
    /// Number of π-threshold windows up to the horizon.
    Windows,
    /// Zeros of det Φ for one seeded prepared solution.
    Zeros,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Parameter to vary.
    #[arg(long)]
    pub param: String,
    #[arg(long, value_parser = parse_time, allow_hyphen_values = true)]
    pub from: f64,
    #[arg(long, value_parser = parse_time, allow_hyphen_values = true)]
    pub to: f64,
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = SweepCheck::CondIv)]
    pub check: SweepCheck,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub j: u8,
    #[arg(long, value_parser = parse_time, allow_hyphen_values = true)]
    pub t1: Option<f64>,
    #[arg(long, value_parser = parse_time, allow_hyphen_values = true)]
    pub t2: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SweepRow {
    value: f64,
    verdict: String,
    margin: f64,
    count: Option<usize>,
}

#[derive(Serialize)]
struct SweepReport<'a> {
    problem: &'a str,
    param: &'a str,
    check: SweepCheck,
    rows: Vec<SweepRow>,
}

fn sweep_one(a: &SweepArgs, value: f64) -> Result<SweepRow, CliError> {
    let mut extra = Params::new();
    extra.insert(a.param.clone(), value);
    let cs = a.problem.load(&extra)?.system;
    let t0 = cs.t0();
    let horizon = a.common.horizon_or(t0 + DEFAULT_SPAN)?;
    let j = index_arg(a.j);
    let row = |r: CriterionReport, count| SweepRow {
        value,
        verdict: r.verdict.to_string(),
        margin: r.margin,
        count,
    };
    Ok(match a.check {
        SweepCheck::CondIv => {
            let (t1, t2) = match (a.t1, a.t2) {
                (Some(x), Some(y)) => (x, y),
                _ => return Err(CliError::Input("--check cond-iv needs --t1 and --t2".into())),
            };
            row(check_condition_iv(&cs, j, t1, t2, DEFAULT_EPS_Q)?, None)
        }
        SweepCheck::Cor31 => {
            let mut opts = TheoremOptions::new(horizon);
            opts.j = j;
            row(theorem_verdict(&cs, Theorem::Cor31, &opts)?, None)
        }
        SweepCheck::Windows => {
            let r = find_oscillation_windows(&cs, j, horizon, &WindowOptions::default())?;
            let n = r.components.len() / 2;
            row(r, Some(n))
        }
        SweepCheck::Zeros => {
            let cfg = a.common.integrator()?;
            let y0 = seeded_y0(InitKind::Symmetric, a.common.seed, 1)[0];
            let s = crate::analysis::analyze_from(&cs, y0, (t0, horizon), &cfg, &ZeroOptions::default())?;
            SweepRow {
                value,
                verdict: if s.classification.is_oscillatory() { "oscillatory" } else { "no_zero" }.into(),
                margin: s.zeros.len() as f64,
                count: Some(s.zeros.len()),
            }
        }
    })
}

pub fn sweep(a: &SweepArgs) -> Result<(), CliError> {
    if a.steps == 0 || !a.from.is_finite() || !a.to.is_finite() {
        return Err(CliError::Input("sweep needs finite --from/--to and --steps >= 1".into()));
    }
    let label = a
        .problem
        .preset_name()?
        .map(str::to_string)
        .or_else(|| a.problem.problem.as_ref().map(|p| p.display().to_string()))
        .unwrap_or_default();
    let values: Vec<f64> = (0..a.steps)
        .map(|i| {
            if a.steps == 1 {
                a.from
            } else {
                a.from + (a.to - a.from) * i as f64 / (a.steps - 1) as f64
            }
        })
        .collect();
    let rows = values
        .par_iter()
        .map(|&v| sweep_one(a, v))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(dir) = &a.common.out {
        let mut csv = format!("{},verdict,margin,count\n", a.param);
        for r in &rows {
            let count = r.count.map(|c| c.to_string()).unwrap_or_default();
            let _ = writeln!(csv, "{},{},{},{}", r.value, r.verdict, r.margin, count);
        }
        write_file(dir, "sweep.csv", &csv)?;
    }
    let mut text = format!("{label}: sweep of {} ({:?})\n", a.param, a.check);
    for r in &rows {
        let _ = writeln!(text, "  {:>12.6} {:<21} {:+.6e}", r.value, r.verdict, r.margin);
    }
    let report = SweepReport {
        problem: &label,
        param: &a.param,
        check: a.check,
        rows,
    };
    emit(&a.common, "sweep.json", &report, text)
}
