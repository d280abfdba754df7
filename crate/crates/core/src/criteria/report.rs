use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Criterion {
    #[serde(rename = "cond_I")]
    CondI,
    #[serde(rename = "cond_II_empirical")]
    CondIIEmpirical,
    #[serde(rename = "cond_III")]
    CondIII,
    #[serde(rename = "cond_IV")]
    CondIV,
    #[serde(rename = "windows_IVm")]
    WindowsIVm,
    #[serde(rename = "lemma22_A")]
    Lemma22A,
    #[serde(rename = "lemma22_B")]
    Lemma22B,
    #[serde(rename = "thm34_C")]
    Thm34C,
    #[serde(rename = "thm34_D1")]
    Thm34D1,
    #[serde(rename = "thm34_D2")]
    Thm34D2,
    #[serde(rename = "lemma22")]
    Lemma22,
    #[serde(rename = "thm31")]
    Thm31,
    #[serde(rename = "cor31")]
    Cor31,
    #[serde(rename = "cor32")]
    Cor32,
    #[serde(rename = "thm33")]
    Thm33,
    #[serde(rename = "thm34")]
    Thm34,
}

impl Criterion {
    pub fn name(&self) -> &'static str {
        match self {
            Criterion::CondI => "cond_I",
            Criterion::CondIIEmpirical => "cond_II_empirical",
            Criterion::CondIII => "cond_III",
            Criterion::CondIV => "cond_IV",
            Criterion::WindowsIVm => "windows_IVm",
            Criterion::Lemma22A => "lemma22_A",
            Criterion::Lemma22B => "lemma22_B",
            Criterion::Thm34C => "thm34_C",
            Criterion::Thm34D1 => "thm34_D1",
            Criterion::Thm34D2 => "thm34_D2",
            Criterion::Lemma22 => "lemma22",
            Criterion::Thm31 => "thm31",
            Criterion::Cor31 => "cor31",
            Criterion::Cor32 => "cor32",
            Criterion::Thm33 => "thm33",
            Criterion::Thm34 => "thm34",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    /// Consistent with the condition up to the horizon, which is all a finite
    /// computation can say about a statement over `[t0, ∞)`.
    UndecidedAtHorizon,
}

impl Verdict {
    /// Fails dominates, then undecided, then holds.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fails, _) | (_, Fails) => Fails,
            (UndecidedAtHorizon, _) | (_, UndecidedAtHorizon) => UndecidedAtHorizon,
            _ => Holds,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::UndecidedAtHorizon => "undecided_at_horizon",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Point { t: f64 },
    Interval { from: f64, to: f64 },
    Partition { points: Vec<f64> },
    /// Sampled values, e.g. partial integrals at checkpoints.
    Series { label: String, t: Vec<f64>, values: Vec<f64> },
}

/// Outcome of one checked condition, or of a theorem composed from several.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub criterion: Criterion,
    pub verdict: Verdict,
    /// Signed distance to the threshold; nonnegative means satisfied.
    pub margin: f64,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<CriterionReport>,
}

impl CriterionReport {
    pub fn new(criterion: Criterion, verdict: Verdict, margin: f64) -> Self {
        CriterionReport {
            criterion,
            verdict,
            margin,
            witnesses: Vec::new(),
            notes: Vec::new(),
            components: Vec::new(),
        }
    }

    /// Combines component reports: the verdict is the weakest one, the margin the smallest.
    pub fn composite(criterion: Criterion, components: Vec<CriterionReport>) -> Self {
        let verdict = components.iter().fold(Verdict::Holds, |v, c| v.and(c.verdict));
        let margin = components.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
        CriterionReport {
            criterion,
            verdict,
            margin: if margin.is_finite() { margin } else { 0.0 },
            witnesses: Vec::new(),
            notes: Vec::new(),
            components,
        }
    }

    pub fn with_witness(mut self, w: Witness) -> Self {
        self.witnesses.push(w);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    pub fn fails(&self) -> bool {
        self.verdict == Verdict::Fails
    }

    /// Holds, or undecided but supported by everything computed up to the horizon.
    pub fn supported(&self) -> bool {
        self.verdict != Verdict::Fails
    }

    pub fn component(&self, criterion: Criterion) -> Option<&CriterionReport> {
        self.components.iter().find(|c| c.criterion == criterion)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialise")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_combine_pessimistically() {
        use Verdict::*;
        assert_eq!(Holds.and(Holds), Holds);
        assert_eq!(Holds.and(UndecidedAtHorizon), UndecidedAtHorizon);
        assert_eq!(UndecidedAtHorizon.and(Fails), Fails);
    }

    #[test]
    fn json_field_names() {
        let r = CriterionReport::new(Criterion::CondIV, Verdict::Holds, 0.25)
            .with_witness(Witness::Interval { from: 0.0, to: 1.0 })
            .with_note("n");
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["criterion"], "cond_IV");
        assert_eq!(v["verdict"], "holds");
        assert_eq!(v["margin"], 0.25);
        assert_eq!(v["witnesses"][0]["kind"], "interval");
        assert!(v.get("components").is_none());
    }

    #[test]
    fn composite_takes_minimum_margin() {
        let a = CriterionReport::new(Criterion::CondI, Verdict::Holds, 1.0);
        let b = CriterionReport::new(Criterion::CondIV, Verdict::Fails, -0.5);
        let c = CriterionReport::composite(Criterion::Cor32, vec![a, b]);
        assert_eq!(c.verdict, Verdict::Fails);
        assert_eq!(c.margin, -0.5);
        assert!(c.component(Criterion::CondI).unwrap().holds());
    }
}
