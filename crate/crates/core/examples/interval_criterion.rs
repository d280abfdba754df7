//! `Q = λ sin t·I`, `R = -λ sin t·I`: the sign condition on `q` fails on the
//! whole ray, but on each `[2πm, (2m+1)π]` the π-threshold integral equals `2λ`.

use std::f64::consts::PI;

use matosc::analysis::{analyze_seeded, InitKind};
use matosc::criteria::{check_condition_iv, find_oscillation_windows, WindowOptions, Witness};
use matosc::integrate::IntegratorConfig;
use matosc::oscillation::ZeroOptions;
use matosc::system::{preset, Index, PresetId, DEFAULT_EPS_Q};

fn main() {
    for lambda in [1.0, 1.2, PI / 2.0, 2.0] {
        let cs = preset(PresetId::Example33 { lambda }).unwrap();
        let r = check_condition_iv(&cs, Index::One, 2.0 * PI, 3.0 * PI, DEFAULT_EPS_Q).unwrap();
        println!("λ = {lambda:.6}: {} margin {:+.9} (2λ - π = {:+.9})", r.verdict, r.margin, 2.0 * lambda - PI);
    }

    let cs = preset(PresetId::Example33 { lambda: 2.0 }).unwrap();
    let w = find_oscillation_windows(&cs, Index::One, 8.0 * PI, &WindowOptions::default()).unwrap();
    for wit in &w.witnesses {
        if let Witness::Interval { from, to } = wit {
            println!("window [{from:.6}, {to:.6}]");
        }
    }

    let sols = analyze_seeded(
        &cs,
        InitKind::Symmetric,
        42,
        5,
        (0.0, 8.0 * PI),
        &IntegratorConfig::default(),
        &ZeroOptions::default(),
    )
    .unwrap();
    for (i, s) in sols.iter().enumerate() {
        let per_window: Vec<usize> = (1..=3)
            .map(|m| s.zeros.count_in(2.0 * PI * m as f64, (2 * m + 1) as f64 * PI))
            .collect();
        println!("solution {i}: zeros per window {per_window:?}");
    }
}
