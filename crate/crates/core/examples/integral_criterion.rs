//! `Q = max(sin t, 0)·I`, `R = min(sin t, 0)·I`: both weighted integrals grow by 2
//! per period, which can be observed up to any horizon but never proved.

use std::f64::consts::PI;

use matosc::analysis::{analyze_seeded, InitKind};
use matosc::criteria::{theorem_verdict, Theorem, TheoremOptions, Witness};
use matosc::integrate::IntegratorConfig;
use matosc::oscillation::ZeroOptions;
use matosc::system::{preset, PresetId};

fn main() {
    let cs = preset(PresetId::Example32).unwrap();
    let horizon = 40.0 * PI;
    let r = theorem_verdict(&cs, Theorem::Cor31, &TheoremOptions::new(horizon)).unwrap();
    println!("{}: {}", r.criterion, r.verdict);
    for c in &r.components {
        println!("  {}: {} margin {:.6}", c.criterion, c.verdict, c.margin);
        for w in &c.witnesses {
            if let Witness::Series { label, t, values } = w {
                let last = t.len() - 1;
                println!("    {label}({:.4}) = {:.9}", t[last], values[last]);
            }
        }
    }

    let sols = analyze_seeded(
        &cs,
        InitKind::Symmetric,
        42,
        5,
        (0.0, horizon),
        &IntegratorConfig::default(),
        &ZeroOptions::default(),
    )
    .unwrap();
    let counts: Vec<usize> = sols.iter().map(|s| s.zeros.len()).collect();
    println!("zeros of det Φ on [0, 40π]: {counts:?}");
}
