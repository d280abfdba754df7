//! Two non-oscillation results: the invariant cone (sign pattern plus cell
//! integrals) and the saddle case with `q_1 >= 0 >= q_2`.

use matosc::analysis::{analyze_pair, analyze_seeded, InitKind};
use matosc::criteria::{theorem_verdict, Theorem, TheoremOptions};
use matosc::integrate::IntegratorConfig;
use matosc::oscillation::{verify_sign_identity, SignMode, ZeroOptions};
use matosc::system::{preset, Index, Matrix2, PresetId};

fn main() {
    let cfg = IntegratorConfig::default();
    let opts = ZeroOptions::default();

    let cs = preset(PresetId::Thm33Demo).unwrap();
    let r = theorem_verdict(&cs, Theorem::Thm33, &TheoremOptions::new(50.0)).unwrap();
    println!("cone conditions: {}", r.verdict);
    for s in analyze_seeded(&cs, InitKind::Cone, 42, 5, (0.0, 50.0), &cfg, &opts).unwrap() {
        let sign = verify_sign_identity(&s.trajectory, SignMode::Same).unwrap();
        println!(
            "  Y0 = {:?}: {} zeros, sign det Φ = sign det Ψ at all {} nodes: {}",
            s.y0.to_array(),
            s.zeros.len(),
            sign.nodes_checked,
            sign.holds
        );
    }

    let cs = preset(PresetId::Thm34Demo).unwrap();
    let r = theorem_verdict(&cs, Theorem::Thm34 { j: Index::One }, &TheoremOptions::new(10.0)).unwrap();
    println!("saddle conditions: {}", r.verdict);
    for c in &r.components {
        println!("  {}: {} ({})", c.criterion, c.verdict, c.notes.join("; "));
    }
    let s = analyze_pair(&cs, Matrix2::IDENTITY, Matrix2::diag(1.0, -1.0), (0.0, 10.0), &cfg, &opts).unwrap();
    let sign = verify_sign_identity(&s.trajectory, SignMode::Opposite).unwrap();
    println!("  Ψ0 = diag(1, -1): opposite signs at every node: {}", sign.holds);
}
