//! `Φ'' + K(t) Φ = 0` with `K` built from quasi-periodic diagonal terms and a
//! decaying off-diagonal coupling. The reduced scalar equation is integrated
//! to count zeros, then seeded prepared solutions of the matrix system.

use matosc::analysis::{analyze_seeded, InitKind};
use matosc::integrate::{integrate_scalar_system, IntegratorConfig};
use matosc::oscillation::{scalar_zeros, ZeroOptions};
use matosc::system::{preset, Index, PresetId, DEFAULT_EPS_Q};

fn main() {
    let cs = preset(PresetId::example31_default()).unwrap();
    let (t0, horizon) = (cs.t0(), 200.0);
    let cfg = IntegratorConfig::default();

    let scalar = integrate_scalar_system(&cs, Index::One, 1.0, 0.0, (t0, horizon), &cfg, DEFAULT_EPS_Q).unwrap();
    let zeros = scalar_zeros(&scalar, (t0, horizon), 1e-10).unwrap();
    println!("reduced scalar φ: {} zeros on [{t0}, {horizon}], first {:?}", zeros.len(), &zeros[..3]);

    let sols = analyze_seeded(&cs, InitKind::Symmetric, 42, 10, (t0, horizon), &cfg, &ZeroOptions::default()).unwrap();
    for (i, s) in sols.iter().enumerate() {
        println!(
            "solution {i}: {} zeros of det Φ, prepared along the flow: {} (asymmetry {:.1e})",
            s.zeros.len(),
            s.prepared.is_prepared,
            s.prepared.max_asymmetry
        );
    }
}
