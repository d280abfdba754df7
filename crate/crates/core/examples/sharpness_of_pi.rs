//! For `Φ'' + Φ = 0` the π-threshold integral over `[t1, t2]` is `t2 - t1`.
//! It reaches π exactly on intervals of length π, and the solution
//! `Φ = sin t·I` has no zero strictly inside `(0, π)`.

use std::f64::consts::PI;

use matosc::criteria::check_condition_iv;
use matosc::integrate::{integrate_matrix_system, IntegratorConfig};
use matosc::oscillation::{detect_zeros, ZeroOptions};
use matosc::system::{preset, Index, Matrix2, PresetId, DEFAULT_EPS_Q};

fn main() {
    let cs = preset(PresetId::Remark34).unwrap();
    for (t1, t2) in [(0.0, PI), (0.1, PI - 0.1), (1.0, 1.0 + PI), (0.0, 4.0)] {
        let r = check_condition_iv(&cs, Index::One, t1, t2, DEFAULT_EPS_Q).unwrap();
        println!("[{t1:.4}, {t2:.4}]: {} margin {:+.3e}", r.verdict, r.margin);
    }

    let tr = integrate_matrix_system(&cs, Matrix2::ZERO, Matrix2::IDENTITY, (0.0, 7.0), &IntegratorConfig::default()).unwrap();
    let opts = ZeroOptions::default();
    println!("zeros on [0.1, π - 0.1]: {}", detect_zeros(&tr, (0.1, PI - 0.1), &opts).unwrap().len());
    for z in detect_zeros(&tr, (0.1, 7.0), &opts).unwrap().zeros {
        println!("zero at {:.12} ({:?}), error {:.1e}", z.t, z.kind, (z.t - (z.t / PI).round() * PI).abs());
    }
}
