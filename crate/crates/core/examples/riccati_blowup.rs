//! The Riccati equation for `Φ'' + Φ = 0` started from `Y0 = 0` is `Y = -tan t·I`,
//! which escapes to infinity at `π/2`. The off-diagonal entries of a non-trivial
//! flow are compared with their variation-of-constants formulas.

use std::f64::consts::FRAC_PI_2;

use matosc::criteria::OffDiagonalClosedForm;
use matosc::integrate::{integrate_riccati, IntegratorConfig, Termination};
use matosc::system::{preset, Matrix2, PresetId};

fn main() {
    let cs = preset(PresetId::Remark34).unwrap();
    let tr = integrate_riccati(&cs, Matrix2::ZERO, (0.0, 3.0), &IntegratorConfig::default()).unwrap();
    match tr.termination() {
        Termination::BlowUp { t_escape, bracket } => {
            println!("escape near t = {t_escape:.9}, bracket [{:.9}, {:.9}]", bracket.0, bracket.1);
            println!("distance to π/2: {:.2e}", (t_escape - FRAC_PI_2).abs());
        }
        other => println!("no escape: {other:?}"),
    }
    let y = tr.riccati_at(1.0).unwrap();
    println!("y11(1) = {:.12}, -tan(1) = {:.12}", y.a11, -1f64.tan());

    let cs = preset(PresetId::Thm33Demo).unwrap();
    let tr = integrate_riccati(&cs, Matrix2::IDENTITY, (0.0, 10.0), &IntegratorConfig::default()).unwrap();
    let mut cf = OffDiagonalClosedForm::new(&cs, &tr).unwrap();
    for t in [1.0, 5.0, 10.0] {
        let y = tr.riccati_at(t).unwrap();
        let (y12, y21) = cf.eval(t).unwrap();
        println!("t = {t:>4}: y12 {:+.10} (closed form {:+.10}), y21 {:+.10} (closed form {:+.10})", y.a12, y12, y.a21, y21);
    }
}
