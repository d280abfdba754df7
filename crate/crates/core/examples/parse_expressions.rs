//! Coefficient expressions: parsing, parameters and evaluation.

use matosc::expr::{parse, parse_with, Params};

fn main() {
    let e = parse("max(sin(t), 0) + 2^-1").expect("valid expression");
    for t in [0.0, 1.0, 4.0] {
        println!("max(sin(t), 0) + 2^-1 at t = {t}: {}", e.eval(t).unwrap());
    }

    let mut params = Params::new();
    params.insert("b".into(), 1.0);
    params.insert("alpha".into(), 2.0);
    let off = parse_with("-(b*cos(t)/t^alpha)", &params).unwrap();
    println!("-(b cos t / t^alpha) at t = 2: {:.12}", off.eval(2.0).unwrap());

    match parse("sin(t") {
        Ok(_) => unreachable!(),
        Err(err) => println!("error at byte {}: {err}", err.offset()),
    }
    match parse("sqrt(t)").unwrap().eval(-1.0) {
        Ok(_) => unreachable!(),
        Err(err) => println!("evaluation error: {err}"),
    }
}
