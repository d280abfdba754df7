//! Problems can be described in JSON with named parameters, the same format
//! the command line reads with `--problem`.

use matosc::criteria::{theorem_verdict, Theorem, TheoremOptions};
use matosc::system::ProblemFile;

const DAMPED: &str = r#"{
  "t0": 0,
  "params": {"k": 4.0},
  "P": [["-0.1", "0"], ["0", "-0.1"]],
  "Q": [["1", "0"], ["0", "1"]],
  "R": [["-k", "0"], ["0", "-k"]],
  "S": [["0.1", "0"], ["0", "0.1"]],
  "q_diagonal": true
}"#;

fn main() {
    let mut problem = ProblemFile::from_json(DAMPED).unwrap();
    for k in [0.5, 1.0, 4.0] {
        problem.set_param("k", k).unwrap();
        let cs = problem.build().unwrap();
        let r = theorem_verdict(&cs, Theorem::Cor32 { t1: 0.0, t2: 3.0 }, &TheoremOptions::new(3.0)).unwrap();
        println!("k = {k}: π-threshold on [0, 3] {} (margin {:+.6})", r.verdict, r.margin);
    }

    match ProblemFile::from_json(r#"{"t0": 0, "P": [["0", "0"]"#) {
        Ok(_) => unreachable!(),
        Err(e) => println!("{e}"),
    }
}
