use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CoefficientSystem, Entries, SystemError};
use crate::expr::{parse_with, Params};

/// On-disk problem description.
///
/// ```json
/// { "t0": 0.0, "params": {"lambda": 2.0},
///   "P": [["0","0"],["0","0"]], "Q": [["lambda*sin(t)","0"],["0","lambda*sin(t)"]],
///   "R": [["-lambda*sin(t)","0"],["0","-lambda*sin(t)"]], "S": [["0","0"],["0","0"]],
///   "q_diagonal": true }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub t0: f64,
    #[serde(default)]
    pub params: Params,
    #[serde(rename = "P")]
    pub p: [[String; 2]; 2],
    #[serde(rename = "Q")]
    pub q: [[String; 2]; 2],
    #[serde(rename = "R")]
    pub r: [[String; 2]; 2],
    #[serde(rename = "S")]
    pub s: [[String; 2]; 2],
    #[serde(default)]
    pub q_diagonal: bool,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, SystemError> {
        serde_json::from_str(text).map_err(|e| {
            let (line, column) = (e.line(), e.column());
            SystemError::Json {
                offset: byte_offset(text, line, column),
                line,
                column,
                message: e.to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self, SystemError> {
        let text = std::fs::read_to_string(path).map_err(|e| SystemError::InvalidParameter(format!(
            "cannot read {}: {e}",
            path.display()
        )))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem file serialises")
    }

    /// Replaces one named parameter; the name must already be declared.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<(), SystemError> {
        match self.params.get_mut(name) {
            Some(v) => {
                *v = value;
                Ok(())
            }
            None => Err(SystemError::InvalidParameter(format!(
                "unknown parameter `{name}` (declared: {})",
                self.params.keys().cloned().collect::<Vec<_>>().join(", ")
            ))),
        }
    }

    pub fn build(&self) -> Result<CoefficientSystem, SystemError> {
        for (name, v) in &self.params {
            if !v.is_finite() {
                return Err(SystemError::InvalidParameter(format!("{name} = {v} is not finite")));
            }
        }
        let compile = |label: char, src: &[[String; 2]; 2]| -> Result<Entries, SystemError> {
            let cell = |row: usize, col: usize| {
                parse_with(&src[row][col], &self.params).map_err(|source| SystemError::Parse {
                    matrix: label,
                    row: row + 1,
                    col: col + 1,
                    source,
                })
            };
            Ok([[cell(0, 0)?, cell(0, 1)?], [cell(1, 0)?, cell(1, 1)?]])
        };
        CoefficientSystem::new(
            compile('P', &self.p)?,
            compile('Q', &self.q)?,
            compile('R', &self.r)?,
            compile('S', &self.s)?,
            self.t0,
            self.q_diagonal,
        )
    }
}

// serde_json reports 1-based line and column (column counts bytes).
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{Coefficient, Matrix2};

    const HARMONIC: &str = r#"{
        "t0": 0.0,
        "params": {"w": 2.0},
        "P": [["0","0"],["0","0"]],
        "Q": [["1","0"],["0","1"]],
        "R": [["-w","0"],["0","-w"]],
        "S": [["0","0"],["0","0"]],
        "q_diagonal": true
    }"#;

    #[test]
    fn loads_and_builds() {
        let pf = ProblemFile::from_json(HARMONIC).unwrap();
        let cs = pf.build().unwrap();
        assert_eq!(cs.eval_matrix(Coefficient::R, 1.0).unwrap(), Matrix2::diag(-2.0, -2.0));
        assert!(cs.q_diagonal());
    }

    #[test]
    fn malformed_json_reports_offset() {
        let text = "{\n  \"t0\": 0.0,\n  \"P\": [[\"0\" \"0\"]]\n}";
        match ProblemFile::from_json(text).unwrap_err() {
            SystemError::Json { offset, line, .. } => {
                assert_eq!(line, 3);
                assert_eq!(&text[offset..offset + 1], "\"");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn expression_errors_name_the_entry() {
        let text = HARMONIC.replace("\"-w\",\"0\"]", "\"-v\",\"0\"]");
        let err = ProblemFile::from_json(&text).unwrap().build().unwrap_err();
        assert!(matches!(err, SystemError::Parse { matrix: 'R', row: 1, col: 1, .. }), "{err}");
    }

    #[test]
    fn set_param_rejects_undeclared_names() {
        let mut pf = ProblemFile::from_json(HARMONIC).unwrap();
        pf.set_param("w", 3.0).unwrap();
        assert!(pf.set_param("lambda", 3.0).is_err());
        let cs = pf.build().unwrap();
        assert_eq!(cs.eval_matrix(Coefficient::R, 0.0).unwrap().a11, -3.0);
    }
}
