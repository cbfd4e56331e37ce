use std::fs;

use serde_json::Value;

use dyadic_gk::lattice::{HalfIntMat, MatrixJson};
use dyadic_gk::{Ring, RingSpec};

use crate::Fail;

/// A matrix from inline JSON or a file. A bare nested array is read as the
/// doubled matrix `2B`.
pub fn load_matrix(arg: &str, ring: Option<&str>) -> Result<HalfIntMat, Fail> {
    let text = match arg.trim_start().chars().next() {
        Some('{') | Some('[') => arg.to_string(),
        _ => fs::read_to_string(arg).map_err(|e| Fail::parse(format!("{arg}: {e}")))?,
    };
    let v: Value = serde_json::from_str(&text).map_err(|e| Fail::parse(format!("matrix: {e}")))?;
    let mj: MatrixJson = match v {
        Value::Array(_) => MatrixJson { ring: None, n: None, doubled: serde_json::from_value(v).map_err(Fail::parse)? },
        other => serde_json::from_value(other).map_err(|e| Fail::parse(format!("matrix: {e}")))?,
    };
    let default = match ring {
        Some(s) => {
            let spec: RingSpec = serde_json::from_str(s).map_err(|e| Fail::parse(format!("ring: {e}")))?;
            Some(Ring::new(spec).map_err(|e| Fail::parse(format!("ring: {e}")))?)
        }
        None => None,
    };
    Ok(HalfIntMat::from_json(&mj, default.as_ref())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_array_and_object() {
        let a = load_matrix("[[2, 1], [1, 2]]", None).unwrap();
        let b = load_matrix(r#"{"doubled": [[2, 1], [1, 2]]}"#, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.ring().p(), 2);
    }

    #[test]
    fn ring_flag() {
        let a = load_matrix("[[2]]", Some(r#"{"p": 3, "precision": 20}"#)).unwrap();
        assert_eq!(a.ring().p(), 3);
    }

    #[test]
    fn bad_json_is_parse_error() {
        assert_eq!(load_matrix("[[2,", None).unwrap_err().code, 2);
        assert_eq!(load_matrix("[[2, 1], [0, 2]]", None).unwrap_err().code, 2);
    }
}
