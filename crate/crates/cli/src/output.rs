use clap::ValueEnum;
use serde_json::{Map, Value};

use dyadic_gk::lattice::Mat;
use dyadic_gk::{Elem, Ring};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Md,
}

/// Rows with named columns; a single JSON object keeps its shape in JSON
/// output.
pub struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<Value>>,
    object: Option<Value>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Table {
        Table { headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new(), object: None }
    }

    pub fn from_object(v: &Value) -> Table {
        let map = v.as_object().cloned().unwrap_or_default();
        Table {
            headers: map.keys().cloned().collect(),
            rows: vec![map.values().cloned().collect()],
            object: Some(v.clone()),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        self.rows.push(row);
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn emit(fmt: Format, t: &Table) -> String {
    match fmt {
        Format::Json => {
            let v = t.object.clone().unwrap_or_else(|| {
                Value::Array(
                    t.rows
                        .iter()
                        .map(|r| Value::Object(t.headers.iter().cloned().zip(r.iter().cloned()).collect::<Map<_, _>>()))
                        .collect(),
                )
            });
            format!("{v}\n")
        }
        Format::Csv => {
            let mut s = t.headers.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(",");
            s.push('\n');
            for r in &t.rows {
                s.push_str(&r.iter().map(|v| csv_field(&cell(v))).collect::<Vec<_>>().join(","));
                s.push('\n');
            }
            s
        }
        Format::Md => {
            let line = |cells: Vec<String>| format!("| {} |\n", cells.join(" | "));
            let mut s = line(t.headers.clone());
            s.push_str(&line(t.headers.iter().map(|_| "---".to_string()).collect()));
            for r in &t.rows {
                s.push_str(&line(r.iter().map(|v| cell(v).replace('|', "\\|")).collect()));
            }
            s
        }
    }
}

/// `(a,b,c)`.
pub fn seq(v: &[i64]) -> String {
    format!("({})", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
}

fn elem_json(r: &Ring, x: &Elem) -> Value {
    if r.e() == 1 && r.f() == 1 {
        // centered integer representative
        let modulus = (r.p() as i128).pow(r.prec());
        let v = x.coeffs()[0] as i128 % modulus;
        let v = if 2 * v > modulus { v - modulus } else { v };
        Value::from(v as i64)
    } else {
        Value::from(r.to_json_digits(x))
    }
}

pub fn mat_json(r: &Ring, m: &Mat) -> Value {
    Value::Array((0..m.n).map(|i| Value::Array((0..m.n).map(|j| elem_json(r, m.get(i, j))).collect())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_quotes_commas() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![json!("(0,1)"), json!(3)]);
        assert_eq!(emit(Format::Csv, &t), "a,b\n\"(0,1)\",3\n");
    }

    #[test]
    fn markdown_rows() {
        let t = Table::from_object(&json!({"x": 1}));
        assert_eq!(emit(Format::Md, &t), "| x |\n| --- |\n| 1 |\n");
    }

    #[test]
    fn centered_integers() {
        let r = Ring::z2(20);
        let m = Mat::from_i64(&r, &[vec![1, -1], vec![0, 3]]);
        assert_eq!(mat_json(&r, &m), json!([[1, -1], [0, 3]]));
    }
}
