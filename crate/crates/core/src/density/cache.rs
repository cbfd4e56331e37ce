//! Content-addressed store for counted densities, one JSON object per line.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_rational::BigRational;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::{alpha_beta, rational_string, DensityError, DensityReport, Method};
use crate::lattice::HalfIntMat;

const FORMAT: u32 = 1;
const FILE: &str = "densities.v1.jsonl";

pub struct Cache {
    path: PathBuf,
    entries: HashMap<String, Value>,
}

impl Cache {
    pub fn open(dir: &Path) -> io::Result<Cache> {
        fs::create_dir_all(dir)?;
        let path = dir.join(FILE);
        let mut entries = HashMap::new();
        if path.exists() {
            for line in BufReader::new(File::open(&path)?).lines() {
                let line = line?;
                let Ok(v) = serde_json::from_str::<Value>(&line) else {
                    continue;
                };
                if v["format"] != json!(FORMAT) {
                    continue;
                }
                if let Some(k) = v["key"].as_str() {
                    entries.insert(k.to_string(), v["value"].clone());
                }
            }
        }
        Ok(Cache { path, entries })
    }

    pub fn key(b: &HalfIntMat, level: Option<u32>, method: Method) -> String {
        let mut h = Sha256::new();
        h.update(b.ring().hash_id().as_bytes());
        h.update(b"\0");
        h.update(serde_json::to_string(&b.to_json()).unwrap_or_default().as_bytes());
        h.update(b"\0");
        h.update(format!("{level:?}\0{method}").as_bytes());
        hex::encode(h.finalize())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key)
    }

    pub fn put(&mut self, key: &str, value: Value) -> io::Result<()> {
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        let line = json!({"format": FORMAT, "key": key, "value": value});
        writeln!(f, "{line}")?;
        self.entries.insert(key.to_string(), value);
        Ok(())
    }

    /// [`alpha_beta`] through the cache.
    pub fn alpha_beta(&mut self, b: &HalfIntMat, level: Option<u32>) -> Result<DensityReport, DensityError> {
        let key = Cache::key(b, level, Method::CountedLifted);
        if let Some(rep) = self.get(&key).and_then(report_from_json) {
            return Ok(rep);
        }
        let rep = alpha_beta(b, level)?;
        // a failed write only costs a recount later
        let _ = self.put(&key, report_to_json(&rep));
        Ok(rep)
    }
}

fn report_to_json(r: &DensityReport) -> Value {
    json!({
        "alpha": rational_string(&r.alpha),
        "beta": rational_string(&r.beta),
        "beta_C": rational_string(&r.beta_c),
        "method": r.method,
        "N_used": r.n_used,
        "stabilized": r.stabilized,
    })
}

fn report_from_json(v: &Value) -> Option<DensityReport> {
    let rat = |k: &str| BigRational::from_str(v[k].as_str()?).ok();
    Some(DensityReport {
        alpha: rat("alpha")?,
        beta: rat("beta")?,
        beta_c: rat("beta_C")?,
        method: serde_json::from_value(v["method"].clone()).ok()?,
        n_used: v["N_used"].as_u64().map(|n| n as u32),
        stabilized: v["stabilized"].as_bool()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Ring;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let r = Ring::z2(60);
        let b = HalfIntMat::diag_i64(&r, &[1, 2]);
        let first = Cache::open(dir.path()).unwrap().alpha_beta(&b, None).unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        assert_eq!(cache.len(), 1);
        let key = Cache::key(&b, None, Method::CountedLifted);
        assert_eq!(report_from_json(cache.get(&key).unwrap()).unwrap(), first);
    }
}
