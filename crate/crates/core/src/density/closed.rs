//! Closed forms for binary lattices `(o + pi^f o_E, N)`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{q_pow, DensityError, DensityReport, Method};
use crate::gk::{BinaryKind, BinaryParams, EGKDatum};

/// A Laurent polynomial in `q` with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPoly {
    /// `(coefficient, exponent)`, exponents strictly decreasing.
    pub terms: Vec<(BigRational, i64)>,
}

impl QPoly {
    pub fn monomial(c: i64, k: i64) -> QPoly {
        QPoly { terms: vec![(BigRational::from_integer(c.into()), k)] }
    }

    pub fn eval(&self, q: usize) -> BigRational {
        self.terms
            .iter()
            .fold(BigRational::zero(), |acc, (c, k)| acc + c * q_pow(q, *k))
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (idx, (c, k)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            if idx > 0 {
                f.write_str(if neg { " - " } else { " + " })?;
            } else if neg {
                f.write_str("-")?;
            }
            let a = c.numer().abs();
            let b = c.denom();
            let body = match (*k, a.is_one()) {
                (0, _) => a.to_string(),
                (1, true) => "q".to_string(),
                (1, false) => format!("{a}*q"),
                (k, true) => format!("q^{k}"),
                (k, false) => format!("{a}*q^{k}"),
            };
            if b.is_one() {
                f.write_str(&body)?;
            } else {
                write!(f, "{body}/{b}")?;
            }
        }
        Ok(())
    }
}

/// `beta` of the binary lattice as a polynomial in `q`.
pub fn binary_beta_poly(p: &BinaryParams) -> Result<QPoly, DensityError> {
    p.validate().map_err(|e| DensityError::InvalidParams(e.to_string()))?;
    let (e, f) = (p.e as i64, p.f as i64);
    let mono = QPoly::monomial;
    Ok(match p.kind {
        BinaryKind::Unramified { xi } => {
            if f == 0 {
                QPoly {
                    terms: vec![
                        (BigRational::one(), 0),
                        (BigRational::from_integer(BigInt::from(-(xi as i64))), -1),
                    ],
                }
            } else if f <= 2 * e {
                mono(1, f / 2 + 2 * f)
            } else {
                mono(2, e + 2 * f)
            }
        }
        BinaryKind::RamifiedEven { g } => {
            let g = g as i64;
            if f < g {
                mono(2, 3 * f + 2 * g)
            } else if f <= 2 * e - g {
                mono(1, (f + g) / 2 + 2 * f + 2 * g)
            } else {
                mono(2, 2 * f + e + 2 * g)
            }
        }
        BinaryKind::RamifiedOdd => {
            if f < e + 1 {
                mono(2, 3 * f + 2 * e + 1)
            } else {
                mono(2, 2 * f + 3 * e + 1)
            }
        }
    })
}

/// The closed-form density report at residue field size `q`.
pub fn binary_beta(p: &BinaryParams, q: usize) -> Result<DensityReport, DensityError> {
    let beta = binary_beta_poly(p)?.eval(q);
    Ok(DensityReport::from_beta(beta, q, p.e as usize, 2, Method::BinaryClosed))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BinaryProfile {
    pub jor: Vec<i64>,
    pub gk_ai: Vec<i64>,
    pub egk_trunc: String,
    pub gk_double: Vec<i64>,
}

pub fn binary_profile(p: &BinaryParams) -> Result<BinaryProfile, DensityError> {
    p.validate().map_err(|e| DensityError::InvalidParams(e.to_string()))?;
    Ok(BinaryProfile {
        jor: p.jor(),
        gk_ai: p.gk_ai(),
        egk_trunc: p.egk_trunc().to_string(),
        gk_double: p.gk_double(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExampleRow {
    pub label: String,
    pub params: BinaryParams,
    pub gk_double: Vec<i64>,
    pub jor: Vec<i64>,
    pub egk_trunc: EGKDatum,
    pub beta: QPoly,
}

/// Two binary lattices over a field with `e = 5` that share every invariant
/// above but have different densities.
pub fn ramified_pair_report() -> Result<Vec<ExampleRow>, DensityError> {
    let rows = [
        BinaryParams { kind: BinaryKind::RamifiedEven { g: 1 }, e: 5, f: 2 },
        BinaryParams { kind: BinaryKind::RamifiedEven { g: 2 }, e: 5, f: 1 },
    ];
    rows.iter()
        .map(|p| {
            Ok(ExampleRow {
                label: p.label(),
                params: *p,
                gk_double: p.gk_double(),
                jor: p.jor(),
                egk_trunc: p.egk_trunc(),
                beta: binary_beta_poly(p)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::rational_string;

    #[test]
    fn example_rows() {
        let rows = ramified_pair_report().unwrap();
        assert_eq!(rows[0].beta.to_string(), "q^7");
        assert_eq!(rows[1].beta.to_string(), "2*q^7");
        for r in &rows {
            assert_eq!(r.gk_double, vec![0, 3, 3, 6]);
            assert_eq!(r.jor, vec![-2]);
            assert!(r.egk_trunc.is_empty());
        }
    }

    #[test]
    fn nonsplit_unit() {
        let p = BinaryParams { kind: BinaryKind::Unramified { xi: -1 }, e: 1, f: 0 };
        let rep = binary_beta(&p, 2).unwrap();
        assert_eq!(rational_string(&rep.beta), "3/2");
        assert_eq!(binary_beta_poly(&p).unwrap().to_string(), "1 + q^-1");
    }
}
