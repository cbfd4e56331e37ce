//! Local densities: counted, from the unramified closed formula, and the
//! binary closed form.

pub mod cache;
pub mod formula;
pub mod closed;
pub mod corpus;
pub mod count;
pub mod theorem;

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gk::GkError;
use crate::lattice::{HalfIntMat, LatticeError};
use crate::ring::RingError;

pub use cache::Cache;
pub use formula::{formula_beta, formula_beta_of, jordan_counters, ortho_group_order, JordanCounters, OrthoGroupCard, Eps};
pub use closed::{binary_beta, binary_profile, ramified_pair_report, BinaryProfile, ExampleRow, QPoly};
pub use corpus::{z2_corpus, CorpusEntry};
pub use count::{count_lifted, count_naive, count_self_fast, stable_level, LEAF_CAP};
pub use theorem::{theorem_check, Verdict, VerdictKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DensityError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Gk(#[from] GkError),
    #[error("counting budget exceeded")]
    Budget,
    #[error("matrices live over different rings")]
    RingMismatch,
    #[error("shape: {0}")]
    Shape(String),
    #[error("ring precision too small for level {0}")]
    Precision(u32),
    #[error("form is degenerate")]
    Degenerate,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    CountedNaive,
    CountedLifted,
    GroupFormula,
    BinaryClosed,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::CountedNaive => "counted-naive",
            Method::CountedLifted => "counted-lifted",
            Method::GroupFormula => "group-formula",
            Method::BinaryClosed => "binary-closed",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityReport {
    pub alpha: BigRational,
    pub beta: BigRational,
    pub beta_c: BigRational,
    pub method: Method,
    pub n_used: Option<u32>,
    pub stabilized: bool,
}

/// `[G : G°]` for a nondegenerate form of positive rank.
pub const COMPONENTS: i64 = 2;

pub fn q_pow(q: usize, k: i64) -> BigRational {
    let base = BigInt::from(q);
    let p = num_traits::pow(base, k.unsigned_abs() as usize);
    if k >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

pub fn rational_string(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

impl DensityReport {
    /// Fill in `beta` and `beta_C` from `alpha`.
    pub fn from_alpha(alpha: BigRational, q: usize, e: usize, n: usize, method: Method) -> DensityReport {
        let beta = &alpha / BigRational::from_integer(COMPONENTS.into());
        let beta_c = &beta * q_pow(q, -((e * n * (n - 1) / 2) as i64));
        DensityReport { alpha, beta, beta_c, method, n_used: None, stabilized: false }
    }

    pub fn from_beta(beta: BigRational, q: usize, e: usize, n: usize, method: Method) -> DensityReport {
        let alpha = &beta * BigRational::from_integer(COMPONENTS.into());
        DensityReport::from_alpha(alpha, q, e, n, method)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "alpha": rational_string(&self.alpha),
            "beta": rational_string(&self.beta),
            "beta_C": rational_string(&self.beta_c),
            "method": self.method.to_string(),
            "N_used": self.n_used,
            "stabilized": self.stabilized,
        })
    }
}

/// `ord(D_B)`.
pub fn ord_disc(b: &HalfIntMat) -> Result<u32, DensityError> {
    let d = b.disc()?;
    Ok(b.ring().ord(&d))
}

/// `q^{-N n(n-1)/2} #A_N(B, B)`.
pub fn alpha_at(b: &HalfIntMat, level: u32) -> Result<BigRational, DensityError> {
    let n = b.n();
    let count = count_self_fast(b, level)?;
    let num = BigRational::from_integer(BigInt::from(BigUint::from(count)));
    Ok(num * q_pow(b.ring().q(), -((level as usize * n * (n - 1) / 2) as i64)))
}

/// Default counting level: `2 ord(D_B) + 1`, raised to [`stable_level`]
/// when that is larger (it is for small dyadic forms such as `(1)`).
pub fn default_level(b: &HalfIntMat) -> Result<u32, DensityError> {
    Ok((2 * ord_disc(b)? + 1).max(stable_level(b)?))
}

/// Largest rank for which [`density`] counts rather than using the closed
/// formula.
pub const MAX_COUNTED_RANK: usize = 3;

/// Counted density up to [`MAX_COUNTED_RANK`], the closed formula above it.
pub fn density(b: &HalfIntMat) -> Result<DensityReport, DensityError> {
    if b.n() <= MAX_COUNTED_RANK {
        alpha_beta(b, None)
    } else {
        formula_beta_of(b)
    }
}

/// The counted density of `B` at level `N`, re-checked at `N + 1`.
pub fn alpha_beta(b: &HalfIntMat, level: Option<u32>) -> Result<DensityReport, DensityError> {
    if !b.is_nondegenerate() {
        return Err(DensityError::Degenerate);
    }
    let level = match level {
        Some(l) => l,
        None => default_level(b)?,
    };
    let a0 = alpha_at(b, level)?;
    let a1 = alpha_at(b, level + 1)?;
    let r = b.ring();
    let mut rep = DensityReport::from_alpha(a0.clone(), r.q(), r.e(), b.n(), Method::CountedLifted);
    rep.n_used = Some(level);
    rep.stabilized = a0 == a1 && !a0.is_zero();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Ring;

    #[test]
    fn rank_one_unit() {
        let r = Ring::z2(60);
        let rep = alpha_beta(&HalfIntMat::diag_i64(&r, &[1]), None).unwrap();
        assert_eq!(rational_string(&rep.alpha), "4");
        assert_eq!(rational_string(&rep.beta), "2");
        assert_eq!(rational_string(&rep.beta_c), "2");
        assert!(rep.stabilized);
    }

    #[test]
    fn hyperbolic_half() {
        let r = Ring::z2(60);
        let h = HalfIntMat::from_doubled(&r, &[vec![0, 1], vec![1, 0]]).unwrap();
        let rep = alpha_beta(&h, None).unwrap();
        assert_eq!(rational_string(&rep.beta), "1/2");
        let rep5 = alpha_beta(&h, Some(5)).unwrap();
        assert_eq!(rational_string(&rep5.alpha), "1");
    }

    #[test]
    fn two_squares_differ() {
        let r = Ring::z2(60);
        let a = alpha_beta(&HalfIntMat::diag_i64(&r, &[1, 1]), Some(6)).unwrap();
        let b = alpha_beta(&HalfIntMat::diag_i64(&r, &[1, 3]), None).unwrap();
        assert!(a.stabilized);
        assert_ne!(a.beta, b.beta);
    }
}
