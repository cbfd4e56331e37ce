use num_rational::BigRational;
use serde::Serialize;

use super::{density, rational_string, DensityError, Method};
use crate::gk::{egk_trunc, gk_double, EGKDatum};
use crate::lattice::{jordan_split, HalfIntMat};

/// The invariants that should pin down the density over an unramified ring:
/// `GK(L + -L)` and `EGK(A_i)^{<=1}` for each Jordan scale `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HypothesisKey {
    pub gk_double: Vec<i64>,
    pub trunc: Vec<(i64, EGKDatum)>,
}

impl HypothesisKey {
    pub fn of(b: &HalfIntMat) -> Result<HypothesisKey, DensityError> {
        let dec = jordan_split(b)?;
        let gk_double = gk_double(&dec)?.seq;
        let mut trunc = Vec::new();
        for c in &dec.constituents {
            trunc.push((c.scale, egk_trunc(&dec.sublattice_ai(c.scale)?)?));
        }
        Ok(HypothesisKey { gk_double, trunc })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "gk_double": self.gk_double,
            "egk_trunc": self
                .trunc
                .iter()
                .map(|(i, d)| serde_json::json!({"i": i, "egk": d.to_string()}))
                .collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictKind {
    /// Invariants agree and so do the counted densities.
    Equal,
    /// Invariants agree but the densities do not.
    Violation,
    HypothesisNotMet,
}

impl VerdictKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictKind::Equal => "equal",
            VerdictKind::Violation => "violation",
            VerdictKind::HypothesisNotMet => "hypothesis-not-met",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub left: HypothesisKey,
    pub right: HypothesisKey,
    pub beta_left: BigRational,
    pub beta_right: BigRational,
    pub method_left: Method,
    pub method_right: Method,
}

impl Verdict {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "verdict": self.kind.as_str(),
            "L": self.left.to_json(),
            "M": self.right.to_json(),
            "beta_L": rational_string(&self.beta_left),
            "beta_M": rational_string(&self.beta_right),
            "method_L": self.method_left.to_string(),
            "method_M": self.method_right.to_string(),
        })
    }
}

/// Compare the invariants of `l` and `m` and their densities (counted up to
/// rank 3).
pub fn theorem_check(l: &HalfIntMat, m: &HalfIntMat) -> Result<Verdict, DensityError> {
    let left = HypothesisKey::of(l)?;
    let right = HypothesisKey::of(m)?;
    let dl = density(l)?;
    let dm = density(m)?;
    let (beta_left, beta_right) = (dl.beta, dm.beta);
    let kind = if left != right {
        VerdictKind::HypothesisNotMet
    } else if beta_left == beta_right {
        VerdictKind::Equal
    } else {
        VerdictKind::Violation
    };
    Ok(Verdict { kind, left, right, beta_left, beta_right, method_left: dl.method, method_right: dm.method })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Ring;

    #[test]
    fn same_lattice() {
        let r = Ring::z2(60);
        let l = HalfIntMat::diag_i64(&r, &[1, 2]);
        assert_eq!(theorem_check(&l, &l).unwrap().kind, VerdictKind::Equal);
    }

    #[test]
    fn two_squares_versus_one_three() {
        let r = Ring::z2(60);
        let v = theorem_check(&HalfIntMat::diag_i64(&r, &[1, 1]), &HalfIntMat::diag_i64(&r, &[1, 3])).unwrap();
        assert_eq!(v.kind, VerdictKind::HypothesisNotMet);
        assert_eq!(v.left.gk_double, v.right.gk_double);
        assert_ne!(v.beta_left, v.beta_right);
    }

    #[test]
    fn hyperbolic_sums() {
        let r = Ring::z2(60);
        let h = HalfIntMat::hyperbolic(&r);
        let l = h.direct_sum(&HalfIntMat::diag_i64(&r, &[1, 3]));
        let m = h.direct_sum(&HalfIntMat::diag_i64(&r, &[1]));
        let v = theorem_check(&l, &m).unwrap();
        assert_eq!(v.kind, VerdictKind::HypothesisNotMet);
        assert_eq!(v.method_left, Method::GroupFormula);
        assert_eq!(v.method_right, Method::CountedLifted);
        assert_ne!(v.beta_left, v.beta_right);
    }
}
