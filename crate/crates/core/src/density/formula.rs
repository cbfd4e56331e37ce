//! The closed density formula over unramified dyadic rings, from the
//! Jordan splitting and the residual quadratic spaces.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::{q_pow, DensityError, DensityReport, Method, COMPONENTS};
use crate::lattice::jordan::Refined;
use crate::lattice::{jordan_split, residual_space, Arf, HalfIntMat, JordanDecomposition, Parity, ResidualSpace, Subtype};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Eps {
    Split,
    Nonsplit,
    Odd,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrthoGroupCard {
    pub dim: usize,
    pub eps: Eps,
    pub q: usize,
    pub order: BigUint,
}

/// `#O(V)(k)` for a nonsingular quadratic space over `GF(q)`; in odd
/// dimension this is the reduced group, isomorphic to `Sp(dim - 1)`.
pub fn ortho_group_order(dim: usize, eps: Eps, q: usize) -> OrthoGroupCard {
    let qb = BigUint::from(q);
    let qp = |k: usize| num_traits::pow(qb.clone(), k);
    let order = if dim == 0 {
        BigUint::one()
    } else if dim % 2 == 1 {
        let m = dim / 2;
        let mut o = qp(m * m);
        for i in 1..=m {
            o *= qp(2 * i) - 1u32;
        }
        o
    } else {
        let m = dim / 2;
        let mut o = qp(m * (m - 1)) * 2u32;
        o *= match eps {
            Eps::Nonsplit => qp(m) + 1u32,
            _ => qp(m) - 1u32,
        };
        for i in 1..m {
            o *= qp(2 * i) - 1u32;
        }
        o
    };
    let eps = if dim % 2 == 1 { Eps::Odd } else { eps };
    OrthoGroupCard { dim, eps, q, order }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JordanCounters {
    /// Free constituents of type Ie1.
    pub alpha: u32,
    /// Type I constituents `L_j` with `L_{j+2}` of type II (possibly zero).
    pub beta: u32,
    /// Adjacent pairs of type I constituents.
    pub b: u32,
    /// Total rank of the type II constituents.
    pub c: u32,
    /// Number of type I constituents.
    pub t: u32,
    /// The exponent `N` of the formula.
    pub exponent: i64,
}

pub fn jordan_counters(dec: &JordanDecomposition) -> JordanCounters {
    let mut k = JordanCounters::default();
    for c in &dec.constituents {
        let i = c.scale;
        match c.parity {
            Parity::I => {
                k.t += 1;
                if dec.parity_at(i + 1) == Parity::I {
                    k.b += 1;
                }
                if dec.parity_at(i + 2) == Parity::II {
                    k.beta += 1;
                }
            }
            Parity::II => k.c += c.rank as u32,
        }
        if c.refined == Some(Refined::Ie1) {
            k.alpha += 1;
        }
    }
    let mut ex = k.t as i64 - k.b as i64 + k.c as i64;
    for (a, ca) in dec.constituents.iter().enumerate() {
        let ni = ca.rank as i64;
        ex += ca.scale * ni * (ni + 1) / 2;
        for cb in &dec.constituents[a + 1..] {
            let (lo, hi) = if ca.scale < cb.scale { (ca, cb) } else { (cb, ca) };
            ex += lo.scale * lo.rank as i64 * hi.rank as i64;
        }
    }
    k.exponent = ex;
    k
}

/// Dimension of the residual space attached to a constituent, by type.
fn expected_residual_dim(subtype: Subtype, refined: Option<Refined>, bound: bool, n: usize) -> usize {
    match (subtype, bound) {
        (Subtype::IOdd, false) => n - 1,
        (Subtype::IEven, false) => match refined {
            Some(Refined::Ie2) => n - 2,
            _ => n - 1,
        },
        (Subtype::II, false) => n,
        (Subtype::IOdd, true) => n,
        (Subtype::IEven, true) => n - 1,
        (Subtype::II, true) => n + 1,
    }
}

/// `beta` from the closed formula. `residuals` pairs each constituent scale
/// with its residual space.
pub fn formula_beta(
    dec: &JordanDecomposition,
    residuals: &[(i64, ResidualSpace)],
) -> Result<DensityReport, DensityError> {
    let r = dec.ring();
    if !r.is_dyadic() || r.e() != 1 {
        return Err(DensityError::Unsupported("closed formula needs an unramified dyadic ring".into()));
    }
    let q = r.q();
    let n = dec.rank();
    let k = jordan_counters(dec);
    let dim_g = (n * (n - 1) / 2) as i64;
    let mut reductive_dim = 0i64;
    let mut order = BigUint::one();
    for c in &dec.constituents {
        let (_, v) = residuals
            .iter()
            .find(|(s, _)| *s == c.scale)
            .ok_or_else(|| DensityError::InvalidParams(format!("no residual space at scale {}", c.scale)))?;
        let want = expected_residual_dim(c.subtype, c.refined, c.bound, c.rank);
        if v.dim != want {
            return Err(DensityError::Inconsistent(format!(
                "residual dimension {} at scale {}, expected {}",
                v.dim, c.scale, want
            )));
        }
        let eps = match v.arf {
            Arf::Split => Eps::Split,
            Arf::Nonsplit => Eps::Nonsplit,
            Arf::Odd => Eps::Odd,
        };
        order *= ortho_group_order(v.dim, eps, q).order;
        reductive_dim += (v.dim * v.dim.saturating_sub(1) / 2) as i64;
    }
    let unipotent_dim = dim_g - reductive_dim;
    let mut beta_c = q_pow(q, k.exponent - dim_g + unipotent_dim);
    beta_c *= BigRational::from_integer(BigInt::from(order));
    beta_c *= BigRational::from_integer(BigInt::from(1u64 << (k.alpha + k.beta)));
    beta_c /= BigRational::from_integer(COMPONENTS.into());
    let beta = beta_c * q_pow(q, dim_g);
    Ok(DensityReport::from_beta(beta, q, 1, n, Method::GroupFormula))
}

/// [`formula_beta`] with the splitting and residual spaces computed from `B`.
pub fn formula_beta_of(b: &HalfIntMat) -> Result<DensityReport, DensityError> {
    let dec = jordan_split(b)?;
    let mut res = Vec::new();
    for c in &dec.constituents {
        res.push((c.scale, residual_space(&dec.sublattice_ai(c.scale)?)?));
    }
    formula_beta(&dec, &res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::rational_string;
    use crate::ring::Ring;

    #[test]
    fn small_orders() {
        assert_eq!(ortho_group_order(2, Eps::Split, 2).order, 2u32.into());
        assert_eq!(ortho_group_order(2, Eps::Nonsplit, 2).order, 6u32.into());
        assert_eq!(ortho_group_order(1, Eps::Odd, 2).order, 1u32.into());
        assert_eq!(ortho_group_order(0, Eps::Split, 4).order, 1u32.into());
        assert_eq!(ortho_group_order(3, Eps::Odd, 2).order, 6u32.into());
    }

    #[test]
    fn rank_one_unit() {
        let r = Ring::z2(60);
        let rep = formula_beta_of(&HalfIntMat::diag_i64(&r, &[1])).unwrap();
        assert_eq!(rational_string(&rep.beta_c), "2");
        assert_eq!(rational_string(&rep.beta), "2");
    }

    #[test]
    fn norm_form_plane() {
        let r = Ring::z2(60);
        let h = HalfIntMat::from_doubled(&r, &[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(rational_string(&formula_beta_of(&h).unwrap().beta), "1/2");
    }
}
