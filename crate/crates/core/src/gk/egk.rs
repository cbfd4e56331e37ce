use std::fmt;

use serde::{Deserialize, Serialize};

use super::{blocks, GKDatum, GkError};
use crate::lattice::{jordan_split, residual_space, Arf, HalfIntMat, Parity};
use crate::ring::{FElem, Ring};

/// `(n_1..n_r; m_1..m_r; zeta_1..zeta_r)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EGKDatum {
    pub n: Vec<usize>,
    pub m: Vec<i64>,
    pub zeta: Vec<i8>,
}

impl EGKDatum {
    pub fn new(blocks: Vec<(usize, i64, i8)>) -> EGKDatum {
        EGKDatum {
            n: blocks.iter().map(|b| b.0).collect(),
            m: blocks.iter().map(|b| b.1).collect(),
            zeta: blocks.iter().map(|b| b.2).collect(),
        }
    }
    pub fn empty() -> EGKDatum {
        EGKDatum::new(Vec::new())
    }
    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }
    pub fn rank(&self) -> usize {
        self.n.iter().sum()
    }
    /// Blocks with `m <= bound`.
    pub fn truncate(&self, bound: i64) -> EGKDatum {
        let k = self.m.iter().take_while(|&&m| m <= bound).count();
        EGKDatum { n: self.n[..k].to_vec(), m: self.m[..k].to_vec(), zeta: self.zeta[..k].to_vec() }
    }
    /// The underlying GK sequence.
    pub fn gk(&self) -> Vec<i64> {
        self.n.iter().zip(&self.m).flat_map(|(&n, &m)| std::iter::repeat_n(m, n)).collect()
    }
}

impl fmt::Display for EGKDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "()");
        }
        let j = |v: Vec<String>| v.join(",");
        write!(
            f,
            "({};{};{})",
            j(self.n.iter().map(|x| x.to_string()).collect()),
            j(self.m.iter().map(|x| x.to_string()).collect()),
            j(self.zeta.iter().map(|x| x.to_string()).collect())
        )
    }
}

/// Diagonal of `T = 2B` after symmetric elimination over the fraction field.
fn field_diagonal(h: &HalfIntMat) -> Result<Vec<FElem>, GkError> {
    let r = h.ring();
    let n = h.n();
    let mut m: Vec<Vec<FElem>> = (0..n).map(|i| (0..n).map(|j| r.felem(h.t(i, j))).collect()).collect();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        if m[k][k].is_zero() {
            if let Some(p) = (k + 1..n).find(|&p| !m[p][p].is_zero()) {
                m.swap(k, p);
                for row in m.iter_mut() {
                    row.swap(k, p);
                }
            } else if let Some(p) = (k + 1..n).find(|&p| !m[k][p].is_zero()) {
                // e_k += e_p makes the pivot 2 t_kp
                for j in 0..n {
                    let v = r.fadd(&m[k][j], &m[p][j]);
                    m[k][j] = v;
                }
                for i in 0..n {
                    let v = r.fadd(&m[i][k], &m[i][p]);
                    m[i][k] = v;
                }
            } else {
                return Err(crate::lattice::LatticeError::Degenerate.into());
            }
        }
        let piv = m[k][k];
        let inv = r.finv(&piv)?;
        for i in k + 1..n {
            if m[i][k].is_zero() {
                continue;
            }
            let c = r.fmul(&m[i][k], &inv);
            for j in k..n {
                let v = r.fsub(&m[i][j], &r.fmul(&c, &m[k][j]));
                m[i][j] = v;
            }
        }
        for i in k + 1..n {
            m[k][i] = FElem::zero();
            m[i][k] = FElem::zero();
        }
        out.push(piv);
    }
    Ok(out)
}

/// Clifford-type invariant `eta_B` of an odd-rank form.
pub fn eta(h: &HalfIntMat) -> Result<i8, GkError> {
    let r = h.ring();
    let n = h.n();
    let two = r.felem(&r.from_i64(2));
    // b'_i ~ t_i / 2, same square class as 2 t_i
    let b: Vec<_> = field_diagonal(h)?
        .iter()
        .map(|t| r.square_class_rep(&r.fmul(t, &two)))
        .collect::<Result<_, _>>()?;
    let m1 = r.from_i64(-1);
    let det = b.iter().fold(r.one(), |acc, x| r.mul(&acc, x));
    let mut s: i8 = 1;
    if ((n + 1) / 4) % 2 == 1 {
        s *= r.hilbert_symbol(&m1, &m1)?;
    }
    if ((n - 1) / 2) % 2 == 1 {
        s *= r.hilbert_symbol(&m1, &det)?;
    }
    for i in 0..n {
        for j in i + 1..n {
            s *= r.hilbert_symbol(&b[i], &b[j])?;
        }
    }
    Ok(s)
}

/// `xi_B` of an even-rank form.
pub fn xi(h: &HalfIntMat) -> Result<i8, GkError> {
    Ok(h.ring().ext_type(&h.disc()?)?.xi)
}

/// EGK of an optimal form with the given GK sequence.
pub fn egk_of_optimal(form: &HalfIntMat, seq: &[i64]) -> Result<EGKDatum, GkError> {
    let mut out = Vec::new();
    let mut k = 0;
    for (n, m) in blocks(seq) {
        k += n;
        let lead = form.leading(k);
        let z = if k % 2 == 0 { xi(&lead)? } else { eta(&lead)? };
        out.push((n, m, z));
    }
    Ok(EGKDatum::new(out))
}

pub fn egk_of(d: &GKDatum) -> Result<EGKDatum, GkError> {
    match &d.certificate {
        Some(c) => egk_of_optimal(&c.form, &d.seq),
        None => Err(GkError::Unsupported("EGK needs a certified optimal form".into())),
    }
}

pub fn egk(b: &HalfIntMat) -> Result<EGKDatum, GkError> {
    egk_of(&super::gk(b)?)
}

/// Truncated EGK from the parity of the scale 0 constituent, the residual
/// dimension and whether the residual space is split.
pub fn egk_trunc_closed(parity: Parity, m: usize, split: bool) -> EGKDatum {
    let z = if split { 1 } else { -1 };
    let mi = m as i64;
    match (parity, m % 2) {
        (Parity::I, _) if m == 0 => EGKDatum::new(vec![(1, 0, 1)]),
        (Parity::II, _) if m == 0 => EGKDatum::empty(),
        (Parity::I, 0) => EGKDatum::new(vec![(1, 0, 1), (mi as usize, 1, z)]),
        (Parity::II, 0) => EGKDatum::new(vec![(m, 1, z)]),
        (Parity::I, _) => EGKDatum::new(vec![(1, 0, 1), (m, 1, 0)]),
        (Parity::II, _) => EGKDatum::new(vec![(m, 1, 1)]),
    }
}

/// `EGK(A_i)^{<=1}` of a normalized `A_i`. Over unramified rings the result of
/// the optimal-form path is checked against the closed form.
pub fn egk_trunc(ai: &HalfIntMat) -> Result<EGKDatum, GkError> {
    let r: &Ring = ai.ring();
    let full = egk(ai)?;
    let tr = full.truncate(1);
    if r.is_dyadic() && r.e() == 1 {
        let dec = jordan_split(ai)?;
        let c0 = dec.at(0).ok_or_else(|| GkError::InvalidParams("A_i has no scale 0 constituent".into()))?;
        let rs = residual_space(ai)?;
        let closed = egk_trunc_closed(c0.parity, rs.dim, rs.arf == Arf::Split);
        if closed != tr {
            return Err(GkError::Inconsistent(format!("truncated EGK {tr} disagrees with closed form {closed}")));
        }
    }
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display() {
        let d = EGKDatum::new(vec![(1, 0, 1), (2, 1, 1), (1, 2, 1)]);
        assert_eq!(d.to_string(), "(1,2,1;0,1,2;1,1,1)");
        assert_eq!(d.gk(), vec![0, 1, 1, 2]);
        assert_eq!(d.truncate(1).to_string(), "(1,2;0,1;1,1)");
    }

    #[test]
    fn closed_truncations() {
        assert_eq!(egk_trunc_closed(Parity::I, 2, true).to_string(), "(1,2;0,1;1,1)");
        assert_eq!(egk_trunc_closed(Parity::II, 3, false).to_string(), "(3;1;1)");
        assert_eq!(egk_trunc_closed(Parity::I, 0, false).to_string(), "(1;0;1)");
        assert!(egk_trunc_closed(Parity::II, 0, true).is_empty());
    }

    #[test]
    fn egk_examples() {
        let r = Ring::z2(48);
        let d = egk(&HalfIntMat::diag_i64(&r, &[1, 1, -1, -1])).unwrap();
        assert_eq!(d.to_string(), "(1,2,1;0,1,2;1,1,1)");
        let d = egk(&HalfIntMat::diag_i64(&r, &[1, 3, -1, -3])).unwrap();
        assert_eq!(d.to_string(), "(1,2,1;0,1,2;1,1,1)");
        assert_eq!(egk(&HalfIntMat::diag_i64(&r, &[5])).unwrap().to_string(), "(1;0;1)");
        let h = HalfIntMat::hyperbolic(&r);
        let l = h.direct_sum(&HalfIntMat::diag_i64(&r, &[1, 3]));
        let m = h.direct_sum(&HalfIntMat::diag_i64(&r, &[1]));
        assert_eq!(egk(&l).unwrap().truncate(1).to_string(), "(1,2;0,1;1,1)");
        assert_eq!(egk(&m).unwrap().to_string(), "(1,2;0,1;1,1)");
    }

    #[test]
    fn eta_of_small_forms() {
        let r = Ring::z2(40);
        assert_eq!(eta(&HalfIntMat::diag_i64(&r, &[3])).unwrap(), 1);
        // anisotropic ternaries have eta = -1
        assert_eq!(eta(&HalfIntMat::diag_i64(&r, &[1, 1, 1])).unwrap(), -1);
        assert_eq!(eta(&HalfIntMat::diag_i64(&r, &[-1, -1, -1])).unwrap(), -1);
        assert_eq!(eta(&HalfIntMat::diag_i64(&r, &[1, 1, 3])).unwrap(), 1);
        assert_eq!(eta(&HalfIntMat::diag_i64(&r, &[1, -1, 5])).unwrap(), 1);
    }
}
