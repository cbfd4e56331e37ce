use serde::{Deserialize, Serialize};

use super::residual::residual_space;
use super::{HalfIntMat, LatticeError, Mat};
use crate::ring::Ring;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    I,
    II,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subtype {
    #[serde(rename = "Io")]
    IOdd,
    #[serde(rename = "Ie")]
    IEven,
    II,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Refined {
    #[serde(rename = "Ie1")]
    Ie1,
    #[serde(rename = "Ie2")]
    Ie2,
}

#[derive(Clone, Debug)]
pub struct Constituent {
    pub scale: i64,
    pub rank: usize,
    /// The constituent divided by `pi^scale`, unimodular.
    pub block: HalfIntMat,
    pub parity: Parity,
    pub subtype: Subtype,
    /// Set for free constituents of type Ie when the residual space is available.
    pub refined: Option<Refined>,
    pub bound: bool,
    /// Positions of this constituent in the split basis.
    pub indices: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct JordanDecomposition {
    pub constituents: Vec<Constituent>,
    /// `B[U]` is block diagonal.
    pub transform: Mat,
    pub split: HalfIntMat,
}

impl JordanDecomposition {
    pub fn ring(&self) -> &Ring {
        self.split.ring()
    }
    pub fn rank(&self) -> usize {
        self.split.n()
    }
    pub fn at(&self, scale: i64) -> Option<&Constituent> {
        self.constituents.iter().find(|c| c.scale == scale)
    }
    pub fn parity_at(&self, scale: i64) -> Parity {
        self.at(scale).map_or(Parity::II, |c| c.parity)
    }
    pub fn rank_at(&self, scale: i64) -> usize {
        self.at(scale).map_or(0, |c| c.rank)
    }
    pub fn scales(&self) -> Vec<i64> {
        self.constituents.iter().map(|c| c.scale).collect()
    }
    /// `(scale, rank, subtype)` triples; independent of the chosen splitting.
    pub fn profile(&self) -> Vec<(i64, usize, Subtype, bool)> {
        self.constituents.iter().map(|c| (c.scale, c.rank, c.subtype, c.bound)).collect()
    }

    /// Gram matrix of `A_i = L cap pi^i L^#`, rescaled by `pi^{-i}`, in the split basis.
    pub fn sublattice_ai(&self, i: i64) -> Result<HalfIntMat, LatticeError> {
        if self.at(i).is_none() {
            return Err(LatticeError::NoConstituent(i));
        }
        let r = self.ring();
        let mut out: Option<HalfIntMat> = None;
        for c in &self.constituents {
            let b = c.block.scale(&r.pi_pow((c.scale - i).unsigned_abs() as u32));
            out = Some(match out {
                None => b,
                Some(o) => o.direct_sum(&b),
            });
        }
        Ok(out.expect("nonempty"))
    }
}

/// Jordan splitting by greedy minimal-valuation pivoting.
pub fn jordan_split(b: &HalfIntMat) -> Result<JordanDecomposition, LatticeError> {
    let r = b.ring().clone();
    let n = b.n();
    let inf = r.prec();
    if !b.is_nondegenerate() {
        return Err(LatticeError::Degenerate);
    }
    let mut t = b.doubled().clone();
    let mut u = Mat::identity(&r, n);
    // (start index, size, ord of the pivot in T)
    let mut blocks: Vec<(usize, usize, u32)> = Vec::new();

    let swap = |t: &mut Mat, u: &mut Mat, a: usize, c: usize| {
        if a == c {
            return;
        }
        for k in 0..n {
            t.a.swap(a * n + k, c * n + k);
        }
        for k in 0..n {
            t.a.swap(k * n + a, k * n + c);
            u.a.swap(k * n + a, k * n + c);
        }
    };
    // column operation e_j += c e_i on both T and U
    let addcol = |t: &mut Mat, u: &mut Mat, j: usize, i: usize, c: &crate::ring::Elem| {
        for k in 0..n {
            let v = r.add(t.get(k, j), &r.mul(c, t.get(k, i)));
            t.set(k, j, v);
            let v = r.add(u.get(k, j), &r.mul(c, u.get(k, i)));
            u.set(k, j, v);
        }
        for k in 0..n {
            let v = r.add(t.get(j, k), &r.mul(c, t.get(i, k)));
            t.set(j, k, v);
        }
    };

    let mut k = 0;
    while k < n {
        let mut best = (inf, usize::MAX, usize::MAX);
        for i in k..n {
            let o = r.ord(t.get(i, i));
            if o < best.0 {
                best = (o, i, i);
            }
        }
        for i in k..n {
            for j in i + 1..n {
                let o = r.ord(t.get(i, j));
                if o < best.0 {
                    best = (o, i, j);
                }
            }
        }
        let (m, i, j) = best;
        if m >= inf {
            return Err(LatticeError::Degenerate);
        }
        if i == j {
            swap(&mut t, &mut u, k, i);
            let piv = *t.get(k, k);
            for l in k + 1..n {
                if r.is_zero(t.get(k, l)) {
                    continue;
                }
                let c = r.neg(&r.div_exact(t.get(k, l), &piv)?);
                addcol(&mut t, &mut u, l, k, &c);
            }
            blocks.push((k, 1, m));
            k += 1;
        } else {
            swap(&mut t, &mut u, k, i);
            let j = if j == k { i } else { j };
            swap(&mut t, &mut u, k + 1, j);
            let (a, bb, d) = (*t.get(k, k), *t.get(k, k + 1), *t.get(k + 1, k + 1));
            let det = r.sub(&r.mul(&a, &d), &r.mul(&bb, &bb));
            for l in k + 2..n {
                let (c1, c2) = (*t.get(k, l), *t.get(k + 1, l));
                if r.is_zero(&c1) && r.is_zero(&c2) {
                    continue;
                }
                // M^{-1} c = adj(M) c / det
                let x1 = r.sub(&r.mul(&d, &c1), &r.mul(&bb, &c2));
                let x2 = r.sub(&r.mul(&a, &c2), &r.mul(&bb, &c1));
                let y1 = r.neg(&r.div_exact(&x1, &det)?);
                let y2 = r.neg(&r.div_exact(&x2, &det)?);
                addcol(&mut t, &mut u, l, k, &y1);
                addcol(&mut t, &mut u, l, k + 1, &y2);
            }
            blocks.push((k, 2, m));
            k += 2;
        }
    }

    let split = HalfIntMat::new(&r, t)?;
    let v2 = r.v2() as i64;
    let mut constituents: Vec<Constituent> = Vec::new();
    for (start, size, m) in blocks {
        let scale = m as i64 - v2;
        let idx: Vec<usize> = (start..start + size).collect();
        match constituents.last_mut() {
            Some(c) if c.scale == scale => {
                c.indices.extend(idx);
                if size == 1 {
                    c.parity = Parity::I;
                }
            }
            _ => constituents.push(Constituent {
                scale,
                rank: 0,
                block: split.submatrix(&idx),
                parity: if size == 1 { Parity::I } else { Parity::II },
                subtype: Subtype::II,
                refined: None,
                bound: false,
                indices: idx,
            }),
        }
    }
    for c in constituents.iter_mut() {
        c.rank = c.indices.len();
        let raw = split.submatrix(&c.indices);
        c.block = if c.scale >= 0 {
            let d = c.scale as u32;
            let mut m = raw.doubled().clone();
            for x in m.a.iter_mut() {
                *x = r.div_pi_pow(x, d)?;
            }
            HalfIntMat::new(&r, m)?
        } else {
            raw.scale(&r.pi_pow((-c.scale) as u32))
        };
        c.subtype = match (c.parity, c.rank % 2) {
            (Parity::II, _) => Subtype::II,
            (Parity::I, 1) => Subtype::IOdd,
            (Parity::I, _) => Subtype::IEven,
        };
    }
    let par: Vec<(i64, Parity)> = constituents.iter().map(|c| (c.scale, c.parity)).collect();
    let parity_at = |s: i64| par.iter().find(|x| x.0 == s).map_or(Parity::II, |x| x.1);
    for c in constituents.iter_mut() {
        c.bound = parity_at(c.scale - 1) == Parity::I || parity_at(c.scale + 1) == Parity::I;
    }
    let mut dec = JordanDecomposition { constituents, transform: u, split };
    if r.is_dyadic() && r.e() == 1 {
        let refined: Vec<Option<Refined>> = dec
            .constituents
            .iter()
            .map(|c| {
                if c.subtype != Subtype::IEven || c.bound {
                    return Ok(None);
                }
                let rs = residual_space(&dec.sublattice_ai(c.scale)?)?;
                Ok(Some(if rs.dim % 2 == 1 { Refined::Ie1 } else { Refined::Ie2 }))
            })
            .collect::<Result<_, LatticeError>>()?;
        for (c, x) in dec.constituents.iter_mut().zip(refined) {
            c.refined = x;
        }
    }
    Ok(dec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let r = Ring::z2(40);
        let h = HalfIntMat::hyperbolic(&r);
        let d = jordan_split(&h).unwrap();
        assert_eq!(d.profile(), vec![(0, 2, Subtype::II, false)]);

        let d = jordan_split(&HalfIntMat::diag_i64(&r, &[1, 2])).unwrap();
        assert_eq!(d.profile(), vec![(0, 1, Subtype::IOdd, true), (1, 1, Subtype::IOdd, true)]);

        let b = HalfIntMat::diag_i64(&r, &[1, 1, -1, -1]);
        let d = jordan_split(&b).unwrap();
        assert_eq!(d.profile(), vec![(0, 4, Subtype::IEven, false)]);
        assert_eq!(b.transform(&d.transform), d.split);

        let half = HalfIntMat::from_doubled(&r, &[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(jordan_split(&half).unwrap().scales(), vec![-1]);
    }

    #[test]
    fn ai_of_diag() {
        let r = Ring::z2(40);
        let d = jordan_split(&HalfIntMat::diag_i64(&r, &[1, 12])).unwrap();
        assert_eq!(d.scales(), vec![0, 2]);
        let a2 = d.sublattice_ai(2).unwrap();
        assert_eq!(a2, HalfIntMat::diag_i64(&r, &[4, 3]));
        assert!(d.sublattice_ai(1).is_err());
    }
}
