//! The residual quadratic space of a normalized lattice over an unramified dyadic ring.

use serde::{Deserialize, Serialize};

use super::{HalfIntMat, LatticeError};
use crate::ring::gf::{null_space, row_reduce};
use crate::ring::quad::next_digits;
use crate::ring::{Fe, Field};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arf {
    Split,
    Nonsplit,
    Odd,
}

/// A nonsingular quadratic space over the residue field:
/// `q(x) = sum diag_a x_a^2 + sum_{a<b} polar_ab x_a x_b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualSpace {
    pub dim: usize,
    pub diag: Vec<Fe>,
    pub polar: Vec<Vec<Fe>>,
    pub arf: Arf,
    field: Field,
}

fn dot(k: &Field, a: &[Fe], m: &[Vec<Fe>], b: &[Fe]) -> Fe {
    let mut s = 0;
    for i in 0..a.len() {
        if a[i] == 0 {
            continue;
        }
        for j in 0..b.len() {
            s = k.add(s, k.mul(a[i], k.mul(m[i][j], b[j])));
        }
    }
    s
}

impl ResidualSpace {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn q(&self, x: &[Fe]) -> Fe {
        let k = &self.field;
        let mut s = 0;
        for a in 0..self.dim {
            s = k.add(s, k.mul(k.mul(x[a], x[a]), self.diag[a]));
            for b in a + 1..self.dim {
                s = k.add(s, k.mul(k.mul(x[a], x[b]), self.polar[a][b]));
            }
        }
        s
    }

    pub fn zero_count(&self) -> u64 {
        let mut x = vec![0 as Fe; self.dim];
        let mut c = 0;
        loop {
            if self.q(&x) == 0 {
                c += 1;
            }
            if !next_digits(&mut x, self.field.q()) {
                return c;
            }
        }
    }

    /// Order of the isometry group, by exhaustive search.
    pub fn isometry_count(&self) -> u64 {
        let k = &self.field;
        let m = self.dim;
        let q = k.q();
        let total = q.pow(m as u32);
        let vecs: Vec<Vec<Fe>> = (0..total)
            .map(|mut idx| {
                (0..m)
                    .map(|_| {
                        let d = (idx % q) as Fe;
                        idx /= q;
                        d
                    })
                    .collect()
            })
            .collect();
        let pol = |a: &[Fe], b: &[Fe]| -> Fe {
            let mut s = 0;
            for i in 0..m {
                for j in 0..m {
                    if i != j {
                        s = k.add(s, k.mul(k.mul(a[i], b[j]), self.polar[i.min(j)][i.max(j)]));
                    }
                }
            }
            s
        };
        fn rec(
            sp: &ResidualSpace,
            vecs: &[Vec<Fe>],
            pol: &dyn Fn(&[Fe], &[Fe]) -> Fe,
            chosen: &mut Vec<usize>,
        ) -> u64 {
            let m = sp.dim;
            let a = chosen.len();
            if a == m {
                let mut rows: Vec<Vec<Fe>> = chosen.iter().map(|&i| vecs[i].clone()).collect();
                return (row_reduce(&sp.field, &mut rows, m).len() == m) as u64;
            }
            let mut c = 0;
            for (idx, y) in vecs.iter().enumerate() {
                if sp.q(y) != sp.diag[a] {
                    continue;
                }
                if chosen.iter().enumerate().any(|(b, &ib)| pol(&vecs[ib], y) != sp.polar[b][a]) {
                    continue;
                }
                chosen.push(idx);
                c += rec(sp, vecs, pol, chosen);
                chosen.pop();
            }
            c
        }
        rec(self, &vecs, &pol, &mut Vec::new())
    }
}

/// `V = B/Z` for a normalized lattice (scale-0 constituent present), `e = 1`.
pub fn residual_space(a: &HalfIntMat) -> Result<ResidualSpace, LatticeError> {
    let r = a.ring();
    if !r.is_dyadic() || r.e() != 1 {
        return Err(LatticeError::Unsupported("residual space needs an unramified dyadic ring".into()));
    }
    let k = r.field().clone();
    let n = a.n();
    let two = r.from_i64(2);
    let four = r.from_i64(4);
    let mut bbar = vec![vec![0 as Fe; n]; n];
    for i in 0..n {
        for j in 0..n {
            let x = a.t(i, j);
            if r.ord(x) < 1 {
                return Err(LatticeError::Unsupported("lattice has negative scale".into()));
            }
            bbar[i][j] = r.residue(&r.div_exact(x, &two)?);
        }
    }
    if r.prec() < 8 {
        return Err(LatticeError::Ring(crate::ring::RingError::Precision("need 8 digits".into())));
    }
    let lin: Vec<Fe> = (0..n).map(|i| k.sqrt2(bbar[i][i])).collect();
    let w = null_space(&k, &[lin], n);
    let dw = w.len();
    let qbar = |x: &[Fe]| -> Result<Fe, LatticeError> {
        let xs: Vec<_> = x.iter().map(|&c| r.lift(c)).collect();
        let mut s = r.zero();
        for i in 0..n {
            for j in 0..n {
                s = r.add(&s, &r.mul(&r.mul(&xs[i], a.t(i, j)), &xs[j]));
            }
        }
        Ok(r.residue(&r.div_exact(&s, &four)?))
    };
    let pw: Vec<Vec<Fe>> = (0..dw).map(|i| (0..dw).map(|j| dot(&k, &w[i], &bbar, &w[j])).collect()).collect();
    let qw: Vec<Fe> = w.iter().map(|x| qbar(x)).collect::<Result<_, _>>()?;
    let q_in_w = |c: &[Fe]| -> Fe {
        let mut s = 0;
        for i in 0..dw {
            s = k.add(s, k.mul(k.mul(c[i], c[i]), qw[i]));
            for j in i + 1..dw {
                s = k.add(s, k.mul(k.mul(c[i], c[j]), pw[i][j]));
            }
        }
        s
    };
    let rad = null_space(&k, &pw, dw);
    let semilin: Vec<Fe> = rad.iter().map(|v| k.sqrt2(q_in_w(v))).collect();
    let zc = null_space(&k, &[semilin], rad.len());
    // Z in W coordinates
    let z: Vec<Vec<Fe>> = zc
        .iter()
        .map(|c| {
            let mut v = vec![0 as Fe; dw];
            for (a, &ca) in c.iter().enumerate() {
                for i in 0..dw {
                    v[i] = k.add(v[i], k.mul(ca, rad[a][i]));
                }
            }
            v
        })
        .collect();
    // complement of Z in W
    let mut span = z.clone();
    let mut comp: Vec<Vec<Fe>> = Vec::new();
    for i in 0..dw {
        let mut e = vec![0 as Fe; dw];
        e[i] = 1;
        let mut trial = span.clone();
        trial.push(e.clone());
        if row_reduce(&k, &mut trial.clone(), dw).len() > span.len() {
            span.push(e.clone());
            comp.push(e);
        }
    }
    let dim = comp.len();
    let diag: Vec<Fe> = comp.iter().map(|c| q_in_w(c)).collect();
    let polar: Vec<Vec<Fe>> = (0..dim).map(|a| (0..dim).map(|b| dot(&k, &comp[a], &pw, &comp[b])).collect()).collect();
    let mut sp = ResidualSpace { dim, diag, polar, arf: Arf::Split, field: k };
    if dim % 2 == 1 {
        sp.arf = Arf::Odd;
    } else if dim > 0 {
        let m = (dim / 2) as u32;
        let q = sp.field.q() as u64;
        let split = q.pow(2 * m - 1) + q.pow(m) - q.pow(m - 1);
        sp.arf = if sp.zero_count() == split { Arf::Split } else { Arf::Nonsplit };
    }
    Ok(sp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Ring;

    fn rs(rows: &[Vec<i64>]) -> ResidualSpace {
        let r = Ring::z2(40);
        residual_space(&HalfIntMat::from_doubled(&r, rows).unwrap()).unwrap()
    }

    #[test]
    fn examples() {
        let h = rs(&[vec![0, 2], vec![2, 0]]);
        assert_eq!((h.dim, h.arf), (2, Arf::Split));
        let a2 = rs(&[vec![4, 2], vec![2, 4]]);
        assert_eq!((a2.dim, a2.arf), (2, Arf::Nonsplit));
        assert_eq!(rs(&[vec![2, 0], vec![0, 6]]).dim, 0);
        assert_eq!(rs(&[vec![2, 0], vec![0, 2]]).dim, 1);
        assert_eq!(rs(&[vec![2]]).dim, 0);
    }

    #[test]
    fn isometry_orders() {
        assert_eq!(rs(&[vec![0, 2], vec![2, 0]]).isometry_count(), 2);
        assert_eq!(rs(&[vec![4, 2], vec![2, 4]]).isometry_count(), 6);
        assert_eq!(rs(&[vec![2]]).isometry_count(), 1);
    }
}
