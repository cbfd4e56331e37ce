//! Half-integral symmetric matrices, stored doubled (`T = 2B`).

pub mod jordan;
pub mod residual;

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::ring::{Elem, FElem, Ring, RingError, RingSpec};

pub use jordan::{jordan_split, Constituent, JordanDecomposition, Parity, Subtype};
pub use residual::{residual_space, Arf, ResidualSpace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("diagonal entry {0} of B is not integral")]
    NotHalfIntegral(usize),
    #[error("matrix is degenerate at working precision")]
    Degenerate,
    #[error("transform is not unimodular")]
    NotUnimodular,
    #[error("dimension mismatch")]
    Shape,
    #[error("no constituent at scale {0}")]
    NoConstituent(i64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Square matrix over the ring, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    pub n: usize,
    pub a: Vec<Elem>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat{}x{}", self.n, self.n)
    }
}

impl Mat {
    pub fn zero(r: &Ring, n: usize) -> Mat {
        Mat { n, a: vec![r.zero(); n * n] }
    }
    pub fn identity(r: &Ring, n: usize) -> Mat {
        let mut m = Mat::zero(r, n);
        for i in 0..n {
            m.a[i * n + i] = r.one();
        }
        m
    }
    pub fn from_i64(r: &Ring, rows: &[Vec<i64>]) -> Mat {
        let n = rows.len();
        Mat { n, a: rows.iter().flat_map(|row| row.iter().map(|&x| r.from_i64(x))).collect() }
    }
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Elem {
        &self.a[i * self.n + j]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Elem) {
        self.a[i * self.n + j] = v;
    }
    pub fn transpose(&self) -> Mat {
        let n = self.n;
        let mut t = self.clone();
        for i in 0..n {
            for j in 0..n {
                t.a[j * n + i] = self.a[i * n + j];
            }
        }
        t
    }
    pub fn mul(&self, r: &Ring, o: &Mat) -> Mat {
        let n = self.n;
        let mut c = Mat::zero(r, n);
        for i in 0..n {
            for k in 0..n {
                let x = self.a[i * n + k];
                if r.is_zero(&x) {
                    continue;
                }
                for j in 0..n {
                    let v = r.add(&c.a[i * n + j], &r.mul(&x, &o.a[k * n + j]));
                    c.a[i * n + j] = v;
                }
            }
        }
        c
    }
    /// Determinant by permutation expansion (exact, no divisions).
    pub fn det(&self, r: &Ring) -> Elem {
        fn rec(r: &Ring, m: &Mat, row: usize, used: &mut Vec<bool>, acc: Elem, sign: bool, out: &mut Elem) {
            let n = m.n;
            if row == n {
                *out = if sign { r.sub(out, &acc) } else { r.add(out, &acc) };
                return;
            }
            // sign tracked by counting inversions on the fly
            for c in 0..n {
                if used[c] {
                    continue;
                }
                let x = m.get(row, c);
                if r.is_zero(x) {
                    continue;
                }
                let inv = used[c + 1..].iter().filter(|&&u| u).count() % 2 == 1;
                used[c] = true;
                rec(r, m, row + 1, used, r.mul(&acc, x), sign ^ inv, out);
                used[c] = false;
            }
        }
        let mut out = r.zero();
        let mut used = vec![false; self.n];
        rec(r, self, 0, &mut used, r.one(), false, &mut out);
        out
    }
    pub fn is_unimodular(&self, r: &Ring) -> bool {
        r.is_unit(&self.det(r))
    }
    /// Inverse of a unimodular matrix by Gauss-Jordan with unit pivots.
    pub fn inverse(&self, r: &Ring) -> Result<Mat, LatticeError> {
        let n = self.n;
        let mut a = self.clone();
        let mut b = Mat::identity(r, n);
        for c in 0..n {
            let p = (c..n).find(|&i| r.is_unit(a.get(i, c))).ok_or(LatticeError::NotUnimodular)?;
            for j in 0..n {
                a.a.swap(c * n + j, p * n + j);
                b.a.swap(c * n + j, p * n + j);
            }
            let iv = r.inv(a.get(c, c))?;
            for j in 0..n {
                a.a[c * n + j] = r.mul(&a.a[c * n + j], &iv);
                b.a[c * n + j] = r.mul(&b.a[c * n + j], &iv);
            }
            for i in 0..n {
                if i == c {
                    continue;
                }
                let f = *a.get(i, c);
                if r.is_zero(&f) {
                    continue;
                }
                for j in 0..n {
                    a.a[i * n + j] = r.sub(&a.a[i * n + j], &r.mul(&f, &a.a[c * n + j]));
                    b.a[i * n + j] = r.sub(&b.a[i * n + j], &r.mul(&f, &b.a[c * n + j]));
                }
            }
        }
        Ok(b)
    }
    /// Column permutation matrix sending `e_i` to `e_{perm[i]}`... stored so that
    /// `M[P]` has `(i,j)` entry `M[perm[i]][perm[j]]`.
    pub fn permutation(r: &Ring, perm: &[usize]) -> Mat {
        let n = perm.len();
        let mut m = Mat::zero(r, n);
        for (j, &pj) in perm.iter().enumerate() {
            m.a[pj * n + j] = r.one();
        }
        m
    }
}

/// `B` in `H_n(o)`, stored as `T = 2B`.
#[derive(Clone)]
pub struct HalfIntMat {
    ring: Ring,
    t: Mat,
}

impl fmt::Debug for HalfIntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HalfIntMat[")?;
        for i in 0..self.n() {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.n() {
                if j > 0 {
                    write!(f, " ")?;
                }
                let x = self.t.get(i, j);
                if self.ring.e() * self.ring.f() == 1 {
                    let c = x.coeffs()[0] as i64;
                    let m = 1i64 << (self.ring.prec().min(62));
                    let v = if self.ring.p() == 2 && c > m / 2 { c - m } else { c };
                    write!(f, "{v}")?;
                } else {
                    write!(f, "{:?}", self.ring.to_json_digits(x))?;
                }
            }
        }
        write!(f, "]/2")
    }
}

impl PartialEq for HalfIntMat {
    fn eq(&self, o: &HalfIntMat) -> bool {
        self.ring == o.ring && self.t == o.t
    }
}

impl HalfIntMat {
    pub fn new(ring: &Ring, t: Mat) -> Result<HalfIntMat, LatticeError> {
        let n = t.n;
        for i in 0..n {
            for j in 0..i {
                if t.get(i, j) != t.get(j, i) {
                    return Err(LatticeError::NotSymmetric);
                }
            }
            if ring.ord(t.get(i, i)) < ring.v2() {
                return Err(LatticeError::NotHalfIntegral(i));
            }
        }
        Ok(HalfIntMat { ring: ring.clone(), t })
    }

    /// From the doubled matrix given with integer entries.
    pub fn from_doubled(ring: &Ring, rows: &[Vec<i64>]) -> Result<HalfIntMat, LatticeError> {
        if rows.iter().any(|r| r.len() != rows.len()) {
            return Err(LatticeError::Shape);
        }
        HalfIntMat::new(ring, Mat::from_i64(ring, rows))
    }

    /// Diagonal form `diag(b_1, ..., b_n)`.
    pub fn diag(ring: &Ring, b: &[Elem]) -> HalfIntMat {
        let n = b.len();
        let mut t = Mat::zero(ring, n);
        let two = ring.from_i64(2);
        for (i, x) in b.iter().enumerate() {
            t.set(i, i, ring.mul(x, &two));
        }
        HalfIntMat { ring: ring.clone(), t }
    }

    pub fn diag_i64(ring: &Ring, b: &[i64]) -> HalfIntMat {
        HalfIntMat::diag(ring, &b.iter().map(|&x| ring.from_i64(x)).collect::<Vec<_>>())
    }

    /// The hyperbolic plane `[[0,1],[1,0]]` as `B`.
    pub fn hyperbolic(ring: &Ring) -> HalfIntMat {
        HalfIntMat::from_doubled(ring, &[vec![0, 2], vec![2, 0]]).expect("valid")
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }
    pub fn n(&self) -> usize {
        self.t.n
    }
    pub fn doubled(&self) -> &Mat {
        &self.t
    }
    /// Entry of `T = 2B`.
    pub fn t(&self, i: usize, j: usize) -> &Elem {
        self.t.get(i, j)
    }
    /// `ord(b_ii)`.
    pub fn ord_diag(&self, i: usize) -> i64 {
        self.ring.ord(self.t.get(i, i)) as i64 - self.ring.v2() as i64
    }
    /// `ord(2 b_ij)`.
    pub fn ord_off(&self, i: usize, j: usize) -> i64 {
        self.ring.ord(self.t.get(i, j)) as i64
    }
    /// The sentinel order meaning "zero at working precision".
    pub fn inf(&self) -> i64 {
        self.ring.prec() as i64
    }

    pub fn congruence(&self, u: &Mat) -> Result<HalfIntMat, LatticeError> {
        if u.n != self.n() {
            return Err(LatticeError::Shape);
        }
        if !u.is_unimodular(&self.ring) {
            return Err(LatticeError::NotUnimodular);
        }
        Ok(self.transform(u))
    }

    /// `U^t T U` without the unimodularity check.
    pub fn transform(&self, u: &Mat) -> HalfIntMat {
        let r = &self.ring;
        let t = u.transpose().mul(r, &self.t).mul(r, u);
        HalfIntMat { ring: r.clone(), t }
    }

    pub fn scale(&self, c: &Elem) -> HalfIntMat {
        let r = &self.ring;
        HalfIntMat { ring: r.clone(), t: Mat { n: self.n(), a: self.t.a.iter().map(|x| r.mul(x, c)).collect() } }
    }

    pub fn neg(&self) -> HalfIntMat {
        self.scale(&self.ring.from_i64(-1))
    }

    pub fn direct_sum(&self, o: &HalfIntMat) -> HalfIntMat {
        let r = &self.ring;
        let (n1, n2) = (self.n(), o.n());
        let n = n1 + n2;
        let mut t = Mat::zero(r, n);
        for i in 0..n1 {
            for j in 0..n1 {
                t.set(i, j, *self.t.get(i, j));
            }
        }
        for i in 0..n2 {
            for j in 0..n2 {
                t.set(n1 + i, n1 + j, *o.t.get(i, j));
            }
        }
        HalfIntMat { ring: r.clone(), t }
    }

    /// Principal submatrix on the given indices.
    pub fn submatrix(&self, idx: &[usize]) -> HalfIntMat {
        let r = &self.ring;
        let mut t = Mat::zero(r, idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                t.set(a, b, *self.t.get(i, j));
            }
        }
        HalfIntMat { ring: r.clone(), t }
    }

    pub fn leading(&self, k: usize) -> HalfIntMat {
        self.submatrix(&(0..k).collect::<Vec<_>>())
    }

    pub fn permute(&self, perm: &[usize]) -> HalfIntMat {
        self.submatrix(perm)
    }

    pub fn det_doubled(&self) -> Elem {
        self.t.det(&self.ring)
    }

    /// `D_B = (-4)^{[n/2]} det B`.
    pub fn disc(&self) -> Result<Elem, LatticeError> {
        let r = &self.ring;
        let n = self.n();
        let dt = self.det_doubled();
        let sign = if (n / 2) % 2 == 1 { -1 } else { 1 };
        let d = if n.is_multiple_of(2) {
            dt
        } else {
            r.div_exact(&dt, &r.from_i64(2)).map_err(|_| LatticeError::Degenerate)?
        };
        if r.is_zero(&d) {
            return Err(LatticeError::Degenerate);
        }
        Ok(r.mul_i64(&d, sign))
    }

    pub fn is_nondegenerate(&self) -> bool {
        let d = self.det_doubled();
        (self.ring.ord(&d) as i64) < self.inf() - 2 * self.ring.e() as i64 - 4
    }

    /// `Q(x) = x^t B x` as an element of the fraction field.
    pub fn q_value(&self, x: &[Elem]) -> FElem {
        let r = &self.ring;
        let n = self.n();
        let mut s = r.zero();
        for i in 0..n {
            for j in 0..n {
                s = r.add(&s, &r.mul(&r.mul(&x[i], self.t.get(i, j)), &x[j]));
            }
        }
        let f = r.felem(&s);
        FElem(f.0.map(|(v, u)| (v - r.v2() as i64, u)))
    }

    pub fn to_json(&self) -> MatrixJson {
        let r = &self.ring;
        MatrixJson {
            ring: Some(r.spec().clone()),
            n: Some(self.n()),
            doubled: (0..self.n())
                .map(|i| (0..self.n()).map(|j| elem_to_json(r, self.t.get(i, j))).collect())
                .collect(),
        }
    }

    pub fn from_json(m: &MatrixJson, default_ring: Option<&Ring>) -> Result<HalfIntMat, LatticeError> {
        let ring = match (&m.ring, default_ring) {
            (Some(s), _) => Ring::new(s.clone())?,
            (None, Some(r)) => r.clone(),
            (None, None) => Ring::new(RingSpec::z2(60))?,
        };
        let n = m.doubled.len();
        if m.n.is_some_and(|k| k != n) || m.doubled.iter().any(|row| row.len() != n) {
            return Err(LatticeError::Shape);
        }
        let mut t = Mat::zero(&ring, n);
        for i in 0..n {
            for j in 0..n {
                t.set(i, j, elem_from_json(&ring, &m.doubled[i][j])?);
            }
        }
        HalfIntMat::new(&ring, t)
    }
}

/// `{"ring": ..., "n": 2, "doubled": [[...]]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ring: Option<RingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub doubled: Vec<Vec<Value>>,
}

pub fn elem_to_json(r: &Ring, x: &Elem) -> Value {
    Value::from(r.to_json_digits(x))
}

pub fn elem_from_json(r: &Ring, v: &Value) -> Result<Elem, LatticeError> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(|k| r.from_i64(k))
            .ok_or_else(|| LatticeError::Parse(format!("not an integer: {n}"))),
        Value::Array(ds) => {
            let mut digits = Vec::with_capacity(ds.len());
            for d in ds {
                let k = d.as_u64().ok_or_else(|| LatticeError::Parse(format!("bad digit {d}")))?;
                if k as usize >= r.q() {
                    return Err(LatticeError::Parse(format!("digit {k} out of range")));
                }
                digits.push(k as u16);
            }
            Ok(r.from_digits(&digits))
        }
        other => Err(LatticeError::Parse(format!("unexpected element {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn congruence_examples() {
        let r = Ring::z2(40);
        let b = HalfIntMat::diag_i64(&r, &[1, -1]);
        let u = Mat::from_i64(&r, &[vec![1, 1], vec![0, 1]]);
        let c = b.congruence(&u).unwrap();
        assert_eq!(c, HalfIntMat::from_doubled(&r, &[vec![2, 2], vec![2, 0]]).unwrap());
        let ui = u.inverse(&r).unwrap();
        assert_eq!(c.congruence(&ui).unwrap(), b);
        assert_eq!(b.congruence(&Mat::identity(&r, 2)).unwrap(), b);
        let bad = Mat::from_i64(&r, &[vec![2, 0], vec![0, 1]]);
        assert_eq!(b.congruence(&bad), Err(LatticeError::NotUnimodular));
    }

    #[test]
    fn determinants() {
        let r = Ring::z2(40);
        let m = Mat::from_i64(&r, &[vec![2, 1, 0], vec![1, 2, 1], vec![0, 1, 2]]);
        assert_eq!(m.det(&r), r.from_i64(4));
        let b = HalfIntMat::diag_i64(&r, &[1, -1]);
        assert_eq!(b.disc().unwrap(), r.from_i64(4));
        assert_eq!(HalfIntMat::hyperbolic(&r).disc().unwrap(), r.from_i64(4));
        let h = HalfIntMat::from_doubled(&r, &[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(h.disc().unwrap(), r.from_i64(1));
    }

    #[test]
    fn json_roundtrip() {
        let r = Ring::z2(40);
        let b = HalfIntMat::from_doubled(&r, &[vec![2, 1], vec![1, -6]]).unwrap();
        let j = serde_json::to_string(&b.to_json()).unwrap();
        let m: MatrixJson = serde_json::from_str(&j).unwrap();
        assert_eq!(HalfIntMat::from_json(&m, None).unwrap(), b);
        let m: MatrixJson = serde_json::from_str(r#"{"doubled":[[2,1],[1,2]]}"#).unwrap();
        assert_eq!(HalfIntMat::from_json(&m, Some(&r)).unwrap().n(), 2);
        let bad: MatrixJson = serde_json::from_str(r#"{"doubled":[[1,0],[0,2]]}"#).unwrap();
        assert!(HalfIntMat::from_json(&bad, Some(&r)).is_err());
    }
}
