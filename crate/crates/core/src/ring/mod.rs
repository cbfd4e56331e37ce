//! Fixed-precision arithmetic in the integers of a finite extension of Q_2
//! (and plain Z_p for odd p).
//!
//! An element is stored as `sum_{j<e} c_j pi^j` where each `c_j` lives in the
//! unramified subring `W = (Z/2^K)[x]/(m(x))`, `m` irreducible of degree `f`
//! over GF(2). The uniformizer satisfies `pi^e = -2 u(pi)` with `u(0)` a unit.

pub mod felem;
pub mod gf;
pub mod quad;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use felem::FElem;
pub use gf::{Fe, Field};
pub use quad::{Defect, QuadClass};

/// Maximum of `e * f`.
pub const MAXD: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("invalid ring specification: {0}")]
    InvalidSpec(String),
    #[error("element is not a unit")]
    NotUnit,
    #[error("element is zero at working precision")]
    Zero,
    #[error("division is not exact")]
    NotDivisible,
    #[error("insufficient precision: {0}")]
    Precision(String),
    #[error("elements belong to different rings")]
    Mismatch,
    #[error("operation not supported: {0}")]
    Unsupported(String),
}

/// A coefficient of the Eisenstein data: an integer, or the little-endian
/// coefficient list (in `x`) of an element of the unramified subring.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Int(i64),
    Poly(Vec<i64>),
}

fn default_p() -> u32 {
    2
}
fn default_one() -> u32 {
    1
}
fn default_precision() -> u32 {
    60
}

/// User-facing ring description.
///
/// `eisenstein` lists `[u_{e-1}, ..., u_0]` so that `pi^e + 2 u(pi) = 0`;
/// `{"e":2, "eisenstein":[0,1]}` is `pi^2 + 2 = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RingSpec {
    #[serde(default = "default_p")]
    pub p: u32,
    #[serde(default = "default_one")]
    pub f: u32,
    #[serde(default = "default_one")]
    pub e: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eisenstein: Option<Vec<Coeff>>,
    #[serde(default = "default_precision")]
    pub precision: u32,
}

impl RingSpec {
    pub fn z2(precision: u32) -> RingSpec {
        RingSpec { p: 2, f: 1, e: 1, eisenstein: None, precision }
    }
    pub fn zp(p: u32, precision: u32) -> RingSpec {
        RingSpec { p, f: 1, e: 1, eisenstein: None, precision }
    }
    pub fn dyadic(f: u32, e: u32, eisenstein: Option<Vec<Coeff>>, precision: u32) -> RingSpec {
        RingSpec { p: 2, f, e, eisenstein, precision }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Elem(pub(crate) [u64; MAXD]);

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl Elem {
    pub fn coeffs(&self) -> &[u64; MAXD] {
        &self.0
    }
}

struct Inner {
    spec: RingSpec,
    p: u64,
    f: usize,
    e: usize,
    k: u32,
    modulus: u64,
    mask: u64,
    field: Field,
    /// `x^f = sum red[i] x^i` in W.
    red: Vec<u64>,
    /// `-2 u_l`, so that `pi^e = sum_l neg2u[l] pi^l`.
    neg2u: Vec<[u64; MAXD]>,
    neg_u_inv: Elem,
    two_over_pi: Elem,
    pi: Elem,
    /// residue of p / pi^e
    rho_pi: Fe,
    /// residue of 2 / pi^{ord 2}
    rho2: Fe,
    hash: String,
}

/// A dyadic (or odd p-adic) ring of integers at fixed precision. Cheap to clone.
#[derive(Clone)]
pub struct Ring(Arc<Inner>);

impl fmt::Debug for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Ring(p={}, f={}, e={}, P={})",
            self.0.p,
            self.0.f,
            self.0.e,
            self.prec()
        )
    }
}

impl PartialEq for Ring {
    fn eq(&self, other: &Ring) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.hash == other.0.hash
    }
}
impl Eq for Ring {}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

impl Ring {
    pub fn new(spec: RingSpec) -> Result<Ring, RingError> {
        let bad = |s: &str| Err(RingError::InvalidSpec(s.to_string()));
        if !is_prime(spec.p) {
            return bad("p must be prime");
        }
        if spec.f == 0 || spec.e == 0 {
            return bad("f and e must be positive");
        }
        if spec.p != 2 && (spec.f != 1 || spec.e != 1) {
            return bad("odd p is supported only for Z_p");
        }
        let (f, e) = (spec.f as usize, spec.e as usize);
        if e * f > MAXD {
            return bad("e * f must be at most 8");
        }
        if spec.p == 2 && spec.precision < 2 * spec.e + 4 {
            return bad("precision must be at least 2e + 4");
        }
        let k = spec.precision.div_ceil(spec.e);
        let p = spec.p as u64;
        let (modulus, mask) = if p == 2 {
            if k > 62 {
                return bad("coefficient precision exceeds 62 bits; lower the precision");
            }
            (1u64 << k, (1u64 << k) - 1)
        } else {
            let mut m: u64 = 1;
            for _ in 0..k {
                m = match m.checked_mul(p) {
                    Some(v) if v < (1u64 << 62) => v,
                    _ => return bad("p^precision exceeds 62 bits"),
                };
            }
            (m, 0)
        };
        let field = Field::new(spec.p, spec.f);
        let red: Vec<u64> = (0..f)
            .map(|i| {
                if field.modpoly() >> i & 1 == 1 {
                    modulus - 1
                } else {
                    0
                }
            })
            .collect();

        let hash = {
            let mut h = Sha256::new();
            h.update(serde_json::to_vec(&spec).expect("spec serializes"));
            hex::encode(&h.finalize()[..16])
        };
        let mut inner = Inner {
            spec: spec.clone(),
            p,
            f,
            e,
            k,
            modulus,
            mask,
            field,
            red,
            neg2u: Vec::new(),
            neg_u_inv: Elem::default(),
            two_over_pi: Elem::default(),
            pi: Elem::default(),
            rho_pi: 1,
            rho2: 1,
            hash,
        };

        if p != 2 {
            inner.pi.0[0] = p;
            inner.rho2 = (2 % p) as Fe;
            return Ok(Ring(Arc::new(inner)));
        }

        // u(pi) coefficients, little-endian in pi, each a W element
        let mut u: Vec<[u64; MAXD]> = vec![[0; MAXD]; e];
        match &spec.eisenstein {
            None if e == 1 => u[0][0] = modulus - 1,
            None => return bad("eisenstein coefficients are required when e > 1"),
            Some(cs) => {
                if cs.len() != e {
                    return bad("eisenstein must list exactly e coefficients");
                }
                for (idx, c) in cs.iter().enumerate() {
                    let l = e - 1 - idx;
                    match c {
                        Coeff::Int(v) => u[l][0] = (*v as u64) & mask,
                        Coeff::Poly(vs) => {
                            if vs.len() > f {
                                return bad("coefficient polynomial longer than f");
                            }
                            for (i, v) in vs.iter().enumerate() {
                                u[l][i] = (*v as u64) & mask;
                            }
                        }
                    }
                }
            }
        }
        if u[0][..f].iter().all(|c| c & 1 == 0) {
            return bad("polynomial is not Eisenstein: u(0) must be a unit");
        }
        let tmp = Ring(Arc::new(inner));
        let neg2u: Vec<[u64; MAXD]> = u
            .iter()
            .map(|ul| {
                let mut r = [0u64; MAXD];
                for i in 0..f {
                    r[i] = tmp.cmul(tmp.cneg(ul[i]), 2);
                }
                r
            })
            .collect();
        let mut inner = Arc::try_unwrap(tmp.0).ok().expect("unique");
        inner.neg2u = neg2u;
        if e == 1 {
            let mut pi = Elem::default();
            pi.0[..f].copy_from_slice(&inner.neg2u[0][..f]);
            inner.pi = pi;
        } else {
            inner.pi.0[f] = 1;
        }
        let tmp = Ring(Arc::new(inner));
        // -u(pi) as an element
        let mut neg_u = Elem::default();
        for l in 0..e {
            for i in 0..f {
                neg_u.0[l * f + i] = tmp.cneg(u[l][i]);
            }
        }
        let neg_u_inv = tmp.inv(&neg_u)?;
        let two_over_pi = tmp.mul(&tmp.pi_pow(e as u32 - 1), &neg_u_inv);
        let mut inner = Arc::try_unwrap(tmp.0).ok().expect("unique");
        inner.neg_u_inv = neg_u_inv;
        inner.two_over_pi = two_over_pi;
        let tmp = Ring(Arc::new(inner));
        let r = tmp.residue(&neg_u_inv);
        let mut inner = Arc::try_unwrap(tmp.0).ok().expect("unique");
        inner.rho_pi = r;
        inner.rho2 = r;
        Ok(Ring(Arc::new(inner)))
    }

    /// Z_2 at the given precision.
    pub fn z2(precision: u32) -> Ring {
        Ring::new(RingSpec::z2(precision)).expect("valid")
    }

    /// Z_p for an odd prime p.
    pub fn zp(p: u32, precision: u32) -> Ring {
        Ring::new(RingSpec::zp(p, precision)).expect("valid")
    }

    pub fn spec(&self) -> &RingSpec {
        &self.0.spec
    }
    /// Stable short hash of the specification.
    pub fn hash_id(&self) -> &str {
        &self.0.hash
    }
    pub fn p(&self) -> u32 {
        self.0.p as u32
    }
    pub fn f(&self) -> usize {
        self.0.f
    }
    pub fn e(&self) -> usize {
        self.0.e
    }
    pub fn q(&self) -> usize {
        self.0.field.q()
    }
    pub fn field(&self) -> &Field {
        &self.0.field
    }
    /// Working precision in pi-adic digits; `ord` of zero returns this.
    pub fn prec(&self) -> u32 {
        self.0.e as u32 * self.0.k
    }
    /// ord(2).
    pub fn v2(&self) -> u32 {
        if self.0.p == 2 {
            self.0.e as u32
        } else {
            0
        }
    }
    /// Residue of 2 / pi^{ord 2}.
    pub fn rho2(&self) -> Fe {
        self.0.rho2
    }
    pub fn is_dyadic(&self) -> bool {
        self.0.p == 2
    }

    #[inline]
    fn cadd(&self, a: u64, b: u64) -> u64 {
        if self.0.p == 2 {
            a.wrapping_add(b) & self.0.mask
        } else {
            let s = a + b;
            if s >= self.0.modulus {
                s - self.0.modulus
            } else {
                s
            }
        }
    }
    #[inline]
    fn cneg(&self, a: u64) -> u64 {
        if self.0.p == 2 {
            a.wrapping_neg() & self.0.mask
        } else if a == 0 {
            0
        } else {
            self.0.modulus - a
        }
    }
    #[inline]
    fn cmul(&self, a: u64, b: u64) -> u64 {
        if self.0.p == 2 {
            a.wrapping_mul(b) & self.0.mask
        } else {
            ((a as u128 * b as u128) % self.0.modulus as u128) as u64
        }
    }
    fn cval(&self, c: u64) -> u32 {
        if c == 0 {
            return self.0.k;
        }
        if self.0.p == 2 {
            c.trailing_zeros()
        } else {
            let mut v = 0;
            let mut c = c;
            while c.is_multiple_of(self.0.p) {
                c /= self.0.p;
                v += 1;
            }
            v
        }
    }

    fn wmul(&self, a: &[u64], b: &[u64]) -> [u64; MAXD] {
        let f = self.0.f;
        let mut r = [0u64; MAXD];
        if f == 1 {
            r[0] = self.cmul(a[0], b[0]);
            return r;
        }
        let mut tmp = [0u64; 2 * MAXD];
        for i in 0..f {
            if a[i] == 0 {
                continue;
            }
            for j in 0..f {
                tmp[i + j] = self.cadd(tmp[i + j], self.cmul(a[i], b[j]));
            }
        }
        for d in (f..2 * f - 1).rev() {
            let c = tmp[d];
            if c == 0 {
                continue;
            }
            tmp[d] = 0;
            for i in 0..f {
                if self.0.red[i] != 0 {
                    tmp[d - f + i] = self.cadd(tmp[d - f + i], self.cmul(c, self.0.red[i]));
                }
            }
        }
        r[..f].copy_from_slice(&tmp[..f]);
        r
    }

    pub fn zero(&self) -> Elem {
        Elem::default()
    }
    pub fn one(&self) -> Elem {
        let mut r = Elem::default();
        r.0[0] = 1;
        r
    }
    pub fn from_i64(&self, n: i64) -> Elem {
        let mut r = Elem::default();
        r.0[0] = if self.0.p == 2 {
            (n as u64) & self.0.mask
        } else {
            n.rem_euclid(self.0.modulus as i64) as u64
        };
        r
    }
    pub fn pi(&self) -> Elem {
        self.0.pi
    }
    pub fn pi_pow(&self, k: u32) -> Elem {
        self.pow(&self.0.pi, k)
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        let mut r = Elem::default();
        for i in 0..self.0.e * self.0.f {
            r.0[i] = self.cadd(a.0[i], b.0[i]);
        }
        r
    }
    pub fn neg(&self, a: &Elem) -> Elem {
        let mut r = Elem::default();
        for i in 0..self.0.e * self.0.f {
            r.0[i] = self.cneg(a.0[i]);
        }
        r
    }
    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        let (e, f) = (self.0.e, self.0.f);
        if e * f == 1 {
            let mut r = Elem::default();
            r.0[0] = self.cmul(a.0[0], b.0[0]);
            return r;
        }
        let mut acc = [0u64; 2 * MAXD];
        for j1 in 0..e {
            let aj = &a.0[j1 * f..j1 * f + f];
            if aj.iter().all(|&c| c == 0) {
                continue;
            }
            for j2 in 0..e {
                let prod = self.wmul(aj, &b.0[j2 * f..j2 * f + f]);
                for i in 0..f {
                    let idx = (j1 + j2) * f + i;
                    acc[idx] = self.cadd(acc[idx], prod[i]);
                }
            }
        }
        for j in (e..2 * e - 1).rev() {
            let c: Vec<u64> = acc[j * f..j * f + f].to_vec();
            if c.iter().all(|&x| x == 0) {
                continue;
            }
            for x in acc[j * f..j * f + f].iter_mut() {
                *x = 0;
            }
            for l in 0..e {
                let t = self.wmul(&c, &self.0.neg2u[l]);
                for i in 0..f {
                    let idx = (j - e + l) * f + i;
                    acc[idx] = self.cadd(acc[idx], t[i]);
                }
            }
        }
        let mut r = Elem::default();
        r.0[..e * f].copy_from_slice(&acc[..e * f]);
        r
    }

    pub fn mul_i64(&self, a: &Elem, n: i64) -> Elem {
        self.mul(a, &self.from_i64(n))
    }

    pub fn pow(&self, a: &Elem, mut k: u32) -> Elem {
        let mut r = self.one();
        let mut b = *a;
        while k > 0 {
            if k & 1 == 1 {
                r = self.mul(&r, &b);
            }
            b = self.mul(&b, &b);
            k >>= 1;
        }
        r
    }

    /// pi-adic valuation; `prec()` for elements that vanish at working precision.
    pub fn ord(&self, a: &Elem) -> u32 {
        let (e, f) = (self.0.e, self.0.f);
        let mut best = self.prec();
        for j in 0..e {
            for i in 0..f {
                let c = a.0[j * f + i];
                if c != 0 {
                    best = best.min(self.cval(c) * e as u32 + j as u32);
                }
            }
        }
        best
    }

    pub fn is_zero(&self, a: &Elem) -> bool {
        a.0.iter().all(|&c| c == 0)
    }
    pub fn is_unit(&self, a: &Elem) -> bool {
        self.ord(a) == 0
    }

    /// Residue class of `a / pi^j`, assuming `ord(a) >= j`.
    pub fn digit(&self, a: &Elem, j: u32) -> Fe {
        let (e, f) = (self.0.e as u32, self.0.f);
        let (l, v) = ((j % e) as usize, j / e);
        if v >= self.0.k {
            return 0;
        }
        let mut r: Fe = 0;
        let pv = self.0.p.pow(v);
        for i in 0..f {
            let c = a.0[l * f + i] / pv % self.0.p;
            if self.0.p == 2 {
                r |= (c as Fe) << i;
            } else {
                r = c as Fe;
            }
        }
        if v > 0 && self.0.rho_pi != 1 {
            r = self.0.field.mul(r, self.0.field.pow(self.0.rho_pi, v as u64));
        }
        r
    }

    pub fn residue(&self, a: &Elem) -> Fe {
        self.digit(a, 0)
    }

    /// The standard representative of a residue class.
    pub fn lift(&self, r: Fe) -> Elem {
        let mut x = Elem::default();
        if self.0.p == 2 {
            for i in 0..self.0.f {
                x.0[i] = (r as u64 >> i) & 1;
            }
        } else {
            x.0[0] = r as u64;
        }
        x
    }

    pub fn inv(&self, a: &Elem) -> Result<Elem, RingError> {
        if self.ord(a) != 0 {
            return Err(RingError::NotUnit);
        }
        let r = self.0.field.inv(self.residue(a));
        let mut x = self.lift(r);
        let one = self.one();
        let two = self.from_i64(2);
        for _ in 0..80 {
            let ax = self.mul(a, &x);
            if ax == one {
                return Ok(x);
            }
            x = self.mul(&x, &self.sub(&two, &ax));
        }
        Err(RingError::Precision("Newton inversion did not converge".into()))
    }

    fn div_pi1(&self, a: &Elem) -> Elem {
        let (e, f) = (self.0.e, self.0.f);
        let mut c0 = [0u64; MAXD];
        for i in 0..f {
            c0[i] = a.0[i] >> 1;
        }
        let mut r = Elem::default();
        for j in 1..e {
            for i in 0..f {
                r.0[(j - 1) * f + i] = a.0[j * f + i];
            }
        }
        let mut c0e = Elem::default();
        c0e.0[..f].copy_from_slice(&c0[..f]);
        self.add(&r, &self.mul(&c0e, &self.0.two_over_pi))
    }

    /// Exact division by pi^v. Loses up to `v` digits of absolute precision.
    pub fn div_pi_pow(&self, a: &Elem, v: u32) -> Result<Elem, RingError> {
        if v == 0 {
            return Ok(*a);
        }
        if self.ord(a) < v {
            return Err(RingError::NotDivisible);
        }
        if self.0.p != 2 {
            let mut r = Elem::default();
            r.0[0] = a.0[0] / self.0.p.pow(v);
            return Ok(r);
        }
        let e = self.0.e as u32;
        let (s, rem) = (v / e, v % e);
        let mut b = Elem::default();
        for i in 0..self.0.e * self.0.f {
            b.0[i] = if s >= 64 { 0 } else { a.0[i] >> s };
        }
        if s > 0 {
            b = self.mul(&b, &self.pow(&self.0.neg_u_inv, s));
        }
        for _ in 0..rem {
            b = self.div_pi1(&b);
        }
        Ok(b)
    }

    /// `(ord a, a / pi^{ord a})`.
    pub fn unit_part(&self, a: &Elem) -> Result<(u32, Elem), RingError> {
        let v = self.ord(a);
        if v >= self.prec() {
            return Err(RingError::Zero);
        }
        Ok((v, self.div_pi_pow(a, v)?))
    }

    /// Exact quotient `a / b` in the ring; requires `ord b <= ord a`.
    pub fn div_exact(&self, a: &Elem, b: &Elem) -> Result<Elem, RingError> {
        let (vb, ub) = self.unit_part(b)?;
        if self.is_zero(a) {
            return Ok(self.zero());
        }
        let s = self.div_pi_pow(a, vb)?;
        Ok(self.mul(&s, &self.inv(&ub)?))
    }

    /// pi-adic digits, little-endian.
    pub fn to_digits(&self, a: &Elem, count: usize) -> Vec<Fe> {
        let mut out = Vec::with_capacity(count);
        let mut x = *a;
        for _ in 0..count {
            let d = self.residue(&x);
            out.push(d);
            x = self.sub(&x, &self.lift(d));
            x = self.div_pi_pow(&x, 1).unwrap_or_default();
        }
        out
    }

    pub fn from_digits(&self, ds: &[Fe]) -> Elem {
        let pi = self.pi();
        let mut acc = self.zero();
        for &d in ds.iter().rev() {
            acc = self.add(&self.mul(&acc, &pi), &self.lift(d));
        }
        acc
    }

    /// `a` reduced modulo pi^k, as its canonical digit expansion.
    pub fn reduce(&self, a: &Elem, k: u32) -> Elem {
        self.from_digits(&self.to_digits(a, k as usize))
    }

    /// Digit-array serialization, trimmed of trailing zero digits.
    pub fn to_json_digits(&self, a: &Elem) -> Vec<u32> {
        let mut ds: Vec<u32> = self
            .to_digits(a, self.prec() as usize)
            .into_iter()
            .map(|d| d as u32)
            .collect();
        while ds.last() == Some(&0) {
            ds.pop();
        }
        ds
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ram2() -> Ring {
        Ring::new(RingSpec::dyadic(1, 2, Some(vec![Coeff::Int(0), Coeff::Int(1)]), 40)).unwrap()
    }

    #[test]
    fn pi_squared_is_minus_two() {
        let r = ram2();
        let pi = r.pi();
        assert_eq!(r.mul(&pi, &pi), r.from_i64(-2));
        assert_eq!(r.ord(&r.from_i64(2)), 2);
        assert_eq!(r.ord(&pi), 1);
    }

    #[test]
    fn units_invert() {
        let r = Ring::z2(6);
        assert_eq!(r.inv(&r.from_i64(3)).unwrap(), r.from_i64(43));
        assert!(r.inv(&r.from_i64(2)).is_err());
        let r4 = Ring::new(RingSpec::dyadic(2, 1, None, 30)).unwrap();
        let mut x = r4.from_i64(5);
        x.0[1] = 6;
        let y = r4.inv(&x).unwrap();
        assert_eq!(r4.mul(&x, &y), r4.one());
    }

    #[test]
    fn exact_division() {
        let r = ram2();
        let a = r.mul(&r.from_i64(12), &r.pi());
        let q = r.div_pi_pow(&a, 5).unwrap();
        assert_eq!(r.mul(&q, &r.pi_pow(5)), a);
        assert!(r.div_pi_pow(&r.pi(), 2).is_err());
    }

    #[test]
    fn digits_roundtrip() {
        let r = ram2();
        let a = r.add(&r.from_i64(11), &r.pi_pow(3));
        let ds = r.to_digits(&a, 20);
        assert_eq!(r.from_digits(&ds), r.reduce(&a, 20));
        assert!(r.sub(&a, &r.from_digits(&ds)).0.iter().all(|&c| c % (1 << 10) == 0));
    }

    #[test]
    fn odd_prime() {
        let r = Ring::zp(3, 20);
        assert_eq!(r.ord(&r.from_i64(18)), 2);
        let x = r.inv(&r.from_i64(2)).unwrap();
        assert_eq!(r.mul(&x, &r.from_i64(2)), r.one());
        assert_eq!(r.digit(&r.from_i64(18), 2), 2);
    }
}
