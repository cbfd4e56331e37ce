//! Squares, quadratic defect, discriminant classes and the Hilbert symbol.

use serde::{Deserialize, Serialize};

use super::{Elem, Fe, Ring, RingError};

/// Quadratic defect of a unit, reported as the order of `u - x^2` at the best `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Defect {
    Square,
    /// `2e`: `F(sqrt u)/F` is unramified quadratic.
    Unramified,
    /// odd order `< 2e`
    Odd(u32),
    /// argument of odd valuation (only reported by `ext_type`)
    OddValuation,
}

/// `(xi, d)` for a discriminant, `d` the order of the relative discriminant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadClass {
    pub xi: i8,
    pub d: u32,
    pub defect: Defect,
}

/// Odometer over digit tuples in `0..q`, least significant first.
pub(crate) fn next_digits(ds: &mut [Fe], q: usize) -> bool {
    for d in ds.iter_mut() {
        if (*d as usize) + 1 < q {
            *d += 1;
            return true;
        }
        *d = 0;
    }
    false
}

impl Ring {
    fn require_unit(&self, u: &Elem) -> Result<(), RingError> {
        if self.is_zero(u) {
            return Err(RingError::Zero);
        }
        if !self.is_unit(u) {
            return Err(RingError::NotUnit);
        }
        Ok(())
    }

    pub fn quadratic_defect(&self, u: &Elem) -> Result<Defect, RingError> {
        self.require_unit(u)?;
        let k = self.field();
        if !self.is_dyadic() {
            return Ok(if k.is_square(self.residue(u)) { Defect::Square } else { Defect::Unramified });
        }
        let e = self.e() as u32;
        if self.prec() < 2 * e + 4 {
            return Err(RingError::Precision("need at least 2e + 4 digits".into()));
        }
        let one = self.one();
        let s = self.lift(k.sqrt2(self.residue(u)));
        let mut w = self.mul(u, &self.inv(&self.mul(&s, &s))?);
        loop {
            let dlt = self.sub(&w, &one);
            let kk = self.ord(&dlt);
            if kk > 2 * e {
                return Ok(Defect::Square);
            }
            if kk < 2 * e {
                if kk % 2 == 1 {
                    return Ok(Defect::Odd(kk));
                }
                let s = k.sqrt2(self.digit(&dlt, kk));
                let x = self.add(&one, &self.mul(&self.lift(s), &self.pi_pow(kk / 2)));
                w = self.mul(&w, &self.inv(&self.mul(&x, &x))?);
                continue;
            }
            let r2 = self.rho2();
            let c = k.mul(self.digit(&dlt, kk), k.inv(k.mul(r2, r2)));
            return Ok(if k.trace(c) != 0 { Defect::Unramified } else { Defect::Square });
        }
    }

    /// Reference implementation: maximize `ord(u - x^2)` over units `x` modulo `pi^{2e+2}`.
    pub fn quadratic_defect_search(&self, u: &Elem) -> Result<Defect, RingError> {
        self.require_unit(u)?;
        let e = self.e() as u32;
        let m = (2 * e + 2) as usize;
        let q = self.q();
        let mut ds = vec![0 as Fe; m];
        let mut best = 0u32;
        loop {
            if ds[0] != 0 {
                let x = self.from_digits(&ds);
                let o = self.ord(&self.sub(u, &self.mul(&x, &x))).min(2 * e + 1);
                best = best.max(o);
                if best > 2 * e {
                    break;
                }
            }
            if !next_digits(&mut ds, q) {
                break;
            }
        }
        if !self.is_dyadic() {
            return Ok(if best > 0 { Defect::Square } else { Defect::Unramified });
        }
        Ok(if best > 2 * e {
            Defect::Square
        } else if best == 2 * e {
            Defect::Unramified
        } else {
            Defect::Odd(best)
        })
    }

    pub fn is_square(&self, a: &Elem) -> bool {
        if self.is_zero(a) {
            return true;
        }
        let (v, u) = self.unit_part(a).expect("nonzero");
        v % 2 == 0 && self.quadratic_defect(&u) == Ok(Defect::Square)
    }

    pub fn ext_type(&self, d: &Elem) -> Result<QuadClass, RingError> {
        if self.is_zero(d) {
            return Err(RingError::Zero);
        }
        let (v, u) = self.unit_part(d)?;
        let e = if self.is_dyadic() { self.e() as u32 } else { 0 };
        if self.prec() <= v + 2 * e + 4 && self.is_dyadic() {
            return Err(RingError::Precision(format!("ord(D) = {v} too large for precision {}", self.prec())));
        }
        if v % 2 == 1 {
            return Ok(QuadClass { xi: 0, d: 2 * e + 1, defect: Defect::OddValuation });
        }
        let defect = self.quadratic_defect(&u)?;
        let (xi, dd) = match defect {
            Defect::Square => (1, 0),
            Defect::Unramified => (-1, 0),
            Defect::Odd(k) => (0, 2 * e - k + 1),
            Defect::OddValuation => unreachable!(),
        };
        Ok(QuadClass { xi, d: dd, defect })
    }

    /// Quadratic Hilbert symbol `<a, b>`.
    pub fn hilbert_symbol(&self, a: &Elem, b: &Elem) -> Result<i8, RingError> {
        if self.is_zero(a) || self.is_zero(b) {
            return Err(RingError::Zero);
        }
        let (va, ua) = self.unit_part(a)?;
        let (vb, ub) = self.unit_part(b)?;
        if !self.is_dyadic() {
            let p = self.p() as i64;
            let k = self.field();
            let leg = |u: &Elem| if k.is_square(self.residue(u)) { 1i64 } else { -1 };
            let mut s = 1i64;
            if va % 2 == 1 && vb % 2 == 1 && ((p - 1) / 2) % 2 == 1 {
                s = -s;
            }
            if vb % 2 == 1 {
                s *= leg(&ua);
            }
            if va % 2 == 1 {
                s *= leg(&ub);
            }
            return Ok(s as i8);
        }
        let pi = self.pi();
        let a = if va % 2 == 1 { self.mul(&ua, &pi) } else { ua };
        let b = if vb % 2 == 1 { self.mul(&ub, &pi) } else { ub };
        let mab = self.neg(&self.mul(&a, &b));
        if self.is_square(&a) || self.is_square(&b) || self.is_square(&mab) {
            return Ok(1);
        }
        // z^2 = a x^2 + b y^2 primitively: either y = 1, or y in p and x = 1.
        // Neither value can vanish, and their orders stay <= 2e + 1, so
        // x mod pi^{3e+2} fixes the square class.
        let e = self.e() as u32;
        let m = (3 * e + 2) as usize;
        let q = self.q();
        let mut ds = vec![0 as Fe; m];
        loop {
            let t = self.from_digits(&ds);
            let t2 = self.mul(&t, &t);
            if self.is_square(&self.add(&self.mul(&a, &t2), &b)) {
                return Ok(1);
            }
            if ds[0] == 0 && self.is_square(&self.add(&a, &self.mul(&b, &t2))) {
                return Ok(1);
            }
            if !next_digits(&mut ds, q) {
                break;
            }
        }
        Ok(-1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{Coeff, RingSpec};

    #[test]
    fn defects_over_z2() {
        let r = Ring::z2(20);
        assert_eq!(r.quadratic_defect(&r.from_i64(1)), Ok(Defect::Square));
        assert_eq!(r.quadratic_defect(&r.from_i64(5)), Ok(Defect::Unramified));
        assert_eq!(r.quadratic_defect(&r.from_i64(3)), Ok(Defect::Odd(1)));
        assert_eq!(r.quadratic_defect(&r.from_i64(17)), Ok(Defect::Square));
        for u in (1..64).step_by(2) {
            let x = r.from_i64(u);
            assert_eq!(r.quadratic_defect(&x), r.quadratic_defect_search(&x), "u = {u}");
        }
    }

    #[test]
    fn ext_types() {
        let r = Ring::z2(20);
        let c = |n: i64| {
            let q = r.ext_type(&r.from_i64(n)).unwrap();
            (q.xi, q.d)
        };
        assert_eq!(c(1), (1, 0));
        assert_eq!(c(2), (0, 3));
        assert_eq!(c(-3), (-1, 0));
        assert_eq!(c(3), (0, 2));
        assert_eq!(c(-1), (0, 2));
    }

    #[test]
    fn hilbert_z2() {
        let r = Ring::z2(20);
        let h = |a: i64, b: i64| r.hilbert_symbol(&r.from_i64(a), &r.from_i64(b)).unwrap();
        assert_eq!(h(2, 5), -1);
        assert_eq!(h(-1, -1), -1);
        assert_eq!(h(2, 3), -1);
        assert_eq!(h(3, 3), -1);
        assert_eq!(h(2, 7), 1);
        assert_eq!(h(5, 5), 1);
    }

    #[test]
    fn ramified_defects_match_search() {
        let r = Ring::new(RingSpec::dyadic(1, 2, Some(vec![Coeff::Int(0), Coeff::Int(1)]), 24)).unwrap();
        let mut ds = vec![0 as Fe; 7];
        loop {
            if ds[0] != 0 {
                let u = r.from_digits(&ds);
                assert_eq!(r.quadratic_defect(&u), r.quadratic_defect_search(&u));
            }
            if !next_digits(&mut ds, 2) {
                break;
            }
        }
    }
}
