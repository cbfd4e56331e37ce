use super::{Elem, Ring, RingError};

/// A nonzero element of the fraction field, `pi^v * u` with `u` a unit.
/// `None` stands for zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FElem(pub Option<(i64, Elem)>);

impl FElem {
    pub fn zero() -> FElem {
        FElem(None)
    }
    pub fn is_zero(&self) -> bool {
        self.0.is_none()
    }
    pub fn val(&self) -> Option<i64> {
        self.0.map(|(v, _)| v)
    }
}

impl Ring {
    pub fn felem(&self, a: &Elem) -> FElem {
        match self.unit_part(a) {
            Ok((v, u)) => FElem(Some((v as i64, u))),
            Err(_) => FElem(None),
        }
    }

    /// `pi^v * a`; `v` may be negative.
    pub fn felem_scaled(&self, a: &Elem, v: i64) -> FElem {
        match self.felem(a).0 {
            None => FElem(None),
            Some((w, u)) => FElem(Some((w + v, u))),
        }
    }

    /// Back to the ring; fails if the valuation is negative.
    pub fn felem_to_elem(&self, x: &FElem) -> Result<Elem, RingError> {
        match x.0 {
            None => Ok(self.zero()),
            Some((v, _)) if v < 0 => Err(RingError::NotDivisible),
            Some((v, u)) => Ok(self.mul(&u, &self.pi_pow(v as u32))),
        }
    }

    pub fn fmul(&self, a: &FElem, b: &FElem) -> FElem {
        match (a.0, b.0) {
            (Some((va, ua)), Some((vb, ub))) => FElem(Some((va + vb, self.mul(&ua, &ub)))),
            _ => FElem(None),
        }
    }

    pub fn finv(&self, a: &FElem) -> Result<FElem, RingError> {
        match a.0 {
            None => Err(RingError::Zero),
            Some((v, u)) => Ok(FElem(Some((-v, self.inv(&u)?)))),
        }
    }

    pub fn fneg(&self, a: &FElem) -> FElem {
        FElem(a.0.map(|(v, u)| (v, self.neg(&u))))
    }

    pub fn fadd(&self, a: &FElem, b: &FElem) -> FElem {
        let (Some((va, ua)), Some((vb, ub))) = (a.0, b.0) else {
            return if a.is_zero() { *b } else { *a };
        };
        let (v, x, y, d) = if va <= vb { (va, ua, ub, vb - va) } else { (vb, ub, ua, va - vb) };
        if d >= self.prec() as i64 {
            return FElem(Some((v, x)));
        }
        let s = self.add(&x, &self.mul(&y, &self.pi_pow(d as u32)));
        match self.unit_part(&s) {
            Ok((w, u)) => FElem(Some((v + w as i64, u))),
            Err(_) => FElem(None),
        }
    }

    pub fn fsub(&self, a: &FElem, b: &FElem) -> FElem {
        self.fadd(a, &self.fneg(b))
    }

    /// A ring element in the same square class (`pi^{v mod 2} u`).
    pub fn square_class_rep(&self, a: &FElem) -> Result<Elem, RingError> {
        match a.0 {
            None => Err(RingError::Zero),
            Some((v, u)) => Ok(if v.rem_euclid(2) == 1 { self.mul(&u, &self.pi()) } else { u }),
        }
    }
}
