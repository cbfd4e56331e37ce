//! Binary forms: the rank 2 closed form and the tables for the norm-form
//! lattices `(o_{E,f}, N)` of a quadratic algebra `E/F`.

use serde::{Deserialize, Serialize};

use super::egk::EGKDatum;
use super::search::certify_known;
use super::{delta, is_reduced, Certificate, GKDatum, GkError, Involution};
use crate::lattice::{HalfIntMat, Mat};
use crate::ring::{Coeff, Ring, RingSpec};

/// GK of a rank 1 or 2 form from its norm and discriminant.
pub fn gk_binary_closed(b: &HalfIntMat) -> Result<Vec<i64>, GkError> {
    match b.n() {
        1 => Ok(vec![b.ord_diag(0)]),
        2 => {
            let a1 = b.ord_diag(0).min(b.ord_diag(1)).min(b.ord_off(0, 1));
            Ok(vec![a1, delta(b)? - a1])
        }
        n => Err(GkError::InvalidParams(format!("binary closed form needs rank <= 2, got {n}"))),
    }
}

pub fn gk_binary(b: &HalfIntMat) -> Result<GKDatum, GkError> {
    if !b.is_nondegenerate() {
        return Err(crate::lattice::LatticeError::Degenerate.into());
    }
    let seq = gk_binary_closed(b)?;
    let r = b.ring();
    let certificate = if b.n() == 1 {
        Some(Certificate { form: b.clone(), sigma: Involution::identity(1), u: Mat::identity(r, 1) })
    } else {
        certify_known(b, &seq, 200_000)
    };
    Ok(GKDatum { seq, certified: true, certificate })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BinaryKind {
    /// `xi = 1` is the split algebra `F x F`, `xi = -1` the unramified field.
    Unramified { xi: i8 },
    /// Ramified with discriminant order `d = 2g`, `1 <= g <= e`.
    RamifiedEven { g: u32 },
    /// Ramified with `d = 2e + 1`.
    RamifiedOdd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryParams {
    pub kind: BinaryKind,
    /// ramification index of `F/Q_2`
    pub e: u32,
    /// conductor exponent
    pub f: u32,
}

/// Paired GK sequence with its admissible involution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GkType {
    pub a: Vec<i64>,
    pub sigma: Involution,
}

impl BinaryParams {
    pub fn new(kind: BinaryKind, e: u32, f: u32) -> Result<BinaryParams, GkError> {
        let p = BinaryParams { kind, e, f };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), GkError> {
        if self.e == 0 {
            return Err(GkError::InvalidParams("e must be positive".into()));
        }
        match self.kind {
            BinaryKind::Unramified { xi } if xi != 1 && xi != -1 => {
                Err(GkError::InvalidParams("xi must be 1 or -1".into()))
            }
            BinaryKind::RamifiedEven { g } if g == 0 || g > self.e => {
                Err(GkError::InvalidParams(format!("need 1 <= g <= e, got g = {g}")))
            }
            _ => Ok(()),
        }
    }

    /// Every kind available at ramification `e`.
    pub fn kinds(e: u32) -> Vec<BinaryKind> {
        let mut v = vec![BinaryKind::Unramified { xi: 1 }, BinaryKind::Unramified { xi: -1 }];
        v.extend((1..=e).map(|g| BinaryKind::RamifiedEven { g }));
        v.push(BinaryKind::RamifiedOdd);
        v
    }

    /// Order of the relative discriminant of `E/F`.
    pub fn d(&self) -> u32 {
        match self.kind {
            BinaryKind::Unramified { .. } => 0,
            BinaryKind::RamifiedEven { g } => 2 * g,
            BinaryKind::RamifiedOdd => 2 * self.e + 1,
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            BinaryKind::Unramified { xi: 1 } => format!("split e={} f={}", self.e, self.f),
            BinaryKind::Unramified { .. } => format!("unramified e={} f={}", self.e, self.f),
            BinaryKind::RamifiedEven { g } => format!("ramified d={} e={} f={}", 2 * g, self.e, self.f),
            BinaryKind::RamifiedOdd => format!("ramified d={} e={} f={}", 2 * self.e + 1, self.e, self.f),
        }
    }

    /// `GK(L + (-L))` together with a reduced-form type realizing it.
    pub fn double_type(&self) -> GkType {
        let (e, f) = (self.e as i64, self.f as i64);
        let s1234 = Involution::from_pairs(4, &[(0, 1), (2, 3)]);
        let s1423 = Involution::from_pairs(4, &[(0, 3), (1, 2)]);
        let s1324 = Involution::from_pairs(4, &[(0, 2), (1, 3)]);
        let (a, sigma) = match self.kind {
            BinaryKind::Unramified { .. } => {
                if f == 0 {
                    (vec![0, 0, 0, 0], s1234)
                } else if f < 2 * e {
                    (vec![0, f, f, 2 * f], s1423)
                } else {
                    (vec![0, 2 * e, 2 * f - 2 * e, 2 * f], s1234)
                }
            }
            BinaryKind::RamifiedEven { g } => {
                let g = g as i64;
                if f < g {
                    (vec![0, 2 * f + 1, 2 * g - 1, 2 * g + 2 * f], s1423)
                } else if f < 2 * e - g {
                    (vec![0, g + f, g + f, 2 * g + 2 * f], s1423)
                } else {
                    (vec![0, 2 * e, 2 * g + 2 * f - 2 * e, 2 * g + 2 * f], s1234)
                }
            }
            BinaryKind::RamifiedOdd => {
                if f < e {
                    (vec![0, 2 * f + 1, 2 * e, 2 * e + 2 * f + 1], s1324)
                } else {
                    (vec![0, 2 * e, 2 * f + 1, 2 * e + 2 * f + 1], s1234)
                }
            }
        };
        GkType { a, sigma }
    }

    pub fn gk_double(&self) -> Vec<i64> {
        self.double_type().a
    }

    /// Scales of the nonzero Jordan constituents of `L`.
    pub fn jor(&self) -> Vec<i64> {
        let (e, f) = (self.e as i64, self.f as i64);
        let (indecomposable_below, shift) = match self.kind {
            BinaryKind::Unramified { .. } => (e, 0),
            BinaryKind::RamifiedEven { g } => (e - g as i64, g as i64),
            BinaryKind::RamifiedOdd => return vec![0, 2 * f + 1],
        };
        if f < indecomposable_below {
            vec![f + shift - e]
        } else {
            let top = 2 * f + 2 * shift - 2 * e;
            if top == 0 {
                vec![0]
            } else {
                vec![0, top]
            }
        }
    }

    /// `GK(L cap pi^i L^#)`, the same for every `i` in `jor()`.
    pub fn gk_ai(&self) -> Vec<i64> {
        let (e, f) = (self.e as i64, self.f as i64);
        match self.kind {
            BinaryKind::Unramified { .. } if f < e => vec![e - f, e + f],
            BinaryKind::Unramified { .. } => vec![0, 2 * f],
            BinaryKind::RamifiedEven { g } if f < e - g as i64 => {
                let g = g as i64;
                vec![e - g - f, e - g + f + 1]
            }
            _ => vec![0, 2 * f + 1],
        }
    }

    /// `EGK(L cap pi^i L^#)^{<=1}` for `i` in `jor()`.
    pub fn egk_trunc(&self) -> EGKDatum {
        let (e, f) = (self.e as i64, self.f as i64);
        let one = |n: usize, m: i64, z: i8| EGKDatum::new(vec![(n, m, z)]);
        match self.kind {
            BinaryKind::Unramified { xi } => {
                if f == 0 && e == 1 {
                    one(2, 1, xi)
                } else if f < e - 1 {
                    EGKDatum::empty()
                } else if f == e - 1 {
                    one(1, 1, 1)
                } else {
                    one(1, 0, 1)
                }
            }
            BinaryKind::RamifiedEven { g } => {
                let g = g as i64;
                if f < e - g - 1 {
                    EGKDatum::empty()
                } else if f == e - g - 1 {
                    one(1, 1, 1)
                } else if g == e && f == 0 {
                    EGKDatum::new(vec![(1, 0, 1), (1, 1, 0)])
                } else {
                    one(1, 0, 1)
                }
            }
            BinaryKind::RamifiedOdd => {
                if f == 0 {
                    EGKDatum::new(vec![(1, 0, 1), (1, 1, 0)])
                } else {
                    one(1, 0, 1)
                }
            }
        }
    }

    /// A ring of ramification `e` and residue degree `res_deg` (`pi^e = -2`,
    /// or `pi = 2` when `e = 1`) with enough precision for these lattices.
    pub fn ring(&self, res_deg: u32) -> Result<Ring, GkError> {
        let e = self.e;
        let want = 2 * (4 * e + 4 * self.f + 4) + 2 * e + 8;
        let prec = want.min(62 * e).max(2 * e + 4);
        let eis = if e == 1 {
            None
        } else {
            let mut v = vec![Coeff::Int(0); e as usize];
            v[e as usize - 1] = Coeff::Int(1);
            Some(v)
        };
        Ok(Ring::new(RingSpec::dyadic(res_deg, e, eis, prec))?)
    }

    /// The norm form of `o + pi^f o_E` in the basis `{1, pi^f w}`.
    pub fn matrix(&self, r: &Ring) -> Result<HalfIntMat, GkError> {
        if r.e() as u32 != self.e || !r.is_dyadic() {
            return Err(GkError::InvalidParams("ring does not match the parameters".into()));
        }
        let e = self.e;
        let f = self.f;
        let two = r.from_i64(2);
        let mut t = Mat::zero(r, 2);
        t.set(0, 0, two);
        match self.kind {
            BinaryKind::Unramified { xi } => {
                // w^2 - w + u = 0, u = 0 (split) or of trace 1 (field)
                let k = r.field();
                let u = if xi == 1 {
                    r.zero()
                } else {
                    r.lift(k.elements().find(|&x| k.trace(x) == 1).expect("trace one element"))
                };
                let pf = r.pi_pow(f);
                t.set(0, 1, pf);
                t.set(1, 0, pf);
                t.set(1, 1, r.mul(&r.mul(&two, &u), &r.pi_pow(2 * f)));
            }
            BinaryKind::RamifiedEven { g } => {
                // w = pi^g (-1 + sqrt(eps)) / 2 with eps = 1 + pi^{2e-2g+1}
                let off = r.neg(&r.pi_pow(f + g));
                let num = r.neg(&r.pi_pow(2 * f + 2 * e + 1));
                t.set(0, 1, off);
                t.set(1, 0, off);
                t.set(1, 1, r.div_exact(&num, &two)?);
            }
            BinaryKind::RamifiedOdd => {
                t.set(1, 1, r.mul(&two, &r.pi_pow(2 * f + 1)));
            }
        }
        Ok(HalfIntMat::new(r, t)?)
    }

    /// Builds `L + (-L)`, moves it to the reduced form of `double_type()` and
    /// checks the result with the reduced-form predicate.
    pub fn double_witness(&self, r: &Ring) -> Result<Certificate, GkError> {
        let b = self.matrix(r)?;
        let w = b.direct_sum(&b.neg());
        let ty = self.double_type();
        let (e, f) = (self.e as i64, self.f as i64);
        let m = |rows: &[[i64; 4]]| Mat::from_i64(r, &rows.iter().map(|x| x.to_vec()).collect::<Vec<_>>());
        let fold = m(&[[1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 0], [0, 0, 0, 1]]);
        // diagonalize B by e2 -> e2 - (2b12/2b11) e1, then pair (x, -x) planes
        let diag_pairs = || -> Result<Mat, GkError> {
            let c = r.neg(&r.div_exact(b.t(0, 1), b.t(0, 0))?);
            let mut d = Mat::identity(r, 4);
            d.set(0, 1, c);
            d.set(2, 3, c);
            let p = Mat::permutation(r, &[0, 2, 1, 3]);
            let h = m(&[[1, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 1], [0, 0, 0, 1]]);
            Ok(d.mul(r, &p).mul(r, &h))
        };
        let u = match self.kind {
            BinaryKind::Unramified { .. } if f == 0 => Mat::identity(r, 4),
            BinaryKind::Unramified { .. } if f < 2 * e => fold,
            BinaryKind::RamifiedEven { g } if f < 2 * e - g as i64 => {
                let fix = m(&[[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, -1, 0, 1]]);
                fold.mul(r, &fix)
            }
            BinaryKind::RamifiedOdd if f < e => fold,
            _ => diag_pairs()?,
        };
        let form = w.congruence(&u)?;
        if !is_reduced(&form, &ty.a, &ty.sigma)? {
            return Err(GkError::Inconsistent(format!("witness for {} is not reduced", self.label())));
        }
        Ok(Certificate { form, sigma: ty.sigma, u })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let r = Ring::z2(40);
        assert_eq!(gk_binary_closed(&HalfIntMat::diag_i64(&r, &[1, 3])).unwrap(), vec![0, 2]);
        assert_eq!(gk_binary_closed(&HalfIntMat::diag_i64(&r, &[1, 1])).unwrap(), vec![0, 1]);
        assert_eq!(gk_binary_closed(&HalfIntMat::hyperbolic(&r)).unwrap(), vec![1, 1]);
        let h = HalfIntMat::from_doubled(&r, &[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(gk_binary_closed(&h).unwrap(), vec![0, 0]);
        let b = HalfIntMat::from_doubled(&r, &[vec![4, 2], vec![2, 4]]).unwrap();
        assert_eq!(gk_binary_closed(&b).unwrap(), vec![1, 1]);
    }

    #[test]
    fn binary_search_certifies() {
        let r = Ring::z2(40);
        for b in [
            HalfIntMat::diag_i64(&r, &[1, 3]),
            HalfIntMat::diag_i64(&r, &[1, 1]),
            HalfIntMat::diag_i64(&r, &[3, 12]),
            HalfIntMat::from_doubled(&r, &[vec![2, 3], vec![3, 10]]).unwrap(),
        ] {
            let d = gk_binary(&b).unwrap();
            assert!(d.certificate.is_some(), "{b:?}");
        }
    }

    #[test]
    fn example_rows() {
        let l = BinaryParams::new(BinaryKind::RamifiedEven { g: 1 }, 5, 2).unwrap();
        let l2 = BinaryParams::new(BinaryKind::RamifiedEven { g: 2 }, 5, 1).unwrap();
        assert_eq!(l.gk_double(), vec![0, 3, 3, 6]);
        assert_eq!(l2.gk_double(), vec![0, 3, 3, 6]);
        assert_eq!(l.jor(), vec![-2]);
        assert_eq!(l2.jor(), vec![-2]);
        assert!(l.egk_trunc().is_empty() && l2.egk_trunc().is_empty());
        let u = BinaryParams::new(BinaryKind::Unramified { xi: -1 }, 1, 0).unwrap();
        assert_eq!(u.gk_double(), vec![0, 0, 0, 0]);
    }

    #[test]
    fn witnesses_reduce() {
        for e in 1..=2 {
            for kind in BinaryParams::kinds(e) {
                for f in 0..=4 {
                    let p = BinaryParams::new(kind, e, f).unwrap();
                    let r = p.ring(1).unwrap();
                    p.double_witness(&r).unwrap();
                }
            }
        }
    }

    #[test]
    fn matrices_have_the_right_discriminant() {
        for e in 1..=2 {
            for kind in BinaryParams::kinds(e) {
                for f in 0..=2 {
                    let p = BinaryParams::new(kind, e, f).unwrap();
                    let r = p.ring(1).unwrap();
                    let b = p.matrix(&r).unwrap();
                    let d = b.disc().unwrap();
                    let (v, u) = r.unit_part(&d).unwrap();
                    assert_eq!(v, 2 * f + p.d(), "{}", p.label());
                    let c = r.ext_type(&u).unwrap();
                    match kind {
                        BinaryKind::Unramified { xi } => assert_eq!(c.xi, xi),
                        BinaryKind::RamifiedEven { g } => assert_eq!(c.d, 2 * g),
                        BinaryKind::RamifiedOdd => assert_eq!(v % 2, 1),
                    }
                    assert_eq!(gk_binary_closed(&b).unwrap().iter().sum::<i64>(), delta(&b).unwrap());
                }
            }
        }
    }
}
