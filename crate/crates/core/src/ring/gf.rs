//! Finite residue fields GF(p^f), table driven.
//!
//! Elements are small integers in `0..q`. In characteristic 2 the integer is
//! the bit pattern of a polynomial in `x` reduced modulo the defining
//! polynomial; for odd `p` only prime fields are supported.

use std::fmt;

pub type Fe = u16;

#[derive(Clone)]
pub struct Field {
    p: u32,
    f: u32,
    q: usize,
    /// Low bits of the defining polynomial x^f + ... (characteristic 2 only).
    modpoly: u32,
    add: Vec<Fe>,
    mul: Vec<Fe>,
    inv: Vec<Fe>,
    neg: Vec<Fe>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.p, self.f)
    }
}

fn poly2_mulmod(a: u32, b: u32, f: u32, modpoly: u32) -> u32 {
    let mut r = 0u32;
    let mut a = a;
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            r ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a >> f & 1 == 1 {
            a ^= (1 << f) | modpoly;
        }
    }
    r
}

fn poly2_rem(mut a: u64, b: u64) -> u64 {
    let db = 63 - b.leading_zeros();
    while a != 0 && 63 - a.leading_zeros() >= db {
        let da = 63 - a.leading_zeros();
        a ^= b << (da - db);
    }
    a
}

/// Smallest irreducible polynomial of degree `f` over GF(2), as its low bits.
pub fn irreducible_poly2(f: u32) -> u32 {
    if f == 1 {
        return 0;
    }
    'outer: for low in 1u32..(1 << f) {
        if low & 1 == 0 {
            continue;
        }
        let cand = (1u64 << f) | low as u64;
        for d in 1..=f / 2 {
            for lo in 0u64..(1 << d) {
                let div = (1u64 << d) | lo;
                if poly2_rem(cand, div) == 0 {
                    continue 'outer;
                }
            }
        }
        return low;
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl Field {
    pub fn new(p: u32, f: u32) -> Field {
        assert!(f >= 1);
        assert!(p == 2 || f == 1, "odd residue characteristic only with f = 1");
        let q = (p as usize).pow(f);
        assert!(q <= 256, "residue field too large");
        let modpoly = if p == 2 { irreducible_poly2(f) } else { 0 };
        let mut add = vec![0; q * q];
        let mut mul = vec![0; q * q];
        for a in 0..q {
            for b in 0..q {
                let (s, m) = if p == 2 {
                    ((a ^ b) as u32, poly2_mulmod(a as u32, b as u32, f, modpoly))
                } else {
                    (((a + b) % q) as u32, ((a * b) % q) as u32)
                };
                add[a * q + b] = s as Fe;
                mul[a * q + b] = m as Fe;
            }
        }
        let mut inv = vec![0; q];
        let mut neg = vec![0; q];
        for a in 0..q {
            for b in 0..q {
                if mul[a * q + b] == 1 {
                    inv[a] = b as Fe;
                }
                if add[a * q + b] == 0 {
                    neg[a] = b as Fe;
                }
            }
        }
        Field { p, f, q, modpoly, add, mul, inv, neg }
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn degree(&self) -> u32 {
        self.f
    }
    pub fn q(&self) -> usize {
        self.q
    }
    pub fn modpoly(&self) -> u32 {
        self.modpoly
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        self.add[a as usize * self.q + b as usize]
    }
    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg[b as usize])
    }
    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        self.mul[a as usize * self.q + b as usize]
    }
    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        self.neg[a as usize]
    }
    /// Inverse of a nonzero element (0 maps to 0).
    #[inline]
    pub fn inv(&self, a: Fe) -> Fe {
        self.inv[a as usize]
    }

    pub fn pow(&self, a: Fe, mut k: u64) -> Fe {
        let mut r: Fe = 1;
        let mut b = a;
        while k > 0 {
            if k & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            k >>= 1;
        }
        r
    }

    /// Square root in characteristic 2 (the inverse Frobenius).
    pub fn sqrt2(&self, a: Fe) -> Fe {
        debug_assert_eq!(self.p, 2);
        self.pow(a, 1u64 << (self.f - 1))
    }

    /// Absolute trace to the prime field.
    pub fn trace(&self, a: Fe) -> Fe {
        let mut t = 0;
        let mut x = a;
        for _ in 0..self.f {
            t = self.add(t, x);
            x = self.pow(x, self.p as u64);
        }
        t
    }

    pub fn is_square(&self, a: Fe) -> bool {
        if self.p == 2 || a == 0 {
            return true;
        }
        (0..self.q as Fe).any(|x| self.mul(x, x) == a)
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        0..self.q as Fe
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Field) -> bool {
        self.p == other.p && self.f == other.f
    }
}
impl Eq for Field {}

/// Row-reduce `rows` (each of length `ncols`) in place. Returns pivot columns.
pub fn row_reduce(k: &Field, rows: &mut [Vec<Fe>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(pr) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, pr);
        let iv = k.inv(rows[r][c]);
        for x in rows[r].iter_mut() {
            *x = k.mul(*x, iv);
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let fac = rows[i][c];
                for j in 0..rows[i].len() {
                    let t = k.mul(fac, rows[r][j]);
                    rows[i][j] = k.sub(rows[i][j], t);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of the null space {x : M x = 0} for an `nrows x ncols` matrix.
pub fn null_space(k: &Field, m: &[Vec<Fe>], ncols: usize) -> Vec<Vec<Fe>> {
    let mut rows: Vec<Vec<Fe>> = m.to_vec();
    let pivots = row_reduce(k, &mut rows, ncols);
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0; ncols];
        v[free] = 1;
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = k.neg(rows[r][free]);
        }
        basis.push(v);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf4_tables() {
        let k = Field::new(2, 2);
        assert_eq!(k.modpoly(), 0b11);
        for a in 1..4 {
            assert_eq!(k.mul(a, k.inv(a)), 1);
        }
        // x * x = x + 1
        assert_eq!(k.mul(2, 2), 3);
        assert_eq!(k.trace(1), 0);
        assert_eq!(k.trace(2), 1);
        for a in 0..4 {
            let s = k.sqrt2(a);
            assert_eq!(k.mul(s, s), a);
        }
    }

    #[test]
    fn irreducibles() {
        assert_eq!(irreducible_poly2(2), 0b11);
        assert_eq!(irreducible_poly2(3), 0b011);
        assert_eq!(irreducible_poly2(4), 0b0011);
    }

    #[test]
    fn gf3_basics() {
        let k = Field::new(3, 1);
        assert_eq!(k.neg(1), 2);
        assert_eq!(k.inv(2), 2);
        assert!(k.is_square(1));
        assert!(!k.is_square(2));
    }

    #[test]
    fn null_space_dims() {
        let k = Field::new(2, 1);
        let m = vec![vec![1, 1, 0], vec![0, 1, 1]];
        let ns = null_space(&k, &m, 3);
        assert_eq!(ns, vec![vec![1, 1, 1]]);
    }
}
