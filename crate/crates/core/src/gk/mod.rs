//! Gross-Keating invariants, admissible involutions and reduced forms.

pub mod binary;
pub mod double;
pub mod egk;
pub mod search;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{HalfIntMat, LatticeError, Mat};
use crate::ring::RingError;

pub use binary::{gk_binary, gk_binary_closed, BinaryKind, BinaryParams, GkType};
pub use double::{gk_double, gk_double_sigma, profile_of, recover_profile, recover_profile_unpaired, ScaleProfile};
pub use egk::{egk, egk_of, egk_of_optimal, egk_trunc, egk_trunc_closed, eta, xi, EGKDatum};
pub use search::{gk, gk_odd_p, gk_search, SearchOptions};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GkError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("search budget exhausted without a certificate")]
    Budget,
    #[error("invalid GK type: {0}")]
    Malformed(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

/// Proof of optimality: `form = B[u]` is reduced of type `(seq, sigma)`.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub form: HalfIntMat,
    pub sigma: Involution,
    pub u: Mat,
}

impl Certificate {
    /// Recheck the certificate against `b` and the claimed sequence.
    pub fn verify(&self, b: &HalfIntMat, seq: &[i64]) -> bool {
        let r = b.ring();
        self.u.is_unimodular(r)
            && b.transform(&self.u) == self.form
            && is_reduced(&self.form, seq, &self.sigma).unwrap_or(false)
    }
}

#[derive(Clone, Debug)]
pub struct GKDatum {
    pub seq: Vec<i64>,
    pub certified: bool,
    pub certificate: Option<Certificate>,
}

impl GKDatum {
    pub fn sum(&self) -> i64 {
        self.seq.iter().sum()
    }
}

impl PartialEq for GKDatum {
    fn eq(&self, o: &GKDatum) -> bool {
        self.seq == o.seq
    }
}

/// A self-inverse permutation of `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Involution(pub Vec<usize>);

impl Involution {
    pub fn identity(n: usize) -> Involution {
        Involution((0..n).collect())
    }
    /// From 0-based transpositions.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Involution {
        let mut p: Vec<usize> = (0..n).collect();
        for &(a, b) in pairs {
            p[a] = b;
            p[b] = a;
        }
        Involution(p)
    }
    pub fn n(&self) -> usize {
        self.0.len()
    }
    pub fn is_involution(&self) -> bool {
        let n = self.n();
        self.0.iter().all(|&j| j < n) && (0..n).all(|i| self.0[self.0[i]] == i)
    }
    pub fn fixed(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.0[i] == i).collect()
    }
    /// Relabel through a permutation: position `k` of the new order is old `perm[k]`.
    pub fn conjugate(&self, perm: &[usize]) -> Involution {
        let n = self.n();
        let mut inv = vec![0; n];
        for (k, &p) in perm.iter().enumerate() {
            inv[p] = k;
        }
        Involution((0..n).map(|k| inv[self.0[perm[k]]]).collect())
    }
    /// Disjoint union: `other` acts on indices shifted by `self.n()`.
    pub fn union(&self, other: &Involution) -> Involution {
        let n = self.n();
        let mut v = self.0.clone();
        v.extend(other.0.iter().map(|&j| j + n));
        Involution(v)
    }
}

impl fmt::Display for Involution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for i in 0..self.n() {
            let j = self.0[i];
            if j > i {
                write!(f, "({}{})", i + 1, j + 1)?;
                any = true;
            }
        }
        if !any {
            write!(f, "id")?;
        }
        Ok(())
    }
}

/// Block structure of a non-decreasing sequence: `(n_s, m_s)`.
pub fn blocks(a: &[i64]) -> Vec<(usize, i64)> {
    let mut out: Vec<(usize, i64)> = Vec::new();
    for &x in a {
        match out.last_mut() {
            Some((c, m)) if *m == x => *c += 1,
            _ => out.push((1, x)),
        }
    }
    out
}

/// Block index `s` of each position.
fn block_of(a: &[i64]) -> Vec<usize> {
    let mut s = 0;
    (0..a.len())
        .map(|i| {
            if i > 0 && a[i] != a[i - 1] {
                s += 1;
            }
            s
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PClass {
    Zero,
    Plus,
    Minus,
    Equal,
}

fn classify(a: &[i64], sigma: &Involution, i: usize) -> PClass {
    let j = sigma.0[i];
    if j == i {
        PClass::Zero
    } else if a[i] > a[j] {
        PClass::Plus
    } else if a[i] < a[j] {
        PClass::Minus
    } else {
        PClass::Equal
    }
}

/// Whether `sigma` is `a`-admissible.
pub fn is_admissible(a: &[i64], sigma: &Involution) -> bool {
    let n = a.len();
    if sigma.n() != n || !sigma.is_involution() || a.windows(2).any(|w| w[0] > w[1]) {
        return false;
    }
    let cls: Vec<PClass> = (0..n).map(|i| classify(a, sigma, i)).collect();
    let p0: Vec<usize> = (0..n).filter(|&i| cls[i] == PClass::Zero).collect();
    if p0.len() > 2 {
        return false;
    }
    if p0.len() == 2 && (a[p0[0]] - a[p0[1]]).rem_euclid(2) == 0 {
        return false;
    }
    for &i in &p0 {
        let mx = (0..n)
            .filter(|&j| matches!(cls[j], PClass::Zero | PClass::Plus) && (a[j] - a[i]).rem_euclid(2) == 0)
            .map(|j| a[j])
            .max();
        if mx != Some(a[i]) {
            return false;
        }
    }
    let bl = block_of(a);
    let nb = bl.last().map_or(0, |&s| s + 1);
    for s in 0..nb {
        let plus = (0..n).filter(|&i| bl[i] == s && cls[i] == PClass::Plus).count();
        let mz = (0..n).filter(|&i| bl[i] == s && matches!(cls[i], PClass::Minus | PClass::Zero)).count();
        if plus > 1 || mz > 1 {
            return false;
        }
    }
    for i in 0..n {
        let j = sigma.0[i];
        match cls[i] {
            PClass::Minus => {
                let mn = (0..n)
                    .filter(|&k| cls[k] == PClass::Plus && a[k] > a[i] && (a[k] - a[i]).rem_euclid(2) == 0)
                    .map(|k| a[k])
                    .min();
                if mn != Some(a[j]) {
                    return false;
                }
            }
            PClass::Plus => {
                let mx = (0..n)
                    .filter(|&k| cls[k] == PClass::Minus && a[k] < a[i] && (a[k] - a[i]).rem_euclid(2) == 0)
                    .map(|k| a[k])
                    .max();
                if mx != Some(a[j]) {
                    return false;
                }
            }
            _ => {}
        }
    }
    true
}

/// All involutions of `0..n`.
pub fn all_involutions(n: usize) -> Vec<Involution> {
    fn rec(p: &mut Vec<usize>, i: usize, out: &mut Vec<Involution>) {
        let n = p.len();
        if i == n {
            out.push(Involution(p.clone()));
            return;
        }
        if p[i] != usize::MAX {
            return rec(p, i + 1, out);
        }
        p[i] = i;
        rec(p, i + 1, out);
        for j in i + 1..n {
            if p[j] == usize::MAX {
                p[i] = j;
                p[j] = i;
                rec(p, i + 1, out);
                p[j] = usize::MAX;
            }
        }
        p[i] = usize::MAX;
    }
    let mut out = Vec::new();
    rec(&mut vec![usize::MAX; n], 0, &mut out);
    out
}

pub fn admissible_involutions(a: &[i64]) -> Vec<Involution> {
    all_involutions(a.len()).into_iter().filter(|s| is_admissible(a, s)).collect()
}

/// `(#P+ cap I_s, #P- cap I_s, #P0 cap I_s)` for each block; equal for equivalent involutions.
pub fn involution_class(a: &[i64], sigma: &Involution) -> Vec<(usize, usize, usize)> {
    let bl = block_of(a);
    let nb = bl.last().map_or(0, |&s| s + 1);
    (0..nb)
        .map(|s| {
            let idx: Vec<usize> = (0..a.len()).filter(|&i| bl[i] == s).collect();
            let c = |k: PClass| idx.iter().filter(|&&i| classify(a, sigma, i) == k).count();
            (c(PClass::Plus), c(PClass::Minus), c(PClass::Zero))
        })
        .collect()
}

/// Whether `a` lies in `S(B)`.
pub fn in_s(b: &HalfIntMat, a: &[i64]) -> bool {
    let n = b.n();
    if a.len() != n || a.windows(2).any(|w| w[0] > w[1]) || a.iter().any(|&x| x < 0) {
        return false;
    }
    for i in 0..n {
        if b.ord_diag(i) < a[i] {
            return false;
        }
        for j in i + 1..n {
            if 2 * b.ord_off(i, j) < a[i] + a[j] {
                return false;
            }
        }
    }
    true
}

/// Lexicographically greatest element of `S(B)` for `B` as given.
pub fn max_s(b: &HalfIntMat) -> Vec<i64> {
    let n = b.n();
    let cap = b.inf();
    let mut a: Vec<i64> = Vec::with_capacity(n);
    for k in 0..n {
        let mut v = cap;
        for j in k..n {
            v = v.min(b.ord_diag(j));
            for l in j + 1..n {
                v = v.min(b.ord_off(j, l));
            }
            for (i, &ai) in a.iter().enumerate() {
                v = v.min(2 * b.ord_off(i, j) - ai);
            }
        }
        a.push(v.max(0));
    }
    a
}

/// Number of violated reduced-form clauses (0 iff reduced of type `(a, sigma)`).
pub fn reduced_violations(b: &HalfIntMat, a: &[i64], sigma: &Involution) -> usize {
    let n = b.n();
    let mut bad = 0;
    for i in 0..n {
        let j = sigma.0[i];
        if j == i {
            bad += (b.ord_diag(i) != a[i]) as usize;
        } else {
            if 2 * b.ord_off(i, j) != a[i] + a[j] && i < j {
                bad += 1;
            }
            if a[i] < a[j] && b.ord_diag(i) != a[i] {
                bad += 1;
            }
        }
        for k in i + 1..n {
            if k != j && 2 * b.ord_off(i, k) <= a[i] + a[k] {
                bad += 1;
            }
        }
    }
    bad
}

pub fn is_reduced(b: &HalfIntMat, a: &[i64], sigma: &Involution) -> Result<bool, GkError> {
    if a.len() != b.n() || sigma.n() != b.n() {
        return Err(GkError::Malformed("length mismatch".into()));
    }
    if !is_admissible(a, sigma) {
        return Err(GkError::Malformed(format!("{sigma} is not admissible for {a:?}")));
    }
    Ok(in_s(b, a) && reduced_violations(b, a, sigma) == 0)
}

/// `Delta(B)`.
pub fn delta(b: &HalfIntMat) -> Result<i64, GkError> {
    let r = b.ring();
    let d = b.disc()?;
    let o = r.ord(&d) as i64;
    if b.n() % 2 == 1 {
        return Ok(o);
    }
    let c = r.ext_type(&d)?;
    Ok(o - c.d as i64 + 1 - (c.xi as i64).pow(2))
}
