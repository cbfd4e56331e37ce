//! Solution counting for `A[X] = B` modulo `p^N`.
//!
//! Everything works on doubled matrices `T = 2B`. A residue matrix `X` is a
//! solution at level `k` when the doubled difference `X^t T_A X - T_B` has
//! off-diagonal entries in `p^k` and diagonal entries in `2 p^k`. That
//! condition only depends on `X` modulo `p^k`, which is what makes the
//! digit-by-digit search exact.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use super::DensityError;
use crate::lattice::{HalfIntMat, Mat};
use crate::ring::{Elem, Ring};


/// Hard cap on leaf visits for a single counting call.
pub const LEAF_CAP: u64 = 1 << 30;

/// Largest rank the counters accept.
pub const MAX_RANK: usize = 8;

fn check_inputs(b: &HalfIntMat, a: &HalfIntMat, level: u32) -> Result<(), DensityError> {
    if a.ring() != b.ring() {
        return Err(DensityError::RingMismatch);
    }
    if a.n() < b.n() {
        return Err(DensityError::Shape(format!("m = {} < n = {}", a.n(), b.n())));
    }
    if a.n() > MAX_RANK {
        return Err(DensityError::Shape(format!("rank {} above {MAX_RANK}", a.n())));
    }
    let r = b.ring();
    if level + r.v2() + 2 > r.prec() {
        return Err(DensityError::Precision(level));
    }
    Ok(())
}

/// Ring operations used by the counters. The generic version goes through
/// [`Ring`]; over `Z_2` plain wrapping `u64` arithmetic is exact modulo
/// `2^64`, far more than any level we count at.
trait Arith: Sync {
    type E: Copy + Send + Sync + Default;
    fn conv(&self, x: &Elem) -> Self::E;
    fn add(&self, a: Self::E, b: Self::E) -> Self::E;
    fn sub(&self, a: Self::E, b: Self::E) -> Self::E;
    fn mul(&self, a: Self::E, b: Self::E) -> Self::E;
    /// `ord(a) >= k`
    fn ord_at_least(&self, a: Self::E, k: u32) -> bool;
    /// `a / 2`, for `a` known to be even.
    fn half(&self, a: Self::E) -> Self::E;
    /// `a / pi^k`, for `ord(a) >= k`.
    fn shift(&self, a: Self::E, k: u32) -> Self::E;
    fn v2(&self) -> u32;
    fn q(&self) -> usize;
    /// `pi^j` times the lift of residue `d`.
    fn digit(&self, j: u32, d: u16) -> Self::E;

    fn dot(&self, x: &[Self::E], y: &[Self::E]) -> Self::E {
        let mut s = Self::E::default();
        for (u, v) in x.iter().zip(y) {
            s = self.add(s, self.mul(*u, *v));
        }
        s
    }
    fn mat_vec(&self, t: &[Vec<Self::E>], x: &[Self::E]) -> Vec<Self::E> {
        t.iter().map(|row| self.dot(row, x)).collect()
    }
}

struct Generic<'a>(&'a Ring);

impl Arith for Generic<'_> {
    type E = Elem;
    fn conv(&self, x: &Elem) -> Elem {
        *x
    }
    fn add(&self, a: Elem, b: Elem) -> Elem {
        self.0.add(&a, &b)
    }
    fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.0.sub(&a, &b)
    }
    fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.0.mul(&a, &b)
    }
    fn ord_at_least(&self, a: Elem, k: u32) -> bool {
        self.0.ord(&a) >= k
    }
    fn half(&self, a: Elem) -> Elem {
        self.0.div_exact(&a, &self.0.from_i64(2)).unwrap_or_default()
    }
    fn shift(&self, a: Elem, k: u32) -> Elem {
        self.0.div_pi_pow(&a, k).unwrap_or_default()
    }
    fn v2(&self) -> u32 {
        self.0.v2()
    }
    fn q(&self) -> usize {
        self.0.q()
    }
    fn digit(&self, j: u32, d: u16) -> Elem {
        self.0.mul(&self.0.pi_pow(j), &self.0.lift(d))
    }
}

struct Z2;

impl Arith for Z2 {
    type E = u64;
    fn conv(&self, x: &Elem) -> u64 {
        x.coeffs()[0]
    }
    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        a.wrapping_add(b)
    }
    #[inline]
    fn sub(&self, a: u64, b: u64) -> u64 {
        a.wrapping_sub(b)
    }
    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        a.wrapping_mul(b)
    }
    #[inline]
    fn ord_at_least(&self, a: u64, k: u32) -> bool {
        k == 0 || a.trailing_zeros() >= k
    }
    fn half(&self, a: u64) -> u64 {
        a >> 1
    }
    fn shift(&self, a: u64, k: u32) -> u64 {
        a >> k
    }
    fn v2(&self) -> u32 {
        1
    }
    fn q(&self) -> usize {
        2
    }
    fn digit(&self, j: u32, d: u16) -> u64 {
        (d as u64) << j
    }
}

fn is_z2(r: &Ring) -> bool {
    r.p() == 2 && r.e() == 1 && r.f() == 1 && r.prec() <= 64
}

/// Exhaustive count of `X mod p^N` with `A[X] = B` at level `N`.
pub fn count_naive(b: &HalfIntMat, a: &HalfIntMat, level: u32) -> Result<u64, DensityError> {
    check_inputs(b, a, level)?;
    let r = b.ring();
    let g = Generic(r);
    let (n, m) = (b.n(), a.n());
    let q = r.q() as u64;
    let digits = (m * n) as u32 * level;
    let total = q
        .checked_pow(digits)
        .filter(|&t| t <= LEAF_CAP)
        .ok_or(DensityError::Budget)?;
    let ta = rows_of(&g, a.doubled());
    let mut count = 0u64;
    for idx in 0..total {
        let mut rest = idx;
        let mut cols: Vec<Vec<Elem>> = vec![vec![r.zero(); m]; n];
        for col in cols.iter_mut() {
            for x in col.iter_mut() {
                for j in 0..level {
                    *x = g.add(*x, g.digit(j, (rest % q) as u16));
                    rest /= q;
                }
            }
        }
        let ys: Vec<Vec<Elem>> = cols.iter().map(|c| g.mat_vec(&ta, c)).collect();
        let ok = (0..n).all(|i| {
            (i..n).all(|k| {
                let d = g.sub(g.dot(&cols[i], &ys[k]), *b.t(i, k));
                level_ok(&g, d, i == k, level)
            })
        });
        if ok {
            count += 1;
        }
    }
    Ok(count)
}

fn rows_of<A: Arith>(ar: &A, t: &Mat) -> Vec<Vec<A::E>> {
    (0..t.n).map(|i| (0..t.n).map(|j| ar.conv(t.get(i, j))).collect()).collect()
}

#[inline]
fn level_ok<A: Arith>(ar: &A, d: A::E, diagonal: bool, level: u32) -> bool {
    ar.ord_at_least(d, if diagonal { level + ar.v2() } else { level })
}

/// Depth-first lifting over digit layers. At layer `j` the columns receive
/// their `p^j` digit one at a time and every Gram entry whose columns are
/// complete is checked at level `j + 1`.
struct Lifter<'a, A: Arith> {
    ar: &'a A,
    tb: Vec<Vec<A::E>>,
    n: usize,
    m: usize,
    depth: u32,
    /// Digit vectors of length `m`, scaled by `p^j`, per layer.
    offsets: Vec<Vec<Vec<A::E>>>,
    /// `T_A` applied to each offset.
    t_offsets: Vec<Vec<Vec<A::E>>>,
    visits: AtomicU64,
}

type Cols<E> = [[E; MAX_RANK]; MAX_RANK];

#[derive(Clone, Copy)]
struct State<E> {
    cols: Cols<E>,
    ys: Cols<E>,
}

impl<'a, A: Arith> Lifter<'a, A> {
    fn new(ar: &'a A, ta: &Mat, tb: &Mat, depth: u32) -> Lifter<'a, A> {
        let m = ta.n;
        let q = ar.q();
        let ta = rows_of(ar, ta);
        let mut offsets = Vec::new();
        let mut t_offsets = Vec::new();
        for j in 0..depth {
            let mut layer = Vec::new();
            let mut tlayer = Vec::new();
            for code in 0..q.pow(m as u32) {
                let mut c = code;
                let v: Vec<A::E> = (0..m)
                    .map(|_| {
                        let d = (c % q) as u16;
                        c /= q;
                        ar.digit(j, d)
                    })
                    .collect();
                tlayer.push(ar.mat_vec(&ta, &v));
                layer.push(v);
            }
            offsets.push(layer);
            t_offsets.push(tlayer);
        }
        Lifter {
            ar,
            tb: rows_of(ar, tb),
            n: tb.n,
            m,
            depth,
            offsets,
            t_offsets,
            visits: AtomicU64::new(0),
        }
    }

    fn start(&self) -> State<A::E> {
        State { cols: [[A::E::default(); MAX_RANK]; MAX_RANK], ys: [[A::E::default(); MAX_RANK]; MAX_RANK] }
    }

    /// Try every digit vector for column `k` at layer `j`, calling `next` on
    /// each extension that passes the level `j + 1` checks.
    fn extend<F: FnMut(&mut State<A::E>)>(&self, st: &mut State<A::E>, j: u32, k: usize, mut next: F) {
        let ar = self.ar;
        let m = self.m;
        let base_x = st.cols[k];
        let base_y = st.ys[k];
        let layer = &self.offsets[j as usize];
        let tlayer = &self.t_offsets[j as usize];
        for (off, toff) in layer.iter().zip(tlayer) {
            for a in 0..m {
                st.cols[k][a] = ar.add(base_x[a], off[a]);
                st.ys[k][a] = ar.add(base_y[a], toff[a]);
            }
            let ok = (0..=k).all(|i| {
                let d = ar.sub(ar.dot(&st.cols[i][..m], &st.ys[k][..m]), self.tb[i][k]);
                level_ok(ar, d, i == k, j + 1)
            });
            if ok {
                next(st);
            }
        }
        st.cols[k] = base_x;
        st.ys[k] = base_y;
    }

    fn walk<L: Fn(&State<A::E>) -> bool>(&self, st: &mut State<A::E>, j: u32, k: usize, leaf: &L) -> u64 {
        if k == self.n {
            if j + 1 == self.depth {
                self.visits.fetch_add(1, Ordering::Relaxed);
                return leaf(st) as u64;
            }
            if self.visits.load(Ordering::Relaxed) > LEAF_CAP {
                return 0;
            }
            return self.walk(st, j + 1, 0, leaf);
        }
        let mut total = 0;
        self.extend(st, j, k, |s| total += self.walk(s, j, k + 1, leaf));
        total
    }

    /// All states after layer 0, the unit of parallel work.
    fn first_layer(&self) -> Vec<State<A::E>> {
        let mut frontier = vec![self.start()];
        for k in 0..self.n {
            let mut next = Vec::new();
            for mut st in frontier {
                self.extend(&mut st, 0, k, |s| next.push(*s));
            }
            frontier = next;
        }
        frontier
    }

    /// Count the leaves accepted by `leaf` below the layer-0 states accepted
    /// by `root`.
    fn run<R, L>(&self, root: R, leaf: L) -> Result<u64, DensityError>
    where
        R: Fn(&State<A::E>) -> bool,
        L: Fn(&State<A::E>) -> bool + Sync,
    {
        if self.depth == 0 {
            return Ok(leaf(&self.start()) as u64);
        }
        let mut roots = self.first_layer();
        roots.retain(|s| root(s));
        let total: u64 = if self.depth == 1 {
            self.visits.fetch_add(roots.len() as u64, Ordering::Relaxed);
            roots.iter().filter(|s| leaf(s)).count() as u64
        } else {
            roots
                .into_par_iter()
                .map(|mut st| self.walk(&mut st, 1, 0, &leaf))
                .sum()
        };
        if self.visits.load(Ordering::Relaxed) > LEAF_CAP {
            return Err(DensityError::Budget);
        }
        Ok(total)
    }
}

/// Determinant of the leading `n x n` block, by cofactor expansion along
/// the first column over the rows in `rows`.
fn det<A: Arith>(ar: &A, cols: &Cols<A::E>, first: usize, rows: &[usize]) -> A::E {
    match rows.len() {
        0 => ar.digit(0, 1),
        1 => cols[first][rows[0]],
        n => {
            let mut acc = A::E::default();
            let mut minor = [0usize; MAX_RANK];
            for (pos, &i) in rows.iter().enumerate() {
                let mut len = 0;
                for &k in rows.iter().filter(|&&k| k != i) {
                    minor[len] = k;
                    len += 1;
                }
                let term = ar.mul(cols[first][i], det(ar, cols, first + 1, &minor[..n - 1]));
                acc = if pos % 2 == 0 { ar.add(acc, term) } else { ar.sub(acc, term) };
            }
            acc
        }
    }
}

fn lifted_with<A: Arith>(ar: &A, b: &HalfIntMat, a: &HalfIntMat, level: u32) -> Result<u64, DensityError> {
    Lifter::new(ar, a.doubled(), b.doubled(), level).run(|_| true, |_| true)
}

/// Same count as [`count_naive`], by pruned digit-by-digit lifting.
pub fn count_lifted(b: &HalfIntMat, a: &HalfIntMat, level: u32) -> Result<u64, DensityError> {
    check_inputs(b, a, level)?;
    let r = b.ring();
    if is_z2(r) {
        lifted_with(&Z2, b, a, level)
    } else {
        lifted_with(&Generic(r), b, a, level)
    }
}

/// Valuations of the elementary divisors of the map `Y -> TY + Y^t T`
/// written in coordinates `((TY)_ii, (TY)_ij + (TY)_ji)`, together with the
/// row transform that brings the map to diagonal form.
struct LinearTail {
    exps: Vec<u32>,
    p: Vec<Vec<Elem>>,
}

fn linear_tail(r: &Ring, t: &Mat) -> Result<LinearTail, DensityError> {
    let n = t.n;
    let coords: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let rows = coords.len();
    let cols = n * n;
    // column index a * n + b stands for y_ab
    let mut mtx = vec![vec![r.zero(); cols]; rows];
    for (row, &(i, j)) in coords.iter().enumerate() {
        for a in 0..n {
            let e = r.add(&mtx[row][a * n + j], t.get(i, a));
            mtx[row][a * n + j] = e;
            if i != j {
                let e = r.add(&mtx[row][a * n + i], t.get(j, a));
                mtx[row][a * n + i] = e;
            }
        }
    }
    let mut p: Vec<Vec<Elem>> = (0..rows)
        .map(|i| (0..rows).map(|j| if i == j { r.one() } else { r.zero() }).collect())
        .collect();
    let mut exps = Vec::new();
    let zero_at = r.prec() / 2;
    let mut done_cols = vec![false; cols];
    for k in 0..rows {
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in mtx.iter().enumerate().skip(k) {
            for (c, x) in row.iter().enumerate() {
                if done_cols[c] {
                    continue;
                }
                let v = r.ord(x);
                if v < zero_at && best.is_none_or(|b| v < b.0) {
                    best = Some((v, i, c));
                }
            }
        }
        let Some((v, i, c)) = best else {
            return Err(DensityError::Degenerate);
        };
        mtx.swap(k, i);
        p.swap(k, i);
        done_cols[c] = true;
        let piv = mtx[k][c];
        for i2 in k + 1..rows {
            if r.is_zero(&mtx[i2][c]) {
                continue;
            }
            let f = r.div_exact(&mtx[i2][c], &piv).map_err(DensityError::Ring)?;
            for c2 in 0..cols {
                let x = r.sub(&mtx[i2][c2], &r.mul(&f, &mtx[k][c2]));
                mtx[i2][c2] = x;
            }
            for c2 in 0..rows {
                let x = r.sub(&p[i2][c2], &r.mul(&f, &p[k][c2]));
                p[i2][c2] = x;
            }
        }
        exps.push(v);
    }
    Ok(LinearTail { exps, p })
}

/// Lowest level at which the count is provably in its periodic regime:
/// from `ord det T + 1 + a_max` up to `2 ord det T + 2` the shallow part of
/// [`count_self_fast`] is fixed and the kernel grows by `q^{n(n-1)/2}` per
/// level.
pub fn stable_level(b: &HalfIntMat) -> Result<u32, DensityError> {
    let r = b.ring();
    let t = b.doubled();
    let delta = r.ord(&t.det(r));
    if delta + 1 >= r.prec() / 2 {
        return Err(DensityError::Degenerate);
    }
    let a_max = linear_tail(r, t)?.exps.into_iter().max().unwrap_or(0);
    Ok(delta + 1 + a_max)
}

/// `#{X mod p^N : B[X] = B at level N}`, by lifting to a shallow depth and
/// counting the remaining digits through the linearized equation.
///
/// For `N > ord det T` every solution is invertible. With `s = N/2` and
/// `X = X1 + p^(N-s) Y` the quadratic term in `Y` is negligible, so for an
/// invertible `X1` the admissible `Y` form a coset of the kernel of
/// `Y -> TY + Y^t T` modulo the level-`s` lattice (or nothing).
pub fn count_self_fast(b: &HalfIntMat, level: u32) -> Result<u128, DensityError> {
    check_inputs(b, b, level)?;
    let r = b.ring();
    if is_z2(r) {
        fast_with(&Z2, b, level)
    } else {
        fast_with(&Generic(r), b, level)
    }
}

fn fast_with<A: Arith>(ar: &A, b: &HalfIntMat, level: u32) -> Result<u128, DensityError> {
    let r = b.ring();
    let n = b.n();
    let t = b.doubled();
    let delta = r.ord(&t.det(r));
    if delta + 1 >= r.prec() / 2 {
        return Err(DensityError::Degenerate);
    }
    let s = if level > delta { level / 2 } else { 0 };
    if s == 0 {
        return lifted_with(ar, b, b, level).map(u128::from);
    }
    let depth = level - s;
    if depth + s + 2 * delta + 2 * r.v2() + 4 > r.prec() {
        return Err(DensityError::Precision(level));
    }
    let tail = linear_tail(r, t)?;
    let rows = tail.exps.len();
    let kernel_exp: u64 = s as u64 * (n * n - rows) as u64
        + tail.exps.iter().map(|&a| a.min(s) as u64).sum::<u64>();
    let kernel = (r.q() as u128)
        .checked_pow(kernel_exp as u32)
        .ok_or(DensityError::Precision(level))?;
    let p: Vec<Vec<A::E>> = tail.p.iter().map(|row| row.iter().map(|x| ar.conv(x)).collect()).collect();
    let need: Vec<u32> = tail.exps.iter().map(|&a| a.min(s)).collect();
    let coords: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let tb = rows_of(ar, t);
    let all_rows: Vec<usize> = (0..n).collect();
    // X1 is invertible iff it is modulo p, so singular branches die at the root
    let root = |st: &State<A::E>| !ar.ord_at_least(det(ar, &st.cols, 0, &all_rows), 1);
    let leaf = |st: &State<A::E>| -> bool {
        let mut w = [A::E::default(); MAX_RANK * (MAX_RANK + 1) / 2];
        for (c, &(i, j)) in coords.iter().enumerate() {
            let e = ar.sub(ar.dot(&st.cols[i][..n], &st.ys[j][..n]), tb[i][j]);
            let e = if i == j { ar.half(e) } else { e };
            w[c] = ar.shift(e, depth);
        }
        (0..rows).all(|k| ar.ord_at_least(ar.dot(&p[k], &w[..rows]), need[k]))
    };
    let shallow = Lifter::new(ar, t, t, depth).run(root, leaf)?;
    Ok(shallow as u128 * kernel)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_rank_one() {
        let r = Ring::z2(40);
        let b = HalfIntMat::diag_i64(&r, &[1]);
        assert_eq!(count_naive(&b, &b, 4).unwrap(), 4);
        assert_eq!(count_lifted(&b, &b, 4).unwrap(), 4);
    }

    #[test]
    fn sum_of_two_squares() {
        let r = Ring::z2(40);
        let b = HalfIntMat::diag_i64(&r, &[1]);
        let a = HalfIntMat::diag_i64(&r, &[1, 1]);
        assert_eq!(count_naive(&b, &a, 3).unwrap(), 16);
        assert_eq!(count_lifted(&b, &a, 3).unwrap(), 16);
    }

    #[test]
    fn fast_matches_lifted() {
        let r = Ring::z2(60);
        let cases: Vec<HalfIntMat> = vec![
            HalfIntMat::diag_i64(&r, &[1]),
            HalfIntMat::diag_i64(&r, &[3, 4]),
            HalfIntMat::diag_i64(&r, &[1, 1]),
            HalfIntMat::diag_i64(&r, &[1, 6]),
            HalfIntMat::hyperbolic(&r),
            HalfIntMat::from_doubled(&r, &[vec![2, 1], vec![1, 2]]).unwrap(),
            HalfIntMat::from_doubled(&r, &[vec![0, 1], vec![1, 0]]).unwrap(),
            HalfIntMat::from_doubled(&r, &[vec![4, 2], vec![2, 8]]).unwrap(),
            HalfIntMat::diag_i64(&r, &[1, 1, 1]),
        ];
        for b in &cases {
            let delta = r.ord(&b.doubled().det(&r));
            let top = if b.n() == 3 { 5 } else { 7 };
            for level in 1..=(2 * delta + 3).min(top) {
                let slow = count_lifted(b, b, level).unwrap() as u128;
                let fast = count_self_fast(b, level).unwrap();
                assert_eq!(slow, fast, "{b:?} level {level}");
            }
        }
    }
}
