use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{admissible_involutions, is_reduced, Certificate, GKDatum, GkError, Involution};
use crate::lattice::{jordan_split, HalfIntMat, Mat};
use crate::ring::{Elem, Ring};

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    /// Maximum number of evaluated basis moves.
    pub budget: u64,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { budget: 1_000_000, seed: 0 }
    }
}

/// GK invariant with default search options.
pub fn gk(b: &HalfIntMat) -> Result<GKDatum, GkError> {
    gk_search(b, &SearchOptions::default())
}

pub fn gk_search(b: &HalfIntMat, opts: &SearchOptions) -> Result<GKDatum, GkError> {
    if !b.is_nondegenerate() {
        return Err(crate::lattice::LatticeError::Degenerate.into());
    }
    let r = b.ring();
    if !r.is_dyadic() {
        return gk_odd_p(b);
    }
    if b.n() <= 2 {
        return super::gk_binary(b);
    }
    if r.e() == 1 {
        if let Some(d) = gk_unramified(b, opts)? {
            return Ok(d);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let found = hill_climb(b, opts.budget, &mut rng);
    Ok(found.into_datum(b))
}

/// Over `Z_p`, `p` odd: sorted valuations of a diagonalization.
pub fn gk_odd_p(b: &HalfIntMat) -> Result<GKDatum, GkError> {
    let r = b.ring();
    if r.is_dyadic() {
        return Err(GkError::InvalidParams("gk_odd_p needs an odd residue characteristic".into()));
    }
    if !b.is_nondegenerate() {
        return Err(crate::lattice::LatticeError::Degenerate.into());
    }
    let dec = jordan_split(b)?;
    let mut seq: Vec<i64> = Vec::new();
    for c in &dec.constituents {
        seq.extend(std::iter::repeat_n(c.scale, c.rank));
    }
    seq.sort();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let found = hill_climb(&dec.split, 20_000, &mut rng);
    let certificate = match found.certificate(&dec.split) {
        Some(c) if c.0 == seq => {
            let u = dec.transform.mul(r, &c.1.u);
            Some(Certificate { form: b.transform(&u), sigma: c.1.sigma, u })
        }
        _ => None,
    };
    Ok(GKDatum { seq, certified: true, certificate })
}

/// Ords of the entries of a doubled matrix.
struct Ords {
    n: usize,
    diag: Vec<i64>,
    off: Vec<i64>,
}

impl Ords {
    fn of(h: &HalfIntMat) -> Ords {
        let n = h.n();
        let mut off = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                off[i * n + j] = h.ord_off(i, j);
            }
        }
        Ords { n, diag: (0..n).map(|i| h.ord_diag(i)).collect(), off }
    }
    fn max_s(&self, perm: &[usize]) -> Vec<i64> {
        let n = self.n;
        let mut a: Vec<i64> = Vec::with_capacity(n);
        for k in 0..n {
            let mut v = i64::MAX;
            for j in k..n {
                let pj = perm[j];
                v = v.min(self.diag[pj]);
                for l in j + 1..n {
                    v = v.min(self.off[pj * n + perm[l]]);
                }
                for (i, &ai) in a.iter().enumerate() {
                    v = v.min(2 * self.off[perm[i] * n + pj] - ai);
                }
            }
            a.push(v.max(0));
        }
        a
    }
    fn violations(&self, perm: &[usize], a: &[i64], s: &Involution) -> usize {
        let n = self.n;
        let d = |i: usize| self.diag[perm[i]];
        let o = |i: usize, j: usize| self.off[perm[i] * n + perm[j]];
        let mut bad = 0;
        for i in 0..n {
            let j = s.0[i];
            if j == i {
                bad += (d(i) != a[i]) as usize;
            } else {
                if i < j && 2 * o(i, j) != a[i] + a[j] {
                    bad += 1;
                }
                if a[i] < a[j] && d(i) != a[i] {
                    bad += 1;
                }
            }
            for k in i + 1..n {
                if k != j && 2 * o(i, k) <= a[i] + a[k] {
                    bad += 1;
                }
            }
        }
        bad
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Score {
    a: Vec<i64>,
    /// negated violation count
    fit: i64,
}

#[derive(Clone)]
struct Eval {
    score: Score,
    perm: Vec<usize>,
    sigma: Option<Involution>,
}

struct Evaluator {
    perms: Vec<Vec<usize>>,
    invs: HashMap<Vec<i64>, Vec<Involution>>,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let n = used.len();
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

impl Evaluator {
    fn new(n: usize) -> Evaluator {
        Evaluator { perms: if n <= 6 { permutations(n) } else { Vec::new() }, invs: HashMap::new() }
    }

    fn eval(&mut self, h: &HalfIntMat) -> Eval {
        let o = Ords::of(h);
        let heuristic;
        let perms: &[Vec<usize>] = if self.perms.is_empty() {
            let mut p: Vec<usize> = (0..o.n).collect();
            p.sort_by_key(|&i| (o.diag[i], i));
            let mut q: Vec<usize> = (0..o.n).collect();
            q.sort_by_key(|&i| ((0..o.n).map(|j| if j == i { o.diag[i] } else { o.off[i * o.n + j] }).min(), i));
            heuristic = vec![p, q];
            &heuristic
        } else {
            &self.perms
        };
        let mut best_a: Option<Vec<i64>> = None;
        let mut cands: Vec<usize> = Vec::new();
        for (k, p) in perms.iter().enumerate() {
            let a = o.max_s(p);
            match &best_a {
                Some(b) if a < *b => {}
                Some(b) if a == *b => cands.push(k),
                _ => {
                    best_a = Some(a);
                    cands = vec![k];
                }
            }
        }
        let a = best_a.expect("at least one ordering");
        let invs = self.invs.entry(a.clone()).or_insert_with(|| admissible_involutions(&a));
        let mut best: (usize, usize, Option<usize>) = (usize::MAX, cands[0], None);
        'outer: for &k in &cands {
            for (si, s) in invs.iter().enumerate() {
                let v = o.violations(&perms[k], &a, s);
                if v < best.0 {
                    best = (v, k, Some(si));
                    if v == 0 {
                        break 'outer;
                    }
                }
            }
        }
        let viol = if best.2.is_none() { o.n * o.n + 1 } else { best.0 };
        Eval {
            score: Score { a, fit: -(viol as i64) },
            perm: perms[best.1].clone(),
            sigma: best.2.map(|si| invs[si].clone()),
        }
    }
}

/// Best state seen by the hill climb.
struct Found {
    u: Mat,
    eval: Eval,
}

impl Found {
    fn certified(&self) -> bool {
        self.eval.score.fit == 0 && self.eval.sigma.is_some()
    }

    /// `(a, certificate relative to h)` when certified.
    fn certificate(&self, h: &HalfIntMat) -> Option<(Vec<i64>, Certificate)> {
        if !self.certified() {
            return None;
        }
        let r = h.ring();
        let u = self.u.mul(r, &Mat::permutation(r, &self.eval.perm));
        let form = h.transform(&u);
        let sigma = self.eval.sigma.clone().expect("certified");
        if is_reduced(&form, &self.eval.score.a, &sigma).ok() != Some(true) {
            return None;
        }
        Some((self.eval.score.a.clone(), Certificate { form, sigma, u }))
    }

    fn into_datum(self, h: &HalfIntMat) -> GKDatum {
        match self.certificate(h) {
            Some((seq, c)) => GKDatum { seq, certified: true, certificate: Some(c) },
            None => GKDatum { seq: self.eval.score.a, certified: false, certificate: None },
        }
    }
}

fn transvect(r: &Ring, t: &mut Mat, u: &mut Mat, j: usize, i: usize, c: &Elem) {
    let n = t.n;
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
}

fn coefficients(r: &Ring, depth: u32) -> Vec<Elem> {
    let mut out = Vec::new();
    for k in 0..=depth.min(r.prec() - 1) {
        let pk = r.pi_pow(k);
        for x in r.field().elements().skip(1) {
            let c = r.mul(&pk, &r.lift(x));
            out.push(c);
            let m = r.neg(&c);
            if m != c {
                out.push(m);
            }
        }
    }
    out
}

/// Randomized hill climb over transvections, maximizing `max_S` and then
/// minimizing the number of violated reduced-form clauses.
fn hill_climb(h: &HalfIntMat, budget: u64, rng: &mut ChaCha8Rng) -> Found {
    let r = h.ring().clone();
    let n = h.n();
    let mut ev = Evaluator::new(n);
    let start = h.doubled().clone();
    let id = Mat::identity(&r, n);
    let first = ev.eval(h);
    let mut best = Found { u: id.clone(), eval: first.clone() };
    if best.certified() || n == 0 {
        return best;
    }
    let depth = super::delta(h).map(|d| d.max(0) as u32 + 1).unwrap_or(4);
    let coeffs = coefficients(&r, depth);
    let mut moves: Vec<(usize, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                moves.extend((0..coeffs.len()).map(|c| (j, i, c)));
            }
        }
    }
    let (mut t, mut u, mut cur) = (start.clone(), id.clone(), first);
    let mut used: u64 = 0;
    let mut stale = 0u32;
    while used < budget {
        moves.shuffle(rng);
        let mut next: Option<(Mat, Mat, Eval)> = None;
        for &(j, i, c) in &moves {
            used += 1;
            let (mut t2, mut u2) = (t.clone(), u.clone());
            transvect(&r, &mut t2, &mut u2, j, i, &coeffs[c]);
            let e2 = ev.eval(&HalfIntMat::new(&r, t2.clone()).expect("congruent form stays half-integral"));
            if e2.score > cur.score {
                next = Some((t2, u2, e2));
                break;
            }
            if used >= budget {
                break;
            }
        }
        match next {
            Some((t2, u2, e2)) => {
                t = t2;
                u = u2;
                cur = e2;
                if cur.score > best.eval.score {
                    best = Found { u: u.clone(), eval: cur.clone() };
                    stale = 0;
                    if best.certified() {
                        return best;
                    }
                }
            }
            None => {
                stale += 1;
                if stale.is_multiple_of(8) {
                    t = start.clone();
                    u = id.clone();
                }
                for _ in 0..rng.gen_range(1..=2) {
                    let (j, i, c) = moves[rng.gen_range(0..moves.len())];
                    transvect(&r, &mut t, &mut u, j, i, &coeffs[c]);
                }
                cur = ev.eval(&HalfIntMat::new(&r, t.clone()).expect("congruent form stays half-integral"));
            }
        }
    }
    best
}

/// Clear all other rows and columns against the 2x2 pivot at `(p, q)`.
fn clear_pair(r: &Ring, t: &mut Mat, u: &mut Mat, p: usize, q: usize) -> Result<(), GkError> {
    let (a, bb, d) = (*t.get(p, p), *t.get(p, q), *t.get(q, q));
    let det = r.sub(&r.mul(&a, &d), &r.mul(&bb, &bb));
    for l in 0..t.n {
        if l == p || l == q {
            continue;
        }
        let (c1, c2) = (*t.get(p, l), *t.get(q, l));
        if r.is_zero(&c1) && r.is_zero(&c2) {
            continue;
        }
        let x1 = r.sub(&r.mul(&d, &c1), &r.mul(&bb, &c2));
        let x2 = r.sub(&r.mul(&a, &c2), &r.mul(&bb, &c1));
        let y1 = r.neg(&r.div_exact(&x1, &det)?);
        let y2 = r.neg(&r.div_exact(&x2, &det)?);
        transvect(r, t, u, l, p, &y1);
        transvect(r, t, u, l, q, &y2);
    }
    Ok(())
}

/// Unramified path: split off the type II planes of a Jordan splitting, merge
/// triples of equal-scale unit diagonal entries into further planes, and
/// search only on the remaining diagonal part.
fn gk_unramified(b: &HalfIntMat, opts: &SearchOptions) -> Result<Option<GKDatum>, GkError> {
    let r = b.ring().clone();
    let k = r.field();
    let n = b.n();
    let dec = jordan_split(b)?;
    let mut t = dec.split.doubled().clone();
    let mut u = dec.transform.clone();
    let v2 = r.v2() as i64;
    // (index, index, GK value) of split-off planes
    let mut pieces: Vec<(usize, usize, i64)> = Vec::new();
    let mut singles: Vec<(i64, usize)> = Vec::new();
    let mut x = 0;
    while x < n {
        let s = r.ord(t.get(x, x)) as i64 - v2;
        if x + 1 < n && !r.is_zero(t.get(x, x + 1)) {
            pieces.push((x, x + 1, r.ord(t.get(x, x + 1)) as i64 - v2 + 1));
            x += 2;
        } else {
            singles.push((s, x));
            x += 1;
        }
    }
    singles.sort();
    let mut rest: Vec<usize> = Vec::new();
    let mut g = 0;
    while g < singles.len() {
        let s = singles[g].0;
        let mut idx: Vec<usize> = singles[g..].iter().take_while(|p| p.0 == s).map(|p| p.1).collect();
        g += idx.len();
        while idx.len() >= 3 {
            let (i1, i2, i3) = (idx[0], idx[1], idx[2]);
            let res = |i: usize| r.residue(&r.unit_part(t.get(i, i)).expect("nonzero pivot").1);
            let c1 = r.lift(k.sqrt2(k.mul(res(i1), k.inv(res(i2)))));
            let c2 = r.lift(k.sqrt2(k.mul(res(i2), k.inv(res(i3)))));
            transvect(&r, &mut t, &mut u, i1, i2, &c1);
            transvect(&r, &mut t, &mut u, i2, i3, &c2);
            clear_pair(&r, &mut t, &mut u, i1, i2)?;
            pieces.push((i1, i2, s + 1));
            idx.drain(0..2);
        }
        rest.extend(idx);
    }
    // search on the remainder
    let sub = HalfIntMat::new(&r, t.clone())?.submatrix(&rest);
    let (a_rest, sig_rest, u_rest) = if rest.len() <= 1 {
        let a: Vec<i64> = (0..rest.len()).map(|i| sub.ord_diag(i)).collect();
        (a, Involution::identity(rest.len()), Mat::identity(&r, rest.len()))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let found = hill_climb(&sub, opts.budget, &mut rng);
        match found.certificate(&sub) {
            Some((a, c)) => (a, c.sigma, c.u),
            None => return Ok(None),
        }
    };
    // embed the remainder transform
    let mut emb = Mat::identity(&r, n);
    for (p, &ip) in rest.iter().enumerate() {
        for (q, &iq) in rest.iter().enumerate() {
            emb.set(ip, iq, *u_rest.get(p, q));
        }
    }
    let u = u.mul(&r, &emb);
    // (value, old index, partner old index)
    let mut items: Vec<(i64, usize, usize)> = Vec::new();
    for &(i, j, a) in &pieces {
        items.push((a, i, j));
        items.push((a, j, i));
    }
    for (pos, &a) in a_rest.iter().enumerate() {
        items.push((a, rest[pos], rest[sig_rest.0[pos]]));
    }
    items.sort_by_key(|it| it.0);
    let order: Vec<usize> = items.iter().map(|it| it.1).collect();
    let mut where_ = vec![0; n];
    for (pos, &o) in order.iter().enumerate() {
        where_[o] = pos;
    }
    let seq: Vec<i64> = items.iter().map(|it| it.0).collect();
    let sigma = Involution(items.iter().map(|it| where_[it.2]).collect());
    let u = u.mul(&r, &Mat::permutation(&r, &order));
    let form = b.transform(&u);
    if is_reduced(&form, &seq, &sigma).ok() != Some(true) {
        return Ok(None);
    }
    Ok(Some(GKDatum { seq, certified: true, certificate: Some(Certificate { form, sigma, u }) }))
}

/// Certificate search for a form whose GK is already known (rank 2 closed form).
pub(crate) fn certify_known(b: &HalfIntMat, seq: &[i64], budget: u64) -> Option<Certificate> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let found = hill_climb(b, budget, &mut rng);
    match found.certificate(b) {
        Some((a, c)) if a == seq => Some(c),
        _ => None,
    }
}

