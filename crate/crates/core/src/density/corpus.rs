//! A fixed, seeded corpus of small lattices over `Z_2` for the density
//! batteries: every orthogonal sum of standard Jordan blocks with rank at
//! most 3 and `ord D_B <= 4`, each moved by a random unimodular basis change.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::{HalfIntMat, Mat};
use crate::ring::Ring;

pub const DEFAULT_SEED: u64 = 20;
pub const MAX_ORD_DISC: i64 = 4;

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    /// The block description, e.g. `2^1*3 + H`.
    pub label: String,
    pub b: HalfIntMat,
}

/// Doubled Gram matrix of a block, together with its rank and `ord det B`.
#[derive(Clone)]
struct Block {
    label: String,
    t: Vec<Vec<i64>>,
    ord_det: i64,
}

fn blocks() -> Vec<Block> {
    let mut v = Vec::new();
    for k in 0..=4i64 {
        for u in [1, 3, 5, 7] {
            let c = 1i64 << k;
            v.push(Block { label: format!("2^{k}*{u}"), t: vec![vec![2 * u * c]], ord_det: k });
        }
    }
    for k in 0..=2i64 {
        let c = 1i64 << k;
        v.push(Block { label: format!("2^{k}*H"), t: vec![vec![0, c], vec![c, 0]], ord_det: 2 * k - 2 });
        v.push(Block {
            label: format!("2^{k}*A"),
            t: vec![vec![2 * c, c], vec![c, 2 * c]],
            ord_det: 2 * k - 2,
        });
    }
    v
}

fn rank(b: &Block) -> usize {
    b.t.len()
}

fn ord_disc(parts: &[&Block]) -> i64 {
    let n: usize = parts.iter().map(|b| rank(b)).sum();
    parts.iter().map(|b| b.ord_det).sum::<i64>() + 2 * (n / 2) as i64
}

fn assemble(parts: &[&Block]) -> (String, Vec<Vec<i64>>) {
    let n: usize = parts.iter().map(|b| rank(b)).sum();
    let mut t = vec![vec![0i64; n]; n];
    let mut at = 0;
    for b in parts {
        for (i, row) in b.t.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                t[at + i][at + j] = *x;
            }
        }
        at += rank(b);
    }
    let label = parts.iter().map(|b| b.label.as_str()).collect::<Vec<_>>().join(" + ");
    (label, t)
}

/// Unordered sums of blocks, by nondecreasing block index.
fn sums(all: &[Block]) -> Vec<Vec<usize>> {
    fn go(all: &[Block], start: usize, rank_left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        for i in start..all.len() {
            if rank(&all[i]) <= rank_left {
                cur.push(i);
                go(all, i, rank_left - rank(&all[i]), cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(all, 0, 3, &mut Vec::new(), &mut out);
    out
}

fn random_unimodular(r: &Ring, n: usize, rng: &mut ChaCha8Rng) -> Mat {
    let mut u = Mat::identity(r, n);
    for _ in 0..2 * n {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j {
            continue;
        }
        let c = r.from_i64(rng.gen_range(-2..=2));
        // column j += c * column i
        for k in 0..n {
            let v = r.add(u.get(k, j), &r.mul(&c, u.get(k, i)));
            u.set(k, j, v);
        }
    }
    u
}

/// The corpus over `r`, which must be `Z_2`.
pub fn z2_corpus(r: &Ring, seed: u64) -> Vec<CorpusEntry> {
    let all = blocks();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for idx in sums(&all) {
        let parts: Vec<&Block> = idx.iter().map(|&i| &all[i]).collect();
        if ord_disc(&parts) > MAX_ORD_DISC {
            continue;
        }
        let (label, t) = assemble(&parts);
        let b = HalfIntMat::from_doubled(r, &t).expect("block sums are valid");
        let u = random_unimodular(r, b.n(), &mut rng);
        out.push(CorpusEntry { label, b: b.transform(&u) });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_and_bound() {
        let r = Ring::z2(60);
        let c = z2_corpus(&r, DEFAULT_SEED);
        assert!(c.len() >= 200, "{}", c.len());
        for e in &c {
            assert!(crate::density::ord_disc(&e.b).unwrap() as i64 <= MAX_ORD_DISC, "{}", e.label);
        }
    }
}
