use serde::{Deserialize, Serialize};

use super::{GKDatum, GkError, Involution};
use crate::lattice::{JordanDecomposition, Parity, Subtype};

/// Parity type and rank of one Jordan constituent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScaleProfile {
    pub scale: i64,
    pub subtype: Subtype,
    pub rank: usize,
}

/// `GK(L + (-L))` with the pairing of its entries, from a Jordan splitting of `L`.
pub fn gk_double_sigma(dec: &JordanDecomposition) -> Result<(Vec<i64>, Involution), GkError> {
    let r = dec.ring();
    if !r.is_dyadic() || r.e() != 1 {
        return Err(GkError::Unsupported("closed form for L + (-L) needs an unramified dyadic ring".into()));
    }
    // (value, partner slot) in creation order
    let mut items: Vec<(i64, usize)> = Vec::new();
    let pair = |items: &mut Vec<(i64, usize)>, x: i64, y: i64| {
        let k = items.len();
        items.push((x, k + 1));
        items.push((y, k));
    };
    for c in &dec.constituents {
        let i = c.scale;
        let equal = match c.parity {
            Parity::II => c.rank,
            Parity::I => {
                pair(&mut items, i, i + 2);
                c.rank - 1
            }
        };
        for _ in 0..equal {
            pair(&mut items, i + 1, i + 1);
        }
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by_key(|&k| items[k].0);
    let mut pos = vec![0; items.len()];
    for (p, &k) in order.iter().enumerate() {
        pos[k] = p;
    }
    let seq = order.iter().map(|&k| items[k].0).collect();
    let sigma = Involution(order.iter().map(|&k| pos[items[k].1]).collect());
    Ok((seq, sigma))
}

pub fn gk_double(dec: &JordanDecomposition) -> Result<GKDatum, GkError> {
    let (seq, _) = gk_double_sigma(dec)?;
    Ok(GKDatum { seq, certified: true, certificate: None })
}

fn profile_from(scale: i64, a: usize, b: usize) -> Result<Option<ScaleProfile>, GkError> {
    if a % 2 == 1 || b > 1 {
        return Err(GkError::Inconsistent(format!("scale {scale}: A = {a}, B = {b}")));
    }
    Ok(match (b, a % 4) {
        (0, _) if a == 0 => None,
        (0, _) => Some(ScaleProfile { scale, subtype: Subtype::II, rank: a / 2 }),
        (_, 0) => Some(ScaleProfile { scale, subtype: Subtype::IOdd, rank: a / 2 + 1 }),
        _ => Some(ScaleProfile { scale, subtype: Subtype::IEven, rank: a / 2 + 1 }),
    })
}

fn scale_range(seq: &[i64]) -> std::ops::RangeInclusive<i64> {
    let lo = seq.iter().copied().min().unwrap_or(0) - 2;
    let hi = seq.iter().copied().max().unwrap_or(0);
    lo..=hi
}

/// Jordan profile of `L` from `GK(L + (-L))` and an admissible involution of a reduced form.
pub fn recover_profile(seq: &[i64], sigma: &Involution) -> Result<Vec<ScaleProfile>, GkError> {
    if sigma.n() != seq.len() || !sigma.is_involution() {
        return Err(GkError::Malformed("involution does not match the sequence".into()));
    }
    let mut out = Vec::new();
    for i in scale_range(seq) {
        let a = (0..seq.len()).filter(|&t| seq[t] == i + 1 && seq[sigma.0[t]] == i + 1).count();
        let b = (0..seq.len()).filter(|&t| seq[t] == i && seq[sigma.0[t]] == i + 2).count();
        out.extend(profile_from(i, a, b)?);
    }
    Ok(out)
}

/// The same recovery without the involution, given the scales whose
/// constituent has parity type I.
pub fn recover_profile_unpaired(seq: &[i64], type_one: &[i64]) -> Result<Vec<ScaleProfile>, GkError> {
    let is_one = |i: i64| type_one.contains(&i);
    let mut out = Vec::new();
    for i in scale_range(seq) {
        let c = seq.iter().filter(|&&x| x == i + 1).count();
        let nb = is_one(i - 1) as usize + is_one(i + 1) as usize;
        let a = c.checked_sub(nb).ok_or_else(|| GkError::Inconsistent(format!("scale {i}: C = {c}")))?;
        out.extend(profile_from(i, a, is_one(i) as usize)?);
    }
    Ok(out)
}

/// The `(scale, subtype, rank)` part of a Jordan decomposition.
pub fn profile_of(dec: &JordanDecomposition) -> Vec<ScaleProfile> {
    dec.constituents.iter().map(|c| ScaleProfile { scale: c.scale, subtype: c.subtype, rank: c.rank }).collect()
}
