//! Verification batteries shared by the command line `suite` and the
//! acceptance tests. Each battery reports pass/fail counts and keeps the
//! first few failures for display.

use std::collections::BTreeMap;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::density::corpus::DEFAULT_SEED;
use crate::density::theorem::HypothesisKey;
use crate::density::{
    alpha_beta, binary_beta, formula_beta_of, count_lifted, count_naive, rational_string, theorem_check, z2_corpus,
    Cache, DensityError, DensityReport, VerdictKind,
};
use crate::gk::{delta, gk, gk_binary_closed, gk_odd_p, BinaryKind, BinaryParams, EGKDatum};
use crate::lattice::{HalfIntMat, Mat};
use crate::ring::Ring;

const KEEP: usize = 5;

#[derive(Clone, Debug, Default, Serialize)]
pub struct Battery {
    pub name: String,
    pub passed: u64,
    pub failed: u64,
    pub failures: Vec<String>,
}

impl Battery {
    pub fn new(name: &str) -> Battery {
        Battery { name: name.to_string(), ..Battery::default() }
    }

    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            if self.failures.len() < KEEP {
                self.failures.push(what());
            }
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0 && self.passed > 0
    }
}

fn random_form(r: &Ring, n: usize, rng: &mut ChaCha8Rng) -> HalfIntMat {
    loop {
        let mut t = vec![vec![0i64; n]; n];
        for i in 0..n {
            t[i][i] = 2 * rng.gen_range(-8..=8);
            for j in i + 1..n {
                let x = rng.gen_range(-6..=6);
                t[i][j] = x;
                t[j][i] = x;
            }
        }
        let b = HalfIntMat::from_doubled(r, &t).expect("symmetric");
        if b.is_nondegenerate() {
            return b;
        }
    }
}

fn show(b: &HalfIntMat) -> String {
    serde_json::to_string(&b.to_json().doubled).unwrap_or_default()
}

/// GK batteries over `Z_2`: `|GK| = Delta` with a valid certificate, the
/// shift by 2, invariance under unit scaling, and the rank <= 2 closed form.
pub fn gk_batteries(seed: u64, samples: usize) -> Vec<Battery> {
    let r = Ring::z2(48);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = Battery::new("gk-sum-equals-delta");
    let mut shift = Battery::new("gk-shift-by-2");
    let mut unit = Battery::new("gk-unit-scaling");
    for _ in 0..samples {
        let n = rng.gen_range(1..=3);
        let b = random_form(&r, n, &mut rng);
        let Ok(g) = gk(&b) else {
            sum.check(false, || format!("{}: search failed", show(&b)));
            continue;
        };
        let cert_ok = g.certificate.as_ref().is_some_and(|c| c.verify(&b, &g.seq));
        sum.check(g.certified && cert_ok && Ok(g.sum()) == delta(&b), || {
            format!("{}: gk {:?} certified {} delta {:?}", show(&b), g.seq, cert_ok, delta(&b).ok())
        });
        let two = gk(&b.scale(&r.from_i64(2))).map(|d| d.seq);
        let want: Vec<i64> = g.seq.iter().map(|a| a + 1).collect();
        shift.check(two.as_ref() == Ok(&want), || format!("{}: 2B gives {:?}", show(&b), two));
        let u = r.from_i64([3, 5, 7, -1, -3][rng.gen_range(0..5)]);
        let scaled = gk(&b.scale(&u)).map(|d| d.seq);
        unit.check(scaled.as_ref() == Ok(&g.seq), || format!("{}: uB gives {:?}", show(&b), scaled));
    }
    vec![sum, shift, unit, binary_closed_battery(&r)]
}

/// The rank <= 2 closed form against a verified reduced-form certificate,
/// over all forms with entries `0` or `u 2^k`, `k <= 3`.
fn binary_closed_battery(r: &Ring) -> Battery {
    let mut bat = Battery::new("gk-binary-closed-form");
    let mut vals = vec![0i64];
    for k in 0..=3 {
        for u in [1, 3, 5, 7] {
            vals.push(u << k);
            vals.push(-(u << k));
        }
    }
    let mut forms: Vec<HalfIntMat> = vals
        .iter()
        .filter(|&&a| a != 0)
        .map(|&a| HalfIntMat::diag_i64(r, &[a]))
        .collect();
    let offs: Vec<i64> = vals.iter().copied().filter(|&b| b >= 0).collect();
    for (i, &a) in vals.iter().enumerate() {
        for &c in &vals[i..] {
            for &b in &offs {
                let h = HalfIntMat::from_doubled(r, &[vec![2 * a, b], vec![b, 2 * c]]).expect("symmetric");
                if h.is_nondegenerate() {
                    forms.push(h);
                }
            }
        }
    }
    for b in &forms {
        let closed = gk_binary_closed(b);
        let datum = gk(b);
        let ok = match (&closed, &datum) {
            (Ok(s), Ok(d)) => d.certificate.as_ref().is_some_and(|c| c.verify(b, s)),
            _ => false,
        };
        bat.check(ok, || format!("{}: closed {:?}", show(b), closed));
    }
    bat
}

/// `count_lifted` against `count_naive` on small random instances over
/// `Z_2`, `Z_3` and a ramified quadratic extension of `Z_2`.
pub fn counter_battery(seed: u64, samples: usize) -> Battery {
    let mut bat = Battery::new("counter-lifted-vs-naive");
    let ramified = BinaryParams { kind: BinaryKind::RamifiedOdd, e: 2, f: 0 }.ring(1).expect("valid ring");
    let rings = [Ring::z2(24), Ring::zp(3, 20), ramified];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..samples {
        let r = &rings[k % rings.len()];
        let m = rng.gen_range(1..=2);
        let n = rng.gen_range(1..=m);
        let a = random_form(r, m, &mut rng);
        let b = if rng.gen_bool(0.5) {
            // a represented form, so the count is usually nonzero
            let mut x = Mat::zero(r, m);
            for i in 0..m {
                for j in 0..m {
                    x.set(i, j, r.from_i64(rng.gen_range(-3..=3)));
                }
            }
            let full = a.transform(&x);
            let idx: Vec<usize> = (0..n).collect();
            full.submatrix(&idx)
        } else {
            random_form(r, n, &mut rng)
        };
        let q = r.q() as u64;
        let mut level = 1;
        while level < 4 && q.pow(((m * n) as u32) * (level + 1)) <= 1 << 16 {
            level += 1;
        }
        let naive = count_naive(&b, &a, level);
        let lifted = count_lifted(&b, &a, level);
        bat.check(naive.is_ok() && naive == lifted, || {
            format!("{} in {} at N={level}: naive {:?} lifted {:?}", show(&b), show(&a), naive, lifted)
        });
    }
    bat
}

/// Closed-form binary densities against counting, for `e` in `{1, 2}`,
/// `f` in `{0, 1, 2}` and every extension kind.
pub fn binary_battery() -> Battery {
    let mut bat = Battery::new("binary-closed-vs-counted");
    for e in [1, 2] {
        for kind in BinaryParams::kinds(e) {
            for f in 0..=2 {
                let p = BinaryParams { kind, e, f };
                let res = p
                    .ring(1)
                    .map_err(DensityError::Gk)
                    .and_then(|r| {
                        let b = p.matrix(&r)?;
                        Ok((binary_beta(&p, r.q())?, alpha_beta(&b, None)?))
                    });
                let ok = matches!(&res, Ok((c, n)) if c.beta == n.beta && n.stabilized);
                bat.check(ok, || match &res {
                    Ok((c, n)) => format!(
                        "{}: closed {} counted {}",
                        p.label(),
                        rational_string(&c.beta),
                        rational_string(&n.beta)
                    ),
                    Err(err) => format!("{}: {err}", p.label()),
                });
            }
        }
    }
    bat
}

/// One corpus lattice with everything the corpus batteries need.
#[derive(Clone, Debug)]
pub struct CorpusRow {
    pub label: String,
    pub b: HalfIntMat,
    pub counted: Result<DensityReport, DensityError>,
    pub formula: Result<DensityReport, DensityError>,
    pub key: Result<HypothesisKey, DensityError>,
}

pub fn corpus_rows(seed: u64, mut cache: Option<&mut Cache>) -> Vec<CorpusRow> {
    let r = Ring::z2(60);
    z2_corpus(&r, seed)
        .into_iter()
        .map(|e| {
            let counted = match cache.as_deref_mut() {
                Some(c) => c.alpha_beta(&e.b, None),
                None => alpha_beta(&e.b, None),
            };
            CorpusRow {
                formula: formula_beta_of(&e.b),
                key: HypothesisKey::of(&e.b),
                counted,
                label: e.label,
                b: e.b,
            }
        })
        .collect()
}

/// Closed formula against counting on the corpus.
pub fn formula_battery(rows: &[CorpusRow]) -> Battery {
    let mut bat = Battery::new("formula-vs-counted");
    for row in rows {
        let ok = matches!((&row.formula, &row.counted), (Ok(c), Ok(n)) if c.beta == n.beta && c.beta_c == n.beta_c);
        bat.check(ok, || {
            format!(
                "{}: formula {:?} counted {:?}",
                row.label,
                row.formula.as_ref().map(|x| rational_string(&x.beta)),
                row.counted.as_ref().map(|x| rational_string(&x.beta))
            )
        });
    }
    bat
}

/// Counted density at `N` equals the one at `N + 1` on the corpus.
pub fn stabilization_battery(rows: &[CorpusRow]) -> Battery {
    let mut bat = Battery::new("stabilization");
    for row in rows {
        let ok = row.counted.as_ref().is_ok_and(|c| c.stabilized);
        bat.check(ok, || format!("{}: {:?}", row.label, row.counted.as_ref().map(|c| c.n_used)));
    }
    bat
}

/// Lattices of the corpus with equal hypothesis invariants have equal
/// densities; one check per such pair.
pub fn hypothesis_battery(rows: &[CorpusRow]) -> Battery {
    let mut bat = Battery::new("equal-invariants-equal-density");
    let mut groups: BTreeMap<String, Vec<&CorpusRow>> = BTreeMap::new();
    for row in rows {
        if let Ok(k) = &row.key {
            groups.entry(k.to_json().to_string()).or_default().push(row);
        }
    }
    for (key, group) in &groups {
        for (i, x) in group.iter().enumerate() {
            for y in &group[i + 1..] {
                let bx = x.counted.as_ref().map(|c| c.beta.clone()).ok();
                let by = y.counted.as_ref().map(|c| c.beta.clone()).ok();
                bat.check(bx.is_some() && bx == by, || {
                    format!("{} vs {} ({key}): {:?} vs {:?}", x.label, y.label, show_beta(&bx), show_beta(&by))
                });
            }
        }
    }
    bat
}

fn show_beta(b: &Option<BigRational>) -> Option<String> {
    b.as_ref().map(rational_string)
}

/// The two pairs whose coarse invariants agree but whose densities differ.
pub fn counterexample_battery() -> Battery {
    let mut bat = Battery::new("counterexample-pairs");
    let r = Ring::z2(60);
    let d = |v: &[i64]| HalfIntMat::diag_i64(&r, v);
    let h = HalfIntMat::hyperbolic(&r);
    let cases = [
        ("diag(1,1) vs diag(1,3)", d(&[1, 1]), d(&[1, 3])),
        ("H+diag(1,3) vs H+(1)", h.direct_sum(&d(&[1, 3])), h.direct_sum(&d(&[1]))),
    ];
    for (label, l, m) in &cases {
        let v = theorem_check(l, m);
        let ok = v.as_ref().is_ok_and(|v| v.kind == VerdictKind::HypothesisNotMet && v.beta_left != v.beta_right);
        bat.check(ok, || format!("{label}: {:?}", v.map(|v| v.to_json())));
    }
    let egk_str = |b: &HalfIntMat| crate::gk::egk(b).map(|e| e.to_string()).unwrap_or_default();
    let trunc = |b: &HalfIntMat| crate::gk::egk(b).map(|e| e.truncate(1)).unwrap_or_else(|_| EGKDatum::empty());
    let pairs = [
        (egk_str(&d(&[1, 1, -1, -1])), "(1,2,1;0,1,2;1,1,1)"),
        (egk_str(&d(&[1, 3, -1, -3])), "(1,2,1;0,1,2;1,1,1)"),
        (trunc(&cases[1].1).to_string(), "(1,2;0,1;1,1)"),
        (egk_str(&cases[1].2), "(1,2;0,1;1,1)"),
    ];
    for (got, want) in pairs {
        bat.check(got == want, || format!("expected {want}, got {got}"));
    }
    bat
}

/// Over `Z_3`, rank <= 2 and diagonal valuations <= 2: forms with equal GK
/// should have equal counted `alpha`. One check per pair.
pub fn odd_p_battery() -> Battery {
    let mut bat = Battery::new("odd-p-gk-determines-alpha");
    let r = Ring::zp(3, 30);
    let mut forms = Vec::new();
    for a in 0..=2u32 {
        for u in [1i64, 2] {
            let x = u * 3i64.pow(a);
            forms.push(HalfIntMat::diag_i64(&r, &[x]));
            for b in a..=2u32 {
                for v in [1i64, 2] {
                    forms.push(HalfIntMat::diag_i64(&r, &[x, v * 3i64.pow(b)]));
                }
            }
        }
    }
    let mut groups: BTreeMap<Vec<i64>, Vec<(String, Option<BigRational>)>> = BTreeMap::new();
    for b in &forms {
        let Ok(g) = gk_odd_p(b) else { continue };
        let alpha = alpha_beta(b, None).ok().map(|c| c.alpha);
        groups.entry(g.seq).or_default().push((show(b), alpha));
    }
    for (g, group) in &groups {
        for (i, (x, ax)) in group.iter().enumerate() {
            for (y, ay) in &group[i + 1..] {
                bat.check(ax.is_some() && ax == ay, || {
                    format!("GK {g:?}: {x} alpha {:?}, {y} alpha {:?}", show_beta(ax), show_beta(ay))
                });
            }
        }
    }
    bat
}

/// Every battery, in a fixed order.
pub fn run_all(seed: u64, cache: Option<&mut Cache>) -> Vec<Battery> {
    let mut out = gk_batteries(seed, 100);
    out.push(counter_battery(seed, 100));
    out.push(binary_battery());
    let rows = corpus_rows(DEFAULT_SEED, cache);
    out.push(formula_battery(&rows));
    out.push(hypothesis_battery(&rows));
    out.push(stabilization_battery(&rows));
    out.push(counterexample_battery());
    out.push(odd_p_battery());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counters_agree() {
        assert!(counter_battery(1, 12).ok());
    }

    #[test]
    fn counterexamples() {
        let b = counterexample_battery();
        assert!(b.ok(), "{:?}", b.failures);
    }
}
