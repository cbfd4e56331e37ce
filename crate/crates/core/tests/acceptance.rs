//! Acceptance run: one PASS/FAIL line per criterion. Runs without the libtest
//! harness so the lines always reach the test output. Exits nonzero when a
//! criterion fails for any reason other than the known odd-p discrepancy.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use dyadic_gk::density::{ramified_pair_report, rational_string, DensityReport};
use dyadic_gk::gk::{gk_odd_p, BinaryParams};
use dyadic_gk::lattice::{jordan_split, HalfIntMat, Subtype};
use dyadic_gk::suite::{
    binary_battery, formula_battery, corpus_rows, counter_battery, counterexample_battery, gk_batteries,
    hypothesis_battery, odd_p_battery, stabilization_battery, Battery,
};
use dyadic_gk::Ring;

const SEED: u64 = 0;
const CORPUS_SEED: u64 = dyadic_gk::density::corpus::DEFAULT_SEED;

struct Outcome {
    pass: bool,
    /// a failure that is a property of the mathematics, not of the code
    expected: bool,
    detail: String,
}

fn summary(bats: &[&Battery]) -> String {
    bats.iter()
        .map(|b| {
            let mut s = format!("{} {}/{}", b.name, b.passed, b.passed + b.failed);
            if let Some(f) = b.failures.first() {
                s += &format!(" [first failure: {f}]");
            }
            s
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn all_ok(bats: &[&Battery]) -> bool {
    bats.iter().all(|b| b.ok())
}

fn ramified_pair() -> Outcome {
    let t = Instant::now();
    let rows = ramified_pair_report().expect("closed form");
    let dt = t.elapsed();
    let mut pass = rows.len() == 2 && dt.as_secs_f64() < 1.0;
    for (row, beta) in rows.iter().zip(["q^7", "2*q^7"]) {
        pass &= row.gk_double == vec![0, 3, 3, 6];
        pass &= row.jor == vec![-2];
        pass &= row.egk_trunc.is_empty();
        pass &= row.beta.to_string() == beta;
    }
    let p1 = BinaryParams::new(dyadic_gk::gk::BinaryKind::RamifiedEven { g: 1 }, 5, 2).unwrap();
    let p2 = BinaryParams::new(dyadic_gk::gk::BinaryKind::RamifiedEven { g: 2 }, 5, 1).unwrap();
    pass &= p1.gk_double() == p2.gk_double();
    let detail = rows
        .iter()
        .map(|r| format!("{}: GK {:?} Jor {:?} EGK<=1 {} beta {}", r.label, r.gk_double, r.jor, r.egk_trunc, r.beta))
        .collect::<Vec<_>>()
        .join("; ");
    Outcome { pass, expected: false, detail: format!("{detail}; {:.3}s", dt.as_secs_f64()) }
}

fn type_coverage(rows: &[dyadic_gk::suite::CorpusRow]) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    for row in rows {
        let dec = jordan_split(&row.b).expect("nondegenerate");
        for c in &dec.constituents {
            let kind = match (c.subtype, c.refined) {
                (Subtype::IOdd, _) => "Io".to_string(),
                (Subtype::IEven, Some(r)) => format!("{r:?}"),
                (Subtype::IEven, None) => "Ie".to_string(),
                (Subtype::II, _) => "II".to_string(),
            };
            seen.insert(format!("{kind}/{}", if c.bound { "bound" } else { "free" }));
        }
    }
    seen
}

/// Explains every odd-p failure: both forms have rank 2 and their
/// determinants differ by a non-square unit, so one residual plane is split
/// and the other is not.
fn odd_p_explained() -> (bool, String) {
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
    let alpha = |b: &HalfIntMat| dyadic_gk::density::alpha_beta(b, None).map(|d: DensityReport| d.alpha).ok();
    let mut explained = true;
    let mut example = String::new();
    for (i, x) in forms.iter().enumerate() {
        for y in &forms[i + 1..] {
            if gk_odd_p(x).unwrap().seq != gk_odd_p(y).unwrap().seq {
                continue;
            }
            let (ax, ay) = (alpha(x), alpha(y));
            if ax == ay {
                continue;
            }
            let ratio = r.mul(&x.det_doubled(), &y.det_doubled());
            let split_differs = x.n() == 2 && y.n() == 2 && !r.is_square(&ratio);
            explained &= split_differs;
            if example.is_empty() {
                let show = |b: &HalfIntMat, a: &Option<num_rational::BigRational>| {
                    format!("{} alpha {}", serde_json::to_string(&b.to_json().doubled).unwrap(), a.as_ref().map(rational_string).unwrap_or_default())
                };
                example = format!("{} vs {}", show(x, &ax), show(y, &ay));
            }
        }
    }
    (explained, example)
}

fn main() -> ExitCode {
    let mut lines = Vec::new();
    let mut report = |n: usize, title: &str, o: Outcome, secs: f64| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let line = format!("criterion {n} {tag} {title} ({secs:.1}s): {}", o.detail);
        println!("{line}");
        lines.push((o.pass, o.expected));
    };

    let t = Instant::now();
    report(1, "two ramified lattices with equal invariants", ramified_pair(), t.elapsed().as_secs_f64());

    let t = Instant::now();
    let b = binary_battery();
    let o = Outcome { pass: b.ok(), expected: false, detail: summary(&[&b]) };
    report(2, "binary closed form against counting", o, t.elapsed().as_secs_f64());

    let t = Instant::now();
    let rows = corpus_rows(CORPUS_SEED, None);
    let corpus_secs = t.elapsed().as_secs_f64();
    let formula = formula_battery(&rows);
    let types = type_coverage(&rows);
    let want: BTreeSet<String> = ["Io/free", "Io/bound", "Ie1/free", "Ie2/free", "Ie/bound", "II/free", "II/bound"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let o = Outcome {
        pass: formula.ok() && rows.len() >= 200 && want.is_subset(&types) && corpus_secs < 1800.0,
        expected: false,
        detail: format!("{} lattices; {}; types {:?}", rows.len(), summary(&[&formula]), types),
    };
    report(3, "closed formula against counting on the corpus", o, corpus_secs);

    let t = Instant::now();
    let hyp = hypothesis_battery(&rows);
    let pairs = counterexample_battery();
    let o = Outcome { pass: all_ok(&[&hyp, &pairs]), expected: false, detail: summary(&[&hyp, &pairs]) };
    report(4, "equal invariants give equal densities", o, t.elapsed().as_secs_f64());

    let t = Instant::now();
    let gkb = gk_batteries(SEED, 100);
    let refs: Vec<&Battery> = gkb.iter().collect();
    let o = Outcome { pass: all_ok(&refs), expected: false, detail: summary(&refs) };
    report(5, "GK invariant battery", o, t.elapsed().as_secs_f64());

    let t = Instant::now();
    let counters = counter_battery(SEED, 100);
    let stab = stabilization_battery(&rows);
    let o = Outcome { pass: all_ok(&[&counters, &stab]), expected: false, detail: summary(&[&counters, &stab]) };
    report(6, "counter self-consistency", o, t.elapsed().as_secs_f64() + corpus_secs);

    let t = Instant::now();
    let odd = odd_p_battery();
    let (explained, example) = odd_p_explained();
    let o = Outcome {
        pass: odd.ok(),
        expected: !odd.ok() && explained,
        detail: if odd.ok() {
            summary(&[&odd])
        } else {
            format!(
                "{}; every discrepancy is a pair of rank 2 forms whose residual planes differ (split vs nonsplit), e.g. {example}",
                summary(&[&odd])
            )
        },
    };
    report(7, "odd p: equal GK gives equal alpha", o, t.elapsed().as_secs_f64());

    let unexpected = lines.iter().filter(|(pass, expected)| !pass && !expected).count();
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criteria failed unexpectedly");
        ExitCode::FAILURE
    }
}
