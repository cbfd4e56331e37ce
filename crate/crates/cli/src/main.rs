mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dyadic_gk::density::{
    self, alpha_beta, binary_beta, binary_profile, formula_beta_of, ramified_pair_report, theorem_check, Cache,
    DensityError, Method,
};
use dyadic_gk::gk::{egk_of, egk_trunc, gk_search, BinaryKind, BinaryParams, GkError, SearchOptions};
use dyadic_gk::lattice::{jordan_split, HalfIntMat, LatticeError};
use dyadic_gk::suite;

use input::load_matrix;
use output::{emit, mat_json, Format, Table};

#[derive(Parser)]
#[command(name = "dgk", version, about = "Gross-Keating invariants and local densities over dyadic rings")]
struct Cli {
    /// Ring specification as JSON, used when the matrix does not carry one.
    #[arg(long, global = true)]
    ring: Option<String>,
    /// Matrix JSON (inline or a file path). Repeat for `theorem-check`.
    #[arg(long, global = true)]
    matrix: Vec<String>,
    /// Counting level override.
    #[arg(long = "N", global = true)]
    level: Option<u32>,
    /// Search budget in basis moves.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    budget: u64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for the density cache.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// GK invariant with its certificate.
    Gk,
    /// Extended GK datum.
    Egk,
    /// Truncated EGK of each `A_i` in a Jordan splitting.
    EgkTrunc,
    /// Jordan splitting and constituent types.
    Jordan,
    /// Local density `alpha(B, B)` and its normalizations.
    Density {
        #[arg(long, value_enum, default_value_t = DensityMethod::Auto)]
        method: DensityMethod,
    },
    /// Invariants and closed-form density of a binary lattice `(o + pi^f o_E, N)`.
    Binary {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// For ramified kinds with even discriminant exponent `2g`.
        #[arg(long, default_value_t = 1)]
        g: u32,
        #[arg(long, default_value_t = 1)]
        e: u32,
        #[arg(long, default_value_t = 0)]
        f: u32,
        /// Residue degree of the base ring.
        #[arg(long = "res-deg", default_value_t = 1)]
        res_deg: u32,
        /// Also count the density.
        #[arg(long)]
        count: bool,
    },
    /// Compare two lattices: invariants and densities.
    TheoremCheck,
    /// Run verification batteries and print pass/fail counts.
    Suite {
        /// Only the named batteries (gk, counter, binary, corpus, counterexamples, odd-p).
        #[arg(long)]
        only: Vec<String>,
    },
    /// Closed-form tables for binary lattices.
    Tables {
        /// The two-row comparison at `e = 5`.
        #[arg(long = "example-a1")]
        ramified_pair: bool,
        #[arg(long, default_value_t = 1)]
        e: u32,
        #[arg(long = "f-max", default_value_t = 2)]
        f_max: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DensityMethod {
    Auto,
    Count,
    Formula,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Split,
    Unramified,
    RamifiedEven,
    RamifiedOdd,
}

/// A failure with its exit status.
#[derive(Debug)]
pub struct Fail {
    code: u8,
    msg: String,
}

impl Fail {
    pub fn parse(msg: impl ToString) -> Fail {
        Fail { code: 2, msg: msg.to_string() }
    }
    fn budget(msg: impl ToString) -> Fail {
        Fail { code: 3, msg: msg.to_string() }
    }
    fn invariant(msg: impl ToString) -> Fail {
        Fail { code: 4, msg: msg.to_string() }
    }
}

impl From<DensityError> for Fail {
    fn from(e: DensityError) -> Fail {
        match e {
            DensityError::Budget => Fail::budget(e),
            DensityError::Degenerate => Fail::parse(e),
            DensityError::Inconsistent(_) => Fail::invariant(e),
            DensityError::Gk(g) => g.into(),
            DensityError::Lattice(l) => l.into(),
            other => Fail { code: 1, msg: other.to_string() },
        }
    }
}

impl From<GkError> for Fail {
    fn from(e: GkError) -> Fail {
        match e {
            GkError::Budget => Fail::budget(e),
            GkError::Inconsistent(_) => Fail::invariant(e),
            GkError::Lattice(l) => l.into(),
            other => Fail { code: 1, msg: other.to_string() },
        }
    }
}

impl From<LatticeError> for Fail {
    fn from(e: LatticeError) -> Fail {
        match e {
            LatticeError::Parse(_)
            | LatticeError::NotSymmetric
            | LatticeError::NotHalfIntegral(_)
            | LatticeError::Shape
            | LatticeError::Degenerate => {
                Fail::parse(e)
            }
            other => Fail { code: 1, msg: other.to_string() },
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("dgk: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn one_matrix(cli: &Cli) -> Result<HalfIntMat, Fail> {
    match cli.matrix.as_slice() {
        [m] => load_matrix(m, cli.ring.as_deref()),
        [] => Err(Fail::parse("--matrix is required")),
        _ => Err(Fail::parse("expected a single --matrix")),
    }
}

fn search_opts(cli: &Cli) -> SearchOptions {
    SearchOptions { budget: cli.budget, seed: cli.seed }
}

fn run(cli: &Cli) -> Result<String, Fail> {
    match &cli.command {
        Command::Gk => {
            let b = one_matrix(cli)?;
            let d = gk_search(&b, &search_opts(cli))?;
            let mut v = json!({"gk": d.seq, "certified": d.certified});
            if let Some(c) = &d.certificate {
                v["certificate"] = json!({
                    "U": mat_json(b.ring(), &c.u),
                    "sigma": c.sigma.0.iter().map(|j| j + 1).collect::<Vec<_>>(),
                });
            }
            let out = emit(cli.format, &Table::from_object(&v));
            if !d.certified {
                print!("{out}");
                return Err(Fail::budget("search budget exhausted without a certificate"));
            }
            Ok(out)
        }
        Command::Egk => {
            let b = one_matrix(cli)?;
            let d = gk_search(&b, &search_opts(cli))?;
            if !d.certified {
                return Err(Fail::budget("search budget exhausted without a certificate"));
            }
            let e = egk_of(&d)?;
            let v = json!({
                "gk": d.seq,
                "certified": d.certified,
                "egk": {"n": e.n, "m": e.m, "zeta": e.zeta},
                "egk_string": e.to_string(),
            });
            Ok(emit(cli.format, &Table::from_object(&v)))
        }
        Command::EgkTrunc => {
            let b = one_matrix(cli)?;
            let dec = jordan_split(&b)?;
            let mut t = Table::new(&["i", "egk_trunc"]);
            for c in &dec.constituents {
                let e = egk_trunc(&dec.sublattice_ai(c.scale)?)?;
                t.push(vec![json!(c.scale), json!(e.to_string())]);
            }
            Ok(emit(cli.format, &t))
        }
        Command::Jordan => {
            let b = one_matrix(cli)?;
            let dec = jordan_split(&b)?;
            let mut t = Table::new(&["scale", "rank", "parity", "subtype", "refined", "bound"]);
            for c in &dec.constituents {
                t.push(vec![
                    json!(c.scale),
                    json!(c.rank),
                    serde_json::to_value(c.parity).unwrap_or(Value::Null),
                    serde_json::to_value(c.subtype).unwrap_or(Value::Null),
                    serde_json::to_value(c.refined).unwrap_or(Value::Null),
                    json!(c.bound),
                ]);
            }
            Ok(emit(cli.format, &t))
        }
        Command::Density { method } => {
            let b = one_matrix(cli)?;
            let rep = match (method, cli.level) {
                (DensityMethod::Formula, _) => formula_beta_of(&b)?,
                (DensityMethod::Count, level) | (DensityMethod::Auto, level @ Some(_)) => match &cli.cache {
                    Some(dir) => open_cache(dir)?.alpha_beta(&b, level)?,
                    None => alpha_beta(&b, level)?,
                },
                (DensityMethod::Auto, None) if b.n() <= density::MAX_COUNTED_RANK => match &cli.cache {
                    Some(dir) => open_cache(dir)?.alpha_beta(&b, None)?,
                    None => alpha_beta(&b, None)?,
                },
                (DensityMethod::Auto, None) => density::density(&b)?,
            };
            Ok(emit(cli.format, &Table::from_object(&rep.to_json())))
        }
        Command::Binary { kind, g, e, f, res_deg, count } => {
            let kind = match kind {
                KindArg::Split => BinaryKind::Unramified { xi: 1 },
                KindArg::Unramified => BinaryKind::Unramified { xi: -1 },
                KindArg::RamifiedEven => BinaryKind::RamifiedEven { g: *g },
                KindArg::RamifiedOdd => BinaryKind::RamifiedOdd,
            };
            let p = BinaryParams::new(kind, *e, *f).map_err(Fail::parse)?;
            let prof = binary_profile(&p)?;
            let r = p.ring(*res_deg)?;
            let closed = binary_beta(&p, r.q())?;
            let mut v = json!({
                "label": p.label(),
                "jor": prof.jor,
                "gk_ai": prof.gk_ai,
                "egk_trunc": prof.egk_trunc,
                "gk_double": prof.gk_double,
                "beta": density::closed::binary_beta_poly(&p)?.to_string(),
                "beta_at_q": density::rational_string(&closed.beta),
                "method": Method::BinaryClosed.to_string(),
            });
            if *count {
                let b = p.matrix(&r)?;
                let c = alpha_beta(&b, cli.level)?;
                v["counted"] = c.to_json();
                if c.beta != closed.beta {
                    print!("{}", emit(cli.format, &Table::from_object(&v)));
                    return Err(Fail::invariant("closed form and count disagree"));
                }
            }
            Ok(emit(cli.format, &Table::from_object(&v)))
        }
        Command::TheoremCheck => {
            let [l, m] = cli.matrix.as_slice() else {
                return Err(Fail::parse("theorem-check needs two --matrix arguments"));
            };
            let l = load_matrix(l, cli.ring.as_deref())?;
            let m = load_matrix(m, cli.ring.as_deref())?;
            let v = theorem_check(&l, &m)?;
            Ok(emit(cli.format, &Table::from_object(&v.to_json())))
        }
        Command::Suite { only } => run_suite(cli, only),
        Command::Tables { ramified_pair, e, f_max } => {
            if *ramified_pair {
                let mut t = Table::new(&["label", "gk_double", "jor", "egk_trunc", "beta", "method"]);
                for row in ramified_pair_report()? {
                    t.push(vec![
                        json!(row.label),
                        json!(output::seq(&row.gk_double)),
                        json!(output::seq(&row.jor)),
                        json!(row.egk_trunc.to_string()),
                        json!(row.beta.to_string()),
                        json!(Method::BinaryClosed.to_string()),
                    ]);
                }
                let fmt = if cli.format == Format::Json { Format::Csv } else { cli.format };
                return Ok(emit(fmt, &t));
            }
            let mut t = Table::new(&["label", "e", "f", "jor", "gk_ai", "egk_trunc", "gk_double", "beta", "method"]);
            for kind in BinaryParams::kinds(*e) {
                for f in 0..=*f_max {
                    let p = BinaryParams::new(kind, *e, f).map_err(Fail::parse)?;
                    let prof = binary_profile(&p)?;
                    t.push(vec![
                        json!(p.label()),
                        json!(e),
                        json!(f),
                        json!(output::seq(&prof.jor)),
                        json!(output::seq(&prof.gk_ai)),
                        json!(prof.egk_trunc),
                        json!(output::seq(&prof.gk_double)),
                        json!(density::closed::binary_beta_poly(&p)?.to_string()),
                        json!(Method::BinaryClosed.to_string()),
                    ]);
                }
            }
            Ok(emit(cli.format, &t))
        }
    }
}

fn open_cache(dir: &std::path::Path) -> Result<Cache, Fail> {
    Cache::open(dir).map_err(|e| Fail { code: 1, msg: format!("cache: {e}") })
}

fn run_suite(cli: &Cli, only: &[String]) -> Result<String, Fail> {
    const NAMES: [&str; 6] = ["gk", "counter", "binary", "corpus", "counterexamples", "odd-p"];
    if let Some(bad) = only.iter().find(|n| !NAMES.contains(&n.as_str())) {
        return Err(Fail::parse(format!("unknown battery {bad}")));
    }
    let want = |n: &str| only.is_empty() || only.iter().any(|o| o == n);
    let mut cache = cli.cache.as_deref().map(open_cache).transpose()?;
    let mut out = Vec::new();
    if want("gk") {
        out.extend(suite::gk_batteries(cli.seed, 100));
    }
    if want("counter") {
        out.push(suite::counter_battery(cli.seed, 100));
    }
    if want("binary") {
        out.push(suite::binary_battery());
    }
    if want("corpus") {
        let rows = suite::corpus_rows(density::corpus::DEFAULT_SEED, cache.as_mut());
        out.push(suite::formula_battery(&rows));
        out.push(suite::hypothesis_battery(&rows));
        out.push(suite::stabilization_battery(&rows));
    }
    if want("counterexamples") {
        out.push(suite::counterexample_battery());
    }
    if want("odd-p") {
        out.push(suite::odd_p_battery());
    }
    let mut t = Table::new(&["battery", "passed", "failed", "first_failure"]);
    for b in &out {
        t.push(vec![
            json!(b.name),
            json!(b.passed),
            json!(b.failed),
            json!(b.failures.first().cloned().unwrap_or_default()),
        ]);
    }
    let text = emit(cli.format, &t);
    if out.iter().any(|b| b.failed > 0) {
        print!("{text}");
        return Err(Fail::invariant("some batteries failed"));
    }
    Ok(text)
}
