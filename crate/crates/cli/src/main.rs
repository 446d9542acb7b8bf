use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use sha2::{Digest, Sha256};

use qmzv::divisor_sums::{u_series_with, UPath};
use qmzv::harness::{self, lehmer_scan, prime_vanishing_report, registry, IdentityReport};
use qmzv::quasi_shuffle::sym_traceform;
use qmzv::{bracket, qshuffle, LinComb, MDIndex, Word};

#[derive(Parser, Debug)]
#[command(
    name = "qmzv",
    version,
    about = "Exact q-multiple zeta values of level N"
)]
struct Cli {
    /// Truncation order T; series are known modulo q^T.
    #[arg(long, global = true, default_value_t = 50)]
    order: u64,
    /// Default level for indices and words.
    #[arg(long, global = true, default_value_t = 1)]
    level: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Directory for cached identity reports.
    #[arg(long, global = true, env = "QMZV_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PathArg {
    Rational,
    Divisor,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expand U_{k;c;N}(q) for an index `k1,k2;c1,c2;N`.
    Expand {
        index: String,
        #[arg(long, value_enum, default_value_t = PathArg::Rational)]
        path: PathArg,
    },
    /// Quasi-shuffle product of two words such as "z[2;1] z[1;0]".
    Shuffle {
        left: String,
        right: String,
        /// Also compare [w ∗ v] with [w][v].
        #[arg(long)]
        check: bool,
    },
    /// Symmetric traceform of the given weights.
    Sym {
        weights: String,
        #[arg(long)]
        colors: Option<String>,
    },
    /// Check registered identities.
    Verify {
        ids: Vec<String>,
        #[arg(long, conflicts_with = "ids")]
        all: bool,
        #[arg(long)]
        list: bool,
    },
    /// Tabulate the τ(p) relation at primes.
    Lehmer {
        #[arg(long, default_value_t = 100)]
        pmax: u64,
    },
    /// Vanishing set of a prime detecting series.
    PrimeDetect {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        l: u32,
        /// Excluded residue classes, comma separated.
        #[arg(long, value_delimiter = ',')]
        exclude: Vec<u32>,
        #[arg(long)]
        correction: bool,
        #[arg(long, default_value_t = 500)]
        nmax: u64,
    },
}

fn parse_index(s: &str, level: u32) -> Result<MDIndex> {
    let fields = s.split(';').count();
    let full = match fields {
        1 => format!("{s};;{level}"),
        2 => format!("{s};{level}"),
        _ => s.to_string(),
    };
    Ok(full.parse::<MDIndex>()?)
}

fn parse_list(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| {
            x.trim()
                .parse::<i64>()
                .with_context(|| format!("bad integer {x:?}"))
        })
        .collect()
}

fn lincomb_json(x: &LinComb) -> serde_json::Value {
    let terms: Vec<_> = x
        .terms()
        .map(|(w, c)| json!({ "word": w.to_string(), "coeff": c }))
        .collect();
    json!({ "level": x.level(), "terms": terms })
}

fn cache_path(dir: &Path, id: &str, order: u64) -> PathBuf {
    let mut h = Sha256::new();
    h.update(format!(
        "qmzv-report/{}/{id}/{order}",
        env!("CARGO_PKG_VERSION")
    ));
    dir.join(format!("{}.json", hex::encode(h.finalize())))
}

fn cached_verify(dir: Option<&Path>, id: &str, order: u64) -> Result<IdentityReport> {
    let Some(dir) = dir else {
        return Ok(harness::verify(id, order)?);
    };
    let path = cache_path(dir, id, order);
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(r) = serde_json::from_str::<IdentityReport>(&text) {
            if r.id == id && r.order == order {
                return Ok(r);
            }
        }
    }
    let r = harness::verify(id, order)?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(&path, serde_json::to_string_pretty(&r)?)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(r)
}

fn print_registry() {
    for e in registry() {
        eprintln!("  {:<36} {}  {}", e.id, e.expected, e.summary);
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let json = cli.format == Format::Json;
    match cli.command {
        Command::Expand { index, path } => {
            let idx = parse_index(&index, cli.level)?;
            let path = match path {
                PathArg::Rational => UPath::Rational,
                PathArg::Divisor => UPath::Divisor,
            };
            let s = u_series_with(&idx, cli.order, path);
            if json {
                println!("{}", serde_json::to_string(&s)?);
            } else {
                println!("{s}");
            }
        }
        Command::Shuffle { left, right, check } => {
            let w = Word::parse(&left, cli.level)?;
            let v = Word::parse(&right, cli.level)?;
            let p = qshuffle(&w, &v)?;
            let ok = check.then(|| {
                let lhs = bracket(&p, cli.order);
                let rhs = bracket(&LinComb::word(w.clone()), cli.order)
                    .mul(&bracket(&LinComb::word(v.clone()), cli.order));
                rhs.map(|r| r == lhs)
            });
            let ok = ok.transpose()?;
            if json {
                let mut out = lincomb_json(&p);
                if let Some(ok) = ok {
                    out["homomorphism"] = json!({ "order": cli.order, "holds": ok });
                }
                println!("{out}");
            } else {
                println!("{p}");
                if let Some(ok) = ok {
                    println!(
                        "[w ∗ v] = [w][v] mod q^{}: {}",
                        cli.order,
                        if ok { "holds" } else { "FAILS" }
                    );
                }
            }
            if ok == Some(false) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Sym { weights, colors } => {
            let k: Vec<u32> = parse_list(&weights)?
                .into_iter()
                .map(|x| u32::try_from(x).context("weights must be nonnegative"))
                .collect::<Result<_>>()?;
            let c = match colors {
                Some(c) => parse_list(&c)?,
                None => vec![0; k.len()],
            };
            let s = sym_traceform(&k, &c, cli.level, cli.order)?;
            if json {
                println!("{}", serde_json::to_string(&s)?);
            } else {
                println!("{s}");
            }
        }
        Command::Verify { ids, all, list } => {
            if list {
                for e in registry() {
                    println!("{:<36} {}  {}", e.id, e.expected, e.summary);
                }
                return Ok(ExitCode::SUCCESS);
            }
            let ids: Vec<String> = if all {
                registry().iter().map(|e| e.id.to_string()).collect()
            } else {
                ids
            };
            if ids.is_empty() {
                bail!("no identities given; pass ids, --all or --list");
            }
            for id in &ids {
                if harness::lookup(id).is_err() {
                    eprintln!("unknown identity {id:?}; registered ids:");
                    print_registry();
                    return Ok(ExitCode::from(2));
                }
            }
            let mut reports = Vec::new();
            for id in &ids {
                reports.push(cached_verify(cli.cache_dir.as_deref(), id, cli.order)?);
            }
            if json {
                println!("{}", serde_json::to_string_pretty(&reports)?);
            } else {
                for r in &reports {
                    print!(
                        "{:<36} {:<4} expected {:<4} order {:<4} mismatches {}",
                        r.id, r.status, r.expected, r.order, r.mismatch_count
                    );
                    if let Some(m) = r.mismatches.first() {
                        let at = if m.den == 1 {
                            format!("q^{}", m.num)
                        } else {
                            format!("q^({}/{})", m.num, m.den)
                        };
                        print!("  first at {at}: {} vs {}", m.lhs, m.rhs);
                        if !m.case.is_empty() {
                            print!(" [{}]", m.case);
                        }
                    }
                    println!();
                }
            }
            let ok = reports.iter().all(IdentityReport::as_expected);
            return Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            });
        }
        Command::Lehmer { pmax } => {
            let rows = lehmer_scan(pmax)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&rows)?);
            } else {
                println!(
                    "{:>5} {:>28} {:>28} {:>5} {:>14} {:>5}",
                    "p", "lhs", "Q(p)", "equal", "tau", "ok"
                );
                for r in &rows {
                    println!(
                        "{:>5} {:>28} {:>28} {:>5} {:>14} {:>5}",
                        r.p,
                        r.lhs.to_string(),
                        r.rhs.to_string(),
                        r.equal,
                        r.tau,
                        r.consistent
                    );
                }
            }
        }
        Command::PrimeDetect {
            k,
            l,
            exclude,
            correction,
            nmax,
        } => {
            let s: BTreeSet<u32> = exclude.into_iter().collect();
            let r = prime_vanishing_report(k, l, cli.level, &s, correction, nmax)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                println!(
                    "k={} l={} N={} S={:?} correction={} n≤{}",
                    r.k, r.l, r.level, r.excluded, r.correction, r.nmax
                );
                println!("zeros: {}", r.vanishing.len());
                println!("composite zeros: {:?}", r.composite_zeros);
                for c in &r.candidates {
                    println!(
                        "  {:<20} exact={} on primes={}",
                        c.name, c.exact, c.on_primes
                    );
                }
                println!(
                    "exact match: {}",
                    r.exact_match.as_deref().unwrap_or("none")
                );
                println!(
                    "prime match: {}",
                    r.prime_match.as_deref().unwrap_or("none")
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
