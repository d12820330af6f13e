use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use selmer_core::arith::is_prime;
use selmer_core::certify::{
    report_bsd_ledger, run_construction, verify_certificate, Certificate, ConstructionRequest, DEFAULT_SCAN_BOUND,
    DEFAULT_TORSION_PRIMES,
};
use selmer_core::cft::VerificationLevel;
use selmer_core::error::Error;
use selmer_core::exec::Execution;
use selmer_core::groups::{all_relations, dihedral_group, subgroup_classes, GRelation};
use selmer_core::legendre::{split_oracle, torsion_probe, LegendreCurve};
use selmer_core::quadfield::{scan, PrimeSet, QuadraticField};
use selmer_core::regconst::{lattice_library, sampled_regulator_constants};

#[derive(Parser)]
#[command(name = "selmer", version, about = "Dihedral constructions with certified Tamagawa quotients")]
struct Cli {
    /// TOML file with default bounds (scan_bound, seed, mode, torsion_primes).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Run sweeps on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Full,
    Structural,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SetArg {
    S1,
    S2,
}

#[derive(Subcommand)]
enum Command {
    /// List the first primes of S1 or S2 for Q(sqrt(d)) and p.
    #[command(allow_negative_numbers = true)]
    Scan {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        d: i64,
        #[arg(long, value_enum, default_value_t = SetArg::S2)]
        set: SetArg,
        #[arg(long, default_value_t = 4)]
        count: usize,
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Print and check the relation of the dihedral group of order 2p.
    Relation {
        #[arg(long)]
        p: u64,
    },
    /// Regulator constants of the lattice library under several pairings.
    Regconst {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 5)]
        pairings: usize,
    },
    /// Classify the Legendre curve with the given lambda.
    #[command(allow_negative_numbers = true)]
    Curve {
        #[arg(long)]
        lambda: String,
        /// Also run the torsion probe for this p.
        #[arg(long)]
        p: Option<u64>,
    },
    /// Run the construction and emit a certificate.
    #[command(allow_negative_numbers = true)]
    Build {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        d: i64,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        bound: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-derive every field of a certificate.
    Verify { file: PathBuf },
    /// Valuation ledger of a certificate.
    Ledger { file: PathBuf },
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    scan_bound: Option<u64>,
    seed: Option<u64>,
    mode: Option<String>,
    torsion_primes: Option<usize>,
}

enum Failure {
    Core(Error),
    Io(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(e) if e.is_resource_exhaustion() => 3,
            Failure::Core(e) if e.is_input_rejection() => 2,
            Failure::Core(_) | Failure::Verification(_) => 1,
            Failure::Io(_) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Io(m) | Failure::Verification(m) => m.clone(),
        }
    }
}

type Outcome = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Verification(report)) => {
            print!("{report}");
            ExitCode::from(1)
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<Config, Failure> {
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read_certificate(path: &Path) -> Result<Certificate, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(Certificate::from_json(&text)?)
}

fn pretty(v: &serde_json::Value) -> String {
    format!("{}\n", serde_json::to_string_pretty(v).expect("json value serializes"))
}

fn run(cli: &Cli) -> Outcome {
    let config = load_config(cli.config.as_deref())?;
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match &cli.command {
        Command::Scan {
            p,
            d,
            set,
            count,
            bound,
        } => {
            let k = QuadraticField::new(*d)?;
            let set = match set {
                SetArg::S1 => PrimeSet::S1,
                SetArg::S2 => PrimeSet::S2,
            };
            let bound = bound.or(config.scan_bound).unwrap_or(DEFAULT_SCAN_BOUND);
            let primes = scan(&k, *p, set, *count, bound, exec)?;
            Ok(match cli.format {
                Format::Json => pretty(&json!({
                    "set": set.name(),
                    "d": d.to_string(),
                    "p": p.to_string(),
                    "primes": primes.iter().map(u64::to_string).collect::<Vec<_>>(),
                })),
                Format::Text => format!(
                    "{} for Q(sqrt({d})), p = {p}: {}\n",
                    set.name(),
                    primes.iter().map(u64::to_string).collect::<Vec<_>>().join(", ")
                ),
            })
        }
        Command::Relation { p } => relation(*p, cli.format),
        Command::Regconst { p, seed, pairings } => {
            let g = dihedral_group(*p)?;
            let theta = GRelation::dihedral(&g)?;
            let seed = seed.or(config.seed).unwrap_or(0);
            let mut rows = Vec::new();
            for (i, (label, lattice)) in lattice_library(&g).into_iter().enumerate() {
                let values = sampled_regulator_constants(&g, &theta, &lattice, *pairings, seed.wrapping_add(i as u64))?;
                let independent = values.windows(2).all(|w| w[0] == w[1]);
                rows.push((label, lattice.rank(), values[0].to_string(), independent));
            }
            Ok(match cli.format {
                Format::Json => pretty(&json!(rows
                    .iter()
                    .map(|(l, r, v, ok)| json!({"lattice": l, "rank": r.to_string(), "value": v, "pairing_independent": ok}))
                    .collect::<Vec<_>>())),
                Format::Text => rows
                    .iter()
                    .map(|(l, r, v, ok)| {
                        format!("{l:10} rank {r:3}  C = {v:8}  {}\n", if *ok { "pairing-independent" } else { "PAIRING-DEPENDENT" })
                    })
                    .collect(),
            })
        }
        Command::Curve { lambda, p } => curve(lambda, *p, cli.format),
        Command::Build {
            p,
            d,
            n,
            bound,
            seed,
            mode,
            out,
        } => {
            let mut req = ConstructionRequest::new(*p, *d, *n);
            req.scan_bound = bound.or(config.scan_bound).unwrap_or(DEFAULT_SCAN_BOUND);
            req.seed = seed.or(config.seed).unwrap_or(0);
            req.torsion_primes = config.torsion_primes.unwrap_or(DEFAULT_TORSION_PRIMES);
            req.mode = match mode {
                Some(Mode::Full) => VerificationLevel::Full,
                Some(Mode::Structural) => VerificationLevel::Structural,
                None => match &config.mode {
                    Some(m) => VerificationLevel::parse(m)?,
                    None => VerificationLevel::Full,
                },
            };
            req.execution = exec;
            let cert = run_construction(&req)?;
            for w in &cert.warnings {
                eprintln!("warning: {w}");
            }
            let json = cert.to_json();
            if let Some(path) = out {
                std::fs::write(path, &json).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            }
            Ok(match (cli.format, out) {
                (Format::Json, None) => json,
                (Format::Json, Some(_)) => String::new(),
                (Format::Text, _) => format!(
                    "primes {}\nlambda {}\nC(E/Theta) = {} (ord_{p} = {})\nlevel {}\ndigest {}\n",
                    cert.primes_used.join(", "),
                    cert.curve.lambda,
                    cert.tamagawa.value,
                    cert.tamagawa.ordp,
                    cert.extension.verification_level,
                    cert.digest
                ),
            })
        }
        Command::Verify { file } => {
            let cert = read_certificate(file)?;
            let report = verify_certificate(&cert);
            let text = match cli.format {
                Format::Json => pretty(&json!({"passed": report.passed(), "checks": report.checks})),
                Format::Text => report.render_text(),
            };
            if report.passed() {
                Ok(text)
            } else {
                Err(Failure::Verification(text))
            }
        }
        Command::Ledger { file } => {
            let ledger = report_bsd_ledger(&read_certificate(file)?)?;
            Ok(match cli.format {
                Format::Json => pretty(&serde_json::to_value(&ledger).expect("ledger serializes")),
                Format::Text => ledger.render_text(),
            })
        }
    }
}

fn relation(p: u64, format: Format) -> Outcome {
    let g = dihedral_group(p)?;
    let theta = GRelation::dihedral(&g)?;
    let classes = subgroup_classes(&g);
    let rank = all_relations(&g).len();
    let terms: Vec<(String, usize, i64)> = theta
        .terms()
        .iter()
        .map(|t| (t.class.label.clone(), t.class.order(), t.coefficient))
        .collect();
    Ok(match format {
        Format::Json => pretty(&json!({
            "group_order": g.order().to_string(),
            "subgroup_classes": classes.iter().map(|c| c.label.clone()).collect::<Vec<_>>(),
            "terms": terms.iter().map(|(l, o, c)| json!({"subgroup": l, "order": o.to_string(), "coefficient": c.to_string()})).collect::<Vec<_>>(),
            "relation_rank": rank.to_string(),
        })),
        Format::Text => {
            let sum: Vec<String> = terms.iter().map(|(l, _, c)| format!("{c:+} {l}")).collect();
            format!("D{}: Theta = {}\nrelation space rank {rank}\n", g.order(), sum.join(" "))
        }
    })
}

fn curve(lambda: &str, p: Option<u64>, format: Format) -> Outcome {
    let lambda = lambda
        .parse()
        .map_err(|_| Error::InvalidInput(format!("lambda `{lambda}` is not an integer")))?;
    let curve = LegendreCurve::new(lambda)?;
    let inv = curve.invariants();
    let table = curve.bad_prime_table()?;
    let mut rows = Vec::new();
    for d in &table {
        let oracle = if d.q == 2 {
            None
        } else {
            Some(split_oracle(curve.lambda(), d.q)?.name())
        };
        rows.push((d.q, d.kind.name(), d.c_exponent, oracle));
    }
    let probe = match p {
        Some(p) if is_prime(p) => Some(torsion_probe(curve.lambda(), p, DEFAULT_TORSION_PRIMES)?),
        Some(p) => return Err(Error::InvalidInput(format!("p = {p} is not prime")).into()),
        None => None,
    };
    Ok(match format {
        Format::Json => pretty(&json!({
            "lambda": curve.lambda().to_string(),
            "c4": inv.c4.to_string(),
            "delta": inv.delta.to_string(),
            "j_num": inv.j_num.to_string(),
            "j_den": inv.j_den.to_string(),
            "bad_primes": rows.iter().map(|(q, k, c, o)| json!({"q": q.to_string(), "type": k, "c_exponent": c.to_string(), "oracle": o})).collect::<Vec<_>>(),
            "torsion_bound": probe.as_ref().map(|t| t.bound.to_string()),
        })),
        Format::Text => {
            let mut out = format!(
                "lambda {}\nc4 {}\ndelta {}\nj {}/{}\n",
                curve.lambda(),
                inv.c4,
                inv.delta,
                inv.j_num,
                inv.j_den
            );
            for (q, k, c, o) in &rows {
                out.push_str(&format!("  q = {q:6}  {k:22} c = {c}"));
                if let Some(o) = o {
                    out.push_str(&format!("  oracle {o}"));
                }
                out.push('\n');
            }
            if let Some(t) = probe {
                out.push_str(&format!("torsion bound {} from {} primes\n", t.bound, t.primes.len()));
            }
            out
        }
    })
}
