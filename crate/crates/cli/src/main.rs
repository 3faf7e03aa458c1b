//! `mdhier`: densities, verification suites, correlators and intersection tables as JSON.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mdhier::commuting::generate_table;
use mdhier::hierarchy::{
    density_genus, verify_degree_zero, verify_dr1_link, verify_integrability, verify_main_theorem, verify_tau_symmetry,
    DensitySpec, Report, Verdict,
};
use mdhier::providers::{CycleKind, IntegralKey, IntegralProvider, IntegralTable, Shape, StandardProvider};
use mdhier::suites::{bracket_axioms_suite, commutator_suite, degree_law_suite, ehrhart_suite};
use mdhier::tau::{batch, correlator, CorrelatorQuery, Model};
use mdhier::urep::phi_to_q;
use mdhier::{Bounds, Error, TruncationSpec};

#[derive(Parser)]
#[command(name = "mdhier", version, about = "Meromorphic-differential and DR hierarchies of the trivial CohFT")]
struct Cli {
    /// Indented JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Directory of extra intersection tables (*.json), merged with the shipped genus-2 table.
    #[arg(long, global = true, env = "MDHIER_TABLE_DIR")]
    tables: Option<PathBuf>,
    /// Write the document here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a hamiltonian density in u- and q-variables.
    Density(DensityArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Evaluate a tau-function correlator.
    Correlator(CorrelatorArgs),
    /// Inspect or produce intersection tables.
    Table {
        #[command(subcommand)]
        action: TableAction,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Md,
    Dr,
    Dr1,
}

impl From<KindArg> for CycleKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Md => CycleKind::MD,
            KindArg::Dr => CycleKind::DR,
            KindArg::Dr1 => CycleKind::DR1,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    H,
    G,
}

impl From<FamilyArg> for Shape {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::H => Shape::H,
            FamilyArg::G => Shape::G,
        }
    }
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long, allow_hyphen_values = true)]
    d: i64,
    #[arg(long, default_value_t = 1)]
    gmax: u32,
    /// q-window m ∈ [−m, m].
    #[arg(long, default_value_t = 3)]
    m: i64,
    #[arg(long, default_value_t = 3)]
    nmax: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Commutator,
    Ehrhart,
    BracketAxioms,
    DegreeLaw,
    Integrability,
    TauSymmetry,
    MainTheorem,
    Dr1Link,
    DegreeZero,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    #[arg(long, value_enum, default_value = "md")]
    kind: KindArg,
    #[arg(long)]
    d1: Option<i64>,
    #[arg(long)]
    d2: Option<i64>,
    /// Largest d swept when d1/d2 (or d) are not given.
    #[arg(long, default_value_t = 3)]
    dmax_sweep: i64,
    #[arg(long, default_value_t = 1)]
    gmax: u32,
    #[arg(long)]
    g: Option<u32>,
    #[arg(long)]
    l: Option<u32>,
    #[arg(long)]
    d: Option<i64>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, default_value_t = 4)]
    nmax: usize,
    #[arg(long, default_value_t = 4)]
    dmax: u32,
    #[arg(long = "Amax", default_value_t = 12)]
    amax: u64,
    #[arg(long, default_value_t = 200)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    m: i64,
    #[arg(long, default_value_t = 3)]
    hbar: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Wk,
    Bgw,
    Qwk,
}

#[derive(Args)]
struct CorrelatorArgs {
    #[arg(long, value_enum, required_unless_present = "batch")]
    model: Option<ModelArg>,
    /// Insertions d₁,…,dₙ (repeat or comma-separate).
    #[arg(long, value_delimiter = ',', required_unless_present = "batch")]
    d: Vec<u32>,
    #[arg(long, required_unless_present = "batch")]
    g: Option<u32>,
    /// Hodge split index (QWK only).
    #[arg(long)]
    l: Option<u32>,
    /// JSON array of queries, e.g. [{"model":"WK","d":[2],"g":1}].
    #[arg(long, conflicts_with_all = ["model", "d", "g", "l"])]
    batch: Option<PathBuf>,
}

#[derive(Subcommand)]
enum TableAction {
    /// List the entries of the active table (or one entry).
    Show {
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[arg(long, value_enum)]
        shape: Option<FamilyArg>,
        #[arg(long)]
        g: Option<u32>,
        #[arg(long)]
        psi_pow: Option<u32>,
        #[arg(long)]
        lam: Option<u32>,
    },
    /// Look up one key through the full provider (analytic data, tables, DR¹ assembly).
    Lookup {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, value_enum)]
        shape: FamilyArg,
        #[arg(long)]
        g: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        psi_pow: u32,
        #[arg(long)]
        lam: u32,
    },
    /// Produce a genus-g table from the commuting solve and the compact-type DR expansion.
    Generate {
        #[arg(long, default_value_t = 2)]
        g: u32,
        #[arg(long, default_value_t = 9)]
        psi_max: u32,
    },
    /// Load and validate table files.
    Check { files: Vec<PathBuf> },
}

enum Failure {
    Usage(String),
    Coverage(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Coverage { .. } => Failure::Coverage(e.to_string()),
            Error::Domain(_) | Error::Invalid(_) | Error::WindowTooSmall(_) | Error::Unsupported(_) => Failure::Usage(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

fn provider(cli: &Cli) -> Result<StandardProvider, Failure> {
    let mut table = IntegralTable::shipped();
    if let Some(dir) = &cli.tables {
        table.merge(IntegralTable::load_dir(dir)?)?;
    }
    Ok(StandardProvider::with_table(table))
}

fn density(args: &DensityArgs, p: &dyn IntegralProvider) -> Result<Value, Failure> {
    let kind: CycleKind = args.kind.into();
    let family: Shape = args.family.into();
    let u = density_genus(kind, family, args.d, args.gmax, p)?;
    let trunc = TruncationSpec::symmetric(args.m, args.nmax, Bounds::genus(args.gmax));
    let spec = DensitySpec::new(kind, family, args.d, trunc);
    let q = phi_to_q(&u, &spec.trunc);
    let mut slices = Vec::new();
    for g in 0..=args.gmax {
        for l in 0..=g {
            let s = u.slice(2 * l, g - l);
            if !s.is_zero() {
                slices.push(json!({"eps": 2 * l, "hbar": g - l, "u": s.to_string()}));
            }
        }
    }
    Ok(json!({
        "kind": kind.to_string(),
        "family": family.to_string(),
        "d": args.d,
        "gmax": args.gmax,
        "slices": slices,
        "u": u.to_json(),
        "q": q.to_json(),
    }))
}

fn d_pairs(args: &VerifyArgs) -> Vec<(i64, i64)> {
    match (args.d1, args.d2) {
        (Some(a), Some(b)) => vec![(a, b)],
        (Some(a), None) | (None, Some(a)) => (0..=args.dmax_sweep).map(|b| (a, b)).collect(),
        (None, None) => (0..=args.dmax_sweep).flat_map(|a| (a..=args.dmax_sweep).map(move |b| (a, b))).collect(),
    }
}

fn d_list(args: &VerifyArgs) -> Vec<i64> {
    match args.d {
        Some(d) => vec![d],
        None => (0..=args.dmax_sweep.min(2)).collect(),
    }
}

fn verify(args: &VerifyArgs, p: &dyn IntegralProvider) -> Result<Vec<Report>, Failure> {
    let kind: CycleKind = args.kind.into();
    let reports = match args.suite {
        Suite::Ehrhart => vec![ehrhart_suite(args.nmax, args.dmax, args.amax)?],
        Suite::Commutator => vec![commutator_suite(args.count, args.seed, args.m, args.hbar)?],
        Suite::BracketAxioms => vec![bracket_axioms_suite(args.count.min(50).max(1), args.seed)?],
        Suite::DegreeLaw => vec![degree_law_suite(args.count, args.seed, args.hbar)?],
        Suite::Integrability => {
            d_pairs(args).into_iter().map(|(a, b)| verify_integrability(kind, a, b, args.gmax, p)).collect::<Result<_, _>>()?
        }
        Suite::TauSymmetry => {
            d_pairs(args).into_iter().map(|(a, b)| verify_tau_symmetry(kind, a, b, args.gmax, p)).collect::<Result<_, _>>()?
        }
        Suite::Dr1Link => d_list(args).into_iter().map(|d| verify_dr1_link(d, args.gmax, p)).collect::<Result<_, _>>()?,
        Suite::DegreeZero => d_list(args).into_iter().map(|d| verify_degree_zero(d, args.gmax, p)).collect::<Result<_, _>>()?,
        Suite::MainTheorem => {
            let g = args.g.unwrap_or(1);
            let d = u32::try_from(args.d.unwrap_or(0)).map_err(|_| Failure::Usage("main-theorem needs d ≥ 0".into()))?;
            let ls: Vec<u32> = match args.l {
                Some(l) => vec![l],
                None => (0..=g).collect(),
            };
            let ns: Vec<u32> = match args.n {
                Some(n) => vec![n],
                None => (0..=3).collect(),
            };
            let mut out = Vec::new();
            for &l in &ls {
                for &n in &ns {
                    out.push(verify_main_theorem(g, d, l, n, p, p)?);
                }
            }
            out
        }
    };
    Ok(reports)
}

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::Commutator => "commutator",
        Suite::Ehrhart => "ehrhart",
        Suite::BracketAxioms => "bracket-axioms",
        Suite::DegreeLaw => "degree-law",
        Suite::Integrability => "integrability",
        Suite::TauSymmetry => "tau-symmetry",
        Suite::MainTheorem => "main-theorem",
        Suite::Dr1Link => "dr1-link",
        Suite::DegreeZero => "degree-zero",
    }
}

fn verify_document(suite: Suite, reports: &[Report]) -> (Value, bool) {
    let verdict = if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        Verdict::Fail
    } else if reports.iter().any(|r| r.verdict == Verdict::Inconclusive) {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    let pick = |v: Verdict| reports.iter().filter(|r| r.verdict == v).map(Report::to_json).collect::<Vec<_>>();
    let doc = json!({
        "suite": suite_name(suite),
        "verdict": verdict.to_string(),
        "passed": pick(Verdict::Pass),
        "failed": pick(Verdict::Fail),
        "inconclusive": pick(Verdict::Inconclusive),
    });
    (doc, verdict == Verdict::Pass)
}

fn correlator_doc(args: &CorrelatorArgs, p: &dyn IntegralProvider) -> Result<Value, Failure> {
    if let Some(path) = &args.batch {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        return Ok(batch(&v, p)?);
    }
    let model = match args.model.expect("required by clap") {
        ModelArg::Wk => Model::WK,
        ModelArg::Bgw => Model::BGW,
        ModelArg::Qwk => Model::QWK,
    };
    let g = args.g.expect("required by clap");
    let l = match (model, args.l) {
        (Model::QWK, Some(l)) => l,
        (Model::QWK, None) => return Err(Failure::Usage("--l is required for the qwk model".into())),
        (_, Some(_)) => return Err(Failure::Usage("--l only applies to the qwk model".into())),
        (_, None) => g,
    };
    let q = CorrelatorQuery::new(model, args.d.clone(), g, l)?;
    let v = correlator(&q, p)?;
    Ok(q.to_json(&v))
}

fn table_doc(action: &TableAction, p: &StandardProvider) -> Result<Value, Failure> {
    match action {
        TableAction::Show { kind, shape, g, psi_pow, lam } => {
            let kind = kind.map(CycleKind::from);
            let shape = shape.map(Shape::from);
            let mut t = IntegralTable::new();
            for (k, s) in p.table().entries() {
                let keep = kind.is_none_or(|x| x == k.kind)
                    && shape.is_none_or(|x| x == k.shape)
                    && g.is_none_or(|x| x == k.g)
                    && psi_pow.is_none_or(|x| x == k.psi_pow)
                    && lam.is_none_or(|x| x == k.lam);
                if keep {
                    t.insert(*k, s.clone())?;
                }
            }
            Ok(t.to_json())
        }
        TableAction::Lookup { kind, shape, g, n, psi_pow, lam } => {
            let key = IntegralKey::new((*kind).into(), (*shape).into(), *g, *n, *psi_pow, *lam);
            let s = p.integral(&key)?;
            Ok(json!({
                "key": key.to_string(),
                "poly": s.poly.to_json(),
                "monomial": s.monomial().to_string(),
                "provenance": s.provenance.to_string(),
                "source": s.source,
            }))
        }
        TableAction::Generate { g, psi_max } => Ok(generate_table(*g, *psi_max)?.to_json()),
        TableAction::Check { files } => {
            let mut rows = Vec::new();
            for f in files {
                let text = std::fs::read_to_string(f).map_err(|e| Failure::Usage(format!("{}: {e}", f.display())))?;
                let t = IntegralTable::parse(&text)?;
                rows.push(json!({"file": f.display().to_string(), "entries": t.len()}));
            }
            Ok(json!({"checked": rows}))
        }
    }
}

fn emit(cli: &Cli, doc: &Value) -> Result<(), Failure> {
    let mut text = if cli.pretty { serde_json::to_string_pretty(doc) } else { serde_json::to_string(doc) }
        .map_err(|e| Failure::Other(e.to_string()))?;
    text.push('\n');
    match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let p = provider(cli)?;
    let (doc, ok) = match &cli.command {
        Command::Density(a) => (density(a, &p)?, true),
        Command::Verify(a) => {
            let reports = verify(a, &p)?;
            verify_document(a.suite, &reports)
        }
        Command::Correlator(a) => (correlator_doc(a, &p)?, true),
        Command::Table { action } => (table_doc(action, &p)?, true),
    };
    emit(cli, &doc)?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            let (code, kind, msg) = match f {
                Failure::Usage(m) => (2, "usage", m),
                Failure::Coverage(m) => (3, "coverage", m),
                Failure::Other(m) => (1, "error", m),
            };
            eprintln!("{}", json!({"error": kind, "message": msg}));
            ExitCode::from(code)
        }
    }
}
