//! The `linv` command line.
//!
//! Every subcommand prints one JSON envelope `{manifest, result}` on standard
//! output and a short human summary on standard error. Exit codes: 0 when the
//! run completed and every checked claim held, 2 when a claim was violated,
//! 1 for usage and I/O errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{mpsc, Arc};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use linv_core::gf2n::{hex, FieldSpec};
use linv_core::inverse_perm::{kernel_structure_check, PairOracle};
use linv_core::kloosterman::{census_csv, kloosterman_sums, kloosterman_zeros};
use linv_core::search::{self, SearchOptions, SearchReport, Strategy};
use linv_core::suites;
use linv_core::vbf::TruthTable;
use linv_core::{FieldContext, LinearizedPoly};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "linv", version, about = "Permutations of the form L1(x^-1) + L2(x) over GF(2^n)")]
struct Cli {
    /// Worker threads for parallel stages.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Print the envelope on one line instead of indented.
    #[arg(long, global = true)]
    json: bool,
    #[cfg(feature = "fault-injection")]
    #[arg(long, global = true, hide = true)]
    corrupt_oracle: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct FieldArg {
    /// Field as `n` or `n:0xMODULUS`.
    #[arg(long)]
    field: FieldSpec,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Modulus, generator, trace mask, dual basis and subfields.
    FieldInfo(FieldArg),
    /// Kloosterman sums.
    Kloosterman {
        #[command(subcommand)]
        command: KloostermanCommand,
    },
    /// Exhaustive checks of individual results.
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
    /// Searches for permutation pairs.
    Search {
        #[command(subcommand)]
        mode: Mode,
    },
    /// Differential and Walsh invariants of a function.
    Invariants {
        #[command(flatten)]
        field: FieldArg,
        /// Truth-table file: header `n:0xHEX`, then 2^n hex values.
        #[arg(long, conflicts_with = "power")]
        table: Option<PathBuf>,
        /// Use the power function x^k.
        #[arg(long)]
        power: Option<u64>,
    },
    /// Full report on one pair (L1, L2).
    CheckPair {
        #[command(flatten)]
        field: FieldArg,
        /// Coefficients of L1 as `c0,c1,...` in hex.
        #[arg(long)]
        l1: String,
        /// Coefficients of L2 as `c0,c1,...` in hex.
        #[arg(long)]
        l2: String,
    },
}

#[derive(Subcommand, Debug)]
enum KloostermanCommand {
    /// All zeros of K_n with supporting statistics.
    Census {
        #[command(flatten)]
        field: FieldArg,
        /// Overrides the modulus of `--field`.
        #[arg(long)]
        modulus: Option<String>,
        /// Include every K_n(a) in the output.
        #[arg(long)]
        dump_sums: bool,
        /// Also write `a_hex,K,tr,Q` rows to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum Suite {
    /// 16 | K_n(a) iff Tr(a) = Q(a) = 0.
    Theorem3(FieldArg),
    /// Kloosterman criterion against bijectivity.
    Proposition2 {
        #[command(flatten)]
        field: FieldArg,
        /// Random pairs for n >= 5.
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Solvability of quadratics by the trace test.
    Lemma2 {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Three hyperplanes cover the field iff a + b = c.
    Lemma4 {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long, default_value_t = 20_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// The image set M_a.
    Prop3(FieldArg),
    /// The coefficient recurrence and the x^8 contradiction.
    Theorem8(FieldArg),
}

#[derive(Args, Debug, Clone)]
struct SearchArgs {
    #[command(flatten)]
    field: FieldArg,
    /// Also write the witnesses to this file.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Seed for audit sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Force flat enumeration instead of prefix pruning.
    #[arg(long)]
    flat: bool,
}

#[derive(Subcommand, Debug)]
enum Mode {
    /// Every pair for n <= 3, every canonical pair for n = 4.
    Full(SearchArgs),
    /// One representative per left-composition orbit, n <= 4.
    Canonical(SearchArgs),
    /// L1 = x^(2^(n-1)) + x with L2*(1) = 1, 5 <= n <= 8.
    Normalized(SearchArgs),
    /// L1 = x, every nonzero L2, n <= 6.
    IdentityL1(SearchArgs),
}

/// What a subcommand produced.
struct Outcome {
    command: String,
    fields: Vec<String>,
    result: Value,
    /// Claims that failed; any entry means exit code 2.
    violations: Vec<String>,
    summary: String,
}

struct Faults {
    corrupt_oracle: bool,
}

impl Faults {
    /// Sums as computed, or with the smallest nonzero Kloosterman zero moved to 1.
    fn sums(&self, ctx: &FieldContext) -> Vec<i32> {
        let mut sums = kloosterman_sums(ctx);
        if self.corrupt_oracle {
            if let Some(a) = (1..sums.len()).find(|&a| sums[a] == 0) {
                sums[a] = 1;
            }
        }
        sums
    }

    fn oracle(&self, ctx: &Arc<FieldContext>) -> PairOracle {
        PairOracle::with_sums(ctx.clone(), self.sums(ctx))
    }
}

/// Parses `args` (including the program name), runs the subcommand and writes
/// to `out` and `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let started = unix_ms();
    let faults = Faults { corrupt_oracle: corrupt_requested(&cli) };
    let compact = cli.json;
    let outcome = match dispatch(cli, &faults, err) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            return EXIT_USAGE;
        }
    };
    let args: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let envelope = envelope(&outcome, args, started, unix_ms());
    let text = if compact { serde_json::to_string(&envelope) } else { serde_json::to_string_pretty(&envelope) }
        .expect("serializable");
    if writeln!(out, "{text}").is_err() {
        return EXIT_USAGE;
    }
    let _ = writeln!(err, "{}", outcome.summary);
    if outcome.violations.is_empty() {
        EXIT_OK
    } else {
        for v in &outcome.violations {
            let _ = writeln!(err, "VIOLATION: {v}");
        }
        EXIT_VIOLATION
    }
}

#[cfg(feature = "fault-injection")]
fn corrupt_requested(cli: &Cli) -> bool {
    cli.corrupt_oracle
}

#[cfg(not(feature = "fault-injection"))]
fn corrupt_requested(_: &Cli) -> bool {
    false
}

fn unix_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

/// Recursively sorts object keys, independent of how `serde_json` orders maps.
pub fn canonical(v: &Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            let mut out = Map::new();
            for k in keys {
                out.insert(k.clone(), canonical(&m[k]));
            }
            Value::Object(out)
        }
        Value::Array(a) => Value::Array(a.iter().map(canonical).collect()),
        other => other.clone(),
    }
}

fn strip_timing(v: &Value) -> Value {
    match v {
        Value::Object(m) => Value::Object(
            m.iter().filter(|(k, _)| k.as_str() != "wall_time_ms").map(|(k, v)| (k.clone(), strip_timing(v))).collect(),
        ),
        Value::Array(a) => Value::Array(a.iter().map(strip_timing).collect()),
        other => other.clone(),
    }
}

/// `sha256:` digest of the canonical JSON of `result` without timing fields.
pub fn result_digest(result: &Value) -> String {
    let text = serde_json::to_string(&canonical(&strip_timing(result))).expect("serializable");
    format!("sha256:{}", hex::encode(Sha256::digest(text.as_bytes())))
}

fn envelope(o: &Outcome, args: Vec<String>, started: u64, finished: u64) -> Value {
    canonical(&json!({
        "manifest": {
            "tool": "linv",
            "version": env!("CARGO_PKG_VERSION"),
            "command": o.command,
            "args": args,
            "fields": o.fields,
            "started_unix_ms": started,
            "finished_unix_ms": finished,
            "result_digest": result_digest(&o.result),
        },
        "result": o.result,
        "violations": o.violations,
    }))
}

fn build_field(spec: &FieldSpec) -> anyhow::Result<Arc<FieldContext>> {
    Ok(Arc::new(spec.build().with_context(|| format!("field {spec}"))?))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn dispatch(cli: Cli, faults: &Faults, err: &mut dyn Write) -> anyhow::Result<Outcome> {
    let workers = cli.workers;
    let command = match cli.command {
        Command::Search { mode } => return search_command(mode, workers, err),
        other => other,
    };
    let run = move || match command {
        Command::FieldInfo(f) => field_info(&f.field),
        Command::Kloosterman { command: KloostermanCommand::Census { field, modulus, dump_sums, csv } } => {
            census(field.field, modulus, dump_sums, csv.as_deref())
        }
        Command::Verify { suite } => verify(suite, faults),
        Command::Invariants { field, table, power } => invariants(&field.field, table.as_deref(), power),
        Command::CheckPair { field, l1, l2 } => check_pair(&field.field, &l1, &l2, faults),
        Command::Search { .. } => unreachable!("dispatched above"),
    };
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .context("building the worker pool")?
            .install(run),
        None => run(),
    }
}

fn field_info(spec: &FieldSpec) -> anyhow::Result<Outcome> {
    let ctx = build_field(spec)?;
    let result = json!({
        "field": ctx.spec_string(),
        "n": ctx.n(),
        "order": ctx.order(),
        "modulus": hex(ctx.modulus()),
        "generator": hex(ctx.generator()),
        "trace_mask": hex(ctx.trace_mask()),
        "dual_basis": ctx.dual_basis().iter().map(|&x| hex(x)).collect::<Vec<_>>(),
        "subfield_degrees": ctx.subfield_degrees(),
    });
    Ok(Outcome {
        command: "field-info".into(),
        fields: vec![ctx.spec_string()],
        summary: format!("{}: generator {}", ctx.spec_string(), hex(ctx.generator())),
        result,
        violations: vec![],
    })
}

fn census(
    mut spec: FieldSpec,
    modulus: Option<String>,
    dump_sums: bool,
    csv: Option<&Path>,
) -> anyhow::Result<Outcome> {
    if let Some(m) = modulus {
        spec.modulus = Some(linv_core::gf2n::parse_hex(&m)?);
    }
    let ctx = build_field(&spec)?;
    let c = kloosterman_zeros(&ctx, dump_sums);
    if let Some(path) = csv {
        std::fs::write(path, census_csv(&ctx)).with_context(|| format!("writing {}", path.display()))?;
    }
    let mut violations = vec![];
    if c.zero_count == 0 {
        violations.push(format!("no Kloosterman zero in {}", c.field));
    }
    if ctx.n() >= 5 && c.any_zero_in_proper_subfield() {
        violations.push(format!("a Kloosterman zero of {} lies in a proper subfield", c.field));
    }
    Ok(Outcome {
        command: "kloosterman census".into(),
        fields: vec![ctx.spec_string()],
        summary: format!("{}: {} Kloosterman zeros", c.field, c.zero_count),
        result: to_value(&c),
        violations,
    })
}

fn verify(suite: Suite, faults: &Faults) -> anyhow::Result<Outcome> {
    let (name, verdict) = match suite {
        Suite::Theorem3(f) => {
            let ctx = build_field(&f.field)?;
            ("theorem3", suites::theorem3(&ctx, &faults.sums(&ctx))?)
        }
        Suite::Proposition2 { field, samples, seed } => {
            let ctx = build_field(&field.field)?;
            ("proposition2", suites::proposition2(&faults.oracle(&ctx), samples, seed))
        }
        Suite::Lemma2 { field, samples, seed } => {
            ("lemma2", suites::lemma2(&*build_field(&field.field)?, samples, seed))
        }
        Suite::Lemma4 { field, samples, seed } => {
            ("lemma4", suites::lemma4(&*build_field(&field.field)?, samples, seed))
        }
        Suite::Prop3(f) => ("prop3", suites::prop3(&*build_field(&f.field)?)),
        Suite::Theorem8(f) => ("theorem8", suites::theorem8(&build_field(&f.field)?)?),
    };
    let violations = if verdict.holds() {
        vec![]
    } else {
        vec![format!("{}: {} violation(s) of \"{}\"", verdict.field, verdict.violation_count, verdict.claim)]
    };
    Ok(Outcome {
        command: format!("verify {name}"),
        fields: vec![verdict.field.clone()],
        summary: format!(
            "{name} on {}: {} cases, {} violations",
            verdict.field, verdict.cases_checked, verdict.violation_count
        ),
        result: to_value(&verdict),
        violations,
    })
}

fn invariants(spec: &FieldSpec, table: Option<&Path>, power: Option<u64>) -> anyhow::Result<Outcome> {
    let ctx = build_field(spec)?;
    let (source, f) = match (table, power) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let t = TruthTable::parse(&text)?;
            if **t.ctx() != *ctx {
                bail!("table header {} does not match --field {}", t.ctx().spec_string(), ctx.spec_string());
            }
            (format!("table {}", path.display()), t)
        }
        (None, Some(k)) => (format!("x^{k}"), TruthTable::power(ctx.clone(), k)),
        (None, None) => bail!("one of --table or --power is required"),
    };
    let walsh = f.walsh_spectrum();
    let max_walsh = walsh.max_value().unwrap_or(0);
    let result = json!({
        "field": ctx.spec_string(),
        "source": source,
        "is_permutation": f.is_permutation(),
        "differential_uniformity": f.differential_uniformity(),
        "differential_spectrum": f.differential_spectrum(),
        "walsh_spectrum": walsh,
        "max_abs_walsh": max_walsh,
        "nonlinearity": (1i64 << (ctx.n() - 1)) - max_walsh / 2,
    });
    Ok(Outcome {
        command: "invariants".into(),
        fields: vec![ctx.spec_string()],
        summary: format!(
            "{source} over {}: differential uniformity {}",
            ctx.spec_string(),
            result["differential_uniformity"]
        ),
        result,
        violations: vec![],
    })
}

fn check_pair(spec: &FieldSpec, l1: &str, l2: &str, faults: &Faults) -> anyhow::Result<Outcome> {
    let ctx = build_field(spec)?;
    let l1 = LinearizedPoly::parse(ctx.clone(), l1).context("--l1")?;
    let l2 = LinearizedPoly::parse(ctx.clone(), l2).context("--l2")?;
    let report = kernel_structure_check(&faults.oracle(&ctx), &l1, &l2)?;
    Ok(Outcome {
        command: "check-pair".into(),
        fields: vec![ctx.spec_string()],
        summary: format!("{}: L1 = [{l1}], L2 = [{l2}], permutation: {}", ctx.spec_string(), report.is_permutation),
        violations: report.violations.clone(),
        result: to_value(&report),
    })
}

fn search_command(mode: Mode, workers: Option<usize>, err: &mut dyn Write) -> anyhow::Result<Outcome> {
    let (name, args) = match &mode {
        Mode::Full(a) => ("full", a.clone()),
        Mode::Canonical(a) => ("canonical", a.clone()),
        Mode::Normalized(a) => ("normalized", a.clone()),
        Mode::IdentityL1(a) => ("identity-l1", a.clone()),
    };
    let ctx = build_field(&args.field.field)?;
    let (tx, rx) = mpsc::channel::<String>();
    let opts = SearchOptions {
        workers,
        strategy: if args.flat { Strategy::Flat } else { Strategy::Auto },
        seed: args.seed,
        progress: Some(Arc::new(move |r: &search::PartitionRecord| {
            let _ = tx.send(json!({ "progress": r }).to_string());
        })),
    };
    let report: linv_core::Result<SearchReport> = std::thread::scope(|s| {
        let ctx = &ctx;
        let handle = s.spawn(move || match mode {
            Mode::Full(_) => search::full_search_in(ctx, &opts),
            Mode::Canonical(_) => search::canonical_search_in(ctx, &opts),
            Mode::Normalized(_) => search::normalized_search_in(ctx, &opts),
            Mode::IdentityL1(_) => search::identity_l1_search_in(ctx, &opts),
        });
        for line in rx {
            let _ = writeln!(err, "{line}");
        }
        handle.join().expect("search thread")
    });
    let report = report?;
    if let Some(path) = &args.csv {
        std::fs::write(path, report.witnesses_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    let n = ctx.n();
    let mut violations = vec![];
    if n >= 5 && report.witness_count > 0 {
        violations.push(format!("{} permutation pair(s) found for n = {n}", report.witness_count));
    }
    let expects_examples = matches!(name, "full" | "canonical" | "identity-l1") && (3..=4).contains(&n);
    if expects_examples && report.witness_count == 0 {
        violations.push(format!("no permutation pair found for n = {n}"));
    }
    if report.criterion_mismatches > 0 {
        violations.push(format!(
            "{} pair(s) pass the Kloosterman criterion without being permutations",
            report.criterion_mismatches
        ));
    }
    if report.audit.violations > 0 {
        violations.push(format!("{} filtered-out pair(s) are permutations", report.audit.violations));
    }
    Ok(Outcome {
        command: format!("search {name}"),
        fields: vec![ctx.spec_string()],
        summary: format!(
            "search {name} over {}: {} candidates, {} witnesses, {} ms",
            ctx.spec_string(),
            report.candidates,
            report.witness_count,
            report.wall_time_ms
        ),
        result: to_value(&report),
        violations,
    })
}
