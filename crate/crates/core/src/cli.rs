//! The `eqalg` command-line interface.
//!
//! Settings resolve in the order: flag, `EQALG_*` environment variable,
//! TOML config file, built-in default.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::eqalgebra::{
    build_generators, check_printed_relations, closure_max_k, minimal_generating_set,
    prolonged_rank, rank_on_manifold, stabilized_truncation, GenKind, GeneratorSet, SamplingConfig,
    Source, DEFAULT_SEED,
};
use crate::equivalence::{
    check_equivalence, classify_corpus, orbit_search, signature_of, EquationInstance, Signature,
};
use crate::error::Error;
use crate::invariants::{
    discrepancy_report, is_absolute, parse_candidate, search_report, WeightedBlock,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;

pub const DEFAULT_K: u32 = 6;
pub const DEFAULT_K_MAX: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceArg {
    Paper,
    Derived,
}

impl From<SourceArg> for Source {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Paper => Source::PaperPrinted,
            SourceArg::Derived => Source::Derived,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "eqalg",
    version,
    about = "Equivalence algebra workbench for u_tt - u_xx = f(u, u_t^2 - u_x^2)"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct GlobalArgs {
    /// TOML file with any of: seed, samples, coordinate_range, K, K_max, source, output
    #[arg(long, global = true, env = "EQALG_CONFIG")]
    pub config: Option<PathBuf>,
    /// Sampling seed
    #[arg(long, global = true, env = "EQALG_SEED")]
    pub seed: Option<u64>,
    /// Random points per rank computation
    #[arg(long, global = true, env = "EQALG_SAMPLES")]
    pub samples: Option<usize>,
    /// Largest family index k in Y^k
    #[arg(short = 'K', long = "k", global = true, env = "EQALG_K")]
    pub k: Option<u32>,
    /// Cap for the truncation sweep
    #[arg(long = "k-max", global = true, env = "EQALG_K_MAX")]
    pub k_max: Option<u32>,
    /// Sample coordinates from [-R, R]
    #[arg(long, global = true, env = "EQALG_COORDINATE_RANGE")]
    pub coordinate_range: Option<i64>,
    /// Generator coefficients: as printed, or derived from point actions
    #[arg(long, global = true, value_enum, env = "EQALG_SOURCE")]
    pub source: Option<SourceArg>,
    #[arg(long, global = true, value_enum, env = "EQALG_OUTPUT")]
    pub output: Option<OutputFormat>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the commutator table and closure of the discretized algebra
    VerifyAlgebra,
    /// Generic rank of the prolonged algebra
    Rank(RankArgs),
    /// Verify or search differential invariants
    #[command(subcommand)]
    Invariants(InvariantsCommand),
    /// Compare two right-hand sides f(u, sigma) by their invariant signatures
    Equiv(EquivArgs),
    /// Signatures and class ids for a corpus file, one f per line
    Classify { corpus: PathBuf },
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Jet order L (0, 1 or 2)
    #[arg(long)]
    pub order: u32,
    /// Restrict to the locus expr = 0 (R, R2, ... are predefined)
    #[arg(long)]
    pub constraint: Option<String>,
    /// Also report a greedy minimal generating set
    #[arg(long)]
    pub minimal: bool,
    /// Search the minimal generating set exhaustively (at most 10 generators)
    #[arg(long, requires = "minimal")]
    pub exhaustive: bool,
    /// Also sweep K up to K_max to find where the rank stabilizes
    #[arg(long)]
    pub stabilize: bool,
}

#[derive(Debug, Subcommand)]
pub enum InvariantsCommand {
    /// Check the printed invariants under both sources, or one expression
    Verify {
        /// Expression in the order-2 chart (R, R1_printed, R1_corrected, R2 are predefined)
        #[arg(long)]
        expr: Option<String>,
    },
    /// Integer exponent vectors e with prod block_i^e_i weight-free
    Search {
        /// Comma-separated relative invariants
        #[arg(long)]
        blocks: String,
        /// Comma-separated scaling generators
        #[arg(long, default_value = "Y3,Y^0,Y^1,Y^2")]
        scaling: String,
    },
}

#[derive(Debug, Args)]
pub struct EquivArgs {
    pub f1: String,
    pub f2: String,
    /// Also search affine u-maps and dilations for a signature match
    #[arg(long)]
    pub heuristic: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    samples: Option<usize>,
    #[serde(rename = "K")]
    k: Option<u32>,
    #[serde(rename = "K_max")]
    k_max: Option<u32>,
    coordinate_range: Option<i64>,
    source: Option<SourceArg>,
    output: Option<OutputFormat>,
}

/// Fully resolved settings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub seed: u64,
    pub samples: usize,
    pub k: u32,
    pub k_max: u32,
    pub coordinate_range: i64,
    pub source: Source,
    pub output: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            samples: 8,
            k: DEFAULT_K,
            k_max: DEFAULT_K_MAX,
            coordinate_range: 50,
            source: Source::Derived,
            output: OutputFormat::Text,
        }
    }
}

impl RunConfig {
    pub fn resolve(args: &GlobalArgs) -> Result<Self, String> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| format!("invalid config {}: {e}", path.display()))?
            }
            None => FileConfig::default(),
        };
        let d = RunConfig::default();
        let cfg = RunConfig {
            seed: args.seed.or(file.seed).unwrap_or(d.seed),
            samples: args.samples.or(file.samples).unwrap_or(d.samples),
            k: args.k.or(file.k).unwrap_or(d.k),
            k_max: args.k_max.or(file.k_max).unwrap_or(d.k_max),
            coordinate_range: args
                .coordinate_range
                .or(file.coordinate_range)
                .unwrap_or(d.coordinate_range),
            source: args
                .source
                .or(file.source)
                .map(Source::from)
                .unwrap_or(d.source),
            output: args.output.or(file.output).unwrap_or(d.output),
        };
        if cfg.samples == 0 {
            return Err("samples must be positive".into());
        }
        if cfg.coordinate_range <= 0 {
            return Err("coordinate_range must be positive".into());
        }
        if cfg.k_max == 0 {
            return Err("K_max must be positive".into());
        }
        Ok(cfg)
    }

    pub fn sampling(&self) -> SamplingConfig {
        SamplingConfig {
            seed: self.seed,
            samples: self.samples,
            coordinate_range: self.coordinate_range,
            ..SamplingConfig::default()
        }
    }
}

/// Outcome of a command before it is printed.
struct Outcome {
    code: i32,
    json: Value,
    text: String,
}

enum Failure {
    Usage(String),
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let cfg = match RunConfig::resolve(&cli.global) {
        Ok(c) => c,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    match dispatch(&cli.command, &cfg) {
        Ok(outcome) => {
            let written = match cfg.output {
                OutputFormat::Json => {
                    let mut v = outcome.json;
                    if let Value::Object(m) = &mut v {
                        m.insert("schema".into(), json!(1));
                    }
                    writeln!(
                        out,
                        "{}",
                        serde_json::to_string_pretty(&v).expect("report serializes")
                    )
                }
                OutputFormat::Text => write!(out, "{}", outcome.text),
            };
            if written.is_err() {
                return EXIT_USAGE;
            }
            outcome.code
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Compute(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<Outcome, Failure> {
    match cmd {
        Command::VerifyAlgebra => verify_algebra(cfg),
        Command::Rank(a) => rank(cfg, a),
        Command::Invariants(InvariantsCommand::Verify { expr }) => {
            invariants_verify(cfg, expr.as_deref())
        }
        Command::Invariants(InvariantsCommand::Search { blocks, scaling }) => {
            invariants_search(cfg, blocks, scaling)
        }
        Command::Equiv(a) => equiv(a),
        Command::Classify { corpus } => classify(corpus),
    }
}

fn verify_algebra(cfg: &RunConfig) -> Result<Outcome, Failure> {
    if cfg.k < 4 {
        return Err(usage(format!(
            "closure sweep needs K >= 4, got K = {}",
            cfg.k
        )));
    }
    let g = build_generators(cfg.source, cfg.k)?;
    let checks = check_printed_relations(&g);
    let closure = closure_max_k(&g)?;
    let mismatches: Vec<_> = checks.iter().filter(|c| !c.matches).collect();
    let ok = mismatches.is_empty() && closure.max_closing_k == Some(2);
    let mut text = format!(
        "source: {}\nK: {}\nrelations checked: {}\nmismatches: {}\n",
        cfg.source,
        cfg.k,
        checks.len(),
        mismatches.len()
    );
    for m in &mismatches {
        text += &format!(
            "  [{}, {}] expected {} computed {}\n",
            m.left, m.right, m.expected, m.computed
        );
    }
    text += &format!(
        "max_closing_k: {}\n{}\n",
        closure
            .max_closing_k
            .map_or("none".into(), |k| k.to_string()),
        if ok { "OK" } else { "MISMATCH" }
    );
    Ok(Outcome {
        code: if ok { EXIT_OK } else { EXIT_MISMATCH },
        json: json!({
            "command": "verify-algebra",
            "source": cfg.source,
            "K": cfg.k,
            "relations": checks,
            "mismatch_count": mismatches.len(),
            "max_closing_k": closure.max_closing_k,
            "closure_sweep": closure.sweep,
            "ok": ok,
        }),
        text,
    })
}

fn rank(cfg: &RunConfig, a: &RankArgs) -> Result<Outcome, Failure> {
    if a.order > 2 {
        return Err(usage(format!("order must be 0, 1 or 2, got {}", a.order)));
    }
    let g = build_generators(cfg.source, cfg.k)?;
    let s = cfg.sampling();
    let report = match &a.constraint {
        Some(c) => rank_on_manifold(&g, &parse_candidate(c, a.order)?, a.order, &s)?,
        None => prolonged_rank(&g, a.order, &s)?,
    };
    let mut json = json!({
        "command": "rank",
        "source": cfg.source,
        "K": cfg.k,
        "constraint": a.constraint,
        "report": report,
    });
    let mut text = format!(
        "order: {}\nrank: {}\nvariable_count: {}\ninvariant_count: {}\nsamples_used: {}\nseed: {}\n",
        report.order, report.rank, report.variable_count, report.invariant_count, report.samples_used, report.seed
    );
    if a.minimal {
        let m =
            minimal_generating_set(&g.generators, a.order, &s, a.exhaustive).map_err(
                |e| match e {
                    Error::InvalidArgument(msg) => usage(msg),
                    e => Failure::Compute(e),
                },
            )?;
        let names: Vec<String> = m.iter().map(|k| k.name()).collect();
        text += &format!("minimal_generating_set: {}\n", names.join(", "));
        json["minimal_generating_set"] = json!(names);
    }
    if a.stabilize {
        let st = stabilized_truncation(cfg.source, a.order, &s, cfg.k_max)?;
        text += &format!("stabilized_K: {} (rank {})\n", st.k_star, st.rank);
        json["stabilization"] = json!(st);
    }
    Ok(Outcome {
        code: EXIT_OK,
        json,
        text,
    })
}

fn invariants_verify(cfg: &RunConfig, expr: Option<&str>) -> Result<Outcome, Failure> {
    match expr {
        Some(e) => {
            let g = build_generators(cfg.source, cfg.k)?;
            let report = is_absolute(&parse_candidate(e, 2)?, &g, 2)?;
            let mut text = format!("candidate: {}\n", report.candidate);
            for v in &report.verdicts {
                text += &format!(
                    "  {}: {}{}\n",
                    v.generator,
                    overall_name(&v.verdict),
                    v.weight
                        .as_ref()
                        .map_or(String::new(), |w| format!(" (weight {w})"))
                );
            }
            text += &format!("overall: {}\n", overall_name(&report.overall));
            Ok(Outcome {
                code: EXIT_OK,
                json: json!({
                    "command": "invariants verify",
                    "source": cfg.source,
                    "K": cfg.k,
                    "report": report,
                }),
                text,
            })
        }
        None => {
            let r = discrepancy_report(cfg.k)?;
            let mut text = String::new();
            for b in [&r.derived, &r.printed] {
                text += &format!("source {}:\n", b.source);
                for (name, rep) in [
                    ("R", &b.r),
                    ("R1_printed", &b.r1_printed),
                    ("R1_corrected", &b.r1_corrected),
                    ("R2", &b.r2),
                ] {
                    text += &format!("  {name}: {}\n", overall_name(&rep.overall));
                }
            }
            text += "discrepancies:\n";
            for d in r
                .derived_discrepancies
                .iter()
                .chain(&r.printed_discrepancies)
            {
                text += &format!("  - {d}\n");
            }
            Ok(Outcome {
                code: EXIT_OK,
                json: json!({
                    "command": "invariants verify",
                    "K": cfg.k,
                    "report": r,
                }),
                text,
            })
        }
    }
}

fn overall_name(o: &crate::invariants::Overall) -> &'static str {
    match o {
        crate::invariants::Overall::Absolute => "absolute",
        crate::invariants::Overall::Relative => "relative",
        crate::invariants::Overall::Neither => "neither",
    }
}

fn invariants_search(cfg: &RunConfig, blocks: &str, scaling: &str) -> Result<Outcome, Failure> {
    let g = build_generators(cfg.source, cfg.k)?;
    let mut kinds = Vec::new();
    for name in scaling.split(',').map(str::trim) {
        let k =
            GenKind::from_name(name).ok_or_else(|| usage(format!("unknown generator {name}")))?;
        if g.get(k).is_none() {
            return Err(usage(format!("generator {name} is beyond K = {}", cfg.k)));
        }
        kinds.push(k);
    }
    let scaling_gens = g.subset(&kinds).generators;
    let mut weighted = Vec::new();
    for b in blocks.split(',').map(str::trim).filter(|b| !b.is_empty()) {
        let e = parse_candidate(b, 2)?;
        weighted.push(WeightedBlock::new(e, &scaling_gens).map_err(|e| usage(e.to_string()))?);
    }
    let vectors = search_report(&weighted, &scaling_gens, 2)?;
    let full = full_algebra_verdicts(&g, &vectors)?;
    let mut text = format!(
        "blocks: {}\nkernel vectors: {}\n",
        weighted.len(),
        vectors.len()
    );
    for (v, absolute) in vectors.iter().zip(&full) {
        text += &format!(
            "  ({}) -> {} [scaling: {}, full algebra: {}]\n",
            v.exponents.join(","),
            v.candidate,
            if v.absolute_under_scaling {
                "absolute"
            } else {
                "not absolute"
            },
            overall_name(absolute)
        );
    }
    let entries: Vec<Value> = vectors
        .iter()
        .zip(&full)
        .map(|(v, a)| json!({"vector": v, "full_algebra": a}))
        .collect();
    Ok(Outcome {
        code: EXIT_OK,
        json: json!({
            "command": "invariants search",
            "source": cfg.source,
            "K": cfg.k,
            "scaling": kinds.iter().map(|k| k.name()).collect::<Vec<_>>(),
            "kernel": entries,
        }),
        text,
    })
}

fn full_algebra_verdicts(
    g: &GeneratorSet,
    vectors: &[crate::invariants::KernelVector],
) -> Result<Vec<crate::invariants::Overall>, Failure> {
    vectors
        .iter()
        .map(|v| Ok(is_absolute(&parse_candidate(&v.candidate, 2)?, g, 2)?.overall))
        .collect()
}

fn signature_json(s: &Signature) -> Value {
    json!({
        "degenerate": s.degenerate(),
        "rho1": s.rho1().map(|r| r.to_string()),
        "rho2": s.rho2().map(|r| r.to_string()),
    })
}

fn signature_text(s: &Signature) -> String {
    match &s.rho {
        None => "degenerate".into(),
        Some((a, b)) => format!("rho1 = {a}, rho2 = {b}"),
    }
}

fn equiv(a: &EquivArgs) -> Result<Outcome, Failure> {
    let parse =
        |s: &str| EquationInstance::parse(s).map_err(|e| usage(format!("cannot parse {s:?}: {e}")));
    let (e1, e2) = (parse(&a.f1)?, parse(&a.f2)?);
    let verdict = check_equivalence(&e1, &e2)?;
    let (s1, s2) = (signature_of(&e1)?, signature_of(&e2)?);
    let verdict_name = serde_json::to_value(verdict).expect("verdict serializes");
    let mut text = format!(
        "f1: {e1}\n  {}\nf2: {e2}\n  {}\nverdict: {}\n",
        signature_text(&s1),
        signature_text(&s2),
        verdict_name.as_str().unwrap_or_default()
    );
    let mut json = json!({
        "command": "equiv",
        "f1": e1.to_string(),
        "f2": e2.to_string(),
        "signature1": signature_json(&s1),
        "signature2": signature_json(&s2),
        "verdict": verdict,
    });
    if a.heuristic {
        let found = orbit_search(&e1, &e2)?;
        let value = match &found {
            Some(t) => json!({
                "match": true,
                "phi": t.phi().to_string(),
                "phi_inverse": t.phi_inverse().to_string(),
                "dilation": t.dilation().to_string(),
            }),
            None => json!({"match": false}),
        };
        text += &match &found {
            Some(t) => format!(
                "heuristic: f1 maps onto the signature of f2 under u -> {}, dilation {}\n",
                t.phi(),
                t.dilation()
            ),
            None => "heuristic: no match on the affine grid (inconclusive)\n".into(),
        };
        json["heuristic"] = value;
    }
    Ok(Outcome {
        code: EXIT_OK,
        json,
        text,
    })
}

fn classify(path: &std::path::Path) -> Result<Outcome, Failure> {
    let text_in = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let rows = classify_corpus(&text_in).map_err(|e| usage(e.to_string()))?;
    let classes: std::collections::BTreeSet<&str> =
        rows.iter().filter_map(|r| r.class_id.as_deref()).collect();
    let degenerate = rows.iter().filter(|r| r.degenerate).count();
    let mut text = String::new();
    for r in &rows {
        text += &format!(
            "{}\t{}\t{}\n",
            r.class_id.as_deref().unwrap_or("degenerate"),
            r.input,
            match (&r.rho1, &r.rho2) {
                (Some(a), Some(b)) => format!("rho1 = {a}, rho2 = {b}"),
                _ => "-".into(),
            }
        );
    }
    text += &format!("classes: {}, degenerate: {}\n", classes.len(), degenerate);
    Ok(Outcome {
        code: EXIT_OK,
        json: json!({
            "command": "classify",
            "equations": rows,
            "class_count": classes.len(),
            "degenerate_count": degenerate,
        }),
        text,
    })
}
