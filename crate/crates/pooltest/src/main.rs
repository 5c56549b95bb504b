//! Command-line front end: enumerate -> bounds -> design -> simulate /
//! decode -> validate, with reproducible seeds and JSON or text output.
//!
//! Exit codes are part of the contract:
//!   1 parse / IO error, 2 invalid pattern or domain error, 3 resource cap,
//!   4 Las Vegas attempts exhausted, 5 ambiguous decode, 6 empty decode,
//!   7 validation found a violated bound.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pooltest::bounds::{
    dependency_degree, distinguish_bound, lll_condition, optimize_epsilon, test_count_hp,
    test_count_lll, test_count_union, vertex_probability, BoundVariant, ProbabilityForm,
};
use pooltest::design::{
    build_matrix, decode, design_las_vegas, find_collisions, parse_outcomes, sample_pools,
    DesignDocument,
};
use pooltest::enumerate::{
    enumerate_occurrences, r_g, Occurrence, OccurrenceRecord, DEFAULT_OCCURRENCE_CAP,
};
use pooltest::error::Error;
use pooltest::graph::{parse_edge_list, Graph};
use pooltest::validate::{
    check_lemma1_with, check_pair_bounds, run_corpus_validation, ProbabilityReport,
    ValidationSummary,
};

#[derive(Parser)]
#[command(name = "pooltest", version, about = "Non-adaptive group testing on graphs")]
struct Cli {
    /// Cap on rayon worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    output: Output,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Variant {
    Generic,
    Theorem1,
    Proof,
}

impl Variant {
    fn bound_variant(self) -> BoundVariant {
        match self {
            Variant::Generic => BoundVariant::Generic,
            Variant::Theorem1 => BoundVariant::Theorem1,
            Variant::Proof => BoundVariant::ProofEps3,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EpsilonModeArg {
    /// eps = 1/(2 delta)
    Default,
    /// eps = 3/delta (needs delta >= 4)
    Proof,
    /// take eps from --epsilon
    Explicit,
    /// maximize the generic bound numerically
    Optimize,
}

#[derive(Args)]
struct GraphArgs {
    /// Host graph edge-list file.
    #[arg(long)]
    host: PathBuf,
    /// Pattern graph edge-list file.
    #[arg(long)]
    pattern: PathBuf,
    /// Occurrence cap for enumeration.
    #[arg(long, default_value_t = DEFAULT_OCCURRENCE_CAP)]
    cap: usize,
}

#[derive(Args)]
struct ParamArgs {
    /// Explicit epsilon value (implies --epsilon-mode explicit).
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_enum, default_value_t = EpsilonModeArg::Default)]
    epsilon_mode: EpsilonModeArg,
    #[arg(long, value_enum, default_value_t = Variant::Generic)]
    variant: Variant,
    /// Failure probability for the high-probability test count.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
}

#[derive(Subcommand)]
enum Command {
    /// List all copies of the pattern in the host, with m and r_G(H).
    Enumerate {
        #[command(flatten)]
        graphs: GraphArgs,
    },
    /// Compute every closed-form parameter and test count.
    Bounds {
        #[command(flatten)]
        graphs: GraphArgs,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Sample pools and emit a design document.
    Design {
        #[command(flatten)]
        graphs: GraphArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, env = "POOLTEST_SEED", default_value_t = 0)]
        seed: u64,
        /// Override the test count.
        #[arg(long)]
        t: Option<usize>,
        /// Resample until the design is separating.
        #[arg(long)]
        require_separating: bool,
        #[arg(long, default_value_t = 100)]
        max_attempts: u64,
    },
    /// Outcome vector for a planted defective copy of a stored design.
    Simulate {
        /// Design JSON file.
        #[arg(long)]
        design: PathBuf,
        /// Column index of the planted defective copy.
        #[arg(long)]
        defective: usize,
    },
    /// Decode a 0/1 outcome string against a stored design.
    Decode {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        outcomes: String,
    },
    /// Check the probability bounds against exact / Monte Carlo oracles.
    Validate {
        /// Restrict to one host/pattern instance instead of the corpus.
        #[arg(long)]
        host: Option<PathBuf>,
        #[arg(long)]
        pattern: Option<PathBuf>,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, env = "POOLTEST_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
    },
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } | Error::SelfLoop { .. } | Error::LengthMismatch { .. } => 1,
        Error::InvalidPattern(_) | Error::Domain(_) | Error::IdenticalOccurrences => 2,
        Error::OccurrenceCap { .. } | Error::Resource(_) => 3,
        Error::IndexOutOfRange { .. } | Error::EmptyOccurrenceList => 2,
    }
}

fn load_graph(path: &PathBuf) -> Result<Graph, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("{}: {e}", path.display()),
    })?;
    parse_edge_list(&text)
}

fn load_design(path: &PathBuf) -> Result<DesignDocument, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("{}: {e}", path.display()),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("bad design JSON: {e}"),
    })
}

/// Resolved parameter bundle shared by bounds / design / validate.
#[derive(Serialize)]
struct ResolvedParams {
    k: u64,
    delta: u64,
    epsilon: f64,
    p: f64,
    big_p: f64,
    variant: BoundVariant,
}

fn resolve_params(
    pattern: &Graph,
    args: &ParamArgs,
) -> Result<ResolvedParams, Error> {
    let k = pattern.edge_count() as u64;
    let delta = pattern.max_degree() as u64;
    if k == 0 || delta == 0 {
        return Err(Error::InvalidPattern("pattern has no edges".into()));
    }
    let variant = args.variant.bound_variant();
    let epsilon = match variant {
        // These closed forms bake their own epsilon in.
        BoundVariant::Theorem1 => 1.0 / (2.0 * delta as f64),
        BoundVariant::ProofEps3 => 3.0 / delta as f64,
        BoundVariant::Generic => {
            let mode = if args.epsilon.is_some() {
                EpsilonModeArg::Explicit
            } else {
                args.epsilon_mode
            };
            match mode {
                EpsilonModeArg::Default => 1.0 / (2.0 * delta as f64),
                EpsilonModeArg::Proof => 3.0 / delta as f64,
                EpsilonModeArg::Explicit => args.epsilon.ok_or_else(|| {
                    Error::Domain("--epsilon-mode explicit needs --epsilon".into())
                })?,
                EpsilonModeArg::Optimize => optimize_epsilon(k, delta)?.0,
            }
        }
    };
    let big_p = distinguish_bound(k, delta, epsilon, variant)?;
    let p = vertex_probability(k, delta, epsilon, ProbabilityForm::Theorem2)?;
    Ok(ResolvedParams {
        k,
        delta,
        epsilon,
        p,
        big_p,
        variant,
    })
}

#[derive(Serialize)]
struct EnumerateOutput {
    schema: u32,
    n: usize,
    m: usize,
    r: usize,
    warning: Option<String>,
    occurrences: Vec<OccurrenceRecord>,
}

fn cmd_enumerate(graphs: &GraphArgs, output: Output) -> Result<u8, Error> {
    let host = load_graph(&graphs.host)?;
    let pattern = load_graph(&graphs.pattern)?;
    let occ = enumerate_occurrences(&host, &pattern, graphs.cap)?;
    let r = if occ.is_empty() { 0 } else { r_g(&occ)? };
    let out = EnumerateOutput {
        schema: 1,
        n: host.vertex_count(),
        m: occ.len(),
        r,
        warning: occ.is_empty().then(|| "no copies found".to_string()),
        occurrences: occ.iter().map(OccurrenceRecord::from).collect(),
    };
    match output {
        Output::Json => println!("{}", serde_json::to_string(&out)?),
        Output::Text => {
            println!("n = {}, m = {}, r_G(H) = {}", out.n, out.m, out.r);
            if let Some(w) = &out.warning {
                println!("warning: {w}");
            }
            for (j, rec) in out.occurrences.iter().enumerate() {
                println!("H_{j}: vertices {:?} edges {:?}", rec.vertices, rec.edges);
            }
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct BoundsOutput {
    schema: u32,
    k: u64,
    delta: u64,
    m: usize,
    r: usize,
    epsilon: f64,
    p: f64,
    variant: BoundVariant,
    #[serde(rename = "P")]
    big_p: f64,
    #[serde(rename = "P_generic")]
    p_generic: Option<f64>,
    #[serde(rename = "P_theorem1")]
    p_theorem1: Option<f64>,
    #[serde(rename = "P_proof_eps3")]
    p_proof_eps3: Option<f64>,
    t_lll: Option<u64>,
    t_lll_warning: Option<String>,
    t_union: u64,
    delta_fail: f64,
    t_hp: u64,
    dependency_degree: u64,
    lll_satisfied: Option<bool>,
    degenerate: bool,
    /// Information-theoretic floor ceil(log2 m); context only, not a bound
    /// from the construction.
    info_lower_bound: u64,
}

fn cmd_bounds(graphs: &GraphArgs, params: &ParamArgs, output: Output) -> Result<u8, Error> {
    let host = load_graph(&graphs.host)?;
    let pattern = load_graph(&graphs.pattern)?;
    let occ = enumerate_occurrences(&host, &pattern, graphs.cap)?;
    let m = occ.len();
    let r = if m == 0 { 0 } else { r_g(&occ)? };
    let resolved = resolve_params(&pattern, params)?;
    let mu = m as u64;

    let (t_lll, t_lll_warning, lll_satisfied) = if mu >= 2 && r >= 1 {
        let tc = test_count_lll(mu, r as u64, resolved.big_p)?;
        let ok = lll_condition(mu, r as u64, resolved.big_p, tc.t);
        (Some(tc.t), None, Some(ok))
    } else if mu >= 2 {
        (
            None,
            Some("r = 0: copies are vertex-disjoint; use t_union".to_string()),
            None,
        )
    } else {
        (Some(0), Some("m < 2: no tests needed".to_string()), None)
    };
    let t_union = test_count_union(mu, resolved.big_p)?;
    let t_hp = test_count_hp(mu, params.delta, resolved.big_p)?;

    let out = BoundsOutput {
        schema: 1,
        k: resolved.k,
        delta: resolved.delta,
        m,
        r,
        epsilon: resolved.epsilon,
        p: resolved.p,
        variant: resolved.variant,
        big_p: resolved.big_p,
        p_generic: distinguish_bound(resolved.k, resolved.delta, resolved.epsilon, BoundVariant::Generic).ok(),
        p_theorem1: distinguish_bound(resolved.k, resolved.delta, resolved.epsilon, BoundVariant::Theorem1).ok(),
        p_proof_eps3: distinguish_bound(resolved.k, resolved.delta, resolved.epsilon, BoundVariant::ProofEps3).ok(),
        t_lll,
        t_lll_warning,
        t_union: t_union.t,
        delta_fail: params.delta,
        t_hp: t_hp.t,
        dependency_degree: dependency_degree(mu, r as u64),
        lll_satisfied,
        degenerate: t_union.degenerate,
        info_lower_bound: (m.max(1) as f64).log2().ceil() as u64,
    };
    match output {
        Output::Json => println!("{}", serde_json::to_string(&out)?),
        Output::Text => {
            println!(
                "k = {}, delta = {}, m = {}, r = {}",
                out.k, out.delta, out.m, out.r
            );
            println!("epsilon = {}, p = {}, P = {}", out.epsilon, out.p, out.big_p);
            match out.t_lll {
                Some(t) => println!("t_lll = {t}"),
                None => println!("t_lll = n/a ({})", out.t_lll_warning.as_deref().unwrap_or("")),
            }
            println!("t_union = {}, t_hp({}) = {}", out.t_union, out.delta_fail, out.t_hp);
            println!(
                "dependency degree = {}, lll satisfied = {:?}",
                out.dependency_degree, out.lll_satisfied
            );
            println!("info lower bound (log2 m, external) = {}", out.info_lower_bound);
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct DesignOutput {
    #[serde(flatten)]
    doc: DesignDocument,
    attempts: u64,
    collisions: Vec<(usize, usize)>,
    separating: bool,
    warning: Option<String>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_design(
    graphs: &GraphArgs,
    params: &ParamArgs,
    seed: u64,
    t_override: Option<usize>,
    require_separating: bool,
    max_attempts: u64,
    output: Output,
) -> Result<u8, Error> {
    let host = load_graph(&graphs.host)?;
    let pattern = load_graph(&graphs.pattern)?;
    let occ = enumerate_occurrences(&host, &pattern, graphs.cap)?;
    if occ.is_empty() {
        return Err(Error::Domain("host contains no copy of the pattern".into()));
    }
    let resolved = resolve_params(&pattern, params)?;
    let m = occ.len();
    let t = match t_override {
        Some(t) => t,
        None => test_count_hp(m as u64, params.delta, resolved.big_p)?.t as usize,
    };

    let (pools, matrix, attempts) = if require_separating {
        match design_las_vegas(&host, &occ, resolved.p, t, seed, max_attempts) {
            Ok(d) => (d.pools, d.matrix, d.attempts),
            Err(fail) => {
                eprintln!(
                    "no separating design after {} attempts ({} collisions remain; try t >= {})",
                    fail.attempts,
                    fail.last_collisions.len(),
                    fail.suggested_t
                );
                return Ok(4);
            }
        }
    } else {
        let pools = sample_pools(&host, resolved.p, t, seed);
        let matrix = build_matrix(&host, &pools, &occ);
        (pools, matrix, 1)
    };

    let collisions = find_collisions(&matrix);
    let out = DesignOutput {
        doc: DesignDocument::new(&host, &pools, &matrix, &occ, seed, resolved.p),
        attempts,
        separating: collisions.is_empty(),
        collisions,
        warning: (m == 1).then(|| "m = 1: unique candidate, zero tests suffice".to_string()),
    };
    match output {
        Output::Json => println!("{}", serde_json::to_string(&out)?),
        Output::Text => {
            println!(
                "t = {}, m = {}, p = {}, seed = {}, attempts = {}, separating = {}",
                out.doc.t, out.doc.m, out.doc.p, out.doc.seed, out.attempts, out.separating
            );
            if !out.collisions.is_empty() {
                println!("collisions: {:?}", out.collisions);
            }
        }
    }
    Ok(0)
}

fn cmd_simulate(design_path: &PathBuf, defective: usize, output: Output) -> Result<u8, Error> {
    let doc = load_design(design_path)?;
    if defective >= doc.m {
        return Err(Error::IndexOutOfRange {
            index: defective,
            len: doc.m,
        });
    }
    let matrix = doc.matrix_bits()?;
    let bits: String = (0..doc.t)
        .map(|l| if matrix.get(l, defective) { '1' } else { '0' })
        .collect();
    match output {
        Output::Json => println!(
            "{}",
            serde_json::to_string(&serde_json::json!({"schema": 1, "outcomes": bits}))?
        ),
        Output::Text => println!("{bits}"),
    }
    Ok(0)
}

fn cmd_decode(design_path: &PathBuf, outcomes: &str, output: Output) -> Result<u8, Error> {
    let doc = load_design(design_path)?;
    let matrix = doc.matrix_bits()?;
    let bits = parse_outcomes(outcomes)?;
    let result = decode(&matrix, &bits)?;
    let consistent: Vec<&OccurrenceRecord> =
        result.consistent.iter().map(|&j| &doc.occurrences[j]).collect();
    match output {
        Output::Json => println!(
            "{}",
            serde_json::to_string(&serde_json::json!({
                "schema": 1,
                "consistent": result.consistent,
                "unique": result.unique,
                "occurrences": consistent,
            }))?
        ),
        Output::Text => {
            if result.consistent.is_empty() {
                println!("no consistent copy (model violation?)");
            }
            for (&j, rec) in result.consistent.iter().zip(&consistent) {
                println!("H_{j}: vertices {:?} edges {:?}", rec.vertices, rec.edges);
            }
        }
    }
    Ok(match result.consistent.len() {
        1 => 0,
        0 => 6,
        _ => 5,
    })
}

#[derive(Serialize)]
struct ValidateOutput {
    schema: u32,
    summary: ValidationSummary,
    reports: Vec<ProbabilityReport>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_validate(
    host: &Option<PathBuf>,
    pattern: &Option<PathBuf>,
    params: &ParamArgs,
    seed: u64,
    trials: u64,
    alpha: f64,
    output: Output,
) -> Result<u8, Error> {
    let reports = match (host, pattern) {
        (Some(hpath), Some(ppath)) => {
            let host = load_graph(hpath)?;
            let pattern = load_graph(ppath)?;
            // Resolve params first so variant domain errors surface as exit 2.
            let resolved = resolve_params(&pattern, params)?;
            let occ = enumerate_occurrences(&host, &pattern, DEFAULT_OCCURRENCE_CAP)?;
            let mut reports = vec![check_lemma1_with(&pattern, resolved.epsilon, trials, seed, alpha)?];
            for i in 0..occ.len() {
                for j in 0..occ.len() {
                    if i != j {
                        reports.extend(pair_reports(
                            &host, &occ[i], &occ[j], i, j, resolved.epsilon, trials, seed, alpha,
                        )?);
                    }
                }
            }
            reports
        }
        (None, None) => run_corpus_validation()?,
        _ => {
            return Err(Error::Domain(
                "--host and --pattern must be given together".into(),
            ))
        }
    };

    let summary = ValidationSummary::tally(&reports);
    let out = ValidateOutput {
        schema: 1,
        summary,
        reports,
    };
    match output {
        Output::Json => println!("{}", serde_json::to_string(&out)?),
        Output::Text => {
            for r in &out.reports {
                println!(
                    "{}: value = {:.6} bound = {:?} satisfied = {:?}",
                    r.label, r.value, r.bound, r.satisfied
                );
            }
            println!(
                "checks: {} total, {} satisfied, {} violated, {} not asserted",
                summary.total, summary.satisfied, summary.violated, summary.not_asserted
            );
        }
    }
    Ok(if summary.violated > 0 { 7 } else { 0 })
}

#[allow(clippy::too_many_arguments)]
fn pair_reports(
    host: &Graph,
    hi: &Occurrence,
    hj: &Occurrence,
    i: usize,
    j: usize,
    epsilon: f64,
    trials: u64,
    seed: u64,
    alpha: f64,
) -> Result<Vec<ProbabilityReport>, Error> {
    if host.vertex_count() <= pooltest::validate::EXACT_VERTEX_LIMIT {
        let mut reports = check_pair_bounds(host, hi, hj, epsilon)?;
        for r in &mut reports {
            r.label = format!("[{i},{j}]/{}", r.label);
        }
        Ok(reports)
    } else {
        let k = hi.edge_count() as u64;
        let delta = hi.max_degree() as u64;
        let p = vertex_probability(k, delta, epsilon, ProbabilityForm::Theorem2)?;
        let mut r = pooltest::validate::mc_estimate_distinguish(
            host, hi, hj, p, trials, seed, alpha,
        )?;
        r.label = format!("[{i},{j}]/{}", r.label);
        r.bound = Some(
            2.0 * p * p * (1.0 - p).powi(2 * delta as i32) * (1.0 - epsilon),
        );
        r.satisfied = Some(r.value + r.ci_halfwidth >= r.bound.unwrap());
        Ok(vec![r])
    }
}

fn run(cli: &Cli) -> Result<u8, Error> {
    if let Some(threads) = cli.threads {
        // Ignore the error if a pool was already installed.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match &cli.command {
        Command::Enumerate { graphs } => cmd_enumerate(graphs, cli.output),
        Command::Bounds { graphs, params } => cmd_bounds(graphs, params, cli.output),
        Command::Design {
            graphs,
            params,
            seed,
            t,
            require_separating,
            max_attempts,
        } => cmd_design(
            graphs,
            params,
            *seed,
            *t,
            *require_separating,
            *max_attempts,
            cli.output,
        ),
        Command::Simulate { design, defective } => cmd_simulate(design, *defective, cli.output),
        Command::Decode { design, outcomes } => cmd_decode(design, outcomes, cli.output),
        Command::Validate {
            host,
            pattern,
            params,
            seed,
            trials,
            alpha,
        } => cmd_validate(host, pattern, params, *seed, *trials, *alpha, cli.output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_for(&err))
        }
    }
}
