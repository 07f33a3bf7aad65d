//! Batch experiment runner: cost profiles, pairwise comparison reports, the
//! verification suites, adversary generators, and the decision-tree oracle.
//! Reports are deterministic: identical configuration and seed produce
//! byte-identical files.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use bijective::adversary::{
    line_clustering_adversary, star_lowerbound_instance, three_point_adversary,
};
use bijective::analysis::{
    anchored_cost_profile, bijective_ratio, cost_profile, optimality_oracle, sample_profiles,
    ComparisonReport, CostProfile, DEFAULT_SEQUENCE_BUDGET, DEFAULT_TREE_BUDGET,
};
use bijective::kserver::{
    kcenter_anchors, simulate, AlgorithmSpec, Configuration, OnlineState, TieBreak,
};
use bijective::metric::{MetricSpace, MetricSpec};
use bijective::paging::{paging_opt_profile, paging_profile, PagingPolicy, PagingSpec};
use bijective::rat::{parse_rat, rat_str, Rat};
use bijective::rbm::{parse_colour_sequence, rbm_opt_profile, rbm_profile, RbmPolicy};
use bijective::verify;
use bijective::Error;

#[derive(Parser)]
#[command(
    name = "bijective",
    about = "Exhaustive bijective-ratio and dominance analysis of online algorithms",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// Metric: path:M[:DELTA], cycle:M[:DELTA], spider:N1,N2,..[:DELTA],
    /// star:W1,W2,.. (half costs), or inline JSON
    #[arg(long)]
    metric: Option<String>,
    /// Weighted paging instance as JSON: {"costs":["1","1","4"],"k":2}
    #[arg(long)]
    paging: Option<String>,
    /// Reordering buffer instance as COLOURS:K, e.g. 3:2
    #[arg(long)]
    rbm: Option<String>,
    /// Number of servers (k-server metrics)
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Initial configuration, comma-separated point ids (defaults to the
    /// covering-radius anchors)
    #[arg(long)]
    c0: Option<String>,
    /// Tie-break rule: lowest_point, highest_point, clockwise
    #[arg(long, default_value = "lowest_point")]
    tie: String,
    /// Gadget threshold t (enables --alg/--a/--b gadget)
    #[arg(long)]
    gadget_t: Option<String>,
    /// Enumeration budget (max sequences)
    #[arg(long, default_value_t = DEFAULT_SEQUENCE_BUDGET)]
    budget: u128,
}

impl InstanceArgs {
    fn tie(&self) -> Result<TieBreak, Error> {
        self.tie.parse()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sorted cost profile of one algorithm over all length-n sequences
    Profile {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Algorithm id: greedy|kcenter|wfa|gadget|opt, or a paging/rbm policy
        #[arg(long)]
        alg: String,
        #[arg(long)]
        n: u32,
        /// Monte Carlo sample count (approximate profile; exact if it covers
        /// the whole cube)
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for CSV files
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two algorithms: bijective ratio, dominance, Max/Max, average
    Compare {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        n: u32,
        /// Ratios for the additive curve c(rho), comma separated
        #[arg(long, default_value = "1,2")]
        rho: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite; exits nonzero if any check fails
    Verify {
        /// Suite name or `all`
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a lower-bound request sequence or instance
    Adversary {
        /// three-point | line-clustering | star-instance
        #[arg(long)]
        kind: String,
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Epsilon for line-clustering (e.g. 0.2)
        #[arg(long)]
        eps: Option<String>,
        /// Ray length d for star-instance
        #[arg(long, default_value_t = 3)]
        d: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate lazy decision-tree algorithms and test greedy's dominance
    Oracle {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        n: u32,
        /// Maximum number of decision trees
        #[arg(long, default_value_t = DEFAULT_TREE_BUDGET)]
        trees: u128,
    },
    /// Simulate one algorithm on one sequence and print the trace CSV
    Trace {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        alg: String,
        /// Request sequence: comma-separated point ids, or colour letters
        /// like "aabab" with --rbm
        #[arg(long)]
        seq: String,
    },
}

#[derive(Serialize)]
struct ErrorReport {
    error: String,
    kind: &'static str,
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::BudgetExceeded { .. } => "budget_exceeded",
        Error::InvalidMetric(_) => "invalid_metric",
        Error::InvalidPoint(_) => "invalid_point",
        Error::UnknownAlgorithm(_) => "unknown_algorithm",
        Error::TooCoarse(_) => "discretization_too_coarse",
        Error::ApproximateProfile => "approximate_profile",
        Error::LengthMismatch(_, _) => "length_mismatch",
        Error::EmptyConfiguration | Error::WrongConfigurationSize { .. } => "bad_configuration",
        Error::InvalidParameter(_) => "invalid_parameter",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            let report = ErrorReport {
                error: e.to_string(),
                kind: error_kind(&e),
            };
            eprintln!(
                "{}",
                serde_json::to_string(&report).expect("error serialization")
            );
            ExitCode::from(2)
        }
    }
}

fn build_metric(args: &InstanceArgs) -> Result<MetricSpace, Error> {
    let raw = args
        .metric
        .as_deref()
        .ok_or_else(|| Error::InvalidParameter("--metric is required here".into()))?;
    // @path reads the JSON description from a file
    let spec: MetricSpec = if let Some(path) = raw.strip_prefix('@') {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {path}: {e}")))?;
        text.parse()?
    } else {
        raw.parse()?
    };
    spec.build()
}

/// Everything needed to reproduce a run, written next to its outputs.
#[derive(Serialize)]
struct RunManifest<'a> {
    subcommand: &'a str,
    metric: &'a Option<String>,
    paging: &'a Option<String>,
    rbm: &'a Option<String>,
    k: usize,
    c0: &'a Option<String>,
    tie: &'a str,
    n: u32,
    seed: Option<u64>,
    samples: Option<u64>,
    budget: u128,
}

fn write_manifest(
    out: &Option<PathBuf>,
    subcommand: &str,
    args: &InstanceArgs,
    n: u32,
    seed: Option<u64>,
    samples: Option<u64>,
) -> Result<(), Error> {
    let manifest = RunManifest {
        subcommand,
        metric: &args.metric,
        paging: &args.paging,
        rbm: &args.rbm,
        k: args.k,
        c0: &args.c0,
        tie: &args.tie,
        n,
        seed,
        samples,
        budget: args.budget,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serialization");
    write_file(out, "run.json", &json)?;
    Ok(())
}

fn initial_config(args: &InstanceArgs, m: &MetricSpace) -> Result<Configuration, Error> {
    match &args.c0 {
        Some(s) => {
            let c = Configuration::parse(s)?;
            c.validate(m)?;
            Ok(c)
        }
        None => kcenter_anchors(m, args.k),
    }
}

fn kserver_alg(args: &InstanceArgs, name: &str) -> Result<AlgorithmSpec, Error> {
    let t = args.gadget_t.as_deref().map(parse_rat).transpose()?;
    AlgorithmSpec::parse(name, args.tie()?, t)
}

fn parse_rbm(s: &str) -> Result<(u32, usize), Error> {
    let (c, k) = s
        .split_once(':')
        .ok_or_else(|| Error::InvalidParameter(format!("--rbm wants COLOURS:K, got `{s}`")))?;
    let colours = c
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad colour count `{c}`")))?;
    let k = k
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad buffer size `{k}`")))?;
    Ok((colours, k))
}

fn write_file(dir: &Option<PathBuf>, name: &str, contents: &str) -> Result<Option<PathBuf>, Error> {
    let Some(dir) = dir else { return Ok(None) };
    fs::create_dir_all(dir)
        .map_err(|e| Error::InvalidParameter(format!("cannot create {dir:?}: {e}")))?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| Error::InvalidParameter(format!("cannot write {path:?}: {e}")))?;
    Ok(Some(path))
}

fn profile_csv(p: &CostProfile) -> String {
    let mut buf = Vec::new();
    p.write_csv(&mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("ascii csv")
}

/// Build a profile for any of the three problem families.
fn any_profile(args: &InstanceArgs, alg: &str, n: u32) -> Result<CostProfile, Error> {
    if let Some(paging) = &args.paging {
        let spec: PagingSpec = paging.parse()?;
        let (inst, cache) = spec.build()?;
        return match alg {
            "opt" | "offline_opt" => paging_opt_profile(&inst, &cache, n, args.budget),
            name => paging_profile(&inst, name.parse::<PagingPolicy>()?, &cache, n, args.budget),
        };
    }
    if let Some(rbm) = &args.rbm {
        let (colours, k) = parse_rbm(rbm)?;
        return match alg {
            "opt" | "offline_opt" => rbm_opt_profile(colours, k, n, args.budget),
            name => rbm_profile(name.parse::<RbmPolicy>()?, colours, k, n, args.budget),
        };
    }
    let m = build_metric(args)?;
    let c0 = initial_config(args, &m)?;
    let spec = kserver_alg(args, alg)?;
    if let AlgorithmSpec::KCenter = spec {
        return anchored_cost_profile(&m, &c0, n, "kcenter");
    }
    cost_profile(&spec, &m, &c0, n, args.budget)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Profile {
            instance,
            alg,
            n,
            samples,
            seed,
            out,
        } => {
            let profile = match samples {
                Some(samples) => {
                    let m = build_metric(&instance)?;
                    let c0 = initial_config(&instance, &m)?;
                    let spec = kserver_alg(&instance, &alg)?;
                    sample_profiles(&spec, &m, &c0, n, samples, seed)?
                }
                None => any_profile(&instance, &alg, n)?,
            };
            let csv = profile_csv(&profile);
            write_manifest(&out, "profile", &instance, n, Some(seed), samples)?;
            match write_file(
                &out,
                &format!("profile_{}.csv", sanitize(&profile.algorithm)),
                &csv,
            )? {
                Some(path) => println!("wrote {} ({} ranks)", path.display(), profile.total()),
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare {
            instance,
            a,
            b,
            n,
            rho,
            out,
        } => {
            let rhos = rho
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(parse_rat)
                .collect::<Result<Vec<Rat>, _>>()?;
            let pa = any_profile(&instance, &a, n)?;
            let pb = any_profile(&instance, &b, n)?;
            let report: ComparisonReport = bijective_ratio(&pa, &pb, &rhos)?;
            let json = serde_json::to_string_pretty(&report).expect("report serialization");
            write_manifest(&out, "compare", &instance, n, None, None)?;
            write_file(
                &out,
                &format!("profile_{}.csv", sanitize(&pa.algorithm)),
                &profile_csv(&pa),
            )?;
            write_file(
                &out,
                &format!("profile_{}.csv", sanitize(&pb.algorithm)),
                &profile_csv(&pb),
            )?;
            if let Some(path) = write_file(&out, "compare.json", &json)? {
                println!("wrote {}", path.display());
            }
            println!("{json}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, out } => {
            let rows = verify::run_suite(&suite)?;
            let mut failed = 0usize;
            for r in &rows {
                println!(
                    "{} | {} | bound: {} | measured: {} | {}",
                    r.check,
                    r.instance,
                    r.bound,
                    r.measured,
                    if r.pass { "pass" } else { "FAIL" }
                );
                if !r.pass {
                    failed += 1;
                }
            }
            println!("{} checks, {} failed", rows.len(), failed);
            let json = serde_json::to_string_pretty(&rows).expect("rows serialization");
            write_file(&out, &format!("verify_{}.json", sanitize(&suite)), &json)?;
            Ok(if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Adversary {
            kind,
            instance,
            n,
            eps,
            d,
            out,
        } => match kind.as_str() {
            "three-point" => {
                let m = MetricSpace::path(3, parse_rat("1")?)?;
                let c0 = Configuration::new(vec![0, 2]);
                let alg = kserver_alg(&instance, "greedy")?;
                let mut target = OnlineState::new(&alg, &m, &c0)?;
                let seq = three_point_adversary(&m, &mut target, n)?;
                emit_adversary_run(&m, &c0, &seq, &instance, &out)
            }
            "line-clustering" => {
                let m = build_metric(&instance)?;
                let c0 = initial_config(&instance, &m)?;
                let eps = parse_rat(eps.as_deref().unwrap_or("0.2"))?;
                let res = line_clustering_adversary(&m, instance.k, eps, instance.tie()?, &c0, n)?;
                println!(
                    "suffix_start={} x={} delta'={}",
                    res.suffix_start,
                    res.x,
                    rat_str(&res.delta_prime)
                );
                emit_adversary_run(&m, &c0, &res.sequence, &instance, &out)
            }
            "star-instance" => {
                let inst = star_lowerbound_instance(instance.k, d, parse_rat("1")?)?;
                println!(
                    "star: {} short rays of length {}, long ray of {} points",
                    inst.short_rays,
                    rat_str(&inst.d),
                    inst.metric.rays()[0].points.len()
                );
                println!("anchors_kcenter={}", inst.anchors_kcenter);
                println!("anchors_centre={}", inst.anchors_centre);
                let nn = n as u32;
                let pa = anchored_cost_profile(&inst.metric, &inst.anchors_kcenter, nn, "kcenter")?;
                let pb = anchored_cost_profile(
                    &inst.metric,
                    &inst.anchors_centre,
                    nn,
                    "centre-anchored",
                )?;
                let rho = bijective::analysis::certified_rho(&pa, &pb, parse_rat("72")?)?;
                println!(
                    "certified rho at c=72, n={n}: {}",
                    rho.map(|r| rat_str(&r)).unwrap_or_else(|| "none".into())
                );
                let _ = out;
                Ok(ExitCode::SUCCESS)
            }
            other => Err(Error::InvalidParameter(format!(
                "unknown adversary `{other}`"
            ))),
        },
        Command::Oracle { instance, n, trees } => {
            let (m, c0) = if let Some(paging) = &instance.paging {
                let spec: PagingSpec = paging.parse()?;
                let (inst, cache) = spec.build()?;
                inst.to_star(&cache)?
            } else {
                let m = build_metric(&instance)?;
                let c0 = initial_config(&instance, &m)?;
                (m, c0)
            };
            let outcome = optimality_oracle(&m, &c0, n, instance.tie()?, trees)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&outcome).expect("oracle serialization")
            );
            Ok(if outcome.dominant {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Trace { instance, alg, seq } => {
            if let Some(rbm) = &instance.rbm {
                let (_, k) = parse_rbm(rbm)?;
                let colours = parse_colour_sequence(&seq)?;
                let policy: RbmPolicy = alg.parse()?;
                let (switches, log) = bijective::rbm::rbm_run(policy, k, &colours)?;
                for ev in &log {
                    println!("switch at item {} -> colour {}", ev.consumed, ev.colour);
                }
                println!("switches={switches}");
                return Ok(ExitCode::SUCCESS);
            }
            let m = build_metric(&instance)?;
            let c0 = initial_config(&instance, &m)?;
            let requests = Configuration::parse(&seq)?.servers().to_vec();
            let spec = kserver_alg(&instance, &alg)?;
            let trace = simulate(&spec, &m, &c0, &requests)?;
            print!("{}", trace_csv(&trace));
            println!("total={}", rat_str(&trace.total_cost));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn trace_csv(trace: &bijective::Trace) -> String {
    let mut buf = Vec::new();
    buf.extend_from_slice(b"seq_id,step,request,server,cost\n");
    trace.write_csv(0, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("ascii csv")
}

fn emit_adversary_run(
    m: &MetricSpace,
    c0: &Configuration,
    seq: &[u32],
    instance: &InstanceArgs,
    out: &Option<PathBuf>,
) -> Result<ExitCode, Error> {
    let greedy = simulate(
        &AlgorithmSpec::Greedy {
            tie: instance.tie()?,
        },
        m,
        c0,
        seq,
    )?;
    let kc = simulate(&AlgorithmSpec::KCenter, m, c0, seq)?;
    let (opt, _) = bijective::kserver::offline_opt(m, c0, seq)?;
    println!(
        "sequence={}",
        seq.iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    println!(
        "greedy={} kcenter={} opt={}",
        rat_str(&greedy.total_cost),
        rat_str(&kc.total_cost),
        rat_str(&opt)
    );
    if let Some(path) = write_file(out, "adversary_greedy_trace.csv", &trace_csv(&greedy))? {
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}
