//! Command-line harness: generate instances, run the online algorithms
//! against the offline oracles, verify the property suites, search for bad
//! instances, and aggregate reports into CSV.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or parse error.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use occ::clustering::Clustering;
use occ::config::{parse_config_block, RunConfig};
use occ::dense::{dense_run, DenseError};
use occ::greedy::greedy_run;
use occ::instance::{self, EdgeSign, LabeledInstance};
use occ::mixed::{mixed_run, MixedConfig};
use occ::oracle::{exact_optimum, oracle, seed_for_prefix, DEFAULT_EXACT_CAP};
use occ::suites;

use report::{csv_row, fnv1a64, ratios, Report, CSV_HEADER};

#[derive(Parser)]
#[command(
    name = "occ",
    version,
    about = "Online correlation clustering harness",
    propagate_version = true
)]
struct Cli {
    /// Seed for generators, searches, and algorithm randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path (file for gen/run/report, directory for search).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Config block file (key = value lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the exact-oracle enumeration cap.
    #[arg(long, global = true)]
    exact_cap: Option<usize>,
    /// Worker threads for verify and search.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    Greedy,
    Dense,
    Mixed,
}

impl Algorithm {
    fn name(self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::Dense => "dense",
            Algorithm::Mixed => "mixed",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    AllPositive,
    ThreeGroup,
    TwoClique,
    Planted,
}

#[derive(Clone, Copy, ValueEnum)]
enum RightRight {
    Negative,
    Positive,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Random,
    TwoClique,
    GadgetMix,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance in .occ format.
    Gen {
        generator: Generator,
        /// Size parameter for all-positive (n = 2m), three-group (n = 6m)
        /// and two-clique (n = 2m).
        #[arg(long)]
        m: Option<usize>,
        /// Positive a-b edges of the two-clique construction.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        clusters: Option<usize>,
        #[arg(long)]
        size: Option<usize>,
        /// Label flip probability for planted instances.
        #[arg(long)]
        flip: Option<f64>,
        /// Sign of right-right inter-group edges in the three-group gadget.
        #[arg(long, value_enum, default_value_t = RightRight::Negative)]
        right_right: RightRight,
    },
    /// Run an algorithm on an instance file and emit a report.
    Run {
        algorithm: Algorithm,
        instance: PathBuf,
    },
    /// Run a named property suite over a seeded corpus.
    Verify {
        suite: String,
        /// Number of random corpus instances.
        #[arg(long)]
        trials: Option<usize>,
        /// Largest random instance size.
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Search for instances with a bad competitive ratio.
    Search {
        algorithm: Algorithm,
        /// Vertices per trial instance (random family).
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = Family::Random)]
        family: Family,
        /// Clique size for the two-clique sweep, e.g. 3..6.
        #[arg(long)]
        m_range: Option<String>,
        /// Positive a-b edges for the two-clique sweep.
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Group half-size for the gadget-mix distribution.
        #[arg(long)]
        m: Option<usize>,
    },
    /// Aggregate a directory of reports into CSV.
    Report { dir: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        // Ignore the error if a pool already exists (e.g. repeated init).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    let config = load_config(&cli)?;
    match cli.command {
        Command::Gen {
            generator,
            m,
            k,
            clusters,
            size,
            flip,
            right_right,
        } => cmd_gen(
            &cli, config, generator, m, k, clusters, size, flip, right_right,
        ),
        Command::Run {
            algorithm,
            ref instance,
        } => cmd_run(&cli, config, algorithm, instance),
        Command::Verify {
            ref suite,
            trials,
            n_max,
        } => cmd_verify(&cli, suite, trials, n_max),
        Command::Search {
            algorithm,
            n,
            trials,
            family,
            ref m_range,
            k,
            m,
        } => cmd_search(&cli, config, algorithm, n, trials, family, m_range.as_deref(), k, m),
        Command::Report { ref dir } => cmd_report(&cli, dir),
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            parse_config_block(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
        config.dense.oracle.seed = seed;
    }
    if let Some(cap) = cli.exact_cap {
        if cap > DEFAULT_EXACT_CAP {
            eprintln!(
                "warning: exact-cap {cap} enumerates Bell({cap}) partitions; expect long runtimes"
            );
        }
        config.dense.oracle.exact_cap = cap;
    }
    Ok(config)
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    cli: &Cli,
    config: RunConfig,
    generator: Generator,
    m: Option<usize>,
    k: Option<usize>,
    clusters: Option<usize>,
    size: Option<usize>,
    flip: Option<f64>,
    right_right: RightRight,
) -> Result<ExitCode> {
    let need = |opt: Option<usize>, flag: &str| {
        opt.ok_or_else(|| anyhow!("--{flag} is required for this generator"))
    };
    let inst = match generator {
        Generator::AllPositive => instance::all_positive(need(m, "m")?)?,
        Generator::ThreeGroup => {
            let sign = match right_right {
                RightRight::Negative => EdgeSign::Negative,
                RightRight::Positive => EdgeSign::Positive,
            };
            instance::three_group_gadget(need(m, "m")?, sign)?
        }
        Generator::TwoClique => instance::two_clique(need(m, "m")?, need(k, "k")?)?,
        Generator::Planted => {
            let flip = flip.ok_or_else(|| anyhow!("--flip is required for planted"))?;
            instance::planted(need(clusters, "clusters")?, need(size, "size")?, flip, config.seed)?
        }
    };
    let summary = format!(
        "n={} positive={} negative={}",
        inst.n(),
        inst.positive_count(),
        inst.negative_count()
    );
    match &cli.out {
        Some(path) => {
            fs::write(path, inst.to_occ())
                .with_context(|| format!("writing {}", path.display()))?;
            println!("{summary}");
            println!("wrote {}", path.display());
        }
        None => {
            print!("{}", inst.to_occ());
            eprintln!("{summary}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

struct AlgorithmOutcome {
    final_clustering: Clustering,
    branch: String,
    updates: Vec<String>,
}

fn run_algorithm(
    algorithm: Algorithm,
    inst: &LabeledInstance,
    config: &RunConfig,
) -> Result<AlgorithmOutcome, DenseError> {
    match algorithm {
        Algorithm::Greedy => {
            let trace = greedy_run(inst, config.greedy);
            Ok(AlgorithmOutcome {
                final_clustering: trace.into_iter().last().expect("non-empty stream"),
                branch: "-".into(),
                updates: Vec::new(),
            })
        }
        Algorithm::Dense => {
            let run = dense_run(inst, &config.dense)?;
            let updates = run
                .state
                .chain
                .entries
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    format!(
                        "i={} t={} opt_profit={} exact={} marked={} nonsingleton={}",
                        i + 1,
                        e.time,
                        e.opt.profit,
                        e.opt.exact,
                        e.marked.len(),
                        e.pruned.non_singleton_count()
                    )
                })
                .collect();
            Ok(AlgorithmOutcome {
                final_clustering: run.trace.into_iter().last().expect("non-empty stream"),
                branch: "-".into(),
                updates,
            })
        }
        Algorithm::Mixed => {
            let mixed = MixedConfig {
                p: config.p,
                dense: config.dense.clone(),
                greedy: config.greedy,
                seed: config.seed,
            };
            let (branch, trace) = mixed_run(inst, &mixed)?;
            Ok(AlgorithmOutcome {
                final_clustering: trace.into_iter().last().expect("non-empty stream"),
                branch: branch.to_string(),
                updates: Vec::new(),
            })
        }
    }
}

fn build_report(
    descriptor: String,
    algorithm: Algorithm,
    inst: &LabeledInstance,
    config: &RunConfig,
    outcome: &AlgorithmOutcome,
    opt: &occ::OracleResult,
    elapsed_ms: f64,
) -> Report {
    let score = outcome.final_clustering.score_tracked();
    let opt_score = opt.clustering.score_tracked();
    let (profit_ratio, cost_ratio) = ratios(score.profit, score.cost, opt_score.profit, opt_score.cost);
    let config_block = if config.raw.is_empty() {
        config.to_block()
    } else {
        config.raw.clone()
    };
    Report {
        instance: descriptor,
        n: inst.n(),
        algorithm: algorithm.name().into(),
        branch: outcome.branch.clone(),
        seed: config.seed,
        profit: score.profit,
        cost: score.cost,
        opt_profit: opt_score.profit,
        opt_cost: opt_score.cost,
        opt_exact: opt.exact,
        profit_ratio,
        cost_ratio,
        elapsed_ms,
        clusters: outcome.final_clustering.to_lines(),
        updates: outcome.updates.clone(),
        config: config_block,
    }
}

fn cmd_run(
    cli: &Cli,
    config: RunConfig,
    algorithm: Algorithm,
    path: &Path,
) -> Result<ExitCode> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let inst = LabeledInstance::parse_occ(&text)
        .map_err(|e| anyhow!("{}: {e}", path.display()))?;

    let started = Instant::now();
    let outcome = match run_algorithm(algorithm, &inst, &config) {
        Ok(outcome) => outcome,
        Err(DenseError::MergeOnly { time, msg }) => {
            eprintln!("dense invariant failure at update time {time}: {msg}");
            return Ok(ExitCode::from(1));
        }
        Err(e) => return Err(e.into()),
    };
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;

    let opt = oracle(&inst, inst.n(), &config.dense.oracle)?;
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let descriptor = format!("file {name} fnv1a={:016x}", fnv1a64(text.as_bytes()));
    let report = build_report(descriptor, algorithm, &inst, &config, &outcome, &opt, elapsed_ms);

    println!(
        "{} on {}: profit {} / opt {} (ratio {:.4}), cost {} / opt {} (ratio {:.4})",
        algorithm.name(),
        name,
        report.profit,
        report.opt_profit,
        report.profit_ratio,
        report.cost,
        report.opt_cost,
        report.cost_ratio
    );
    match &cli.out {
        Some(out) => {
            fs::write(out, report.to_text())
                .with_context(|| format!("writing {}", out.display()))?;
            println!("report written to {}", out.display());
        }
        None => print!("{}", report.to_text()),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(
    cli: &Cli,
    suite: &str,
    trials: Option<usize>,
    n_max: Option<usize>,
) -> Result<ExitCode> {
    let outcome = suites::run_suite(
        suite,
        trials.unwrap_or(300),
        n_max.unwrap_or(9),
        cli.seed.unwrap_or(2024),
    )
    .ok_or_else(|| {
        anyhow!(
            "unknown suite {suite:?}; available: {}",
            suites::SUITE_NAMES.join(", ")
        )
    })?;

    println!("{}", outcome.summary());
    for note in &outcome.notes {
        println!("note: {note}");
    }
    if outcome.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        for v in outcome.violations.iter().take(5) {
            println!("violation: {}", v.description);
        }
        if let Some(first) = outcome.violations.first() {
            if !first.occ.is_empty() {
                println!("counterexample (.occ):");
                print!("{}", first.occ);
            }
        }
        Ok(ExitCode::from(1))
    }
}

struct Trial {
    index: usize,
    profit_ratio: f64,
    cost_ratio: f64,
    report: Report,
    occ: String,
}

#[allow(clippy::too_many_arguments)]
fn cmd_search(
    cli: &Cli,
    config: RunConfig,
    algorithm: Algorithm,
    n: usize,
    trials: usize,
    family: Family,
    m_range: Option<&str>,
    k: usize,
    m: Option<usize>,
) -> Result<ExitCode> {
    match family {
        Family::Random => cmd_search_random(cli, config, algorithm, n, trials),
        Family::TwoClique => cmd_search_two_clique(config, algorithm, m_range, k),
        Family::GadgetMix => {
            let m = m.ok_or_else(|| anyhow!("--m is required for the gadget-mix family"))?;
            cmd_search_gadget_mix(config, algorithm, m)
        }
    }
}

fn cmd_search_random(
    cli: &Cli,
    config: RunConfig,
    algorithm: Algorithm,
    n: usize,
    trials: usize,
) -> Result<ExitCode> {
    let cap = config.dense.oracle.exact_cap;
    if n > cap {
        bail!("n = {n} exceeds the exact-oracle cap {cap}; ratios could not be certified");
    }
    if trials == 0 {
        bail!("--trials must be at least 1");
    }
    let base_seed = config.seed;

    let results: Vec<Trial> = (0..trials)
        .into_par_iter()
        .map(|index| {
            let trial_seed = seed_for_prefix(base_seed, index + 1);
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
            let labels = LabeledInstance::from_fn(n, |_, _| {
                if rng.random_bool(0.5) {
                    EdgeSign::Positive
                } else {
                    EdgeSign::Negative
                }
            });
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let inst = labels.with_arrival_order(&order).expect("valid permutation");

            let mut trial_config = config.clone();
            trial_config.seed = trial_seed;
            trial_config.dense.oracle.seed = trial_seed;
            let started = Instant::now();
            let outcome =
                run_algorithm(algorithm, &inst, &trial_config).expect("search trial run");
            let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
            let opt = exact_optimum(&inst, n, cap).expect("n <= cap checked");

            let occ = inst.to_occ();
            let descriptor = format!(
                "search random n={n} trial={index} base-seed={base_seed} fnv1a={:016x}",
                fnv1a64(occ.as_bytes())
            );
            let report = build_report(
                descriptor,
                algorithm,
                &inst,
                &trial_config,
                &outcome,
                &opt,
                elapsed_ms,
            );
            Trial {
                index,
                profit_ratio: report.profit_ratio,
                cost_ratio: report.cost_ratio,
                report,
                occ,
            }
        })
        .collect();

    // Deterministic reductions: first trial index wins ties.
    let worst_profit = results
        .iter()
        .min_by(|a, b| {
            a.profit_ratio
                .total_cmp(&b.profit_ratio)
                .then(a.index.cmp(&b.index))
        })
        .expect("at least one trial");
    let worst_cost = results
        .iter()
        .max_by(|a, b| {
            a.cost_ratio
                .total_cmp(&b.cost_ratio)
                .then(b.index.cmp(&a.index))
        })
        .expect("at least one trial");

    println!(
        "searched {trials} random instances (n={n}, seed={base_seed}) with {}",
        algorithm.name()
    );
    println!(
        "worst profit ratio {:.6} at trial {} (profit {} / opt {})",
        worst_profit.profit_ratio,
        worst_profit.index,
        worst_profit.report.profit,
        worst_profit.report.opt_profit
    );
    println!(
        "worst cost ratio {:.6} at trial {} (cost {} / opt {})",
        worst_cost.cost_ratio, worst_cost.index, worst_cost.report.cost, worst_cost.report.opt_cost
    );

    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let occ_path = out_dir.join("worst.occ");
    let report_path = out_dir.join("worst.report");
    fs::write(&occ_path, &worst_profit.occ)?;
    fs::write(&report_path, worst_profit.report.to_text())?;
    println!(
        "worst instance written to {}; report to {}",
        occ_path.display(),
        report_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn parse_m_range(text: &str) -> Result<(usize, usize)> {
    let (lo, hi) = text
        .split_once("..")
        .ok_or_else(|| anyhow!("expected a range like 3..6, got {text:?}"))?;
    let lo: usize = lo.trim().parse().context("range start")?;
    let hi: usize = hi.trim().parse().context("range end")?;
    if lo < 2 || hi < lo {
        bail!("range must satisfy 2 <= start <= end, got {text:?}");
    }
    Ok((lo, hi))
}

fn cmd_search_two_clique(
    config: RunConfig,
    algorithm: Algorithm,
    m_range: Option<&str>,
    k: usize,
) -> Result<ExitCode> {
    let (lo, hi) = parse_m_range(m_range.unwrap_or("3..6"))?;
    let cap = config.dense.oracle.exact_cap;
    if 2 * hi > cap {
        bail!("two-clique sweep needs n = 2m <= exact cap {cap}, got m up to {hi}");
    }
    println!("m\tn\t{}_cost\topt_cost\tcost_ratio\tbound(n-1-opt)", algorithm.name());
    for m in lo..=hi {
        let inst = instance::two_clique(m, k)?;
        let outcome = run_algorithm(algorithm, &inst, &config)
            .map_err(|e| anyhow!("two-clique m={m}: {e}"))?;
        let cost = outcome.final_clustering.score_tracked().cost;
        let opt = exact_optimum(&inst, inst.n(), cap)?;
        let opt_cost = opt.clustering.score_tracked().cost;
        let bound = (2 * m as u64) - 1 - opt_cost;
        println!(
            "{m}\t{}\t{cost}\t{opt_cost}\t{:.6}\t{bound}",
            inst.n(),
            cost as f64 / opt_cost.max(1) as f64
        );
    }
    Ok(ExitCode::SUCCESS)
}

/// Uniform two-point distribution over the all-positive clique and the
/// three-group gadget sharing its 2m-vertex prefix; reports the per-instance
/// ratios and the distributional profit ratio E[alg] / E[opt].
fn cmd_search_gadget_mix(config: RunConfig, algorithm: Algorithm, m: usize) -> Result<ExitCode> {
    let cap = config.dense.oracle.exact_cap;
    if 6 * m > cap {
        bail!("gadget-mix needs n = 6m <= exact cap {cap}, got m = {m}");
    }
    let clique = instance::all_positive(m)?;
    let gadget = instance::three_group_gadget(m, EdgeSign::Negative)?;

    let mut alg_total = 0u64;
    let mut opt_total = 0u64;
    println!("uniform two-point distribution, {} branch:", algorithm.name());
    for (name, inst) in [("all-positive", &clique), ("three-group", &gadget)] {
        let outcome = run_algorithm(algorithm, inst, &config)
            .map_err(|e| anyhow!("{name}: {e}"))?;
        let profit = outcome.final_clustering.profit();
        let opt = exact_optimum(inst, inst.n(), cap)?;
        println!(
            "  {name} (n={}): profit {profit} / opt {} (ratio {:.6})",
            inst.n(),
            opt.profit,
            profit as f64 / opt.profit as f64
        );
        alg_total += profit;
        opt_total += opt.profit;
    }
    println!(
        "  distributional profit ratio: {alg_total} / {opt_total} = {:.6}",
        alg_total as f64 / opt_total as f64
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(cli: &Cli, dir: &Path) -> Result<ExitCode> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();

    let mut rows = vec![CSV_HEADER.to_string()];
    for path in paths {
        let text = match fs::read_to_string(&path) {
            Ok(text) => text,
            Err(err) => {
                eprintln!("warning: skipping {}: {err}", path.display());
                continue;
            }
        };
        match Report::parse(&text) {
            Ok(report) => rows.push(csv_row(&report)),
            Err(err) => eprintln!("warning: skipping {}: {err:#}", path.display()),
        }
    }

    let csv = rows.join("\n") + "\n";
    match &cli.out {
        Some(out) => {
            fs::write(out, csv).with_context(|| format!("writing {}", out.display()))?;
            println!("csv written to {}", out.display());
        }
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}
