//! Command-line interface for the knapsack amplitude-amplification
//! simulator and its benchmark studies.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use knapaa_core::instances::{self, Correlation, ItemOrdering};
use knapaa_core::ksolve;
use knapaa_core::nested::{self, DepthPolicy};
use knapaa_core::rng::{protocol_rng, tag};
use knapaa_core::gas::{self, StartMode};

use knapaa_cli::emit::{self, fmt12};
use knapaa_cli::records::{Protocol, RunRecord, CSV_HEADER};
use knapaa_cli::sweeps::{self, CohortSpec, ProtocolParams};
use knapaa_cli::{metrics, verify};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CorrArg {
    Uncorrelated,
    Weak,
    Strong,
}

impl From<CorrArg> for Correlation {
    fn from(c: CorrArg) -> Self {
        match c {
            CorrArg::Uncorrelated => Correlation::Uncorrelated,
            CorrArg::Weak => Correlation::WeaklyCorrelated,
            CorrArg::Strong => Correlation::StronglyCorrelated,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OrderingArg {
    AsGenerated,
    Density,
    Value,
}

impl From<OrderingArg> for ItemOrdering {
    fn from(o: OrderingArg) -> Self {
        match o {
            OrderingArg::AsGenerated => ItemOrdering::AsGenerated,
            OrderingArg::Density => ItemOrdering::DensityDescending,
            OrderingArg::Value => ItemOrdering::ValueDescending,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Svg,
    Both,
}

impl FormatArg {
    fn csv(self) -> bool {
        matches!(self, FormatArg::Csv | FormatArg::Both)
    }
    fn svg(self) -> bool {
        matches!(self, FormatArg::Svg | FormatArg::Both)
    }
}

fn parse_depth_policy(s: &str) -> Result<DepthPolicy<f64>, String> {
    if let Some(k) = s.strip_prefix("fixed:") {
        let k: usize = k.parse().map_err(|_| format!("bad fixed depth in {s:?}"))?;
        return Ok(DepthPolicy::Fixed(k));
    }
    if let Some(t) = s.strip_prefix("rvtr:") {
        let t: f64 = t.parse().map_err(|_| format!("bad rvtr target in {s:?}"))?;
        if !(0.0..1.0).contains(&t) || t == 0.0 {
            return Err(format!("rvtr target must be in (0,1), got {t}"));
        }
        return Ok(DepthPolicy::RvtrTarget(t));
    }
    Err(format!(
        "depth policy {s:?} is neither fixed:K nor rvtr:TARGET"
    ))
}

fn parse_depth_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| e.to_string()))
        .collect()
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect()
}

#[derive(Debug, Parser)]
#[command(
    name = "knapaa",
    about = "Classical simulation and benchmarking of nested amplitude amplification \
             for binary knapsack instances"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Master seed for all derived random streams.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Rotation-bound growth factor (> 1).
    #[arg(long, global = true, default_value_t = 8.0 / 7.0)]
    lambda: f64,

    /// Preparation bias toward the greedy solution; defaults to b = n.
    #[arg(long, global = true)]
    bias: Option<f64>,

    /// Consecutive successful validation measurements the inner finder
    /// requires.
    #[arg(long = "L", global = true, default_value_t = 5)]
    validation_samples: u64,

    /// Depth policy: fixed:K or rvtr:TARGET.
    #[arg(long, global = true, default_value = "rvtr:0.6", value_parser = parse_depth_policy)]
    depth_policy: DepthPolicy<f64>,

    /// Budget constant C in B = C * n^t.
    #[arg(long, global = true, default_value_t = 10.0)]
    budget_const: f64,

    /// Budget exponent t in B = C * n^t.
    #[arg(long, global = true, default_value_t = 2.0)]
    budget_exp: f64,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    /// Output formats to emit.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,

    /// Item ordering applied before every protocol run.
    #[arg(long, global = true, value_enum, default_value_t = OrderingArg::Density)]
    ordering: OrderingArg,
}

#[derive(Debug, Args)]
struct CohortArgs {
    /// Correlation type of generated instances.
    #[arg(long = "type", value_enum, default_value_t = CorrArg::Uncorrelated)]
    corr_type: CorrArg,

    #[arg(long, default_value_t = 10)]
    n_min: usize,

    #[arg(long, default_value_t = 25)]
    n_max: usize,

    /// Weight/profit sampling range r.
    #[arg(long, default_value_t = 100)]
    range: u64,

    /// Tightness S; generator indices sweep 1..=max-index.
    #[arg(long, default_value_t = 10)]
    tightness: u64,

    #[arg(long, default_value_t = 13)]
    max_index: u64,

    #[arg(long, default_value_t = 0.0)]
    capweight_min: f64,

    #[arg(long, default_value_t = f64::INFINITY)]
    capweight_max: f64,

    #[arg(long, default_value_t = 1_000_000)]
    max_instances: usize,

    /// Comma-separated nesting depths to sweep (default: every depth).
    #[arg(long, value_parser = parse_depth_list)]
    depths: Option<Vec<usize>>,

    /// Safety budget for single-improvement runs.
    #[arg(long, default_value_t = 1e8)]
    safety_budget: f64,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Generate instances and write them as newline-delimited JSON.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        range: u64,
        #[arg(long = "type", value_enum, default_value_t = CorrArg::Uncorrelated)]
        corr_type: CorrArg,
        #[arg(long, default_value_t = 10)]
        tightness: u64,
        /// Number of instance indices to generate (i = 1..=count).
        #[arg(long, default_value_t = 10)]
        count: u64,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
        /// Deduplicate identical instances before writing.
        #[arg(long, default_value_t = true)]
        dedup: bool,
    },

    /// Run one protocol on instances from a file (or a generated one).
    Run {
        #[arg(long, value_enum)]
        protocol: ProtocolArg,
        /// Newline-delimited JSON instance file.
        #[arg(long)]
        instances: Option<PathBuf>,
        /// Generate a single instance instead of reading a file.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 100)]
        range: u64,
        #[arg(long = "type", value_enum, default_value_t = CorrArg::Uncorrelated)]
        corr_type: CorrArg,
        #[arg(long, default_value_t = 10)]
        tightness: u64,
        #[arg(long, default_value_t = 1)]
        index: u64,
        /// Independent seeded runs per instance.
        #[arg(long, default_value_t = 1)]
        runs: u64,
        /// Start from a random feasible solution instead of the greedy one.
        #[arg(long, default_value_t = false)]
        random_start: bool,
    },

    /// Capweight study: best single-improvement cost gain over depths.
    SweepCapweight {
        #[command(flatten)]
        cohort: CohortArgs,
    },

    /// RVTR study: cost gain across incumbents and depths.
    SweepRvtr {
        #[command(flatten)]
        cohort: CohortArgs,
    },

    /// Optimality-gap study under budgets B = C * n^t.
    Optgap {
        #[command(flatten)]
        cohort: CohortArgs,
        /// Comma-separated budget exponents.
        #[arg(long, value_parser = parse_f64_list, default_value = "1.0,1.5,2.0")]
        t_exps: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Repetitions averaged per datapoint.
        #[arg(long, default_value_t = 4)]
        repetitions: u64,
    },

    /// Certify the tracking engine against the statevector simulator.
    Verify,

    /// Print the exact confidence-bound table for all-successful validation.
    CpTable,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Baseline,
    Nested,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("rayon pool")?;
    }
    let params = ProtocolParams {
        bias: cli.bias,
        lambda: cli.lambda,
        validation_samples: cli.validation_samples,
        master_seed: cli.seed,
    };
    let ordering: ItemOrdering = cli.ordering.into();

    match cli.cmd {
        Cmd::Generate {
            n,
            range,
            corr_type,
            tightness,
            count,
            out,
            dedup,
        } => {
            let mut batch = Vec::new();
            for i in 1..=count {
                batch.push(instances::generate_instance(
                    n,
                    range,
                    corr_type.into(),
                    tightness,
                    i,
                )?);
            }
            let before = batch.len();
            if dedup {
                batch = instances::dedup_instances(batch);
            }
            if let Some(dir) = out.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)?;
                }
            }
            let file = BufWriter::new(File::create(&out)?);
            instances::write_instances(file, &batch)?;
            println!(
                "wrote {} instances to {} ({} duplicates removed)",
                batch.len(),
                out.display(),
                before - batch.len()
            );
        }

        Cmd::Run {
            protocol,
            instances: path,
            n,
            range,
            corr_type,
            tightness,
            index,
            runs,
            random_start,
        } => {
            let batch = match (path, n) {
                (Some(path), _) => {
                    let file = BufReader::new(
                        File::open(&path).with_context(|| format!("open {}", path.display()))?,
                    );
                    instances::read_instances(file)?
                }
                (None, Some(n)) => vec![instances::generate_instance(
                    n,
                    range,
                    corr_type.into(),
                    tightness,
                    index,
                )?],
                (None, None) => bail!("pass --instances FILE or --n to generate one"),
            };
            let start = if random_start {
                StartMode::RandomFeasible
            } else {
                StartMode::Greedy
            };
            let mut rows = Vec::new();
            for inst in &batch {
                let inst = instances::reorder_items(inst, ordering);
                let record_base = run_one_instance_records(
                    &inst,
                    &params,
                    protocol,
                    runs,
                    cli.budget_const,
                    cli.budget_exp,
                    cli.depth_policy,
                    start,
                )?;
                rows.extend(record_base);
            }
            let name = match protocol {
                ProtocolArg::Baseline => "run_baseline.csv",
                ProtocolArg::Nested => "run_nested.csv",
            };
            let path = cli.out_dir.join(name);
            write_records(&path, &rows)?;
            println!("wrote {} rows to {}", rows.len(), path.display());
        }

        Cmd::SweepCapweight { cohort } => {
            let (spec, depths, safety) = cohort_spec(&cohort, false);
            let cohort_instances = sweeps::build_cohort(&spec, ordering)?;
            eprintln!("cohort: {} instances", cohort_instances.len());
            let out = sweeps::capweight_sweep(&cohort_instances, &params, &depths, safety)?;
            if cli.format.csv() {
                write_records(&cli.out_dir.join("capweight_datapoints.csv"), &out.records)?;
                emit::write_bins_csv(
                    &cli.out_dir.join("capweight_bins.csv"),
                    "capweight",
                    &out.bins,
                )?;
            }
            if cli.format.svg() {
                let svg = emit::band_plot_svg(
                    "best relative cost vs capweight",
                    "capweight",
                    "c_rel (best over depths)",
                    &out.bins,
                );
                write_text(&cli.out_dir.join("capweight.svg"), &svg)?;
            }
            println!(
                "capweight sweep: {} datapoints, {} excluded (greedy optimal), {} skipped entries",
                out.points.len(),
                out.excluded_no_improvement,
                out.skipped
            );
        }

        Cmd::SweepRvtr { cohort } => {
            let (spec, depths, safety) = cohort_spec(&cohort, false);
            let cohort_instances = sweeps::build_cohort(&spec, ordering)?;
            eprintln!("cohort: {} instances", cohort_instances.len());
            let out = sweeps::rvtr_sweep(&cohort_instances, &params, &depths, safety)?;
            if out.points.is_empty() {
                eprintln!("warning: empty RVTR table (filter too narrow?)");
            }
            if cli.format.csv() {
                write_records(&cli.out_dir.join("rvtr_datapoints.csv"), &out.records)?;
                emit::write_bins_csv(&cli.out_dir.join("rvtr_bins.csv"), "rvtr", &out.bins)?;
            }
            if cli.format.svg() {
                let svg = emit::band_plot_svg(
                    "relative cost vs remaining value-threshold ratio",
                    "RVTR",
                    "c_rel",
                    &out.bins,
                );
                write_text(&cli.out_dir.join("rvtr.svg"), &svg)?;
            }
            println!(
                "rvtr sweep: {} datapoints, {} skipped entries",
                out.points.len(),
                out.skipped
            );
        }

        Cmd::Optgap {
            cohort,
            t_exps,
            seeds,
            repetitions,
        } => {
            let (spec, _, _) = cohort_spec(&cohort, true);
            let cohort_instances = sweeps::build_cohort(&spec, ordering)?;
            eprintln!("cohort: {} instances", cohort_instances.len());
            let out = sweeps::optgap_experiment(
                &cohort_instances,
                &params,
                cli.budget_const,
                &t_exps,
                seeds,
                repetitions,
                cli.depth_policy,
            )?;
            if cli.format.csv() {
                for &t in &t_exps {
                    let rows: Vec<RunRecord> = out
                        .records
                        .iter()
                        .filter(|(rt, _)| *rt == t)
                        .map(|(_, r)| r.clone())
                        .collect();
                    let name = format!("optgap_t{}.csv", fmt12(t));
                    write_records(&cli.out_dir.join(name), &rows)?;
                }
                let header = ["t_exp", "protocol", "mean_gamma", "sigma", "count"];
                let rows: Vec<Vec<String>> = out
                    .summary
                    .iter()
                    .map(|s| {
                        vec![
                            fmt12(s.t_exp),
                            s.protocol.name().to_string(),
                            fmt12(s.mean_gamma),
                            fmt12(s.sigma),
                            s.count.to_string(),
                        ]
                    })
                    .collect();
                emit::write_csv(&cli.out_dir.join("optgap_summary.csv"), &header, &rows)?;
            }
            if cli.format.svg() {
                let mut series = Vec::new();
                for protocol in [Protocol::Baseline, Protocol::Nested] {
                    let pts: Vec<(f64, f64, f64)> = out
                        .summary
                        .iter()
                        .filter(|s| s.protocol == protocol)
                        .map(|s| (s.t_exp, s.mean_gamma, s.sigma))
                        .collect();
                    series.push((protocol.name().to_string(), pts));
                }
                let svg = emit::errorbar_plot_svg(
                    "optimality gap vs budget exponent",
                    "t (B = C n^t)",
                    "gamma",
                    &series,
                );
                write_text(&cli.out_dir.join("optgap.svg"), &svg)?;
            }
            for s in &out.summary {
                println!(
                    "t = {:>4}: {:<8} mean gamma = {:.4} +- {:.4} ({} datapoints)",
                    s.t_exp,
                    s.protocol.name(),
                    s.mean_gamma,
                    s.sigma,
                    s.count
                );
            }
        }

        Cmd::Verify => {
            let ok = verify::run();
            if !ok {
                bail!("verification failed");
            }
        }

        Cmd::CpTable => {
            let trials = cli.validation_samples;
            println!("confidence  p_lower  p_upper   (s = t = {trials})");
            for conf in [0.80, 0.90, 0.95, 0.99] {
                let b = nested::clopper_pearson(trials, trials, conf)?;
                println!("{:>9.0}%  {:>7.3}  {:>7}", conf * 100.0, b.p_lower, b.p_upper);
            }
        }
    }
    Ok(())
}

fn cohort_spec(args: &CohortArgs, require_gap: bool) -> (CohortSpec, Option<Vec<usize>>, f64) {
    (
        CohortSpec {
            corr_type: args.corr_type.into(),
            n_min: args.n_min,
            n_max: args.n_max,
            range_r: args.range,
            tightness_s: args.tightness,
            max_index: args.max_index,
            capweight_min: args.capweight_min,
            capweight_max: args.capweight_max,
            require_gap,
            max_instances: args.max_instances,
        },
        args.depths.clone(),
        args.safety_budget,
    )
}

#[allow(clippy::too_many_arguments)]
fn run_one_instance_records(
    inst: &instances::KnapsackInstance,
    params: &ProtocolParams,
    protocol: ProtocolArg,
    runs: u64,
    budget_const: f64,
    budget_exp: f64,
    policy: DepthPolicy<f64>,
    start: StartMode,
) -> Result<Vec<RunRecord>> {
    let id = inst.id();
    let bias = params.bias_for(inst);
    let metrics_inst = instances::compute_metrics(inst);
    let y_greedy = ksolve::greedy_solution(inst).value;
    let y_star = ksolve::optimal_solution(inst).value;
    let alpha_greedy = metrics::approximation_ratio(y_greedy, y_star)?;
    let budget = nested::budget(budget_const, inst.n, budget_exp);
    let mut rows = Vec::new();
    for seed in 0..runs {
        let tags = [
            tag(&id),
            tag(match protocol {
                ProtocolArg::Baseline => "run-baseline",
                ProtocolArg::Nested => "run-nested",
            }),
            seed,
        ];
        let mut rng = protocol_rng(params.master_seed, &tags);
        let (proto, y_final, inner, outer, depth, r_in, policy_str) = match protocol {
            ProtocolArg::Baseline => {
                let cfg = gas::GasConfig {
                    lambda: params.lambda,
                    budget,
                    start,
                };
                let run = gas::baseline_gas(inst, &bias, &cfg, &mut rng)?;
                (
                    Protocol::Baseline,
                    run.incumbent.value(),
                    run.ledger.inner,
                    run.ledger.outer,
                    None,
                    None,
                    String::new(),
                )
            }
            ProtocolArg::Nested => {
                let cfg = nested::NestedConfig {
                    lambda: params.lambda,
                    validation_samples: params.validation_samples,
                    budget,
                    policy,
                    start,
                };
                let out = nested::nested_gas(inst, &bias, &cfg, &mut rng)?;
                let policy_str = match policy {
                    DepthPolicy::Fixed(k) => format!("fixed:{k}"),
                    DepthPolicy::RvtrTarget(t) => format!("rvtr:{t}"),
                };
                (
                    Protocol::Nested,
                    out.run.incumbent.value(),
                    out.run.ledger.inner,
                    out.run.ledger.outer,
                    Some(out.last_depth),
                    Some(out.last_inner_rotations),
                    policy_str,
                )
            }
        };
        let alpha = metrics::approximation_ratio(y_final, y_star)?;
        let (gamma, _) = metrics::optimality_gap(alpha, alpha_greedy);
        rows.push(RunRecord {
            instance_id: id.clone(),
            n: inst.n,
            corr_type: inst.corr_type,
            range_r: inst.range_r,
            tightness_s: inst.tightness_s,
            capweight: metrics_inst.capweight_f64(),
            protocol: proto,
            seed,
            bias_b: bias.bias,
            lambda: params.lambda,
            validation_samples: params.validation_samples,
            depth_policy: policy_str,
            depth,
            inner_rotations: r_in,
            cost_total: inner + outer,
            cost_inner: inner,
            cost_outer: outer,
            y_greedy,
            y_final,
            y_star: Some(y_star),
            alpha: Some(alpha),
            gamma: Some(gamma),
            c_rel: None,
        });
    }
    Ok(rows)
}

fn write_records(path: &std::path::Path, records: &[RunRecord]) -> Result<()> {
    let rows: Vec<Vec<String>> = records.iter().map(|r| r.to_row()).collect();
    emit::write_csv(path, &CSV_HEADER, &rows)
}

fn write_text(path: &std::path::Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}
