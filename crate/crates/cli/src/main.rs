// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use covstream::estimator::{binarize, estimate_opt, estimate_opt_unknown_cmax, multicover_estimate, EstimatorConfig};
use covstream::hard::{generate, nearest_valid_params, HardKind};
use covstream::harness::{order_stream, run_experiment, ExperimentConfig, OrderMode};
use covstream::instance::{CoveringInstance, VariableKind};
use covstream::io::{read_instance, write_instance, write_meta, InstanceFile};
use covstream::merge::{merge_approx, merge_approx_ilp};
use covstream::oracle::{exact_opt, OracleLimits};
use covstream::sampler::verify_sampling_lemma;
use covstream::{streaming_cost, EstimateError, MergeError, OracleError, SamplerError};

#[derive(Parser)]
#[command(name = "covstream", version, about = "Streaming set cover and covering ILP tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a hard instance; hidden labels go to --meta only.
    Gen {
        #[arg(long)]
        dist: HardKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        alpha: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Exact optimum.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = OracleLimits::default().max_nodes)]
        max_nodes: u64,
    },
    /// One-pass Cost(I).
    Cost {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "arbitrary")]
        order: OrderMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// One-pass merging approximation.
    Approx {
        #[arg(long)]
        alpha: usize,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "arbitrary")]
        order: OrderMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = OracleLimits::default().max_nodes)]
        max_nodes: u64,
    },
    /// One-pass estimate of the optimum.
    Estimate {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        seed: u64,
        /// Upper bound on weights; defaults to the largest weight in the file.
        #[arg(long, conflicts_with = "unknown_cmax")]
        cmax: Option<u64>,
        #[arg(long)]
        unknown_cmax: bool,
        #[arg(long)]
        boost: Option<usize>,
        #[arg(long, conflicts_with_all = ["cmax", "unknown_cmax"])]
        multicover: bool,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "arbitrary")]
        order: OrderMode,
        #[arg(long)]
        emit_verdicts: bool,
        #[arg(long, default_value_t = OracleLimits::default().max_nodes)]
        max_nodes: u64,
    },
    /// Constraint-sampling trials.
    SampleLemma {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = OracleLimits::default().max_nodes)]
        max_nodes: u64,
    },
    /// Batch run from a key-value config file, CSV to stdout or --out.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Infeasible,
    Limit(u64),
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Infeasible => Failure::Infeasible,
            OracleError::LimitExceeded { limit } => Failure::Limit(limit),
        }
    }
}

impl From<EstimateError> for Failure {
    fn from(e: EstimateError) -> Self {
        match e {
            EstimateError::Infeasible => Failure::Infeasible,
            EstimateError::Oracle(o) => o.into(),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<MergeError> for Failure {
    fn from(e: MergeError) -> Self {
        match e {
            MergeError::Infeasible => Failure::Infeasible,
            MergeError::Oracle(o) => o.into(),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<SamplerError> for Failure {
    fn from(e: SamplerError) -> Self {
        match e {
            SamplerError::Oracle(o) => o.into(),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn limits(max_nodes: u64) -> OracleLimits {
    OracleLimits { max_nodes }
}

fn load(path: &PathBuf) -> Result<InstanceFile, Failure> {
    read_instance(path).map_err(usage)
}

fn binary_view(inst: &CoveringInstance) -> CoveringInstance {
    match inst.kind() {
        VariableKind::Binary => inst.clone(),
        VariableKind::Integer => binarize(inst),
    }
}

fn run(cmd: Command) -> Result<String, Failure> {
    let mut out = String::new();
    match cmd {
        Command::Gen {
            dist,
            n,
            m,
            alpha,
            seed,
            out: path,
            meta,
        } => {
            let h = generate(dist, n, m, alpha, seed).map_err(|e| {
                let hint = nearest_valid_params(dist, n, m, alpha)
                    .map(|(n, m, a)| format!(" (nearest valid: --n {n} --m {m} --alpha {a})"))
                    .unwrap_or_default();
                usage(format!("{e}{hint}"))
            })?;
            write_instance(&InstanceFile::Sets(h.system.clone()), &path).map_err(usage)?;
            if let Some(mp) = meta {
                write_meta(&h, &mp).map_err(usage)?;
            }
            writeln!(out, "wrote {} sets over {} elements to {}", h.system.m(), n, path.display()).unwrap();
        }
        Command::Solve { input, max_nodes } => {
            let inst = load(&input)?.to_ilp();
            let sol = exact_opt(&inst, limits(max_nodes))?;
            writeln!(out, "opt {}", sol.value).unwrap();
            let x: Vec<String> = sol.x.support().iter().map(|&i| format!("{i}:{}", sol.x.x[i])).collect();
            writeln!(out, "x {}", x.join(" ")).unwrap();
        }
        Command::Cost { input, order, seed } => {
            let inst = load(&input)?.to_ilp();
            let events = order_stream(inst.events(), order.with_seed(seed));
            let cost = streaming_cost(events, inst.demands(), inst.kind());
            writeln!(out, "cost {cost}").unwrap();
            if !cost.is_finite() {
                print!("{out}");
                return Err(Failure::Infeasible);
            }
        }
        Command::Approx {
            alpha,
            input,
            order,
            seed,
            max_nodes,
        } => {
            let file = load(&input)?;
            let inst = file.to_ilp();
            let events = order_stream(inst.events(), order.with_seed(seed));
            match file.as_sets().filter(|s| !s.is_weighted()) {
                Some(sets) => {
                    let cert = merge_approx(events, sets.n(), alpha, limits(max_nodes))?;
                    let chosen: Vec<String> = cert.chosen.iter().map(usize::to_string).collect();
                    let witness: Vec<String> = cert.witness.iter().enumerate().map(|(e, s)| format!("{e}:{s}")).collect();
                    writeln!(out, "size {}", cert.size()).unwrap();
                    writeln!(out, "chosen {}", chosen.join(" ")).unwrap();
                    writeln!(out, "witness {}", witness.join(" ")).unwrap();
                }
                None => {
                    let bin = binary_view(&inst);
                    let events = order_stream(bin.events(), order.with_seed(seed));
                    let x = merge_approx_ilp(events, bin.n(), bin.demands(), alpha, limits(max_nodes))?;
                    let value = bin.objective_value(&x).map_err(usage)?;
                    let chosen: Vec<String> = x.support().iter().map(usize::to_string).collect();
                    writeln!(out, "size {value}").unwrap();
                    writeln!(out, "chosen {}", chosen.join(" ")).unwrap();
                }
            }
        }
        Command::Estimate {
            alpha,
            seed,
            cmax,
            unknown_cmax,
            boost,
            multicover,
            input,
            order,
            emit_verdicts,
            max_nodes,
        } => {
            let inst = binary_view(&load(&input)?.to_ilp());
            let events = order_stream(inst.events(), order.with_seed(seed));
            let mut cfg = EstimatorConfig::new(alpha, seed).with_limits(limits(max_nodes));
            cfg.boost_copies = boost;
            if multicover {
                let r = multicover_estimate(events, inst.n(), inst.m(), inst.demands(), &cfg)?;
                writeln!(out, "estimate,pruned,opt_tester,b_max,space_bits").unwrap();
                writeln!(out, "{},{},{},{},{}", r.estimate, r.pruned, r.opt_tester, r.b_max, r.space.total()).unwrap();
                return Ok(out);
            }
            let r = if unknown_cmax {
                estimate_opt_unknown_cmax(events, inst.n(), inst.m(), inst.demands(), &cfg)?
            } else {
                let c_max = cmax.unwrap_or_else(|| inst.c_max());
                estimate_opt(events, inst.n(), inst.m(), inst.demands(), c_max, &cfg)?
            };
            writeln!(out, "estimate,k_star,cost,space_bits,max_pruned").unwrap();
            writeln!(out, "{},{},{},{},{}", r.estimate, r.k_star, r.cost_value, r.space_bits, r.max_pruned).unwrap();
            if emit_verdicts {
                writeln!(out).unwrap();
                writeln!(out, "guess,verdict,copies,rejecting_copies").unwrap();
                for v in &r.verdicts {
                    let verdict = if v.verdict.is_accept() { "accept" } else { "reject" };
                    writeln!(out, "{},{},{},{}", v.guess, verdict, v.copies, v.rejecting_copies).unwrap();
                }
            }
        }
        Command::SampleLemma {
            alpha,
            trials,
            seed,
            input,
            max_nodes,
        } => {
            let inst = load(&input)?.to_ilp();
            let r = verify_sampling_lemma(&inst, alpha, trials, seed, limits(max_nodes))?;
            writeln!(out, "trial,sampled_rows,opt_sampled,cost,opt,event").unwrap();
            for (t, o) in r.outcomes.iter().enumerate() {
                writeln!(
                    out,
                    "{t},{},{},{},{},{}",
                    o.sampled_rows.len(),
                    o.opt_sampled,
                    o.cost_full,
                    o.opt_full,
                    u8::from(o.event_held)
                )
                .unwrap();
            }
            let held = r.outcomes.iter().filter(|o| o.event_held).count();
            writeln!(
                out,
                "# summary trials={} held={held} frequency={:.4} rate={:.4}",
                r.outcomes.len(),
                r.frequency(),
                r.rate
            )
            .unwrap();
        }
        Command::Experiment { config, out: path } => {
            let text = fs::read_to_string(&config).map_err(|e| usage(format!("{}: {e}", config.display())))?;
            let cfg = ExperimentConfig::parse(&text).map_err(usage)?;
            let report = run_experiment(&cfg).map_err(usage)?;
            match path {
                Some(p) => fs::write(&p, report.to_csv()).map_err(|e| usage(format!("{}: {e}", p.display())))?,
                None => out = report.to_csv(),
            }
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli.command) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Infeasible) => {
            eprintln!("error: instance is infeasible");
            ExitCode::from(2)
        }
        Err(Failure::Limit(limit)) => {
            eprintln!("error: oracle node limit {limit} exceeded");
            ExitCode::from(3)
        }
    }
}
