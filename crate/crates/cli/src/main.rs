//! Command-line front end: exact inference, sampling, decomposition,
//! validation, and the grid upper-bound experiment.
//!
//! Results go to stdout; diagnostics (engine choice, timings) go to stderr.
//! Exit codes: 0 success, 2 parse/validation problems, 3 unsupported model
//! class, 4 numerical failure, 5 domain rejection (K5 minor found or invalid
//! decomposition).

use clap::{Parser, Subcommand};
use isingdec::approx::{
    run_varying_interaction, rows_to_csv, ExperimentOptions, FamilyKind, OptimizeOptions,
};
use isingdec::decomp::{infer_log_z, sample as tree_sample, DecompositionTree};
use isingdec::graph::planarity_test;
use isingdec::ising::{brute_force_log_z, brute_force_sample, Condition, IsingModel};
use isingdec::k5free::{decompose_k5_free_with_stats, K5Error};
use isingdec::planar::{conditioned_log_z, sample_planar};
use rand::SeedableRng;
use rand_pcg::Pcg64;
use std::process::ExitCode;

const EXIT_PARSE: u8 = 2;
const EXIT_UNSUPPORTED: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;
const EXIT_DOMAIN: u8 = 5;

#[derive(Parser)]
#[command(name = "isingdec", about = "Exact inference and sampling for zero-field Ising models on planar and decomposable graphs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print log Z (or a conditional log Z) of a zero-field model
    Logz {
        /// model JSON path
        #[arg(long)]
        model: String,
        /// decomposition JSON path; unlocks non-planar glued graphs
        #[arg(long)]
        decomposition: Option<String>,
        /// condition, e.g. "0:+1,3:-1" (at most 3 connected vertices)
        #[arg(long)]
        condition: Option<String>,
    },
    /// Draw exact samples, one ±1 vector per line
    Sample {
        #[arg(long)]
        model: String,
        #[arg(long)]
        decomposition: Option<String>,
        /// number of configurations to draw
        #[arg(long, default_value_t = 1)]
        samples: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Build an 8-nice decomposition of a K5-minor-free graph
    K5 {
        /// model or graph JSON path
        #[arg(long)]
        model: String,
        /// output decomposition JSON path (stdout when omitted)
        #[arg(long)]
        out: Option<String>,
    },
    /// Validate a decomposition against a model's graph
    Validate {
        #[arg(long)]
        model: String,
        #[arg(long)]
        decomposition: String,
        /// component size limit c
        #[arg(long, default_value_t = 8)]
        c: usize,
    },
    /// Run the Varying Interaction experiment and write a CSV
    Experiment {
        /// grid side length
        #[arg(long, default_value_t = 5)]
        h: usize,
        /// comma-separated interaction strengths
        #[arg(long, default_value = "1,2,3")]
        alphas: String,
        #[arg(long, default_value_t = 30)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// comma-separated subset of {psg, dsg}
        #[arg(long, default_value = "psg,dsg")]
        methods: String,
        /// optimizer gradient tolerance
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        /// outer iteration cap
        #[arg(long, default_value_t = 40)]
        max_iters: usize,
        /// worker threads (0 = all cores)
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CmdError {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> CmdError {
    CmdError {
        code,
        message: message.into(),
    }
}

fn run(cli: Cli) -> Result<(), CmdError> {
    match cli.command {
        Command::Logz {
            model,
            decomposition,
            condition,
        } => cmd_logz(&model, decomposition.as_deref(), condition.as_deref()),
        Command::Sample {
            model,
            decomposition,
            samples,
            seed,
        } => cmd_sample(&model, decomposition.as_deref(), samples, seed),
        Command::K5 { model, out } => cmd_k5(&model, out.as_deref()),
        Command::Validate {
            model,
            decomposition,
            c,
        } => cmd_validate(&model, &decomposition, c),
        Command::Experiment {
            h,
            alphas,
            trials,
            seed,
            methods,
            tol,
            max_iters,
            jobs,
            out,
        } => cmd_experiment(h, &alphas, trials, seed, &methods, tol, max_iters, jobs, out.as_deref()),
    }
}

fn load_model(path: &str) -> Result<IsingModel, CmdError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(EXIT_PARSE, format!("cannot read {path}: {e}")))?;
    IsingModel::from_json(&text).map_err(|e| fail(EXIT_PARSE, format!("{path}: {e}")))
}

fn load_tree(path: &str) -> Result<DecompositionTree, CmdError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(EXIT_PARSE, format!("cannot read {path}: {e}")))?;
    DecompositionTree::from_json(&text).map_err(|e| fail(EXIT_PARSE, format!("{path}: {e}")))
}

fn parse_condition(spec: &str) -> Result<Condition, CmdError> {
    let mut assignments = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        let (v, s) = part
            .split_once(':')
            .ok_or_else(|| fail(EXIT_PARSE, format!("bad condition entry '{part}'")))?;
        let v: usize = v
            .trim()
            .parse()
            .map_err(|_| fail(EXIT_PARSE, format!("bad vertex in '{part}'")))?;
        let s: i8 = match s.trim() {
            "+1" | "1" => 1,
            "-1" => -1,
            other => return Err(fail(EXIT_PARSE, format!("bad spin '{other}', use +1 or -1"))),
        };
        assignments.push((v, s));
    }
    Condition::new(assignments).map_err(|e| fail(EXIT_PARSE, e.to_string()))
}

/// Engine choice: decomposition DP when a tree is supplied, then the planar
/// engine, then brute force for anything small.
fn cmd_logz(
    model_path: &str,
    tree_path: Option<&str>,
    condition: Option<&str>,
) -> Result<(), CmdError> {
    let model = load_model(model_path)?;
    let cond = condition.map(parse_condition).transpose()?.unwrap_or_default();

    let value = if let Some(tp) = tree_path {
        let tree = load_tree(tp)?;
        if !cond.is_empty() {
            return Err(fail(
                EXIT_UNSUPPORTED,
                "conditions combine with the planar or brute-force engines, not with a decomposition file",
            ));
        }
        eprintln!("engine: decomposition ({} nodes, c = {})", tree.nodes.len(), tree.c);
        let report = tree.validate(model.graph());
        if !report.is_valid() {
            return Err(fail(EXIT_DOMAIN, format!("invalid decomposition:\n{report}")));
        }
        infer_log_z(&tree, &model)
            .map_err(|e| fail(EXIT_NUMERICAL, e.to_string()))?
            .log_z()
    } else if model.is_zero_field() && planarity_test(model.graph()).is_some() {
        eprintln!("engine: planar");
        conditioned_log_z(&model, &cond).map_err(|e| match e {
            isingdec::planar::PlanarError::NumericalFailure => fail(EXIT_NUMERICAL, e.to_string()),
            _ => fail(EXIT_UNSUPPORTED, e.to_string()),
        })?
    } else if model.vertex_count() <= isingdec::ising::ENUMERATION_LIMIT {
        eprintln!("engine: brute force");
        brute_force_log_z(&model, &cond).map_err(|e| fail(EXIT_UNSUPPORTED, e.to_string()))?
    } else {
        return Err(fail(
            EXIT_UNSUPPORTED,
            "model is not planar zero-field and too large to enumerate; supply --decomposition",
        ));
    };
    // 12 significant digits
    println!("log_z = {value:.11e}");
    Ok(())
}

fn cmd_sample(
    model_path: &str,
    tree_path: Option<&str>,
    samples: usize,
    seed: u64,
) -> Result<(), CmdError> {
    let model = load_model(model_path)?;
    let mut rng = Pcg64::seed_from_u64(seed);
    let n = model.vertex_count();

    enum Engine {
        Tree(DecompositionTree, isingdec::decomp::DpCache),
        Planar,
        Brute,
    }
    let engine = if let Some(tp) = tree_path {
        let tree = load_tree(tp)?;
        let report = tree.validate(model.graph());
        if !report.is_valid() {
            return Err(fail(EXIT_DOMAIN, format!("invalid decomposition:\n{report}")));
        }
        let cache = infer_log_z(&tree, &model).map_err(|e| fail(EXIT_NUMERICAL, e.to_string()))?;
        eprintln!("engine: decomposition");
        Engine::Tree(tree, cache)
    } else if model.is_zero_field() && planarity_test(model.graph()).is_some() {
        eprintln!("engine: planar");
        Engine::Planar
    } else if n <= isingdec::ising::ENUMERATION_LIMIT {
        eprintln!("engine: brute force");
        Engine::Brute
    } else {
        return Err(fail(
            EXIT_UNSUPPORTED,
            "model is not planar zero-field and too large to enumerate; supply --decomposition",
        ));
    };

    let mut out = String::new();
    for _ in 0..samples {
        let x = match &engine {
            Engine::Tree(tree, cache) => tree_sample(tree, cache, n, &mut rng)
                .map_err(|e| fail(EXIT_NUMERICAL, e.to_string()))?,
            Engine::Planar => sample_planar(&model, &Condition::empty(), &mut rng)
                .map_err(|e| fail(EXIT_NUMERICAL, e.to_string()))?,
            Engine::Brute => brute_force_sample(&model, &Condition::empty(), &mut rng)
                .map_err(|e| fail(EXIT_UNSUPPORTED, e.to_string()))?,
        };
        let line: Vec<String> = x
            .spins()
            .iter()
            .map(|&s| if s == 1 { "+1".into() } else { "-1".into() })
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    print!("{out}");
    Ok(())
}

fn cmd_k5(model_path: &str, out: Option<&str>) -> Result<(), CmdError> {
    let model = load_model(model_path)?;
    let (tree, stats) = decompose_k5_free_with_stats(model.graph()).map_err(|e| match e {
        K5Error::NotK5Free { .. } => fail(EXIT_DOMAIN, format!("NotK5Free: {e}")),
        other => fail(EXIT_NUMERICAL, other.to_string()),
    })?;
    eprintln!(
        "decomposed into {} nodes (c = 8){}",
        tree.nodes.len(),
        if stats.fallback_32_splits > 0 {
            format!("; {} fallback 3-cut splits", stats.fallback_32_splits)
        } else {
            String::new()
        }
    );
    let json = tree.to_json();
    match out {
        Some(path) => std::fs::write(path, json)
            .map_err(|e| fail(EXIT_PARSE, format!("cannot write {path}: {e}")))?,
        None => println!("{json}"),
    }
    Ok(())
}

fn cmd_validate(model_path: &str, tree_path: &str, c: usize) -> Result<(), CmdError> {
    let model = load_model(model_path)?;
    let mut tree = load_tree(tree_path)?;
    tree.c = c;
    let report = tree.validate(model.graph());
    if report.is_valid() {
        println!("valid ({} nodes, c = {c})", tree.nodes.len());
        Ok(())
    } else {
        println!("{report}");
        Err(fail(EXIT_DOMAIN, "decomposition is invalid"))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_experiment(
    h: usize,
    alphas: &str,
    trials: usize,
    seed: u64,
    methods: &str,
    tol: f64,
    max_iters: usize,
    jobs: usize,
    out: Option<&str>,
) -> Result<(), CmdError> {
    let alphas: Vec<f64> = alphas
        .split(',')
        .map(|a| a.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| fail(EXIT_PARSE, format!("bad --alphas: {e}")))?;
    let methods: Vec<FamilyKind> = methods
        .split(',')
        .map(|m| match m.trim() {
            "psg" => Ok(FamilyKind::Psg),
            "dsg" => Ok(FamilyKind::Dsg),
            other => Err(fail(EXIT_PARSE, format!("unknown method '{other}'"))),
        })
        .collect::<Result<_, _>>()?;
    let opts = ExperimentOptions {
        h,
        alphas,
        trials,
        seed,
        methods,
        optimize: OptimizeOptions {
            inner_tol: tol,
            outer_tol: tol,
            max_outer_iters: max_iters,
            ..OptimizeOptions::default()
        },
        jobs,
    };
    let started = std::time::Instant::now();
    let rows = run_varying_interaction(&opts).map_err(|e| fail(EXIT_NUMERICAL, e.to_string()))?;
    eprintln!(
        "{} rows in {:.1?} (H = {h}, {} trials)",
        rows.len(),
        started.elapsed(),
        trials
    );
    let csv = rows_to_csv(&rows);
    match out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| fail(EXIT_PARSE, format!("cannot write {path}: {e}")))?,
        None => print!("{csv}"),
    }
    Ok(())
}
