//! `csplab`: generate instances, solve them, compare search trees and run suites.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 when a run fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use csp_lab::csp::io;
use csp_lab::generators::crossword::{self, SMALL_GRIDS};
use csp_lab::generators::{gen_pigeonhole, gen_random, RandomModelParams, Variant};
use csp_lab::harness::{
    calibrate, compare_dominance, cumulative_ratios, emit_report, heuristic_from_token, ratio_table,
    render_ratio_table, run_suite, CalibrationParams, Format, RunSpec, DEFAULT_NODE_LIMIT,
};
use csp_lab::search::{solve_with, SolveOptions};
use csp_lab::{HeuristicSpec, Lookahead, Lookback, Mode, Problem, SolverConfig};

#[derive(Parser, Debug)]
#[command(name = "csplab", version, about = "Backtracking CSP solvers and experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Model {
    Random,
    Pigeonhole,
    Crossword,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum VariantArg {
    A,
    B,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generated instance as problem JSON.
    Generate {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        t: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Pigeon-hole size of the second group.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value = "a")]
        variant: VariantArg,
        /// Grid file or bundled grid name (figure7, strip, square2, ring3, diamond4).
        #[arg(long)]
        grid: Option<String>,
        /// Word list, one word per line; the bundled list by default.
        #[arg(long)]
        dictionary: Option<PathBuf>,
        /// Also write the generator's static order, one variable per line.
        #[arg(long)]
        order_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one instance and print the report as JSON.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "bc")]
        lookahead: String,
        #[arg(long, default_value = "chrono")]
        lookback: String,
        /// lex, dom, dom+deg, dom/deg, given:<file> or advisor:<tree file>.
        #[arg(long, default_value = "lex")]
        heuristic: String,
        #[arg(long, default_value = "first")]
        mode: String,
        /// Include every visited node in the report.
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
        node_limit: u64,
        /// Seconds.
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        /// Write the backtrack tree, the input of `advisor:<file>`.
        #[arg(long)]
        tree_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check whether configuration A's search tree is inside B's.
    Compare {
        #[arg(long)]
        instance: PathBuf,
        /// `lookahead+lookback`, for example `mc:2+chrono`.
        #[arg(long)]
        config_a: String,
        #[arg(long)]
        config_b: String,
        /// Variable names in order; lex when omitted.
        #[arg(long)]
        order: Option<PathBuf>,
        #[arg(long, default_value = "first")]
        mode: String,
    },
    /// Run a suite described by a JSON spec.
    Suite {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: String,
        /// Print a mean-node ratio table grouped by this generator parameter.
        #[arg(long, requires_all = ["config_a", "config_b"])]
        ratio_param: Option<String>,
        /// Print per-instance node ratios, sorted ascending.
        #[arg(long, requires_all = ["config_a", "config_b"])]
        cumulative: bool,
        #[arg(long)]
        config_a: Option<String>,
        #[arg(long)]
        config_b: Option<String>,
    },
    /// Find the tightness t where the wanted fraction of random instances is soluble.
    Calibrate {
        /// `n,d,r,m`.
        #[arg(long)]
        model_params: String,
        #[arg(long, default_value_t = 0.5)]
        target_sat: f64,
        #[arg(long, default_value_t = 100)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// A failure that should exit with the usage code.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

fn parse<T: std::str::FromStr<Err = csp_lab::CspError>>(s: &str) -> Result<T> {
    s.parse::<T>().or_else(|e| usage(e.to_string()))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_problem(path: &Path) -> Result<Problem> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    io::from_json(&text).with_context(|| format!("loading {}", path.display()))
}

fn need(value: Option<usize>, flag: &str, model: &str) -> Result<usize> {
    value.map_or_else(|| usage(format!("--{flag} is required for the {model} model")), Ok)
}

fn generate(cmd: Command) -> Result<()> {
    let Command::Generate { model, n, d, r, m, t, seed, k, variant, grid, dictionary, order_out, out } = cmd else {
        unreachable!()
    };
    let (problem, order) = match model {
        Model::Random => {
            let params = RandomModelParams {
                n: need(n, "n", "random")?,
                d: need(d, "d", "random")?,
                r,
                m: need(m, "m", "random")?,
                t: need(t, "t", "random")?,
                seed,
            };
            (gen_random(&params)?, None)
        }
        Model::Pigeonhole => {
            let variant = match variant {
                VariantArg::A => Variant::A,
                VariantArg::B => Variant::B,
            };
            let (p, order) = gen_pigeonhole(need(n, "n", "pigeonhole")?, need(k, "k", "pigeonhole")?, variant)?;
            (p, Some(order))
        }
        Model::Crossword => {
            let Some(grid) = grid else { return usage("--grid is required for the crossword model") };
            let text = match SMALL_GRIDS.iter().find(|(name, _)| *name == grid) {
                Some((_, text)) => text.to_string(),
                None => fs::read_to_string(&grid).with_context(|| format!("reading {grid}"))?,
            };
            let words = match dictionary {
                Some(path) => crossword::parse_dictionary(
                    &fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?,
                ),
                None => crossword::test_dictionary(),
            };
            (crossword::build_crossword(&crossword::parse_grid(&text)?, &words)?, None)
        }
    };
    if let Some(path) = order_out {
        let order = order.unwrap_or_else(|| problem.var_ids().collect());
        let names: Vec<&str> = order.iter().map(|&v| problem.name(v)).collect();
        fs::write(&path, names.join("\n") + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    write_or_print(out.as_deref(), &(io::to_json(&problem) + "\n"))
}

fn solve(cmd: Command) -> Result<()> {
    let Command::Solve {
        instance,
        lookahead,
        lookback,
        heuristic,
        mode,
        trace,
        node_limit,
        time_limit,
        tree_out,
        out,
    } = cmd
    else {
        unreachable!()
    };
    let lookahead: Lookahead = parse(&lookahead)?;
    let lookback: Lookback = parse(&lookback)?;
    let mode: Mode = parse(&mode)?;
    if !(time_limit.is_finite() && time_limit > 0.0) {
        return usage("--time-limit must be a positive number of seconds");
    }
    let problem = load_problem(&instance)?;
    let heuristic = heuristic_from_token(&heuristic, &problem, None, Path::new("."))?;
    let config = SolverConfig::new(lookahead, lookback)
        .with_heuristic(heuristic)
        .with_mode(mode)
        .with_node_limit(node_limit)
        .with_time_limit(Duration::from_secs_f64(time_limit));
    let options = SolveOptions { trace, tree: tree_out.is_some(), ..SolveOptions::default() };
    let report = solve_with(&problem, &config, &options)?;
    if let Some(path) = tree_out {
        let tree = report.tree.as_ref().expect("tree recording was requested");
        fs::write(&path, tree.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    let mut value = report.to_json(&problem);
    value["config"] = json!(config.id());
    value["mode"] = json!(mode.to_string());
    write_or_print(out.as_deref(), &(serde_json::to_string_pretty(&value)? + "\n"))
}

fn parse_pair(token: &str) -> Result<(Lookahead, Lookback)> {
    let Some((la, lb)) = token.split_once('+') else {
        return usage(format!("expected lookahead+lookback, got `{token}`"));
    };
    Ok((parse(la)?, parse(lb)?))
}

fn compare(cmd: Command) -> Result<()> {
    let Command::Compare { instance, config_a, config_b, order, mode } = cmd else { unreachable!() };
    let (la_a, lb_a) = parse_pair(&config_a)?;
    let (la_b, lb_b) = parse_pair(&config_b)?;
    let mode: Mode = parse(&mode)?;
    let problem = load_problem(&instance)?;
    let order = match order {
        Some(path) => heuristic_from_token(&format!("given:{}", path.display()), &problem, None, Path::new("."))?,
        None => HeuristicSpec::Lex,
    };
    let a = SolverConfig::new(la_a, lb_a).with_mode(mode);
    let b = SolverConfig::new(la_b, lb_b).with_mode(mode);
    let d = compare_dominance(&problem, &a, &b, &order)?;
    let value = json!({
        "config_a": config_a,
        "config_b": config_b,
        "subset": d.subset,
        "nodes_a": d.nodes_a,
        "nodes_b": d.nodes_b,
        "witnesses": d.witnesses.iter().map(|w| w.render(&problem)).collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(())
}

fn suite(cmd: Command) -> Result<()> {
    let Command::Suite { spec, out, format, ratio_param, cumulative, config_a, config_b } = cmd else {
        unreachable!()
    };
    let format: Format = parse(&format)?;
    let text = fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
    let run_spec = RunSpec::from_json(&text)?;
    let base = spec.parent().unwrap_or(Path::new("."));
    let rows = run_suite(&run_spec, base);
    let rendered = emit_report(&rows, format, out.as_deref())?;
    if out.is_none() {
        print!("{rendered}");
    }
    if let (Some(a), Some(b)) = (config_a.as_deref(), config_b.as_deref()) {
        if let Some(param) = ratio_param.as_deref() {
            print!("{}", render_ratio_table(&ratio_table(&rows, param, a, b), param, a, b));
        }
        if cumulative {
            println!("instance,ratio");
            for (instance, ratio) in cumulative_ratios(&rows, a, b) {
                println!("\"{instance}\",{ratio:.6}");
            }
        }
    }
    let failed = rows.iter().filter(|r| r.status.ends_with("_ERROR")).count();
    if failed > 0 {
        bail!("{failed} of {} runs failed", rows.len());
    }
    Ok(())
}

fn calibrate_cmd(cmd: Command) -> Result<()> {
    let Command::Calibrate { model_params, target_sat, samples, seed } = cmd else { unreachable!() };
    let parts: Vec<usize> = match model_params.split(',').map(|s| s.trim().parse()).collect() {
        Ok(v) => v,
        Err(_) => return usage(format!("--model-params wants n,d,r,m, got `{model_params}`")),
    };
    let [n, d, r, m] = parts[..] else {
        return usage(format!("--model-params wants four numbers, got {}", parts.len()));
    };
    let mut params = CalibrationParams::new(n, d, r, m);
    params.target_sat = target_sat;
    params.samples = samples;
    params.seed = seed;
    let c = calibrate(&params)?;
    let probes: serde_json::Map<String, serde_json::Value> = c
        .probes
        .iter()
        .map(|(t, (sat, open))| (t.to_string(), json!({"sat_fraction": sat, "unresolved": open})))
        .collect();
    println!("{}", serde_json::to_string_pretty(&json!({"t": c.t, "sat_fraction": c.sat_fraction, "probes": probes}))?);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        cmd @ Command::Generate { .. } => generate(cmd),
        cmd @ Command::Solve { .. } => solve(cmd),
        cmd @ Command::Compare { .. } => compare(cmd),
        cmd @ Command::Suite { .. } => suite(cmd),
        cmd @ Command::Calibrate { .. } => calibrate_cmd(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
