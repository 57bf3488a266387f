//! Runs every (instance, configuration) pair of a suite description.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};

use crate::csp::{io, Problem, VarId};
use crate::error::{CspError, Result};
use crate::generators::crossword::{self, SMALL_GRIDS};
use crate::generators::{gen_pigeonhole, gen_random, RandomModelParams, Variant};
use crate::heuristics::{build_perfect_advisor, CbjTrace, HeuristicSpec};
use crate::search::{solve_with, Lookahead, Lookback, Mode, SearchReport, SolveOptions, SolverConfig};

pub const DEFAULT_NODE_LIMIT: u64 = 10_000_000;
pub const DEFAULT_TIME_LIMIT: Duration = Duration::from_secs(60);

fn default_r() -> usize {
    2
}

fn default_count() -> u64 {
    1
}

/// Where the instances of a suite come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum InstanceSource {
    /// A problem in the JSON problem format.
    File { path: PathBuf },
    /// `count` random instances with seeds `seed..seed + count`.
    Random {
        n: usize,
        d: usize,
        #[serde(default = "default_r")]
        r: usize,
        m: usize,
        t: usize,
        seed: u64,
        #[serde(default = "default_count")]
        count: u64,
    },
    Pigeonhole { n: usize, k: usize, variant: Variant },
    /// `grid` names a bundled grid or a grid file; the dictionary defaults to
    /// the bundled word list.
    Crossword {
        grid: String,
        #[serde(default)]
        dictionary: Option<PathBuf>,
    },
}

/// A loaded instance and the static order its generator suggests.
#[derive(Clone, Debug)]
pub struct Instance {
    pub id: String,
    pub problem: Problem,
    pub order: Option<Vec<VarId>>,
    /// Generator parameters, used to group rows in ratio tables.
    pub params: BTreeMap<String, Json>,
}

type Loaded = (String, BTreeMap<String, Json>, Result<Instance>);

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

impl InstanceSource {
    /// Loads every instance the source describes. Failures are kept per instance.
    pub fn load(&self, base: &Path) -> Vec<Loaded> {
        match self {
            InstanceSource::File { path } => {
                let id = path.display().to_string();
                let loaded = fs::read_to_string(resolve(base, path))
                    .map_err(CspError::from)
                    .and_then(|text| io::from_json(&text))
                    .map(|problem| Instance { id: id.clone(), problem, order: None, params: BTreeMap::new() });
                vec![(id, BTreeMap::new(), loaded)]
            }
            &InstanceSource::Random { n, d, r, m, t, seed, count } => (0..count)
                .map(|i| {
                    let params = RandomModelParams { n, d, r, m, t, seed: seed + i };
                    let id = format!("random({n},{d},{r},{m},{t})#{}", seed + i);
                    let mut map = BTreeMap::new();
                    for (k, v) in [("n", n), ("d", d), ("r", r), ("m", m), ("t", t)] {
                        map.insert(k.to_string(), json!(v));
                    }
                    map.insert("seed".into(), json!(seed + i));
                    let loaded = gen_random(&params)
                        .map(|problem| Instance { id: id.clone(), problem, order: None, params: map.clone() });
                    (id, map, loaded)
                })
                .collect(),
            &InstanceSource::Pigeonhole { n, k, variant } => {
                let id = format!("pigeonhole({n},{k},{variant:?})");
                let map: BTreeMap<String, Json> =
                    [("n".to_string(), json!(n)), ("k".to_string(), json!(k))].into_iter().collect();
                let loaded = gen_pigeonhole(n, k, variant).map(|(problem, order)| Instance {
                    id: id.clone(),
                    problem,
                    order: Some(order),
                    params: map.clone(),
                });
                vec![(id, map, loaded)]
            }
            InstanceSource::Crossword { grid, dictionary } => {
                let id = format!("crossword({grid})");
                let loaded = (|| {
                    let text = match SMALL_GRIDS.iter().find(|(name, _)| name == grid) {
                        Some((_, text)) => text.to_string(),
                        None => fs::read_to_string(resolve(base, Path::new(grid)))?,
                    };
                    let g = crossword::parse_grid(&text)?;
                    let words = match dictionary {
                        Some(path) => crossword::parse_dictionary(&fs::read_to_string(resolve(base, path))?),
                        None => crossword::test_dictionary(),
                    };
                    let problem = crossword::build_crossword(&g, &words)?;
                    Ok(Instance { id: id.clone(), problem, order: None, params: BTreeMap::new() })
                })();
                vec![(id, BTreeMap::new(), loaded)]
            }
        }
    }
}

/// One configuration of a suite, written with the command-line tokens.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigSpec {
    pub lookahead: String,
    pub lookback: String,
    #[serde(default)]
    pub heuristic: Option<String>,
    #[serde(default)]
    pub mode: Option<Mode>,
    /// Row label; defaults to `lookahead+lookback+heuristic`.
    #[serde(default)]
    pub name: Option<String>,
}

impl ConfigSpec {
    pub fn new(lookahead: &str, lookback: &str) -> Self {
        ConfigSpec {
            lookahead: lookahead.into(),
            lookback: lookback.into(),
            heuristic: None,
            mode: None,
            name: None,
        }
    }

    pub fn label(&self) -> String {
        self.label_with(None)
    }

    /// The label of this configuration inside a suite with the given shared order:
    /// configurations without their own heuristic follow that order (`given`).
    pub fn label_with(&self, shared: Option<&SharedOrder>) -> String {
        if let Some(name) = &self.name {
            return name.clone();
        }
        let heuristic = match (&self.heuristic, shared) {
            (Some(h), _) => h.as_str(),
            (None, Some(SharedOrder::Named(s))) if s == "lex" => "lex",
            (None, Some(_)) => "given",
            (None, None) => "lex",
        };
        let mut s = format!("{}+{}+{}", self.lookahead, self.lookback, heuristic);
        if let Some(mode) = self.mode.filter(|&m| m != Mode::Count) {
            s.push('@');
            s.push_str(&mode.to_string());
        }
        s
    }
}

/// A static order shared by every configuration without its own heuristic:
/// explicit variable names, or `lex`, or `generator` (the order that comes with the instance, lex if none).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SharedOrder {
    Names(Vec<String>),
    Named(String),
}

/// A suite description, usually read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub instances: Vec<InstanceSource>,
    pub configs: Vec<ConfigSpec>,
    /// Ordering for configurations that do not name a heuristic.
    #[serde(default)]
    pub order: Option<SharedOrder>,
    /// Mode for configurations that do not name one; COUNT by default.
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub node_limit: Option<u64>,
    #[serde(default)]
    pub time_limit_ms: Option<u64>,
    /// Keep each run's node trace in its row.
    #[serde(default)]
    pub trace: bool,
    /// Run pairs on the rayon thread pool. Row order is unaffected.
    #[serde(default)]
    pub parallel: bool,
}

impl RunSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CspError::Parse(format!("run spec: {e}")))
    }
}

/// Measurements of one (instance, configuration) run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub instance: String,
    pub config: String,
    /// COMPLETE, NODE_LIMIT, TIME_LIMIT, LOAD_ERROR, CONFIG_ERROR or RUN_ERROR.
    pub status: String,
    pub solutions: u64,
    pub nodes: u64,
    pub checks: u64,
    pub backjump_histogram: BTreeMap<u32, u64>,
    pub backjumps_total: u64,
    pub elapsed_ms: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, Json>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<Vec<(String, String)>>>,
}

impl ResultRow {
    fn failed(instance: &str, config: &str, status: &str, params: &BTreeMap<String, Json>, error: String) -> Self {
        ResultRow {
            instance: instance.into(),
            config: config.into(),
            status: status.into(),
            solutions: 0,
            nodes: 0,
            checks: 0,
            backjump_histogram: BTreeMap::new(),
            backjumps_total: 0,
            elapsed_ms: 0.0,
            params: params.clone(),
            error: Some(error),
            trace: None,
        }
    }

    pub fn from_report(instance: &Instance, config: &str, report: &SearchReport) -> Self {
        ResultRow {
            instance: instance.id.clone(),
            config: config.into(),
            status: report.status.to_string(),
            solutions: report.solution_count,
            nodes: report.nodes,
            checks: report.checks,
            backjump_histogram: report.backjump_histogram.clone(),
            backjumps_total: report.backjumps_total(),
            elapsed_ms: report.elapsed.as_secs_f64() * 1000.0,
            params: instance.params.clone(),
            error: None,
            trace: report
                .trace
                .as_ref()
                .map(|t| t.iter().map(|node| node.render(&instance.problem)).collect()),
        }
    }
}

fn read_names(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path)?;
    Ok(text.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).map(String::from).collect())
}

/// Parses a heuristic token: `lex`, `dom`, `dom+deg`, `dom/deg`, `given`
/// (the instance's own order), `given:<file>` (variable names) or
/// `advisor:<file>` (a recorded backjumping tree). Files resolve against `base`.
pub fn heuristic_from_token(
    token: &str,
    problem: &Problem,
    instance_order: Option<&[VarId]>,
    base: &Path,
) -> Result<HeuristicSpec> {
    if token == "given" {
        let order = instance_order
            .map(<[VarId]>::to_vec)
            .unwrap_or_else(|| problem.var_ids().collect());
        return HeuristicSpec::given(problem, order);
    }
    if let Some(file) = token.strip_prefix("given:") {
        return HeuristicSpec::given_names(problem, &read_names(&resolve(base, Path::new(file)))?);
    }
    if let Some(file) = token.strip_prefix("advisor:") {
        let trace = CbjTrace::from_json(&fs::read_to_string(resolve(base, Path::new(file)))?)?;
        return Ok(HeuristicSpec::Advisor(Arc::new(build_perfect_advisor(&trace)?)));
    }
    HeuristicSpec::from_token(token)
}

fn shared_heuristic(order: &SharedOrder, instance: &Instance) -> Result<HeuristicSpec> {
    match order {
        SharedOrder::Names(names) => HeuristicSpec::given_names(&instance.problem, names),
        SharedOrder::Named(s) if s == "lex" => Ok(HeuristicSpec::Lex),
        SharedOrder::Named(s) if s == "generator" => {
            let order = instance.order.clone().unwrap_or_else(|| instance.problem.var_ids().collect());
            HeuristicSpec::given(&instance.problem, order)
        }
        SharedOrder::Named(s) => Err(CspError::Config(format!("unknown shared order `{s}`"))),
    }
}

fn build_config(spec: &RunSpec, cfg: &ConfigSpec, instance: &Instance, base: &Path) -> Result<SolverConfig> {
    let lookahead: Lookahead = cfg.lookahead.parse()?;
    let lookback: Lookback = cfg.lookback.parse()?;
    let heuristic = match (&cfg.heuristic, &spec.order) {
        (None, Some(order)) => shared_heuristic(order, instance)?,
        (token, _) => heuristic_from_token(
            token.as_deref().unwrap_or("lex"),
            &instance.problem,
            instance.order.as_deref(),
            base,
        )?,
    };
    let config = SolverConfig::new(lookahead, lookback)
        .with_heuristic(heuristic)
        .with_mode(cfg.mode.or(spec.mode).unwrap_or(Mode::Count))
        .with_node_limit(spec.node_limit.unwrap_or(DEFAULT_NODE_LIMIT))
        .with_time_limit(spec.time_limit_ms.map_or(DEFAULT_TIME_LIMIT, Duration::from_millis));
    config.validate(&instance.problem)?;
    Ok(config)
}

fn run_one(spec: &RunSpec, cfg: &ConfigSpec, loaded: &Loaded, base: &Path) -> ResultRow {
    let (id, params, instance) = loaded;
    let label = cfg.label_with(spec.order.as_ref());
    let instance = match instance {
        Ok(i) => i,
        Err(e) => return ResultRow::failed(id, &label, "LOAD_ERROR", params, e.to_string()),
    };
    let config = match build_config(spec, cfg, instance, base) {
        Ok(c) => c,
        Err(e) => return ResultRow::failed(id, &label, "CONFIG_ERROR", params, e.to_string()),
    };
    let options = SolveOptions { trace: spec.trace, ..SolveOptions::default() };
    match solve_with(&instance.problem, &config, &options) {
        Ok(report) => ResultRow::from_report(instance, &label, &report),
        Err(e) => ResultRow::failed(id, &label, "RUN_ERROR", params, e.to_string()),
    }
}

/// Runs every configuration on every instance. Rows come out instance-major in
/// spec order; a failure becomes a row, never an abort. Relative paths resolve
/// against `base`.
pub fn run_suite(spec: &RunSpec, base: &Path) -> Vec<ResultRow> {
    let loaded: Vec<Loaded> = spec.instances.iter().flat_map(|s| s.load(base)).collect();
    let pairs: Vec<(&Loaded, &ConfigSpec)> =
        loaded.iter().flat_map(|l| spec.configs.iter().map(move |c| (l, c))).collect();
    if spec.parallel {
        pairs.par_iter().map(|(l, c)| run_one(spec, c, l, base)).collect()
    } else {
        pairs.iter().map(|(l, c)| run_one(spec, c, l, base)).collect()
    }
}
