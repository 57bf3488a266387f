use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::csp::Problem;
use crate::error::{CspError, Result};
use crate::heuristics::HeuristicSpec;

/// What is checked or propagated after each assignment.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Lookahead {
    /// Backward checking against the constraints the assignment completes.
    Bc,
    /// Strong k-consistency on the induced problem at every node.
    Mc(usize),
    /// Generalized arc consistency.
    Gac,
}

/// How the search retreats from a dead end.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Lookback {
    Chrono,
    /// Conflict-directed backjumping limited to jumps of level at most k.
    Bj(u32),
    Cbj,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    First,
    All,
    Count,
}

fn parse_level(s: &str, what: &str) -> Result<u32> {
    match s.parse::<u32>() {
        Ok(k) if k >= 1 => Ok(k),
        _ => Err(CspError::Parse(format!("{what} needs a level k >= 1, got `{s}`"))),
    }
}

impl FromStr for Lookahead {
    type Err = CspError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bc" => Ok(Lookahead::Bc),
            "gac" => Ok(Lookahead::Gac),
            _ => match s.strip_prefix("mc:") {
                Some(k) => Ok(Lookahead::Mc(parse_level(k, "mc")? as usize)),
                None => Err(CspError::Parse(format!("unknown look-ahead `{s}`"))),
            },
        }
    }
}

impl FromStr for Lookback {
    type Err = CspError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chrono" => Ok(Lookback::Chrono),
            "cbj" => Ok(Lookback::Cbj),
            _ => match s.strip_prefix("bj:") {
                Some(k) => Ok(Lookback::Bj(parse_level(k, "bj")?)),
                None => Err(CspError::Parse(format!("unknown look-back `{s}`"))),
            },
        }
    }
}

impl FromStr for Mode {
    type Err = CspError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(Mode::First),
            "all" => Ok(Mode::All),
            "count" => Ok(Mode::Count),
            _ => Err(CspError::Parse(format!("unknown mode `{s}`"))),
        }
    }
}

impl fmt::Display for Lookahead {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lookahead::Bc => f.write_str("bc"),
            Lookahead::Mc(k) => write!(f, "mc:{k}"),
            Lookahead::Gac => f.write_str("gac"),
        }
    }
}

impl fmt::Display for Lookback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lookback::Chrono => f.write_str("chrono"),
            Lookback::Bj(k) => write!(f, "bj:{k}"),
            Lookback::Cbj => f.write_str("cbj"),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::First => "first",
            Mode::All => "all",
            Mode::Count => "count",
        })
    }
}

/// One point of the algorithm lattice plus run limits.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub lookahead: Lookahead,
    pub lookback: Lookback,
    pub heuristic: HeuristicSpec,
    pub mode: Mode,
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
}

impl SolverConfig {
    /// Lex order, COUNT mode, no limits.
    pub fn new(lookahead: Lookahead, lookback: Lookback) -> Self {
        SolverConfig {
            lookahead,
            lookback,
            heuristic: HeuristicSpec::Lex,
            mode: Mode::Count,
            node_limit: None,
            time_limit: None,
        }
    }

    pub fn with_heuristic(mut self, heuristic: HeuristicSpec) -> Self {
        self.heuristic = heuristic;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_node_limit(mut self, limit: u64) -> Self {
        self.node_limit = Some(limit);
        self
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = Some(limit);
        self
    }

    /// Short identifier such as `gac+cbj+dom/deg`.
    pub fn id(&self) -> String {
        format!("{}+{}+{}", self.lookahead, self.lookback, self.heuristic)
    }

    /// Rejects configurations that cannot run on `problem`.
    pub fn validate(&self, problem: &Problem) -> Result<()> {
        if let Lookahead::Mc(k) = self.lookahead {
            if k == 0 {
                return Err(CspError::Config("mc needs k >= 1".into()));
            }
            if let Some(i) = problem.constraints().iter().position(|c| !c.relation().is_extensional()) {
                return Err(CspError::Config(format!(
                    "mc:{k} needs extensional constraints; constraint {i} is {}",
                    problem.constraints()[i].relation().kind()
                )));
            }
        }
        if self.lookback == Lookback::Bj(0) {
            return Err(CspError::Config("bj needs k >= 1".into()));
        }
        if let HeuristicSpec::Given(order) = &self.heuristic {
            HeuristicSpec::given(problem, order.clone())?;
        }
        Ok(())
    }
}
