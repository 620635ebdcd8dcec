//! Flat `key = value` scenario files.
//!
//! ```text
//! # fair coin, concentration of weight
//! name = fair-coin
//! command = typicality
//! q = 1/2, 1/2
//! N = 4, 16, 64
//! epsilon = 1/10
//! ```
//!
//! One pair per line; `#` starts a comment; blank lines are ignored. Keys are
//! case-sensitive and may appear once. List values are comma-separated and may
//! be wrapped in `[ ]`, with items optionally double-quoted.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use branchlab_core::rational::parse_rational;
use branchlab_core::{OutcomeDistribution, Rational};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    Typicality,
    BranchStats,
    ValidityFeasibility,
    ValidityJoint,
    AchievableSet,
    CollapseSample,
    ChainDemo,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Typicality,
        Command::BranchStats,
        Command::ValidityFeasibility,
        Command::ValidityJoint,
        Command::AchievableSet,
        Command::CollapseSample,
        Command::ChainDemo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Typicality => "typicality",
            Command::BranchStats => "branch-stats",
            Command::ValidityFeasibility => "validity-feasibility",
            Command::ValidityJoint => "validity-joint",
            Command::AchievableSet => "achievable-set",
            Command::CollapseSample => "collapse-sample",
            Command::ChainDemo => "chain-demo",
        }
    }

    /// (required, optional) keys besides `name` and `command`.
    fn schema(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            Command::Typicality => (&["q", "N", "epsilon"], &["delta", "n_max"]),
            Command::BranchStats => (&["q", "N"], &["epsilon"]),
            Command::ValidityFeasibility => (&["q", "N"], &[]),
            Command::ValidityJoint => (&["q", "q_b", "N"], &[]),
            Command::AchievableSet => (&["q", "N"], &["k_cap"]),
            Command::CollapseSample => (&["q", "N"], &["seed"]),
            Command::ChainDemo => (&["q"], &[]),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown command {s:?}"))
    }
}

pub const DEFAULT_K_CAP: u64 = 2;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_N_MAX: u32 = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioConfig {
    pub name: String,
    pub command: Command,
    pub q: OutcomeDistribution,
    pub q_b: Option<OutcomeDistribution>,
    /// Strictly ascending.
    pub runs: Vec<u32>,
    pub epsilon: Option<Rational>,
    pub delta: Option<Rational>,
    pub n_max: u32,
    pub seed: u64,
    pub k_cap: u64,
}

/// Raw key/value pairs with their line numbers; overrides use line 0.
#[derive(Debug, Clone, Default)]
pub struct RawScenario {
    entries: BTreeMap<String, (usize, String)>,
}

const KNOWN_KEYS: [&str; 10] = [
    "name", "command", "q", "q_b", "N", "epsilon", "delta", "n_max", "seed", "k_cap",
];

impl RawScenario {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawScenario::default();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| CliError::Parse {
                line: line_no,
                message: format!("expected `key = value`, found {content:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(CliError::Parse {
                    line: line_no,
                    message: "empty key or value".into(),
                });
            }
            if !KNOWN_KEYS.contains(&key) {
                return Err(CliError::Schema(format!("unknown key {key:?} on line {line_no}")));
            }
            if raw.entries.contains_key(key) {
                return Err(CliError::Parse {
                    line: line_no,
                    message: format!("duplicate key {key:?}"),
                });
            }
            raw.entries.insert(key.to_string(), (line_no, value.to_string()));
        }
        Ok(raw)
    }

    /// Replaces (or adds) a value, as a command-line flag does.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::Schema(format!("unknown key {key:?}")));
        }
        self.entries.insert(key.to_string(), (0, value.into()));
        Ok(())
    }

    fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.entries.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    /// Checks the per-command schema and converts every value.
    ///
    /// `command` comes from the command line; when the file also names one
    /// the two must agree.
    pub fn validate(&self, command: Option<Command>) -> Result<ScenarioConfig> {
        let from_file = match self.get("command") {
            Some((line, v)) => Some(v.parse::<Command>().map_err(|message| CliError::Parse {
                line,
                message,
            })?),
            None => None,
        };
        let command = match (command, from_file) {
            (Some(a), Some(b)) if a != b => {
                return Err(CliError::Schema(format!(
                    "scenario is for {b} but {a} was requested"
                )))
            }
            (Some(c), _) | (None, Some(c)) => c,
            (None, None) => return Err(CliError::Schema("missing field \"command\"".into())),
        };

        let (required, optional) = command.schema();
        for key in required {
            if self.get(key).is_none() {
                return Err(CliError::Schema(format!("{command} needs field {key:?}")));
            }
        }
        for key in self.entries.keys() {
            let k = key.as_str();
            if k != "name" && k != "command" && !required.contains(&k) && !optional.contains(&k) {
                return Err(CliError::Schema(format!("{command} does not take field {k:?}")));
            }
        }
        if self.get("n_max").is_some() && self.get("delta").is_none() {
            return Err(CliError::Schema("n_max is only used together with delta".into()));
        }

        let q = self.distribution("q", command)?.expect("required");
        let q_b = self.distribution("q_b", command)?;
        let runs = match self.get("N") {
            Some((line, v)) => {
                let runs = list(v)
                    .into_iter()
                    .map(|s| number::<u32>(line, "N", s))
                    .collect::<Result<Vec<_>>>()?;
                if runs.contains(&0) {
                    return Err(CliError::Parse { line, message: "N must be positive".into() });
                }
                if runs.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(CliError::Parse {
                        line,
                        message: "N values must be strictly ascending".into(),
                    });
                }
                if runs.len() > 1
                    && matches!(command, Command::BranchStats | Command::AchievableSet)
                {
                    return Err(CliError::Schema(format!("{command} takes a single N")));
                }
                runs
            }
            None => Vec::new(),
        };
        let k_cap = self.scalar("k_cap", DEFAULT_K_CAP)?;
        if k_cap == 0 {
            return Err(CliError::Schema("k_cap must be positive".into()));
        }
        Ok(ScenarioConfig {
            name: self.get("name").map_or_else(|| command.to_string(), |(_, v)| v.to_string()),
            command,
            q,
            q_b,
            runs,
            epsilon: self.rational("epsilon")?,
            delta: self.rational("delta")?,
            n_max: self.scalar("n_max", DEFAULT_N_MAX)?,
            seed: self.scalar("seed", DEFAULT_SEED)?,
            k_cap,
        })
    }

    fn distribution(&self, key: &str, command: Command) -> Result<Option<OutcomeDistribution>> {
        let Some((line, v)) = self.get(key) else {
            return Ok(None);
        };
        let weights = list(v)
            .into_iter()
            .map(|s| rational(line, key, s))
            .collect::<Result<Vec<_>>>()?;
        OutcomeDistribution::new(weights)
            .map(Some)
            .map_err(CliError::core(command.as_str()))
    }

    fn rational(&self, key: &str) -> Result<Option<Rational>> {
        self.get(key).map(|(line, v)| rational(line, key, v)).transpose()
    }

    fn scalar<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        self.get(key).map_or(Ok(default), |(line, v)| number(line, key, v))
    }
}

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    RawScenario::parse(text)?.validate(None)
}

fn list(value: &str) -> Vec<&str> {
    let inner = value
        .strip_prefix('[')
        .and_then(|v| v.strip_suffix(']'))
        .unwrap_or(value);
    inner
        .split(',')
        .map(|s| {
            let s = s.trim();
            s.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(s)
        })
        .collect()
}

fn rational(line: usize, key: &str, text: &str) -> Result<Rational> {
    parse_rational(text.trim()).map_err(|e| CliError::Parse {
        line,
        message: format!("{key}: {e}"),
    })
}

fn number<T: FromStr>(line: usize, key: &str, text: &str) -> Result<T> {
    text.trim().parse().map_err(|_| CliError::Parse {
        line,
        message: format!("{key}: expected an unsigned integer, found {text:?}"),
    })
}
