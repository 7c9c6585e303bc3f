//! Scenario and behavior-table files.
//!
//! Both are TOML. Probabilities are `"num/den"` strings so files stay exact.
//!
//! ```toml
//! propositions = ["A", "B", "C"]
//! joint_sets = [["A", "B"], ["B", "C"], ["C", "A"]]
//! marginals = ["1/2", "1/2", "1/2"]
//! ```
//!
//! ```toml
//! settings = [["a", "a'"], ["b", "b'"]]
//! outcomes = [["+1", "-1"], ["+1", "-1"]]
//! rows = [["1/2", "0", "0", "1/2"], ...]
//! ```

use std::fmt;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

use crate::behavior::{BehaviorError, BehaviorTable};
use crate::rational::{format_rational, is_probability, parse_rational, Rational};
use crate::scenario::{MarginalVector, OrthoScenario, ScenarioError};

/// A failure to read a file, with the 1-based line it points at when known.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct LoadError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

fn line_of(text: &str, span: Option<Range<usize>>) -> Option<usize> {
    span.map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
}

fn at(text: &str, span: Range<usize>, message: impl fmt::Display) -> LoadError {
    LoadError {
        line: line_of(text, Some(span)),
        message: message.to_string(),
    }
}

fn syntax(text: &str, e: toml::de::Error) -> LoadError {
    LoadError {
        line: line_of(text, e.span()),
        message: e.message().trim().to_string(),
    }
}

fn rational_at(text: &str, s: &Spanned<String>) -> Result<Rational, LoadError> {
    parse_rational(s.get_ref()).map_err(|e| at(text, s.span(), format!("{:?}: {e}", s.get_ref())))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    propositions: Spanned<Vec<String>>,
    joint_sets: Spanned<Vec<Vec<String>>>,
    marginals: Option<Spanned<Vec<Spanned<String>>>>,
}

/// A scenario file: the structure and, optionally, marginals for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioFile {
    pub scenario: OrthoScenario,
    pub marginals: Option<MarginalVector>,
}

pub fn parse_scenario(text: &str) -> Result<ScenarioFile, LoadError> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| syntax(text, e))?;
    let scenario_err = |span: Range<usize>, e: ScenarioError| at(text, span, e);
    let scenario = OrthoScenario::new(raw.propositions.get_ref().clone(), raw.joint_sets.get_ref().clone())
        .map_err(|e| match e {
            ScenarioError::UnknownLabel(_) => scenario_err(raw.joint_sets.span(), e),
            _ => scenario_err(raw.propositions.span(), e),
        })?;
    let marginals = match raw.marginals {
        None => None,
        Some(m) => {
            let mut values = Vec::new();
            for s in m.get_ref() {
                let v = rational_at(text, s)?;
                if !is_probability(&v) {
                    return Err(at(text, s.span(), format!("marginal {} is outside [0,1]", s.get_ref())));
                }
                values.push(v);
            }
            let mv = MarginalVector::new(values).map_err(|e| scenario_err(m.span(), e))?;
            scenario.check_marginals(&mv).map_err(|e| scenario_err(m.span(), e))?;
            Some(mv)
        }
    };
    Ok(ScenarioFile { scenario, marginals })
}

pub fn load_scenario_file(path: impl AsRef<Path>) -> Result<ScenarioFile, LoadError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| LoadError {
        line: None,
        message: format!("{}: {e}", path.display()),
    })?;
    parse_scenario(&text)
}

#[derive(Serialize)]
struct ScenarioOut {
    propositions: Vec<String>,
    joint_sets: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    marginals: Option<Vec<String>>,
}

/// TOML text that [`parse_scenario`] reads back to the same value.
pub fn scenario_to_toml(file: &ScenarioFile) -> String {
    let out = ScenarioOut {
        propositions: file.scenario.labels().to_vec(),
        joint_sets: file.scenario.maximal_sets(),
        marginals: file
            .marginals
            .as_ref()
            .map(|m| m.values().iter().map(format_rational).collect()),
    };
    toml::to_string(&out).expect("plain data serializes")
}

pub const BUNDLED_SCENARIOS: [(&str, &str); 3] = [
    ("specker_triple", include_str!("../data/scenarios/specker_triple.toml")),
    ("firefly", include_str!("../data/scenarios/firefly.toml")),
    ("lsw", include_str!("../data/scenarios/lsw.toml")),
];

pub fn bundled_scenario(name: &str) -> Option<ScenarioFile> {
    BUNDLED_SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_scenario(text).expect("bundled scenarios are valid"))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBehavior {
    settings: Vec<Vec<String>>,
    outcomes: Vec<Vec<String>>,
    rows: Spanned<Vec<Spanned<Vec<Spanned<String>>>>>,
}

#[derive(Serialize)]
struct BehaviorOut {
    settings: Vec<Vec<String>>,
    outcomes: Vec<Vec<String>>,
    rows: Vec<Vec<String>>,
}

pub fn parse_behavior(text: &str) -> Result<BehaviorTable, LoadError> {
    let raw: RawBehavior = toml::from_str(text).map_err(|e| syntax(text, e))?;
    let mut rows = Vec::new();
    for row in raw.rows.get_ref() {
        rows.push(
            row.get_ref()
                .iter()
                .map(|s| rational_at(text, s))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    BehaviorTable::new(raw.settings, raw.outcomes, rows).map_err(|e| {
        let span = match &e {
            BehaviorError::RowWidth { row, .. }
            | BehaviorError::OutOfRange { row, .. }
            | BehaviorError::NotNormalized { row, .. } => raw.rows.get_ref()[*row].span(),
            _ => raw.rows.span(),
        };
        at(text, span, e)
    })
}

pub fn behavior_to_toml(table: &BehaviorTable) -> String {
    let parties = 0..table.parties();
    let out = BehaviorOut {
        settings: parties.clone().map(|p| table.settings(p).to_vec()).collect(),
        outcomes: parties.map(|p| table.outcomes(p).to_vec()).collect(),
        rows: table
            .rows()
            .iter()
            .map(|r| r.iter().map(format_rational).collect())
            .collect(),
    };
    toml::to_string(&out).expect("plain data serializes")
}
