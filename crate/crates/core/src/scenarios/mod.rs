//! Built-in example models with expected checking outcomes, and the seeded
//! random-model generator used by the property tests.

mod firefighters;
mod generals;
pub mod random;
mod rescue;
mod robbers;

pub use firefighters::build_firefighters_indexical;
pub use generals::{build_generals_actionstamped, build_generals_timestamped};
pub use rescue::build_search_rescue;
pub use robbers::build_bank_robbers;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::checker::Evaluator;
use crate::error::Error;
use crate::formula::{parse, parse_group};
use crate::model::{CheckedModel, Model, Point, PointId};
use crate::properties::check_jb;

/// Which points a formula expectation covers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    Point(Point),
    Run(String),
    All,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Claim {
    /// The formula has the expected value at every selected point.
    Formula { text: String, at: Selector },
    /// Whether the formula holds at every point of the model.
    Valid { text: String },
    /// Whether JB holds for the group.
    Jb { group: String },
    /// The number of JB violations for the group equals the expected count
    /// (the expected Boolean is then always `true`).
    JbViolations { group: String, count: usize },
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Claim::Formula {
                text,
                at: Selector::Point(p),
            } => write!(f, "{text} at {p}"),
            Claim::Formula {
                text,
                at: Selector::Run(r),
            } => write!(f, "{text} on run {r}"),
            Claim::Formula {
                text,
                at: Selector::All,
            } => write!(f, "{text} at every point"),
            Claim::Valid { text } => write!(f, "{text} valid"),
            Claim::Jb { group } => write!(f, "JB{{{group}}}"),
            Claim::JbViolations { group, count } => {
                write!(f, "JB{{{group}}} has {count} violation(s)")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expectation {
    pub claim: Claim,
    pub expected: bool,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    pub model: Model,
    pub expectations: Vec<Expectation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub expectation: Expectation,
    /// The observed value of the claim.
    pub actual: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub passed: bool,
    pub outcomes: Vec<Outcome>,
}

/// Names accepted by [`by_name`], in a fixed order.
pub const NAMES: [&str; 5] = [
    "generals1",
    "generals2",
    "firefighters",
    "rescue",
    "robbers",
];

pub fn by_name(name: &str) -> Option<Scenario> {
    Some(match name {
        "generals1" => build_generals_timestamped(),
        "generals2" => build_generals_actionstamped(),
        "firefighters" => build_firefighters_indexical(),
        "rescue" => build_search_rescue(),
        "robbers" => build_bank_robbers(),
        _ => return None,
    })
}

pub fn all() -> Vec<Scenario> {
    NAMES
        .iter()
        .map(|n| by_name(n).expect("listed name"))
        .collect()
}

impl Expectation {
    pub(crate) fn at_run(text: &str, run: &str, expected: bool, note: &str) -> Self {
        Expectation {
            claim: Claim::Formula {
                text: text.to_string(),
                at: Selector::Run(run.to_string()),
            },
            expected,
            note: note.to_string(),
        }
    }

    pub(crate) fn at_point(text: &str, p: Point, expected: bool, note: &str) -> Self {
        Expectation {
            claim: Claim::Formula {
                text: text.to_string(),
                at: Selector::Point(p),
            },
            expected,
            note: note.to_string(),
        }
    }

    pub(crate) fn valid(text: &str, expected: bool, note: &str) -> Self {
        Expectation {
            claim: Claim::Valid {
                text: text.to_string(),
            },
            expected,
            note: note.to_string(),
        }
    }

    pub(crate) fn jb(group: &str, expected: bool, note: &str) -> Self {
        Expectation {
            claim: Claim::Jb {
                group: group.to_string(),
            },
            expected,
            note: note.to_string(),
        }
    }

    pub(crate) fn jb_violations(group: &str, count: usize, note: &str) -> Self {
        Expectation {
            claim: Claim::JbViolations {
                group: group.to_string(),
                count,
            },
            expected: true,
            note: note.to_string(),
        }
    }
}

/// Points covered by a selector.
pub fn select(m: &CheckedModel, at: &Selector) -> Result<Vec<PointId>, Error> {
    Ok(match at {
        Selector::Point(p) => vec![m.point_id(p)?],
        Selector::Run(r) => m.run_points(m.run_id(r)?).collect(),
        Selector::All => m.point_ids().collect(),
    })
}

/// Evaluates one claim on a checked model.
pub fn evaluate_claim(m: &CheckedModel, e: &Expectation) -> Result<bool, Error> {
    let mut ev = Evaluator::new(m);
    Ok(match &e.claim {
        Claim::Formula { text, at } => {
            let f = parse(text, m)?;
            let ext = ev.extension(&f)?;
            let points = select(m, at)?;
            // The claim's value is the expected one when every selected
            // point agrees with it, and its negation otherwise.
            if points.iter().all(|&p| ext.contains(p) == e.expected) {
                e.expected
            } else {
                !e.expected
            }
        }
        Claim::Valid { text } => ev.extension(&parse(text, m)?)?.is_valid(),
        Claim::Jb { group } => check_jb(m, &parse_group(group)?)?.holds,
        Claim::JbViolations { group, count } => {
            check_jb(m, &parse_group(group)?)?.violations.len() == *count
        }
    })
}

/// Checks every expectation of a scenario.
pub fn run_scenario(s: &Scenario) -> Result<ScenarioReport, Error> {
    let m = CheckedModel::new(s.model.clone())?;
    run_expectations(s.name, &m, &s.expectations)
}

/// Checks a list of expectations against an already checked model.
pub fn run_expectations(
    name: &str,
    m: &CheckedModel,
    expectations: &[Expectation],
) -> Result<ScenarioReport, Error> {
    let mut outcomes = Vec::with_capacity(expectations.len());
    for e in expectations {
        let actual = evaluate_claim(m, e)?;
        outcomes.push(Outcome {
            expectation: e.clone(),
            actual,
            passed: actual == e.expected,
        });
    }
    Ok(ScenarioReport {
        name: name.to_string(),
        passed: outcomes.iter().all(|o| o.passed),
        outcomes,
    })
}

/// Adds reflexive edges for `agent` at every point of `run` in `times`.
pub(crate) fn self_loops(
    m: &mut Model,
    agent: &str,
    run: &str,
    times: impl IntoIterator<Item = usize>,
) {
    for t in times {
        m.belief(agent, Point::new(run, t), Point::new(run, t));
    }
}

/// `agent` at `(from, t)` considers exactly `(to, t)` possible, for each `t`.
pub(crate) fn shift(
    m: &mut Model,
    agent: &str,
    from: &str,
    to: &str,
    times: impl IntoIterator<Item = usize>,
) {
    for t in times {
        m.belief(agent, Point::new(from, t), Point::new(to, t));
    }
}

/// Marks `agent` as both supposed to act and acting at each listed point.
pub(crate) fn acts(m: &mut Model, group: &str, agent: &str, run: &str, times: &[usize]) {
    for &t in times {
        m.should_act(group, agent, Point::new(run, t))
            .acting(group, agent, Point::new(run, t));
    }
}
