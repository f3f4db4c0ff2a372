//! Finite runs-and-systems models.
//!
//! A [`Model`] is the declarative form: agents, variables with finite
//! domains, runs with per-time valuations, one belief relation per agent,
//! groups (rigid or indexical), time-stamp functions and action flags. It is
//! what the JSON model format deserializes into and what scenario builders
//! assemble. Nothing about a `Model` is trusted until [`validate_model`]
//! has passed; [`CheckedModel`] is the immutable, indexed form every
//! checking operation works on.

mod checked;
mod validate;

pub use checked::{
    AgentId, CheckedModel, GroupId, Kd45Policy, PointId, ResolvedGroup, RunId, StampId,
};
pub use validate::{validate_model, Rule, ValidationReport, Violation};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// An opaque value token. Values compare by equality only.
///
/// The JSON format accepts strings, integers and booleans (`true`/`false`
/// become `1`/`0`), and always writes strings back.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value(String);

impl Value {
    pub fn new(token: impl Into<String>) -> Self {
        Value(token.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn bool(b: bool) -> Self {
        Value(if b { "1" } else { "0" }.to_string())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value(s.to_string())
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value(n.to_string())
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Int(i64),
            Bool(bool),
        }
        Ok(match Raw::deserialize(d)? {
            Raw::Str(s) => Value(s),
            Raw::Int(n) => Value(n.to_string()),
            Raw::Bool(b) => Value::bool(b),
        })
    }
}

/// A point `(run, time)`. Serialized as the pair `["run", time]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(String, usize)", into = "(String, usize)")]
pub struct Point {
    pub run: String,
    pub time: usize,
}

impl Point {
    pub fn new(run: impl Into<String>, time: usize) -> Self {
        Point {
            run: run.into(),
            time,
        }
    }
}

impl From<(String, usize)> for Point {
    fn from((run, time): (String, usize)) -> Self {
        Point { run, time }
    }
}

impl From<Point> for (String, usize) {
    fn from(p: Point) -> Self {
        (p.run, p.time)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.run, self.time)
    }
}

/// Parses the command-line and group-key form `run,time`.
impl FromStr for Point {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::BadPoint(s.to_string());
        let (run, time) = s.split_once(',').ok_or_else(bad)?;
        let run = run.trim();
        if run.is_empty() {
            return Err(bad());
        }
        let time = time.trim().parse().map_err(|_| bad())?;
        Ok(Point::new(run, time))
    }
}

/// One run: a horizon and a valuation table `time -> variable -> value`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Run {
    pub horizon: usize,
    #[serde(default)]
    pub valuation: BTreeMap<usize, BTreeMap<String, Value>>,
}

/// Group interpretation: either a rigid agent list or an explicit
/// membership table keyed by `"run,time"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(
    from = "BTreeMap<String, Vec<String>>",
    into = "BTreeMap<String, Vec<String>>"
)]
pub enum Group {
    Rigid(Vec<String>),
    Indexical(BTreeMap<String, Vec<String>>),
}

const RIGID_KEY: &str = "rigid";

impl From<BTreeMap<String, Vec<String>>> for Group {
    fn from(mut table: BTreeMap<String, Vec<String>>) -> Self {
        if table.len() == 1 {
            if let Some(agents) = table.remove(RIGID_KEY) {
                return Group::Rigid(agents);
            }
        }
        Group::Indexical(table)
    }
}

impl From<Group> for BTreeMap<String, Vec<String>> {
    fn from(g: Group) -> Self {
        match g {
            Group::Rigid(agents) => BTreeMap::from([(RIGID_KEY.to_string(), agents)]),
            Group::Indexical(table) => table,
        }
    }
}

/// One entry in an `acting` / `should_act` list: `[run, t]` declares the
/// flag true, `[run, t, v]` declares it with an explicit value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FlagEntry {
    At(String, usize),
    Valued(String, usize, i64),
}

impl FlagEntry {
    pub fn point(&self) -> Point {
        match self {
            FlagEntry::At(r, t) | FlagEntry::Valued(r, t, _) => Point::new(r.clone(), *t),
        }
    }

    pub fn value(&self) -> i64 {
        match self {
            FlagEntry::At(..) => 1,
            FlagEntry::Valued(_, _, v) => *v,
        }
    }
}

/// `group -> agent -> entries`
pub type FlagTable = BTreeMap<String, BTreeMap<String, Vec<FlagEntry>>>;

/// `agent -> run -> time`
pub type StampTable = BTreeMap<String, BTreeMap<String, usize>>;

/// The declarative model, exactly as stored in the JSON model format.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model {
    pub agents: Vec<String>,
    #[serde(default)]
    pub variables: BTreeMap<String, Vec<Value>>,
    pub runs: BTreeMap<String, Run>,
    #[serde(default)]
    pub beliefs: BTreeMap<String, Vec<(Point, Point)>>,
    #[serde(default)]
    pub groups: BTreeMap<String, Group>,
    #[serde(default)]
    pub timestamps: BTreeMap<String, StampTable>,
    #[serde(default)]
    pub acting: FlagTable,
    #[serde(default)]
    pub should_act: FlagTable,
}

impl Model {
    pub fn new<I, S>(agents: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Model {
            agents: agents.into_iter().map(Into::into).collect(),
            ..Model::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization is infallible")
    }

    pub fn variable<I, V>(&mut self, name: &str, domain: I) -> &mut Self
    where
        I: IntoIterator<Item = V>,
        V: Into<Value>,
    {
        self.variables.insert(
            name.to_string(),
            domain.into_iter().map(Into::into).collect(),
        );
        self
    }

    pub fn boolean(&mut self, name: &str) -> &mut Self {
        self.variable(name, ["0", "1"])
    }

    pub fn run(&mut self, id: &str, horizon: usize) -> &mut Self {
        self.runs.insert(
            id.to_string(),
            Run {
                horizon,
                valuation: BTreeMap::new(),
            },
        );
        self
    }

    /// Sets `var` to `value` at every listed time of `run` (the run must
    /// already exist).
    pub fn set<T, V>(&mut self, run: &str, times: T, var: &str, value: V) -> &mut Self
    where
        T: IntoIterator<Item = usize>,
        V: Into<Value>,
    {
        let value = value.into();
        let r = self.runs.get_mut(run).expect("set() on an undeclared run");
        for t in times {
            r.valuation
                .entry(t)
                .or_default()
                .insert(var.to_string(), value.clone());
        }
        self
    }

    /// Sets `var` to the same value at every time of `run`.
    pub fn set_all<V: Into<Value>>(&mut self, run: &str, var: &str, value: V) -> &mut Self {
        let h = self
            .runs
            .get(run)
            .expect("set_all() on an undeclared run")
            .horizon;
        self.set(run, 0..h, var, value)
    }

    pub fn belief(&mut self, agent: &str, from: Point, to: Point) -> &mut Self {
        self.beliefs
            .entry(agent.to_string())
            .or_default()
            .push((from, to));
        self
    }

    pub fn rigid_group<I, S>(&mut self, name: &str, members: I) -> &mut Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.groups.insert(
            name.to_string(),
            Group::Rigid(members.into_iter().map(Into::into).collect()),
        );
        self
    }

    /// Sets the membership of indexical group `name` at `p`, creating the
    /// group on first use.
    pub fn members_at<I, S>(&mut self, name: &str, p: &Point, members: I) -> &mut Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let entry = self
            .groups
            .entry(name.to_string())
            .or_insert_with(|| Group::Indexical(BTreeMap::new()));
        match entry {
            Group::Indexical(table) => {
                table.insert(
                    format!("{},{}", p.run, p.time),
                    members.into_iter().map(Into::into).collect(),
                );
            }
            Group::Rigid(_) => panic!("members_at() on rigid group {name}"),
        }
        self
    }

    pub fn stamp(&mut self, name: &str, agent: &str, run: &str, time: usize) -> &mut Self {
        self.timestamps
            .entry(name.to_string())
            .or_default()
            .entry(agent.to_string())
            .or_default()
            .insert(run.to_string(), time);
        self
    }

    pub fn acting(&mut self, group: &str, agent: &str, p: Point) -> &mut Self {
        push_flag(&mut self.acting, group, agent, p);
        self
    }

    pub fn should_act(&mut self, group: &str, agent: &str, p: Point) -> &mut Self {
        push_flag(&mut self.should_act, group, agent, p);
        self
    }

    /// Every point of the model, in `(run id, time)` order.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.runs
            .iter()
            .flat_map(|(id, r)| (0..r.horizon).map(move |t| Point::new(id.clone(), t)))
    }

    pub fn num_points(&self) -> usize {
        self.runs.values().map(|r| r.horizon).sum()
    }
}

fn push_flag(table: &mut FlagTable, group: &str, agent: &str, p: Point) {
    table
        .entry(group.to_string())
        .or_default()
        .entry(agent.to_string())
        .or_default()
        .push(FlagEntry::At(p.run, p.time));
}

/// True for `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// True for `[A-Za-z0-9_]+`, the token form of atom values.
pub fn is_value_token(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_parses_run_comma_time() {
        assert_eq!("r,3".parse::<Point>().unwrap(), Point::new("r", 3));
        assert_eq!(" r , 0".parse::<Point>().unwrap(), Point::new("r", 0));
        assert!("r".parse::<Point>().is_err());
        assert!(",1".parse::<Point>().is_err());
        assert!("r,x".parse::<Point>().is_err());
    }

    #[test]
    fn json_accepts_numeric_and_boolean_values() {
        let m = Model::from_json(
            r#"{"agents":["a"],"variables":{"X":[0,1],"Y":[true,false]},
                "runs":{"r":{"horizon":1,"valuation":{"0":{"X":1,"Y":true}}}}}"#,
        )
        .unwrap();
        assert_eq!(m.variables["X"], vec![Value::from("0"), Value::from("1")]);
        assert_eq!(m.runs["r"].valuation[&0]["Y"], Value::from("1"));
    }

    #[test]
    fn json_rejects_unknown_keys() {
        let err = Model::from_json(r#"{"agents":["a"],"runs":{},"extra":1}"#).unwrap_err();
        assert!(matches!(err, Error::ModelFormat(_)));
        let err =
            Model::from_json(r#"{"agents":["a"],"runs":{"r":{"horizon":1,"foo":2}}}"#).unwrap_err();
        assert!(matches!(err, Error::ModelFormat(_)));
    }

    #[test]
    fn groups_distinguish_rigid_and_indexical() {
        let m = Model::from_json(
            r#"{"agents":["a","b"],"runs":{"r":{"horizon":1}},
                "groups":{"G":{"rigid":["a","b"]},"S":{"r,0":["a"]}}}"#,
        )
        .unwrap();
        assert_eq!(m.groups["G"], Group::Rigid(vec!["a".into(), "b".into()]));
        assert!(matches!(m.groups["S"], Group::Indexical(_)));
        let back = Model::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn flag_entries_accept_pairs_and_triples() {
        let m = Model::from_json(
            r#"{"agents":["a"],"runs":{"r":{"horizon":2}},
                "acting":{"G":{"a":[["r",0],["r",1,0]]}}}"#,
        )
        .unwrap();
        let entries = &m.acting["G"]["a"];
        assert_eq!(entries[0], FlagEntry::At("r".into(), 0));
        assert_eq!(entries[1].value(), 0);
    }

    #[test]
    fn identifier_and_value_tokens() {
        assert!(is_identifier("B_Y"));
        assert!(is_identifier("_x1"));
        assert!(!is_identifier("1x"));
        assert!(!is_identifier(""));
        assert!(is_value_token("1"));
        assert!(is_value_token("noon"));
        assert!(!is_value_token("a-b"));
    }
}
