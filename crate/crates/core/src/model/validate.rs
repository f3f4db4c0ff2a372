use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{is_identifier, is_value_token, FlagTable, Group, Model, Point};

/// A well-formedness rule a model can violate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    AgentsNonempty,
    DuplicateAgent,
    Identifier,
    EmptyDomain,
    Horizon,
    ValuationRange,
    ValuationTotal,
    ValueDomain,
    DanglingReference,
    GroupPoint,
    GroupTotal,
    EmptyRigidGroup,
    DuplicateRigidGroup,
    TimestampTotal,
    TimestampRange,
    FlagBoolean,
    Serial,
    Transitive,
    Euclidean,
}

impl Rule {
    /// The belief-relation properties. A model failing only these can still
    /// be indexed and checked when explicitly requested.
    pub fn is_kd45(self) -> bool {
        matches!(self, Rule::Serial | Rule::Transitive | Rule::Euclidean)
    }

    pub fn name(self) -> &'static str {
        match self {
            Rule::AgentsNonempty => "agents-nonempty",
            Rule::DuplicateAgent => "duplicate-agent",
            Rule::Identifier => "identifier",
            Rule::EmptyDomain => "empty-domain",
            Rule::Horizon => "horizon",
            Rule::ValuationRange => "valuation-range",
            Rule::ValuationTotal => "valuation-total",
            Rule::ValueDomain => "value-domain",
            Rule::DanglingReference => "dangling-reference",
            Rule::GroupPoint => "group-point",
            Rule::GroupTotal => "group-total",
            Rule::EmptyRigidGroup => "empty-rigid-group",
            Rule::DuplicateRigidGroup => "duplicate-rigid-group",
            Rule::TimestampTotal => "timestamp-total",
            Rule::TimestampRange => "timestamp-range",
            Rule::FlagBoolean => "flag-boolean",
            Rule::Serial => "serial",
            Rule::Transitive => "transitive",
            Rule::Euclidean => "euclidean",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    /// The offending element, e.g. `agent a` or `(r,0)`.
    pub element: String,
    pub detail: String,
    /// Witness points, when the rule is about points or edges. For
    /// `transitive` and `euclidean` this is the witness triple.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport {
            passed: violations.is_empty(),
            violations,
        }
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    /// True when every violation is a belief-relation property.
    pub fn only_kd45(&self) -> bool {
        self.violations.iter().all(|v| v.rule.is_kd45())
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed {
            return writeln!(f, "validation passed");
        }
        writeln!(
            f,
            "validation failed: {} violation(s)",
            self.violations.len()
        )?;
        for v in &self.violations {
            writeln!(f, "  [{}] {}: {}", v.rule, v.element, v.detail)?;
        }
        Ok(())
    }
}

struct Collector(Vec<Violation>);

impl Collector {
    fn push(&mut self, rule: Rule, element: impl Into<String>, detail: impl Into<String>) {
        self.push_at(rule, element, detail, Vec::new());
    }

    fn push_at(
        &mut self,
        rule: Rule,
        element: impl Into<String>,
        detail: impl Into<String>,
        points: Vec<Point>,
    ) {
        self.0.push(Violation {
            rule,
            element: element.into(),
            detail: detail.into(),
            points,
        });
    }

    fn identifier(&mut self, kind: &str, name: &str) {
        if !is_identifier(name) {
            self.push(
                Rule::Identifier,
                format!("{kind} {name:?}"),
                "names must match [A-Za-z_][A-Za-z0-9_]*",
            );
        }
    }
}

/// Checks every well-formedness rule and reports all violations.
///
/// Structural rules come first, then the belief-relation properties per
/// agent in declaration order. The result is a pure function of the model.
pub fn validate_model(m: &Model) -> ValidationReport {
    let mut c = Collector(Vec::new());

    let agents = check_agents(m, &mut c);
    check_variables(m, &mut c);
    let points = check_runs(m, &mut c);
    check_groups(m, &agents, &points, &mut c);
    check_timestamps(m, &agents, &mut c);
    check_flags(m, "acting", &m.acting, &agents, &points, &mut c);
    check_flags(m, "should_act", &m.should_act, &agents, &points, &mut c);
    check_beliefs(m, &agents, &points, &mut c);

    ValidationReport::from_violations(c.0)
}

fn check_agents<'m>(m: &'m Model, c: &mut Collector) -> BTreeSet<&'m str> {
    if m.agents.is_empty() {
        c.push(
            Rule::AgentsNonempty,
            "agents",
            "the model declares no agents",
        );
    }
    let mut seen = BTreeSet::new();
    for a in &m.agents {
        c.identifier("agent", a);
        if !seen.insert(a.as_str()) {
            c.push(
                Rule::DuplicateAgent,
                format!("agent {a}"),
                "declared more than once",
            );
        }
    }
    seen
}

fn check_variables(m: &Model, c: &mut Collector) {
    for (name, domain) in &m.variables {
        c.identifier("variable", name);
        if domain.is_empty() {
            c.push(
                Rule::EmptyDomain,
                format!("variable {name}"),
                "empty value domain",
            );
        }
        for v in domain {
            if !is_value_token(v.as_str()) {
                c.push(
                    Rule::Identifier,
                    format!("value {:?} of {name}", v.as_str()),
                    "values must match [A-Za-z0-9_]+",
                );
            }
        }
    }
}

/// Returns the set of valid points.
fn check_runs(m: &Model, c: &mut Collector) -> BTreeSet<Point> {
    let mut points = BTreeSet::new();
    for (id, run) in &m.runs {
        c.identifier("run", id);
        if run.horizon == 0 {
            c.push(
                Rule::Horizon,
                format!("run {id}"),
                "horizon must be positive",
            );
        }
        for t in run.valuation.keys().filter(|&&t| t >= run.horizon) {
            c.push_at(
                Rule::ValuationRange,
                format!("run {id}"),
                format!("valuation given at time {t} beyond horizon {}", run.horizon),
                vec![Point::new(id.clone(), *t)],
            );
        }
        for t in 0..run.horizon {
            let p = Point::new(id.clone(), t);
            let row = run.valuation.get(&t);
            for (var, domain) in &m.variables {
                match row.and_then(|r| r.get(var)) {
                    None => c.push_at(
                        Rule::ValuationTotal,
                        p.to_string(),
                        format!("no value for variable {var}"),
                        vec![p.clone()],
                    ),
                    Some(v) if !domain.contains(v) => c.push_at(
                        Rule::ValueDomain,
                        p.to_string(),
                        format!("value {v} is not in the domain of {var}"),
                        vec![p.clone()],
                    ),
                    Some(_) => {}
                }
            }
            if let Some(row) = row {
                for var in row.keys().filter(|v| !m.variables.contains_key(*v)) {
                    c.push_at(
                        Rule::DanglingReference,
                        p.to_string(),
                        format!("valuation mentions undeclared variable {var}"),
                        vec![p.clone()],
                    );
                }
            }
            points.insert(p);
        }
    }
    points
}

fn check_members(
    group: &str,
    at: &str,
    members: &[String],
    agents: &BTreeSet<&str>,
    c: &mut Collector,
) {
    for a in members.iter().filter(|a| !agents.contains(a.as_str())) {
        c.push(
            Rule::DanglingReference,
            format!("group {group}"),
            format!("{at}member {a} is not a declared agent"),
        );
    }
}

fn check_groups(m: &Model, agents: &BTreeSet<&str>, points: &BTreeSet<Point>, c: &mut Collector) {
    let mut rigid_sets: BTreeMap<BTreeSet<&str>, &str> = BTreeMap::new();
    for (name, group) in &m.groups {
        c.identifier("group", name);
        match group {
            Group::Rigid(members) => {
                if members.is_empty() {
                    c.push(
                        Rule::EmptyRigidGroup,
                        format!("group {name}"),
                        "a rigid group must have at least one member",
                    );
                }
                check_members(name, "", members, agents, c);
                let set: BTreeSet<&str> = members.iter().map(String::as_str).collect();
                if let Some(prev) = rigid_sets.insert(set, name) {
                    c.push(
                        Rule::DuplicateRigidGroup,
                        format!("group {name}"),
                        format!("same membership as rigid group {prev}; action flags would be ambiguous"),
                    );
                }
            }
            Group::Indexical(table) => {
                let mut covered = BTreeSet::new();
                for (key, members) in table {
                    match key.parse::<Point>() {
                        Err(_) => c.push(
                            Rule::GroupPoint,
                            format!("group {name}"),
                            format!("membership key {key:?} is not of the form run,time"),
                        ),
                        Ok(p) if !points.contains(&p) => c.push_at(
                            Rule::DanglingReference,
                            format!("group {name}"),
                            format!("membership given at nonexistent point {p}"),
                            vec![p],
                        ),
                        Ok(p) => {
                            check_members(name, &format!("at {p}, "), members, agents, c);
                            covered.insert(p);
                        }
                    }
                }
                for p in points.difference(&covered) {
                    c.push_at(
                        Rule::GroupTotal,
                        format!("group {name}"),
                        format!("no membership declared at {p}"),
                        vec![p.clone()],
                    );
                }
            }
        }
    }
}

fn check_timestamps(m: &Model, agents: &BTreeSet<&str>, c: &mut Collector) {
    for (name, table) in &m.timestamps {
        c.identifier("time-stamp function", name);
        for (agent, runs) in table {
            if !agents.contains(agent.as_str()) {
                c.push(
                    Rule::DanglingReference,
                    format!("stamp {name}"),
                    format!("undeclared agent {agent}"),
                );
            }
            for (run, &t) in runs {
                match m.runs.get(run) {
                    None => c.push(
                        Rule::DanglingReference,
                        format!("stamp {name}"),
                        format!("undeclared run {run}"),
                    ),
                    Some(r) if t >= r.horizon => c.push_at(
                        Rule::TimestampRange,
                        format!("stamp {name}"),
                        format!(
                            "{name}({agent},{run}) = {t} is outside horizon {}",
                            r.horizon
                        ),
                        vec![Point::new(run.clone(), t)],
                    ),
                    Some(_) => {}
                }
            }
        }
        for agent in &m.agents {
            for run in m.runs.keys() {
                let defined = table.get(agent).is_some_and(|rs| rs.contains_key(run));
                if !defined {
                    c.push(
                        Rule::TimestampTotal,
                        format!("stamp {name}"),
                        format!("{name}({agent},{run}) is undefined"),
                    );
                }
            }
        }
    }
}

fn check_flags(
    m: &Model,
    kind: &str,
    table: &FlagTable,
    agents: &BTreeSet<&str>,
    points: &BTreeSet<Point>,
    c: &mut Collector,
) {
    for (group, per_agent) in table {
        if !m.groups.contains_key(group) {
            c.push(
                Rule::DanglingReference,
                format!("{kind} {group}"),
                format!("flags declared for undeclared group {group}"),
            );
        }
        for (agent, entries) in per_agent {
            if !agents.contains(agent.as_str()) {
                c.push(
                    Rule::DanglingReference,
                    format!("{kind} {group}"),
                    format!("flags declared for undeclared agent {agent}"),
                );
            }
            let mut declared: HashMap<Point, i64> = HashMap::new();
            for e in entries {
                let p = e.point();
                let element = format!("{kind} {group}/{agent} at {p}");
                if !points.contains(&p) {
                    c.push_at(
                        Rule::DanglingReference,
                        element,
                        "nonexistent point",
                        vec![p],
                    );
                    continue;
                }
                let v = e.value();
                if v != 0 && v != 1 {
                    c.push_at(
                        Rule::FlagBoolean,
                        element,
                        format!("flag value {v} is not 0 or 1"),
                        vec![p],
                    );
                } else if let Some(prev) = declared.insert(p.clone(), v) {
                    if prev != v {
                        c.push_at(
                            Rule::FlagBoolean,
                            element,
                            "flag declared both 0 and 1",
                            vec![p],
                        );
                    }
                }
            }
        }
    }
}

fn check_beliefs(m: &Model, agents: &BTreeSet<&str>, points: &BTreeSet<Point>, c: &mut Collector) {
    for agent in m.beliefs.keys().filter(|a| !agents.contains(a.as_str())) {
        c.push(
            Rule::DanglingReference,
            format!("beliefs {agent}"),
            "belief relation for an undeclared agent",
        );
    }

    let index: Vec<&Point> = points.iter().collect();
    let pos: HashMap<&Point, usize> = index.iter().enumerate().map(|(i, p)| (*p, i)).collect();

    let mut seen = BTreeSet::new();
    for agent in &m.agents {
        if !seen.insert(agent) {
            continue;
        }
        let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); index.len()];
        for (from, to) in m.beliefs.get(agent).into_iter().flatten() {
            match (pos.get(from), pos.get(to)) {
                (Some(&x), Some(&y)) => {
                    succ[x].insert(y);
                }
                _ => c.push_at(
                    Rule::DanglingReference,
                    format!("beliefs {agent}"),
                    format!("edge {from} -> {to} has an endpoint that is not a point"),
                    vec![from.clone(), to.clone()],
                ),
            }
        }
        kd45_violations(agent, &index, &succ, c);
    }
}

fn kd45_violations(agent: &str, index: &[&Point], succ: &[BTreeSet<usize>], c: &mut Collector) {
    let pt = |i: usize| index[i].clone();
    for (x, s) in succ.iter().enumerate() {
        if s.is_empty() {
            c.push_at(
                Rule::Serial,
                format!("B_{agent} at {}", index[x]),
                "no successor",
                vec![pt(x)],
            );
        }
    }
    for (x, sx) in succ.iter().enumerate() {
        for &y in sx {
            for &z in &succ[y] {
                if !sx.contains(&z) {
                    c.push_at(
                        Rule::Transitive,
                        format!("B_{agent}: {} -> {} -> {}", index[x], index[y], index[z]),
                        format!("missing edge {} -> {}", index[x], index[z]),
                        vec![pt(x), pt(y), pt(z)],
                    );
                }
            }
        }
    }
    for (x, sx) in succ.iter().enumerate() {
        for &y in sx {
            for &z in sx {
                if !succ[y].contains(&z) {
                    c.push_at(
                        Rule::Euclidean,
                        format!(
                            "B_{agent}: {} -> {}, {} -> {}",
                            index[x], index[y], index[x], index[z]
                        ),
                        format!("missing edge {} -> {}", index[y], index[z]),
                        vec![pt(x), pt(y), pt(z)],
                    );
                }
            }
        }
    }
}
