use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::Range;

use super::{validate_model, Group, Model, Point, ValidationReport, Value};
use crate::error::Error;
use crate::formula::{GroupRef, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RunId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StampId(pub usize);

/// Whether belief-relation violations block indexing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kd45Policy {
    Enforce,
    /// Index models whose only violations are serial/transitive/Euclidean
    /// failures. Structural violations still block.
    Ignore,
}

#[derive(Debug)]
struct RunInfo {
    name: String,
    offset: usize,
    horizon: usize,
}

#[derive(Debug)]
struct GroupInfo {
    name: String,
    rigid: bool,
    /// Sorted member list per point.
    members: Vec<Vec<AgentId>>,
    /// `[agent][point]`
    acting: Vec<Vec<bool>>,
    should_act: Vec<Vec<bool>>,
}

#[derive(Debug)]
struct StampInfo {
    name: String,
    /// `[agent][run]`
    times: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Members {
    Declared(GroupId),
    Fixed(Vec<AgentId>),
}

/// A group reference resolved against a model: where membership comes from
/// and which declared group's action flags apply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedGroup {
    members: Members,
    flags: Option<GroupId>,
}

/// A validated model, indexed for checking. Immutable once built.
///
/// Points are numbered run by run in ascending run-id order, times ascending
/// within a run, so `PointId` order is `(run id, time)` order.
#[derive(Debug)]
pub struct CheckedModel {
    model: Model,
    agents: Vec<String>,
    agent_ix: HashMap<String, AgentId>,
    runs: Vec<RunInfo>,
    run_ix: HashMap<String, RunId>,
    point_run: Vec<RunId>,
    valuation: HashMap<String, Vec<Value>>,
    /// `[agent][point]`, sorted and deduplicated.
    succ: Vec<Vec<Vec<PointId>>>,
    groups: Vec<GroupInfo>,
    group_ix: HashMap<String, GroupId>,
    rigid_by_set: HashMap<Vec<AgentId>, GroupId>,
    stamps: Vec<StampInfo>,
    stamp_ix: HashMap<String, StampId>,
}

impl CheckedModel {
    /// Validates and indexes `model`. Any violation is an error.
    pub fn new(model: Model) -> Result<Self, Error> {
        Self::with_policy(model, Kd45Policy::Enforce).map(|(m, _)| m)
    }

    /// Validates and indexes `model` under `policy`, returning the
    /// validation report alongside (non-empty only under `Ignore`).
    pub fn with_policy(
        model: Model,
        policy: Kd45Policy,
    ) -> Result<(Self, ValidationReport), Error> {
        let report = validate_model(&model);
        let admissible = report.passed || (policy == Kd45Policy::Ignore && report.only_kd45());
        if !admissible {
            return Err(Error::InvalidModel(report));
        }
        Ok((Self::index(model), report))
    }

    fn index(model: Model) -> Self {
        let agents = model.agents.clone();
        let agent_ix: HashMap<String, AgentId> = agents
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), AgentId(i)))
            .collect();

        let mut runs = Vec::new();
        let mut run_ix = HashMap::new();
        let mut point_run = Vec::new();
        let mut offset = 0;
        for (i, (name, run)) in model.runs.iter().enumerate() {
            runs.push(RunInfo {
                name: name.clone(),
                offset,
                horizon: run.horizon,
            });
            run_ix.insert(name.clone(), RunId(i));
            point_run.extend(std::iter::repeat_n(RunId(i), run.horizon));
            offset += run.horizon;
        }
        let n = offset;
        let pid = |p: &Point| PointId(runs[run_ix[&p.run].0].offset + p.time);

        let mut valuation = HashMap::new();
        for var in model.variables.keys() {
            let mut col = Vec::with_capacity(n);
            for run in model.runs.values() {
                for t in 0..run.horizon {
                    col.push(run.valuation[&t][var].clone());
                }
            }
            valuation.insert(var.clone(), col);
        }

        let mut succ = vec![vec![Vec::new(); n]; agents.len()];
        for (agent, edges) in &model.beliefs {
            let a = agent_ix[agent].0;
            for (from, to) in edges {
                succ[a][pid(from).0].push(pid(to));
            }
        }
        for per_point in &mut succ {
            for s in per_point.iter_mut() {
                s.sort_unstable();
                s.dedup();
            }
        }

        let mut groups = Vec::new();
        let mut group_ix = HashMap::new();
        let mut rigid_by_set = HashMap::new();
        for (i, (name, g)) in model.groups.iter().enumerate() {
            let ids = |names: &[String]| {
                let mut v: Vec<AgentId> = names.iter().map(|a| agent_ix[a]).collect();
                v.sort_unstable();
                v.dedup();
                v
            };
            let (rigid, members) = match g {
                Group::Rigid(list) => {
                    let set = ids(list);
                    rigid_by_set.insert(set.clone(), GroupId(i));
                    (true, vec![set; n])
                }
                Group::Indexical(table) => {
                    let mut members = vec![Vec::new(); n];
                    for (key, list) in table {
                        let p: Point = key.parse().expect("validated group key");
                        members[pid(&p).0] = ids(list);
                    }
                    (false, members)
                }
            };
            let flags = |table: &super::FlagTable| {
                let mut out = vec![vec![false; n]; agents.len()];
                for (agent, entries) in table.get(name).into_iter().flatten() {
                    let a = agent_ix[agent].0;
                    for e in entries.iter().filter(|e| e.value() == 1) {
                        out[a][pid(&e.point()).0] = true;
                    }
                }
                out
            };
            groups.push(GroupInfo {
                name: name.clone(),
                rigid,
                members,
                acting: flags(&model.acting),
                should_act: flags(&model.should_act),
            });
            group_ix.insert(name.clone(), GroupId(i));
        }

        let mut stamps = Vec::new();
        let mut stamp_ix = HashMap::new();
        for (i, (name, table)) in model.timestamps.iter().enumerate() {
            let times = agents
                .iter()
                .map(|a| runs.iter().map(|r| table[a][&r.name]).collect())
                .collect();
            stamps.push(StampInfo {
                name: name.clone(),
                times,
            });
            stamp_ix.insert(name.clone(), StampId(i));
        }

        CheckedModel {
            model,
            agents,
            agent_ix,
            runs,
            run_ix,
            point_run,
            valuation,
            succ,
            groups,
            group_ix,
            rigid_by_set,
            stamps,
            stamp_ix,
        }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    // --- agents ---

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn agent_ids(&self) -> impl Iterator<Item = AgentId> {
        (0..self.agents.len()).map(AgentId)
    }

    pub fn agent_id(&self, name: &str) -> Result<AgentId, Error> {
        self.agent_ix
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownAgent(name.to_string()))
    }

    pub fn agent_name(&self, a: AgentId) -> &str {
        &self.agents[a.0]
    }

    // --- points and runs ---

    pub fn num_points(&self) -> usize {
        self.point_run.len()
    }

    pub fn point_ids(&self) -> impl Iterator<Item = PointId> {
        (0..self.num_points()).map(PointId)
    }

    pub fn run_ids(&self) -> impl Iterator<Item = RunId> {
        (0..self.runs.len()).map(RunId)
    }

    pub fn run_id(&self, name: &str) -> Result<RunId, Error> {
        self.run_ix
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownRun(name.to_string()))
    }

    pub fn run_name(&self, r: RunId) -> &str {
        &self.runs[r.0].name
    }

    pub fn horizon(&self, r: RunId) -> usize {
        self.runs[r.0].horizon
    }

    pub fn run_of(&self, p: PointId) -> RunId {
        self.point_run[p.0]
    }

    pub fn time_of(&self, p: PointId) -> usize {
        p.0 - self.runs[self.run_of(p).0].offset
    }

    /// The point ids of run `r`, in time order.
    pub fn run_points(&self, r: RunId) -> impl Iterator<Item = PointId> {
        let info = &self.runs[r.0];
        (info.offset..info.offset + info.horizon).map(PointId)
    }

    pub fn run_range(&self, r: RunId) -> Range<usize> {
        let info = &self.runs[r.0];
        info.offset..info.offset + info.horizon
    }

    /// The point `(r, time)`. `time` must be below the horizon.
    pub fn at(&self, r: RunId, time: usize) -> PointId {
        debug_assert!(time < self.runs[r.0].horizon);
        PointId(self.runs[r.0].offset + time)
    }

    pub fn point(&self, p: PointId) -> Point {
        Point::new(self.run_name(self.run_of(p)), self.time_of(p))
    }

    pub fn point_id(&self, p: &Point) -> Result<PointId, Error> {
        match self.run_ix.get(&p.run) {
            Some(r) if p.time < self.runs[r.0].horizon => Ok(self.at(*r, p.time)),
            _ => Err(Error::UnknownPoint(p.clone())),
        }
    }

    // --- valuation ---

    pub fn domain(&self, var: &str) -> Result<&[Value], Error> {
        self.model
            .variables
            .get(var)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownVariable(var.to_string()))
    }

    /// π(p, var) for an ordinary variable.
    pub fn valuation(&self, p: &Point, var: &str) -> Result<Value, Error> {
        let id = self.point_id(p)?;
        self.value_at(id, var).cloned()
    }

    pub fn value_at(&self, p: PointId, var: &str) -> Result<&Value, Error> {
        self.valuation
            .get(var)
            .map(|col| &col[p.0])
            .ok_or_else(|| Error::UnknownVariable(var.to_string()))
    }

    /// The value of any variable, including the Boolean flag variables
    /// `ACTING`, `SHOULD_ACT` and `MEMBER` (undeclared flags read as 0).
    pub fn var_value(&self, p: PointId, var: &Var) -> Result<Value, Error> {
        Ok(match var {
            Var::Named(name) => self.value_at(p, name)?.clone(),
            Var::Acting(agent, g) => {
                let g = self.resolve_group(g)?;
                Value::bool(self.acting(&g, self.agent_id(agent)?, p))
            }
            Var::ShouldAct(agent, g) => {
                let g = self.resolve_group(g)?;
                Value::bool(self.should_act(&g, self.agent_id(agent)?, p))
            }
            Var::Member(agent, g) => {
                let g = self.resolve_group(g)?;
                Value::bool(self.is_member(&g, self.agent_id(agent)?, p))
            }
        })
    }

    // --- belief relations ---

    pub fn succ(&self, a: AgentId, p: PointId) -> &[PointId] {
        &self.succ[a.0][p.0]
    }

    /// `{q : (p, q) ∈ B_agent}` in point order.
    pub fn successors(&self, agent: &str, p: &Point) -> Result<Vec<Point>, Error> {
        let a = self.agent_id(agent)?;
        let id = self.point_id(p)?;
        Ok(self.succ(a, id).iter().map(|&q| self.point(q)).collect())
    }

    // --- groups ---

    pub fn group_names(&self) -> impl Iterator<Item = &str> {
        self.groups.iter().map(|g| g.name.as_str())
    }

    pub fn group_id(&self, name: &str) -> Result<GroupId, Error> {
        self.group_ix
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownGroup(name.to_string()))
    }

    pub fn is_rigid(&self, g: GroupId) -> bool {
        self.groups[g.0].rigid
    }

    /// S(p) for a declared group, as agent names.
    pub fn membership(&self, group: &str, p: &Point) -> Result<BTreeSet<String>, Error> {
        let g = self.group_id(group)?;
        let id = self.point_id(p)?;
        Ok(self.groups[g.0].members[id.0]
            .iter()
            .map(|&a| self.agent_name(a).to_string())
            .collect())
    }

    /// Resolves a formula's group reference.
    ///
    /// A single name is a declared group if one exists, otherwise an agent.
    /// An inline agent set takes its action flags from the declared rigid
    /// group with exactly that membership, if there is one.
    pub fn resolve_group(&self, g: &GroupRef) -> Result<ResolvedGroup, Error> {
        match g {
            GroupRef::Named(name) => match (self.group_ix.get(name), self.agent_ix.get(name)) {
                (Some(_), Some(_)) => Err(Error::AmbiguousName(name.clone())),
                (Some(&id), None) => Ok(ResolvedGroup {
                    members: Members::Declared(id),
                    flags: Some(id),
                }),
                (None, Some(&a)) => Ok(self.fixed(vec![a])),
                (None, None) => Err(Error::UnknownGroup(name.clone())),
            },
            GroupRef::Agents(names) => {
                if names.is_empty() {
                    return Err(Error::EmptyGroup);
                }
                let ids = names
                    .iter()
                    .map(|n| self.agent_id(n))
                    .collect::<Result<BTreeSet<_>, _>>()?;
                Ok(self.fixed(ids.into_iter().collect()))
            }
        }
    }

    fn fixed(&self, ids: Vec<AgentId>) -> ResolvedGroup {
        let flags = self.rigid_by_set.get(&ids).copied();
        ResolvedGroup {
            members: Members::Fixed(ids),
            flags,
        }
    }

    pub fn members<'a>(&'a self, g: &'a ResolvedGroup, p: PointId) -> &'a [AgentId] {
        match &g.members {
            Members::Declared(id) => &self.groups[id.0].members[p.0],
            Members::Fixed(ids) => ids,
        }
    }

    pub fn is_member(&self, g: &ResolvedGroup, a: AgentId, p: PointId) -> bool {
        self.members(g, p).binary_search(&a).is_ok()
    }

    /// ACTING_{a,g} at p.
    pub fn acting(&self, g: &ResolvedGroup, a: AgentId, p: PointId) -> bool {
        g.flags.is_some_and(|id| self.groups[id.0].acting[a.0][p.0])
    }

    /// SHOULD_ACT_{a,g} at p.
    pub fn should_act(&self, g: &ResolvedGroup, a: AgentId, p: PointId) -> bool {
        g.flags
            .is_some_and(|id| self.groups[id.0].should_act[a.0][p.0])
    }

    /// Declared group membership at every point.
    pub fn membership_table(&self, group: &str) -> Result<BTreeMap<Point, Vec<String>>, Error> {
        let g = self.group_id(group)?;
        Ok(self
            .point_ids()
            .map(|p| {
                let names = self.groups[g.0].members[p.0]
                    .iter()
                    .map(|&a| self.agent_name(a).to_string())
                    .collect();
                (self.point(p), names)
            })
            .collect())
    }

    // --- time stamps ---

    pub fn stamp_names(&self) -> impl Iterator<Item = &str> {
        self.stamps.iter().map(|s| s.name.as_str())
    }

    pub fn stamp_id(&self, name: &str) -> Result<StampId, Error> {
        self.stamp_ix
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownStamp(name.to_string()))
    }

    /// t(a, r)
    pub fn stamp_time(&self, s: StampId, a: AgentId, r: RunId) -> usize {
        self.stamps[s.0].times[a.0][r.0]
    }

    /// The point (r, t(a, r)).
    pub fn stamped_point(&self, s: StampId, a: AgentId, r: RunId) -> PointId {
        self.at(r, self.stamp_time(s, a, r))
    }
}
