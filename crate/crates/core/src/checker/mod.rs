//! Truth of formulas at points.
//!
//! Three evaluation routes exist and are cross-checked by the tests:
//!
//! * [`Evaluator::extension`] works bottom-up over subformulas, computing
//!   common belief as a greatest fixpoint of the everyone-believes operator;
//! * [`Evaluator::check`] works top-down from a single point, computing
//!   common belief from an explicit reachable set;
//! * [`oracle`] expands common belief into a bounded conjunction of nested
//!   everyone-believes formulas.

mod oracle;

pub use oracle::{bounded_nesting_oracle, nesting_levels, oracle_extension};

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::Error;
use crate::formula::{Formula, GroupRef};
use crate::model::{AgentId, CheckedModel, Point, PointId, ResolvedGroup, RunId, StampId};

/// The one-step relation underlying a common-belief operator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ReachKind {
    Standard,
    TimeStamped(String),
    ActionStamped,
}

/// `ReachKind` with names resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Step {
    Standard,
    Stamp(StampId),
    Action,
}

impl Step {
    pub(crate) fn resolve(m: &CheckedModel, kind: &ReachKind) -> Result<Self, Error> {
        Ok(match kind {
            ReachKind::Standard => Step::Standard,
            ReachKind::TimeStamped(s) => Step::Stamp(m.stamp_id(s)?),
            ReachKind::ActionStamped => Step::Action,
        })
    }

    /// True when the step set depends only on the run of the source point.
    fn per_run(self) -> bool {
        !matches!(self, Step::Standard)
    }
}

/// The points (agent, point) whose beliefs a group operator inspects at `p`.
pub(crate) fn belief_sites(
    m: &CheckedModel,
    step: Step,
    g: &ResolvedGroup,
    p: PointId,
) -> Vec<(AgentId, PointId)> {
    match step {
        Step::Standard => m.members(g, p).iter().map(|&a| (a, p)).collect(),
        Step::Stamp(s) => {
            let r = m.run_of(p);
            m.agent_ids()
                .map(|a| (a, m.stamped_point(s, a, r)))
                .filter(|&(a, q)| m.is_member(g, a, q))
                .collect()
        }
        Step::Action => {
            let r = m.run_of(p);
            m.run_points(r)
                .flat_map(|q| {
                    m.members(g, q)
                        .iter()
                        .filter(move |&&a| m.acting(g, a, q))
                        .map(move |&a| (a, q))
                })
                .collect()
        }
    }
}

/// B_a ψ at q, with ψ given as an extension.
pub(crate) fn believes(m: &CheckedModel, a: AgentId, q: PointId, psi: &[bool]) -> bool {
    m.succ(a, q).iter().all(|s| psi[s.0])
}

/// The everyone-believes clause: every inspected agent believes ψ at its
/// inspection point. Vacuously true when nothing is inspected.
pub(crate) fn everyone_at(
    m: &CheckedModel,
    step: Step,
    g: &ResolvedGroup,
    psi: &[bool],
    p: PointId,
) -> bool {
    belief_sites(m, step, g, p)
        .into_iter()
        .all(|(a, q)| believes(m, a, q, psi))
}

/// The everyone-believes clause at every point.
pub(crate) fn everyone_set(
    m: &CheckedModel,
    step: Step,
    g: &ResolvedGroup,
    psi: &[bool],
) -> Vec<bool> {
    if step.per_run() {
        let mut out = vec![false; m.num_points()];
        for r in m.run_ids() {
            let v = everyone_at(m, step, g, psi, m.at(r, 0));
            out[m.run_range(r)].fill(v);
        }
        out
    } else {
        m.point_ids()
            .map(|p| everyone_at(m, step, g, psi, p))
            .collect()
    }
}

/// One-step successors of `p` for a group operator, sorted.
pub(crate) fn step_successors(
    m: &CheckedModel,
    step: Step,
    g: &ResolvedGroup,
    p: PointId,
) -> Vec<PointId> {
    let mut out: Vec<PointId> = belief_sites(m, step, g, p)
        .into_iter()
        .flat_map(|(a, q)| m.succ(a, q).iter().copied())
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Points reachable from `p` in one or more steps.
pub(crate) fn reachable_ids(
    m: &CheckedModel,
    step: Step,
    g: &ResolvedGroup,
    p: PointId,
) -> BTreeSet<PointId> {
    let mut seen = BTreeSet::new();
    let mut expanded_runs = vec![false; m.run_ids().count()];
    let mut queue = VecDeque::from([p]);
    while let Some(x) = queue.pop_front() {
        if step.per_run() {
            let r = m.run_of(x);
            if std::mem::replace(&mut expanded_runs[r.0], true) {
                continue;
            }
        }
        for q in step_successors(m, step, g, x) {
            if seen.insert(q) {
                queue.push_back(q);
            }
        }
    }
    seen
}

/// The set of points reachable from `p` in one or more steps of the
/// relation behind `kind` for group `g`. `p` itself is included only if
/// some cycle returns to it.
pub fn reachable_set(
    m: &CheckedModel,
    kind: &ReachKind,
    g: &GroupRef,
    p: &Point,
) -> Result<BTreeSet<Point>, Error> {
    let step = Step::resolve(m, kind)?;
    let g = m.resolve_group(g)?;
    let p = m.point_id(p)?;
    Ok(reachable_ids(m, step, &g, p)
        .into_iter()
        .map(|q| m.point(q))
        .collect())
}

/// The set of points where a formula holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extension {
    pub formula: Formula,
    /// Indexed by `PointId`.
    pub holds: Vec<bool>,
}

impl Extension {
    pub fn contains(&self, p: PointId) -> bool {
        self.holds[p.0]
    }

    pub fn ids(&self) -> BTreeSet<PointId> {
        self.holds
            .iter()
            .enumerate()
            .filter(|(_, &h)| h)
            .map(|(i, _)| PointId(i))
            .collect()
    }

    pub fn points(&self, m: &CheckedModel) -> BTreeSet<Point> {
        self.ids().into_iter().map(|p| m.point(p)).collect()
    }

    pub fn count(&self) -> usize {
        self.holds.iter().filter(|&&h| h).count()
    }

    pub fn is_valid(&self) -> bool {
        self.holds.iter().all(|&h| h)
    }
}

/// The operator kind and group of a group-belief node.
pub(crate) fn group_node(f: &Formula) -> Option<(ReachKind, &GroupRef, &Formula)> {
    match f {
        Formula::Everyone(g, x) | Formula::Common(g, x) => Some((ReachKind::Standard, g, x)),
        Formula::EveryoneT(g, s, x) | Formula::CommonT(g, s, x) => {
            Some((ReachKind::TimeStamped(s.clone()), g, x))
        }
        Formula::EveryoneA(g, x) | Formula::CommonA(g, x) => Some((ReachKind::ActionStamped, g, x)),
        _ => None,
    }
}

/// χ_G at every point of run `r`.
pub(crate) fn chi_on_run(m: &CheckedModel, g: &ResolvedGroup, r: RunId) -> bool {
    m.run_points(r).all(|q| {
        m.members(g, q)
            .iter()
            .all(|&a| !m.should_act(g, a, q) || m.acting(g, a, q))
    })
}

/// A checking session over one model. Results are memoized for the life of
/// the session, so repeated queries share work.
pub struct Evaluator<'m> {
    m: &'m CheckedModel,
    extensions: HashMap<Formula, Vec<bool>>,
    points: HashMap<(Formula, PointId), bool>,
    groups: HashMap<GroupRef, ResolvedGroup>,
}

impl<'m> Evaluator<'m> {
    pub fn new(m: &'m CheckedModel) -> Self {
        Evaluator {
            m,
            extensions: HashMap::new(),
            points: HashMap::new(),
            groups: HashMap::new(),
        }
    }

    pub fn model(&self) -> &'m CheckedModel {
        self.m
    }

    fn group(&mut self, g: &GroupRef) -> Result<ResolvedGroup, Error> {
        if let Some(r) = self.groups.get(g) {
            return Ok(r.clone());
        }
        let r = self.m.resolve_group(g)?;
        self.groups.insert(g.clone(), r.clone());
        Ok(r)
    }

    /// The extension of `f`, computed bottom-up.
    pub fn extension(&mut self, f: &Formula) -> Result<Extension, Error> {
        for sub in f.subformulas() {
            if !self.extensions.contains_key(sub) {
                let v = self.extension_node(sub)?;
                self.extensions.insert(sub.clone(), v);
            }
        }
        Ok(Extension {
            formula: f.clone(),
            holds: self.extensions[f].clone(),
        })
    }

    fn ext(&self, f: &Formula) -> &[bool] {
        &self.extensions[f]
    }

    fn extension_node(&mut self, f: &Formula) -> Result<Vec<bool>, Error> {
        let m = self.m;
        let n = m.num_points();
        Ok(match f {
            Formula::Atom(var, value) => {
                let mut out = Vec::with_capacity(n);
                for p in m.point_ids() {
                    out.push(m.var_value(p, var)?.as_str() == value);
                }
                out
            }
            Formula::Not(x) => self.ext(x).iter().map(|h| !h).collect(),
            Formula::And(a, b) => self
                .ext(a)
                .iter()
                .zip(self.ext(b))
                .map(|(x, y)| *x && *y)
                .collect(),
            Formula::Believes(agent, x) => {
                let a = m.agent_id(agent)?;
                let psi = self.ext(x);
                m.point_ids().map(|p| believes(m, a, p, psi)).collect()
            }
            Formula::Everyone(..) | Formula::EveryoneT(..) | Formula::EveryoneA(..) => {
                let (kind, g, x) = group_node(f).expect("group node");
                let step = Step::resolve(m, &kind)?;
                let g = self.group(g)?;
                everyone_set(m, step, &g, self.ext(x))
            }
            Formula::Common(..) | Formula::CommonT(..) | Formula::CommonA(..) => {
                let (kind, g, x) = group_node(f).expect("group node");
                let step = Step::resolve(m, &kind)?;
                let g = self.group(g)?;
                let psi = self.ext(x);
                // Greatest X with X = E(psi & X).
                let mut cur = vec![true; n];
                loop {
                    let target: Vec<bool> = psi.iter().zip(&cur).map(|(a, b)| *a && *b).collect();
                    let next = everyone_set(m, step, &g, &target);
                    if next == cur {
                        break cur;
                    }
                    cur = next;
                }
            }
            Formula::Chi(g) => {
                let g = self.group(g)?;
                let mut out = vec![false; n];
                for r in m.run_ids() {
                    out[m.run_range(r)].fill(chi_on_run(m, &g, r));
                }
                out
            }
            Formula::Alw(x) => {
                let psi = self.ext(x);
                let mut out = vec![false; n];
                for r in m.run_ids() {
                    let range = m.run_range(r);
                    let v = psi[range.clone()].iter().all(|&h| h);
                    out[range].fill(v);
                }
                out
            }
        })
    }

    /// Truth of `f` at `p`, computed top-down from `p`.
    pub fn check(&mut self, f: &Formula, p: PointId) -> Result<bool, Error> {
        if let Some(&v) = self.points.get(&(f.clone(), p)) {
            return Ok(v);
        }
        let m = self.m;
        let v = match f {
            Formula::Atom(var, value) => m.var_value(p, var)?.as_str() == value,
            Formula::Not(x) => !self.check(x, p)?,
            Formula::And(a, b) => self.check(a, p)? && self.check(b, p)?,
            Formula::Believes(agent, x) => {
                let a = m.agent_id(agent)?;
                self.all(x, m.succ(a, p).iter().copied())?
            }
            Formula::Everyone(..) | Formula::EveryoneT(..) | Formula::EveryoneA(..) => {
                let (kind, g, x) = group_node(f).expect("group node");
                let step = Step::resolve(m, &kind)?;
                let g = self.group(g)?;
                self.all(x, step_successors(m, step, &g, p))?
            }
            Formula::Common(..) | Formula::CommonT(..) | Formula::CommonA(..) => {
                let (kind, g, x) = group_node(f).expect("group node");
                let step = Step::resolve(m, &kind)?;
                let g = self.group(g)?;
                self.all(x, reachable_ids(m, step, &g, p))?
            }
            Formula::Chi(g) => {
                let g = self.group(g)?;
                chi_on_run(m, &g, m.run_of(p))
            }
            Formula::Alw(x) => self.all(x, m.run_points(m.run_of(p)))?,
        };
        self.points.insert((f.clone(), p), v);
        Ok(v)
    }

    fn all(&mut self, f: &Formula, ps: impl IntoIterator<Item = PointId>) -> Result<bool, Error> {
        for q in ps {
            if !self.check(f, q)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Truth of `f` at `p`.
pub fn check(m: &CheckedModel, f: &Formula, p: &Point) -> Result<bool, Error> {
    let p = m.point_id(p)?;
    Evaluator::new(m).check(f, p)
}

/// The extension of `f` over all points of `m`.
pub fn extension(m: &CheckedModel, f: &Formula) -> Result<Extension, Error> {
    Evaluator::new(m).extension(f)
}

/// True when `f` holds at every point of `m`.
pub fn is_valid(m: &CheckedModel, f: &Formula) -> Result<bool, Error> {
    Ok(extension(m, f)?.is_valid())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::model::Model;

    /// Two runs; `a` at (r,0) considers (s,0) possible, `b` at (s,0)
    /// considers (s,1) possible, and `b` is a member only at (s,0).
    fn chain() -> CheckedModel {
        let mut m = Model::new(["a", "b"]);
        m.boolean("X").run("r", 2).run("s", 2);
        m.set("r", [0, 1], "X", "1")
            .set("s", [0], "X", "1")
            .set("s", [1], "X", "0");
        for p in m.points().collect::<Vec<_>>() {
            if p != Point::new("s", 0) {
                m.belief("b", p.clone(), p.clone());
            }
        }
        m.belief("a", Point::new("r", 0), Point::new("s", 0))
            .belief("a", Point::new("r", 1), Point::new("r", 1))
            .belief("a", Point::new("s", 0), Point::new("s", 0))
            .belief("a", Point::new("s", 1), Point::new("s", 1));
        m.belief("b", Point::new("s", 0), Point::new("s", 1));
        m.members_at("S", &Point::new("r", 0), ["a"])
            .members_at("S", &Point::new("r", 1), ["a"])
            .members_at("S", &Point::new("s", 0), ["a", "b"])
            .members_at("S", &Point::new("s", 1), ["a"]);
        m.stamp("t", "a", "r", 0)
            .stamp("t", "a", "s", 0)
            .stamp("t", "b", "r", 0)
            .stamp("t", "b", "s", 0);
        CheckedModel::new(m).unwrap()
    }

    fn at(m: &CheckedModel, f: &str, run: &str, t: usize) -> bool {
        let f = parse(f, m).unwrap();
        let a = check(m, &f, &Point::new(run, t)).unwrap();
        let e = extension(m, &f).unwrap();
        assert_eq!(
            a,
            e.contains(m.point_id(&Point::new(run, t)).unwrap()),
            "{f}"
        );
        a
    }

    #[test]
    fn chain_model_is_kd45() {
        let _ = chain();
    }

    #[test]
    fn belief_and_connectives() {
        let m = chain();
        assert!(at(&m, "B_a(X=1)", "r", 0));
        assert!(!at(&m, "B_b(X=1)", "s", 0));
        assert!(at(&m, "X=1 & !B_b(X=1)", "s", 0));
        assert!(at(&m, "X=0 -> B_b(X=0)", "s", 1));
    }

    #[test]
    fn standard_common_belief_follows_indexical_membership() {
        let m = chain();
        // (r,0) -a-> (s,0) -b-> (s,1), where X=0.
        assert!(!at(&m, "C{S}(X=1)", "r", 0));
        assert!(at(&m, "E{S}(X=1)", "r", 0));
        let reach = reachable_set(
            &m,
            &ReachKind::Standard,
            &GroupRef::named("S"),
            &Point::new("r", 0),
        )
        .unwrap();
        assert_eq!(
            reach,
            BTreeSet::from([Point::new("s", 0), Point::new("s", 1)])
        );
        // With the fixed group {a} the chain stops at (s,0).
        assert!(at(&m, "C{a}(X=1)", "r", 0));
    }

    #[test]
    fn time_stamped_common_belief() {
        let m = chain();
        // From run r only a is inspected; in run s, b at (s,0) sees (s,1).
        let reach = reachable_set(
            &m,
            &ReachKind::TimeStamped("t".into()),
            &GroupRef::named("S"),
            &Point::new("r", 1),
        )
        .unwrap();
        assert_eq!(
            reach,
            BTreeSet::from([Point::new("s", 0), Point::new("s", 1)])
        );
        assert!(!at(&m, "C[t:t]{S}(X=1)", "r", 1));
        assert!(at(&m, "E[t:t]{S}(X=1)", "r", 1));
    }

    #[test]
    fn action_stamped_without_flags_is_vacuous() {
        let m = chain();
        assert!(at(&m, "Ca{S}(X=0)", "r", 0));
        assert!(at(&m, "Ea{S}(X=0)", "s", 1));
        assert!(at(&m, "chi{S}", "s", 1));
    }

    #[test]
    fn alw_is_a_run_property() {
        let m = chain();
        assert!(at(&m, "ALW(X=1)", "r", 0));
        assert!(!at(&m, "ALW(X=1)", "s", 0));
        assert!(!at(&m, "ALW(X=1)", "s", 1));
    }

    #[test]
    fn unknown_names_are_errors() {
        let m = chain();
        let f = crate::formula::parse_unresolved("C[t:nope]{S}(X=1)").unwrap();
        assert!(matches!(
            check(&m, &f, &Point::new("r", 0)),
            Err(Error::UnknownStamp(_))
        ));
        assert!(check(&m, &Formula::atom("X", "1"), &Point::new("q", 0)).is_err());
    }
}
