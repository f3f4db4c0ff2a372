//! Joint behavior: χ, JB, and the model-level equivalences between them and
//! action-stamped common belief.

use serde::{Deserialize, Serialize};

use crate::checker::{believes, Evaluator, Extension};
use crate::error::Error;
use crate::formula::{Formula, GroupRef, Var};
use crate::model::{CheckedModel, FlagEntry, Model, Point, PointId, ResolvedGroup};

/// An acting member at a point.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub point: Point,
    pub agent: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JbReport {
    pub group: String,
    pub holds: bool,
    /// Acting members that do not believe χ, in point order.
    pub violations: Vec<Site>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremReport {
    /// `[1, 2]` for the χ instance, `[3, 4]` for an arbitrary φ.
    pub theorems: Vec<u8>,
    pub group: String,
    pub phi: String,
    /// Every acting member believes φ at every point where it acts.
    pub left: bool,
    /// `Ca(φ)` holds at every point.
    pub right: bool,
    pub equivalence_respected: bool,
    /// On a mismatch: where the side that should have held fails.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Point,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<String>,
}

const DEFECT_NOTE: &str = "the two sides disagree; the equivalence is a proved result, so this \
    indicates a defect in the checker, not a counterexample";

/// Extension of `chi{s}`.
pub fn chi_extension(m: &CheckedModel, s: &GroupRef) -> Result<Extension, Error> {
    Evaluator::new(m).extension(&Formula::Chi(s.clone()))
}

/// `(point, agent)` pairs with `agent ∈ S(point)` acting towards `s`, in
/// point then agent order.
fn acting_sites(m: &CheckedModel, g: &ResolvedGroup) -> Vec<(PointId, crate::model::AgentId)> {
    m.point_ids()
        .flat_map(|p| {
            m.members(g, p)
                .iter()
                .filter(move |&&a| m.acting(g, a, p))
                .map(move |&a| (p, a))
        })
        .collect()
}

/// Acting members that fail to believe `phi` where they act.
fn non_believers(
    ev: &mut Evaluator<'_>,
    g: &ResolvedGroup,
    phi: &Formula,
) -> Result<Vec<Site>, Error> {
    let m = ev.model();
    let ext = ev.extension(phi)?;
    Ok(acting_sites(m, g)
        .into_iter()
        .filter(|&(p, a)| !believes(m, a, p, &ext.holds))
        .map(|(p, a)| Site {
            point: m.point(p),
            agent: m.agent_name(a).to_string(),
        })
        .collect())
}

/// JB for group `s`: every member believes χ whenever it acts.
pub fn check_jb(m: &CheckedModel, s: &GroupRef) -> Result<JbReport, Error> {
    let g = m.resolve_group(s)?;
    let violations = non_believers(&mut Evaluator::new(m), &g, &Formula::Chi(s.clone()))?;
    Ok(JbReport {
        group: s.to_string(),
        holds: violations.is_empty(),
        violations,
    })
}

fn theorem_report(
    m: &CheckedModel,
    s: &GroupRef,
    phi: &Formula,
    theorems: Vec<u8>,
) -> Result<TheoremReport, Error> {
    let g = m.resolve_group(s)?;
    let mut ev = Evaluator::new(m);
    let failures = non_believers(&mut ev, &g, phi)?;
    let ca = ev.extension(&Formula::common_a(s.clone(), phi.clone()))?;
    let left = failures.is_empty();
    let right = ca.is_valid();
    let respected = left == right;
    let witness = match (left, right) {
        (true, false) => ca.holds.iter().position(|h| !h).map(|i| Witness {
            point: m.point(PointId(i)),
            agent: None,
        }),
        (false, true) => failures.first().map(|s| Witness {
            point: s.point.clone(),
            agent: Some(s.agent.clone()),
        }),
        _ => None,
    };
    Ok(TheoremReport {
        theorems,
        group: s.to_string(),
        phi: phi.to_string(),
        left,
        right,
        equivalence_respected: respected,
        witness,
        note: (!respected).then(|| DEFECT_NOTE.to_string()),
    })
}

/// JB(s) holds iff `Ca{s}(chi{s})` holds at every point.
pub fn verify_theorem_1_2(m: &CheckedModel, s: &GroupRef) -> Result<TheoremReport, Error> {
    theorem_report(m, s, &Formula::Chi(s.clone()), vec![1, 2])
}

/// Every acting member believes `phi` where it acts iff `Ca{s}(phi)` holds
/// at every point.
pub fn verify_theorem_3_4(
    m: &CheckedModel,
    s: &GroupRef,
    phi: &Formula,
) -> Result<TheoremReport, Error> {
    theorem_report(m, s, phi, vec![3, 4])
}

/// χ written with `ALW` and the derived membership flag:
/// `ALW(⋀ᵢ ((MEMBER[i]{s}=1 & SHOULD_ACT[i]{s}=1) -> ACTING[i]{s}=1))`.
pub fn chi_alw_encoding(m: &CheckedModel, s: &GroupRef) -> Formula {
    let flag = |var: Var| Formula::Atom(var, "1".into());
    let clauses = m.agents().iter().map(|i| {
        Formula::implies(
            Formula::and(
                flag(Var::Member(i.clone(), s.clone())),
                flag(Var::ShouldAct(i.clone(), s.clone())),
            ),
            flag(Var::Acting(i.clone(), s.clone())),
        )
    });
    Formula::alw(Formula::conj(clauses).expect("models have at least one agent"))
}

/// True when `chi{s}` and its `ALW` encoding have the same extension.
pub fn chi_alw_encoding_equiv(m: &CheckedModel, s: &GroupRef) -> Result<bool, Error> {
    let mut ev = Evaluator::new(m);
    let chi = ev.extension(&Formula::Chi(s.clone()))?;
    let enc = ev.extension(&chi_alw_encoding(m, s))?;
    Ok(chi.holds == enc.holds)
}

/// A copy of `model` in which every agent acts towards `group` exactly at
/// its stamped time in each run. Action-stamped common belief for `group`
/// in the copy coincides with time-stamped common belief under `stamp`.
pub fn embed_stamp_as_actions(model: &Model, group: &str, stamp: &str) -> Result<Model, Error> {
    if !model.groups.contains_key(group) {
        return Err(Error::UnknownGroup(group.to_string()));
    }
    let table = model
        .timestamps
        .get(stamp)
        .ok_or_else(|| Error::UnknownStamp(stamp.to_string()))?;
    let mut out = model.clone();
    let flags = out.acting.entry(group.to_string()).or_default();
    flags.clear();
    for (agent, runs) in table {
        flags.insert(
            agent.clone(),
            runs.iter()
                .map(|(run, &t)| FlagEntry::At(run.clone(), t))
                .collect(),
        );
    }
    Ok(out)
}
