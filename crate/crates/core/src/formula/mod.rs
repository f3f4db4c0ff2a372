//! Formula syntax: the AST, its canonical rendering, and the parser.
//!
//! Concrete syntax (see `docs/grammar.md` for the full grammar):
//!
//! | form                    | meaning                                   |
//! |-------------------------|-------------------------------------------|
//! | `X=v`                   | variable `X` has value `v`                |
//! | `ACTING[i]{S}=1`        | flag variables (also `SHOULD_ACT`, `MEMBER`) |
//! | `!f`, `f & g`, `f \| g`, `f -> g` | connectives (`\|`, `->` are sugar) |
//! | `B_i(f)`                | agent `i` believes `f`                    |
//! | `E{G}(f)`, `C{G}(f)`    | everyone / common belief                  |
//! | `E[t:s]{G}(f)`, `C[t:s]{G}(f)` | time-stamped by stamp function `s` |
//! | `Ea{G}(f)`, `Ca{G}(f)`  | action-stamped                            |
//! | `chi{G}`                | every member acts whenever it should      |
//! | `ALW(f)`                | `f` at every point of the current run     |
//!
//! A group is either a declared group name `{S}` or an agent set `{Y,Z}`.

mod parse;

pub use parse::{parse, parse_group, parse_unresolved, ParseError};

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::error::Error;
use crate::model::CheckedModel;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupRef {
    /// A declared group, or (after resolution fails to find a group) a
    /// single agent.
    Named(String),
    /// An inline rigid agent set.
    Agents(BTreeSet<String>),
}

impl GroupRef {
    pub fn named(name: &str) -> Self {
        GroupRef::Named(name.to_string())
    }

    pub fn agents<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        GroupRef::Agents(names.into_iter().map(Into::into).collect())
    }
}

impl fmt::Display for GroupRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupRef::Named(n) => write!(f, "{{{n}}}"),
            GroupRef::Agents(set) => {
                f.write_str("{")?;
                for (i, a) in set.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    f.write_str(a)?;
                }
                f.write_str("}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Named(String),
    Acting(String, GroupRef),
    ShouldAct(String, GroupRef),
    /// Derived membership flag: 1 iff the agent is in the group here.
    Member(String, GroupRef),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Named(n) => f.write_str(n),
            Var::Acting(a, g) => write!(f, "ACTING[{a}]{g}"),
            Var::ShouldAct(a, g) => write!(f, "SHOULD_ACT[{a}]{g}"),
            Var::Member(a, g) => write!(f, "MEMBER[{a}]{g}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(Var, String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Believes(String, Box<Formula>),
    Everyone(GroupRef, Box<Formula>),
    Common(GroupRef, Box<Formula>),
    EveryoneT(GroupRef, String, Box<Formula>),
    CommonT(GroupRef, String, Box<Formula>),
    EveryoneA(GroupRef, Box<Formula>),
    CommonA(GroupRef, Box<Formula>),
    Chi(GroupRef),
    Alw(Box<Formula>),
}

impl Formula {
    pub fn atom(var: &str, value: &str) -> Self {
        Formula::Atom(Var::Named(var.to_string()), value.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    /// `a | b`, desugared to `!(!a & !b)`.
    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }

    /// `a -> b`, desugared to `!a | b`.
    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::or(Formula::not(a), b)
    }

    /// Conjunction of a non-empty list, left-nested.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Option<Self> {
        items.into_iter().reduce(Formula::and)
    }

    pub fn believes(agent: &str, f: Formula) -> Self {
        Formula::Believes(agent.to_string(), Box::new(f))
    }

    pub fn everyone(g: GroupRef, f: Formula) -> Self {
        Formula::Everyone(g, Box::new(f))
    }

    pub fn common(g: GroupRef, f: Formula) -> Self {
        Formula::Common(g, Box::new(f))
    }

    pub fn everyone_t(g: GroupRef, stamp: &str, f: Formula) -> Self {
        Formula::EveryoneT(g, stamp.to_string(), Box::new(f))
    }

    pub fn common_t(g: GroupRef, stamp: &str, f: Formula) -> Self {
        Formula::CommonT(g, stamp.to_string(), Box::new(f))
    }

    pub fn everyone_a(g: GroupRef, f: Formula) -> Self {
        Formula::EveryoneA(g, Box::new(f))
    }

    pub fn common_a(g: GroupRef, f: Formula) -> Self {
        Formula::CommonA(g, Box::new(f))
    }

    pub fn alw(f: Formula) -> Self {
        Formula::Alw(Box::new(f))
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(..) | Formula::Chi(_) => vec![],
            Formula::And(a, b) => vec![a, b],
            Formula::Not(f)
            | Formula::Believes(_, f)
            | Formula::Everyone(_, f)
            | Formula::Common(_, f)
            | Formula::EveryoneT(_, _, f)
            | Formula::CommonT(_, _, f)
            | Formula::EveryoneA(_, f)
            | Formula::CommonA(_, f)
            | Formula::Alw(f) => vec![f],
        }
    }

    /// Number of nodes in the tree (shared subtrees counted each time).
    pub fn size(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Formula::size)
            .sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Formula::depth)
            .max()
            .unwrap_or(0)
    }

    /// True for the three common-belief operators.
    pub fn is_common(&self) -> bool {
        matches!(
            self,
            Formula::Common(..) | Formula::CommonT(..) | Formula::CommonA(..)
        )
    }

    /// True for operators whose truth is constant along a run.
    pub fn is_run_property(&self) -> bool {
        match self {
            Formula::EveryoneT(..)
            | Formula::CommonT(..)
            | Formula::EveryoneA(..)
            | Formula::CommonA(..)
            | Formula::Chi(_)
            | Formula::Alw(_) => true,
            Formula::Not(f) => f.is_run_property(),
            _ => false,
        }
    }

    /// Distinct subformulas in post-order (children before parents, left
    /// before right), each structurally distinct node listed once.
    pub fn subformulas(&self) -> Vec<&Formula> {
        fn walk<'f>(f: &'f Formula, seen: &mut HashSet<&'f Formula>, out: &mut Vec<&'f Formula>) {
            if seen.contains(f) {
                return;
            }
            for c in f.children() {
                walk(c, seen, out);
            }
            seen.insert(f);
            out.push(f);
        }
        let mut out = Vec::new();
        walk(self, &mut HashSet::new(), &mut out);
        out
    }

    /// Checks every identifier against `m` and normalizes group references:
    /// a single name that is not a declared group becomes a one-agent set.
    pub fn resolve(&self, m: &CheckedModel) -> Result<Formula, Error> {
        let group = |g: &GroupRef| -> Result<GroupRef, Error> {
            m.resolve_group(g)?;
            Ok(match g {
                GroupRef::Named(n) if m.group_id(n).is_err() => {
                    GroupRef::Agents(BTreeSet::from([n.clone()]))
                }
                other => other.clone(),
            })
        };
        let sub = |f: &Formula| f.resolve(m).map(Box::new);
        Ok(match self {
            Formula::Atom(var, value) => {
                let var = match var {
                    Var::Named(name) => {
                        let domain = m.domain(name)?;
                        if !domain.iter().any(|v| v.as_str() == value) {
                            return Err(Error::UnknownValue {
                                variable: name.clone(),
                                value: value.clone(),
                            });
                        }
                        Var::Named(name.clone())
                    }
                    Var::Acting(a, g) | Var::ShouldAct(a, g) | Var::Member(a, g) => {
                        m.agent_id(a)?;
                        if value != "0" && value != "1" {
                            return Err(Error::UnknownValue {
                                variable: var.to_string(),
                                value: value.clone(),
                            });
                        }
                        let g = group(g)?;
                        match var {
                            Var::Acting(..) => Var::Acting(a.clone(), g),
                            Var::ShouldAct(..) => Var::ShouldAct(a.clone(), g),
                            _ => Var::Member(a.clone(), g),
                        }
                    }
                };
                Formula::Atom(var, value.clone())
            }
            Formula::Not(f) => Formula::Not(sub(f)?),
            Formula::And(a, b) => Formula::And(sub(a)?, sub(b)?),
            Formula::Believes(a, f) => {
                m.agent_id(a)?;
                Formula::Believes(a.clone(), sub(f)?)
            }
            Formula::Everyone(g, f) => Formula::Everyone(group(g)?, sub(f)?),
            Formula::Common(g, f) => Formula::Common(group(g)?, sub(f)?),
            Formula::EveryoneT(g, s, f) => {
                m.stamp_id(s)?;
                Formula::EveryoneT(group(g)?, s.clone(), sub(f)?)
            }
            Formula::CommonT(g, s, f) => {
                m.stamp_id(s)?;
                Formula::CommonT(group(g)?, s.clone(), sub(f)?)
            }
            Formula::EveryoneA(g, f) => Formula::EveryoneA(group(g)?, sub(f)?),
            Formula::CommonA(g, f) => Formula::CommonA(group(g)?, sub(f)?),
            Formula::Chi(g) => Formula::Chi(group(g)?),
            Formula::Alw(f) => Formula::Alw(sub(f)?),
        })
    }
}

/// Canonical rendering: `parse(render(f))` is `f`.
///
/// Operands of `!` are always parenthesized; a conjunction is parenthesized
/// only when it is itself an operand of `&`.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(var, value) => write!(f, "{var}={value}"),
            Formula::Not(g) => write!(f, "!({g})"),
            Formula::And(a, b) => {
                let operand = |g: &Formula, f: &mut fmt::Formatter<'_>| match g {
                    Formula::And(..) => write!(f, "({g})"),
                    _ => write!(f, "{g}"),
                };
                operand(a, f)?;
                f.write_str(" & ")?;
                operand(b, f)
            }
            Formula::Believes(a, g) => write!(f, "B_{a}({g})"),
            Formula::Everyone(grp, g) => write!(f, "E{grp}({g})"),
            Formula::Common(grp, g) => write!(f, "C{grp}({g})"),
            Formula::EveryoneT(grp, s, g) => write!(f, "E[t:{s}]{grp}({g})"),
            Formula::CommonT(grp, s, g) => write!(f, "C[t:{s}]{grp}({g})"),
            Formula::EveryoneA(grp, g) => write!(f, "Ea{grp}({g})"),
            Formula::CommonA(grp, g) => write!(f, "Ca{grp}({g})"),
            Formula::Chi(grp) => write!(f, "chi{grp}"),
            Formula::Alw(g) => write!(f, "ALW({g})"),
        }
    }
}

pub fn render(f: &Formula) -> String {
    f.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> Formula {
        Formula::atom("A", "1")
    }

    fn b() -> Formula {
        Formula::atom("B", "1")
    }

    #[test]
    fn render_atoms_and_negation() {
        assert_eq!(render(&Formula::atom("X", "1")), "X=1");
        assert_eq!(render(&Formula::not(Formula::atom("X", "1"))), "!(X=1)");
    }

    #[test]
    fn render_operators() {
        let g = GroupRef::agents(["Y", "Z"]);
        assert_eq!(
            render(&Formula::common_t(
                g.clone(),
                "plan",
                Formula::atom("TRAPS", "1")
            )),
            "C[t:plan]{Y,Z}(TRAPS=1)"
        );
        assert_eq!(render(&Formula::Chi(GroupRef::named("S"))), "chi{S}");
        assert_eq!(
            render(&Formula::and(Formula::and(a(), b()), a())),
            "(A=1 & B=1) & A=1"
        );
        assert_eq!(
            render(&Formula::Atom(
                Var::Acting("Y".into(), GroupRef::named("G")),
                "1".into()
            )),
            "ACTING[Y]{G}=1"
        );
    }

    #[test]
    fn subformulas_of_atom() {
        let f = a();
        assert_eq!(f.subformulas(), vec![&f]);
    }

    #[test]
    fn subformulas_post_order() {
        let f = Formula::and(a(), b());
        let (x, y) = (a(), b());
        assert_eq!(f.subformulas(), vec![&x, &y, &f]);
    }

    #[test]
    fn subformulas_dedup_shared_structure() {
        let f = Formula::and(Formula::not(a()), Formula::not(a()));
        let subs = f.subformulas();
        assert_eq!(subs.len(), 3);
        assert_eq!(subs[0], &a());
    }

    #[test]
    fn desugaring_shapes() {
        assert_eq!(
            Formula::implies(a(), b()),
            Formula::not(Formula::and(
                Formula::not(Formula::not(a())),
                Formula::not(b())
            ))
        );
    }

    #[test]
    fn run_property_classification() {
        let g = GroupRef::named("G");
        assert!(Formula::Chi(g.clone()).is_run_property());
        assert!(Formula::not(Formula::alw(a())).is_run_property());
        assert!(!Formula::common(g.clone(), a()).is_run_property());
        assert!(Formula::common_a(g, a()).is_common());
    }
}
