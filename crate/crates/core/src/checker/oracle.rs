//! Common belief by bounded unfolding.
//!
//! `C ψ` is replaced by `E¹ψ ∧ E²ψ ∧ … ∧ Eᵏψ` where `Eʲ⁺¹ψ = E(Eʲψ)`. With
//! `k` at least the number of points the conjunction has reached every
//! point reachable in one or more steps, so it agrees with the fixpoint.
//! This module never builds a reachable set.

use super::{believes, chi_on_run, everyone_set, group_node, Step};
use crate::error::Error;
use crate::formula::Formula;
use crate::model::{CheckedModel, Point};

/// Extension of `f` with every common-belief node, at any depth, replaced
/// by its `|points|`-fold unfolding.
pub fn oracle_extension(m: &CheckedModel, f: &Formula) -> Result<Vec<bool>, Error> {
    let n = m.num_points();
    Ok(match f {
        Formula::Atom(var, value) => {
            let mut out = Vec::with_capacity(n);
            for p in m.point_ids() {
                out.push(m.var_value(p, var)?.as_str() == value);
            }
            out
        }
        Formula::Not(x) => oracle_extension(m, x)?.into_iter().map(|h| !h).collect(),
        Formula::And(a, b) => {
            let (a, b) = (oracle_extension(m, a)?, oracle_extension(m, b)?);
            a.into_iter().zip(b).map(|(x, y)| x && y).collect()
        }
        Formula::Believes(agent, x) => {
            let a = m.agent_id(agent)?;
            let psi = oracle_extension(m, x)?;
            m.point_ids().map(|p| believes(m, a, p, &psi)).collect()
        }
        Formula::Everyone(..) | Formula::EveryoneT(..) | Formula::EveryoneA(..) => {
            let (kind, g, x) = group_node(f).expect("group node");
            let step = Step::resolve(m, &kind)?;
            let g = m.resolve_group(g)?;
            everyone_set(m, step, &g, &oracle_extension(m, x)?)
        }
        Formula::Common(..) | Formula::CommonT(..) | Formula::CommonA(..) => {
            let levels = unfold(m, f, n.max(1))?;
            levels.last().cloned().expect("at least one level")
        }
        Formula::Chi(g) => {
            let g = m.resolve_group(g)?;
            let mut out = vec![false; n];
            for r in m.run_ids() {
                out[m.run_range(r)].fill(chi_on_run(m, &g, r));
            }
            out
        }
        Formula::Alw(x) => {
            let psi = oracle_extension(m, x)?;
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

/// `levels[j]` is the extension of `E¹ψ ∧ … ∧ Eʲ⁺¹ψ`.
fn unfold(m: &CheckedModel, f: &Formula, k: usize) -> Result<Vec<Vec<bool>>, Error> {
    let (kind, g, x) = match group_node(f) {
        Some(node) if f.is_common() => node,
        _ => return Err(Error::NotCommonNode(f.to_string())),
    };
    if k == 0 {
        return Err(Error::ZeroDepth);
    }
    let step = Step::resolve(m, &kind)?;
    let g = m.resolve_group(g)?;
    let mut nested = oracle_extension(m, x)?;
    let mut acc = vec![true; m.num_points()];
    let mut levels = Vec::with_capacity(k);
    for _ in 0..k {
        nested = everyone_set(m, step, &g, &nested);
        for (a, e) in acc.iter_mut().zip(&nested) {
            *a &= *e;
        }
        levels.push(acc.clone());
    }
    Ok(levels)
}

/// Truth at `p` of `E¹ψ ∧ … ∧ Eᵏψ` for a common-belief node `f = C ψ`
/// (standard, time-stamped or action-stamped). Inner common-belief nodes
/// are unfolded fully.
pub fn bounded_nesting_oracle(
    m: &CheckedModel,
    f: &Formula,
    p: &Point,
    k: usize,
) -> Result<bool, Error> {
    Ok(*nesting_levels(m, f, p, k)?.last().expect("k > 0"))
}

/// The oracle's value at `p` for every depth `1..=k`, in order.
pub fn nesting_levels(
    m: &CheckedModel,
    f: &Formula,
    p: &Point,
    k: usize,
) -> Result<Vec<bool>, Error> {
    let levels = unfold(m, f, k)?;
    let p = m.point_id(p)?;
    Ok(levels.iter().map(|l| l[p.0]).collect())
}
