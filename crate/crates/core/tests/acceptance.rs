//! Acceptance suite. Runs each criterion over a shared corpus of seeded
//! random models plus the built-in scenarios, prints one PASS/FAIL line per
//! criterion and exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use stampcheck::checker::oracle_extension;
use stampcheck::model::{validate_model, CheckedModel, Model, PointId, Rule};
use stampcheck::properties::{
    check_jb, embed_stamp_as_actions, verify_theorem_1_2, verify_theorem_3_4,
};
use stampcheck::scenarios::random::{
    kd45_repair, random_common_node, random_formula, random_model, FormulaOptions, RandomParams,
};
use stampcheck::scenarios::{self, run_scenario, Claim};
use stampcheck::{
    bounded_nesting_oracle, parse, render, Error, Evaluator, Formula, GroupRef, Point, Var,
};

const CORPUS_SIZE: u64 = 200;
const MAX_POINTS: usize = 40;
const FORMULAS_PER_MODEL: usize = 50;
const THEOREM_PAIRS: usize = 200;
const MUTANTS_PER_RULE: usize = 50;
const ROUND_TRIPS: usize = 1000;

type Verdict = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

fn params() -> RandomParams {
    RandomParams {
        runs: (2, 5),
        horizon: (2, 8),
        agents: (2, 3),
        max_points: MAX_POINTS,
        ..RandomParams::default()
    }
}

fn corpus() -> Vec<CheckedModel> {
    (0..CORPUS_SIZE)
        .map(|seed| {
            let m = random_model(seed, &params()).expect("corpus parameters are valid");
            CheckedModel::new(m).expect("generated models validate")
        })
        .collect()
}

fn scenario_models() -> Vec<(&'static str, CheckedModel)> {
    scenarios::all()
        .into_iter()
        .map(|s| {
            (
                s.name,
                CheckedModel::new(s.model).expect("scenario validates"),
            )
        })
        .collect()
}

fn rng(tag: u64, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(tag.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ i as u64)
}

fn err(e: Error) -> String {
    e.to_string()
}

fn declared_groups(m: &CheckedModel) -> Vec<GroupRef> {
    m.group_names().map(GroupRef::named).collect()
}

fn reads_action_flags(f: &Formula) -> bool {
    f.subformulas().iter().any(|s| {
        matches!(
            s,
            Formula::Atom(Var::Acting(..), _)
                | Formula::Chi(_)
                | Formula::EveryoneA(..)
                | Formula::CommonA(..)
        )
    })
}

/// Every common-belief node of 50 formulas per model: the fixpoint (both
/// the bottom-up extension and the top-down check) against the unfolding at
/// depth `|points|`.
fn oracle_equivalence(corpus: &[CheckedModel]) -> Verdict {
    let opts = FormulaOptions::default();
    let per_model: Vec<Result<usize, String>> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            let n = m.num_points();
            if n > MAX_POINTS {
                return Err(format!("model {i} has {n} points"));
            }
            let mut r = rng(1, i);
            let mut ev = Evaluator::new(m);
            let mut nodes = 0;
            for j in 0..FORMULAS_PER_MODEL {
                let f = random_common_node(&mut r, m, j, &opts);
                for node in f.subformulas().into_iter().filter(|s| s.is_common()) {
                    let oracle = oracle_extension(m, node).map_err(err)?;
                    let fix = ev.extension(node).map_err(err)?;
                    for p in m.point_ids() {
                        let top_down = ev.check(node, p).map_err(err)?;
                        if top_down != oracle[p.0] || fix.contains(p) != oracle[p.0] {
                            return Err(format!("model {i}: {node} at {}", m.point(p)));
                        }
                    }
                    let probe = m.point(PointId(r.gen_range(0..n)));
                    let id = m.point_id(&probe).map_err(err)?;
                    if bounded_nesting_oracle(m, node, &probe, n).map_err(err)? != oracle[id.0] {
                        return Err(format!("model {i}: pointwise oracle disagrees on {node}"));
                    }
                    nodes += 1;
                }
            }
            Ok(nodes)
        })
        .collect();
    let nodes: usize = per_model.into_iter().sum::<Result<usize, String>>()?;
    Ok(format!(
        "{} models, {nodes} common-belief nodes, 0 mismatches",
        corpus.len()
    ))
}

/// JB ⟺ `Ca(χ)` everywhere, for every declared group.
fn theorems_1_2(corpus: &[CheckedModel], scen: &[(&str, CheckedModel)]) -> Verdict {
    let models = corpus.iter().chain(scen.iter().map(|(_, m)| m));
    let mut tally = BTreeMap::new();
    for m in models {
        for g in declared_groups(m) {
            let report = verify_theorem_1_2(m, &g).map_err(err)?;
            let jb = check_jb(m, &g).map_err(err)?.holds;
            let ca = Formula::common_a(g.clone(), Formula::Chi(g.clone()));
            let everywhere = oracle_extension(m, &ca).map_err(err)?.iter().all(|&h| h);
            if jb != everywhere || report.left != jb || report.right != everywhere {
                return Err(format!(
                    "counterexample for {g}: jb={jb}, Ca(chi) valid={everywhere}"
                ));
            }
            *tally.entry(jb).or_insert(0) += 1;
        }
    }
    Ok(format!(
        "{} group instances ({} with JB, {} without), 0 counterexamples",
        tally.values().sum::<usize>(),
        tally.get(&true).unwrap_or(&0),
        tally.get(&false).unwrap_or(&0),
    ))
}

/// The same equivalence for arbitrary φ, left side recomputed through the
/// formula interface and right side through the unfolding oracle.
fn theorems_3_4(corpus: &[CheckedModel]) -> Verdict {
    let opts = FormulaOptions {
        depth: 3,
        ..FormulaOptions::default()
    };
    let mut pairs = 0;
    let mut held = 0;
    for (i, m) in corpus.iter().enumerate() {
        let mut r = rng(3, i);
        for name in m.group_names().map(str::to_string).collect::<Vec<_>>() {
            let g = GroupRef::named(&name);
            let phi = if r.gen_bool(0.25) {
                parse("P=0 | P=1", m).map_err(err)?
            } else {
                random_formula(&mut r, m, &opts)
            };
            let report = verify_theorem_3_4(m, &g, &phi).map_err(err)?;
            let mut ev = Evaluator::new(m);
            let mut left = true;
            for p in m.point_ids() {
                for a in m.membership(&name, &m.point(p)).map_err(err)? {
                    let acting = Formula::Atom(Var::Acting(a.clone(), g.clone()), "1".into());
                    let site = Formula::implies(acting, Formula::believes(&a, phi.clone()));
                    left &= ev.check(&site, p).map_err(err)?;
                }
            }
            let ca = Formula::common_a(g.clone(), phi.clone());
            let right = oracle_extension(m, &ca).map_err(err)?.iter().all(|&h| h);
            if left != right || report.left != left || report.right != right {
                return Err(format!(
                    "model {i}, {g}, φ = {phi}: left={left}, right={right}"
                ));
            }
            pairs += 1;
            held += usize::from(left);
        }
    }
    if pairs < THEOREM_PAIRS {
        return Err(format!("only {pairs} pairs"));
    }
    Ok(format!(
        "{pairs} (model, φ) pairs ({held} with both sides true), 0 counterexamples"
    ))
}

/// Every scenario expectation, each also cross-checked against the oracle.
fn scenario_goldens() -> Verdict {
    let mut total = 0;
    for s in scenarios::all() {
        let report = run_scenario(&s).map_err(err)?;
        if let Some(o) = report.outcomes.iter().find(|o| !o.passed) {
            return Err(format!(
                "{}: {:?} gave {}",
                s.name, o.expectation.claim, o.actual
            ));
        }
        let m = CheckedModel::new(s.model.clone()).map_err(err)?;
        for e in &s.expectations {
            let (Claim::Formula { text, .. } | Claim::Valid { text }) = &e.claim else {
                continue;
            };
            let f = parse(text, &m).map_err(err)?;
            let fix = Evaluator::new(&m).extension(&f).map_err(err)?;
            if oracle_extension(&m, &f).map_err(err)? != fix.holds {
                return Err(format!("{}: oracle disagrees on {text}", s.name));
            }
        }
        total += report.outcomes.len();
    }
    Ok(format!(
        "{} scenarios, {total} expectations",
        scenarios::NAMES.len()
    ))
}

/// Run-property subformulas are constant along every run.
fn run_property_invariance(corpus: &[CheckedModel], scen: &[(&str, CheckedModel)]) -> Verdict {
    let models: Vec<&CheckedModel> = corpus.iter().chain(scen.iter().map(|(_, m)| m)).collect();
    let opts = FormulaOptions::default();
    let counts: Vec<Result<usize, String>> = models
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            let mut r = rng(5, i);
            let mut ev = Evaluator::new(m);
            let mut seen = BTreeSet::new();
            for _ in 0..FORMULAS_PER_MODEL {
                let f = random_formula(&mut r, m, &opts);
                for sub in f.subformulas().into_iter().filter(|s| s.is_run_property()) {
                    if !seen.insert(sub.to_string()) {
                        continue;
                    }
                    let e = ev.extension(sub).map_err(err)?;
                    for run in m.run_ids() {
                        let vals: BTreeSet<bool> =
                            m.run_points(run).map(|p| e.contains(p)).collect();
                        if vals.len() != 1 {
                            return Err(format!("{sub} varies on run {}", m.run_name(run)));
                        }
                    }
                }
            }
            Ok(seen.len())
        })
        .collect();
    let n: usize = counts.into_iter().sum::<Result<usize, String>>()?;
    Ok(format!(
        "{} models, {n} distinct run-property subformulas",
        models.len()
    ))
}

/// Successor sets of `agent`, keyed by point.
fn successors(m: &Model, agent: &str) -> BTreeMap<Point, BTreeSet<Point>> {
    let mut out: BTreeMap<Point, BTreeSet<Point>> = BTreeMap::new();
    for (a, b) in m.beliefs.get(agent).into_iter().flatten() {
        out.entry(a.clone()).or_default().insert(b.clone());
    }
    out
}

/// Edges whose removal breaks `rule` for `agent`.
fn breaking_edges(m: &Model, agent: &str, rule: Rule) -> Vec<(Point, Point)> {
    let succ = successors(m, agent);
    let empty = BTreeSet::new();
    let of = |p: &Point| succ.get(p).unwrap_or(&empty);
    let mut out = Vec::new();
    for (p, ps) in &succ {
        for r in ps {
            let breaks = match rule {
                // The only successor.
                Rule::Serial => ps.len() == 1,
                // p -> q -> r survives for some q other than p and r.
                Rule::Transitive => ps.iter().any(|q| q != p && q != r && of(q).contains(r)),
                // Some x other than p still sees both p and r.
                Rule::Euclidean => succ
                    .iter()
                    .any(|(x, xs)| x != p && xs.contains(p) && xs.contains(r)),
                _ => false,
            };
            if breaks {
                out.push((p.clone(), r.clone()));
            }
        }
    }
    out
}

/// Single-edge removals flagged by the validator; every repaired model passes.
fn kd45_mutation_suite(corpus: &[CheckedModel]) -> Verdict {
    for (i, m) in corpus.iter().enumerate() {
        let report = validate_model(m.model());
        if !report.passed {
            return Err(format!("corpus model {i} rejected: {report}"));
        }
    }
    let mut counts = BTreeMap::new();
    for rule in [Rule::Serial, Rule::Transitive, Rule::Euclidean] {
        let mut made = 0;
        let mut seed = 0u64;
        while made < MUTANTS_PER_RULE {
            if seed > 20 * CORPUS_SIZE {
                return Err(format!("could not build {MUTANTS_PER_RULE} {rule} mutants"));
            }
            let base = random_model(seed, &params()).map_err(err)?;
            let mut r = rng(6, seed as usize);
            seed += 1;
            let mut candidates = Vec::new();
            for agent in &base.agents {
                for e in breaking_edges(&base, agent, rule) {
                    candidates.push((agent.clone(), e));
                }
            }
            let Some((agent, edge)) = candidates.choose(&mut r).cloned() else {
                continue;
            };
            let mut mutant = base.clone();
            mutant
                .beliefs
                .get_mut(&agent)
                .expect("agent has edges")
                .retain(|e| *e != edge);
            let report = validate_model(&mutant);
            if report.passed || !report.has(rule) {
                return Err(format!(
                    "seed {}: removing {agent} {:?} -> {:?} not flagged as {rule}",
                    seed - 1,
                    edge.0,
                    edge.1
                ));
            }
            kd45_repair(&mut mutant);
            let repaired = validate_model(&mutant);
            if !repaired.passed {
                return Err(format!(
                    "seed {}: repaired mutant rejected: {repaired}",
                    seed - 1
                ));
            }
            made += 1;
        }
        counts.insert(rule.name(), made);
    }
    Ok(format!(
        "{} clean models pass; flagged {counts:?} single-edge mutants; repairs pass",
        corpus.len()
    ))
}

/// Time-stamped common belief equals action-stamped common belief in the
/// model whose action flags are the stamps.
fn stamp_embedding(corpus: &[CheckedModel], scen: &[(&str, CheckedModel)]) -> Verdict {
    let opts = FormulaOptions {
        depth: 3,
        chi: false,
        common: true,
        nested_common: false,
    };
    let models = corpus.iter().chain(scen.iter().map(|(_, m)| m));
    let mut checks = 0;
    for (i, plain) in models.enumerate() {
        let mut r = rng(7, i);
        let stamps: Vec<String> = plain.stamp_names().map(str::to_string).collect();
        for stamp in &stamps {
            for g in plain.group_names().map(str::to_string).collect::<Vec<_>>() {
                let embedded = embed_stamp_as_actions(plain.model(), &g, stamp).map_err(err)?;
                let embedded = CheckedModel::new(embedded).map_err(err)?;
                for _ in 0..5 {
                    let psi = loop {
                        let f = random_formula(&mut r, plain, &opts);
                        if !reads_action_flags(&f) {
                            break f;
                        }
                    };
                    let ct = Formula::common_t(GroupRef::named(&g), stamp, psi.clone());
                    let ca = Formula::common_a(GroupRef::named(&g), psi);
                    let a = Evaluator::new(plain).extension(&ct).map_err(err)?;
                    let b = Evaluator::new(&embedded).extension(&ca).map_err(err)?;
                    if a.holds != b.holds {
                        return Err(format!("model {i}: {ct} vs {ca}"));
                    }
                    checks += 1;
                }
            }
        }
    }
    Ok(format!("{checks} pointwise comparisons, 0 mismatches"))
}

/// `parse(render(f)) = f` with resolution against the model.
fn formula_round_trip(corpus: &[CheckedModel], scen: &[(&str, CheckedModel)]) -> Verdict {
    let opts = FormulaOptions {
        depth: 5,
        ..FormulaOptions::default()
    };
    let models: Vec<&CheckedModel> = corpus.iter().chain(scen.iter().map(|(_, m)| m)).collect();
    let mut done = 0;
    let mut i = 0;
    while done < ROUND_TRIPS || i < models.len() {
        let m = models[i % models.len()];
        let mut r = rng(8, i);
        for _ in 0..5 {
            let f = random_formula(&mut r, m, &opts);
            let text = render(&f);
            match parse(&text, m) {
                Ok(back) if back == f => done += 1,
                Ok(back) => return Err(format!("{text} came back as {back}")),
                Err(e) => return Err(format!("{text}: {e}")),
            }
        }
        i += 1;
    }
    Ok(format!("{done} ASTs, 0 failures"))
}

fn main() {
    let started = Instant::now();
    let corpus = corpus();
    let scen = scenario_models();
    let criteria: Vec<Criterion<'_>> = vec![
        (
            "oracle equivalence",
            Box::new(|| oracle_equivalence(&corpus)),
        ),
        ("JB and Ca(chi)", Box::new(|| theorems_1_2(&corpus, &scen))),
        (
            "acting belief and Ca(phi)",
            Box::new(|| theorems_3_4(&corpus)),
        ),
        ("scenario goldens", Box::new(scenario_goldens)),
        (
            "run-property invariance",
            Box::new(|| run_property_invariance(&corpus, &scen)),
        ),
        (
            "KD45 mutation suite",
            Box::new(|| kd45_mutation_suite(&corpus)),
        ),
        (
            "stamp embedding",
            Box::new(|| stamp_embedding(&corpus, &scen)),
        ),
        (
            "formula round trip",
            Box::new(|| formula_round_trip(&corpus, &scen)),
        ),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let verdict = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = t.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("AC{} {name}: PASS ({detail}; {secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("AC{} {name}: FAIL ({detail}; {secs:.1}s)", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
