//! Seeded random models and formulas for property testing.
//!
//! Every generated model declares the same vocabulary: agents `a0, a1, ..`,
//! runs `r0, r1, ..`, a Boolean `P`, a three-valued `Q` over `{a,b,c}`, a
//! rigid group `G`, an indexical group `S`, a stamp function `t`, and action
//! flags for both groups.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::formula::{Formula, GroupRef, Var};
use crate::model::{CheckedModel, Model, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct RandomParams {
    pub runs: (usize, usize),
    pub horizon: (usize, usize),
    pub agents: (usize, usize),
    /// Upper bound on the total number of points.
    pub max_points: usize,
    /// Probability that a given action or should-act flag is set.
    pub flag_density: f64,
    /// Probability that an agent is in `S` at a given point.
    pub membership: f64,
    /// Random edges drawn per agent and point before repair, at most.
    pub max_edges: usize,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            runs: (2, 4),
            horizon: (2, 5),
            agents: (2, 3),
            max_points: 60,
            flag_density: 0.2,
            membership: 0.6,
            max_edges: 2,
        }
    }
}

impl RandomParams {
    pub fn check(&self) -> Result<(), Error> {
        let bad = |msg: &str| Err(Error::InvalidBounds(msg.to_string()));
        let ordered = |(lo, hi): (usize, usize)| lo >= 1 && lo <= hi;
        if !ordered(self.runs) || !ordered(self.horizon) || !ordered(self.agents) {
            return bad("run, horizon and agent ranges need 1 <= min <= max");
        }
        if self.runs.1 * self.horizon.1 > self.max_points {
            return bad(&format!(
                "up to {} points possible, limit is {}",
                self.runs.1 * self.horizon.1,
                self.max_points
            ));
        }
        if self.max_points > 60 {
            return bad("more than 60 points");
        }
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !prob(self.flag_density) || !prob(self.membership) {
            return bad("probabilities must lie in [0, 1]");
        }
        Ok(())
    }
}

/// A model drawn from `seed`. Deterministic in `(seed, params)`, and always
/// passes validation.
pub fn random_model(seed: u64, params: &RandomParams) -> Result<Model, Error> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_agents = rng.gen_range(params.agents.0..=params.agents.1);
    let n_runs = rng.gen_range(params.runs.0..=params.runs.1);
    let agents: Vec<String> = (0..n_agents).map(|i| format!("a{i}")).collect();
    let mut m = Model::new(agents.iter().cloned());
    m.boolean("P").variable("Q", ["a", "b", "c"]);

    for r in 0..n_runs {
        let run = format!("r{r}");
        let h = rng.gen_range(params.horizon.0..=params.horizon.1);
        m.run(&run, h);
        for t in 0..h {
            m.set(&run, [t], "P", i64::from(rng.gen_bool(0.5)));
            m.set(
                &run,
                [t],
                "Q",
                *["a", "b", "c"].choose(&mut rng).expect("nonempty"),
            );
        }
        for a in &agents {
            m.stamp("t", a, &run, rng.gen_range(0..h));
        }
    }
    let points: Vec<Point> = m.points().collect();

    for a in &agents {
        for p in &points {
            for _ in 0..rng.gen_range(0..=params.max_edges) {
                let q = points.choose(&mut rng).expect("nonempty").clone();
                m.belief(a, p.clone(), q);
            }
        }
    }
    kd45_repair(&mut m);

    let mut rigid: Vec<String> = agents
        .iter()
        .filter(|_| rng.gen_bool(0.5))
        .cloned()
        .collect();
    if rigid.is_empty() {
        rigid.push(agents.choose(&mut rng).expect("nonempty").clone());
    }
    m.rigid_group("G", rigid);
    for p in &points {
        let members: Vec<String> = agents
            .iter()
            .filter(|_| rng.gen_bool(params.membership))
            .cloned()
            .collect();
        m.members_at("S", p, members);
    }

    for group in ["G", "S"] {
        for a in &agents {
            for p in &points {
                if rng.gen_bool(params.flag_density) {
                    m.acting(group, a, p.clone());
                }
                if rng.gen_bool(params.flag_density) {
                    m.should_act(group, a, p.clone());
                }
            }
        }
    }
    Ok(m)
}

/// Closes every belief relation under transitivity and the Euclidean
/// property, repeating both closures until neither adds an edge, then
/// gives each successor-less point a self-loop.
///
/// Such a point has no incoming edges (an edge into `y` forces `y -> y` by
/// the Euclidean closure), so the self-loop creates no new obligations.
pub fn kd45_repair(m: &mut Model) {
    let points: Vec<Point> = m.points().collect();
    let index = |p: &Point| points.binary_search(p).expect("edge endpoint is a point");
    let n = points.len();
    for agent in m.agents.clone() {
        let mut succ = vec![BTreeSet::new(); n];
        for (a, b) in m.beliefs.get(&agent).into_iter().flatten() {
            succ[index(a)].insert(index(b));
        }
        loop {
            let mut changed = false;
            for x in 0..n {
                // Transitive: x -> y -> z gives x -> z.
                let via: BTreeSet<usize> = succ[x].iter().flat_map(|&y| succ[y].clone()).collect();
                for z in via {
                    changed |= succ[x].insert(z);
                }
                // Euclidean: x -> y and x -> z give y -> z.
                let targets: Vec<usize> = succ[x].iter().copied().collect();
                for &y in &targets {
                    for &z in &targets {
                        changed |= succ[y].insert(z);
                    }
                }
            }
            if !changed {
                break;
            }
        }
        for (x, s) in succ.iter_mut().enumerate() {
            if s.is_empty() {
                s.insert(x);
            }
        }
        let edges = succ
            .iter()
            .enumerate()
            .flat_map(|(x, s)| s.iter().map(move |&y| (x, y)))
            .map(|(x, y)| (points[x].clone(), points[y].clone()))
            .collect();
        m.beliefs.insert(agent, edges);
    }
}

/// Shape limits for [`random_formula`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaOptions {
    pub depth: usize,
    /// Allow `chi{..}` leaves.
    pub chi: bool,
    /// Allow the three common-belief operators.
    pub common: bool,
    /// Allow a common-belief operator below another one.
    pub nested_common: bool,
}

impl Default for FormulaOptions {
    fn default() -> Self {
        FormulaOptions {
            depth: 4,
            chi: true,
            common: true,
            nested_common: true,
        }
    }
}

/// A random formula over the vocabulary of `m`, already in resolved form:
/// groups are declared names or agent sets, never a bare agent name.
pub fn random_formula<R: Rng>(rng: &mut R, m: &CheckedModel, opts: &FormulaOptions) -> Formula {
    gen(rng, m, opts, opts.depth, false)
}

fn random_group<R: Rng>(rng: &mut R, m: &CheckedModel) -> GroupRef {
    let declared: Vec<&str> = m.group_names().collect();
    if !declared.is_empty() && rng.gen_bool(0.6) {
        return GroupRef::named(declared.choose(rng).expect("nonempty"));
    }
    let mut set: BTreeSet<String> = m
        .agents()
        .iter()
        .filter(|_| rng.gen_bool(0.5))
        .cloned()
        .collect();
    if set.is_empty() {
        set.insert(m.agents().choose(rng).expect("nonempty").clone());
    }
    GroupRef::Agents(set)
}

fn leaf<R: Rng>(rng: &mut R, m: &CheckedModel, opts: &FormulaOptions) -> Formula {
    let pick = rng.gen_range(0..if opts.chi { 6 } else { 5 });
    match pick {
        0 | 1 => {
            let vars: Vec<&String> = m.model().variables.keys().collect();
            let var = *vars.choose(rng).expect("model has variables");
            let domain = m.domain(var).expect("declared");
            let v = domain.choose(rng).expect("nonempty domain");
            Formula::atom(var, v.as_str())
        }
        2..=4 => {
            let a = m.agents().choose(rng).expect("nonempty").clone();
            let g = random_group(rng, m);
            let var = match pick {
                2 => Var::Acting(a, g),
                3 => Var::ShouldAct(a, g),
                _ => Var::Member(a, g),
            };
            Formula::Atom(var, if rng.gen_bool(0.8) { "1" } else { "0" }.into())
        }
        _ => Formula::Chi(random_group(rng, m)),
    }
}

fn gen<R: Rng>(
    rng: &mut R,
    m: &CheckedModel,
    opts: &FormulaOptions,
    depth: usize,
    under_common: bool,
) -> Formula {
    if depth == 0 || rng.gen_bool(0.2) {
        return leaf(rng, m, opts);
    }
    let stamps: Vec<&str> = m.stamp_names().collect();
    let common_ok = opts.common && (opts.nested_common || !under_common);
    loop {
        let sub = |rng: &mut R, inside: bool| gen(rng, m, opts, depth - 1, under_common || inside);
        return match rng.gen_range(0..12) {
            0 => Formula::not(sub(rng, false)),
            1 => {
                let a = sub(rng, false);
                Formula::and(a, sub(rng, false))
            }
            2 => {
                let a = m.agents().choose(rng).expect("nonempty").clone();
                Formula::believes(&a, sub(rng, false))
            }
            3 => Formula::everyone(random_group(rng, m), sub(rng, false)),
            4 | 5 if stamps.is_empty() => continue,
            4 => {
                let s = *stamps.choose(rng).expect("nonempty");
                Formula::everyone_t(random_group(rng, m), s, sub(rng, false))
            }
            5 if !common_ok => continue,
            5 => {
                let s = *stamps.choose(rng).expect("nonempty");
                Formula::common_t(random_group(rng, m), s, sub(rng, true))
            }
            6 => Formula::everyone_a(random_group(rng, m), sub(rng, false)),
            7 | 8 if !common_ok => continue,
            7 => Formula::common(random_group(rng, m), sub(rng, true)),
            8 => Formula::common_a(random_group(rng, m), sub(rng, true)),
            9 => Formula::alw(sub(rng, false)),
            10 => Formula::implies(sub(rng, false), sub(rng, false)),
            _ => leaf(rng, m, opts),
        };
    }
}

/// A random formula whose root is a common-belief operator of each kind in
/// turn (`i % 3`: standard, time-stamped, action-stamped).
pub fn random_common_node<R: Rng>(
    rng: &mut R,
    m: &CheckedModel,
    i: usize,
    opts: &FormulaOptions,
) -> Formula {
    let inner = gen(rng, m, opts, opts.depth.saturating_sub(1), true);
    let g = random_group(rng, m);
    match i % 3 {
        0 => Formula::common(g, inner),
        1 => match m.stamp_names().collect::<Vec<_>>().choose(rng) {
            Some(s) => Formula::common_t(g, s, inner),
            None => Formula::common(g, inner),
        },
        _ => Formula::common_a(g, inner),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_model, Rule};

    #[test]
    fn same_seed_same_model() {
        let p = RandomParams::default();
        assert_eq!(random_model(7, &p).unwrap(), random_model(7, &p).unwrap());
        assert_ne!(random_model(7, &p).unwrap(), random_model(8, &p).unwrap());
    }

    #[test]
    fn generated_models_validate() {
        let p = RandomParams::default();
        for seed in 0..100 {
            let m = random_model(seed, &p).unwrap();
            let r = validate_model(&m);
            assert!(r.passed, "seed {seed}: {r}");
            assert!(m.num_points() <= p.max_points);
        }
    }

    #[test]
    fn bounds_are_checked() {
        let p = RandomParams {
            horizon: (2, 40),
            ..RandomParams::default()
        };
        assert!(matches!(random_model(0, &p), Err(Error::InvalidBounds(_))));
        let p = RandomParams {
            agents: (0, 2),
            ..RandomParams::default()
        };
        assert!(random_model(0, &p).is_err());
    }

    #[test]
    fn repair_fixes_a_broken_relation() {
        let mut m = Model::new(["a"]);
        m.run("r", 3);
        m.belief("a", Point::new("r", 0), Point::new("r", 1))
            .belief("a", Point::new("r", 0), Point::new("r", 2));
        assert!(validate_model(&m).has(Rule::Euclidean));
        kd45_repair(&mut m);
        assert!(validate_model(&m).passed);
    }

    #[test]
    fn formulas_resolve_against_their_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for seed in 0..20 {
            let m =
                CheckedModel::new(random_model(seed, &RandomParams::default()).unwrap()).unwrap();
            for _ in 0..20 {
                let f = random_formula(&mut rng, &m, &FormulaOptions::default());
                assert_eq!(f.resolve(&m).unwrap(), f);
            }
        }
    }

    #[test]
    fn flat_options_exclude_chi_and_nested_common() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = CheckedModel::new(random_model(1, &RandomParams::default()).unwrap()).unwrap();
        let opts = FormulaOptions {
            depth: 3,
            chi: false,
            common: true,
            nested_common: false,
        };
        for _ in 0..200 {
            let f = random_formula(&mut rng, &m, &opts);
            for s in f.subformulas() {
                assert!(!matches!(s, Formula::Chi(_)));
                if s.is_common() {
                    assert!(s.children()[0].subformulas().iter().all(|x| !x.is_common()));
                }
            }
        }
    }
}
