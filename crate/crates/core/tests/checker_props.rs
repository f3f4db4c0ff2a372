use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stampcheck::checker::{nesting_levels, oracle_extension, Evaluator};
use stampcheck::model::{validate_model, CheckedModel, Model};
use stampcheck::scenarios::random::{
    random_common_node, random_formula, random_model, FormulaOptions, RandomParams,
};
use stampcheck::{bounded_nesting_oracle, check, extension, Formula, GroupRef, Point};

fn model(seed: u64) -> CheckedModel {
    CheckedModel::new(random_model(seed, &RandomParams::default()).unwrap()).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x5eed)
}

fn small_opts() -> FormulaOptions {
    FormulaOptions {
        depth: 3,
        ..FormulaOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn common_nodes_agree_with_nesting_oracle(seed in any::<u64>()) {
        let m = model(seed);
        let mut r = rng(seed);
        let n = m.num_points();
        for i in 0..6 {
            let f = random_common_node(&mut r, &m, i, &small_opts());
            let ext = extension(&m, &f).unwrap();
            for p in m.point_ids() {
                let point = m.point(p);
                let o = bounded_nesting_oracle(&m, &f, &point, n).unwrap();
                prop_assert_eq!(o, ext.contains(p), "{} at {}", f, point);
            }
        }
    }

    #[test]
    fn extension_agrees_with_pointwise_check(seed in any::<u64>()) {
        let m = model(seed);
        let mut r = rng(seed);
        for _ in 0..6 {
            let f = random_formula(&mut r, &m, &small_opts());
            let ext = extension(&m, &f).unwrap();
            let mut ev = Evaluator::new(&m);
            for p in m.point_ids() {
                prop_assert_eq!(ev.check(&f, p).unwrap(), ext.contains(p), "{}", f);
            }
            prop_assert_eq!(oracle_extension(&m, &f).unwrap(), ext.holds);
        }
    }

    #[test]
    fn run_properties_are_constant_along_runs(seed in any::<u64>()) {
        let m = model(seed);
        let mut r = rng(seed);
        for _ in 0..6 {
            let f = random_formula(&mut r, &m, &small_opts());
            let mut ev = Evaluator::new(&m);
            for sub in f.subformulas().into_iter().filter(|s| s.is_run_property()) {
                let e = ev.extension(sub).unwrap();
                for run in m.run_ids() {
                    let vals: BTreeSet<bool> = m.run_points(run).map(|p| e.contains(p)).collect();
                    prop_assert_eq!(vals.len(), 1, "{} varies on {}", sub, m.run_name(run));
                }
            }
        }
    }

    #[test]
    fn nesting_levels_are_monotone(seed in any::<u64>()) {
        let m = model(seed);
        let mut r = rng(seed);
        let n = m.num_points();
        for i in 0..3 {
            let f = random_common_node(&mut r, &m, i, &small_opts());
            for p in m.point_ids() {
                let levels = nesting_levels(&m, &f, &m.point(p), n + 2).unwrap();
                for w in levels.windows(2) {
                    prop_assert!(!w[1] || w[0], "{} not monotone", f);
                }
            }
        }
    }

    #[test]
    fn common_belief_is_positively_introspective(seed in any::<u64>()) {
        let m = model(seed);
        let mut r = rng(seed);
        for i in 0..6 {
            let f = random_common_node(&mut r, &m, i, &small_opts());
            let twice = match &f {
                Formula::Common(g, _) => Formula::common(g.clone(), f.clone()),
                Formula::CommonT(g, s, _) => Formula::common_t(g.clone(), s, f.clone()),
                Formula::CommonA(g, _) => Formula::common_a(g.clone(), f.clone()),
                _ => unreachable!(),
            };
            let once = extension(&m, &f).unwrap();
            let again = extension(&m, &twice).unwrap();
            for p in m.point_ids() {
                prop_assert!(!once.contains(p) || again.contains(p), "{}", f);
            }
        }
    }

    #[test]
    fn everyone_is_the_conjunction_of_member_beliefs(seed in any::<u64>()) {
        let m = model(seed);
        let mut r = rng(seed);
        for g in ["G", "S"] {
            let psi = random_formula(&mut r, &m, &small_opts());
            let e = Formula::everyone(GroupRef::named(g), psi.clone());
            for p in m.point_ids() {
                let point = m.point(p);
                let members = m.membership(g, &point).unwrap();
                let mut conj = true;
                for a in &members {
                    conj &= check(&m, &Formula::believes(a, psi.clone()), &point).unwrap();
                }
                prop_assert_eq!(check(&m, &e, &point).unwrap(), conj);
            }
        }
    }

    #[test]
    fn successors_match_a_scan_of_the_edge_list(seed in any::<u64>()) {
        let raw = random_model(seed, &RandomParams::default()).unwrap();
        let m = CheckedModel::new(raw.clone()).unwrap();
        for (agent, edges) in &raw.beliefs {
            for p in raw.points() {
                let naive: BTreeSet<Point> = edges.iter().filter(|(a, _)| *a == p).map(|(_, b)| b.clone()).collect();
                let got: BTreeSet<Point> = m.successors(agent, &p).unwrap().into_iter().collect();
                prop_assert!(!got.is_empty());
                prop_assert_eq!(got, naive);
            }
        }
    }

    #[test]
    fn validation_is_deterministic_and_checking_leaves_the_model_alone(seed in any::<u64>()) {
        let raw = random_model(seed, &RandomParams::default()).unwrap();
        prop_assert_eq!(validate_model(&raw), validate_model(&raw));
        let m = CheckedModel::new(raw.clone()).unwrap();
        let mut r = rng(seed);
        for _ in 0..4 {
            let f = random_formula(&mut r, &m, &small_opts());
            extension(&m, &f).unwrap();
        }
        prop_assert_eq!(m.model(), &raw);
    }
}

#[test]
fn level_one_is_everyone() {
    let m = model(11);
    let mut r = rng(11);
    for i in 0..30 {
        let c = random_common_node(&mut r, &m, i, &small_opts());
        let e = match &c {
            Formula::Common(g, x) => Formula::Everyone(g.clone(), x.clone()),
            Formula::CommonT(g, s, x) => Formula::EveryoneT(g.clone(), s.clone(), x.clone()),
            Formula::CommonA(g, x) => Formula::EveryoneA(g.clone(), x.clone()),
            _ => unreachable!(),
        };
        for p in m.model().points() {
            assert_eq!(
                bounded_nesting_oracle(&m, &c, &p, 1).unwrap(),
                check(&m, &e, &p).unwrap()
            );
        }
    }
}

#[test]
fn universally_true_formula_has_common_belief_everywhere() {
    let m = model(5);
    let top = stampcheck::parse("P=0 | P=1", &m).unwrap();
    for g in ["G", "S"] {
        let c = Formula::common(GroupRef::named(g), top.clone());
        assert!(extension(&m, &c).unwrap().is_valid());
    }
}

#[test]
fn reflexive_singleton_reaches_itself() {
    let mut raw = Model::new(["a"]);
    raw.run("r", 1)
        .belief("a", Point::new("r", 0), Point::new("r", 0));
    raw.rigid_group("G", ["a"]);
    let m = CheckedModel::new(raw).unwrap();
    let reach = stampcheck::reachable_set(
        &m,
        &stampcheck::ReachKind::Standard,
        &GroupRef::named("G"),
        &Point::new("r", 0),
    )
    .unwrap();
    assert_eq!(reach, BTreeSet::from([Point::new("r", 0)]));
    let reach = stampcheck::reachable_set(
        &m,
        &stampcheck::ReachKind::ActionStamped,
        &GroupRef::named("G"),
        &Point::new("r", 0),
    )
    .unwrap();
    assert!(reach.is_empty());
}
