use super::{acts, self_loops, shift, Expectation, Scenario};
use crate::model::{Model, Point};

/// Firefighters arriving at and leaving a fire.
///
/// The on-scene group `S` is `{F1}`, `{F1,F2}`, `{F1,F2,F3}`, `{F2,F3}` at
/// times 0..3 of run `fire`, and empty throughout `calm`. Each firefighter
/// acts on arrival. F3 also carries an action flag at time 1, before it is
/// on scene, where it still believes all is calm; the membership guard
/// keeps that point out of the group's action-stamped beliefs. F4 never
/// joins `S` and acts only for the separate group `Patrol`.
pub fn build_firefighters_indexical() -> Scenario {
    const H: usize = 4;
    const ALL: [&str; 4] = ["F1", "F2", "F3", "F4"];
    let mut m = Model::new(ALL);
    m.boolean("GOAL").boolean("FIRE");
    m.run("fire", H).run("calm", H);
    m.set_all("fire", "GOAL", "1")
        .set_all("fire", "FIRE", "1")
        .set_all("calm", "GOAL", "0")
        .set_all("calm", "FIRE", "0");

    let on_scene: [&[&str]; H] = [&["F1"], &["F1", "F2"], &["F1", "F2", "F3"], &["F2", "F3"]];
    for (t, members) in on_scene.iter().enumerate() {
        m.members_at("S", &Point::new("fire", t), members.iter().copied());
        m.members_at("S", &Point::new("calm", t), Vec::<String>::new());
    }
    m.rigid_group("All", ALL).rigid_group("Patrol", ["F4"]);

    for a in ["F1", "F2"] {
        self_loops(&mut m, a, "fire", 0..H);
        self_loops(&mut m, a, "calm", 0..H);
    }
    // F3 learns of the fire only on arrival; F4 never does.
    shift(&mut m, "F3", "fire", "calm", [0, 1]);
    self_loops(&mut m, "F3", "fire", [2, 3]);
    self_loops(&mut m, "F3", "calm", 0..H);
    shift(&mut m, "F4", "fire", "calm", 0..H);
    self_loops(&mut m, "F4", "calm", 0..H);

    acts(&mut m, "S", "F1", "fire", &[0]);
    acts(&mut m, "S", "F2", "fire", &[1]);
    acts(&mut m, "S", "F3", "fire", &[2]);
    m.acting("S", "F3", Point::new("fire", 1));
    m.acting("Patrol", "F4", Point::new("fire", 1));

    for (a, t) in [("F1", 0), ("F2", 1), ("F3", 2), ("F4", 3)] {
        m.stamp("arrival", a, "fire", t)
            .stamp("arrival", a, "calm", 0);
    }

    let expectations = vec![
        Expectation::at_point(
            "MEMBER[F1]{S}=1 & !(MEMBER[F2]{S}=1) & !(MEMBER[F3]{S}=1)",
            Point::new("fire", 0),
            true,
            "only F1 is on scene at first",
        ),
        Expectation::at_point(
            "MEMBER[F1]{S}=1 & MEMBER[F2]{S}=1 & MEMBER[F3]{S}=1",
            Point::new("fire", 2),
            true,
            "the group has grown by time 2",
        ),
        Expectation::at_point(
            "!(MEMBER[F1]{S}=1) & MEMBER[F3]{S}=1",
            Point::new("fire", 3),
            true,
            "F1 has left by time 3",
        ),
        Expectation::at_run(
            "Ca{S}(GOAL=1)",
            "fire",
            true,
            "members believe the goal at their acting points; F3's early flag \
             is outside its membership",
        ),
        Expectation::at_point(
            "ACTING[F3]{S}=1 & !(MEMBER[F3]{S}=1) & !(B_F3(GOAL=1))",
            Point::new("fire", 1),
            true,
            "F3's early flag sits at a point where it is not yet a member",
        ),
        Expectation::at_run(
            "C[t:arrival]{S}(GOAL=1)",
            "fire",
            true,
            "F4's arrival stamp falls outside S and is skipped",
        ),
        Expectation::at_run(
            "C[t:arrival]{All}(GOAL=1)",
            "fire",
            false,
            "for the rigid group F4's stamped belief counts, and F4 believes \
             all is calm",
        ),
        Expectation::at_run(
            "Ca{Patrol}(GOAL=1)",
            "fire",
            false,
            "F4 acts for Patrol while believing all is calm",
        ),
        Expectation::at_run(
            "Ca{S}(GOAL=1) & E{S}(GOAL=1) & C{S}(GOAL=1)",
            "calm",
            true,
            "with nobody on scene every group operator over S is vacuous",
        ),
        Expectation::jb("S", true, "each member believes it is doing its part"),
    ];

    Scenario {
        name: "firefighters",
        description: "indexical on-scene group whose membership grows and shrinks",
        model: m,
        expectations,
    }
}
