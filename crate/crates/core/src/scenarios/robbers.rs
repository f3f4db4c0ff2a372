use super::{self_loops, shift, Expectation, Scenario};
use crate::model::{Model, Point};

/// Two robbers, each disabling the part of the alarm it knows about.
///
/// In `actual` both J and H do their part at time 1, so the crew's plan is
/// carried out. Neither knows about the other: J cannot rule out `no_h`,
/// where H stays home, and H cannot rule out `no_j`. Both are supposed to
/// act at time 1 in every run, so in the counterfactual runs the plan is
/// not followed. The acts happen, but the beliefs behind them do not
/// support joint behavior.
pub fn build_bank_robbers() -> Scenario {
    const H: usize = 3;
    const RUNS: [&str; 3] = ["actual", "no_h", "no_j"];
    let mut m = Model::new(["J", "H"]);
    m.boolean("BYPASS_J").boolean("BYPASS_H").boolean("ROBBED");
    for run in RUNS {
        m.run(run, H);
        let j = run != "no_j";
        let h = run != "no_h";
        m.set(run, [0], "BYPASS_J", "0")
            .set(run, [0], "BYPASS_H", "0")
            .set(run, 1..H, "BYPASS_J", i64::from(j))
            .set(run, 1..H, "BYPASS_H", i64::from(h))
            .set(run, 0..2, "ROBBED", "0")
            .set(run, [2], "ROBBED", i64::from(j && h));
        for agent in ["J", "H"] {
            m.should_act("Crew", agent, Point::new(run, 1));
        }
    }
    m.rigid_group("Crew", ["J", "H"]);
    m.acting("Crew", "J", Point::new("actual", 1))
        .acting("Crew", "H", Point::new("actual", 1));

    shift(&mut m, "J", "actual", "no_h", 0..H);
    self_loops(&mut m, "J", "no_h", 0..H);
    self_loops(&mut m, "J", "no_j", 0..H);
    shift(&mut m, "H", "actual", "no_j", 0..H);
    self_loops(&mut m, "H", "no_j", 0..H);
    self_loops(&mut m, "H", "no_h", 0..H);

    let expectations = vec![
        Expectation::at_run(
            "chi{Crew}",
            "actual",
            true,
            "both bypass their part of the alarm",
        ),
        Expectation::at_run(
            "!(chi{Crew})",
            "no_h",
            true,
            "H is supposed to act but stays home",
        ),
        Expectation::jb("Crew", false, "neither believes the other will do its part"),
        Expectation::jb_violations("Crew", 2, "one violation at each robber's acting point"),
        Expectation::at_run(
            "Ca{Crew}(chi{Crew})",
            "actual",
            false,
            "J's acting belief reaches a run where the plan fails",
        ),
        Expectation::valid(
            "Ca{Crew}(chi{Crew})",
            false,
            "so it does not hold at all points",
        ),
    ];

    Scenario {
        name: "robbers",
        description: "two robbers whose acts coincide without joint behavior",
        model: m,
        expectations,
    }
}
