use super::{acts, self_loops, shift, Expectation, Scenario};
use crate::model::{Model, Point};

/// A rescue team `R` waiting for a robot `B`.
///
/// The robot arrives at time 1 in `ontime`, at time 3 in `delayed` (the
/// actual run) and `gaveup`, and never in `never`. Both act when the robot
/// arrives, except in `gaveup`, where the team has been stood down and
/// only the robot acts. Before arriving the robot cannot rule out never
/// making it; after arriving late it cannot tell whether the team is still
/// there. The team expects the robot on time at first, and in `gaveup`
/// believes it will never come.
pub fn build_search_rescue() -> Scenario {
    const H: usize = 5;
    const RUNS: [&str; 4] = ["delayed", "gaveup", "never", "ontime"];
    let mut m = Model::new(["R", "B"]);
    m.boolean("ARRIVED").boolean("PLAN");
    for run in RUNS {
        m.run(run, H);
    }
    let arrival = |run: &str| match run {
        "ontime" => Some(1),
        "delayed" | "gaveup" => Some(3),
        _ => None,
    };
    for run in RUNS {
        for t in 0..H {
            let arrived = arrival(run).is_some_and(|a| t >= a);
            m.set(run, [t], "ARRIVED", i64::from(arrived)).set(
                run,
                [t],
                "PLAN",
                i64::from(run != "never"),
            );
        }
    }
    m.rigid_group("T", ["R", "B"]);
    acts(&mut m, "T", "R", "ontime", &[1]);
    acts(&mut m, "T", "B", "ontime", &[1]);
    acts(&mut m, "T", "R", "delayed", &[3]);
    acts(&mut m, "T", "B", "delayed", &[3]);
    acts(&mut m, "T", "B", "gaveup", &[3]);

    // Robot.
    for run in ["delayed", "gaveup"] {
        shift(&mut m, "B", run, "never", 0..3);
        for t in 3..H {
            m.belief("B", Point::new(run, t), Point::new("delayed", t))
                .belief("B", Point::new(run, t), Point::new("gaveup", t));
        }
    }
    shift(&mut m, "B", "ontime", "never", [0]);
    self_loops(&mut m, "B", "ontime", 1..H);
    self_loops(&mut m, "B", "never", 0..H);

    // Team.
    for run in ["delayed", "gaveup"] {
        shift(&mut m, "R", run, "ontime", [0, 1]);
    }
    self_loops(&mut m, "R", "delayed", 2..H);
    shift(&mut m, "R", "gaveup", "never", 2..H);
    self_loops(&mut m, "R", "ontime", 0..H);
    self_loops(&mut m, "R", "never", 0..H);

    let expectations = vec![
        Expectation::at_run(
            "C{R,B}(PLAN=1)",
            "delayed",
            false,
            "early on the robot fears never arriving; later it cannot rule out \
             a team that believes it never will",
        ),
        Expectation::at_run(
            "Ca{R,B}(PLAN=1)",
            "delayed",
            true,
            "at the moment each acts, both believe the task goes ahead",
        ),
        Expectation::jb(
            "T",
            true,
            "acting members always believe everyone plays its part",
        ),
        Expectation::at_run(
            "!(ACTING[B]{T}=1)",
            "never",
            true,
            "the robot never acts in the run where it never arrives",
        ),
        Expectation::at_run(
            "Ea{R,B}(PLAN=0)",
            "never",
            true,
            "no acting point, so the action-stamped operator is vacuous",
        ),
    ];

    Scenario {
        name: "rescue",
        description: "rescue team and robot; action-stamped common belief despite delay",
        model: m,
        expectations,
    }
}
