use super::{acts, self_loops, shift, Expectation, Scenario};
use crate::model::{Model, Point};

/// Two generals, one time stamp per agent.
///
/// Y lays the traps at time 0. At time 1 a false message says Z has been
/// captured, and from then on Y cannot rule out the run `captured`. Z
/// arrives at time 2; before that Z cannot rule out `noenemy`, where no
/// attack is planned. Stamping Y at the trap-laying and Z at the arrival
/// gives time-stamped common belief of the plan although plain common
/// belief never arises.
pub fn build_generals_timestamped() -> Scenario {
    const H: usize = 4;
    let mut m = Model::new(["Y", "Z"]);
    m.boolean("TRAPS")
        .boolean("ARRIVED")
        .boolean("MSG")
        .boolean("PLAN")
        .boolean("ENEMY");
    for run in ["actual", "captured", "noenemy"] {
        m.run(run, H);
    }

    m.set_all("actual", "TRAPS", "1")
        .set("actual", [0, 1], "ARRIVED", "0")
        .set("actual", [2, 3], "ARRIVED", "1")
        .set("actual", [0], "MSG", "0")
        .set("actual", 1..H, "MSG", "1")
        .set_all("actual", "PLAN", "1")
        .set_all("actual", "ENEMY", "1");

    m.set_all("captured", "TRAPS", "1")
        .set_all("captured", "ARRIVED", "0")
        .set("captured", [0], "MSG", "0")
        .set("captured", 1..H, "MSG", "1")
        .set_all("captured", "PLAN", "0")
        .set_all("captured", "ENEMY", "1");

    m.set_all("noenemy", "TRAPS", "0")
        .set("noenemy", [0, 1], "ARRIVED", "0")
        .set("noenemy", [2, 3], "ARRIVED", "1")
        .set_all("noenemy", "MSG", "0")
        .set_all("noenemy", "PLAN", "0")
        .set_all("noenemy", "ENEMY", "0");

    // Y: sure of the plan at time 0, in doubt after the message.
    self_loops(&mut m, "Y", "actual", [0]);
    shift(&mut m, "Y", "captured", "actual", [0]);
    shift(&mut m, "Y", "actual", "captured", 1..H);
    self_loops(&mut m, "Y", "captured", 1..H);
    self_loops(&mut m, "Y", "noenemy", 0..H);

    // Z: unsure whether there is an enemy until it arrives.
    shift(&mut m, "Z", "actual", "noenemy", [0, 1]);
    self_loops(&mut m, "Z", "actual", [2, 3]);
    self_loops(&mut m, "Z", "captured", 0..H);
    self_loops(&mut m, "Z", "noenemy", 0..H);

    m.rigid_group("G", ["Y", "Z"]);
    for run in ["actual", "captured", "noenemy"] {
        m.stamp("plan", "Y", run, 0).stamp("plan", "Z", run, 2);
    }

    let expectations = vec![
        Expectation::at_run(
            "C{Y,Z}(PLAN=1)",
            "actual",
            false,
            "Z doubts the enemy before arriving and Y doubts Z after the message, \
             so no point of the actual run has common belief",
        ),
        Expectation::valid(
            "!(C{Y,Z}(PLAN=1))",
            true,
            "no point of any run has common belief in the plan",
        ),
        Expectation::at_run(
            "C[t:plan]{Y,Z}(PLAN=1)",
            "actual",
            true,
            "at Y's trap-laying time and Z's arrival time both believe the plan",
        ),
        Expectation::at_run(
            "E{Y,Z}(PLAN=1)",
            "actual",
            false,
            "already at time 0 Z considers the enemy absent",
        ),
        Expectation::at_point(
            "B_Y(PLAN=1) & B_Y(TRAPS=1)",
            Point::new("actual", 0),
            true,
            "Y is sure of the plan when laying the traps",
        ),
        Expectation::at_point(
            "!(B_Y(PLAN=1))",
            Point::new("actual", 1),
            true,
            "the capture message shakes Y",
        ),
    ];

    Scenario {
        name: "generals1",
        description: "two generals; time-stamped common belief without common belief",
        model: m,
        expectations,
    }
}

/// Two generals, Y acting twice.
///
/// Y lays south traps and west traps at different times, and the order and
/// timing differ between runs. In `doubt_west` Y lays the west traps while
/// doubting that Z is coming; in `doubt_south` the same happens with the
/// south traps. Any single stamp for Y inspects only one of the two
/// trap-layings, so in one of the doubt runs it certifies the plan while
/// the action-stamped operator, which inspects both, does not.
pub fn build_generals_actionstamped() -> Scenario {
    const H: usize = 5;
    const RUNS: [&str; 4] = ["actual", "captured", "doubt_south", "doubt_west"];
    let mut m = Model::new(["Y", "Z"]);
    m.boolean("SOUTH")
        .boolean("WEST")
        .boolean("ARRIVED")
        .boolean("MSG")
        .boolean("PLAN");
    for run in RUNS {
        m.run(run, H);
    }

    // (south time, west time, message times, arrival time or H if never)
    let story: [(&str, usize, usize, &[usize], usize); 4] = [
        ("actual", 0, 1, &[2], 3),
        ("captured", 0, 1, &[2, 3, 4], H),
        ("doubt_south", 2, 3, &[2], 4),
        ("doubt_west", 0, 3, &[2, 3], 4),
    ];
    for (run, south, west, msg, arrival) in story {
        for t in 0..H {
            m.set(run, [t], "SOUTH", u8::from(t >= south) as i64)
                .set(run, [t], "WEST", u8::from(t >= west) as i64)
                .set(run, [t], "MSG", u8::from(msg.contains(&t)) as i64)
                .set(run, [t], "ARRIVED", u8::from(t >= arrival) as i64)
                .set(run, [t], "PLAN", u8::from(run != "captured") as i64);
        }
        acts(&mut m, "G", "Y", run, &[south, west]);
        if arrival < H {
            acts(&mut m, "G", "Z", run, &[arrival]);
        }
        m.stamp("south", "Y", run, south)
            .stamp("west", "Y", run, west)
            .stamp("south", "Z", run, arrival.min(H - 1))
            .stamp("west", "Z", run, arrival.min(H - 1));
    }

    // Y doubts while the message stands and Z has not arrived.
    for (run, doubting) in [
        ("actual", &[2][..]),
        ("doubt_south", &[2][..]),
        ("doubt_west", &[2, 3][..]),
    ] {
        for t in 0..H {
            if doubting.contains(&t) {
                shift(&mut m, "Y", run, "captured", [t]);
            } else {
                self_loops(&mut m, "Y", run, [t]);
            }
        }
    }
    self_loops(&mut m, "Y", "captured", 0..H);
    for run in RUNS {
        self_loops(&mut m, "Z", run, 0..H);
    }
    m.rigid_group("G", ["Y", "Z"]);

    let mut expectations = vec![
        Expectation::at_run(
            "Ca{Y,Z}(PLAN=1)",
            "actual",
            true,
            "Y is sure at both trap-layings and Z at its arrival",
        ),
        Expectation::at_point(
            "C{Y,Z}(PLAN=1)",
            Point::new("actual", 2),
            false,
            "the capture message at time 2 leaves Y in doubt at that point",
        ),
    ];
    for (stamp, run) in [("south", "doubt_west"), ("west", "doubt_south")] {
        expectations.push(Expectation::at_run(
            &format!("C[t:{stamp}]{{Y,Z}}(PLAN=1)"),
            "actual",
            true,
            "on the actual run the single stamp does certify the plan",
        ));
        expectations.push(Expectation::at_run(
            &format!("C[t:{stamp}]{{Y,Z}}(PLAN=1) & !(Ca{{Y,Z}}(PLAN=1))"),
            run,
            true,
            "the stamp skips the trap-laying done in doubt",
        ));
        expectations.push(Expectation::valid(
            &format!("C[t:{stamp}]{{Y,Z}}(PLAN=1) -> Ca{{Y,Z}}(PLAN=1)"),
            false,
            "one stamp per run cannot stand in for both of Y's actions",
        ));
    }
    expectations.extend([
        Expectation::valid("chi{G}", true, "everyone acts whenever supposed to"),
        Expectation::jb(
            "G",
            true,
            "acting members always believe the plan is followed",
        ),
        Expectation::valid("Ca{G}(chi{G})", true, "holds everywhere, matching JB"),
    ]);

    Scenario {
        name: "generals2",
        description: "two generals; Y acts twice, action-stamped common belief",
        model: m,
        expectations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::bounded_nesting_oracle;
    use crate::formula::parse;
    use crate::model::CheckedModel;

    #[test]
    fn oracle_at_depth_three_matches_time_stamped_belief() {
        let s = build_generals_timestamped();
        let m = CheckedModel::new(s.model).unwrap();
        let f = parse("C[t:plan]{Y,Z}(PLAN=1)", &m).unwrap();
        for t in 0..4 {
            assert!(bounded_nesting_oracle(&m, &f, &Point::new("actual", t), 3).unwrap());
        }
    }

    #[test]
    fn two_times_in_one_stamp_do_not_fit_the_format() {
        let s = build_generals_actionstamped();
        let mut v: serde_json::Value = serde_json::from_str(&s.model.to_json()).unwrap();
        v["timestamps"]["south"]["Y"]["actual"] = serde_json::json!([0, 1]);
        assert!(Model::from_json(&v.to_string()).is_err());
    }
}
