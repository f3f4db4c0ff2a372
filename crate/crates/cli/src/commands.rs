use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use stampcheck::formula::parse_group;
use stampcheck::model::Kd45Policy;
use stampcheck::properties::{check_jb, verify_theorem_1_2, verify_theorem_3_4, TheoremReport};
use stampcheck::scenarios::random::{random_formula, random_model, FormulaOptions, RandomParams};
use stampcheck::scenarios::{self, run_scenario, Scenario, ScenarioReport};
use stampcheck::{
    parse, validate_model, CheckedModel, Evaluator, Formula, GroupRef, Model, Point,
    ValidationReport,
};

use crate::failure::{self, Failure, ASSERTION, INVALID, OK, USAGE};

/// A finished command: its outcome payload, the text form of the same
/// report, and the exit code.
pub struct Done {
    pub outcome: Value,
    pub text: String,
    pub code: i32,
}

pub type Outcome = Result<Done, Failure>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn read_model(path: &Path) -> Result<Model, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    Model::from_json(&text).map_err(|e| failure::from_model(&path.display().to_string(), e))
}

fn load(path: &Path, policy: Kd45Policy) -> Result<(CheckedModel, ValidationReport), Failure> {
    CheckedModel::with_policy(read_model(path)?, policy)
        .map_err(|e| failure::from_model(&path.display().to_string(), e))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

fn group_arg(m: &CheckedModel, text: &str) -> Result<GroupRef, Failure> {
    let g = parse_group(text).map_err(|e| failure::from_input("--group", text, e.into()))?;
    m.resolve_group(&g)
        .map_err(|e| failure::from_input("--group", text, e))?;
    Ok(g)
}

fn formula_arg(m: &CheckedModel, source: &str, text: &str) -> Result<Formula, Failure> {
    parse(text, m).map_err(|e| failure::from_input(source, text, e))
}

pub fn validate(path: &Path) -> Outcome {
    let report = validate_model(&read_model(path)?);
    Ok(Done {
        text: report.to_string(),
        code: if report.passed { OK } else { INVALID },
        outcome: to_value(&report),
    })
}

#[derive(Serialize)]
struct PointTruth {
    point: Point,
    holds: bool,
}

#[derive(Serialize)]
struct CheckOutcome {
    formula: String,
    points: Vec<PointTruth>,
    holds_at: usize,
    selected: usize,
    all_hold: bool,
    /// Present when `--allow-invalid` admitted a model that fails KD45.
    #[serde(skip_serializing_if = "Option::is_none")]
    kd45_violations: Option<ValidationReport>,
}

pub fn check(
    path: &Path,
    formula: &str,
    points: &[String],
    assert: bool,
    allow_invalid: bool,
) -> Outcome {
    let policy = if allow_invalid {
        Kd45Policy::Ignore
    } else {
        Kd45Policy::Enforce
    };
    let (m, report) = load(path, policy)?;
    let f = formula_arg(&m, "formula", formula)?;
    let ids = if points.is_empty() {
        m.point_ids().collect()
    } else {
        let mut ids = Vec::new();
        for text in points {
            let lookup = |e| failure::from_input("--point", text, e);
            let p: Point = text.parse().map_err(lookup)?;
            ids.push(m.point_id(&p).map_err(lookup)?);
        }
        ids
    };
    let ext = Evaluator::new(&m)
        .extension(&f)
        .map_err(|e| failure::from_input("formula", formula, e))?;
    let rows: Vec<PointTruth> = ids
        .iter()
        .map(|&p| PointTruth {
            point: m.point(p),
            holds: ext.contains(p),
        })
        .collect();
    let holds_at = rows.iter().filter(|r| r.holds).count();
    let out = CheckOutcome {
        formula: f.to_string(),
        selected: rows.len(),
        all_hold: holds_at == rows.len(),
        holds_at,
        points: rows,
        kd45_violations: (!report.passed).then_some(report),
    };

    let mut text = String::new();
    if let Some(r) = &out.kd45_violations {
        let _ = writeln!(text, "warning: checking a model that is not KD45");
        text.push_str(&r.to_string());
    }
    let _ = writeln!(text, "formula: {}", out.formula);
    for r in &out.points {
        let _ = writeln!(text, "  {:<16} {}", r.point.to_string(), r.holds);
    }
    let _ = writeln!(
        text,
        "holds at {} of {} point(s)",
        out.holds_at, out.selected
    );
    Ok(Done {
        code: if assert && !out.all_hold {
            ASSERTION
        } else {
            OK
        },
        outcome: to_value(&out),
        text,
    })
}

pub fn jb(path: &Path, group: &str, assert: bool) -> Outcome {
    let (m, _) = load(path, Kd45Policy::Enforce)?;
    let g = group_arg(&m, group)?;
    let report = check_jb(&m, &g).map_err(|e| failure::from_input("--group", group, e))?;
    let mut text = if report.holds {
        format!("JB{} holds\n", report.group)
    } else {
        format!(
            "JB{} fails at {} site(s):\n",
            report.group,
            report.violations.len()
        )
    };
    for v in &report.violations {
        let _ = writeln!(text, "  {} {}", v.point, v.agent);
    }
    Ok(Done {
        code: if assert && !report.holds {
            ASSERTION
        } else {
            OK
        },
        outcome: to_value(&report),
        text,
    })
}

fn theorem_line(r: &TheoremReport) -> String {
    let names: Vec<String> = r.theorems.iter().map(u8::to_string).collect();
    let mut line = format!(
        "theorems {}  group {}  phi {}  left={} right={}  {}",
        names.join("-"),
        r.group,
        r.phi,
        r.left,
        r.right,
        if r.equivalence_respected {
            "respected"
        } else {
            "MISMATCH"
        }
    );
    if let Some(w) = &r.witness {
        let _ = write!(line, "  witness {}", w.point);
        if let Some(a) = &w.agent {
            let _ = write!(line, " {a}");
        }
    }
    if let Some(note) = &r.note {
        let _ = write!(line, "\n    {note}");
    }
    line
}

pub struct TheoremArgs {
    pub model: Option<PathBuf>,
    pub group: Option<String>,
    pub phi: Option<String>,
    pub random: Option<usize>,
    pub seed: u64,
}

pub fn theorems(args: &TheoremArgs) -> Outcome {
    match (&args.model, args.random) {
        (Some(path), None) => theorems_on_file(path, args),
        (None, Some(n)) => theorems_on_random(n, args),
        _ => Err(Failure::usage("give either a model file or --random N")),
    }
}

fn theorems_on_file(path: &Path, args: &TheoremArgs) -> Outcome {
    let (m, _) = load(path, Kd45Policy::Enforce)?;
    let groups = match &args.group {
        Some(g) => vec![group_arg(&m, g)?],
        None => m.group_names().map(GroupRef::named).collect(),
    };
    if groups.is_empty() {
        return Err(Failure::usage("the model declares no groups; pass --group"));
    }
    let phi = match &args.phi {
        Some(text) => Some(formula_arg(&m, "--phi", text)?),
        None => None,
    };
    let mut reports = Vec::new();
    for g in &groups {
        let r = match &phi {
            Some(phi) => verify_theorem_3_4(&m, g, phi),
            None => verify_theorem_1_2(&m, g),
        };
        reports.push(r.map_err(|e| failure::from_model(&path.display().to_string(), e))?);
    }
    let all = reports.iter().all(|r| r.equivalence_respected);
    let text: String = reports.iter().map(|r| theorem_line(r) + "\n").collect();
    Ok(Done {
        outcome: json!({ "reports": reports, "all_respected": all }),
        text,
        code: if all { OK } else { ASSERTION },
    })
}

#[derive(Serialize)]
struct RandomEntry {
    seed: u64,
    points: usize,
    reports: Vec<TheoremReport>,
}

/// Reports for one generated model: the χ instance for each group and, when
/// no `--phi` is given, one seeded random φ per group.
fn random_entry(seed: u64, args: &TheoremArgs) -> Result<RandomEntry, Failure> {
    let model = random_model(seed, &RandomParams::default())
        .map_err(|e| Failure::new(USAGE, "generator", e.to_string()))?;
    let m = CheckedModel::new(model)
        .map_err(|e| failure::from_model(&format!("random model {seed}"), e))?;
    let groups = match &args.group {
        Some(g) => vec![group_arg(&m, g)?],
        None => vec![GroupRef::named("G"), GroupRef::named("S")],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = FormulaOptions {
        depth: 3,
        ..FormulaOptions::default()
    };
    let defect = |e| failure::from_model(&format!("random model {seed}"), e);
    let mut reports = Vec::new();
    for g in &groups {
        reports.push(verify_theorem_1_2(&m, g).map_err(defect)?);
        let phi = match &args.phi {
            Some(text) => formula_arg(&m, "--phi", text)?,
            None => random_formula(&mut rng, &m, &opts),
        };
        reports.push(verify_theorem_3_4(&m, g, &phi).map_err(defect)?);
    }
    Ok(RandomEntry {
        seed,
        points: m.num_points(),
        reports,
    })
}

fn theorems_on_random(n: usize, args: &TheoremArgs) -> Outcome {
    let entries = (0..n as u64)
        .into_par_iter()
        .map(|i| random_entry(args.seed.wrapping_add(i), args))
        .collect::<Result<Vec<_>, _>>()?;
    let reports = || entries.iter().flat_map(|e| &e.reports);
    let total = reports().count();
    let respected = reports().filter(|r| r.equivalence_respected).count();
    let both_true = reports().filter(|r| r.left && r.right).count();

    let mut text = format!(
        "{n} random model(s) from seed {}: {respected} of {total} instance(s) respected \
         ({both_true} with both sides true)\n",
        args.seed
    );
    for e in &entries {
        for r in e.reports.iter().filter(|r| !r.equivalence_respected) {
            let _ = writeln!(text, "seed {}: {}", e.seed, theorem_line(r));
        }
    }
    Ok(Done {
        code: if respected == total { OK } else { ASSERTION },
        outcome: json!({
            "seed": args.seed,
            "count": n,
            "instances": total,
            "respected": respected,
            "all_respected": respected == total,
            "models": entries,
        }),
        text,
    })
}

fn named_scenarios(name: &str) -> Result<Vec<Scenario>, Failure> {
    if name == "all" {
        return Ok(scenarios::all());
    }
    scenarios::by_name(name).map(|s| vec![s]).ok_or_else(|| {
        Failure::usage(format!(
            "unknown scenario `{name}` (known: {}, all)",
            scenarios::NAMES.join(", ")
        ))
    })
}

pub fn export(name: &str, out: &Path) -> Outcome {
    let s = scenarios::by_name(name).ok_or_else(|| {
        Failure::usage(format!(
            "unknown scenario `{name}` (known: {})",
            scenarios::NAMES.join(", ")
        ))
    })?;
    write_file(out, &s.model.to_json())?;
    Ok(Done {
        outcome: json!({ "scenario": s.name, "exported": out }),
        text: format!("wrote the {} model to {}\n", s.name, out.display()),
        code: OK,
    })
}

fn scenario_text(s: &Scenario, r: &ScenarioReport) -> String {
    let mut text = format!("{}: {}\n", s.name, s.description);
    for o in &r.outcomes {
        let _ = writeln!(
            text,
            "  {}  {}: expected {}, got {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.expectation.claim,
            o.expectation.expected,
            o.actual
        );
    }
    let held = r.outcomes.iter().filter(|o| o.passed).count();
    let _ = writeln!(
        text,
        "{}: {held} of {} expectation(s) hold",
        s.name,
        r.outcomes.len()
    );
    text
}

pub fn scenario(name: &str, export_to: Option<&Path>) -> Outcome {
    if let Some(out) = export_to {
        return export(name, out);
    }
    let mut reports = Vec::new();
    let mut text = String::new();
    for s in named_scenarios(name)? {
        let r = run_scenario(&s).map_err(|e| failure::from_model(s.name, e))?;
        text.push_str(&scenario_text(&s, &r));
        reports.push(r);
    }
    let passed = reports.iter().all(|r| r.passed);
    Ok(Done {
        outcome: json!({ "scenarios": reports, "passed": passed }),
        text,
        code: if passed { OK } else { ASSERTION },
    })
}

pub fn random(seed: u64, out: Option<&Path>) -> Outcome {
    let model = random_model(seed, &RandomParams::default())
        .map_err(|e| Failure::new(USAGE, "generator", e.to_string()))?;
    let points = model.num_points();
    match out {
        Some(path) => {
            write_file(path, &model.to_json())?;
            Ok(Done {
                outcome: json!({ "seed": seed, "points": points, "out": path }),
                text: format!(
                    "wrote random model {seed} ({points} points) to {}\n",
                    path.display()
                ),
                code: OK,
            })
        }
        None => Ok(Done {
            text: model.to_json() + "\n",
            outcome: json!({ "seed": seed, "points": points, "model": model }),
            code: OK,
        }),
    }
}
