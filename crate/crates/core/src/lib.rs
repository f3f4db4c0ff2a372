//! Model checking for belief operators over finite runs-and-systems models.
//!
//! Start from a [`Model`] (built in code, loaded from JSON, or produced by
//! a scenario builder), validate and index it as a [`CheckedModel`], parse
//! formulas against it with [`parse`], and evaluate them with [`check`],
//! [`extension`] or an [`Evaluator`] session.
//!
//! ```
//! use stampcheck::{check, parse, CheckedModel, Model, Point};
//!
//! let mut m = Model::new(["Y", "Z"]);
//! m.boolean("PLAN").run("r", 2).set_all("r", "PLAN", "1");
//! for p in [Point::new("r", 0), Point::new("r", 1)] {
//!     m.belief("Y", p.clone(), p.clone()).belief("Z", p.clone(), p);
//! }
//! m.rigid_group("G", ["Y", "Z"]);
//! m.stamp("plan", "Y", "r", 0).stamp("plan", "Z", "r", 1);
//!
//! let m = CheckedModel::new(m)?;
//! let f = parse("C{G}(PLAN=1) & C[t:plan]{G}(PLAN=1)", &m)?;
//! assert!(check(&m, &f, &Point::new("r", 0))?);
//! # Ok::<(), stampcheck::Error>(())
//! ```

pub mod checker;
mod error;
pub mod formula;
pub mod model;
pub mod properties;
pub mod scenarios;

pub use checker::{
    bounded_nesting_oracle, check, extension, is_valid, reachable_set, Evaluator, Extension,
    ReachKind,
};
pub use error::Error;
pub use formula::{parse, parse_unresolved, render, Formula, GroupRef, ParseError, Var};
pub use model::{validate_model, CheckedModel, Model, Point, ValidationReport, Value};
