//! Cyclic modal formulas as guarded graphs.
//!
//! Formulas are pointed labeled graphs whose box occurrences meet every
//! cycle. The crate covers bisimulation and minimization, fixed points and
//! equation systems, Kripke evaluation on finite acyclic models, a GL
//! decision procedure, the translation from cyclic to acyclic formulas that
//! computes explicit fixed points, and a Hilbert-style proof checker.

pub mod error;
pub mod fixpoint;
pub mod formula;
pub mod gl;
pub mod graph;
pub mod io;
pub mod js;
pub mod kripke;
pub mod proof;
pub mod syntax;

pub use error::{Error, Result};
pub use fixpoint::{cocy, cyco, EquationSystem, MftPresentation, Solution};
pub use formula::{star_compose, Formula, FreshVars, Label, Substitution, TreeFormula, Var, WflSequent};
pub use gl::{brute_force_validity, gl_decide, gl_equiv, GlVerdict};
pub use graph::{GraphError, GuardSet, LabeledGraph};
pub use js::{certify_local_translation, explicit_fixed_point, glcirc_decide, js, js_star, LocalTranslation};
pub use kripke::{eval, find_countermodel, forces, EvalTable, KripkeModel};
pub use proof::{check_proof, parse_script, AxiomBase, ProofScript};
pub use syntax::{parse, render};
