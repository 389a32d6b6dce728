//! The de Jongh–Sambin translation from cyclic formulas to acyclic ones.
//!
//! `js` is a guard recursion with the cycle boxes as guard. At a cycle box
//! `a` the value is `js` of the subformula at `a` with its root snipped and
//! `true` plugged in; everywhere else it is homomorphic. Snipping strictly
//! lowers the cycle count, which is asserted at every recursive call.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::formula::{Formula, Label, TreeFormula, Var};
use crate::gl::{self, GlVerdict};
use crate::graph::GuardSet;

/// Memoizes translations of subformulas, keyed on their canonical form.
#[derive(Debug, Default)]
pub struct Translator {
    memo: HashMap<Formula, Formula>,
}

impl Translator {
    pub fn new() -> Self {
        Translator::default()
    }

    pub fn js(&mut self, phi: &Formula) -> TreeFormula {
        let f = self.translate(phi).expect("cycle count descends at every snip");
        TreeFormula::from_formula(f).expect("translation output is acyclic")
    }

    /// Translation of every vertex of `phi`, in vertex order.
    pub fn js_table(&mut self, phi: &Formula) -> Vec<Formula> {
        self.table(phi).expect("cycle count descends at every snip")
    }

    fn translate(&mut self, phi: &Formula) -> Result<Formula> {
        if phi.is_acyclic() {
            return Ok(phi.clone());
        }
        let key = phi.canon();
        if let Some(f) = self.memo.get(&key) {
            return Ok(f.clone());
        }
        let table = self.table(phi)?;
        let out = table[phi.root()].clone();
        self.memo.insert(key, out.clone());
        Ok(out)
    }

    fn table(&mut self, phi: &Formula) -> Result<Vec<Formula>> {
        let g = phi.graph();
        let guard: GuardSet = phi.cycle_box_occurrences();
        let count = phi.simple_cycle_count();
        let top = Formula::top();
        g.try_guard_fold(
            &guard,
            |a| -> Result<Formula> {
                let snipped = phi.subformula(a)?.snip_subst(&top);
                let c = snipped.simple_cycle_count();
                if c >= count {
                    return Err(Error::Internal(format!(
                        "cycle count did not descend at vertex {a}: {c} >= {count}"
                    )));
                }
                self.translate(&snipped)
            },
            |_, label, kids: &[Formula]| {
                let refs: Vec<&Formula> = kids.iter().collect();
                Formula::mk(label.clone(), &refs)
            },
        )
    }
}

pub fn js(phi: &Formula) -> TreeFormula {
    Translator::new().js(phi)
}

/// The translation at vertex `a`, i.e. of the subformula generated by `a`.
pub fn js_star(phi: &Formula, a: usize) -> Result<TreeFormula> {
    Ok(js(&phi.subformula(a)?))
}

pub fn js_table(phi: &Formula) -> Vec<Formula> {
    Translator::new().js_table(phi)
}

/// A certified local translation: every defining equation holds in GL.
#[derive(Debug, Clone)]
pub struct LocalTranslation {
    pub source: Formula,
    pub values: BTreeMap<usize, TreeFormula>,
}

pub fn certify_local_translation(phi: &Formula) -> Result<LocalTranslation> {
    let g = phi.graph();
    let table = js_table(phi);
    for a in g.vertices() {
        let label = g.label(a);
        let expected = match label {
            Label::Top | Label::Bot | Label::Var(_) => Formula::leaf(label.clone()),
            _ => {
                let kids: Vec<&Formula> = g.succ(a).iter().map(|&b| &table[b]).collect();
                Formula::mk(label.clone(), &kids)?
            }
        };
        if !gl::gl_equiv(&table[a], &expected)? {
            return Err(Error::Certification {
                vertex: a,
                detail: format!("{} is not GL-equivalent to {}", table[a], expected),
            });
        }
    }
    let values = table
        .into_iter()
        .enumerate()
        .map(|(a, f)| (a, TreeFormula::from_formula(f).expect("acyclic")))
        .collect();
    Ok(LocalTranslation {
        source: phi.clone(),
        values,
    })
}

/// `js(fix p. phi)`: a GL fixed point of `phi` in `p` that does not mention `p`.
pub fn explicit_fixed_point(p: &Var, phi: &Formula) -> Result<TreeFormula> {
    Ok(js(&Formula::fix_point(p, phi)?))
}

/// GL° provability via `GL |- js(phi)`.
pub fn glcirc_decide(phi: &Formula) -> GlVerdict {
    gl::gl_decide(&js(phi))
}

/// Removes `true` by absorption: `true /\ x = x`, `true \/ x = true`,
/// `x -> true = true`, `true -> x = x`, `[]true = true`, `~true = false`.
pub fn simplify_top(phi: &TreeFormula) -> TreeFormula {
    let f = phi.formula();
    let g = f.graph();
    let vals = g.guard_fold(&GuardSet::new(), |_| unreachable!("empty guard"), |_, label, kids: &[Formula]| {
        let is_top = |x: &Formula| *x.root_label() == Label::Top;
        match label {
            Label::And if is_top(&kids[0]) => kids[1].clone(),
            Label::And if is_top(&kids[1]) => kids[0].clone(),
            Label::Or if is_top(&kids[0]) || is_top(&kids[1]) => Formula::top(),
            Label::Imp if is_top(&kids[1]) => Formula::top(),
            Label::Imp if is_top(&kids[0]) => kids[1].clone(),
            Label::Box if is_top(&kids[0]) => Formula::top(),
            Label::Not if is_top(&kids[0]) => Formula::bot(),
            _ => {
                let refs: Vec<&Formula> = kids.iter().collect();
                Formula::mk(label.clone(), &refs).expect("arity preserved")
            }
        }
    });
    let out = vals.expect("tree formulas are acyclic")[g.root()].clone();
    TreeFormula::from_formula(out).expect("acyclic")
}
