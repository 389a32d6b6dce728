//! Decision procedure for GL on acyclic formulas.
//!
//! A signed tableau over hash-consed terms. Propositional rules branch;
//! atoms are variables and boxes. Each `F []psi` in a saturated branch needs
//! a successor containing `F psi`, `T []psi` and `T chi, T []chi` for every
//! `T []chi` of the branch. The set of true boxes grows strictly along every
//! path, so the search terminates. Open tableaux become finite transitive
//! irreflexive countermodels.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::formula::{Formula, Label, TreeFormula, Var};
use crate::graph::GuardSet;
use crate::kripke::{self, forward_pairs, KripkeModel, Refuter};

type Id = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Term {
    Top,
    Bot,
    Var(u32),
    Not(Id),
    Box(Id),
    And(Id, Id),
    Or(Id, Id),
    Imp(Id, Id),
}

type Signed = (Id, bool);

/// Worlds of an open tableau, shared where memoized.
#[derive(Debug, Clone)]
struct World {
    true_vars: Vec<u32>,
    children: Vec<usize>,
}

#[derive(Default)]
struct Tableau {
    terms: Vec<Term>,
    intern: HashMap<Term, Id>,
    vars: Vec<Var>,
    var_ids: HashMap<Var, u32>,
    memo: HashMap<Vec<Signed>, Option<usize>>,
    worlds: Vec<World>,
}

impl Tableau {
    fn mk(&mut self, t: Term) -> Id {
        if let Some(&id) = self.intern.get(&t) {
            return id;
        }
        let id = self.terms.len() as Id;
        self.terms.push(t);
        self.intern.insert(t, id);
        id
    }

    fn var(&mut self, v: &Var) -> u32 {
        if let Some(&i) = self.var_ids.get(v) {
            return i;
        }
        let i = self.vars.len() as u32;
        self.vars.push(v.clone());
        self.var_ids.insert(v.clone(), i);
        i
    }

    fn add(&mut self, phi: &Formula) -> Result<Id> {
        if !phi.is_acyclic() {
            return Err(Error::Cyclic);
        }
        let g = phi.graph();
        let ids = g.guard_fold(&GuardSet::new(), |_| 0, |_, label, kids: &[Id]| {
            let t = match label {
                Label::Top => Term::Top,
                Label::Bot => Term::Bot,
                Label::Var(v) => Term::Var(self.var(v)),
                Label::Not => Term::Not(kids[0]),
                Label::Box => Term::Box(kids[0]),
                Label::And => Term::And(kids[0], kids[1]),
                Label::Or => Term::Or(kids[0], kids[1]),
                Label::Imp => Term::Imp(kids[0], kids[1]),
            };
            self.mk(t)
        })?;
        Ok(ids[g.root()])
    }

    /// A world satisfying the signed set, if one exists.
    fn sat(&mut self, mut set: Vec<Signed>) -> Option<usize> {
        set.sort_unstable();
        set.dedup();
        if let Some(r) = self.memo.get(&set) {
            return *r;
        }
        let r = self.branch(set.clone(), BTreeSet::new());
        self.memo.insert(set, r);
        r
    }

    fn branch(&mut self, mut todo: Vec<Signed>, mut seen: BTreeSet<Signed>) -> Option<usize> {
        while let Some((f, s)) = todo.pop() {
            if !seen.insert((f, s)) {
                continue;
            }
            if seen.contains(&(f, !s)) {
                return None;
            }
            match (self.terms[f as usize], s) {
                (Term::Top, false) | (Term::Bot, true) => return None,
                (Term::Top, true) | (Term::Bot, false) | (Term::Var(_), _) | (Term::Box(_), _) => {}
                (Term::Not(a), s) => todo.push((a, !s)),
                (Term::And(a, b), true) => todo.extend([(a, true), (b, true)]),
                (Term::Or(a, b), false) => todo.extend([(a, false), (b, false)]),
                (Term::Imp(a, b), false) => todo.extend([(a, true), (b, false)]),
                (Term::And(a, b), false) => return self.split(todo, seen, [(a, false), (b, false)]),
                (Term::Or(a, b), true) => return self.split(todo, seen, [(a, true), (b, true)]),
                (Term::Imp(a, b), true) => return self.split(todo, seen, [(a, false), (b, true)]),
            }
        }
        let boxed: Vec<Id> = seen
            .iter()
            .filter_map(|&(f, s)| match self.terms[f as usize] {
                Term::Box(c) if s => Some(c),
                _ => None,
            })
            .collect();
        let demands: Vec<(Id, Id)> = seen
            .iter()
            .filter_map(|&(f, s)| match self.terms[f as usize] {
                Term::Box(c) if !s => Some((f, c)),
                _ => None,
            })
            .collect();
        let mut children = Vec::with_capacity(demands.len());
        for (bf, c) in demands {
            let mut set = vec![(c, false), (bf, true)];
            for &chi in &boxed {
                let b = self.mk(Term::Box(chi));
                set.push((chi, true));
                set.push((b, true));
            }
            children.push(self.sat(set)?);
        }
        let true_vars = seen
            .iter()
            .filter_map(|&(f, s)| match self.terms[f as usize] {
                Term::Var(v) if s => Some(v),
                _ => None,
            })
            .collect();
        self.worlds.push(World { true_vars, children });
        Some(self.worlds.len() - 1)
    }

    fn split(&mut self, todo: Vec<Signed>, seen: BTreeSet<Signed>, alts: [Signed; 2]) -> Option<usize> {
        for alt in alts {
            let mut t = todo.clone();
            t.push(alt);
            if let Some(w) = self.branch(t, seen.clone()) {
                return Some(w);
            }
        }
        None
    }

    /// Worlds reachable from `root` in preorder, related by reachability.
    fn model(&self, root: usize, vars: &BTreeSet<Var>) -> KripkeModel {
        let mut order = Vec::new();
        let mut index = HashMap::new();
        let mut stack = vec![root];
        while let Some(w) = stack.pop() {
            if index.contains_key(&w) {
                continue;
            }
            index.insert(w, order.len());
            order.push(w);
            for &c in self.worlds[w].children.iter().rev() {
                stack.push(c);
            }
        }
        let mut rel = BTreeSet::new();
        for &w in &order {
            let mut seen = BTreeSet::new();
            let mut st: Vec<usize> = self.worlds[w].children.clone();
            while let Some(u) = st.pop() {
                if seen.insert(u) {
                    st.extend(self.worlds[u].children.iter().copied());
                }
            }
            for u in seen {
                rel.insert((index[&w], index[&u]));
            }
        }
        let valuation = vars.iter().map(|v| {
            let row = order
                .iter()
                .map(|&w| {
                    self.var_ids
                        .get(v)
                        .is_some_and(|i| self.worlds[w].true_vars.contains(i))
                })
                .collect();
            (v.clone(), row)
        });
        KripkeModel::from_table(order.len(), rel, valuation.collect::<BTreeMap<_, _>>())
            .expect("tableau worlds form a finite tree-like dag")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlVerdict {
    pub provable: bool,
    /// A transitive irreflexive model and a world refuting the formula.
    pub witness: Option<(KripkeModel, usize)>,
}

/// Decides GL-provability of an acyclic formula; countermodels are checked
/// with the Kripke evaluator before they are returned.
pub fn gl_decide_formula(phi: &Formula) -> Result<GlVerdict> {
    let mut t = Tableau::default();
    let id = t.add(phi)?;
    match t.sat(vec![(id, false)]) {
        None => Ok(GlVerdict {
            provable: true,
            witness: None,
        }),
        Some(root) => {
            let m = t.model(root, &phi.vars());
            if !m.is_transitive() || kripke::forces(&m, 0, phi)? {
                return Err(Error::Internal(format!("tableau countermodel does not refute {phi}")));
            }
            Ok(GlVerdict {
                provable: false,
                witness: Some((m, 0)),
            })
        }
    }
}

pub fn gl_decide(phi: &TreeFormula) -> GlVerdict {
    gl_decide_formula(phi.formula()).expect("tree formulas are acyclic and countermodels verify")
}

pub fn gl_provable(phi: &Formula) -> Result<bool> {
    Ok(gl_decide_formula(phi)?.provable)
}

/// `GL |- phi <-> psi`.
pub fn gl_equiv(phi: &Formula, psi: &Formula) -> Result<bool> {
    gl_provable(&Formula::iff(phi, psi))
}

/// Transitive subsets of the forward pairs of an `n`-world frame.
pub fn transitive_frames(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs = forward_pairs(n);
    (0..1u64 << pairs.len())
        .map(|mask| {
            pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &p)| p)
                .collect::<Vec<_>>()
        })
        .filter(|rel| {
            rel.iter()
                .all(|&(a, b)| rel.iter().filter(|&&(c, _)| c == b).all(|&(_, d)| rel.contains(&(a, d))))
        })
        .collect()
}

/// Searches every transitive irreflexive frame with at most `k` worlds and
/// every valuation for a refutation of `phi`.
pub fn brute_force_validity(phi: &Formula, k: usize) -> Option<(KripkeModel, usize)> {
    let refuter = Refuter::new(phi);
    (1..=k).find_map(|n| {
        transitive_frames(n)
            .iter()
            .find_map(|rel| refuter.refute(n, rel))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn provable(s: &str) -> bool {
        gl_provable(&f(s)).unwrap()
    }

    #[test]
    fn decide_examples() {
        assert!(provable("[]p -> [][]p"));
        assert!(provable("[]([]q -> q) -> []q"));
        assert!(provable("[](p -> q) -> ([]p -> []q)"));
        assert!(provable("[]true"));
        assert!(!provable("[]p -> p"));
        assert!(!provable("~[]false"));
        let v = gl_decide_formula(&f("p -> []p")).unwrap();
        assert!(!v.provable);
        let (m, w) = v.witness.unwrap();
        assert!(!kripke::forces(&m, w, &f("p -> []p")).unwrap());
        assert!(m.is_transitive());
        assert_eq!(m.worlds(), 2);
    }

    #[test]
    fn equiv_examples() {
        assert!(gl_equiv(&f("[]true"), &f("true")).unwrap());
        assert!(!gl_equiv(&f("p"), &f("q")).unwrap());
        assert!(gl_equiv(&f("~[]~true"), &f("~[]false")).unwrap());
    }

    #[test]
    fn cyclic_input_rejected() {
        assert!(matches!(gl_decide_formula(&f("fix p. []p")), Err(Error::Cyclic)));
    }

    #[test]
    fn brute_force_examples() {
        assert!(brute_force_validity(&f("true"), 3).is_none());
        assert!(brute_force_validity(&f("p -> []p"), 2).is_some());
        assert!(brute_force_validity(&f("[]([]p -> p) -> []p"), 4).is_none());
        assert_eq!(transitive_frames(3).len(), 7);
    }

    #[test]
    fn agrees_with_brute_force_on_samples() {
        for s in [
            "[]p \\/ []~p",
            "[](p \\/ q) -> []p \\/ []q",
            "[][]false -> []false",
            "~[]false -> ~[]~[]false",
            "[]([]p -> p) -> []p",
            "[](p /\\ []p -> q) \\/ [](q /\\ []q -> p)",
        ] {
            let phi = f(s);
            assert_eq!(gl_provable(&phi).unwrap(), brute_force_validity(&phi, 4).is_none(), "{s}");
        }
    }
}
