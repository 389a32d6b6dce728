//! Cyclic modal formulas: labeled graphs whose box occurrences guard every cycle.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fixpoint::EquationSystem;
use crate::graph::{self, GuardSet, LabeledGraph, Symbol};

/// A propositional variable, compared by name.
///
/// Names starting with `_` followed by digits form the reserved namespace used
/// for fresh variables.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Self {
        Var(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// The index `k` of a reserved name `_k`.
    pub fn reserved_index(&self) -> Option<usize> {
        self.0.strip_prefix('_').and_then(|d| {
            if !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()) {
                d.parse().ok()
            } else {
                None
            }
        })
    }

    pub fn reserved(k: usize) -> Self {
        Var::new(&format!("_{k}"))
    }

    pub fn is_reserved(&self) -> bool {
        self.reserved_index().is_some()
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Top,
    Bot,
    Var(Var),
    Not,
    Box,
    And,
    Or,
    Imp,
}

impl Symbol for Label {
    fn arity(&self) -> usize {
        match self {
            Label::Top | Label::Bot | Label::Var(_) => 0,
            Label::Not | Label::Box => 1,
            Label::And | Label::Or | Label::Imp => 2,
        }
    }
}

impl Label {
    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Label::Var(v) => Some(v),
            _ => None,
        }
    }

    /// Truth function of a non-modal label.
    pub fn apply(&self, args: &[bool]) -> bool {
        match self {
            Label::Top => true,
            Label::Bot => false,
            Label::Not => !args[0],
            Label::And => args[0] && args[1],
            Label::Or => args[0] || args[1],
            Label::Imp => !args[0] || args[1],
            Label::Var(_) | Label::Box => panic!("no truth function for {self:?}"),
        }
    }
}

/// Fresh variables are allocated from the reserved namespace, above every
/// reserved index already in use.
#[derive(Debug, Clone)]
pub struct FreshVars {
    next: usize,
}

impl FreshVars {
    pub fn avoiding<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> Self {
        let next = formulas
            .into_iter()
            .flat_map(|f| f.graph().labels().iter())
            .filter_map(|l| l.as_var().and_then(Var::reserved_index))
            .map(|k| k + 1)
            .max()
            .unwrap_or(0);
        FreshVars { next }
    }

    pub fn avoid(&mut self, f: &Formula) {
        let other = FreshVars::avoiding([f]);
        self.next = self.next.max(other.next);
    }

    pub fn next_var(&mut self) -> Var {
        let v = Var::reserved(self.next);
        self.next += 1;
        v
    }
}

/// A formula: a labeled graph whose box occurrences form a guard.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Formula(LabeledGraph<Label>);

/// An acyclic formula in which every vertex except the root has exactly one
/// incoming edge.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeFormula(Formula);

/// Simultaneous substitution of formulas for variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Substitution(BTreeMap<Var, Formula>);

impl Substitution {
    pub fn new() -> Self {
        Substitution(BTreeMap::new())
    }

    pub fn single(v: Var, f: Formula) -> Self {
        let mut s = Substitution::new();
        s.0.insert(v, f);
        s
    }

    pub fn insert(&mut self, v: Var, f: Formula) -> Option<Formula> {
        self.0.insert(v, f)
    }

    pub fn get(&self, v: &Var) -> Option<&Formula> {
        self.0.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Formula)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.0.keys()
    }

    /// Union of two substitutions with disjoint domains.
    pub fn star(&self, other: &Substitution) -> Result<Substitution> {
        let mut out = self.clone();
        for (v, f) in other.iter() {
            if out.0.insert(v.clone(), f.clone()).is_some() {
                return Err(Error::Composition { var: v.clone() });
            }
        }
        Ok(out)
    }

    /// Applies `tau` to every binding.
    pub fn then(&self, tau: &Substitution) -> Substitution {
        Substitution(
            self.0
                .iter()
                .map(|(v, f)| (v.clone(), f.substitute(tau)))
                .collect(),
        )
    }
}

impl FromIterator<(Var, Formula)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Var, Formula)>>(iter: I) -> Self {
        Substitution(iter.into_iter().collect())
    }
}

pub fn star_compose(sigma: &Substitution, tau: &Substitution) -> Result<Substitution> {
    sigma.star(tau)
}

/// Vertex tables under construction; see [`Formula::from_tables`].
#[derive(Debug, Default, Clone)]
pub struct Builder {
    labels: Vec<Label>,
    succ: Vec<Vec<usize>>,
}

impl Builder {
    pub fn new() -> Self {
        Builder::default()
    }

    pub fn add(&mut self, label: Label, succ: Vec<usize>) -> usize {
        self.labels.push(label);
        self.succ.push(succ);
        self.labels.len() - 1
    }

    /// Appends a copy of `f` and returns the index of its root.
    pub fn embed(&mut self, f: &Formula) -> usize {
        let off = self.labels.len();
        let g = f.graph();
        for v in g.vertices() {
            self.labels.push(g.label(v).clone());
            self.succ.push(g.succ(v).iter().map(|w| w + off).collect());
        }
        off + g.root()
    }

    pub fn set_succ(&mut self, v: usize, succ: Vec<usize>) {
        self.succ[v] = succ;
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn finish(self, root: usize) -> Result<Formula> {
        Formula::from_tables(&self.labels, &self.succ, root)
    }
}

impl Formula {
    /// Wraps a graph after checking that its box occurrences form a guard.
    pub fn from_graph(g: LabeledGraph<Label>) -> Result<Self> {
        let boxes: GuardSet = g
            .vertices()
            .filter(|&v| *g.label(v) == Label::Box)
            .collect();
        if !g.is_guard(&boxes) {
            return Err(Error::Unguarded);
        }
        Ok(Formula(g))
    }

    /// The formula generated by `root` in arbitrary tables.
    pub fn from_tables(labels: &[Label], succ: &[Vec<usize>], root: usize) -> Result<Self> {
        Formula::from_graph(LabeledGraph::restrict(labels, succ, root)?)
    }

    pub fn graph(&self) -> &LabeledGraph<Label> {
        &self.0
    }

    pub fn root(&self) -> usize {
        self.0.root()
    }

    pub fn root_label(&self) -> &Label {
        self.0.label(self.0.root())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn leaf(label: Label) -> Self {
        Formula(LabeledGraph::leaf(label))
    }

    pub fn top() -> Self {
        Formula::leaf(Label::Top)
    }

    pub fn bot() -> Self {
        Formula::leaf(Label::Bot)
    }

    pub fn var(v: impl Into<Var>) -> Self {
        Formula::leaf(Label::Var(v.into()))
    }

    /// Disjoint sum of `children` below a fresh root labeled `label`.
    pub fn mk(label: Label, children: &[&Formula]) -> Result<Self> {
        if label.arity() != children.len() {
            return Err(Error::Structural(graph::GraphError::Arity {
                vertex: 0,
                expected: label.arity(),
                found: children.len(),
            }));
        }
        let mut b = Builder::new();
        let root = b.add(label, Vec::new());
        let kids = children.iter().map(|c| b.embed(c)).collect();
        b.set_succ(root, kids);
        b.finish(root)
    }

    fn mk_ok(label: Label, children: &[&Formula]) -> Self {
        Formula::mk(label, children).expect("arity matches and no cycle is created")
    }

    pub fn not(f: &Formula) -> Self {
        Formula::mk_ok(Label::Not, &[f])
    }

    pub fn boxed(f: &Formula) -> Self {
        Formula::mk_ok(Label::Box, &[f])
    }

    pub fn and(a: &Formula, b: &Formula) -> Self {
        Formula::mk_ok(Label::And, &[a, b])
    }

    pub fn or(a: &Formula, b: &Formula) -> Self {
        Formula::mk_ok(Label::Or, &[a, b])
    }

    pub fn imp(a: &Formula, b: &Formula) -> Self {
        Formula::mk_ok(Label::Imp, &[a, b])
    }

    /// `(a -> b) /\ (b -> a)`, sharing the copies of `a` and `b`.
    pub fn iff(a: &Formula, b: &Formula) -> Self {
        let mut bl = Builder::new();
        let ra = bl.embed(a);
        let rb = bl.embed(b);
        let ab = bl.add(Label::Imp, vec![ra, rb]);
        let ba = bl.add(Label::Imp, vec![rb, ra]);
        let root = bl.add(Label::And, vec![ab, ba]);
        bl.finish(root).expect("no new cycles")
    }

    /// Left-nested conjunction; `⊤` when empty.
    pub fn conj(items: &[Formula]) -> Self {
        let mut it = items.iter();
        match it.next() {
            None => Formula::top(),
            Some(first) => it.fold(first.clone(), |acc, f| Formula::and(&acc, f)),
        }
    }

    /// The formula generated by vertex `a`.
    pub fn subformula(&self, a: usize) -> Result<Formula> {
        Ok(Formula(self.0.subgraph_at(a)?))
    }

    /// The `i`-th immediate subformula of the root.
    pub fn child(&self, i: usize) -> Option<Formula> {
        let r = self.root();
        self.0
            .succ(r)
            .get(i)
            .map(|&w| Formula(self.0.subgraph_at(w).expect("valid vertex")))
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.0
            .labels()
            .iter()
            .filter_map(|l| l.as_var().cloned())
            .collect()
    }

    pub fn occurs(&self, p: &Var) -> bool {
        self.0
            .labels()
            .iter()
            .any(|l| matches!(l, Label::Var(v) if v == p))
    }

    pub fn bisimilar(&self, other: &Formula) -> bool {
        graph::bisimilar(&self.0, &other.0)
    }

    pub fn isomorphic(&self, other: &Formula) -> bool {
        self.0.isomorphic(&other.0)
    }

    pub fn minimize(&self) -> Formula {
        Formula(self.0.minimize())
    }

    pub fn canon(&self) -> Formula {
        Formula(self.0.canon())
    }

    pub fn simple_cycle_count(&self) -> usize {
        self.0.simple_cycle_count()
    }

    pub fn is_acyclic(&self) -> bool {
        self.0.is_acyclic()
    }

    /// True iff every path from the root to a `p`-occurrence passes a box.
    pub fn is_modalised(&self, p: &Var) -> bool {
        let g = &self.0;
        let mut seen = vec![false; g.len()];
        let mut stack = vec![g.root()];
        seen[g.root()] = true;
        while let Some(v) = stack.pop() {
            match g.label(v) {
                Label::Var(x) if x == p => return false,
                Label::Box => continue,
                _ => {}
            }
            for &w in g.succ(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        true
    }

    /// All box occurrences.
    pub fn box_occurrences(&self) -> GuardSet {
        self.0
            .vertices()
            .filter(|&v| *self.0.label(v) == Label::Box)
            .collect()
    }

    /// Box occurrences that lie on a cycle.
    pub fn cycle_box_occurrences(&self) -> GuardSet {
        let on_cycle = self.0.cycle_vertices();
        self.0
            .vertices()
            .filter(|&v| on_cycle[v] && *self.0.label(v) == Label::Box)
            .collect()
    }

    /// Identifies every `p`-vertex with the root.
    pub fn fix_point(p: &Var, phi: &Formula) -> Result<Formula> {
        if !phi.is_modalised(p) {
            return Err(Error::NotModalised { var: p.clone() });
        }
        if !phi.occurs(p) {
            return Ok(phi.clone());
        }
        let g = &phi.0;
        let target: Vec<usize> = g
            .vertices()
            .map(|v| match g.label(v) {
                Label::Var(x) if x == p => g.root(),
                _ => v,
            })
            .collect();
        let succ: Vec<Vec<usize>> = g
            .successors()
            .iter()
            .map(|s| s.iter().map(|&w| target[w]).collect())
            .collect();
        Formula::from_tables(g.labels(), &succ, g.root())
    }

    /// Simultaneous substitution: each `p`-vertex is identified with the root
    /// of a disjoint copy of `sigma(p)`.
    pub fn substitute(&self, sigma: &Substitution) -> Formula {
        if sigma.is_empty() {
            return self.clone();
        }
        let g = &self.0;
        let mut b = Builder::new();
        let base = b.embed(self) - g.root();
        let mut copies: BTreeMap<&Var, usize> = BTreeMap::new();
        for l in g.labels() {
            if let Label::Var(v) = l {
                if let Some(f) = sigma.get(v) {
                    if !copies.contains_key(v) {
                        let r = b.embed(f);
                        copies.insert(v, r);
                    }
                }
            }
        }
        let target = |w: usize| -> usize {
            match g.label(w) {
                Label::Var(v) => copies.get(v).copied().unwrap_or(base + w),
                _ => base + w,
            }
        };
        for v in g.vertices() {
            let s = g.succ(v).iter().map(|&w| target(w)).collect();
            b.set_succ(base + v, s);
        }
        let root = target(g.root());
        b.finish(root).expect("substitution creates no unguarded cycle")
    }

    /// Redirects all incoming edges of the root to a fresh `p`-leaf, when the
    /// root lies on a cycle.
    pub fn snip(&self, p: &Var) -> Result<Formula> {
        if self.occurs(p) {
            return Err(Error::Occurs { var: p.clone() });
        }
        let g = &self.0;
        let r = g.root();
        if !g.cycle_vertices()[r] {
            return Ok(self.clone());
        }
        let mut labels = g.labels().to_vec();
        labels.push(Label::Var(p.clone()));
        let star = labels.len() - 1;
        let mut succ: Vec<Vec<usize>> = g
            .successors()
            .iter()
            .map(|s| s.iter().map(|&w| if w == r { star } else { w }).collect())
            .collect();
        succ.push(Vec::new());
        Formula::from_tables(&labels, &succ, r)
    }

    /// `snip(self, p)[p := psi]` for a fresh `p`.
    pub fn snip_subst(&self, psi: &Formula) -> Formula {
        let p = FreshVars::avoiding([self, psi]).next_var();
        self.snip(&p)
            .expect("fresh variable does not occur")
            .substitute(&Substitution::single(p, psi.clone()))
    }

    /// `fix p. [](self /\ p)` for a fresh `p`.
    pub fn box_bullet(&self) -> Formula {
        let p = FreshVars::avoiding([self]).next_var();
        let body = Formula::boxed(&Formula::and(self, &Formula::var(p.clone())));
        Formula::fix_point(&p, &body).expect("body is modalised in p")
    }

    /// `self /\ [*]self`.
    pub fn dot_box_bullet(&self) -> Formula {
        Formula::and(self, &self.box_bullet())
    }

    /// Fully unshares an acyclic formula.
    pub fn to_tree(&self) -> Result<TreeFormula> {
        if !self.is_acyclic() {
            return Err(Error::Cyclic);
        }
        let g = &self.0;
        let mut labels = Vec::new();
        let mut succ: Vec<Vec<usize>> = Vec::new();
        // explicit stack: (vertex, slot of the parent's successor to fill)
        let mut stack = vec![(g.root(), None::<(usize, usize)>)];
        while let Some((v, parent)) = stack.pop() {
            let id = labels.len();
            labels.push(g.label(v).clone());
            succ.push(vec![usize::MAX; g.succ(v).len()]);
            if let Some((pv, i)) = parent {
                succ[pv][i] = id;
            }
            for (i, &w) in g.succ(v).iter().enumerate().rev() {
                stack.push((w, Some((id, i))));
            }
        }
        Ok(TreeFormula(Formula::from_tables(&labels, &succ, 0)?))
    }

    pub fn extract_equations(&self) -> Extraction {
        let g = &self.0;
        let boxes = self.box_occurrences();
        let mut fresh = FreshVars::avoiding([self]);
        let box_vars: BTreeMap<usize, Var> = boxes.iter().map(|&a| (a, fresh.next_var())).collect();
        let values = g
            .guard_fold(
                &boxes,
                |a| Formula::var(box_vars[&a].clone()),
                |_, label, kids: &[Formula]| {
                    let refs: Vec<&Formula> = kids.iter().collect();
                    Formula::mk_ok(label.clone(), &refs)
                },
            )
            .expect("box occurrences guard every cycle");
        let to_tree = |f: &Formula| f.to_tree().expect("acyclic by guard recursion").into_formula();
        let mut system = EquationSystem::new();
        for (&a, q) in &box_vars {
            let body = Formula::boxed(&values[g.succ(a)[0]]);
            system
                .add(q.clone(), to_tree(&body))
                .expect("fresh unknowns are distinct");
        }
        Extraction {
            goal: values[g.root()].to_tree().expect("acyclic by guard recursion"),
            system,
            box_vars,
        }
    }

    pub fn wfl_reduction(&self) -> WflSequent {
        let ex = self.extract_equations();
        let hypotheses = ex
            .system
            .iter()
            .map(|(q, body)| Formula::iff(&Formula::var(q.clone()), body).dot_box_bullet())
            .collect();
        WflSequent {
            hypotheses,
            goal: ex.goal.into_formula(),
        }
    }

    /// Recognizes the image of the `[*]` desugaring: every cycle is a
    /// two-vertex `[]`/`/\` loop whose back edge is the second conjunct.
    pub fn in_box_bullet_language(&self) -> bool {
        let g = &self.0;
        let mut sets = Vec::new();
        graph::elementary_circuits(g.successors(), |c| sets.push(c.to_vec()));
        sets.iter().all(|c| {
            if c.len() != 2 {
                return false;
            }
            let (x, y) = (c[0], c[1]);
            let (b, a) = match (g.label(x), g.label(y)) {
                (Label::Box, Label::And) => (x, y),
                (Label::And, Label::Box) => (y, x),
                _ => return false,
            };
            g.succ(b)[0] == a && g.succ(a)[1] == b && g.succ(a)[0] != b
        })
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Formula({})", crate::syntax::render(self))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::render(self))
    }
}

impl TreeFormula {
    pub fn formula(&self) -> &Formula {
        &self.0
    }

    pub fn into_formula(self) -> Formula {
        self.0
    }

    /// Accepts `f` if it is already in tree form.
    pub fn from_formula(f: Formula) -> Result<Self> {
        if !f.is_acyclic() {
            return Err(Error::Cyclic);
        }
        let g = f.graph();
        let mut indeg = vec![0usize; g.len()];
        for s in g.successors() {
            for &w in s {
                indeg[w] += 1;
            }
        }
        if indeg.iter().enumerate().all(|(v, &d)| d == usize::from(v != g.root())) {
            Ok(TreeFormula(f))
        } else {
            f.to_tree()
        }
    }
}

impl fmt::Debug for TreeFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tree({})", crate::syntax::render(&self.0))
    }
}

impl fmt::Display for TreeFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Result of [`Formula::extract_equations`].
#[derive(Debug, Clone)]
pub struct Extraction {
    pub goal: TreeFormula,
    /// `q_a = [] E(S_0 a)` for every box occurrence `a`, in vertex order.
    pub system: EquationSystem,
    pub box_vars: BTreeMap<usize, Var>,
}

/// Hypotheses `⊡•(q_a <-> [] psi_a)` and the acyclic goal.
#[derive(Debug, Clone)]
pub struct WflSequent {
    pub hypotheses: Vec<Formula>,
    pub goal: Formula,
}

impl WflSequent {
    /// `(h_1 /\ ... /\ h_n) -> goal`
    pub fn as_implication(&self) -> Formula {
        Formula::imp(&Formula::conj(&self.hypotheses), &self.goal)
    }
}
