//! Pointed, labeled graphs with ordered successors.
//!
//! Every vertex is reachable from the root and vertex indices are dense.
//! Construction helpers that take arbitrary vertex tables ([`LabeledGraph::restrict`])
//! keep only the part reachable from the chosen root and renumber it in
//! depth-first preorder, which is also the canonical numbering used by
//! [`LabeledGraph::canon`].

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Debug;
use std::hash::Hash;

use thiserror::Error;

/// A vertex label with a fixed arity.
pub trait Symbol: Clone + Eq + Hash + Ord + Debug {
    fn arity(&self) -> usize;
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range (graph has {len} vertices)")]
    InvalidVertex { vertex: usize, len: usize },
    #[error("vertex {vertex} has {found} successors but its label has arity {expected}")]
    Arity {
        vertex: usize,
        expected: usize,
        found: usize,
    },
    #[error("vertex {vertex} is not reachable from the root")]
    Unreachable { vertex: usize },
    #[error("labels and successor lists differ in length ({labels} vs {succ})")]
    Shape { labels: usize, succ: usize },
    #[error("graph is empty")]
    Empty,
    #[error("guard violation: vertex {vertex} lies on a cycle that avoids the guard")]
    GuardViolation { vertex: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabeledGraph<L> {
    root: usize,
    labels: Vec<L>,
    succ: Vec<Vec<usize>>,
}

/// A set of vertices meant to meet every cycle.
pub type GuardSet = BTreeSet<usize>;

impl<L: Symbol> LabeledGraph<L> {
    /// Validates a graph as given, keeping its vertex numbering.
    pub fn new(root: usize, labels: Vec<L>, succ: Vec<Vec<usize>>) -> Result<Self, GraphError> {
        check_tables(&labels, &succ)?;
        if root >= labels.len() {
            return Err(GraphError::InvalidVertex {
                vertex: root,
                len: labels.len(),
            });
        }
        let g = LabeledGraph { root, labels, succ };
        let reach = g.reachable_from(root);
        if let Some(v) = reach.iter().position(|r| !r) {
            return Err(GraphError::Unreachable { vertex: v });
        }
        Ok(g)
    }

    /// Builds the graph generated by `root` inside arbitrary vertex tables,
    /// renumbered in depth-first preorder.
    pub fn restrict(labels: &[L], succ: &[Vec<usize>], root: usize) -> Result<Self, GraphError> {
        check_tables(labels, succ)?;
        if root >= labels.len() {
            return Err(GraphError::InvalidVertex {
                vertex: root,
                len: labels.len(),
            });
        }
        Ok(restrict_unchecked(labels, succ, root))
    }

    /// Single vertex graph with a nullary label.
    pub fn leaf(label: L) -> Self {
        debug_assert_eq!(label.arity(), 0);
        LabeledGraph {
            root: 0,
            labels: vec![label],
            succ: vec![Vec::new()],
        }
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, v: usize) -> &L {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[L] {
        &self.labels
    }

    pub fn succ(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn successors(&self) -> &[Vec<usize>] {
        &self.succ
    }

    pub fn vertices(&self) -> std::ops::Range<usize> {
        0..self.labels.len()
    }

    fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v < self.len() {
            Ok(())
        } else {
            Err(GraphError::InvalidVertex {
                vertex: v,
                len: self.len(),
            })
        }
    }

    fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for &w in &self.succ[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// The subgraph generated by `a`, rooted at `a` and renumbered densely.
    pub fn subgraph_at(&self, a: usize) -> Result<Self, GraphError> {
        self.check_vertex(a)?;
        Ok(restrict_unchecked(&self.labels, &self.succ, a))
    }

    /// Depth-first preorder renumbering from the root. Two graphs are
    /// isomorphic iff their canonical forms are equal.
    pub fn canon(&self) -> Self {
        restrict_unchecked(&self.labels, &self.succ, self.root)
    }

    pub fn isomorphic(&self, other: &Self) -> bool {
        self.canon() == other.canon()
    }

    /// Vertices of the quotient by the largest auto-bisimulation.
    pub fn minimize(&self) -> Self {
        let classes = refine(&[self]);
        let class_of = &classes[0];
        let k = class_of.iter().copied().max().map_or(0, |m| m + 1);
        let mut rep = vec![usize::MAX; k];
        for (v, &c) in class_of.iter().enumerate() {
            if rep[c] == usize::MAX {
                rep[c] = v;
            }
        }
        let labels: Vec<L> = rep.iter().map(|&v| self.labels[v].clone()).collect();
        let succ: Vec<Vec<usize>> = rep
            .iter()
            .map(|&v| self.succ[v].iter().map(|&w| class_of[w]).collect())
            .collect();
        restrict_unchecked(&labels, &succ, class_of[self.root])
    }

    /// Vertices lying on at least one cycle.
    pub fn cycle_vertices(&self) -> Vec<bool> {
        let comp = strongly_connected(&self.succ, &vec![true; self.len()]);
        let mut size = HashMap::new();
        for &c in &comp {
            *size.entry(c).or_insert(0usize) += 1;
        }
        (0..self.len())
            .map(|v| size[&comp[v]] > 1 || self.succ[v].contains(&v))
            .collect()
    }

    /// Number of cycles, each counted once as a vertex set.
    pub fn simple_cycle_count(&self) -> usize {
        let mut sets: HashSet<Vec<usize>> = HashSet::new();
        elementary_circuits(&self.succ, |circuit| {
            let mut set = circuit.to_vec();
            set.sort_unstable();
            sets.insert(set);
        });
        sets.len()
    }

    pub fn is_acyclic(&self) -> bool {
        self.guard_order(&GuardSet::new()).is_ok()
    }

    /// True iff every cycle meets `guard`.
    pub fn is_guard(&self, guard: &GuardSet) -> bool {
        self.guard_order(guard).is_ok()
    }

    /// An order of all vertices in which every vertex outside the guard comes
    /// after its successors. Guard vertices are treated as leaves.
    pub fn guard_order(&self, guard: &GuardSet) -> Result<Vec<usize>, GraphError> {
        const NEW: u8 = 0;
        const OPEN: u8 = 1;
        const DONE: u8 = 2;
        let n = self.len();
        let mut state = vec![NEW; n];
        let mut order = Vec::with_capacity(n);
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for start in 0..n {
            if state[start] != NEW {
                continue;
            }
            stack.push((start, 0));
            state[start] = OPEN;
            while let Some(&mut (v, ref mut next)) = stack.last_mut() {
                let kids: &[usize] = if guard.contains(&v) { &[] } else { &self.succ[v] };
                if *next < kids.len() {
                    let w = kids[*next];
                    *next += 1;
                    match state[w] {
                        NEW => {
                            state[w] = OPEN;
                            stack.push((w, 0));
                        }
                        OPEN => return Err(GraphError::GuardViolation { vertex: w }),
                        _ => {}
                    }
                } else {
                    state[v] = DONE;
                    order.push(v);
                    stack.pop();
                }
            }
        }
        Ok(order)
    }

    /// Guard recursion: the unique `H` with `H(a) = base(a)` on the guard and
    /// `H(a) = step(a, label(a), H(S_0 a), ...)` elsewhere.
    pub fn guard_fold<T: Clone>(
        &self,
        guard: &GuardSet,
        mut base: impl FnMut(usize) -> T,
        mut step: impl FnMut(usize, &L, &[T]) -> T,
    ) -> Result<Vec<T>, GraphError> {
        let r: Result<Vec<T>, GraphError> =
            self.try_guard_fold(guard, |a| Ok(base(a)), |a, l, xs| Ok(step(a, l, xs)));
        r
    }

    /// Fallible variant of [`guard_fold`](Self::guard_fold).
    pub fn try_guard_fold<T: Clone, E: From<GraphError>>(
        &self,
        guard: &GuardSet,
        mut base: impl FnMut(usize) -> Result<T, E>,
        mut step: impl FnMut(usize, &L, &[T]) -> Result<T, E>,
    ) -> Result<Vec<T>, E> {
        for &g in guard {
            self.check_vertex(g)?;
        }
        let order = self.guard_order(guard)?;
        let mut values: Vec<Option<T>> = vec![None; self.len()];
        for &g in guard {
            values[g] = Some(base(g)?);
        }
        let mut args = Vec::new();
        for v in order {
            if guard.contains(&v) {
                continue;
            }
            args.clear();
            for &w in &self.succ[v] {
                args.push(values[w].clone().expect("successor evaluated first"));
            }
            values[v] = Some(step(v, &self.labels[v], &args)?);
        }
        Ok(values.into_iter().map(|x| x.expect("all vertices visited")).collect())
    }
}

fn check_tables<L: Symbol>(labels: &[L], succ: &[Vec<usize>]) -> Result<(), GraphError> {
    if labels.len() != succ.len() {
        return Err(GraphError::Shape {
            labels: labels.len(),
            succ: succ.len(),
        });
    }
    if labels.is_empty() {
        return Err(GraphError::Empty);
    }
    for (v, (l, s)) in labels.iter().zip(succ).enumerate() {
        if l.arity() != s.len() {
            return Err(GraphError::Arity {
                vertex: v,
                expected: l.arity(),
                found: s.len(),
            });
        }
        if let Some(&w) = s.iter().find(|&&w| w >= labels.len()) {
            return Err(GraphError::InvalidVertex {
                vertex: w,
                len: labels.len(),
            });
        }
    }
    Ok(())
}

fn restrict_unchecked<L: Symbol>(labels: &[L], succ: &[Vec<usize>], root: usize) -> LabeledGraph<L> {
    let mut index = vec![usize::MAX; labels.len()];
    let mut order = Vec::new();
    // Preorder: a vertex is numbered when first reached, children in order.
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        if index[v] != usize::MAX {
            continue;
        }
        index[v] = order.len();
        order.push(v);
        for &w in succ[v].iter().rev() {
            if index[w] == usize::MAX {
                stack.push(w);
            }
        }
    }
    LabeledGraph {
        root: 0,
        labels: order.iter().map(|&v| labels[v].clone()).collect(),
        succ: order
            .iter()
            .map(|&v| succ[v].iter().map(|&w| index[w]).collect())
            .collect(),
    }
}

/// The largest bisimulation between two graphs, stored as a partition of
/// their disjoint union.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bisimulation {
    left: Vec<usize>,
    right: Vec<usize>,
}

impl Bisimulation {
    pub fn contains(&self, a: usize, b: usize) -> bool {
        a < self.left.len() && b < self.right.len() && self.left[a] == self.right[b]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.left.iter().enumerate().flat_map(move |(a, &ca)| {
            self.right
                .iter()
                .enumerate()
                .filter(move |&(_, &cb)| cb == ca)
                .map(move |(b, _)| (a, b))
        })
    }

    pub fn left_class(&self, a: usize) -> usize {
        self.left[a]
    }

    pub fn right_class(&self, b: usize) -> usize {
        self.right[b]
    }
}

/// Moore-style partition refinement over the disjoint union of `graphs`.
/// Returns the class of every vertex, per graph.
fn refine<L: Symbol>(graphs: &[&LabeledGraph<L>]) -> Vec<Vec<usize>> {
    let mut offsets = Vec::with_capacity(graphs.len());
    let mut total = 0;
    for g in graphs {
        offsets.push(total);
        total += g.len();
    }
    let vertex = |i: usize| -> (usize, usize) {
        let gi = offsets.partition_point(|&o| o <= i) - 1;
        (gi, i - offsets[gi])
    };
    let mut class = vec![0usize; total];
    let mut ids: HashMap<&L, usize> = HashMap::new();
    for i in 0..total {
        let (gi, v) = vertex(i);
        let next = ids.len();
        class[i] = *ids.entry(&graphs[gi].labels[v]).or_insert(next);
    }
    let mut count = ids.len();
    loop {
        let mut sigs: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        let mut next_class = vec![0usize; total];
        for i in 0..total {
            let (gi, v) = vertex(i);
            let kids: Vec<usize> = graphs[gi].succ[v]
                .iter()
                .map(|&w| class[offsets[gi] + w])
                .collect();
            let fresh = sigs.len();
            next_class[i] = *sigs.entry((class[i], kids)).or_insert(fresh);
        }
        let new_count = sigs.len();
        class = next_class;
        if new_count == count {
            break;
        }
        count = new_count;
    }
    graphs
        .iter()
        .zip(&offsets)
        .map(|(g, &o)| class[o..o + g.len()].to_vec())
        .collect()
}

pub fn max_bisimulation<L: Symbol>(g: &LabeledGraph<L>, h: &LabeledGraph<L>) -> Bisimulation {
    let mut classes = refine(&[g, h]);
    let right = classes.pop().expect("two graphs");
    let left = classes.pop().expect("two graphs");
    Bisimulation { left, right }
}

pub fn bisimilar<L: Symbol>(g: &LabeledGraph<L>, h: &LabeledGraph<L>) -> bool {
    max_bisimulation(g, h).contains(g.root, h.root)
}

/// Tarjan's algorithm restricted to vertices with `alive[v]`; dead vertices get
/// component `usize::MAX`.
fn strongly_connected(succ: &[Vec<usize>], alive: &[bool]) -> Vec<usize> {
    let n = succ.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    let mut counter = 0;
    let mut ncomp = 0;
    for start in 0..n {
        if !alive[start] || index[start] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(start, 0)];
        index[start] = counter;
        low[start] = counter;
        counter += 1;
        stack.push(start);
        on_stack[start] = true;
        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            if *next < succ[v].len() {
                let w = succ[v][*next];
                *next += 1;
                if !alive[w] {
                    continue;
                }
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp[w] = ncomp;
                        if w == v {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    comp
}

/// Johnson's elementary-circuit enumeration over the successor relation
/// (parallel edges collapsed). Each circuit is reported once, starting at its
/// least vertex.
pub fn elementary_circuits(succ: &[Vec<usize>], mut visit: impl FnMut(&[usize])) {
    let n = succ.len();
    let adj: Vec<Vec<usize>> = succ
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();

    struct Search<'a> {
        adj: &'a [Vec<usize>],
        allowed: Vec<bool>,
        blocked: Vec<bool>,
        blist: Vec<Vec<usize>>,
        path: Vec<usize>,
    }

    impl Search<'_> {
        fn unblock(&mut self, u: usize) {
            let mut work = vec![u];
            while let Some(x) = work.pop() {
                if self.blocked[x] {
                    self.blocked[x] = false;
                    work.append(&mut self.blist[x]);
                }
            }
        }

        fn circuit(&mut self, v: usize, s: usize, visit: &mut dyn FnMut(&[usize])) -> bool {
            let mut found = false;
            self.path.push(v);
            self.blocked[v] = true;
            let adj = self.adj;
            for &w in &adj[v] {
                if !self.allowed[w] {
                    continue;
                }
                if w == s {
                    visit(&self.path);
                    found = true;
                } else if !self.blocked[w] && self.circuit(w, s, visit) {
                    found = true;
                }
            }
            if found {
                self.unblock(v);
            } else {
                for &w in &adj[v] {
                    if self.allowed[w] && !self.blist[w].contains(&v) {
                        self.blist[w].push(v);
                    }
                }
            }
            self.path.pop();
            found
        }
    }

    let mut search = Search {
        adj: &adj,
        allowed: vec![false; n],
        blocked: vec![false; n],
        blist: vec![Vec::new(); n],
        path: Vec::new(),
    };
    for s in 0..n {
        let alive: Vec<bool> = (0..n).map(|v| v >= s).collect();
        let comp = strongly_connected(&adj, &alive);
        let members: Vec<bool> = (0..n).map(|v| v >= s && comp[v] == comp[s]).collect();
        let nontrivial = members.iter().filter(|&&m| m).count() > 1 || adj[s].contains(&s);
        if !nontrivial {
            continue;
        }
        search.allowed = members;
        for v in 0..n {
            search.blocked[v] = false;
            search.blist[v].clear();
        }
        search.circuit(s, s, &mut visit);
    }
}
