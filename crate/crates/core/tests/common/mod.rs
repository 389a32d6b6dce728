#![allow(dead_code)]

use std::collections::BTreeSet;

use chl::formula::{Formula, Label, Substitution, Var};
use chl::graph::LabeledGraph;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn vars(names: &[&str]) -> Vec<Var> {
    names.iter().map(|n| Var::new(n)).collect()
}

fn random_label(rng: &mut StdRng, vars: &[Var], leaf_bias: f64) -> Label {
    if rng.gen_bool(leaf_bias) {
        match rng.gen_range(0..vars.len() + 2) {
            0 => Label::Top,
            1 => Label::Bot,
            i => Label::Var(vars[i - 2].clone()),
        }
    } else {
        [Label::Not, Label::Box, Label::Box, Label::And, Label::Or, Label::Imp]
            .choose(rng)
            .expect("non-empty")
            .clone()
    }
}

/// A random formula graph with at most `max_vertices` vertices. Non-box
/// vertices point forward or at boxes, so every cycle passes a box.
pub fn guarded_graph(rng: &mut StdRng, max_vertices: usize, vars: &[Var]) -> Formula {
    let n = rng.gen_range(1..=max_vertices);
    let mut labels: Vec<Label> = (0..n).map(|_| random_label(rng, vars, 0.3)).collect();
    if n == 1 && rng.gen_bool(0.3) {
        labels[0] = Label::Box;
    }
    let boxes: Vec<usize> = (0..n).filter(|&v| labels[v] == Label::Box).collect();
    let mut succ = Vec::with_capacity(n);
    for v in 0..n {
        let arity = chl::graph::Symbol::arity(&labels[v]);
        let mut s = Vec::with_capacity(arity);
        for _ in 0..arity {
            let target = if labels[v] == Label::Box {
                rng.gen_range(0..n)
            } else {
                let forward: Vec<usize> = (v + 1..n).chain(boxes.iter().copied()).collect();
                match forward.choose(rng) {
                    Some(&w) => w,
                    None => {
                        // nothing to point at: demote to a leaf
                        s.clear();
                        break;
                    }
                }
            };
            s.push(target);
        }
        if s.len() != arity {
            labels[v] = Label::Top;
        }
        succ.push(s);
    }
    Formula::from_tables(&labels, &succ, 0).expect("construction keeps every cycle guarded")
}

/// A guarded graph with at least one cycle.
pub fn cyclic_graph(rng: &mut StdRng, max_vertices: usize, vars: &[Var]) -> Formula {
    loop {
        let f = guarded_graph(rng, max_vertices, vars);
        if !f.is_acyclic() {
            return f;
        }
    }
}

/// A bisimilar variant: either a one-step unraveling, or a vertex split in
/// two with some incoming edges moved to the copy.
pub fn bisimilar_variant(rng: &mut StdRng, f: &Formula) -> Formula {
    if rng.gen_bool(0.3) {
        return f.snip_subst(f);
    }
    let g = f.graph();
    let n = g.len();
    let v = rng.gen_range(0..n);
    let mut labels = g.labels().to_vec();
    let mut succ = g.successors().to_vec();
    labels.push(labels[v].clone());
    succ.push(succ[v].clone());
    for s in succ.iter_mut().take(n) {
        for w in s.iter_mut() {
            if *w == v && rng.gen_bool(0.5) {
                *w = n;
            }
        }
    }
    let root = if g.root() == v && rng.gen_bool(0.5) { n } else { g.root() };
    Formula::from_tables(&labels, &succ, root).expect("split keeps guards")
}

/// Random reindexing; isomorphic to the input.
pub fn shuffled(rng: &mut StdRng, f: &Formula) -> Formula {
    let g = f.graph();
    let n = g.len();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut labels = vec![Label::Top; n];
    let mut succ = vec![Vec::new(); n];
    for v in 0..n {
        labels[perm[v]] = g.label(v).clone();
        succ[perm[v]] = g.succ(v).iter().map(|&w| perm[w]).collect();
    }
    let lg = LabeledGraph::new(perm[g.root()], labels, succ).expect("permutation of a valid graph");
    Formula::from_graph(lg).expect("guard preserved")
}

/// A random acyclic tree with exactly `connectives` inner vertices over the
/// given leaves.
pub fn tree(rng: &mut StdRng, connectives: usize, leaves: &[Formula]) -> Formula {
    if connectives == 0 {
        return leaves.choose(rng).expect("non-empty").clone();
    }
    match rng.gen_range(0..5) {
        0 => Formula::not(&tree(rng, connectives - 1, leaves)),
        1 => Formula::boxed(&tree(rng, connectives - 1, leaves)),
        k => {
            let left = rng.gen_range(0..connectives);
            let a = tree(rng, left, leaves);
            let b = tree(rng, connectives - 1 - left, leaves);
            let label = [Label::And, Label::Or, Label::Imp][k - 2].clone();
            Formula::mk(label, &[&a, &b]).expect("binary")
        }
    }
}

pub fn leaves(names: &[&str], constants: bool) -> Vec<Formula> {
    let mut out: Vec<Formula> = names.iter().map(|n| Formula::var(*n)).collect();
    if constants {
        out.push(Formula::top());
        out.push(Formula::bot());
    }
    out
}

/// Every tree with exactly `c` connectives over `leaves`.
pub fn all_trees(c: usize, leaves: &[Formula]) -> Vec<Formula> {
    let mut by_size: Vec<Vec<Formula>> = vec![leaves.to_vec()];
    for k in 1..=c {
        let mut out = Vec::new();
        for f in &by_size[k - 1] {
            out.push(Formula::not(f));
            out.push(Formula::boxed(f));
        }
        for i in 0..k {
            let j = k - 1 - i;
            for a in &by_size[i] {
                for b in &by_size[j] {
                    out.push(Formula::and(a, b));
                    out.push(Formula::or(a, b));
                    out.push(Formula::imp(a, b));
                }
            }
        }
        by_size.push(out);
    }
    by_size.swap_remove(c)
}

/// A random guarded graph modalised in `p` in which `p` occurs.
pub fn modalised(rng: &mut StdRng, max_vertices: usize, p: &Var, others: &[Var]) -> Formula {
    let mut all = vec![p.clone()];
    all.extend(others.iter().cloned());
    loop {
        let f = guarded_graph(rng, max_vertices, &all);
        if f.occurs(p) && f.is_modalised(p) {
            return f;
        }
    }
}

pub fn subst1(p: &Var, f: &Formula) -> Substitution {
    Substitution::single(p.clone(), f.clone())
}

/// Largest bisimulation by naive greatest-fixpoint iteration over all pairs.
pub fn naive_bisimulation(g: &Formula, h: &Formula) -> BTreeSet<(usize, usize)> {
    let (g, h) = (g.graph(), h.graph());
    let mut rel: BTreeSet<(usize, usize)> = g
        .vertices()
        .flat_map(|a| h.vertices().map(move |b| (a, b)))
        .filter(|&(a, b)| g.label(a) == h.label(b))
        .collect();
    loop {
        let next: BTreeSet<(usize, usize)> = rel
            .iter()
            .copied()
            .filter(|&(a, b)| {
                g.succ(a)
                    .iter()
                    .zip(h.succ(b))
                    .all(|(&x, &y)| rel.contains(&(x, y)))
            })
            .collect();
        if next.len() == rel.len() {
            return rel;
        }
        rel = next;
    }
}
