//! Finite acyclic Kripke models and evaluation by guard recursion.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::formula::{Formula, Label, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeModel {
    worlds: usize,
    rel: Vec<(usize, usize)>,
    succ: Vec<Vec<usize>>,
    /// Successors before predecessors.
    schedule: Vec<usize>,
    valuation: BTreeMap<Var, Vec<bool>>,
}

impl KripkeModel {
    /// `valuation` maps each variable to the worlds where it holds; variables
    /// that are absent are false everywhere.
    pub fn new(
        worlds: usize,
        rel: impl IntoIterator<Item = (usize, usize)>,
        valuation: impl IntoIterator<Item = (Var, Vec<usize>)>,
    ) -> Result<Self> {
        let mut val = BTreeMap::new();
        for (v, ws) in valuation {
            let mut row = vec![false; worlds];
            for w in ws {
                if w >= worlds {
                    return Err(Error::Model(format!("world {w} out of range in valuation of {v}")));
                }
                row[w] = true;
            }
            val.insert(v, row);
        }
        KripkeModel::from_table(worlds, rel, val)
    }

    pub fn from_table(
        worlds: usize,
        rel: impl IntoIterator<Item = (usize, usize)>,
        valuation: BTreeMap<Var, Vec<bool>>,
    ) -> Result<Self> {
        if worlds == 0 {
            return Err(Error::Model("a model needs at least one world".into()));
        }
        let rel: Vec<(usize, usize)> = rel.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let mut succ = vec![Vec::new(); worlds];
        for &(a, b) in &rel {
            if a >= worlds || b >= worlds {
                return Err(Error::Model(format!("edge ({a},{b}) out of range")));
            }
            succ[a].push(b);
        }
        for (v, row) in &valuation {
            if row.len() != worlds {
                return Err(Error::Model(format!("valuation of {v} has wrong length")));
            }
        }
        let schedule = reverse_topological(&succ)
            .ok_or_else(|| Error::Model("accessibility relation has a cycle".into()))?;
        Ok(KripkeModel {
            worlds,
            rel,
            succ,
            schedule,
            valuation,
        })
    }

    pub fn worlds(&self) -> usize {
        self.worlds
    }

    pub fn relation(&self) -> &[(usize, usize)] {
        &self.rel
    }

    pub fn successors(&self, w: usize) -> &[usize] {
        &self.succ[w]
    }

    pub fn valuation(&self) -> &BTreeMap<Var, Vec<bool>> {
        &self.valuation
    }

    pub fn holds(&self, v: &Var, w: usize) -> bool {
        self.valuation.get(v).is_some_and(|row| row[w])
    }

    pub fn is_transitive(&self) -> bool {
        self.rel
            .iter()
            .all(|&(a, b)| self.succ[b].iter().all(|c| self.succ[a].contains(c)))
    }
}

/// Worlds ordered so that every successor precedes its predecessors; `None`
/// when the relation has a cycle.
fn reverse_topological(succ: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = succ.len();
    let mut out_deg: Vec<usize> = succ.iter().map(Vec::len).collect();
    let mut preds = vec![Vec::new(); n];
    for (a, s) in succ.iter().enumerate() {
        for &b in s {
            preds[b].push(a);
        }
    }
    let mut ready: Vec<usize> = (0..n).rev().filter(|&w| out_deg[w] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(w) = ready.pop() {
        order.push(w);
        for &p in &preds[w] {
            out_deg[p] -= 1;
            if out_deg[p] == 0 {
                ready.push(p);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Truth value of every vertex of a formula at every world.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalTable {
    values: Vec<Vec<bool>>,
    root: usize,
}

impl EvalTable {
    pub fn get(&self, w: usize, vertex: usize) -> bool {
        self.values[w][vertex]
    }

    pub fn at_root(&self, w: usize) -> bool {
        self.values[w][self.root]
    }

    pub fn world(&self, w: usize) -> &[bool] {
        &self.values[w]
    }
}

/// Evaluates every vertex at every world: worlds are processed successors
/// first, and within a world the box occurrences act as the guard.
pub fn eval(m: &KripkeModel, phi: &Formula) -> EvalTable {
    let g = phi.graph();
    let boxes = phi.box_occurrences();
    let mut values: Vec<Vec<bool>> = vec![Vec::new(); m.worlds];
    for &w in &m.schedule {
        let row = g
            .guard_fold(
                &boxes,
                |a| {
                    let child = g.succ(a)[0];
                    m.succ[w].iter().all(|&u| values[u][child])
                },
                |_, label, args: &[bool]| match label {
                    Label::Var(v) => m.holds(v, w),
                    other => other.apply(args),
                },
            )
            .expect("box occurrences guard every cycle");
        values[w] = row;
    }
    EvalTable {
        values,
        root: phi.root(),
    }
}

pub fn forces(m: &KripkeModel, w: usize, phi: &Formula) -> Result<bool> {
    if w >= m.worlds {
        return Err(Error::Model(format!("world {w} out of range")));
    }
    Ok(eval(m, phi).at_root(w))
}

/// True at every world.
pub fn valid_in(m: &KripkeModel, phi: &Formula) -> bool {
    let t = eval(m, phi);
    (0..m.worlds).all(|w| t.at_root(w))
}

/// The `i < j` pairs of an `n`-world frame in enumeration order.
pub fn forward_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect()
}

fn relation_from_mask(pairs: &[(usize, usize)], mask: u64) -> Vec<(usize, usize)> {
    pairs
        .iter()
        .enumerate()
        .filter(|(k, _)| mask >> k & 1 == 1)
        .map(|(_, &p)| p)
        .collect()
}

/// Valuation number `index`: variable `i` holds at world `w` iff bit
/// `i * worlds + w` is set.
fn valuation_from_index(vars: &[Var], worlds: usize, index: u64) -> BTreeMap<Var, Vec<bool>> {
    vars.iter()
        .enumerate()
        .map(|(i, v)| {
            let row = (0..worlds).map(|w| index >> (i * worlds + w) & 1 == 1).collect();
            (v.clone(), row)
        })
        .collect()
}

/// All models with exactly `n` worlds over `vars`: every subset of the
/// forward pairs `i -> j` (`i < j`), each with every valuation.
pub fn enumerate_models(n: usize, vars: &[Var]) -> impl Iterator<Item = KripkeModel> + '_ {
    let pairs = forward_pairs(n);
    let rel_count = 1u64 << pairs.len();
    let val_bits = vars.len() * n;
    assert!(val_bits < 63, "valuation space too large to enumerate");
    let val_count = 1u64 << val_bits;
    (0..rel_count).flat_map(move |mask| {
        let rel = relation_from_mask(&pairs, mask);
        (0..val_count).map(move |index| {
            KripkeModel::from_table(n, rel.iter().copied(), valuation_from_index(vars, n, index))
                .expect("forward relations are acyclic")
        })
    })
}

/// First model (in [`enumerate_models`] order, smallest models first) and
/// world refuting `phi`, searching up to `max_worlds` worlds.
pub fn find_countermodel(phi: &Formula, max_worlds: usize) -> Option<(KripkeModel, usize)> {
    let refuter = Refuter::new(phi);
    for n in 1..=max_worlds {
        let pairs = forward_pairs(n);
        for mask in 0..1u64 << pairs.len() {
            let rel = relation_from_mask(&pairs, mask);
            if let Some(found) = refuter.refute(n, &rel) {
                return Some(found);
            }
        }
    }
    None
}

/// True at every world of every model with at most `max_worlds` worlds.
pub fn valid_up_to(phi: &Formula, max_worlds: usize) -> bool {
    find_countermodel(phi, max_worlds).is_none()
}

const CHUNK_BITS: usize = 12;

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(bool),
    Var(usize),
    Not(usize),
    Box(usize),
    And(usize, usize),
    Or(usize, usize),
    Imp(usize, usize),
}

/// Evaluates a formula on a fixed frame for many valuations at once, one bit
/// per valuation.
#[derive(Debug, Clone)]
pub struct Refuter {
    vars: Vec<Var>,
    ops: Vec<Op>,
    order: Vec<usize>,
    root: usize,
}

impl Refuter {
    pub fn new(phi: &Formula) -> Self {
        let vars: Vec<Var> = phi.vars().into_iter().collect();
        let g = phi.graph();
        let ops = g
            .vertices()
            .map(|v| {
                let s = g.succ(v);
                match g.label(v) {
                    Label::Top => Op::Const(true),
                    Label::Bot => Op::Const(false),
                    Label::Var(x) => Op::Var(vars.binary_search(x).expect("collected above")),
                    Label::Not => Op::Not(s[0]),
                    Label::Box => Op::Box(s[0]),
                    Label::And => Op::And(s[0], s[1]),
                    Label::Or => Op::Or(s[0], s[1]),
                    Label::Imp => Op::Imp(s[0], s[1]),
                }
            })
            .collect();
        let order = g
            .guard_order(&phi.box_occurrences())
            .expect("box occurrences guard every cycle");
        Refuter {
            vars,
            ops,
            order,
            root: g.root(),
        }
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    /// First valuation (by index) and world refuting the formula on the frame
    /// `(worlds, rel)`; `rel` must be acyclic.
    pub fn refute(&self, worlds: usize, rel: &[(usize, usize)]) -> Option<(KripkeModel, usize)> {
        let mut succ = vec![Vec::new(); worlds];
        for &(a, b) in rel {
            succ[a].push(b);
        }
        let schedule = reverse_topological(&succ).expect("frame must be acyclic");
        let total_bits = self.vars.len() * worlds;
        assert!(total_bits < 63, "valuation space too large");
        let chunk_bits = total_bits.min(CHUNK_BITS);
        let words = (1usize << chunk_bits).div_ceil(64);
        let last_mask = if chunk_bits >= 6 {
            u64::MAX
        } else {
            (1u64 << (1 << chunk_bits)) - 1
        };
        let patterns: Vec<Vec<u64>> = (0..chunk_bits)
            .map(|b| {
                (0..words)
                    .map(|wi| {
                        (0..64).fold(0u64, |acc, j| {
                            let v = wi * 64 + j;
                            if v >> b & 1 == 1 {
                                acc | 1 << j
                            } else {
                                acc
                            }
                        })
                    })
                    .collect()
            })
            .collect();
        let nv = self.ops.len();
        let mut val = vec![0u64; worlds * nv * words];
        let chunks = 1u64 << (total_bits - chunk_bits);
        for c in 0..chunks {
            for &w in &schedule {
                for &v in &self.order {
                    let base = (w * nv + v) * words;
                    for k in 0..words {
                        let x = match self.ops[v] {
                            Op::Const(b) => {
                                if b {
                                    u64::MAX
                                } else {
                                    0
                                }
                            }
                            Op::Var(i) => {
                                let bit = i * worlds + w;
                                if bit < chunk_bits {
                                    patterns[bit][k]
                                } else if c >> (bit - chunk_bits) & 1 == 1 {
                                    u64::MAX
                                } else {
                                    0
                                }
                            }
                            Op::Not(a) => !val[(w * nv + a) * words + k],
                            Op::Box(a) => succ[w]
                                .iter()
                                .fold(u64::MAX, |acc, &u| acc & val[(u * nv + a) * words + k]),
                            Op::And(a, b) => val[(w * nv + a) * words + k] & val[(w * nv + b) * words + k],
                            Op::Or(a, b) => val[(w * nv + a) * words + k] | val[(w * nv + b) * words + k],
                            Op::Imp(a, b) => !val[(w * nv + a) * words + k] | val[(w * nv + b) * words + k],
                        };
                        val[base + k] = x;
                    }
                }
            }
            for k in 0..words {
                let live = if k + 1 == words { last_mask } else { u64::MAX };
                let fail = (0..worlds).fold(0u64, |acc, w| acc | !val[(w * nv + self.root) * words + k]) & live;
                if fail != 0 {
                    let j = fail.trailing_zeros() as usize;
                    let index = (c << chunk_bits) | (k * 64 + j) as u64;
                    let world = (0..worlds)
                        .find(|&w| val[(w * nv + self.root) * words + k] >> j & 1 == 0)
                        .expect("some world fails");
                    let model = KripkeModel::from_table(
                        worlds,
                        rel.iter().copied(),
                        valuation_from_index(&self.vars, worlds, index),
                    )
                    .expect("acyclic frame");
                    return Some((model, world));
                }
            }
        }
        None
    }
}
