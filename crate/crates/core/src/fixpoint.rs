//! Simultaneous guarded equation systems and their solution by graph surgery.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::formula::{Formula, Substitution, Var};
use crate::graph::LabeledGraph;

/// Unknowns in declaration order, each with a body that may mention any unknown.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EquationSystem {
    unknowns: Vec<Var>,
    bodies: Vec<Formula>,
}

impl EquationSystem {
    pub fn new() -> Self {
        EquationSystem::default()
    }

    pub fn from_equations(eqs: impl IntoIterator<Item = (Var, Formula)>) -> Result<Self> {
        let mut s = EquationSystem::new();
        for (q, body) in eqs {
            s.add(q, body)?;
        }
        Ok(s)
    }

    pub fn add(&mut self, q: Var, body: Formula) -> Result<()> {
        if self.unknowns.contains(&q) {
            return Err(Error::DuplicateUnknown { var: q });
        }
        self.unknowns.push(q);
        self.bodies.push(body);
        Ok(())
    }

    pub fn unknowns(&self) -> &[Var] {
        &self.unknowns
    }

    pub fn body(&self, q: &Var) -> Option<&Formula> {
        self.index(q).map(|i| &self.bodies[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Formula)> {
        self.unknowns.iter().zip(&self.bodies)
    }

    pub fn len(&self) -> usize {
        self.unknowns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unknowns.is_empty()
    }

    fn index(&self, q: &Var) -> Option<usize> {
        self.unknowns.iter().position(|x| x == q)
    }

    /// Edge `q -> q'` iff the body of `q` is not modalised in `q'`.
    pub fn dependency_graph(&self) -> DependencyGraph {
        let succ = self
            .bodies
            .iter()
            .map(|body| {
                self.unknowns
                    .iter()
                    .enumerate()
                    .filter(|(_, q)| !body.is_modalised(q))
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        DependencyGraph {
            unknowns: self.unknowns.clone(),
            succ,
        }
    }

    pub fn is_modalised(&self) -> bool {
        self.dependency_graph().find_cycle().is_none()
    }

    /// Builds the multi-rooted solution graph and reads off one solution per unknown.
    pub fn solve(&self) -> Result<Solution> {
        if let Some(i) = self.dependency_graph().find_cycle() {
            return Err(Error::SystemNotModalised {
                var: self.unknowns[i].clone(),
            });
        }
        let n = self.len();
        let root_unknown = |i: usize| -> Option<usize> {
            self.bodies[i].root_label().as_var().and_then(|v| self.index(v))
        };
        // end(q): follow bodies that are bare unknowns; acyclic since the
        // dependency graph is.
        let end: Vec<usize> = (0..n)
            .map(|mut i| {
                while let Some(j) = root_unknown(i) {
                    i = j;
                }
                i
            })
            .collect();

        // Vertices of Psi are pairs (i, a) whose label is not an unknown.
        let mut id: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut labels = Vec::new();
        for (i, body) in self.bodies.iter().enumerate() {
            let g = body.graph();
            for a in g.vertices() {
                let is_unknown = g.label(a).as_var().is_some_and(|v| self.index(v).is_some());
                if !is_unknown {
                    id.insert((i, a), labels.len());
                    labels.push(g.label(a).clone());
                }
            }
        }
        let idfy = |i: usize, a: usize| -> usize {
            let g = self.bodies[i].graph();
            match g.label(a).as_var().and_then(|v| self.index(v)) {
                Some(j) => {
                    let e = end[j];
                    id[&(e, self.bodies[e].root())]
                }
                None => id[&(i, a)],
            }
        };
        let mut succ = vec![Vec::new(); labels.len()];
        for (&(i, a), &v) in &id {
            let g = self.bodies[i].graph();
            succ[v] = g.succ(a).iter().map(|&b| idfy(i, b)).collect();
        }
        let mut assignment = BTreeMap::new();
        for (i, q) in self.unknowns.iter().enumerate() {
            let r = idfy(i, self.bodies[i].root());
            let g = LabeledGraph::restrict(&labels, &succ, r)?;
            assignment.insert(q.clone(), Formula::from_graph(g)?);
        }
        Ok(Solution { assignment })
    }

    /// Checks `F(q) ≃ body(q)[F]` for every unknown.
    pub fn verify_solution(&self, sol: &Solution) -> bool {
        let Some(sigma) = self
            .unknowns
            .iter()
            .map(|q| sol.get(q).map(|f| (q.clone(), f.clone())))
            .collect::<Option<Substitution>>()
        else {
            return false;
        };
        self.iter()
            .all(|(q, body)| sigma.get(q).is_some_and(|psi| psi.bisimilar(&body.substitute(&sigma))))
    }

    /// The same system with unknowns renamed (bodies renamed accordingly).
    pub fn rename(&self, renaming: &BTreeMap<Var, Var>) -> Result<Self> {
        let sigma: Substitution = renaming
            .iter()
            .map(|(a, b)| (a.clone(), Formula::var(b.clone())))
            .collect();
        EquationSystem::from_equations(self.iter().map(|(q, body)| {
            (
                renaming.get(q).cloned().unwrap_or_else(|| q.clone()),
                body.substitute(&sigma),
            )
        }))
    }
}

/// Dependency graph over the unknowns of a system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    pub unknowns: Vec<Var>,
    pub succ: Vec<Vec<usize>>,
}

impl DependencyGraph {
    pub fn edges(&self) -> Vec<(Var, Var)> {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |&j| (i, j)))
            .map(|(i, j)| (self.unknowns[i].clone(), self.unknowns[j].clone()))
            .collect()
    }

    /// Some unknown on a cycle, if any.
    pub fn find_cycle(&self) -> Option<usize> {
        let n = self.succ.len();
        let mut state = vec![0u8; n];
        fn visit(v: usize, succ: &[Vec<usize>], state: &mut [u8]) -> Option<usize> {
            state[v] = 1;
            for &w in &succ[v] {
                match state[w] {
                    0 => {
                        if let Some(c) = visit(w, succ, state) {
                            return Some(c);
                        }
                    }
                    1 => return Some(w),
                    _ => {}
                }
            }
            state[v] = 2;
            None
        }
        (0..n).find_map(|v| if state[v] == 0 { visit(v, &self.succ, &mut state) } else { None })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Solution {
    pub assignment: BTreeMap<Var, Formula>,
}

impl Solution {
    pub fn get(&self, q: &Var) -> Option<&Formula> {
        self.assignment.get(q)
    }

    pub fn as_substitution(&self) -> Substitution {
        self.assignment
            .iter()
            .map(|(q, f)| (q.clone(), f.clone()))
            .collect()
    }
}

/// An acyclic image over variables and constants, with the system the
/// constants solve. Constant `c` stands for the solution of `c` in the system.
#[derive(Debug, Clone)]
pub struct MftPresentation {
    pub constants: Vec<Var>,
    pub defining_system: EquationSystem,
    pub image: Formula,
}

pub fn cyco(phi: &Formula) -> MftPresentation {
    let ex = phi.extract_equations();
    MftPresentation {
        constants: ex.system.unknowns().to_vec(),
        defining_system: ex.system,
        image: ex.goal.into_formula(),
    }
}

pub fn cocy(m: &MftPresentation) -> Result<Formula> {
    let sol = m.defining_system.solve()?;
    Ok(m.image.substitute(&sol.as_substitution()))
}
