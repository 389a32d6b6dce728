//! Hilbert-style proof checking. Every formula comparison is up to
//! bisimilarity.
//!
//! Script format, one item per line:
//!
//! ```text
//! # comment
//! let NAME = F
//! k. F ; JUSTIFICATION
//! ```
//!
//! Lines are numbered `1, 2, ...` in order. After `let NAME = F`, the
//! identifier `NAME` in later formulas stands for `F` (expansion is
//! substitution after parsing). Justifications:
//!
//! ```text
//! taut(SCHEMA, A := F, B := G, ...)   mp(i, j)      nec(i)     lr(i)
//! k_ax(F, G)    bisim_ax(F, G)        four_ax(F)    ipe(i, p)
//! henkin_ax     nec_bullet(i)
//! ```
//!
//! `mp(i, j)` takes line `j` to be the implication from line `i`. Schemas of
//! `taut` are read without macro expansion and must be box-free trees.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::formula::{Formula, Label, Substitution, TreeFormula, Var};
use crate::syntax::{parse, parse_prefix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AxiomBase {
    /// chl1–chl6: modus ponens, necessitation, tautologies, K, bisimilar
    /// formulas are equivalent, Löb's rule.
    Chl,
    /// chl1–chl5.
    KcircMinus,
    /// K°⁻ plus intersubstitutivity of provable equivalents under `fix`.
    Kcirc,
    /// K° plus the Henkin sentence.
    Chl0,
    /// K°⁻ plus necessitation for `[*]`.
    Chl1,
    /// CHL plus axiom 4.
    GlCirc,
}

impl AxiomBase {
    pub const ALL: [AxiomBase; 6] = [
        AxiomBase::Chl,
        AxiomBase::KcircMinus,
        AxiomBase::Kcirc,
        AxiomBase::Chl0,
        AxiomBase::Chl1,
        AxiomBase::GlCirc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AxiomBase::Chl => "chl",
            AxiomBase::KcircMinus => "kcircminus",
            AxiomBase::Kcirc => "kcirc",
            AxiomBase::Chl0 => "chl0",
            AxiomBase::Chl1 => "chl1",
            AxiomBase::GlCirc => "glcirc",
        }
    }

    pub fn permits(self, kind: RuleKind) -> bool {
        use RuleKind::*;
        match kind {
            Taut | Mp | Nec | KAx | BisimAx => true,
            Lr => matches!(self, AxiomBase::Chl | AxiomBase::GlCirc),
            FourAx => self == AxiomBase::GlCirc,
            Ipe => matches!(self, AxiomBase::Kcirc | AxiomBase::Chl0),
            HenkinAx => self == AxiomBase::Chl0,
            NecBullet => self == AxiomBase::Chl1,
        }
    }

    /// Whether every rule of `self` is a rule of `other`.
    pub fn included_in(self, other: AxiomBase) -> bool {
        RuleKind::ALL.iter().all(|&k| !self.permits(k) || other.permits(k))
    }
}

impl fmt::Display for AxiomBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AxiomBase {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        AxiomBase::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("unknown axiom base {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    Taut,
    Mp,
    Nec,
    Lr,
    KAx,
    BisimAx,
    FourAx,
    Ipe,
    HenkinAx,
    NecBullet,
}

impl RuleKind {
    pub const ALL: [RuleKind; 10] = [
        RuleKind::Taut,
        RuleKind::Mp,
        RuleKind::Nec,
        RuleKind::Lr,
        RuleKind::KAx,
        RuleKind::BisimAx,
        RuleKind::FourAx,
        RuleKind::Ipe,
        RuleKind::HenkinAx,
        RuleKind::NecBullet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleKind::Taut => "taut",
            RuleKind::Mp => "mp",
            RuleKind::Nec => "nec",
            RuleKind::Lr => "lr",
            RuleKind::KAx => "k_ax",
            RuleKind::BisimAx => "bisim_ax",
            RuleKind::FourAx => "four_ax",
            RuleKind::Ipe => "ipe",
            RuleKind::HenkinAx => "henkin_ax",
            RuleKind::NecBullet => "nec_bullet",
        }
    }
}

/// Line references are 1-based.
#[derive(Debug, Clone)]
pub enum Justification {
    Taut { schema: TreeFormula, subst: Substitution },
    Mp(usize, usize),
    Nec(usize),
    Lr(usize),
    KAx(Formula, Formula),
    BisimAx(Formula, Formula),
    FourAx(Formula),
    Ipe(usize, Var),
    HenkinAx,
    NecBullet(usize),
}

impl Justification {
    pub fn kind(&self) -> RuleKind {
        match self {
            Justification::Taut { .. } => RuleKind::Taut,
            Justification::Mp(..) => RuleKind::Mp,
            Justification::Nec(_) => RuleKind::Nec,
            Justification::Lr(_) => RuleKind::Lr,
            Justification::KAx(..) => RuleKind::KAx,
            Justification::BisimAx(..) => RuleKind::BisimAx,
            Justification::FourAx(_) => RuleKind::FourAx,
            Justification::Ipe(..) => RuleKind::Ipe,
            Justification::HenkinAx => RuleKind::HenkinAx,
            Justification::NecBullet(_) => RuleKind::NecBullet,
        }
    }

    fn refs(&self) -> Vec<usize> {
        match *self {
            Justification::Mp(i, j) => vec![i, j],
            Justification::Nec(i) | Justification::Lr(i) | Justification::Ipe(i, _) | Justification::NecBullet(i) => {
                vec![i]
            }
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProofLine {
    pub formula: Formula,
    pub justification: Justification,
}

#[derive(Debug, Clone, Default)]
pub struct ProofScript {
    pub lines: Vec<ProofLine>,
}

impl ProofScript {
    pub fn conclusion(&self) -> Option<&Formula> {
        self.lines.last().map(|l| &l.formula)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    /// 1-based line number.
    pub line: usize,
    pub reason: String,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

/// Substitutes into a propositional schema.
pub fn instantiate_schema(schema: &TreeFormula, sigma: &Substitution) -> Formula {
    schema.formula().substitute(sigma)
}

/// Truth-table check of a box-free formula.
pub fn is_tautology(schema: &Formula) -> Result<bool> {
    let g = schema.graph();
    if g.labels().iter().any(|l| *l == Label::Box) {
        return Err(Error::Internal("tautology schemas must be box-free".into()));
    }
    let vars: Vec<Var> = schema.vars().into_iter().collect();
    if vars.len() > 20 {
        return Err(Error::Internal("too many schema variables".into()));
    }
    for bits in 0u64..1 << vars.len() {
        let vals = g.guard_fold(&Default::default(), |_| false, |_, label, args: &[bool]| match label {
            Label::Var(v) => {
                let i = vars.binary_search(v).expect("collected above");
                bits >> i & 1 == 1
            }
            l => l.apply(args),
        })?;
        if !vals[g.root()] {
            return Ok(false);
        }
    }
    Ok(true)
}

fn decompose_iff(f: &Formula) -> Option<(Formula, Formula)> {
    if *f.root_label() != Label::And {
        return None;
    }
    let (l, r) = (f.child(0)?, f.child(1)?);
    if *l.root_label() != Label::Imp || *r.root_label() != Label::Imp {
        return None;
    }
    let (a, b) = (l.child(0)?, l.child(1)?);
    let (b2, a2) = (r.child(0)?, r.child(1)?);
    (a.bisimilar(&a2) && b.bisimilar(&b2)).then_some((a, b))
}

/// Checks every line against `base`; the first failing line is reported.
pub fn check_proof(script: &ProofScript, base: AxiomBase) -> Result<(), Rejection> {
    for (k, line) in script.lines.iter().enumerate() {
        let n = k + 1;
        let reject = |reason: String| Rejection { line: n, reason };
        let j = &line.justification;
        if !base.permits(j.kind()) {
            return Err(reject(format!("{} is not a rule of {base}", j.kind().name())));
        }
        for r in j.refs() {
            if r == 0 || r >= n {
                return Err(reject(format!("reference to line {r} does not point backwards")));
            }
        }
        let at = |i: usize| &script.lines[i - 1].formula;
        let phi = &line.formula;
        let expect = |want: Formula, what: &str| -> Result<(), Rejection> {
            if phi.bisimilar(&want) {
                Ok(())
            } else {
                Err(reject(format!("formula is not bisimilar to {what} {want}")))
            }
        };
        match j {
            Justification::Taut { schema, subst } => {
                match is_tautology(schema.formula()) {
                    Ok(true) => {}
                    Ok(false) => return Err(reject(format!("schema {schema} is not a tautology"))),
                    Err(e) => return Err(reject(e.to_string())),
                }
                expect(instantiate_schema(schema, subst), "the instance")?;
            }
            Justification::Mp(i, jj) => {
                let want = Formula::imp(at(*i), phi);
                if !at(*jj).bisimilar(&want) {
                    return Err(reject(format!("line {jj} is not bisimilar to {want}")));
                }
            }
            Justification::Nec(i) => expect(Formula::boxed(at(*i)), "")?,
            Justification::Lr(i) => {
                let want = Formula::imp(&Formula::boxed(phi), phi);
                if !at(*i).bisimilar(&want) {
                    return Err(reject(format!("line {i} is not bisimilar to {want}")));
                }
            }
            Justification::KAx(a, b) => expect(
                Formula::imp(
                    &Formula::boxed(&Formula::imp(a, b)),
                    &Formula::imp(&Formula::boxed(a), &Formula::boxed(b)),
                ),
                "the K instance",
            )?,
            Justification::BisimAx(a, b) => {
                if !a.bisimilar(b) {
                    return Err(reject(format!("{a} and {b} are not bisimilar")));
                }
                expect(Formula::iff(a, b), "")?;
            }
            Justification::FourAx(a) => {
                let ba = Formula::boxed(a);
                expect(Formula::imp(&ba, &Formula::boxed(&ba)), "the 4 instance")?;
            }
            Justification::Ipe(i, p) => {
                let Some((alpha, beta)) = decompose_iff(at(*i)) else {
                    return Err(reject(format!("line {i} is not an equivalence")));
                };
                let fix = |f: &Formula| {
                    Formula::fix_point(p, f).map_err(|_| reject(format!("{f} is not modalised in {p}")))
                };
                let want = Formula::iff(&fix(&alpha)?, &fix(&beta)?);
                expect(want, "")?;
            }
            Justification::HenkinAx => {
                let h = Formula::fix_point(&Var::new("p"), &Formula::boxed(&Formula::var("p")))
                    .expect("[]p is modalised in p");
                expect(h, "the Henkin sentence")?;
            }
            Justification::NecBullet(i) => expect(at(*i).box_bullet(), "")?,
        }
    }
    Ok(())
}

fn script_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Format {
        path: format!("line {line}"),
        msg: msg.into(),
    }
}

struct Macros(BTreeMap<Var, Formula>);

impl Macros {
    fn expand(&self, f: Formula) -> Formula {
        if self.0.is_empty() || f.vars().iter().all(|v| !self.0.contains_key(v)) {
            return f;
        }
        let sigma: Substitution = self.0.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        f.substitute(&sigma)
    }

    fn parse(&self, src: &str, line: usize) -> Result<Formula> {
        parse(src)
            .map(|f| self.expand(f))
            .map_err(|e| script_err(line, e.to_string()))
    }
}

/// Splits `s` at top-level commas.
fn split_args(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out.into_iter().map(str::trim).collect()
}

fn parse_justification(src: &str, macros: &Macros, line: usize) -> Result<Justification> {
    let src = src.trim();
    let (name, args) = match src.find('(') {
        Some(i) => {
            let inner = src[i + 1..]
                .strip_suffix(')')
                .ok_or_else(|| script_err(line, "justification must end with ')'"))?;
            (src[..i].trim(), split_args(inner))
        }
        None => (src, Vec::new()),
    };
    let arity = |n: usize| -> Result<()> {
        let got = if args.len() == 1 && args[0].is_empty() { 0 } else { args.len() };
        if got == n {
            Ok(())
        } else {
            Err(script_err(line, format!("{name} takes {n} arguments, got {got}")))
        }
    };
    let num = |s: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| script_err(line, format!("expected a line number, got {s:?}")))
    };
    Ok(match name {
        "taut" => {
            let schema_src = args
                .first()
                .filter(|s| !s.is_empty())
                .ok_or_else(|| script_err(line, "taut needs a schema"))?;
            let schema = parse(schema_src).map_err(|e| script_err(line, e.to_string()))?;
            let schema = TreeFormula::from_formula(schema).map_err(|e| script_err(line, e.to_string()))?;
            let mut subst = Substitution::new();
            for a in &args[1..] {
                let (v, f) = a
                    .split_once(":=")
                    .ok_or_else(|| script_err(line, format!("expected VAR := F, got {a:?}")))?;
                let v = Var::new(v.trim());
                let f = macros.parse(f, line)?;
                if subst.insert(v.clone(), f).is_some() {
                    return Err(script_err(line, format!("{v} bound twice")));
                }
            }
            Justification::Taut { schema, subst }
        }
        "mp" => {
            arity(2)?;
            Justification::Mp(num(args[0])?, num(args[1])?)
        }
        "nec" => {
            arity(1)?;
            Justification::Nec(num(args[0])?)
        }
        "lr" => {
            arity(1)?;
            Justification::Lr(num(args[0])?)
        }
        "nec_bullet" => {
            arity(1)?;
            Justification::NecBullet(num(args[0])?)
        }
        "k_ax" => {
            arity(2)?;
            Justification::KAx(macros.parse(args[0], line)?, macros.parse(args[1], line)?)
        }
        "bisim_ax" => {
            arity(2)?;
            Justification::BisimAx(macros.parse(args[0], line)?, macros.parse(args[1], line)?)
        }
        "four_ax" => {
            arity(1)?;
            Justification::FourAx(macros.parse(args[0], line)?)
        }
        "ipe" => {
            arity(2)?;
            let p = parse(args[1])
                .ok()
                .and_then(|f| f.root_label().as_var().cloned())
                .ok_or_else(|| script_err(line, format!("expected a variable, got {:?}", args[1])))?;
            Justification::Ipe(num(args[0])?, p)
        }
        "henkin_ax" => {
            if !args.is_empty() {
                arity(0)?;
            }
            Justification::HenkinAx
        }
        other => return Err(script_err(line, format!("unknown justification {other:?}"))),
    })
}

/// Parses the script text format.
pub fn parse_script(src: &str) -> Result<ProofScript> {
    let mut macros = Macros(BTreeMap::new());
    let mut lines = Vec::new();
    for (ln, raw) in src.lines().enumerate() {
        let ln = ln + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        if let Some(rest) = text.strip_prefix("let ") {
            let (name, body) = rest
                .split_once('=')
                .ok_or_else(|| script_err(ln, "expected let NAME = F"))?;
            let name = name.trim();
            let ok = name.bytes().next().is_some_and(|b| b.is_ascii_alphabetic())
                && name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_');
            if !ok {
                return Err(script_err(ln, format!("invalid macro name {name:?}")));
            }
            let f = macros.parse(body, ln)?;
            macros.0.insert(Var::new(name), f);
            continue;
        }
        let (num, rest) = text
            .split_once('.')
            .ok_or_else(|| script_err(ln, "expected k. F ; JUSTIFICATION"))?;
        let k: usize = num
            .trim()
            .parse()
            .map_err(|_| script_err(ln, format!("bad line number {num:?}")))?;
        if k != lines.len() + 1 {
            return Err(script_err(ln, format!("expected line number {}, got {k}", lines.len() + 1)));
        }
        let (formula, used) = parse_prefix(rest).map_err(|e| script_err(ln, e.to_string()))?;
        let tail = rest[used..].trim_start();
        let just = tail
            .strip_prefix(';')
            .ok_or_else(|| script_err(ln, "expected ';' after the formula"))?;
        let justification = parse_justification(just, &macros, ln)?;
        lines.push(ProofLine {
            formula: macros.expand(formula),
            justification,
        });
    }
    Ok(ProofScript { lines })
}

/// A named script shipped with the library, with the base it is meant for.
#[derive(Debug, Clone, Copy)]
pub struct BundledScript {
    pub name: &'static str,
    pub base: AxiomBase,
    pub source: &'static str,
}

pub const BUNDLED: &[BundledScript] = &[
    BundledScript {
        name: "henkin",
        base: AxiomBase::Chl,
        source: include_str!("../scripts/henkin.prf"),
    },
    BundledScript {
        name: "bullet_l1",
        base: AxiomBase::Chl,
        source: include_str!("../scripts/bullet_l1.prf"),
    },
    BundledScript {
        name: "bullet_l2",
        base: AxiomBase::Chl,
        source: include_str!("../scripts/bullet_l2.prf"),
    },
    BundledScript {
        name: "bullet_l3",
        base: AxiomBase::Chl,
        source: include_str!("../scripts/bullet_l3.prf"),
    },
    BundledScript {
        name: "bullet_l4",
        base: AxiomBase::Chl,
        source: include_str!("../scripts/bullet_l4.prf"),
    },
    BundledScript {
        name: "chl0_bullet_closure",
        base: AxiomBase::Chl0,
        source: include_str!("../scripts/chl0_bullet_closure.prf"),
    },
    BundledScript {
        name: "chl1_bullet",
        base: AxiomBase::Chl1,
        source: include_str!("../scripts/chl1_bullet.prf"),
    },
];

pub fn bundled(name: &str) -> Option<&'static BundledScript> {
    BUNDLED.iter().find(|s| s.name == name)
}
