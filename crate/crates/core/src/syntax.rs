//! Surface syntax.
//!
//! ```text
//! F ::= true | false | ident | ( F )
//!     | ~F | [] F | [*] F | <> F
//!     | F /\ F | F \/ F | F -> F | F <-> F
//!     | fix x. F
//!     | letrec x1 = F1; ...; xn = Fn in F
//! ```
//!
//! Prefix operators bind tightest, then `/\` and `\/` (both left
//! associative), then `->` (right associative), then `<->`. Binders extend as
//! far to the right as possible. Identifiers match `[a-zA-Z][a-zA-Z0-9_]*`;
//! the keywords `true false fix letrec in` are reserved.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::fixpoint::EquationSystem;
use crate::formula::{Formula, Label, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    Not,
    Box,
    BoxBullet,
    Diamond,
    And,
    Or,
    Imp,
    Iff,
    Dot,
    Eq,
    Semi,
    Ident(String),
    True,
    False,
    Fix,
    Letrec,
    In,
    /// Anything else; only an error if the parser needs a token here.
    Other(char),
}

fn lex(src: &str) -> Vec<(Tok, usize)> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let rest = &src[i..];
        let fixed: &[(&str, Tok)] = &[
            ("[*]", Tok::BoxBullet),
            ("<->", Tok::Iff),
            ("[]", Tok::Box),
            ("<>", Tok::Diamond),
            ("/\\", Tok::And),
            ("\\/", Tok::Or),
            ("->", Tok::Imp),
            ("(", Tok::LParen),
            (")", Tok::RParen),
            ("~", Tok::Not),
            (".", Tok::Dot),
            ("=", Tok::Eq),
            (";", Tok::Semi),
        ];
        if let Some((s, t)) = fixed.iter().find(|(s, _)| rest.starts_with(s)) {
            out.push((t.clone(), i));
            i += s.len();
            continue;
        }
        if c.is_ascii_alphanumeric() || c == b'_' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            let word = &src[start..i];
            let t = match word {
                "true" => Tok::True,
                "false" => Tok::False,
                "fix" => Tok::Fix,
                "letrec" => Tok::Letrec,
                "in" => Tok::In,
                _ => Tok::Ident(word.to_string()),
            };
            out.push((t, start));
            continue;
        }
        let ch = rest.chars().next().expect("non-empty");
        out.push((Tok::Other(ch), i));
        i += ch.len_utf8();
    }
    out
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

fn syntax(pos: usize, msg: impl Into<String>) -> Error {
    Error::Syntax {
        pos,
        msg: msg.into(),
    }
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |&(_, p)| p)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<()> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(syntax(self.offset(), format!("expected {what}")))
        }
    }

    fn ident(&mut self) -> Result<Var> {
        let at = self.offset();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                check_ident(&s, at)?;
                Ok(Var::new(&s))
            }
            _ => Err(syntax(at, "expected identifier")),
        }
    }

    fn expr(&mut self) -> Result<Formula> {
        let mut lhs = self.imp()?;
        while self.eat(&Tok::Iff) {
            let rhs = self.imp()?;
            lhs = Formula::iff(&lhs, &rhs);
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        if self.eat(&Tok::Imp) {
            let rhs = self.imp()?;
            return Ok(Formula::imp(&lhs, &rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Or) {
            let rhs = self.and()?;
            lhs = Formula::or(&lhs, &rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::And) {
            let rhs = self.unary()?;
            lhs = Formula::and(&lhs, &rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        let at = self.offset();
        let Some(t) = self.peek().cloned() else {
            return Err(syntax(at, "unexpected end of input"));
        };
        self.pos += 1;
        match t {
            Tok::Not => Ok(Formula::not(&self.unary()?)),
            Tok::Box => Ok(Formula::boxed(&self.unary()?)),
            Tok::BoxBullet => Ok(self.unary()?.box_bullet()),
            Tok::Diamond => Ok(Formula::not(&Formula::boxed(&Formula::not(&self.unary()?)))),
            Tok::True => Ok(Formula::top()),
            Tok::False => Ok(Formula::bot()),
            Tok::Ident(s) => {
                check_ident(&s, at)?;
                Ok(Formula::var(Var::new(&s)))
            }
            Tok::LParen => {
                let f = self.expr()?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(f)
            }
            Tok::Fix => {
                let x = self.ident()?;
                self.expect(&Tok::Dot, "'.' after fix variable")?;
                let body = self.expr()?;
                Formula::fix_point(&x, &body)
            }
            Tok::Letrec => {
                let mut system = EquationSystem::new();
                loop {
                    let q = self.ident()?;
                    self.expect(&Tok::Eq, "'='")?;
                    let body = self.expr()?;
                    system.add(q, body)?;
                    if self.eat(&Tok::In) {
                        break;
                    }
                    self.expect(&Tok::Semi, "';' or 'in'")?;
                }
                let goal = self.expr()?;
                let sol = system.solve()?;
                Ok(goal.substitute(&sol.as_substitution()))
            }
            _ => {
                self.pos -= 1;
                Err(syntax(at, "expected a formula"))
            }
        }
    }
}

fn check_ident(s: &str, at: usize) -> Result<()> {
    let first = s.as_bytes()[0];
    if !first.is_ascii_alphabetic() {
        return Err(syntax(at, format!("invalid identifier {s:?} (reserved or malformed)")));
    }
    Ok(())
}

/// Parses a complete formula.
pub fn parse(src: &str) -> Result<Formula> {
    let (f, used) = parse_prefix(src)?;
    if src[used..].trim().is_empty() {
        Ok(f)
    } else {
        Err(syntax(used, "unexpected trailing input"))
    }
}

/// Parses the longest formula at the start of `src`; returns it with the
/// byte offset where parsing stopped.
pub fn parse_prefix(src: &str) -> Result<(Formula, usize)> {
    let mut p = Parser {
        toks: lex(src),
        pos: 0,
        end: src.len(),
    };
    let f = p.expr()?;
    Ok((f, p.offset()))
}

/// Text with `fix` binders at the targets of back edges; names `x0, x1, ...`
/// are handed out in order of first back reference, skipping names already
/// used by variables. Shared subgraphs are printed once per occurrence.
pub fn render(phi: &Formula) -> String {
    let mut r = Renderer {
        phi,
        used: phi.vars().iter().map(|v| v.name().to_string()).collect(),
        next: 0,
        stack: Vec::new(),
    };
    r.go(phi.root()).0
}

struct Renderer<'a> {
    phi: &'a Formula,
    used: BTreeSet<String>,
    next: usize,
    stack: Vec<(usize, Option<String>)>,
}

// Precedence levels: 0 binder/iff, 1 imp, 2 or, 3 and, 4 prefix and atoms.
impl Renderer<'_> {
    fn fresh(&mut self) -> String {
        loop {
            let x = format!("x{}", self.next);
            self.next += 1;
            if !self.used.contains(&x) {
                return x;
            }
        }
    }

    fn sub(&mut self, v: usize, min: u8) -> String {
        let (s, lvl) = self.go(v);
        if lvl < min {
            format!("({s})")
        } else {
            s
        }
    }

    fn go(&mut self, v: usize) -> (String, u8) {
        if let Some(i) = self.stack.iter().position(|(w, _)| *w == v) {
            if self.stack[i].1.is_none() {
                let x = self.fresh();
                self.stack[i].1 = Some(x);
            }
            return (self.stack[i].1.clone().expect("just set"), 4);
        }
        self.stack.push((v, None));
        let g = self.phi.graph();
        let s = g.succ(v).to_vec();
        let (body, lvl) = match g.label(v) {
            Label::Top => ("true".to_string(), 4),
            Label::Bot => ("false".to_string(), 4),
            Label::Var(x) => (x.name().to_string(), 4),
            Label::Not => (format!("~{}", self.sub(s[0], 4)), 4),
            Label::Box => (format!("[] {}", self.sub(s[0], 4)), 4),
            Label::And => (format!("{} /\\ {}", self.sub(s[0], 3), self.sub(s[1], 4)), 3),
            Label::Or => (format!("{} \\/ {}", self.sub(s[0], 2), self.sub(s[1], 3)), 2),
            Label::Imp => (format!("{} -> {}", self.sub(s[0], 2), self.sub(s[1], 1)), 1),
        };
        let (_, name) = self.stack.pop().expect("pushed above");
        match name {
            Some(x) => (format!("fix {x}. {body}"), 0),
            None => (body, lvl),
        }
    }
}
