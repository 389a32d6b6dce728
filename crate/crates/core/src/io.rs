//! Graph JSON, DOT output and the model JSON format.
//!
//! Graph JSON: `{"root": 0, "nodes": [{"label": "box", "succ": [0]}]}` with
//! labels `top bot not box and or imp var:<name>`.
//!
//! Model JSON: `{"worlds": 2, "rel": [[0, 1]], "val": {"p": [1]}}`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::formula::{Formula, Label, Var};
use crate::graph::LabeledGraph;
use crate::kripke::KripkeModel;

fn format_err(path: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Format {
        path: path.into(),
        msg: msg.into(),
    }
}

pub fn label_name(l: &Label) -> String {
    match l {
        Label::Top => "top".into(),
        Label::Bot => "bot".into(),
        Label::Var(v) => format!("var:{v}"),
        Label::Not => "not".into(),
        Label::Box => "box".into(),
        Label::And => "and".into(),
        Label::Or => "or".into(),
        Label::Imp => "imp".into(),
    }
}

fn label_from_name(s: &str) -> Option<Label> {
    Some(match s {
        "top" => Label::Top,
        "bot" => Label::Bot,
        "not" => Label::Not,
        "box" => Label::Box,
        "and" => Label::And,
        "or" => Label::Or,
        "imp" => Label::Imp,
        _ => {
            let name = s.strip_prefix("var:")?;
            let ok = name
                .bytes()
                .next()
                .is_some_and(|b| b.is_ascii_alphabetic() || b == b'_')
                && name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_');
            if !ok {
                return None;
            }
            Label::Var(Var::new(name))
        }
    })
}

pub fn to_json(phi: &Formula) -> Value {
    let g = phi.graph();
    let nodes: Vec<Value> = g
        .vertices()
        .map(|v| json!({"label": label_name(g.label(v)), "succ": g.succ(v)}))
        .collect();
    json!({"root": g.root(), "nodes": nodes})
}

pub fn to_json_string(phi: &Formula) -> String {
    serde_json::to_string_pretty(&to_json(phi)).expect("json values serialize")
}

fn index(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| format_err(path, "expected a non-negative integer"))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| format_err(path, format!("missing field {key:?}")))
}

pub fn from_json(v: &Value) -> Result<Formula> {
    let obj = v.as_object().ok_or_else(|| format_err("$", "expected an object"))?;
    let root = index(field(obj, "root", "$")?, "$.root")?;
    let nodes = field(obj, "nodes", "$")?
        .as_array()
        .ok_or_else(|| format_err("$.nodes", "expected an array"))?;
    let mut labels = Vec::with_capacity(nodes.len());
    let mut succ = Vec::with_capacity(nodes.len());
    for (i, node) in nodes.iter().enumerate() {
        let path = format!("$.nodes[{i}]");
        let n = node
            .as_object()
            .ok_or_else(|| format_err(&path, "expected an object"))?;
        let lpath = format!("{path}.label");
        let name = field(n, "label", &path)?
            .as_str()
            .ok_or_else(|| format_err(&lpath, "expected a string"))?;
        let label = label_from_name(name).ok_or_else(|| format_err(&lpath, format!("unknown label {name:?}")))?;
        let spath = format!("{path}.succ");
        let s = field(n, "succ", &path)?
            .as_array()
            .ok_or_else(|| format_err(&spath, "expected an array"))?
            .iter()
            .enumerate()
            .map(|(k, x)| index(x, &format!("{spath}[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        labels.push(label);
        succ.push(s);
    }
    let g = LabeledGraph::new(root, labels, succ).map_err(|e| format_err("$", e.to_string()))?;
    Formula::from_graph(g).map_err(|e| format_err("$", e.to_string()))
}

pub fn from_json_str(s: &str) -> Result<Formula> {
    let v: Value = serde_json::from_str(s).map_err(|e| format_err("$", e.to_string()))?;
    from_json(&v)
}

fn dot_label(l: &Label) -> String {
    match l {
        Label::Top => "⊤".into(),
        Label::Bot => "⊥".into(),
        Label::Var(v) => v.to_string(),
        Label::Not => "¬".into(),
        Label::Box => "□".into(),
        Label::And => "∧".into(),
        Label::Or => "∨".into(),
        Label::Imp => "→".into(),
    }
}

/// One node per vertex; edges carry their successor position. The root is
/// drawn with a double border.
pub fn to_dot(phi: &Formula) -> String {
    let g = phi.graph();
    let mut s = String::from("digraph formula {\n");
    for v in g.vertices() {
        let shape = if v == g.root() { ", peripheries=2" } else { "" };
        let _ = writeln!(s, "  n{v} [label=\"{}\"{shape}];", dot_label(g.label(v)));
    }
    for v in g.vertices() {
        for (i, w) in g.succ(v).iter().enumerate() {
            let _ = writeln!(s, "  n{v} -> n{w} [label=\"{i}\"];");
        }
    }
    s.push_str("}\n");
    s
}

pub fn model_to_json(m: &KripkeModel) -> Value {
    let rel: Vec<Value> = m.relation().iter().map(|&(a, b)| json!([a, b])).collect();
    let val: Map<String, Value> = m
        .valuation()
        .iter()
        .map(|(v, row)| {
            let ws: Vec<usize> = (0..m.worlds()).filter(|&w| row[w]).collect();
            (v.to_string(), json!(ws))
        })
        .collect();
    json!({"worlds": m.worlds(), "rel": rel, "val": val})
}

pub fn model_from_json(v: &Value) -> Result<KripkeModel> {
    let obj = v.as_object().ok_or_else(|| format_err("$", "expected an object"))?;
    let worlds = index(field(obj, "worlds", "$")?, "$.worlds")?;
    let mut rel = Vec::new();
    if let Some(r) = obj.get("rel") {
        let arr = r.as_array().ok_or_else(|| format_err("$.rel", "expected an array"))?;
        for (i, e) in arr.iter().enumerate() {
            let path = format!("$.rel[{i}]");
            let pair = e
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| format_err(&path, "expected a pair [i, j]"))?;
            rel.push((index(&pair[0], &path)?, index(&pair[1], &path)?));
        }
    }
    let mut val = BTreeMap::new();
    if let Some(x) = obj.get("val") {
        let o = x.as_object().ok_or_else(|| format_err("$.val", "expected an object"))?;
        for (name, ws) in o {
            let path = format!("$.val.{name}");
            let arr = ws.as_array().ok_or_else(|| format_err(&path, "expected an array"))?;
            let ws = arr
                .iter()
                .enumerate()
                .map(|(k, w)| index(w, &format!("{path}[{k}]")))
                .collect::<Result<Vec<_>>>()?;
            val.insert(Var::new(name), ws);
        }
    }
    KripkeModel::new(worlds, rel, val).map_err(|e| format_err("$", e.to_string()))
}

pub fn model_from_json_str(s: &str) -> Result<KripkeModel> {
    let v: Value = serde_json::from_str(s).map_err(|e| format_err("$", e.to_string()))?;
    model_from_json(&v)
}
