//! On-disk tree descriptions: a line-oriented text format and an equivalent
//! JSON object form. Both carry the rooted edge list (with exact length
//! expressions) and optional per-edge potentials.
//!
//! Text grammar, one directive per line (`#` starts a comment):
//!
//! ```text
//! root <vertex-id>
//! edge <edge-id> <child-vertex> <parent-vertex> <length>
//! potential <edge-id> zero
//! potential <edge-id> constant <c>
//! potential <edge-id> poly <c0> <c1> ...
//! potential <edge-id> samples <x0> <v0> <x1> <v1> ...
//! ```
//!
//! A `<length>` is a decimal literal, a rational `n/d`, or one of the tokens
//! `sqrt2`, `sqrt3`, `pi` optionally scaled by a rational: `sqrt2`,
//! `3*sqrt2`, `3/2*pi`, `pi/4`. Edge ids must be dense `0..I`, vertex ids
//! dense `0..I+1`. The stated child/parent orientation must agree with the
//! root (the child endpoint is the one farther from it); a contradiction is
//! an error rather than a silent reorientation, because potentials are given
//! in the stated local coordinate.

use crate::potential::{EdgePotential, PotentialVector};
use crate::scalar::{rf, Real};
use crate::tree::{Edge, LengthExpr, LengthToken, MetricTree};
use crate::{Error, Result};

/// A parsed tree description: the tree plus one potential per edge
/// (zero unless the description says otherwise), positional in edge id.
#[derive(Debug, Clone)]
pub struct ParsedTree<R> {
    pub tree: MetricTree<R>,
    pub potentials: PotentialVector<R>,
}

/// Parses either format, sniffing JSON by a leading `{`.
pub fn parse_str<R: Real>(src: &str) -> Result<ParsedTree<R>> {
    if src.trim_start().starts_with('{') {
        parse_json(src)
    } else {
        parse_text(src)
    }
}

pub fn read_file<R: Real>(path: &std::path::Path) -> Result<ParsedTree<R>> {
    parse_str(&std::fs::read_to_string(path)?)
}

/// Parses a length expression: decimal, rational, or rational-scaled token.
pub fn parse_length(tok: &str) -> Option<LengthExpr> {
    fn token(s: &str) -> Option<LengthToken> {
        match s {
            "sqrt2" => Some(LengthToken::Sqrt2),
            "sqrt3" => Some(LengthToken::Sqrt3),
            "pi" => Some(LengthToken::Pi),
            _ => None,
        }
    }
    fn rational(s: &str) -> Option<(i64, i64)> {
        if let Some((n, d)) = s.split_once('/') {
            let (n, d) = (n.parse().ok()?, d.parse().ok()?);
            if d <= 0 {
                return None;
            }
            Some((n, d))
        } else {
            Some((s.parse().ok()?, 1))
        }
    }

    if let Some((lhs, rhs)) = tok.split_once('*') {
        let (num, den) = rational(lhs)?;
        return Some(LengthExpr::Scaled { num, den, token: token(rhs)? });
    }
    if let Some(t) = token(tok) {
        return Some(LengthExpr::Scaled { num: 1, den: 1, token: t });
    }
    if let Some((lhs, rhs)) = tok.split_once('/') {
        if let Some(t) = token(lhs) {
            let den: i64 = rhs.parse().ok()?;
            return (den > 0).then_some(LengthExpr::Scaled { num: 1, den, token: t });
        }
        let (num, den) = rational(tok)?;
        return Some(LengthExpr::Scaled { num, den, token: LengthToken::One });
    }
    tok.parse::<f64>().ok().map(LengthExpr::Decimal)
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn parse_text<R: Real>(src: &str) -> Result<ParsedTree<R>> {
    let mut root: Option<(usize, usize)> = None; // (vertex, line)
    let mut edges: Vec<Edge<R>> = Vec::new();
    let mut pots: Vec<(usize, usize, EdgePotential<R>)> = Vec::new(); // (line, edge, q)

    for (ln, raw) in src.lines().enumerate() {
        let ln = ln + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "root" => {
                if toks.len() != 2 {
                    return Err(perr(ln, "usage: root <vertex-id>"));
                }
                let v = toks[1].parse().map_err(|_| perr(ln, "bad vertex id"))?;
                if root.replace((v, ln)).is_some() {
                    return Err(perr(ln, "duplicate root line"));
                }
            }
            "edge" => {
                if toks.len() != 5 {
                    return Err(perr(ln, "usage: edge <id> <child> <parent> <length>"));
                }
                let id = toks[1].parse().map_err(|_| perr(ln, "bad edge id"))?;
                let child = toks[2].parse().map_err(|_| perr(ln, "bad child vertex"))?;
                let parent = toks[3].parse().map_err(|_| perr(ln, "bad parent vertex"))?;
                let expr = parse_length(toks[4])
                    .ok_or_else(|| perr(ln, format!("bad length `{}`", toks[4])))?;
                edges.push(Edge { id, child, parent, len: rf(expr.value()), expr });
            }
            "potential" => {
                if toks.len() < 3 {
                    return Err(perr(ln, "usage: potential <edge-id> <kind> ..."));
                }
                let edge = toks[1].parse().map_err(|_| perr(ln, "bad edge id"))?;
                let nums = |from: usize| -> Result<Vec<R>> {
                    toks[from..]
                        .iter()
                        .map(|t| {
                            t.parse::<f64>()
                                .map(rf::<R>)
                                .map_err(|_| perr(ln, format!("bad number `{t}`")))
                        })
                        .collect()
                };
                let q = match toks[2] {
                    "zero" if toks.len() == 3 => EdgePotential::Zero,
                    "constant" if toks.len() == 4 => EdgePotential::Constant { c: nums(3)?[0] },
                    "poly" if toks.len() > 3 => EdgePotential::Polynomial { coeffs: nums(3)? },
                    "samples" if toks.len() >= 7 && toks.len() % 2 == 1 => {
                        let vals = nums(3)?;
                        let (xs, qs): (Vec<R>, Vec<R>) =
                            vals.chunks(2).map(|c| (c[0], c[1])).unzip();
                        EdgePotential::sampled(xs, qs)
                            .map_err(|_| perr(ln, "bad sample grid"))?
                    }
                    k => return Err(perr(ln, format!("bad potential `{k} ...`"))),
                };
                pots.push((ln, edge, q));
            }
            k => return Err(perr(ln, format!("unknown directive `{k}`"))),
        }
    }

    let (root, _) = root.ok_or_else(|| perr(0, "missing root line"))?;
    assemble(root, edges, pots)
}

#[derive(serde::Deserialize, serde::Serialize)]
struct JTree {
    root: usize,
    edges: Vec<JEdge>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    potentials: Vec<JPot>,
}

#[derive(serde::Deserialize, serde::Serialize)]
struct JEdge {
    id: usize,
    child: usize,
    parent: usize,
    length: JLen,
}

#[derive(serde::Deserialize, serde::Serialize)]
#[serde(untagged)]
enum JLen {
    Num(f64),
    Expr(String),
}

#[derive(serde::Deserialize, serde::Serialize)]
struct JPot {
    edge: usize,
    #[serde(flatten)]
    q: EdgePotential<f64>,
}

fn promote<R: Real>(q: EdgePotential<f64>) -> EdgePotential<R> {
    match q {
        EdgePotential::Zero => EdgePotential::Zero,
        EdgePotential::Constant { c } => EdgePotential::Constant { c: rf(c) },
        EdgePotential::Polynomial { coeffs } => {
            EdgePotential::Polynomial { coeffs: coeffs.into_iter().map(rf).collect() }
        }
        EdgePotential::Sampled { xs, qs } => EdgePotential::Sampled {
            xs: xs.into_iter().map(rf).collect(),
            qs: qs.into_iter().map(rf).collect(),
        },
    }
}

pub fn parse_json<R: Real>(src: &str) -> Result<ParsedTree<R>> {
    let j: JTree = serde_json::from_str(src)?;
    let edges = j
        .edges
        .into_iter()
        .map(|e| {
            let expr = match e.length {
                JLen::Num(x) => LengthExpr::Decimal(x),
                JLen::Expr(s) => parse_length(&s)
                    .ok_or_else(|| perr(0, format!("bad length `{s}` on edge {}", e.id)))?,
            };
            Ok(Edge { id: e.id, child: e.child, parent: e.parent, len: rf(expr.value()), expr })
        })
        .collect::<Result<Vec<_>>>()?;
    let pots = j.potentials.into_iter().map(|p| (0, p.edge, promote(p.q))).collect();
    assemble(j.root, edges, pots)
}

fn assemble<R: Real>(
    root: usize,
    edges: Vec<Edge<R>>,
    pots: Vec<(usize, usize, EdgePotential<R>)>,
) -> Result<ParsedTree<R>> {
    let n = edges.len();
    let tree = MetricTree::new(root, edges)?;
    // the on-disk format demands dense ids so potentials index positionally
    for (i, e) in tree.edges().iter().enumerate() {
        if e.id != i {
            return Err(perr(0, format!("edge ids must be the dense range 0..{n}")));
        }
    }
    for (i, v) in tree.vertices().enumerate() {
        if v != i {
            return Err(perr(0, format!("vertex ids must be the dense range 0..{}", n + 1)));
        }
    }

    let mut potentials = PotentialVector::zero(n);
    let mut seen = vec![false; n];
    for (ln, edge, q) in pots {
        if edge >= n {
            return Err(perr(ln, format!("potential references unknown edge {edge}")));
        }
        if std::mem::replace(&mut seen[edge], true) {
            return Err(perr(ln, format!("duplicate potential for edge {edge}")));
        }
        potentials.0[edge] = q;
    }
    potentials.validate(&tree.lengths())?;
    Ok(ParsedTree { tree, potentials })
}

fn length_to_string(expr: &LengthExpr) -> String {
    match *expr {
        LengthExpr::Decimal(x) => format!("{x}"),
        LengthExpr::Scaled { num, den, token } => {
            let t = match token {
                LengthToken::One => {
                    return if den == 1 { format!("{num}") } else { format!("{num}/{den}") };
                }
                LengthToken::Sqrt2 => "sqrt2",
                LengthToken::Sqrt3 => "sqrt3",
                LengthToken::Pi => "pi",
            };
            match (num, den) {
                (1, 1) => t.to_string(),
                (n, 1) => format!("{n}*{t}"),
                (1, d) => format!("{t}/{d}"),
                (n, d) => format!("{n}/{d}*{t}"),
            }
        }
    }
}

/// Renders a parsed tree back into the text format.
pub fn to_text<R: Real>(parsed: &ParsedTree<R>) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "root {}", parsed.tree.root()).unwrap();
    for e in parsed.tree.edges() {
        writeln!(out, "edge {} {} {} {}", e.id, e.child, e.parent, length_to_string(&e.expr))
            .unwrap();
    }
    for (i, q) in parsed.potentials.iter().enumerate() {
        match q {
            EdgePotential::Zero => {}
            EdgePotential::Constant { c } => writeln!(out, "potential {i} constant {c}").unwrap(),
            EdgePotential::Polynomial { coeffs } => {
                let cs: Vec<String> = coeffs.iter().map(|c| format!("{c}")).collect();
                writeln!(out, "potential {i} poly {}", cs.join(" ")).unwrap();
            }
            EdgePotential::Sampled { xs, qs } => {
                let pairs: Vec<String> =
                    xs.iter().zip(qs).map(|(x, v)| format!("{x} {v}")).collect();
                writeln!(out, "potential {i} samples {}", pairs.join(" ")).unwrap();
            }
        }
    }
    out
}
