//! Unicast acyclic networks with per-edge fading, cut enumeration and
//! the cut-set bound `min_Ω E_S rank(A_{S,Ω})`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fading::{FadingPmf, StateSample};
use crate::gf2::{shift_truncate_block, Gf2Matrix};

/// Most inner (non-source, non-sink) nodes accepted by [`enumerate_cuts`].
pub const MAX_CUT_NODES: usize = 20;
/// Largest per-cut product state space for [`cutset_bound_exact`].
pub const MAX_EXACT_STATES: u128 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Node {
    pub name: String,
    /// Bit levels per transmitted symbol.
    pub levels: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub pmf: FadingPmf,
}

/// A validated acyclic network with one source and one sink.
///
/// Each node sends one symbol per timestep; every outgoing edge carries that
/// symbol through its own fading level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetworkSpec {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    source: usize,
    sink: usize,
    #[serde(skip)]
    topo: Vec<usize>,
}

impl NetworkSpec {
    pub fn new(nodes: Vec<Node>, edges: Vec<Edge>, source: usize, sink: usize) -> Result<Self> {
        let n = nodes.len();
        if source >= n || sink >= n {
            return Err(invalid("source or sink index out of range"));
        }
        if source == sink {
            return Err(invalid("source and sink must differ"));
        }
        for node in &nodes {
            if node.levels == 0 {
                return Err(invalid(format!(
                    "node {} must have at least one level",
                    node.name
                )));
            }
        }
        for e in &edges {
            if e.from >= n || e.to >= n {
                return Err(invalid("edge endpoint out of range"));
            }
            let (a, b) = (&nodes[e.from].name, &nodes[e.to].name);
            if e.from == e.to {
                return Err(Error::Cycle {
                    witness: vec![a.clone(), a.clone()],
                });
            }
            if e.to == source {
                return Err(invalid(format!("edge {a} -> {b} enters the source")));
            }
            if e.from == sink {
                return Err(invalid(format!("edge {a} -> {b} leaves the sink")));
            }
            if e.pmf.max_support() > nodes[e.from].levels {
                return Err(invalid(format!(
                    "edge {a} -> {b}: fading level {} exceeds {} levels of {a}",
                    e.pmf.max_support(),
                    nodes[e.from].levels
                )));
            }
        }
        let topo = topological_order(&nodes, &edges)?;
        Ok(Self {
            nodes,
            edges,
            source,
            sink,
            topo,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    /// Nodes in a topological order (ties by declaration order).
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn edge_pmfs(&self) -> Vec<&FadingPmf> {
        self.edges.iter().map(|e| &e.pmf).collect()
    }

    /// Nodes other than the source and sink, in declaration order.
    pub fn inner_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&v| v != self.source && v != self.sink)
            .collect()
    }

    /// Number of edges on the longest source-to-sink path, 0 if none exists.
    pub fn longest_path_len(&self) -> usize {
        let mut dist: Vec<Option<usize>> = vec![None; self.nodes.len()];
        dist[self.source] = Some(0);
        for &v in &self.topo {
            if let Some(d) = dist[v] {
                for e in self.edges.iter().filter(|e| e.from == v) {
                    dist[e.to] = Some(dist[e.to].map_or(d + 1, |x| x.max(d + 1)));
                }
            }
        }
        dist[self.sink].unwrap_or(0)
    }

    pub fn cut_label(&self, cut: &Cut) -> String {
        cut.members()
            .iter()
            .map(|&v| self.nodes[v].name.as_str())
            .collect::<Vec<_>>()
            .join(";")
    }
}

fn topological_order(nodes: &[Node], edges: &[Edge]) -> Result<Vec<usize>> {
    let n = nodes.len();
    let mut indeg = vec![0usize; n];
    for e in edges {
        indeg[e.to] += 1;
    }
    let mut order = Vec::with_capacity(n);
    let mut done = vec![false; n];
    // repeatedly take the first ready node so the order is reproducible
    while order.len() < n {
        let Some(v) = (0..n).find(|&v| !done[v] && indeg[v] == 0) else {
            return Err(Error::Cycle {
                witness: cycle_witness(nodes, edges, &done),
            });
        };
        done[v] = true;
        order.push(v);
        for e in edges.iter().filter(|e| e.from == v) {
            indeg[e.to] -= 1;
        }
    }
    Ok(order)
}

/// Walks backwards along unfinished in-edges until a node repeats.
fn cycle_witness(nodes: &[Node], edges: &[Edge], done: &[bool]) -> Vec<String> {
    let start = (0..nodes.len())
        .find(|&v| !done[v])
        .expect("unfinished node");
    let mut path = vec![start];
    let mut seen = HashMap::from([(start, 0usize)]);
    loop {
        let v = *path.last().unwrap();
        let pred = edges
            .iter()
            .find(|e| e.to == v && !done[e.from])
            .expect("every unfinished node has an unfinished predecessor")
            .from;
        if let Some(&i) = seen.get(&pred) {
            let mut cyc: Vec<usize> = path[i..].to_vec();
            cyc.reverse();
            cyc.push(cyc[0]);
            return cyc.into_iter().map(|v| nodes[v].name.clone()).collect();
        }
        seen.insert(pred, path.len());
        path.push(pred);
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn key_value<'a>(line: usize, token: Option<&'a str>, key: &str) -> Result<&'a str> {
    let token = token.ok_or_else(|| parse_err(line, format!("missing {key}=...")))?;
    token
        .strip_prefix(key)
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| parse_err(line, format!("expected {key}=..., got '{token}'")))
}

/// Parses the line-oriented network format:
///
/// ```text
/// node <name> levels=<l>
/// edge <from> <to> pmf=<level:prob,...>
/// source <name>
/// sink <name>
/// ```
///
/// `#` starts a comment. Nodes may be referenced before they are declared.
pub fn parse_network(text: &str) -> Result<NetworkSpec> {
    let mut nodes: Vec<Node> = Vec::new();
    let mut node_line: HashMap<String, usize> = HashMap::new();
    let mut raw_edges: Vec<(usize, String, String, FadingPmf)> = Vec::new();
    let mut source: Option<(usize, String)> = None;
    let mut sink: Option<(usize, String)> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tok = content.split_whitespace();
        let directive = tok.next().unwrap();
        match directive {
            "node" => {
                let name = tok
                    .next()
                    .ok_or_else(|| parse_err(line, "node needs a name"))?;
                let levels: usize = key_value(line, tok.next(), "levels")?
                    .parse()
                    .map_err(|_| parse_err(line, "levels must be a nonnegative integer"))?;
                if levels == 0 {
                    return Err(parse_err(line, "levels must be at least 1"));
                }
                if node_line.insert(name.to_string(), line).is_some() {
                    return Err(parse_err(line, format!("node {name} declared twice")));
                }
                nodes.push(Node {
                    name: name.to_string(),
                    levels,
                });
            }
            "edge" => {
                let from = tok
                    .next()
                    .ok_or_else(|| parse_err(line, "edge needs two nodes"))?;
                let to = tok
                    .next()
                    .ok_or_else(|| parse_err(line, "edge needs two nodes"))?;
                let pmf: FadingPmf = key_value(line, tok.next(), "pmf")?
                    .parse()
                    .map_err(|e: Error| parse_err(line, e.to_string()))?;
                raw_edges.push((line, from.to_string(), to.to_string(), pmf));
            }
            "source" | "sink" => {
                let name = tok
                    .next()
                    .ok_or_else(|| parse_err(line, format!("{directive} needs a node name")))?;
                let slot = if directive == "source" {
                    &mut source
                } else {
                    &mut sink
                };
                if slot.is_some() {
                    return Err(parse_err(line, format!("{directive} declared twice")));
                }
                *slot = Some((line, name.to_string()));
            }
            other => return Err(parse_err(line, format!("unknown directive '{other}'"))),
        }
        if let Some(extra) = tok.next() {
            return Err(parse_err(line, format!("unexpected token '{extra}'")));
        }
    }

    let index: HashMap<&str, usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.name.as_str(), i))
        .collect();
    let lookup = |line: usize, name: &str| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| parse_err(line, format!("unknown node '{name}'")))
    };
    let mut edges = Vec::with_capacity(raw_edges.len());
    for (line, from, to, pmf) in raw_edges {
        let (f, t) = (lookup(line, &from)?, lookup(line, &to)?);
        if pmf.max_support() > nodes[f].levels {
            return Err(parse_err(
                line,
                format!(
                    "fading level {} exceeds {} levels of {from}",
                    pmf.max_support(),
                    nodes[f].levels
                ),
            ));
        }
        edges.push((
            line,
            Edge {
                from: f,
                to: t,
                pmf,
            },
        ));
    }
    let last = text.lines().count().max(1);
    let (sl, sname) = source.ok_or_else(|| parse_err(last, "no source declared"))?;
    let (dl, dname) = sink.ok_or_else(|| parse_err(last, "no sink declared"))?;
    let (s, d) = (lookup(sl, &sname)?, lookup(dl, &dname)?);
    for (line, e) in &edges {
        if e.to == s {
            return Err(parse_err(*line, "edge enters the source"));
        }
        if e.from == d {
            return Err(parse_err(*line, "edge leaves the sink"));
        }
    }
    NetworkSpec::new(nodes, edges.into_iter().map(|(_, e)| e).collect(), s, d).map_err(
        |e| match e {
            Error::InvalidArgument(m) => parse_err(dl, m),
            other => other,
        },
    )
}

impl FromStr for NetworkSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_network(s)
    }
}

impl fmt::Display for NetworkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in &self.nodes {
            writeln!(f, "node {} levels={}", n.name, n.levels)?;
        }
        for e in &self.edges {
            writeln!(
                f,
                "edge {} {} pmf={}",
                self.nodes[e.from].name, self.nodes[e.to].name, e.pmf
            )?;
        }
        writeln!(f, "source {}", self.nodes[self.source].name)?;
        writeln!(f, "sink {}", self.nodes[self.sink].name)
    }
}

/// Source-side node set Ω.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Cut {
    /// Index in [`enumerate_cuts`] order.
    pub id: usize,
    members: Vec<usize>,
}

impl Cut {
    pub fn new(net: &NetworkSpec, id: usize, mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if members.iter().any(|&v| v >= net.nodes.len()) {
            return Err(invalid("cut member out of range"));
        }
        if members.binary_search(&net.source).is_err() {
            return Err(invalid("cut must contain the source"));
        }
        if members.binary_search(&net.sink).is_ok() {
            return Err(invalid("cut must exclude the sink"));
        }
        Ok(Self { id, members })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, node: usize) -> bool {
        self.members.binary_search(&node).is_ok()
    }
}

/// All cuts; cut `id` holds the source plus the inner nodes whose bit is set
/// in `id` (bit `i` = `i`-th inner node in declaration order).
pub fn enumerate_cuts(net: &NetworkSpec) -> Result<Vec<Cut>> {
    let inner = net.inner_nodes();
    if inner.len() > MAX_CUT_NODES {
        return Err(Error::TooLarge {
            what: "cut enumeration (inner nodes)",
            size: inner.len() as u128,
            limit: MAX_CUT_NODES as u128,
        });
    }
    (0..1usize << inner.len())
        .map(|mask| {
            let mut members = vec![net.source];
            members.extend(
                inner
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &v)| v),
            );
            Cut::new(net, mask, members)
        })
        .collect()
}

/// Edges from Ω to Ω^C, in declaration order.
pub fn crossing_edges(net: &NetworkSpec, cut: &Cut) -> Vec<usize> {
    net.edges
        .iter()
        .enumerate()
        .filter(|(_, e)| cut.contains(e.from) && !cut.contains(e.to))
        .map(|(i, _)| i)
        .collect()
}

/// `A_{S,Ω}`: maps the concatenated symbols of Ω (declaration order) to the
/// received bits of every Ω^C node with a crossing in-edge.
///
/// A receiver's block has `m̂` rows, the largest level among its crossing
/// in-edges; each edge adds its shift-truncate block there.
pub fn transfer_matrix(net: &NetworkSpec, cut: &Cut, state: &StateSample) -> Result<Gf2Matrix> {
    if state.levels.len() != net.edges.len() {
        return Err(Error::DimensionMismatch {
            context: "state sample: one level per edge",
            expected: net.edges.len(),
            actual: state.levels.len(),
        });
    }
    transfer_matrix_for(net, cut, &crossing_edges(net, cut), &state.levels)
}

fn transfer_matrix_for(
    net: &NetworkSpec,
    cut: &Cut,
    crossing: &[usize],
    levels: &[usize],
) -> Result<Gf2Matrix> {
    let mut col_off = vec![0usize; net.nodes.len()];
    let mut cols = 0;
    for &v in cut.members() {
        col_off[v] = cols;
        cols += net.nodes[v].levels;
    }
    let mut m_hat = vec![0usize; net.nodes.len()];
    let mut has_in = vec![false; net.nodes.len()];
    for &e in crossing {
        let edge = &net.edges[e];
        m_hat[edge.to] = m_hat[edge.to].max(levels[e]);
        has_in[edge.to] = true;
    }
    let mut row_off = vec![0usize; net.nodes.len()];
    let mut rows = 0;
    for v in (0..net.nodes.len()).filter(|&v| has_in[v]) {
        row_off[v] = rows;
        rows += m_hat[v];
    }
    let mut a = Gf2Matrix::zeros(rows, cols);
    for &e in crossing {
        let edge = &net.edges[e];
        let l = net.nodes[edge.from].levels;
        let block = shift_truncate_block(l, levels[e], m_hat[edge.to])?;
        a.xor_block(row_off[edge.to], col_off[edge.from], &block)?;
    }
    Ok(a)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutValue {
    pub cut: Cut,
    pub label: String,
    pub expected_rank: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutsetBound {
    pub value: f64,
    pub argmin: Cut,
    pub per_cut: Vec<CutValue>,
}

fn argmin_first(values: impl Iterator<Item = f64>, tol: f64) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.enumerate() {
        if v < best.1 - tol {
            best = (i, v);
        }
    }
    best.0
}

/// Exact `E_S rank` for every cut by enumerating the crossing-edge states.
pub fn cutset_bound_exact(net: &NetworkSpec) -> Result<CutsetBound> {
    let cuts = enumerate_cuts(net)?;
    let per_cut = cuts
        .par_iter()
        .map(|cut| {
            Ok(CutValue {
                cut: cut.clone(),
                label: net.cut_label(cut),
                expected_rank: expected_rank_exact(net, cut)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let i = argmin_first(per_cut.iter().map(|c| c.expected_rank), 1e-12);
    Ok(CutsetBound {
        value: per_cut[i].expected_rank,
        argmin: per_cut[i].cut.clone(),
        per_cut,
    })
}

fn expected_rank_exact(net: &NetworkSpec, cut: &Cut) -> Result<f64> {
    let crossing = crossing_edges(net, cut);
    let supports: Vec<Vec<(usize, f64)>> = crossing
        .iter()
        .map(|&e| net.edges[e].pmf.support().collect())
        .collect();
    let size = supports
        .iter()
        .try_fold(1u128, |acc, s| acc.checked_mul(s.len() as u128))
        .unwrap_or(u128::MAX);
    if size > MAX_EXACT_STATES {
        return Err(Error::TooLarge {
            what: "crossing-edge state space",
            size,
            limit: MAX_EXACT_STATES,
        });
    }
    let mut levels = vec![0usize; net.edges.len()];
    let mut digits = vec![0usize; crossing.len()];
    let mut total = 0.0;
    loop {
        let mut p = 1.0;
        for (k, &e) in crossing.iter().enumerate() {
            let (lvl, q) = supports[k][digits[k]];
            levels[e] = lvl;
            p *= q;
        }
        total += p * transfer_matrix_for(net, cut, &crossing, &levels)?.rank() as f64;
        // mixed-radix increment, last digit fastest
        let mut k = crossing.len();
        loop {
            if k == 0 {
                return Ok(total);
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < supports[k].len() {
                break;
            }
            digits[k] = 0;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutEstimate {
    pub cut: Cut,
    pub label: String,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutsetEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
    pub argmin: Cut,
    pub per_cut: Vec<CutEstimate>,
}

/// Monte Carlo `E_S rank` per cut with common random states across cuts.
///
/// Sample `s` draws edge `e` from counter `s·|E| + e` of the stream keyed by
/// `seed`, so the result does not depend on the thread count.
pub fn cutset_bound_mc(net: &NetworkSpec, samples: u64, seed: u64) -> Result<CutsetEstimate> {
    if samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    let cuts = enumerate_cuts(net)?;
    let crossing: Vec<Vec<usize>> = cuts.iter().map(|c| crossing_edges(net, c)).collect();
    let pmfs = net.edge_pmfs();
    let zero = || vec![(0u64, 0u64); cuts.len()];
    let sums = (0..samples)
        .into_par_iter()
        .try_fold(zero, |mut acc, s| -> Result<_> {
            let state = StateSample::draw(&pmfs, seed, s);
            for (k, cut) in cuts.iter().enumerate() {
                let r = transfer_matrix_for(net, cut, &crossing[k], &state.levels)?.rank() as u64;
                acc[k].0 += r;
                acc[k].1 += r * r;
            }
            Ok(acc)
        })
        .try_reduce(zero, |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                x.0 += y.0;
                x.1 += y.1;
            }
            Ok(a)
        })?;
    let n = samples as f64;
    let per_cut: Vec<CutEstimate> = cuts
        .iter()
        .zip(&sums)
        .map(|(cut, &(s1, s2))| {
            let mean = s1 as f64 / n;
            let var = if samples > 1 {
                ((s2 as f64 - n * mean * mean) / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            CutEstimate {
                cut: cut.clone(),
                label: net.cut_label(cut),
                mean,
                stderr: (var / n).sqrt(),
            }
        })
        .collect();
    // integer sums make exact comparison reproducible
    let i = argmin_first(sums.iter().map(|s| s.0 as f64), 0.0);
    Ok(CutsetEstimate {
        estimate: per_cut[i].mean,
        stderr: per_cut[i].stderr,
        samples,
        argmin: per_cut[i].cut.clone(),
        per_cut,
    })
}
