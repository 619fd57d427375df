//! Symmetric centroid decomposition of rooted DAGs with ordered multi-edges.
//!
//! An edge is identified by its source node and its position (slot) in the
//! source's edge list, so parallel edges stay distinct.

use crate::error::{Error, Result};
use crate::sslp::MAX_LEN;
use std::fmt::Write;

#[derive(Clone, Debug)]
pub struct MultiDag {
    edges: Vec<Vec<u32>>,
    root: u32,
    /// Root first; every edge goes from an earlier to a later node.
    topo: Vec<u32>,
}

impl MultiDag {
    pub fn new(edges: Vec<Vec<u32>>, root: u32) -> Result<Self> {
        let n = edges.len();
        if n == 0 {
            return Err(Error::InvalidDag("no nodes".into()));
        }
        if root as usize >= n {
            return Err(Error::InvalidDag(format!("root {root} out of range")));
        }
        for (u, out) in edges.iter().enumerate() {
            for &v in out {
                if v as usize >= n {
                    return Err(Error::InvalidDag(format!("edge {u} -> {v} out of range")));
                }
                if v == root {
                    return Err(Error::InvalidDag("root has an incoming edge".into()));
                }
            }
        }
        // reverse postorder from the root
        let mut color = vec![0u8; n];
        let mut post = Vec::with_capacity(n);
        let mut stack = vec![(root, 0usize)];
        color[root as usize] = 1;
        while let Some(top) = stack.last_mut() {
            let (u, i) = *top;
            if i < edges[u as usize].len() {
                top.1 += 1;
                let v = edges[u as usize][i];
                match color[v as usize] {
                    0 => {
                        color[v as usize] = 1;
                        stack.push((v, 0));
                    }
                    1 => return Err(Error::InvalidDag(format!("cycle through node {v}"))),
                    _ => {}
                }
            } else {
                color[u as usize] = 2;
                post.push(u);
                stack.pop();
            }
        }
        if post.len() != n {
            return Err(Error::InvalidDag(format!("{} nodes unreachable from the root", n - post.len())));
        }
        post.reverse();
        Ok(MultiDag { edges, root, topo: post })
    }

    pub fn node_count(&self) -> usize {
        self.edges.len()
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn edges(&self, u: u32) -> &[u32] {
        &self.edges[u as usize]
    }

    pub fn topological_order(&self) -> &[u32] {
        &self.topo
    }
}

fn add(a: u64, b: u64) -> Result<u64> {
    a.checked_add(b).filter(|&s| s < MAX_LEN).ok_or(Error::CountOverflow)
}

/// Number of paths from every node to a sink, and the total `n(D)`.
pub fn leaf_path_counts(d: &MultiDag) -> Result<(Vec<u64>, u64)> {
    let mut pi = vec![0u64; d.node_count()];
    for &u in d.topo.iter().rev() {
        let out = d.edges(u);
        pi[u as usize] = if out.is_empty() { 1 } else { out.iter().try_fold(0u64, |acc, &v| add(acc, pi[v as usize]))? };
    }
    let total = pi[d.root as usize];
    Ok((pi, total))
}

/// Number of paths from the root to every node.
pub fn root_path_counts(d: &MultiDag) -> Result<Vec<u64>> {
    let mut pi = vec![0u64; d.node_count()];
    pi[d.root as usize] = 1;
    for &u in &d.topo {
        let here = pi[u as usize];
        for &v in d.edges(u) {
            pi[v as usize] = add(pi[v as usize], here)?;
        }
    }
    Ok(pi)
}

pub(crate) fn floor_log2(x: u64) -> u32 {
    63 - x.leading_zeros()
}

/// A maximal path `nodes[0] -> nodes[1] -> ...` of decomposition edges;
/// `slots[i]` is the position of the edge leaving `nodes[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CentroidPath {
    pub nodes: Vec<u32>,
    pub slots: Vec<u32>,
}

impl CentroidPath {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct ScdResult {
    /// Per node, floor(log2) of the paths reaching it from the root and of the paths leaving it to sinks.
    pub labels: Vec<(u32, u32)>,
    /// The slot of the unique decomposition edge leaving each node, if any.
    pub out_slot: Vec<Option<u32>>,
    /// Ordered by the topological rank of the first node.
    pub paths: Vec<CentroidPath>,
}

impl ScdResult {
    pub fn is_scd_edge(&self, u: u32, slot: u32) -> bool {
        self.out_slot[u as usize] == Some(slot)
    }

    pub fn scd_edges(&self) -> Vec<(u32, u32)> {
        self.out_slot.iter().enumerate().filter_map(|(u, s)| s.map(|s| (u as u32, s))).collect()
    }
}

pub fn decompose(d: &MultiDag) -> Result<ScdResult> {
    let (down, _) = leaf_path_counts(d)?;
    let up = root_path_counts(d)?;
    let n = d.node_count();
    let labels: Vec<(u32, u32)> = (0..n).map(|v| (floor_log2(up[v]), floor_log2(down[v]))).collect();
    let mut out_slot = vec![None; n];
    let mut has_in = vec![false; n];
    for u in 0..n {
        for (slot, &v) in d.edges[u].iter().enumerate() {
            if labels[u] == labels[v as usize] {
                debug_assert!(out_slot[u].is_none() && !has_in[v as usize]);
                if out_slot[u].is_none() && !has_in[v as usize] {
                    out_slot[u] = Some(slot as u32);
                    has_in[v as usize] = true;
                }
            }
        }
    }
    let mut paths = Vec::new();
    for &head in &d.topo {
        if has_in[head as usize] {
            continue;
        }
        let mut p = CentroidPath { nodes: vec![head], slots: Vec::new() };
        let mut u = head;
        while let Some(s) = out_slot[u as usize] {
            p.slots.push(s);
            u = d.edges[u as usize][s as usize];
            p.nodes.push(u);
        }
        paths.push(p);
    }
    Ok(ScdResult { labels, out_slot, paths })
}

/// Graphviz rendering with decomposition edges drawn bold red.
pub fn to_dot(d: &MultiDag, r: &ScdResult, label: impl Fn(u32) -> String) -> String {
    let mut s = String::from("digraph scd {\n  node [shape=box];\n");
    for u in 0..d.node_count() as u32 {
        let (a, b) = r.labels[u as usize];
        writeln!(s, "  n{u} [label=\"{} ({a},{b})\"];", label(u)).unwrap();
    }
    for u in 0..d.node_count() as u32 {
        for (slot, &v) in d.edges(u).iter().enumerate() {
            let style = if r.is_scd_edge(u, slot as u32) { " color=red penwidth=2" } else { "" };
            writeln!(s, "  n{u} -> n{v} [label=\"{}\"{style}];", slot + 1).unwrap();
        }
    }
    s.push_str("}\n");
    s
}
