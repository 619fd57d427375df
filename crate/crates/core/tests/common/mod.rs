#![allow(dead_code)]

use slp_core::{Sslp, Symbol};

pub fn centroid_fixture() -> Sslp {
    slp_core::sslp::parse_text(include_str!("../data/centroid.sslp")).unwrap()
}

/// Recursive expansion, independent of the library's iterative one.
pub fn unroll(g: &Sslp, x: u32, out: &mut Vec<u32>) {
    for s in &g.rules[x as usize] {
        match *s {
            Symbol::Terminal(a) => out.push(a),
            Symbol::Variable(y) => unroll(g, y, out),
        }
    }
}

pub fn unrolled(g: &Sslp, x: u32) -> Vec<u32> {
    let mut v = Vec::new();
    unroll(g, x, &mut v);
    v
}

/// Every leaf of the derivation tree below `x` as (terminal, edges from `x`).
pub fn leaf_depths(g: &Sslp, x: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    let mut stack = vec![(x, 0u32)];
    while let Some((v, d)) = stack.pop() {
        for s in g.rules[v as usize].iter().rev() {
            match *s {
                Symbol::Terminal(a) => out.push((a, d + 1)),
                Symbol::Variable(y) => stack.push((y, d + 1)),
            }
        }
    }
    out
}

/// Longest chain of variables through the derivation tree, counting both ends.
pub fn traversal_max_path(g: &Sslp, x: u32) -> u64 {
    leaf_depths(g, x).iter().map(|&(_, d)| d as u64).max().unwrap_or(0)
}
