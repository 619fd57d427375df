//! Re-Pair: replace the most frequent adjacent pair by a fresh variable until
//! no pair occurs twice.

use slp_core::{Sslp, Symbol};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

const NONE: u32 = u32::MAX;

#[derive(Default)]
struct Pair {
    count: u32,
    /// May hold stale positions; checked against `active` before use.
    at: Vec<u32>,
}

struct State {
    seq: Vec<u32>,
    prev: Vec<u32>,
    next: Vec<u32>,
    /// `active[i]` when position `i` is counted as an occurrence of the pair starting there.
    active: Vec<bool>,
    pairs: HashMap<(u32, u32), Pair>,
    heap: BinaryHeap<(u32, Reverse<(u32, u32)>)>,
}

impl State {
    fn pair_at(&self, i: u32) -> Option<(u32, u32)> {
        let j = self.next[i as usize];
        (j != NONE).then(|| (self.seq[i as usize], self.seq[j as usize]))
    }

    fn bump(&mut self, p: (u32, u32), by: i32) {
        let e = self.pairs.entry(p).or_default();
        e.count = (e.count as i32 + by) as u32;
        if e.count >= 2 {
            self.heap.push((e.count, Reverse(p)));
        }
    }

    /// Counts the pair at `i` unless it overlaps an identical counted pair just before it.
    fn add(&mut self, i: u32) {
        let Some(p) = self.pair_at(i) else { return };
        let h = self.prev[i as usize];
        if p.0 == p.1 && h != NONE && self.active[h as usize] && self.pair_at(h) == Some(p) {
            return;
        }
        self.active[i as usize] = true;
        self.pairs.entry(p).or_default().at.push(i);
        self.bump(p, 1);
    }

    fn remove(&mut self, i: u32) {
        if i == NONE || !self.active[i as usize] {
            return;
        }
        self.active[i as usize] = false;
        let p = self.pair_at(i).expect("counted pairs have a successor");
        self.bump(p, -1);
    }

    fn replace(&mut self, p: (u32, u32), x: u32) {
        let at = std::mem::take(&mut self.pairs.get_mut(&p).unwrap().at);
        for i in at {
            if !self.active[i as usize] || self.pair_at(i) != Some(p) {
                continue;
            }
            let j = self.next[i as usize];
            let h = self.prev[i as usize];
            let l = self.next[j as usize];
            self.remove(h);
            self.remove(i);
            self.remove(j);
            self.seq[i as usize] = x;
            self.next[i as usize] = l;
            if l != NONE {
                self.prev[l as usize] = i;
            }
            if h != NONE {
                self.add(h);
            }
            self.add(i);
        }
        self.pairs.remove(&p);
    }
}

impl State {
    fn new(seq: Vec<u32>) -> Self {
        let n = seq.len() as u32;
        let mut st = State {
            seq,
            prev: (0..n).map(|i| if i == 0 { NONE } else { i - 1 }).collect(),
            next: (0..n).map(|i| if i + 1 == n { NONE } else { i + 1 }).collect(),
            active: vec![false; n as usize],
            pairs: HashMap::new(),
            heap: BinaryHeap::new(),
        };
        for i in 0..n {
            st.add(i);
        }
        st
    }

    fn remaining(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut i = 0;
        while i != NONE {
            out.push(self.seq[i as usize]);
            i = self.next[i as usize];
        }
        out
    }
}

/// A grammar for `text` over codes `0..alphabet`: one binary rule per
/// replaced pair and a start rule holding what remains.
pub fn compress(text: &[u32], alphabet: u32) -> Sslp {
    assert!(!text.is_empty(), "empty input");
    assert!(text.len() < NONE as usize, "input too long");
    let sym = |c: u32| if c < alphabet { Symbol::Terminal(c) } else { Symbol::Variable(c - alphabet) };
    let mut rules: Vec<Vec<Symbol>> = Vec::new();
    let mut seq = text.to_vec();
    // Splicing can leave runs like `bbb` miscounted by one, so rescan until a
    // fresh count finds nothing to replace.
    loop {
        let mut st = State::new(seq);
        let before = rules.len();
        while let Some((count, Reverse(p))) = st.heap.pop() {
            if st.pairs.get(&p).is_none_or(|e| e.count != count) {
                continue;
            }
            let x = alphabet + rules.len() as u32;
            rules.push(vec![sym(p.0), sym(p.1)]);
            st.replace(p, x);
        }
        seq = st.remaining();
        if rules.len() == before {
            break;
        }
    }
    rules.push(seq.into_iter().map(sym).collect());
    let s = rules.len() as u32 - 1;
    Sslp::new(alphabet, rules, s)
}
