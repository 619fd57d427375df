mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slp_core::gen::random_dag;
use slp_core::scd::{leaf_path_counts, root_path_counts, to_dot};
use slp_core::{decompose, Error, MultiDag, Symbol};

fn fixture_dag() -> MultiDag {
    let g = common::centroid_fixture();
    let edges = g
        .rules
        .iter()
        .map(|r| r.iter().filter_map(|s| if let Symbol::Variable(y) = *s { Some(y) } else { None }).collect())
        .collect();
    MultiDag::new(edges, 0).unwrap()
}

#[test]
fn fixture_counts() {
    let d = fixture_dag();
    let (down, n) = leaf_path_counts(&d).unwrap();
    assert_eq!((down[9], down[10], down[0], n), (16, 8, 62, 62));
    let up = root_path_counts(&d).unwrap();
    assert_eq!((up[9], up[11], up[13], up[0]), (2, 14, 31, 1));
}

#[test]
fn fixture_decomposition() {
    let d = fixture_dag();
    let r = decompose(&d).unwrap();
    let long: Vec<_> = r.paths.iter().filter(|p| !p.is_empty()).collect();
    assert_eq!(long.len(), 1);
    assert_eq!(long[0].nodes, (0..=8).collect::<Vec<u32>>());
    assert_eq!(long[0].len(), 8);
    for x in 0..=8 {
        assert_eq!(r.labels[x], (0, 5));
    }
    assert_eq!(r.paths.len(), 15 - 8);
    let mut seen = [0; 15];
    for p in &r.paths {
        for &v in &p.nodes {
            seen[v as usize] += 1;
        }
    }
    assert!(seen.iter().all(|&c| c == 1));
    let dot = to_dot(&d, &r, |v| format!("X{v}"));
    assert!(dot.starts_with("digraph"));
}

#[test]
fn trivial_dags() {
    let d = MultiDag::new(vec![vec![]], 0).unwrap();
    assert_eq!(leaf_path_counts(&d).unwrap(), (vec![1], 1));
    assert_eq!(root_path_counts(&d).unwrap(), vec![1]);
    let r = decompose(&d).unwrap();
    assert_eq!(r.paths.len(), 1);
    assert!(r.paths[0].is_empty());

    let diamond = MultiDag::new(vec![vec![1, 2], vec![3], vec![3], vec![]], 0).unwrap();
    assert_eq!(root_path_counts(&diamond).unwrap()[3], 2);

    // 64 doublings overflow
    let mut edges: Vec<Vec<u32>> = (0..64).map(|i| vec![i + 1, i + 1]).collect();
    edges.push(vec![]);
    let big = MultiDag::new(edges, 0).unwrap();
    assert_eq!(leaf_path_counts(&big).unwrap_err(), Error::CountOverflow);
}

fn floor_log2(x: u64) -> u32 {
    63 - x.leading_zeros()
}

/// Checks the decomposition of `d` against counts recomputed here; returns the
/// largest number of non-decomposition edges seen on a root-to-sink path.
fn check(d: &MultiDag, rng: &mut ChaCha8Rng) -> (u32, f64) {
    let n = d.node_count();
    let r = decompose(d).unwrap();
    // path counts by brute force over a topological order computed here
    let mut indeg = vec![0usize; n];
    for u in 0..n as u32 {
        for &v in d.edges(u) {
            indeg[v as usize] += 1;
        }
    }
    let mut order = vec![d.root()];
    let mut k = 0;
    let mut left = indeg.clone();
    while k < order.len() {
        let u = order[k];
        k += 1;
        for &v in d.edges(u) {
            left[v as usize] -= 1;
            if left[v as usize] == 0 {
                order.push(v);
            }
        }
    }
    assert_eq!(order.len(), n);
    let mut up = vec![0u64; n];
    up[d.root() as usize] = 1;
    for &u in &order {
        for &v in d.edges(u) {
            up[v as usize] += up[u as usize];
        }
    }
    let mut down = vec![0u64; n];
    for &u in order.iter().rev() {
        let e = d.edges(u);
        down[u as usize] = if e.is_empty() { 1 } else { e.iter().map(|&v| down[v as usize]).sum() };
    }
    let total = down[d.root() as usize];
    let labels: Vec<(u32, u32)> = (0..n).map(|v| (floor_log2(up[v]), floor_log2(down[v]))).collect();
    assert_eq!(r.labels, labels);

    // every edge with equal labels is a decomposition edge, and degrees stay at most one
    let mut in_deg = vec![0; n];
    let mut out_deg = vec![0; n];
    for u in 0..n as u32 {
        for (slot, &v) in d.edges(u).iter().enumerate() {
            let same = labels[u as usize] == labels[v as usize];
            assert_eq!(r.is_scd_edge(u, slot as u32), same);
            if same {
                in_deg[v as usize] += 1;
                out_deg[u as usize] += 1;
                let (a, b) = (labels[u as usize], labels[v as usize]);
                assert!(a.0 <= b.0 && a.1 >= b.1);
            }
        }
    }
    assert!(in_deg.iter().all(|&c| c <= 1) && out_deg.iter().all(|&c| c <= 1));

    let mut cover = vec![0; n];
    for p in &r.paths {
        for w in p.nodes.windows(2).zip(&p.slots) {
            assert_eq!(d.edges(w.0[0])[*w.1 as usize], w.0[1]);
        }
        for &v in &p.nodes {
            cover[v as usize] += 1;
        }
    }
    assert!(cover.iter().all(|&c| c == 1));

    // non-decomposition edges per root-to-sink path
    let mut worst = 0;
    if total <= 10_000 {
        // light[v] = most non-decomposition edges on any path from v to a sink
        let mut light = vec![0u32; n];
        for &u in order.iter().rev() {
            for (slot, &v) in d.edges(u).iter().enumerate() {
                let c = light[v as usize] + u32::from(!r.is_scd_edge(u, slot as u32));
                light[u as usize] = light[u as usize].max(c);
            }
        }
        worst = light[d.root() as usize];
    } else {
        for _ in 0..100 {
            let (mut u, mut c) = (d.root(), 0);
            while !d.edges(u).is_empty() {
                let slot = rng.random_range(0..d.edges(u).len());
                c += u32::from(!r.is_scd_edge(u, slot as u32));
                u = d.edges(u)[slot];
            }
            worst = worst.max(c);
        }
    }
    (worst, 2.0 * (total as f64).log2())
}

#[test]
fn random_dags() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..100 {
        let d = random_dag(rng.random_range(1..=500), 1 + i % 4, 1 << 50, &mut rng);
        let (worst, bound) = check(&d, &mut rng);
        assert!(worst as f64 <= bound.max(0.0), "{worst} > {bound}");
    }
    let (worst, bound) = check(&fixture_dag(), &mut rng);
    assert!(worst as f64 <= bound);
}
