use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slp_core::algebra::{balance_circuit, verify_subsumption_base, Side};
use slp_core::gen::random_sslp;
use slp_core::instances::cluster::{
    self, balance_top_dag, cluster_node_count, cluster_signature, example_top_dag, expand_cluster, random_top_dag, CTok,
    ClusterAlgebra, ClusterBase, Layout,
};
use slp_core::instances::forest::{
    self, balance_fslp, eliminate_eps_star, example_fslp, expand_forest, forest_hash, forest_signature, forest_size,
    is_eps_star_free, node, random_fslp, ForestAlgebra, ForestBase, ForestHash, HashValue, EPS, V0,
};
use slp_core::instances::monoid::{gslp_to_sslp, sslp_to_gslp, FreeMonoid, MonoidBase, Wrap};
use slp_core::query::MERSENNE_61;
use slp_core::{balance, Error, GammaSlp, SubsumptionBase, Term};
use std::sync::Arc;

fn envelope(g: &GammaSlp, nodes: u64) -> bool {
    g.max_path().unwrap() as f64 <= 32.0 * (nodes.max(2) as f64).log2() + 32.0
}

#[test]
fn monoid_wrap_composition() {
    let base = MonoidBase::new(3);
    let axb = Wrap { a: true, b: true };
    let (e, s) = base.compose(&axb, &axb).unwrap();
    assert_eq!(e, axb);
    assert_eq!(s.len(), 2);
    let alg = FreeMonoid { alphabet_size: 3 };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let word = |rng: &mut ChaCha8Rng| (0..rng.random_range(1..5)).map(|_| rng.random_range(0..3)).collect::<Vec<u32>>();
    for _ in 0..200 {
        let (a1, b1, a2, b2, x) = (word(&mut rng), word(&mut rng), word(&mut rng), word(&mut rng), word(&mut rng));
        let inner = [a2.clone(), x.clone(), b2.clone()].concat();
        let want = [a1.clone(), inner, b1.clone()].concat();
        let param = |t: &Term<Side>| {
            let mut out = Vec::new();
            fn go(t: &Term<Side>, o: &[&Vec<u32>; 2], i: &[&Vec<u32>; 2], out: &mut Vec<u32>) {
                match t {
                    Term::Leaf(Side::Outer(j)) => out.extend(o[*j as usize]),
                    Term::Leaf(Side::Inner(j)) => out.extend(i[*j as usize]),
                    Term::App(_, args) => args.iter().for_each(|a| go(a, o, i, out)),
                }
            }
            go(t, &[&a1, &b1], &[&a2, &b2], &mut out);
            out
        };
        let got = base.context(&e).eval(&alg, &x, &[param(&s[0]), param(&s[1])]).unwrap();
        assert_eq!(got, want);
    }
    let rep = verify_subsumption_base(&base, &alg, 200, 4);
    assert!(rep.passed() && rep.samples >= 1000);
}

#[test]
fn monoid_route_matches_string_balancing() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..40 {
        let g = random_sslp(3, rng.random_range(2..80), 4, 50_000, &mut rng);
        let direct = balance(&g).unwrap().0;
        let generic = gslp_to_sslp(&balance_circuit(&sslp_to_gslp(&g).unwrap(), &MonoidBase::new(3)).unwrap()).unwrap();
        let want = g.expand(u64::MAX).unwrap();
        assert_eq!(direct.expand(u64::MAX).unwrap(), want);
        assert_eq!(generic.expand(u64::MAX).unwrap(), want);
    }
}

#[test]
fn forest_family() {
    let (g, _) = example_fslp(2);
    assert_eq!(forest_size(&g).unwrap(), 37);
    let (g, _) = example_fslp(10);
    let m = 1u64 << 10;
    // 2^10 b's, each with 2 * 2^10 a's beside its child, plus one c
    let nodes = m * (2 * m + 1) + 1;
    assert_eq!(forest_size(&g).unwrap(), nodes);
    let h = balance_fslp(&g).unwrap();
    assert!(envelope(&h, nodes));
    let alg = ForestHash::new(3, 916_132_831);
    let f = expand_forest(&g, nodes).unwrap();
    let want = HashValue::Forest { hash: forest_hash(&f, alg.base, MERSENNE_61), len: f.len() as u64 };
    assert_eq!(g.evaluate(&alg).unwrap(), want);
    assert_eq!(h.evaluate(&alg).unwrap(), want);
}

#[test]
fn forest_edge_cases() {
    let sig = Arc::new(forest_signature(2));
    let tree = GammaSlp::infer(sig.clone(), vec![Term::app(V0, vec![Term::constant(node(1)), Term::constant(EPS)])], 0).unwrap();
    let b = balance_fslp(&tree).unwrap();
    assert_eq!(expand_forest(&b, 10).unwrap(), expand_forest(&tree, 10).unwrap());
    assert_eq!(forest::to_brackets(&expand_forest(&b, 10).unwrap(), &["a".into(), "b".into()]), "b");

    let eps = GammaSlp::infer(sig, vec![Term::constant(EPS)], 0).unwrap();
    assert_eq!(expand_forest(&eps, 10).unwrap(), vec![]);
    assert_eq!(eliminate_eps_star(&eps).unwrap_err(), Error::EmptyForest);
    assert!(matches!(expand_forest(&example_fslp(4).0, 100), Err(Error::CapExceeded(100))));
}

#[test]
fn random_forests() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst = 0f64;
    for i in 0..40 {
        let cap = if i % 4 == 0 { 100_000 } else { 3000 };
        let g = random_fslp(3, rng.random_range(4..200), cap, &mut rng);
        let f = expand_forest(&g, cap).unwrap();
        let h = match eliminate_eps_star(&g) {
            Ok(h) => h,
            Err(Error::EmptyForest) => {
                assert!(f.is_empty());
                continue;
            }
            Err(e) => panic!("{e}"),
        };
        assert!(is_eps_star_free(&h));
        assert_eq!(expand_forest(&h, cap).unwrap(), f);
        worst = worst.max(h.size() as f64 / g.size() as f64);
        let b = balance_fslp(&g).unwrap();
        assert_eq!(expand_forest(&b, cap).unwrap(), f);
        assert!(envelope(&b, forest::node_count(&f) as u64));
    }
    assert!(worst <= 4.0, "elimination grew a grammar {worst:.2} times");
}

#[test]
fn forest_base_on_three_letters() {
    let rep = verify_subsumption_base(&ForestBase::new(3), &ForestAlgebra { alphabet_size: 3 }, 30, 8);
    assert!(rep.passed(), "{:?}", rep.failures);
    assert!(rep.samples >= 1000);
}

#[test]
fn top_dag_family() {
    let (g, letters) = example_top_dag(3);
    let t = expand_cluster(&g, 1000).unwrap();
    assert_eq!(t.iter().filter(|&&x| x == CTok::Open(1)).count(), 9);
    let b = balance_top_dag(&g).unwrap();
    assert_eq!(expand_cluster(&b, 1000).unwrap(), t);
    assert!(envelope(&b, cluster_node_count(&t) as u64));
    let a8 = ["a"; 8].join(" ");
    assert!(cluster::to_brackets(&t, &letters).starts_with(&format!("b({a8} b({a8} b(")));

    let (g, _) = example_top_dag(8);
    let t = expand_cluster(&g, 1 << 20).unwrap();
    assert_eq!(t.iter().filter(|&&x| x == CTok::Open(1)).count(), 257);
    let b = balance_top_dag(&g).unwrap();
    assert_eq!(expand_cluster(&b, 1 << 20).unwrap(), t);
    assert!(envelope(&b, cluster_node_count(&t) as u64));
}

#[test]
fn top_dag_edge_cases() {
    let lay = Layout { k: 3 };
    let sig = Arc::new(cluster_signature(3).unwrap());
    let letters: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
    let atomic = GammaSlp::infer(sig.clone(), vec![Term::constant(lay.leaf(0, 1))], 0).unwrap();
    let b = balance_top_dag(&atomic).unwrap();
    assert_eq!(cluster::to_brackets(&expand_cluster(&b, 10).unwrap(), &letters), "a(b)");

    let merged = GammaSlp::infer(
        sig.clone(),
        vec![Term::app(lay.hmerge00(0), vec![Term::constant(lay.leaf(0, 1)), Term::constant(lay.leaf(0, 2))])],
        0,
    )
    .unwrap();
    assert_eq!(cluster::to_brackets(&expand_cluster(&merged, 10).unwrap(), &letters), "a(b c)");

    let open = GammaSlp::infer(sig, vec![Term::constant(lay.edge(0, 1))], 0).unwrap();
    assert!(matches!(balance_top_dag(&open), Err(Error::SortMismatch(_))));
}

#[test]
fn random_top_dags() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for i in 0..30 {
        let cap = if i % 5 == 0 { 100_000 } else { 3000 };
        let g = random_top_dag(3, rng.random_range(4..200), cap, &mut rng);
        let t = expand_cluster(&g, cap).unwrap();
        let b = balance_top_dag(&g).unwrap();
        assert_eq!(expand_cluster(&b, cap).unwrap(), t);
        assert!(envelope(&b, cluster_node_count(&t) as u64));
    }
}

#[test]
fn cluster_base_on_three_letters() {
    let rep = verify_subsumption_base(&ClusterBase::new(3).unwrap(), &ClusterAlgebra::new(3), 4, 12);
    assert!(rep.passed(), "{:?}", rep.failures);
    assert!(rep.samples >= 1000);
}
