mod common;

use common::{centroid_fixture, traversal_max_path, unrolled};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use slp_core::gen::random_sslp;
use slp_core::sslp::{from_binary, parse_text, to_binary, write_text};
use slp_core::{Error, Sslp, Symbol};

use Symbol::{Terminal as T, Variable as V};

#[test]
fn fixture_lengths_and_stats() {
    let g = centroid_fixture();
    g.validate().unwrap();
    let len = g.lengths().unwrap();
    for (x, want) in [(12, 2), (11, 4), (10, 8), (9, 16), (8, 32), (7, 40), (0, 62)] {
        assert_eq!(len[x], want, "variable {x}");
    }
    let s = g.stats().unwrap();
    assert_eq!(s.length, Some(62));
    assert_eq!(s.size, 28);
    for x in 0..g.var_count() as u32 {
        assert_eq!(len[x as usize], unrolled(&g, x).len() as u64);
    }
}

#[test]
fn small_examples() {
    let g = Sslp::new(1, vec![vec![T(0)]], 0);
    g.validate().unwrap();
    let s = g.stats().unwrap();
    assert_eq!((s.size, s.max_path, s.length), (1, 1, Some(1)));
    assert!(matches!(Sslp::new(1, vec![vec![V(0)]], 0).validate(), Err(Error::CyclicGrammar(_))));
    assert!(matches!(Sslp::new(1, vec![vec![T(1)]], 0).validate(), Err(Error::DanglingReference { .. })));
    assert!(matches!(Sslp::new(1, vec![vec![V(3)]], 0).validate(), Err(Error::DanglingReference { .. })));

    assert_eq!(Sslp::new(2, vec![vec![T(0), T(1), T(0)]], 0).expand(10).unwrap(), vec![0, 1, 0]);
    let g = Sslp::new(2, vec![vec![V(1), V(2)], vec![T(0), T(0)], vec![V(1), T(1)]], 0);
    assert_eq!(g.expand(10).unwrap(), vec![0, 0, 0, 0, 1]);
    assert_eq!(unrolled(&g, 0), vec![0, 0, 0, 0, 1]);
}

fn doubling(levels: u32) -> Sslp {
    let mut rules = vec![vec![T(0)]];
    for i in 1..=levels {
        rules.push(vec![V(i - 1), V(i - 1)]);
    }
    Sslp::new(1, rules, levels)
}

#[test]
fn doubling_chains() {
    assert_eq!(doubling(70).lengths().unwrap_err(), Error::LengthOverflow);
    assert_eq!(doubling(70).stats().unwrap().length, None);
    assert_eq!(doubling(10).expand(8).unwrap_err(), Error::CapExceeded(8));
    for k in 0..=20 {
        let g = doubling(k);
        let s = g.stats().unwrap();
        assert_eq!(s.max_path, k as u64 + 1);
        assert_eq!(s.length, Some(1 << k));
        if k <= 12 {
            assert_eq!(g.expand(1 << 20).unwrap().len(), 1 << k);
            assert_eq!(traversal_max_path(&g, g.start), k as u64 + 1);
        }
    }
}

#[test]
fn normal_form() {
    let g = Sslp::new(4, vec![vec![T(0), T(1), T(2), T(3)]], 0);
    let c = g.to_cnf().unwrap();
    assert!(c.is_cnf());
    assert_eq!(c.rules.iter().filter(|r| r.len() == 2).count(), 3);
    assert_eq!(c.rules.iter().filter(|r| r.len() == 1).count(), 4);
    assert_eq!(c.max_path().unwrap(), 3);
    assert_eq!(c.expand(10).unwrap(), vec![0, 1, 2, 3]);

    // idempotent up to renaming
    let cc = c.to_cnf().unwrap();
    assert_eq!(cc.var_count(), c.var_count());
    assert_eq!(cc.size(), c.size());
    assert_eq!(cc.expand(10).unwrap(), c.expand(10).unwrap());

    // empty right-hand sides are substituted away
    let g = Sslp::new(2, vec![vec![V(1), T(0), V(1), V(2)], vec![], vec![V(1), T(1)]], 0);
    let c = g.to_cnf().unwrap();
    assert!(c.is_cnf());
    assert_eq!(c.expand(10).unwrap(), vec![0, 1]);
    assert_eq!(Sslp::new(1, vec![vec![V(1)], vec![]], 0).to_cnf().unwrap_err(), Error::EmptyString);
}

#[test]
fn random_normal_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let g = random_sslp(3, 50, 6, 20_000, &mut rng);
        let c = g.to_cnf().unwrap();
        assert!(c.is_cnf());
        let want = unrolled(&g, g.start);
        assert_eq!(c.expand(u64::MAX).unwrap(), want);
        let r = g.rules.iter().map(Vec::len).max().unwrap() as u64;
        let widen = 64 - (r - 1).leading_zeros() as u64;
        assert!(c.max_path().unwrap() <= g.max_path().unwrap() * widen.max(1) + 1);
    }
}

#[test]
fn text_formats() {
    let g = centroid_fixture();
    let s = write_text(&g);
    assert_eq!(s, include_str!("data/centroid.sslp"));
    assert_eq!(parse_text(&s).unwrap(), g);
    assert!(parse_text(&format!("{s}junk\n")).is_err());
    assert!(parse_text(&s.replace("rule 3 v4 v12", "rule 3 v4 x12")).is_err());
    assert!(parse_text(&s.replace("SSLP 1", "SSLP 2")).is_err());
    let b = to_binary(&g);
    assert_eq!(&b[..4], b"SLPB");
    assert_eq!(from_binary(&b).unwrap(), g);
    assert!(from_binary(&b[..b.len() - 1]).is_err());
}

fn arb_grammar() -> impl Strategy<Value = Sslp> {
    (1u32..5, 1usize..40, 1usize..6, any::<u64>())
        .prop_map(|(k, vars, rhs, seed)| random_sslp(k, vars, rhs, 5_000, &mut ChaCha8Rng::seed_from_u64(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn lengths_are_additive(g in arb_grammar()) {
        let len = g.lengths().unwrap();
        for x in 0..g.var_count() as u32 {
            prop_assert_eq!(len[x as usize], unrolled(&g, x).len() as u64);
        }
    }

    #[test]
    fn cnf_preserves_and_path_matches_traversal(g in arb_grammar()) {
        let c = g.to_cnf().unwrap();
        prop_assert_eq!(c.expand(u64::MAX).unwrap(), unrolled(&g, g.start));
        prop_assert_eq!(c.max_path().unwrap(), traversal_max_path(&c, c.start));
        prop_assert!(c.max_path().unwrap() <= c.var_count() as u64);
    }

    #[test]
    fn text_round_trip(g in arb_grammar()) {
        prop_assert_eq!(parse_text(&write_text(&g)).unwrap(), g.clone());
        prop_assert_eq!(from_binary(&to_binary(&g)).unwrap(), g);
    }
}
