use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slp_core::algebra::{
    balance_circuit, balance_to_tslp, parse_gslp, tslp_to_slp, verify_subsumption_base, write_gslp, Context, FreeAlgebra, Side,
    SortId, SymbolId, TslpRule, TslpSort,
};
use slp_core::error::Result;
use slp_core::gen::{random_semiring_circuit, random_sslp, semiring_comb};
use slp_core::instances::monoid::{gslp_to_sslp, sslp_to_gslp, MonoidBase};
use slp_core::instances::semiring::{constant, semiring_signature, Affine, SemiringBase, ZMod, ADD, MUL};
use slp_core::{Algebra, Error, GammaSlp, Sampler, Signature, SubsumptionBase, Term, Tslp};
use std::sync::Arc;

/// Recursive preorder unfolding, independent of the library's.
fn unfold(g: &GammaSlp) -> Vec<u32> {
    fn go(g: &GammaSlp, t: &Term<u32>, out: &mut Vec<u32>) {
        match t {
            Term::Leaf(y) => go(g, &g.rules[*y as usize], out),
            Term::App(f, args) => {
                out.push(*f);
                args.iter().for_each(|a| go(g, a, out));
            }
        }
    }
    let mut v = Vec::new();
    go(g, &g.rules[g.start as usize], &mut v);
    v
}

fn leaf(y: u32) -> Term<u32> {
    Term::Leaf(y)
}

fn app(f: SymbolId, a: Term<u32>, b: Term<u32>) -> Term<u32> {
    Term::app(f, vec![a, b])
}

#[test]
fn evaluation_examples() {
    let sig = Arc::new(semiring_signature(2));
    // S -> A*A + B, A -> 3, B -> 5
    let g = GammaSlp::infer(
        sig.clone(),
        vec![app(ADD, app(MUL, leaf(1), leaf(1)), leaf(2)), Term::constant(constant(0)), Term::constant(constant(1))],
        0,
    )
    .unwrap();
    assert_eq!(g.evaluate(&ZMod { modulus: 97, constants: vec![3, 5] }).unwrap(), 14);

    let one = GammaSlp::infer(sig.clone(), vec![Term::constant(constant(1))], 0).unwrap();
    assert_eq!(one.evaluate(&ZMod { modulus: 97, constants: vec![3, 5] }).unwrap(), 5);
    assert_eq!(one.unfolded_size().unwrap(), 1);

    let missing = ZMod { modulus: 97, constants: vec![] };
    assert!(matches!(one.evaluate(&missing), Err(Error::Domain(_))));
}

#[test]
fn unfolded_sizes() {
    let sig = Arc::new(semiring_signature(1));
    for k in 0..30u32 {
        let mut rules = vec![Term::constant(constant(0))];
        for i in 1..=k {
            rules.push(app(ADD, leaf(i - 1), leaf(i - 1)));
        }
        let g = GammaSlp::infer(sig.clone(), rules, k).unwrap();
        assert_eq!(g.unfolded_size().unwrap(), (1 << (k + 1)) - 1);
    }
    let mut rules = vec![Term::constant(constant(0))];
    for i in 1..=64 {
        rules.push(app(ADD, leaf(i - 1), leaf(i - 1)));
    }
    assert_eq!(GammaSlp::infer(sig, rules, 64).unwrap().unfolded_size().unwrap_err(), Error::CountOverflow);

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let g = random_semiring_circuit(3, rng.random_range(1..30), 5000, &mut rng);
        let t = unfold(&g);
        assert_eq!(g.unfolded_size().unwrap(), t.len() as u64);
        assert_eq!(g.unfold(u64::MAX).unwrap(), t);
        assert_eq!(&*g.evaluate(&FreeAlgebra::new(g.signature.clone())).unwrap(), t.as_slice());
    }
}

#[test]
fn text_format() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let g = random_semiring_circuit(2, 40, 1 << 30, &mut rng);
        let s = write_gslp(&g);
        assert!(s.starts_with("GSLP 1\n"));
        let back = parse_gslp(&s).unwrap();
        assert_eq!((&back.rules, &back.sorts, back.start), (&g.rules, &g.sorts, g.start));
        assert_eq!(back.signature.types, g.signature.types);
        assert!(parse_gslp(&format!("{s}x\n")).is_err());
    }
}

/// `((3x + 1) o (2x))[5]` built from atomic contexts.
fn affine_program() -> Tslp {
    let k = |i: u32| TslpRule::Symbol { symbol: constant(i), args: vec![] };
    let ctx = TslpSort::Context { hole: 0, result: 0 };
    let rules = vec![
        k(0),
        k(1),
        k(2),
        k(3),
        TslpRule::Atomic { symbol: MUL, hole: 1, args: vec![0] },
        TslpRule::Atomic { symbol: ADD, hole: 0, args: vec![1] },
        TslpRule::Compose(vec![5, 4]),
        TslpRule::Atomic { symbol: MUL, hole: 1, args: vec![2] },
        TslpRule::Compose(vec![6, 7]),
        TslpRule::Apply { context: 8, arg: 3 },
    ];
    let t = TslpSort::Tree(0);
    let sorts = vec![t, t, t, t, ctx, ctx, ctx, ctx, ctx, t];
    let p = Tslp { signature: Arc::new(semiring_signature(4)), sorts, rules, start: 9 };
    p.validate().unwrap();
    p
}

#[test]
fn affine_composition() {
    let p = affine_program();
    let g = tslp_to_slp(&p, &SemiringBase::new(4)).unwrap();
    assert_eq!(g.evaluate(&ZMod { modulus: 97, constants: vec![3, 1, 2, 5] }).unwrap(), 31);
    // the base regroups products, so only the value is fixed
    assert_eq!(p.unfold(u64::MAX).unwrap(), vec![ADD, MUL, constant(0), MUL, constant(2), constant(3), constant(1)]);

    // no contexts: copied as is
    let q = Tslp {
        signature: Arc::new(semiring_signature(2)),
        sorts: vec![TslpSort::Tree(0); 3],
        rules: vec![
            TslpRule::Symbol { symbol: constant(0), args: vec![] },
            TslpRule::Symbol { symbol: constant(1), args: vec![] },
            TslpRule::Symbol { symbol: MUL, args: vec![0, 1] },
        ],
        start: 2,
    };
    let h = tslp_to_slp(&q, &SemiringBase::new(2)).unwrap();
    assert_eq!(h.var_count(), 3);
    assert_eq!(unfold(&h), vec![MUL, constant(0), constant(1)]);
}

fn eval_ctx(base: &SemiringBase, e: &Affine, params: &[u64], x: u64, z: &ZMod) -> u64 {
    base.context(e).eval(z, &x, params).unwrap()
}

#[test]
fn semiring_base_examples() {
    let base = SemiringBase::new(0);
    let z = ZMod { modulus: 97, constants: vec![] };
    let (e, s) = base.subsume_atomic(ADD, 0).unwrap();
    assert_eq!(e, Affine { a: false, b: false, c: true });
    assert_eq!(s, vec![Term::Leaf(0)]);

    // x + c applied after a x gives a x + c with both parameters kept
    let ax = Affine { a: true, b: false, c: false };
    let xc = Affine { a: false, b: false, c: true };
    let (e, s) = base.compose(&xc, &ax).unwrap();
    assert_eq!(e, Affine { a: true, b: false, c: true });
    assert_eq!(s, vec![Term::Leaf(Side::Inner(0)), Term::Leaf(Side::Outer(0))]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let (a, c, x) = (rng.random_range(0..97), rng.random_range(0..97), rng.random_range(0..97));
        let composed = eval_ctx(&base, &xc, &[c], eval_ctx(&base, &ax, &[a], x, &z), &z);
        assert_eq!(eval_ctx(&base, &e, &[a, c], x, &z), composed);
    }
    assert_eq!(base.elements().len(), 7);
}

/// 2x2 matrices mod p: commutative addition, non-commutative multiplication.
#[derive(Clone, Debug)]
struct Matrices {
    p: u64,
    constants: Vec<[u64; 4]>,
}

impl Algebra for Matrices {
    type Value = [u64; 4];

    fn apply(&self, f: SymbolId, args: &[[u64; 4]]) -> Result<[u64; 4]> {
        let p = self.p;
        Ok(match (f, args) {
            (ADD, [x, y]) => [0, 1, 2, 3].map(|i| (x[i] + y[i]) % p),
            (MUL, [x, y]) => [
                (x[0] * y[0] + x[1] * y[2]) % p,
                (x[0] * y[1] + x[1] * y[3]) % p,
                (x[2] * y[0] + x[3] * y[2]) % p,
                (x[2] * y[1] + x[3] * y[3]) % p,
            ],
            (c, []) => self.constants[(c - 2) as usize],
            _ => return Err(Error::Domain("bad arity".into())),
        })
    }
}

impl Sampler for Matrices {
    fn sample(&self, _sort: SortId, rng: &mut ChaCha8Rng) -> [u64; 4] {
        [0; 4].map(|_| rng.random_range(0..self.p))
    }
}

#[test]
fn matrix_semiring() {
    let alg = Matrices { p: 1009, constants: vec![[1, 2, 0, 1], [0, 1, 1, 0], [3, 0, 5, 7]] };
    let base = SemiringBase::new(3);
    let rep = verify_subsumption_base(&base, &alg, 60, 3);
    assert!(rep.passed(), "{:?}", rep.failures);
    assert!(rep.samples >= 1000);

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..30 {
        let g = random_semiring_circuit(3, rng.random_range(2..300), 1 << 40, &mut rng);
        let h = balance_circuit(&g, &base).unwrap();
        assert_eq!(h.evaluate(&alg).unwrap(), g.evaluate(&alg).unwrap());
    }
}

/// Forgets the additive parameter of every composition.
struct DropsConstant(SemiringBase);

impl SubsumptionBase for DropsConstant {
    type Elem = Affine;

    fn signature(&self) -> &Signature {
        self.0.signature()
    }

    fn context(&self, e: &Affine) -> Context {
        self.0.context(e)
    }

    fn subsume_atomic(&self, symbol: SymbolId, hole: usize) -> Result<(Affine, Vec<Term<u32>>)> {
        self.0.subsume_atomic(symbol, hole)
    }

    fn compose(&self, outer: &Affine, inner: &Affine) -> Result<(Affine, Vec<Term<Side>>)> {
        let (mut e, mut s) = self.0.compose(outer, inner)?;
        if e.c && (e.a || e.b) {
            e.c = false;
            s.pop();
        }
        Ok((e, s))
    }

    fn elements(&self) -> Vec<Affine> {
        self.0.elements()
    }
}

#[test]
fn broken_compose_is_caught() {
    let z = ZMod { modulus: 97, constants: vec![3, 5] };
    let rep = verify_subsumption_base(&DropsConstant(SemiringBase::new(2)), &z, 50, 2);
    assert!(!rep.passed());
    assert!(verify_subsumption_base(&SemiringBase::new(2), &z, 50, 2).passed());
}

#[test]
fn term_programs_are_shallow() {
    // f(f(...f(a)...)) as a chain of 4096 unary applications
    let sig = Arc::new(Signature::new(1, vec![vec![0, 0], vec![0]], vec!["f".into(), "a".into()]).unwrap());
    for k in [0, 1, 5, 12] {
        let mut rules = vec![Term::constant(1)];
        for i in 1..=(1u32 << k) {
            rules.push(Term::app(0, vec![leaf(i - 1)]));
        }
        let start = rules.len() as u32 - 1;
        let g = GammaSlp::infer(sig.clone(), rules, start).unwrap();
        let t = balance_to_tslp(&g).unwrap();
        let n = g.unfolded_size().unwrap() as f64;
        assert_eq!(t.unfold(u64::MAX).unwrap(), unfold(&g));
        assert!(t.max_path().unwrap() as f64 <= 7.0 * n.log2() + 12.0);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..60 {
        let g = random_semiring_circuit(3, rng.random_range(2..100), 100_000, &mut rng);
        let t = balance_to_tslp(&g).unwrap();
        let n = g.unfolded_size().unwrap() as f64;
        assert_eq!(t.unfold(u64::MAX).unwrap(), unfold(&g));
        assert!(t.max_path().unwrap() as f64 <= 7.0 * n.log2() + 12.0, "{} for {n}", t.max_path().unwrap());
    }
}

#[test]
fn circuits_keep_their_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for p in [97u64, (1 << 31) - 1] {
        let z = ZMod { modulus: p, constants: vec![3, 5, 7, 11] };
        let base = SemiringBase::new(4);
        for _ in 0..40 {
            let g = random_semiring_circuit(4, rng.random_range(2..1000), 1 << 40, &mut rng);
            let h = balance_circuit(&g, &base).unwrap();
            assert_eq!(h.evaluate(&z).unwrap(), g.evaluate(&z).unwrap());
            let n = g.unfolded_size().unwrap() as f64;
            assert!(h.max_path().unwrap() as f64 <= 32.0 * n.log2() + 32.0);
        }
    }
    let one = GammaSlp::infer(Arc::new(semiring_signature(1)), vec![Term::constant(constant(0))], 0).unwrap();
    assert_eq!(unfold(&balance_circuit(&one, &SemiringBase::new(1)).unwrap()), vec![constant(0)]);

    let g = semiring_comb(1 << 16);
    let h = balance_circuit(&g, &SemiringBase::new(2)).unwrap();
    let z = ZMod { modulus: 1_000_003, constants: vec![4, 9] };
    assert_eq!(h.evaluate(&z).unwrap(), g.evaluate(&z).unwrap());
    let n = g.unfolded_size().unwrap() as f64;
    assert!(h.max_path().unwrap() as f64 <= 32.0 * n.log2() + 32.0);
    assert!(g.max_path().unwrap() > 100_000);
}

#[test]
fn string_programs_through_the_monoid() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..40 {
        let s = random_sslp(3, rng.random_range(1..60), 4, 20_000, &mut rng);
        let c = sslp_to_gslp(&s).unwrap();
        let t = balance_to_tslp(&c).unwrap();
        let h = gslp_to_sslp(&tslp_to_slp(&t, &MonoidBase::new(3)).unwrap()).unwrap();
        assert_eq!(h.expand(u64::MAX).unwrap(), s.expand(u64::MAX).unwrap());
    }
}
