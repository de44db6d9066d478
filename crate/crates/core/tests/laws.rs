//! Closed-form laws and the commutator scheme, checked against the
//! recursive product and the dense block-matrix product.

use expander_core::generators::{
    iterated_comm, verify_commscheme, ConstantTable, GeneratorSet, SCHEME,
};
use expander_core::gf2::{Mat3, SBlock};
use expander_core::toeplitz::{
    closed_comm_lead, closed_square_lead, dense_mul, make_mk, make_mk_with_tail, TruncElem,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_elem(rng: &mut ChaCha8Rng, level: usize) -> TruncElem {
    TruncElem::from_diagonals((0..level).map(|_| SBlock::random(rng)).collect())
}

fn random_tail(rng: &mut ChaCha8Rng, n: usize) -> Vec<SBlock> {
    (0..n).map(|_| SBlock::random(rng)).collect()
}

fn arb_elem(level: usize) -> impl Strategy<Value = TruncElem> {
    prop::collection::vec(0u32..(1 << 27), level)
        .prop_map(|v| TruncElem::from_diagonals(v.into_iter().map(SBlock::from_bits).collect()))
}

fn arb_pair() -> impl Strategy<Value = (TruncElem, TruncElem)> {
    (1usize..=12).prop_flat_map(|n| (arb_elem(n), arb_elem(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn recursive_product_equals_dense_product((x, y) in arb_pair()) {
        prop_assert_eq!(x.mul(&y).unwrap(), dense_mul(&x, &y).unwrap());
        let e = TruncElem::identity(x.level());
        prop_assert_eq!(dense_mul(&x, &x.inv()).unwrap(), e);
    }

    #[test]
    fn truncation_is_a_homomorphism((x, y) in arb_pair(), j in 0usize..12) {
        let j = j.min(x.level());
        let t = |z: &TruncElem| z.truncate(j).unwrap();
        prop_assert_eq!(t(&x.mul(&y).unwrap()), t(&x).mul(&t(&y)).unwrap());
        prop_assert_eq!(t(&x.inv()), t(&x).inv());
        prop_assert_eq!(t(&x.commutator(&y).unwrap()), t(&x).commutator(&t(&y)).unwrap());
    }
}

#[test]
fn oracle_equivalence_ten_thousand_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..10_000 {
        let level = rng.gen_range(1..=12);
        let x = random_elem(&mut rng, level);
        let y = random_elem(&mut rng, level);
        assert_eq!(x.mul(&y).unwrap(), dense_mul(&x, &y).unwrap());
        assert!(dense_mul(&x, &x.inv()).unwrap().is_identity());
    }
}

#[test]
fn associativity() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..1000 {
        let level = rng.gen_range(1..=9);
        let x = random_elem(&mut rng, level);
        let y = random_elem(&mut rng, level);
        let z = random_elem(&mut rng, level);
        assert_eq!(
            x.mul(&y).unwrap().mul(&z).unwrap(),
            x.mul(&y.mul(&z).unwrap()).unwrap()
        );
    }
}

#[test]
fn dense_generators_product() {
    let g = GeneratorSet::new(10);
    assert_eq!(dense_mul(&g.x0, &g.x1).unwrap(), g.x0.mul(&g.x1).unwrap());
}

#[test]
fn block_product_example() {
    // a1(2) * a1(3) for the leading diagonal of x0, against a scalar loop
    let a1 = GeneratorSet::new(6).x0.diagonal(1);
    let (p, q) = (a1.part(2), a1.part(3));
    let mut rows = [[0u8; 3]; 3];
    for (r, row) in rows.iter_mut().enumerate() {
        for (c, e) in row.iter_mut().enumerate() {
            *e = (0..3).fold(0, |acc, k| acc ^ (u8::from(p.entry(r, k)) & u8::from(q.entry(k, c))));
        }
    }
    assert_eq!(p * q, Mat3::from_rows(rows));
}

#[test]
fn square_law_matches_recursive_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for _ in 0..2000 {
        let k = rng.gen_range(0..=5);
        let a = SBlock::random(&mut rng);
        let level = 2 * k + 2;
        let tail = random_tail(&mut rng, level);
        let m = make_mk_with_tail(k, a, &tail, level).unwrap();
        let sq = m.square();
        let (d, c) = closed_square_lead(k, a);
        assert!(sq.depth() >= d, "k={k}");
        assert_eq!(sq.diagonal(d + 1), c, "k={k}");
    }
}

#[test]
fn square_law_depth_five_diagonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..200 {
        let a = SBlock::random(&mut rng);
        let m = make_mk(2, a, 7).unwrap();
        let sq = m.mul(&m).unwrap();
        assert_eq!(sq.diagonal(6), closed_square_lead(2, a).1);
    }
}

#[test]
fn commutator_law_is_tail_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for _ in 0..2000 {
        let k = rng.gen_range(0..=6);
        let a = SBlock::random(&mut rng);
        let b = SBlock::random(&mut rng);
        let level = k + 2;
        let (d, c) = closed_comm_lead(k, a, b);
        for _ in 0..3 {
            let x = make_mk_with_tail(k, a, &random_tail(&mut rng, level), level).unwrap();
            let y = make_mk_with_tail(0, b, &random_tail(&mut rng, level), level).unwrap();
            let comm = x.commutator(&y).unwrap();
            assert!(comm.depth() >= d);
            assert_eq!(comm.diagonal(d + 1), c, "k={k}");
        }
    }
}

#[test]
fn commutator_raises_depth() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for _ in 0..500 {
        let level = rng.gen_range(2..=10);
        let k = rng.gen_range(0..level - 1);
        let x = make_mk_with_tail(
            k,
            SBlock::random(&mut rng),
            &random_tail(&mut rng, level),
            level,
        )
        .unwrap();
        let y = random_elem(&mut rng, level);
        assert!(x.commutator(&y).unwrap().depth() > x.depth());
    }
}

#[test]
fn squares_and_commutators_of_generators() {
    let t = ConstantTable::get();
    let g = GeneratorSet::new(6);
    assert_eq!(g.x0.square().lead(), Some((1, t.beta2)));
    assert_eq!(g.x1.square().lead(), Some((1, t.gamma2)));
    assert_eq!(g.x1.commutator(&g.x0).unwrap().lead(), Some((1, t.alpha2)));
    assert_eq!(closed_square_lead(0, g.x0.diagonal(1)), (1, t.beta2));
    assert_eq!(
        closed_comm_lead(0, g.x1.diagonal(1), g.x0.diagonal(1)),
        (1, t.alpha2)
    );
}

#[test]
fn level_two_relations_between_images() {
    let t = ConstantTable::get();
    let g = GeneratorSet::clipped(2);
    let w1 = make_mk(1, t.alpha2, 2).unwrap();
    let w2 = make_mk(1, t.beta2, 2).unwrap();
    let w3 = make_mk(1, t.gamma2, 2).unwrap();
    let add = |x: &TruncElem, y: &TruncElem| {
        TruncElem::from_diagonals(
            x.diagonals()
                .iter()
                .zip(y.diagonals())
                .map(|(&a, &b)| a + b)
                .collect(),
        )
    };
    let v01 = g.x0.mul(&g.x1).unwrap();
    assert_eq!(g.x1.mul(&g.x0).unwrap(), add(&v01, &w1));
    assert_eq!(g.x0.inv(), add(&g.x0, &w2));
    assert_eq!(g.x1.inv(), add(&g.x1, &w3));
    assert_eq!(g.x1.commutator(&g.x0).unwrap(), w1);
    assert_eq!(g.x0.square(), w2);
    assert_eq!(g.x1.square(), w3);
    let v0 = GeneratorSet::new(5).x0;
    assert_eq!(
        v0.truncate(2).unwrap().diagonals(),
        &GeneratorSet::new(6).x0.diagonals()[..2]
    );
}

#[test]
fn scheme_rows_hold_for_small_k() {
    let report = verify_commscheme(3);
    assert_eq!(report.checks.len(), 16 * 4);
    for c in &report.checks {
        assert!(c.holds, "{} k={}", c.label, c.k);
        assert!(c.closed_form_agrees, "{} k={}", c.label, c.k);
    }
    let suspect: Vec<_> = SCHEME.iter().filter(|r| r.printed_depth_suspect()).collect();
    assert_eq!(suspect.len(), 1);
    assert_eq!((suspect[0].input, suspect[0].gen), ("gamma2", 1));
}

#[test]
fn vanishing_scheme_leads() {
    let report = verify_commscheme(0);
    let depth_of = |input: &str, gen: usize| {
        report
            .checks
            .iter()
            .find(|c| SCHEME[c.row].input == input && SCHEME[c.row].gen == gen)
            .unwrap()
            .computed_depth
    };
    // [M_0(alpha1), x1] vanishes on diagonal 2
    assert!(depth_of("alpha1", 1) >= 2);
    // [M_2(beta3), x1] has gamma1 at depth 3
    assert_eq!(depth_of("beta3", 1), 3);
}

#[test]
fn iterated_commutator_leads_cycle() {
    let t = ConstantTable::get();
    let cycle = [t.alpha1, t.alpha2, t.alpha3];
    for k in 1..=30 {
        let c = iterated_comm(k, k + 1).unwrap();
        assert_eq!(c.depth(), k);
        assert_eq!(c.diagonal(k + 1), cycle[k % 3], "k={k}");
        assert!(!c.is_identity());
    }
}
