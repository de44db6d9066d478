use expander_core::cayley::{build_cayley, covering_indices, is_covering_map, refine_tower};
use expander_core::quotient::{EnumerationLimits, QuotientGroup};
use expander_core::series::{
    central_series_at, check_conjecture, exponent2_series, exponent2_series_at, index_lower_bound,
    order_bound_row, verify_gammabases, verify_low_cases, width_statistics,
};
use proptest::prelude::*;
use std::sync::OnceLock;

fn groups() -> &'static [QuotientGroup] {
    static G: OnceLock<Vec<QuotientGroup>> = OnceLock::new();
    G.get_or_init(|| (0..=5).map(|i| QuotientGroup::enumerate(i).unwrap()).collect())
}

#[test]
fn orders_meet_the_lower_bound() {
    for (i, q) in groups().iter().enumerate().skip(1) {
        assert_eq!(q.order() as u128, index_lower_bound(i).unwrap());
    }
    for k in 1..=10 {
        let row = order_bound_row(k);
        assert!(row.meets_bound && row.equal, "{row:?}");
    }
}

#[test]
fn serial_and_parallel_enumeration_agree() {
    let serial = EnumerationLimits {
        parallel: false,
        ..EnumerationLimits::default()
    };
    for i in 0..=5 {
        assert_eq!(QuotientGroup::enumerate_with(i, &serial).unwrap(), groups()[i]);
    }
}

#[test]
fn element_orders_are_powers_of_two() {
    let q = &groups()[5];
    for n in (0..q.order() as u32).step_by(97) {
        assert!(q.element_order(n).is_power_of_two());
    }
}

#[test]
fn lambda_terms_lie_in_kernels() {
    for n in 1..=9 {
        let chain = exponent2_series_at(n);
        for i in 0..chain.terms.len() {
            assert!(chain.term(i).min_depth() >= i.min(n), "n={n} i={i}");
        }
        assert!(chain.is_descending());
    }
}

#[test]
fn enumerated_and_basis_series_agree() {
    let q = &groups()[4];
    let a = exponent2_series(q);
    let b = exponent2_series_at(4);
    for i in 0..b.terms.len() {
        assert!(a.term(i).same_as(&b.term(i)));
        assert_eq!(q.members(&a.term(i)).len() as u128, b.term(i).order());
    }
}

#[test]
fn gammabases_and_low_cases() {
    for r in verify_gammabases(9) {
        assert!(r.ok(), "{r:?}");
    }
    assert!(verify_low_cases().ok());
}

#[test]
fn conjecture_and_widths_at_level_ten() {
    assert!(check_conjecture(9).all_equal());
    let w = width_statistics(9);
    assert!(w.follows_pattern && w.max_width == 3, "{w:?}");
}

#[test]
fn commutators_sit_in_lambda_one() {
    let lambda = exponent2_series_at(6);
    let gamma = central_series_at(6);
    assert!(gamma.term(2).is_subgroup_of(&lambda.term(1)));
    assert!(!gamma.term(1).is_subgroup_of(&lambda.term(1)));
}

#[test]
fn graphs_are_connected_regular_and_bipartite() {
    for (i, q) in groups().iter().enumerate() {
        let g = build_cayley(q);
        assert!(g.is_symmetric() && g.is_connected());
        assert!((0..g.n() as u32).all(|u| g.degree(u) == 4));
        assert_eq!(g.bipartition().is_some(), i >= 1, "level {i}");
    }
}

#[test]
fn tower_covers_exhaustively() {
    let t = covering_indices(groups()).unwrap();
    assert_eq!(t.indices(), vec![4, 8, 4, 8, 8]);
    assert!(t.levels.iter().all(|l| l.covers_previous));
    let product: usize = t.indices().iter().product();
    assert_eq!(product, groups()[5].order());
}

#[test]
fn refinements_compose_to_truncation() {
    let g = groups();
    for i in 1..=5 {
        let step = refine_tower(&g[i], &g[i - 1]).unwrap();
        let trunc = g[i].truncation_hom(&g[i - 1]).unwrap();
        let r = step.report(&trunc);
        assert_eq!(r.intermediate_orders.len(), r.covering_index.trailing_zeros() as usize - 1);
        assert!(r.all_two_fold_covers && r.all_regular && r.composition_is_truncation, "{r:?}");
    }
    let step = refine_tower(&g[2], &g[1]).unwrap();
    assert_eq!(step.report(&g[2].truncation_hom(&g[1]).unwrap()).intermediate_orders, vec![16, 8]);
}

proptest! {
    #[test]
    fn truncation_is_a_homomorphism(a in 0u32..8192, b in 0u32..8192, j in 0usize..5) {
        let (q, t) = (&groups()[5], &groups()[j]);
        let h = q.truncation_hom(t).unwrap();
        prop_assert_eq!(h[q.mul(a, b) as usize], t.mul(h[a as usize], h[b as usize]));
        prop_assert_eq!(h[q.inv(a) as usize], t.inv(h[a as usize]));
    }

    #[test]
    fn group_axioms(a in 0u32..1024, b in 0u32..1024, c in 0u32..1024) {
        let q = &groups()[4];
        prop_assert_eq!(q.mul(q.mul(a, b), c), q.mul(a, q.mul(b, c)));
        prop_assert_eq!(q.mul(a, q.inv(a)), 0);
        prop_assert_eq!(q.mul(0, a), a);
    }

    #[test]
    fn truncations_cover_graphs(j in 0usize..4) {
        let (q, t) = (&groups()[j + 1], &groups()[j]);
        let h = q.truncation_hom(t).unwrap();
        prop_assert!(is_covering_map(&build_cayley(q), &build_cayley(t), &h));
    }
}
