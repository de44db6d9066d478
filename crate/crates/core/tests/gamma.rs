use expander_core::gamma_words::{
    derived_relator_certificates, eliminate, normalize, replay, rule_certificates, ExtensionModel,
    GammaWord,
};
use expander_core::generators::GeneratorSet;
use expander_core::quotient::QuotientGroup;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn ten_thousand_random_words() {
    let level = 6;
    let q = QuotientGroup::enumerate(level).unwrap();
    let model = ExtensionModel::new(level);
    let (check, table) = model.check(&q);
    assert!(check.ok(), "{check:?}");

    let mut rng = ChaCha8Rng::seed_from_u64(0x6A33A);
    for _ in 0..10_000 {
        let w = GammaWord::random(&mut rng, 16);
        let n = normalize(&w);
        let parity = eliminate(&w).count(2) % 2 == 1;
        assert_eq!(n.form.tail, parity, "{w}");
        assert!(n.form.w.is_reduced() && n.form.w.letters.iter().all(|l| l.gen <= 1));
        assert!(n.rule_steps <= n.push_start_len.max(1).pow(2));
        assert_eq!(replay(&n.trace).unwrap(), n.form.to_word(), "{w}");
        assert_eq!(model.eval(&w, &table), model.eval_form(&n.form), "{w}");
    }
}

#[test]
fn x2_free_words_agree_in_the_matrix_representation() {
    let gens = GeneratorSet::clipped(10);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..500 {
        let w = GammaWord::random(&mut rng, 12);
        let n = normalize(&w);
        let e = eliminate(&w);
        if n.form.tail || e.count(2) > 0 {
            continue;
        }
        let lhs = gens.eval(&e.as_g_word().unwrap());
        let rhs = gens.eval(&n.form.w.as_g_word().unwrap());
        assert_eq!(lhs, rhs, "{w}");
    }
}

#[test]
fn certificates() {
    assert!(rule_certificates().iter().all(|c| c.replays));
    assert!(derived_relator_certificates().iter().all(|c| c.holds));
}

proptest! {
    #[test]
    fn normal_forms_are_idempotent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = GammaWord::random(&mut rng, 10);
        let n = normalize(&w).form;
        prop_assert_eq!(normalize(&n.to_word()).form, n);
    }

    #[test]
    fn g_words_are_fixed(letters in proptest::collection::vec((0u8..2, any::<bool>()), 0..30)) {
        let w = GammaWord::new(
            letters.into_iter().map(|(g, i)| expander_core::gamma_words::Letter::new(g, i)).collect(),
        ).reduced();
        let n = normalize(&w);
        prop_assert!(!n.form.tail);
        prop_assert_eq!(n.form.w, w);
    }

    #[test]
    fn parsing_round_trips(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = GammaWord::random(&mut rng, 20);
        if !w.is_empty() {
            prop_assert_eq!(GammaWord::parse(&w.to_string()).unwrap(), w);
        }
    }
}
