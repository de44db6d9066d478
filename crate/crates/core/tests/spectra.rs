use expander_core::cayley::{build_cayley, Multigraph};
use expander_core::quotient::QuotientGroup;
use expander_core::spectra::{
    cheeger_bounds, dense_report, dense_spectrum, distinct, lanczos_report, ramanujan_bound,
    ramanujan_verdict, LanczosOptions, Method, Verdict,
};
use std::sync::OnceLock;

fn graphs() -> &'static [Multigraph] {
    static G: OnceLock<Vec<Multigraph>> = OnceLock::new();
    G.get_or_init(|| {
        (0..=5)
            .map(|i| build_cayley(&QuotientGroup::enumerate(i).unwrap()))
            .collect()
    })
}

#[test]
fn g1_spectrum() {
    let s = dense_spectrum(&graphs()[1]).unwrap();
    for (a, b) in s.iter().zip([4.0, 0.0, 0.0, -4.0]) {
        assert!((a - b).abs() < 1e-10, "{s:?}");
    }
    let c = cheeger_bounds(&graphs()[1]).unwrap();
    assert!((c.lower - 2.0).abs() < 1e-10 && (c.upper - 32f64.sqrt()).abs() < 1e-10);
}

#[test]
fn single_vertex() {
    let g = &graphs()[0];
    assert_eq!(dense_spectrum(g).unwrap(), vec![4.0]);
    let r = dense_report(g).unwrap();
    assert_eq!(r.lambda2, None);
    assert!(r.cheeger.is_none() && cheeger_bounds(g).is_err());
    assert_eq!(r.verdict, Verdict::Ramanujan);
}

#[test]
fn trace_identities() {
    for g in &graphs()[..=4] {
        let s = dense_spectrum(g).unwrap();
        let sum: f64 = s.iter().sum();
        let sq: f64 = s.iter().map(|x| x * x).sum();
        assert!((sum - 2.0 * g.loop_count() as f64).abs() < 1e-8);
        let walks = g.closed_two_walks() as f64;
        assert!((sq - walks).abs() <= 1e-6 * walks);
    }
}

#[test]
fn bipartite_spectra_are_symmetric() {
    for g in &graphs()[1..=4] {
        let s = dense_spectrum(g).unwrap();
        let n = s.len();
        for k in 0..n {
            assert!((s[k] + s[n - 1 - k]).abs() < 1e-8);
        }
    }
}

#[test]
fn lanczos_matches_dense() {
    for g in &graphs()[1..=4] {
        let d = dense_report(g).unwrap();
        let l = lanczos_report(g, &LanczosOptions::new(4)).unwrap();
        assert!((d.lambda_nontrivial_max - l.lambda_nontrivial_max).abs() < 1e-9);
        assert!((d.lambda2.unwrap() - l.lambda2.unwrap()).abs() < 1e-9);
        let ds = distinct(&dense_spectrum(g).unwrap(), 1e-9);
        let res = expander_core::spectra::lanczos(g, &LanczosOptions::new(2)).unwrap();
        for (a, b) in ds.iter().zip(&res.largest) {
            assert!((a - b.value).abs() < 1e-9, "{ds:?} vs {:?}", res.largest);
        }
        for (a, b) in ds.iter().rev().zip(&res.smallest) {
            assert!((a - b.value).abs() < 1e-9, "{ds:?} vs {:?}", res.smallest);
        }
    }
}

#[test]
fn ramanujan_tower_to_g5() {
    for g in &graphs()[..=4] {
        assert_eq!(ramanujan_verdict(g).unwrap().verdict, Verdict::Ramanujan);
    }
    let r = ramanujan_verdict(&graphs()[5]).unwrap();
    assert_eq!(r.method, Method::Lanczos);
    assert_eq!(r.verdict, Verdict::NotRamanujan);
    assert!(r.lambda_nontrivial_max - ramanujan_bound() > 1e-6);
    assert!(r.converged);
    assert!((r.lambda_nontrivial_max - 3.5707597408).abs() < 1e-8);
}

#[test]
fn cheeger_bounds_are_positive() {
    for g in &graphs()[1..=5] {
        let c = cheeger_bounds(g).unwrap();
        assert!(0.0 < c.lower && c.lower <= c.upper);
    }
}
