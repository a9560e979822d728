mod common;

use common::*;
use proptest::prelude::*;
use spinform::clifford::{Metric, Signature};
use spinform::exterior::{basis, binomial, flat, sharp, Form};
use spinform::jet::C64;

fn random_plain(seed: u64, n: usize, p: usize) -> Form {
    let mut g = rng(seed);
    Form::from_coeffs(n, p, random_vec(&mut g, binomial(n, p)))
}

#[test]
fn basis_counts_are_binomial() {
    for n in 0..=8 {
        let b = basis(n);
        for p in 0..=n {
            assert_eq!(b.count(p), binomial(n, p));
            for (r, &m) in b.subsets(p).iter().enumerate() {
                assert_eq!(b.rank_of(m), r);
                assert_eq!(m.count_ones() as usize, p);
            }
        }
    }
}

#[test]
fn top_degree_wedge_overflow_vanishes() {
    let top = Form::<C64>::basis_form(3, &[0, 1, 2]);
    let e0 = Form::<C64>::basis_covector(3, 0);
    assert!(top.wedge(&e0).norm_sqr() == 0.0);
}

#[test]
fn musical_isomorphisms_invert() {
    let metric = Signature::new(2, 2).metric();
    let x = as_complex(&[1.0, -2.0, 0.5, 3.0]);
    let xi = flat(&metric, &x);
    assert_eq!(xi.coeffs()[2], c(-0.5, 0.0));
    assert!(dist(&sharp(&metric, &xi), &x) < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_matches_oracle(n in 1usize..=6, k in 0usize..6, p in 0usize..=6, seed in any::<u64>()) {
        prop_assume!(p < n && k < n);
        let a = random_plain(seed, n, p);
        let e = Form::basis_covector(n, k);
        let ours = e.wedge(&a);
        prop_assert!(dist(ours.coeffs(), &wedge_e(n, p, 1, a.coeffs(), k)) < 1e-14);
    }

    #[test]
    fn interior_matches_oracle(n in 1usize..=6, k in 0usize..6, p in 1usize..=6, seed in any::<u64>()) {
        prop_assume!(p <= n && k < n);
        let a = random_plain(seed, n, p);
        let mut x = vec![c(0.0, 0.0); n];
        x[k] = c(1.0, 0.0);
        prop_assert!(dist(a.interior(&x).coeffs(), &interior_e(n, p, 1, a.coeffs(), k)) < 1e-14);
    }

    #[test]
    fn wedge_is_associative_and_graded(n in 1usize..=6, p in 0usize..=3, q in 0usize..=3, r in 0usize..=2, seed in any::<u64>()) {
        prop_assume!(p + q + r <= n);
        let a = random_plain(seed, n, p);
        let b = random_plain(seed ^ 1, n, q);
        let cc = random_plain(seed ^ 2, n, r);
        let left = a.wedge(&b).wedge(&cc);
        let right = a.wedge(&b.wedge(&cc));
        prop_assert!(dist(left.coeffs(), right.coeffs()) < 1e-12);
        let sign = if (p * q) % 2 == 0 { 1.0 } else { -1.0 };
        let ab = a.wedge(&b);
        let ba = b.wedge(&a).scale(c(sign, 0.0));
        prop_assert!(dist(ab.coeffs(), ba.coeffs()) < 1e-12);
    }

    #[test]
    fn interior_is_an_antiderivation(n in 1usize..=6, p in 1usize..=3, q in 0usize..=3, seed in any::<u64>()) {
        prop_assume!(p + q <= n);
        let a = random_plain(seed, n, p);
        let b = random_plain(seed ^ 7, n, q);
        let mut g = rng(seed ^ 9);
        let x = random_vec(&mut g, n);
        let lhs = a.wedge(&b).interior(&x);
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        let mut rhs = a.interior(&x).wedge(&b);
        if q > 0 {
            rhs = rhs.add(&a.wedge(&b.interior(&x)).scale(c(sign, 0.0)));
        }
        prop_assert!(dist(lhs.coeffs(), rhs.coeffs()) < 1e-12);
        // X⌟X⌟ = 0
        if p >= 2 {
            prop_assert!(a.interior(&x).interior(&x).norm_sqr().sqrt() < 1e-12);
        }
    }

    #[test]
    fn interior_is_dual_to_flat_wedge_for_euclidean(n in 1usize..=6, p in 1usize..=6, seed in any::<u64>()) {
        prop_assume!(p <= n);
        let metric = Metric::euclidean(n);
        let a = random_plain(seed, n, p);
        let b = random_plain(seed ^ 3, n, p - 1);
        let mut g = rng(seed ^ 5);
        let x = as_complex(&random_real(&mut g, n));
        let inner = |u: &Form, v: &Form| -> C64 {
            u.coeffs().iter().zip(v.coeffs()).map(|(s, t)| s.conj() * t).sum()
        };
        let lhs = inner(&b, &a.interior(&x));
        let rhs = inner(&flat(&metric, &x).wedge(&b), &a);
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }
}
