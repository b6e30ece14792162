use num_complex::Complex64;
use num_traits::{One, Zero};
use proptest::prelude::*;

use sympgt::algebra::{q_binomial, rat, LaurentPoly, QSeriesCtx, Rational};
use sympgt::berele::process_word_steps;
use sympgt::branching::{leading_coefficients_match, random_two_strip_pair};
use sympgt::characters::{
    is_hyperoctahedral_invariant, qwhittaker_recursion, symplectic_schur_tableaux, symplectic_schur_weyl,
};
use sympgt::combinatorics::{pattern_to_tableau, tableau_to_pattern, Letter, Partition};
use sympgt::continuous::{ks_critical_95, ks_statistic};
use sympgt::limits::{bessel_k, bessel_k_scaled};

fn partition(max_parts: usize, max_part: i64) -> impl Strategy<Value = Partition> {
    prop::collection::vec(0..=max_part, 0..=max_parts).prop_map(|mut v| {
        v.sort_unstable_by(|a, b| b.cmp(a));
        Partition::new(v).unwrap()
    })
}

fn laurent(nvars: usize) -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec((prop::collection::vec(-3i64..=3, nvars), -9i64..=9, 1i64..=4), 0..6).prop_map(
        move |terms| {
            let mut p = LaurentPoly::zero(nvars);
            for (e, num, den) in terms {
                p.add_term(e, rat(num, den));
            }
            p
        },
    )
}

fn word(n: u32, len: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec(
        (1..=n, any::<bool>()).prop_map(|(k, bar)| if bar { Letter::barred(k) } else { Letter::unbarred(k) }),
        0..=len,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laurent_text_round_trip(p in laurent(2)) {
        prop_assert_eq!(LaurentPoly::parse(&p.to_string(), 2).unwrap(), p);
    }

    #[test]
    fn laurent_ring_laws(a in laurent(2), b in laurent(2), c in laurent(2)) {
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in laurent(2), b in laurent(2), x in 1i64..7, y in 1i64..7) {
        let pt = [rat(x, 3), rat(y + 1, 2)];
        prop_assert_eq!((&a * &b).eval(&pt), a.eval(&pt) * b.eval(&pt));
    }

    #[test]
    fn transpose_is_an_involution(p in partition(5, 6)) {
        prop_assert_eq!(p.transpose().transpose(), p.clone());
        prop_assert_eq!(p.transpose().weight(), p.weight());
    }

    #[test]
    fn q_binomial_symmetry_and_pascal(n in 1i64..12, k in 0i64..12, num in 1i64..9) {
        prop_assume!(k <= n);
        let ctx = QSeriesCtx::exact(rat(num, 10)).unwrap();
        let b = |n, k| q_binomial(&ctx, n, k).unwrap();
        prop_assert_eq!(b(n, k), b(n, n - k));
        if k >= 1 {
            // [n, k] = [n-1, k-1] + q^k [n-1, k]
            let rhs = b(n - 1, k - 1) + ctx.power(k) * if k <= n - 1 { b(n - 1, k) } else { Rational::zero() };
            prop_assert_eq!(b(n, k), rhs);
        }
    }

    #[test]
    fn berele_steps_stay_valid(w in word(3, 9)) {
        let steps = process_word_steps(&w, 3).unwrap();
        for pair in steps.windows(2) {
            pair[1].validate(3).unwrap();
            let (a, b) = (pair[0].shape(), pair[1].shape());
            let len = a.len().max(b.len());
            let moved: i64 = a.padded(len).iter().zip(b.padded(len)).map(|(x, y)| (x - y).abs()).sum();
            prop_assert_eq!(moved, 1);
        }
    }

    #[test]
    fn tableau_pattern_round_trip(w in word(3, 8)) {
        let t = process_word_steps(&w, 3).unwrap().pop().unwrap();
        let p = tableau_to_pattern(&t, 3).unwrap();
        prop_assert_eq!(p.top().iter().copied().filter(|&v| v > 0).collect::<Vec<_>>(), t.shape().parts().to_vec());
        prop_assert_eq!(pattern_to_tableau(&p).unwrap(), t);
    }

    #[test]
    fn weyl_matches_tableaux_at_random_points(lam in partition(2, 3), x in 2i64..9, y in 2i64..9) {
        prop_assume!(3 * x != y);
        let pt = [rat(x, 1), rat(y, 3)];
        prop_assume!(pt[1] != Rational::one());
        prop_assert_eq!(symplectic_schur_weyl(2, &lam, &pt).unwrap(), symplectic_schur_tableaux(2, &lam).eval(&pt));
    }

    #[test]
    fn qwhittaker_is_hyperoctahedral(lam in partition(2, 3), num in 1i64..9) {
        let ctx = QSeriesCtx::exact(rat(num, 10)).unwrap();
        prop_assert!(is_hyperoctahedral_invariant(&qwhittaker_recursion(2, &lam, &ctx)));
    }

    #[test]
    fn branching_leading_terms(seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=4);
        let pair = random_two_strip_pair(&mut rng, n, 6);
        let ctx = QSeriesCtx::exact(rat(1, 3)).unwrap();
        prop_assert!(leading_coefficients_match(&pair, &ctx));
    }

    #[test]
    fn bessel_k_is_even_in_the_order(nu in -3.0f64..3.0, im in -2.0f64..2.0, z in 0.05f64..30.0) {
        let a = bessel_k(Complex64::new(nu, im), z);
        let b = bessel_k(Complex64::new(-nu, -im), z);
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-300));
        let s = bessel_k_scaled(Complex64::new(nu, im), z) * (-z).exp();
        prop_assert!((a - s).norm() <= 1e-12 * a.norm().max(1e-300));
    }

    #[test]
    fn ks_is_a_bounded_symmetric_statistic(
        a in prop::collection::vec(-5.0f64..5.0, 1..40),
        b in prop::collection::vec(-5.0f64..5.0, 1..40),
    ) {
        let d = ks_statistic(&a, &b);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((d - ks_statistic(&b, &a)).abs() < 1e-15);
        prop_assert_eq!(ks_statistic(&a, &a), 0.0);
        prop_assert!(ks_critical_95(a.len(), b.len()) > 0.0);
    }
}
