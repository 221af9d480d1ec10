use proptest::prelude::*;

use sensyn::linalg::{normalized_cumsum, select_m, sym_eig, SymMatrix};
use sensyn::randkit::{normal_cdf, normal_quantile, InputDistribution, RngStream};
use sensyn::report::{normalize, rank};

fn symmetric() -> impl Strategy<Value = SymMatrix> {
    (1usize..9).prop_flat_map(|d| {
        prop::collection::vec(-100.0f64..100.0, d * (d + 1) / 2)
            .prop_map(move |packed| SymMatrix::from_upper_triangle(d, &packed))
    })
}

fn positive_scores() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-6f64..1e3, 1..12)
}

proptest! {
    #[test]
    fn eig_reconstructs(a in symmetric()) {
        let e = sym_eig(&a).unwrap();
        let scale = e.eigenvalues().iter().fold(1.0f64, |m, l| m.max(l.abs()));
        prop_assert!(e.reconstruct().max_abs_diff(&a) <= 1e-10 * scale);
        prop_assert!(e.orthogonality_error() <= 1e-10);
        prop_assert!(e.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
        prop_assert!((e.eigenvalues().iter().sum::<f64>() - a.trace()).abs() <= 1e-9 * scale * a.dim() as f64);
    }

    #[test]
    fn normalize_is_idempotent(s in positive_scores()) {
        let n = normalize(&s).unwrap().unwrap();
        prop_assert!((n.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let again = normalize(&n).unwrap().unwrap();
        for (a, b) in n.iter().zip(&again) {
            prop_assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn normalize_ignores_scale(s in positive_scores(), c in 1e-3f64..1e3) {
        let scaled: Vec<f64> = s.iter().map(|x| x * c).collect();
        let a = normalize(&s).unwrap().unwrap();
        let b = normalize(&scaled).unwrap().unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_is_a_descending_permutation(s in positive_scores(), c in 1e-3f64..1e3) {
        let r = rank(&s);
        let mut sorted = r.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..s.len()).collect::<Vec<_>>());
        prop_assert!(r.windows(2).all(|w| s[w[0]] >= s[w[1]]));
        let scaled: Vec<f64> = s.iter().map(|x| x * c).collect();
        // ties can reorder only among exactly equal scores
        let rs = rank(&scaled);
        for (a, b) in r.iter().zip(&rs) {
            prop_assert!(a == b || s[*a] == s[*b]);
        }
    }

    #[test]
    fn cumsum_is_monotone_and_ends_at_one(mut l in prop::collection::vec(0.0f64..10.0, 1..12), t in 0.05f64..0.95) {
        l.sort_by(|a, b| b.total_cmp(a));
        prop_assume!(l[0] > 0.0);
        let c = normalized_cumsum(&l).unwrap();
        prop_assert!(c.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!((c.last().unwrap() - 1.0).abs() < 1e-12);
        let m = select_m(&l, t).unwrap();
        prop_assert!(m >= 1 && m <= l.len());
        if c[m - 1] <= t {
            // threshold never strictly exceeded: all eigenpairs kept
            prop_assert_eq!(m, l.len());
        }
        if m > 1 {
            prop_assert!(c[m - 2] <= t);
        }
    }

    #[test]
    fn quantile_inverts_cdf(x in -30.0f64..5.0) {
        // above 5 the cdf itself is within 1e-7 of 1 and loses the digits
        prop_assert!((normal_quantile(normal_cdf(x)) - x).abs() < 1e-8);
    }

    #[test]
    fn inverse_cdf_is_monotone(p in 1e-9f64..0.5, q in 1e-9f64..0.5, mean in -5.0f64..5.0, sd in 0.01f64..10.0) {
        let dist = InputDistribution::normal(mean, sd).unwrap();
        let (lo, hi) = if p < q { (p, q) } else { (q, p) };
        prop_assert!(dist.inverse_cdf(lo).unwrap() <= dist.inverse_cdf(hi).unwrap());
        prop_assert!(dist.inverse_cdf(1.0 - lo).unwrap() >= dist.inverse_cdf(1.0 - hi).unwrap());
    }

    #[test]
    fn streams_are_reproducible(seed in any::<u64>(), id in any::<u64>(), k in 0u64..1000) {
        let mut a = RngStream::new(seed, id);
        let b = RngStream::new(seed, id);
        for _ in 0..k {
            a.next_u64();
        }
        prop_assert_eq!(a.next_u64(), b.word_at(k));
        let u = RngStream::new(seed, id).next_f64();
        prop_assert!((0.0..1.0).contains(&u));
    }
}
