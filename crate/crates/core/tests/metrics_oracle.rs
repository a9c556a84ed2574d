#[path = "support/oracles.rs"]
mod oracles;

use hddcrp::metrics::{b_cubed_counts, ceaf_e_counts, muc_counts, MetricCounts};
use proptest::prelude::*;

fn pair() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (1usize..=10).prop_flat_map(|n| (prop::collection::vec(0..n, n), prop::collection::vec(0..n, n)))
}

fn prf(c: MetricCounts) -> (f64, f64, f64) {
    let p = c.prf();
    (p.precision, p.recall, p.f1)
}

fn close(a: (f64, f64, f64), b: (f64, f64, f64)) -> bool {
    (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12 && (a.2 - b.2).abs() < 1e-12
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn metrics_agree_with_brute_force((gold, pred) in pair()) {
        prop_assert!(close(prf(muc_counts(&gold, &pred)), oracles::muc(&gold, &pred)));
        prop_assert!(close(prf(b_cubed_counts(&gold, &pred)), oracles::b_cubed(&gold, &pred)));
        prop_assert!(close(prf(ceaf_e_counts(&gold, &pred)), oracles::ceaf_e(&gold, &pred)));
    }

    #[test]
    fn swapping_sides_swaps_precision_and_recall((gold, pred) in pair()) {
        for f in [muc_counts, b_cubed_counts, ceaf_e_counts] {
            let (p, r, _) = prf(f(&gold, &pred));
            let (p2, r2, _) = prf(f(&pred, &gold));
            prop_assert!((p - r2).abs() < 1e-12 && (r - p2).abs() < 1e-12);
        }
    }

    #[test]
    fn relabeling_and_reordering_do_not_matter((gold, pred) in pair(), shift in 1usize..7, seed in any::<u64>()) {
        let n = gold.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let g2: Vec<usize> = perm.iter().map(|&i| gold[i] * 3 + shift).collect();
        let p2: Vec<usize> = perm.iter().map(|&i| pred[i] + shift).collect();
        for f in [muc_counts, b_cubed_counts, ceaf_e_counts] {
            let a = prf(f(&gold, &pred));
            let b = prf(f(&g2, &p2));
            prop_assert!(close(a, b));
            prop_assert!([a.0, a.1, a.2].iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
