mod common;

use genn::eval::{areal_extent, kappa, overall_accuracy, ConfusionMatrix};
use genn::raster::Mask;
use genn::rng::Rng;
use proptest::prelude::*;

fn matrix(seed: u64) -> Vec<Vec<u64>> {
    let mut rng = Rng::new(seed);
    let k = 2 + rng.below(5);
    (0..k)
        .map(|i| (0..k).map(|j| rng.below(30) as u64 + if i == j { 20 } else { 0 }).collect())
        .collect()
}

fn cm(rows: &[Vec<u64>]) -> ConfusionMatrix {
    ConfusionMatrix::from_rows((0..rows.len()).map(|i| format!("c{i}")).collect(), rows).unwrap()
}

proptest! {
    #[test]
    fn kappa_matches_brute_force(seed: u64) {
        let rows = matrix(seed);
        prop_assert!((kappa(&cm(&rows)) - common::kappa_naive(&rows)).abs() <= 1e-12);
    }

    #[test]
    fn class_permutation_invariance(seed: u64) {
        let rows = matrix(seed);
        let mut perm: Vec<usize> = (0..rows.len()).collect();
        Rng::new(seed ^ 1).shuffle(&mut perm);
        let moved: Vec<Vec<u64>> = perm.iter().map(|&i| perm.iter().map(|&j| rows[i][j]).collect()).collect();
        let (a, b) = (cm(&rows), cm(&moved));
        prop_assert!((kappa(&a) - kappa(&b)).abs() <= 1e-12);
        prop_assert_eq!(overall_accuracy(&a), overall_accuracy(&b));
    }

    #[test]
    fn kappa_one_iff_diagonal(seed: u64, zero_off: bool) {
        let mut rows = matrix(seed);
        if zero_off {
            for (i, r) in rows.iter_mut().enumerate() {
                for (j, c) in r.iter_mut().enumerate() {
                    if i != j {
                        *c = 0;
                    }
                }
            }
        }
        let off: u64 = rows.iter().enumerate().map(|(i, r)| r.iter().sum::<u64>() - r[i]).sum();
        prop_assert_eq!(kappa(&cm(&rows)) == 1.0, off == 0);
    }

    #[test]
    fn areal_extent_is_linear(bits in proptest::collection::vec(any::<bool>(), 64), px in 0.5f64..50.0) {
        let m = Mask::from_bits(8, 8, bits).unwrap();
        let area = areal_extent(&m, px).unwrap();
        let expected = m.count() as f64 * px * px / 1e6;
        prop_assert!((area - expected).abs() <= 1e-12 * expected.max(1.0));
    }
}
