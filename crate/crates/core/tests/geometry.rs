use genn::geometry::{bridge_gaps, connected_components, fit_curve, skeleton, Connectivity};
use genn::raster::Mask;
use proptest::prelude::*;

fn mask(max: usize) -> impl Strategy<Value = Mask> {
    (1..max, 1..max, 0.1f64..0.7).prop_flat_map(|(w, h, p)| {
        proptest::collection::vec(proptest::bool::weighted(p), w * h)
            .prop_map(move |b| Mask::from_bits(w, h, b).unwrap())
    })
}

fn blobby(max: usize) -> impl Strategy<Value = Mask> {
    mask(max).prop_map(|m| {
        // thicken random pixels into 2x2 blocks so thinning has work to do
        let mut out = m.clone();
        for (x, y) in m.foreground() {
            for (dx, dy) in [(1, 0), (0, 1), (1, 1)] {
                if x + dx < m.width() && y + dy < m.height() {
                    out.set(x + dx, y + dy, true);
                }
            }
        }
        out
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn components_partition_foreground(m in mask(24), eight: bool) {
        let conn = if eight { Connectivity::Eight } else { Connectivity::Four };
        let mut seen = Mask::new(m.width(), m.height());
        let mut total = 0;
        for c in connected_components(&m, conn) {
            for &(x, y) in &c.pixels {
                prop_assert!(m.get(x, y));
                prop_assert!(!seen.get(x, y));
                seen.set(x, y, true);
            }
            total += c.pixels.len();
            prop_assert_eq!(c.area, c.pixels.len());
        }
        prop_assert_eq!(total, m.count());
        prop_assert_eq!(seen, m);
    }

    #[test]
    fn skeleton_idempotent_and_inside(m in blobby(24)) {
        let s = skeleton(&m);
        prop_assert!(s.is_subset_of(&m));
        prop_assert_eq!(skeleton(&s), s);
    }

    #[test]
    fn bridging_only_adds(m in blobby(32), gap in 1.0f64..12.0, degree in 1usize..4) {
        prop_assert!(m.is_subset_of(&bridge_gaps(&m, gap, degree, 6)));
    }

    #[test]
    fn interpolation_is_exact(degree in 1usize..4, coeffs in proptest::collection::vec(-2.0f64..2.0, 4), start in -20i32..20) {
        let pts: Vec<(f64, f64)> = (0..=degree as i32)
            .map(|k| {
                let x = f64::from(start + 3 * k);
                (x, coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c))
            })
            .collect();
        prop_assert!(fit_curve(&pts, degree).unwrap().rms_residual < 1e-9);
    }

    #[test]
    fn residual_never_grows_with_degree(ys in proptest::collection::vec(-30.0f64..30.0, 6..20)) {
        let pts: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (i as f64 * 2.0, y)).collect();
        let r: Vec<f64> = (1..=3).map(|d| fit_curve(&pts, d).unwrap().rms_residual).collect();
        prop_assert!(r[1] <= r[0] + 1e-9 && r[2] <= r[1] + 1e-9, "{:?}", r);
    }
}
