use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;

use dirent::estimator::{count_patterns, estimate_tde, CountMode, WindowSpec};
use dirent::laurent::{compose, invert, to_laurent};
use dirent::measures::{stationary, StochasticMatrix};
use dirent::mtde::{mtde_uniform, Direction};
use dirent::{tde_curve, LocalRule, Modulus, Segment};

fn any_rule(max_m: u64) -> impl Strategy<Value = LocalRule> {
    (2..=max_m, -3i64..=0, 0i64..=3).prop_flat_map(|(m, l, r)| {
        prop::collection::vec(0..m, (r - l + 1) as usize)
            .prop_map(move |c| LocalRule::new(m, l, c).unwrap())
    })
}

fn invertible_rule(max_m: u64) -> impl Strategy<Value = (LocalRule, LocalRule)> {
    any_rule(max_m).prop_filter_map("invertible", |f| invert(&f).ok().map(|g| (f, g)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn curve_is_continuous(f in any_rule(60)) {
        let curve = tde_curve(&f);
        for &b in curve.breakpoints() {
            let (below, above) = curve.one_sided_limits(b);
            prop_assert!((below - above).abs() <= 1e-9);
        }
    }

    #[test]
    fn curve_endpoints_are_ln_m(f in any_rule(60)) {
        let curve = tde_curve(&f);
        let ln_m = (f.m() as f64).ln();
        prop_assert!((curve.eval(0.0).unwrap() - ln_m).abs() <= 1e-12);
        prop_assert!((curve.eval(PI).unwrap() - ln_m).abs() <= 1e-12);
    }

    #[test]
    fn vertical_value_is_topological_entropy(f in any_rule(60)) {
        let curve = tde_curve(&f);
        prop_assert!((curve.eval(FRAC_PI_2).unwrap() - curve.topological_entropy()).abs() <= 1e-12);
    }

    #[test]
    fn mtde_is_antipodal_and_homogeneous(
        f in any_rule(30),
        x in -5.0..5.0f64,
        y in -5.0..5.0f64,
        a in 0.01..4.0f64,
    ) {
        prop_assume!(x.hypot(y) > 1e-3);
        let v = Direction::new(x, y).unwrap();
        let h = mtde_uniform(&f, v).unwrap();
        let back = mtde_uniform(&f, v.scale(-1.0).unwrap()).unwrap();
        prop_assert!((h - back).abs() <= 1e-12 * (1.0 + h));
        let scaled = mtde_uniform(&f, v.scale(a).unwrap()).unwrap();
        prop_assert!((scaled - a * h).abs() <= 1e-9 * (1.0 + scaled));
    }

    #[test]
    fn inverse_is_two_sided((f, g) in invertible_rule(36)) {
        prop_assert!(compose(&f, &g).unwrap().is_identity());
        prop_assert!(compose(&g, &f).unwrap().is_identity());
        prop_assert!(to_laurent(&f).mul(&to_laurent(&g)).is_one());
        prop_assert_eq!(invert(&g).unwrap(), f.normalize());
    }

    #[test]
    fn step_then_inverse_restores((f, g) in invertible_rule(12), seed in any::<u64>(), start in -8i64..8) {
        let m = f.m();
        let len = f.coeffs().len() + g.coeffs().len() - 1 + (seed % 10) as usize;
        let symbols: Vec<u64> = (0..len as u64).map(|i| (seed.rotate_left(i as u32 * 7) ^ i) % m).collect();
        let x = Segment::new(start, symbols);
        let y = g.step(&f.step(&x).unwrap()).unwrap();
        prop_assert_eq!(y.clone(), x.restrict(y.start, y.end()));
    }

    #[test]
    fn projection_round_trips(f in any_rule(60)) {
        let f = f.normalize();
        let parts: Vec<LocalRule> = (0..f.modulus().factors().len()).map(|i| f.project(i).unwrap()).collect();
        prop_assert_eq!(LocalRule::recombine(f.modulus(), &parts).unwrap(), f);
    }

    #[test]
    fn composite_curve_is_sum_of_factors(f in any_rule(60), theta in 0.0..=PI) {
        let whole = tde_curve(&f).eval(theta).unwrap();
        let sum: f64 = (0..f.modulus().factors().len())
            .map(|i| tde_curve(&f.project(i).unwrap()).eval(theta).unwrap())
            .sum();
        prop_assert!((whole - sum).abs() <= 1e-12);
    }

    #[test]
    fn stationary_vector_is_fixed(
        weights in prop::collection::vec(prop::collection::vec(0u32..6, 5), 5),
    ) {
        prop_assume!(weights.iter().all(|r| r.iter().any(|&w| w > 0)));
        let rows: Vec<Vec<f64>> = weights
            .iter()
            .map(|r| {
                let s: u32 = r.iter().sum();
                r.iter().map(|&w| w as f64 / s as f64).collect()
            })
            .collect();
        if let Ok(t) = StochasticMatrix::from_f64(rows) {
            let pi = stationary(&t).unwrap();
            prop_assert!(t.residual(pi.vector.values()) <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sampled_count_never_exceeds_exact(f in any_rule(3), seed in any::<u64>()) {
        let w = WindowSpec::new(1, 2, 1.2).unwrap();
        let exact = count_patterns(&f, &w, CountMode::default()).unwrap();
        let sampled = count_patterns(&f, &w, CountMode::Sampled { seed, budget: 300 }).unwrap();
        prop_assert!(sampled.count <= exact.count);
        prop_assert!(sampled.count >= 1);
    }
}

#[test]
fn bipermutative_estimates_track_the_closed_form() {
    // every mod-2 and mod-3 rule on [-1, 1] with unit end coefficients
    for m in [2u64, 3] {
        for a in 1..m {
            for b in 0..m {
                for c in 1..m {
                    let f = LocalRule::new(m, -1, vec![a, b, c]).unwrap();
                    let rec = estimate_tde(&f, FRAC_PI_2, 2, 4, CountMode::default()).unwrap();
                    let closed = tde_curve(&f).eval(FRAC_PI_2).unwrap();
                    let transient = 5.0 * (m as f64).ln() / 4.0;
                    assert!(
                        (rec.nats_per_row - (closed + transient)).abs() <= 0.1,
                        "{f}: {} vs {}",
                        rec.nats_per_row,
                        closed + transient
                    );
                }
            }
        }
    }
}

#[test]
fn exact_count_ignores_seed() {
    let f = LocalRule::new(3, -1, vec![1, 1, 2]).unwrap();
    let w = WindowSpec::new(1, 2, 2.0).unwrap();
    let a = count_patterns(&f, &w, CountMode::Exact { budget: 1 << 20 }).unwrap();
    let b = count_patterns(&f, &w, CountMode::Exact { budget: 1 << 21 }).unwrap();
    assert_eq!(a.count, b.count);
    assert_eq!(Modulus::new(3).unwrap().value(), 3);
}
