use herzmorrey::exponents::{check, region_boundary, ExponentParams, FreeAxis, TheoremId};
use proptest::prelude::*;

fn theorem() -> impl Strategy<Value = TheoremId> {
    prop::sample::select(TheoremId::ALL.to_vec())
}

proptest! {
    #[test]
    fn check_is_pure(t in theorem(), n in 1usize..=3, alpha in -2.0f64..2.0, lambda in 0.0f64..1.0,
                     q1 in 1.0f64..5.0, q2 in 1.0f64..5.0, l in 0.1f64..5.0) {
        let p = ExponentParams { q: Some(vec![q1; n]), p: Some(1.0), ..ExponentParams::two_space(n, alpha, 1.0, 2.0, lambda, q1, q2, l) };
        let a = check(t, &p).unwrap();
        let b = check(t, &p.clone()).unwrap();
        prop_assert_eq!(a.admissible, a.failed_clauses.is_empty());
        prop_assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }

    #[test]
    fn lambda_shrinks_alpha_window(n in 1usize..=3, q in 1.05f64..6.0, alpha in -3.0f64..3.0,
                                   lambda in 0.0f64..1.0, dl in 0.0f64..1.0) {
        let small = check(TheoremId::Thm3_1, &ExponentParams::same_space(n, alpha, 1.0, lambda, q)).unwrap();
        let large = check(TheoremId::Thm3_1, &ExponentParams::same_space(n, alpha, 1.0, lambda + dl, q)).unwrap();
        prop_assert!(!large.admissible || small.admissible);
    }

    #[test]
    fn classical_condition(n in 1usize..=3, q in 1.05f64..6.0, alpha in -3.0f64..3.0, lambda in 0.0f64..1.0) {
        let nf = n as f64;
        let lo = -nf / q + lambda;
        let hi = nf * (1.0 - 1.0 / q);
        prop_assume!((alpha - lo).abs() > 1e-9 && (alpha - hi).abs() > 1e-9);
        let v = check(TheoremId::Thm3_1, &ExponentParams::same_space(n, alpha, 1.0, lambda, q)).unwrap();
        prop_assert_eq!(v.admissible, lo < alpha && alpha < hi);
    }
}

#[test]
fn region_agrees_with_check() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
    for t in TheoremId::ALL {
        let (fixed, window) = herzmorrey::experiments::region_setup(t);
        for axes in [
            [FreeAxis::Alpha, FreeAxis::Lambda],
            [FreeAxis::Alpha, FreeAxis::P],
        ] {
            let w = if axes[1] == FreeAxis::P {
                [window[0], [0.2, 3.0]]
            } else {
                window
            };
            let mut fixed = fixed.clone();
            if axes[1] == FreeAxis::P && t.is_two_space() {
                continue;
            }
            fixed.p.get_or_insert(1.0);
            let region = region_boundary(t, &fixed, axes, w).unwrap();
            for _ in 0..2000 {
                let u = rng.gen_range(w[0][0]..w[0][1]);
                let v = rng.gen_range(w[1][0]..w[1][1]);
                let mut p = fixed.clone();
                p.set(axes[0], u);
                p.set(axes[1], v);
                assert_eq!(
                    check(t, &p).unwrap().admissible,
                    region.contains(u, v),
                    "{t} at ({u}, {v})"
                );
            }
        }
    }
}
