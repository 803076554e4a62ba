use pell_core::integral::{power_bounds_hold, power_identity_residual, PowerSample};
use pell_core::pointwise::{lh_margin, strong_form_value, strong_margin};
use pell_core::range::{p_of_t, t_of_p};
use pell_core::tensor::{adjoint, project_state, real_pairing, sample_field, SampledField};
use pell_core::*;
use proptest::prelude::*;

fn complexes(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), len)
        .prop_map(|v| v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
}

fn nonzero(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    complexes(len).prop_filter("nonzero", |v| v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-6)
}

fn shape() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=3, 1usize..=3)
}

fn tensor_state() -> impl Strategy<Value = (CoefficientTensor, GradientState, GradientState, UnitState)> {
    shape().prop_flat_map(|(n, m)| {
        (complexes(n * n * m * m), complexes(n * m), complexes(n * m), nonzero(m)).prop_map(
            move |(a, x, y, w)| {
                (
                    CoefficientTensor::new(n, m, a).unwrap(),
                    GradientState::new(n, m, x).unwrap(),
                    GradientState::new(n, m, y).unwrap(),
                    UnitState::new(w).unwrap(),
                )
            },
        )
    })
}

/// Identity plus a small complex perturbation, so the Legendre constant is
/// positive.
fn legendre_tensor() -> impl Strategy<Value = CoefficientTensor> {
    (1usize..=2, 1usize..=2).prop_flat_map(|(n, m)| {
        complexes(n * n * m * m).prop_map(move |d| {
            let id = CoefficientTensor::identity(n, m);
            let pert = CoefficientTensor::new(n, m, d).unwrap().scaled(Complex64::new(0.1, 0.0));
            id.try_add(&pert).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn projection_contracts_and_is_idempotent((_a, x, _y, w) in tensor_state()) {
        let px = project_state(&x, &w).unwrap();
        prop_assert!(px.norm() <= x.norm() + 1e-12);
        let ppx = project_state(&px, &w).unwrap();
        for (u, v) in ppx.comps().iter().zip(px.comps()) {
            prop_assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn adjoint_is_an_involution((a, x, y, _w) in tensor_state()) {
        let star = adjoint(&a);
        prop_assert_eq!(adjoint(&star), a.clone());
        let lhs = real_pairing(&a, &x, &y).unwrap();
        let rhs = real_pairing(&star, &y, &x).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn pairing_sees_only_the_hermitian_part((a, x, _y, _w) in tensor_state()) {
        let lhs = real_pairing(&a, &x, &x).unwrap();
        let rhs = real_pairing(&a.hermitian_part(), &x, &x).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn strong_form_is_quadratic_in_t((a, x, _y, w) in tensor_state(), t in -0.95f64..0.95) {
        let f = |t| strong_form_value(&a, t, &x, &w).unwrap();
        let (fm, f0, fp) = (f(-0.5), f(0.0), f(0.5));
        let c2 = 2.0 * (fp + fm - 2.0 * f0);
        let c1 = fp - fm;
        let fit = f0 + c1 * t + c2 * t * t;
        prop_assert!((fit - f(t)).abs() < 1e-10);
        let zeta = project_state(&x, &w).unwrap();
        prop_assert!((c2 + real_pairing(&a, &zeta, &zeta).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn p_t_round_trip(p in 1.0001f64..1e6) {
        let t = t_of_p(p).unwrap();
        prop_assert!((p_of_t(t).unwrap() - p).abs() <= 1e-15 * p * p);
        prop_assert!(t > -1.0 && t < 1.0);
    }

    #[test]
    fn power_identity_on_random_samples(
        u in nonzero(2),
        g in complexes(6),
        p in 1.1f64..8.0,
    ) {
        let s = [PowerSample { u, grad: g }];
        prop_assert!(power_identity_residual(&s, p).unwrap() < 1e-10);
        prop_assert!(power_bounds_hold(&s, p).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lh_margin_dominates_strong_margin(a in legendre_tensor(), t in -0.9f64..0.9) {
        let cfg = SearchConfig::default().with_t(t);
        let s = strong_margin(&a, &cfg).unwrap().value;
        let l = lh_margin(&a, &cfg).unwrap().value;
        prop_assert!(l >= s - 1e-8, "lh {} strong {}", l, s);
    }

    #[test]
    fn strong_margin_duality(a in legendre_tensor(), t in -0.9f64..0.9) {
        let cfg = SearchConfig::default();
        let s = strong_margin(&a, &cfg.with_t(t)).unwrap().value;
        let d = strong_margin(&adjoint(&a), &cfg.with_t(-t)).unwrap().value;
        prop_assert!((s - d).abs() < 1e-6, "{} vs {}", s, d);
    }

    #[test]
    fn rescaling_keeps_the_value_set(
        vals in prop::collection::vec(0.5f64..3.0, 9),
        eps in prop::sample::select(vec![1.0, 0.5, 0.25, 1.0 / 3.0]),
    ) {
        let samples: Vec<_> = vals
            .iter()
            .map(|&v| CoefficientTensor::identity(2, 1).scaled(Complex64::new(v, 0.2)))
            .collect();
        let field = TensorField::Sampled(SampledField::new(vec![3, 3], true, samples).unwrap());
        let rescaled = field.rescaled(eps).unwrap();
        for (i, a) in rescaled.tensors().iter().enumerate() {
            prop_assert!(field.tensors().contains(a), "sample {} left the value set", i);
        }
        let x = [0.3, 0.7];
        let direct = sample_field(&field, &x, Some(eps)).unwrap();
        prop_assert!(field.tensors().contains(&direct));
    }
}
