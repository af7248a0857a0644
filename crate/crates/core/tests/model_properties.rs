mod common;

use maxnorm::model::{
    is_quasiconvex_on_segment, mse_loss, uniform_loss, uniform_loss_maxrep, Activation,
};
use maxnorm::mse::mse_gradient;
use maxnorm::{Dataset, LeakyRelu, WeightVector};
use proptest::prelude::*;

use common::{fd_gradient, leaky, rows_of, sum_squares, ALPHA};

fn relu() -> LeakyRelu {
    LeakyRelu::new(ALPHA).unwrap()
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6..1e6f64,
        -1.0..1.0f64,
        Just(0.0),
        Just(-0.0),
        -1e-9..1e-9f64
    ]
}

/// `(n, rows, w_a, w_b)` with `len ≤ 10`, `n ≤ 5`.
fn dataset_and_segment() -> impl Strategy<Value = (Dataset, WeightVector, WeightVector)> {
    (1usize..=5, 1usize..=10).prop_flat_map(|(n, len)| {
        let row = (prop::collection::vec(-3.0..3.0f64, n), -2.0..2.0f64);
        let w = (-3.0..3.0f64, prop::collection::vec(-3.0..3.0f64, n));
        (prop::collection::vec(row, len), w.clone(), w).prop_map(|(rows, (b0, w0), (b1, w1))| {
            (
                Dataset::from_rows(rows).unwrap(),
                WeightVector::new(b0, w0).unwrap(),
                WeightVector::new(b1, w1).unwrap(),
            )
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn inverse_is_two_sided(t in finite()) {
        let a = relu();
        let round = a.apply(a.inverse(t));
        let back = a.inverse(a.apply(t));
        prop_assert!((round - t).abs() <= 2.0 * f64::EPSILON * t.abs());
        prop_assert!((back - t).abs() <= 2.0 * f64::EPSILON * t.abs());
    }

    #[test]
    fn activation_strictly_increasing(s in finite(), t in finite()) {
        prop_assume!(s != t);
        let (lo, hi) = if s < t { (s, t) } else { (t, s) };
        let a = relu();
        prop_assert!(a.apply(lo) < a.apply(hi), "σ({lo}) >= σ({hi})");
        prop_assert_eq!(a.apply(t), leaky(t, ALPHA));
    }

    #[test]
    fn loss_equals_max_representation((z, w, _) in dataset_and_segment()) {
        let a = relu();
        prop_assert_eq!(uniform_loss(&w, &a, &z).unwrap(), uniform_loss_maxrep(&w, &a, &z).unwrap());
        let oracle = common::uniform_loss(&rows_of(&z), ALPHA, &flat(&w));
        prop_assert!((uniform_loss(&w, &a, &z).unwrap() - oracle).abs() <= 1e-12 * (1.0 + oracle));
    }

    #[test]
    fn loss_at_zero_is_initial_bound((z, _, _) in dataset_and_segment()) {
        let a = relu();
        let u0 = z.targets().map(|y| y.abs()).fold(0.0, f64::max);
        prop_assert_eq!(uniform_loss(&WeightVector::zeros(z.n()), &a, &z).unwrap(), u0);
    }

    #[test]
    fn loss_vanishes_only_on_exact_fits((z, w, _) in dataset_and_segment()) {
        let a = relu();
        let loss = uniform_loss(&w, &a, &z).unwrap();
        prop_assert!(loss >= 0.0);
        let refit: Vec<_> = z
            .samples()
            .iter()
            .map(|s| (s.features().to_vec(), a.apply(w.pre_activation(s.features()))))
            .collect();
        let exact = Dataset::from_rows(refit).unwrap();
        prop_assert_eq!(uniform_loss(&w, &a, &exact).unwrap(), 0.0);
        let exact_already = z.samples().iter().all(|s| s.target() == a.apply(w.pre_activation(s.features())));
        prop_assert_eq!(loss == 0.0, exact_already);
    }

    #[test]
    fn uniform_loss_is_quasiconvex((z, wa, wb) in dataset_and_segment()) {
        let a = relu();
        let f = |w: &WeightVector| uniform_loss(w, &a, &z).unwrap();
        prop_assert!(is_quasiconvex_on_segment(f, &wa, &wb, 101).unwrap());
    }

    #[test]
    fn monotone_of_affine_is_quasiaffine(
        (wa, wb) in (1usize..=4).prop_flat_map(|n| {
            let w = (-3.0..3.0f64, prop::collection::vec(-3.0..3.0f64, n))
                .prop_map(|(b, v)| WeightVector::new(b, v).unwrap());
            (w.clone(), w)
        }),
        x in prop::collection::vec(-2.0..2.0f64, 4),
        h in 0usize..3,
    ) {
        let x = &x[..wa.dim()];
        // decreasing, increasing and non-smooth monotone outer functions
        let outer = |t: f64| match h {
            0 => -leaky(t, ALPHA),
            1 => t.tanh(),
            _ => (-t).exp().min(5.0),
        };
        let f = |w: &WeightVector| outer(w.pre_activation(x));
        let neg = |w: &WeightVector| -f(w);
        prop_assert!(is_quasiconvex_on_segment(f, &wa, &wb, 101).unwrap());
        prop_assert!(is_quasiconvex_on_segment(neg, &wa, &wb, 101).unwrap());
    }

    #[test]
    fn gradient_matches_central_differences(
        (z, w, _) in dataset_and_segment(),
    ) {
        let rows = rows_of(&z);
        prop_assume!(z.samples().iter().all(|s| w.pre_activation(s.features()).abs() > 1e-3));
        let a = relu();
        let g = mse_gradient(&w, &a, &z).unwrap();
        let analytic = flat(&g);
        let numeric = fd_gradient(&rows, ALPHA, &flat(&w), 1e-6);
        let scale = numeric.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-8);
        let err = analytic.iter().zip(&numeric).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        prop_assert!(err / scale < 1e-5, "relative error {:e}", err / scale);
        let sse = sum_squares(&rows, ALPHA, &flat(&w));
        prop_assert!((mse_loss(&w, &a, &z).unwrap() - sse).abs() <= 1e-12 * (1.0 + sse));
    }
}

fn flat(w: &WeightVector) -> Vec<f64> {
    std::iter::once(w.bias)
        .chain(w.weights.iter().copied())
        .collect()
}

#[test]
fn concave_bump_is_not_quasiconvex() {
    let f = |w: &WeightVector| -(w.bias * w.bias + w.weights.iter().map(|v| v * v).sum::<f64>());
    let a = WeightVector::new(1.0, vec![0.0]).unwrap();
    let b = WeightVector::new(-1.0, vec![0.0]).unwrap();
    assert!(!is_quasiconvex_on_segment(f, &a, &b, 101).unwrap());
}
