mod common;

use common::*;
use nucbound::{DenseTensor, Matrix};
use proptest::prelude::*;

fn shape_and_data(
    max_order: usize,
    max_dim: usize,
) -> impl Strategy<Value = (Vec<usize>, Vec<f64>)> {
    prop::collection::vec(1..=max_dim, 1..=max_order).prop_flat_map(|shape| {
        let n = shape.iter().product::<usize>();
        (Just(shape), prop::collection::vec(-10.0f64..10.0, n))
    })
}

proptest! {
    #[test]
    fn flatten_unflatten_is_exact((shape, data) in shape_and_data(4, 4)) {
        let a = DenseTensor::new(shape.clone(), data).unwrap();
        for m in 1..=shape.len() {
            let flat = a.flatten(m).unwrap();
            prop_assert_eq!(flat.rows(), shape[m - 1]);
            prop_assert_eq!(flat.rows() * flat.cols(), a.len());
            let back = DenseTensor::unflatten(&flat, &shape, m).unwrap();
            prop_assert_eq!(&back, &a);
        }
    }

    #[test]
    fn inner_product_survives_flattening((shape, data) in shape_and_data(4, 4), seed in any::<u64>()) {
        let a = DenseTensor::new(shape.clone(), data).unwrap();
        let b = gaussian_tensor(&shape, &mut rng(seed));
        let ab = a.inner(&b).unwrap();
        let scale = a.hs_norm() * b.hs_norm();
        for m in 1..=shape.len() {
            let fm = a.flatten(m).unwrap().inner(&b.flatten(m).unwrap()).unwrap();
            prop_assert!((fm - ab).abs() <= 1e-12 * scale.max(1e-300));
        }
    }

    #[test]
    fn hs_norm_is_frobenius_of_each_flattening((shape, data) in shape_and_data(5, 3)) {
        let a = DenseTensor::new(shape.clone(), data).unwrap();
        let hs = a.hs_norm();
        for m in 1..=shape.len() {
            let f = a.flatten(m).unwrap().frobenius();
            prop_assert!((f - hs).abs() <= 1e-12 * hs.max(1e-300));
        }
    }

    #[test]
    fn rank_one_norm_is_multiplicative(vs in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 1..5), 1..5)) {
        let a = DenseTensor::rank_one(&vs).unwrap();
        let expected: f64 = vs.iter().map(|v| norm(v)).product();
        prop_assert!((a.hs_norm() - expected).abs() <= 1e-12 * expected.max(1e-300));
    }

    #[test]
    fn rank_one_flattening_is_outer_product(
        x in prop::collection::vec(-3.0f64..3.0, 1..5),
        y in prop::collection::vec(-3.0f64..3.0, 1..5),
        z in prop::collection::vec(-3.0f64..3.0, 1..5),
    ) {
        let a = DenseTensor::rank_one(&[x.clone(), y.clone(), z.clone()]).unwrap();
        let yz = Matrix::outer(&y, &z).unwrap();
        let expected = Matrix::outer(&x, yz.data()).unwrap();
        let flat = a.flatten(1).unwrap();
        prop_assert_eq!((flat.rows(), flat.cols()), (expected.rows(), expected.cols()));
        for (p, q) in flat.data().iter().zip(expected.data()) {
            prop_assert!((p - q).abs() <= 1e-14 * q.abs().max(1e-300));
        }
    }

    #[test]
    fn fiber_reshape_preserves_norm(j in 1usize..6, k in 1usize..6, seed in any::<u64>()) {
        let z = gaussian(j * k, &mut rng(seed));
        let t = DenseTensor::from_fiber(&z, &[j, k]).unwrap();
        prop_assert!((t.hs_norm() - norm(&z)).abs() <= 1e-12 * norm(&z).max(1e-300));
        prop_assert_eq!(t.data(), &z[..]);
    }

    #[test]
    fn permutation_preserves_entries((shape, data) in shape_and_data(4, 3)) {
        let a = DenseTensor::new(shape.clone(), data).unwrap();
        let n = shape.len();
        let perm: Vec<usize> = (0..n).rev().collect();
        let p = a.permute_modes(&perm).unwrap();
        let inverse = p.permute_modes(&perm).unwrap();
        prop_assert_eq!(&inverse, &a);
        prop_assert!((p.hs_norm() - a.hs_norm()).abs() <= 1e-12 * a.hs_norm().max(1e-300));
    }
}

#[test]
fn roundtrip_on_random_three_by_four_by_five() {
    let mut r = rng(7);
    for _ in 0..100 {
        let a = gaussian_tensor(&[3, 4, 5], &mut r);
        for m in 1..=3 {
            let back = DenseTensor::unflatten(&a.flatten(m).unwrap(), a.shape(), m).unwrap();
            assert_eq!(back, a);
        }
    }
}
