mod common;

use common::{center, cosine, gram_t, jacobi_eigen, random_matrix};
use divclust::linalg::{
    center_columns, center_gram, gram_matrix, kernel_value, leading_singular_direction, secondary_direction,
    DataMatrix, KernelSpec, SquareMatrix,
};
use divclust::Error;
use proptest::prelude::*;

#[test]
fn centering_examples() {
    let x = DataMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
    let (c, mean) = center_columns(&x).unwrap();
    assert_eq!(mean, vec![2.0, 3.0]);
    assert_eq!(c.values(), &[-1.0, -1.0, 1.0, 1.0]);

    let z = DataMatrix::new(3, 2, vec![0.0; 6]).unwrap();
    let (c, mean) = center_columns(&z).unwrap();
    assert_eq!(mean, vec![0.0, 0.0]);
    assert!(c.values().iter().all(|&v| v == 0.0));

    let r = random_matrix(7, 4, 3);
    let (c, _) = center_columns(&r).unwrap();
    for j in 0..4 {
        let s: f64 = (0..7).map(|i| c.get(i, j)).sum();
        assert!(s.abs() < 1e-10);
    }
}

#[test]
fn non_finite_input_rejected() {
    assert!(matches!(DataMatrix::new(1, 2, vec![1.0, f64::NAN]), Err(Error::Data(_))));
}

#[test]
fn leading_direction_matches_jacobi() {
    let x = center(&random_matrix(10, 4, 42));
    let d = leading_singular_direction(&x, 1e-9, 1000).unwrap();
    let eig = jacobi_eigen(&gram_t(&x));
    assert!(cosine(&d.vector, &eig[0].1).abs() >= 1.0 - 1e-8);
    assert!((d.magnitude - eig[0].0.sqrt()).abs() < 1e-8 * d.magnitude);
}

#[test]
fn secondary_direction_matches_jacobi() {
    let x = center(&random_matrix(12, 5, 7));
    let first = leading_singular_direction(&x, 1e-9, 1000).unwrap();
    let second = secondary_direction(&x, &first, 1e-9, 1000).unwrap();
    let eig = jacobi_eigen(&gram_t(&x));
    assert!(cosine(&second.vector, &eig[1].1).abs() >= 1.0 - 1e-6);
    let overlap: f64 = first.vector.iter().zip(&second.vector).map(|(a, b)| a * b).sum();
    assert!(overlap.abs() < 1e-8);
}

#[test]
fn gram_examples() {
    let x = DataMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
    let k = gram_matrix(&x, &KernelSpec::Linear).unwrap();
    assert_eq!(k.values(), &[1.0, 0.0, 0.0, 1.0]);

    let twins = DataMatrix::from_rows(&[[0.3, -1.0], [0.3, -1.0]]).unwrap();
    for gamma in [0.01, 1.0, 50.0] {
        let k = gram_matrix(&twins, &KernelSpec::Rbf { gamma: Some(gamma) }).unwrap();
        assert!(k.values().iter().all(|&v| v == 1.0));
    }

    let k = kernel_value(&KernelSpec::Rbf { gamma: Some(0.5) }, &[0.0], &[2.0]);
    assert!((k - (-2.0f64).exp()).abs() < 1e-15);
    assert!((k - 0.135335).abs() < 1e-6);
}

#[test]
fn invalid_kernel_rejected() {
    let x = random_matrix(3, 2, 0);
    let err = gram_matrix(&x, &KernelSpec::Rbf { gamma: Some(-1.0) }).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
}

#[test]
fn double_centering_examples() {
    let c = SquareMatrix::new(3, vec![2.5; 9]).unwrap();
    assert!(center_gram(&c).values().iter().all(|v| v.abs() < 1e-12));

    // a PSD matrix from a seeded factor
    let f = random_matrix(5, 5, 9);
    let k = gram_matrix(&f, &KernelSpec::Linear).unwrap();
    let kc = center_gram(&k);
    for i in 0..5 {
        let row: f64 = kc.row(i).iter().sum();
        let col: f64 = (0..5).map(|r| kc.get(r, i)).sum();
        assert!(row.abs() < 1e-10 && col.abs() < 1e-10);
    }
    let again = center_gram(&kc);
    for (a, b) in again.values().iter().zip(kc.values()) {
        assert!((a - b).abs() < 1e-12);
    }
}

fn matrix_strategy() -> impl Strategy<Value = DataMatrix> {
    (2usize..30, 1usize..20, any::<u64>()).prop_map(|(r, c, s)| random_matrix(r, c, s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn power_iteration_is_scale_equivariant(x in matrix_strategy()) {
        let x = center(&x);
        let base = leading_singular_direction(&x, 1e-9, 1000);
        prop_assume!(base.is_ok());
        let base = base.unwrap();
        for c in [-2.0, 0.5, 10.0] {
            let d = leading_singular_direction(&x.scaled(c).unwrap(), 1e-9, 1000).unwrap();
            for (a, b) in d.vector.iter().zip(&base.vector) {
                prop_assert!((a - b).abs() < 1e-6, "{} vs {}", a, b);
            }
            prop_assert!((d.magnitude - c.abs() * base.magnitude).abs() < 1e-9 * d.magnitude.max(1.0));
        }
    }

    #[test]
    fn power_iteration_matches_jacobi_with_gap(x in matrix_strategy()) {
        let x = center(&x);
        let eig = jacobi_eigen(&gram_t(&x));
        let s1 = eig[0].0.max(0.0).sqrt();
        let s2 = eig.get(1).map_or(0.0, |e| e.0.max(0.0).sqrt());
        prop_assume!(s1 > 0.0 && (s1 - s2) / s1 >= 0.01);
        let d = leading_singular_direction(&x, 1e-9, 1000).unwrap();
        prop_assert!(cosine(&d.vector, &eig[0].1).abs() >= 1.0 - 1e-8);
    }

    #[test]
    fn linear_gram_is_outer_product(x in matrix_strategy()) {
        let k = gram_matrix(&x, &KernelSpec::Linear).unwrap();
        for i in 0..x.rows() {
            for j in 0..x.rows() {
                let dot: f64 = x.row(i).iter().zip(x.row(j)).map(|(a, b)| a * b).sum();
                prop_assert_eq!(k.get(i, j), dot);
            }
        }
    }

    #[test]
    fn center_gram_is_linear_and_idempotent(a in matrix_strategy(), w in -3.0f64..3.0) {
        let n = a.rows();
        let k1 = gram_matrix(&a, &KernelSpec::Linear).unwrap();
        let k2 = gram_matrix(&a, &KernelSpec::Rbf { gamma: None }).unwrap();
        let sum = SquareMatrix::new(n, k1.values().iter().zip(k2.values()).map(|(p, q)| p + w * q).collect()).unwrap();
        let lhs = center_gram(&sum);
        let (c1, c2) = (center_gram(&k1), center_gram(&k2));
        let scale = sum.max_abs().max(1.0);
        for i in 0..n * n {
            let rhs = c1.values()[i] + w * c2.values()[i];
            prop_assert!((lhs.values()[i] - rhs).abs() < 1e-10 * scale);
        }
        let twice = center_gram(&c1);
        for (p, q) in twice.values().iter().zip(c1.values()) {
            prop_assert!((p - q).abs() < 1e-10 * scale);
        }
    }
}
