mod common;

use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

use scatterbound::inversion_bounds::{bound_verdict, count_eigenvalues, Annulus, AnnulusCounts, Orientation, Verdict};
use scatterbound::linalg::{norm_fro, CMat};
use scatterbound::spectral::{damped_picard_sum, eig_general, eig_hermitian, weight, OperatorSpectrum, PicardExponent};

use common::*;

fn unitary(n: usize, seed: u64) -> CMat {
    random_matrix(n, seed).qr().q()
}

fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigenpairs_have_small_backward_error(n in 1usize..28, seed in any::<u64>()) {
        let a = random_matrix(n, seed);
        let spec = eig_general(&a).unwrap();
        prop_assert_eq!(spec.len(), n);
        prop_assert!(spec.max_residual() < 1e-12, "residual {:e}", spec.max_residual());
        for w in spec.eigenvalues.windows(2) {
            prop_assert!(w[0].norm() >= w[1].norm());
        }
        let trace: Complex64 = (0..n).map(|i| a[(i, i)]).sum();
        let sum: Complex64 = spec.eigenvalues.iter().sum();
        prop_assert!((trace - sum).norm() < 1e-11 * (n as f64));
    }

    #[test]
    fn adjoint_spectrum_is_the_conjugate(n in 2usize..20, seed in any::<u64>()) {
        let a = random_matrix(n, seed);
        let direct = sorted(eig_general(&a).unwrap().eigenvalues.iter().map(|l| l.conj()).collect());
        let adj = sorted(eig_general(&a.adjoint()).unwrap().eigenvalues);
        for (x, y) in direct.iter().zip(&adj) {
            prop_assert!((x - y).norm() < 1e-10, "{} vs {}", x, y);
        }
    }

    #[test]
    fn picard_sum_matches_plain_loop(n in 2usize..20, seed in any::<u64>(), alpha in 1e-8f64..1.0) {
        let a = random_matrix(n, seed);
        let spec = eig_general(&a).unwrap();
        let rhs: Vec<Complex64> = random_matrix(n, seed ^ 0x5eed).column(0).iter().cloned().collect();
        for exponent in [PicardExponent::One, PicardExponent::Half] {
            let fast = damped_picard_sum(&spec, &rhs, alpha, exponent).unwrap();
            let slow = picard_loop(&spec, &rhs, alpha, exponent);
            prop_assert!((fast - slow).abs() <= 1e-12 * slow.abs(), "{} vs {}", fast, slow);
        }
    }

    #[test]
    fn picard_sum_ignores_the_basis_of_a_degenerate_pair(
        n in 3usize..16,
        seed in any::<u64>(),
        phi in 0.0f64..std::f64::consts::TAU,
        beta in 0.0f64..std::f64::consts::TAU,
    ) {
        // Weighted-orthonormal eigenvectors with λ₀ = λ₁.
        let u = unitary(n, seed) / Complex64::new(weight(n).sqrt(), 0.0);
        let mut lambdas: Vec<Complex64> = (0..n).map(|j| Complex64::new(1.0 / (j + 1) as f64, 0.3)).collect();
        lambdas[1] = lambdas[0];
        let spec = OperatorSpectrum { eigenvalues: lambdas.clone(), eigenvectors: u.clone(), residuals: vec![0.0; n] };
        let (c, s) = (phi.cos(), phi.sin());
        let e = Complex64::from_polar(1.0, beta);
        let mut rotated = u.clone();
        for i in 0..n {
            rotated[(i, 0)] = u[(i, 0)] * c - u[(i, 1)] * s * e.conj();
            rotated[(i, 1)] = u[(i, 0)] * s * e + u[(i, 1)] * c;
        }
        let spec_rot = OperatorSpectrum { eigenvalues: lambdas, eigenvectors: rotated, residuals: vec![0.0; n] };
        let rhs: Vec<Complex64> = random_matrix(n, seed.wrapping_add(1)).column(0).iter().cloned().collect();
        let a = damped_picard_sum(&spec, &rhs, 1e-3, PicardExponent::One).unwrap();
        let b = damped_picard_sum(&spec_rot, &rhs, 1e-3, PicardExponent::One).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn normal_matrices_have_orthogonal_eigenvectors(n in 2usize..20, seed in any::<u64>()) {
        let u = unitary(n, seed);
        let lambdas: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from_polar(0.2 + j as f64 / n as f64, 2.0 * j as f64))
            .collect();
        let a = &u * CMat::from_diagonal(&DVector::from_vec(lambdas)) * u.adjoint();
        let spec = eig_general(&a).unwrap();
        let gram = spec.eigenvectors.adjoint() * &spec.eigenvectors * Complex64::new(weight(n), 0.0);
        let dev = norm_fro(&(gram - CMat::identity(n, n)));
        prop_assert!(dev < 1e-10, "Gram deviation {:e}", dev);
    }

    #[test]
    fn hermitian_decomposition_reconstructs(n in 1usize..24, seed in any::<u64>()) {
        let r = random_matrix(n, seed);
        let h = (&r + r.adjoint()) * Complex64::new(0.5, 0.0);
        let spec = eig_hermitian(&h).unwrap();
        for w in spec.eigenvalues.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
        let back = spec.reconstruct_with(|l| l);
        prop_assert!(norm_fro(&(&back - &h)) < 1e-12 * norm_fro(&h).max(1.0));
        let unit = spec.eigenvectors.adjoint() * &spec.eigenvectors;
        prop_assert!(norm_fro(&(unit - CMat::identity(n, n))) < 1e-12 * n as f64);
    }

    #[test]
    fn negated_spectrum_swaps_the_counts(
        values in prop::collection::vec((-2e-2f64..2e-2, -2e-2f64..2e-2), 0..40),
    ) {
        let eig: Vec<Complex64> = values.iter().map(|(r, i)| Complex64::new(*r, *i)).collect();
        let neg: Vec<Complex64> = eig.iter().map(|l| -l).collect();
        let a = count_eigenvalues(&eig, Annulus::default());
        let b = count_eigenvalues(&neg, Annulus::default());
        prop_assert_eq!(a, AnnulusCounts { m_plus: b.m_minus, m_minus: b.m_plus });
    }

    #[test]
    fn flipped_orientation_swaps_the_verdict(m_plus in 0usize..4, m_minus in 0usize..4) {
        let counts = AnnulusCounts { m_plus, m_minus };
        for o in [Orientation::PlusVanishesBelow, Orientation::MinusVanishesBelow] {
            let swapped = match bound_verdict(counts, o) {
                Verdict::TestBelow => Verdict::TestAbove,
                Verdict::TestAbove => Verdict::TestBelow,
                other => other,
            };
            prop_assert_eq!(bound_verdict(counts, o.flipped()), swapped);
            let mirrored = AnnulusCounts { m_plus: m_minus, m_minus: m_plus };
            prop_assert_eq!(bound_verdict(mirrored, o), swapped);
        }
    }
}

#[test]
fn defective_matrix_keeps_its_eigenvalue() {
    let j = CMat::from_row_slice(
        3,
        3,
        &[
            Complex64::new(2.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(2.0, 0.0),
        ],
    );
    let spec = eig_general(&j).unwrap();
    for l in &spec.eigenvalues {
        assert!((l - Complex64::new(2.0, 0.0)).norm() < 1e-4, "{l}");
    }
}

#[test]
fn eigenvalue_on_the_imaginary_axis_counts_to_neither_side() {
    let counts = count_eigenvalues(&[Complex64::new(0.0, 1e-3), Complex64::new(1e-3, 0.0)], Annulus::default());
    assert_eq!(counts, AnnulusCounts { m_plus: 1, m_minus: 0 });
}
