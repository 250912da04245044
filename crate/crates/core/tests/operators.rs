mod common;

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use proptest::prelude::*;

use scatterbound::forward::{far_field_matrix, ForwardConfig};
use scatterbound::inversion_fm::synthesized_psd_tol;
use scatterbound::linalg::{norm2, norm_fro, CMat};
use scatterbound::model::{ComputationalGrid, ContrastField, DirectionSet, WaveContext};
use scatterbound::operators::{
    comparison_matrix, msharp_decomposed, msharp_matrix, operator_diagnostics, scattering_matrix, FarFieldMatrix,
};
use scatterbound::spectral::eig_general;
use scatterbound::Error;

use common::*;

fn cfg() -> ForwardConfig {
    ForwardConfig::with_grid(ComputationalGrid::new(2.0, 128).unwrap())
}

fn operator(q: &ContrastField) -> FarFieldMatrix {
    far_field_matrix(&WaveContext::new(2.0 * PI).unwrap(), q, &DirectionSet::new(32).unwrap(), &cfg()).unwrap()
}

/// `q_c`, `q_r`, `q_v` and the sign-changing demo at `n = 32`.
fn operators() -> &'static [FarFieldMatrix] {
    static OPS: OnceLock<Vec<FarFieldMatrix>> = OnceLock::new();
    OPS.get_or_init(|| {
        [
            ContrastField::paper_qc(),
            ContrastField::PaperQr,
            ContrastField::paper_qv(),
            ContrastField::SignChangingDemo,
        ]
        .iter()
        .map(operator)
        .collect()
    })
}

/// `|Re M| + Im M` through nalgebra's Hermitian eigensolver.
fn msharp_oracle(m: &CMat) -> CMat {
    let half = Complex64::new(0.5, 0.0);
    let re = (m + m.adjoint()) * half;
    let im = (m - m.adjoint()) * Complex64::new(0.0, -0.5);
    let eig = SymmetricEigen::new(re);
    let abs = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|l| Complex64::new(l.abs(), 0.0)));
    &eig.eigenvectors * CMat::from_diagonal(&abs) * eig.eigenvectors.adjoint() + im
}

#[test]
fn comparing_an_operator_with_itself_gives_zero() {
    for f in operators() {
        let a = comparison_matrix(f, f).unwrap();
        assert!(a.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }
}

#[test]
fn comparison_spectra_lie_in_the_closed_upper_half_plane() {
    let ops = operators();
    for i in 0..ops.len() {
        for j in 0..ops.len() {
            if i == j {
                continue;
            }
            let a = comparison_matrix(&ops[i], &ops[j]).unwrap();
            let scale = norm2(&a);
            let min_im = eig_general(&a).unwrap().eigenvalues.iter().map(|l| l.im).fold(f64::INFINITY, f64::min);
            assert!(min_im >= -1e-3 * scale, "pair ({i}, {j}): min Im λ = {min_im:e}, ‖A‖ = {scale:e}");
        }
    }
}

#[test]
fn synthesized_operators_pass_diagnostics() {
    for f in operators() {
        let d = operator_diagnostics(f);
        assert!(d.unitarity <= 1e-6, "{d:?}");
        assert!(d.normality <= 1e-6, "{d:?}");
        assert!(d.reciprocity <= 1e-3, "{d:?}");
    }
}

#[test]
fn scattering_matrix_of_zero_data_is_identity() {
    let f = operator(&ContrastField::zero());
    assert_eq!(scattering_matrix(&f).s, CMat::identity(32, 32));
}

#[test]
fn msharp_of_synthesized_comparison_is_psd_at_the_scaled_tolerance() {
    let ops = operators();
    let m = comparison_matrix(&ops[0], &ops[1]).unwrap();
    let (sharp, spec) = msharp_decomposed(&m, synthesized_psd_tol(&cfg())).unwrap();
    assert!(spec.eigenvalues.iter().all(|l| *l >= 0.0));
    let dev = norm_fro(&(&sharp - msharp_oracle(&m))) / norm_fro(&sharp);
    assert!(dev < 1e-6, "deviation from oracle {dev:e}");
}

#[test]
fn mismatched_operators_are_rejected() {
    let a = operators()[0].clone();
    let b = far_field_matrix(
        &WaveContext::new(2.0 * PI).unwrap(),
        &ContrastField::paper_qc(),
        &DirectionSet::new(8).unwrap(),
        &cfg(),
    )
    .unwrap();
    assert!(matches!(comparison_matrix(&a, &b), Err(Error::Precondition(_))));
}

#[test]
fn msharp_of_zero_reports_missing_data() {
    assert!(matches!(msharp_matrix(&CMat::zeros(4, 4)), Err(Error::NoScatteringData(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// `M = R + iP` with `R` Hermitian and `P ⪰ 0` has `M♯ ⪰ 0`.
    #[test]
    fn msharp_matches_nalgebra_oracle(n in 1usize..20, seed in any::<u64>()) {
        let r = random_matrix(n, seed);
        let p = random_matrix(n, seed.wrapping_mul(31).wrapping_add(7));
        let herm = (&r + r.adjoint()) * Complex64::new(0.5, 0.0);
        let psd = &p * p.adjoint();
        let m = herm + psd * Complex64::new(0.0, 1.0);
        let sharp = msharp_matrix(&m).unwrap();
        let oracle = msharp_oracle(&m);
        prop_assert!(norm_fro(&(&sharp - &oracle)) <= 1e-10 * norm_fro(&oracle).max(1.0));
        prop_assert!(norm_fro(&(&sharp - sharp.adjoint())) <= 1e-13 * norm_fro(&sharp).max(1.0));
    }

    #[test]
    fn msharp_rejects_indefinite_input(n in 2usize..12, seed in any::<u64>()) {
        // Im M = −I dominates |Re M| for small Re M.
        let r = random_matrix(n, seed) * Complex64::new(1e-3, 0.0);
        let herm = (&r + r.adjoint()) * Complex64::new(0.5, 0.0);
        let m = herm - CMat::identity(n, n) * Complex64::new(0.0, 1.0);
        let is_not_psd = matches!(msharp_matrix(&m), Err(Error::NotPsd { .. }));
        prop_assert!(is_not_psd);
    }
}
