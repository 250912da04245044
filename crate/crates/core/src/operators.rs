//! Operator algebra on far field data: the weighted far field operator, the
//! scattering matrix, the comparison operator `S₂^H (F₁ − F₂)` and `M♯`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, norm2, skew_part, CMat};
use crate::model::{ContrastField, DirectionSet, WaveContext};
use crate::spectral::{eig_hermitian, HermitianSpectrum};

/// Relative tolerance for negative eigenvalues of `M♯` before clipping.
pub const MSHARP_PSD_TOL: f64 = 1e-12;

/// Far field kernel `U[i][j] = u∞(x̂_i; θ_j)` on a direction set.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldMatrix {
    pub ctx: WaveContext,
    pub dirs: DirectionSet,
    pub kernel: CMat,
    pub contrast_tag: Option<ContrastField>,
}

impl FarFieldMatrix {
    pub fn new(ctx: WaveContext, dirs: DirectionSet, kernel: CMat, contrast_tag: Option<ContrastField>) -> Self {
        assert_eq!(kernel.nrows(), dirs.len(), "kernel rows must match the direction count");
        assert_eq!(kernel.ncols(), dirs.len(), "kernel columns must match the direction count");
        FarFieldMatrix {
            ctx,
            dirs,
            kernel,
            contrast_tag,
        }
    }

    pub fn n(&self) -> usize {
        self.dirs.len()
    }

    /// `F_w = (2π/n) U`.
    pub fn weighted(&self) -> CMat {
        &self.kernel * Complex64::new(self.dirs.weight(), 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.kernel.iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }

    fn check_compatible(&self, other: &FarFieldMatrix) -> Result<()> {
        if self.ctx.k() != other.ctx.k() || self.n() != other.n() {
            return Err(Error::Precondition(format!(
                "far field operators differ: (k = {}, n = {}) vs (k = {}, n = {})",
                self.ctx.k(),
                self.n(),
                other.ctx.k(),
                other.n()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringMatrix {
    pub s: CMat,
}

/// `S = I + 2ik γ² F_w = I + (i/4π) F_w`.
pub fn scattering_matrix(f: &FarFieldMatrix) -> ScatteringMatrix {
    let n = f.n();
    let factor = Complex64::new(0.0, 2.0 * f.ctx.k() * f.ctx.gamma_sq());
    ScatteringMatrix {
        s: CMat::identity(n, n) + f.weighted() * factor,
    }
}

/// `A = S₂^H (F₁_w − F₂_w)`.
pub fn comparison_matrix(f1: &FarFieldMatrix, f2: &FarFieldMatrix) -> Result<CMat> {
    f1.check_compatible(f2)?;
    let s2 = scattering_matrix(f2).s;
    let diff = (&f1.kernel - &f2.kernel) * Complex64::new(f1.dirs.weight(), 0.0);
    Ok(s2.adjoint() * diff)
}

/// `M♯ = |Re M| + Im M` with its eigen-decomposition; negative eigenvalues
/// above `−psd_tol·‖M‖₂` are clipped to zero.
pub fn msharp_decomposed(m: &CMat, psd_tol: f64) -> Result<(CMat, HermitianSpectrum)> {
    let mnorm = norm2(m);
    if mnorm == 0.0 {
        return Err(Error::NoScatteringData("M is the zero matrix".into()));
    }
    let re = eig_hermitian(&hermitian_part(m))?;
    let abs_re = re.reconstruct_with(f64::abs);
    let sum = abs_re + skew_part(m);
    let sym = hermitian_part(&sum);
    let spec = eig_hermitian(&sym)?;
    let min_eig = spec.eigenvalues.first().copied().unwrap_or(0.0);
    let threshold = -psd_tol * mnorm;
    if min_eig < threshold {
        return Err(Error::NotPsd { min_eig, threshold });
    }
    let clipped = HermitianSpectrum {
        eigenvalues: spec.eigenvalues.iter().map(|&l| l.max(0.0)).collect(),
        eigenvectors: spec.eigenvectors,
    };
    Ok((clipped.reconstruct_with(|l| l), clipped))
}

/// `M♯` at the default tolerance [`MSHARP_PSD_TOL`].
pub fn msharp_matrix(m: &CMat) -> Result<CMat> {
    msharp_decomposed(m, MSHARP_PSD_TOL).map(|(a, _)| a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorDiagnostics {
    /// `‖S^H S − I‖₂`.
    pub unitarity: f64,
    /// `‖F_w^H F_w − F_w F_w^H‖₂ / ‖F_w‖₂²`.
    pub normality: f64,
    /// `max |U[i][j] − U[σ(j)][σ(i)]| / max |U|`, `σ` the antipode map.
    pub reciprocity: f64,
}

pub fn unitarity_residual(f: &FarFieldMatrix) -> f64 {
    let s = scattering_matrix(f).s;
    let n = f.n();
    norm2(&(s.adjoint() * &s - CMat::identity(n, n)))
}

pub fn normality_residual(a: &CMat) -> f64 {
    let an = norm2(a);
    if an == 0.0 {
        return 0.0;
    }
    norm2(&(a.adjoint() * a - a * a.adjoint())) / (an * an)
}

pub fn reciprocity_residual(f: &FarFieldMatrix) -> f64 {
    let scale = f.kernel.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let n = f.n();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let d = f.kernel[(i, j)] - f.kernel[(f.dirs.antipode(j), f.dirs.antipode(i))];
            worst = worst.max(d.norm());
        }
    }
    worst / scale
}

pub fn operator_diagnostics(f: &FarFieldMatrix) -> OperatorDiagnostics {
    OperatorDiagnostics {
        unitarity: unitarity_residual(f),
        normality: normality_residual(&f.weighted()),
        reciprocity: reciprocity_residual(f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm_fro;
    use std::f64::consts::PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx() -> WaveContext {
        WaveContext::new(2.0 * PI).unwrap()
    }

    fn zero_ffm(n: usize) -> FarFieldMatrix {
        FarFieldMatrix::new(ctx(), DirectionSet::new(n).unwrap(), CMat::zeros(n, n), None)
    }

    #[test]
    fn zero_far_field_gives_identity() {
        let s = scattering_matrix(&zero_ffm(8)).s;
        assert_eq!(s, CMat::identity(8, 8));
        let d = operator_diagnostics(&zero_ffm(8));
        assert_eq!((d.unitarity, d.normality, d.reciprocity), (0.0, 0.0, 0.0));
    }

    #[test]
    fn scattering_factor_is_i_over_4pi() {
        let mut f = zero_ffm(8);
        f.kernel[(0, 0)] = Complex64::new(1.0, 0.0);
        let s = scattering_matrix(&f).s;
        let expect = Complex64::new(1.0, f.dirs.weight() / (4.0 * PI));
        assert!((s[(0, 0)] - expect).norm() < 1e-15);
    }

    #[test]
    fn comparison_of_identical_is_exact_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut f = zero_ffm(8);
        f.kernel = CMat::from_fn(8, 8, |_, _| Complex64::new(rng.gen(), rng.gen()));
        let a = comparison_matrix(&f, &f).unwrap();
        assert!(a.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
        let g = zero_ffm(16);
        assert!(comparison_matrix(&f, &g).is_err());
    }

    #[test]
    fn msharp_trivial_cases() {
        let i = CMat::identity(4, 4) * Complex64::i();
        let m = msharp_matrix(&i).unwrap();
        assert!(norm_fro(&(m - CMat::identity(4, 4))) < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = CMat::from_fn(5, 5, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let psd = &b * b.adjoint();
        let m = msharp_matrix(&psd).unwrap();
        assert!(norm_fro(&(m - &psd)) < 1e-12 * norm_fro(&psd));
        assert!(matches!(msharp_matrix(&CMat::zeros(3, 3)), Err(Error::NoScatteringData(_))));
    }

    #[test]
    fn msharp_rejects_negative_imaginary_part() {
        let m = CMat::identity(3, 3) * Complex64::new(0.0, -1.0);
        assert!(matches!(msharp_matrix(&m), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn corrupted_entry_breaks_reciprocity() {
        let n = 8;
        let dirs = DirectionSet::new(n).unwrap();
        // A reciprocal kernel: depends on x̂·θ only through the symmetric pairing.
        let kernel = CMat::from_fn(n, n, |i, j| {
            let a = dirs.direction(i);
            let b = dirs.direction(j);
            Complex64::new(1.0 + (a[0] * b[0] + a[1] * b[1]), 0.0)
        });
        let mut f = FarFieldMatrix::new(ctx(), dirs, kernel, None);
        assert!(reciprocity_residual(&f) < 1e-15);
        f.kernel[(1, 2)] += 0.1;
        assert!(reciprocity_residual(&f) > 1e-2);
    }
}
