//! Dense eigensolvers and the damped Picard series.
//!
//! General matrices go through Householder reduction to Hessenberg form and
//! the shifted complex QR iteration; eigenvectors come from back substitution
//! on the Schur form. Hermitian matrices use cyclic complex Jacobi rotations.
//! Eigenvectors of [`OperatorSpectrum`] are normalised in the weighted norm
//! `‖ψ‖_w² = (2π/n) Σ |ψ_i|²`.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm_fro, CMat};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const MAX_GENERAL_DIM: usize = 512;
const QR_ITERATIONS_PER_EIGENVALUE: usize = 60;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Complete eigensystem of a general complex matrix.
#[derive(Debug, Clone)]
pub struct OperatorSpectrum {
    /// Sorted by decreasing modulus.
    pub eigenvalues: Vec<Complex64>,
    /// Column `j` pairs with `eigenvalues[j]`; unit weighted norm.
    pub eigenvectors: CMat,
    /// `‖Aψ − λψ‖₂ / (‖A‖_F ‖ψ‖₂)` per pair.
    pub residuals: Vec<f64>,
}

impl OperatorSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }
}

/// Real spectrum and unitary eigenvector matrix of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `j` pairs with `eigenvalues[j]`.
    pub eigenvectors: CMat,
}

impl HermitianSpectrum {
    /// Same pairs with eigenvectors rescaled to unit weighted norm.
    pub fn to_operator_spectrum(&self) -> OperatorSpectrum {
        let n = self.eigenvalues.len();
        let scale = if n == 0 { 1.0 } else { 1.0 / weight(n).sqrt() };
        OperatorSpectrum {
            eigenvalues: self.eigenvalues.iter().map(|&l| Complex64::new(l, 0.0)).collect(),
            eigenvectors: &self.eigenvectors * Complex64::new(scale, 0.0),
            residuals: vec![0.0; n],
        }
    }

    /// `V diag(f(λ)) V^H`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let v = f(l);
            scaled.column_mut(j).iter_mut().for_each(|x| *x *= v);
        }
        let out = scaled * self.eigenvectors.adjoint();
        debug_assert_eq!(out.nrows(), n);
        out
    }
}

/// Quadrature weight `2π/n`.
pub fn weight(n: usize) -> f64 {
    2.0 * PI / n as f64
}

/// Weighted inner product `⟨a, b⟩_w = (2π/n) Σ a_i conj(b_i)`.
pub fn weighted_inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let s: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
    s * weight(a.len())
}

/// Row-major working copy.
fn to_rows(a: &CMat) -> Vec<Complex64> {
    let n = a.nrows();
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = a[(i, j)];
        }
    }
    out
}

/// Householder reduction `A = Q H Q^H`; `a` becomes `H`, returns `Q`.
fn hessenberg(a: &mut [Complex64], n: usize) -> Vec<Complex64> {
    let mut q = vec![ZERO; n * n];
    for i in 0..n {
        q[i * n + i] = Complex64::new(1.0, 0.0);
    }
    let mut v = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let xnorm = (k + 1..n).map(|i| a[i * n + k].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1) * n + k];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        for i in 0..n {
            v[i] = if i > k { a[i * n + k] } else { ZERO };
        }
        v[k + 1] -= alpha;
        let vnorm = (k + 1..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for x in v[k + 1..].iter_mut() {
            *x /= vnorm;
        }
        // Left: A ← (I − 2vv^H) A on rows k+1.., columns k..
        for j in k..n {
            let s: Complex64 = (k + 1..n).map(|i| v[i].conj() * a[i * n + j]).sum();
            let s2 = s * 2.0;
            for i in k + 1..n {
                a[i * n + j] -= v[i] * s2;
            }
        }
        // Right: A ← A (I − 2vv^H), Q ← Q (I − 2vv^H)
        for m in [&mut *a, &mut q[..]] {
            for i in 0..n {
                let row = &mut m[i * n..(i + 1) * n];
                let s: Complex64 = (k + 1..n).map(|j| row[j] * v[j]).sum();
                let s2 = s * 2.0;
                for j in k + 1..n {
                    row[j] -= s2 * v[j].conj();
                }
            }
        }
        for i in k + 2..n {
            a[i * n + k] = ZERO;
        }
    }
    q
}

/// Rotation `[c s; −s̄ c]` with real `c` mapping `(a, b)` to `(r, 0)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    let na = a.norm();
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let scale = na.hypot(nb);
    let phase = a / na;
    (na / scale, phase * b.conj() / scale)
}

/// Eigenvalue of the 2×2 block `[a b; c d]` closer to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let l1 = mean + disc;
    let l2 = mean - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Shifted QR on Hessenberg `t`, accumulating Schur vectors into `z`.
fn schur(t: &mut [Complex64], z: &mut [Complex64], n: usize) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let anorm = t.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let budget = QR_ITERATIONS_PER_EIGENVALUE * n;
    let mut rot = vec![(0.0, ZERO); n];
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = t[l * n + l - 1].norm();
            let mut diag = t[(l - 1) * n + l - 1].norm() + t[l * n + l].norm();
            if diag == 0.0 {
                diag = anorm;
            }
            if sub <= eps * diag || sub <= f64::MIN_POSITIVE {
                t[l * n + l - 1] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > budget {
            return Err(Error::Eigen(format!(
                "QR iteration did not converge after {total} sweeps ({} eigenvalues left)",
                hi + 1
            )));
        }
        let d = t[hi * n + hi];
        let mu = if iter.is_multiple_of(11) {
            // Exceptional shift to break cycles.
            let c = t[hi * n + hi - 1].norm() + if hi >= 2 { t[(hi - 1) * n + hi - 2].norm() } else { 0.0 };
            d + Complex64::new(0.75 * c, 0.25 * c)
        } else {
            wilkinson_shift(t[(hi - 1) * n + hi - 1], t[(hi - 1) * n + hi], t[hi * n + hi - 1], d)
        };
        for i in l..=hi {
            t[i * n + i] -= mu;
        }
        for k in l..hi {
            let (c, s) = givens(t[k * n + k], t[(k + 1) * n + k]);
            rot[k] = (c, s);
            for j in k..n {
                let x = t[k * n + j];
                let y = t[(k + 1) * n + j];
                t[k * n + j] = x * c + s * y;
                t[(k + 1) * n + j] = -s.conj() * x + y * c;
            }
            t[(k + 1) * n + k] = ZERO;
        }
        for k in l..hi {
            let (c, s) = rot[k];
            let rows = (k + 2).min(hi + 1);
            for i in 0..rows {
                let x = t[i * n + k];
                let y = t[i * n + k + 1];
                t[i * n + k] = x * c + y * s.conj();
                t[i * n + k + 1] = -s * x + y * c;
            }
            for i in 0..n {
                let x = z[i * n + k];
                let y = z[i * n + k + 1];
                z[i * n + k] = x * c + y * s.conj();
                z[i * n + k + 1] = -s * x + y * c;
            }
        }
        for i in l..=hi {
            t[i * n + i] += mu;
        }
    }
    Ok(())
}

/// Eigenvectors of upper-triangular `t` by back substitution, as columns.
fn triangular_eigenvectors(t: &[Complex64], n: usize) -> Vec<Complex64> {
    let tnorm = t.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;
    let mut y = vec![ZERO; n * n];
    let mut col = vec![ZERO; n];
    for k in 0..n {
        let lambda = t[k * n + k];
        col.iter_mut().for_each(|v| *v = ZERO);
        col[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let s: Complex64 = (i + 1..=k).map(|j| t[i * n + j] * col[j]).sum();
            let mut denom = t[i * n + i] - lambda;
            if denom.norm() < small {
                denom = Complex64::new(small, 0.0);
            }
            col[i] = -s / denom;
            let growth = col[i].norm();
            if growth > 1e100 {
                let f = 1.0 / growth;
                col[i..=k].iter_mut().for_each(|v| *v *= f);
            }
        }
        for i in 0..n {
            y[i * n + k] = col[i];
        }
    }
    y
}

fn sort_key(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    b.norm()
        .total_cmp(&a.norm())
        .then(b.re.total_cmp(&a.re))
        .then(b.im.total_cmp(&a.im))
}

/// All eigenpairs of a general complex matrix, sorted by decreasing modulus.
pub fn eig_general(a: &CMat) -> Result<OperatorSpectrum> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Precondition(format!("matrix is {}×{}, not square", n, a.ncols())));
    }
    if n > MAX_GENERAL_DIM {
        return Err(Error::Precondition(format!("dimension {n} exceeds {MAX_GENERAL_DIM}")));
    }
    if a.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let mut t = to_rows(a);
    let mut z = hessenberg(&mut t, n);
    schur(&mut t, &mut z, n)?;
    let y = triangular_eigenvectors(&t, n);
    // x_k = Z y_k
    let mut vecs = CMat::zeros(n, n);
    for k in 0..n {
        for i in 0..n {
            let s: Complex64 = (0..=k).map(|j| z[i * n + j] * y[j * n + k]).sum();
            vecs[(i, k)] = s;
        }
    }
    let w = if n == 0 { 1.0 } else { weight(n) };
    for k in 0..n {
        let norm = (vecs.column(k).iter().map(|v| v.norm_sqr()).sum::<f64>() * w).sqrt();
        if norm > 0.0 {
            vecs.column_mut(k).iter_mut().for_each(|v| *v /= norm);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sort_key(&t[i * n + i], &t[j * n + j]).then(i.cmp(&j)));
    let eigenvalues: Vec<Complex64> = order.iter().map(|&i| t[i * n + i]).collect();
    let eigenvectors = CMat::from_fn(n, n, |i, j| vecs[(i, order[j])]);
    let afro = norm_fro(a);
    let residuals = (0..n)
        .map(|j| {
            let v = eigenvectors.column(j);
            let r = a * v - v * eigenvalues[j];
            let vn = v.norm();
            if afro == 0.0 || vn == 0.0 {
                0.0
            } else {
                r.norm() / (afro * vn)
            }
        })
        .collect();
    Ok(OperatorSpectrum {
        eigenvalues,
        eigenvectors,
        residuals,
    })
}

/// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.
pub fn eig_hermitian(h: &CMat) -> Result<HermitianSpectrum> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::Precondition(format!("matrix is {}×{}, not square", n, h.ncols())));
    }
    let hnorm = norm_fro(h);
    let asym = norm_fro(&(h - h.adjoint()));
    if asym > 1e-12 * hnorm {
        return Err(Error::Precondition(format!(
            "matrix is not Hermitian: ‖H − H^H‖ = {asym:e}, ‖H‖ = {hnorm:e}"
        )));
    }
    let mut a = to_rows(h);
    for i in 0..n {
        a[i * n + i] = Complex64::new(a[i * n + i].re, 0.0);
        for j in i + 1..n {
            let avg = (a[i * n + j] + a[j * n + i].conj()) * 0.5;
            a[i * n + j] = avg;
            a[j * n + i] = avg.conj();
        }
    }
    let mut v = vec![ZERO; n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    }
    let off = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let target = f64::EPSILON * hnorm;
    let mut sweeps = 0;
    while off(&a) > target {
        sweeps += 1;
        if sweeps > JACOBI_MAX_SWEEPS {
            return Err(Error::Eigen(format!("Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE
                    || r <= 1e-3 * f64::EPSILON * (a[p * n + p].re.abs() + a[q * n + q].re.abs())
                {
                    a[p * n + q] = ZERO;
                    a[q * n + p] = ZERO;
                    continue;
                }
                let phase = apq / r;
                let tau = (a[q * n + q].re - a[p * n + p].re) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = [[c, s], [−s e^{−iφ}, c e^{−iφ}]] on (p, q); A ← J^H A J.
                let pc = phase.conj();
                for k in 0..n {
                    let x = a[k * n + p];
                    let y = a[k * n + q];
                    a[k * n + p] = x * c - y * (pc * s);
                    a[k * n + q] = x * s + y * (pc * c);
                    let x = v[k * n + p];
                    let y = v[k * n + q];
                    v[k * n + p] = x * c - y * (pc * s);
                    v[k * n + q] = x * s + y * (pc * c);
                }
                for k in 0..n {
                    let x = a[p * n + k];
                    let y = a[q * n + k];
                    a[p * n + k] = x * c - y * (phase * s);
                    a[q * n + k] = x * s + y * (phase * c);
                }
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                a[p * n + p] = Complex64::new(a[p * n + p].re, 0.0);
                a[q * n + q] = Complex64::new(a[q * n + q].re, 0.0);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re).then(i.cmp(&j)));
    Ok(HermitianSpectrum {
        eigenvalues: order.iter().map(|&i| a[i * n + i].re).collect(),
        eigenvectors: CMat::from_fn(n, n, |i, j| v[i * n + order[j]]),
    })
}

/// Power applied to `|λ_j|` in the Picard denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PicardExponent {
    #[default]
    One,
    Half,
}

impl PicardExponent {
    pub fn apply(self, modulus: f64) -> f64 {
        match self {
            PicardExponent::One => modulus,
            PicardExponent::Half => modulus.sqrt(),
        }
    }
}

/// `W = Σ_j |⟨rhs, ψ_j⟩_w|² / (|λ_j|^e + α)`.
pub fn damped_picard_sum(
    spec: &OperatorSpectrum,
    rhs: &[Complex64],
    alpha: f64,
    exponent: PicardExponent,
) -> Result<f64> {
    let n = spec.eigenvectors.nrows();
    if rhs.len() != n {
        return Err(Error::Precondition(format!("rhs length {} ≠ {n}", rhs.len())));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Precondition(format!("alpha = {alpha} must be finite and ≥ 0")));
    }
    let w = if n == 0 { 1.0 } else { weight(n) };
    let rhs = DVector::from_column_slice(rhs);
    let mut total = 0.0;
    for (j, lambda) in spec.eigenvalues.iter().enumerate() {
        let denom = exponent.apply(lambda.norm()) + alpha;
        if denom == 0.0 {
            return Err(Error::ZeroEigenvalue);
        }
        // ⟨rhs, ψ⟩_w = w ψ^H rhs
        let coeff = spec.eigenvectors.column(j).dotc(&rhs) * w;
        total += coeff.norm_sqr() / denom;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(n: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMat::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn diagonal_sorted_by_modulus() {
        let a = CMat::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 2.0), c(-3.0, 0.0)]));
        let s = eig_general(&a).unwrap();
        let expect = [c(-3.0, 0.0), c(0.0, 2.0), c(1.0, 0.0)];
        for (l, e) in s.eigenvalues.iter().zip(expect) {
            assert!((l - e).norm() < 1e-14, "{l} vs {e}");
        }
    }

    #[test]
    fn rotation_generator() {
        let a = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]);
        let s = eig_general(&a).unwrap();
        let mut ims: Vec<f64> = s.eigenvalues.iter().map(|l| l.im).collect();
        ims.sort_by(f64::total_cmp);
        assert!((ims[0] + 1.0).abs() < 1e-14 && (ims[1] - 1.0).abs() < 1e-14);
        assert!(s.eigenvalues.iter().all(|l| l.re.abs() < 1e-14));
    }

    #[test]
    fn random_backward_error() {
        for seed in 0..5 {
            let a = random_matrix(64, seed);
            let s = eig_general(&a).unwrap();
            assert!(s.max_residual() <= 1e-10, "seed {seed}: {}", s.max_residual());
        }
    }

    #[test]
    fn eigenvectors_have_unit_weighted_norm() {
        let a = random_matrix(16, 9);
        let s = eig_general(&a).unwrap();
        for j in 0..16 {
            let col: Vec<Complex64> = s.eigenvectors.column(j).iter().cloned().collect();
            assert!((weighted_inner(&col, &col).re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn jordan_block_does_not_fail() {
        let a = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let s = eig_general(&a).unwrap();
        assert!(s.eigenvalues.iter().all(|l| (l - c(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn empty_and_one_by_one() {
        assert!(eig_general(&CMat::zeros(0, 0)).unwrap().is_empty());
        let s = eig_general(&CMat::from_element(1, 1, c(2.0, -1.0))).unwrap();
        assert_eq!(s.eigenvalues, vec![c(2.0, -1.0)]);
    }

    #[test]
    fn hermitian_small() {
        let h = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let s = eig_hermitian(&h).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 3.0).abs() < 1e-14);
        let id = eig_hermitian(&CMat::identity(5, 5)).unwrap();
        assert!(id.eigenvalues.iter().all(|&l| l == 1.0));
    }

    #[test]
    fn hermitian_rejects_nonhermitian() {
        let a = random_matrix(4, 3);
        assert!(matches!(eig_hermitian(&a), Err(Error::Precondition(_))));
    }

    #[test]
    fn hermitian_reconstruction_and_orthogonality() {
        let a = random_matrix(64, 11);
        let h = &a + a.adjoint();
        let s = eig_hermitian(&h).unwrap();
        let recon = s.reconstruct_with(|l| l);
        assert!(norm_fro(&(recon - &h)) <= 1e-11 * norm_fro(&h));
        let v = &s.eigenvectors;
        let gram = v.adjoint() * v - CMat::identity(64, 64);
        assert!(norm_fro(&gram) <= 1e-12 * 64.0);
    }

    #[test]
    fn picard_single_pair() {
        let rhs = vec![c(0.3, 0.1), c(-0.2, 0.5), c(0.0, 1.0), c(0.7, 0.0)];
        let nrm = weighted_inner(&rhs, &rhs).re.sqrt();
        let psi = CMat::from_fn(4, 1, |i, _| rhs[i] / nrm);
        let spec = OperatorSpectrum {
            eigenvalues: vec![c(1.0, 0.0)],
            eigenvectors: psi,
            residuals: vec![0.0],
        };
        let w = damped_picard_sum(&spec, &rhs, 0.0, PicardExponent::One).unwrap();
        assert!((w - nrm * nrm).abs() < 1e-14);
    }

    #[test]
    fn picard_zero_eigenvalue_needs_damping() {
        let spec = OperatorSpectrum {
            eigenvalues: vec![ZERO],
            eigenvectors: CMat::from_element(1, 1, c(1.0, 0.0)),
            residuals: vec![0.0],
        };
        assert!(matches!(
            damped_picard_sum(&spec, &[c(1.0, 0.0)], 0.0, PicardExponent::One),
            Err(Error::ZeroEigenvalue)
        ));
        assert!(damped_picard_sum(&spec, &[c(1.0, 0.0)], 1e-8, PicardExponent::One).is_ok());
    }

    #[test]
    fn picard_matches_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 16;
        let spec = eig_general(&random_matrix(n, 21)).unwrap();
        let rhs: Vec<Complex64> = (0..n).map(|_| c(rng.gen(), rng.gen())).collect();
        for exponent in [PicardExponent::One, PicardExponent::Half] {
            let got = damped_picard_sum(&spec, &rhs, 1e-3, exponent).unwrap();
            let mut want = 0.0;
            for j in 0..n {
                let mut re = 0.0;
                let mut im = 0.0;
                for i in 0..n {
                    let a = rhs[i];
                    let b = spec.eigenvectors[(i, j)].conj();
                    re += a.re * b.re - a.im * b.im;
                    im += a.re * b.im + a.im * b.re;
                }
                let w = 2.0 * PI / n as f64;
                let m = spec.eigenvalues[j].norm();
                let m = if exponent == PicardExponent::Half { m.sqrt() } else { m };
                want += (re * re + im * im) * w * w / (m + 1e-3);
            }
            assert!((got - want).abs() <= 1e-13 * want);
        }
    }
}
