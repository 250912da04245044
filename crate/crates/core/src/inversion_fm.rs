//! Factorization-method support indicators.
//!
//! The classical map tests `φ_z = exp(−ik x̂·z)` against the eigensystem of
//! `F`; the background variant tests `S₂^H G∞(·, z)` against the square root
//! of `M♯` built from `S₂^H (F₁ − F₂)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{far_field_matrix, green_far_fields_reciprocal, ForwardConfig};
use crate::model::{ContrastField, Rect};
use crate::operators::{comparison_matrix, msharp_decomposed, scattering_matrix, FarFieldMatrix, MSHARP_PSD_TOL};
use crate::spectral::{damped_picard_sum, eig_general, OperatorSpectrum, PicardExponent};

/// Tikhonov parameter used unless overridden.
pub const DEFAULT_ALPHA: f64 = 1e-8;

/// Tensor grid of sampling points over a rectangle, row-major with `x`
/// varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingGrid {
    pub bbox: Rect,
    pub resolution: usize,
}

impl SamplingGrid {
    pub fn new(bbox: Rect, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::Precondition(format!("sampling resolution {resolution} < 2")));
        }
        let corners = [bbox.x_min, bbox.x_max, bbox.y_min, bbox.y_max];
        if corners.iter().any(|v| !v.is_finite()) || bbox.x_min >= bbox.x_max || bbox.y_min >= bbox.y_max {
            return Err(Error::Precondition("sampling box must be finite with positive extent".into()));
        }
        Ok(SamplingGrid { bbox, resolution })
    }

    pub fn len(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, index: usize) -> [f64; 2] {
        let r = self.resolution;
        let (ix, iy) = (index % r, index / r);
        let t = |i: usize, lo: f64, hi: f64| lo + (hi - lo) * i as f64 / (r - 1) as f64;
        [t(ix, self.bbox.x_min, self.bbox.x_max), t(iy, self.bbox.y_min, self.bbox.y_max)]
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

/// Indicator values in `[0, 1]` with maximum exactly one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorMap {
    pub grid: SamplingGrid,
    pub values: Vec<f64>,
    pub alpha: f64,
}

impl IndicatorMap {
    /// Scales raw nonnegative values to maximum one.
    pub fn from_raw(grid: SamplingGrid, raw: Vec<f64>, alpha: f64) -> Result<Self> {
        if raw.len() != grid.len() {
            return Err(Error::Precondition("indicator length does not match the grid".into()));
        }
        let max = raw.iter().cloned().fold(0.0, f64::max);
        if !(max.is_finite() && max > 0.0) || raw.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Domain(format!("indicator values cannot be normalised (max {max})")));
        }
        let values = raw.iter().map(|v| if *v == max { 1.0 } else { v / max }).collect();
        Ok(IndicatorMap { grid, values, alpha })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Precondition(format!("alpha = {alpha} must be positive")));
    }
    Ok(())
}

fn picard_map(
    spec: &OperatorSpectrum,
    grid: SamplingGrid,
    alpha: f64,
    exponent: PicardExponent,
    rhs: impl Fn(usize) -> Result<Vec<Complex64>> + Sync,
) -> Result<IndicatorMap> {
    let raw = (0..grid.len())
        .into_par_iter()
        .map(|p| {
            let w = damped_picard_sum(spec, &rhs(p)?, alpha, exponent)?;
            Ok(1.0 / w)
        })
        .collect::<Result<Vec<f64>>>()?;
    IndicatorMap::from_raw(grid, raw, alpha)
}

/// `value(z) = 1 / Σ_j |⟨φ_z, ψ_j⟩_w|² / (|λ_j| + α)` over the eigensystem of `F_w`.
pub fn fm_indicator_map(f: &FarFieldMatrix, grid: &SamplingGrid, alpha: f64) -> Result<IndicatorMap> {
    check_alpha(alpha)?;
    if f.is_zero() {
        return Err(Error::NoScatteringData("far field operator is zero".into()));
    }
    let spec = eig_general(&f.weighted())?;
    let k = f.ctx.k();
    let dirs = f.dirs.directions();
    picard_map(&spec, grid.clone(), alpha, PicardExponent::One, |p| {
        let z = grid.point(p);
        Ok(dirs
            .iter()
            .map(|d| Complex64::from_polar(1.0, -k * (d[0] * z[0] + d[1] * z[1])))
            .collect())
    })
}

/// Background-perturbation indicator from already synthesised data: `f2` is
/// the far field operator of the background and `greens[p]` the background
/// Green's far field for sampling point `p`.
pub fn msharp_indicator_from_parts(
    f1: &FarFieldMatrix,
    f2: &FarFieldMatrix,
    greens: &[Vec<Complex64>],
    grid: &SamplingGrid,
    alpha: f64,
    psd_tol: f64,
    exponent: PicardExponent,
) -> Result<IndicatorMap> {
    check_alpha(alpha)?;
    if greens.len() != grid.len() {
        return Err(Error::Precondition("one Green's far field per sampling point is required".into()));
    }
    let m = comparison_matrix(f1, f2)?;
    let (_, hspec) = msharp_decomposed(&m, psd_tol)?;
    let spec = hspec.to_operator_spectrum();
    let s2h = scattering_matrix(f2).s.adjoint();
    picard_map(&spec, grid.clone(), alpha, exponent, |p| {
        let g = nalgebra::DVector::from_column_slice(&greens[p]);
        Ok((&s2h * g).iter().cloned().collect())
    })
}

/// Indicator of the support of `q₁ − q₂` for a known background `q₂`:
/// synthesises `F₂`, builds `M♯` and evaluates the square-root range test
/// `Σ |⟨rhs, ψ_j⟩_w|² / (μ_j + α)`. The PSD tolerance is
/// [`synthesized_psd_tol`].
pub fn msharp_indicator_map(
    f1: &FarFieldMatrix,
    q2: &ContrastField,
    grid: &SamplingGrid,
    alpha: f64,
    cfg: &ForwardConfig,
) -> Result<IndicatorMap> {
    msharp_indicator_map_with(f1, q2, grid, alpha, cfg, synthesized_psd_tol(cfg), PicardExponent::One)
}

/// PSD tolerance for `M♯` built from solver output: negative eigenvalues
/// down to `10·tol` relative are solver error, not data inconsistency.
pub fn synthesized_psd_tol(cfg: &ForwardConfig) -> f64 {
    MSHARP_PSD_TOL.max(10.0 * cfg.tol)
}

/// [`msharp_indicator_map`] with an explicit relative PSD tolerance for `M♯`
/// and Picard exponent.
pub fn msharp_indicator_map_with(
    f1: &FarFieldMatrix,
    q2: &ContrastField,
    grid: &SamplingGrid,
    alpha: f64,
    cfg: &ForwardConfig,
    psd_tol: f64,
    exponent: PicardExponent,
) -> Result<IndicatorMap> {
    check_alpha(alpha)?;
    let f2 = far_field_matrix(&f1.ctx, q2, &f1.dirs, cfg)?;
    let greens = green_far_fields_reciprocal(&f1.ctx, q2, &grid.points(), &f1.dirs, cfg)?;
    msharp_indicator_from_parts(f1, &f2, &greens, grid, alpha, psd_tol, exponent)
}
