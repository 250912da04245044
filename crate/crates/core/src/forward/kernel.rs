//! Fourier symbol of the truncated fundamental solution on the periodised box.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::model::ComputationalGrid;
use crate::specfun::{bessel_j01, cyl01};

/// `K̂(ξ) = ∫_{|y|<T} Φ(y) e^{-iξ·y} dy` sampled on the discrete frequencies
/// of a grid, in FFT index order (`iy·m + ix`).
#[derive(Debug)]
pub struct KernelSymbol {
    pub k: f64,
    pub grid: ComputationalGrid,
    pub values: Vec<Complex64>,
}

/// Radial symbol of `Φ(x) = (i/4) H₀⁽¹⁾(k|x|)` truncated at radius `t`:
///
/// `K̂(ρ) = (1 + (iπt/2) [ρ J₁(ρt) H₀(kt) − k J₀(ρt) H₁(kt)]) / (ρ² − k²)`
///
/// with the removable singularity at `ρ = k` replaced by its limit
/// `(iπt²/4) (J₀(kt) H₀(kt) + J₁(kt) H₁(kt))`.
pub fn truncated_symbol(k: f64, t: f64, rho: f64) -> Complex64 {
    let kt = cyl01(k * t);
    let (h0, h1) = (kt.h0(), kt.h1());
    let i = Complex64::i();
    if (rho - k).abs() <= 1e-7 * k {
        let j0h0 = h0 * kt.j0;
        let j1h1 = h1 * kt.j1;
        // First-order correction in (ρ − k) is negligible at this distance.
        return i * (PI * t * t / 4.0) * (j0h0 + j1h1);
    }
    let (j0, j1) = bessel_j01(rho * t);
    let bracket = h0 * (rho * j1) - h1 * (k * j0);
    (Complex64::new(1.0, 0.0) + i * (PI * t / 2.0) * bracket) / (rho * rho - k * k)
}

impl KernelSymbol {
    pub fn new(k: f64, grid: ComputationalGrid) -> Self {
        let m = grid.m();
        let period = 2.0 * grid.box_radius();
        let t = grid.truncation_radius();
        let freq = |p: usize| {
            let signed = if p < m / 2 { p as f64 } else { p as f64 - m as f64 };
            2.0 * PI * signed / period
        };
        // The symbol is radial: evaluate once per distinct |p|².
        let mut by_radius: HashMap<usize, Complex64> = HashMap::new();
        let mut values = Vec::with_capacity(m * m);
        for py in 0..m {
            let sy = if py < m / 2 { py } else { m - py };
            for px in 0..m {
                let sx = if px < m / 2 { px } else { m - px };
                let key = sx * sx + sy * sy;
                let v = *by_radius
                    .entry(key)
                    .or_insert_with(|| truncated_symbol(k, t, freq(px).hypot(freq(py))));
                values.push(v);
            }
        }
        KernelSymbol { k, grid, values }
    }

    /// Shared, lazily built symbol for `(k, grid)`.
    pub fn cached(k: f64, grid: ComputationalGrid) -> Arc<KernelSymbol> {
        type Key = (u64, u64, usize);
        static CACHE: OnceLock<Mutex<HashMap<Key, Arc<KernelSymbol>>>> = OnceLock::new();
        let key = (k.to_bits(), grid.box_radius().to_bits(), grid.m());
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(s) = cache.lock().expect("kernel cache poisoned").get(&key) {
            return Arc::clone(s);
        }
        let symbol = Arc::new(KernelSymbol::new(k, grid));
        let mut guard = cache.lock().expect("kernel cache poisoned");
        Arc::clone(guard.entry(key).or_insert(symbol))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct quadrature of `∫_0^t (i/4) H₀(kr) J₀(ρr) 2πr dr`, with the
    /// logarithmic singularity removed by the substitution `r = s²`.
    fn quadrature_symbol(k: f64, t: f64, rho: f64) -> Complex64 {
        let n = 20_000;
        let smax = t.sqrt();
        let ds = smax / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            // Gauss–Legendre 2-point on each panel.
            for g in [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8] {
                let s = (i as f64 + 0.5 + 0.5 * g) * ds;
                let r = s * s;
                let c = cyl01(k * r);
                let (j0, _) = bessel_j01(rho * r);
                // dr = 2s ds
                acc += c.h0() * (j0 * r * 2.0 * s * 0.5 * ds);
            }
        }
        acc * Complex64::new(0.0, 0.25) * (2.0 * PI)
    }

    #[test]
    fn symbol_matches_quadrature() {
        let k = 2.0 * PI;
        let t = 2.0;
        for rho in [0.0, 1.0, 3.0, k, k + 0.3, 12.0, 40.0] {
            let a = truncated_symbol(k, t, rho);
            let b = quadrature_symbol(k, t, rho);
            assert!((a - b).norm() < 1e-6 * (1.0 + b.norm()), "rho={rho}: {a} vs {b}");
        }
    }

    #[test]
    fn symbol_continuous_at_resonance() {
        let k = 5.0;
        let t = 2.0;
        let at = truncated_symbol(k, t, k);
        let near = truncated_symbol(k, t, k * (1.0 + 1e-5));
        assert!((at - near).norm() < 1e-3 * at.norm());
    }
}
