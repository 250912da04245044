//! Dense collocation solver for the Lippmann–Schwinger equation on a grid
//! covering only the contrast support. Independent of the FFT scheme and used
//! to cross-check it.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::model::{ContrastField, DirectionSet, Rect, WaveContext};
use crate::operators::FarFieldMatrix;
use crate::specfun::cyl01;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// LU factorisation with partial pivoting of a row-major `n × n` matrix.
struct Lu {
    n: usize,
    a: Vec<Complex64>,
    piv: Vec<usize>,
}

impl Lu {
    fn factor(n: usize, mut a: Vec<Complex64>) -> Result<Self> {
        let mut piv = vec![0; n];
        let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for p in 0..n {
            let (best, val) = (p..n)
                .map(|r| (r, a[r * n + p].norm()))
                .fold((p, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if val <= f64::EPSILON * scale * n as f64 {
                return Err(Error::Singular(format!("dense system pivot {val:e} at column {p}")));
            }
            piv[p] = best;
            if best != p {
                for c in 0..n {
                    a.swap(p * n + c, best * n + c);
                }
            }
            let (top, rest) = a.split_at_mut((p + 1) * n);
            let prow = &top[p * n..];
            let inv = prow[p].inv();
            rest.par_chunks_mut(n).for_each(|row| {
                let l = row[p] * inv;
                row[p] = l;
                if l != ZERO {
                    for (x, y) in row[p + 1..].iter_mut().zip(&prow[p + 1..]) {
                        *x -= l * y;
                    }
                }
            });
        }
        Ok(Lu { n, a, piv })
    }

    fn solve(&self, b: &mut [Complex64]) {
        let n = self.n;
        for p in 0..n {
            b.swap(p, self.piv[p]);
        }
        for i in 0..n {
            let mut acc = b[i];
            for j in 0..i {
                acc -= self.a[i * n + j] * b[j];
            }
            b[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = b[i];
            for j in i + 1..n {
                acc -= self.a[i * n + j] * b[j];
            }
            b[i] = acc / self.a[i * n + i];
        }
    }
}

/// `∫ Φ(y) dy` over the disk of radius `ρ` about the origin:
/// `(iπ/2) ρ H₁(kρ) / k − 1/k²`.
pub(crate) fn disk_integral(k: f64, rho: f64) -> Complex64 {
    Complex64::new(0.0, PI / 2.0) * cyl01(k * rho).h1() * (rho / k) - 1.0 / (k * k)
}

/// Collocation system `u − k² Σ Φ q u h² = u^i` on the cells of the support box.
struct DenseSystem {
    k: f64,
    h: f64,
    centres: Vec<[f64; 2]>,
    qs: Vec<f64>,
    lu: Lu,
}

impl DenseSystem {
    /// Off-diagonal couplings use the midpoint rule; the self-cell uses the
    /// exact integral of `Φ` over the equal-area disk.
    fn assemble(ctx: &WaveContext, q: &ContrastField, coarse_m: usize) -> Result<Self> {
        let k = ctx.k();
        let sb = q.support_box();
        let hx = (sb.x_max - sb.x_min) / coarse_m as f64;
        let hy = (sb.y_max - sb.y_min) / coarse_m as f64;
        if (hx - hy).abs() > 1e-12 * hx {
            return Err(Error::Precondition("dense oracle needs a square support box".into()));
        }
        let h = hx;
        let nn = coarse_m * coarse_m;
        let centres: Vec<[f64; 2]> = (0..nn)
            .map(|i| {
                let (ix, iy) = (i % coarse_m, i / coarse_m);
                [sb.x_min + (ix as f64 + 0.5) * h, sb.y_min + (iy as f64 + 0.5) * h]
            })
            .collect();
        let qs: Vec<f64> = centres
            .iter()
            .map(|c| {
                q.cell_average(&Rect {
                    x_min: c[0] - h / 2.0,
                    x_max: c[0] + h / 2.0,
                    y_min: c[1] - h / 2.0,
                    y_max: c[1] + h / 2.0,
                })
            })
            .collect::<Result<_>>()?;
        // Φ depends only on the index offset, so tabulate it once.
        let self_term = disk_integral(k, h / PI.sqrt());
        let phi: Vec<Complex64> = (0..nn)
            .map(|i| {
                let (dx, dy) = ((i % coarse_m) as f64, (i / coarse_m) as f64);
                if i == 0 {
                    self_term
                } else {
                    cyl01(k * h * dx.hypot(dy)).h0() * Complex64::new(0.0, 0.25) * (h * h)
                }
            })
            .collect();
        let k2 = k * k;
        let mut a = vec![ZERO; nn * nn];
        a.par_chunks_mut(nn).enumerate().for_each(|(r, row)| {
            let (rx, ry) = (r % coarse_m, r / coarse_m);
            for (c, v) in row.iter_mut().enumerate() {
                let (cx, cy) = (c % coarse_m, c / coarse_m);
                let off = rx.abs_diff(cx) + coarse_m * ry.abs_diff(cy);
                *v = -phi[off] * (k2 * qs[c]);
            }
            row[r] += 1.0;
        });
        let lu = Lu::factor(nn, a)?;
        Ok(DenseSystem { k, h, centres, qs, lu })
    }

    /// Far field `k² h² Σ exp(−ik x̂_i·y) q u` of the solution for `incident`.
    fn far_field(&self, incident: Vec<Complex64>, dirs: &DirectionSet) -> Vec<Complex64> {
        let mut u = incident;
        self.lu.solve(&mut u);
        let k = self.k;
        (0..dirs.len())
            .map(|i| {
                let x = dirs.direction(i);
                let s: Complex64 = self
                    .centres
                    .iter()
                    .zip(&u)
                    .zip(&self.qs)
                    .map(|((p, uv), qv)| Complex64::from_polar(*qv, -k * (x[0] * p[0] + x[1] * p[1])) * uv)
                    .sum();
                s * (k * k * self.h * self.h)
            })
            .collect()
    }
}

fn check_coarse(q: &ContrastField, coarse_m: usize) -> Result<()> {
    q.validate()?;
    if !(2..=64).contains(&coarse_m) {
        return Err(Error::Precondition(format!("coarse_m = {coarse_m} outside [2, 64]")));
    }
    Ok(())
}

/// Far field kernel by dense collocation on `coarse_m × coarse_m` cells over
/// the support box of `q`, solved by LU factorisation.
pub fn dense_oracle_far_field(
    ctx: &WaveContext,
    q: &ContrastField,
    dirs: &DirectionSet,
    coarse_m: usize,
) -> Result<FarFieldMatrix> {
    check_coarse(q, coarse_m)?;
    let n_dir = dirs.len();
    if q.is_identically_zero() {
        return Ok(FarFieldMatrix::new(*ctx, *dirs, CMat::zeros(n_dir, n_dir), Some(q.clone())));
    }
    let sys = DenseSystem::assemble(ctx, q, coarse_m)?;
    let k = sys.k;
    let columns: Vec<Vec<Complex64>> = (0..n_dir)
        .into_par_iter()
        .map(|j| {
            let d = dirs.direction(j);
            let u = sys
                .centres
                .iter()
                .map(|p| Complex64::from_polar(1.0, k * (p[0] * d[0] + p[1] * d[1])))
                .collect();
            sys.far_field(u, dirs)
        })
        .collect();
    let kernel = CMat::from_fn(n_dir, n_dir, |i, j| columns[j][i]);
    Ok(FarFieldMatrix::new(*ctx, *dirs, kernel, Some(q.clone())))
}

/// Dense counterpart of [`super::green_far_field`]: `exp(−ik x̂_i·z)` plus
/// the far field of the scattered part of a point source at `z`.
pub fn dense_oracle_green_far_field(
    ctx: &WaveContext,
    q: &ContrastField,
    z: [f64; 2],
    dirs: &DirectionSet,
    coarse_m: usize,
) -> Result<Vec<Complex64>> {
    check_coarse(q, coarse_m)?;
    let k = ctx.k();
    let mut out: Vec<Complex64> = (0..dirs.len())
        .map(|i| {
            let d = dirs.direction(i);
            Complex64::from_polar(1.0, -k * (d[0] * z[0] + d[1] * z[1]))
        })
        .collect();
    if q.is_identically_zero() {
        return Ok(out);
    }
    let sys = DenseSystem::assemble(ctx, q, coarse_m)?;
    let rho = sys.h / PI.sqrt();
    let u = sys
        .centres
        .iter()
        .map(|p| {
            let r = (p[0] - z[0]).hypot(p[1] - z[1]);
            if r < rho {
                disk_integral(k, rho) / (PI * rho * rho)
            } else {
                cyl01(k * r).h0() * Complex64::new(0.0, 0.25)
            }
        })
        .collect();
    for (o, s) in out.iter_mut().zip(sys.far_field(u, dirs)) {
        *o += s;
    }
    Ok(out)
}
