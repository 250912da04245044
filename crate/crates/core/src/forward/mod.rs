//! Forward scattering: the periodised Lippmann–Schwinger equation
//! `u = u^i + k² V(q u)` solved matrix-free with FFT convolutions and GMRES,
//! plus far field evaluation.
//!
//! `V` is convolution with the fundamental solution `Φ(x) = (i/4) H₀⁽¹⁾(k|x|)`
//! truncated at radius `R_box`; with supports inside
//! [`ComputationalGrid::max_support_half_width`] the periodisation does not
//! alias. Unknowns live only on the bounding window of nonzero contrast
//! cells, and the 2D transforms skip rows that are known to be zero.

pub mod dense;
pub mod gmres;
pub mod kernel;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::model::{ComplexField2D, ComputationalGrid, ContrastField, DirectionSet, WaveContext};
use crate::operators::FarFieldMatrix;
use crate::specfun::cyl01;

pub use dense::{dense_oracle_far_field, dense_oracle_green_far_field};
pub use gmres::{GmresConfig, GmresOutcome};
pub use kernel::KernelSymbol;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Discretisation and Krylov settings shared by all forward solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForwardConfig {
    pub grid: ComputationalGrid,
    pub tol: f64,
    pub restart: usize,
    pub max_iterations: usize,
}

impl Default for ForwardConfig {
    fn default() -> Self {
        ForwardConfig {
            grid: ComputationalGrid::desk_default(),
            tol: 1e-8,
            restart: 50,
            max_iterations: 1000,
        }
    }
}

impl ForwardConfig {
    pub fn with_grid(grid: ComputationalGrid) -> Self {
        ForwardConfig {
            grid,
            ..Default::default()
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1e-12..=1e-4).contains(&self.tol) {
            return Err(Error::Precondition(format!(
                "solver tolerance {} outside [1e-12, 1e-4]",
                self.tol
            )));
        }
        if self.restart == 0 || self.max_iterations == 0 {
            return Err(Error::Precondition("restart and max_iterations must be positive".into()));
        }
        Ok(())
    }

    fn gmres(&self) -> GmresConfig {
        GmresConfig {
            restart: self.restart,
            max_iterations: self.max_iterations,
            tol: self.tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum IncidentKind {
    /// `exp(ik x·θ)`.
    PlaneWave { direction: [f64; 2] },
    /// `Φ(x − z)`.
    PointSource { location: [f64; 2] },
}

/// Incident wave together with its samples on a grid.
#[derive(Debug, Clone)]
pub struct IncidentField {
    pub kind: IncidentKind,
    pub trace: ComplexField2D,
}

impl IncidentField {
    pub fn new(ctx: &WaveContext, kind: IncidentKind, grid: ComputationalGrid) -> Result<Self> {
        if let IncidentKind::PlaneWave { direction } = kind {
            let r = direction[0].hypot(direction[1]);
            if (r - 1.0).abs() > 1e-12 {
                return Err(Error::Precondition(format!("plane wave direction must be a unit vector, |θ| = {r}")));
            }
        }
        let h = grid.spacing();
        let values = (0..grid.m() * grid.m())
            .map(|i| incident_value(ctx.k(), h, &kind, grid.node(i)))
            .collect();
        Ok(IncidentField {
            kind,
            trace: ComplexField2D { grid, values },
        })
    }

    pub fn plane_wave(ctx: &WaveContext, direction: [f64; 2], grid: ComputationalGrid) -> Result<Self> {
        Self::new(ctx, IncidentKind::PlaneWave { direction }, grid)
    }
}

/// Mean of `Φ` over the disk of radius `ρ` centred at the source:
/// `i H₁(kρ) / (2kρ) − 1 / (π k² ρ²)`.
fn point_source_disk_average(k: f64, rho: f64) -> Complex64 {
    let c = cyl01(k * rho);
    Complex64::new(0.0, 1.0) * c.h1() / (2.0 * k * rho) - 1.0 / (PI * k * k * rho * rho)
}

/// Incident field at a node of a grid with spacing `h`. A point source closer
/// to the node than the equal-area disk radius `h/√π` takes the disk average.
fn incident_value(k: f64, h: f64, kind: &IncidentKind, p: [f64; 2]) -> Complex64 {
    match kind {
        IncidentKind::PlaneWave { direction } => {
            Complex64::from_polar(1.0, k * (p[0] * direction[0] + p[1] * direction[1]))
        }
        IncidentKind::PointSource { location } => {
            let r = (p[0] - location[0]).hypot(p[1] - location[1]);
            let rho = h / PI.sqrt();
            if r < rho {
                point_source_disk_average(k, rho)
            } else {
                cyl01(k * r).h0() * Complex64::new(0.0, 0.25)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub relative_residual: f64,
    pub grid: ComputationalGrid,
}

/// Index window `[ix0, ix0+nx) × [iy0, iy0+ny)` of nonzero contrast cells.
#[derive(Debug, Clone, Copy)]
struct Window {
    ix0: usize,
    iy0: usize,
    nx: usize,
    ny: usize,
}

impl Window {
    fn len(&self) -> usize {
        self.nx * self.ny
    }

    fn grid_index(&self, m: usize, w: usize) -> usize {
        (self.iy0 + w / self.nx) * m + self.ix0 + w % self.nx
    }
}

/// Scratch space for one sequence of convolutions.
struct Workspace {
    buf: Vec<Complex64>,
    /// Set when rows outside the input window hold data from a previous call.
    dirty: bool,
    col: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

/// A contrast discretised on a grid, ready for repeated solves.
pub struct Scatterer {
    ctx: WaveContext,
    grid: ComputationalGrid,
    window: Window,
    /// Cell averages of `q` on the window, row-major.
    q: Vec<f64>,
    symbol: Arc<KernelSymbol>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Scatterer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scatterer")
            .field("k", &self.ctx.k())
            .field("grid", &self.grid)
            .field("window", &self.window)
            .finish()
    }
}

impl Scatterer {
    pub fn new(ctx: &WaveContext, q: &ContrastField, grid: ComputationalGrid) -> Result<Self> {
        q.validate()?;
        grid.check_fits(&q.support_box())?;
        let m = grid.m();
        let cells = q.cell_averages(&grid)?;
        let (mut x0, mut x1, mut y0, mut y1) = (usize::MAX, 0, usize::MAX, 0);
        for (i, v) in cells.iter().enumerate() {
            if *v != 0.0 {
                let (ix, iy) = (i % m, i / m);
                x0 = x0.min(ix);
                x1 = x1.max(ix);
                y0 = y0.min(iy);
                y1 = y1.max(iy);
            }
        }
        let window = if x0 == usize::MAX {
            Window {
                ix0: 0,
                iy0: 0,
                nx: 0,
                ny: 0,
            }
        } else {
            Window {
                ix0: x0,
                iy0: y0,
                nx: x1 - x0 + 1,
                ny: y1 - y0 + 1,
            }
        };
        let qw = (0..window.len()).map(|w| cells[window.grid_index(m, w)]).collect();
        let mut planner = FftPlanner::new();
        Ok(Scatterer {
            ctx: *ctx,
            grid,
            window,
            q: qw,
            symbol: KernelSymbol::cached(ctx.k(), grid),
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        })
    }

    pub fn ctx(&self) -> &WaveContext {
        &self.ctx
    }

    pub fn grid(&self) -> &ComputationalGrid {
        &self.grid
    }

    /// True when every contrast cell is zero.
    pub fn is_empty(&self) -> bool {
        self.window.len() == 0
    }

    fn workspace(&self) -> Workspace {
        let m = self.grid.m();
        let scratch_len = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        Workspace {
            buf: vec![ZERO; m * m],
            dirty: false,
            col: vec![ZERO; m],
            scratch: vec![ZERO; scratch_len],
        }
    }

    fn window_nodes(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        let m = self.grid.m();
        (0..self.window.len()).map(move |w| self.grid.node(self.window.grid_index(m, w)))
    }

    /// Incident field restricted to the window.
    fn incident_on_window(&self, kind: &IncidentKind) -> Vec<Complex64> {
        let h = self.grid.spacing();
        self.window_nodes()
            .map(|p| incident_value(self.ctx.k(), h, kind, p))
            .collect()
    }

    /// `V f` for `f` supported on the window; results are left in
    /// `ws.buf` on rows `out_rows` (all columns).
    fn convolve(&self, f: &[Complex64], ws: &mut Workspace, out_rows: std::ops::Range<usize>) {
        let m = self.grid.m();
        let win = self.window;
        let in_rows = win.iy0..win.iy0 + win.ny;
        if ws.dirty {
            ws.buf.iter_mut().for_each(|v| *v = ZERO);
        }
        for iy in in_rows.clone() {
            let row = &mut ws.buf[iy * m..(iy + 1) * m];
            row.iter_mut().for_each(|v| *v = ZERO);
            let r = iy - win.iy0;
            row[win.ix0..win.ix0 + win.nx].copy_from_slice(&f[r * win.nx..(r + 1) * win.nx]);
        }
        self.forward.process_with_scratch(
            &mut ws.buf[in_rows.start * m..in_rows.end * m],
            &mut ws.scratch,
        );
        let scale = 1.0 / (m * m) as f64;
        for ix in 0..m {
            ws.col.iter_mut().for_each(|v| *v = ZERO);
            for iy in in_rows.clone() {
                ws.col[iy] = ws.buf[iy * m + ix];
            }
            self.forward.process_with_scratch(&mut ws.col, &mut ws.scratch);
            for (py, c) in ws.col.iter_mut().enumerate() {
                *c *= self.symbol.values[py * m + ix] * scale;
            }
            self.inverse.process_with_scratch(&mut ws.col, &mut ws.scratch);
            for iy in out_rows.clone() {
                ws.buf[iy * m + ix] = ws.col[iy];
            }
        }
        self.inverse.process_with_scratch(
            &mut ws.buf[out_rows.start * m..out_rows.end * m],
            &mut ws.scratch,
        );
        ws.dirty = out_rows.start < in_rows.start || out_rows.end > in_rows.end;
    }

    /// `out = u − k² V(q u)` on the window.
    fn apply(&self, u: &[Complex64], out: &mut [Complex64], ws: &mut Workspace, qu: &mut [Complex64]) {
        let m = self.grid.m();
        let win = self.window;
        let k2 = self.ctx.k() * self.ctx.k();
        for ((t, &qv), &uv) in qu.iter_mut().zip(&self.q).zip(u) {
            *t = uv * qv;
        }
        self.convolve(qu, ws, win.iy0..win.iy0 + win.ny);
        for (w, o) in out.iter_mut().enumerate() {
            *o = u[w] - ws.buf[win.grid_index(m, w)] * k2;
        }
    }

    /// Total field on the window for the given incidence.
    pub fn solve_window(&self, kind: &IncidentKind, cfg: &ForwardConfig) -> Result<(Vec<Complex64>, SolveReport)> {
        cfg.validate()?;
        let incident = self.incident_on_window(kind);
        if self.is_empty() {
            return Ok((
                incident,
                SolveReport {
                    iterations: 0,
                    relative_residual: 0.0,
                    grid: self.grid,
                },
            ));
        }
        let mut ws = self.workspace();
        let mut qu = vec![ZERO; self.window.len()];
        let mut u = incident.clone();
        let outcome = gmres::gmres(
            |v, out| self.apply(v, out, &mut ws, &mut qu),
            &incident,
            &mut u,
            &cfg.gmres(),
        );
        if !outcome.converged {
            return Err(Error::NonConvergence {
                iterations: outcome.iterations,
                residual: outcome.relative_residual,
                column: None,
            });
        }
        Ok((
            u,
            SolveReport {
                iterations: outcome.iterations,
                relative_residual: outcome.relative_residual,
                grid: self.grid,
            },
        ))
    }

    /// Scattered field `k² V(q u)` on every grid node.
    pub fn scattered_field(&self, u_window: &[Complex64]) -> ComplexField2D {
        let mut field = ComplexField2D::zeros(self.grid);
        if self.is_empty() {
            return field;
        }
        let m = self.grid.m();
        let k2 = self.ctx.k() * self.ctx.k();
        let mut ws = self.workspace();
        let qu: Vec<Complex64> = u_window.iter().zip(&self.q).map(|(u, q)| u * q).collect();
        self.convolve(&qu, &mut ws, 0..m);
        for (dst, src) in field.values.iter_mut().zip(&ws.buf) {
            *dst = src * k2;
        }
        field
    }

    /// `u∞(x̂_i) = k² h² Σ exp(−ik x̂_i·y) q(y) u(y)` over the window.
    pub fn far_field(&self, u_window: &[Complex64], dirs: &DirectionSet) -> Vec<Complex64> {
        let k = self.ctx.k();
        let h = self.grid.spacing();
        let win = self.window;
        let qu: Vec<Complex64> = u_window.iter().zip(&self.q).map(|(u, q)| u * q).collect();
        let xs: Vec<f64> = (0..win.nx).map(|i| self.grid.coordinate(win.ix0 + i)).collect();
        let ys: Vec<f64> = (0..win.ny).map(|i| self.grid.coordinate(win.iy0 + i)).collect();
        (0..dirs.len())
            .map(|i| {
                let d = dirs.direction(i);
                let ex: Vec<Complex64> = xs.iter().map(|x| Complex64::from_polar(1.0, -k * d[0] * x)).collect();
                let mut acc = ZERO;
                for (r, y) in ys.iter().enumerate() {
                    let row = &qu[r * win.nx..(r + 1) * win.nx];
                    let s: Complex64 = row.iter().zip(&ex).map(|(a, b)| a * b).sum();
                    acc += s * Complex64::from_polar(1.0, -k * d[1] * y);
                }
                acc * (k * k * h * h)
            })
            .collect()
    }

    /// True when every window cell lies within the truncation radius of each
    /// interpolation node around `z`, so that the grid field is exact there.
    fn grid_field_exact_at(&self, z: [f64; 2]) -> bool {
        let h = self.grid.spacing();
        let win = self.window;
        let xs = [
            self.grid.coordinate(win.ix0) - h / 2.0,
            self.grid.coordinate(win.ix0 + win.nx - 1) + h / 2.0,
        ];
        let ys = [
            self.grid.coordinate(win.iy0) - h / 2.0,
            self.grid.coordinate(win.iy0 + win.ny - 1) + h / 2.0,
        ];
        let far = (z[0] - xs[0]).abs().max((z[0] - xs[1]).abs()).hypot((z[1] - ys[0]).abs().max((z[1] - ys[1]).abs()));
        far + h * std::f64::consts::SQRT_2 <= self.grid.truncation_radius()
    }

    /// `k² h² Φ(z − y)` for every window cell `y`; the cell containing `z`,
    /// if any, uses the integral of `Φ` over the equal-area disk.
    fn direct_kernel(&self, z: [f64; 2]) -> Vec<Complex64> {
        let k = self.ctx.k();
        let h = self.grid.spacing();
        let rho = h / PI.sqrt();
        let quarter_i = Complex64::new(0.0, 0.25);
        self.window_nodes()
            .map(|y| {
                let r = (z[0] - y[0]).hypot(z[1] - y[1]);
                if r < rho {
                    dense::disk_integral(k, rho) * (k * k)
                } else {
                    quarter_i * cyl01(k * r).h0() * (k * k * h * h)
                }
            })
            .collect()
    }

    fn window_values(&self, field: &ComplexField2D) -> Vec<Complex64> {
        let m = self.grid.m();
        (0..self.window.len())
            .map(|w| field.values[self.window.grid_index(m, w)])
            .collect()
    }
}

/// Solves the scattering problem and returns the total field on the whole grid.
pub fn solve_total_field(
    ctx: &WaveContext,
    q: &ContrastField,
    inc: &IncidentField,
    grid: ComputationalGrid,
    tol: f64,
) -> Result<(ComplexField2D, SolveReport)> {
    let cfg = ForwardConfig::with_grid(grid).with_tol(tol);
    let sc = Scatterer::new(ctx, q, grid)?;
    let (u, report) = sc.solve_window(&inc.kind, &cfg)?;
    let mut total = sc.scattered_field(&u);
    let incident = if inc.trace.grid == grid {
        inc.trace.clone()
    } else {
        IncidentField::new(ctx, inc.kind, grid)?.trace
    };
    for (t, i) in total.values.iter_mut().zip(&incident.values) {
        *t += i;
    }
    Ok((total, report))
}

/// Far field of a total field `u` previously solved for contrast `q` on `u.grid`.
pub fn far_field_vector(
    ctx: &WaveContext,
    q: &ContrastField,
    u: &ComplexField2D,
    dirs: &DirectionSet,
) -> Result<Vec<Complex64>> {
    let sc = Scatterer::new(ctx, q, u.grid)?;
    let uw = sc.window_values(u);
    Ok(sc.far_field(&uw, dirs))
}

/// Far field kernel `U[i][j] = u∞(x̂_i; θ_j)` from one plane-wave solve per
/// incident direction. Columns are computed in parallel and written to fixed
/// slots, so the result does not depend on scheduling.
pub fn far_field_matrix(
    ctx: &WaveContext,
    q: &ContrastField,
    dirs: &DirectionSet,
    cfg: &ForwardConfig,
) -> Result<FarFieldMatrix> {
    cfg.validate()?;
    let sc = Scatterer::new(ctx, q, cfg.grid)?;
    let n = dirs.len();
    let columns: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let kind = IncidentKind::PlaneWave {
                direction: dirs.direction(j),
            };
            let (u, _) = sc.solve_window(&kind, cfg).map_err(|e| match e {
                Error::NonConvergence { iterations, residual, .. } => Error::NonConvergence {
                    iterations,
                    residual,
                    column: Some(j),
                },
                other => other,
            })?;
            Ok(sc.far_field(&u, dirs))
        })
        .collect::<Result<_>>()?;
    let kernel = CMat::from_fn(n, n, |i, j| columns[j][i]);
    Ok(FarFieldMatrix::new(*ctx, *dirs, kernel, Some(q.clone())))
}

/// `G∞(x̂_i, z)` for the background medium `1 + q2`: free-space part
/// `exp(−ik x̂_i·z)` plus the far field of the scattered part of a point
/// source solve.
pub fn green_far_field(
    ctx: &WaveContext,
    q2: &ContrastField,
    z: [f64; 2],
    dirs: &DirectionSet,
    cfg: &ForwardConfig,
) -> Result<Vec<Complex64>> {
    let r = cfg.grid.box_radius();
    if z[0].abs() > r || z[1].abs() > r {
        return Err(Error::Precondition(format!("source point ({}, {}) outside the grid box", z[0], z[1])));
    }
    let free: Vec<Complex64> = (0..dirs.len())
        .map(|i| {
            let d = dirs.direction(i);
            Complex64::from_polar(1.0, -ctx.k() * (d[0] * z[0] + d[1] * z[1]))
        })
        .collect();
    let sc = Scatterer::new(ctx, q2, cfg.grid)?;
    if sc.is_empty() {
        return Ok(free);
    }
    let (u, _) = sc.solve_window(&IncidentKind::PointSource { location: z }, cfg)?;
    let scattered = sc.far_field(&u, dirs);
    Ok(free.iter().zip(&scattered).map(|(a, b)| a + b).collect())
}

/// `G∞(x̂_i, z)` at many points through mixed reciprocity,
/// `G∞(x̂, z) = u(z; −x̂)`: one plane-wave solve per direction. The scattered
/// part is interpolated bilinearly from the grid where the truncated kernel
/// is exact and summed directly over the support otherwise; the incident
/// part is exact. Returns one vector over directions per point.
pub fn green_far_fields_reciprocal(
    ctx: &WaveContext,
    q2: &ContrastField,
    points: &[[f64; 2]],
    dirs: &DirectionSet,
    cfg: &ForwardConfig,
) -> Result<Vec<Vec<Complex64>>> {
    let sc = Scatterer::new(ctx, q2, cfg.grid)?;
    let n = dirs.len();
    let k = ctx.k();
    let incident = |i: usize, z: [f64; 2]| {
        let d = dirs.direction(i);
        Complex64::from_polar(1.0, -k * (d[0] * z[0] + d[1] * z[1]))
    };
    if sc.is_empty() {
        return Ok(points.iter().map(|z| (0..n).map(|i| incident(i, *z)).collect()).collect());
    }
    let solves: Vec<(Vec<Complex64>, ComplexField2D)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let d = dirs.direction(i);
            let (u, _) = sc.solve_window(&IncidentKind::PlaneWave { direction: [-d[0], -d[1]] }, cfg)?;
            let qu = u.iter().zip(&sc.q).map(|(u, q)| u * q).collect();
            let field = sc.scattered_field(&u);
            Ok((qu, field))
        })
        .collect::<Result<_>>()?;
    points
        .par_iter()
        .map(|z| {
            if sc.grid_field_exact_at(*z) {
                (0..n)
                    .map(|i| Ok(incident(i, *z) + solves[i].1.interpolate(*z)?))
                    .collect()
            } else {
                let kernel = sc.direct_kernel(*z);
                Ok((0..n)
                    .map(|i| incident(i, *z) + kernel.iter().zip(&solves[i].0).map(|(a, b)| a * b).sum::<Complex64>())
                    .collect())
            }
        })
        .collect()
}
