//! Domain types shared by every stage: wave parameters, direction sets,
//! contrast descriptors and the computational grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half width of the square support `D = [-0.7, 0.7]²` used by the built-in contrasts.
pub const DEFAULT_HALF_WIDTH: f64 = 0.7;

/// Sub-samples per axis used when averaging a contrast over a grid cell.
pub const CELL_SUBSAMPLES: usize = 8;

/// Wavenumber and the derived two-dimensional far field constant `|γ₂|² = 1/(8πk)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveContext {
    k: f64,
}

impl WaveContext {
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::Precondition(format!("wavenumber must be positive, got {k}")));
        }
        Ok(WaveContext { k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn gamma_sq(&self) -> f64 {
        1.0 / (8.0 * PI * self.k)
    }
}

/// `n` equidistributed unit vectors `x̂_j = (cos 2πj/n, sin 2πj/n)` with
/// quadrature weight `2π/n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionSet {
    n: usize,
}

impl DirectionSet {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::Precondition(format!(
                "direction count must be even and at least 8, got {n}"
            )));
        }
        Ok(DirectionSet { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn weight(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn direction(&self, j: usize) -> [f64; 2] {
        let t = 2.0 * PI * j as f64 / self.n as f64;
        [t.cos(), t.sin()]
    }

    pub fn directions(&self) -> Vec<[f64; 2]> {
        (0..self.n).map(|j| self.direction(j)).collect()
    }

    /// Index of `-x̂_j`.
    pub fn antipode(&self, j: usize) -> usize {
        (j + self.n / 2) % self.n
    }
}

/// Closed axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn square(center: [f64; 2], half_width: f64) -> Self {
        Rect {
            x_min: center[0] - half_width,
            x_max: center[0] + half_width,
            y_min: center[1] - half_width,
            y_max: center[1] + half_width,
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x_min && p[0] <= self.x_max && p[1] >= self.y_min && p[1] <= self.y_max
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            x_min: self.x_min.min(other.x_min),
            x_max: self.x_max.max(other.x_max),
            y_min: self.y_min.min(other.y_min),
            y_max: self.y_max.max(other.y_max),
        }
    }

    /// Euclidean distance from `p` to the rectangle (0 inside).
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        let dx = (self.x_min - p[0]).max(0.0).max(p[0] - self.x_max);
        let dy = (self.y_min - p[1]).max(0.0).max(p[1] - self.y_max);
        dx.hypot(dy)
    }

    /// Smallest `a` with the rectangle inside `[-a, a]²`.
    pub fn centered_half_width(&self) -> f64 {
        self.x_min.abs().max(self.x_max.abs()).max(self.y_min.abs()).max(self.y_max.abs())
    }
}

/// How the printed `q_v` formula is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QvReading {
    /// `min(x₁ − 0.7, −x₁) − 0.7`, verbatim.
    #[default]
    Printed,
    /// `min(x₁ − 0.7, −x₁ − 0.7)`, the reading symmetric with the `x₂` term.
    Symmetric,
}

/// Contrast sampled on a regular grid, bilinearly interpolated.
///
/// `values[iy * nx + ix]` is the value at `(x_min + ix·spacing, y_min + iy·spacing)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tabulation {
    pub x_min: f64,
    pub y_min: f64,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl Tabulation {
    fn extent(&self) -> Rect {
        Rect {
            x_min: self.x_min,
            x_max: self.x_min + (self.nx - 1) as f64 * self.spacing,
            y_min: self.y_min,
            y_max: self.y_min + (self.ny - 1) as f64 * self.spacing,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 || !(self.spacing > 0.0) {
            return Err(Error::Precondition("tabulation needs nx, ny >= 2 and positive spacing".into()));
        }
        if self.values.len() != self.nx * self.ny {
            return Err(Error::Precondition(format!(
                "tabulation has {} values, expected {}",
                self.values.len(),
                self.nx * self.ny
            )));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("tabulation values must be finite".into()));
        }
        Ok(())
    }

    fn interpolate(&self, p: [f64; 2]) -> Result<f64> {
        if !self.extent().contains(p) {
            return Err(Error::OutOfTabulationRange { x: p[0], y: p[1] });
        }
        let fx = (p[0] - self.x_min) / self.spacing;
        let fy = (p[1] - self.y_min) / self.spacing;
        let ix = (fx.floor() as usize).min(self.nx - 2);
        let iy = (fy.floor() as usize).min(self.ny - 2);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        let at = |i: usize, j: usize| self.values[j * self.nx + i];
        Ok((1.0 - ty) * ((1.0 - tx) * at(ix, iy) + tx * at(ix + 1, iy))
            + ty * ((1.0 - tx) * at(ix, iy + 1) + tx * at(ix + 1, iy + 1)))
    }
}

/// Real-valued, compactly supported contrast `q` given by a closed-form
/// descriptor. JSON form: `{"type": "<snake_case variant>", ...fields}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ContrastField {
    /// `value · 1_S` with `S` the closed square of the given half width.
    ConstantOnSquare {
        value: f64,
        half_width: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    /// `q_v` on `D = [-0.7, 0.7]²`.
    PaperQv {
        #[serde(default)]
        reading: QvReading,
    },
    /// `q_r` on `D = [-0.7, 0.7]²`.
    PaperQr,
    /// `p(x) = slope · x̂ · (x − anchor) + offset` on `[-a, a]²`, `x̂ = anchor/|anchor|`.
    LinearOnSquare {
        anchor: [f64; 2],
        slope: f64,
        offset: f64,
        half_width: f64,
    },
    /// `0.7 · 1_D − 1.2 · 1_[-0.35, 0.35]²`.
    SignChangingDemo,
    Tabulated(Tabulation),
    /// Pointwise sum of the terms.
    Sum { terms: Vec<ContrastField> },
}

impl ContrastField {
    /// `value · 1_D` with `D = [-0.7, 0.7]²`.
    pub fn constant(value: f64) -> Self {
        ContrastField::ConstantOnSquare {
            value,
            half_width: DEFAULT_HALF_WIDTH,
            center: [0.0, 0.0],
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `q_c = 0.4 · 1_D`.
    pub fn paper_qc() -> Self {
        Self::constant(0.4)
    }

    pub fn paper_qv() -> Self {
        ContrastField::PaperQv {
            reading: QvReading::Printed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ContrastField::ConstantOnSquare { value, half_width, center } => {
                if !value.is_finite() || !(*half_width > 0.0) || !center.iter().all(|c| c.is_finite()) {
                    return Err(Error::Precondition("invalid constant_on_square parameters".into()));
                }
            }
            ContrastField::LinearOnSquare {
                anchor,
                slope,
                offset,
                half_width,
            } => {
                let r = anchor[0].hypot(anchor[1]);
                if !(r > 0.0) || !slope.is_finite() || !offset.is_finite() || !(*half_width > 0.0) {
                    return Err(Error::Precondition("invalid linear_on_square parameters".into()));
                }
            }
            ContrastField::Tabulated(t) => t.validate()?,
            ContrastField::Sum { terms } => {
                if terms.is_empty() {
                    return Err(Error::Precondition("sum contrast needs at least one term".into()));
                }
                for t in terms {
                    t.validate()?;
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Closed rectangle outside of which the contrast vanishes.
    pub fn support_box(&self) -> Rect {
        match self {
            ContrastField::ConstantOnSquare { half_width, center, .. } => Rect::square(*center, *half_width),
            ContrastField::LinearOnSquare { half_width, .. } => Rect::square([0.0, 0.0], *half_width),
            ContrastField::PaperQv { .. } | ContrastField::PaperQr | ContrastField::SignChangingDemo => {
                Rect::square([0.0, 0.0], DEFAULT_HALF_WIDTH)
            }
            ContrastField::Tabulated(t) => t.extent(),
            ContrastField::Sum { terms } => terms
                .iter()
                .map(|t| t.support_box())
                .reduce(|a, b| a.union(&b))
                .unwrap_or(Rect::square([0.0, 0.0], 0.0)),
        }
    }

    /// True when the descriptor is identically zero.
    pub fn is_identically_zero(&self) -> bool {
        match self {
            ContrastField::ConstantOnSquare { value, .. } => *value == 0.0,
            ContrastField::LinearOnSquare { slope, offset, .. } => *slope == 0.0 && *offset == 0.0,
            ContrastField::Tabulated(t) => t.values.iter().all(|v| *v == 0.0),
            ContrastField::Sum { terms } => terms.iter().all(|t| t.is_identically_zero()),
            _ => false,
        }
    }

    /// Pointwise value. Exactly 0 outside [`support_box`](Self::support_box),
    /// except for tabulated contrasts, which reject points outside their grid.
    pub fn evaluate(&self, p: [f64; 2]) -> Result<f64> {
        let inside = |half: f64, c: [f64; 2]| (p[0] - c[0]).abs() <= half && (p[1] - c[1]).abs() <= half;
        let v = match self {
            ContrastField::ConstantOnSquare { value, half_width, center } => {
                if inside(*half_width, *center) {
                    *value
                } else {
                    0.0
                }
            }
            ContrastField::PaperQv { reading } => {
                if inside(DEFAULT_HALF_WIDTH, [0.0, 0.0]) {
                    let (x1, x2) = (p[0], p[1]);
                    let first = match reading {
                        QvReading::Printed => (x1 - 0.7).min(-x1) - 0.7,
                        QvReading::Symmetric => (x1 - 0.7).min(-x1 - 0.7),
                    };
                    let second = (x2 - 0.7).min(-x2 - 0.7);
                    0.4 * first.min(second).abs()
                } else {
                    0.0
                }
            }
            ContrastField::PaperQr => {
                if inside(DEFAULT_HALF_WIDTH, [0.0, 0.0]) {
                    let (x1, x2) = (p[0], p[1]);
                    let m = (x1 - 0.7).min(-x1 - 0.7).min((x2 - 0.7).min(-x2 - 0.7));
                    0.4 * m + 1.0
                } else {
                    0.0
                }
            }
            ContrastField::LinearOnSquare {
                anchor,
                slope,
                offset,
                half_width,
            } => {
                if inside(*half_width, [0.0, 0.0]) {
                    let r = anchor[0].hypot(anchor[1]);
                    let dir = [anchor[0] / r, anchor[1] / r];
                    slope * (dir[0] * (p[0] - anchor[0]) + dir[1] * (p[1] - anchor[1])) + offset
                } else {
                    0.0
                }
            }
            ContrastField::SignChangingDemo => {
                let mut v = 0.0;
                if inside(DEFAULT_HALF_WIDTH, [0.0, 0.0]) {
                    v += 0.7;
                }
                if inside(0.35, [0.0, 0.0]) {
                    v -= 1.2;
                }
                v
            }
            ContrastField::Tabulated(t) => t.interpolate(p)?,
            ContrastField::Sum { terms } => {
                let mut v = 0.0;
                for t in terms {
                    if t.support_box().contains(p) {
                        v += t.evaluate(p)?;
                    }
                }
                v
            }
        };
        Ok(v)
    }

    /// Mean of the contrast over `cell`. The cell is clipped to the support
    /// box first, so indicator-type jumps on the box boundary are integrated
    /// exactly; the clipped part is sampled with `CELL_SUBSAMPLES²` midpoints.
    pub fn cell_average(&self, cell: &Rect) -> Result<f64> {
        match self {
            ContrastField::Sum { terms } => {
                let mut acc = 0.0;
                for t in terms {
                    acc += t.cell_average(cell)?;
                }
                return Ok(acc);
            }
            ContrastField::SignChangingDemo => {
                let outer = ContrastField::constant(0.7).cell_average(cell)?;
                let inner = ContrastField::ConstantOnSquare {
                    value: -1.2,
                    half_width: 0.35,
                    center: [0.0, 0.0],
                }
                .cell_average(cell)?;
                return Ok(outer + inner);
            }
            _ => {}
        }
        let sb = self.support_box();
        let clip = Rect {
            x_min: cell.x_min.max(sb.x_min),
            x_max: cell.x_max.min(sb.x_max),
            y_min: cell.y_min.max(sb.y_min),
            y_max: cell.y_max.min(sb.y_max),
        };
        let (w, h) = (clip.x_max - clip.x_min, clip.y_max - clip.y_min);
        if !(w > 0.0 && h > 0.0) {
            return Ok(0.0);
        }
        let fraction = (w * h) / ((cell.x_max - cell.x_min) * (cell.y_max - cell.y_min));
        let s = CELL_SUBSAMPLES;
        let mut acc = 0.0;
        for sy in 0..s {
            let y = clip.y_min + h * (sy as f64 + 0.5) / s as f64;
            for sx in 0..s {
                let x = clip.x_min + w * (sx as f64 + 0.5) / s as f64;
                acc += self.evaluate([x, y])?;
            }
        }
        Ok(fraction * acc / (s * s) as f64)
    }

    /// Cell averages on every node of `grid` (row-major, `iy·m + ix`).
    pub fn cell_averages(&self, grid: &ComputationalGrid) -> Result<Vec<f64>> {
        let m = grid.m();
        let h = grid.spacing();
        let sb = self.support_box();
        let mut out = vec![0.0; m * m];
        let range = |lo: f64, hi: f64| {
            let first = (((lo + grid.box_radius()) / h) - 1.0).floor().max(0.0) as usize;
            let last = ((((hi + grid.box_radius()) / h) + 1.0).ceil() as usize).min(m - 1);
            first..=last
        };
        for iy in range(sb.y_min, sb.y_max) {
            let cy = grid.coordinate(iy);
            for ix in range(sb.x_min, sb.x_max) {
                let cx = grid.coordinate(ix);
                let cell = Rect::square([cx, cy], 0.5 * h);
                out[iy * m + ix] = self.cell_average(&cell)?;
            }
        }
        Ok(out)
    }
}

/// Pointwise evaluation of a contrast at many points.
pub fn evaluate_contrast(q: &ContrastField, points: &[[f64; 2]]) -> Result<Vec<f64>> {
    points
        .iter()
        .map(|p| {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(Error::Precondition("evaluation point must be finite".into()));
            }
            q.evaluate(*p)
        })
        .collect()
}

/// `q_s = 0.7·1_D − 1.2·1_[-0.35,0.35]²`: positive on `∂D`, negative in the inner square.
pub fn sign_changing_demo() -> ContrastField {
    ContrastField::SignChangingDemo
}

/// Uniform `m × m` grid on `[-R, R]²` with nodes `x_l = -R + l·h`, `h = 2R/m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComputationalGrid {
    box_radius: f64,
    m: usize,
}

impl ComputationalGrid {
    pub fn new(box_radius: f64, m: usize) -> Result<Self> {
        if !(box_radius > 0.0) || !box_radius.is_finite() {
            return Err(Error::Precondition(format!("box radius must be positive, got {box_radius}")));
        }
        if m < 4 || !m.is_power_of_two() {
            return Err(Error::Precondition(format!("grid size must be a power of two >= 4, got {m}")));
        }
        Ok(ComputationalGrid { box_radius, m })
    }

    /// `R_box = 2`, `m = 256`.
    pub fn desk_default() -> Self {
        ComputationalGrid { box_radius: 2.0, m: 256 }
    }

    pub fn box_radius(&self) -> f64 {
        self.box_radius
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.box_radius / self.m as f64
    }

    pub fn coordinate(&self, l: usize) -> f64 {
        -self.box_radius + l as f64 * self.spacing()
    }

    /// Node `(ix, iy)` stored at index `iy·m + ix`.
    pub fn node(&self, index: usize) -> [f64; 2] {
        [self.coordinate(index % self.m), self.coordinate(index / self.m)]
    }

    /// Radius at which the fundamental solution is truncated.
    pub fn truncation_radius(&self) -> f64 {
        self.box_radius
    }

    /// Largest `a` such that a support inside `[-a, a]²` sees no periodisation
    /// wrap-around: all pairwise distances stay below the truncation radius
    /// `T = R_box` and `2a + T ≤ 2R_box`.
    pub fn max_support_half_width(&self) -> f64 {
        self.box_radius / (2.0 * std::f64::consts::SQRT_2)
    }

    pub fn check_fits(&self, support: &Rect) -> Result<()> {
        let a = support.centered_half_width();
        let limit = self.max_support_half_width();
        if a > limit * (1.0 + 1e-12) {
            return Err(Error::Precondition(format!(
                "support half width {a} exceeds the wrap-around-free limit {limit} of a grid with R_box = {}",
                self.box_radius
            )));
        }
        Ok(())
    }
}

/// Complex samples on a [`ComputationalGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField2D {
    pub grid: ComputationalGrid,
    pub values: Vec<Complex64>,
}

impl ComplexField2D {
    pub fn zeros(grid: ComputationalGrid) -> Self {
        ComplexField2D {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.m() * grid.m()],
        }
    }

    /// Bilinear interpolation at an arbitrary point inside the grid.
    pub fn interpolate(&self, p: [f64; 2]) -> Result<Complex64> {
        let g = &self.grid;
        let h = g.spacing();
        let fx = (p[0] + g.box_radius()) / h;
        let fy = (p[1] + g.box_radius()) / h;
        let m = g.m();
        if !(fx >= 0.0 && fy >= 0.0 && fx <= (m - 1) as f64 && fy <= (m - 1) as f64) {
            return Err(Error::Precondition(format!("point ({}, {}) outside the grid", p[0], p[1])));
        }
        let ix = (fx.floor() as usize).min(m - 2);
        let iy = (fy.floor() as usize).min(m - 2);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        let v = |i: usize, j: usize| self.values[j * m + i];
        Ok(v(ix, iy) * ((1.0 - tx) * (1.0 - ty))
            + v(ix + 1, iy) * (tx * (1.0 - ty))
            + v(ix, iy + 1) * ((1.0 - tx) * ty)
            + v(ix + 1, iy + 1) * (tx * ty))
    }
}
