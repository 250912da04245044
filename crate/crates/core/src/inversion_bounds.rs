//! Monotonicity-based bounds on the boundary values of a contrast with known
//! support `D`.
//!
//! Eigenvalues of `A = S_p^H (F_q − F_p)` for a test contrast `p` are counted
//! in an annulus `r_min ≤ |λ| ≤ r_max` by the sign of their real part. When
//! one side is empty the sign of `(q − p)|∂D` is decided; which side maps to
//! which sign is the calibrated [`Orientation`].

use std::fmt;

use log::{info, warn};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{far_field_matrix, ForwardConfig};
use crate::linalg::CMat;
use crate::model::{ContrastField, DirectionSet, Rect, WaveContext};
use crate::operators::{comparison_matrix, FarFieldMatrix};
use crate::spectral::eig_general;

pub const DEFAULT_R_MIN: f64 = 1e-8;
pub const DEFAULT_R_MAX: f64 = 1e-2;
/// Initial magnitude of the trace envelopes `q± = ±1e3`.
pub const DEFAULT_INIT_MAGNITUDE: f64 = 1e3;
pub const DEFAULT_SAMPLES_PER_EDGE: usize = 64;
/// Inward offset used to take the interior trace.
pub const TRACE_OFFSET: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub r_min: f64,
    pub r_max: f64,
}

impl Default for Annulus {
    fn default() -> Self {
        Annulus {
            r_min: DEFAULT_R_MIN,
            r_max: DEFAULT_R_MAX,
        }
    }
}

impl Annulus {
    pub fn new(r_min: f64, r_max: f64) -> Result<Self> {
        if !(r_min > 0.0 && r_min < r_max && r_max.is_finite()) {
            return Err(Error::Precondition(format!("annulus needs 0 < r_min < r_max, got [{r_min}, {r_max}]")));
        }
        Ok(Annulus { r_min, r_max })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        self.r_min <= r && r <= self.r_max
    }
}

/// Numbers of annulus eigenvalues with positive and negative real part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnulusCounts {
    pub m_plus: usize,
    pub m_minus: usize,
}

/// Counts eigenvalues of `a` in the annulus; `Re λ = 0` counts to neither side.
pub fn annulus_counts(a: &CMat, annulus: Annulus) -> Result<AnnulusCounts> {
    Ok(count_eigenvalues(&eig_general(a)?.eigenvalues, annulus))
}

pub fn count_eigenvalues(eigenvalues: &[Complex64], annulus: Annulus) -> AnnulusCounts {
    let mut counts = AnnulusCounts { m_plus: 0, m_minus: 0 };
    for l in eigenvalues.iter().filter(|l| annulus.contains(**l)) {
        if l.re > 0.0 {
            counts.m_plus += 1;
        } else if l.re < 0.0 {
            counts.m_minus += 1;
        }
    }
    counts
}

/// Which count vanishes when the test contrast lies below `q` on `∂D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    PlusVanishesBelow,
    MinusVanishesBelow,
}

impl Orientation {
    pub fn flipped(self) -> Self {
        match self {
            Orientation::PlusVanishesBelow => Orientation::MinusVanishesBelow,
            Orientation::MinusVanishesBelow => Orientation::PlusVanishesBelow,
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::PlusVanishesBelow => "PlusVanishesBelow",
            Orientation::MinusVanishesBelow => "MinusVanishesBelow",
        })
    }
}

impl std::str::FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "PlusVanishesBelow" => Ok(Orientation::PlusVanishesBelow),
            "MinusVanishesBelow" => Ok(Orientation::MinusVanishesBelow),
            other => Err(Error::Precondition(format!("unknown orientation {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// The test contrast lies below `q` on `∂D`.
    TestBelow,
    /// The test contrast lies above `q` on `∂D`.
    TestAbove,
    /// No annulus eigenvalues on either side.
    Indistinguishable,
    /// Both sides populated: the difference changes sign on `∂D`.
    Indeterminate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

pub fn bound_verdict(counts: AnnulusCounts, orientation: Orientation) -> Verdict {
    match (counts.m_plus, counts.m_minus) {
        (0, 0) => Verdict::Indistinguishable,
        (0, _) => match orientation {
            Orientation::PlusVanishesBelow => Verdict::TestBelow,
            Orientation::MinusVanishesBelow => Verdict::TestAbove,
        },
        (_, 0) => match orientation {
            Orientation::PlusVanishesBelow => Verdict::TestAbove,
            Orientation::MinusVanishesBelow => Verdict::TestBelow,
        },
        _ => Verdict::Indeterminate,
    }
}

/// Orientation from a comparison against a known case: `f_ref` has boundary
/// value `b`, `f_probe` is the constant `probe_c ≠ b` on the same support.
pub fn calibrate_from_operators(
    f_ref: &FarFieldMatrix,
    f_probe: &FarFieldMatrix,
    b: f64,
    probe_c: f64,
    annulus: Annulus,
) -> Result<Orientation> {
    if probe_c == b {
        return Err(Error::CalibrationIndeterminate { m_plus: 0, m_minus: 0 });
    }
    let counts = annulus_counts(&comparison_matrix(f_ref, f_probe)?, annulus)?;
    let below = probe_c < b;
    let observed = match (counts.m_plus, counts.m_minus) {
        (0, m) if m > 0 => Orientation::PlusVanishesBelow,
        (p, 0) if p > 0 => Orientation::MinusVanishesBelow,
        _ => {
            return Err(Error::CalibrationIndeterminate {
                m_plus: counts.m_plus,
                m_minus: counts.m_minus,
            })
        }
    };
    // `observed` assumes the probe is below; mirror it otherwise.
    let orientation = if below { observed } else { observed.flipped() };
    info!(
        "calibrated orientation {orientation} from probe c = {probe_c} against b = {b} (M+ = {}, M- = {})",
        counts.m_plus, counts.m_minus
    );
    Ok(orientation)
}

/// Synthesises the reference and probe operators and calibrates.
#[allow(clippy::too_many_arguments)]
pub fn calibrate_orientation(
    ctx: &WaveContext,
    dirs: &DirectionSet,
    cfg: &ForwardConfig,
    reference_q: &ContrastField,
    b: f64,
    probe_c: f64,
    annulus: Annulus,
) -> Result<Orientation> {
    if probe_c == b {
        return Err(Error::CalibrationIndeterminate { m_plus: 0, m_minus: 0 });
    }
    let support = reference_q.support_box();
    let probe = ContrastField::ConstantOnSquare {
        value: probe_c,
        half_width: (support.x_max - support.x_min) / 2.0,
        center: [(support.x_min + support.x_max) / 2.0, (support.y_min + support.y_max) / 2.0],
    };
    let f_ref = far_field_matrix(ctx, reference_q, dirs, cfg)?;
    let f_probe = far_field_matrix(ctx, &probe, dirs, cfg)?;
    calibrate_from_operators(&f_ref, &f_probe, b, probe_c, annulus)
}

/// Far field operators of constant test contrasts `c·1_D`, sorted by `c`.
#[derive(Debug, Clone, Default)]
pub struct ConstantBank {
    entries: Vec<(f64, FarFieldMatrix)>,
}

impl ConstantBank {
    pub fn new(mut entries: Vec<(f64, FarFieldMatrix)>) -> Self {
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        ConstantBank { entries }
    }

    /// Synthesises `c·1_D` operators for each value; `support` is the square `D`.
    pub fn synthesize(
        ctx: &WaveContext,
        dirs: &DirectionSet,
        cfg: &ForwardConfig,
        support: &Rect,
        values: &[f64],
    ) -> Result<Self> {
        let center = [(support.x_min + support.x_max) / 2.0, (support.y_min + support.y_max) / 2.0];
        let half_width = (support.x_max - support.x_min) / 2.0;
        let entries = values
            .iter()
            .map(|&c| {
                let q = ContrastField::ConstantOnSquare {
                    value: c,
                    half_width,
                    center,
                };
                Ok((c, far_field_matrix(ctx, &q, dirs, cfg)?))
            })
            .collect::<Result<_>>()?;
        Ok(Self::new(entries))
    }

    pub fn entries(&self) -> &[(f64, FarFieldMatrix)] {
        &self.entries
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry whose value is within `1e-9` of `c`.
    pub fn get(&self, c: f64) -> Option<&FarFieldMatrix> {
        self.entries.iter().find(|e| (e.0 - c).abs() <= 1e-9).map(|e| &e.1)
    }

    /// Orientation from the bank alone: the middle entry is the reference
    /// and the two extreme entries are probes on either side of it. Both
    /// probes must agree.
    pub fn calibrate(&self, annulus: Annulus) -> Result<Orientation> {
        if self.entries.len() < 3 {
            return Err(Error::Precondition("bank calibration needs at least three constants".into()));
        }
        let (b, f_ref) = &self.entries[self.entries.len() / 2];
        let (lo, f_lo) = &self.entries[0];
        let (hi, f_hi) = &self.entries[self.entries.len() - 1];
        let below = calibrate_from_operators(f_ref, f_lo, *b, *lo, annulus)?;
        let above = calibrate_from_operators(f_ref, f_hi, *b, *hi, annulus)?;
        if below != above {
            return Err(Error::CalibrationIndeterminate { m_plus: 0, m_minus: 0 });
        }
        Ok(below)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrailEntry {
    pub c: f64,
    pub counts: AnnulusCounts,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsResult {
    pub c_star: f64,
    pub c_upper: f64,
    pub trail: Vec<TrailEntry>,
    pub orientation: Orientation,
    pub annulus: Annulus,
}

/// Settings for [`constant_bound_search`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub step: f64,
    pub c_lo: f64,
    pub c_hi: f64,
    pub orientation: Orientation,
    pub annulus: Annulus,
}

struct Search<'a> {
    f_q: &'a FarFieldMatrix,
    bank: &'a ConstantBank,
    cfg: SearchConfig,
    trail: Vec<TrailEntry>,
}

impl Search<'_> {
    /// Verdict at grid index `i`, or `None` outside the bank.
    fn verdict(&mut self, i: i64) -> Result<Option<Verdict>> {
        let c = search_value(&self.cfg, i);
        if let Some(e) = self.trail.iter().find(|e| e.c == c) {
            return Ok(Some(e.verdict));
        }
        let Some(f_c) = self.bank.get(c) else {
            warn!("test constant c = {c} is outside the bank; clamping at the bank edge");
            return Ok(None);
        };
        let counts = annulus_counts(&comparison_matrix(self.f_q, f_c)?, self.cfg.annulus)?;
        let verdict = bound_verdict(counts, self.cfg.orientation);
        self.trail.push(TrailEntry { c, counts, verdict });
        Ok(Some(verdict))
    }

    /// One half of the search. `toward` is the verdict that lets the bound
    /// move inward (`+1` step for the lower bound, `−1` for the upper).
    fn run(&mut self, start: i64, toward: Verdict, dir: i64) -> Result<i64> {
        let mut i = start;
        match self.verdict(i)? {
            Some(v) if v == toward => loop {
                match self.verdict(i + dir)? {
                    Some(v) if v == toward => i += dir,
                    Some(Verdict::Indistinguishable) => return Ok(i + dir),
                    Some(_) => return Ok(i),
                    None => return Ok(i),
                }
            },
            Some(Verdict::Indistinguishable) => Ok(i),
            _ => loop {
                match self.verdict(i - dir)? {
                    Some(v) if v == toward || v == Verdict::Indistinguishable => return Ok(i - dir),
                    Some(_) => i -= dir,
                    None => return Ok(i),
                }
            },
        }
    }
}

/// Constant bounds `c_∗ ≤ q|∂D ≤ c^∗` by stepping test constants from the
/// bank: the lower bound rises while the test stays below `q`, the upper
/// bound falls while it stays above, and an indistinguishable test fixes the
/// bound at that value.
pub fn constant_bound_search(f_q: &FarFieldMatrix, bank: &ConstantBank, cfg: SearchConfig) -> Result<BoundsResult> {
    if !(cfg.step > 0.0) || cfg.c_lo > cfg.c_hi {
        return Err(Error::Precondition("search needs step > 0 and c_lo ≤ c_hi".into()));
    }
    let mut search = Search {
        f_q,
        bank,
        cfg,
        trail: Vec::new(),
    };
    let hi_index = ((cfg.c_hi - cfg.c_lo) / cfg.step).round() as i64;
    let lo = search.run(0, Verdict::TestBelow, 1)?;
    let hi = search.run(hi_index, Verdict::TestAbove, -1)?;
    if search.trail.iter().all(|e| e.verdict == Verdict::Indeterminate) {
        return Err(Error::NoSignDefinite);
    }
    let mut trail = search.trail;
    trail.sort_by(|a, b| a.c.total_cmp(&b.c));
    let (c_star, c_upper) = (search_value(&cfg, lo), search_value(&cfg, hi));
    if c_star > c_upper {
        warn!("lower bound {c_star} exceeds upper bound {c_upper}; data are inconsistent at this resolution");
    }
    Ok(BoundsResult {
        c_star,
        c_upper,
        trail,
        orientation: cfg.orientation,
        annulus: cfg.annulus,
    })
}

/// `c_lo + i·step`, rounded to 12 decimals so that bank lookups match.
fn search_value(cfg: &SearchConfig, i: i64) -> f64 {
    ((cfg.c_lo + cfg.step * i as f64) * 1e12).round() / 1e12
}

/// Verdicts for every constant in the bank, in increasing `c`.
pub fn constant_sweep(
    f_q: &FarFieldMatrix,
    bank: &ConstantBank,
    orientation: Orientation,
    annulus: Annulus,
) -> Result<Vec<TrailEntry>> {
    bank.entries()
        .par_iter()
        .map(|(c, f_c)| {
            let counts = annulus_counts(&comparison_matrix(f_q, f_c)?, annulus)?;
            Ok(TrailEntry {
                c: *c,
                counts,
                verdict: bound_verdict(counts, orientation),
            })
        })
        .collect()
}

/// `p(x) = s · x̂_j·(x − x_j) + o` on the square `[−a, a]²`, with anchor
/// `x_j ∈ ∂D` and `x̂_j = x_j / |x_j|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearContrast {
    pub anchor: [f64; 2],
    pub slope: f64,
    pub offset: f64,
    pub half_width: f64,
}

impl LinearContrast {
    pub fn value(&self, x: [f64; 2]) -> f64 {
        let r = self.anchor[0].hypot(self.anchor[1]);
        let d = [self.anchor[0] / r, self.anchor[1] / r];
        self.slope * (d[0] * (x[0] - self.anchor[0]) + d[1] * (x[1] - self.anchor[1])) + self.offset
    }

    pub fn contrast(&self) -> ContrastField {
        ContrastField::LinearOnSquare {
            anchor: self.anchor,
            slope: self.slope,
            offset: self.offset,
            half_width: self.half_width,
        }
    }
}

/// Point at arclength `s` on the boundary of `[−a, a]²`, starting at `(a, 0)`
/// and running counter-clockwise.
fn perimeter_point_from_east(a: f64, s: f64) -> [f64; 2] {
    let side = 2.0 * a;
    let s = s.rem_euclid(4.0 * side);
    if s <= a {
        [a, s]
    } else if s <= a + side {
        [a - (s - a), a]
    } else if s <= a + 2.0 * side {
        [-a, a - (s - a - side)]
    } else if s <= a + 3.0 * side {
        [-a + (s - a - 2.0 * side), -a]
    } else {
        [a, -a + (s - a - 3.0 * side)]
    }
}

/// `n_points` equidistributed anchors on `∂[−a, a]²`, the first at `(a, 0)`.
pub fn boundary_anchors(n_points: usize, a: f64) -> Vec<[f64; 2]> {
    let perimeter = 8.0 * a;
    (0..n_points)
        .map(|j| perimeter_point_from_east(a, perimeter * j as f64 / n_points as f64))
        .collect()
}

/// Uniform values `lo + i·(hi − lo)/(count − 1)` computed without drift.
pub fn uniform_values(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let d = (count - 1) as f64;
    (0..count).map(|i| (lo * (d - i as f64) + hi * i as f64) / d).collect()
}

/// Eleven slopes `−2, −1.6, …, 2`.
pub fn default_slopes() -> Vec<f64> {
    (0..11).map(|i| (4 * i as i64 - 20) as f64 / 10.0).collect()
}

/// Offsets `0, 0.1, …, 1`.
pub fn default_offsets() -> Vec<f64> {
    (0..11).map(|i| i as f64 / 10.0).collect()
}

/// Slopes `−2, −1, 0, 1, 2`.
pub fn reduced_slopes() -> Vec<f64> {
    vec![-2.0, -1.0, 0.0, 1.0, 2.0]
}

/// Offsets `0, 0.2, …, 1`.
pub fn reduced_offsets() -> Vec<f64> {
    (0..6).map(|i| i as f64 / 5.0).collect()
}

/// Cross product of anchors × slopes × offsets, anchors outermost.
pub fn linear_test_family(n_points: usize, slopes: &[f64], offsets: &[f64], half_width: f64) -> Result<Vec<LinearContrast>> {
    if n_points == 0 || slopes.is_empty() || offsets.is_empty() || !(half_width > 0.0) {
        return Err(Error::Precondition("linear family needs positive sizes and half-width".into()));
    }
    let mut out = Vec::with_capacity(n_points * slopes.len() * offsets.len());
    for anchor in boundary_anchors(n_points, half_width) {
        for &slope in slopes {
            for &offset in offsets {
                out.push(LinearContrast {
                    anchor,
                    slope,
                    offset,
                    half_width,
                });
            }
        }
    }
    Ok(out)
}

/// A boundary sample with its arclength coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub s: f64,
    pub point: [f64; 2],
}

/// `4·per_edge` samples on the boundary of a square, corners shared, starting
/// at the lower-left corner and running counter-clockwise.
pub fn boundary_samples(square: &Rect, per_edge: usize) -> Vec<BoundarySample> {
    let side = square.x_max - square.x_min;
    let corners = [
        [square.x_min, square.y_min],
        [square.x_max, square.y_min],
        [square.x_max, square.y_max],
        [square.x_min, square.y_max],
    ];
    let mut out = Vec::with_capacity(4 * per_edge);
    for e in 0..4 {
        let (p, q) = (corners[e], corners[(e + 1) % 4]);
        for i in 0..per_edge {
            let t = i as f64 / per_edge as f64;
            out.push(BoundarySample {
                s: side * (e as f64 + t),
                point: [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])],
            });
        }
    }
    out
}

/// Interior trace of `q` on the boundary of its (square) support: values at
/// the samples moved inward by [`TRACE_OFFSET`].
pub fn boundary_trace(q: &ContrastField, per_edge: usize) -> Result<Vec<(BoundarySample, f64)>> {
    let sb = q.support_box();
    let c = [(sb.x_min + sb.x_max) / 2.0, (sb.y_min + sb.y_max) / 2.0];
    boundary_samples(&sb, per_edge)
        .into_iter()
        .map(|b| {
            let inward = |x: f64, m: f64| x - TRACE_OFFSET * (x - m).signum();
            let p = [inward(b.point[0], c[0]), inward(b.point[1], c[1])];
            Ok((b, q.evaluate(p)?))
        })
        .collect()
}

/// Envelopes `q⁻ ≤ q|∂D ≤ q⁺` on boundary samples from linear test contrasts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceBounds {
    pub boundary_samples: Vec<BoundarySample>,
    pub q_minus: Vec<f64>,
    pub q_plus: Vec<f64>,
    /// Family index attaining `q⁻` and `q⁺` per sample; `None` while the
    /// initial value stands.
    pub contributors: Vec<[Option<usize>; 2]>,
    pub orientation: Orientation,
    pub annulus: Annulus,
}

/// Slack for `q⁻ ≤ q⁺` when two members touch at the same value.
pub const CROSSING_TOL: f64 = 1e-12;

impl TraceBounds {
    /// Sample indices where `q⁻ > q⁺ + CROSSING_TOL`. Members whose sign
    /// change is confined near a corner can be accepted on both sides.
    pub fn crossed(&self) -> Vec<usize> {
        (0..self.q_minus.len())
            .filter(|&i| self.q_minus[i] > self.q_plus[i] + CROSSING_TOL)
            .collect()
    }
}

/// Refines `±init_magnitude` by every accepted family member: `TestAbove`
/// lowers `q⁺` to `min(p, q⁺)`, `TestBelow` raises `q⁻` to `max(p, q⁻)`.
pub fn linear_refinement(
    f_q: &FarFieldMatrix,
    bank: &[(LinearContrast, FarFieldMatrix)],
    orientation: Orientation,
    annulus: Annulus,
    init_magnitude: f64,
    per_edge: usize,
) -> Result<TraceBounds> {
    let Some((first, _)) = bank.first() else {
        return Err(Error::Precondition("linear family bank is empty".into()));
    };
    let a = first.half_width;
    let samples = boundary_samples(&Rect::square([0.0, 0.0], a), per_edge);
    let verdicts = bank
        .par_iter()
        .map(|(_, f_p)| Ok(bound_verdict(annulus_counts(&comparison_matrix(f_q, f_p)?, annulus)?, orientation)))
        .collect::<Result<Vec<Verdict>>>()?;
    let mut q_minus = vec![-init_magnitude; samples.len()];
    let mut q_plus = vec![init_magnitude; samples.len()];
    let mut contributors = vec![[None, None]; samples.len()];
    let mut accepted = 0;
    for (idx, ((p, _), verdict)) in bank.iter().zip(&verdicts).enumerate() {
        match verdict {
            Verdict::TestAbove => {
                accepted += 1;
                for (k, s) in samples.iter().enumerate() {
                    let v = p.value(s.point);
                    if v < q_plus[k] {
                        q_plus[k] = v;
                        contributors[k][1] = Some(idx);
                    }
                }
            }
            Verdict::TestBelow => {
                accepted += 1;
                for (k, s) in samples.iter().enumerate() {
                    let v = p.value(s.point);
                    if v > q_minus[k] {
                        q_minus[k] = v;
                        contributors[k][0] = Some(idx);
                    }
                }
            }
            other => info!("family member {idx} skipped: {other}"),
        }
    }
    if accepted == 0 {
        return Err(Error::NoSignDefinite);
    }
    let bounds = TraceBounds {
        boundary_samples: samples,
        q_minus,
        q_plus,
        contributors,
        orientation,
        annulus,
    };
    let crossed = bounds.crossed();
    if !crossed.is_empty() {
        warn!("q- exceeds q+ at {} of {} boundary samples", crossed.len(), bounds.q_minus.len());
    }
    Ok(bounds)
}

/// Synthesises far field operators for each family member.
pub fn synthesize_linear_bank(
    ctx: &WaveContext,
    dirs: &DirectionSet,
    cfg: &ForwardConfig,
    family: &[LinearContrast],
) -> Result<Vec<(LinearContrast, FarFieldMatrix)>> {
    family
        .iter()
        .map(|p| Ok((*p, far_field_matrix(ctx, &p.contrast(), dirs, cfg)?)))
        .collect()
}
