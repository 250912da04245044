//! Cylinder Bessel functions of order 0 and 1 and the Hankel function of the
//! first kind.
//!
//! Three evaluation regimes are stitched together:
//!
//! * `x <= SERIES_MAX`: ascending power series (no significant cancellation),
//! * `SERIES_MAX < x <= ASYMPTOTIC_MIN`: Miller backward recurrence normalised
//!   with `J0 + 2 Σ J_2k = 1`, and Neumann series for `Y0`/`Y1`,
//! * `x > ASYMPTOTIC_MIN`: Hankel asymptotic expansion, truncated at its
//!   smallest term (below 1e-17 in this regime).
//!
//! Absolute accuracy is better than 1e-13 on `(0, 1e3]`.

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub(crate) const SERIES_MAX: f64 = 8.0;
pub(crate) const ASYMPTOTIC_MIN: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselKind {
    J,
    Y,
}

/// Order of a cylinder function. Only orders 0 and 1 are needed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CylOrder {
    Zero,
    One,
}

impl CylOrder {
    pub fn from_index(order: u32) -> Result<Self> {
        match order {
            0 => Ok(CylOrder::Zero),
            1 => Ok(CylOrder::One),
            _ => Err(Error::Domain(format!("cylinder order {order} not supported (0 or 1)"))),
        }
    }
}

/// Values of J0, J1, Y0, Y1 at a single positive argument.
#[derive(Debug, Clone, Copy)]
pub struct Cyl01 {
    pub j0: f64,
    pub j1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Cyl01 {
    pub fn h0(&self) -> Complex64 {
        Complex64::new(self.j0, self.y0)
    }

    pub fn h1(&self) -> Complex64 {
        Complex64::new(self.j1, self.y1)
    }
}

/// Standard Bessel function of the first (`J`) or second (`Y`) kind.
pub fn cyl_bessel(kind: BesselKind, order: CylOrder, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("non-finite Bessel argument {x}")));
    }
    match kind {
        BesselKind::J => {
            let (j0, j1) = bessel_j01(x.abs());
            Ok(match order {
                CylOrder::Zero => j0,
                CylOrder::One => {
                    if x < 0.0 {
                        -j1
                    } else {
                        j1
                    }
                }
            })
        }
        BesselKind::Y => {
            if x <= 0.0 {
                return Err(Error::Domain(format!("Y is undefined for x = {x} <= 0")));
            }
            let v = cyl01(x);
            Ok(match order {
                CylOrder::Zero => v.y0,
                CylOrder::One => v.y1,
            })
        }
    }
}

/// Hankel function of the first kind `H = J + iY`.
pub fn hankel1(order: CylOrder, x: f64) -> Result<Complex64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Hankel function requires x > 0, got {x}")));
    }
    let v = cyl01(x);
    Ok(match order {
        CylOrder::Zero => v.h0(),
        CylOrder::One => v.h1(),
    })
}

/// J0 and J1 for `x >= 0`.
pub fn bessel_j01(x: f64) -> (f64, f64) {
    debug_assert!(x >= 0.0);
    if x <= SERIES_MAX {
        series_j01(x)
    } else if x <= ASYMPTOTIC_MIN {
        let m = MillerTable::new(x);
        (m.j[0], m.j[1])
    } else {
        let v = asymptotic01(x);
        (v.j0, v.j1)
    }
}

/// All four functions at `x > 0`. Callers guarantee positivity.
pub fn cyl01(x: f64) -> Cyl01 {
    debug_assert!(x > 0.0);
    if x <= SERIES_MAX {
        series01(x)
    } else if x <= ASYMPTOTIC_MIN {
        MillerTable::new(x).cyl01()
    } else {
        asymptotic01(x)
    }
}

fn series_j01(x: f64) -> (f64, f64) {
    let t = -0.25 * x * x;
    let mut term0 = 1.0;
    let mut term1 = 0.5 * x;
    let mut j0 = term0;
    let mut j1 = term1;
    for k in 1..200 {
        let kf = k as f64;
        term0 *= t / (kf * kf);
        term1 *= t / (kf * (kf + 1.0));
        j0 += term0;
        j1 += term1;
        if term0.abs() < 1e-18 * j0.abs().max(1e-300) && term1.abs() < 1e-18 {
            break;
        }
    }
    (j0, j1)
}

/// Ascending series for all four functions.
///
/// Y0 = (2/π)[(ln(x/2) + γ) J0 + Σ_{k≥1} (-1)^{k+1} H_k (x²/4)^k / (k!)²]
/// Y1 = (2/π) J1 ln(x/2) − 2/(πx)
///      − (1/π) Σ_{k≥0} (-1)^k (ψ(k+1) + ψ(k+2)) (x/2)^{2k+1} / (k!(k+1)!)
fn series01(x: f64) -> Cyl01 {
    let (j0, j1) = series_j01(x);
    let half = 0.5 * x;
    let q = half * half;
    let ln_half = half.ln();

    // Y0 tail
    let mut pow_term = 1.0; // (x²/4)^k / (k!)²
    let mut harmonic = 0.0;
    let mut tail0 = 0.0;
    // Y1 tail: ψ(k+1) + ψ(k+2) = 2 H_k + 1/(k+1) − 2γ
    let mut pow1 = half; // (x/2)^{2k+1}/(k!(k+1)!)
    let mut tail1 = (1.0 - 2.0 * EULER_GAMMA) * pow1;
    for k in 1..200 {
        let kf = k as f64;
        pow_term *= q / (kf * kf);
        harmonic += 1.0 / kf;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let d0 = sign * harmonic * pow_term;
        tail0 += d0;

        pow1 *= q / (kf * (kf + 1.0));
        let psi_sum = 2.0 * harmonic + 1.0 / (kf + 1.0) - 2.0 * EULER_GAMMA;
        let d1 = -sign * psi_sum * pow1;
        tail1 += d1;
        if d0.abs() < 1e-18 && d1.abs() < 1e-18 {
            break;
        }
    }
    let y0 = FRAC_2_PI * ((ln_half + EULER_GAMMA) * j0 + tail0);
    let y1 = FRAC_2_PI * j1 * ln_half - FRAC_2_PI / x - tail1 / PI;
    Cyl01 { j0, j1, y0, y1 }
}

/// Normalised J_n(x), n = 0..=top, from backward recurrence.
struct MillerTable {
    x: f64,
    j: Vec<f64>,
}

impl MillerTable {
    fn new(x: f64) -> Self {
        // J_n(x) ~ (ex/2n)^n: n = x + 50 puts the start far below 1e-20.
        let mut top = (x as usize) + 50;
        if top % 2 == 1 {
            top += 1;
        }
        let mut j = vec![0.0; top + 2];
        j[top] = 1e-30;
        for n in (1..=top).rev() {
            j[n - 1] = (2.0 * n as f64 / x) * j[n] - j[n + 1];
        }
        let mut norm = j[0];
        for n in (2..=top).step_by(2) {
            norm += 2.0 * j[n];
        }
        for v in j.iter_mut() {
            *v /= norm;
        }
        MillerTable { x, j }
    }

    /// Neumann series for Y0 and its derivative for Y1.
    ///
    /// Y0 = (2/π)(ln(x/2)+γ) J0 − (4/π) Σ (−1)^k J_2k / k
    /// Y1 = (2/π)[(ln(x/2)+γ) J1 − J0/x] + (2/π) Σ (−1)^k (J_{2k−1} − J_{2k+1}) / k
    fn cyl01(&self) -> Cyl01 {
        let x = self.x;
        let j = &self.j;
        let top = j.len() - 2;
        let lg = (0.5 * x).ln() + EULER_GAMMA;
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        let mut k = 1;
        while 2 * k < top {
            let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
            let kf = k as f64;
            s0 += sign * j[2 * k] / kf;
            s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / kf;
            k += 1;
        }
        let y0 = FRAC_2_PI * lg * j[0] - 2.0 * FRAC_2_PI * s0;
        let y1 = FRAC_2_PI * (lg * j[1] - j[0] / x) + FRAC_2_PI * s1;
        Cyl01 { j0: j[0], j1: j[1], y0, y1 }
    }
}

/// Hankel's expansion: returns (P, Q) for order ν with μ = 4ν².
fn hankel_pq(mu: f64, x: f64) -> (f64, f64) {
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0; // a_k / x^k including sign handling below
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= (mu - odd * odd) / (kf * 8.0 * x);
        if a.abs() >= prev {
            break;
        }
        prev = a.abs();
        // k odd contributes to Q, k even to P; signs alternate in pairs.
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    (p, q)
}

fn asymptotic01(x: f64) -> Cyl01 {
    let scale = (FRAC_2_PI / x).sqrt();
    let (p0, q0) = hankel_pq(0.0, x);
    let (p1, q1) = hankel_pq(4.0, x);
    let (s, c) = x.sin_cos();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    // χ0 = x − π/4, χ1 = x − 3π/4
    let (s0, c0) = (r * (s - c), r * (c + s));
    let (s1, c1) = (-r * (s + c), r * (s - c));
    Cyl01 {
        j0: scale * (p0 * c0 - q0 * s0),
        j1: scale * (p1 * c1 - q1 * s1),
        y0: scale * (p0 * s0 + q0 * c0),
        y1: scale * (p1 * s1 + q1 * c1),
    }
}
