//! Independent oracles and fixtures shared by the integration tests.

#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scatterbound::forward::{far_field_matrix, ForwardConfig};
use scatterbound::inversion_bounds::{
    linear_test_family, reduced_offsets, reduced_slopes, synthesize_linear_bank, uniform_values, ConstantBank,
    LinearContrast,
};
use scatterbound::io;
use scatterbound::linalg::CMat;
use scatterbound::model::{ContrastField, DirectionSet, Rect, WaveContext};
use scatterbound::operators::FarFieldMatrix;
use scatterbound::spectral::{OperatorSpectrum, PicardExponent};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Neumaier-compensated sum.
fn compensated(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for t in terms {
        let u = s + t;
        c += if s.abs() >= t.abs() { (s - u) + t } else { (t - u) + s };
        s = u;
    }
    s + c
}

/// `∫_a^b f` by double-exponential (tanh-sinh) quadrature.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let h = 1.0 / 256.0;
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    compensated((-1024i32..=1024).filter_map(|k| {
        let t = k as f64 * h;
        let u = 0.5 * PI * t.sinh();
        let x = u.tanh();
        let w = 0.5 * PI * t.cosh() / (u.cosh() * u.cosh());
        if w < 1e-300 || x.abs() >= 1.0 {
            return None;
        }
        Some(h * half * w * f(mid + half * x))
    }))
}

/// `J_n(x) = (1/2π) ∫_0^{2π} cos(nτ − x sin τ) dτ`, trapezoid rule on the
/// periodic integrand.
pub fn bessel_j_integral(n: u32, x: f64) -> f64 {
    let m = 1024;
    compensated((0..m).map(|i| {
        let t = 2.0 * PI * i as f64 / m as f64;
        (n as f64 * t - x * t.sin()).cos()
    })) / m as f64
}

/// `Y_n(x) = (1/π) ∫_0^π sin(x sin θ − nθ) dθ
///         − (1/π) ∫_0^∞ (e^{nt} + (−1)^n e^{−nt}) e^{−x sinh t} dt`.
pub fn bessel_y_integral(n: u32, x: f64) -> f64 {
    let nf = n as f64;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let first = tanh_sinh(|t| (x * t.sin() - nf * t).sin(), 0.0, PI);
    let upper = (60.0 / x).asinh() + 1.0;
    let second = tanh_sinh(|t| ((nf * t).exp() + sign * (-nf * t).exp()) * (-x * t.sinh()).exp(), 0.0, upper);
    (first - second) / PI
}

/// Ascending series for `J0`, `J1`, `Y0`, `Y1` with compensated summation;
/// accurate to about 1e-14 for `0 < x ≤ 6`.
pub fn bessel_series(x: f64) -> [f64; 4] {
    let q = x * x / 4.0;
    let terms = 60;
    let mut a = vec![1.0f64; terms];
    for k in 1..terms {
        a[k] = -a[k - 1] * q / (k * k) as f64;
    }
    let mut harmonic = vec![0.0f64; terms + 1];
    for k in 1..=terms {
        harmonic[k] = harmonic[k - 1] + 1.0 / k as f64;
    }
    let j0 = compensated(a.iter().copied());
    // (x/2)^{2k+1} (−1)^k / (k!(k+1)!) = a_k · (x/2) / (k+1).
    let b: Vec<f64> = (0..terms).map(|k| a[k] * x / 2.0 / (k + 1) as f64).collect();
    let j1 = compensated(b.iter().copied());
    let log = (x / 2.0).ln() + EULER_GAMMA;
    let y0 = 2.0 / PI * (log * j0 - compensated((1..terms).map(|k| a[k] * harmonic[k])));
    let y1 = 2.0 / PI * log * j1
        - 2.0 / (PI * x)
        - compensated((0..terms).map(|k| b[k] * (harmonic[k] + harmonic[k + 1]))) / PI;
    [j0, j1, y0, y1]
}

/// Picard sum written as a plain loop over eigenpairs.
pub fn picard_loop(spec: &OperatorSpectrum, rhs: &[Complex64], alpha: f64, exponent: PicardExponent) -> f64 {
    let n = rhs.len();
    let w = 2.0 * PI / n as f64;
    let mut total = 0.0;
    for j in 0..spec.eigenvalues.len() {
        let mut c = Complex64::new(0.0, 0.0);
        for i in 0..n {
            c += rhs[i] * spec.eigenvectors[(i, j)].conj();
        }
        c *= w;
        let modulus = spec.eigenvalues[j].norm();
        let denom = match exponent {
            PicardExponent::One => modulus,
            PicardExponent::Half => modulus.sqrt(),
        } + alpha;
        total += c.norm_sqr() / denom;
    }
    total
}

pub fn random_matrix(n: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CMat::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn median(mut v: Vec<f64>) -> f64 {
    assert!(!v.is_empty());
    v.sort_by(|a, b| a.total_cmp(b));
    v[v.len() / 2]
}

/// Analytic Born far field of `c·1_[−a,a]²`:
/// `k² c ∫ exp(ik(θ − x̂)·y) dy`.
pub fn born_far_field(k: f64, c: f64, a: f64, dirs: &DirectionSet) -> CMat {
    let g = |t: f64| if t.abs() < 1e-12 { 2.0 * a } else { 2.0 * (a * t).sin() / t };
    CMat::from_fn(dirs.len(), dirs.len(), |i, j| {
        let (x, th) = (dirs.direction(i), dirs.direction(j));
        Complex64::new(k * k * c * g(k * (th[0] - x[0])) * g(k * (th[1] - x[1])), 0.0)
    })
}

/// Distance along `∂[−a,a]²` from arclength `s` to the nearest corner.
pub fn corner_distance(s: f64, a: f64) -> f64 {
    let side = 2.0 * a;
    let r = s.rem_euclid(side);
    r.min(side - r)
}

pub fn reference_setup() -> (WaveContext, DirectionSet, ForwardConfig) {
    (
        WaveContext::new(2.0 * PI).unwrap(),
        DirectionSet::new(32).unwrap(),
        ForwardConfig::default(),
    )
}

fn cache_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("scatterbound-cache").join(name)
}

/// The constant bank `c = −0.4, −0.3, …, 1.5` on `[−0.7, 0.7]²` at the reference
/// setup, cached across test runs.
pub fn reference_constant_bank() -> &'static ConstantBank {
    static BANK: OnceLock<ConstantBank> = OnceLock::new();
    BANK.get_or_init(load_constant_bank)
}

fn load_constant_bank() -> ConstantBank {
    let dir = cache_dir("const-k2pi-n32-m256");
    if let Ok(bank) = io::read_constant_bank(&dir) {
        if bank.len() == 20 {
            return bank;
        }
    }
    let (ctx, dirs, cfg) = reference_setup();
    let bank = ConstantBank::synthesize(&ctx, &dirs, &cfg, &Rect::square([0.0, 0.0], 0.7), &uniform_values(-0.4, 1.5, 20))
        .unwrap();
    io::write_constant_bank(&dir, &bank).unwrap();
    bank
}

/// The reduced linear family (12 × 5 × 6) at the reference setup, cached.
pub fn reduced_linear_bank() -> &'static [(LinearContrast, FarFieldMatrix)] {
    static BANK: OnceLock<Vec<(LinearContrast, FarFieldMatrix)>> = OnceLock::new();
    BANK.get_or_init(load_linear_bank)
}

fn load_linear_bank() -> Vec<(LinearContrast, FarFieldMatrix)> {
    let dir = cache_dir("linear-reduced-k2pi-n32-m256");
    let family = linear_test_family(12, &reduced_slopes(), &reduced_offsets(), 0.7).unwrap();
    if let Ok(bank) = io::read_linear_bank(&dir) {
        if bank.len() == family.len() && bank.iter().zip(&family).all(|(b, f)| b.0 == *f) {
            return bank;
        }
    }
    let (ctx, dirs, cfg) = reference_setup();
    let bank = synthesize_linear_bank(&ctx, &dirs, &cfg, &family).unwrap();
    io::write_linear_bank(&dir, &bank).unwrap();
    bank
}

pub fn reference_operator(q: &ContrastField) -> FarFieldMatrix {
    let (ctx, dirs, cfg) = reference_setup();
    far_field_matrix(&ctx, q, &dirs, &cfg).unwrap()
}
