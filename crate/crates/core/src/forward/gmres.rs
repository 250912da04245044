//! Restarted GMRES for complex, matrix-free operators.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy)]
pub struct GmresConfig {
    pub restart: usize,
    pub max_iterations: usize,
    pub tol: f64,
}

impl Default for GmresConfig {
    fn default() -> Self {
        GmresConfig {
            restart: 50,
            max_iterations: 1000,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Complex Givens rotation zeroing `b` in `(a, b)`: returns `(c, s, r)` with
/// `[c  s; -s̄  c] [a; b] = [r; 0]`, `c` real.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0), a);
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb, Complex64::new(nb, 0.0));
    }
    let scale = na.hypot(nb);
    let c = na / scale;
    let phase = a / na;
    let s = phase * b.conj() / scale;
    (c, s, phase * scale)
}

/// Solves `A x = b` starting from `x`. `apply(v, out)` writes `A v` into `out`.
/// The residual is relative to `‖b‖`; a zero right-hand side returns at once.
pub fn gmres<F>(mut apply: F, b: &[Complex64], x: &mut [Complex64], cfg: &GmresConfig) -> GmresOutcome
where
    F: FnMut(&[Complex64], &mut [Complex64]),
{
    let n = b.len();
    assert_eq!(x.len(), n);
    let zero = Complex64::new(0.0, 0.0);
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = zero);
        return GmresOutcome {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let restart = cfg.restart.max(1);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(restart + 1);
    let mut hess = vec![vec![zero; restart]; restart + 1];
    let mut cs = vec![0.0; restart];
    let mut sn = vec![zero; restart];
    let mut g = vec![zero; restart + 1];
    let mut w = vec![zero; n];
    let mut iterations = 0;

    loop {
        apply(x, &mut w);
        let r: Vec<Complex64> = b.iter().zip(&w).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        let rel = beta / bnorm;
        if rel <= cfg.tol {
            return GmresOutcome {
                iterations,
                relative_residual: rel,
                converged: true,
            };
        }
        if iterations >= cfg.max_iterations {
            return GmresOutcome {
                iterations,
                relative_residual: rel,
                converged: false,
            };
        }
        basis.clear();
        basis.push(r.iter().map(|v| v / beta).collect());
        g.iter_mut().for_each(|v| *v = zero);
        g[0] = Complex64::new(beta, 0.0);

        let mut inner = 0;
        while inner < restart && iterations < cfg.max_iterations {
            apply(&basis[inner], &mut w);
            // Modified Gram–Schmidt, applied twice for stability at tight tolerances.
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let hij = dot(v, &w);
                    hess[i][inner] += hij;
                    w.iter_mut().zip(v).for_each(|(wk, vk)| *wk -= hij * vk);
                }
            }
            let hnext = norm(&w);
            hess[inner + 1][inner] = Complex64::new(hnext, 0.0);
            for i in 0..inner {
                let (a, bb) = (hess[i][inner], hess[i + 1][inner]);
                hess[i][inner] = a * cs[i] + sn[i] * bb;
                hess[i + 1][inner] = -sn[i].conj() * a + bb * cs[i];
            }
            let (c, s, rr) = givens(hess[inner][inner], hess[inner + 1][inner]);
            cs[inner] = c;
            sn[inner] = s;
            hess[inner][inner] = rr;
            hess[inner + 1][inner] = zero;
            let gi = g[inner];
            g[inner] = gi * c;
            g[inner + 1] = -s.conj() * gi;
            iterations += 1;
            inner += 1;
            if g[inner].norm() / bnorm <= cfg.tol || hnext == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / hnext).collect());
        }

        // Back substitution on the triangular Hessenberg factor.
        let mut y = vec![zero; inner];
        for i in (0..inner).rev() {
            let mut acc = g[i];
            for j in i + 1..inner {
                acc -= hess[i][j] * y[j];
            }
            y[i] = acc / hess[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            x.iter_mut().zip(&basis[j]).for_each(|(xk, vk)| *xk += yj * vk);
        }
        for row in hess.iter_mut() {
            row.iter_mut().for_each(|v| *v = zero);
        }
    }
}
