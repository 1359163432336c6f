//! Quadrature rules and log-domain accumulation helpers.
//!
//! Everything here is deterministic and allocation-light: rules are built
//! once and reused across many integrand evaluations. Gauss–Hermite is in
//! the probabilists' convention (`E[f(Z)] ≈ Σ wᵢ f(zᵢ)` for `Z ~ N(0,1)`),
//! which is what the smoothing and entropy integrals want.

use crate::error::{Error, Result};

/// Numerically stable `log Σ exp(xᵢ)`.
///
/// Empty input returns `-∞`; a single `-∞` term is skipped rather than
/// poisoning the sum.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for &x in xs {
        if x > max {
            max = x;
        }
    }
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// `log Σ exp(f(i))` over `0..len` without materializing the terms.
pub fn logsumexp_by(len: usize, mut f: impl FnMut(usize) -> f64) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for i in 0..len {
        let v = f(i);
        if v > max {
            max = v;
        }
    }
    if !max.is_finite() {
        return max;
    }
    let mut sum = 0.0;
    for i in 0..len {
        sum += (f(i) - max).exp();
    }
    max + sum.ln()
}

/// Gauss–Hermite rule in probabilists' form: `E[f(Z)] ≈ Σ wᵢ f(zᵢ)`.
///
/// Nodes and weights are built by Newton iteration on the orthonormal
/// Hermite recurrence; the weights come out of the Christoffel function, so
/// they are positive and sum to one by construction.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 || order > 512 {
            return Err(Error::invalid(format!(
                "Gauss-Hermite order must be in 1..=512, got {order}"
            )));
        }
        // Orthonormal polynomials for the physicists' weight exp(-x^2):
        //   sqrt((k+1)/2) p_{k+1} = x p_k - sqrt(k/2) p_{k-1},  p_0 = pi^{-1/4}.
        let n = order;
        let eval = |x: f64| -> (f64, f64) {
            // returns (p_n(x), sum_{k<n} p_k(x)^2)
            let mut pkm1 = 0.0f64;
            let mut pk = std::f64::consts::PI.powf(-0.25);
            let mut norm = 0.0f64;
            for k in 0..n {
                norm += pk * pk;
                let pkp1 = (x * pk - (k as f64 / 2.0).sqrt() * pkm1) / (((k + 1) as f64) / 2.0).sqrt();
                pkm1 = pk;
                pk = pkp1;
            }
            (pk, norm)
        };
        let deriv = |x: f64| -> f64 {
            // p_n'(x) = sqrt(2n) p_{n-1}(x)
            let mut pkm1 = 0.0f64;
            let mut pk = std::f64::consts::PI.powf(-0.25);
            for k in 0..n - 1 {
                let pkp1 = (x * pk - (k as f64 / 2.0).sqrt() * pkm1) / (((k + 1) as f64) / 2.0).sqrt();
                pkm1 = pk;
                pk = pkp1;
            }
            (2.0 * n as f64).sqrt() * pk
        };

        // Bracket the positive roots by sign changes on a fine grid, then
        // bisect + Newton-polish. Roots are symmetric about the origin.
        let upper = (2.0 * n as f64 + 2.0).sqrt();
        let samples = 40 * n;
        let mut roots: Vec<f64> = Vec::with_capacity(n);
        let mut prev_x = 0.0;
        let (mut prev_p, _) = eval(0.0);
        if n % 2 == 1 {
            roots.push(0.0);
        }
        for s in 1..=samples {
            let x = upper * s as f64 / samples as f64;
            let (p, _) = eval(x);
            if prev_p == 0.0 && prev_x > 0.0 {
                roots.push(prev_x);
            } else if prev_p * p < 0.0 {
                let (mut lo, mut hi) = (prev_x, x);
                let (mut plo, _) = eval(lo);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let (pm, _) = eval(mid);
                    if plo * pm <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        plo = pm;
                    }
                }
                let mut r = 0.5 * (lo + hi);
                for _ in 0..4 {
                    let (p, _) = eval(r);
                    let d = deriv(r);
                    if d != 0.0 {
                        r -= p / d;
                    }
                }
                roots.push(r);
            }
            prev_x = x;
            prev_p = p;
        }
        let positive = roots.iter().filter(|&&r| r > 0.0).count();
        if positive * 2 + (n % 2) != n {
            return Err(Error::Quadrature(format!(
                "Hermite root search found {} roots, expected {}",
                positive * 2 + (n % 2),
                n
            )));
        }
        let mut xs: Vec<f64> = roots.iter().filter(|&&r| r > 0.0).map(|&r| -r).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if n % 2 == 1 {
            xs.push(0.0);
        }
        let mut mirrored: Vec<f64> = xs.iter().rev().filter(|&&r| r < 0.0).map(|&r| -r).collect();
        mirrored.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.extend(mirrored);

        // Physicists' weight w_i = 1 / K_n(x_i, x_i); probabilists' rescale:
        // z = sqrt(2) x, v = w / sqrt(pi).
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for &x in &xs {
            let (_, norm) = eval(x);
            nodes.push(std::f64::consts::SQRT_2 * x);
            weights.push(1.0 / (norm * std::f64::consts::PI.sqrt()));
        }
        Ok(GaussHermite { nodes, weights })
    }

    /// `E[f(x + σZ)]` for scalar `x`.
    pub fn expect(&self, x: f64, sigma: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * f(x + sigma * z))
            .sum()
    }

    /// `E[f(x + σZ)]` for `Z` standard Gaussian in `R^d`, tensorized over
    /// the axes (`d` = `x.len()`, must be 1 or 2 — higher dimensions use
    /// Monte Carlo instead).
    pub fn expect_nd(&self, x: &[f64], sigma: f64, mut f: impl FnMut(&[f64]) -> f64) -> Result<f64> {
        match x.len() {
            1 => Ok(self.expect(x[0], sigma, |u| f(&[u]))),
            2 => {
                let mut acc = 0.0;
                for (&z0, &w0) in self.nodes.iter().zip(&self.weights) {
                    let u0 = x[0] + sigma * z0;
                    for (&z1, &w1) in self.nodes.iter().zip(&self.weights) {
                        acc += w0 * w1 * f(&[u0, x[1] + sigma * z1]);
                    }
                }
                Ok(acc)
            }
            d => Err(Error::invalid(format!(
                "tensor Gauss-Hermite supports d <= 2, got {d}"
            ))),
        }
    }
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 || order > 512 {
            return Err(Error::invalid(format!(
                "Gauss-Legendre order must be in 1..=512, got {order}"
            )));
        }
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // Chebyshev initial guess, Newton on the Legendre recurrence.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_deriv(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_with_deriv(n, x);
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        Ok(GaussLegendre { nodes, weights })
    }

    /// `∫_a^b f(x) dx`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// `log ∫_a^b exp(log_f(x)) dx`, accumulated in the log domain so the
    /// integrand may exceed `exp(709)`.
    pub fn log_integrate(&self, a: f64, b: f64, mut log_f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        if half <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| log_f(mid + half * x) + (w * half).ln())
            .collect();
        logsumexp(&terms)
    }
}

fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Adaptive Simpson integration on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: usize,
    ) -> Result<f64> {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let err = left + right - whole;
        if err.abs() <= 15.0 * tol || (b - a).abs() < 1e-14 {
            return Ok(left + right + err / 15.0);
        }
        if depth == 0 {
            return Err(Error::Quadrature(format!(
                "adaptive Simpson recursion limit on [{a}, {b}] (residual {err:.3e})"
            )));
        }
        Ok(recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)?
            + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)?)
    }
    let (fa, fb) = (f(a), f(b));
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 60)
}
