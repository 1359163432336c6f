//! Discrete measures in a ball and their Gaussian smoothings.
//!
//! [`BallMeasure`] is a finitely supported probability measure with atoms in
//! the closed ball `B_d(0, R)`. [`SmoothedMeasure`] pairs it with a Gaussian
//! standard deviation `δ` and represents the convolution `μ ⋆ N(0, δ²I_d)`,
//! whose density is
//!
//! ```text
//! p(z) = Σᵢ wᵢ (2πδ²)^{-d/2} exp(-|z - xᵢ|² / (2δ²)).
//! ```
//!
//! The potential `V = -log p`, its gradient and its Hessian are evaluated
//! exactly (up to floating point) through the tilted measure with weights
//! proportional to `wᵢ exp(z·xᵢ/δ² - |xᵢ|²/(2δ²))`:
//!
//! ```text
//! ∇V(z)    = z/δ² - mean(tilt)/δ²,
//! Hess V(z) = I/δ² - cov(tilt)/δ⁴,
//! ```
//!
//! so every Hessian eigenvalue lies in `[1/δ² - R²/δ⁴, 1/δ²]`. All weighted
//! exponential sums run in the log domain: `|z - xᵢ|²/δ²` routinely exceeds
//! 700 in parameter sweeps.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::quad::logsumexp_by;
use crate::rng;

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Finitely supported probability measure with atoms in `B_d(0, R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallMeasure {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
    dimension: usize,
    radius: f64,
}

impl BallMeasure {
    /// Builds a measure from atoms and weights. The radius is set to the
    /// exact maximum atom norm; use [`BallMeasure::with_radius`] to evaluate
    /// bounds at a larger nominal `R`.
    pub fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("measure needs at least one atom"));
        }
        if atoms.len() != weights.len() {
            return Err(Error::invalid(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        let dimension = atoms[0].len();
        if dimension == 0 {
            return Err(Error::invalid("atoms must have dimension >= 1"));
        }
        for a in &atoms {
            if a.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: a.len(),
                });
            }
            if a.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid("atom coordinates must be finite"));
            }
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::invalid("weights must be nonnegative"));
        }
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::invalid(format!(
                "weights sum to {sum}, expected 1 within {WEIGHT_SUM_TOL:e}"
            )));
        }
        let radius = atoms
            .iter()
            .map(|a| norm(a))
            .fold(0.0f64, f64::max);
        Ok(BallMeasure {
            atoms,
            weights,
            dimension,
            radius,
        })
    }

    /// Uniform weights over the given atoms.
    pub fn uniform(atoms: Vec<Vec<f64>>) -> Result<Self> {
        let n = atoms.len();
        if n == 0 {
            return Err(Error::invalid("measure needs at least one atom"));
        }
        let w = 1.0 / n as f64;
        Self::new(atoms, vec![w; n])
    }

    /// A single atom (the `R = 0` Gaussian calibration case when smoothed).
    pub fn dirac(point: Vec<f64>) -> Result<Self> {
        Self::new(vec![point], vec![1.0])
    }

    /// Overrides the radius upward so bounds can be evaluated at a nominal
    /// `R` larger than the support actually requires. Shrinking is refused:
    /// the bounds are only valid for `R` at least the max atom norm.
    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        if radius < self.radius {
            return Err(Error::invalid(format!(
                "radius override {radius} is below the max atom norm {}",
                self.radius
            )));
        }
        self.radius = radius;
        Ok(self)
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Mean and covariance of a tilted measure.
#[derive(Debug, Clone)]
pub struct TiltedMoments {
    pub mean: Vec<f64>,
    /// Row-major symmetric `d × d` covariance.
    pub covariance: Vec<Vec<f64>>,
}

/// `μ ⋆ N(0, δ²I_d)` for a [`BallMeasure`] `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedMeasure {
    base: BallMeasure,
    delta: f64,
}

impl SmoothedMeasure {
    pub fn new(base: BallMeasure, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::invalid(format!("delta must be positive, got {delta}")));
        }
        Ok(SmoothedMeasure { base, delta })
    }

    pub fn base(&self) -> &BallMeasure {
        &self.base
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dimension(&self) -> usize {
        self.base.dimension
    }

    pub fn radius(&self) -> f64 {
        self.base.radius
    }

    fn check_dim(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.base.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.base.dimension,
                got: z.len(),
            });
        }
        Ok(())
    }

    /// `log p(z)`, accumulated with log-sum-exp.
    pub fn log_density(&self, z: &[f64]) -> Result<f64> {
        self.check_dim(z)?;
        let d = self.base.dimension as f64;
        let delta2 = self.delta * self.delta;
        let norm_const = -0.5 * d * (2.0 * std::f64::consts::PI * delta2).ln();
        let lse = logsumexp_by(self.base.atoms.len(), |i| {
            let w = self.base.weights[i];
            if w == 0.0 {
                return f64::NEG_INFINITY;
            }
            w.ln() - dist_sq(z, &self.base.atoms[i]) / (2.0 * delta2)
        });
        Ok(norm_const + lse)
    }

    /// Density `p(z) = Σᵢ wᵢ (2πδ²)^{-d/2} exp(-|z-xᵢ|²/(2δ²))`.
    pub fn density(&self, z: &[f64]) -> Result<f64> {
        Ok(self.log_density(z)?.exp())
    }

    /// Potential `V(z) = -log p(z)`.
    pub fn potential(&self, z: &[f64]) -> Result<f64> {
        Ok(-self.log_density(z)?)
    }

    /// `W_δ(z) = -log Σᵢ wᵢ exp(z·xᵢ/δ² - |xᵢ|²/(2δ²))`, the non-quadratic
    /// part of the potential: `V(z) = |z|²/(2δ²) + (d/2)log(2πδ²) + W_δ(z)`.
    pub fn w_delta(&self, z: &[f64]) -> Result<f64> {
        self.check_dim(z)?;
        let delta2 = self.delta * self.delta;
        let lse = logsumexp_by(self.base.atoms.len(), |i| {
            let w = self.base.weights[i];
            if w == 0.0 {
                return f64::NEG_INFINITY;
            }
            let x = &self.base.atoms[i];
            w.ln() + dot(z, x) / delta2 - norm_sq(x) / (2.0 * delta2)
        });
        Ok(-lse)
    }

    /// Normalized tilt weights `∝ wᵢ exp(z·xᵢ/δ² - |xᵢ|²/(2δ²))`.
    fn tilt_weights(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(z)?;
        if z.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("tilt point must be finite"));
        }
        let delta2 = self.delta * self.delta;
        let logits: Vec<f64> = self
            .base
            .atoms
            .iter()
            .zip(&self.base.weights)
            .map(|(x, &w)| {
                if w == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    w.ln() + dot(z, x) / delta2 - norm_sq(x) / (2.0 * delta2)
                }
            })
            .collect();
        let lse = crate::quad::logsumexp(&logits);
        Ok(logits.iter().map(|&l| (l - lse).exp()).collect())
    }

    /// Mean and covariance of the tilted measure at `z`.
    pub fn tilted_moments(&self, z: &[f64]) -> Result<TiltedMoments> {
        let tw = self.tilt_weights(z)?;
        let d = self.base.dimension;
        let mut mean = vec![0.0; d];
        for (x, &w) in self.base.atoms.iter().zip(&tw) {
            for k in 0..d {
                mean[k] += w * x[k];
            }
        }
        let mut covariance = vec![vec![0.0; d]; d];
        for (x, &w) in self.base.atoms.iter().zip(&tw) {
            for i in 0..d {
                let ci = x[i] - mean[i];
                for j in i..d {
                    covariance[i][j] += w * ci * (x[j] - mean[j]);
                }
            }
        }
        for i in 0..d {
            for j in 0..i {
                covariance[i][j] = covariance[j][i];
            }
        }
        Ok(TiltedMoments { mean, covariance })
    }

    /// `∇V(z) = z/δ² + ∇W_δ(z)` with `∇W_δ(z) = -mean(tilt)/δ²`.
    ///
    /// The `W_δ` part has norm at most `R/δ²`, so `V` is a Lipschitz
    /// perturbation of the Gaussian potential.
    pub fn grad_potential(&self, z: &[f64]) -> Result<Vec<f64>> {
        let moments = self.tilted_moments(z)?;
        let delta2 = self.delta * self.delta;
        Ok(z.iter()
            .zip(&moments.mean)
            .map(|(&zi, &mi)| (zi - mi) / delta2)
            .collect())
    }

    /// `Hess V(z) = I/δ² - cov(tilt)/δ⁴`; eigenvalues in
    /// `[1/δ² - R²/δ⁴, 1/δ²]`.
    pub fn hessian_potential(&self, z: &[f64]) -> Result<Vec<Vec<f64>>> {
        let moments = self.tilted_moments(z)?;
        let d = self.base.dimension;
        let delta2 = self.delta * self.delta;
        let delta4 = delta2 * delta2;
        let mut h = moments.covariance;
        for i in 0..d {
            for j in 0..d {
                h[i][j] = -h[i][j] / delta4;
            }
            h[i][i] += 1.0 / delta2;
        }
        Ok(h)
    }

    /// `n` independent draws of `S = X + δZ`, deterministic given `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        if n == 0 {
            return Err(Error::invalid("sample count must be >= 1"));
        }
        let mut rng = rng::seeded(seed);
        let cdf = cumulative(&self.base.weights);
        let d = self.base.dimension;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let u: f64 = rng.gen();
            let idx = pick_atom(&cdf, u);
            let atom = &self.base.atoms[idx];
            let mut s = Vec::with_capacity(d);
            for k in 0..d {
                let g: f64 = rng.sample(StandardNormal);
                s.push(atom[k] + self.delta * g);
            }
            out.push(s);
        }
        Ok(out)
    }

    /// Pushforward under `z ↦ z/s`: atoms and `δ` divide by `s`, and the
    /// density transforms as `p_s(z) = s^d p(sz)`.
    pub fn rescale(&self, s: f64) -> Result<SmoothedMeasure> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::invalid(format!("scale must be positive, got {s}")));
        }
        let atoms = self
            .base
            .atoms
            .iter()
            .map(|a| a.iter().map(|&x| x / s).collect())
            .collect();
        let base = BallMeasure::new(atoms, self.base.weights.clone())?
            .with_radius(self.base.radius / s)?;
        SmoothedMeasure::new(base, self.delta / s)
    }

    /// Reads the plain-text format: header `d N delta`, then `N` lines
    /// `w x_1 ... x_d`.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty measure file".into()))?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(Error::Parse(format!(
                "header must be `d N delta`, got {header:?}"
            )));
        }
        let d: usize = toks[0]
            .parse()
            .map_err(|_| Error::Parse(format!("bad dimension {:?}", toks[0])))?;
        let n: usize = toks[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad atom count {:?}", toks[1])))?;
        let delta: f64 = toks[2]
            .parse()
            .map_err(|_| Error::Parse(format!("bad delta {:?}", toks[2])))?;
        let mut atoms = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (k, line) in lines.enumerate() {
            if k >= n {
                return Err(Error::Parse(format!("more than {n} atom lines")));
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad number {t:?} on atom line {k}")))
                })
                .collect::<Result<_>>()?;
            if vals.len() != d + 1 {
                return Err(Error::Parse(format!(
                    "atom line {k} has {} fields, expected {}",
                    vals.len(),
                    d + 1
                )));
            }
            weights.push(vals[0]);
            atoms.push(vals[1..].to_vec());
        }
        if atoms.len() != n {
            return Err(Error::Parse(format!(
                "header promised {n} atoms, file has {}",
                atoms.len()
            )));
        }
        let base = BallMeasure::new(atoms, weights)?;
        SmoothedMeasure::new(base, delta)
    }

    /// Writes the same plain-text format. Floats use Rust's shortest
    /// round-trip representation, so read-then-write is bit-exact.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {}",
            self.base.dimension,
            self.base.len(),
            self.delta
        );
        for (atom, w) in self.base.atoms.iter().zip(&self.base.weights) {
            let _ = write!(out, "{w}");
            for x in atom {
                let _ = write!(out, " {x}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text)
    }

    pub fn to_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Euclidean inner product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Squared Euclidean norm.
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Euclidean norm.
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// Squared Euclidean distance.
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf = Vec::with_capacity(weights.len());
    for &w in weights {
        acc += w;
        cdf.push(acc);
    }
    if let Some(last) = cdf.last_mut() {
        *last = 1.0;
    }
    cdf
}

fn pick_atom(cdf: &[f64], u: f64) -> usize {
    match cdf.binary_search_by(|c| c.partial_cmp(&u).unwrap()) {
        Ok(i) | Err(i) => i.min(cdf.len() - 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn two_point(r: f64, delta: f64) -> SmoothedMeasure {
        let base = BallMeasure::uniform(vec![vec![-r], vec![r]]).unwrap();
        SmoothedMeasure::new(base, delta).unwrap()
    }

    fn random_measure(d: usize, n: usize, r: f64, delta: f64, seed: u64) -> SmoothedMeasure {
        let mut rng = rng::seeded(seed);
        let atoms: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                // rejection-sample inside the ball of radius r
                loop {
                    let a: Vec<f64> = (0..d).map(|_| rng.gen_range(-r..r)).collect();
                    if norm(&a) <= r {
                        return a;
                    }
                }
            })
            .collect();
        let mut weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let s: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= s);
        let base = BallMeasure::new(atoms, weights).unwrap();
        SmoothedMeasure::new(base, delta).unwrap()
    }

    #[test]
    fn standard_normal_density_at_origin() {
        let sm = SmoothedMeasure::new(BallMeasure::dirac(vec![0.0]).unwrap(), 1.0).unwrap();
        let expected = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert_relative_eq!(sm.density(&[0.0]).unwrap(), expected, max_relative = 1e-14);
    }

    #[test]
    fn two_atom_density_at_origin() {
        let sm = two_point(1.0, 1.0);
        let expected = (-0.5f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert_relative_eq!(sm.density(&[0.0]).unwrap(), expected, max_relative = 1e-14);
    }

    #[test]
    fn symmetric_measure_has_even_density() {
        let sm = two_point(0.7, 0.4);
        let mut rng = rng::seeded(3);
        for _ in 0..100 {
            let z = rng.gen_range(-3.0..3.0);
            assert_relative_eq!(
                sm.density(&[z]).unwrap(),
                sm.density(&[-z]).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn density_survives_extreme_exponents() {
        // |z - x|^2 / delta^2 ~ 4e6: plain accumulation would underflow to 0
        // for every atom; log-domain keeps the relative ordering.
        let sm = two_point(1.0, 0.05);
        let ld = sm.log_density(&[100.0]).unwrap();
        assert!(ld.is_finite() && ld < -1e6);
    }

    #[test]
    fn gaussian_gradient_is_linear() {
        let sm = SmoothedMeasure::new(BallMeasure::dirac(vec![0.0, 0.0]).unwrap(), 0.7).unwrap();
        let z = [0.3, -1.2];
        let g = sm.grad_potential(&z).unwrap();
        for k in 0..2 {
            assert_relative_eq!(g[k], z[k] / (0.7 * 0.7), max_relative = 1e-13);
        }
    }

    #[test]
    fn symmetric_gradient_vanishes_at_origin() {
        let sm = two_point(2.0, 0.5);
        let g = sm.grad_potential(&[0.0]).unwrap();
        assert_abs_diff_eq!(g[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let sm = random_measure(2, 5, 1.5, 0.8, 11);
        let mut rng = rng::seeded(12);
        for _ in 0..20 {
            let z = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let g = sm.grad_potential(&z).unwrap();
            let h = 1e-4 * sm.delta();
            for k in 0..2 {
                let mut zp = z;
                let mut zm = z;
                zp[k] += h;
                zm[k] -= h;
                let fd =
                    (sm.potential(&zp).unwrap() - sm.potential(&zm).unwrap()) / (2.0 * h);
                assert_relative_eq!(g[k], fd, max_relative = 1e-6, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn hessian_matches_finite_differences_of_gradient() {
        let sm = random_measure(2, 4, 1.0, 0.6, 21);
        let mut rng = rng::seeded(22);
        for _ in 0..10 {
            let z = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
            let hess = sm.hessian_potential(&z).unwrap();
            let h = 1e-4 * sm.delta();
            for k in 0..2 {
                let mut zp = z;
                let mut zm = z;
                zp[k] += h;
                zm[k] -= h;
                let gp = sm.grad_potential(&zp).unwrap();
                let gm = sm.grad_potential(&zm).unwrap();
                for l in 0..2 {
                    let fd = (gp[l] - gm[l]) / (2.0 * h);
                    assert_relative_eq!(hess[l][k], fd, max_relative = 1e-5, epsilon = 1e-7);
                }
            }
        }
    }

    #[test]
    fn single_atom_hessian_is_identity_over_delta_sq() {
        let sm = SmoothedMeasure::new(BallMeasure::dirac(vec![0.5, -0.5]).unwrap(), 1.3).unwrap();
        let h = sm.hessian_potential(&[2.0, 0.1]).unwrap();
        let expected = 1.0 / (1.3 * 1.3);
        assert_relative_eq!(h[0][0], expected, max_relative = 1e-14);
        assert_relative_eq!(h[1][1], expected, max_relative = 1e-14);
        assert_abs_diff_eq!(h[0][1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn two_point_hessian_at_symmetry_point() {
        // tilted variance at z = 0 is exactly R^2, the extreme case
        let (r, delta) = (0.8, 0.6);
        let sm = two_point(r, delta);
        let h = sm.hessian_potential(&[0.0]).unwrap();
        let d2 = delta * delta;
        assert_relative_eq!(h[0][0], 1.0 / d2 - r * r / (d2 * d2), max_relative = 1e-12);
    }

    #[test]
    fn tilted_moments_match_brute_force() {
        let sm = random_measure(2, 6, 1.2, 0.9, 31);
        let z = [0.4, -0.2];
        let tm = sm.tilted_moments(&z).unwrap();
        // direct summation oracle, no log-domain tricks
        let d2 = 0.9 * 0.9;
        let raw: Vec<f64> = sm
            .base()
            .atoms()
            .iter()
            .zip(sm.base().weights())
            .map(|(x, &w)| w * ((dot(&z, x) / d2 - norm_sq(x) / (2.0 * d2)).exp()))
            .collect();
        let total: f64 = raw.iter().sum();
        let mut mean = [0.0; 2];
        for (x, &rw) in sm.base().atoms().iter().zip(&raw) {
            mean[0] += rw * x[0] / total;
            mean[1] += rw * x[1] / total;
        }
        assert_relative_eq!(tm.mean[0], mean[0], max_relative = 1e-12);
        assert_relative_eq!(tm.mean[1], mean[1], max_relative = 1e-12);
        let mut var00 = 0.0;
        for (x, &rw) in sm.base().atoms().iter().zip(&raw) {
            var00 += rw * (x[0] - mean[0]) * (x[0] - mean[0]) / total;
        }
        assert_relative_eq!(tm.covariance[0][0], var00, max_relative = 1e-10);
    }

    #[test]
    fn tilted_moments_symmetric_and_degenerate_limits() {
        let sm = two_point(1.0, 1.0);
        let tm = sm.tilted_moments(&[0.0]).unwrap();
        assert_abs_diff_eq!(tm.mean[0], 0.0, epsilon = 1e-14);
        assert_relative_eq!(tm.covariance[0][0], 1.0, max_relative = 1e-12);

        // large tilt collapses onto the aligned atom
        let tm = sm.tilted_moments(&[200.0]).unwrap();
        assert_relative_eq!(tm.mean[0], 1.0, max_relative = 1e-12);
        assert_abs_diff_eq!(tm.covariance[0][0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn grad_w_part_is_lipschitz_bounded() {
        let sm = random_measure(2, 5, 1.4, 0.5, 41);
        let d2 = 0.25;
        let bound = sm.radius() / d2;
        let mut rng = rng::seeded(42);
        for _ in 0..200 {
            let z = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
            let g = sm.grad_potential(&z).unwrap();
            let w_part = ((g[0] - z[0] / d2).powi(2) + (g[1] - z[1] / d2).powi(2)).sqrt();
            assert!(w_part <= bound + 1e-9, "|∇W_δ| = {w_part} > {bound}");
        }
    }

    #[test]
    fn sampling_moments_and_determinism() {
        let sm = two_point(1.0, 0.5);
        let n = 200_000;
        let a = sm.sample(n, 99).unwrap();
        let b = sm.sample(n, 99).unwrap();
        assert_eq!(a, b);

        // E|S|^2 = E|X|^2 + d δ^2
        let second: f64 = a.iter().map(|s| norm_sq(s)).sum::<f64>() / n as f64;
        let expected = 1.0 + 0.25;
        let se = 3.0 * (2.0f64 / n as f64).sqrt(); // generous bound on 3 SE
        assert!(
            (second - expected).abs() < se + 0.01,
            "second moment {second} vs {expected}"
        );

        // pure Gaussian: sample mean within 3 δ √(d/n) of 0
        let g = SmoothedMeasure::new(BallMeasure::dirac(vec![0.0, 0.0]).unwrap(), 0.8).unwrap();
        let s = g.sample(n, 7).unwrap();
        let mut mean = [0.0f64; 2];
        for x in &s {
            mean[0] += x[0];
            mean[1] += x[1];
        }
        let mean_norm = (mean[0] * mean[0] + mean[1] * mean[1]).sqrt() / n as f64;
        assert!(
            mean_norm <= 3.0 * 0.8 * (2.0 / n as f64).sqrt(),
            "sample mean norm {mean_norm}"
        );
    }

    #[test]
    fn zero_sample_count_is_an_error() {
        let sm = two_point(1.0, 0.5);
        assert!(sm.sample(0, 1).is_err());
    }

    #[test]
    fn rescale_transforms_density() {
        let sm = random_measure(1, 4, 1.0, 0.7, 51);
        let s = 2.5;
        let rs = sm.rescale(s).unwrap();
        assert_relative_eq!(rs.delta(), 0.7 / s, max_relative = 1e-15);
        assert_relative_eq!(rs.radius(), sm.radius() / s, max_relative = 1e-15);
        let mut rng = rng::seeded(52);
        for _ in 0..100 {
            let z = rng.gen_range(-2.0..2.0);
            let lhs = rs.density(&[z]).unwrap();
            let rhs = s * sm.density(&[s * z]).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
        // s = 1 is the identity
        let id = sm.rescale(1.0).unwrap();
        assert_eq!(id, sm);
    }

    #[test]
    fn density_integrates_to_one_1d() {
        let sm = random_measure(1, 3, 1.0, 0.6, 61);
        let half = sm.radius() + 8.0 * sm.delta();
        let mass = crate::quad::adaptive_simpson(
            &|z: f64| sm.density(&[z]).unwrap(),
            -half,
            half,
            1e-10,
        )
        .unwrap();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn density_integrates_to_one_2d() {
        let sm = random_measure(2, 3, 0.8, 0.5, 62);
        let half = sm.radius() + 8.0 * sm.delta();
        // midpoint rule on a fine grid is plenty at this tolerance
        let n = 400;
        let h = 2.0 * half / n as f64;
        let mut mass = 0.0;
        for i in 0..n {
            let x = -half + (i as f64 + 0.5) * h;
            for j in 0..n {
                let y = -half + (j as f64 + 0.5) * h;
                mass += sm.density(&[x, y]).unwrap();
            }
        }
        mass *= h * h;
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn hessian_eigenvalue_envelope() {
        // envelope invariant: Hess(-log p) >= (1/δ² - R²/δ⁴) I and <= I/δ²
        let sm = random_measure(2, 5, 1.1, 0.7, 71);
        let d2 = 0.49;
        let lo = 1.0 / d2 - sm.radius() * sm.radius() / (d2 * d2);
        let hi = 1.0 / d2;
        let mut rng = rng::seeded(72);
        for _ in 0..200 {
            let z = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
            let h = sm.hessian_potential(&z).unwrap();
            let (l1, l2) = sym2_eigenvalues(h[0][0], h[0][1], h[1][1]);
            assert!(l1 >= lo - 1e-9 && l2 <= hi + 1e-9, "eigs [{l1}, {l2}] outside [{lo}, {hi}]");
        }
    }

    pub(crate) fn sym2_eigenvalues(a: f64, b: f64, c: f64) -> (f64, f64) {
        let tr = a + c;
        let disc = ((a - c) * (a - c) + 4.0 * b * b).sqrt();
        (0.5 * (tr - disc), 0.5 * (tr + disc))
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let sm = random_measure(2, 4, 1.0, 0.325, 81);
        let text = sm.to_text();
        let back = SmoothedMeasure::from_text(&text).unwrap();
        assert_eq!(back, sm);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn parse_errors_are_reported() {
        assert!(SmoothedMeasure::from_text("").is_err());
        assert!(SmoothedMeasure::from_text("1 1").is_err());
        assert!(SmoothedMeasure::from_text("1 1 0.5\n1.0").is_err()); // missing coord
        assert!(SmoothedMeasure::from_text("1 2 0.5\n0.5 0.0").is_err()); // missing atom
        assert!(SmoothedMeasure::from_text("1 1 0.5\n0.9 0.0").is_err()); // weights != 1
    }

    #[test]
    fn invalid_construction_is_rejected() {
        assert!(BallMeasure::new(vec![], vec![]).is_err());
        assert!(BallMeasure::new(vec![vec![0.0]], vec![0.5]).is_err());
        assert!(BallMeasure::new(vec![vec![0.0], vec![1.0, 2.0]], vec![0.5, 0.5]).is_err());
        let m = BallMeasure::dirac(vec![1.0]).unwrap();
        assert!(m.clone().with_radius(0.5).is_err());
        assert!(m.clone().with_radius(2.0).is_ok());
        assert!(SmoothedMeasure::new(m, 0.0).is_err());
        let sm = two_point(1.0, 1.0);
        assert!(sm.rescale(-1.0).is_err());
        assert!(sm.density(&[0.0, 0.0]).is_err()); // dimension mismatch
    }
}
