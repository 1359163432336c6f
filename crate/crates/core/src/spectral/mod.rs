//! Independent estimators and identity checks for the smoothed measures.
//!
//! Submodules:
//! * [`poincare`] — spectral-gap estimation by grid eigensolves;
//! * [`lsi`] — log-Sobolev lower bounds (exponential family + grid ascent);
//! * this module — the χ² divergence formula, the mixture decomposition
//!   identities for variance and entropy, the Muckenhoupt constant behind
//!   the weighted Poincaré inequality, and the Lyapunov condition checker.

pub mod eigen;
pub mod lsi;
pub mod poincare;

pub use lsi::{
    default_theta_grid, estimate_lsi_expfamily, estimate_lsi_expfamily_mc, estimate_lsi_grid,
    ExpFamilyEstimate, GridLsiEstimate,
};
pub use poincare::{estimate_poincare, RayleighResult};

use crate::error::{Error, Result};
use crate::grid::GridDomain;
use crate::measure::{dist_sq, SmoothedMeasure};
use crate::quad::GaussLegendre;

/// χ² divergence between `N(x, δ²I)` and `N(y, δ²I)`:
/// `exp(|x-y|²/δ²) - 1`.
pub fn chi2_gaussians(x: &[f64], y: &[f64], delta: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if !(delta > 0.0) {
        return Err(Error::invalid(format!("delta must be positive, got {delta}")));
    }
    Ok((dist_sq(x, y) / (delta * delta)).exp_m1())
}

/// One term pair of a mixture decomposition, plus the directly computed
/// total for the identity check.
#[derive(Debug, Clone)]
pub struct DecompositionReport {
    /// `Σᵢ ŵᵢ Var_{qᵢ}(f)` (or entropies).
    pub within: f64,
    /// `Var_ŵ(i ↦ E_{qᵢ} f)` (or the entropy analogue).
    pub between: f64,
    /// Functional of `f` under the mixture itself.
    pub total: f64,
    /// Worst per-component grid truncation `|1 - Σⱼ φ(zⱼ - xᵢ) h^d|`.
    pub tail_mass: f64,
    /// Set when `tail_mass > 1e-8` — the grid is too small for the measure.
    pub tail_warning: bool,
}

struct MixtureOnGrid {
    /// `ŵᵢ ∝ wᵢ sᵢ`, the grid-renormalized mixture weights.
    weights: Vec<f64>,
    /// `qᵢⱼ`, each row a normalized distribution over grid nodes.
    components: Vec<Vec<f64>>,
    tail_mass: f64,
}

fn mixture_on_grid(sm: &SmoothedMeasure, grid: &GridDomain) -> Result<MixtureOnGrid> {
    grid.check_covers(sm)?;
    let d = sm.dimension();
    let delta2 = sm.delta() * sm.delta();
    let hd = grid.spacing().powi(d as i32);
    let log_norm = -0.5 * d as f64 * (2.0 * std::f64::consts::PI * delta2).ln();
    let mut components = Vec::with_capacity(sm.base().len());
    let mut weights = Vec::with_capacity(sm.base().len());
    let mut tail_mass = 0.0f64;
    for (atom, &w) in sm.base().atoms().iter().zip(sm.base().weights()) {
        let mut row = Vec::with_capacity(grid.node_count());
        for idx in 0..grid.node_count() {
            let z = grid.node(idx);
            row.push((log_norm - dist_sq(&z, atom) / (2.0 * delta2)).exp() * hd);
        }
        let s: f64 = row.iter().sum();
        tail_mass = tail_mass.max((1.0 - s).abs());
        if s > 0.0 {
            row.iter_mut().for_each(|x| *x /= s);
        }
        components.push(row);
        weights.push(w * s);
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|x| *x /= total);
    Ok(MixtureOnGrid {
        weights,
        components,
        tail_mass,
    })
}

fn weighted_variance(weights: &[f64], values: &[f64]) -> f64 {
    let mean: f64 = weights.iter().zip(values).map(|(&w, &v)| w * v).sum();
    weights
        .iter()
        .zip(values)
        .map(|(&w, &v)| w * (v - mean) * (v - mean))
        .sum()
}

fn xlogx(t: f64) -> f64 {
    if t > 0.0 {
        t * t.ln()
    } else {
        0.0
    }
}

fn weighted_entropy(weights: &[f64], values: &[f64]) -> f64 {
    // Ent(g) = Σ w xlogx(g) - xlogx(Σ w g), 0·log 0 = 0
    let mean: f64 = weights.iter().zip(values).map(|(&w, &v)| w * v).sum();
    let raw: f64 = weights.iter().zip(values).map(|(&w, &v)| w * xlogx(v)).sum();
    raw - xlogx(mean)
}

/// Splits `Var_{μ⋆γ_δ}(f)` into the within-component and between-component
/// terms; the law of total variance makes `within + between = total` exact
/// for the discretized mixture.
pub fn variance_decomposition(
    sm: &SmoothedMeasure,
    f: &[f64],
    grid: &GridDomain,
) -> Result<DecompositionReport> {
    if f.len() != grid.node_count() {
        return Err(Error::DimensionMismatch {
            expected: grid.node_count(),
            got: f.len(),
        });
    }
    let mix = mixture_on_grid(sm, grid)?;
    let mut within = 0.0;
    let mut comp_means = Vec::with_capacity(mix.weights.len());
    for (q, &w) in mix.components.iter().zip(&mix.weights) {
        within += w * weighted_variance(q, f);
        comp_means.push(q.iter().zip(f).map(|(&qi, &fi)| qi * fi).sum());
    }
    let between = weighted_variance(&mix.weights, &comp_means);
    // total against the mixture distribution itself
    let n = f.len();
    let mut rho = vec![0.0; n];
    for (q, &w) in mix.components.iter().zip(&mix.weights) {
        for (r, &qi) in rho.iter_mut().zip(q) {
            *r += w * qi;
        }
    }
    let total = weighted_variance(&rho, f);
    Ok(DecompositionReport {
        within,
        between,
        total,
        tail_mass: mix.tail_mass,
        tail_warning: mix.tail_mass > 1e-8,
    })
}

/// Entropy analogue: `Ent(f²) = Σᵢ ŵᵢ Ent_{qᵢ}(f²) + Ent_ŵ(i ↦ E_{qᵢ} f²)`.
pub fn entropy_decomposition(
    sm: &SmoothedMeasure,
    f: &[f64],
    grid: &GridDomain,
) -> Result<DecompositionReport> {
    if f.len() != grid.node_count() {
        return Err(Error::DimensionMismatch {
            expected: grid.node_count(),
            got: f.len(),
        });
    }
    let mix = mixture_on_grid(sm, grid)?;
    let f2: Vec<f64> = f.iter().map(|&x| x * x).collect();
    let mut within = 0.0;
    let mut comp_means = Vec::with_capacity(mix.weights.len());
    for (q, &w) in mix.components.iter().zip(&mix.weights) {
        within += w * weighted_entropy(q, &f2);
        comp_means.push(q.iter().zip(&f2).map(|(&qi, &gi)| qi * gi).sum());
    }
    let between = weighted_entropy(&mix.weights, &comp_means);
    let n = f.len();
    let mut rho = vec![0.0; n];
    for (q, &w) in mix.components.iter().zip(&mix.weights) {
        for (r, &qi) in rho.iter_mut().zip(q) {
            *r += w * qi;
        }
    }
    let total = weighted_entropy(&rho, &f2);
    Ok(DecompositionReport {
        within,
        between,
        total,
        tail_mass: mix.tail_mass,
        tail_warning: mix.tail_mass > 1e-8,
    })
}

/// The Hardy-criterion supremum
/// `sup_{y≥0} ∫_y^∞ e^{-u²/2} du · ∫_0^y (1+u²) e^{u²/2} du`.
#[derive(Debug, Clone)]
pub struct MuckenhouptConstant {
    /// The supremum (the product increases towards its limit as `y` grows).
    pub value: f64,
    /// Where the search stopped improving.
    pub argmax: f64,
    pub error_estimate: f64,
}

fn log_muckenhoupt_product(gl: &GaussLegendre, y: f64) -> f64 {
    if y <= 0.0 {
        return f64::NEG_INFINITY;
    }
    // Both factors overflow pointwise beyond y ≈ 38, and both concentrate
    // in a boundary layer of width ~ 1/y; substitute towards the layer and
    // keep everything in logs.
    //   P(y) = ∫_0^y (1+u²) e^{u²/2} du = e^{y²/2} ∫ (1+(y-t)²) e^{-yt+t²/2} dt
    let t_max = (90.0 / (y + (y * y - 90.0).max(0.0).sqrt())).min(y);
    let log_p = y * y / 2.0
        + gl.log_integrate(0.0, t_max, |t| {
            let u = y - t;
            (1.0 + u * u).ln() - y * t + t * t / 2.0
        });
    //   Q(y) = ∫_y^∞ e^{-u²/2} du = e^{-y²/2} ∫_0^∞ e^{-ys-s²/2} ds
    let s_max = 90.0 / (y + (y * y + 90.0).sqrt());
    let log_q = -y * y / 2.0 + gl.log_integrate(0.0, s_max, |s| -y * s - s * s / 2.0);
    log_p + log_q
}

/// Computes the Muckenhoupt supremum by quadrature plus a widening scan.
///
/// The product vanishes at `y = 0` but *increases towards 1* as `y → ∞`
/// (the closed antiderivative gives `B(y) = y e^{y²/2} ∫_y^∞ e^{-u²/2} du`),
/// so the maximizer always sits at the right edge of any finite window; the
/// search widens until the gain per doubling is below tolerance and reports
/// the residual gain inside the error estimate.
pub fn muckenhoupt_constant() -> Result<MuckenhouptConstant> {
    let gl = GaussLegendre::new(240)?;
    let gl_check = GaussLegendre::new(320)?;
    let eval = |y: f64| log_muckenhoupt_product(&gl, y).exp();
    let scan_max = |lo: f64, hi: f64| -> (f64, f64) {
        let k = 256;
        let mut best = (lo, f64::NEG_INFINITY);
        for i in 0..=k {
            let y = lo + (hi - lo) * i as f64 / k as f64;
            let v = eval(y);
            if v > best.1 {
                best = (y, v);
            }
        }
        best
    };
    let mut hi = 10.0;
    let (mut arg, mut best) = scan_max(0.0, hi);
    let tol = 2.5e-7;
    let mut gain = f64::INFINITY;
    for _ in 0..24 {
        let (arg2, best2) = scan_max(hi, 2.0 * hi);
        hi *= 2.0;
        gain = best2 - best;
        if best2 > best {
            best = best2;
            arg = arg2;
        }
        if gain < tol {
            break;
        }
    }
    if gain >= tol {
        return Err(Error::Solver(format!(
            "Muckenhoupt search still improving by {gain:.2e} at y = {hi}; no plateau found"
        )));
    }
    let refine = (log_muckenhoupt_product(&gl_check, arg).exp() - best).abs();
    // geometric tail of the remaining gains: increments scale like 1/y²
    let error_estimate = gain * 0.5 + refine + 1e-9;
    if error_estimate > 1e-6 {
        return Err(Error::Quadrature(format!(
            "Muckenhoupt error estimate {error_estimate:.2e} exceeds 1e-6"
        )));
    }
    Ok(MuckenhouptConstant {
        value: best,
        argmax: arg,
        error_estimate,
    })
}

/// The constant the Muckenhoupt criterion certifies for the half-line Hardy
/// inequality: four times the supremum.
pub fn hardy_constant() -> Result<f64> {
    Ok(4.0 * muckenhoupt_constant()?.value)
}

/// A smooth test function with analytic gradient (polynomial of total
/// degree ≤ 3 plus one sinusoid), used by the weighted Poincaré check.
#[derive(Debug, Clone)]
pub struct SmoothTestFunction {
    /// `(coefficient, per-axis powers)`, total degree ≤ 3.
    pub poly: Vec<(f64, Vec<u32>)>,
    /// `amp · sin(freq·u + phase)`.
    pub sinusoid: Option<(f64, Vec<f64>, f64)>,
}

impl SmoothTestFunction {
    pub fn linear(axis: usize, d: usize) -> Self {
        let mut pw = vec![0u32; d];
        pw[axis] = 1;
        SmoothTestFunction {
            poly: vec![(1.0, pw)],
            sinusoid: None,
        }
    }

    pub fn cubic(axis: usize, d: usize) -> Self {
        let mut pw = vec![0u32; d];
        pw[axis] = 3;
        SmoothTestFunction {
            poly: vec![(1.0, pw)],
            sinusoid: None,
        }
    }

    pub fn random(d: usize, rng: &mut crate::rng::Rng) -> Self {
        use rand::Rng as _;
        let mut poly = Vec::new();
        // all monomials of total degree 1..=3
        let mut powers = Vec::new();
        if d == 1 {
            for a in 1..=3u32 {
                powers.push(vec![a]);
            }
        } else {
            for a in 0..=3u32 {
                for b in 0..=3u32 {
                    if a + b >= 1 && a + b <= 3 {
                        powers.push(vec![a, b]);
                    }
                }
            }
        }
        for pw in powers {
            poly.push((rng.gen_range(-1.0..1.0), pw));
        }
        let freq: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let sinusoid = Some((
            rng.gen_range(-1.0..1.0),
            freq,
            rng.gen_range(0.0..std::f64::consts::TAU),
        ));
        SmoothTestFunction { poly, sinusoid }
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        let mut v = 0.0;
        for (c, pw) in &self.poly {
            let mut t = *c;
            for (x, &p) in u.iter().zip(pw) {
                t *= x.powi(p as i32);
            }
            v += t;
        }
        if let Some((amp, freq, phase)) = &self.sinusoid {
            v += amp * (crate::measure::dot(freq, u) + phase).sin();
        }
        v
    }

    pub fn grad(&self, u: &[f64]) -> Vec<f64> {
        let d = u.len();
        let mut g = vec![0.0; d];
        for (c, pw) in &self.poly {
            for k in 0..d {
                if pw[k] == 0 {
                    continue;
                }
                let mut t = *c * pw[k] as f64;
                for (i, (x, &p)) in u.iter().zip(pw).enumerate() {
                    let q = if i == k { p - 1 } else { p };
                    t *= x.powi(q as i32);
                }
                g[k] += t;
            }
        }
        if let Some((amp, freq, phase)) = &self.sinusoid {
            let c = amp * (crate::measure::dot(freq, u) + phase).cos();
            for k in 0..d {
                g[k] += c * freq[k];
            }
        }
        g
    }
}

/// Outcome of the weighted Poincaré spot check.
#[derive(Debug, Clone)]
pub struct WeightedPoincareReport {
    /// Worst `Var(f) / Σᵢ (1+uᵢ²)^{-1} (∂ᵢf)²` ratio over the trials.
    pub max_ratio: f64,
    /// `2 · hardy · (1+R²) e^{4R²}`.
    pub bound: f64,
    pub pass: bool,
    pub ratios: Vec<f64>,
}

/// Checks the weighted Poincaré inequality for `μ ⋆ γ_1` on random smooth
/// test functions. Requires `δ = 1` (rescale the measure first — the
/// inequality is stated at unit smoothing).
pub fn weighted_poincare_check(
    sm: &SmoothedMeasure,
    grid: &GridDomain,
    trials: usize,
    seed: u64,
) -> Result<WeightedPoincareReport> {
    if (sm.delta() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "weighted Poincaré check needs delta = 1 (got {}); rescale the measure first",
            sm.delta()
        )));
    }
    let d = sm.dimension();
    let (rho, _) = grid.density_weights(sm)?;
    let mut fns = vec![
        SmoothTestFunction::linear(0, d),
        SmoothTestFunction::cubic(0, d),
    ];
    let mut rng = crate::rng::seeded(seed);
    for _ in fns.len()..trials.max(2) {
        fns.push(SmoothTestFunction::random(d, &mut rng));
    }
    let mut ratios = Vec::with_capacity(fns.len());
    for tf in &fns {
        let mut mean = 0.0;
        let mut energy = 0.0;
        let mut values = Vec::with_capacity(grid.node_count());
        for idx in 0..grid.node_count() {
            let u = grid.node(idx);
            let v = tf.eval(&u);
            values.push(v);
            mean += rho[idx] * v;
            let g = tf.grad(&u);
            for k in 0..d {
                energy += rho[idx] * g[k] * g[k] / (1.0 + u[k] * u[k]);
            }
        }
        let var: f64 = rho
            .iter()
            .zip(&values)
            .map(|(&w, &v)| w * (v - mean) * (v - mean))
            .sum();
        if energy > 0.0 {
            ratios.push(var / energy);
        }
    }
    let hardy = hardy_constant()?;
    let r = sm.radius();
    let bound = 2.0 * hardy * (1.0 + r * r) * (4.0 * r * r).exp();
    let max_ratio = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(WeightedPoincareReport {
        max_ratio,
        bound,
        pass: max_ratio <= bound,
        ratios,
    })
}

/// Margin report for the Lyapunov drift condition
/// `ΔW - ∇V·∇W ≤ (b - c|x|²) W`.
#[derive(Debug, Clone)]
pub struct LyapunovReport {
    /// Max over interior nodes of `ΔW - ∇V·∇W - (b - c|x|²)W`; negative
    /// values mean the condition holds with that margin.
    pub max_violation: f64,
    pub violating_fraction: f64,
    pub nodes_checked: usize,
}

/// Evaluates the drift condition at every interior grid node: `ΔW` and
/// `∇W` by central differences of the supplied handle, `∇V` exact.
///
/// No formula is trusted for `W`: published candidates for this regime are
/// unreliable, so the checker verifies whatever `(W, b, c)` triple the
/// caller supplies, and [`search_quadratic_lyapunov`] scans the standard
/// `exp(s|x|²)` family.
pub fn lyapunov_check(
    sm: &SmoothedMeasure,
    w: &dyn Fn(&[f64]) -> f64,
    b: f64,
    c: f64,
    grid: &GridDomain,
) -> Result<LyapunovReport> {
    if !(b > 0.0) || !(c > 0.0) {
        return Err(Error::invalid("Lyapunov constants b, c must be positive"));
    }
    grid.check_covers(sm)?;
    let d = grid.dimension();
    let h = grid.spacing();
    for idx in 0..grid.node_count() {
        let wv = w(&grid.node(idx));
        if !(wv >= 1.0) {
            return Err(Error::invalid(format!(
                "Lyapunov function must satisfy W >= 1 on the grid; W = {wv} at node {idx}"
            )));
        }
    }
    let n = grid.nodes_per_axis();
    let interior: Vec<usize> = (0..grid.node_count())
        .filter(|&idx| match d {
            1 => idx > 0 && idx + 1 < n,
            _ => {
                let (ix, iy) = (idx / n, idx % n);
                ix > 0 && ix + 1 < n && iy > 0 && iy + 1 < n
            }
        })
        .collect();
    let mut max_violation = f64::NEG_INFINITY;
    let mut violations = 0usize;
    for &idx in &interior {
        let x = grid.node(idx);
        let w0 = w(&x);
        let mut laplacian = 0.0;
        let mut grad_w = vec![0.0; d];
        for k in 0..d {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            let (wp, wm) = (w(&xp), w(&xm));
            laplacian += (wp - 2.0 * w0 + wm) / (h * h);
            grad_w[k] = (wp - wm) / (2.0 * h);
        }
        let grad_v = sm.grad_potential(&x)?;
        let drift: f64 = grad_v.iter().zip(&grad_w).map(|(a, g)| a * g).sum();
        let rhs = (b - c * crate::measure::norm_sq(&x)) * w0;
        let v = laplacian - drift - rhs;
        max_violation = max_violation.max(v);
        if v > 1e-6 * rhs.abs().max(1.0) {
            violations += 1;
        }
    }
    Ok(LyapunovReport {
        max_violation,
        violating_fraction: violations as f64 / interior.len().max(1) as f64,
        nodes_checked: interior.len(),
    })
}

/// Scans the one-parameter family `W(x) = exp(s|x|²)` for an exponent that
/// satisfies the drift condition with the given `(b, c)`; returns the best
/// `(s, report)` found.
pub fn search_quadratic_lyapunov(
    sm: &SmoothedMeasure,
    b: f64,
    c: f64,
    grid: &GridDomain,
    s_candidates: &[f64],
) -> Result<(f64, LyapunovReport)> {
    let mut best: Option<(f64, LyapunovReport)> = None;
    for &s in s_candidates {
        if !(s > 0.0) {
            continue;
        }
        let w = move |x: &[f64]| (s * crate::measure::norm_sq(x)).exp();
        let report = lyapunov_check(sm, &w, b, c, grid)?;
        if best
            .as_ref()
            .is_none_or(|(_, r)| report.max_violation < r.max_violation)
        {
            best = Some((s, report));
        }
    }
    best.ok_or_else(|| Error::invalid("no positive exponent candidates supplied"))
}
