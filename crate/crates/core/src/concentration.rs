//! Monte Carlo concentration checks and the conjecture-exploration sweep.
//!
//! Smoothed compactly supported measures concentrate like Gaussians once
//! the support diameter is paid for:
//!
//! ```text
//! P(f(X + δZ) ≥ m + t) ≤ exp(-[t - 2R]₊² / (2δ²))
//! ```
//!
//! for every 1-Lipschitz `f`. [`herbst_tail_check`] verifies this on large
//! samples, [`convex_lsi_check`] verifies the convex-function log-Sobolev
//! inequality with constant `8(δ² + 4R²)`, [`inf_convolution_identity`]
//! checks the quadratic inf-convolution identity behind that constant, and
//! [`conjecture_sweep`] records log-Sobolev lower estimates for families of
//! discrete measures against the dimension-free candidate bounds.

use rand::Rng as _;
use rayon::prelude::*;

use crate::bounds;
use crate::error::{Error, Result};
use crate::grid::GridDomain;
use crate::measure::{dot, norm, norm_sq, BallMeasure, SmoothedMeasure};
use crate::rng;
use crate::spectral;

/// 1-Lipschitz test functions, certified by construction.
#[derive(Debug, Clone)]
pub enum LipschitzSpec {
    /// `x ↦ u·x` for a unit vector `u`.
    Linear { direction: Vec<f64> },
    /// `x ↦ |x - p|`.
    DistanceTo { point: Vec<f64> },
    /// `x ↦ max_i x_i`.
    MaxCoordinate,
}

impl LipschitzSpec {
    /// Normalizes the direction; zero directions are rejected.
    pub fn linear(direction: Vec<f64>) -> Result<Self> {
        let n = norm(&direction);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::invalid("linear spec needs a nonzero direction"));
        }
        Ok(LipschitzSpec::Linear {
            direction: direction.into_iter().map(|x| x / n).collect(),
        })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            LipschitzSpec::Linear { direction } => dot(direction, x),
            LipschitzSpec::DistanceTo { point } => crate::measure::dist_sq(x, point).sqrt(),
            LipschitzSpec::MaxCoordinate => x.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LipschitzSpec::Linear { .. } => "linear",
            LipschitzSpec::DistanceTo { .. } => "distance_to",
            LipschitzSpec::MaxCoordinate => "max_coordinate",
        }
    }
}

/// Tail comparison at one threshold.
#[derive(Debug, Clone)]
pub struct TailPoint {
    pub t: f64,
    pub empirical: f64,
    pub standard_error: f64,
    pub bound: f64,
    pub violated: bool,
}

/// Result of a Herbst-style tail check.
#[derive(Debug, Clone)]
pub struct TailCheckReport {
    pub points: Vec<TailPoint>,
    pub violations: usize,
    /// Empirical mean from the independent calibration batch.
    pub m_hat: f64,
    /// Its standard error (the bound is evaluated at `t - 3·SE(m̂)` to stay
    /// conservative about the mean estimate).
    pub m_hat_se: f64,
    /// `t_ε = 2R/(1-√ε)`: beyond it the `exp(-εt²/(2δ²))` form applies.
    pub eps: f64,
    pub t_eps: f64,
    pub n_samples: usize,
    pub seed: u64,
}

/// Monte Carlo check of `P(f(S) ≥ m̂ + t) ≤ exp(-[t-2R]₊²/(2δ²))`.
///
/// The mean `m̂` comes from an independent batch of the same size; its
/// 3-sigma uncertainty is folded into the bound by shifting `t`. A point
/// counts as violated only when `empirical - 3·SE > bound`.
pub fn herbst_tail_check(
    sm: &SmoothedMeasure,
    f: &LipschitzSpec,
    t_grid: &[f64],
    n: usize,
    eps: f64,
    seed: u64,
) -> Result<TailCheckReport> {
    if n < 100_000 {
        return Err(Error::invalid("tail check needs n >= 1e5 samples"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must be in (0,1), got {eps}")));
    }
    if t_grid.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::invalid("thresholds must be nonnegative"));
    }
    let delta = sm.delta();
    let r = sm.radius();

    // independent calibration batch for the mean
    let mean_batch = sm.sample(n, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    let mut m_hat = 0.0;
    let mut m2 = 0.0;
    for s in &mean_batch {
        let v = f.eval(s);
        m_hat += v;
        m2 += v * v;
    }
    m_hat /= n as f64;
    m2 /= n as f64;
    let m_hat_se = ((m2 - m_hat * m_hat).max(0.0) / n as f64).sqrt();

    let samples = sm.sample(n, seed)?;
    let values: Vec<f64> = samples.iter().map(|s| f.eval(s)).collect();
    let mut points = Vec::with_capacity(t_grid.len());
    let mut violations = 0usize;
    for &t in t_grid {
        let count = values.iter().filter(|&&v| v >= m_hat + t).count();
        let p = count as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let t_eff = (t - 3.0 * m_hat_se).max(0.0);
        let slack = (t_eff - 2.0 * r).max(0.0);
        let bound = (-slack * slack / (2.0 * delta * delta)).exp();
        let violated = p - 3.0 * se > bound;
        if violated {
            violations += 1;
        }
        points.push(TailPoint {
            t,
            empirical: p,
            standard_error: se,
            bound,
            violated,
        });
    }
    Ok(TailCheckReport {
        points,
        violations,
        m_hat,
        m_hat_se,
        eps,
        t_eps: 2.0 * r / (1.0 - eps.sqrt()),
        n_samples: n,
        seed,
    })
}

/// Applicability report for the intermediate-variance region.
#[derive(Debug, Clone)]
pub struct KappaRegionReport {
    /// `κ_δ = R²/δ⁴ - 1/δ²` (positive concavity defect).
    pub kappa: f64,
    /// Whether `R/√2 < δ < R`.
    pub in_band: bool,
    /// Whether `ε/(2δ²) ≥ κ_δ/2`, equivalently `R/δ < √(1+ε)`.
    pub hypothesis_holds: bool,
    /// The concentration threshold `t_ε = 2R/(1-√ε)`.
    pub t_eps: f64,
    pub applicable: bool,
}

/// Checks the hypothesis region for the curvature-plus-concentration
/// argument in `R/√2 < δ < R`. Qualitative only: the log-Sobolev constant
/// this route produces exists but is not explicit, so nothing numeric is
/// asserted beyond the region arithmetic.
pub fn kappa_region(delta: f64, radius: f64, eps: f64) -> Result<KappaRegionReport> {
    if !(delta > 0.0) || !(radius >= 0.0) {
        return Err(Error::invalid("need delta > 0 and R >= 0"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must be in (0,1), got {eps}")));
    }
    let d2 = delta * delta;
    let kappa = radius * radius / (d2 * d2) - 1.0 / d2;
    let in_band = delta > radius / std::f64::consts::SQRT_2 && delta < radius;
    let hypothesis_holds = radius / delta < (1.0 + eps).sqrt();
    Ok(KappaRegionReport {
        kappa,
        in_band,
        hypothesis_holds,
        t_eps: 2.0 * radius / (1.0 - eps.sqrt()),
        applicable: in_band && hypothesis_holds,
    })
}

/// Convex test functions, convex by construction (affine, max of affines,
/// PSD-quadratic plus affine; the family is closed under max, sum, and
/// affine precomposition, and numeric convexity testing stays out of it).
#[derive(Debug, Clone)]
pub enum ConvexSpec {
    Affine {
        a: Vec<f64>,
        b: f64,
    },
    MaxAffine {
        pieces: Vec<(Vec<f64>, f64)>,
    },
    /// `½ Σ qᵢ xᵢ² + a·x` with `qᵢ ≥ 0`.
    QuadraticAffine {
        q_diag: Vec<f64>,
        a: Vec<f64>,
    },
}

impl ConvexSpec {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ConvexSpec::Affine { a, b } => dot(a, x) + b,
            ConvexSpec::MaxAffine { pieces } => pieces
                .iter()
                .map(|(a, b)| dot(a, x) + b)
                .fold(f64::NEG_INFINITY, f64::max),
            ConvexSpec::QuadraticAffine { q_diag, a } => {
                0.5 * x.iter().zip(q_diag).map(|(xi, qi)| qi * xi * xi).sum::<f64>()
                    + dot(a, x)
            }
        }
    }

    /// A subgradient (the gradient of the active piece).
    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ConvexSpec::Affine { a, .. } => a.clone(),
            ConvexSpec::MaxAffine { pieces } => {
                let best = pieces
                    .iter()
                    .max_by(|(a1, b1), (a2, b2)| {
                        (dot(a1, x) + b1).partial_cmp(&(dot(a2, x) + b2)).unwrap()
                    })
                    .expect("nonempty pieces");
                best.0.clone()
            }
            ConvexSpec::QuadraticAffine { q_diag, a } => x
                .iter()
                .zip(q_diag)
                .zip(a)
                .map(|((xi, qi), ai)| qi * xi + ai)
                .collect(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ConvexSpec::Affine { .. } => "affine",
            ConvexSpec::MaxAffine { .. } => "max_affine",
            ConvexSpec::QuadraticAffine { .. } => "quadratic_affine",
        }
    }
}

/// The built-in convex family used by the acceptance runs.
pub fn builtin_convex_family(d: usize, seed: u64) -> Vec<ConvexSpec> {
    let mut rng = rng::seeded(seed);
    let mut fam = Vec::new();
    let unit = |rng: &mut rng::Rng| -> Vec<f64> {
        let raw: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm(&raw).max(1e-9);
        raw.iter().map(|x| x / n).collect()
    };
    for scale in [0.5, 1.0] {
        let a: Vec<f64> = unit(&mut rng).iter().map(|x| x * scale).collect();
        fam.push(ConvexSpec::Affine { a, b: 0.0 });
    }
    for pieces_n in [2usize, 3] {
        let pieces: Vec<(Vec<f64>, f64)> = (0..pieces_n)
            .map(|_| {
                let a: Vec<f64> = unit(&mut rng).iter().map(|x| x * 0.8).collect();
                (a, rng.gen_range(-0.5..0.5))
            })
            .collect();
        fam.push(ConvexSpec::MaxAffine { pieces });
    }
    for qscale in [0.2, 0.5] {
        let q_diag: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..qscale)).collect();
        let a: Vec<f64> = unit(&mut rng).iter().map(|x| 0.5 * x).collect();
        fam.push(ConvexSpec::QuadraticAffine { q_diag, a });
    }
    fam
}

/// One convex log-Sobolev trial.
#[derive(Debug, Clone)]
pub struct ConvexRatioRow {
    pub member: String,
    pub entropy: f64,
    pub energy: f64,
    pub ratio: Option<f64>,
    pub skipped: bool,
}

/// Result of [`convex_lsi_check`].
#[derive(Debug, Clone)]
pub struct ConvexLsiReport {
    pub rows: Vec<ConvexRatioRow>,
    pub max_ratio: f64,
    /// `8(δ² + 4R²)`.
    pub bound: f64,
    pub pass: bool,
}

/// Checks `Ent(e^f) ≤ 8(δ² + 4R²) ∫|∇f|² e^f d(μ⋆γ_δ)` on a convex family
/// by grid quadrature (`d ≤ 2`). Constant members are skipped (0/0).
///
/// For linear `f = a·x` on the pure Gaussian the ratio is `δ²/2`
/// (exponential-moment identity), comfortably inside the bound.
pub fn convex_lsi_check(
    sm: &SmoothedMeasure,
    family: &[ConvexSpec],
    grid: &GridDomain,
) -> Result<ConvexLsiReport> {
    let (rho, _) = grid.density_weights(sm)?;
    let mut rows = Vec::new();
    let mut max_ratio = f64::NEG_INFINITY;
    for (k, spec) in family.iter().enumerate() {
        let mut logits = Vec::with_capacity(rho.len());
        let mut fvals = Vec::with_capacity(rho.len());
        let mut gsq = Vec::with_capacity(rho.len());
        for idx in 0..rho.len() {
            let z = grid.node(idx);
            let fv = spec.eval(&z);
            let gv = spec.grad(&z);
            fvals.push(fv);
            gsq.push(norm_sq(&gv));
            logits.push(if rho[idx] > 0.0 {
                rho[idx].ln() + fv
            } else {
                f64::NEG_INFINITY
            });
        }
        let log_s = crate::quad::logsumexp(&logits);
        let mut tilted_f = 0.0;
        let mut tilted_g = 0.0;
        for i in 0..rho.len() {
            let w = (logits[i] - log_s).exp();
            tilted_f += w * fvals[i];
            tilted_g += w * gsq[i];
        }
        // Ent(e^f)/E[e^f] = E_tilt[f] - log E[e^f]; the common E[e^f]
        // factor cancels against the energy in the ratio
        let entropy = tilted_f - log_s;
        let energy = tilted_g;
        if energy <= 1e-14 {
            rows.push(ConvexRatioRow {
                member: format!("{}_{k}", spec.name()),
                entropy,
                energy,
                ratio: None,
                skipped: true,
            });
            continue;
        }
        let ratio = entropy / energy;
        max_ratio = max_ratio.max(ratio);
        rows.push(ConvexRatioRow {
            member: format!("{}_{k}", spec.name()),
            entropy,
            energy,
            ratio: Some(ratio),
            skipped: false,
        });
    }
    let bound = bounds::bound_convex_lsi(sm.delta(), sm.radius())?
        .value
        .expect("always applicable");
    Ok(ConvexLsiReport {
        rows,
        max_ratio,
        bound,
        pass: max_ratio <= bound * (1.0 + 1e-3),
    })
}

/// Result of the inf-convolution identity check.
#[derive(Debug, Clone)]
pub struct InfConvReport {
    pub trials: usize,
    pub max_abs_error: f64,
    pub pass: bool,
}

/// Verifies `inf_{y₁+y₂=y} { |x₁-y₁|²/(16R²) + |x₂-y₂|²/(4δ²) }
/// = |x₁+x₂-y|²/(4(δ²+4R²))` on random inputs.
///
/// The minimization is an independent coordinatewise ternary search, not
/// the stationarity solution, so the identity is actually exercised.
pub fn inf_convolution_identity(
    radius: f64,
    delta: f64,
    d: usize,
    trials: usize,
    seed: u64,
) -> Result<InfConvReport> {
    if !(radius > 0.0) || !(delta > 0.0) {
        return Err(Error::invalid("need R > 0 and delta > 0"));
    }
    let mut rng = rng::seeded(seed);
    let ca = 1.0 / (16.0 * radius * radius);
    let cb = 1.0 / (4.0 * delta * delta);
    let c_total = delta * delta + 4.0 * radius * radius;
    let mut max_err = 0.0f64;
    for _ in 0..trials {
        let x1: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let x2: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
        // separable across coordinates: ternary-search each one
        let mut found = 0.0;
        for k in 0..d {
            let objective = |y1: f64| {
                ca * (x1[k] - y1) * (x1[k] - y1)
                    + cb * (x2[k] - (y[k] - y1)) * (x2[k] - (y[k] - y1))
            };
            let (mut lo, mut hi) = (-20.0f64, 20.0f64);
            for _ in 0..200 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                if objective(m1) < objective(m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            found += objective(0.5 * (lo + hi));
        }
        let gap: f64 = (0..d).map(|k| x1[k] + x2[k] - y[k]).map(|v| v * v).sum();
        let closed = gap / (4.0 * c_total);
        max_err = max_err.max((found - closed).abs());
    }
    Ok(InfConvReport {
        trials,
        max_abs_error: max_err,
        pass: max_err <= 1e-9,
    })
}

/// One cell of the conjecture sweep.
#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub d: usize,
    pub n_atoms: usize,
    pub seed: u64,
    /// FNV-1a digest of the measure's text form.
    pub measure_digest: u64,
    pub estimator: String,
    pub lsi_lower_estimate: f64,
    /// Standard error for MC-backed estimates (`d > 2`).
    pub standard_error: f64,
    pub poincare_estimate: Option<f64>,
    /// The dimension-free candidate: min of the radial/1D formula value and
    /// twice the Poincaré bound.
    pub candidate_bound: f64,
    pub ratio: f64,
    /// `investigate` when the estimate exceeds twice the candidate.
    pub flag: &'static str,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Structured candidate measures for a given dimension.
fn structured_candidates(
    d: usize,
    n: usize,
    radius: f64,
    seed: u64,
) -> Vec<(String, BallMeasure)> {
    let mut out = Vec::new();
    // the classical two-point candidate ±R e₁ (bounded constant by
    // tensorization; kept as the reference row)
    let mut plus = vec![0.0; d];
    plus[0] = radius;
    let mut minus = vec![0.0; d];
    minus[0] = -radius;
    out.push((
        "two_point".to_string(),
        BallMeasure::uniform(vec![plus, minus]).expect("valid"),
    ));
    if d >= 2 {
        out.push((
            "simplex".to_string(),
            BallMeasure::uniform(simplex_vertices(d, radius)).expect("valid"),
        ));
    }
    let mut rng = rng::derive(seed, 0xfeed);
    let sphere: Vec<Vec<f64>> = (0..n.max(2))
        .map(|_| {
            let raw: Vec<f64> = (0..d)
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect();
            let nr = norm(&raw).max(1e-12);
            raw.iter().map(|x| x * radius / nr).collect()
        })
        .collect();
    out.push((
        "sphere_points".to_string(),
        BallMeasure::uniform(sphere).expect("valid"),
    ));
    out
}

/// Vertices of a regular simplex with `d + 1` points on the radius-`r`
/// sphere in `R^d`.
fn simplex_vertices(d: usize, r: f64) -> Vec<Vec<f64>> {
    // standard-basis embedding in R^{d+1}, centered, expressed in an
    // orthonormal basis of the sum-zero hyperplane
    let mut verts: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    let c = 1.0 / (d + 1) as f64;
    for i in 0..=d {
        let mut v = vec![-c; d + 1];
        v[i] += 1.0;
        verts.push(v);
    }
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    for i in 0..d {
        let mut v = vec![0.0; d + 1];
        v[i] = 1.0;
        v[d] = -1.0;
        for b in &basis {
            let proj = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= proj * bi;
            }
        }
        let nv = norm(&v);
        basis.push(v.iter().map(|x| x / nv).collect());
    }
    verts
        .into_iter()
        .map(|v| {
            let coords: Vec<f64> = basis.iter().map(|b| dot(&v, b)).collect();
            let nc = norm(&coords);
            coords.iter().map(|x| x * r / nc).collect()
        })
        .collect()
}

/// Sweeps the conjecture landscape: for each dimension, random `N(d)`-point
/// measures plus structured candidates, each scored by the
/// exponential-family lower estimate against the dimension-free candidate
/// bounds. Records data only — no counterexample claims are made.
///
/// Cells run in parallel; per-cell seeds derive from the run seed and the
/// cell index, so output is independent of scheduling.
#[allow(clippy::too_many_arguments)]
pub fn conjecture_sweep(
    d_list: &[usize],
    n_schedule: &(dyn Fn(usize) -> usize + Sync),
    radius: f64,
    delta: f64,
    per_d_trials: usize,
    mc_samples: usize,
    seed: u64,
) -> Result<Vec<SweepRecord>> {
    if !(radius > 0.0) || !(delta > 0.0) {
        return Err(Error::invalid("need R > 0 and delta > 0"));
    }
    let dim_free_candidate = {
        let dim1 = bounds::bound_lsi_dim1(delta, radius)?.value_or_inf();
        let cp = bounds::bound_poincare(delta, radius)?.value_or_inf();
        dim1.min(2.0 * cp)
    };

    // enumerate cells up front so parallel execution cannot reorder output
    struct Cell {
        d: usize,
        name: String,
        base: BallMeasure,
        cell_seed: u64,
    }
    let mut cells = Vec::new();
    let mut index = 0u64;
    for &d in d_list {
        let n = n_schedule(d);
        if n == 0 {
            return Err(Error::invalid(format!("N schedule gives 0 atoms at d = {d}")));
        }
        for (name, base) in structured_candidates(d, n, radius, seed ^ d as u64) {
            cells.push(Cell {
                d,
                name,
                base,
                cell_seed: index,
            });
            index += 1;
        }
        for trial in 0..per_d_trials {
            let mut cell_rng = rng::derive(seed, index);
            let atoms: Vec<Vec<f64>> = (0..n)
                .map(|_| loop {
                    let a: Vec<f64> = (0..d)
                        .map(|_| cell_rng.gen_range(-radius..radius))
                        .collect();
                    if norm(&a) <= radius {
                        break a;
                    }
                })
                .collect();
            cells.push(Cell {
                d,
                name: format!("random_{trial}"),
                base: BallMeasure::new(atoms, vec![1.0 / n as f64; n])?.with_radius(radius)?,
                cell_seed: index,
            });
            index += 1;
        }
    }

    cells
        .par_iter()
        .map(|cell| -> Result<SweepRecord> {
            let sm = SmoothedMeasure::new(cell.base.clone().with_radius(radius)?, delta)?;
            let digest = fnv1a(sm.to_text().as_bytes());
            let thetas = spectral::default_theta_grid(&sm);
            let mc_seed = rng::derive(seed, cell.cell_seed).gen::<u64>();
            let (estimate, se, estimator) = if cell.d <= 2 {
                let est = spectral::estimate_lsi_expfamily(&sm, &thetas)?;
                (est.value, est.quadrature_error, "expfamily_quadrature")
            } else {
                let (v, _, se) =
                    spectral::estimate_lsi_expfamily_mc(&sm, &thetas, mc_samples, mc_seed)?;
                (v, se, "expfamily_mc")
            };
            let poincare = if cell.d == 1 {
                let grid = GridDomain::default_for(&sm)?;
                Some(spectral::estimate_poincare(&sm, &grid)?.constant_estimate)
            } else {
                None
            };
            Ok(SweepRecord {
                d: cell.d,
                n_atoms: cell.base.len(),
                seed: cell.cell_seed,
                measure_digest: digest,
                estimator: format!("{}_{}", estimator, cell.name),
                lsi_lower_estimate: estimate,
                standard_error: se,
                poincare_estimate: poincare,
                candidate_bound: dim_free_candidate,
                ratio: estimate / dim_free_candidate,
                flag: if estimate > 2.0 * dim_free_candidate {
                    "investigate"
                } else {
                    "ok"
                },
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn gaussian(delta: f64, d: usize) -> SmoothedMeasure {
        SmoothedMeasure::new(BallMeasure::dirac(vec![0.0; d]).unwrap(), delta).unwrap()
    }

    fn two_point(r: f64, delta: f64, d: usize) -> SmoothedMeasure {
        let mut plus = vec![0.0; d];
        plus[0] = r;
        let mut minus = vec![0.0; d];
        minus[0] = -r;
        let base = BallMeasure::uniform(vec![plus, minus]).unwrap();
        SmoothedMeasure::new(base, delta).unwrap()
    }

    #[test]
    fn gaussian_tail_matches_subgaussian_bound() {
        let sm = gaussian(1.0, 1);
        let f = LipschitzSpec::linear(vec![1.0]).unwrap();
        let t_grid = [0.5, 1.0, 1.5, 2.0, 3.0];
        let rep = herbst_tail_check(&sm, &f, &t_grid, 200_000, 0.5, 7).unwrap();
        assert_eq!(rep.violations, 0);
        for p in &rep.points {
            assert!(p.empirical <= p.bound + 3.0 * p.standard_error);
        }
        assert_eq!(rep.t_eps, 0.0);
    }

    #[test]
    fn small_thresholds_cannot_violate() {
        // t ≤ 2R makes the bound 1
        let sm = two_point(0.8, 0.5, 2);
        let f = LipschitzSpec::linear(vec![1.0, 0.0]).unwrap();
        let rep = herbst_tail_check(&sm, &f, &[0.0, 0.5, 1.0], 100_000, 0.25, 3).unwrap();
        for p in &rep.points {
            if p.t <= 2.0 * 0.8 {
                assert_eq!(p.bound, 1.0);
                assert!(!p.violated);
            }
        }
        assert_relative_eq!(rep.t_eps, 2.0 * 0.8 / (1.0 - 0.5), max_relative = 1e-12);
    }

    #[test]
    fn high_dim_two_point_zero_violations() {
        let sm = two_point(1.0, 0.7, 8);
        let f = LipschitzSpec::linear(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let t_grid: Vec<f64> = (0..8).map(|k| 0.5 * k as f64).collect();
        let rep = herbst_tail_check(&sm, &f, &t_grid, 1_000_000, 0.5, 11).unwrap();
        assert_eq!(rep.violations, 0);

        let dist = LipschitzSpec::DistanceTo { point: vec![0.0; 8] };
        let rep = herbst_tail_check(&sm, &dist, &t_grid, 200_000, 0.5, 13).unwrap();
        assert_eq!(rep.violations, 0);

        let rep =
            herbst_tail_check(&sm, &LipschitzSpec::MaxCoordinate, &t_grid, 200_000, 0.5, 17)
                .unwrap();
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn lipschitz_spec_guards() {
        assert!(LipschitzSpec::linear(vec![0.0, 0.0]).is_err());
        let sm = gaussian(1.0, 1);
        let f = LipschitzSpec::linear(vec![1.0]).unwrap();
        assert!(herbst_tail_check(&sm, &f, &[1.0], 10, 0.5, 1).is_err());
        assert!(herbst_tail_check(&sm, &f, &[1.0], 100_000, 1.5, 1).is_err());
        assert!(herbst_tail_check(&sm, &f, &[-1.0], 100_000, 0.5, 1).is_err());
    }

    #[test]
    fn kappa_region_cases() {
        let rep = kappa_region(1.0, 1.0, 0.5).unwrap();
        assert_abs_diff_eq!(rep.kappa, 0.0, epsilon = 1e-12);
        assert!(!rep.in_band);

        // δ = 0.8R, ε = 0.7: R/δ = 1.25 < √1.7 ≈ 1.304 → applicable
        let rep = kappa_region(0.8, 1.0, 0.7).unwrap();
        assert!(rep.in_band && rep.hypothesis_holds && rep.applicable);
        assert!(rep.kappa > 0.0);

        // δ ≤ R/√2: outside the band
        let rep = kappa_region(0.7, 1.0, 0.7).unwrap();
        assert!(!rep.in_band && !rep.applicable);
    }

    #[test]
    fn convex_lsi_gaussian_linear_ratio() {
        let sm = gaussian(1.0, 1);
        let grid = GridDomain::new(1, 8.0, 1501).unwrap();
        let fam = vec![ConvexSpec::Affine {
            a: vec![0.8],
            b: 0.3,
        }];
        let rep = convex_lsi_check(&sm, &fam, &grid).unwrap();
        // exponential-moment identity: ratio = δ²/2 for linear f
        let got = rep.rows[0].ratio.unwrap();
        assert_relative_eq!(got, 0.5, max_relative = 1e-4);
        assert!(rep.pass);
    }

    #[test]
    fn convex_lsi_family_respects_bound() {
        for (r, delta, d) in [(0.8, 0.6, 1usize), (0.5, 1.0, 2)] {
            let sm = two_point(r, delta, d);
            let grid = GridDomain::default_for(&sm).unwrap();
            let fam = builtin_convex_family(d, 5);
            let rep = convex_lsi_check(&sm, &fam, &grid).unwrap();
            assert!(
                rep.pass,
                "max ratio {} vs bound {} at (R={r}, delta={delta}, d={d})",
                rep.max_ratio, rep.bound
            );
            assert!(rep.rows.iter().all(|row| !row.skipped));
        }
        // constant members are skipped
        let sm = gaussian(1.0, 1);
        let grid = GridDomain::new(1, 7.0, 301).unwrap();
        let fam = vec![ConvexSpec::Affine {
            a: vec![0.0],
            b: 2.0,
        }];
        let rep = convex_lsi_check(&sm, &fam, &grid).unwrap();
        assert!(rep.rows[0].skipped);
    }

    #[test]
    fn inf_convolution_identity_holds() {
        let rep = inf_convolution_identity(0.9, 0.6, 1, 2000, 3).unwrap();
        assert!(rep.pass, "max err {}", rep.max_abs_error);
        let rep = inf_convolution_identity(1.3, 0.4, 3, 500, 5).unwrap();
        assert!(rep.pass, "max err {}", rep.max_abs_error);
        assert!(inf_convolution_identity(0.0, 1.0, 1, 10, 1).is_err());
    }

    #[test]
    fn inf_convolution_split_weights() {
        // the minimizing split allocates the gap y - x₁ - x₂ to y₁ in
        // proportion 16R² : 4δ²
        let (radius, delta) = (0.9f64, 0.6f64);
        let ca = 1.0 / (16.0 * radius * radius);
        let cb = 1.0 / (4.0 * delta * delta);
        let (x1, x2, y) = (0.4, -0.7, 1.1);
        let y1_star = (ca * x1 + cb * (y - x2)) / (ca + cb);
        let frac = (y1_star - x1) / (y - x1 - x2);
        assert_relative_eq!(frac, cb / (ca + cb), max_relative = 1e-12);
        assert_relative_eq!(
            cb / (ca + cb),
            16.0 * radius * radius / (16.0 * radius * radius + 4.0 * delta * delta),
            max_relative = 1e-12
        );
    }

    #[test]
    fn sweep_is_deterministic_and_sane() {
        let schedule = |d: usize| d.max(2);
        let a = conjecture_sweep(&[1, 3], &schedule, 1.0, 0.8, 2, 20_000, 42).unwrap();
        let b = conjecture_sweep(&[1, 3], &schedule, 1.0, 0.8, 2, 20_000, 42).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.measure_digest, y.measure_digest);
            assert_eq!(x.lsi_lower_estimate.to_bits(), y.lsi_lower_estimate.to_bits());
        }
        // the exponential-family estimate cannot exceed the true constant,
        // which these candidates keep below the dimension-free bound
        for rec in &a {
            assert!(rec.lsi_lower_estimate > 0.0);
            assert_eq!(rec.flag, "ok", "record {rec:?}");
            if rec.d == 1 {
                assert!(rec.poincare_estimate.is_some());
            }
        }
    }

    #[test]
    fn sweep_single_atom_gives_gaussian_constant() {
        // N = 1: pure Gaussian, estimate ≈ 2δ² at every d
        let schedule = |_: usize| 1usize;
        let recs = conjecture_sweep(&[1, 4], &schedule, 1.0, 0.9, 1, 60_000, 7).unwrap();
        let expected = 2.0 * 0.9 * 0.9;
        for rec in recs.iter().filter(|r| r.estimator.contains("random")) {
            let tol = if rec.d <= 2 {
                1e-6
            } else {
                5.0 * rec.standard_error.max(0.01)
            };
            assert!(
                (rec.lsi_lower_estimate - expected).abs() <= tol + 0.05 * expected,
                "d = {}: estimate {} vs 2δ² = {expected}",
                rec.d,
                rec.lsi_lower_estimate
            );
        }
    }

    #[test]
    fn simplex_vertices_are_regular() {
        let verts = simplex_vertices(3, 1.0);
        assert_eq!(verts.len(), 4);
        for v in &verts {
            assert_relative_eq!(norm(v), 1.0, max_relative = 1e-12);
        }
        let d01 = crate::measure::dist_sq(&verts[0], &verts[1]);
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert_relative_eq!(
                    crate::measure::dist_sq(&verts[i], &verts[j]),
                    d01,
                    max_relative = 1e-10
                );
            }
        }
    }
}
