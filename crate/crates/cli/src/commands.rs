//! Subcommand implementations.
//!
//! Every command returns `Ok(true)` when all of its assertions hold,
//! `Ok(false)` when the run completed but an assertion failed (exit 2), and
//! `Err` for input or solver problems (exit 1).

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;

use gfi_core::bounds;
use gfi_core::concentration::{
    builtin_convex_family, convex_lsi_check, herbst_tail_check, inf_convolution_identity,
    kappa_region, conjecture_sweep, LipschitzSpec,
};
use gfi_core::decomp::{miclo_convexity_check, miclo_decompose, QuadSpec};
use gfi_core::grid::GridDomain;
use gfi_core::measure::SmoothedMeasure;
use gfi_core::spectral;
use gfi_core::transport::{verify_transport_entropy, CostKind, CostSpec};

use crate::artifacts::{file_digest, ArtifactDir};
use crate::config::Config;

pub struct Ctx {
    pub cfg: Config,
    pub out: ArtifactDir,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub config_digest: Option<String>,
}

impl Ctx {
    fn load_measure(&self) -> Result<(SmoothedMeasure, PathBuf, String)> {
        let path = self
            .cfg
            .string("measure")
            .ok_or_else(|| anyhow!("config key `measure` (path to a measure file) is required"))?;
        let path = PathBuf::from(path);
        let sm = SmoothedMeasure::from_file(&path)
            .with_context(|| format!("loading measure {}", path.display()))?;
        let digest = file_digest(&path)?;
        Ok((sm, path, digest))
    }

    fn finish(&self, command: &str, measure_digest: Option<String>) -> Result<()> {
        self.cfg.reject_unknown()?;
        self.out.write_manifest(
            command,
            self.seed,
            self.jobs,
            self.config_digest.clone(),
            measure_digest,
        )?;
        Ok(())
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => "inapplicable".to_string(),
    }
}

/// `bounds`: evaluate the whole catalog over a parameter lattice.
pub fn cmd_bounds(ctx: &Ctx) -> Result<bool> {
    let deltas = ctx.cfg.f64_list("delta_list", &[0.5, 1.0, 2.0])?;
    let radii = ctx.cfg.f64_list("r_list", &[0.5, 1.0, 2.0])?;
    let dims = ctx.cfg.usize_list("d_list", &[1, 2])?;
    let ns = ctx.cfg.usize_list("n_list", &[])?;
    let c_prime = ctx.cfg.f64("c_prime", 1.0)?;
    let radial = ctx.cfg.bool("radial", false)?;
    if deltas.is_empty() || radii.is_empty() || dims.is_empty() {
        bail!("delta_list, r_list and d_list must be nonempty");
    }
    let mut rows = Vec::new();
    for &delta in &deltas {
        for &r in &radii {
            for &d in &dims {
                let n_opt = ns.first().copied();
                let mut reports = vec![
                    bounds::bound_poincare(delta, r)?,
                    bounds::bound_lsi_large_variance(delta, r)?,
                    bounds::bound_lsi_large_variance_corrected(delta, r)?,
                    bounds::bound_lsi_dim1(delta, r)?,
                    bounds::bound_lsi_miclo(delta, r, d)?,
                    bounds::bound_lsi_lyapunov(delta, r, d)?,
                    bounds::bound_lsi_zimmermann(delta, r, d)?,
                    bounds::bound_transport(delta, r, c_prime)?,
                    bounds::bound_convex_lsi(delta, r)?,
                    bounds::best_bound(delta, r, d, n_opt, radial)?,
                ];
                if let Some(n) = n_opt {
                    reports.push(bounds::bound_lsi_discrete(delta, r, n)?);
                }
                for b in reports {
                    rows.push(format!(
                        "{},{},{},{},{},{},{},{},{}",
                        b.name,
                        delta,
                        r,
                        d,
                        n_opt.map_or(String::new(), |n| n.to_string()),
                        fmt_opt(b.value),
                        b.valid,
                        b.dimension_free,
                        b.source.replace(',', ";")
                    ));
                }
            }
        }
    }
    ctx.out
        .write_csv("bounds.csv", "name,delta,R,d,N,value,valid,dimension_free,source", &rows)?;
    ctx.finish("bounds", None)?;
    Ok(true)
}

/// `estimate`: spectral-gap or log-Sobolev estimation on a grid.
pub fn cmd_estimate(ctx: &Ctx) -> Result<bool> {
    let (sm, _, digest) = ctx.load_measure()?;
    let method = ctx
        .cfg
        .string("method")
        .unwrap_or_else(|| "poincare".to_string());
    let default_n = if sm.dimension() == 1 { 2001 } else { 201 };
    let n = ctx.cfg.usize("grid_n", default_n)?;
    let half = ctx
        .cfg
        .f64("grid_half_width", sm.radius() + 6.0 * sm.delta())?;
    let grid = GridDomain::new(sm.dimension(), half, n)?;
    let iterations = ctx.cfg.usize("iterations", 200)?;

    let grid_meta = json!({
        "dimension": grid.dimension(),
        "half_width": grid.half_width(),
        "nodes_per_axis": grid.nodes_per_axis(),
        "spacing": grid.spacing(),
    });
    let payload = match method.as_str() {
        "poincare" => {
            let r = spectral::estimate_poincare(&sm, &grid)?;
            json!({
                "method": "poincare",
                "estimate": r.constant_estimate,
                "eigenvalue": r.eigenvalue,
                "residual": r.residual,
                "residual_tolerance": r.residual_tolerance,
                "grid": grid_meta,
                "seed": ctx.seed,
            })
        }
        "lsi-exp" => {
            let est = spectral::estimate_lsi_expfamily(&sm, &spectral::default_theta_grid(&sm))?;
            json!({
                "method": "lsi-exp",
                "estimate": est.value,
                "residual": est.quadrature_error,
                "best_theta": est.best_theta,
                "grid": grid_meta,
                "seed": ctx.seed,
            })
        }
        "lsi-grid" => {
            let est = spectral::estimate_lsi_grid(&sm, &grid, iterations, ctx.seed)?;
            json!({
                "method": "lsi-grid",
                "estimate": est.value,
                "residual": null,
                "iterations_used": est.iterations_used,
                "line_search_failed": est.line_search_failed,
                "grid": grid_meta,
                "seed": ctx.seed,
            })
        }
        other => bail!("unknown method {other:?} (expected poincare | lsi-exp | lsi-grid)"),
    };
    ctx.out.write_json("estimate.json", &payload)?;
    ctx.finish("estimate", Some(digest))?;
    Ok(true)
}

/// `decompose`: convex + bounded splitting with grid certificates.
pub fn cmd_decompose(ctx: &Ctx) -> Result<bool> {
    let (sm, _, digest) = ctx.load_measure()?;
    let sigma = ctx.cfg.string("sigma").map(|s| s.parse::<f64>()).transpose()?;
    let default_n = if sm.dimension() == 1 { 801 } else { 41 };
    let n = ctx.cfg.usize("grid_n", default_n)?;
    let grid = GridDomain::new(sm.dimension(), sm.radius() + 6.0 * sm.delta(), n)?;
    let dec = miclo_decompose(&sm, sigma, &QuadSpec::default())?;
    let cert = miclo_convexity_check(&dec, &grid)?;
    let assembled = dec.assembled_bound()?;
    let sup_ok = cert.numeric_sup_ub <= cert.sup_ub_bound + 1e-4;
    let curv_ok = cert.numeric_max_curvature <= cert.curvature_bound + 1e-4;
    let payload = json!({
        "sigma": dec.sigma,
        "rho_effective": dec.rho_effective,
        "sup_ub_bound": cert.sup_ub_bound,
        "numeric_sup_ub": cert.numeric_sup_ub,
        "curvature_bound": cert.curvature_bound,
        "numeric_max_curvature": cert.numeric_max_curvature,
        "convexity_margin": cert.numeric_min_uc_curvature - cert.rho_effective,
        "reconstruction_error": cert.reconstruction_error,
        "assembled_bound": assembled,
        "certificates_pass": sup_ok && curv_ok,
    });
    ctx.out.write_json("decompose.json", &payload)?;
    ctx.finish("decompose", Some(digest))?;
    Ok(sup_ok && curv_ok)
}

fn parse_cost(name: &str, d_scale: f64) -> Result<CostSpec> {
    Ok(match name {
        "quadratic" => CostSpec::new(CostKind::Quadratic),
        "l4sq" => CostSpec::new(CostKind::L4Sq),
        "composite" => CostSpec::new(CostKind::Composite),
        "tilde-k" => CostSpec::tilde_k(d_scale)?,
        other => bail!("unknown cost {other:?} (expected quadratic | l4sq | composite | tilde-k)"),
    })
}

/// `transport`: transport-entropy verification with exact OT.
pub fn cmd_transport(ctx: &Ctx) -> Result<bool> {
    let (sm, _, digest) = ctx.load_measure()?;
    let default_n = if sm.dimension() == 1 { 201 } else { 21 };
    let n = ctx.cfg.usize("grid_n", default_n)?;
    let cost_name = ctx.cfg.string("cost").unwrap_or_else(|| "l4sq".to_string());
    let d_scale = ctx.cfg.f64("d_scale", 1.0)?;
    let spec = parse_cost(&cost_name, d_scale)?;
    let c_prime = ctx.cfg.f64("c_prime", 1.0)?;
    let family_size = ctx.cfg.usize("family_size", 20)?;
    let c_prime_limit = ctx.cfg.f64("c_prime_limit", 1e3)?;
    let grid = GridDomain::new(sm.dimension(), sm.radius() + 6.0 * sm.delta(), n)?;
    let v = verify_transport_entropy(&sm, &grid, &spec, family_size, None, ctx.seed)?;

    let bound = bounds::bound_transport(sm.delta(), sm.radius(), c_prime)?
        .value
        .expect("transport bound always applies");
    let mut rows = Vec::new();
    for row in &v.rows {
        rows.push(format!(
            "{},{},{},{},{},{},{}",
            row.member,
            cost_name,
            row.t_value,
            row.h_value,
            row.ratio.map_or("skipped".to_string(), |r| format!("{r}")),
            bound,
            row.ratio.is_none_or(|r| r <= bound)
        ));
    }
    ctx.out.write_csv(
        "transport.csv",
        "family_member,cost_kind,T_value,H_value,ratio,bound,pass",
        &rows,
    )?;
    let pass = v.empirical_c_prime <= c_prime_limit;
    ctx.out.write_json(
        "transport.json",
        &json!({
            "cost": cost_name,
            "max_ratio": v.max_ratio,
            "empirical_c_prime": v.empirical_c_prime,
            "c_prime_limit": c_prime_limit,
            "configured_c_prime": c_prime,
            "pass": pass,
            "family_size": family_size,
            "seed": ctx.seed,
        }),
    )?;
    ctx.finish("transport", Some(digest))?;
    Ok(pass)
}

/// `concentration`: tail checks plus the convex log-Sobolev and
/// inf-convolution verifications.
pub fn cmd_concentration(ctx: &Ctx) -> Result<bool> {
    let (sm, _, digest) = ctx.load_measure()?;
    let samples = ctx.cfg.usize("samples", 200_000)?;
    let eps = ctx.cfg.f64("eps", 0.5)?;
    let t_count = ctx.cfg.usize("t_count", 8)?;
    let t_max = ctx
        .cfg
        .f64("t_max", 2.0 * sm.radius() + 4.0 * sm.delta())?;
    let trials = ctx.cfg.usize("trials", 2000)?;
    let t_grid: Vec<f64> = (0..t_count)
        .map(|k| t_max * k as f64 / (t_count.max(2) - 1) as f64)
        .collect();
    let d = sm.dimension();
    let mut specs = vec![
        LipschitzSpec::linear({
            let mut e = vec![0.0; d];
            e[0] = 1.0;
            e
        })?,
        LipschitzSpec::DistanceTo { point: vec![0.0; d] },
        LipschitzSpec::MaxCoordinate,
    ];
    if d >= 2 {
        specs.push(LipschitzSpec::linear(vec![1.0; d])?);
    }
    let mut rows = Vec::new();
    let mut violations = 0usize;
    for (k, f) in specs.iter().enumerate() {
        let rep = herbst_tail_check(&sm, f, &t_grid, samples, eps, ctx.seed.wrapping_add(k as u64))?;
        violations += rep.violations;
        for p in &rep.points {
            rows.push(format!(
                "{},{},{},{},{},{}",
                f.name(),
                p.t,
                p.empirical,
                p.standard_error,
                p.bound,
                p.violated
            ));
        }
    }
    ctx.out.write_csv(
        "concentration.csv",
        "function,t,empirical,standard_error,bound,violated",
        &rows,
    )?;

    let convex = if d <= 2 {
        let grid = GridDomain::default_for(&sm)?;
        Some(convex_lsi_check(&sm, &builtin_convex_family(d, ctx.seed), &grid)?)
    } else {
        None
    };
    let infconv = if sm.radius() > 0.0 {
        Some(inf_convolution_identity(
            sm.radius(),
            sm.delta(),
            d.min(3),
            trials,
            ctx.seed,
        )?)
    } else {
        None
    };
    let kappa = kappa_region(sm.delta(), sm.radius(), eps)?;
    let convex_pass = convex.as_ref().is_none_or(|c| c.pass);
    let infconv_pass = infconv.as_ref().is_none_or(|c| c.pass);
    let pass = violations == 0 && convex_pass && infconv_pass;
    ctx.out.write_json(
        "concentration.json",
        &json!({
            "tail_violations": violations,
            "convex_lsi": convex.as_ref().map(|c| json!({
                "max_ratio": c.max_ratio,
                "bound": c.bound,
                "pass": c.pass,
            })),
            "inf_convolution": infconv.as_ref().map(|c| json!({
                "max_abs_error": c.max_abs_error,
                "trials": c.trials,
                "pass": c.pass,
            })),
            "kappa_region": {
                "kappa": kappa.kappa,
                "in_band": kappa.in_band,
                "hypothesis_holds": kappa.hypothesis_holds,
                "t_eps": kappa.t_eps,
                "applicable": kappa.applicable,
            },
            "samples": samples,
            "seed": ctx.seed,
            "pass": pass,
        }),
    )?;
    ctx.finish("concentration", Some(digest))?;
    Ok(pass)
}

/// `sweep`: conjecture-exploration records over dimensions.
pub fn cmd_sweep(ctx: &Ctx) -> Result<bool> {
    let d_list = ctx.cfg.usize_list("d_list", &[1, 2, 3])?;
    let radius = ctx.cfg.f64("r", 1.0)?;
    let delta = ctx.cfg.f64("delta", 1.0)?;
    let trials = ctx.cfg.usize("trials", 3)?;
    let mc_samples = ctx.cfg.usize("mc_samples", 50_000)?;
    let schedule_name = ctx
        .cfg
        .string("n_schedule")
        .unwrap_or_else(|| "d".to_string());
    let schedule: Box<dyn Fn(usize) -> usize + Sync> = match schedule_name.as_str() {
        "d" => Box::new(|d: usize| d.max(2)),
        "2d" => Box::new(|d: usize| (2 * d).max(2)),
        "d+1" => Box::new(|d: usize| d + 1),
        fixed => {
            let n: usize = fixed
                .parse()
                .with_context(|| format!("n_schedule {fixed:?} is not d | 2d | d+1 | <int>"))?;
            Box::new(move |_| n)
        }
    };
    let records = conjecture_sweep(
        &d_list,
        schedule.as_ref(),
        radius,
        delta,
        trials,
        mc_samples,
        ctx.seed,
    )?;
    let rows: Vec<String> = records
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{},{},{}",
                r.d,
                r.n_atoms,
                r.seed,
                r.estimator,
                r.lsi_lower_estimate,
                r.candidate_bound,
                r.ratio,
                r.flag
            )
        })
        .collect();
    ctx.out.write_csv(
        "sweep.csv",
        "d,N,seed,estimator,estimate,candidate_bound,ratio,flag",
        &rows,
    )?;
    ctx.finish("sweep", None)?;
    Ok(true)
}

/// `verify-all`: condensed verification battery, one pass/fail line per
/// check on stdout.
pub fn cmd_verify_all(ctx: &Ctx) -> Result<bool> {
    use gfi_core::measure::BallMeasure;
    let mut results: Vec<(String, bool, String)> = Vec::new();
    let mut check = |name: &str, pass: bool, detail: String| {
        println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        results.push((name.to_string(), pass, detail));
    };

    // Gaussian Poincaré calibration
    {
        let sm = SmoothedMeasure::new(BallMeasure::dirac(vec![0.0])?, 1.0)?;
        let grid = GridDomain::new(1, 8.0, 2001)?;
        let est = spectral::estimate_poincare(&sm, &grid)?.constant_estimate;
        check(
            "gaussian_poincare",
            (est - 1.0).abs() <= 0.01,
            format!("estimate {est} vs 1.0"),
        );
    }
    // Gaussian log-Sobolev calibration
    {
        let sm = SmoothedMeasure::new(BallMeasure::dirac(vec![0.0])?, 1.0)?;
        let est = spectral::estimate_lsi_expfamily(&sm, &spectral::default_theta_grid(&sm))?;
        check(
            "gaussian_lsi_expfamily",
            (est.value - 2.0).abs() <= 1e-9,
            format!("estimate {} vs 2.0", est.value),
        );
        let grid = GridDomain::new(1, 8.0, 2001)?;
        let asc = spectral::estimate_lsi_grid(&sm, &grid, 200, ctx.seed)?;
        check(
            "gaussian_lsi_grid",
            asc.value >= 1.95,
            format!("ascent reached {}", asc.value),
        );
    }
    // bound domination on a small lattice
    {
        let mut ok = true;
        let mut worst = String::new();
        for (delta, r) in [(0.5, 0.5), (1.0, 1.0), (2.0, 1.0)] {
            let base = BallMeasure::uniform(vec![vec![-r], vec![r]])?;
            let sm = SmoothedMeasure::new(base, delta)?;
            let grid = GridDomain::default_for(&sm)?;
            let cp = spectral::estimate_poincare(&sm, &grid)?.constant_estimate;
            let cp_bound = bounds::bound_poincare(delta, r)?.value.unwrap();
            let lsi = spectral::estimate_lsi_expfamily(&sm, &spectral::default_theta_grid(&sm))?;
            let best = bounds::best_bound(delta, r, 1, Some(2), false)?.value_or_inf();
            if cp > cp_bound * 1.02 || lsi.value > best * 1.02 {
                ok = false;
                worst = format!("(delta={delta}, R={r}): C_P {cp} vs {cp_bound}, LSI {} vs {best}", lsi.value);
            }
        }
        check(
            "bound_domination",
            ok,
            if ok { "3 lattice points".into() } else { worst },
        );
    }
    // decomposition certificates
    {
        let base = BallMeasure::uniform(vec![vec![-0.8], vec![0.8]])?;
        let sm = SmoothedMeasure::new(base, 0.6)?;
        let dec = miclo_decompose(&sm, None, &QuadSpec::default())?;
        let grid = GridDomain::new(1, sm.radius() + 6.0 * sm.delta(), 301)?;
        let cert = miclo_convexity_check(&dec, &grid)?;
        let assembled = dec.assembled_bound()?;
        let catalog = bounds::bound_lsi_miclo(0.6, 0.8, 1)?.value.unwrap();
        let ok = cert.numeric_sup_ub <= cert.sup_ub_bound + 1e-4
            && cert.numeric_max_curvature <= cert.curvature_bound + 1e-4
            && ((assembled - catalog) / catalog).abs() <= 1e-12;
        check(
            "miclo_certificates",
            ok,
            format!(
                "sup {} <= {}, curv {} <= {}",
                cert.numeric_sup_ub,
                cert.sup_ub_bound,
                cert.numeric_max_curvature,
                cert.curvature_bound
            ),
        );
    }
    // cost chain
    {
        let mut ok = true;
        for d in [1usize, 3] {
            let rep = gfi_core::transport::cost_chain_checks(100_000, d, ctx.seed)?;
            ok &= rep.all_pass;
        }
        check("cost_chain", ok, "1e5 pairs in d = 1, 3".into());
    }
    // tails
    {
        let base = BallMeasure::uniform(vec![vec![-0.8], vec![0.8]])?;
        let sm = SmoothedMeasure::new(base, 0.5)?;
        let f = LipschitzSpec::linear(vec![1.0])?;
        let rep = herbst_tail_check(&sm, &f, &[0.5, 1.0, 2.0, 3.0], 200_000, 0.5, ctx.seed)?;
        check(
            "herbst_tails",
            rep.violations == 0,
            format!("{} violations", rep.violations),
        );
    }
    // convex log-Sobolev + inf-convolution
    {
        let base = BallMeasure::uniform(vec![vec![-0.8], vec![0.8]])?;
        let sm = SmoothedMeasure::new(base, 0.6)?;
        let grid = GridDomain::default_for(&sm)?;
        let conv = convex_lsi_check(&sm, &builtin_convex_family(1, ctx.seed), &grid)?;
        check(
            "convex_lsi",
            conv.pass,
            format!("max ratio {} vs {}", conv.max_ratio, conv.bound),
        );
        let ic = inf_convolution_identity(0.8, 0.6, 2, 1000, ctx.seed)?;
        check(
            "inf_convolution",
            ic.pass,
            format!("max err {}", ic.max_abs_error),
        );
    }
    // radial reduction
    {
        let profile = gfi_core::decomp::RadialProfile::new(vec![1.0], vec![1.0])?;
        let rd = gfi_core::decomp::radial_reduce(&profile, 2, 1.0)?;
        let direct = {
            let n = 4096;
            let mut acc = 0.0;
            for k in 0..n {
                let phi = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
                let dx = 1.3 - phi.cos();
                let dy = -phi.sin();
                acc += (-(dx * dx + dy * dy) / 2.0).exp() / (2.0 * std::f64::consts::PI);
            }
            acc / n as f64
        };
        let reduced = rd.eval(1.3);
        let ok = ((reduced - direct) / direct).abs() <= 1e-6;
        check(
            "radial_reduction",
            ok,
            format!("p̂(1.3) = {reduced} vs direct {direct}"),
        );
        let grid2 = GridDomain::new(2, 2.0, 41)?;
        let conv = gfi_core::decomp::radial_convexity_check(&|r| r * r / 2.0, 1.0, &grid2, 1e-9)?;
        check(
            "radial_convexity",
            conv.pass,
            format!("margin {}", conv.margin),
        );
    }

    let pass = results.iter().all(|(_, ok, _)| *ok);
    let payload = json!({
        "checks": results
            .iter()
            .map(|(name, ok, detail)| json!({"name": name, "pass": ok, "detail": detail}))
            .collect::<Vec<_>>(),
        "pass": pass,
        "seed": ctx.seed,
    });
    ctx.out.write_json("verify.json", &payload)?;
    ctx.finish("verify-all", None)?;
    Ok(pass)
}
