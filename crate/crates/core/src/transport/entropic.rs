//! Entropic transport by alternating scaling in the log domain.
//!
//! The returned value is the cost of a *rounded, feasible* plan, so it is a
//! true upper bound on the exact optimum; the `gap_certificate` is the
//! distance to a dual-feasible lower bound, which also bounds the
//! regularization slack.

use crate::error::{Error, Result};
use crate::quad::logsumexp_by;
use crate::transport::{CostSpec, DiscreteDistribution, TransportMethod, TransportResult};

/// Log-domain Sinkhorn iteration with Altschuler–Weed–Rigollet rounding.
///
/// Errors out (with the residual) if the marginal violation has not reached
/// `1e-9` within `max_iter` sweeps.
pub fn ot_entropic(
    source: &DiscreteDistribution,
    target: &DiscreteDistribution,
    spec: &CostSpec,
    eps_reg: f64,
    max_iter: usize,
) -> Result<TransportResult> {
    if !(eps_reg > 0.0) || !eps_reg.is_finite() {
        return Err(Error::invalid(format!(
            "regularization must be positive, got {eps_reg}"
        )));
    }
    let (m, n) = (source.len(), target.len());
    let mut costs = vec![0.0; m * n];
    for (i, x) in source.points().iter().enumerate() {
        for (j, y) in target.points().iter().enumerate() {
            costs[i * n + j] = spec.eval(x, y)?;
        }
    }
    let a = source.weights();
    let b = target.weights();
    let log_a: Vec<f64> = a.iter().map(|&w| if w > 0.0 { w.ln() } else { f64::NEG_INFINITY }).collect();
    let log_b: Vec<f64> = b.iter().map(|&w| if w > 0.0 { w.ln() } else { f64::NEG_INFINITY }).collect();

    let mut f = vec![0.0; m];
    let mut g = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let tol = 1e-9;
    for _ in 0..max_iter {
        for j in 0..n {
            if b[j] > 0.0 {
                g[j] = -eps_reg
                    * logsumexp_by(m, |i| (f[i] - costs[i * n + j]) / eps_reg + log_a[i]);
            }
        }
        for i in 0..m {
            if a[i] > 0.0 {
                f[i] = -eps_reg
                    * logsumexp_by(n, |j| (g[j] - costs[i * n + j]) / eps_reg + log_b[j]);
            }
        }
        // marginal violation of the implied plan (row constraint holds
        // exactly after the f-update; measure the column side)
        let mut err = 0.0;
        for j in 0..n {
            let col: f64 = (0..m)
                .map(|i| plan_entry(&costs, &f, &g, &log_a, &log_b, eps_reg, i, j, n))
                .sum();
            err += (col - b[j]).abs();
        }
        residual = err;
        if err < tol {
            break;
        }
    }
    if residual >= tol {
        return Err(Error::Solver(format!(
            "Sinkhorn did not converge in {max_iter} iterations (marginal residual {residual:.3e})"
        )));
    }

    // materialize and round to the feasible polytope
    let mut plan = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            plan[i * n + j] = plan_entry(&costs, &f, &g, &log_a, &log_b, eps_reg, i, j, n);
        }
    }
    round_to_feasible(&mut plan, a, b);

    let mut value = 0.0;
    let mut sparse = Vec::new();
    let mut row_sum = vec![0.0; m];
    let mut col_sum = vec![0.0; n];
    for i in 0..m {
        for j in 0..n {
            let p = plan[i * n + j];
            if p > 0.0 {
                value += p * costs[i * n + j];
                sparse.push((i, j, p));
            }
            row_sum[i] += p;
            col_sum[j] += p;
        }
    }
    let marginal_error = row_sum
        .iter()
        .zip(a)
        .chain(col_sum.iter().zip(b))
        .map(|(&s, &w)| (s - w).abs())
        .fold(0.0f64, f64::max);

    // dual-feasible lower bound from the potentials
    let mut dual = 0.0;
    for j in 0..n {
        let mut vj = f64::INFINITY;
        for i in 0..m {
            vj = vj.min(costs[i * n + j] - f[i]);
        }
        dual += b[j] * vj;
    }
    for i in 0..m {
        dual += a[i] * f[i];
    }
    Ok(TransportResult {
        value,
        plan: sparse,
        method: TransportMethod::Entropic { eps_reg },
        gap_certificate: (value - dual).max(0.0),
        marginal_error,
    })
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn plan_entry(
    costs: &[f64],
    f: &[f64],
    g: &[f64],
    log_a: &[f64],
    log_b: &[f64],
    eps: f64,
    i: usize,
    j: usize,
    n: usize,
) -> f64 {
    let l = (f[i] + g[j] - costs[i * n + j]) / eps + log_a[i] + log_b[j];
    l.exp()
}

/// Rounds a nonnegative matrix to the transport polytope `U(a, b)`: scale
/// rows down to `a`, columns down to `b`, then patch the deficit with a
/// rank-one correction.
fn round_to_feasible(plan: &mut [f64], a: &[f64], b: &[f64]) {
    let (m, n) = (a.len(), b.len());
    for i in 0..m {
        let row: f64 = plan[i * n..(i + 1) * n].iter().sum();
        if row > a[i] && row > 0.0 {
            let s = a[i] / row;
            plan[i * n..(i + 1) * n].iter_mut().for_each(|p| *p *= s);
        }
    }
    for j in 0..n {
        let col: f64 = (0..m).map(|i| plan[i * n + j]).sum();
        if col > b[j] && col > 0.0 {
            let s = b[j] / col;
            for i in 0..m {
                plan[i * n + j] *= s;
            }
        }
    }
    let mut def_a = vec![0.0; m];
    let mut def_b = vec![0.0; n];
    for i in 0..m {
        let row: f64 = plan[i * n..(i + 1) * n].iter().sum();
        def_a[i] = (a[i] - row).max(0.0);
    }
    for j in 0..n {
        let col: f64 = (0..m).map(|i| plan[i * n + j]).sum();
        def_b[j] = (b[j] - col).max(0.0);
    }
    let total: f64 = def_a.iter().sum();
    if total > 0.0 {
        for i in 0..m {
            if def_a[i] > 0.0 {
                for j in 0..n {
                    plan[i * n + j] += def_a[i] * def_b[j] / total;
                }
            }
        }
    }
}
