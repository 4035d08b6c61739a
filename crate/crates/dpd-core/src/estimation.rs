//! Minimum-DPD estimation: the unconstrained MDPDE `θ̂_β` and the
//! restricted RMDPDE `θ̃_β` under a composite constraint `g(θ) = 0`.
//!
//! Strategy: positivity-constrained coordinates are optimized on a log
//! scale; the `β = 0` fit (seeded by moment estimates) warm-starts `β > 0`
//! fits, and for `β ≥ 0.25` a robust median/MAD start competes with it —
//! under contamination the objective separates an outlier-tracking root
//! from an outlier-ignoring one, and the lower objective wins. A final
//! damped Newton polish on the estimating equation sharpens the simplex
//! result to near machine precision.

use alloc::format;
use alloc::vec::Vec;

use crate::divergence::{empirical_objective, estimating_function, Dataset, LIMIT_EPS};
use crate::models::{ConstraintSpec, NormalModel, ParametricModel};
use crate::numerics::fmath;
use crate::numerics::optimize::{minimize, Method, OptimizerSpec};
use crate::numerics::Mat;
use crate::{Error, Result};

/// Gradient-norm threshold under which a fit may report `converged`.
pub const GRAD_TOL: f64 = 1e-6;

/// Scale collapse threshold: a fitted positive parameter below this is a
/// degenerate-data symptom, not an estimate.
const SCALE_COLLAPSE: f64 = 1e-10;

/// Outcome of [`fit_mdpde`] / [`fit_rmdpde`].
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    /// The fitted parameter (natural scale).
    pub theta_hat: Vec<f64>,
    /// Empirical DPD objective at `theta_hat`.
    pub objective_value: f64,
    /// Whether the optimizer's stopping rule fired *and* the (projected)
    /// gradient norm is below [`GRAD_TOL`].
    pub converged: bool,
    /// Optimizer iterations consumed (all starts plus polish steps).
    pub iterations: u32,
    /// Euclidean norm of the objective gradient at `theta_hat`, projected
    /// onto the constraint's tangent space in the restricted case.
    pub gradient_norm: f64,
    /// Lagrange multipliers `λ_n = n (GᵀG)⁻¹ Gᵀ ef(θ̃)` (restricted case).
    pub lagrange_multipliers: Option<Vec<f64>>,
    /// The tuning parameter the fit was run at.
    pub beta: f64,
}

/// Fit the unconstrained minimum-DPD estimator `θ̂_β`.
///
/// At `β = 0` this is the maximum-likelihood estimator (computed in closed
/// form for the normal family). An exhausted iteration budget is *not* an
/// error: the best point found is returned with `converged = false`.
///
/// # Errors
/// - [`Error::DegenerateData`] for `n < 2`, zero sample spread, or a fitted
///   scale collapsing below `1e−10`.
/// - [`Error::Domain`] when an observation lies outside the support.
/// - [`Error::NonConvergent`] when no start produced a finite objective.
pub fn fit_mdpde(
    model: &dyn ParametricModel,
    data: &Dataset,
    beta: f64,
    init: Option<&[f64]>,
) -> Result<EstimationResult> {
    fit_impl(model, data, beta, None, init)
}

/// Fit the restricted minimum-DPD estimator `θ̃_β` under `g(θ) = 0`.
///
/// Pinned constraints are solved by explicit substitution in the reduced
/// `(p−r)`-dimensional problem; general smooth constraints go through an
/// augmented-Lagrangian outer loop. Feasibility `‖g(θ̃)‖∞ ≤ 1e−8` is
/// enforced on the returned estimate.
///
/// # Errors
/// As [`fit_mdpde`], plus [`Error::ConstraintInfeasible`] when the loop
/// cannot reach feasibility and [`Error::RankMismatch`] when `G(θ)` is rank
/// deficient at the start.
pub fn fit_rmdpde(
    model: &dyn ParametricModel,
    data: &Dataset,
    beta: f64,
    constraint: &ConstraintSpec,
    init: Option<&[f64]>,
) -> Result<EstimationResult> {
    fit_impl(model, data, beta, Some(constraint), init)
}

fn fit_impl(
    model: &dyn ParametricModel,
    data: &Dataset,
    beta: f64,
    constraint: Option<&ConstraintSpec>,
    init: Option<&[f64]>,
) -> Result<EstimationResult> {
    if !(beta >= 0.0) {
        return Err(Error::domain(format!("beta must be >= 0, got {beta}")));
    }
    data.check_support(model)?;
    if data.n() < 2 {
        return Err(Error::degenerate(format!(
            "dataset '{}' has n = {} < 2 observations; scale is not estimable",
            data.label(),
            data.n()
        )));
    }
    if crate::models::pop_sd(data.values()) < SCALE_COLLAPSE {
        return Err(Error::degenerate(format!(
            "dataset '{}' has (numerically) zero spread",
            data.label()
        )));
    }
    let beta = if beta < LIMIT_EPS { 0.0 } else { beta };

    // Assemble candidate starts (natural scale), pins applied.
    let mut starts: Vec<Vec<f64>> = Vec::new();
    let push_start = |theta: Vec<f64>, starts: &mut Vec<Vec<f64>>| {
        if model.in_domain(&theta) && !starts.contains(&theta) {
            starts.push(theta);
        }
    };
    if let Some(theta) = init {
        push_start(theta.to_vec(), &mut starts);
    }
    if beta > 0.0 {
        // Continuation: the β = 0 fit seeds the β > 0 objective.
        if let Ok(mle) = fit_impl(model, data, 0.0, constraint, init) {
            push_start(mle.theta_hat, &mut starts);
        }
    }
    push_start(model.moment_start(data.values()), &mut starts);
    if beta >= 0.25 {
        // Multimodality guard: under contamination the robust start finds
        // the outlier-ignoring root the moment start can miss.
        push_start(model.robust_start(data.values()), &mut starts);
    }
    if let Some(c) = constraint {
        if let Some(pins) = c.pinned() {
            for s in starts.iter_mut() {
                for &(i, v) in pins {
                    if i < s.len() {
                        s[i] = v;
                    }
                }
            }
            starts.retain(|s| model.in_domain(s));
            starts.dedup();
        }
    }
    if starts.is_empty() {
        return Err(Error::non_convergent("no admissible starting point", f64::NAN));
    }
    if let Some(c) = constraint {
        c.validate_at(&starts[0])?;
    }

    // Closed forms for the normal family at β = 0 (exact MLE).
    if beta == 0.0 && model.name() == "normal" {
        if let Some(result) = normal_mle(data, constraint)? {
            return Ok(result);
        }
    }

    match constraint {
        None => fit_reduced(model, data, beta, &starts, &[], None),
        Some(c) if c.pinned().is_some() => {
            let pins = c.pinned().expect("checked");
            fit_reduced(model, data, beta, &starts, pins, Some(c))
        }
        Some(c) => fit_augmented(model, data, beta, &starts, c),
    }
}

/// Closed-form normal MLEs: unconstrained, and under single-coordinate
/// pins. Returns `Ok(None)` for constraint shapes without a closed form.
fn normal_mle(
    data: &Dataset,
    constraint: Option<&ConstraintSpec>,
) -> Result<Option<EstimationResult>> {
    let xs = data.values();
    let n = xs.len() as f64;
    let mean = crate::models::mean(xs);
    let theta = match constraint {
        None => {
            let sd = crate::models::pop_sd(xs);
            alloc::vec![mean, sd]
        }
        Some(c) => match c.pinned() {
            Some(&[(0, mu0)]) => {
                // σ̃² = (1/n) Σ (Xᵢ − μ₀)².
                let s2 = xs.iter().map(|x| (x - mu0) * (x - mu0)).sum::<f64>() / n;
                alloc::vec![mu0, fmath::sqrt(s2)]
            }
            Some(&[(1, sigma0)]) => alloc::vec![mean, sigma0],
            _ => return Ok(None),
        },
    };
    if theta[1] < SCALE_COLLAPSE {
        return Err(Error::degenerate(format!(
            "fitted normal scale collapsed ({:e}) on dataset '{}'",
            theta[1],
            data.label()
        )));
    }
    let model = NormalModel;
    let objective_value = empirical_objective(&model, &theta, data, 0.0)?;
    let ef = estimating_function(&model, &theta, data, 0.0)?;
    let free: Vec<usize> = match constraint.and_then(ConstraintSpec::pinned) {
        None => alloc::vec![0, 1],
        Some(pins) => (0..2).filter(|i| pins.iter().all(|&(j, _)| j != *i)).collect(),
    };
    let gradient_norm = fmath::norm2(&free.iter().map(|&i| ef[i]).collect::<Vec<_>>());
    let lagrange_multipliers = constraint.map(|c| lagrange(c, &theta, &ef, data.n()));
    Ok(Some(EstimationResult {
        theta_hat: theta,
        objective_value,
        converged: gradient_norm <= GRAD_TOL,
        iterations: 0,
        gradient_norm,
        lagrange_multipliers,
        beta: 0.0,
    }))
}

/// `λ_n = n (GᵀG)⁻¹ Gᵀ ef(θ̃)`.
fn lagrange(constraint: &ConstraintSpec, theta: &[f64], ef: &[f64], n: usize) -> Vec<f64> {
    let g = constraint.jacobian(theta);
    let gtg = g.t().matmul(&g);
    let Ok(inv) = gtg.inverse() else {
        return alloc::vec![f64::NAN; constraint.r()];
    };
    let gt_ef = g.t().matvec(ef);
    let lam = inv.matvec(&gt_ef);
    lam.iter().map(|v| v * n as f64).collect()
}

/// Map free coordinates (log scale where positive) into a full θ.
struct Parametrization {
    free: Vec<usize>,
    log_scale: Vec<bool>,
    template: Vec<f64>,
}

impl Parametrization {
    fn new(model: &dyn ParametricModel, pins: &[(usize, f64)], template: &[f64]) -> Self {
        let p = model.dim();
        let free: Vec<usize> = (0..p).filter(|i| pins.iter().all(|&(j, _)| j != *i)).collect();
        let pos = model.positive_params();
        let mut template = template.to_vec();
        for &(i, v) in pins {
            template[i] = v;
        }
        Parametrization {
            log_scale: free.iter().map(|&i| pos[i]).collect(),
            free,
            template,
        }
    }

    fn to_z(&self, theta: &[f64]) -> Vec<f64> {
        self.free
            .iter()
            .zip(&self.log_scale)
            .map(|(&i, &log)| if log { fmath::ln(theta[i]) } else { theta[i] })
            .collect()
    }

    fn to_theta(&self, z: &[f64]) -> Vec<f64> {
        let mut theta = self.template.clone();
        for ((&i, &log), &zi) in self.free.iter().zip(&self.log_scale).zip(z) {
            theta[i] = if log { fmath::exp(zi) } else { zi };
        }
        theta
    }
}

/// Minimize the (possibly pin-reduced) empirical objective over all starts,
/// then polish the winner on the estimating equation.
fn fit_reduced(
    model: &dyn ParametricModel,
    data: &Dataset,
    beta: f64,
    starts: &[Vec<f64>],
    pins: &[(usize, f64)],
    constraint: Option<&ConstraintSpec>,
) -> Result<EstimationResult> {
    let par = Parametrization::new(model, pins, &starts[0]);
    let objective = |z: &[f64]| -> f64 {
        let theta = par.to_theta(z);
        match empirical_objective(model, &theta, data, beta) {
            Ok(v) => v,
            Err(_) => f64::INFINITY,
        }
    };
    let spec = OptimizerSpec {
        method: Method::NelderMead,
        x_tol: 1e-10,
        f_tol: 1e-13,
        max_iters: 4000,
    };

    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    let mut iterations = 0u32;
    for start in starts {
        let z0 = par.to_z(start);
        let Ok(run) = minimize(&objective, &z0, &spec, None) else {
            continue;
        };
        iterations += run.iterations;
        if best.as_ref().is_none_or(|(_, f, _)| run.f < *f) {
            best = Some((run.x, run.f, run.converged));
        }
    }
    let Some((z_best, f_best, nm_converged)) = best else {
        return Err(Error::non_convergent(
            format!("no start produced a finite objective on dataset '{}'", data.label()),
            f64::NAN,
        ));
    };
    if !f_best.is_finite() {
        return Err(Error::non_convergent(
            format!("objective non-finite at every probe on dataset '{}'", data.label()),
            f_best,
        ));
    }

    let mut theta = par.to_theta(&z_best);
    iterations += polish(model, data, beta, &mut theta, &par);

    finish(model, data, beta, theta, iterations, nm_converged, constraint)
}

/// Damped Newton on the reduced estimating equation; returns iterations
/// spent. Falls back silently — the simplex result stands if a step fails.
fn polish(
    model: &dyn ParametricModel,
    data: &Dataset,
    beta: f64,
    theta: &mut Vec<f64>,
    par: &Parametrization,
) -> u32 {
    let k = par.free.len();
    let reduced_ef = |theta: &[f64]| -> Option<Vec<f64>> {
        estimating_function(model, theta, data, beta)
            .ok()
            .map(|ef| par.free.iter().map(|&i| ef[i]).collect())
    };
    let mut iterations = 0;
    for _ in 0..6 {
        let Some(ef) = reduced_ef(theta) else { break };
        let ef_norm = fmath::norm2(&ef);
        if ef_norm < 1e-13 {
            break;
        }
        // Finite-difference Jacobian of the reduced estimating function.
        let mut jac = Mat::zeros(k, k);
        let mut ok = true;
        for (col, &j) in par.free.iter().enumerate() {
            let h = 1e-6 * (1.0 + fmath::abs(theta[j]));
            let mut tp = theta.clone();
            tp[j] += h;
            let mut tm = theta.clone();
            tm[j] -= h;
            match (reduced_ef(&tp), reduced_ef(&tm)) {
                (Some(ep), Some(em)) => {
                    for row in 0..k {
                        jac[(row, col)] = (ep[row] - em[row]) / (2.0 * h);
                    }
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            break;
        }
        let Ok(inv) = jac.inverse() else { break };
        let delta = inv.matvec(&ef);
        // Damped step, keeping θ inside the domain and the root improving.
        let mut step = 1.0;
        let mut advanced = false;
        for _ in 0..6 {
            let mut cand = theta.clone();
            for (idx, &j) in par.free.iter().enumerate() {
                cand[j] -= step * delta[idx];
            }
            if model.in_domain(&cand) {
                if let Some(ef_new) = reduced_ef(&cand) {
                    if fmath::norm2(&ef_new) < ef_norm {
                        *theta = cand;
                        advanced = true;
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        iterations += 1;
        if !advanced {
            break;
        }
    }
    iterations
}

/// Common post-processing: collapse check, gradient norm, multipliers.
fn finish(
    model: &dyn ParametricModel,
    data: &Dataset,
    beta: f64,
    theta: Vec<f64>,
    iterations: u32,
    optimizer_converged: bool,
    constraint: Option<&ConstraintSpec>,
) -> Result<EstimationResult> {
    for (i, (&v, &pos)) in theta.iter().zip(model.positive_params()).enumerate() {
        if pos && v < SCALE_COLLAPSE {
            return Err(Error::degenerate(format!(
                "fitted parameter {i} collapsed to {v:e} on dataset '{}'",
                data.label()
            )));
        }
    }
    let objective_value = empirical_objective(model, &theta, data, beta)?;
    let ef = estimating_function(model, &theta, data, beta)?;
    let grad: Vec<f64> = ef.iter().map(|e| -(1.0 + beta) * e).collect();
    let (gradient_norm, lagrange_multipliers) = match constraint {
        None => (fmath::norm2(&grad), None),
        Some(c) => {
            // Project out the constraint normals: (I − G(GᵀG)⁻¹Gᵀ)∇.
            let g = c.jacobian(&theta);
            let gtg = g.t().matmul(&g);
            let proj = match gtg.inverse() {
                Ok(inv) => {
                    let gt_grad = g.t().matvec(&grad);
                    let corr = g.matvec(&inv.matvec(&gt_grad));
                    grad.iter().zip(&corr).map(|(a, b)| a - b).collect::<Vec<_>>()
                }
                Err(_) => grad.clone(),
            };
            if c.g(&theta).iter().any(|gi| fmath::abs(*gi) > 1e-8) {
                return Err(Error::ConstraintInfeasible {
                    context: format!(
                        "restricted fit on '{}' ended infeasible for '{}'",
                        data.label(),
                        c.label()
                    ),
                });
            }
            (fmath::norm2(&proj), Some(lagrange(c, &theta, &ef, data.n())))
        }
    };
    Ok(EstimationResult {
        theta_hat: theta,
        objective_value,
        converged: optimizer_converged && gradient_norm <= GRAD_TOL,
        iterations,
        gradient_norm,
        lagrange_multipliers,
        beta,
    })
}

/// Augmented-Lagrangian loop for general (non-pin) constraints.
fn fit_augmented(
    model: &dyn ParametricModel,
    data: &Dataset,
    beta: f64,
    starts: &[Vec<f64>],
    constraint: &ConstraintSpec,
) -> Result<EstimationResult> {
    let par = Parametrization::new(model, &[], &starts[0]);
    let r = constraint.r();
    let spec = OptimizerSpec {
        method: Method::NelderMead,
        x_tol: 1e-10,
        f_tol: 1e-13,
        max_iters: 3000,
    };

    let mut lambda = alloc::vec![0.0; r];
    let mut rho = 10.0;
    let mut z = par.to_z(&starts[0]);
    let mut iterations = 0u32;
    let mut inner_converged = false;
    let mut prev_infeas = f64::INFINITY;

    for _outer in 0..15 {
        let lam = lambda.clone();
        let objective = |zz: &[f64]| -> f64 {
            let theta = par.to_theta(zz);
            let Ok(obj) = empirical_objective(model, &theta, data, beta) else {
                return f64::INFINITY;
            };
            let g = constraint.g(&theta);
            let mut penalty = 0.0;
            for (gi, li) in g.iter().zip(&lam) {
                penalty += li * gi + 0.5 * rho * gi * gi;
            }
            obj + penalty
        };
        let Ok(run) = minimize(&objective, &z, &spec, None) else {
            return Err(Error::ConstraintInfeasible {
                context: format!(
                    "augmented-Lagrangian inner solve failed for '{}'",
                    constraint.label()
                ),
            });
        };
        iterations += run.iterations;
        inner_converged = run.converged;
        z = run.x;
        let theta = par.to_theta(&z);
        let g = constraint.g(&theta);
        let infeas = g.iter().fold(0.0f64, |m, v| m.max(fmath::abs(*v)));
        if infeas <= 1e-10 && inner_converged {
            break;
        }
        if infeas > 0.25 * prev_infeas {
            rho = (rho * 10.0).min(1e12);
        }
        prev_infeas = infeas;
        for (li, gi) in lambda.iter_mut().zip(&g) {
            *li += rho * gi;
        }
    }
    let theta = par.to_theta(&z);
    finish(model, data, beta, theta, iterations, inner_converged, Some(constraint))
}
