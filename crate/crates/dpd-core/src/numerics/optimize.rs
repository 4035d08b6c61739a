//! Multivariate minimization: derivative-free Nelder–Mead simplex (default)
//! and gradient descent with backtracking line search.
//!
//! Both methods accept optional per-coordinate lower bounds, enforced by
//! treating points below a bound as having objective +∞, which keeps the
//! iterates feasible without projections. A guard threshold converts an
//! apparently unbounded descent into [`Error::UnboundedBelow`].

use alloc::vec;
use alloc::vec::Vec;

use crate::numerics::fmath;
use crate::{Error, Result};

/// Minimization algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Derivative-free simplex with one restart (default).
    #[default]
    NelderMead,
    /// Gradient descent (central finite-difference gradients) with Armijo
    /// backtracking.
    GradientDescent,
}

/// Configuration for [`minimize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSpec {
    /// Algorithm to use.
    pub method: Method,
    /// Convergence tolerance on the simplex diameter / step size (> 0).
    pub x_tol: f64,
    /// Convergence tolerance on the objective spread / decrease (> 0).
    pub f_tol: f64,
    /// Iteration budget (≥ 1).
    pub max_iters: u32,
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        OptimizerSpec { method: Method::NelderMead, x_tol: 1e-9, f_tol: 1e-12, max_iters: 4000 }
    }
}

impl OptimizerSpec {
    /// Validate the invariants: positive tolerances, at least one iteration.
    pub fn validate(&self) -> Result<()> {
        if !(self.x_tol > 0.0) || !(self.f_tol > 0.0) {
            return Err(Error::domain("optimizer tolerances must be positive"));
        }
        if self.max_iters < 1 {
            return Err(Error::domain("max_iters must be >= 1"));
        }
        Ok(())
    }
}

/// Outcome of [`minimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    /// Best point found.
    pub x: Vec<f64>,
    /// Objective at `x`.
    pub f: f64,
    /// Whether a tolerance-based stopping rule fired (as opposed to the
    /// iteration budget running out).
    pub converged: bool,
    /// Number of iterations consumed.
    pub iterations: u32,
}

/// Objective value below which the problem is declared unbounded.
const UNBOUNDED_GUARD: f64 = -1e100;

/// Minimize `f` starting from `x0`.
///
/// `lower_bounds`, when given, must have the same length as `x0`; points
/// with any coordinate below its bound are treated as infeasible (+∞).
///
/// Exhausting `max_iters` is not an error: the best point is returned with
/// `converged = false`.
///
/// # Errors
/// - [`Error::Domain`] for an invalid spec, mismatched bounds, or `f`
///   non-finite at `x0`.
/// - [`Error::UnboundedBelow`] when the objective passes the −1e100 guard.
pub fn minimize(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    spec: &OptimizerSpec,
    lower_bounds: Option<&[f64]>,
) -> Result<MinimizeResult> {
    spec.validate()?;
    if x0.is_empty() {
        return Err(Error::domain("empty starting point"));
    }
    if let Some(lb) = lower_bounds {
        if lb.len() != x0.len() {
            return Err(Error::domain("lower_bounds length mismatch"));
        }
        if x0.iter().zip(lb).any(|(x, l)| x < l) {
            return Err(Error::domain("starting point violates lower bounds"));
        }
    }
    let bounded = |x: &[f64]| -> f64 {
        if let Some(lb) = lower_bounds {
            if x.iter().zip(lb).any(|(xi, li)| xi < li) {
                return f64::INFINITY;
            }
        }
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let f0 = bounded(x0);
    if !f0.is_finite() {
        return Err(Error::domain("objective not finite at the starting point"));
    }

    match spec.method {
        Method::NelderMead => nelder_mead(&bounded, x0, f0, spec),
        Method::GradientDescent => gradient_descent(&bounded, x0, f0, spec),
    }
}

/// Standard Nelder–Mead (reflection 1, expansion 2, contraction ½,
/// shrink ½) with one restart from the best point once converged.
fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    f0: f64,
    spec: &OptimizerSpec,
) -> Result<MinimizeResult> {
    let mut best_x = x0.to_vec();
    let mut best_f = f0;
    let mut iterations = 0u32;
    let mut converged = false;

    for _restart in 0..2 {
        let (x, fx, conv, it) = nm_run(f, &best_x, best_f, spec, &mut iterations)?;
        let _ = it;
        if fx < best_f || (fx == best_f && conv) {
            best_x = x;
            best_f = fx;
        }
        converged = conv;
        if !conv {
            break; // budget exhausted — don't restart
        }
    }
    Ok(MinimizeResult { x: best_x, f: best_f, converged, iterations })
}

fn nm_run(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    f0: f64,
    spec: &OptimizerSpec,
    iterations: &mut u32,
) -> Result<(Vec<f64>, f64, bool, u32)> {
    let n = x0.len();
    // Initial simplex: perturb each coordinate by a scale-aware step.
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut fvals: Vec<f64> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    fvals.push(f0);
    for i in 0..n {
        let mut p = x0.to_vec();
        let step = 0.05 * (1.0 + fmath::abs(p[i]));
        p[i] += step;
        let mut fp = f(&p);
        if !fp.is_finite() {
            // Try the other direction (e.g. bound immediately to the right).
            p[i] = x0[i] - step;
            fp = f(&p);
            if !fp.is_finite() {
                p[i] = x0[i] + 1e-4 * step;
                fp = f(&p);
            }
        }
        simplex.push(p);
        fvals.push(fp);
    }

    let centroid = |simplex: &[Vec<f64>], skip: usize| -> Vec<f64> {
        let mut c = vec![0.0; n];
        for (k, v) in simplex.iter().enumerate() {
            if k == skip {
                continue;
            }
            for i in 0..n {
                c[i] += v[i];
            }
        }
        for ci in c.iter_mut() {
            *ci /= n as f64;
        }
        c
    };

    let mut converged = false;
    let mut local_iters = 0u32;
    while *iterations < spec.max_iters {
        *iterations += 1;
        local_iters += 1;

        // Order the simplex.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fvals[a].partial_cmp(&fvals[b]).unwrap_or(core::cmp::Ordering::Equal));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        if fvals[best] < UNBOUNDED_GUARD {
            return Err(Error::UnboundedBelow { objective: fvals[best] });
        }

        // Convergence: simplex f-spread and diameter.
        let fspread = fvals[worst] - fvals[best];
        let mut diam = 0.0f64;
        for v in &simplex {
            for i in 0..n {
                diam = diam.max(fmath::abs(v[i] - simplex[best][i]));
            }
        }
        if (fspread.is_finite() && fspread <= spec.f_tol) || diam <= spec.x_tol {
            converged = true;
            break;
        }

        let c = centroid(&simplex, worst);
        let reflect: Vec<f64> = (0..n).map(|i| c[i] + (c[i] - simplex[worst][i])).collect();
        let fr = f(&reflect);

        if fr < fvals[best] {
            // Try expansion.
            let expand: Vec<f64> = (0..n).map(|i| c[i] + 2.0 * (c[i] - simplex[worst][i])).collect();
            let fe = f(&expand);
            if fe < fr {
                simplex[worst] = expand;
                fvals[worst] = fe;
            } else {
                simplex[worst] = reflect;
                fvals[worst] = fr;
            }
        } else if fr < fvals[second_worst] {
            simplex[worst] = reflect;
            fvals[worst] = fr;
        } else {
            // Contraction (outside if the reflection helped, inside otherwise).
            let towards: &[f64] = if fr < fvals[worst] { &reflect } else { &simplex[worst] };
            let contract: Vec<f64> = (0..n).map(|i| c[i] + 0.5 * (towards[i] - c[i])).collect();
            let fc = f(&contract);
            if fc < fvals[worst].min(fr) {
                simplex[worst] = contract;
                fvals[worst] = fc;
            } else {
                // Shrink towards the best vertex.
                let bx = simplex[best].clone();
                for (k, v) in simplex.iter_mut().enumerate() {
                    if k == best {
                        continue;
                    }
                    for i in 0..n {
                        v[i] = bx[i] + 0.5 * (v[i] - bx[i]);
                    }
                    fvals[k] = f(v);
                }
            }
        }
    }

    let mut best = 0;
    for k in 1..=n {
        if fvals[k] < fvals[best] {
            best = k;
        }
    }
    Ok((simplex[best].clone(), fvals[best], converged, local_iters))
}

/// Gradient descent with central-difference gradients and Armijo
/// backtracking; suited to smooth objectives with cheap evaluations.
fn gradient_descent(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    f0: f64,
    spec: &OptimizerSpec,
) -> Result<MinimizeResult> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f0;
    let mut iterations = 0u32;
    let mut converged = false;
    let mut step = 1.0f64;

    while iterations < spec.max_iters {
        iterations += 1;
        if fx < UNBOUNDED_GUARD {
            return Err(Error::UnboundedBelow { objective: fx });
        }
        // Central-difference gradient.
        let mut grad = vec![0.0; n];
        let mut gnorm = 0.0;
        for i in 0..n {
            let h = 1e-7 * (1.0 + fmath::abs(x[i]));
            let mut xp = x.clone();
            xp[i] += h;
            let mut xm = x.clone();
            xm[i] -= h;
            let (fp, fm) = (f(&xp), f(&xm));
            // One-sided fallback when a bound makes a side infeasible.
            grad[i] = if fp.is_finite() && fm.is_finite() {
                (fp - fm) / (2.0 * h)
            } else if fp.is_finite() {
                (fp - fx) / h
            } else if fm.is_finite() {
                (fx - fm) / h
            } else {
                0.0
            };
            gnorm += grad[i] * grad[i];
        }
        let gnorm = fmath::sqrt(gnorm);
        if gnorm <= spec.f_tol.max(1e-12) {
            converged = true;
            break;
        }

        // Armijo backtracking along −grad.
        let mut t = step;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = (0..n).map(|i| x[i] - t * grad[i]).collect();
            let fc = f(&cand);
            if fc.is_finite() && fc <= fx - 1e-4 * t * gnorm * gnorm {
                let dx: f64 = (0..n).map(|i| fmath::abs(cand[i] - x[i])).fold(0.0, f64::max);
                let df = fx - fc;
                x = cand;
                fx = fc;
                accepted = true;
                step = (t * 2.0).min(1e6);
                if dx <= spec.x_tol && df <= spec.f_tol {
                    converged = true;
                }
                break;
            }
            t *= 0.5;
        }
        if converged {
            break;
        }
        if !accepted {
            // No descent step found: gradient scale is numerically exhausted.
            converged = true;
            break;
        }
    }
    Ok(MinimizeResult { x, f: fx, converged, iterations })
}
