//! Power approximation at fixed alternatives, sample-size inversion, and
//! the contiguous-alternative law of the statistic.
//!
//! At a fixed `θ*` outside the null set the statistic concentrates around
//! `2n·d_γ(f_{θ*}, f_{θ*₀})`, where `θ*₀` is the population projection of
//! `θ*` onto `Θ₀`; a delta-method normal approximation around that drift
//! yields the power formula and its inversion for the required sample size.
//! Along contiguous alternatives `θ_n = θ₀ + n^{−1/2} d` the statistic
//! instead converges to the shifted mixture `Σ λᵢ(Zᵢ + wᵢ)² + η`.

use alloc::format;
use alloc::vec::Vec;

use crate::asymptotics::{
    constrained_matrices, model_matrices, null_spectrum, spectrum_parts, NullSpectrum,
};
use crate::divergence::dpd;
use crate::models::{integrals, ConstraintSpec, ParametricModel};
use crate::numerics::fmath;
use crate::numerics::linalg::Mat;
use crate::numerics::optimize::{minimize, Method, OptimizerSpec};
use crate::numerics::special;
use crate::testing::{mixture_quantile, ChiSquareMixture};
use crate::{Error, Result};

/// Monte Carlo draws used internally when a quantile is needed and the
/// caller has no seed to offer (multi-component mixtures only).
const INTERNAL_MC_DRAWS: u64 = 1_000_000;
/// Fixed internal seed for those quantiles, keeping results reproducible.
const INTERNAL_SEED: u64 = 24601;

/// The ingredients of the fixed-alternative power approximation.
#[derive(Debug, Clone)]
pub struct PowerAnalysis {
    /// The alternative `θ*` (the limit of `θ̂_β` under the alternative).
    pub theta_star: Vec<f64>,
    /// Its population projection `θ*₀` onto `Θ₀` (the limit of `θ̃_β`).
    pub theta_null_star: Vec<f64>,
    /// `d_γ(f_{θ*}, f_{θ*₀})` — the drift of the statistic over `2n`.
    pub divergence_gap: f64,
    /// Delta-method variance `σ²_{β,γ}` of the divergence estimate.
    pub sigma2: f64,
    /// Gradient of `d_γ(f_·, f_{θ*₀})` at `θ*`.
    pub t_vec: Vec<f64>,
    /// Gradient of `d_γ(f_{θ*}, f_·)` at `θ*₀`.
    pub s_vec: Vec<f64>,
    /// Joint `2p×2p` asymptotic covariance of `√n(θ̂−θ*, θ̃−θ*₀)`:
    /// blocks `J⁻¹KJ⁻¹`, `J⁻¹C₁₂P`, `PK̃P`.
    pub joint_cov: Mat,
}

/// The Theorem 9 contiguous-alternative law: `Σ λᵢ(Zᵢ+wᵢ)² + η`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContiguousSpec {
    /// The drift direction `d` in `θ_n = θ₀ + n^{−1/2} d`.
    pub d: Vec<f64>,
    /// Noncentrality shifts `w = Λ_k⁻¹ Vᵀ Sᵀ A_γ B J d`.
    pub w: Vec<f64>,
    /// Offset `η = (BJd)ᵀ A_γ (BJd) − wᵀ Λ_k w` (zero when `d = 0`).
    pub eta: f64,
    /// The null weights `λᵢ` the shifts attach to.
    pub spectrum: NullSpectrum,
}

impl ContiguousSpec {
    /// Materialize the law as a [`ChiSquareMixture`] for quantile and
    /// p-value queries.
    ///
    /// # Errors
    /// [`Error::Domain`] on invalid `mc_draws`.
    pub fn mixture(&self, mc_draws: u64, seed: u64) -> Result<ChiSquareMixture> {
        ChiSquareMixture::noncentral(
            self.spectrum.eigenvalues.clone(),
            Some(self.w.clone()),
            self.eta,
            mc_draws,
            seed,
        )
    }
}

/// Population projection of `θ*` onto `Θ₀`: the argmin over the null set of
/// `d_β(f_{θ*}, f_θ)` — the in-probability limit of the RMDPDE when the
/// data really come from `f_{θ*}`.
fn project_onto_null(
    model: &dyn ParametricModel,
    theta_star: &[f64],
    beta: f64,
    constraint: &ConstraintSpec,
) -> Result<Vec<f64>> {
    let p = model.dim();
    let positive = model.positive_params();
    let pins = constraint.pinned();
    let free: Vec<usize> = match pins {
        Some(pins) => (0..p).filter(|i| pins.iter().all(|&(j, _)| j != *i)).collect(),
        None => (0..p).collect(),
    };
    let mut start = theta_star.to_vec();
    if let Some(pins) = pins {
        for &(i, v) in pins {
            start[i] = v;
        }
    }
    if !model.in_domain(&start) {
        return Err(Error::domain(format!(
            "no admissible start for the null projection of {theta_star:?}"
        )));
    }
    let to_theta = |z: &[f64]| -> Vec<f64> {
        let mut theta = start.clone();
        for (slot, &i) in z.iter().zip(&free) {
            theta[i] = if positive[i] { fmath::exp(*slot) } else { *slot };
        }
        theta
    };
    let z0: Vec<f64> = free
        .iter()
        .map(|&i| if positive[i] { fmath::ln(start[i]) } else { start[i] })
        .collect();
    let spec = OptimizerSpec {
        method: Method::NelderMead,
        x_tol: 1e-11,
        f_tol: 1e-15,
        max_iters: 6000,
    };

    if pins.is_some() {
        let objective = |z: &[f64]| -> f64 {
            dpd(model, theta_star, &to_theta(z), beta).unwrap_or(f64::INFINITY)
        };
        let run = minimize(&objective, &z0, &spec, None)?;
        return Ok(to_theta(&run.x));
    }

    // General constraint: augmented-Lagrangian outer loop on the population
    // divergence.
    let r = constraint.r();
    let mut lambda = alloc::vec![0.0; r];
    let mut rho = 10.0;
    let mut z = z0;
    let mut prev_infeas = f64::INFINITY;
    for _ in 0..15 {
        let lam = lambda.clone();
        let objective = |zz: &[f64]| -> f64 {
            let theta = to_theta(zz);
            let Ok(obj) = dpd(model, theta_star, &theta, beta) else {
                return f64::INFINITY;
            };
            let g = constraint.g(&theta);
            let mut penalty = 0.0;
            for (gi, li) in g.iter().zip(&lam) {
                penalty += li * gi + 0.5 * rho * gi * gi;
            }
            obj + penalty
        };
        let run = minimize(&objective, &z, &spec, None)?;
        z = run.x;
        let g = constraint.g(&to_theta(&z));
        let infeas = g.iter().fold(0.0f64, |m, v| m.max(fmath::abs(*v)));
        if infeas <= 1e-10 && run.converged {
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
    let theta = to_theta(&z);
    if constraint.g(&theta).iter().any(|gi| fmath::abs(*gi) > 1e-8) {
        return Err(Error::ConstraintInfeasible {
            context: format!("population projection stayed infeasible for '{}'", constraint.label()),
        });
    }
    Ok(theta)
}

/// Assemble the delta-method ingredients of the power approximation at a
/// fixed alternative: the projection `θ*₀`, the divergence gap, the
/// gradients `t`, `s`, and the stacked sandwich covariance.
///
/// # Errors
/// [`Error::Domain`] when `θ*` already satisfies the constraint (there is
/// no alternative to detect); estimation/quadrature errors propagate.
pub fn power_analysis(
    model: &dyn ParametricModel,
    theta_star: &[f64],
    constraint: &ConstraintSpec,
    beta: f64,
    gamma: f64,
) -> Result<PowerAnalysis> {
    let infeas = constraint
        .g(theta_star)
        .iter()
        .fold(0.0f64, |m, v| m.max(fmath::abs(*v)));
    if infeas <= 1e-8 {
        return Err(Error::domain(format!(
            "theta_star = {theta_star:?} lies in the null set; power is the level there"
        )));
    }
    let theta_null = project_onto_null(model, theta_star, beta, constraint)?;
    let divergence_gap = dpd(model, theta_star, &theta_null, gamma)?;
    let p = model.dim();

    // Gradients of the divergence in each slot, central differences.
    let mut t_vec = alloc::vec![0.0; p];
    let mut s_vec = alloc::vec![0.0; p];
    for i in 0..p {
        let h = 1e-5 * (1.0 + fmath::abs(theta_star[i]));
        let mut up = theta_star.to_vec();
        up[i] += h;
        let mut dn = theta_star.to_vec();
        dn[i] -= h;
        t_vec[i] = (dpd(model, &up, &theta_null, gamma)? - dpd(model, &dn, &theta_null, gamma)?)
            / (2.0 * h);

        let h = 1e-5 * (1.0 + fmath::abs(theta_null[i]));
        let mut up = theta_null.to_vec();
        up[i] += h;
        let mut dn = theta_null.to_vec();
        dn[i] -= h;
        s_vec[i] = (dpd(model, theta_star, &up, gamma)? - dpd(model, theta_star, &dn, gamma)?)
            / (2.0 * h);
    }

    // Marginal block for θ̂: the under-the-model sandwich at θ*.
    let m1 = model_matrices(model, theta_star, beta, gamma)?;
    let j1_inv = m1.j.inverse()?;
    let cov_hat = j1_inv.matmul(&m1.k).matmul(&j1_inv).symmetrized();

    // Marginal block for θ̃: P K̃ P at θ*₀ with the off-model K̃ computed
    // against the true density f_{θ*} by quadrature.
    let m2 = constrained_matrices(model, &theta_null, beta, gamma, constraint)?;
    let p2 = m2.constrained.as_ref().expect("constrained fills blocks").p.clone();
    let theta_null_ref = &theta_null;
    let fb2 = |x: f64| fmath::exp(beta * model.log_density(theta_null_ref, x));
    let mut xi2 = alloc::vec![0.0; p];
    for (i, slot) in xi2.iter_mut().enumerate() {
        *slot = integrals::expect_under(model, theta_star, |x| {
            model.score(theta_null_ref, x)[i] * fb2(x)
        })?;
    }
    let mut k2 = Mat::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            let raw = integrals::expect_under(model, theta_star, |x| {
                let u = model.score(theta_null_ref, x);
                let f = fb2(x);
                u[i] * u[j] * f * f
            })?;
            let v = raw - xi2[i] * xi2[j];
            k2[(i, j)] = v;
            k2[(j, i)] = v;
        }
    }
    let cov_tilde = p2.matmul(&k2).matmul(&p2).symmetrized();

    // Cross block: J₁⁻¹ C₁₂ P₂ with C₁₂ the covariance of the two
    // estimating functions under f_{θ*}.
    let fb1 = |x: f64| fmath::exp(beta * model.log_density(theta_star, x));
    let mut c12 = Mat::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            let raw = integrals::expect_under(model, theta_star, |x| {
                model.score(theta_star, x)[i]
                    * fb1(x)
                    * model.score(theta_null_ref, x)[j]
                    * fb2(x)
            })?;
            c12[(i, j)] = raw - m1.xi[i] * xi2[j];
        }
    }
    let cov_cross = j1_inv.matmul(&c12).matmul(&p2);

    let mut joint_cov = Mat::zeros(2 * p, 2 * p);
    for i in 0..p {
        for j in 0..p {
            joint_cov[(i, j)] = cov_hat[(i, j)];
            joint_cov[(i, p + j)] = cov_cross[(i, j)];
            joint_cov[(p + j, i)] = cov_cross[(i, j)];
            joint_cov[(p + i, p + j)] = cov_tilde[(i, j)];
        }
    }

    let stacked: Vec<f64> = t_vec.iter().chain(&s_vec).copied().collect();
    let sigma2 = joint_cov.quad_form(&stacked).max(0.0);
    Ok(PowerAnalysis {
        theta_star: theta_star.to_vec(),
        theta_null_star: theta_null,
        divergence_gap,
        sigma2,
        t_vec,
        s_vec,
        joint_cov,
    })
}

/// Critical value of the null mixture at `θ*₀`.
fn critical_value(
    model: &dyn ParametricModel,
    analysis: &PowerAnalysis,
    constraint: &ConstraintSpec,
    beta: f64,
    gamma: f64,
    alpha: f64,
    mc_draws: u64,
    seed: u64,
) -> Result<f64> {
    let spectrum =
        null_spectrum(model, &analysis.theta_null_star, beta, gamma, constraint)?;
    let mix = ChiSquareMixture::new(spectrum.eigenvalues, mc_draws, seed)?;
    mixture_quantile(&mix, alpha)
}

/// A power evaluation together with the ingredients behind it.
#[derive(Debug, Clone)]
pub struct PowerReport {
    /// The delta-method ingredients at `θ*`.
    pub analysis: PowerAnalysis,
    /// Critical value of the null mixture at `θ*₀`.
    pub critical_value: f64,
    /// The approximate power at the requested `n`.
    pub power: f64,
}

/// Normal approximation of the power at the fixed alternative `θ*`:
/// `1 − Φ((√n/σ)(c_α/(2n) − d_γ))`, with the full analysis attached.
///
/// When the delta-method variance degenerates (`σ² ≤ 1e−12`) the statistic
/// is deterministic at this order and the power is the step function
/// `1{d_γ > c_α/(2n)}`.
///
/// # Errors
/// [`Error::Domain`] for `n < 2`, `α ∉ (0,1)`, or `θ*` inside the null
/// set; estimation/quadrature errors propagate.
#[allow(clippy::too_many_arguments)]
pub fn power_report(
    model: &dyn ParametricModel,
    theta_star: &[f64],
    constraint: &ConstraintSpec,
    beta: f64,
    gamma: f64,
    n: u64,
    alpha: f64,
    mc_draws: u64,
    seed: u64,
) -> Result<PowerReport> {
    if n < 2 {
        return Err(Error::domain(format!("power needs n >= 2, got {n}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must be in (0,1), got {alpha}")));
    }
    let analysis = power_analysis(model, theta_star, constraint, beta, gamma)?;
    let c_alpha =
        critical_value(model, &analysis, constraint, beta, gamma, alpha, mc_draws, seed)?;
    let nf = n as f64;
    let gap = analysis.divergence_gap;
    let power = if analysis.sigma2 <= 1e-12 {
        if gap > c_alpha / (2.0 * nf) {
            1.0
        } else {
            0.0
        }
    } else {
        let sigma = fmath::sqrt(analysis.sigma2);
        let arg = (fmath::sqrt(nf) / sigma) * (c_alpha / (2.0 * nf) - gap);
        special::normal_sf(arg).clamp(0.0, 1.0)
    };
    Ok(PowerReport { analysis, critical_value: c_alpha, power })
}

/// [`power_report`] reduced to the power value alone.
///
/// # Errors
/// As [`power_report`].
#[allow(clippy::too_many_arguments)]
pub fn approximate_power(
    model: &dyn ParametricModel,
    theta_star: &[f64],
    constraint: &ConstraintSpec,
    beta: f64,
    gamma: f64,
    n: u64,
    alpha: f64,
    mc_draws: u64,
    seed: u64,
) -> Result<f64> {
    power_report(model, theta_star, constraint, beta, gamma, n, alpha, mc_draws, seed)
        .map(|r| r.power)
}

/// A sample-size inversion together with the ingredients behind it.
#[derive(Debug, Clone)]
pub struct SampleSizeReport {
    /// The delta-method ingredients at `θ*`.
    pub analysis: PowerAnalysis,
    /// Critical value of the null mixture at `θ*₀`.
    pub critical_value: f64,
    /// Smallest sample size reaching the target power.
    pub n_required: u64,
}

/// Smallest sample size whose approximate power reaches `π`:
/// `n = ⌊n*⌋ + 1` with `n* = (A + B + √(A(A+2B))) / (2 d_γ²)`,
/// `A = σ²·(Φ⁻¹(1−π))²`, `B = c_α·d_γ`.
///
/// Multi-component mixtures draw their internal quantile from a fixed seed
/// so repeated calls agree; scalar constraints use the exact `χ²(1)` route.
///
/// # Errors
/// [`Error::Domain`] for `π ∉ (0,1)`, `α ∉ (0,1)`, a null-set `θ*`, or a
/// non-positive divergence gap.
pub fn sample_size_report(
    model: &dyn ParametricModel,
    theta_star: &[f64],
    constraint: &ConstraintSpec,
    beta: f64,
    gamma: f64,
    alpha: f64,
    pi: f64,
) -> Result<SampleSizeReport> {
    if !(pi > 0.0 && pi < 1.0) {
        return Err(Error::domain(format!("target power must be in (0,1), got {pi}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must be in (0,1), got {alpha}")));
    }
    let analysis = power_analysis(model, theta_star, constraint, beta, gamma)?;
    let gap = analysis.divergence_gap;
    if gap <= 0.0 {
        return Err(Error::domain(format!(
            "divergence gap {gap:e} is not positive; no sample size separates these hypotheses"
        )));
    }
    let c_alpha = critical_value(
        model,
        &analysis,
        constraint,
        beta,
        gamma,
        alpha,
        INTERNAL_MC_DRAWS,
        INTERNAL_SEED,
    )?;
    let a = analysis.sigma2 * {
        let q = special::normal_quantile(1.0 - pi);
        q * q
    };
    let b = c_alpha * gap;
    let n_star = (a + b + fmath::sqrt(a * (a + 2.0 * b))) / (2.0 * gap * gap);
    if !n_star.is_finite() || n_star >= 9.0e15 {
        return Err(Error::domain(format!(
            "required sample size overflows (n* = {n_star:e}); the alternative is too close"
        )));
    }
    let n_required = (fmath::floor(n_star) as u64 + 1).max(2);
    Ok(SampleSizeReport { analysis, critical_value: c_alpha, n_required })
}

/// [`sample_size_report`] reduced to the sample size alone.
///
/// # Errors
/// As [`sample_size_report`].
pub fn required_sample_size(
    model: &dyn ParametricModel,
    theta_star: &[f64],
    constraint: &ConstraintSpec,
    beta: f64,
    gamma: f64,
    alpha: f64,
    pi: f64,
) -> Result<u64> {
    sample_size_report(model, theta_star, constraint, beta, gamma, alpha, pi)
        .map(|r| r.n_required)
}

/// The Theorem 9 law of the statistic along `θ_n = θ₀ + n^{−1/2} d`.
///
/// # Errors
/// As [`crate::asymptotics::null_spectrum`] (`θ₀` must admit the
/// constrained matrices; rank failures surface as
/// [`Error::RankMismatch`]).
pub fn contiguous_distribution(
    model: &dyn ParametricModel,
    theta0: &[f64],
    d: &[f64],
    beta: f64,
    gamma: f64,
    constraint: &ConstraintSpec,
) -> Result<ContiguousSpec> {
    if d.len() != model.dim() {
        return Err(Error::domain(format!(
            "drift has {} components for a {}-parameter model",
            d.len(),
            model.dim()
        )));
    }
    let mats = constrained_matrices(model, theta0, beta, gamma, constraint)?;
    let part = mats.constrained.as_ref().expect("constrained fills blocks");
    let bkb = part.b.matmul(&mats.k).matmul(&part.b).symmetrized();
    let parts = spectrum_parts(&mats.a, &bkb, constraint.r())?;

    // m = B J d; w = Λ⁻¹ Vᵀ Sᵀ A m; η = mᵀAm − wᵀΛw.
    let m = part.b.matvec(&mats.j.matvec(d));
    let am = mats.a.matvec(&m);
    let sam = parts.s.t().matvec(&am);
    let vsam = parts.v.t().matvec(&sam);
    let w: Vec<f64> = vsam.iter().zip(&parts.eigenvalues).map(|(y, l)| y / l).collect();
    let m_am: f64 = m.iter().zip(&am).map(|(a, b)| a * b).sum();
    let w_lw: f64 = w.iter().zip(&parts.eigenvalues).map(|(wi, l)| wi * wi * l).sum();
    let eta = m_am - w_lw;
    Ok(ContiguousSpec {
        d: d.to_vec(),
        w,
        eta,
        spectrum: NullSpectrum { eigenvalues: parts.eigenvalues, k: constraint.r() },
    })
}
