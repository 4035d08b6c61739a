//! Data-driven selection of the tuning parameter β.
//!
//! Candidate values are scored by an empirical mean-square error against a
//! robust pilot fit: the squared distance between `θ̂_β` and the pilot
//! estimate plays the bias² part, and the plug-in sandwich variance
//! `n⁻¹·tr(J_β⁻¹ K_β J_β⁻¹)` at `θ̂_β` the variance part. The reported
//! optimum is the grid argmin, so its resolution is the grid step.

use alloc::format;
use alloc::vec::Vec;

use crate::asymptotics::model_matrices;
use crate::divergence::Dataset;
use crate::estimation::fit_mdpde;
use crate::models::ParametricModel;
use crate::{Error, Result};

/// Configuration of the β selection sweep.
#[derive(Debug, Clone)]
pub struct TuningConfig {
    /// Ascending candidate values in `[0, 1]`.
    pub grid: Vec<f64>,
    /// β of the robust pilot fit the candidates are compared against.
    pub pilot_beta: f64,
    /// Parameter coordinates entering the MSE; `None` means all of them.
    pub target: Option<Vec<usize>>,
}

impl Default for TuningConfig {
    /// Grid `0, 0.01, …, 1` with pilot `β = 0.5`, scoring all coordinates.
    fn default() -> Self {
        TuningConfig {
            grid: (0..=100).map(|i| f64::from(i) / 100.0).collect(),
            pilot_beta: 0.5,
            target: None,
        }
    }
}

/// One grid point of the sweep: `mse` is `None` where the fit (or its
/// sandwich) failed and the point was skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    /// The candidate β.
    pub beta: f64,
    /// Estimated MSE at this β, when the point converged.
    pub mse: Option<f64>,
    /// The fitted parameter at this β, when the point converged.
    pub theta: Option<Vec<f64>>,
}

/// Outcome of [`select_beta`].
#[derive(Debug, Clone, PartialEq)]
pub struct TuningResult {
    /// Grid value minimizing the estimated MSE (lowest β on ties).
    pub beta_opt: f64,
    /// The fit at `beta_opt`.
    pub theta_opt: Vec<f64>,
    /// The full curve, one entry per grid point, in grid order.
    pub mse_curve: Vec<GridPoint>,
    /// Number of grid points skipped because estimation failed there.
    pub skipped: usize,
}

fn validate(config: &TuningConfig, dim: usize) -> Result<()> {
    if config.grid.is_empty() {
        return Err(Error::domain("tuning grid is empty"));
    }
    for w in config.grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::domain("tuning grid must be strictly ascending"));
        }
    }
    let (lo, hi) = (config.grid[0], config.grid[config.grid.len() - 1]);
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) {
        return Err(Error::domain("tuning grid must lie within [0, 1]"));
    }
    if !(lo..=hi).contains(&config.pilot_beta) {
        return Err(Error::domain(format!(
            "pilot beta {} outside the grid range [{lo}, {hi}]",
            config.pilot_beta
        )));
    }
    if let Some(target) = &config.target {
        if target.is_empty() || target.iter().any(|&i| i >= dim) {
            return Err(Error::domain(format!(
                "target coordinates {target:?} invalid for a {dim}-parameter model"
            )));
        }
    }
    Ok(())
}

/// Sweep the grid and return the MSE-minimizing β together with the full
/// curve.
///
/// Grid points where estimation or the sandwich evaluation fails are
/// skipped (their curve entry carries `mse: None` and `skipped` counts
/// them); the sweep fails only when every point does, or when the pilot
/// fit itself cannot be computed.
///
/// # Errors
/// [`Error::Domain`] on an invalid configuration; pilot-fit errors
/// propagate; [`Error::NonConvergent`] when no grid point converges.
pub fn select_beta(
    model: &dyn ParametricModel,
    data: &Dataset,
    config: &TuningConfig,
) -> Result<TuningResult> {
    validate(config, model.dim())?;
    let pilot = fit_mdpde(model, data, config.pilot_beta, None)?;
    let coords: Vec<usize> = match &config.target {
        Some(t) => t.clone(),
        None => (0..model.dim()).collect(),
    };
    let n = data.n() as f64;

    let mut curve = Vec::with_capacity(config.grid.len());
    let mut warm: Option<Vec<f64>> = None;
    let mut skipped = 0usize;
    for &beta in &config.grid {
        let point = fit_mdpde(model, data, beta, warm.as_deref())
            .ok()
            .filter(|fit| fit.converged)
            .and_then(|fit| {
                let mats = model_matrices(model, &fit.theta_hat, beta, beta).ok()?;
                let j_inv = mats.j.inverse().ok()?;
                let sandwich = j_inv.matmul(&mats.k).matmul(&j_inv);
                let mut mse = 0.0;
                for &i in &coords {
                    let bias = fit.theta_hat[i] - pilot.theta_hat[i];
                    mse += bias * bias + sandwich[(i, i)] / n;
                }
                mse.is_finite().then_some((fit.theta_hat, mse))
            });
        match point {
            Some((theta, mse)) => {
                warm = Some(theta.clone());
                curve.push(GridPoint { beta, mse: Some(mse), theta: Some(theta) });
            }
            None => {
                skipped += 1;
                curve.push(GridPoint { beta, mse: None, theta: None });
            }
        }
    }

    // Ascending scan with strict improvement keeps the lowest β on ties.
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    for point in &curve {
        if let (Some(mse), Some(theta)) = (point.mse, &point.theta) {
            if best.as_ref().is_none_or(|(_, b, _)| mse < *b) {
                best = Some((point.beta, mse, theta.clone()));
            }
        }
    }
    let Some((beta_opt, _, theta_opt)) = best else {
        return Err(Error::non_convergent(
            "every grid point failed during the tuning sweep",
            f64::NAN,
        ));
    };
    Ok(TuningResult { beta_opt, theta_opt, mse_curve: curve, skipped })
}
