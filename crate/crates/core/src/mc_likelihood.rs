//! Unbiased importance-sampling likelihood evaluation.
//!
//! For each observation the marginal density is estimated by averaging m
//! importance weights drawn from the model's proposal; only the logarithm of
//! that average is ever formed (max-shifted log-mean-exp), so evaluations
//! stay finite deep into the large-n regime where raw densities underflow.
//!
//! Streams: each observation consumes the substream
//! `cfg.stream -> "obs" -> i`. Callers evaluating a whole grid bake the grid
//! index into `cfg.stream` beforehand (see [`mc_surface`]) unless draws are
//! deliberately shared across grid points to induce positive coupling.

use crate::design::GridSpec;
use crate::error::{Error, Result};
use crate::model::{exact_loglik, Dataset, Model, ParameterPoint};
use crate::rng::StreamKey;

/// Monte Carlo evaluation settings.
#[derive(Clone, Copy, Debug)]
pub struct MCLikConfig {
    /// Importance samples per observation.
    pub m: usize,
    /// Substream root for this evaluation.
    pub stream: StreamKey,
    /// Reuse observation substreams at every grid point (common random
    /// numbers across the grid). Default off: the meta-model treats grid
    /// errors as independent.
    pub share_draws_across_grid: bool,
}

impl MCLikConfig {
    pub fn new(m: usize, stream: StreamKey) -> Self {
        MCLikConfig { m, stream, share_draws_across_grid: false }
    }
}

/// One full-data Monte Carlo log-likelihood evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct LoglikEvaluation {
    /// Sum of the per-observation estimates.
    pub total: f64,
    /// ln p-hat(Y_i) in observation order.
    pub per_obs: Vec<f64>,
    /// Smallest effective sample size (sum w)^2 / sum w^2 over observations.
    pub min_weight_ess: f64,
    /// Mean over observations of the relative weight variance estimate
    /// m * sum(w^2) / (sum w)^2 - 1; the basis of consistency bands.
    pub mean_rel_weight_var: f64,
}

/// Log-likelihood values over a grid, exact or Monte Carlo.
#[derive(Clone, Debug, PartialEq)]
pub struct LoglikSurface {
    thetas: Vec<f64>,
    values: Vec<f64>,
    min_weight_ess: Option<f64>,
}

impl LoglikSurface {
    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Smallest per-observation ESS across all grid points; None on exact
    /// surfaces.
    pub fn min_weight_ess(&self) -> Option<f64> {
        self.min_weight_ess
    }
}

struct ObsEstimate {
    log_phat: f64,
    ess: f64,
}

fn estimate_one(
    model: &dyn Model,
    theta: f64,
    y: f64,
    m: usize,
    stream: StreamKey,
    index: usize,
    buf: &mut Vec<f64>,
) -> Result<ObsEstimate> {
    let mut rng = stream.rng();
    buf.clear();
    let mut max = f64::NEG_INFINITY;
    for _ in 0..m {
        let x = model.proposal_sample(theta, &mut rng);
        let lw = model.log_weight(y, x, theta);
        if lw.is_nan() || lw == f64::INFINITY {
            return Err(Error::NonFiniteLikelihood { index, value: lw });
        }
        if lw > max {
            max = lw;
        }
        buf.push(lw);
    }
    if max == f64::NEG_INFINITY {
        return Err(Error::AllWeightsZero { index, m });
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for &lw in buf.iter() {
        let w = (lw - max).exp();
        sum += w;
        sum_sq += w * w;
    }
    let log_phat = max + (sum / m as f64).ln();
    let ess = sum * sum / sum_sq;
    Ok(ObsEstimate { log_phat, ess })
}

/// Log of the unbiased importance-sampling estimate of p(y; theta).
///
/// E[exp(result)] equals the marginal density exactly, for any m >= 1.
pub fn importance_log_density(
    model: &dyn Model,
    theta: &ParameterPoint,
    y: f64,
    cfg: &MCLikConfig,
) -> Result<f64> {
    if cfg.m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    let mut buf = Vec::with_capacity(cfg.m);
    let est = estimate_one(
        model,
        theta.theta(),
        y,
        cfg.m,
        cfg.stream.child_tag("obs").child(0),
        0,
        &mut buf,
    )?;
    Ok(est.log_phat)
}

/// Monte Carlo log-likelihood of a dataset at one parameter value.
pub fn mc_loglik(
    model: &dyn Model,
    theta: &ParameterPoint,
    data: &Dataset,
    cfg: &MCLikConfig,
) -> Result<LoglikEvaluation> {
    if cfg.m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    let th = theta.theta();
    let obs_root = cfg.stream.child_tag("obs");
    let mut per_obs = Vec::with_capacity(data.len());
    let mut buf = Vec::with_capacity(cfg.m);
    let mut total = 0.0;
    let mut min_ess = f64::INFINITY;
    let mut relvar_sum = 0.0;
    for (i, &y) in data.observations().iter().enumerate() {
        let est = estimate_one(model, th, y, cfg.m, obs_root.child(i as u64), i, &mut buf)?;
        total += est.log_phat;
        min_ess = min_ess.min(est.ess);
        relvar_sum += cfg.m as f64 / est.ess - 1.0;
        per_obs.push(est.log_phat);
    }
    Ok(LoglikEvaluation {
        total,
        per_obs,
        min_weight_ess: min_ess,
        mean_rel_weight_var: relvar_sum / data.len() as f64,
    })
}

/// Monte Carlo surface over a grid.
///
/// Unless `cfg.share_draws_across_grid` is set, each grid point gets the
/// substream `cfg.stream -> "grid" -> j`, making surface errors independent
/// across points; sharing reuses the same observation substreams everywhere.
pub fn mc_surface(
    model: &dyn Model,
    grid: &GridSpec,
    data: &Dataset,
    cfg: &MCLikConfig,
) -> Result<LoglikSurface> {
    let mut values = Vec::with_capacity(grid.len());
    let mut min_ess = f64::INFINITY;
    for (j, &th) in grid.points().iter().enumerate() {
        let stream = if cfg.share_draws_across_grid {
            cfg.stream
        } else {
            cfg.stream.child_tag("grid").child(j as u64)
        };
        let point_cfg = MCLikConfig { stream, ..*cfg };
        let eval = mc_loglik(model, &model.param(th)?, data, &point_cfg)?;
        min_ess = min_ess.min(eval.min_weight_ess);
        values.push(eval.total);
    }
    Ok(LoglikSurface { thetas: grid.points().to_vec(), values, min_weight_ess: Some(min_ess) })
}

/// Exact-oracle surface over a grid.
pub fn exact_surface(model: &dyn Model, grid: &GridSpec, data: &Dataset) -> Result<LoglikSurface> {
    let mut values = Vec::with_capacity(grid.len());
    for &th in grid.points() {
        values.push(exact_loglik(model, &model.param(th)?, data)?);
    }
    Ok(LoglikSurface { thetas: grid.points().to_vec(), values, min_weight_ess: None })
}

/// One row of the bias/variance study.
#[derive(Clone, Copy, Debug)]
pub struct BiasPoint {
    pub m: usize,
    pub bias_est: f64,
    pub bias_se: f64,
    pub var_est: f64,
    pub var_se: f64,
}

/// Replicate study of the log-likelihood error (mc - exact) across m.
pub fn bias_curve(
    model: &dyn Model,
    theta: &ParameterPoint,
    data: &Dataset,
    m_values: &[usize],
    replicates: usize,
    stream: StreamKey,
) -> Result<Vec<BiasPoint>> {
    if replicates < 50 {
        return Err(Error::invalid(format!(
            "bias curve needs at least 50 replicates, got {replicates}"
        )));
    }
    let exact = exact_loglik(model, theta, data)?;
    let mut out = Vec::with_capacity(m_values.len());
    for &m in m_values {
        let m_root = stream.child_tag("m").child(m as u64);
        let mut errors = Vec::with_capacity(replicates);
        for rep in 0..replicates {
            let cfg = MCLikConfig::new(m, m_root.child_tag("rep").child(rep as u64));
            errors.push(mc_loglik(model, theta, data, &cfg)?.total - exact);
        }
        let r = replicates as f64;
        let mean = errors.iter().sum::<f64>() / r;
        let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (r - 1.0);
        let m4 = errors.iter().map(|e| (e - mean).powi(4)).sum::<f64>() / r;
        // moment-based standard error of the sample variance
        let var_se = ((m4 - var * var * (r - 3.0) / (r - 1.0)) / r).max(0.0).sqrt();
        out.push(BiasPoint {
            m,
            bias_est: mean,
            bias_se: (var / r).sqrt(),
            var_est: var,
            var_se,
        });
    }
    Ok(out)
}
