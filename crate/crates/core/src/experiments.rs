//! Replication harness: the paired scaling study, the synthetic
//! signal-vs-noise surface, and the signal-to-noise ladder.

use rayon::prelude::*;

use crate::design::{self, GridExponent};
use crate::error::{Error, Result};
use crate::estimators::{estimate_from_surface, Branch, EstimatorResult, Method};
use crate::mc_likelihood::{exact_surface, mc_surface, LoglikSurface, MCLikConfig};
use crate::model::{fisher_info, sample_dataset, Model};
use crate::rng::StreamKey;

/// Settings of one scaling study.
#[derive(Clone, Debug)]
pub struct ScalingConfig {
    pub true_theta: f64,
    pub n_ladder: Vec<usize>,
    /// Monte Carlo budget exponent a in m = ceil(n^a); must lie in the open
    /// interval (1/2, 1). `f64::INFINITY` selects exact-oracle evaluation on
    /// both pipeline arms (a no-noise control run).
    pub m_exponent: f64,
    /// Requested grid half-width J (2J+1 points). Near a finite parameter
    /// boundary the per-replicate effective half-width may be smaller; see
    /// [`design::capped_half_width`].
    pub j_half: usize,
    pub replicates: usize,
    pub master_seed: u64,
    pub delta_exponent: GridExponent,
    pub share_draws_across_grid: bool,
}

impl ScalingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.m_exponent > 0.5 && self.m_exponent < 1.0) && !self.m_exponent.is_infinite() {
            return Err(Error::invalid(format!(
                "m_exponent must lie in the open interval (0.5, 1), got {}",
                self.m_exponent
            )));
        }
        if self.j_half < 2 {
            return Err(Error::invalid("J must be >= 2"));
        }
        if self.n_ladder.is_empty() {
            return Err(Error::invalid("n_ladder must not be empty"));
        }
        if self.n_ladder.iter().any(|&n| n < 4) {
            return Err(Error::invalid("every ladder entry must be >= 4"));
        }
        Ok(())
    }

    /// Monte Carlo samples per observation at data size n.
    pub fn m_of(&self, n: usize) -> usize {
        if self.m_exponent.is_infinite() {
            return usize::MAX;
        }
        (n as f64).powf(self.m_exponent).ceil() as usize
    }
}

/// Paired per-replicate output: the same dataset evaluated with Monte Carlo
/// and with exact likelihoods.
#[derive(Clone, Debug)]
pub struct ReplicatePair {
    pub mc: EstimatorResult,
    pub exact: EstimatorResult,
    pub j_eff: usize,
    pub m: usize,
    /// Importance draws consumed by the Monte Carlo arm.
    pub draws: u64,
}

/// One ladder row of the scaling report.
#[derive(Clone, Debug)]
pub struct ScalingRow {
    pub n: usize,
    pub m: usize,
    pub se_stat_hat: f64,
    pub se_mc_hat: f64,
    pub ratio_sq: f64,
    pub mean_bias: f64,
    pub fallback_rate: f64,
    pub se_stat_theory: f64,
    /// Total importance draws across replicates (budget accounting).
    pub total_draws: u64,
}

/// Full scaling study output.
#[derive(Clone, Debug)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
}

fn degenerate_result(center: f64) -> EstimatorResult {
    let mut r = EstimatorResult {
        theta_hat: center,
        method: Method::Mcle,
        branch: Branch::FallbackOneStep,
        fit: None,
        diagnostics: Default::default(),
    };
    r.diagnostics.insert("grid_out_of_bounds".into(), 1.0);
    r
}

/// Run the full pipeline once on a fresh dataset: sample, preliminary
/// estimate, discretize, grid, evaluate (Monte Carlo and exact), fit,
/// maximize. Deterministic in (cfg, n, rep).
pub fn run_replicate(
    model: &dyn Model,
    cfg: &ScalingConfig,
    n: usize,
    rep: usize,
) -> Result<ReplicatePair> {
    let theta_true = model.param(cfg.true_theta)?;
    let key = StreamKey::root(cfg.master_seed)
        .child_tag("n")
        .child(n as u64)
        .child_tag("rep")
        .child(rep as u64);

    let data = sample_dataset(model, &theta_true, n, key.child_tag("data"))?;
    let prelim = design::preliminary_estimate(model, &data)?;
    let mut center = design::discretize(prelim, n);
    let (lo, hi) = model.bounds();
    if !(center > lo && center < hi) {
        // The cell midpoint crossed a finite boundary; stay at the estimate.
        center = prelim;
    }

    let spacing = cfg.delta_exponent.spacing(n);
    let j_eff = design::capped_half_width(center, spacing, cfg.j_half, model.bounds());
    let grid = match design::build_grid(center, n, j_eff, cfg.delta_exponent, model.bounds()) {
        Ok(g) => g,
        Err(Error::GridOutOfBounds { .. }) => {
            // Even the minimal grid does not fit; record the replicate as a
            // fallback instead of aborting the study.
            let r = degenerate_result(center);
            return Ok(ReplicatePair { mc: r.clone(), exact: r, j_eff, m: 0, draws: 0 });
        }
        Err(e) => return Err(e),
    };

    let exact_vals = exact_surface(model, &grid, &data)?;
    let exact_est = estimate_from_surface(&grid, exact_vals.values());

    let (mc_vals, m, draws): (LoglikSurface, usize, u64) = if cfg.m_exponent.is_infinite() {
        (exact_vals, 0, 0)
    } else {
        let m = cfg.m_of(n);
        let mc_cfg = MCLikConfig {
            m,
            stream: key.child_tag("mc"),
            share_draws_across_grid: cfg.share_draws_across_grid,
        };
        let surface = mc_surface(model, &grid, &data, &mc_cfg)?;
        let draws = (n as u64) * (m as u64) * (grid.len() as u64);
        (surface, m, draws)
    };
    let mc_est = estimate_from_surface(&grid, mc_vals.values());

    Ok(ReplicatePair { mc: mc_est, exact: exact_est, j_eff, m, draws })
}

fn sample_var(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
}

/// Replicated scaling study with the paired standard-error decomposition.
///
/// Both pipeline arms of each replicate share the dataset, so
/// se_mc^2 = max(0, var(mc arm) - var(exact arm)) isolates the Monte Carlo
/// contribution by common-random-data differencing.
pub fn scaling_study(model: &dyn Model, cfg: &ScalingConfig) -> Result<ScalingReport> {
    cfg.validate()?;
    if cfg.replicates < 100 {
        return Err(Error::invalid(format!(
            "standard-error estimation needs at least 100 replicates, got {}",
            cfg.replicates
        )));
    }
    let info = fisher_info(model, &model.param(cfg.true_theta)?)?;

    let mut rows = Vec::with_capacity(cfg.n_ladder.len());
    for &n in &cfg.n_ladder {
        let pairs: Vec<ReplicatePair> = (0..cfg.replicates)
            .into_par_iter()
            .map(|rep| run_replicate(model, cfg, n, rep))
            .collect::<Result<_>>()?;

        let exact_thetas: Vec<f64> = pairs.iter().map(|p| p.exact.theta_hat).collect();
        let mc_thetas: Vec<f64> = pairs.iter().map(|p| p.mc.theta_hat).collect();
        let var_exact = sample_var(&exact_thetas);
        let var_mc = sample_var(&mc_thetas);
        let se_stat_hat = var_exact.sqrt();
        let se_mc_hat = (var_mc - var_exact).max(0.0).sqrt();
        let fallbacks = pairs.iter().filter(|p| p.mc.is_fallback() || p.exact.is_fallback()).count();
        let mean_bias =
            mc_thetas.iter().sum::<f64>() / mc_thetas.len() as f64 - cfg.true_theta;
        let total_draws: u64 = pairs.iter().map(|p| p.draws).sum();

        rows.push(ScalingRow {
            n,
            m: pairs[0].m,
            se_stat_hat,
            se_mc_hat,
            ratio_sq: (se_mc_hat * se_mc_hat) / (se_stat_hat * se_stat_hat),
            mean_bias,
            fallback_rate: fallbacks as f64 / cfg.replicates as f64,
            se_stat_theory: 1.0 / ((n as f64) * info).sqrt(),
            total_draws,
        });
    }
    Ok(ScalingReport { rows })
}

/// One point of the synthetic signal-vs-noise surface.
#[derive(Clone, Copy, Debug)]
pub struct Figure1Row {
    pub theta: f64,
    pub exact: f64,
    pub noisy: f64,
}

/// Synthetic illustration surface: the quadratic signal l(theta) = -n theta^2
/// evaluated at 21 points evenly spaced on [-delta_n, delta_n], plus centered
/// Gaussian noise of variance n/m with m = n^{m_rule}.
pub fn figure1_surface(
    n: usize,
    delta_exponent: GridExponent,
    m_rule: f64,
    seed: u64,
) -> Result<Vec<Figure1Row>> {
    if n < 4 {
        return Err(Error::invalid("figure1 surface needs n >= 4"));
    }
    let delta = delta_exponent.spacing(n);
    let noise_var = if m_rule.is_infinite() { 0.0 } else { (n as f64).powf(1.0 - m_rule) };
    let noise_sd = noise_var.sqrt();
    let key = StreamKey::root(seed).child_tag("figure1").child(n as u64);
    let rows = (0..21)
        .map(|k| {
            let theta = -delta + k as f64 * (delta / 10.0);
            let exact = -(n as f64) * theta * theta;
            let noisy = exact + noise_sd * key.child(k as u64).rng().normal();
            Figure1Row { theta, exact, noisy }
        })
        .collect();
    Ok(rows)
}

/// One signal-to-noise ladder row.
#[derive(Clone, Copy, Debug)]
pub struct SnrRow {
    pub n: usize,
    pub exponent: f64,
    pub signal_span: f64,
    pub noise_sd: f64,
    pub snr: f64,
}

/// Signal span n delta^2, noise sd sqrt(n/m), and their ratio, for both
/// spacing laws over an n-ladder, with m = n^{m_rule}.
pub fn snr_table(n_ladder: &[usize], m_rule: f64) -> Vec<SnrRow> {
    let mut rows = Vec::with_capacity(2 * n_ladder.len());
    for exponent in [GridExponent::Quarter, GridExponent::Half] {
        for &n in n_ladder {
            let nf = n as f64;
            let delta = exponent.spacing(n);
            let signal_span = nf * delta * delta;
            let noise_sd = if m_rule.is_infinite() { 0.0 } else { nf.powf(0.5 * (1.0 - m_rule)) };
            let snr = if noise_sd == 0.0 { f64::INFINITY } else { signal_span / noise_sd };
            rows.push(SnrRow { n, exponent: exponent.value(), signal_span, noise_sd, snr });
        }
    }
    rows
}
