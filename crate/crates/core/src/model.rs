//! Latent-variable parametric models and their exact-likelihood oracles.
//!
//! A [`Model`] supplies everything the pipeline consumes: the latent prior
//! `p_X(x; theta)`, the conditional `p_{Y|X}(y | x; theta)`, an importance
//! proposal `q(x; theta)` (the prior unless overridden), samplers for all of
//! them, and — for the analytic test models — the closed-form marginal
//! log-density with derivatives in `theta` up to fourth order.
//!
//! Two concrete models ship:
//! * [`GaussMeanLatent`] — X ~ N(theta, tau^2), Y|X ~ N(X, sigma^2); the
//!   marginal N(theta, tau^2 + sigma^2) is the exact oracle.
//! * [`GaussScale`] — Y ~ N(0, theta^2). For Monte Carlo evaluation it is
//!   represented by the equal-split factorization X ~ N(0, theta^2/2),
//!   Y|X ~ N(X, theta^2/2), which has the same marginal.

use crate::error::{Error, Result};
use crate::quad;
use crate::rng::{StreamKey, StreamRng};

const LN_2PI: f64 = 1.837877066409345483560659472811;

#[inline]
pub(crate) fn normal_logpdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * LN_2PI - sd.ln() - 0.5 * z * z
}

/// A scalar parameter value together with its admissible open interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParameterPoint {
    theta: f64,
    lower: f64,
    upper: f64,
}

impl ParameterPoint {
    pub fn new(theta: f64, lower: f64, upper: f64) -> Result<Self> {
        if !(lower < upper) {
            return Err(Error::invalid(format!("empty parameter interval ({lower}, {upper})")));
        }
        if !theta.is_finite() || theta <= lower || theta >= upper {
            return Err(Error::invalid(format!(
                "theta {theta} outside the open interval ({lower}, {upper})"
            )));
        }
        Ok(ParameterPoint { theta, lower, upper })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }
}

/// Observed sample (Y_1, ..., Y_n).
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    observations: Vec<f64>,
}

impl Dataset {
    pub fn new(observations: Vec<f64>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::invalid("dataset must contain at least one observation"));
        }
        Ok(Dataset { observations })
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn observations(&self) -> &[f64] {
        &self.observations
    }
}

/// Latent-variable model capability record.
///
/// Log densities are used throughout; raw densities underflow long before the
/// asymptotic regime of interest is reached.
pub trait Model: Send + Sync {
    fn name(&self) -> &'static str;

    /// Open admissible interval for theta.
    fn bounds(&self) -> (f64, f64);

    /// ln p_X(x; theta).
    fn log_prior_density(&self, x: f64, theta: f64) -> f64;

    /// Draw X ~ p_X(.; theta).
    fn prior_sample(&self, theta: f64, rng: &mut StreamRng) -> f64;

    /// ln p_{Y|X}(y | x; theta).
    fn log_cond_density(&self, y: f64, x: f64, theta: f64) -> f64;

    /// ln q(x; theta). Defaults to the prior.
    fn log_proposal_density(&self, x: f64, theta: f64) -> f64 {
        self.log_prior_density(x, theta)
    }

    /// Draw X ~ q(.; theta). Defaults to the prior sampler.
    fn proposal_sample(&self, theta: f64, rng: &mut StreamRng) -> f64 {
        self.prior_sample(theta, rng)
    }

    /// Log importance weight ln[ p_{Y|X} * p_X / q ] at a proposal draw.
    fn log_weight(&self, y: f64, x: f64, theta: f64) -> f64 {
        self.log_cond_density(y, x, theta) + self.log_prior_density(x, theta)
            - self.log_proposal_density(x, theta)
    }

    /// Closed-form ln p(y; theta), when available.
    fn exact_logdensity(&self, y: f64, theta: f64) -> Option<f64>;

    /// Closed-form d^k/dtheta^k ln p(y; theta) for k in 1..=4, when available.
    fn logdensity_deriv(&self, y: f64, theta: f64, order: u32) -> Option<f64>;

    /// Draw Y ~ P_theta.
    fn data_sample(&self, theta: f64, rng: &mut StreamRng) -> f64;

    /// sqrt(n)-consistent method-of-moments estimate, clamped into bounds.
    fn preliminary_estimate(&self, data: &Dataset) -> Result<f64>;

    /// Truncated observation support used by quadrature (12 sd rule).
    fn obs_support(&self, theta: f64) -> (f64, f64);

    /// Truncated latent support used by quadrature (12 sd rule).
    fn latent_support(&self, theta: f64) -> (f64, f64);

    /// Wrap a value of theta as a checked [`ParameterPoint`].
    fn param(&self, theta: f64) -> Result<ParameterPoint> {
        let (lo, hi) = self.bounds();
        ParameterPoint::new(theta, lo, hi)
    }
}

/// X ~ N(theta, tau^2), Y|X ~ N(X, sigma^2); marginal N(theta, tau^2 + sigma^2).
#[derive(Clone, Debug)]
pub struct GaussMeanLatent {
    tau: f64,
    sigma: f64,
}

impl GaussMeanLatent {
    pub fn new(tau: f64, sigma: f64) -> Result<Self> {
        if !(tau > 0.0 && sigma > 0.0) {
            return Err(Error::invalid(format!("tau {tau} and sigma {sigma} must be positive")));
        }
        Ok(GaussMeanLatent { tau, sigma })
    }

    fn marginal_var(&self) -> f64 {
        self.tau * self.tau + self.sigma * self.sigma
    }
}

impl Default for GaussMeanLatent {
    fn default() -> Self {
        GaussMeanLatent { tau: 1.0, sigma: 1.0 }
    }
}

impl Model for GaussMeanLatent {
    fn name(&self) -> &'static str {
        "gauss-mean-latent"
    }

    fn bounds(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn log_prior_density(&self, x: f64, theta: f64) -> f64 {
        normal_logpdf(x, theta, self.tau)
    }

    fn prior_sample(&self, theta: f64, rng: &mut StreamRng) -> f64 {
        theta + self.tau * rng.normal()
    }

    fn log_cond_density(&self, y: f64, x: f64, _theta: f64) -> f64 {
        normal_logpdf(y, x, self.sigma)
    }

    fn log_weight(&self, y: f64, x: f64, theta: f64) -> f64 {
        // proposal == prior, so the weight is the conditional alone
        self.log_cond_density(y, x, theta)
    }

    fn exact_logdensity(&self, y: f64, theta: f64) -> Option<f64> {
        Some(normal_logpdf(y, theta, self.marginal_var().sqrt()))
    }

    fn logdensity_deriv(&self, y: f64, theta: f64, order: u32) -> Option<f64> {
        let v = self.marginal_var();
        match order {
            1 => Some((y - theta) / v),
            2 => Some(-1.0 / v),
            3 | 4 => Some(0.0),
            _ => None,
        }
    }

    fn data_sample(&self, theta: f64, rng: &mut StreamRng) -> f64 {
        theta + self.marginal_var().sqrt() * rng.normal()
    }

    fn preliminary_estimate(&self, data: &Dataset) -> Result<f64> {
        let n = data.len() as f64;
        Ok(data.observations().iter().sum::<f64>() / n)
    }

    fn obs_support(&self, theta: f64) -> (f64, f64) {
        let sd = self.marginal_var().sqrt();
        (theta - 12.0 * sd, theta + 12.0 * sd)
    }

    fn latent_support(&self, theta: f64) -> (f64, f64) {
        (theta - 12.0 * self.tau, theta + 12.0 * self.tau)
    }
}

/// Y ~ N(0, theta^2), theta > 0.
///
/// The marginal is exact; Monte Carlo evaluation uses the equal-split latent
/// factorization X ~ N(0, theta^2/2), Y|X ~ N(X, theta^2/2).
#[derive(Clone, Debug, Default)]
pub struct GaussScale;

impl GaussScale {
    #[inline]
    fn half_sd(theta: f64) -> f64 {
        theta * std::f64::consts::FRAC_1_SQRT_2
    }
}

impl Model for GaussScale {
    fn name(&self) -> &'static str {
        "gauss-scale"
    }

    fn bounds(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn log_prior_density(&self, x: f64, theta: f64) -> f64 {
        normal_logpdf(x, 0.0, Self::half_sd(theta))
    }

    fn prior_sample(&self, theta: f64, rng: &mut StreamRng) -> f64 {
        Self::half_sd(theta) * rng.normal()
    }

    fn log_cond_density(&self, y: f64, x: f64, theta: f64) -> f64 {
        normal_logpdf(y, x, Self::half_sd(theta))
    }

    fn log_weight(&self, y: f64, x: f64, theta: f64) -> f64 {
        self.log_cond_density(y, x, theta)
    }

    fn exact_logdensity(&self, y: f64, theta: f64) -> Option<f64> {
        Some(normal_logpdf(y, 0.0, theta))
    }

    fn logdensity_deriv(&self, y: f64, theta: f64, order: u32) -> Option<f64> {
        let y2 = y * y;
        match order {
            1 => Some(-1.0 / theta + y2 / theta.powi(3)),
            2 => Some(1.0 / (theta * theta) - 3.0 * y2 / theta.powi(4)),
            3 => Some(-2.0 / theta.powi(3) + 12.0 * y2 / theta.powi(5)),
            4 => Some(6.0 / theta.powi(4) - 60.0 * y2 / theta.powi(6)),
            _ => None,
        }
    }

    fn data_sample(&self, theta: f64, rng: &mut StreamRng) -> f64 {
        theta * rng.normal()
    }

    fn preliminary_estimate(&self, data: &Dataset) -> Result<f64> {
        let n = data.len() as f64;
        let m2 = data.observations().iter().map(|y| y * y).sum::<f64>() / n;
        if m2 <= 0.0 {
            return Err(Error::DegenerateData {
                reason: "sum of squares is zero; scale estimate hits the boundary".into(),
            });
        }
        Ok(m2.sqrt())
    }

    fn obs_support(&self, theta: f64) -> (f64, f64) {
        (-12.0 * theta, 12.0 * theta)
    }

    fn latent_support(&self, theta: f64) -> (f64, f64) {
        let sd = Self::half_sd(theta);
        (-12.0 * sd, 12.0 * sd)
    }
}

/// Look a model up by its configuration name.
pub fn model_by_name(name: &str, tau: f64, sigma: f64) -> Result<Box<dyn Model>> {
    match name {
        "gauss-mean-latent" => Ok(Box::new(GaussMeanLatent::new(tau, sigma)?)),
        "gauss-scale" => Ok(Box::new(GaussScale)),
        _ => Err(Error::invalid(format!("unknown model `{name}`"))),
    }
}

/// Sum of exact per-observation log-densities.
pub fn exact_loglik(model: &dyn Model, theta: &ParameterPoint, data: &Dataset) -> Result<f64> {
    let th = theta.theta();
    let mut total = 0.0;
    for (i, &y) in data.observations().iter().enumerate() {
        let term = model
            .exact_logdensity(y, th)
            .ok_or(Error::OracleUnavailable { model: model.name(), what: "exact log-density" })?;
        if !term.is_finite() {
            return Err(Error::NonFiniteLikelihood { index: i, value: term });
        }
        total += term;
    }
    Ok(total)
}

/// First derivative of the log-density in theta at one observation.
///
/// Uses the analytic derivative when the model provides it, otherwise a
/// Richardson-extrapolated central difference of the exact log-density.
pub fn score(model: &dyn Model, theta: &ParameterPoint, y: f64) -> Result<f64> {
    let th = theta.theta();
    if let Some(d) = model.logdensity_deriv(y, th, 1) {
        return Ok(d);
    }
    if model.exact_logdensity(y, th).is_some() {
        let f = |t: f64| model.exact_logdensity(y, t).unwrap();
        return Ok(richardson_diff(&f, th, derivative_step(th)));
    }
    Err(Error::OracleUnavailable { model: model.name(), what: "score" })
}

/// Fisher information E_theta[score^2] by adaptive quadrature.
pub fn fisher_info(model: &dyn Model, theta: &ParameterPoint) -> Result<f64> {
    let th = theta.theta();
    let (lo, hi) = model.obs_support(th);
    let integrand = |y: f64| {
        let s = model.logdensity_deriv(y, th, 1).unwrap_or(0.0);
        let lp = model.exact_logdensity(y, th).unwrap_or(f64::NEG_INFINITY);
        s * s * lp.exp()
    };
    let info = quad::integrate(integrand, lo, hi, quad::MOMENT_TOL)?;
    if info <= 0.0 {
        return Err(Error::NonpositiveInformation { info });
    }
    Ok(info)
}

/// Draw an i.i.d. dataset of size `n` from P_theta on the given stream.
pub fn sample_dataset(
    model: &dyn Model,
    theta: &ParameterPoint,
    n: usize,
    stream: StreamKey,
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::invalid("dataset size must be at least 1"));
    }
    let mut rng = stream.rng();
    let th = theta.theta();
    let obs = (0..n).map(|_| model.data_sample(th, &mut rng)).collect();
    Dataset::new(obs)
}

/// Step size for finite differences of the log-density in theta.
pub(crate) fn derivative_step(theta: f64) -> f64 {
    1e-4 * theta.abs().max(1.0)
}

/// Richardson-extrapolated central difference, O(h^4).
pub(crate) fn richardson_diff(f: &impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}
