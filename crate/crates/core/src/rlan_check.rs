//! Numerical verification of the rescaled local expansion of the
//! log-likelihood.
//!
//! The expansion writes l(theta + delta t) - l(theta) as four bracketed terms
//! in powers of t — an empirical score term, an empirical curvature term, and
//! two population coefficients (cubic and quartic) — plus a remainder that
//! stays bounded on the n^{-1/4} scale and vanishes on the n^{-1/2} scale.
//!
//! All population quantities are moments of the score family
//! d_k = 2 s^{(k)} / s (s = sqrt of the density), evaluated here through
//! log-density derivatives and adaptive quadrature so that no sampling noise
//! enters the coefficients.

use crate::design::GridExponent;
use crate::error::{Error, Result};
use crate::model::{
    self, exact_loglik, richardson_diff, Dataset, Model, ParameterPoint,
};
use crate::quad;
use crate::rng::StreamKey;

/// Largest |t| accepted by the remainder evaluation.
pub const T_BOUND: f64 = 2.0;

/// The score family d_k = 2 s^{(k)}(theta) / s(theta) at one observation.
///
/// In terms of log-density derivatives l^(k):
///   d1 = l'
///   d2 = l'' + l'^2 / 2
///   d3 = l''' + (3/2) l' l'' + l'^3 / 4
///   d4 = l'''' + (3/2) l''^2 + 2 l' l''' + (3/2) l'^2 l'' + l'^4 / 8
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreFamily {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
}

fn logdensity_deriv_or_fd(model: &dyn Model, y: f64, theta: f64, order: u32) -> Result<f64> {
    if let Some(v) = model.logdensity_deriv(y, theta, order) {
        return Ok(v);
    }
    match order {
        1 => {
            if model.exact_logdensity(y, theta).is_some() {
                let f = |t: f64| model.exact_logdensity(y, t).unwrap();
                Ok(richardson_diff(&f, theta, model::derivative_step(theta)))
            } else {
                Err(Error::OracleUnavailable { model: model.name(), what: "log-density derivative" })
            }
        }
        // A missing fourth derivative is differenced from the third.
        4 if model.logdensity_deriv(y, theta, 3).is_some() => {
            let f = |t: f64| model.logdensity_deriv(y, t, 3).unwrap();
            Ok(richardson_diff(&f, theta, model::derivative_step(theta)))
        }
        _ => Err(Error::OracleUnavailable { model: model.name(), what: "log-density derivative" }),
    }
}

/// Evaluate the score family at one observation.
pub fn score_family(model: &dyn Model, theta: &ParameterPoint, y: f64) -> Result<ScoreFamily> {
    let th = theta.theta();
    let l1 = logdensity_deriv_or_fd(model, y, th, 1)?;
    let l2 = logdensity_deriv_or_fd(model, y, th, 2)?;
    let l3 = logdensity_deriv_or_fd(model, y, th, 3)?;
    let l4 = logdensity_deriv_or_fd(model, y, th, 4)?;
    Ok(ScoreFamily {
        d1: l1,
        d2: l2 + 0.5 * l1 * l1,
        d3: l3 + 1.5 * l1 * l2 + 0.25 * l1 * l1 * l1,
        d4: l4 + 1.5 * l2 * l2 + 2.0 * l1 * l3 + 1.5 * l1 * l1 * l2 + 0.125 * l1.powi(4),
    })
}

/// Raw population moments of the score family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RlanMoments {
    pub e_d1_sq: f64,
    pub e_d1_cubed: f64,
    pub e_d2_d1: f64,
    pub e_d3: f64,
    pub e_d1_fourth: f64,
    pub e_d2_sq: f64,
    pub e_d3_d1: f64,
    pub e_d4: f64,
    pub e_d2: f64,
    pub e_d2_d1_sq: f64,
}

/// Population coefficients of the expansion.
///
/// `w_cubic` and `q_quartic` are the Taylor-consistent combinations — they
/// equal E[l''']/6 and E[l'''']/24 and are the coefficients under which the
/// remainder actually stays bounded (the location-model remainder is exactly
/// zero only with them). The `*_half_cross`, `*_second_moment` and
/// `*_mean_square` variants are alternative moment combinations that drop or
/// reweight individual cross terms; they are reported alongside so the
/// difference is observable.
#[derive(Clone, Debug, PartialEq)]
pub struct RlanCoefficients {
    pub info: f64,
    pub w_cubic: f64,
    pub q_quartic: f64,
    pub w_cubic_half_cross: f64,
    pub q_quartic_second_moment: f64,
    pub q_quartic_mean_square: f64,
    pub moments: RlanMoments,
}

impl RlanCoefficients {
    /// The score-information identity defect 2 E[d2] + info (zero in exact
    /// arithmetic).
    pub fn identity_defect(&self) -> f64 {
        2.0 * self.moments.e_d2 + self.info
    }
}

/// Empirical sqrt(n)-normalized centered sums entering the expansion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmpiricalTerms {
    pub s_n: f64,
    pub v_n: f64,
    pub u_n: f64,
}

/// Population moments and expansion coefficients by adaptive quadrature.
pub fn rlan_coefficients(model: &dyn Model, theta: &ParameterPoint) -> Result<RlanCoefficients> {
    let th = theta.theta();
    let (lo, hi) = model.obs_support(th);

    // One quadrature pass per moment; the integrand re-derives the family at
    // each node, which is cheap for the closed-form models.
    let moment = |f: &dyn Fn(&ScoreFamily) -> f64| -> Result<f64> {
        quad::integrate(
            |y| {
                let fam = score_family(model, theta, y).expect("derivative oracle vanished mid-integration");
                let logp = model.exact_logdensity(y, th).expect("exact oracle vanished mid-integration");
                f(&fam) * logp.exp()
            },
            lo,
            hi,
            quad::MOMENT_TOL,
        )
    };

    let moments = RlanMoments {
        e_d1_sq: moment(&|f| f.d1 * f.d1)?,
        e_d1_cubed: moment(&|f| f.d1.powi(3))?,
        e_d2_d1: moment(&|f| f.d2 * f.d1)?,
        e_d3: moment(&|f| f.d3)?,
        e_d1_fourth: moment(&|f| f.d1.powi(4))?,
        e_d2_sq: moment(&|f| f.d2 * f.d2)?,
        e_d3_d1: moment(&|f| f.d3 * f.d1)?,
        e_d4: moment(&|f| f.d4)?,
        e_d2: moment(&|f| f.d2)?,
        e_d2_d1_sq: moment(&|f| f.d2 * f.d1 * f.d1)?,
    };

    let info = moments.e_d1_sq;
    if !(info > 0.0) {
        return Err(Error::NonpositiveInformation { info });
    }

    let base_w = moments.e_d1_cubed / 12.0 + moments.e_d3 / 6.0;
    let w_cubic = base_w - moments.e_d2_d1 / 4.0;
    let w_cubic_half_cross = base_w - moments.e_d2_d1 / 8.0;

    let base_q = -moments.e_d1_fourth / 32.0 - moments.e_d3_d1 / 12.0 + moments.e_d4 / 24.0;
    let q_quartic = base_q - moments.e_d2_sq / 16.0 + moments.e_d2_d1_sq / 8.0;
    let q_quartic_second_moment = base_q - moments.e_d2_sq / 16.0;
    let q_quartic_mean_square = base_q - moments.e_d2 * moments.e_d2 / 16.0;

    Ok(RlanCoefficients {
        info,
        w_cubic,
        q_quartic,
        w_cubic_half_cross,
        q_quartic_second_moment,
        q_quartic_mean_square,
        moments,
    })
}

/// Empirical expansion terms S_n, V_n, U_n for one dataset.
pub fn compute_empirical_terms(
    model: &dyn Model,
    theta: &ParameterPoint,
    data: &Dataset,
    coeffs: &RlanCoefficients,
) -> Result<EmpiricalTerms> {
    let mut s = 0.0;
    let mut v = 0.0;
    let mut u = 0.0;
    for &y in data.observations() {
        let fam = score_family(model, theta, y)?;
        s += fam.d1;
        v += fam.d2 - coeffs.moments.e_d2;
        u += fam.d1 * fam.d1 - coeffs.info;
    }
    let root_n = (data.len() as f64).sqrt();
    Ok(EmpiricalTerms { s_n: s / root_n, v_n: v / root_n, u_n: u / root_n })
}

/// Difference between the actual log-likelihood increment at theta + delta t
/// and the four bracketed expansion terms.
pub fn expansion_remainder(
    model: &dyn Model,
    theta: &ParameterPoint,
    data: &Dataset,
    t: f64,
    exponent: GridExponent,
    coeffs: &RlanCoefficients,
) -> Result<f64> {
    if !(t.abs() <= T_BOUND) {
        return Err(Error::invalid(format!("|t| must be <= {T_BOUND}, got {t}")));
    }
    let n = data.len() as f64;
    let delta = exponent.spacing(data.len());
    let shifted = model.param(theta.theta() + delta * t)?;

    let lhs = exact_loglik(model, &shifted, data)? - exact_loglik(model, theta, data)?;
    let terms = compute_empirical_terms(model, theta, data, coeffs)?;

    let root_n = n.sqrt();
    let t1 = t * root_n * delta * terms.s_n;
    let t2 = t * t
        * (root_n * delta * delta * (0.5 * terms.v_n - 0.25 * terms.u_n)
            - 0.5 * n * delta * delta * coeffs.info);
    let t3 = t.powi(3) * n * delta.powi(3) * coeffs.w_cubic;
    let t4 = t.powi(4) * n * delta.powi(4) * coeffs.q_quartic;

    Ok(lhs - t1 - t2 - t3 - t4)
}

/// One remainder draw of the replication study.
#[derive(Clone, Copy, Debug)]
pub struct RemainderRow {
    pub n: usize,
    pub exponent: f64,
    pub t: f64,
    pub replicate: usize,
    pub remainder: f64,
}

/// Replicated remainder study over an n-ladder and both spacing laws.
pub fn remainder_study(
    model: &dyn Model,
    theta: &ParameterPoint,
    t: f64,
    n_ladder: &[usize],
    replicates: usize,
    seed: u64,
) -> Result<Vec<RemainderRow>> {
    let coeffs = rlan_coefficients(model, theta)?;
    let root = StreamKey::root(seed).child_tag("remainder");
    let mut rows = Vec::new();
    for &n in n_ladder {
        for exponent in [GridExponent::Quarter, GridExponent::Half] {
            for rep in 0..replicates {
                let stream = root.child(n as u64).child_tag("rep").child(rep as u64).child_tag("data");
                let data = model::sample_dataset(model, theta, n, stream)?;
                let remainder = expansion_remainder(model, theta, &data, t, exponent, &coeffs)?;
                rows.push(RemainderRow {
                    n,
                    exponent: exponent.value(),
                    t,
                    replicate: rep,
                    remainder,
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_dataset, GaussMeanLatent, GaussScale};

    const SQRT_2: f64 = std::f64::consts::SQRT_2;
    const SQRT_3: f64 = 1.7320508075688772;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn score_family_closed_values() {
        // scale model at theta = 1, y = 2: l' = 3, l'' = -11, l''' = 46,
        // l'''' = -234.
        let scale = GaussScale;
        let fam = score_family(&scale, &scale.param(1.0).unwrap(), 2.0).unwrap();
        assert!(close(fam.d1, 3.0, 1e-12));
        assert!(close(fam.d2, -11.0 + 4.5, 1e-12));
        assert!(close(fam.d3, 46.0 + 1.5 * 3.0 * (-11.0) + 0.25 * 27.0, 1e-12));
        let l4 = -234.0;
        let expect_d4 = l4 + 1.5 * 121.0 + 2.0 * 3.0 * 46.0 + 1.5 * 9.0 * (-11.0) + 0.125 * 81.0;
        assert!(close(fam.d4, expect_d4, 1e-12));
    }

    #[test]
    fn score_family_matches_sqrt_density_differences() {
        // d_k = 2 s^(k)/s checked against Richardson-extrapolated central
        // differences of s(theta) = exp(l/2).
        let richardson = |d: &dyn Fn(f64) -> f64, h: f64| (4.0 * d(0.5 * h) - d(h)) / 3.0;
        let models: [&dyn Model; 2] = [&GaussScale, &GaussMeanLatent::default()];
        let mut rng = StreamKey::root(14).rng();
        for model in models {
            for _ in 0..10 {
                let theta = 0.8 + 0.6 * rng.uniform();
                let y = 1.5 * rng.normal();
                let fam = score_family(model, &model.param(theta).unwrap(), y).unwrap();
                let s = |t: f64| (0.5 * model.exact_logdensity(y, t).unwrap()).exp();
                let s0 = s(theta);
                let h = 0.02;
                let d1 = 2.0 * richardson_diff(&s, theta, h) / s0;
                let diff2 = |h: f64| (s(theta + h) - 2.0 * s0 + s(theta - h)) / (h * h);
                let d2 = 2.0 * richardson(&diff2, h) / s0;
                let diff3 = |h: f64| {
                    (s(theta + 2.0 * h) - 2.0 * s(theta + h) + 2.0 * s(theta - h)
                        - s(theta - 2.0 * h))
                        / (2.0 * h * h * h)
                };
                let d3 = 2.0 * richardson(&diff3, h) / s0;
                let diff4 = |h: f64| {
                    (s(theta + 2.0 * h) - 4.0 * s(theta + h) + 6.0 * s0 - 4.0 * s(theta - h)
                        + s(theta - 2.0 * h))
                        / h.powi(4)
                };
                let d4 = 2.0 * richardson(&diff4, h) / s0;
                let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(0.05);
                assert!(rel(fam.d1, d1) < 1e-4, "{} d1 {} vs {d1}", model.name(), fam.d1);
                assert!(rel(fam.d2, d2) < 1e-4, "{} d2 {} vs {d2}", model.name(), fam.d2);
                assert!(rel(fam.d3, d3) < 1e-4, "{} d3 {} vs {d3}", model.name(), fam.d3);
                assert!(rel(fam.d4, d4) < 1e-4, "{} d4 {} vs {d4}", model.name(), fam.d4);
            }
        }
    }

    #[test]
    fn coefficients_for_the_scale_model() {
        let scale = GaussScale;
        let c = rlan_coefficients(&scale, &scale.param(1.0).unwrap()).unwrap();
        assert!(close(c.info, 2.0, 1e-8));
        assert!(close(c.moments.e_d2, -1.0, 1e-8));
        assert!(c.identity_defect().abs() < 1e-6);
        // frozen moment values at theta = 1
        assert!(close(c.moments.e_d1_cubed, 8.0, 1e-7));
        assert!(close(c.moments.e_d2_d1, -2.0, 1e-7));
        assert!(close(c.moments.e_d3, 3.0, 1e-7));
        assert!(close(c.moments.e_d1_fourth, 60.0, 1e-6));
        assert!(close(c.moments.e_d2_sq, 9.0, 1e-7));
        assert!(close(c.moments.e_d3_d1, -3.0, 1e-7));
        assert!(close(c.moments.e_d4, -7.5, 1e-7));
        assert!(close(c.moments.e_d2_d1_sq, 2.0, 1e-7));
        // coefficient combinations
        assert!(close(c.w_cubic, 5.0 / 3.0, 1e-7));
        assert!(close(c.w_cubic_half_cross, 17.0 / 12.0, 1e-7));
        assert!(close(c.q_quartic, -2.25, 1e-6));
        assert!(close(c.q_quartic_second_moment, -2.5, 1e-6));
        assert!(close(c.q_quartic_mean_square, -2.0, 1e-6));

        let c2 = rlan_coefficients(&scale, &scale.param(SQRT_2).unwrap()).unwrap();
        assert!(close(c2.info, 1.0, 1e-8));
        assert!(c2.identity_defect().abs() < 1e-6);
    }

    #[test]
    fn coefficients_match_direct_log_derivative_moments() {
        // Independent route: W = E[l''']/6 and Q = E[l'''']/24 integrated
        // directly from the analytic log-density derivatives.
        let scale = GaussScale;
        let theta = scale.param(1.3).unwrap();
        let c = rlan_coefficients(&scale, &theta).unwrap();
        let (lo, hi) = scale.obs_support(1.3);
        let e_l3 = quad::integrate(
            |y| scale.logdensity_deriv(y, 1.3, 3).unwrap() * scale.exact_logdensity(y, 1.3).unwrap().exp(),
            lo,
            hi,
            1e-10,
        )
        .unwrap();
        let e_l4 = quad::integrate(
            |y| scale.logdensity_deriv(y, 1.3, 4).unwrap() * scale.exact_logdensity(y, 1.3).unwrap().exp(),
            lo,
            hi,
            1e-10,
        )
        .unwrap();
        assert!(close(c.w_cubic, e_l3 / 6.0, 1e-7), "{} vs {}", c.w_cubic, e_l3 / 6.0);
        assert!(close(c.q_quartic, e_l4 / 24.0, 1e-6), "{} vs {}", c.q_quartic, e_l4 / 24.0);
    }

    #[test]
    fn symmetric_location_model_has_vanishing_odd_coefficients() {
        let latent = GaussMeanLatent::default();
        let c = rlan_coefficients(&latent, &latent.param(0.4).unwrap()).unwrap();
        assert!(close(c.info, 0.5, 1e-8));
        assert!(c.w_cubic.abs() < 1e-8);
        assert!(c.w_cubic_half_cross.abs() < 1e-8);
        assert!(c.q_quartic.abs() < 1e-8);
        // the alternative quartic combinations do NOT vanish here
        assert!(close(c.q_quartic_second_moment, -0.015625, 1e-7));
        assert!(close(c.q_quartic_mean_square, -0.0078125, 1e-7));
    }

    #[test]
    fn identity_holds_across_parameter_values() {
        let scale = GaussScale;
        for theta in [1.0, SQRT_2, SQRT_3] {
            let c = rlan_coefficients(&scale, &scale.param(theta).unwrap()).unwrap();
            assert!(c.identity_defect().abs() < 1e-6, "theta {theta}");
            assert!(close(c.info, 2.0 / (theta * theta), 1e-6));
        }
        let latent = GaussMeanLatent::default();
        let mut rng = StreamKey::root(51).rng();
        for _ in 0..5 {
            let theta = 3.0 * rng.normal();
            let c = rlan_coefficients(&latent, &latent.param(theta).unwrap()).unwrap();
            assert!(c.identity_defect().abs() < 1e-6, "theta {theta}");
        }
    }

    #[test]
    fn empirical_terms_closed_cases() {
        let scale = GaussScale;
        let theta = scale.param(1.0).unwrap();
        let coeffs = rlan_coefficients(&scale, &theta).unwrap();

        let data = Dataset::new(vec![1.0, -1.0]).unwrap();
        let terms = compute_empirical_terms(&scale, &theta, &data, &coeffs).unwrap();
        assert!(terms.s_n.abs() < 1e-10);
        assert!(close(terms.u_n, -2.0 * SQRT_2, 1e-8));

        // single observation with d1 = 3 (y = 2), info = 2
        let data = Dataset::new(vec![2.0]).unwrap();
        let terms = compute_empirical_terms(&scale, &theta, &data, &coeffs).unwrap();
        assert!(close(terms.s_n, 3.0, 1e-8));
        assert!(close(terms.u_n, 7.0, 1e-8));
    }

    #[test]
    fn score_sum_variance_approaches_information() {
        let scale = GaussScale;
        let theta = scale.param(1.0).unwrap();
        let coeffs = rlan_coefficients(&scale, &theta).unwrap();
        let n = 10_000;
        let reps = 500;
        let root = StreamKey::root(0xACE);
        let mut s_vals = Vec::with_capacity(reps);
        for rep in 0..reps {
            let data = sample_dataset(&scale, &theta, n, root.child(rep as u64)).unwrap();
            s_vals.push(compute_empirical_terms(&scale, &theta, &data, &coeffs).unwrap().s_n);
        }
        let mean = s_vals.iter().sum::<f64>() / reps as f64;
        let var = s_vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (reps as f64 - 1.0);
        assert!((var - 2.0).abs() / 2.0 < 0.10, "var {var}");
    }

    #[test]
    fn location_model_remainder_is_exactly_zero() {
        // The location-model log-likelihood is exactly quadratic in theta, the
        // empirical curvature combination cancels identically, and the cubic
        // and quartic coefficients vanish, so the remainder is pure roundoff.
        let latent = GaussMeanLatent::default();
        let theta = latent.param(0.2).unwrap();
        let coeffs = rlan_coefficients(&latent, &theta).unwrap();
        let root = StreamKey::root(0xBEAD);
        for (i, &(n, t)) in [(50usize, 0.7), (400, -1.3), (5000, 2.0)].iter().enumerate() {
            let data = sample_dataset(&latent, &theta, n, root.child(i as u64)).unwrap();
            for exponent in [GridExponent::Quarter, GridExponent::Half] {
                let r = expansion_remainder(&latent, &theta, &data, t, exponent, &coeffs).unwrap();
                assert!(r.abs() < 1e-9, "n {n} t {t}: remainder {r}");
            }
        }
    }

    #[test]
    fn remainder_rejects_out_of_range_t() {
        let latent = GaussMeanLatent::default();
        let theta = latent.param(0.0).unwrap();
        let coeffs = rlan_coefficients(&latent, &theta).unwrap();
        let data = Dataset::new(vec![0.1, 0.2]).unwrap();
        assert!(expansion_remainder(&latent, &theta, &data, 2.5, GridExponent::Half, &coeffs)
            .is_err());
    }

    #[test]
    fn remainder_study_is_deterministic() {
        let scale = GaussScale;
        let theta = scale.param(1.0).unwrap();
        let a = remainder_study(&scale, &theta, 1.0, &[64, 256], 5, 7).unwrap();
        let b = remainder_study(&scale, &theta, 1.0, &[64, 256], 5, 7).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.remainder, y.remainder);
        }
        assert_eq!(a.len(), 2 * 2 * 5);
    }
}
