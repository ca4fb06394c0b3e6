//! CSV rendering of study outputs.
//!
//! All CSV files use a comma separator, one header row, LF line endings, and
//! floats in shortest round-trip scientific notation, so reruns can be
//! compared byte for byte.

use std::fmt::Write;

use crate::experiments::{Figure1Row, ScalingReport, SnrRow};
use crate::mc_likelihood::BiasPoint;
use crate::polyfit::CubicFit;
use crate::rlan_check::{RemainderRow, RlanCoefficients};

/// Shortest round-trip scientific representation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:e}")
}

/// Columns: m, bias_est, bias_se, var_est, var_se.
pub fn bias_curve_csv(points: &[BiasPoint]) -> String {
    let mut out = String::from("m,bias_est,bias_se,var_est,var_se\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.m,
            fmt_float(p.bias_est),
            fmt_float(p.bias_se),
            fmt_float(p.var_est),
            fmt_float(p.var_se)
        );
    }
    out
}

/// One fit summary row: n, J, delta, beta0..beta3, det, adj22, adj33,
/// residual_ss.
#[derive(Clone, Debug)]
pub struct FitRow {
    pub n: usize,
    pub j_half: usize,
    pub delta: f64,
    pub fit: CubicFit,
}

pub fn fit_csv(rows: &[FitRow]) -> String {
    let mut out =
        String::from("n,J,delta,beta0,beta1,beta2,beta3,det,adj22,adj33,residual_ss\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.j_half,
            fmt_float(r.delta),
            fmt_float(r.fit.beta[0]),
            fmt_float(r.fit.beta[1]),
            fmt_float(r.fit.beta[2]),
            fmt_float(r.fit.beta[3]),
            fmt_float(r.fit.xtx_det),
            fmt_float(r.fit.adj22),
            fmt_float(r.fit.adj33),
            fmt_float(r.fit.residual_ss)
        );
    }
    out
}

/// Columns as in the scaling report; the leading comment line records how
/// the Monte Carlo standard error was separated (paired common-random-data
/// differencing, a construction of this harness).
pub fn scaling_report_csv(report: &ScalingReport) -> String {
    let mut out = String::from(
        "# se_mc^2 = max(0, var(mc arm) - var(exact arm)), paired on common data streams\n\
         n,m,se_stat_hat,se_mc_hat,ratio_sq,mean_bias,fallback_rate,se_stat_theory\n",
    );
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n,
            r.m,
            fmt_float(r.se_stat_hat),
            fmt_float(r.se_mc_hat),
            fmt_float(r.ratio_sq),
            fmt_float(r.mean_bias),
            fmt_float(r.fallback_rate),
            fmt_float(r.se_stat_theory)
        );
    }
    out
}

/// Columns: theta, exact, noisy.
pub fn figure1_csv(rows: &[Figure1Row]) -> String {
    let mut out = String::from("theta,exact,noisy\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", fmt_float(r.theta), fmt_float(r.exact), fmt_float(r.noisy));
    }
    out
}

/// Columns: n, exponent, signal_span, noise_sd, snr.
pub fn snr_csv(rows: &[SnrRow]) -> String {
    let mut out = String::from("n,exponent,signal_span,noise_sd,snr\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.n,
            fmt_float(r.exponent),
            fmt_float(r.signal_span),
            fmt_float(r.noise_sd),
            fmt_float(r.snr)
        );
    }
    out
}

/// Coefficient report: one row per theta with every moment and every
/// coefficient variant.
pub fn coefficients_csv(rows: &[(f64, RlanCoefficients)]) -> String {
    let mut out = String::from(
        "theta,info,w_cubic,q_quartic,w_cubic_half_cross,q_quartic_second_moment,\
         q_quartic_mean_square,e_d1_sq,e_d1_cubed,e_d2_d1,e_d3,e_d1_fourth,e_d2_sq,\
         e_d3_d1,e_d4,e_d2,e_d2_d1_sq\n",
    );
    for (theta, c) in rows {
        let m = &c.moments;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_float(*theta),
            fmt_float(c.info),
            fmt_float(c.w_cubic),
            fmt_float(c.q_quartic),
            fmt_float(c.w_cubic_half_cross),
            fmt_float(c.q_quartic_second_moment),
            fmt_float(c.q_quartic_mean_square),
            fmt_float(m.e_d1_sq),
            fmt_float(m.e_d1_cubed),
            fmt_float(m.e_d2_d1),
            fmt_float(m.e_d3),
            fmt_float(m.e_d1_fourth),
            fmt_float(m.e_d2_sq),
            fmt_float(m.e_d3_d1),
            fmt_float(m.e_d4),
            fmt_float(m.e_d2),
            fmt_float(m.e_d2_d1_sq)
        );
    }
    out
}

/// Columns: n, exponent, t, replicate, remainder.
pub fn remainder_csv(rows: &[RemainderRow]) -> String {
    let mut out = String::from("n,exponent,t,replicate,remainder\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.n,
            fmt_float(r.exponent),
            fmt_float(r.t),
            r.replicate,
            fmt_float(r.remainder)
        );
    }
    out
}
