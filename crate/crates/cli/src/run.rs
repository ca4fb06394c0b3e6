//! Subcommand execution: run the selected study and write its CSV outputs
//! plus the resolved manifest.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mcle_core::{
    bias_curve, figure1_surface, model_by_name, remainder_study, report, rlan_coefficients,
    run_replicate, sample_dataset, scaling_study, snr_table, GridExponent, Model, ScalingConfig,
    StreamKey,
};

use crate::config::{manifest, RunConfig, Subcommand};

fn scaling_config(cfg: &RunConfig) -> Result<ScalingConfig> {
    Ok(ScalingConfig {
        true_theta: cfg.model.theta,
        n_ladder: cfg.study.n_ladder.clone(),
        m_exponent: cfg.study.m_exponent,
        j_half: cfg.study.j,
        replicates: cfg.study.replicates,
        master_seed: cfg.seed,
        delta_exponent: GridExponent::try_from(cfg.study.delta_exponent)?,
        share_draws_across_grid: cfg.study.share_draws,
    })
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn run_fit(model: &dyn Model, cfg: &RunConfig, dir: &Path) -> Result<()> {
    let sc = scaling_config(cfg)?;
    let mut rows = Vec::new();
    for &n in &sc.n_ladder {
        let pair = run_replicate(model, &sc, n, 0)?;
        let Some(fit) = pair.mc.fit.clone() else {
            bail!("fit at n = {n} degenerated (fallback branch); nothing to report");
        };
        rows.push(report::FitRow {
            n,
            j_half: pair.j_eff,
            delta: GridExponent::try_from(cfg.study.delta_exponent)?.spacing(n),
            fit,
        });
    }
    write_file(dir, "fit.csv", &report::fit_csv(&rows))?;
    Ok(())
}

fn run_scale(model: &dyn Model, cfg: &RunConfig, dir: &Path) -> Result<()> {
    let sc = scaling_config(cfg)?;
    let study = scaling_study(model, &sc)?;
    write_file(dir, "scaling_report.csv", &report::scaling_report_csv(&study))?;
    Ok(())
}

fn run_figure1(cfg: &RunConfig, dir: &Path) -> Result<()> {
    let exponent = GridExponent::try_from(cfg.study.delta_exponent)?;
    for &n in &cfg.study.n_ladder {
        let rows = figure1_surface(n, exponent, cfg.study.m_rule, cfg.seed)?;
        let name = format!("figure1_{}_{}.csv", n, cfg.study.delta_exponent);
        write_file(dir, &name, &report::figure1_csv(&rows))?;
    }
    Ok(())
}

fn run_rlan_check(model: &dyn Model, cfg: &RunConfig, dir: &Path) -> Result<()> {
    let theta = model.param(cfg.model.theta)?;
    let coeffs = rlan_coefficients(model, &theta)?;
    write_file(dir, "coefficients.csv", &report::coefficients_csv(&[(cfg.model.theta, coeffs)]))?;
    let rows = remainder_study(
        model,
        &theta,
        cfg.study.t,
        &cfg.study.n_ladder,
        cfg.study.remainder_replicates,
        cfg.seed,
    )?;
    write_file(dir, "remainder.csv", &report::remainder_csv(&rows))?;
    Ok(())
}

fn run_snr(cfg: &RunConfig, dir: &Path) -> Result<()> {
    let rows = snr_table(&cfg.study.n_ladder, cfg.study.m_rule);
    write_file(dir, "snr.csv", &report::snr_csv(&rows))?;
    Ok(())
}

/// Extra output of the `fit` subcommand when the model has an exact oracle:
/// the bias curve of the Monte Carlo evaluator on one fixed dataset.
fn run_bias_companion(model: &dyn Model, cfg: &RunConfig, dir: &Path) -> Result<()> {
    let theta = model.param(cfg.model.theta)?;
    let n = *cfg.study.n_ladder.first().expect("validated non-empty");
    let data = sample_dataset(model, &theta, n, StreamKey::root(cfg.seed).child_tag("bias-data"))?;
    let m_values: Vec<usize> = {
        let base = (n as f64).powf(cfg.study.m_exponent.min(0.9)).ceil() as usize;
        vec![base.max(2) / 2, base.max(2)]
    };
    let points = bias_curve(
        model,
        &theta,
        &data,
        &m_values,
        cfg.study.replicates.max(50),
        StreamKey::root(cfg.seed).child_tag("bias"),
    )?;
    write_file(dir, "bias_curve.csv", &report::bias_curve_csv(&points))?;
    Ok(())
}

/// Execute one resolved run configuration. Writes the manifest first, then
/// the subcommand's outputs.
pub fn run(cfg: &RunConfig) -> Result<()> {
    let sub = cfg.subcommand.expect("subcommand resolved by main");
    let dir = PathBuf::from(&cfg.out_dir);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    write_file(&dir, "manifest.txt", &manifest(cfg))?;

    let model = model_by_name(&cfg.model.name, cfg.model.tau, cfg.model.sigma)?;
    // the configured parameter must be admissible regardless of subcommand
    model.param(cfg.model.theta)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .context("building thread pool")?;
    pool.install(|| match sub {
        Subcommand::Fit => {
            run_fit(model.as_ref(), cfg, &dir)?;
            run_bias_companion(model.as_ref(), cfg, &dir)
        }
        Subcommand::Scale => run_scale(model.as_ref(), cfg, &dir),
        Subcommand::Figure1 => run_figure1(cfg, &dir),
        Subcommand::RlanCheck => run_rlan_check(model.as_ref(), cfg, &dir),
        Subcommand::Snr => run_snr(cfg, &dir),
    })
}
