//! Preliminary estimation, lattice discretization, and the evaluation grid.
//!
//! The pipeline first forms a sqrt(n)-consistent moment estimate, snaps it to
//! the midpoint of its n^{-1/2} lattice cell, and then lays out 2J+1 equally
//! spaced evaluation points around that center with spacing n^{-exponent}.

use crate::error::{Error, Result};
use crate::model::{Dataset, Model};

/// Grid spacing law delta_n = n^{-exponent}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridExponent {
    Quarter,
    Half,
}

impl GridExponent {
    pub fn value(self) -> f64 {
        match self {
            GridExponent::Quarter => 0.25,
            GridExponent::Half => 0.5,
        }
    }

    pub fn spacing(self, n: usize) -> f64 {
        (n as f64).powf(-self.value())
    }
}

impl TryFrom<f64> for GridExponent {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        if v == 0.25 {
            Ok(GridExponent::Quarter)
        } else if v == 0.5 {
            Ok(GridExponent::Half)
        } else {
            Err(Error::invalid(format!("grid exponent must be 0.25 or 0.5, got {v}")))
        }
    }
}

/// Symmetric evaluation grid around a discretized center.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    center: f64,
    spacing: f64,
    j_half: usize,
    points: Vec<f64>,
    n: usize,
    exponent: GridExponent,
}

impl GridSpec {
    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Half-width J; the grid holds 2J+1 points.
    pub fn j_half(&self) -> usize {
        self.j_half
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn exponent(&self) -> GridExponent {
        self.exponent
    }

    /// Signed offsets j * spacing, the regression abscissae.
    pub fn offsets(&self) -> impl Iterator<Item = f64> + '_ {
        let j = self.j_half as i64;
        (-j..=j).map(move |k| k as f64 * self.spacing)
    }

    /// Grid span J * spacing, the clipping radius for surrogate maximizers.
    pub fn radius(&self) -> f64 {
        self.j_half as f64 * self.spacing
    }
}

/// Model-specific sqrt(n)-consistent estimate, clamped into the open interval.
pub fn preliminary_estimate(model: &dyn Model, data: &Dataset) -> Result<f64> {
    if data.len() < 2 {
        return Err(Error::invalid("preliminary estimation needs n >= 2"));
    }
    let est = model.preliminary_estimate(data)?;
    let (lo, hi) = model.bounds();
    // Moment estimators can graze a finite boundary; nudge strictly inside.
    let margin = 1e-8 * (1.0 + est.abs());
    let clamped = est.max(if lo.is_finite() { lo + margin } else { est }).min(if hi.is_finite() {
        hi - margin
    } else {
        est
    });
    if clamped <= lo || clamped >= hi {
        return Err(Error::DegenerateData {
            reason: format!("estimate {est} cannot be clamped inside ({lo}, {hi})"),
        });
    }
    Ok(clamped)
}

/// Midpoint of the n^{-1/2}-width lattice cell containing `theta_tilde`.
///
/// Cells are right-open intervals [k h, (k+1) h) anchored at zero, so a value
/// sitting exactly on a boundary joins the upper cell.
pub fn discretize(theta_tilde: f64, n: usize) -> f64 {
    let root_n = (n as f64).sqrt();
    let k = (theta_tilde * root_n).floor();
    (k + 0.5) / root_n
}

/// Lay out the 2J+1 evaluation points around `center`.
pub fn build_grid(
    center: f64,
    n: usize,
    j_half: usize,
    exponent: GridExponent,
    bounds: (f64, f64),
) -> Result<GridSpec> {
    if j_half < 2 {
        return Err(Error::invalid(format!(
            "J must be >= 2 (a cubic needs at least 4 grid values), got {j_half}"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("grid needs n >= 1"));
    }
    let spacing = exponent.spacing(n);
    let j = j_half as i64;
    let points: Vec<f64> = (-j..=j).map(|k| center + k as f64 * spacing).collect();
    let (lo, hi) = bounds;
    let offending: Vec<f64> =
        points.iter().copied().filter(|&p| !(p > lo && p < hi)).collect();
    if !offending.is_empty() {
        return Err(Error::GridOutOfBounds { lower: lo, upper: hi, points: offending });
    }
    Ok(GridSpec { center, spacing, j_half, points, n, exponent })
}

/// Largest half-width `J' <= j_max` whose grid stays well inside `bounds`.
///
/// The span J' * spacing is capped at `MARGIN` times the distance from the
/// center to the nearer finite boundary. Near a boundary the log-likelihood
/// of scale-type models blows up, and evaluation points in that zone would
/// dominate the surrogate fit; the cap keeps the grid in the locally
/// polynomial regime while leaving the spacing law untouched. The result
/// equals `j_max` once n is large enough that the full grid fits.
pub fn capped_half_width(center: f64, spacing: f64, j_max: usize, bounds: (f64, f64)) -> usize {
    const MARGIN: f64 = 0.4;
    let (lo, hi) = bounds;
    let dist = f64::min(
        if lo.is_finite() { center - lo } else { f64::INFINITY },
        if hi.is_finite() { hi - center } else { f64::INFINITY },
    );
    if !dist.is_finite() {
        return j_max;
    }
    let fit = (MARGIN * dist / spacing).floor();
    let fit = if fit.is_finite() && fit > 0.0 { fit as usize } else { 0 };
    fit.clamp(2, j_max)
}
