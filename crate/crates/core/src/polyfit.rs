//! Cubic least-squares surrogate fit with explicit normal-equation algebra.
//!
//! The normal equations are solved through the 4x4 determinant and adjugate
//! rather than a generic decomposition: the determinant and the adjugate
//! diagonals obey exact power laws in the grid spacing, and computing them
//! directly makes those scaling checks first-class outputs instead of
//! by-products.

use crate::design::GridSpec;
use crate::error::{Error, Result};

/// Condition-number guard for the normal equations.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Vandermonde-style regression matrix with rows (1, u, u^2, u^3) for
/// u = j * spacing, j = -J..J.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix {
    rows: Vec<[f64; 4]>,
    spacing: f64,
    j_half: usize,
}

impl DesignMatrix {
    pub fn rows(&self) -> &[[f64; 4]] {
        &self.rows
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn j_half(&self) -> usize {
        self.j_half
    }

    /// Gram matrix X^T X.
    pub fn xtx(&self) -> [[f64; 4]; 4] {
        let mut m = [[0.0; 4]; 4];
        for row in &self.rows {
            for a in 0..4 {
                for b in 0..4 {
                    m[a][b] += row[a] * row[b];
                }
            }
        }
        m
    }

    /// X^T y.
    fn xty(&self, values: &[f64]) -> [f64; 4] {
        let mut v = [0.0; 4];
        for (row, &y) in self.rows.iter().zip(values) {
            for a in 0..4 {
                v[a] += row[a] * y;
            }
        }
        v
    }
}

/// Fitted cubic coefficients plus the normal-equation algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicFit {
    pub beta: [f64; 4],
    pub xtx: [[f64; 4]; 4],
    pub xtx_det: f64,
    /// Adjugate diagonal entry for the linear coefficient (1-indexed (2,2)).
    pub adj22: f64,
    /// Adjugate diagonal entry for the quadratic coefficient (1-indexed (3,3)).
    pub adj33: f64,
    pub residual_ss: f64,
}

/// Build the regression matrix for a grid.
pub fn build_design(grid: &GridSpec) -> DesignMatrix {
    let rows = grid
        .offsets()
        .map(|u| {
            let u2 = u * u;
            [1.0, u, u2, u2 * u]
        })
        .collect();
    DesignMatrix { rows, spacing: grid.spacing(), j_half: grid.j_half() }
}

#[inline]
fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Minor of `m` with row `r` and column `c` removed.
fn minor3(m: &[[f64; 4]; 4], r: usize, c: usize) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    let mut oi = 0;
    for i in 0..4 {
        if i == r {
            continue;
        }
        let mut oj = 0;
        for j in 0..4 {
            if j == c {
                continue;
            }
            out[oi][oj] = m[i][j];
            oj += 1;
        }
        oi += 1;
    }
    out
}

fn det4(m: &[[f64; 4]; 4]) -> f64 {
    let mut det = 0.0;
    for c in 0..4 {
        let cof = det3(minor3(m, 0, c));
        let signed = if c % 2 == 0 { cof } else { -cof };
        det += m[0][c] * signed;
    }
    det
}

fn adjugate4(m: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut adj = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            let cof = det3(minor3(m, r, c));
            let signed = if (r + c) % 2 == 0 { cof } else { -cof };
            // adj = transpose of the cofactor matrix
            adj[c][r] = signed;
        }
    }
    adj
}

#[inline]
fn inf_norm(m: &[[f64; 4]; 4]) -> f64 {
    m.iter().map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Determinant of X^T X by direct 4x4 cofactor expansion.
pub fn det_xtx(design: &DesignMatrix) -> f64 {
    det4(&design.xtx())
}

/// The (2,2) and (3,3) adjugate entries of X^T X (1-indexed diagonals for
/// the linear and quadratic coefficients).
pub fn adj_diagonals(design: &DesignMatrix) -> (f64, f64) {
    let m = design.xtx();
    (det3(minor3(&m, 1, 1)), det3(minor3(&m, 2, 2)))
}

/// Least-squares cubic fit of `values` observed at the design's grid points.
pub fn lsq_fit(design: &DesignMatrix, values: &[f64]) -> Result<CubicFit> {
    if values.len() != design.rows.len() {
        return Err(Error::invalid(format!(
            "expected {} values, got {}",
            design.rows.len(),
            values.len()
        )));
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite surface value {bad}")));
    }

    let xtx = design.xtx();
    let det = det4(&xtx);
    let adj = adjugate4(&xtx);

    let inv_norm = inf_norm(&adj) / det.abs();
    let cond = inf_norm(&xtx) * inv_norm;
    if !cond.is_finite() || cond > CONDITION_LIMIT {
        return Err(Error::SingularDesign { cond, limit: CONDITION_LIMIT });
    }

    let xty = design.xty(values);
    let mut beta = [0.0; 4];
    for r in 0..4 {
        let mut acc = 0.0;
        for c in 0..4 {
            acc += adj[r][c] * xty[c];
        }
        beta[r] = acc / det;
    }

    let mut residual_ss = 0.0;
    for (row, &y) in design.rows.iter().zip(values) {
        let fit = beta[0] + beta[1] * row[1] + beta[2] * row[2] + beta[3] * row[3];
        let r = y - fit;
        residual_ss += r * r;
    }

    Ok(CubicFit { beta, xtx, xtx_det: det, adj22: adj[1][1], adj33: adj[2][2], residual_ss })
}
