//! Linear estimator of the mean photon number from click statistics.
//!
//! The coefficients `D_m` are fixed by demanding that `sum_m D_m c_m`
//! equals the mean photon number for every state with at most `M` photons.
//! For a general state the estimate is `sum_n G_n p_n` with
//! `G_n = sum_m D_m C[m][n]`, where `G_n = n` up to `M` and `G_n < n` above.

use serde::{Deserialize, Serialize};

use crate::detector::{click_matrix_in, ClickStatistics, DetectorConfig};
use crate::error::{Error, Result};
use crate::linalg::{Dd, Lu, Scalar};

/// Accepted residual of the defining system.
const RESIDUAL_TOL: f64 = 1e-9;
/// Pivots below this make the system singular.
const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanPhotonEstimator {
    d_coeffs: Vec<f64>,
    g_coeffs: Vec<f64>,
    config: DetectorConfig,
    residual: f64,
}

impl MeanPhotonEstimator {
    /// `D_0..D_M`
    pub fn d_coeffs(&self) -> &[f64] {
        &self.d_coeffs
    }

    /// `G_0..G_cutoff`
    pub fn g_coeffs(&self) -> &[f64] {
        &self.g_coeffs
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn cutoff(&self) -> usize {
        self.g_coeffs.len() - 1
    }

    /// Largest `|sum_m D_m C[m][n] - n|` over `n <= M`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// `lim G_n` for `n -> infinity`, which equals `D_M`.
    pub fn limit(&self) -> f64 {
        self.d_coeffs[self.d_coeffs.len() - 1]
    }
}

/// Solves `sum_m D_m C[m][n] = n` for `n = 0..=M` and tabulates `G_n` up to
/// `cutoff`.
pub fn build_estimator(cfg: &DetectorConfig, cutoff: usize) -> Result<MeanPhotonEstimator> {
    let m = cfg.channels();
    let c = click_matrix_in::<Dd>(cfg, cutoff.max(m));
    // transpose of the leading square block, row n holding C[.][n], with
    // every column scaled to unit maximum
    let scale: Vec<Dd> = (0..=m)
        .map(|k| {
            (0..=m)
                .map(|n| c.get(k, n))
                .fold(Dd::ZERO, |a, v| if v > a { v } else { a })
        })
        .collect();
    let mut data = Vec::with_capacity((m + 1) * (m + 1));
    for n in 0..=m {
        for k in 0..=m {
            data.push(c.get(k, n) / scale[k]);
        }
    }
    let lu = Lu::factorize(data, m + 1, PIVOT_TOL)?;
    let rhs: Vec<Dd> = (0..=m).map(|n| Dd::from_f64(n as f64)).collect();
    let d: Vec<Dd> = lu.solve(&rhs).iter().zip(&scale).map(|(&e, &s)| e / s).collect();

    let g: Vec<Dd> = (0..=cutoff.max(m))
        .map(|n| Dd::dot_iter((0..=m).map(|k| (d[k], c.get(k, n)))))
        .collect();
    let residual = (0..=m)
        .map(|n| (g[n] - rhs[n]).to_f64().abs())
        .fold(0.0, f64::max);
    if residual > RESIDUAL_TOL {
        return Err(Error::Singular { pivot: lu.min_pivot() });
    }
    Ok(MeanPhotonEstimator {
        d_coeffs: d.iter().map(|v| v.to_f64()).collect(),
        g_coeffs: g[..=cutoff].iter().map(|v| v.to_f64()).collect(),
        config: cfg.clone(),
        residual,
    })
}

/// `sum_m D_m c_m`
pub fn estimate(est: &MeanPhotonEstimator, clicks: &ClickStatistics) -> Result<f64> {
    let c = clicks.as_slice();
    if c.len() != est.d_coeffs.len() {
        return Err(Error::DimensionMismatch {
            expected: est.d_coeffs.len(),
            got: c.len(),
        });
    }
    Ok(crate::linalg::dot(&est.d_coeffs, c))
}
