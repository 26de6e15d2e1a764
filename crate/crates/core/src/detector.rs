//! Balanced M-channel multiplexed on/off detector.
//!
//! Two equivalent descriptions of the same measurement are provided: the
//! click distribution `c_m` (exactly `m` of `M` detectors fire) and the
//! vacuum-projection probabilities `q_{0,k}` behind transmittances
//! `T_k = eta k / M`.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, NeumaierSum, Scalar};
use crate::states::PhotonDistribution;

/// Tail mass above which derived click statistics are flagged as approximate.
pub const TAIL_WARN_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DetectorParams", into = "DetectorParams")]
pub struct DetectorConfig {
    channels: usize,
    efficiency: f64,
    binomials: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct DetectorParams {
    channels: usize,
    efficiency: f64,
}

impl TryFrom<DetectorParams> for DetectorConfig {
    type Error = Error;
    fn try_from(p: DetectorParams) -> Result<Self> {
        DetectorConfig::new(p.channels, p.efficiency)
    }
}

impl From<DetectorConfig> for DetectorParams {
    fn from(c: DetectorConfig) -> Self {
        DetectorParams {
            channels: c.channels,
            efficiency: c.efficiency,
        }
    }
}

impl DetectorConfig {
    pub fn new(channels: usize, efficiency: f64) -> Result<Self> {
        if channels == 0 {
            return Err(Error::InvalidParameter("detector needs M >= 1 channels".into()));
        }
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "efficiency must lie in (0,1], got {efficiency}"
            )));
        }
        let mut binomials: Vec<Vec<f64>> = Vec::with_capacity(channels + 1);
        for m in 0..=channels {
            let mut row = vec![1.0; m + 1];
            for j in 1..m {
                row[j] = binomials[m - 1][j - 1] + binomials[m - 1][j];
            }
            binomials.push(row);
        }
        Ok(Self {
            channels,
            efficiency,
            binomials,
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    /// `binom(m, j)` for `0 <= j <= m <= M`.
    pub fn binomial(&self, m: usize, j: usize) -> f64 {
        self.binomials[m][j]
    }

    /// `T_k = eta k / M` for `k = 0..=M`.
    pub fn transmittances(&self) -> Vec<f64> {
        (0..=self.channels)
            .map(|k| self.efficiency * k as f64 / self.channels as f64)
            .collect()
    }
}

/// Probabilities `c_0..c_M` of exactly `m` simultaneous clicks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClickStatistics {
    clicks: Vec<f64>,
}

impl ClickStatistics {
    /// Validates a measured click distribution. Roundoff negatives down to
    /// `-1e-12` are clamped to zero; the sum must be one within `1e-10`.
    pub fn new(clicks: Vec<f64>) -> Result<Self> {
        if clicks.is_empty() {
            return Err(Error::InvalidParameter("empty click statistics".into()));
        }
        let mut out = Vec::with_capacity(clicks.len());
        for (m, &c) in clicks.iter().enumerate() {
            if !c.is_finite() || c < -1e-12 {
                return Err(Error::InfeasibleData(format!("c_{m} = {c} is negative")));
            }
            out.push(c.max(0.0));
        }
        let sum = out.iter().copied().collect::<NeumaierSum>().value();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::InfeasibleData(format!(
                "click probabilities sum to {sum}, not 1"
            )));
        }
        Ok(Self { clicks: out })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.clicks
    }

    pub fn channels(&self) -> usize {
        self.clicks.len() - 1
    }
}

/// Vacuum-projection probabilities `q_{0,k}` with their transmittances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VacuumProbabilities {
    pub q: Vec<f64>,
    pub transmittances: Vec<f64>,
}

/// Click-response matrix `C[m][n]`, `(M+1) x (cutoff+1)`.
///
/// Built column by column from the photon-by-photon recurrence
/// `P_{n+1}(j) = P_n(j) (1 - eta + eta j/M) + P_n(j-1) eta (M-j+1)/M`,
/// which only adds nonnegative terms and keeps every column stochastic.
pub fn click_matrix(cfg: &DetectorConfig, cutoff: usize) -> Matrix {
    click_matrix_in(cfg, cutoff)
}

/// [`click_matrix`] evaluated in the scalar type `T`.
pub fn click_matrix_in<T: Scalar>(cfg: &DetectorConfig, cutoff: usize) -> Matrix<T> {
    let m_ch = cfg.channels;
    let eta = T::from_f64(cfg.efficiency);
    let mf = T::from_f64(m_ch as f64);
    let mut c = Matrix::zeros(m_ch + 1, cutoff + 1);
    let mut col = vec![T::zero(); m_ch + 1];
    col[0] = T::one();
    for n in 0..=cutoff {
        if n > 0 {
            let mut next = vec![T::zero(); m_ch + 1];
            for j in 0..=m_ch {
                let jf = T::from_f64(j as f64);
                let stay = T::one() - eta + eta * jf / mf;
                next[j] += col[j] * stay;
                if j < m_ch {
                    next[j + 1] += col[j] * eta * (mf - jf) / mf;
                }
            }
            col = next;
        }
        for (m, &v) in col.iter().enumerate() {
            c.set(m, n, v);
        }
    }
    c
}

/// `C[m][n]` from the closed-form alternating sum over inclusion-exclusion
/// terms, with compensated accumulation and clamping into `[0, 1]`.
///
/// Loses precision for large `M`; kept as an independent cross-check of
/// [`click_matrix`].
pub fn click_matrix_alternating(cfg: &DetectorConfig, cutoff: usize) -> Matrix {
    let m_ch = cfg.channels;
    let eta = cfg.efficiency;
    Matrix::from_fn(m_ch + 1, cutoff + 1, |m, n| {
        let mut acc = NeumaierSum::default();
        for j in 0..=m {
            let base = 1.0 - eta + (m - j) as f64 * eta / m_ch as f64;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc.add(sign * cfg.binomial(m, j) * base.powi(n as i32));
        }
        (cfg.binomial(m_ch, m) * acc.value()).clamp(0.0, 1.0)
    })
}

/// Logs a warning and returns `true` when `dist` has more than
/// [`TAIL_WARN_THRESHOLD`] mass above its truncation.
pub fn warn_on_tail(dist: &PhotonDistribution) -> bool {
    let heavy = dist.tail_mass() > TAIL_WARN_THRESHOLD;
    if heavy {
        warn!(
            "tail mass {:.3e} above cutoff {}; click statistics are approximate",
            dist.tail_mass(),
            dist.cutoff()
        );
    }
    heavy
}

/// `c_m = sum_n C[m][n] p_n` over the stored truncation.
///
/// Unstored tail mass is assigned to `c_M`, the large-photon-number limit of
/// every column, so the result stays normalized.
pub fn click_statistics(cfg: &DetectorConfig, dist: &PhotonDistribution) -> ClickStatistics {
    warn_on_tail(dist);
    let c = click_matrix(cfg, dist.cutoff());
    let mut clicks = c.mul_vec(dist.probs());
    clicks[cfg.channels] += dist.tail_mass();
    ClickStatistics { clicks }
}

/// `q_{0,k} = sum_n (1 - T_k)^n p_n`, with `q_{0,0} = 1` by definition.
pub fn vacuum_probabilities(cfg: &DetectorConfig, dist: &PhotonDistribution) -> VacuumProbabilities {
    warn_on_tail(dist);
    let transmittances = cfg.transmittances();
    let q = transmittances
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            if k == 0 {
                return 1.0;
            }
            let mut pow = 1.0;
            let mut acc = NeumaierSum::default();
            for &p in dist.probs() {
                acc.add(pow * p);
                pow *= 1.0 - t;
            }
            acc.value().clamp(0.0, 1.0)
        })
        .collect();
    VacuumProbabilities { q, transmittances }
}

/// Click statistics recovered from vacuum probabilities by inclusion-exclusion.
pub fn clicks_from_vacuum(
    vp: &VacuumProbabilities,
    cfg: &DetectorConfig,
) -> Result<ClickStatistics> {
    let m_ch = cfg.channels;
    if vp.q.len() != m_ch + 1 {
        return Err(Error::DimensionMismatch {
            expected: m_ch + 1,
            got: vp.q.len(),
        });
    }
    let clicks = (0..=m_ch)
        .map(|m| {
            let mut acc = NeumaierSum::default();
            for j in 0..=m {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                acc.add(sign * cfg.binomial(m, j) * vp.q[m_ch - m + j]);
            }
            cfg.binomial(m_ch, m) * acc.value()
        })
        .collect();
    Ok(ClickStatistics { clicks })
}
