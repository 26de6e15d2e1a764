//! Photon-number distributions of the model states and the detection-loss
//! transform.
//!
//! All generators use multiplicative recurrences, so no factorials are ever
//! formed and the distributions stay finite for arbitrarily large cutoffs.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `sum(probs) + tail_mass = 1` accepted for explicit inputs.
const NORMALIZATION_TOL: f64 = 1e-9;

/// Largest cutoff used when extending a family to evaluate an exact tail.
const MAX_TAIL_EXTENSION: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateFamily {
    Thermal,
    Coherent,
    Squeezed,
    Subtracted,
}

impl StateFamily {
    pub const ALL: [StateFamily; 4] = [
        StateFamily::Thermal,
        StateFamily::Coherent,
        StateFamily::Squeezed,
        StateFamily::Subtracted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StateFamily::Thermal => "thermal",
            StateFamily::Coherent => "coherent",
            StateFamily::Squeezed => "squeezed",
            StateFamily::Subtracted => "subtracted",
        }
    }

    /// Smallest mean photon number accepted by the generator (exclusive
    /// unless the family is coherent).
    pub fn min_nbar(self) -> f64 {
        match self {
            StateFamily::Subtracted => 1.0,
            _ => 0.0,
        }
    }

    pub fn generate(self, nbar: f64, cutoff: usize) -> Result<PhotonDistribution> {
        match self {
            StateFamily::Thermal => thermal(nbar, cutoff),
            StateFamily::Coherent => coherent(nbar, cutoff),
            StateFamily::Squeezed => squeezed_vacuum(nbar, cutoff),
            StateFamily::Subtracted => subtracted_squeezed(nbar, cutoff),
        }
    }
}

impl fmt::Display for StateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StateFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thermal" => Ok(StateFamily::Thermal),
            "coherent" => Ok(StateFamily::Coherent),
            "squeezed" => Ok(StateFamily::Squeezed),
            "subtracted" => Ok(StateFamily::Subtracted),
            other => Err(Error::Parse {
                what: "state family".into(),
                detail: format!("unknown family `{other}`"),
            }),
        }
    }
}

/// A named state of one of the analytic families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyState {
    pub family: StateFamily,
    pub nbar: f64,
}

/// Truncated photon-number distribution `p_0..p_N` with the probability mass
/// that lies above the cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    probs: Vec<f64>,
    tail_mass: f64,
    origin: Option<FamilyState>,
}

impl PhotonDistribution {
    /// Builds an explicit distribution. Entries above `-1e-12` are clamped to
    /// zero; the missing mass `1 - sum` becomes the tail.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter("empty probability vector".into()));
        }
        let mut clean = Vec::with_capacity(probs.len());
        for (n, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < -1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "p_{n} = {p} is not a probability"
                )));
            }
            clean.push(p.max(0.0));
        }
        let sum: f64 = clean.iter().sum();
        if sum > 1.0 + NORMALIZATION_TOL {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {sum} > 1"
            )));
        }
        Ok(Self {
            probs: clean,
            tail_mass: (1.0 - sum).max(0.0),
            origin: None,
        })
    }

    /// Reads a whitespace-separated list of probabilities (index = photon number).
    pub fn from_text(text: &str) -> Result<Self> {
        let probs = text
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|e| Error::Parse {
                    what: "probability list".into(),
                    detail: format!("`{tok}`: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_probs(probs)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_text(&text)
    }

    pub fn vacuum() -> Self {
        Self {
            probs: vec![1.0],
            tail_mass: 0.0,
            origin: None,
        }
    }

    /// Fock state `|n>`.
    pub fn fock(n: usize) -> Self {
        let mut probs = vec![0.0; n + 1];
        probs[n] = 1.0;
        Self {
            probs,
            tail_mass: 0.0,
            origin: None,
        }
    }

    fn from_family(probs: Vec<f64>, tail_mass: f64, family: StateFamily, nbar: f64) -> Self {
        Self {
            probs,
            tail_mass,
            origin: Some(FamilyState { family, nbar }),
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn cutoff(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn origin(&self) -> Option<FamilyState> {
        self.origin
    }

    /// `p_n`, zero beyond the stored truncation.
    pub fn get(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// `p_0..p_cutoff`, zero-padded if the stored truncation is shorter.
    pub fn head(&self, cutoff: usize) -> Vec<f64> {
        (0..=cutoff).map(|n| self.get(n)).collect()
    }

    /// Tail `sum_{n > cutoff} z_n p_n` of a linear observable.
    ///
    /// Returns `Some` when the value is known to double precision: for family
    /// states the generator is extended until the remaining mass underflows;
    /// for explicit distributions only when no mass is unaccounted for.
    pub fn observable_tail(&self, coeff: impl Fn(usize) -> f64, cutoff: usize) -> Option<f64> {
        if let Some(origin) = self.origin {
            let mut ext = (2 * cutoff).max(self.cutoff()).max(64);
            loop {
                let d = origin.family.generate(origin.nbar, ext).ok()?;
                if d.tail_mass < 1e-18 || ext >= MAX_TAIL_EXTENSION {
                    return Some(sum_range(&d.probs, &coeff, cutoff + 1));
                }
                ext *= 2;
            }
        }
        if self.tail_mass == 0.0 {
            Some(sum_range(&self.probs, &coeff, cutoff + 1))
        } else {
            None
        }
    }

    /// Sum of the stored entries above `cutoff` times `coeff`, plus the mass
    /// that was never stored.
    pub(crate) fn split_tail(&self, coeff: impl Fn(usize) -> f64, cutoff: usize) -> (f64, f64) {
        (sum_range(&self.probs, &coeff, cutoff + 1), self.tail_mass)
    }

    /// Mass above `cutoff`, including entries stored beyond it.
    pub fn mass_above(&self, cutoff: usize) -> f64 {
        let stored: f64 = self.probs.iter().skip(cutoff + 1).sum();
        stored + self.tail_mass
    }
}

fn sum_range(probs: &[f64], coeff: &impl Fn(usize) -> f64, from: usize) -> f64 {
    probs
        .iter()
        .enumerate()
        .skip(from)
        .map(|(n, p)| coeff(n) * p)
        .sum()
}

fn check_nbar(nbar: f64, min: f64, family: &str) -> Result<()> {
    if !nbar.is_finite() || nbar <= min {
        return Err(Error::InvalidParameter(format!(
            "{family} state requires nbar > {min}, got {nbar}"
        )));
    }
    Ok(())
}

/// Bose-Einstein distribution with mean `nbar`.
pub fn thermal(nbar: f64, cutoff: usize) -> Result<PhotonDistribution> {
    check_nbar(nbar, 0.0, "thermal")?;
    let ratio = nbar / (nbar + 1.0);
    let mut probs = Vec::with_capacity(cutoff + 1);
    let mut p = 1.0 / (nbar + 1.0);
    for _ in 0..=cutoff {
        probs.push(p);
        p *= ratio;
    }
    let tail = ratio.powi(cutoff as i32 + 1);
    Ok(PhotonDistribution::from_family(
        probs,
        tail,
        StateFamily::Thermal,
        nbar,
    ))
}

/// Poisson distribution with mean `nbar`.
pub fn coherent(nbar: f64, cutoff: usize) -> Result<PhotonDistribution> {
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "coherent state requires nbar >= 0, got {nbar}"
        )));
    }
    let mut probs = Vec::with_capacity(cutoff + 1);
    let mut p = (-nbar).exp();
    for n in 0..=cutoff {
        if n > 0 {
            p *= nbar / n as f64;
        }
        probs.push(p);
    }
    let tail = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    Ok(PhotonDistribution::from_family(
        probs,
        tail,
        StateFamily::Coherent,
        nbar,
    ))
}

/// Squeezed vacuum with `nbar = sinh^2 r`; only even photon numbers occur.
pub fn squeezed_vacuum(nbar: f64, cutoff: usize) -> Result<PhotonDistribution> {
    check_nbar(nbar, 0.0, "squeezed")?;
    let r = nbar.sqrt().asinh();
    let t2 = r.tanh().powi(2);
    let mut probs = vec![0.0; cutoff + 1];
    let mut p = 1.0 / r.cosh();
    let mut k = 0usize;
    while 2 * k <= cutoff {
        if k > 0 {
            p *= t2 * (2 * k - 1) as f64 / (2 * k) as f64;
        }
        probs[2 * k] = p;
        k += 1;
    }
    let tail = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    Ok(PhotonDistribution::from_family(
        probs,
        tail,
        StateFamily::Squeezed,
        nbar,
    ))
}

/// Single-photon-subtracted squeezed vacuum with `nbar = 1 + 3 sinh^2 r`;
/// only odd photon numbers occur.
pub fn subtracted_squeezed(nbar: f64, cutoff: usize) -> Result<PhotonDistribution> {
    check_nbar(nbar, 1.0, "subtracted")?;
    let s2 = (nbar - 1.0) / 3.0;
    let r = s2.sqrt().asinh();
    let t2 = r.tanh().powi(2);
    let norm = s2 * r.cosh();
    let mut probs = vec![0.0; cutoff + 1];
    // central binomial ratio (2k)!/(4^k k!^2) times t^{2k}
    let mut weight = 1.0;
    let mut k = 1usize;
    while 2 * k - 1 <= cutoff {
        weight *= t2 * (2 * k - 1) as f64 / (2 * k) as f64;
        probs[2 * k - 1] = weight * (2 * k) as f64 / norm;
        k += 1;
    }
    let tail = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    Ok(PhotonDistribution::from_family(
        probs,
        tail,
        StateFamily::Subtracted,
        nbar,
    ))
}

/// Distribution seen by ideal detectors behind a channel of transmittance `eta`.
///
/// The binomial sum runs over the stored truncation only; the result keeps the
/// input cutoff and tail mass.
pub fn apply_loss(dist: &PhotonDistribution, eta: f64) -> Result<PhotonDistribution> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!(
            "transmittance must lie in [0,1], got {eta}"
        )));
    }
    let cutoff = dist.cutoff();
    let mut out = vec![0.0; cutoff + 1];
    // binomial pmf of m photons, grown one photon at a time
    let mut pmf = vec![1.0];
    for (m, &pm) in dist.probs.iter().enumerate() {
        if m > 0 {
            let mut next = vec![0.0; m + 1];
            for (n, &b) in pmf.iter().enumerate() {
                next[n] += b * (1.0 - eta);
                next[n + 1] += b * eta;
            }
            pmf = next;
        }
        if pm != 0.0 {
            for (n, &b) in pmf.iter().enumerate() {
                out[n] += b * pm;
            }
        }
    }
    Ok(PhotonDistribution {
        probs: out,
        tail_mass: dist.tail_mass,
        origin: None,
    })
}

/// Parsed form of a CLI state specification string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StateSpec {
    Family(FamilyState),
    File { path: String },
}

impl StateSpec {
    pub fn distribution(&self, cutoff: usize) -> Result<PhotonDistribution> {
        match self {
            StateSpec::Family(s) => s.family.generate(s.nbar, cutoff),
            StateSpec::File { path } => PhotonDistribution::from_file(path),
        }
    }

    pub fn family(&self) -> Option<FamilyState> {
        match self {
            StateSpec::Family(s) => Some(*s),
            StateSpec::File { .. } => None,
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Family(s) => write!(f, "{}:nbar={}", s.family, s.nbar),
            StateSpec::File { path } => write!(f, "file:{path}"),
        }
    }
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |detail: String| Error::Parse {
            what: "state specification".into(),
            detail,
        };
        let (head, rest) = s
            .split_once(':')
            .ok_or_else(|| bad(format!("`{s}` has no `:`")))?;
        if head == "file" {
            if rest.is_empty() {
                return Err(bad("empty file path".into()));
            }
            return Ok(StateSpec::File { path: rest.into() });
        }
        let family: StateFamily = head.parse()?;
        let value = rest
            .strip_prefix("nbar=")
            .ok_or_else(|| bad(format!("expected `nbar=<x>` after `{head}:`")))?;
        let nbar: f64 = value
            .parse()
            .map_err(|e| bad(format!("nbar `{value}`: {e}")))?;
        Ok(StateSpec::Family(FamilyState { family, nbar }))
    }
}
