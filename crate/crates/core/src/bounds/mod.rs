//! Lower and upper bounds on linear functions of `p_n` that are compatible
//! with a given click statistics.
//!
//! The click statistics are generated from a known distribution truncated at
//! the cutoff `N`, which makes every program feasible by construction. The
//! part of the observable above the cutoff is added back as a tail
//! correction: exactly when the state's tail is known, otherwise as a
//! `+-B * tail_mass` widening.

mod region;
mod sweep;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detector::{click_matrix_in, DetectorConfig};
use crate::error::{Error, Result};
use crate::linalg::{compensated_dot, lift, orthonormal_rows, Dd, Matrix, Scalar};
use crate::lp::{self, CertificateReport, LinearProgram, LpSolution, Sense};
use crate::states::PhotonDistribution;

pub use region::{feasibility_region, polygon_area, Region, SupportPoint, DEFAULT_ANGLES};
pub use sweep::{sweep, sweep_with_sink, SweepGrid, SweepRow};

/// Default photon-number cutoff.
pub const DEFAULT_CUTOFF: usize = 80;

/// Relative remainder below which a constraint row counts as dependent.
const RANK_TOL: f64 = 1e-24;

/// Which equality constraints encode the measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintForm {
    /// `A = C`, `b = c`.
    Click,
    /// `A_kn = (1 - eta k/M)^n`, `b = q_{0,k}`.
    #[default]
    Vacuum,
}

impl fmt::Display for ConstraintForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintForm::Click => "click",
            ConstraintForm::Vacuum => "vacuum",
        })
    }
}

impl FromStr for ConstraintForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "click" => Ok(ConstraintForm::Click),
            "vacuum" => Ok(ConstraintForm::Vacuum),
            other => Err(Error::Parse {
                what: "constraint form".into(),
                detail: format!("`{other}` (expected click|vacuum)"),
            }),
        }
    }
}

/// Constraint matrix `(M+1) x (cutoff+1)` and right-hand side `b = A p_true`.
pub fn assemble_constraints(
    cfg: &DetectorConfig,
    dist: &PhotonDistribution,
    cutoff: usize,
    form: ConstraintForm,
) -> (Matrix, Vec<f64>) {
    let a = constraint_matrix(cfg, cutoff, form);
    let b = a.mul_vec(&dist.head(cutoff));
    (a, b)
}

pub fn constraint_matrix(cfg: &DetectorConfig, cutoff: usize, form: ConstraintForm) -> Matrix {
    constraint_matrix_in(cfg, cutoff, form)
}

pub fn constraint_matrix_in<T: Scalar>(
    cfg: &DetectorConfig,
    cutoff: usize,
    form: ConstraintForm,
) -> Matrix<T> {
    match form {
        ConstraintForm::Click => click_matrix_in(cfg, cutoff),
        ConstraintForm::Vacuum => {
            let m = cfg.channels();
            let eta = T::from_f64(cfg.efficiency());
            let mf = T::from_f64(m as f64);
            let mut a = Matrix::zeros(m + 1, cutoff + 1);
            for k in 0..=m {
                let base = T::one() - eta * T::from_f64(k as f64) / mf;
                let mut pow = T::one();
                for n in 0..=cutoff {
                    a.set(k, n, pow);
                    pow = pow * base;
                }
            }
            a
        }
    }
}

/// The program actually handed to the solver: the constraint rows replaced
/// by an orthonormal basis of their span, in double-double precision, with
/// `b = Q p_true`. The feasible set is unchanged.
pub fn reduced_program(
    cfg: &DetectorConfig,
    dist: &PhotonDistribution,
    cutoff: usize,
    form: ConstraintForm,
) -> (Matrix<Dd>, Vec<Dd>) {
    let a = constraint_matrix_in::<Dd>(cfg, cutoff, form);
    let (q, _) = orthonormal_rows(&a, RANK_TOL);
    let b = q.mul_vec(&lift(&dist.head(cutoff)));
    (q, b)
}

/// Quantity being bounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "n", rename_all = "lowercase")]
pub enum Target {
    /// `p_n`
    Probability(usize),
    /// Wigner function at the origin, `sum (-1)^n p_n / pi`.
    Wigner,
    /// Mean photon number; only bounded under the cutoff assumption.
    MeanPhoton,
}

impl Target {
    pub fn coeff(&self, n: usize) -> f64 {
        match *self {
            Target::Probability(k) => {
                if n == k {
                    1.0
                } else {
                    0.0
                }
            }
            Target::Wigner => {
                if n.is_multiple_of(2) {
                    1.0 / PI
                } else {
                    -1.0 / PI
                }
            }
            Target::MeanPhoton => n as f64,
        }
    }

    /// `B` with `|z_n| <= B`, or `None` for unbounded coefficient families.
    pub fn bound(&self) -> Option<f64> {
        match self {
            Target::Probability(_) => Some(1.0),
            Target::Wigner => Some(1.0 / PI),
            Target::MeanPhoton => None,
        }
    }

    /// Parses `p<n>`, `pn:<a>-<b>` (range), `wigner` or `nbar`.
    pub fn parse_list(s: &str) -> Result<Vec<Target>> {
        let bad = |d: String| Error::Parse {
            what: "target".into(),
            detail: d,
        };
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if let Some(range) = part.strip_prefix("pn:") {
                let (lo, hi) = range.split_once('-').unwrap_or((range, range));
                let lo: usize = lo.parse().map_err(|e| bad(format!("`{part}`: {e}")))?;
                let hi: usize = hi.parse().map_err(|e| bad(format!("`{part}`: {e}")))?;
                if hi < lo {
                    return Err(bad(format!("empty range `{part}`")));
                }
                out.extend((lo..=hi).map(Target::Probability));
            } else {
                out.push(part.parse()?);
            }
        }
        if out.is_empty() {
            return Err(bad("no target given".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Probability(n) => write!(f, "p{n}"),
            Target::Wigner => f.write_str("wigner"),
            Target::MeanPhoton => f.write_str("nbar"),
        }
    }
}

impl FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wigner" => Ok(Target::Wigner),
            "nbar" => Ok(Target::MeanPhoton),
            _ => s
                .strip_prefix('p')
                .and_then(|n| n.parse().ok())
                .map(Target::Probability)
                .ok_or_else(|| Error::Parse {
                    what: "target".into(),
                    detail: format!("`{s}` (expected p<n>, pn:<a>-<b>, wigner or nbar)"),
                }),
        }
    }
}

/// Interval `[center - radius, center + radius]` known to contain
/// `sum_{n > N} z_n p_n`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TailCorrection {
    pub center: f64,
    pub radius: f64,
}

impl TailCorrection {
    pub fn exact(v: f64) -> Self {
        Self {
            center: v,
            radius: 0.0,
        }
    }
}

/// Coefficients `z_0..z_N` of the bounded quantity, with its tail correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearObservable {
    pub label: String,
    pub coeffs: Vec<f64>,
    /// `B`, absent for unbounded families.
    pub bound: Option<f64>,
    pub tail_correction: TailCorrection,
    /// Set when the bound only holds under `p_n = 0` above the cutoff.
    pub cutoff_conditional: bool,
}

impl LinearObservable {
    /// Builds the observable for `target` up to `cutoff`, with the tail of
    /// `dist` above the cutoff folded into the correction.
    pub fn for_target(target: Target, dist: &PhotonDistribution, cutoff: usize) -> Self {
        let coeffs = (0..=cutoff).map(|n| target.coeff(n)).collect();
        let bound = target.bound();
        let (tail_correction, cutoff_conditional) = match target {
            Target::Probability(n) if n <= cutoff => (TailCorrection::default(), false),
            Target::MeanPhoton => (TailCorrection::default(), true),
            _ => {
                let b = bound.expect("bounded target");
                let tail = match dist.observable_tail(|n| target.coeff(n), cutoff) {
                    Some(v) => TailCorrection::exact(v),
                    None => {
                        let (stored, unknown) = dist.split_tail(|n| target.coeff(n), cutoff);
                        TailCorrection {
                            center: stored,
                            radius: b * unknown,
                        }
                    }
                };
                (tail, false)
            }
        };
        Self {
            label: target.to_string(),
            coeffs,
            bound,
            tail_correction,
            cutoff_conditional,
        }
    }

    /// Arbitrary bounded observable with `z_n = 0` above the given
    /// coefficients; the tail then vanishes.
    pub fn custom(label: impl Into<String>, coeffs: Vec<f64>) -> Result<Self> {
        let bound = coeffs.iter().fold(0.0f64, |acc, z| acc.max(z.abs()));
        if !bound.is_finite() {
            return Err(Error::InvalidParameter("non-finite coefficients".into()));
        }
        Ok(Self {
            label: label.into(),
            coeffs,
            bound: Some(bound),
            tail_correction: TailCorrection::default(),
            cutoff_conditional: false,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// Certified interval for one observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub target: String,
    pub z_min: f64,
    pub z_max: f64,
    /// Value on the generating distribution, truncation plus tail center.
    pub true_value: f64,
    pub primal_min: Vec<f64>,
    pub primal_max: Vec<f64>,
    pub certificate_min: CertificateReport,
    pub certificate_max: CertificateReport,
    pub tail_correction: TailCorrection,
    pub cutoff_conditional: bool,
    pub detector: DetectorConfig,
    pub cutoff: usize,
    pub form: ConstraintForm,
}

impl BoundResult {
    pub fn width(&self) -> f64 {
        self.z_max - self.z_min
    }

    pub fn certified(&self) -> bool {
        self.certificate_min.passed() && self.certificate_max.passed()
    }

    pub fn gap_min(&self) -> f64 {
        self.certificate_min.gap
    }

    pub fn gap_max(&self) -> f64 {
        self.certificate_max.gap
    }

    pub fn contains(&self, value: f64, slack: f64) -> bool {
        value >= self.z_min - slack && value <= self.z_max + slack
    }
}

/// Bounds `obs` given the click statistics of `dist` truncated at `cutoff`.
pub fn bound_observable(
    cfg: &DetectorConfig,
    dist: &PhotonDistribution,
    obs: &LinearObservable,
    cutoff: usize,
    form: ConstraintForm,
) -> Result<BoundResult> {
    if obs.cutoff() != cutoff {
        return Err(Error::DimensionMismatch {
            expected: cutoff + 1,
            got: obs.coeffs.len(),
        });
    }
    let (a, b) = reduced_program(cfg, dist, cutoff, form);
    let lp_min = LinearProgram::new(lift(&obs.coeffs), a, b, Sense::Minimize)?;
    let lp_max = lp_min.with_sense(Sense::Maximize);
    let (lo, hi) = rayon::join(|| solve_checked(&lp_min), || solve_checked(&lp_max));
    let ((sol_min, cert_min), (sol_max, cert_max)) = (lo?, hi?);

    let tail = obs.tail_correction;
    let true_value = compensated_dot(&obs.coeffs, &dist.head(cutoff)) + tail.center;
    Ok(BoundResult {
        target: obs.label.clone(),
        z_min: sol_min.optimum + tail.center - tail.radius,
        z_max: sol_max.optimum + tail.center + tail.radius,
        true_value,
        primal_min: sol_min.primal_f64(),
        primal_max: sol_max.primal_f64(),
        certificate_min: cert_min,
        certificate_max: cert_max,
        tail_correction: tail,
        cutoff_conditional: obs.cutoff_conditional,
        detector: cfg.clone(),
        cutoff,
        form,
    })
}

pub(crate) fn solve_checked(
    lp: &LinearProgram<Dd>,
) -> Result<(LpSolution<Dd>, CertificateReport)> {
    let sol = lp::solve(lp)?.into_result()?;
    let cert = lp::verify_certificate(lp, &sol);
    Ok((sol, cert))
}

pub fn bound_target(
    cfg: &DetectorConfig,
    dist: &PhotonDistribution,
    target: Target,
    cutoff: usize,
    form: ConstraintForm,
) -> Result<BoundResult> {
    if let Target::Probability(n) = target {
        if n > cutoff {
            return Err(Error::IndexOutOfRange { index: n, cutoff });
        }
    }
    let obs = LinearObservable::for_target(target, dist, cutoff);
    bound_observable(cfg, dist, &obs, cutoff, form)
}

/// Bounds on `p_n`; the tail correction vanishes.
pub fn probability_bounds(
    cfg: &DetectorConfig,
    dist: &PhotonDistribution,
    n: usize,
    cutoff: usize,
    form: ConstraintForm,
) -> Result<BoundResult> {
    bound_target(cfg, dist, Target::Probability(n), cutoff, form)
}

/// Bounds on the Wigner function at the origin of phase space.
pub fn wigner_origin_bounds(
    cfg: &DetectorConfig,
    dist: &PhotonDistribution,
    cutoff: usize,
    form: ConstraintForm,
) -> Result<BoundResult> {
    bound_target(cfg, dist, Target::Wigner, cutoff, form)
}

/// Bounds on the mean photon number assuming no population above `cutoff`.
/// The upper bound keeps growing with the cutoff.
pub fn mean_photon_bounds(
    cfg: &DetectorConfig,
    dist: &PhotonDistribution,
    cutoff: usize,
    form: ConstraintForm,
) -> Result<BoundResult> {
    bound_target(cfg, dist, Target::MeanPhoton, cutoff, form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::click_statistics;
    use crate::states::{coherent, squeezed_vacuum, subtracted_squeezed, thermal};

    fn cfg(m: usize, eta: f64) -> DetectorConfig {
        DetectorConfig::new(m, eta).unwrap()
    }

    #[test]
    fn vacuum_form_rows() {
        let c = cfg(10, 1.0);
        let d = thermal(2.0, 80).unwrap();
        let (a, b) = assemble_constraints(&c, &d, 80, ConstraintForm::Vacuum);
        assert!(a.row(0).iter().all(|&v| v == 1.0));
        assert!((b[0] - d.head(80).iter().sum::<f64>()).abs() < 1e-15);
        assert_eq!(a.get(10, 0), 1.0);
        assert!(a.row(10)[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn vacuum_input_pins_everything() {
        let d = PhotonDistribution::vacuum();
        let c = cfg(10, 1.0);
        let r = probability_bounds(&c, &d, 0, 80, ConstraintForm::Vacuum).unwrap();
        assert!((r.z_min - 1.0).abs() < 1e-12 && (r.z_max - 1.0).abs() < 1e-12);
        let w = wigner_origin_bounds(&c, &d, 80, ConstraintForm::Vacuum).unwrap();
        assert!((w.z_min - 1.0 / PI).abs() < 1e-12 && (w.z_max - 1.0 / PI).abs() < 1e-12);
        let m = mean_photon_bounds(&c, &d, 80, ConstraintForm::Vacuum).unwrap();
        assert!(m.z_min.abs() < 1e-12 && m.z_max.abs() < 1e-12);
        assert!(m.cutoff_conditional);
    }

    #[test]
    fn point_identified_below_channel_count() {
        let c = cfg(10, 1.0);
        let d = thermal(1.0, 8).unwrap();
        for target in [Target::Probability(3), Target::Wigner, Target::MeanPhoton] {
            let r = bound_target(&c, &d, target, 8, ConstraintForm::Vacuum).unwrap();
            assert!(r.certified());
            assert!(r.width() < 1e-8, "{target}: {}", r.width());
        }
    }

    #[test]
    fn p0_is_measured_directly() {
        let c = cfg(10, 1.0);
        for d in [thermal(2.0, 80).unwrap(), squeezed_vacuum(2.0, 80).unwrap()] {
            let r = probability_bounds(&c, &d, 0, 80, ConstraintForm::Vacuum).unwrap();
            assert!(r.width() <= 1e-8);
        }
    }

    #[test]
    fn coherent_widths_are_small() {
        let c = cfg(10, 1.0);
        let d = coherent(2.0, 80).unwrap();
        for n in 0..=14 {
            let r = probability_bounds(&c, &d, n, 80, ConstraintForm::Vacuum).unwrap();
            assert!(r.certified());
            assert!(r.width() < 0.01, "n={n}: {}", r.width());
        }
    }

    #[test]
    fn thermal_wigner_contains_closed_form() {
        let c = cfg(10, 1.0);
        let d = thermal(2.0, 80).unwrap();
        let r = wigner_origin_bounds(&c, &d, 80, ConstraintForm::Vacuum).unwrap();
        let w = 1.0 / (5.0 * PI);
        assert!((r.true_value - w).abs() < 1e-14);
        assert!(r.contains(w, 1e-8));
        assert_eq!(r.tail_correction.radius, 0.0);
    }

    #[test]
    fn parity_states_pin_one_wigner_bound() {
        let c = cfg(10, 1.0);
        let d = squeezed_vacuum(2.0, 80).unwrap();
        let r = wigner_origin_bounds(&c, &d, 80, ConstraintForm::Vacuum).unwrap();
        assert!((r.z_max - r.true_value).abs() < 1e-8);
        let d = subtracted_squeezed(2.0, 80).unwrap();
        let r = wigner_origin_bounds(&c, &d, 80, ConstraintForm::Vacuum).unwrap();
        assert!((r.z_min - r.true_value).abs() < 1e-8);
        assert!(r.z_max < 0.0);
    }

    #[test]
    fn unknown_tail_widens_symmetrically() {
        let c = cfg(4, 1.0);
        let d = PhotonDistribution::from_probs(vec![0.5, 0.3, 0.1]).unwrap();
        let r = wigner_origin_bounds(&c, &d, 2, ConstraintForm::Vacuum).unwrap();
        assert!((r.tail_correction.radius - 0.1 / PI).abs() < 1e-15);
        assert!(r.width() >= 2.0 * 0.1 / PI - 1e-12);
    }

    #[test]
    fn extremal_solutions_share_click_statistics() {
        let c = cfg(10, 1.0);
        let d = thermal(3.0, 80).unwrap();
        let base = click_statistics(&c, &PhotonDistribution::from_probs(d.head(80)).unwrap());
        for n in [2, 5, 7] {
            let r = probability_bounds(&c, &d, n, 80, ConstraintForm::Vacuum).unwrap();
            for x in [&r.primal_min, &r.primal_max] {
                let clamped: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
                let alt = click_statistics(&c, &PhotonDistribution::from_probs(clamped).unwrap());
                for (p, q) in alt.as_slice().iter().zip(base.as_slice()) {
                    assert!((p - q).abs() < 1e-8);
                }
            }
        }
    }

    fn widths(m: usize, eta: f64, d: &PhotonDistribution, top: usize) -> Vec<f64> {
        (0..=top)
            .map(|n| probability_bounds(&cfg(m, eta), d, n, 80, ConstraintForm::Vacuum).unwrap().width())
            .collect()
    }

    #[test]
    fn doubling_channels_never_widens() {
        // the transmittances for M are a subset of those for 2M
        let d = thermal(2.0, 80).unwrap();
        for (m, eta) in [(2, 1.0), (3, 1.0), (5, 1.0), (4, 0.75), (8, 0.5)] {
            let (a, b) = (widths(m, eta, &d, 8), widths(2 * m, eta, &d, 8));
            for n in 0..=8 {
                assert!(b[n] <= a[n] + 1e-9, "M={m} eta={eta} n={n}: {} -> {}", a[n], b[n]);
            }
        }
    }

    #[test]
    fn more_channels_can_widen_single_bounds() {
        let d = thermal(2.0, 80).unwrap();
        for form in [ConstraintForm::Vacuum, ConstraintForm::Click] {
            let three = probability_bounds(&cfg(3, 1.0), &d, 3, 80, form).unwrap();
            let four = probability_bounds(&cfg(4, 1.0), &d, 3, 80, form).unwrap();
            assert!((three.z_max - 12.0 / 35.0).abs() < 1e-9, "{}", three.z_max);
            assert!((four.z_max - 16.0 / 45.0).abs() < 1e-9, "{}", four.z_max);
            assert!(three.z_min.abs() < 1e-12 && four.z_min.abs() < 1e-12);
        }
    }

    #[test]
    fn lower_efficiency_widens_overall() {
        for d in [thermal(2.0, 80).unwrap(), squeezed_vacuum(2.0, 80).unwrap()] {
            let w: Vec<Vec<f64>> = [1.0, 0.75, 0.5].iter().map(|&e| widths(10, e, &d, 14)).collect();
            for k in 1..3 {
                let (prev, cur) = (&w[k - 1], &w[k]);
                assert!(cur.iter().sum::<f64>() > prev.iter().sum::<f64>());
                assert!((0..=4).all(|n| cur[n] > prev[n]));
            }
        }
    }

    #[test]
    fn index_out_of_range() {
        let c = cfg(4, 1.0);
        let d = thermal(1.0, 10).unwrap();
        assert!(matches!(
            probability_bounds(&c, &d, 11, 10, ConstraintForm::Vacuum),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn custom_observable_matches_selector() {
        let c = cfg(6, 0.8);
        let d = thermal(1.5, 40).unwrap();
        let mut z = vec![0.0; 41];
        z[3] = 1.0;
        let obs = LinearObservable::custom("p3", z).unwrap();
        let a = bound_observable(&c, &d, &obs, 40, ConstraintForm::Vacuum).unwrap();
        let b = probability_bounds(&c, &d, 3, 40, ConstraintForm::Vacuum).unwrap();
        assert!((a.z_min - b.z_min).abs() < 1e-12 && (a.z_max - b.z_max).abs() < 1e-12);
        let short = LinearObservable::custom("p3", vec![0.0; 10]).unwrap();
        assert!(bound_observable(&c, &d, &short, 40, ConstraintForm::Vacuum).is_err());
    }

    #[test]
    fn target_parsing() {
        assert_eq!(
            Target::parse_list("pn:0-2,wigner,nbar").unwrap(),
            vec![
                Target::Probability(0),
                Target::Probability(1),
                Target::Probability(2),
                Target::Wigner,
                Target::MeanPhoton
            ]
        );
        assert_eq!(Target::parse_list("p5").unwrap(), vec![Target::Probability(5)]);
        assert!(Target::parse_list("pn:3-1").is_err());
        assert!(Target::parse_list("q5").is_err());
        assert!(Target::parse_list("").is_err());
        assert_eq!(Target::Probability(4).to_string(), "p4");
    }
}
