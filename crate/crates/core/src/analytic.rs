//! Closed-form bounds for a beam split evenly onto two on/off detectors.
//!
//! Single mode: from the no-click probability of both detectors `p0` and of
//! one detector `q0 = sum_n p_n / 2^n`, the one-photon probability satisfies
//! `max(4 q0 - 3 p0 - 1, 0) <= p_1 <= 2 (q0 - p0)`.
//!
//! Two modes: for symmetric joint distributions the local no-click
//! probabilities give a lower bound `12 D2 - 2 D3` on `p_{1,1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::lp::{solve, verify_certificate, LinearProgram, Sense};
use crate::states::PhotonDistribution;

/// Slack allowed on the realizability conditions of measured data.
pub const DATA_TOL: f64 = 1e-10;

/// Photon-number cutoff of the linear program behind [`lp_p1_bounds`].
pub const LP_CUTOFF: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HbtSingleModeData {
    p0: f64,
    q0: f64,
}

impl HbtSingleModeData {
    /// Rejects pairs outside `p0 <= q0 <= (1 + p0) / 2`, which no
    /// distribution produces.
    pub fn new(p0: f64, q0: f64) -> Result<Self> {
        for (name, v) in [("p0", p0), ("q0", q0)] {
            if !v.is_finite() || !(-DATA_TOL..=1.0 + DATA_TOL).contains(&v) {
                return Err(Error::InfeasibleData(format!("{name} = {v} is not a probability")));
            }
        }
        if q0 < p0 - DATA_TOL {
            return Err(Error::InfeasibleData(format!("q0 = {q0} below p0 = {p0}")));
        }
        if q0 > 0.5 * (1.0 + p0) + DATA_TOL {
            return Err(Error::InfeasibleData(format!(
                "q0 = {q0} above (1 + p0)/2 = {}",
                0.5 * (1.0 + p0)
            )));
        }
        Ok(Self { p0, q0 })
    }

    /// Exact data for `dist`. Unstored tail mass of explicit distributions
    /// is ignored.
    pub fn from_distribution(dist: &PhotonDistribution) -> Result<Self> {
        let n = dist.cutoff();
        let head: f64 = dist
            .probs()
            .iter()
            .enumerate()
            .map(|(k, p)| 0.5f64.powi(k as i32) * p)
            .sum();
        let tail = dist.observable_tail(|k| 0.5f64.powi(k as i32), n).unwrap_or(0.0);
        Self::new(dist.get(0), head + tail)
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    pub fn p1_lower(&self) -> f64 {
        (4.0 * self.q0 - 3.0 * self.p0 - 1.0).max(0.0)
    }

    pub fn p1_upper(&self) -> f64 {
        2.0 * (self.q0 - self.p0)
    }
}

/// `p_1` range from the linear program over `p_0..p_cutoff` with rows
/// `sum p_n = 1`, `sum p_n / 2^n = q0` and `p_0 = p0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpP1Bounds {
    pub lower: f64,
    pub upper: f64,
    pub certified: bool,
}

pub fn lp_p1_bounds(data: &HbtSingleModeData, cutoff: usize) -> Result<LpP1Bounds> {
    if cutoff < 2 {
        return Err(Error::InvalidParameter(format!("cutoff {cutoff} < 2")));
    }
    let a = Matrix::from_fn(3, cutoff + 1, |i, n| match i {
        0 => 1.0,
        1 => 0.5f64.powi(n as i32),
        _ => f64::from(u8::from(n == 0)),
    });
    let mut z = vec![0.0; cutoff + 1];
    z[1] = 1.0;
    let lp = LinearProgram::new(z, a, vec![1.0, data.q0, data.p0], Sense::Minimize)?;
    let lo = solve(&lp)?.into_result()?;
    let hi_lp = lp.with_sense(Sense::Maximize);
    let hi = solve(&hi_lp)?.into_result()?;
    let certified = verify_certificate(&lp, &lo).passed() && verify_certificate(&hi_lp, &hi).passed();
    Ok(LpP1Bounds {
        lower: lo.optimum,
        upper: hi.optimum,
        certified,
    })
}

/// Dense joint distribution `p_{m,n}`, `m, n <= cutoff`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointGrid {
    size: usize,
    probs: Vec<f64>,
}

impl JointGrid {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::InvalidParameter("empty grid".into()));
        }
        let mut probs = Vec::with_capacity(size * size);
        for row in rows {
            if row.len() != size {
                return Err(Error::DimensionMismatch {
                    expected: size,
                    got: row.len(),
                });
            }
            probs.extend(row);
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidParameter(format!("grid entry {p} is not a probability")));
        }
        let total: f64 = probs.iter().sum();
        if total > 1.0 + DATA_TOL {
            return Err(Error::InvalidParameter(format!("grid sums to {total} > 1")));
        }
        Ok(Self { size, probs })
    }

    /// `p_{m,n} = a_m b_n` truncated at `cutoff`.
    pub fn product(a: &PhotonDistribution, b: &PhotonDistribution, cutoff: usize) -> Self {
        let (ha, hb) = (a.head(cutoff), b.head(cutoff));
        let probs = ha.iter().flat_map(|x| hb.iter().map(move |y| x * y)).collect();
        Self {
            size: cutoff + 1,
            probs,
        }
    }

    /// `|m, n>`
    pub fn fock(m: usize, n: usize) -> Self {
        let size = m.max(n) + 1;
        let mut probs = vec![0.0; size * size];
        probs[m * size + n] = 1.0;
        Self { size, probs }
    }

    pub fn cutoff(&self) -> usize {
        self.size - 1
    }

    pub fn get(&self, m: usize, n: usize) -> f64 {
        if m < self.size && n < self.size {
            self.probs[m * self.size + n]
        } else {
            0.0
        }
    }

    /// Average with the transpose.
    pub fn symmetrized(&self) -> Self {
        let s = self.size;
        let probs = (0..s * s)
            .map(|i| 0.5 * (self.probs[i] + self.probs[(i % s) * s + i / s]))
            .collect();
        Self { size: s, probs }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.size).all(|m| (0..m).all(|n| (self.get(m, n) - self.get(n, m)).abs() <= tol))
    }

    fn weighted(&self, w: impl Fn(usize, usize) -> f64) -> f64 {
        let s = self.size;
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| w(i / s, i % s) * p)
            .sum()
    }
}

/// Local no-click probabilities of two HBT setups, one per mode. `A` refers
/// to the first mode index, `B` to the second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HbtTwoModeData {
    pub p0a: f64,
    pub p0b: f64,
    pub p00: f64,
    pub qa: f64,
    pub qb: f64,
    pub q0a: f64,
    pub q0b: f64,
    pub q00: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct P11Bound {
    /// `max(12 D2 - 2 D3, 0)`
    pub value: f64,
    /// `12 D2 - 2 D3` before clipping; the bound is attained when this is
    /// nonnegative.
    pub raw: f64,
    pub applicable: bool,
    pub d: [f64; 3],
}

impl HbtTwoModeData {
    pub fn from_grid(grid: &JointGrid) -> Self {
        let h = |k: usize| 0.5f64.powi(k as i32);
        Self {
            p0a: grid.weighted(|m, _| f64::from(u8::from(m == 0))),
            p0b: grid.weighted(|_, n| f64::from(u8::from(n == 0))),
            p00: grid.get(0, 0),
            qa: grid.weighted(|m, _| h(m)),
            qb: grid.weighted(|_, n| h(n)),
            q0a: grid.weighted(|m, n| if m == 0 { h(n) } else { 0.0 }),
            q0b: grid.weighted(|m, n| if n == 0 { h(m) } else { 0.0 }),
            q00: grid.weighted(|m, n| h(m + n)),
        }
    }

    fn fields(&self) -> [(&'static str, f64); 8] {
        [
            ("p0A", self.p0a),
            ("p0B", self.p0b),
            ("p00", self.p00),
            ("qA", self.qa),
            ("qB", self.qb),
            ("q0A", self.q0a),
            ("q0B", self.q0b),
            ("q00", self.q00),
        ]
    }

    /// `(D1, D2, D3)`: the mass with photons in both modes, and its
    /// `2^{-(m+n)}` and `2^{-m} + 2^{-n}` weighted sums.
    pub fn d_values(&self) -> Result<[f64; 3]> {
        for (name, v) in self.fields() {
            if !v.is_finite() || !(-DATA_TOL..=1.0 + DATA_TOL).contains(&v) {
                return Err(Error::InfeasibleData(format!("{name} = {v} is not a probability")));
            }
        }
        let d1 = 1.0 - self.p0a - self.p0b + self.p00;
        let d2 = self.q00 - self.q0a - self.q0b + self.p00;
        let d3 = self.qa + self.qb - self.q0a - self.q0b - self.p0a - self.p0b + 2.0 * self.p00;
        let mut d = [d1, d2, d3];
        for (k, v) in d.iter_mut().enumerate() {
            if *v < -DATA_TOL {
                return Err(Error::InfeasibleData(format!("D{} = {v} is negative", k + 1)));
            }
            *v = v.max(0.0);
        }
        Ok(d)
    }

    /// Lower bound on `p_{1,1}`, valid for symmetric states.
    pub fn p11_lower(&self) -> Result<P11Bound> {
        let d = self.d_values()?;
        let raw = 12.0 * d[1] - 2.0 * d[2];
        Ok(P11Bound {
            value: raw.max(0.0),
            raw,
            applicable: raw >= 0.0,
            d,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::grid_sum;
    use crate::states::{coherent, thermal};
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn single_photon_vacuum_and_thermal() {
        let one = HbtSingleModeData::new(0.0, 0.5).unwrap();
        assert_eq!((one.p1_lower(), one.p1_upper()), (1.0, 1.0));

        let vac = HbtSingleModeData::new(1.0, 1.0).unwrap();
        assert_eq!((vac.p1_lower(), vac.p1_upper()), (0.0, 0.0));

        // thermal(1): q0 = 1 / (1 + nbar / 2)
        let th = HbtSingleModeData::from_distribution(&thermal(1.0, 80).unwrap()).unwrap();
        assert!(close(th.p0(), 0.5, 1e-15));
        assert!(close(th.q0(), 2.0 / 3.0, 1e-15));
        assert!(close(th.p1_lower(), 1.0 / 6.0, 1e-14));
        assert!(close(th.p1_upper(), 1.0 / 3.0, 1e-14));
    }

    #[test]
    fn rejects_unrealizable_pairs() {
        assert!(matches!(HbtSingleModeData::new(0.5, 0.4), Err(Error::InfeasibleData(_))));
        assert!(matches!(HbtSingleModeData::new(0.2, 0.7), Err(Error::InfeasibleData(_))));
        assert!(HbtSingleModeData::new(1.2, 1.0).is_err());
        assert!(HbtSingleModeData::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn lp_reproduces_closed_form() {
        for d in [thermal(1.0, 80).unwrap(), coherent(0.7, 80).unwrap(), PhotonDistribution::fock(3)] {
            let data = HbtSingleModeData::from_distribution(&d).unwrap();
            let lp = lp_p1_bounds(&data, LP_CUTOFF).unwrap();
            assert!(lp.certified);
            assert!(close(lp.lower, data.p1_lower(), 1e-8), "{} vs {}", lp.lower, data.p1_lower());
            assert!(close(lp.upper, data.p1_upper(), 1e-8), "{} vs {}", lp.upper, data.p1_upper());
        }
    }

    #[test]
    fn single_photon_pair() {
        let data = HbtTwoModeData::from_grid(&JointGrid::fock(1, 1));
        assert_eq!(data.p0a, 0.0);
        assert_eq!(data.qa, 0.5);
        assert_eq!(data.q00, 0.25);
        let b = data.p11_lower().unwrap();
        assert_eq!(b.d, [1.0, 0.25, 1.0]);
        assert_eq!(b.value, 1.0);
        assert!(b.applicable);
    }

    #[test]
    fn two_mode_vacuum() {
        let data = HbtTwoModeData::from_grid(&JointGrid::fock(0, 0));
        let b = data.p11_lower().unwrap();
        assert_eq!(b.d, [0.0, 0.0, 0.0]);
        assert_eq!(b.value, 0.0);
    }

    fn series(rows: &[Vec<f64>]) -> (f64, f64) {
        let h = |k: usize| 0.5f64.powi(k as i32);
        let d2 = grid_sum(rows, |m, n| if m > 0 && n > 0 { h(m + n) } else { 0.0 });
        let d3 = grid_sum(rows, |m, n| if m > 0 && n > 0 { h(m) + h(n) } else { 0.0 });
        (d2, d3)
    }

    #[test]
    fn thermal_product() {
        let t = thermal(1.0, 80).unwrap();
        let g = JointGrid::product(&t, &t, 29);
        let rows: Vec<Vec<f64>> = (0..30).map(|m| (0..30).map(|n| g.get(m, n)).collect()).collect();
        let (d2, d3) = series(&rows);
        let b = HbtTwoModeData::from_grid(&g).p11_lower().unwrap();
        assert!(close(b.d[1], d2, 1e-12));
        assert!(close(b.d[2], d3, 1e-12));
        assert!(close(g.get(1, 1), 1.0 / 16.0, 1e-15));
        assert!(b.value <= g.get(1, 1));
    }

    #[test]
    fn symmetrize() {
        let g = JointGrid::from_rows(vec![vec![0.1, 0.3], vec![0.0, 0.6]]).unwrap();
        assert!(!g.is_symmetric(1e-12));
        let s = g.symmetrized();
        assert!(s.is_symmetric(0.0));
        assert_eq!(s.get(0, 1), 0.15);
        assert_eq!(s.get(1, 1), 0.6);
    }

    #[test]
    fn negative_d_is_rejected() {
        let mut data = HbtTwoModeData::from_grid(&JointGrid::fock(1, 1));
        data.q0a = 0.3;
        assert!(matches!(data.p11_lower(), Err(Error::InfeasibleData(_))));
    }

    fn normalized(w: &[f64]) -> Vec<f64> {
        let s: f64 = w.iter().sum();
        w.iter().map(|x| x / s).collect()
    }

    proptest! {
        #[test]
        fn sandwich_and_lp_agreement(w in proptest::collection::vec(0.0f64..1.0, 2..=15)) {
            prop_assume!(w.iter().sum::<f64>() > 1e-3);
            let d = PhotonDistribution::from_probs(normalized(&w)).unwrap();
            let data = HbtSingleModeData::from_distribution(&d).unwrap();
            let p1 = d.get(1);
            prop_assert!(data.p1_lower() <= p1 + 1e-12);
            prop_assert!(p1 <= data.p1_upper() + 1e-12);
            let lp = lp_p1_bounds(&data, LP_CUTOFF).unwrap();
            prop_assert!(lp.certified);
            prop_assert!(close(lp.lower, data.p1_lower(), 1e-8));
            prop_assert!(close(lp.upper, data.p1_upper(), 1e-8));
        }

        #[test]
        fn symmetric_grids_respect_bound(
            size in 2usize..8,
            w in proptest::collection::vec(0.0f64..1.0, 64),
            sparse in proptest::collection::vec(any::<bool>(), 64),
        ) {
            let flat: Vec<f64> = (0..size * size)
                .map(|i| if sparse[i] { 0.0 } else { w[i] })
                .collect();
            prop_assume!(flat.iter().sum::<f64>() > 1e-3);
            let flat = normalized(&flat);
            let rows: Vec<Vec<f64>> = flat.chunks(size).map(<[f64]>::to_vec).collect();
            let g = JointGrid::from_rows(rows).unwrap().symmetrized();
            let rows: Vec<Vec<f64>> =
                (0..size).map(|m| (0..size).map(|n| g.get(m, n)).collect()).collect();
            let (d2, d3) = series(&rows);
            let b = HbtTwoModeData::from_grid(&g).p11_lower().unwrap();
            prop_assert!(close(b.d[1], d2, 1e-12));
            prop_assert!(close(b.d[2], d3, 1e-12));
            prop_assert!(b.value <= g.get(1, 1) + 1e-12, "{} > {}", b.value, g.get(1, 1));
        }
    }
}
