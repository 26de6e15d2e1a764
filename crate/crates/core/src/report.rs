//! Plain tables for CSV output.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analytic::{HbtSingleModeData, HbtTwoModeData, LpP1Bounds, P11Bound};
use crate::bounds::{BoundResult, Region, SweepRow};
use crate::detector::{ClickStatistics, VacuumProbabilities};
use crate::estimator::MeanPhotonEstimator;
use crate::linalg::Matrix;
use crate::states::PhotonDistribution;

/// Significant digits of numbers in CSV output.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Bool(bool),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format_sig(*v, SIGNIFICANT_DIGITS),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// `v` rounded to `digits` significant digits, without trailing zeros.
/// Fixed notation is used for decimal exponents in `-5..digits`.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let _ = writeln!(out, "{}", csv_line(row));
        }
        out
    }
}

/// One CSV record without the line break.
pub fn csv_line(row: &[Cell]) -> String {
    row.iter().map(Cell::render).collect::<Vec<_>>().join(",")
}

macro_rules! row {
    ($($v:expr),* $(,)?) => { vec![$(Cell::from($v)),*] };
}

pub fn distribution_table(dist: &PhotonDistribution) -> Table {
    let mut t = Table::new(&["n", "p_n"]);
    for (n, &p) in dist.probs().iter().enumerate() {
        t.push(row![n, p]);
    }
    t
}

/// Long format `m,n,C_mn`.
pub fn click_matrix_table(c: &Matrix) -> Table {
    let mut t = Table::new(&["m", "n", "C_mn"]);
    for m in 0..c.rows() {
        for n in 0..c.cols() {
            t.push(row![m, n, c.get(m, n)]);
        }
    }
    t
}

pub fn clicks_table(clicks: &ClickStatistics) -> Table {
    let mut t = Table::new(&["m", "c_m"]);
    for (m, &c) in clicks.as_slice().iter().enumerate() {
        t.push(row![m, c]);
    }
    t
}

pub fn vacuum_table(vp: &VacuumProbabilities) -> Table {
    let mut t = Table::new(&["k", "T_k", "q_0k"]);
    for (k, (&tk, &q)) in vp.transmittances.iter().zip(&vp.q).enumerate() {
        t.push(row![k, tk, q]);
    }
    t
}

pub const BOUNDS_COLUMNS: [&str; 14] = [
    "family",
    "nbar",
    "M",
    "eta",
    "N",
    "target",
    "z_min",
    "z_max",
    "true_value",
    "gap_min",
    "gap_max",
    "cutoff_conditional",
    "certified",
    "error",
];

/// Rows of [`BOUNDS_COLUMNS`]; `family` is the state label and `nbar` is NaN
/// for explicit distributions.
pub fn bounds_table<'a>(family: &str, nbar: f64, results: impl IntoIterator<Item = &'a BoundResult>) -> Table {
    let mut t = Table::new(&BOUNDS_COLUMNS);
    for r in results {
        t.push(row![
            family,
            nbar,
            r.detector.channels(),
            r.detector.efficiency(),
            r.cutoff,
            r.target.as_str(),
            r.z_min,
            r.z_max,
            r.true_value,
            r.gap_min(),
            r.gap_max(),
            r.cutoff_conditional,
            r.certified(),
            "",
        ]);
    }
    t
}

pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(&BOUNDS_COLUMNS);
    for r in rows {
        t.push(sweep_row(r));
    }
    t
}

pub fn sweep_row(r: &SweepRow) -> Vec<Cell> {
    row![
        r.family.name(),
        r.nbar,
        r.channels,
        r.eta,
        r.cutoff,
        r.target.as_str(),
        r.z_min,
        r.z_max,
        r.true_value,
        r.gap_min,
        r.gap_max,
        r.cutoff_conditional,
        r.certified,
        r.error.clone().unwrap_or_default(),
    ]
}

pub fn region_table(region: &Region) -> Table {
    let mut t = Table::new(&["phi", "pj", "pk"]);
    for p in &region.points {
        t.push(row![p.phi, p.pj, p.pk]);
    }
    t
}

pub fn estimator_d_table(est: &MeanPhotonEstimator) -> Table {
    let mut t = Table::new(&["m", "D_m"]);
    for (m, &d) in est.d_coeffs().iter().enumerate() {
        t.push(row![m, d]);
    }
    t
}

pub fn estimator_g_table(est: &MeanPhotonEstimator) -> Table {
    let mut t = Table::new(&["n", "G_n", "n_minus_G_n"]);
    for (n, &g) in est.g_coeffs().iter().enumerate() {
        t.push(row![n, g, n as f64 - g]);
    }
    t
}

pub fn hbt1_table(data: &HbtSingleModeData, lp: Option<&LpP1Bounds>) -> Table {
    let mut t = Table::new(&["p0", "q0", "p1_lower", "p1_upper", "lp_lower", "lp_upper"]);
    let (lo, hi) = lp.map_or((f64::NAN, f64::NAN), |b| (b.lower, b.upper));
    t.push(row![data.p0(), data.q0(), data.p1_lower(), data.p1_upper(), lo, hi]);
    t
}

pub fn hbt2_table(data: &HbtTwoModeData, b: &P11Bound) -> Table {
    let mut t = Table::new(&[
        "p0A", "p0B", "p00", "qA", "qB", "q0A", "q0B", "q00", "D1", "D2", "D3", "raw", "p11_lower",
        "applicable",
    ]);
    t.push(row![
        data.p0a, data.p0b, data.p00, data.qa, data.qb, data.q0a, data.q0b, data.q00, b.d[0], b.d[1],
        b.d[2], b.raw, b.value, b.applicable,
    ]);
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.0, 12), "0");
        assert_eq!(format_sig(1.0, 12), "1");
        assert_eq!(format_sig(-2.5, 12), "-2.5");
        assert_eq!(format_sig(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_sig(14.95, 12), "14.95");
        assert_eq!(format_sig(6.94e-5, 12), "0.0000694");
        assert_eq!(format_sig(6.94e-6, 12), "6.94e-6");
        assert_eq!(format_sig(1.234e-7, 12), "1.234e-7");
        assert_eq!(format_sig(123456789012345.0, 12), "1.23456789012e14");
        assert_eq!(format_sig(f64::NAN, 12), "nan");
    }

    #[test]
    fn csv_quoting() {
        let mut t = Table::new(&["a", "b"]);
        t.push(row![1usize, "x,y"]);
        t.push(row![0.5, true]);
        assert_eq!(t.to_csv(), "a,b\n1,\"x,y\"\n0.5,true\n");
    }
}
