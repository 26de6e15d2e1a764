use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bound_target, ConstraintForm, Target};
use crate::detector::DetectorConfig;
use crate::error::{Error, Result};
use crate::states::StateFamily;

/// Cartesian grid of sweep parameters. Rows are produced with the target
/// varying fastest, then cutoff, efficiency, channel count, mean photon
/// number and family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub families: Vec<StateFamily>,
    pub nbars: Vec<f64>,
    pub channels: Vec<usize>,
    pub etas: Vec<f64>,
    pub cutoffs: Vec<usize>,
    pub targets: Vec<Target>,
    #[serde(default)]
    pub form: ConstraintForm,
}

#[derive(Debug, Clone, Copy)]
struct GridPoint {
    family: StateFamily,
    nbar: f64,
    channels: usize,
    eta: f64,
    cutoff: usize,
    target: Target,
}

impl SweepGrid {
    fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &family in &self.families {
            for &nbar in &self.nbars {
                for &channels in &self.channels {
                    for &eta in &self.etas {
                        for &cutoff in &self.cutoffs {
                            for &target in &self.targets {
                                out.push(GridPoint {
                                    family,
                                    nbar,
                                    channels,
                                    eta,
                                    cutoff,
                                    target,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.families.len()
            * self.nbars.len()
            * self.channels.len()
            * self.etas.len()
            * self.cutoffs.len()
            * self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One grid point. Failures are kept in `error` and leave the numeric
/// fields as NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub family: StateFamily,
    pub nbar: f64,
    pub channels: usize,
    pub eta: f64,
    pub cutoff: usize,
    pub target: String,
    pub z_min: f64,
    pub z_max: f64,
    pub true_value: f64,
    pub gap_min: f64,
    pub gap_max: f64,
    pub cutoff_conditional: bool,
    pub certified: bool,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn width(&self) -> f64 {
        self.z_max - self.z_min
    }
}

fn evaluate(p: GridPoint, form: ConstraintForm) -> SweepRow {
    let run = || -> Result<_> {
        let cfg = DetectorConfig::new(p.channels, p.eta)?;
        let dist = p.family.generate(p.nbar, p.cutoff)?;
        bound_target(&cfg, &dist, p.target, p.cutoff, form)
    };
    let mut row = SweepRow {
        family: p.family,
        nbar: p.nbar,
        channels: p.channels,
        eta: p.eta,
        cutoff: p.cutoff,
        target: p.target.to_string(),
        z_min: f64::NAN,
        z_max: f64::NAN,
        true_value: f64::NAN,
        gap_min: f64::NAN,
        gap_max: f64::NAN,
        cutoff_conditional: matches!(p.target, Target::MeanPhoton),
        certified: false,
        error: None,
    };
    match run() {
        Ok(r) => {
            row.z_min = r.z_min;
            row.z_max = r.z_max;
            row.true_value = r.true_value;
            row.gap_min = r.gap_min();
            row.gap_max = r.gap_max();
            row.cutoff_conditional = r.cutoff_conditional;
            row.certified = r.certified();
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Evaluates the whole grid and returns the rows in grid order.
pub fn sweep(grid: &SweepGrid, threads: usize) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(grid.len());
    sweep_with_sink(grid, threads, |r| rows.push(r.clone()))?;
    Ok(rows)
}

/// Evaluates the grid on up to `threads` workers (0 = all cores) and hands
/// rows to `sink` in grid order as soon as each batch completes.
pub fn sweep_with_sink(
    grid: &SweepGrid,
    threads: usize,
    mut sink: impl FnMut(&SweepRow),
) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let points = grid.points();
    let batch = pool.current_num_threads().max(1) * 4;
    for chunk in points.chunks(batch) {
        let rows: Vec<SweepRow> =
            pool.install(|| chunk.par_iter().map(|&p| evaluate(p, grid.form)).collect());
        rows.iter().for_each(&mut sink);
    }
    Ok(())
}
