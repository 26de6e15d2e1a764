//! Acceptance checks with fixed tolerances, seeds and time limits.
//!
//! Each check returns a [`CheckOutcome`] instead of panicking so that the
//! whole suite can be reported line by line.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analytic::{lp_p1_bounds, HbtSingleModeData, HbtTwoModeData, JointGrid, LP_CUTOFF};
use crate::bounds::{
    bound_target, mean_photon_bounds, probability_bounds, sweep, wigner_origin_bounds, BoundResult,
    ConstraintForm, SweepGrid, Target,
};
use crate::detector::{click_statistics, clicks_from_vacuum, vacuum_probabilities, DetectorConfig};
use crate::error::Result;
use crate::estimator::build_estimator;
use crate::lp::{self, Status};
use crate::oracle::{enumerate_vertices, random_feasible_lp};
use crate::states::{coherent, subtracted_squeezed, thermal, PhotonDistribution, StateFamily};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub limit: Option<Duration>,
}

impl CheckOutcome {
    fn new(id: u8, name: &'static str, limit: Option<Duration>) -> Self {
        Self {
            id,
            name,
            passed: true,
            detail: String::new(),
            elapsed: Duration::ZERO,
            limit,
        }
    }

    fn check(&mut self, ok: bool, what: impl fmt::Display) {
        self.passed &= ok;
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(&what.to_string());
        if !ok {
            self.detail.push_str(" [FAILED]");
        }
    }

    fn fail(&mut self, what: impl fmt::Display) {
        self.check(false, what);
    }

    fn finish(mut self, start: Instant) -> Self {
        self.elapsed = start.elapsed();
        if let Some(limit) = self.limit {
            let ok = self.elapsed < limit;
            self.check(ok, format!("time {:.3?} < {:?}", self.elapsed, limit));
        }
        self
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {}: {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

fn sec(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn ms(m: u64) -> Option<Duration> {
    Some(Duration::from_millis(m))
}

const FORM: ConstraintForm = ConstraintForm::Vacuum;
const CUTOFF: usize = 80;

fn cfg(m: usize, eta: f64) -> DetectorConfig {
    DetectorConfig::new(m, eta).expect("valid detector")
}

/// Runs `body`, turning an error into a failed check.
fn guarded(mut out: CheckOutcome, body: impl FnOnce(&mut CheckOutcome) -> Result<()>) -> CheckOutcome {
    let start = Instant::now();
    if let Err(e) = body(&mut out) {
        out.fail(format!("error: {e}"));
    }
    out.finish(start)
}

pub fn state_generators() -> CheckOutcome {
    guarded(CheckOutcome::new(1, "state generators", ms(1)), |o| {
        let th = thermal(2.0, CUTOFF)?.get(11);
        let co = coherent(2.0, CUTOFF)?.get(11);
        o.check((th - 0.0039).abs() <= 5e-5, format!("thermal(2) p11 = {th:.6} (0.0039 +- 5e-5)"));
        o.check(
            (co - 6.94e-6).abs() <= 5e-9,
            format!("coherent(2) p11 = {co:.6e} (6.94e-6 +- 5e-9)"),
        );
        Ok(())
    })
}

fn headline_table(form: ConstraintForm) -> Result<Vec<BoundResult>> {
    let c = cfg(10, 1.0);
    let d = thermal(2.0, CUTOFF)?;
    let mut out = (0..=14)
        .map(|n| probability_bounds(&c, &d, n, CUTOFF, form))
        .collect::<Result<Vec<_>>>()?;
    out.push(mean_photon_bounds(&c, &d, CUTOFF, form)?);
    Ok(out)
}

pub fn headline_widths() -> CheckOutcome {
    guarded(CheckOutcome::new(2, "thermal(2) widths at M=10", sec(10)), |o| {
        let t = headline_table(FORM)?;
        let (dp6, dn) = (t[6].width(), t[15].width());
        o.check(dp6 > 0.06, format!("dp6 = {dp6:.6} > 0.06"));
        o.check(dn < 0.01, format!("dnbar = {dn:.6} < 0.01"));
        let enclosed = t.iter().all(|r| r.contains(r.true_value, 1e-8));
        o.check(enclosed, "true values enclosed");
        Ok(())
    })
}

pub fn estimator_coefficients() -> CheckOutcome {
    guarded(CheckOutcome::new(3, "mean-photon estimator", ms(100)), |o| {
        let est = build_estimator(&cfg(10, 1.0), CUTOFF)?;
        let g = est.g_coeffs();
        o.check((g[15] - 14.95).abs() <= 0.01, format!("G15 = {:.6} (14.95 +- 0.01)", g[15]));
        let worst = (0..=10).map(|n| (g[n] - n as f64).abs()).fold(0.0, f64::max);
        o.check(worst <= 1e-8, format!("max |G_n - n| for n <= 10 = {worst:.2e} (<= 1e-8)"));
        Ok(())
    })
}

/// `z_max` of the Wigner function at the origin for subtracted squeezed
/// vacuum at `4.9, 5.0, ..., 5.4`.
fn wigner_frontier() -> Result<Vec<(f64, BoundResult)>> {
    let c = cfg(10, 1.0);
    (0..=5)
        .map(|i| {
            let nbar = 4.9 + 0.1 * i as f64;
            let d = subtracted_squeezed(nbar, CUTOFF)?;
            Ok((nbar, wigner_origin_bounds(&c, &d, CUTOFF, FORM)?))
        })
        .collect()
}

pub fn wigner_negativity() -> CheckOutcome {
    guarded(CheckOutcome::new(4, "Wigner negativity frontier", sec(30)), |o| {
        let rows = wigner_frontier()?;
        let (first, last) = (&rows[0], &rows[rows.len() - 1]);
        o.check(first.1.z_max < 0.0, format!("z_max(4.9) = {:.4e} < 0", first.1.z_max));
        o.check(last.1.z_max > 0.0, format!("z_max(5.4) = {:.4e} > 0", last.1.z_max));
        let k = rows.iter().position(|(_, r)| r.z_max > 0.0);
        match k {
            Some(k) if k > 0 => {
                let (a, b) = (&rows[k - 1], &rows[k]);
                let single = rows[k..].iter().all(|(_, r)| r.z_max > 0.0);
                let x = a.0 - a.1.z_max * (b.0 - a.0) / (b.1.z_max - a.1.z_max);
                o.check(
                    single && a.0 >= 5.0 - 1e-12 && b.0 <= 5.3 + 1e-12,
                    format!("crossing in [{:.1}, {:.1}] (interpolated {x:.3}) within [5.0, 5.3]", a.0, b.0),
                );
            }
            _ => o.fail("no sign change of z_max"),
        }
        Ok(())
    })
}

fn trend_sweeps() -> Vec<SweepGrid> {
    let nbars = |lo: f64| -> Vec<f64> { (1..=12).map(|i| 0.5 * i as f64).filter(|&v| v > lo).collect() };
    let mut grids: Vec<SweepGrid> = StateFamily::ALL
        .iter()
        .map(|&f| SweepGrid {
            families: vec![f],
            nbars: nbars(f.min_nbar()),
            channels: vec![10],
            etas: vec![1.0],
            cutoffs: vec![CUTOFF],
            targets: vec![Target::Probability(5)],
            form: FORM,
        })
        .collect();
    grids.push(SweepGrid {
        families: vec![StateFamily::Thermal],
        nbars: vec![2.0],
        channels: (2..=30).collect(),
        etas: vec![1.0],
        cutoffs: vec![CUTOFF],
        targets: (0..=8).map(Target::Probability).collect(),
        form: FORM,
    });
    grids.push(SweepGrid {
        families: vec![StateFamily::Thermal, StateFamily::Squeezed],
        nbars: vec![2.0],
        channels: vec![10],
        etas: vec![0.75, 0.5],
        cutoffs: vec![CUTOFF],
        targets: (0..=14).map(Target::Probability).collect(),
        form: FORM,
    });
    grids
}

pub fn duality_certificates(threads: usize) -> CheckOutcome {
    guarded(CheckOutcome::new(5, "duality certificates", None), |o| {
        let mut results: Vec<(bool, f64)> = headline_table(FORM)?
            .iter()
            .chain(wigner_frontier()?.iter().map(|(_, r)| r))
            .map(|r| (r.certified(), r.gap_min().max(r.gap_max())))
            .collect();
        for g in trend_sweeps() {
            for row in sweep(&g, threads)? {
                if let Some(e) = &row.error {
                    o.fail(format!("{} nbar={} M={}: {e}", row.family, row.nbar, row.channels));
                }
                results.push((row.certified, row.gap_min.max(row.gap_max)));
            }
        }
        let failed = results.iter().filter(|r| !r.0).count();
        let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
        o.check(
            failed == 0 && worst <= 1e-7,
            format!("{} min/max pairs, {failed} uncertified, max gap {worst:.2e} (<= 1e-7)", results.len()),
        );
        Ok(())
    })
}

pub fn oracle_equivalence(seed: u64) -> CheckOutcome {
    guarded(CheckOutcome::new(6, "simplex vs vertex enumeration", sec(5)), |o| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(6));
        let mut worst = 0.0f64;
        let mut bad = 0;
        for _ in 0..200 {
            let rows = rng.gen_range(1..=4);
            let cols = rng.gen_range(rows + 1..=8);
            let lp = random_feasible_lp(&mut rng, rows, cols);
            let sol = lp::solve(&lp)?;
            match enumerate_vertices(&lp) {
                Some(v) if sol.status == Status::Optimal => worst = worst.max((sol.optimum - v).abs()),
                _ => bad += 1,
            }
        }
        o.check(bad == 0 && worst <= 1e-9, format!("200 programs, max |diff| {worst:.2e} (<= 1e-9), {bad} mismatched status"));
        Ok(())
    })
}

pub fn enclosure_suite(seed: u64) -> CheckOutcome {
    guarded(CheckOutcome::new(7, "enclosure and channel-count trend", sec(600)), |o| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(7));
        let channels = [4usize, 10, 16];
        let (mut escaped, mut widened, mut uncertified) = (0, 0, 0);
        for _ in 0..100 {
            let family = StateFamily::ALL[rng.gen_range(0..4)];
            let lo = family.min_nbar().max(0.5);
            let nbar = rng.gen_range(lo..5.0f64).max(lo + 1e-3);
            let eta = [0.5, 0.75, 1.0][rng.gen_range(0..3)];
            let d = family.generate(nbar, CUTOFF)?;
            let mut widths = [[0.0; 15]; 3];
            for (j, &m) in channels.iter().enumerate() {
                let c = cfg(m, eta);
                for n in 0..=14 {
                    let r = probability_bounds(&c, &d, n, CUTOFF, FORM)?;
                    escaped += usize::from(!r.contains(d.get(n), 1e-8));
                    uncertified += usize::from(!r.certified());
                    widths[j][n] = r.width();
                }
            }
            for n in 0..=14 {
                widened += usize::from(widths[1][n] > widths[0][n] + 1e-9);
                widened += usize::from(widths[2][n] > widths[1][n] + 1e-9);
            }
        }
        o.check(escaped == 0, format!("{escaped} of 4500 true p_n outside bounds"));
        o.check(widened == 0, format!("{widened} width increases along M = 4, 10, 16"));
        o.check(uncertified == 0, format!("{uncertified} uncertified"));
        Ok(())
    })
}

fn random_distribution(rng: &mut impl Rng) -> Result<PhotonDistribution> {
    let len = rng.gen_range(2..=15);
    let w: Vec<f64> = (0..len)
        .map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..1.0) })
        .collect();
    let s: f64 = w.iter().sum::<f64>().max(1e-300);
    if s < 1e-3 {
        return Ok(PhotonDistribution::fock(1));
    }
    PhotonDistribution::from_probs(w.iter().map(|x| x / s).collect())
}

fn random_symmetric_grid(rng: &mut impl Rng) -> Result<JointGrid> {
    let size = rng.gen_range(2..=8);
    let flat: Vec<f64> = (0..size * size)
        .map(|_| if rng.gen_bool(0.4) { 0.0 } else { rng.gen_range(0.0..1.0) })
        .collect();
    let s: f64 = flat.iter().sum();
    if s < 1e-3 {
        return Ok(JointGrid::fock(1, 1));
    }
    let rows = flat.chunks(size).map(|r| r.iter().map(|x| x / s).collect()).collect();
    Ok(JointGrid::from_rows(rows)?.symmetrized())
}

pub fn analytic_vs_lp(seed: u64) -> CheckOutcome {
    guarded(CheckOutcome::new(8, "closed-form HBT bounds", None), |o| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(8));
        let (mut worst, mut uncertified, mut outside) = (0.0f64, 0, 0);
        for i in 0..1000 {
            let d = random_distribution(&mut rng)?;
            let data = HbtSingleModeData::from_distribution(&d)?;
            let p1 = d.get(1);
            outside += usize::from(p1 < data.p1_lower() - 1e-12 || p1 > data.p1_upper() + 1e-12);
            if i < 100 {
                let lp = lp_p1_bounds(&data, LP_CUTOFF)?;
                uncertified += usize::from(!lp.certified);
                worst = worst
                    .max((lp.lower - data.p1_lower()).abs())
                    .max((lp.upper - data.p1_upper()).abs());
            }
        }
        o.check(
            worst <= 1e-8 && uncertified == 0,
            format!("100 distributions, max |closed form - LP| {worst:.2e} (<= 1e-8)"),
        );
        o.check(outside == 0, format!("{outside} of 1000 p1 outside [lower, upper]"));

        let mut violated = 0;
        for _ in 0..100 {
            let g = random_symmetric_grid(&mut rng)?;
            let b = HbtTwoModeData::from_grid(&g).p11_lower()?;
            violated += usize::from(b.value > g.get(1, 1) + 1e-12);
        }
        o.check(violated == 0, format!("{violated} of 100 symmetric grids violate p11 bound"));
        let pair = HbtTwoModeData::from_grid(&JointGrid::fock(1, 1)).p11_lower()?;
        o.check(pair.value == 1.0, format!("|1,1> bound = {}", pair.value));
        Ok(())
    })
}

pub fn representation_equivalence() -> CheckOutcome {
    guarded(CheckOutcome::new(9, "click and vacuum representations", None), |o| {
        let a = headline_table(ConstraintForm::Click)?;
        let b = headline_table(ConstraintForm::Vacuum)?;
        let worst = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x.z_min - y.z_min).abs().max((x.z_max - y.z_max).abs()))
            .fold(0.0, f64::max);
        o.check(worst <= 1e-7, format!("max bound difference {worst:.2e} (<= 1e-7)"));

        let mut gap = 0.0f64;
        for family in StateFamily::ALL {
            for nbar in [1.5, 3.0, 5.0] {
                let d = family.generate(nbar, CUTOFF)?;
                for m in [1, 4, 10, 16] {
                    for eta in [0.5, 0.9, 1.0] {
                        let c = cfg(m, eta);
                        let direct = click_statistics(&c, &d);
                        let via = clicks_from_vacuum(&vacuum_probabilities(&c, &d), &c)?;
                        for (x, y) in direct.as_slice().iter().zip(via.as_slice()) {
                            gap = gap.max((x - y).abs());
                        }
                    }
                }
            }
        }
        o.check(gap <= 1e-9, format!("click statistics routes differ by {gap:.2e} (<= 1e-9)"));
        Ok(())
    })
}

pub fn cutoff_behavior() -> CheckOutcome {
    guarded(CheckOutcome::new(10, "cutoff saturation", None), |o| {
        let c = cfg(10, 1.0);
        let at = |n: usize, target: Target| -> Result<BoundResult> {
            bound_target(&c, &thermal(2.0, n)?, target, n, FORM)
        };
        for k in 3..=5 {
            let (w80, w120) = (at(80, Target::Probability(k))?.width(), at(120, Target::Probability(k))?.width());
            let d = (w120 - w80).abs();
            o.check(d < 1e-4, format!("p{k} width change {d:.2e} (< 1e-4)"));
        }
        let (u80, u160) = (at(80, Target::MeanPhoton)?.z_max, at(160, Target::MeanPhoton)?.z_max);
        o.check(u160 > u80, format!("nbar upper bound {u80:.6} (N=80) < {u160:.6} (N=160)"));
        Ok(())
    })
}

/// All checks in order, handing each outcome to `report` as it completes.
/// `threads` is the sweep parallelism (0 = all cores); `seed` offsets the
/// seeds of the randomized checks, 0 being the reference run.
pub fn run_all(threads: usize, seed: u64, mut report: impl FnMut(&CheckOutcome)) -> Vec<CheckOutcome> {
    let checks: [&dyn Fn() -> CheckOutcome; 10] = [
        &state_generators,
        &headline_widths,
        &estimator_coefficients,
        &wigner_negativity,
        &|| duality_certificates(threads),
        &|| oracle_equivalence(seed),
        &|| enclosure_suite(seed),
        &|| analytic_vs_lp(seed),
        &representation_equivalence,
        &cutoff_behavior,
    ];
    checks
        .iter()
        .map(|check| {
            let out = check();
            report(&out);
            out
        })
        .collect()
}
