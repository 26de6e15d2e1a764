use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{reduced_program, solve_checked, ConstraintForm};
use crate::detector::DetectorConfig;
use crate::error::{Error, Result};
use crate::linalg::{lift, Dd, Scalar};
use crate::lp::{LinearProgram, Sense};
use crate::states::PhotonDistribution;

pub const DEFAULT_ANGLES: usize = 100;

/// Points closer than this are merged.
const DEDUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportPoint {
    pub phi: f64,
    pub pj: f64,
    pub pk: f64,
}

/// Convex set of `(p_j, p_k)` pairs compatible with the click statistics,
/// given by its support points in angular order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub j: usize,
    pub k: usize,
    pub points: Vec<SupportPoint>,
    pub true_point: (f64, f64),
    pub certified: bool,
    pub worst_gap: f64,
}

impl Region {
    pub fn area(&self) -> f64 {
        polygon_area(&self.points)
    }

    /// `true` if `(x, y)` lies inside the support polygon up to `slack`.
    pub fn contains(&self, x: f64, y: f64, slack: f64) -> bool {
        let pts = &self.points;
        if pts.len() < 3 {
            return pts
                .iter()
                .any(|p| (p.pj - x).abs() <= slack && (p.pk - y).abs() <= slack)
                || segment_contains(pts, x, y, slack);
        }
        // counter-clockwise polygon: every edge keeps the point on its left
        (0..pts.len()).all(|i| {
            let a = pts[i];
            let b = pts[(i + 1) % pts.len()];
            let (ex, ey) = (b.pj - a.pj, b.pk - a.pk);
            let len = ex.hypot(ey);
            if len == 0.0 {
                return true;
            }
            (ex * (y - a.pk) - ey * (x - a.pj)) / len >= -slack
        })
    }
}

fn segment_contains(pts: &[SupportPoint], x: f64, y: f64, slack: f64) -> bool {
    if pts.len() != 2 {
        return false;
    }
    let (a, b) = (pts[0], pts[1]);
    let (ex, ey) = (b.pj - a.pj, b.pk - a.pk);
    let len2 = ex * ex + ey * ey;
    let t = (((x - a.pj) * ex + (y - a.pk) * ey) / len2).clamp(0.0, 1.0);
    let (cx, cy) = (a.pj + t * ex, a.pk + t * ey);
    (cx - x).hypot(cy - y) <= slack
}

/// Shoelace area of the polygon through `points`.
pub fn polygon_area(points: &[SupportPoint]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..points.len() {
        let a = points[i];
        let b = points[(i + 1) % points.len()];
        s += a.pj * b.pk - b.pj * a.pk;
    }
    0.5 * s.abs()
}

/// Support points of the feasible `(p_j, p_k)` set, found by maximizing
/// `p_j cos(phi) + p_k sin(phi)` for `angles` equally spaced `phi`.
pub fn feasibility_region(
    cfg: &DetectorConfig,
    dist: &PhotonDistribution,
    j: usize,
    k: usize,
    angles: usize,
    cutoff: usize,
    form: ConstraintForm,
) -> Result<Region> {
    if j == k {
        return Err(Error::InvalidParameter("region needs two distinct indices".into()));
    }
    if angles < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 angles, got {angles}"
        )));
    }
    for idx in [j, k] {
        if idx > cutoff {
            return Err(Error::IndexOutOfRange { index: idx, cutoff });
        }
    }
    let (a, b) = reduced_program(cfg, dist, cutoff, form);
    let base = LinearProgram::new(vec![Dd::zero(); cutoff + 1], a, b, Sense::Maximize)?;

    let mut points: Vec<SupportPoint> = Vec::with_capacity(angles);
    let mut certified = true;
    let mut worst_gap = 0.0f64;
    for i in 0..angles {
        let phi = 2.0 * PI * i as f64 / angles as f64;
        let mut z = vec![0.0; cutoff + 1];
        z[j] = phi.cos();
        z[k] = phi.sin();
        let lp = base.with_objective(lift(&z))?;
        let (sol, cert) = solve_checked(&lp)?;
        certified &= cert.passed();
        worst_gap = worst_gap.max(cert.gap);
        let p = SupportPoint {
            phi,
            pj: sol.primal[j].to_f64(),
            pk: sol.primal[k].to_f64(),
        };
        let dup = points
            .last()
            .is_some_and(|q| (q.pj - p.pj).hypot(q.pk - p.pk) < DEDUP_TOL);
        if !dup {
            points.push(p);
        }
    }
    while points.len() > 1 {
        let (f, l) = (points[0], points[points.len() - 1]);
        if (f.pj - l.pj).hypot(f.pk - l.pk) < DEDUP_TOL {
            points.pop();
        } else {
            break;
        }
    }
    Ok(Region {
        j,
        k,
        points,
        true_point: (dist.get(j), dist.get(k)),
        certified,
        worst_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::thermal;

    #[test]
    fn rejects_bad_arguments() {
        let c = DetectorConfig::new(4, 1.0).unwrap();
        let d = thermal(1.0, 20).unwrap();
        assert!(feasibility_region(&c, &d, 2, 2, 10, 20, ConstraintForm::Vacuum).is_err());
        assert!(feasibility_region(&c, &d, 1, 2, 2, 20, ConstraintForm::Vacuum).is_err());
        assert!(feasibility_region(&c, &d, 1, 21, 10, 20, ConstraintForm::Vacuum).is_err());
    }

    #[test]
    fn point_identified_system_collapses() {
        let c = DetectorConfig::new(10, 1.0).unwrap();
        let d = thermal(1.0, 8).unwrap();
        let r = feasibility_region(&c, &d, 2, 3, 4, 8, ConstraintForm::Vacuum).unwrap();
        assert_eq!(r.points.len(), 1);
        assert!(r.certified);
        assert_eq!(r.area(), 0.0);
    }

    #[test]
    fn true_pair_inside_hull() {
        let c = DetectorConfig::new(10, 1.0).unwrap();
        let d = thermal(2.0, 80).unwrap();
        for (j, k) in [(5, 6), (6, 8)] {
            let r = feasibility_region(&c, &d, j, k, DEFAULT_ANGLES, 80, ConstraintForm::Vacuum)
                .unwrap();
            assert!(r.certified);
            assert!(r.points.len() >= 3);
            assert!(r.area() > 0.0);
            let (x, y) = r.true_point;
            assert!(r.contains(x, y, 1e-9), "({j},{k})");
            assert!(!r.contains(x + 0.5, y, 1e-9));
        }
    }

    #[test]
    fn square_area() {
        let pts: Vec<SupportPoint> = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
            .iter()
            .map(|&(pj, pk)| SupportPoint { phi: 0.0, pj, pk })
            .collect();
        assert_eq!(polygon_area(&pts), 1.0);
    }
}
