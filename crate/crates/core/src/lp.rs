//! Dense two-phase primal simplex with Bland's anti-cycling rule, and an
//! independent checker for the optimality certificate it returns.
//!
//! Problems have the equality form
//!
//! ```text
//! minimize / maximize  z . x
//! subject to           A x = b,  x >= 0
//! ```
//!
//! The basis matrix is refactorized from the original data at every pivot,
//! so rounding does not accumulate across iterations. Instances here are
//! tiny (tens of rows, about a hundred columns) which makes this cheap.
//! The solver is generic over [`Scalar`]; the bounds module runs it in
//! double-double arithmetic.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, lower, Lu, Matrix, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Smallest pivot element accepted in the ratio test.
    pub pivot: f64,
    /// Primal feasibility (phase-1 residual, `|Ax - b|`).
    pub feasibility: f64,
    /// Duality gap accepted by the certificate check.
    pub gap: f64,
    /// Reduced-cost threshold for entering variables.
    pub optimality: f64,
    /// Primal nonnegativity slack accepted by the certificate check.
    pub nonnegativity: f64,
    /// Dual feasibility slack accepted by the certificate check.
    pub dual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            pivot: 1e-10,
            feasibility: 1e-8,
            gap: 1e-7,
            optimality: 1e-10,
            nonnegativity: 1e-9,
            dual: 1e-8,
        }
    }
}

impl Tolerances {
    /// Pivot and optimality thresholds tightened for a more precise scalar
    /// type: the pivot floor by the full precision gain, the reduced-cost
    /// threshold by its square root. Certificate tolerances are unchanged.
    pub fn for_scalar<T: Scalar>(self) -> Self {
        let f = (T::EPSILON / f64::EPSILON).sqrt();
        Self {
            pivot: self.pivot * f * f,
            optimality: self.optimality * f,
            ..self
        }
    }
}

const MAX_ITERATIONS: usize = 100_000;
const SINGULAR_TOL: f64 = 1e-300;

/// Equality-form LP over the scalar type `T`. With `T = Dd` the solver
/// works in double-double precision throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T = f64> {
    objective: Vec<T>,
    constraints: Matrix<T>,
    rhs: Vec<T>,
    sense: Sense,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(objective: Vec<T>, constraints: Matrix<T>, rhs: Vec<T>, sense: Sense) -> Result<Self> {
        if objective.len() != constraints.cols() {
            return Err(Error::DimensionMismatch {
                expected: constraints.cols(),
                got: objective.len(),
            });
        }
        if rhs.len() != constraints.rows() {
            return Err(Error::DimensionMismatch {
                expected: constraints.rows(),
                got: rhs.len(),
            });
        }
        if constraints.rows() == 0 || constraints.cols() == 0 {
            return Err(Error::InvalidParameter("empty linear program".into()));
        }
        if !constraints.is_finite()
            || !objective.iter().all(|v| v.is_finite())
            || !rhs.iter().all(|v| v.is_finite())
        {
            return Err(Error::InvalidParameter("non-finite LP data".into()));
        }
        Ok(Self {
            objective,
            constraints,
            rhs,
            sense,
        })
    }

    pub fn objective(&self) -> &[T] {
        &self.objective
    }

    pub fn constraints(&self) -> &Matrix<T> {
        &self.constraints
    }

    pub fn rhs(&self) -> &[T] {
        &self.rhs
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn with_sense(&self, sense: Sense) -> Self {
        Self {
            sense,
            ..self.clone()
        }
    }

    pub fn with_objective(&self, objective: Vec<T>) -> Result<Self> {
        Self::new(objective, self.constraints.clone(), self.rhs.clone(), self.sense)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
        })
    }
}

/// Solver output. Primal and dual vectors stay in the solver's scalar type:
/// on badly conditioned programs the duals reach `1e12` and beyond, and
/// rounding them to `f64` alone would break dual feasibility.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T = f64> {
    pub status: Status,
    /// Objective value `z . x` in the problem's own sense.
    pub optimum: f64,
    pub primal: Vec<T>,
    /// Dual multipliers for the equality rows, in the problem's own sense:
    /// `y . b` equals the optimum at optimality.
    pub dual: Vec<T>,
    pub duality_gap: f64,
    /// Final basis; indices `>= primal.len()` are artificial columns left on
    /// redundant rows.
    pub basis: Vec<usize>,
    pub iterations: usize,
    /// Phase-1 residual when the problem turned out infeasible.
    pub infeasibility: f64,
}

impl<T: Scalar> LpSolution<T> {
    pub fn primal_f64(&self) -> Vec<f64> {
        lower(&self.primal)
    }

    pub fn dual_f64(&self) -> Vec<f64> {
        lower(&self.dual)
    }

    pub fn into_result(self) -> Result<Self> {
        match self.status {
            Status::Optimal => Ok(self),
            Status::Infeasible => Err(Error::Infeasible {
                residual: self.infeasibility,
            }),
            Status::Unbounded => Err(Error::Unbounded),
        }
    }
}

struct Simplex<'a, T> {
    a: &'a Matrix<T>,
    b: Vec<T>,
    row_sign: Vec<T>,
    m: usize,
    n: usize,
    basis: Vec<usize>,
    tol: Tolerances,
    iterations: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

fn max_abs<T: Scalar>(v: &[T]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.to_f64().abs()))
}

impl<'a, T: Scalar> Simplex<'a, T> {
    fn new(lp: &'a LinearProgram<T>, tol: Tolerances) -> Self {
        let a = &lp.constraints;
        let m = a.rows();
        let n = a.cols();
        let row_sign: Vec<T> = lp
            .rhs
            .iter()
            .map(|&v| T::from_f64(if v < T::zero() { -1.0 } else { 1.0 }))
            .collect();
        let b = lp.rhs.iter().zip(&row_sign).map(|(&v, &s)| v * s).collect();
        Self {
            a,
            b,
            row_sign,
            m,
            n,
            basis: (n..n + m).collect(),
            tol,
            iterations: 0,
        }
    }

    fn column(&self, j: usize) -> Vec<T> {
        if j < self.n {
            (0..self.m)
                .map(|i| self.a.get(i, j) * self.row_sign[i])
                .collect()
        } else {
            let mut e = vec![T::zero(); self.m];
            e[j - self.n] = T::one();
            e
        }
    }

    fn factor(&self) -> Result<Lu<T>> {
        let m = self.m;
        let mut data = vec![T::zero(); m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            for (i, v) in self.column(j).into_iter().enumerate() {
                data[i * m + k] = v;
            }
        }
        Lu::factorize(data, m, SINGULAR_TOL)
    }

    fn run_phase(&mut self, cost: &dyn Fn(usize) -> T) -> Result<PhaseEnd> {
        loop {
            if self.iterations >= MAX_ITERATIONS {
                return Err(Error::InvalidParameter(format!(
                    "simplex exceeded {MAX_ITERATIONS} iterations"
                )));
            }
            let lu = self.factor()?;
            let xb = lu.solve(&self.b);
            let cb: Vec<T> = self.basis.iter().map(|&j| cost(j)).collect();
            let y = lu.solve_transpose(&cb);

            // Bland: lowest-index improving column
            let mut in_basis = vec![false; self.n];
            for &j in &self.basis {
                if j < self.n {
                    in_basis[j] = true;
                }
            }
            // reduced costs below the rounding level of y.A_j do not count
            let entering = (0..self.n).filter(|&j| !in_basis[j]).find(|&j| {
                let cj = cost(j);
                let col = self.column(j);
                let scale: f64 = y
                    .iter()
                    .zip(&col)
                    .map(|(&a, &b)| (a * b).to_f64().abs())
                    .sum();
                let d = (cj - dot(&y, &col)).to_f64();
                let noise = 1e3 * T::EPSILON * scale;
                d < -(self.tol.optimality * cj.to_f64().abs().max(1.0) + noise)
            });
            let Some(q) = entering else {
                return Ok(PhaseEnd::Optimal);
            };

            let u = lu.solve(&self.column(q));
            let pivot_floor = self.tol.pivot * max_abs(&u).max(1.0);
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.m {
                if u[i].to_f64() <= pivot_floor {
                    continue;
                }
                let xi = if xb[i] < T::zero() { T::zero() } else { xb[i] };
                let ratio = xi / u[i];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        let diff = (ratio - best).to_f64().abs();
                        let tie = diff <= 1e-12 * best.to_f64().abs().max(1e-300);
                        if ratio < best && !tie {
                            Some((i, ratio))
                        } else if tie && self.basis[i] < self.basis[r] {
                            Some((i, if ratio < best { ratio } else { best }))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
            let Some((r, _)) = leave else {
                return Ok(PhaseEnd::Unbounded);
            };
            self.basis[r] = q;
            self.iterations += 1;
        }
    }

    /// Pivots artificial columns out of the basis where a structural column
    /// can replace them; rows where none can are redundant and keep theirs.
    fn drive_out_artificials(&mut self) -> Result<()> {
        for r in 0..self.m {
            if self.basis[r] < self.n {
                continue;
            }
            let lu = self.factor()?;
            let mut e = vec![T::zero(); self.m];
            e[r] = T::one();
            let row_inv = lu.solve_transpose(&e);
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.n {
                if self.basis.contains(&j) {
                    continue;
                }
                let alpha = dot(&row_inv, &self.column(j)).to_f64().abs();
                if alpha > self.tol.pivot && best.is_none_or(|(_, b)| alpha > b) {
                    best = Some((j, alpha));
                }
            }
            if let Some((j, _)) = best {
                self.basis[r] = j;
                self.iterations += 1;
            }
        }
        Ok(())
    }
}

pub fn solve<T: Scalar>(lp: &LinearProgram<T>) -> Result<LpSolution<T>> {
    solve_with(lp, Tolerances::default())
}

/// Solves `lp`. Infeasible and unbounded problems are reported through
/// [`LpSolution::status`]; `Err` is reserved for numerical breakdown.
pub fn solve_with<T: Scalar>(lp: &LinearProgram<T>, tol: Tolerances) -> Result<LpSolution<T>> {
    let mut sx = Simplex::new(lp, tol.for_scalar::<T>());
    let n = sx.n;
    let m = sx.m;

    sx.run_phase(&|j| if j >= n { T::one() } else { T::zero() })?;
    let lu = sx.factor()?;
    let xb = lu.solve(&sx.b);
    let residual: f64 = sx
        .basis
        .iter()
        .zip(&xb)
        .filter(|(&j, _)| j >= n)
        .map(|(_, v)| v.to_f64().abs())
        .sum();
    let scale = max_abs(&sx.b).max(1.0);
    if residual > tol.feasibility * scale {
        return Ok(LpSolution {
            status: Status::Infeasible,
            optimum: f64::NAN,
            primal: vec![T::zero(); n],
            dual: vec![T::zero(); m],
            duality_gap: f64::NAN,
            basis: sx.basis.clone(),
            iterations: sx.iterations,
            infeasibility: residual,
        });
    }
    sx.drive_out_artificials()?;

    let flip = match lp.sense {
        Sense::Minimize => T::one(),
        Sense::Maximize => -T::one(),
    };
    let cost = |j: usize| if j < n { flip * lp.objective[j] } else { T::zero() };
    let end = sx.run_phase(&cost)?;
    if let PhaseEnd::Unbounded = end {
        return Ok(LpSolution {
            status: Status::Unbounded,
            optimum: flip.to_f64() * f64::NEG_INFINITY,
            primal: vec![T::zero(); n],
            dual: vec![T::zero(); m],
            duality_gap: f64::NAN,
            basis: sx.basis.clone(),
            iterations: sx.iterations,
            infeasibility: 0.0,
        });
    }

    let lu = sx.factor()?;
    let xb = lu.solve(&sx.b);
    let cb: Vec<T> = sx.basis.iter().map(|&j| cost(j)).collect();
    let y_internal = lu.solve_transpose(&cb);

    let mut primal = vec![T::zero(); n];
    for (&j, &v) in sx.basis.iter().zip(&xb) {
        if j < n {
            primal[j] = v;
        }
    }
    let dual: Vec<T> = y_internal
        .iter()
        .zip(&sx.row_sign)
        .map(|(&y, &s)| flip * y * s)
        .collect();
    let optimum = dot(&lp.objective, &primal);
    let dual_value = dot(&dual, &lp.rhs);
    Ok(LpSolution {
        status: Status::Optimal,
        optimum: optimum.to_f64(),
        primal,
        dual,
        duality_gap: (optimum - dual_value).to_f64().abs(),
        basis: sx.basis,
        iterations: sx.iterations,
        infeasibility: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Violation {
    PrimalInfeasible,
    DualInfeasible,
    Gap,
    NotOptimal,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Violation::PrimalInfeasible => "primal-infeasible",
            Violation::DualInfeasible => "dual-infeasible",
            Violation::Gap => "gap",
            Violation::NotOptimal => "not-optimal",
        })
    }
}

/// Independent re-check of an optimality certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    /// `max_n max(-x_n, 0)`
    pub negativity: f64,
    /// `|A x - b|_inf`
    pub primal_residual: f64,
    /// Largest violation of `A^T y <= z` (minimize) or `A^T y >= z` (maximize).
    pub dual_violation: f64,
    /// `|z . x - y . b|`
    pub gap: f64,
    pub violations: Vec<Violation>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Largest of the four measured violations.
    pub fn worst(&self) -> f64 {
        self.negativity
            .max(self.primal_residual)
            .max(self.dual_violation)
            .max(self.gap)
    }
}

impl fmt::Display for CertificateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "negativity={:.2e} residual={:.2e} dual={:.2e} gap={:.2e}",
            self.negativity, self.primal_residual, self.dual_violation, self.gap
        )?;
        if !self.violations.is_empty() {
            let names: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
            write!(f, " [{}]", names.join(","))?;
        }
        Ok(())
    }
}

pub fn verify_certificate<T: Scalar>(lp: &LinearProgram<T>, sol: &LpSolution<T>) -> CertificateReport {
    verify_certificate_with(lp, sol, Tolerances::default())
}

/// Recomputes primal feasibility, dual feasibility and the duality gap from
/// the original problem data. A passing report proves optimality of
/// `sol.primal` up to the tolerances.
pub fn verify_certificate_with<T: Scalar>(
    lp: &LinearProgram<T>,
    sol: &LpSolution<T>,
    tol: Tolerances,
) -> CertificateReport {
    let mut violations = Vec::new();
    if sol.status != Status::Optimal
        || sol.primal.len() != lp.objective.len()
        || sol.dual.len() != lp.rhs.len()
    {
        return CertificateReport {
            negativity: f64::INFINITY,
            primal_residual: f64::INFINITY,
            dual_violation: f64::INFINITY,
            gap: f64::INFINITY,
            violations: vec![Violation::NotOptimal],
        };
    }
    let x = &sol.primal;
    let y = &sol.dual;
    let a = &lp.constraints;

    let negativity = x.iter().fold(0.0f64, |acc, &v| acc.max(-v.to_f64()));
    let primal_residual = a
        .mul_vec(x)
        .iter()
        .zip(&lp.rhs)
        .fold(0.0f64, |acc, (&ax, &b)| acc.max((ax - b).to_f64().abs()));
    if negativity > tol.nonnegativity || primal_residual > tol.feasibility {
        violations.push(Violation::PrimalInfeasible);
    }

    let aty = a.tr_mul_vec(y);
    let dual_violation = aty
        .iter()
        .zip(&lp.objective)
        .map(|(&s, &z)| match lp.sense {
            Sense::Minimize => (s - z).to_f64(),
            Sense::Maximize => (z - s).to_f64(),
        })
        .fold(0.0f64, f64::max);
    if dual_violation > tol.dual {
        violations.push(Violation::DualInfeasible);
    }

    let gap = (dot(&lp.objective, x) - dot(y, &lp.rhs)).to_f64().abs();
    if gap > tol.gap {
        violations.push(Violation::Gap);
    }

    CertificateReport {
        negativity,
        primal_residual,
        dual_violation,
        gap,
        violations,
    }
}

/// Writes the final tableau `B^-1 [A | b]`, reduced costs and basis as plain text.
pub fn dump_tableau<T: Scalar>(
    lp: &LinearProgram<T>,
    sol: &LpSolution<T>,
    out: &mut impl Write,
) -> Result<()> {
    let a = &lp.constraints;
    let (m, n) = (a.rows(), a.cols());
    writeln!(out, "# sense {:?} status {} rows {m} cols {n}", lp.sense, sol.status)?;
    writeln!(out, "# basis {:?}", sol.basis)?;
    writeln!(out, "# optimum {:.17e} gap {:.3e}", sol.optimum, sol.duality_gap)?;
    if sol.status != Status::Optimal {
        return Ok(());
    }
    let mut data = vec![T::zero(); m * m];
    for (k, &j) in sol.basis.iter().enumerate() {
        for i in 0..m {
            data[i * m + k] = if j < n {
                a.get(i, j)
            } else if i == j - n {
                T::one()
            } else {
                T::zero()
            };
        }
    }
    let lu = Lu::factorize(data, m, SINGULAR_TOL)?;
    let cols: Vec<Vec<T>> = (0..n).map(|j| lu.solve(&a.column(j))).collect();
    let beta = lu.solve(&lp.rhs);
    for i in 0..m {
        let row: Vec<String> = cols
            .iter()
            .map(|c| format!("{:.6e}", c[i].to_f64()))
            .collect();
        writeln!(out, "{} | {:.6e}", row.join(" "), beta[i].to_f64())?;
    }
    let aty = a.tr_mul_vec(&sol.dual);
    let reduced: Vec<String> = lp
        .objective
        .iter()
        .zip(&aty)
        .map(|(&z, &s)| format!("{:.6e}", (z - s).to_f64()))
        .collect();
    writeln!(out, "# reduced {}", reduced.join(" "))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(sense: Sense, objective: Vec<f64>) -> LinearProgram {
        let a = Matrix::from_rows(vec![vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]]).unwrap();
        LinearProgram::new(objective, a, vec![0.5, 1.0], sense).unwrap()
    }

    #[test]
    fn minimize_by_inspection() {
        let lp = small(Sense::Minimize, vec![0.0, 1.0, 0.0]);
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert!(sol.optimum.abs() < 1e-15);
        assert!((sol.primal[0] - 0.5).abs() < 1e-15);
        assert!(sol.primal[1].abs() < 1e-15);
        assert!((sol.primal[2] - 0.5).abs() < 1e-15);
        assert!(verify_certificate(&lp, &sol).passed());
    }

    #[test]
    fn maximize_by_inspection() {
        let lp = small(Sense::Maximize, vec![0.0, 1.0, 0.0]);
        let sol = solve(&lp).unwrap();
        assert!((sol.optimum - 0.5).abs() < 1e-15);
        let rep = verify_certificate(&lp, &sol);
        assert!(rep.passed(), "{rep}");
    }

    #[test]
    fn detects_infeasible() {
        let a = Matrix::from_rows(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let lp = LinearProgram::new(vec![1.0, 0.0], a, vec![1.0, 2.0], Sense::Minimize).unwrap();
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, Status::Infeasible);
        assert!(matches!(sol.into_result(), Err(Error::Infeasible { .. })));

        // negative right-hand side with nonnegative coefficients
        let a = Matrix::from_rows(vec![vec![1.0, 2.0]]).unwrap();
        let lp = LinearProgram::new(vec![1.0, 1.0], a, vec![-1.0], Sense::Minimize).unwrap();
        assert_eq!(solve(&lp).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let a = Matrix::from_rows(vec![vec![1.0, -1.0]]).unwrap();
        let lp = LinearProgram::new(vec![0.0, 1.0], a, vec![1.0], Sense::Maximize).unwrap();
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, Status::Unbounded);
        assert!(!verify_certificate(&lp, &sol).passed());
    }

    #[test]
    fn negative_rhs_rows_are_handled() {
        // -x0 - x1 = -1, minimize x0 - x1
        let a = Matrix::from_rows(vec![vec![-1.0, -1.0]]).unwrap();
        let lp = LinearProgram::new(vec![1.0, -1.0], a, vec![-1.0], Sense::Minimize).unwrap();
        let sol = solve(&lp).unwrap();
        assert!((sol.optimum + 1.0).abs() < 1e-15);
        assert!(verify_certificate(&lp, &sol).passed());
    }

    #[test]
    fn redundant_rows() {
        let a = Matrix::from_rows(vec![
            vec![1.0, 1.0, 1.0],
            vec![2.0, 2.0, 2.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap();
        let lp = LinearProgram::new(vec![0.0, 0.0, 1.0], a, vec![1.0, 2.0, 0.25], Sense::Maximize)
            .unwrap();
        let sol = solve(&lp).unwrap();
        assert!((sol.optimum - 0.75).abs() < 1e-14);
        let rep = verify_certificate(&lp, &sol);
        assert!(rep.passed(), "{rep}");
    }

    #[test]
    fn classic_cycling_instance_terminates() {
        // Beale's example in equality form with slacks
        let a = Matrix::from_rows(vec![
            vec![0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0],
            vec![0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap();
        let lp = LinearProgram::new(
            vec![-0.75, 150.0, -0.02, 6.0, 0.0, 0.0, 0.0],
            a,
            vec![0.0, 0.0, 1.0],
            Sense::Minimize,
        )
        .unwrap();
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.optimum + 0.05).abs() < 1e-12, "{}", sol.optimum);
        assert!(verify_certificate(&lp, &sol).passed());
    }

    #[test]
    fn corrupted_certificates_are_flagged() {
        let lp = small(Sense::Minimize, vec![0.0, 1.0, 0.0]);
        let sol = solve(&lp).unwrap();

        let mut bad = sol.clone();
        bad.dual[0] += 1.0;
        let rep = verify_certificate(&lp, &bad);
        assert!(rep.violations.contains(&Violation::DualInfeasible), "{rep}");

        let mut bad = sol.clone();
        bad.primal.iter_mut().for_each(|x| *x *= 1.01);
        let rep = verify_certificate(&lp, &bad);
        assert!(rep.violations.contains(&Violation::PrimalInfeasible), "{rep}");
    }

    #[test]
    fn rejects_malformed_programs() {
        let a = Matrix::from_rows(vec![vec![1.0, 1.0]]).unwrap();
        assert!(LinearProgram::new(vec![1.0], a.clone(), vec![1.0], Sense::Minimize).is_err());
        assert!(LinearProgram::new(vec![1.0, 1.0], a.clone(), vec![], Sense::Minimize).is_err());
        assert!(
            LinearProgram::new(vec![f64::NAN, 1.0], a, vec![1.0], Sense::Minimize).is_err()
        );
    }

    #[test]
    fn deterministic() {
        let lp = small(Sense::Maximize, vec![0.3, 1.0, -0.2]);
        assert_eq!(solve(&lp).unwrap(), solve(&lp).unwrap());
    }

    #[test]
    fn tableau_dump() {
        let lp = small(Sense::Maximize, vec![0.0, 1.0, 0.0]);
        let sol = solve(&lp).unwrap();
        let mut buf = Vec::new();
        dump_tableau(&lp, &sol, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("# basis"));
        assert_eq!(text.lines().filter(|l| l.contains(" | ")).count(), 2);
    }
}
