//! Brute-force reference computations used to cross-check the solver and the
//! closed-form bounds. Nothing here shares code paths with [`crate::lp`].

use rand::Rng;

use crate::linalg::{solve_refined, Matrix};
use crate::lp::{LinearProgram, Sense};

/// Optimum of `lp` found by visiting every basic feasible solution.
///
/// Assumes `A` has full row rank and a bounded feasible set. Returns `None`
/// when no basis is feasible.
pub fn enumerate_vertices(lp: &LinearProgram) -> Option<f64> {
    let a = lp.constraints();
    let (m, n) = (a.rows(), a.cols());
    let mut best: Option<f64> = None;
    let mut subset: Vec<usize> = (0..m).collect();
    if m > n {
        return None;
    }
    loop {
        let b = Matrix::from_fn(m, m, |i, k| a.get(i, subset[k]));
        if let Ok(xb) = solve_refined(&b, lp.rhs(), 1e-12) {
            if xb.iter().all(|&v| v >= -1e-11) {
                let value: f64 = subset
                    .iter()
                    .zip(&xb)
                    .map(|(&j, v)| lp.objective()[j] * v)
                    .sum();
                best = Some(match (best, lp.sense()) {
                    (None, _) => value,
                    (Some(b), Sense::Minimize) => b.min(value),
                    (Some(b), Sense::Maximize) => b.max(value),
                });
            }
        }
        // next combination in lexicographic order
        let mut i = m;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if subset[i] < n - m + i {
                break;
            }
        }
        subset[i] += 1;
        for k in i + 1..m {
            subset[k] = subset[k - 1] + 1;
        }
    }
}

/// Random bounded LP, feasible by construction: the first row is strictly
/// positive and `b = A p` for a random nonnegative `p`.
pub fn random_feasible_lp(rng: &mut impl Rng, rows: usize, cols: usize) -> LinearProgram {
    let a = Matrix::from_fn(rows, cols, |i, _| {
        if i == 0 {
            rng.gen_range(0.2..1.0)
        } else {
            rng.gen_range(-1.0..1.0)
        }
    });
    // sparse p keeps many instances degenerate
    let p: Vec<f64> = (0..cols)
        .map(|_| {
            if rng.gen_bool(0.4) {
                0.0
            } else {
                rng.gen_range(0.0..1.0)
            }
        })
        .collect();
    let b = a.mul_vec(&p);
    let z: Vec<f64> = (0..cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let sense = if rng.gen_bool(0.5) {
        Sense::Minimize
    } else {
        Sense::Maximize
    };
    LinearProgram::new(z, a, b, sense).expect("well-formed random LP")
}

/// `sum_{m,n} p_{m,n} 2^{-m}` style sums over a dense two-mode grid.
pub fn grid_sum(grid: &[Vec<f64>], weight: impl Fn(usize, usize) -> f64) -> f64 {
    grid.iter()
        .enumerate()
        .flat_map(|(m, row)| row.iter().enumerate().map(move |(n, &p)| (m, n, p)))
        .map(|(m, n, p)| weight(m, n) * p)
        .sum()
}
