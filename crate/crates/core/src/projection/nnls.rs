//! Lawson–Hanson nonnegative least squares and the cone projections built on
//! it: polyhedral cones (through the dual problem) and finitely generated
//! cones, plus column generation for cones over curve slices.

use crate::gallery::{lift, CurveSet};
use crate::linalg::{lstsq, Matrix, Vector};

/// Solution of `min ‖A λ − b‖` over `λ ≥ 0`.
#[derive(Clone, Debug)]
pub struct Nnls {
    pub x: Vector,
    pub iterations: usize,
    /// `max_j (Aᵀ(b − Aλ))_j`, nonpositive at optimality.
    pub dual_violation: f64,
}

pub fn nnls(a: &Matrix, b: &Vector) -> Nnls {
    let n = a.ncols();
    let mut x = Vector::zeros(n);
    let mut passive = vec![false; n];
    // columns that re-entered without progress; cleared whenever x moves
    let mut blocked = vec![false; n];
    let tol = 1e-13 * (a.norm() * b.norm()).max(1e-300);
    let mut iterations = 0;
    let mut w = a.transpose() * (b - a * &x);
    for _ in 0..(3 * n + 50) {
        let cand = (0..n)
            .filter(|&j| !passive[j] && !blocked[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = cand else { break };
        passive[j] = true;
        let before = x.clone();
        loop {
            iterations += 1;
            let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            if idx.is_empty() {
                break;
            }
            let s = lstsq(&a.select_columns(&idx), b);
            if s.iter().all(|&v| v > 0.0) {
                for (k, &i) in idx.iter().enumerate() {
                    x[i] = s[k];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            let mut leaving = idx[0];
            for (k, &i) in idx.iter().enumerate() {
                if s[k] <= 0.0 {
                    let ratio = x[i] / (x[i] - s[k]);
                    if ratio < alpha {
                        alpha = ratio;
                        leaving = i;
                    }
                }
            }
            for (k, &i) in idx.iter().enumerate() {
                x[i] += alpha * (s[k] - x[i]);
                if x[i] <= 0.0 {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
            x[leaving] = 0.0;
            passive[leaving] = false;
        }
        if x == before {
            blocked[j] = true;
        } else {
            blocked.iter_mut().for_each(|v| *v = false);
        }
        w = a.transpose() * (b - a * &x);
    }
    let dual_violation = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Nnls {
        x,
        iterations,
        dual_violation: if n == 0 { 0.0 } else { dual_violation },
    }
}

fn columns(vectors: &[Vector], dim: usize) -> Matrix {
    if vectors.is_empty() {
        return Matrix::zeros(dim, 0);
    }
    Matrix::from_columns(vectors)
}

/// Projection onto `{y : A y ≥ 0}`: `y = x + Aᵀμ` with `μ = argmin_{μ ≥ 0} ‖x + Aᵀμ‖`.
pub fn project_polyhedral_rows(a: &Matrix, x: &Vector) -> (Vector, usize, f64) {
    if a.nrows() == 0 {
        return (x.clone(), 0, 0.0);
    }
    let at = a.transpose();
    let sol = nnls(&at, &(-x));
    let y = x + &at * &sol.x;
    // KKT residuals: primal infeasibility and complementarity
    let ay = a * &y;
    let infeas = ay.iter().fold(0.0_f64, |m, v| m.max(-v));
    let comp = sol.x.dot(&ay).abs();
    (y, sol.iterations, infeas + comp)
}

/// Projection onto the cone generated by `gens`.
pub fn project_generated(gens: &[Vector], x: &Vector) -> (Vector, usize, f64) {
    if gens.is_empty() {
        return (Vector::zeros(x.len()), 0, 0.0);
    }
    let g = columns(gens, x.len());
    let sol = nnls(&g, x);
    let y = &g * &sol.x;
    let r = x - &y;
    let gap = sol.dual_violation.max(0.0) + r.dot(&y).abs();
    (y, sol.iterations, gap)
}

/// Projection onto `cone(C × {1})` where `C` is generated by `curves`.
///
/// Column generation: solve the NNLS problem on a working set of lifted curve
/// points, then add the lifted point maximizing `<x − y, q>`. Stops once the
/// best normalized pairing is below `1e-7 ‖x − y‖`.
pub fn project_curve_cone(curves: &CurveSet, x: &Vector) -> (Vector, usize, f64) {
    let coarse = CurveSet::new(curves.family, 64).lifted_samples();
    let mut work: Vec<Vector> = Vec::new();
    // seed with the coarse generators best aligned with x
    let mut scored: Vec<(f64, &Vector)> = coarse.iter().map(|q| (q.dot(x) / q.norm(), q)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    work.extend(scored.iter().take(8).map(|(_, q)| (*q).clone()));
    let scale = 1.0 + x.norm();
    let mut iters = 0;
    let mut gap = f64::INFINITY;
    let mut y = Vector::zeros(x.len());
    for _ in 0..2000 {
        iters += 1;
        let g = columns(&work, x.len());
        let sol = nnls(&g, x);
        y = &g * &sol.x;
        let r = x - &y;
        let rbar = r.rows(0, 3).into_owned();
        let (p, v) = curves.linear_maximizer(&rbar);
        let best = v + r[3];
        let qn = lift(&p).norm();
        gap = (best / qn).max(0.0) * r.norm() + r.dot(&y).abs();
        if best / qn <= 1e-7 * r.norm() + 1e-14 * scale {
            break;
        }
        if work.len() > 64 {
            work = work
                .into_iter()
                .zip(sol.x.iter())
                .filter(|(_, &w)| w > 0.0)
                .map(|(q, _)| q)
                .collect();
        }
        work.push(lift(&p));
    }
    (y, iters, gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_slice;

    #[test]
    fn nnls_matches_active_set_enumeration() {
        // oracle: enumerate all supports of a small problem
        let a = Matrix::from_row_slice(3, 3, &[1.0, 2.0, 0.5, 0.0, 1.0, -1.0, 1.0, 0.0, 2.0]);
        let b = from_slice(&[1.0, -2.0, 0.5]);
        let sol = nnls(&a, &b);
        let mut best = f64::INFINITY;
        for mask in 0u32..8 {
            let idx: Vec<usize> = (0..3).filter(|i| mask >> i & 1 == 1).collect();
            let s = lstsq(&a.select_columns(&idx), &b);
            if s.iter().all(|&v| v >= 0.0) {
                let mut x = Vector::zeros(3);
                for (k, &i) in idx.iter().enumerate() {
                    x[i] = s[k];
                }
                best = best.min((&a * x - &b).norm());
            }
        }
        assert!(((&a * &sol.x - &b).norm() - best).abs() < 1e-12);
        assert!(sol.x.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn polyhedral_two_halfplanes() {
        // {y : y1 ≥ 0, y2 ≥ 0}
        let a = Matrix::identity(2, 2);
        let (y, _, kkt) = project_polyhedral_rows(&a, &from_slice(&[3.0, -2.0]));
        assert!((y - from_slice(&[3.0, 0.0])).norm() < 1e-14);
        assert!(kkt < 1e-14);
    }

    #[test]
    fn generated_cone_projection() {
        let gens = vec![from_slice(&[1.0, 0.0]), from_slice(&[1.0, 1.0])];
        let (y, _, _) = project_generated(&gens, &from_slice(&[0.0, 2.0]));
        assert!((y - from_slice(&[1.0, 1.0])).norm() < 1e-12);
    }
}
