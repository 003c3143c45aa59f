//! Nearest points of convex hulls.
//!
//! Wolfe's minimum-norm-point method on the translated set `conv(S) − x`. The
//! working set grows through a linear minimization oracle, so the same routine
//! handles finite point clouds and the gallery curve slices (where the oracle
//! is exact and new points are generated on demand). Every iterate is a convex
//! combination of genuine points of the set, hence the reported distance is an
//! upper bound on the true one; the Frank–Wolfe gap turns it into a two-sided
//! bracket.

use crate::gallery::CurveSet;
use crate::linalg::{lstsq, Matrix, Vector};

#[derive(Clone, Debug)]
pub struct HullSolution {
    pub point: Vector,
    pub weights: Vec<f64>,
    pub support: Vec<Vector>,
    pub iterations: usize,
    /// `‖y‖² − min_{q} <y, q − x>` with `y` the translated iterate.
    pub gap: f64,
    pub lower_bound: f64,
}

/// Affine minimum-norm combination `Σ μᵢ sᵢ`, `Σ μᵢ = 1`.
fn affine_min_norm(s: &[Vector]) -> Vec<f64> {
    if s.len() == 1 {
        return vec![1.0];
    }
    let d = Matrix::from_columns(&s[1..].iter().map(|v| v - &s[0]).collect::<Vec<_>>());
    let c = lstsq(&d, &(-&s[0]));
    let mut mu = Vec::with_capacity(s.len());
    mu.push(1.0 - c.sum());
    mu.extend(c.iter().copied());
    mu
}

fn combine(s: &[Vector], lam: &[f64]) -> Vector {
    let mut y = Vector::zeros(s[0].len());
    for (v, w) in s.iter().zip(lam) {
        y.axpy(*w, v, 1.0);
    }
    y
}

/// When to stop: `gap ≤ abs + rel·‖y‖²`, or `‖y‖ ≤ zero` (x is in the set).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StopRule {
    pub abs: f64,
    pub rel: f64,
    pub zero: f64,
    pub max_iter: usize,
}

/// Minimum-norm point of `conv(S) − x` where `S` is explored through `lmo`,
/// which returns a minimizer of `<g, q>` over the set for a direction `g`.
pub fn min_norm_point(
    x: &Vector,
    start: &Vector,
    lmo: &dyn Fn(&Vector) -> Vector,
    stop: StopRule,
) -> HullSolution {
    let mut s = vec![start - x];
    let mut lam = vec![1.0];
    let mut iterations = 0;
    let mut gap = f64::INFINITY;
    let mut y = s[0].clone();
    while iterations < stop.max_iter {
        iterations += 1;
        y = combine(&s, &lam);
        let yy = y.norm_squared();
        if yy.sqrt() <= stop.zero {
            gap = 0.0;
            break;
        }
        let q = lmo(&y) - x;
        gap = yy - y.dot(&q);
        if gap <= stop.abs + stop.rel * yy {
            break;
        }
        if s.iter().any(|v| (v - &q).norm() <= 1e-15 * (1.0 + q.norm())) {
            // the oracle returned a point already in the working set
            break;
        }
        s.push(q);
        lam.push(0.0);
        for _ in 0..(4 * s.len() + 10) {
            let mu = affine_min_norm(&s);
            if mu.iter().all(|&m| m > 1e-15) {
                lam = mu;
                break;
            }
            let mut theta = 1.0_f64;
            for (l, m) in lam.iter().zip(&mu) {
                if *m <= 1e-15 && l - m > 0.0 {
                    theta = theta.min(l / (l - m));
                }
            }
            for (l, m) in lam.iter_mut().zip(&mu) {
                *l += theta * (m - *l);
            }
            // drop at least the blocking point
            let imin = (0..lam.len())
                .min_by(|&a, &b| lam[a].total_cmp(&lam[b]))
                .unwrap_or(0);
            let mut keep: Vec<bool> = lam.iter().map(|&l| l > 1e-15).collect();
            keep[imin] = false;
            if keep.iter().all(|k| !k) {
                keep[(imin + 1) % lam.len()] = true;
            }
            let mut ns = Vec::new();
            let mut nl = Vec::new();
            for ((v, l), k) in s.iter().zip(&lam).zip(&keep) {
                if *k {
                    ns.push(v.clone());
                    nl.push(l.max(0.0));
                }
            }
            let total: f64 = nl.iter().sum();
            nl.iter_mut().for_each(|l| *l /= total);
            s = ns;
            lam = nl;
            if s.len() == 1 {
                break;
            }
        }
    }
    let yn = y.norm();
    let lower_bound = if yn > 0.0 {
        ((yn * yn - gap.max(0.0)) / yn).max(0.0)
    } else {
        0.0
    };
    HullSolution {
        point: &y + x,
        support: s.iter().map(|v| v + x).collect(),
        weights: lam,
        iterations,
        gap: gap.max(0.0),
        lower_bound,
    }
}

/// Nearest point of the convex hull of a finite point cloud.
pub fn hull_of_points(samples: &[Vector], x: &Vector) -> HullSolution {
    let start = samples
        .iter()
        .min_by(|a, b| (*a - x).norm_squared().total_cmp(&(*b - x).norm_squared()))
        .expect("nonempty samples");
    let lmo = |g: &Vector| -> Vector {
        samples
            .iter()
            .min_by(|a, b| g.dot(a).total_cmp(&g.dot(b)))
            .expect("nonempty samples")
            .clone()
    };
    let scale = 1.0 + x.norm_squared() + samples[0].norm_squared();
    let stop = StopRule {
        abs: 1e-14 * scale,
        rel: 0.0,
        zero: 0.0,
        max_iter: 20 * samples.len() + 100,
    };
    min_norm_point(x, start, &lmo, stop)
}

/// Nearest point of `conv` of the gallery curves in R³, started from the
/// exact maximizer towards `x` and refined with the exact oracle. Stops when
/// the lower bound is within a relative 1e-7 of the distance.
pub fn hull_of_curves(curves: &CurveSet, x: &Vector) -> HullSolution {
    let start = curves.linear_maximizer(x).0;
    let lmo = |g: &Vector| curves.linear_maximizer(&(-g)).0;
    let scale = 1.0 + x.norm_squared();
    let stop = StopRule {
        abs: 1e-17 * scale,
        rel: 1e-7,
        zero: 1e-13 * scale.sqrt(),
        max_iter: 5000,
    };
    min_norm_point(x, &start, &lmo, stop)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_slice;

    fn square() -> Vec<Vector> {
        [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
            .iter()
            .map(|p| from_slice(p))
            .collect()
    }

    #[test]
    fn square_examples() {
        let sol = hull_of_points(&square(), &from_slice(&[2.0, 0.5]));
        assert!((sol.point - from_slice(&[1.0, 0.5])).norm() < 1e-12);
        assert!(sol.gap < 1e-10);
        let inside = from_slice(&[0.3, 0.6]);
        let sol = hull_of_points(&square(), &inside);
        assert!((sol.point - inside).norm() < 1e-12);
    }

    #[test]
    fn weights_form_a_convex_combination() {
        let pts: Vec<Vector> = (0..40)
            .map(|i| {
                let t = i as f64 * 0.37;
                from_slice(&[t.cos(), (2.0 * t).sin(), (3.0 * t).cos()])
            })
            .collect();
        let x = from_slice(&[2.0, -1.0, 0.5]);
        let sol = hull_of_points(&pts, &x);
        assert!((sol.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(sol.weights.iter().all(|&w| w >= 0.0));
        assert!((combine(&sol.support, &sol.weights) - &sol.point).norm() < 1e-12);
        // optimality: no sample improves along its direction
        let r = &x - &sol.point;
        for p in &pts {
            assert!(r.dot(&(p - &sol.point)) <= 1e-10);
        }
        assert!(sol.lower_bound <= (&x - &sol.point).norm() + 1e-15);
    }
}
