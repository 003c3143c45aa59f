use crate::cone::ConeSpec;
use crate::error::{ConeError, Result};
use crate::linalg::Vector;

use super::{project, ProjectionMethod, ProjectionResult};

pub const DEFAULT_MAX_ITER: usize = 50_000;
pub const DEFAULT_TOL: f64 = 1e-13;

/// Dykstra's cyclic projection onto `parts[0] ∩ parts[1] ∩ …`.
///
/// Stops when the largest change of a correction vector over one sweep falls
/// below `tol · (1 + ‖x‖)`. The reported certificate gap is the largest
/// distance from the final iterate to any part.
pub fn dykstra_intersection(
    parts: &[ConeSpec],
    x: &Vector,
    max_iter: usize,
    tol: f64,
) -> Result<ProjectionResult> {
    let mut y = x.clone();
    let mut corr = vec![Vector::zeros(x.len()); parts.len()];
    let scale = 1.0 + x.norm();
    let mut change = f64::INFINITY;
    for it in 1..=max_iter {
        change = 0.0_f64;
        for (part, p) in parts.iter().zip(corr.iter_mut()) {
            let z = &y + &*p;
            let next = project(part, &z)?.point;
            let q = &z - &next;
            change = change.max((&q - &*p).norm()).max((&next - &y).norm());
            *p = q;
            y = next;
        }
        if change <= tol * scale {
            let gap = infeasibility(parts, &y)?;
            return Ok(ProjectionResult {
                distance: (x - &y).norm(),
                point: y,
                method: ProjectionMethod::Dykstra,
                iterations: it,
                certificate_gap: gap.max(change),
            });
        }
    }
    Err(ConeError::NonConvergence {
        iterations: max_iter,
        gap: change,
        best: y.iter().copied().collect(),
    })
}

fn infeasibility(parts: &[ConeSpec], y: &Vector) -> Result<f64> {
    let mut worst = 0.0_f64;
    for part in parts {
        worst = worst.max(project(part, y)?.distance);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_slice;

    #[test]
    fn point_in_all_parts_takes_one_sweep() {
        let parts = vec![ConeSpec::psd(2), ConeSpec::orthant(3)];
        let x = from_slice(&[1.0, 0.1, 1.0]);
        let r = dykstra_intersection(&parts, &x, 100, 1e-12).unwrap();
        assert_eq!(r.iterations, 1);
        assert!((r.point - x).norm() < 1e-15);
    }

    #[test]
    fn two_halfplanes_match_case_analysis() {
        // {x + y ≥ 0} ∩ {x − 2y ≥ 0}; oracle: the projection is x itself, the
        // projection onto one active line, or the apex
        let n1 = from_slice(&[1.0, 1.0]);
        let n2 = from_slice(&[1.0, -2.0]);
        let parts = vec![
            ConeSpec::Halfspace {
                normal: vec![1.0, 1.0],
                offset: 0.0,
            },
            ConeSpec::Halfspace {
                normal: vec![1.0, -2.0],
                offset: 0.0,
            },
        ];
        for p in [[-1.0, 3.0], [0.5, 2.0], [-3.0, -0.5], [4.0, 1.0], [-1.0, -2.0]] {
            let x = from_slice(&p);
            let feasible = |v: &Vector| n1.dot(v) >= -1e-14 && n2.dot(v) >= -1e-14;
            let mut cands = vec![Vector::zeros(2), x.clone()];
            for n in [&n1, &n2] {
                cands.push(&x - n * (n.dot(&x) / n.norm_squared()));
            }
            let best = cands
                .into_iter()
                .filter(|c| feasible(c))
                .min_by(|a, b| (a - &x).norm().total_cmp(&(b - &x).norm()))
                .unwrap();
            let r = dykstra_intersection(&parts, &x, DEFAULT_MAX_ITER, 1e-15).unwrap();
            assert!((r.point - best).norm() < 1e-9, "{p:?}");
        }
    }

    #[test]
    fn non_convergence_carries_best_iterate() {
        let parts = vec![ConeSpec::psd(2), ConeSpec::orthant(3)];
        let x = from_slice(&[2.0, -3.0, -1.0]);
        match dykstra_intersection(&parts, &x, 1, 0.0) {
            Err(ConeError::NonConvergence { best, .. }) => assert_eq!(best.len(), 3),
            other => panic!("{other:?}"),
        }
    }
}
