//! Nearest points onto cones: closed forms for the atoms, eigenvalue clipping
//! for PSD, active-set NNLS for polyhedral and finitely generated cones,
//! Dykstra for intersections, and the hull QP for compact slices.

pub mod dykstra;
pub mod hull;
pub mod nnls;

use serde::{Deserialize, Serialize};

use crate::cone::{concat, matrix_from_rows, split, ConeSpec, SliceGenerator};
use crate::error::{check_dim, ConeError, Result};
use crate::gallery::{self, CurveFamily, CurveSet, GalleryName};
use crate::linalg::{from_slice, orthonormalize, smat, svec, sym_eigen, Matrix, Vector};

pub use dykstra::dykstra_intersection;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMethod {
    ClosedForm,
    EigenClip,
    Dykstra,
    HullQp,
    ActiveSet,
    ProjectedGradient,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionResult {
    pub point: Vector,
    pub distance: f64,
    pub method: ProjectionMethod,
    pub iterations: usize,
    /// Bound on suboptimality; zero for closed forms.
    pub certificate_gap: f64,
}

impl ProjectionResult {
    fn exact(x: &Vector, point: Vector, method: ProjectionMethod) -> Self {
        Self {
            distance: (x - &point).norm(),
            point,
            method,
            iterations: 1,
            certificate_gap: 0.0,
        }
    }
}

/// `x = cone_part + polar_part` with `cone_part = P_K(x)` and `polar_part ∈ −K*`.
#[derive(Clone, Debug, PartialEq)]
pub struct MoreauSplit {
    pub original: Vector,
    pub cone_part: Vector,
    pub polar_part: Vector,
    /// `|<cone_part, polar_part>|`.
    pub residual: f64,
}

impl MoreauSplit {
    pub fn from_projection(x: &Vector, p: Vector) -> Self {
        let q = x - &p;
        Self {
            original: x.clone(),
            residual: p.dot(&q).abs(),
            cone_part: p,
            polar_part: q,
        }
    }
}

pub fn moreau_decompose(k: &ConeSpec, x: &Vector) -> Result<MoreauSplit> {
    if !k.is_cone() {
        return Err(ConeError::Unsupported {
            operation: "moreau_decompose",
            variant: k.variant_name(),
        });
    }
    Ok(MoreauSplit::from_projection(x, project(k, x)?.point))
}

pub fn project_soc(x: &Vector) -> Vector {
    let d = x.len();
    if d == 1 {
        return from_slice(&[x[0].max(0.0)]);
    }
    let t = x[d - 1];
    let head = x.rows(0, d - 1);
    let r = head.norm();
    if r <= t {
        return x.clone();
    }
    if r <= -t {
        return Vector::zeros(d);
    }
    let a = 0.5 * (r + t);
    let mut out = Vector::zeros(d);
    out.rows_mut(0, d - 1).copy_from(&(head * (a / r)));
    out[d - 1] = a;
    out
}

pub fn project_psd(x: &Vector, n: usize) -> Vector {
    let (vals, vecs) = sym_eigen(&smat(x, n));
    let d = Matrix::from_diagonal(&vals.map(|l| l.max(0.0)));
    svec(&(&vecs * d * vecs.transpose()))
}

/// Exact projection onto `{y : <r_i, y> ≥ 0 ∀ i}`.
pub fn project_polyhedral(rows: &[Vec<f64>], x: &Vector) -> Vector {
    let a = Matrix::from_fn(rows.len(), x.len(), |i, j| rows[i][j]);
    nnls::project_polyhedral_rows(&a, x).0
}

/// Orthonormal basis of a `linear_subspace` spec.
pub fn subspace_basis(k: &ConeSpec) -> Result<Vec<Vector>> {
    match k {
        ConeSpec::LinearSubspace { basis, .. } => {
            orthonormalize(&basis.iter().map(|b| from_slice(b)).collect::<Vec<_>>())
        }
        _ => Err(ConeError::Unsupported {
            operation: "subspace_basis",
            variant: k.variant_name(),
        }),
    }
}

pub fn distance(k: &ConeSpec, x: &Vector) -> Result<f64> {
    Ok(project(k, x)?.distance)
}

pub fn project(k: &ConeSpec, x: &Vector) -> Result<ProjectionResult> {
    check_dim(k.dim(), x.len())?;
    use ProjectionMethod::*;
    Ok(match k {
        ConeSpec::Halfspace { normal, offset } => {
            let n = from_slice(normal);
            let v = n.dot(x);
            let p = if v >= *offset {
                x.clone()
            } else {
                x + &n * ((offset - v) / n.norm_squared())
            };
            ProjectionResult::exact(x, p, ClosedForm)
        }
        ConeSpec::LinearSubspace { .. } => {
            let mut p = Vector::zeros(x.len());
            for b in subspace_basis(k)? {
                p.axpy(b.dot(x), &b, 1.0);
            }
            ProjectionResult::exact(x, p, ClosedForm)
        }
        ConeSpec::Polyhedral { ambient_dim, rows } => {
            let a = matrix_from_rows(rows, *ambient_dim)?;
            let (p, it, gap) = nnls::project_polyhedral_rows(&a, x);
            ProjectionResult {
                distance: (x - &p).norm(),
                point: p,
                method: ActiveSet,
                iterations: it,
                certificate_gap: gap,
            }
        }
        ConeSpec::Generated {
            ambient_dim,
            generators,
        } => {
            matrix_from_rows(generators, *ambient_dim)?;
            let gens: Vec<Vector> = generators.iter().map(|g| from_slice(g)).collect();
            let (p, it, gap) = nnls::project_generated(&gens, x);
            ProjectionResult {
                distance: (x - &p).norm(),
                point: p,
                method: ActiveSet,
                iterations: it,
                certificate_gap: gap,
            }
        }
        ConeSpec::SecondOrder { .. } => ProjectionResult::exact(x, project_soc(x), ClosedForm),
        ConeSpec::Psd { n } => ProjectionResult::exact(x, project_psd(x, *n), EigenClip),
        ConeSpec::NonnegativeOrthant { .. } => {
            ProjectionResult::exact(x, x.map(|v| v.max(0.0)), ClosedForm)
        }
        ConeSpec::Product { left, right } => {
            let (a, b) = split(x, left.dim());
            let pa = project(left, &a)?;
            let pb = project(right, &b)?;
            let p = concat(&pa.point, &pb.point);
            let method = if pa.method == ClosedForm { pb.method } else { pa.method };
            ProjectionResult {
                distance: (x - &p).norm(),
                point: p,
                method,
                iterations: pa.iterations.max(pb.iterations),
                certificate_gap: pa.certificate_gap + pb.certificate_gap,
            }
        }
        ConeSpec::Intersection { parts } => {
            if parts.len() == 1 {
                return project(&parts[0], x);
            }
            dykstra_intersection(parts, x, dykstra::DEFAULT_MAX_ITER, dykstra::DEFAULT_TOL)?
        }
        ConeSpec::LinearImage { map, inner } => {
            let a = matrix_from_rows(map, inner.dim())?;
            project_linear_image(&a, inner, x)?
        }
        ConeSpec::ConicHull { slice } => match &slice.generator {
            SliceGenerator::Points { points } => {
                let gens: Vec<Vector> = points.iter().map(|g| from_slice(g)).collect();
                let (p, it, gap) = nnls::project_generated(&gens, x);
                ProjectionResult {
                    distance: (x - &p).norm(),
                    point: p,
                    method: ActiveSet,
                    iterations: it,
                    certificate_gap: gap,
                }
            }
            SliceGenerator::Curves { family, density } => {
                curve_cone(&CurveSet::new(*family, *density), x)
            }
        },
        ConeSpec::Gallery { name } => match name {
            GalleryName::NiceNotAmenableC => {
                let sol = hull::hull_of_curves(&CurveSet::default(), x);
                ProjectionResult {
                    distance: (x - &sol.point).norm(),
                    point: sol.point,
                    method: HullQp,
                    iterations: sol.iterations,
                    certificate_gap: sol.gap,
                }
            }
            GalleryName::NiceNotAmenableK => curve_cone(&CurveSet::default(), x),
            GalleryName::CylinderKTilde => {
                ProjectionResult::exact(x, gallery::project_k_tilde(x), ClosedForm)
            }
            GalleryName::SturmSlice => {
                ProjectionResult::exact(x, gallery::project_sturm_slice(x), EigenClip)
            }
        },
        ConeSpec::Dual { primal } => {
            // Moreau: P_{K*}(y) = y + P_K(−y)
            let inner = project(primal, &(-x))?;
            let p = x + &inner.point;
            ProjectionResult {
                distance: (x - &p).norm(),
                point: p,
                ..inner
            }
        }
    })
}

fn curve_cone(curves: &CurveSet, x: &Vector) -> ProjectionResult {
    if curves.family == CurveFamily::Cylinder {
        return ProjectionResult::exact(x, gallery::project_k_tilde(x), ProjectionMethod::ClosedForm);
    }
    let (p, it, gap) = nnls::project_curve_cone(curves, x);
    ProjectionResult {
        distance: (x - &p).norm(),
        point: p,
        method: ProjectionMethod::ActiveSet,
        iterations: it,
        certificate_gap: gap,
    }
}

/// Accelerated projected gradient on `min ½‖A z − x‖²` over `z ∈ inner`,
/// with adaptive restart.
fn project_linear_image(a: &Matrix, inner: &ConeSpec, x: &Vector) -> Result<ProjectionResult> {
    let smax = a.singular_values().max();
    let lip = smax * smax;
    let at = a.transpose();
    let mut z = project(inner, &(&at * x / lip))?.point;
    let mut v = z.clone();
    let mut t = 1.0_f64;
    let max_iter = 200_000;
    for it in 1..=max_iter {
        let grad = &at * (a * &v - x);
        let zn = project(inner, &(&v - grad / lip))?.point;
        let step = (&zn - &z).norm();
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let restart = (&v - &zn).dot(&(&zn - &z)) > 0.0;
        if restart {
            t = 1.0;
            v = zn.clone();
        } else {
            v = &zn + (&zn - &z) * ((t - 1.0) / tn);
            t = tn;
        }
        z = zn;
        if step <= 1e-15 * (1.0 + z.norm()) {
            let y = a * &z;
            let r = x - &y;
            // at the optimum Aᵀr lies in the polar of the inner cone
            let gap = r.dot(&y).abs() + project(inner, &(&at * &r))?.point.norm();
            return Ok(ProjectionResult {
                distance: r.norm(),
                point: y,
                method: ProjectionMethod::ProjectedGradient,
                iterations: it,
                certificate_gap: gap.max(0.0),
            });
        }
    }
    let y = a * &z;
    Err(ConeError::NonConvergence {
        iterations: max_iter,
        gap: f64::NAN,
        best: y.iter().copied().collect(),
    })
}

/// Nearest point of the convex hull of a finite point cloud.
pub fn project_hull(samples: &[Vector], x: &Vector) -> Result<ProjectionResult> {
    let Some(first) = samples.first() else {
        return Err(ConeError::Precondition("hull needs at least one sample".into()));
    };
    check_dim(first.len(), x.len())?;
    if samples.iter().flat_map(|s| s.iter()).any(|v| !v.is_finite()) {
        return Err(ConeError::Precondition("samples must be finite".into()));
    }
    let sol = hull::hull_of_points(samples, x);
    if !sol.point.iter().all(|v| v.is_finite()) {
        return Err(ConeError::Numerical("hull QP produced a non-finite iterate".into()));
    }
    Ok(ProjectionResult {
        distance: (x - &sol.point).norm(),
        point: sol.point,
        method: ProjectionMethod::HullQp,
        iterations: sol.iterations,
        certificate_gap: sol.gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian, rng};
    use proptest::prelude::*;

    #[test]
    fn soc_examples() {
        let r = project(&ConeSpec::soc(3), &from_slice(&[1.0, 0.0, -1.0])).unwrap();
        assert_eq!(r.point, Vector::zeros(3));
        assert!((r.distance - 2f64.sqrt()).abs() < 1e-15);
        let r = project(&ConeSpec::soc(3), &from_slice(&[1.0, 0.0, 0.0])).unwrap();
        assert!((r.point.clone() - from_slice(&[0.5, 0.0, 0.5])).norm() < 1e-15);
        assert!((r.distance - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn soc_projection_beats_boundary_grid() {
        // oracle: nearest point over a discretized boundary {(r cos θ, r sin θ, r)}
        let x = from_slice(&[1.0, 0.0, 0.0]);
        let mut best = x.norm();
        for i in 0..=400 {
            let r = 2.0 * i as f64 / 400.0;
            for j in 0..720 {
                let th = std::f64::consts::TAU * j as f64 / 720.0;
                let p = from_slice(&[r * th.cos(), r * th.sin(), r]);
                best = best.min((&x - p).norm());
            }
        }
        let d = distance(&ConeSpec::soc(3), &x).unwrap();
        assert!(d <= best + 1e-12 && best - d < 1e-4);
    }

    #[test]
    fn psd_projection_beats_factor_grid() {
        // oracle: X = L Lᵀ with L lower triangular on a grid
        let x = svec(&Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        let r = project(&ConeSpec::psd(2), &x).unwrap();
        assert!((r.point.clone() - from_slice(&[1.0, 0.0, 0.0])).norm() < 1e-14);
        assert!((r.distance - 1.0).abs() < 1e-14);
        let mut best = f64::INFINITY;
        let n = 80;
        for i in 0..=n {
            for j in 0..=n {
                for k in 0..=n {
                    let a = 1.5 * i as f64 / n as f64;
                    let b = -1.0 + 2.0 * j as f64 / n as f64;
                    let c = 1.0 * k as f64 / n as f64;
                    let l = Matrix::from_row_slice(2, 2, &[a, 0.0, b, c]);
                    best = best.min((svec(&(&l * l.transpose())) - &x).norm());
                }
            }
        }
        assert!(r.distance <= best + 1e-12 && best - r.distance < 1e-3);
    }

    #[test]
    fn moreau_examples() {
        let m = moreau_decompose(&ConeSpec::orthant(2), &from_slice(&[3.0, -2.0])).unwrap();
        assert_eq!(m.cone_part, from_slice(&[3.0, 0.0]));
        assert_eq!(m.polar_part, from_slice(&[0.0, -2.0]));
        let inside = from_slice(&[0.2, 0.1, 1.0]);
        let m = moreau_decompose(&ConeSpec::soc(3), &inside).unwrap();
        assert_eq!(m.polar_part, Vector::zeros(3));
        let m = moreau_decompose(&ConeSpec::soc(3), &from_slice(&[1.0, 0.0, 0.0])).unwrap();
        assert!((m.polar_part.clone() - from_slice(&[0.5, 0.0, -0.5])).norm() < 1e-15);
        assert_eq!(m.cone_part.dot(&m.polar_part), 0.0);
    }

    #[test]
    fn dual_projection_uses_moreau() {
        let k = ConeSpec::Dual {
            primal: Box::new(ConeSpec::gallery(GalleryName::CylinderKTilde)),
        };
        let mut r = rng(3);
        for _ in 0..200 {
            let x = gaussian(4, &mut r);
            let p = project(&k, &x).unwrap().point;
            assert!(gallery::k_tilde_dual_margin(&p) > -1e-12);
        }
    }

    #[test]
    fn linear_image_matches_direct_cone() {
        // image of SOC(3) × R under the sum-set map is {√(x² + y²) ≤ z + w}
        let objs = gallery::cylinder_hull_objects();
        let mut r = rng(11);
        for _ in 0..30 {
            let x = gaussian(4, &mut r);
            let p = project(&objs.dual_sum, &x).unwrap();
            assert!(gallery::dual_sum_margin(&p.point) > -1e-9);
            // oracle: in rotated coordinates c = (z + w)/√2 the set is the
            // circular cone ‖u‖ ≤ √2·c, whose projection lives in the plane of û and c
            let a = 2f64.sqrt();
            let c = (x[2] + x[3]) / a;
            let u = x[0].hypot(x[1]);
            let expected = if u <= a * c {
                0.0
            } else if a * u <= -c {
                u.hypot(c)
            } else {
                (c * a - u).abs() / (1.0 + a * a).sqrt()
            };
            assert!((p.distance - expected).abs() < 1e-7, "{} vs {}", p.distance, expected);
        }
    }

    #[test]
    fn hull_of_curves_bounds_witness_distance() {
        for &t in &[0.2, 0.1] {
            let w = gallery::witness_w(t);
            let r = project(&ConeSpec::gallery(GalleryName::NiceNotAmenableC), &w).unwrap();
            assert!(r.distance.powi(2) <= gallery::witness_gamma_distance_sq(t) + 1e-15);
        }
    }

    fn cones() -> Vec<ConeSpec> {
        vec![
            ConeSpec::soc(4),
            ConeSpec::psd(3),
            ConeSpec::orthant(3),
            ConeSpec::Polyhedral {
                ambient_dim: 3,
                rows: vec![vec![1.0, 0.0, 1.0], vec![-1.0, 2.0, 1.0], vec![0.0, -1.0, 1.0]],
            },
            ConeSpec::gallery(GalleryName::CylinderKTilde),
        ]
    }

    proptest! {
        #[test]
        fn nonexpansive(seed in any::<u64>()) {
            let mut r = rng(seed);
            for k in cones() {
                let x = gaussian(k.dim(), &mut r) * 3.0;
                let y = gaussian(k.dim(), &mut r) * 3.0;
                let px = project(&k, &x).unwrap().point;
                let py = project(&k, &y).unwrap().point;
                prop_assert!((px - py).norm() <= (x - y).norm() + 1e-9);
            }
        }

        #[test]
        fn conic_equivariance(seed in any::<u64>(), lam in 0.01..100.0f64) {
            let mut r = rng(seed);
            for k in cones() {
                let x = gaussian(k.dim(), &mut r);
                let px = project(&k, &x).unwrap().point;
                let pl = project(&k, &(&x * lam)).unwrap().point;
                prop_assert!((pl - px * lam).norm() <= 1e-9 * (1.0 + lam * x.norm()));
            }
        }

        #[test]
        fn moreau_orthogonality(seed in any::<u64>()) {
            let mut r = rng(seed);
            for k in cones() {
                let x = gaussian(k.dim(), &mut r);
                let m = moreau_decompose(&k, &x).unwrap();
                prop_assert!(m.residual < 1e-10 * (1.0 + x.norm_squared()));
                prop_assert!((&m.cone_part + &m.polar_part - &x).norm() < 1e-12);
            }
        }
    }
}
