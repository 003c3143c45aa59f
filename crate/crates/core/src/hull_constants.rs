//! Constants carrying amenability from a compact slice `C ⊂ {<e, x> = 1}` to
//! its conic hull: the slice radius `r`, the antipodality constant `α` of a
//! face, `β = max(1, 1/√(1 − α²))` and `γ = β κ r ‖e‖`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cone::{ConeSpec, SliceSpec};
use crate::error::{check_dim, ConeError, Result};
use crate::face::{FaceDescriptor, FaceHandle};
use crate::linalg::{from_slice, rng, to_vec, unit_directions, unit_gaussian, Tolerance, Vector};
use crate::projection::{self, hull};

pub const DEFAULT_DIRECTIONS: usize = 4096;

/// `max ‖u‖` over the slice samples, in the ambient space of the cone.
pub fn slice_radius(slice: &SliceSpec) -> f64 {
    point_radius(&slice.samples())
}

pub fn point_radius(points: &[Vector]) -> f64 {
    points.iter().map(|p| p.norm()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaEstimate {
    pub alpha: f64,
    /// Angular resolution of the direction grid; bounds the sampling error of `alpha`.
    pub resolution: f64,
    pub worst_x: Vec<f64>,
    pub n_dirs: usize,
}

struct SpanGrid {
    basis: Vec<Vector>,
    dirs: Vec<Vector>,
    resolution: f64,
}

impl SpanGrid {
    fn point(&self, c: &Vector) -> Vector {
        let mut v = Vector::zeros(self.basis[0].len());
        for (b, ci) in self.basis.iter().zip(c.iter()) {
            v.axpy(*ci, b, 1.0);
        }
        v
    }

}

fn span_grid(f: &FaceHandle, n_dirs: usize) -> Result<SpanGrid> {
    let m = f.span_basis.len();
    if m <= 1 {
        return Err(ConeError::Precondition(format!(
            "face has dimension {m}; faces of dimension 0 and 1 are handled directly by a ray distance"
        )));
    }
    let (coords, resolution) = unit_directions(m, n_dirs, 0xa1fa);
    let mut grid = SpanGrid {
        basis: f.span_basis.clone(),
        dirs: Vec::new(),
        resolution,
    };
    grid.dirs = coords.iter().map(|c| grid.point(c)).collect();
    Ok(grid)
}

/// Unit elements of `F`: normalized projections of the span directions, plus
/// the generators when the face lists them.
fn face_units(f: &FaceHandle, grid: &SpanGrid) -> Result<Vec<Vector>> {
    let mut out = Vec::new();
    if let FaceDescriptor::Generated { generators } = &f.descriptor {
        out.extend(generators.iter().map(|g| from_slice(g).normalize()));
    }
    for d in &grid.dirs {
        let p = f.project(d)?;
        let n = p.norm();
        if n > 1e-12 {
            out.push(p / n);
        }
    }
    Ok(out)
}

/// `max_{y ∈ F, ‖y‖ = 1} <x, y>`: exactly `‖P_F x‖` when positive, otherwise
/// the best unit sample. Also returns the maximizer.
fn best_pairing(f: &FaceHandle, units: &[Vector], x: &Vector) -> Result<(f64, Vector)> {
    let p = f.project(x)?;
    let n = p.norm();
    if n > 1e-12 * (1.0 + x.norm()) {
        return Ok((n, p / n));
    }
    let y = units
        .iter()
        .max_by(|a, b| a.dot(x).total_cmp(&b.dot(x)))
        .ok_or_else(|| ConeError::Numerical("face sampler returned no unit elements".into()))?;
    Ok((y.dot(x), y.clone()))
}

/// `min` over unit `x ∈ span F` of `max` over unit `y ∈ F` of `<x, y>`.
///
/// The inner maximum over a cone is attained on its extreme rays, and minimax
/// over the unit ball turns the whole expression into `−dist(0, conv U)` with
/// `U` the unit elements of `F`. Sampling `U` underestimates the hull, so the
/// estimate is a lower bound that increases under refinement.
pub fn antipodality_alpha(f: &FaceHandle, n_dirs: usize) -> Result<AlphaEstimate> {
    let grid = span_grid(f, n_dirs)?;
    let units = face_units(f, &grid)?;
    if units.is_empty() {
        return Err(ConeError::Numerical("face sampler returned no unit elements".into()));
    }
    let sol = hull::hull_of_points(&units, &Vector::zeros(f.ambient_dim()));
    let norm = sol.point.norm();
    let (alpha, worst_x) = if norm <= 1e-12 {
        (0.0, grid.dirs[0].clone())
    } else {
        (-norm, -&sol.point / norm)
    };
    Ok(AlphaEstimate {
        alpha,
        resolution: grid.resolution,
        worst_x: to_vec(&worst_x),
        n_dirs: units.len(),
    })
}

pub fn beta_from_alpha(alpha: f64) -> f64 {
    (1.0 / (1.0 - alpha * alpha).sqrt()).max(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HullConstants {
    pub r: f64,
    pub alpha: f64,
    pub alpha_resolution: f64,
    pub beta: f64,
    pub kappa_slice: f64,
    pub gamma: f64,
    pub e_norm: f64,
}

impl HullConstants {
    pub fn new(r: f64, alpha: &AlphaEstimate, kappa_slice: f64, e_norm: f64) -> Self {
        let beta = beta_from_alpha(alpha.alpha);
        Self {
            r,
            alpha: alpha.alpha,
            alpha_resolution: alpha.resolution,
            beta,
            kappa_slice,
            gamma: beta * kappa_slice * r * e_norm,
            e_norm,
        }
    }

    pub fn text_block(&self) -> String {
        format!(
            "r            {:.6}\nalpha        {:.6} (grid resolution {:.1e})\nbeta         {:.6}\nkappa_slice  {:.6}\n|e|          {:.6}\ngamma        {:.6}\n",
            self.r, self.alpha, self.alpha_resolution, self.beta, self.kappa_slice, self.e_norm, self.gamma
        )
    }
}

/// Constants for face `f` of the conic hull `k`, given a slice-level `κ`.
pub fn hull_constants(k: &ConeSpec, f: &FaceHandle, kappa_slice: f64, n_dirs: usize) -> Result<HullConstants> {
    let slice = k.slice().ok_or_else(|| ConeError::Unsupported {
        operation: "hull_constants",
        variant: k.variant_name(),
    })?;
    let alpha = antipodality_alpha(f, n_dirs)?;
    Ok(HullConstants::new(slice_radius(&slice), &alpha, kappa_slice, slice.e().norm()))
}

/// Distance from a point of the slice hyperplane to the slice itself.
fn slice_distance(slice: &SliceSpec, x: &Vector) -> Result<f64> {
    if let Some(curves) = slice.curves() {
        let p = x.rows(0, 3).into_owned();
        let sol = hull::hull_of_curves(&curves, &p);
        return Ok(((&p - &sol.point).norm_squared() + (x[3] - 1.0).powi(2)).sqrt());
    }
    Ok(projection::project_hull(&slice.samples(), x)?.distance)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SliceBoundReport {
    pub samples: usize,
    /// Draws rejected because they lie in `−K*`.
    pub rejected: usize,
    pub violations: usize,
    /// `max (dist(x, C) − ‖e‖ r dist(x, K))` over the samples.
    pub worst_margin: f64,
    /// `max dist(x, C) / dist(x, K)` over samples with `dist(x, K) > 0`.
    pub worst_ratio: f64,
    pub bound: f64,
    pub r: f64,
    pub e_norm: f64,
}

/// Checks `dist(x, C) ≤ ‖e‖ r dist(x, K) + 1e-8` on `n_samples` points of
/// `H \ (−K*)`, where membership in `−K*` means `P_K(x) = 0`.
pub fn verify_slice_bound(k: &ConeSpec, n_samples: usize, seed: u64) -> Result<SliceBoundReport> {
    let slice = k.slice().ok_or_else(|| ConeError::Unsupported {
        operation: "verify_slice_bound",
        variant: k.variant_name(),
    })?;
    let e = slice.e();
    let en = e.norm();
    let r = slice_radius(&slice);
    let base = &e / (en * en);
    let mut g = rng(seed);
    let mut pts = Vec::with_capacity(n_samples);
    let mut rejected = 0;
    while pts.len() < n_samples {
        let mut v = unit_gaussian(e.len(), &mut g);
        v -= &e * (e.dot(&v) / (en * en));
        let x = &base + v * (2.0 * r * g.random::<f64>());
        let pk = projection::project(k, &x)?.point;
        if pk.norm() <= 1e-12 * (1.0 + x.norm()) {
            rejected += 1;
            if rejected > 100 * n_samples {
                return Err(ConeError::Numerical("slice hyperplane sampler keeps landing in −K*".into()));
            }
            continue;
        }
        pts.push(x);
    }
    let bound = en * r;
    let rows: Vec<(f64, f64)> = pts
        .par_iter()
        .map(|x| Ok((slice_distance(&slice, x)?, projection::distance(k, x)?)))
        .collect::<Result<_>>()?;
    let mut violations = 0;
    let mut worst_margin = f64::NEG_INFINITY;
    let mut worst_ratio = 0.0_f64;
    for (dc, dk) in rows {
        let m = dc - bound * dk;
        worst_margin = worst_margin.max(m);
        if m > 1e-8 {
            violations += 1;
        }
        if dk > 1e-12 {
            worst_ratio = worst_ratio.max(dc / dk);
        }
    }
    Ok(SliceBoundReport {
        samples: n_samples,
        rejected,
        violations,
        worst_margin,
        worst_ratio,
        bound,
        r,
        e_norm: en,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftRow {
    pub t: f64,
    pub dist_cone: f64,
    pub dist_face: f64,
    /// `‖P_F(x + t y) − expected‖`, with expected `0` or `p_t = (<x, y> + t) y`
    /// when `x ∈ −F*`; `None` otherwise.
    pub formula_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotoneShiftReport {
    pub y: Vec<f64>,
    pub x_in_polar: bool,
    pub dist_cone: f64,
    pub dist_face: f64,
    pub alpha: f64,
    pub beta: f64,
    pub rows: Vec<ShiftRow>,
    pub violations: usize,
}

/// Checks `dist(x + t y, K) ≤ dist(x, K)` and `dist(x, F) ≤ β dist(x + t y, F)`
/// on `t_grid`, with `y` a unit maximizer of `<x, ·>` over `F`.
pub fn verify_monotone_shift(k: &ConeSpec, f: &FaceHandle, x: &Vector, t_grid: &[f64]) -> Result<MonotoneShiftReport> {
    check_dim(k.dim(), x.len())?;
    let tol = Tolerance::default();
    let grid = span_grid(f, DEFAULT_DIRECTIONS)?;
    if (x - f.affine_hull.project(x)).norm() > tol.eps(x.norm()) {
        return Err(ConeError::Precondition("x is not in span F".into()));
    }
    let units = face_units(f, &grid)?;
    let alpha = antipodality_alpha(f, DEFAULT_DIRECTIONS)?;
    let beta = beta_from_alpha(alpha.alpha);
    let (xy, y) = best_pairing(f, &units, x)?;
    let x_in_polar = f.project(x)?.norm() <= 1e-12 * (1.0 + x.norm());
    let dist_cone = projection::distance(k, x)?;
    let dist_face = f.distance(x)?;
    let mut rows = Vec::new();
    let mut violations = 0;
    for &t in t_grid {
        let z = x + &y * t;
        let pf = f.project(&z)?;
        let dk = projection::distance(k, &z)?;
        let df = (&z - &pf).norm();
        let slack = 1e-9 * (1.0 + x.norm() + t);
        if dk > dist_cone + slack || dist_face > beta * df + slack {
            violations += 1;
        }
        let formula_error = x_in_polar.then(|| {
            let expected = if t <= -xy { Vector::zeros(x.len()) } else { &y * (xy + t) };
            (&pf - expected).norm()
        });
        rows.push(ShiftRow {
            t,
            dist_cone: dk,
            dist_face: df,
            formula_error,
        });
    }
    Ok(MonotoneShiftReport {
        y: to_vec(&y),
        x_in_polar,
        dist_cone,
        dist_face,
        alpha: alpha.alpha,
        beta,
        rows,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::SliceGenerator;
    use crate::face::FaceDescriptor;
    use crate::gallery::{self, CurveSet, GalleryName};
    use crate::linalg::from_slice;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    fn grid_alpha(units: &[Vector], xs: &[Vector]) -> f64 {
        xs.iter()
            .map(|x| units.iter().map(|y| x.dot(y)).fold(f64::NEG_INFINITY, f64::max))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn radius_examples() {
        let disk: Vec<Vec<f64>> = (0..64)
            .map(|i| {
                let th = i as f64 * PI / 32.0;
                vec![th.cos(), th.sin(), 1.0]
            })
            .collect();
        let s = SliceSpec {
            e: vec![0.0, 0.0, 1.0],
            generator: SliceGenerator::Points { points: disk },
        };
        assert!((slice_radius(&s) - SQRT_2).abs() < 1e-14);
        let simplex = SliceSpec {
            e: vec![1.0, 1.0, 1.0],
            generator: SliceGenerator::Points {
                points: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            },
        };
        assert_eq!(slice_radius(&simplex), 1.0);
        // dense grid oracle over γ: ‖γ(t)‖² = 5 − 4cos 2t + z(t)², largest at t = π/2
        let r = point_radius(&CurveSet::default().samples());
        let oracle = (0..=20_000)
            .map(|i| gallery::gamma(PI * i as f64 / 20_000.0).norm())
            .fold(SQRT_2, f64::max);
        assert!((r - oracle).abs() < 1e-6);
        assert!((r - 3.0).abs() < 1e-6);
    }

    #[test]
    fn alpha_examples() {
        let o = ConeSpec::orthant(2);
        let f = FaceHandle::whole(o).unwrap();
        let a = antipodality_alpha(&f, 4096).unwrap();
        let xs: Vec<Vector> = crate::linalg::circle_grid(4096);
        let units: Vec<Vector> = (0..=1000)
            .map(|i| {
                let th = 0.5 * PI * i as f64 / 1000.0;
                from_slice(&[th.cos(), th.sin()])
            })
            .collect();
        assert!((a.alpha - grid_alpha(&units, &xs)).abs() < 1e-5);
        assert!((a.alpha + FRAC_1_SQRT_2).abs() < 1e-5);

        let half = ConeSpec::Polyhedral {
            ambient_dim: 2,
            rows: vec![vec![1.0, 0.0]],
        };
        let a = antipodality_alpha(&FaceHandle::whole(half).unwrap(), 4096).unwrap();
        assert!(a.alpha.abs() < 1e-5, "{}", a.alpha);

        let k = ConeSpec::gallery(GalleryName::CylinderKTilde);
        let disk = FaceHandle::new(k, FaceDescriptor::LiftedDiskAlpha).unwrap();
        let a = antipodality_alpha(&disk, 4096).unwrap();
        assert!(a.alpha > -1.0 && a.alpha <= 0.0);
        // axis (0,0,1,1)/√2 against the rim generator (1,0,1,1)/√3
        assert!((a.alpha + (2.0f64 / 3.0).sqrt()).abs() < 1e-3);
        let b = antipodality_alpha(&disk, 8192).unwrap();
        assert!((a.alpha - b.alpha).abs() < 1e-3);

        assert!(antipodality_alpha(&FaceHandle::from_descriptor(&ConeSpec::soc(3), "ray=[1,0,1]").unwrap(), 64).is_err());
    }

    #[test]
    fn alpha_is_nondecreasing_under_nested_refinement() {
        let soc = ConeSpec::soc(3);
        let f = FaceHandle::new(
            soc.clone(),
            FaceDescriptor::Generated {
                generators: vec![vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]],
            },
        )
        .unwrap();
        // nested samples of the segment between the two generators
        let units = |n: usize| -> Vec<Vector> {
            (0..=n)
                .map(|i| {
                    let l = i as f64 / n as f64;
                    from_slice(&[1.0 - l, l, 1.0]).normalize()
                })
                .collect()
        };
        let mut last = f64::NEG_INFINITY;
        for n in [1, 2, 4, 8, 16] {
            let a = -hull::hull_of_points(&units(n), &Vector::zeros(3)).point.norm();
            assert!(a >= last - 1e-12);
            last = a;
        }
        let est = antipodality_alpha(&f, 4096).unwrap().alpha;
        assert!(est <= last + 1e-9 && (est - last).abs() < 1e-3, "{est} {last}");
        assert!((last + 3f64.sqrt() / 2.0).abs() < 1e-9);
    }

    #[test]
    fn beta_formula() {
        assert_eq!(beta_from_alpha(0.0), 1.0);
        assert!((beta_from_alpha(-(2.0f64 / 3.0).sqrt()) - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn slice_bound_holds_for_gallery_and_polytope() {
        let k = ConeSpec::gallery(GalleryName::NiceNotAmenableK);
        let rep = verify_slice_bound(&k, 200, 1).unwrap();
        assert_eq!(rep.violations, 0, "{rep:?}");
        assert!((rep.r - 3f64.sqrt().max(10f64.sqrt())).abs() < 1e-6);

        let mut g = rng(7);
        let pts: Vec<Vec<f64>> = (0..12)
            .map(|_| {
                let v = unit_gaussian(3, &mut g);
                vec![v[0], v[1], v[2], 1.0]
            })
            .collect();
        let poly = ConeSpec::ConicHull {
            slice: SliceSpec {
                e: vec![0.0, 0.0, 0.0, 1.0],
                generator: SliceGenerator::Points { points: pts },
            },
        };
        let rep = verify_slice_bound(&poly, 300, 2).unwrap();
        assert_eq!(rep.violations, 0, "{rep:?}");
        assert!(rep.worst_ratio <= rep.bound + 1e-8);
    }

    #[test]
    fn cylinder_face_ratio_stays_below_gamma() {
        let k = ConeSpec::gallery(GalleryName::CylinderKTilde);
        let f = FaceHandle::new(k.clone(), FaceDescriptor::LiftedDiskAlpha).unwrap();
        // on the slice the top disk has κ = 1: the nearest point of the
        // cylinder to (p, 1) with |p| > 1 is on the rim
        let c = hull_constants(&k, &f, 1.0, 4096).unwrap();
        assert!((c.gamma - 3.0).abs() < 1e-2, "{c:?}");
        let mut g = rng(3);
        for _ in 0..2000 {
            let mut x = Vector::zeros(4);
            for b in &f.span_basis {
                x.axpy(g.random_range(-2.0..2.0), b, 1.0);
            }
            let dk = projection::distance(&k, &x).unwrap();
            if dk > 1e-9 {
                assert!(f.distance(&x).unwrap() / dk <= c.gamma + 1e-8);
            }
        }
        assert!(c.text_block().contains("gamma"));
    }

    #[test]
    fn monotone_shift_examples() {
        let o = ConeSpec::orthant(2);
        let f = FaceHandle::whole(o.clone()).unwrap();
        let rep = verify_monotone_shift(&o, &f, &from_slice(&[1.0, -1.0]), &[0.0, 0.5, 1.0, 4.0]).unwrap();
        assert_eq!(rep.violations, 0);
        assert!((from_slice(&rep.y) - from_slice(&[1.0, 0.0])).norm() < 1e-12);
        for row in &rep.rows {
            assert!((row.dist_face - 1.0).abs() < 1e-12);
        }

        let k = ConeSpec::gallery(GalleryName::CylinderKTilde);
        let f = FaceHandle::new(k.clone(), FaceDescriptor::LiftedDiskAlpha).unwrap();
        let x = from_slice(&[0.0, 0.0, -1.0, -1.0]);
        let rep = verify_monotone_shift(&k, &f, &x, &[0.0, 0.5, 1.0, 1.2, 2.0, 5.0]).unwrap();
        assert!(rep.x_in_polar);
        assert_eq!(rep.violations, 0);
        for row in &rep.rows {
            assert!(row.formula_error.unwrap() < 1e-9, "{row:?}");
        }

        let inside = from_slice(&[0.2, 0.1, 1.0, 1.0]);
        let rep = verify_monotone_shift(&k, &f, &inside, &[0.0, 1.0]).unwrap();
        assert!(rep.rows.iter().all(|r| r.dist_face < 1e-12));
    }
}
