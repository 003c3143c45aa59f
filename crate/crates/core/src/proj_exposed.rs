//! Projectional exposedness: explicit rank-one and rank-two projections onto
//! low-dimensional faces, and the Sung–Tam test for codimension-1 faces.

use serde::Serialize;

use crate::amenability::{ErrorBoundEstimate, Verdict};
use crate::cone::ConeSpec;
use crate::error::{check_dim, ConeError, Result};
use crate::face::{conjugate_face, is_exposed, minimal_face, Exposure, FaceDescriptor, FaceHandle};
use crate::gallery::{self, GalleryName};
use crate::linalg::{rng, svec, to_vec, unit_directions, Matrix, Tolerance, Vector};
use crate::projection;

pub const IDEMPOTENCY_TOL: f64 = 1e-12;

/// An idempotent linear map meant to send `K` onto `target_face`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionMap {
    pub matrix: Matrix,
    pub target_face: FaceHandle,
    /// `‖P² − P‖_F`.
    pub idempotency_residual: f64,
    /// Cone samples whose image leaves the target face.
    pub containment_violations: usize,
    /// `max ‖P f − f‖ / (1 + ‖f‖)` over face samples.
    pub fixed_point_residual: f64,
    pub samples: usize,
}

impl ProjectionMap {
    pub fn certified(&self) -> bool {
        self.idempotency_residual < IDEMPOTENCY_TOL
            && self.containment_violations == 0
            && self.fixed_point_residual < 1e-10
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        &self.matrix * x
    }

    pub fn summary(&self) -> ProjectionMapSummary {
        ProjectionMapSummary {
            matrix: (0..self.matrix.nrows())
                .map(|i| self.matrix.row(i).iter().copied().collect())
                .collect(),
            target_face: self.target_face.descriptor.clone(),
            idempotency_residual: self.idempotency_residual,
            containment_violations: self.containment_violations,
            fixed_point_residual: self.fixed_point_residual,
            samples: self.samples,
            certified: self.certified(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionMapSummary {
    pub matrix: Vec<Vec<f64>>,
    pub target_face: FaceDescriptor,
    pub idempotency_residual: f64,
    pub containment_violations: usize,
    pub fixed_point_residual: f64,
    pub samples: usize,
    pub certified: bool,
}

fn verify_map(k: &ConeSpec, face: FaceHandle, matrix: Matrix, n_samples: usize, seed: u64) -> Result<ProjectionMap> {
    let idempotency_residual = (&matrix * &matrix - &matrix).norm();
    let mut r = rng(seed);
    let mut containment_violations = 0;
    for x in k.sample(n_samples, &mut r)? {
        let px = &matrix * &x;
        if face.distance(&px)? > 1e-9 * (1.0 + x.norm()) {
            containment_violations += 1;
        }
    }
    let mut fixed_point_residual = 0.0_f64;
    for f in face.sample(n_samples.min(1000), &mut r)? {
        fixed_point_residual = fixed_point_residual.max((&matrix * &f - &f).norm() / (1.0 + f.norm()));
    }
    Ok(ProjectionMap {
        matrix,
        target_face: face,
        idempotency_residual,
        containment_violations,
        fixed_point_residual,
        samples: n_samples,
    })
}

/// `lin K = {0}` on samples: no sampled nonzero `s` has `−s ∈ K`.
fn check_pointed(k: &ConeSpec, n: usize, seed: u64) -> Result<()> {
    let mut r = rng(seed ^ 0x9e37);
    for s in k.sample(n, &mut r)? {
        let ns = s.norm();
        if ns > 1e-9 && projection::distance(k, &(-&s))? <= 1e-9 * ns {
            return Err(ConeError::Precondition(format!(
                "cone is not pointed: ±{:?} both belong to it",
                s.as_slice()
            )));
        }
    }
    Ok(())
}

fn check_member(k: &ConeSpec, x: &Vector, what: &str) -> Result<()> {
    check_dim(k.dim(), x.len())?;
    if x.norm() == 0.0 {
        return Err(ConeError::Precondition(format!("{what} must be nonzero")));
    }
    if !k.contains(x, &Tolerance::default())? {
        return Err(ConeError::Precondition(format!("{what} is not in the cone")));
    }
    Ok(())
}

/// Face generated by the extreme ray through `x`.
fn ray_face(k: &ConeSpec, x: &Vector) -> Result<FaceHandle> {
    let f = match minimal_face(k, x, &Tolerance::default()) {
        Ok(f) => f,
        Err(ConeError::Unsupported { .. }) => FaceHandle::new(
            k.clone(),
            FaceDescriptor::Ray {
                generator: to_vec(x),
            },
        )?,
        Err(e) => return Err(e),
    };
    if f.dim() != 1 {
        return Err(ConeError::Precondition(format!(
            "{:?} does not generate an extreme ray (minimal face has dimension {})",
            x.as_slice(),
            f.dim()
        )));
    }
    Ok(f)
}

/// `P = x zᵀ` with `z ∈ K*` and `<x, z> = 1`.
pub fn build_rank_one_projection(k: &ConeSpec, x: &Vector, n_samples: usize, seed: u64) -> Result<ProjectionMap> {
    check_member(k, x, "x")?;
    check_pointed(k, 200, seed)?;
    let face = ray_face(k, x)?;
    let dual = k.dual_cone()?;
    let mut cands = vec![projection::project(&dual, x)?.point];
    if let Ok(s) = dual.sample(200, &mut rng(seed)) {
        cands.extend(s);
    }
    let z = cands
        .into_iter()
        .filter(|z| z.norm() > 0.0)
        .max_by(|a, b| (a.dot(x) / a.norm()).total_cmp(&(b.dot(x) / b.norm())))
        .filter(|z| z.dot(x) > 1e-9 * x.norm() * z.norm())
        .ok_or_else(|| ConeError::Numerical("no dual element pairs positively with x".into()))?;
    let z = &z / z.dot(x);
    verify_map(k, face, x * z.transpose(), n_samples, seed)
}

/// Generators of a conjugate face, plus samples from it.
fn conjugate_candidates(conj: &FaceHandle, seed: u64) -> Result<Vec<Vector>> {
    let mut out = match &conj.descriptor {
        FaceDescriptor::Generated { generators } => generators.iter().map(|g| Vector::from_vec(g.clone())).collect(),
        FaceDescriptor::Ray { generator } => vec![Vector::from_vec(generator.clone())],
        FaceDescriptor::OrthantZeros { zero } => (0..conj.ambient_dim())
            .filter(|i| !zero.contains(i))
            .map(|i| Vector::from_fn(conj.ambient_dim(), |j, _| if i == j { 1.0 } else { 0.0 }))
            .collect(),
        _ => Vec::new(),
    };
    out.extend(conj.sample(400, &mut rng(seed))?);
    Ok(out)
}

/// `z ∈ conj` with `<other, z> = 1`, choosing the candidate with the largest
/// normalized pairing.
fn separating_element(conj: &FaceHandle, other: &Vector, label: &str, seed: u64) -> Result<Vector> {
    let cands = conjugate_candidates(conj, seed)?;
    let best = cands
        .iter()
        .filter(|z| z.norm() > 0.0)
        .map(|z| (z.dot(other) / (z.norm() * other.norm()), z))
        .max_by(|a, b| a.0.total_cmp(&b.0));
    match best {
        Some((c, z)) if c > 1e-8 => Ok(z / z.dot(other)),
        Some((c, _)) => Err(ConeError::NotSeparable(format!(
            "{label}: best normalized pairing over {} conjugate-face candidates is {c:.3e}",
            cands.len()
        ))),
        None => Err(ConeError::NotSeparable(format!("{label}: conjugate face has no nonzero candidates"))),
    }
}

/// `P = x z₂ᵀ + y z₁ᵀ` with `z₁ ∈ F_x^Δ \ F_y^Δ`, `z₂ ∈ F_y^Δ \ F_x^Δ` scaled so
/// that `<y, z₁> = <x, z₂> = 1`.
pub fn build_rank_two_projection(
    k: &ConeSpec,
    x: &Vector,
    y: &Vector,
    n_samples: usize,
    seed: u64,
) -> Result<ProjectionMap> {
    check_member(k, x, "x")?;
    check_member(k, y, "y")?;
    check_pointed(k, 200, seed)?;
    let fx = ray_face(k, x)?;
    let fy = ray_face(k, y)?;
    for (f, label) in [(&fx, "x"), (&fy, "y")] {
        if let Exposure::NotExposed { .. } = is_exposed(k, f, 500, seed)? {
            return Err(ConeError::Precondition(format!("the ray through {label} is not exposed")));
        }
    }
    let cx = conjugate_face(k, &fx)?;
    let cy = conjugate_face(k, &fy)?;
    let z1 = separating_element(&cx, y, "z1 ∈ F_x^Δ \\ F_y^Δ", seed)?;
    let z2 = separating_element(&cy, x, "z2 ∈ F_y^Δ \\ F_x^Δ", seed ^ 1)?;
    let scale = 1.0 + x.norm() * z1.norm() + y.norm() * z2.norm();
    let pair_err = (x.dot(&z1).abs() + y.dot(&z2).abs()) / scale;
    if pair_err > 1e-10 {
        return Err(ConeError::Verification(format!(
            "pairing conditions fail: |<x, z1>| + |<y, z2>| = {pair_err:.3e}"
        )));
    }
    let face = FaceHandle::new(
        k.clone(),
        FaceDescriptor::Generated {
            generators: vec![to_vec(x), to_vec(y)],
        },
    )?;
    let p = x * z2.transpose() + y * z1.transpose();
    verify_map(k, face, p, n_samples, seed)
}

// ---------------------------------------------------------------------------
// Sung–Tam

/// Shrink radii `0.5 · 2⁻ᵏ`, `k = 0..=12`.
pub fn default_shrink_schedule() -> Vec<f64> {
    (0..=12).map(|k| 0.5 * 0.5f64.powi(k)).collect()
}

fn unit(v: Vector) -> Vector {
    let n = v.norm();
    v / n
}

/// Unit generators of extreme rays of `K*`: exact lists for polyhedral
/// cones, parameterized families for the atoms and gallery cones.
pub fn dual_extreme_rays(k: &ConeSpec, n_rays: usize) -> Result<Vec<Vector>> {
    let d = k.dim();
    Ok(match k {
        ConeSpec::NonnegativeOrthant { dim } => (0..*dim)
            .map(|i| Vector::from_fn(*dim, |j, _| if i == j { 1.0 } else { 0.0 }))
            .collect(),
        ConeSpec::Polyhedral { rows, .. } => {
            let gens: Vec<Vector> = rows.iter().map(|r| Vector::from_vec(r.clone())).collect();
            (0..gens.len())
                .filter(|&i| gens[i].norm() > 0.0)
                .filter(|&i| {
                    let others: Vec<Vector> = (0..gens.len()).filter(|&j| j != i).map(|j| gens[j].clone()).collect();
                    let (p, _, _) = projection::nnls::project_generated(&others, &gens[i]);
                    (&gens[i] - p).norm() > 1e-10 * gens[i].norm()
                })
                .map(|i| unit(gens[i].clone()))
                .collect()
        }
        ConeSpec::Generated { generators, .. } => polyhedral_extreme_rays(generators, d)?,
        ConeSpec::SecondOrder { dim } => {
            let (dirs, _) = unit_directions(dim - 1, n_rays, 17);
            dirs.iter()
                .map(|u| {
                    let mut v = Vector::from_element(*dim, 1.0);
                    v.rows_mut(0, dim - 1).copy_from(u);
                    unit(v)
                })
                .collect()
        }
        ConeSpec::Psd { n } => {
            let (dirs, _) = unit_directions(*n, n_rays, 17);
            dirs.iter().map(|v| unit(svec(&(v * v.transpose())))).collect()
        }
        ConeSpec::Gallery {
            name: GalleryName::CylinderKTilde,
        } => {
            let mut out: Vec<Vector> = (0..n_rays)
                .map(|i| {
                    let s = std::f64::consts::TAU * i as f64 / n_rays as f64;
                    unit(Vector::from_vec(vec![s.cos(), s.sin(), 0.0, 1.0]))
                })
                .collect();
            out.push(unit(Vector::from_vec(vec![0.0, 0.0, 1.0, 1.0])));
            out.push(unit(Vector::from_vec(vec![0.0, 0.0, -1.0, 1.0])));
            out
        }
        ConeSpec::Gallery {
            name: GalleryName::NiceNotAmenableK,
        } => {
            // rays supporting K along α(t); the height blows up as t → 0
            let mut ts: Vec<f64> = (1..n_rays)
                .map(|i| std::f64::consts::TAU * i as f64 / n_rays as f64)
                .collect();
            ts.extend((1..=24).map(|j| 0.5f64.powi(j)));
            let mut out: Vec<Vector> = ts.into_iter().map(gallery::polar_extreme_ray).collect();
            out.push(gallery::disk_dual_tip());
            out.push(unit(Vector::from_vec(vec![0.0, 0.0, 1.0, 1.0])));
            out
        }
        _ => {
            return Err(ConeError::Unsupported {
                operation: "dual_extreme_rays",
                variant: k.variant_name(),
            })
        }
    })
}

/// Extreme rays of `{z : <g_i, z> ≥ 0}` by enumerating `d − 1` active generators.
fn polyhedral_extreme_rays(generators: &[Vec<f64>], d: usize) -> Result<Vec<Vector>> {
    let g: Vec<Vector> = generators.iter().map(|r| Vector::from_vec(r.clone())).collect();
    if d < 2 || g.len() < d - 1 {
        return Ok(Vec::new());
    }
    let mut out: Vec<Vector> = Vec::new();
    let mut idx: Vec<usize> = (0..d - 1).collect();
    loop {
        // square with a zero row so the null vector appears in Vᵀ
        let a = Matrix::from_fn(d, d, |i, j| if i + 1 < d { g[idx[i]][j] } else { 0.0 });
        let svd = a.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let sv = &svd.singular_values;
        let smax = sv.max();
        let rank = sv.iter().filter(|&&s| s > 1e-10 * smax.max(1e-300)).count();
        if rank == d - 1 {
            let (null, _) = sv.argmin();
            let z: Vector = vt.row(null).transpose();
            for sg in [1.0, -1.0] {
                let v = &z * sg;
                if g.iter().all(|gi| gi.dot(&v) >= -1e-10 * gi.norm()) && out.iter().all(|o| (o - &v).norm() > 1e-9) {
                    out.push(v);
                }
            }
        }
        // next combination
        let mut i = d - 1;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if idx[i] < g.len() - (d - 1 - i) {
                idx[i] += 1;
                for j in i + 1..d - 1 {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShrinkLevel {
    pub k: usize,
    pub radius: f64,
    /// Extreme rays of `K*` other than `F^Δ` inside the ball.
    pub hits: usize,
    pub nearest: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SungTamOutcome {
    NoConvergingSequenceFound,
    /// One ray per shrink level, each inside its ball.
    ConvergingExtremeRays { rays: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SungTamReport {
    pub w: Vec<f64>,
    pub pool_size: usize,
    pub levels: Vec<ShrinkLevel>,
    pub outcome: SungTamOutcome,
}

impl SungTamReport {
    pub fn converging(&self) -> bool {
        matches!(self.outcome, SungTamOutcome::ConvergingExtremeRays { .. })
    }

    /// Largest `k` such that every level `0..=k` has a hit.
    pub fn deepest_level(&self) -> Option<usize> {
        self.levels.iter().take_while(|l| l.hits > 0).last().map(|l| l.k)
    }
}

/// Unit generator of `F^Δ` when it is a ray.
fn conjugate_ray(k: &ConeSpec, f: &FaceHandle) -> Result<Vector> {
    let conj = conjugate_face(k, f)?;
    if conj.dim() != 1 {
        return Err(ConeError::Precondition(format!(
            "conjugate face has dimension {}, expected a ray",
            conj.dim()
        )));
    }
    let w = unit(conj.span_basis[0].clone());
    let dual = k.dual_cone()?;
    Ok(if projection::distance(&dual, &w)? <= projection::distance(&dual, &(-&w))? {
        w
    } else {
        -w
    })
}

/// Looks for extreme rays of `K*` other than `F^Δ = cone(w)` in the balls of
/// the given radii around `w`. Hits at every level are reported as a
/// converging sequence.
pub fn sung_tam_probe(k: &ConeSpec, f: &FaceHandle, n_rays: usize, schedule: &[f64]) -> Result<SungTamReport> {
    if !k.is_cone() {
        return Err(ConeError::Unsupported {
            operation: "sung_tam_probe",
            variant: k.variant_name(),
        });
    }
    if f.dim() + 1 != k.dim() {
        return Err(ConeError::Precondition(format!(
            "face has dimension {} in a cone of dimension {}; codimension 1 is required",
            f.dim(),
            k.dim()
        )));
    }
    check_pointed(k, 200, 5)?;
    let w = conjugate_ray(k, f)?;
    let pool: Vec<Vector> = dual_extreme_rays(k, n_rays)?
        .into_iter()
        .filter(|u| (u - &w).norm() > 1e-9)
        .collect();
    let mut levels = Vec::new();
    let mut rays = Vec::new();
    for (i, &radius) in schedule.iter().enumerate() {
        let inside: Vec<&Vector> = pool.iter().filter(|u| (*u - &w).norm() <= radius).collect();
        let nearest = inside.iter().map(|u| (*u - &w).norm()).min_by(f64::total_cmp);
        if let Some(u) = inside.iter().max_by(|a, b| (**a - &w).norm().total_cmp(&(**b - &w).norm())) {
            rays.push(to_vec(u));
        }
        levels.push(ShrinkLevel {
            k: i,
            radius,
            hits: inside.len(),
            nearest,
        });
    }
    let outcome = if !levels.is_empty() && levels.iter().all(|l| l.hits > 0) {
        SungTamOutcome::ConvergingExtremeRays { rays }
    } else {
        SungTamOutcome::NoConvergingSequenceFound
    };
    Ok(SungTamReport {
        w: to_vec(&w),
        pool_size: pool.len(),
        levels,
        outcome,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PexpConsistency {
    pub amenability: Verdict,
    pub sung_tam: SungTamReport,
    pub consistent: bool,
    pub note: String,
}

/// Amenable codimension-1 faces are projectionally exposed, so bounded
/// error-bound evidence together with converging rays is flagged.
pub fn codim1_amenable_implies_pexp_check(
    k: &ConeSpec,
    f: &FaceHandle,
    evidence: &ErrorBoundEstimate,
    n_rays: usize,
) -> Result<PexpConsistency> {
    let st = sung_tam_probe(k, f, n_rays, &default_shrink_schedule())?;
    let (consistent, note) = match (evidence.verdict, st.converging()) {
        (Verdict::Bounded, false) => (true, "amenable evidence, no converging rays"),
        (Verdict::Bounded, true) => (
            false,
            "contradiction: amenable evidence with converging rays (insufficient sampling or a defect)",
        ),
        (Verdict::GrowthDetected, true) => (true, "growth and converging rays: consistent with the contrapositive"),
        (Verdict::GrowthDetected, false) => (true, "growth without converging rays: no conclusion"),
        (Verdict::Inconclusive, _) => (true, "amenability evidence inconclusive"),
    };
    Ok(PexpConsistency {
        amenability: evidence.verdict,
        sung_tam: st,
        consistent,
        note: note.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amenability::{estimate_kappa, estimate_kappa_with, ProbeConfig};
    use crate::linalg::{from_slice, smat, BoundedRegion};
    use rand::Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn rank_one_examples() {
        let o = ConeSpec::orthant(2);
        let p = build_rank_one_projection(&o, &from_slice(&[1.0, 0.0]), 500, 1).unwrap();
        assert!(p.certified());
        assert_eq!(p.matrix, Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));

        let soc = ConeSpec::soc(3);
        let x = from_slice(&[FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]);
        let p = build_rank_one_projection(&soc, &x, 2000, 2).unwrap();
        assert!(p.certified(), "{:?}", p.summary());
        // images are nonnegative multiples of x
        let mut g = rng(4);
        for s in soc.sample(200, &mut g).unwrap() {
            let ps = p.apply(&s);
            let c = ps.dot(&x);
            assert!(c >= -1e-12 && (&ps - &x * c).norm() < 1e-12);
        }

        let psd = ConeSpec::psd(2);
        let e11 = from_slice(&[1.0, 0.0, 0.0]);
        let p = build_rank_one_projection(&psd, &e11, 500, 3).unwrap();
        assert!(p.certified());
        for _ in 0..20 {
            let v = from_slice(&[g.random_range(-1.0..1.0), g.random_range(-1.0..1.0), g.random_range(-1.0..1.0)]);
            let px = smat(&p.apply(&v), 2);
            let m = smat(&v, 2);
            assert!((px[(0, 0)] - m[(0, 0)]).abs() < 1e-12);
            assert!(px[(0, 1)].abs() < 1e-12 && px[(1, 1)].abs() < 1e-12);
        }
    }

    #[test]
    fn rank_one_rejects_non_extreme_and_outside_points() {
        let o = ConeSpec::orthant(2);
        assert!(build_rank_one_projection(&o, &from_slice(&[1.0, 1.0]), 10, 1).is_err());
        assert!(build_rank_one_projection(&o, &from_slice(&[-1.0, 0.0]), 10, 1).is_err());
        let half = ConeSpec::Halfspace {
            normal: vec![1.0, 0.0],
            offset: 0.0,
        };
        assert!(build_rank_one_projection(&half, &from_slice(&[0.0, 1.0]), 10, 1).is_err());
    }

    #[test]
    fn rank_two_examples() {
        let o = ConeSpec::orthant(3);
        let e = |i: usize| Vector::from_fn(3, |j, _| if i == j { 1.0 } else { 0.0 });
        let p = build_rank_two_projection(&o, &e(0), &e(1), 2000, 1).unwrap();
        assert!(p.certified());
        assert!((p.matrix.clone() - Matrix::from_diagonal(&from_slice(&[1.0, 1.0, 0.0]))).norm() < 1e-15);

        let psd = ConeSpec::psd(2);
        let p = build_rank_two_projection(&psd, &from_slice(&[1.0, 0.0, 0.0]), &from_slice(&[0.0, 0.0, 1.0]), 2000, 2)
            .unwrap();
        assert!(p.certified(), "{:?}", p.summary());
        // diagonal extraction
        let v = from_slice(&[0.3, -1.2, 2.0]);
        assert!((p.apply(&v) - from_slice(&[0.3, 0.0, 2.0])).norm() < 1e-12);

        let kt = ConeSpec::gallery(GalleryName::CylinderKTilde);
        let x = from_slice(&[1.0, 0.0, 1.0, 1.0]);
        let y = from_slice(&[1.0, 0.0, -1.0, 1.0]);
        let p = build_rank_two_projection(&kt, &x, &y, 2000, 3).unwrap();
        assert!(p.certified(), "{:?}", p.summary());
        assert!((p.apply(&x) - &x).norm() < 1e-12 && (p.apply(&y) - &y).norm() < 1e-12);
    }

    #[test]
    fn rank_two_same_ray_is_not_separable() {
        let o = ConeSpec::orthant(2);
        let err = build_rank_two_projection(&o, &from_slice(&[1.0, 0.0]), &from_slice(&[2.0, 0.0]), 10, 1).unwrap_err();
        assert!(matches!(err, ConeError::NotSeparable(_)), "{err:?}");
    }

    #[test]
    fn polyhedral_extreme_rays_of_generated_dual() {
        // dual of cone{e1, e2, e1 + e3, e2 + e3} in R³; oracle: every ray found is
        // orthogonal to two independent generators and nonnegative on all
        let gens = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
        ];
        let rays = polyhedral_extreme_rays(&gens, 3).unwrap();
        assert_eq!(rays.len(), 4);
        for r in &rays {
            let zeros = gens.iter().filter(|g| from_slice(g).dot(r).abs() < 1e-12).count();
            assert!(zeros >= 2);
            assert!(gens.iter().all(|g| from_slice(g).dot(r) >= -1e-12));
        }
    }

    #[test]
    fn sung_tam_examples() {
        let sched = default_shrink_schedule();
        let o = ConeSpec::orthant(3);
        let facet = FaceHandle::from_descriptor(&o, "orthant:zero=2").unwrap();
        let rep = sung_tam_probe(&o, &facet, 64, &sched).unwrap();
        assert!(!rep.converging());
        assert!(rep.levels.iter().all(|l| l.hits == 0));
        assert!((from_slice(&rep.w) - from_slice(&[0.0, 0.0, 1.0])).norm() < 1e-12);

        let kt = ConeSpec::gallery(GalleryName::CylinderKTilde);
        let disk = FaceHandle::new(kt.clone(), FaceDescriptor::LiftedDiskAlpha).unwrap();
        let rep = sung_tam_probe(&kt, &disk, 256, &sched).unwrap();
        assert!(!rep.converging());

        let k = ConeSpec::gallery(GalleryName::NiceNotAmenableK);
        let disk = FaceHandle::new(k.clone(), FaceDescriptor::LiftedDiskAlpha).unwrap();
        let rep = sung_tam_probe(&k, &disk, 256, &sched).unwrap();
        assert!(rep.converging(), "{rep:?}");
        assert!(rep.deepest_level().unwrap() >= 8);

        let soc = ConeSpec::soc(3);
        let ray = FaceHandle::from_descriptor(&soc, "ray=[1,0,1]").unwrap();
        assert!(matches!(sung_tam_probe(&soc, &ray, 64, &sched), Err(ConeError::Precondition(_))));
    }

    #[test]
    fn codim1_consistency() {
        let o = ConeSpec::orthant(3);
        let facet = FaceHandle::from_descriptor(&o, "orthant:zero=2").unwrap();
        let region = BoundedRegion::ball(from_slice(&[0.5, 0.5, 0.0]), 1.0).unwrap();
        let ev = estimate_kappa(&o, &facet, &region, 400, 1).unwrap();
        let c = codim1_amenable_implies_pexp_check(&o, &facet, &ev, 64).unwrap();
        assert_eq!(c.amenability, Verdict::Bounded);
        assert!(c.consistent && !c.sung_tam.converging());

        let k = ConeSpec::gallery(GalleryName::NiceNotAmenableK);
        let disk = FaceHandle::new(k.clone(), FaceDescriptor::LiftedDiskAlpha).unwrap();
        let region = BoundedRegion::ball(from_slice(&[1.0, 0.0, 1.0, 1.0]), 1.0).unwrap();
        let mut seed = gallery::witness_w(0.2);
        seed = Vector::from_vec(vec![seed[0], seed[1], seed[2], 1.0]);
        let ev = estimate_kappa_with(&k, &disk, &region, 100, 4, &[seed], &ProbeConfig::default()).unwrap();
        let c = codim1_amenable_implies_pexp_check(&k, &disk, &ev, 256).unwrap();
        assert_eq!(c.amenability, Verdict::GrowthDetected, "{:?}", ev.growth);
        assert!(c.consistent && c.sung_tam.converging());
    }
}
