//! Registered numerical checks with measured quantities and pass/fail.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::amenability::{blr_check, estimate_kappa, evaluate_witness, Verdict, WitnessCurve};
use crate::cone::{ConeSpec, SliceGenerator, SliceSpec};
use crate::error::{ConeError, Result};
use crate::face::{dual_sum_membership_numeric, FaceDescriptor, FaceHandle};
use crate::gallery::{self, GalleryName};
use crate::hull_constants::verify_slice_bound;
use crate::linalg::{from_slice, gaussian, orthonormalize, rng, to_vec, unit_gaussian, BoundedRegion, Tolerance, Vector};
use crate::proj_exposed::{build_rank_one_projection, build_rank_two_projection, default_shrink_schedule, sung_tam_probe};
use crate::projection::{self, project_psd};

pub const CHECKS: [&str; 9] = [
    "sturm",
    "witness_asymptotics",
    "det_M",
    "exposing_normals",
    "dual_sum",
    "slice_bound",
    "moreau",
    "sung_tam_gallery",
    "projections_dim4",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub expected: String,
    pub measured: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub runtime_s: f64,
}

struct Builder {
    name: &'static str,
    expected: String,
    measured: BTreeMap<String, f64>,
    notes: Vec<String>,
    start: Instant,
}

impl Builder {
    fn new(name: &'static str, expected: &str) -> Self {
        Self {
            name,
            expected: expected.into(),
            measured: BTreeMap::new(),
            notes: Vec::new(),
            start: Instant::now(),
        }
    }

    fn m(&mut self, key: &str, v: f64) {
        self.measured.insert(key.into(), v);
    }

    fn finish(self, passed: bool) -> CheckReport {
        CheckReport {
            name: self.name.into(),
            passed,
            expected: self.expected,
            measured: self.measured,
            notes: self.notes,
            runtime_s: self.start.elapsed().as_secs_f64(),
        }
    }
}

pub fn run_check(name: &str, seed: u64) -> Result<CheckReport> {
    match name {
        "sturm" => sturm(seed),
        "witness_asymptotics" => witness_asymptotics(),
        "det_M" => det_m_grid(),
        "exposing_normals" => exposing_normals(),
        "dual_sum" => dual_sum(seed),
        "slice_bound" => slice_bound(seed),
        "moreau" => moreau(seed),
        "sung_tam_gallery" => sung_tam_gallery(),
        "projections_dim4" => projections_dim4(seed),
        _ => Err(ConeError::Precondition(format!(
            "unknown check '{name}'; available: {}",
            CHECKS.join(", ")
        ))),
    }
}

pub fn run_all(seed: u64) -> Result<Vec<CheckReport>> {
    CHECKS.iter().map(|c| run_check(c, seed)).collect()
}

pub fn sturm(seed: u64) -> Result<CheckReport> {
    let mut b = Builder::new(
        "sturm",
        "for κ ∈ {1, 10, 100} some x^ε has dist(x^ε, F) > κ(dist(x^ε, C) + dist(x^ε, aff F)) with y11 ≥ 1/(ε(1+ε)) − 2(κ+1) − 1e-6; ball of radius 3 gives a bounded verdict",
    );
    let mut ok = true;
    for kappa in [1.0, 10.0, 100.0] {
        match gallery::certify_global_violation(kappa)? {
            Some(c) => {
                let good = c.lhs > c.rhs && c.point.y[0] >= c.y11_bound - 1e-6;
                ok &= good;
                b.m(&format!("kappa_{kappa}_eps"), c.point.eps);
                b.m(&format!("kappa_{kappa}_lhs"), c.lhs);
                b.m(&format!("kappa_{kappa}_rhs"), c.rhs);
                b.m(&format!("kappa_{kappa}_y11"), c.point.y[0]);
                b.m(&format!("kappa_{kappa}_y11_bound"), c.y11_bound);
            }
            None => {
                ok = false;
                b.notes.push(format!("no certificate for κ = {kappa}"));
            }
        }
    }
    let c = ConeSpec::gallery(GalleryName::SturmSlice);
    let f = FaceHandle::new(c.clone(), FaceDescriptor::SturmFace)?;
    let region = BoundedRegion::ball(from_slice(&[1.0, 0.0, 1.0]), 3.0)?;
    let est = blr_check(&c, &f, &region, 500, seed)?;
    b.m("ball_kappa_hat", est.kappa_hat);
    b.m("ball_growth", est.growth);
    b.m("ball_drift", est.drift);
    b.notes.push(format!("ball verdict: {:?}", est.verdict));
    ok &= est.verdict == Verdict::Bounded;
    Ok(b.finish(ok))
}

pub const WITNESS_T: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

pub fn witness_asymptotics() -> Result<CheckReport> {
    let mut b = Builder::new(
        "witness_asymptotics",
        "dist(w(t), F)² = (1 − √(5 − 4cos 2t))² to 1e-10; slope of dist(w, C)²/dist(w, F)² is 4.0 ± 0.3; < 30 s",
    );
    let c = ConeSpec::gallery(GalleryName::NiceNotAmenableC);
    let f = FaceHandle::new(c.clone(), FaceDescriptor::DiskAlpha)?;
    let rep = evaluate_witness(&c, &f, &WitnessCurve::gallery(&WITNESS_T)?)?;
    let mut err = 0.0_f64;
    for r in &rep.rows {
        let closed = (1.0 - (5.0 - 4.0 * (2.0 * r.t).cos()).sqrt()).powi(2);
        err = err.max((r.dist_face.powi(2) - closed).abs());
        b.m(&format!("t_{}_collapse", r.t), r.collapse);
    }
    b.m("face_distance_sq_error", err);
    b.m("slope", rep.fitted_growth_exponent);
    b.notes.extend(rep.warnings);
    let runtime = b.start.elapsed().as_secs_f64();
    let ok = err <= 1e-10 && (rep.fitted_growth_exponent - 4.0).abs() <= 0.3 && runtime < 30.0;
    Ok(b.finish(ok))
}

pub fn det_m_grid() -> Result<CheckReport> {
    let mut b = Builder::new(
        "det_M",
        "numeric det M matches the closed form to 1e-8 on a 50×50 grid with 0 < t < s < π; bracket ≥ 2; < 5 s",
    );
    let n = 50;
    let grid: Vec<f64> = (0..n).map(|i| std::f64::consts::PI * (i + 1) as f64 / (n + 1) as f64).collect();
    let mut err = 0.0_f64;
    let mut min_bracket = f64::INFINITY;
    let mut pairs = 0;
    for (i, &t) in grid.iter().enumerate() {
        for &s in &grid[i + 1..] {
            let d = gallery::det_m(t, s);
            err = err.max((d.numeric - d.closed_form).abs());
            min_bracket = min_bracket.min(d.bracket);
            pairs += 1;
        }
    }
    let runtime = b.start.elapsed().as_secs_f64();
    b.m("pairs", pairs as f64);
    b.m("max_abs_error", err);
    b.m("min_bracket", min_bracket);
    Ok(b.finish(err <= 1e-8 && min_bracket >= 2.0 && runtime < 5.0))
}

pub fn exposing_normals() -> Result<CheckReport> {
    let mut b = Builder::new(
        "exposing_normals",
        "for 64 rim points α(t), t ∈ (0, 2π), the computed normal (cos t, sin t, u(t)) strictly separates α(t) from the rest of C",
    );
    let n = 64;
    let res: Vec<(f64, Option<f64>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let t = std::f64::consts::TAU * (i as f64 + 0.5) / n as f64;
            let m = gallery::exposing_normal_u(t).ok().map(|u| gallery::exposing_margin(t, u, 10_000));
            (t, m)
        })
        .collect();
    let failures = res.iter().filter(|(_, m)| !m.is_some_and(|v| v > 0.0)).count();
    let min_margin = res.iter().filter_map(|r| r.1).fold(f64::INFINITY, f64::min);
    b.m("points", n as f64);
    b.m("failures", failures as f64);
    b.m("min_margin", min_margin);
    Ok(b.finish(failures == 0))
}

pub fn dual_sum(seed: u64) -> Result<CheckReport> {
    let mut b = Builder::new(
        "dual_sum",
        "numeric membership in K̃* + F^⊥ agrees with √(x² + y²) ≤ z + w on 10⁴ grid points at 1e-9; boundary points decompose with residual < 1e-9",
    );
    let kt = ConeSpec::gallery(GalleryName::CylinderKTilde);
    let f = FaceHandle::new(kt.clone(), FaceDescriptor::LiftedDiskAlpha)?;
    let tol = Tolerance::new(1e-9, 0.0);
    let axis: Vec<f64> = (0..10).map(|i| -1.0 + 2.0 * i as f64 / 9.0).collect();
    let mut pts = Vec::with_capacity(10_000);
    for &a in &axis {
        for &c in &axis {
            for &d in &axis {
                for &e in &axis {
                    pts.push(from_slice(&[a, c, d, e]));
                }
            }
        }
    }
    let disagreements: usize = pts
        .par_iter()
        .map(|s| -> Result<usize> {
            let formula = gallery::dual_sum_margin(s) >= -1e-9;
            let numeric = dual_sum_membership_numeric(&kt, &f, s, &tol)?.is_in_sum();
            Ok(usize::from(formula != numeric))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    let mut g = rng(seed);
    let boundary: Vec<Vector> = (0..1000)
        .map(|_| {
            let th: f64 = g.random::<f64>() * std::f64::consts::TAU;
            let a: f64 = g.random_range(0.1..2.0);
            let z: f64 = g.random_range(-2.0..2.0);
            from_slice(&[-a * th.cos(), -a * th.sin(), z, a - z])
        })
        .collect();
    let worst = boundary
        .par_iter()
        .map(|s| gallery::decompose_dual_sum_boundary(s).map(|d| d.residual))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    b.m("grid_points", pts.len() as f64);
    b.m("disagreements", disagreements as f64);
    b.m("boundary_points", boundary.len() as f64);
    b.m("max_decomposition_residual", worst);
    Ok(b.finish(disagreements == 0 && worst < 1e-9))
}

/// Conic hull of `n` Gaussian points lifted to `x₄ = 1`.
pub fn random_polytope_cone(n: usize, seed: u64) -> ConeSpec {
    let mut g = rng(seed);
    let points = (0..n)
        .map(|_| {
            let v = unit_gaussian(3, &mut g);
            vec![v[0], v[1], v[2], 1.0]
        })
        .collect();
    ConeSpec::ConicHull {
        slice: SliceSpec {
            e: vec![0.0, 0.0, 0.0, 1.0],
            generator: SliceGenerator::Points { points },
        },
    }
}

pub fn slice_bound(seed: u64) -> Result<CheckReport> {
    let mut b = Builder::new(
        "slice_bound",
        "zero violations of dist(x, C) ≤ ‖e‖ r dist(x, K) + 1e-8 over 10³ samples of H \\ (−K*), gallery slice and random polytope",
    );
    let mut ok = true;
    for (label, k) in [
        ("gallery", ConeSpec::gallery(GalleryName::NiceNotAmenableK)),
        ("polytope", random_polytope_cone(12, seed)),
    ] {
        let rep = verify_slice_bound(&k, 1000, seed)?;
        b.m(&format!("{label}_violations"), rep.violations as f64);
        b.m(&format!("{label}_worst_margin"), rep.worst_margin);
        b.m(&format!("{label}_worst_ratio"), rep.worst_ratio);
        b.m(&format!("{label}_bound"), rep.bound);
        b.m(&format!("{label}_rejected"), rep.rejected as f64);
        ok &= rep.violations == 0 && rep.samples == 1000;
    }
    Ok(b.finish(ok))
}

/// Worst Moreau defects over `n` Gaussian points: `x = P_K x − P_{K*}(−x)`,
/// `<P_K x, P_{K*}(−x)> = 0`, `P_K x ∈ K`, `P_{K*}(−x) ∈ K*`, each scaled.
fn moreau_defects(k: &ConeSpec, n: usize, seed: u64) -> Result<[f64; 3]> {
    let dual = k.dual_cone()?;
    let mut g = rng(seed);
    let pts: Vec<Vector> = (0..n).map(|_| gaussian(k.dim(), &mut g) * 3.0).collect();
    let rows = pts
        .par_iter()
        .map(|x| -> Result<[f64; 3]> {
            let p = projection::project(k, x)?.point;
            let q = projection::project(&dual, &(-x))?.point;
            let s = 1.0 + x.norm();
            let residual = (x - &p + &q).norm() / s;
            let orth = p.dot(&q).abs() / (s * s);
            let member = (projection::distance(k, &p)? + projection::distance(&dual, &q)?) / s;
            Ok([residual, orth, member])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.iter().fold([0.0; 3], |a, r| [a[0].max(r[0]), a[1].max(r[1]), a[2].max(r[2])]))
}

pub fn moreau(seed: u64) -> Result<CheckReport> {
    let mut b = Builder::new(
        "moreau",
        "decomposition residual, orthogonality and polar membership ≤ 1e-10 on 10⁴ points each for orthant, SOC (n ≤ 10), PSD (n ≤ 5)",
    );
    let families: [(&str, Vec<ConeSpec>); 3] = [
        ("orthant", (1..=10).map(ConeSpec::orthant).collect()),
        ("soc", (2..=10).map(ConeSpec::soc).collect()),
        ("psd", (1..=5).map(ConeSpec::psd).collect()),
    ];
    let mut ok = true;
    for (label, cones) in families {
        let per = 10_000usize.div_ceil(cones.len());
        let mut worst = [0.0_f64; 3];
        for (i, k) in cones.iter().enumerate() {
            let d = moreau_defects(k, per, seed.wrapping_add(i as u64))?;
            for j in 0..3 {
                worst[j] = worst[j].max(d[j]);
            }
        }
        b.m(&format!("{label}_points"), (per * cones.len()) as f64);
        b.m(&format!("{label}_residual"), worst[0]);
        b.m(&format!("{label}_orthogonality"), worst[1]);
        b.m(&format!("{label}_membership"), worst[2]);
        ok &= worst.iter().all(|&v| v <= 1e-10);
    }
    Ok(b.finish(ok))
}

pub fn sung_tam_gallery() -> Result<CheckReport> {
    let mut b = Builder::new(
        "sung_tam_gallery",
        "orthant facets: no converging extreme rays; gallery K at the disk-dual tip: converging rays at every shrink level k ≤ 8",
    );
    let sched = default_shrink_schedule();
    let o = ConeSpec::orthant(3);
    let mut ok = true;
    for i in 0..3 {
        let facet = FaceHandle::new(o.clone(), FaceDescriptor::OrthantZeros { zero: vec![i] })?;
        let rep = sung_tam_probe(&o, &facet, 64, &sched)?;
        b.m(&format!("orthant_facet_{i}_converging"), f64::from(u8::from(rep.converging())));
        ok &= !rep.converging();
    }
    let k = ConeSpec::gallery(GalleryName::NiceNotAmenableK);
    let disk = FaceHandle::new(k.clone(), FaceDescriptor::LiftedDiskAlpha)?;
    let rep = sung_tam_probe(&k, &disk, 256, &sched)?;
    let deepest = rep.deepest_level();
    b.m("gallery_converging", f64::from(u8::from(rep.converging())));
    b.m("gallery_deepest_level", deepest.map_or(-1.0, |d| d as f64));
    if let Some(l) = rep.levels.get(8) {
        b.m("gallery_nearest_at_k8", l.nearest.unwrap_or(f64::NAN));
    }
    ok &= rep.converging() && deepest.is_some_and(|d| d >= 8);
    Ok(b.finish(ok))
}

pub fn projections_dim4(seed: u64) -> Result<CheckReport> {
    let mut b = Builder::new(
        "projections_dim4",
        "rank-one and rank-two projections for orthant(3), the psd(2) diagonal face and a 2-dim face of K̃: ‖P² − P‖ < 1e-12, zero containment violations on 10⁴ samples",
    );
    let e = |n: usize, i: usize| Vector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 });
    let kt = ConeSpec::gallery(GalleryName::CylinderKTilde);
    let cases: Vec<(&str, ConeSpec, Vector, Vector)> = vec![
        ("orthant3", ConeSpec::orthant(3), e(3, 0), e(3, 1)),
        ("psd2", ConeSpec::psd(2), from_slice(&[1.0, 0.0, 0.0]), from_slice(&[0.0, 0.0, 1.0])),
        ("k_tilde", kt, from_slice(&[1.0, 0.0, 1.0, 1.0]), from_slice(&[1.0, 0.0, -1.0, 1.0])),
    ];
    let mut ok = true;
    for (label, k, x, y) in cases {
        let one = build_rank_one_projection(&k, &x, 10_000, seed)?;
        let two = build_rank_two_projection(&k, &x, &y, 10_000, seed)?;
        for (kind, p) in [("rank1", &one), ("rank2", &two)] {
            b.m(&format!("{label}_{kind}_idempotency"), p.idempotency_residual);
            b.m(&format!("{label}_{kind}_violations"), p.containment_violations as f64);
            b.m(&format!("{label}_{kind}_fixed_point"), p.fixed_point_residual);
            ok &= p.certified() && p.samples == 10_000;
        }
    }
    Ok(b.finish(ok))
}

/// Nearest point of `𝒟² = {X ⪰ 0, X ≥ 0}` by enumerating the active set of
/// `X₁₂ ≥ 0`: the PSD projection when feasible, else the nonnegative diagonal.
pub fn dnn2_oracle(x: &Vector) -> Vector {
    let p = project_psd(x, 2);
    if p[1] >= 0.0 {
        p
    } else {
        from_slice(&[x[0].max(0.0), 0.0, x[2].max(0.0)])
    }
}

pub fn dykstra_dnn(seed: u64) -> Result<CheckReport> {
    let mut b = Builder::new(
        "dykstra_dnn",
        "Dykstra projection onto psd(2) ∩ nonneg matches the enumeration oracle within 1e-6 on 100 inputs; < 60 s",
    );
    let k = ConeSpec::doubly_nonnegative(2);
    let mut g = rng(seed);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let x = gaussian(3, &mut g) * 2.0;
        let p = projection::project(&k, &x)?.point;
        worst = worst.max((p - dnn2_oracle(&x)).norm());
    }
    let runtime = b.start.elapsed().as_secs_f64();
    b.m("max_error", worst);
    Ok(b.finish(worst <= 1e-6 && runtime < 60.0))
}

/// A random (cone, face, ball) triple over orthants, second-order and PSD cones.
pub fn random_triple(g: &mut impl Rng) -> Result<(ConeSpec, FaceHandle, BoundedRegion)> {
    let (k, desc) = match g.random_range(0..3) {
        0 => {
            let n = g.random_range(2..=4);
            let m = g.random_range(1..n);
            let mut zero: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                zero.swap(i, g.random_range(0..=i));
            }
            zero.truncate(m);
            zero.sort();
            (ConeSpec::orthant(n), FaceDescriptor::OrthantZeros { zero })
        }
        1 => {
            let n = g.random_range(3..=4);
            let u = unit_gaussian(n - 1, g);
            let mut r = to_vec(&u);
            r.push(1.0);
            (ConeSpec::soc(n), FaceDescriptor::Ray { generator: r })
        }
        _ => {
            let n = g.random_range(2..=3);
            let m = g.random_range(1..n);
            let vs: Vec<Vector> = (0..m).map(|_| gaussian(n, g)).collect();
            let range = orthonormalize(&vs)?.iter().map(to_vec).collect();
            (ConeSpec::psd(n), FaceDescriptor::PsdRange { n, range })
        }
    };
    let f = FaceHandle::new(k.clone(), desc)?;
    let p = f.sample(1, g)?.remove(0);
    let center = &p / p.norm().max(1.0);
    let region = BoundedRegion::ball(center, g.random_range(0.5..2.0))?;
    Ok((k, f, region))
}

/// Samples per half for the agreement check.
pub const AGREEMENT_SAMPLES: usize = 1000;

pub fn kappa_blr_agreement(seed: u64) -> Result<CheckReport> {
    let mut b = Builder::new(
        "kappa_blr_agreement",
        "estimate_kappa and blr_check return the same verdict on 20 random (cone, face, region) triples",
    );
    let mut g = rng(seed);
    let mut agree = 0;
    for i in 0..20 {
        let (k, f, region) = random_triple(&mut g)?;
        let a = estimate_kappa(&k, &f, &region, AGREEMENT_SAMPLES, seed + i)?;
        let c = blr_check(&k, &f, &region, AGREEMENT_SAMPLES, seed + i)?;
        if a.verdict == c.verdict {
            agree += 1;
        } else {
            b.notes.push(format!(
                "{} / {:?}: definition {:?}, blr {:?}",
                k.variant_name(),
                f.descriptor,
                a.verdict,
                c.verdict
            ));
        }
        b.m(&format!("triple_{i:02}_kappa_def"), a.kappa_hat);
        b.m(&format!("triple_{i:02}_kappa_blr"), c.kappa_hat);
    }
    b.m("agreements", agree as f64);
    Ok(b.finish(agree == 20))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_check_lists_names() {
        let err = run_check("unknown", 1).unwrap_err().to_string();
        assert!(err.contains("witness_asymptotics") && err.contains("projections_dim4"));
    }

    #[test]
    fn dnn_oracle_examples() {
        // PSD projection already nonnegative
        let x = from_slice(&[1.0, 0.5, 2.0]);
        assert!((dnn2_oracle(&x) - &x).norm() < 1e-14);
        // off-diagonal clipped, diagonal kept
        let x = from_slice(&[1.0, -0.5, -2.0]);
        assert_eq!(dnn2_oracle(&x), from_slice(&[1.0, 0.0, 0.0]));
    }

    #[test]
    fn quick_checks_pass() {
        for r in [det_m_grid().unwrap(), exposing_normals().unwrap(), dykstra_dnn(3).unwrap()] {
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn random_triples_are_valid() {
        let mut g = rng(9);
        for _ in 0..10 {
            let (k, f, region) = random_triple(&mut g).unwrap();
            assert!(f.dim() < k.dim());
            region.sample_in_affine(&f.affine_hull, &mut g).unwrap();
        }
    }
}
