//! Sampled error-bound probes for amenability: the definition route
//! (`dist(x, F) ≤ κ dist(x, K)` on `aff F ∩ B`), bounded linear regularity
//! (`dist(x, F) ≤ κ max{dist(x, aff F), dist(x, K)}` on `B`) and local
//! subtransversality around a point of `F`.
//!
//! Every estimate is a lower bound on the true constant. Verdicts are
//! evidence, never proofs.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cone::ConeSpec;
use crate::error::{check_dim, ConeError, Result};
use crate::face::{FaceDescriptor, FaceHandle};
use crate::linalg::{
    fit_slope, rng, to_vec, unit_gaussian, AffineSubspace, BoundedRegion, Tolerance, Vector,
};
use crate::projection::{self, ProjectionMethod};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    GrowthDetected,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeRoute {
    /// Samples in `aff F ∩ B`, ratio `dist(x, F) / dist(x, K)`.
    Definition,
    /// Samples in `B`, ratio `dist(x, F) / max{dist(x, aff F), dist(x, K)}`.
    Blr,
    /// Samples near `x*`, ratio `dist(x, F) / (dist(x, aff F) + dist(x, K))`.
    Subtransversality,
}

/// Decision knobs for turning sampled ratios into a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbeConfig {
    /// Refinement must raise the ratio by more than this factor.
    pub growth_factor: f64,
    pub refinement_rounds: usize,
    pub evals_per_round: usize,
    /// Refinement starts from the best this many samples plus every seed point.
    pub starts: usize,
    /// Largest histogram drift between sample halves for `bounded`.
    pub drift_tol: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            growth_factor: 10.0,
            refinement_rounds: 3,
            evals_per_round: 150,
            starts: 3,
            drift_tol: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeSample {
    pub point: Vec<f64>,
    pub dist_face: f64,
    pub dist_cone: f64,
    pub dist_aff: f64,
    /// `None` when the denominator vanishes to tolerance.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Refinement {
    pub start_ratio: f64,
    /// Best ratio after each round; stops early once growth is established.
    pub round_ratios: Vec<f64>,
    pub best: ProbeSample,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorBoundEstimate {
    pub cone: ConeSpec,
    pub face: FaceDescriptor,
    pub region: BoundedRegion,
    pub route: ProbeRoute,
    pub seed: u64,
    pub config: ProbeConfig,
    /// Max sampled ratio over all `2n` samples (and any seed points).
    pub kappa_hat: f64,
    /// Kolmogorov–Smirnov distance between the ratio histograms of the two halves.
    pub drift: f64,
    /// `refined ratio / kappa_hat`.
    pub growth: f64,
    pub refinement: Option<Refinement>,
    pub verdict: Verdict,
    pub samples: Vec<ProbeSample>,
}

impl ErrorBoundEstimate {
    /// Largest ratio seen anywhere, including refinement.
    pub fn best_ratio(&self) -> f64 {
        self.refinement
            .as_ref()
            .map_or(self.kappa_hat, |r| r.best.ratio.unwrap_or(0.0).max(self.kappa_hat))
    }
}

struct Probe<'a> {
    k: &'a ConeSpec,
    f: &'a FaceHandle,
    route: ProbeRoute,
    region: BoundedRegion,
}

fn floor(x: &Vector) -> f64 {
    1e-12 * (1.0 + x.norm())
}

impl Probe<'_> {
    fn aff(&self) -> &AffineSubspace {
        &self.f.affine_hull
    }

    fn evaluate(&self, x: &Vector) -> Result<ProbeSample> {
        let dist_face = self.f.distance(x)?;
        let dist_cone = projection::distance(self.k, x)?;
        let dist_aff = (x - self.aff().project(x)).norm();
        let denom = match self.route {
            ProbeRoute::Definition => dist_cone,
            ProbeRoute::Blr => dist_aff.max(dist_cone),
            ProbeRoute::Subtransversality => dist_aff + dist_cone,
        };
        let eps = floor(x);
        let ratio = if dist_face <= eps {
            Some(0.0)
        } else if denom <= eps {
            None
        } else {
            Some(dist_face / denom)
        };
        Ok(ProbeSample {
            point: to_vec(x),
            dist_face,
            dist_cone,
            dist_aff,
            ratio,
        })
    }

    fn evaluate_all(&self, pts: &[Vector]) -> Result<Vec<ProbeSample>> {
        pts.par_iter().map(|x| self.evaluate(x)).collect()
    }

    fn in_domain(&self, x: &Vector) -> bool {
        let on_aff = match self.route {
            ProbeRoute::Definition => self.aff().contains(x, &Tolerance::new(1e-9, 1e-9)),
            _ => true,
        };
        on_aff && self.region.contains(x)
    }

    fn draw(&self, rng: &mut impl Rng) -> Result<Vector> {
        match self.route {
            ProbeRoute::Definition => self.region.sample_in_affine(self.aff(), rng),
            _ => Ok(self.region.sample(rng)),
        }
    }

    /// Local search from `start`. Candidates are pattern moves inside the
    /// domain and cone-lift moves `P_aff(P_K(x + r d))`, which land near the
    /// cone and on the affine hull where the ratio is largest.
    fn refine(
        &self,
        start: ProbeSample,
        kappa_hat: f64,
        cfg: &ProbeConfig,
        rng: &mut impl Rng,
    ) -> Result<Refinement> {
        let dim = self.k.dim();
        let (_, radius) = self.region.bounding_ball();
        let start_ratio = start.ratio.unwrap_or(0.0);
        let mut best = start;
        let mut x = Vector::from_vec(best.point.clone());
        let mut r = (0.5 * best.dist_face).max(1e-6 * (1.0 + x.norm())).min(radius);
        let mut fails = 0;
        let mut evaluations = 0;
        let mut round_ratios = Vec::with_capacity(cfg.refinement_rounds);
        let aff_dirs = self.aff().basis().to_vec();
        let target = cfg.growth_factor * start_ratio.max(kappa_hat);
        for _ in 0..cfg.refinement_rounds {
            if best.ratio.unwrap_or(0.0) > target {
                // growth already established
                break;
            }
            for _ in 0..cfg.evals_per_round {
                let d = unit_gaussian(dim, rng);
                let cand = if rng.random_bool(0.5) {
                    let step = if self.route == ProbeRoute::Definition {
                        let mut s = Vector::zeros(dim);
                        for b in &aff_dirs {
                            s.axpy(rng.sample::<f64, _>(rand_distr::StandardNormal), b, 1.0);
                        }
                        let n = s.norm();
                        if n == 0.0 {
                            continue;
                        }
                        s / n
                    } else {
                        d
                    };
                    &x + step * r
                } else {
                    let p = projection::project(self.k, &(&x + d * r))?.point;
                    self.aff().project(&p)
                };
                if !self.in_domain(&cand) {
                    fails += 1;
                } else {
                    evaluations += 1;
                    let s = self.evaluate(&cand)?;
                    if s.ratio.unwrap_or(0.0) > best.ratio.unwrap_or(0.0) {
                        x = cand;
                        best = s;
                        if best.ratio.unwrap_or(0.0) > target {
                            break;
                        }
                        r = (r * 1.5).min(radius);
                        fails = 0;
                        continue;
                    }
                    fails += 1;
                }
                if fails >= 2 * dim + 4 {
                    r *= 0.5;
                    fails = 0;
                    if r < 1e-14 * (1.0 + x.norm()) {
                        r = (0.5 * best.dist_face).max(1e-6);
                    }
                }
            }
            round_ratios.push(best.ratio.unwrap_or(0.0));
        }
        if round_ratios.is_empty() {
            round_ratios.push(best.ratio.unwrap_or(0.0));
        }
        Ok(Refinement {
            start_ratio,
            round_ratios,
            best,
            evaluations,
        })
    }

    fn run(&self, n: usize, seed: u64, seeds: &[Vector], cfg: &ProbeConfig) -> Result<ErrorBoundEstimate> {
        check_dim(self.k.dim(), self.region.ambient_dim())?;
        check_dim(self.k.dim(), self.f.ambient_dim())?;
        let mut r = rng(seed);
        let pts: Vec<Vector> = (0..2 * n).map(|_| self.draw(&mut r)).collect::<Result<_>>()?;
        for s in seeds {
            check_dim(self.k.dim(), s.len())?;
            if !self.in_domain(s) {
                return Err(ConeError::Precondition("seed point lies outside the probe domain".into()));
            }
        }
        let mut samples = self.evaluate_all(&pts)?;
        let drift = histogram_drift(&samples[..n], &samples[n..]);
        let seeded = self.evaluate_all(seeds)?;
        samples.extend(seeded.iter().cloned());
        let kappa_hat = samples.iter().filter_map(|s| s.ratio).fold(0.0, f64::max);
        let mut ranked: Vec<&ProbeSample> = samples[..2 * n].iter().filter(|s| s.ratio.is_some_and(|v| v > 0.0)).collect();
        ranked.sort_by(|a, b| b.ratio.unwrap_or(0.0).total_cmp(&a.ratio.unwrap_or(0.0)));
        let starts: Vec<ProbeSample> = ranked
            .into_iter()
            .take(cfg.starts)
            .chain(seeded.iter().filter(|s| s.ratio.is_some_and(|v| v > 0.0)))
            .cloned()
            .collect();
        let mut refinement: Option<Refinement> = None;
        if cfg.refinement_rounds > 0 {
            for s in starts {
                let rf = self.refine(s, kappa_hat, cfg, &mut r)?;
                if refinement.as_ref().is_none_or(|b| rf.best.ratio > b.best.ratio) {
                    refinement = Some(rf);
                }
            }
        }
        let growth = match &refinement {
            Some(rf) if kappa_hat > 0.0 => rf.best.ratio.unwrap_or(0.0) / kappa_hat,
            _ => 1.0,
        };
        let verdict = if growth > cfg.growth_factor {
            Verdict::GrowthDetected
        } else if drift < cfg.drift_tol {
            Verdict::Bounded
        } else {
            Verdict::Inconclusive
        };
        Ok(ErrorBoundEstimate {
            cone: self.k.clone(),
            face: self.f.descriptor.clone(),
            region: self.region.clone(),
            route: self.route,
            seed,
            config: *cfg,
            kappa_hat,
            drift,
            growth,
            refinement,
            verdict,
            samples,
        })
    }
}

/// Histogram drift: Kolmogorov–Smirnov distance between the empirical ratio
/// distributions of the two sample halves.
fn histogram_drift(a: &[ProbeSample], b: &[ProbeSample]) -> f64 {
    let sorted = |s: &[ProbeSample]| {
        let mut v: Vec<f64> = s.iter().filter_map(|p| p.ratio).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let (a, b) = (sorted(a), sorted(b));
    if a.len() < 10 || b.len() < 10 {
        return 0.0;
    }
    let (mut i, mut j, mut d) = (0, 0, 0.0_f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// Definition route: samples `aff F ∩ region`, `2n` points in two nested halves.
pub fn estimate_kappa(
    k: &ConeSpec,
    f: &FaceHandle,
    region: &BoundedRegion,
    n_samples: usize,
    seed: u64,
) -> Result<ErrorBoundEstimate> {
    estimate_kappa_with(k, f, region, n_samples, seed, &[], &ProbeConfig::default())
}

/// As [`estimate_kappa`] with extra seed points for the refinement and explicit knobs.
pub fn estimate_kappa_with(
    k: &ConeSpec,
    f: &FaceHandle,
    region: &BoundedRegion,
    n_samples: usize,
    seed: u64,
    seeds: &[Vector],
    cfg: &ProbeConfig,
) -> Result<ErrorBoundEstimate> {
    let probe = Probe {
        k,
        f,
        route: ProbeRoute::Definition,
        region: region.clone(),
    };
    probe.run(n_samples, seed, seeds, cfg)
}

/// Bounded-linear-regularity route: samples the full region.
pub fn blr_check(
    k: &ConeSpec,
    f: &FaceHandle,
    region: &BoundedRegion,
    n_samples: usize,
    seed: u64,
) -> Result<ErrorBoundEstimate> {
    blr_check_with(k, f, region, n_samples, seed, &[], &ProbeConfig::default())
}

pub fn blr_check_with(
    k: &ConeSpec,
    f: &FaceHandle,
    region: &BoundedRegion,
    n_samples: usize,
    seed: u64,
    seeds: &[Vector],
    cfg: &ProbeConfig,
) -> Result<ErrorBoundEstimate> {
    // the region must still meet aff F for the two routes to be comparable
    region.sample_in_affine(&f.affine_hull, &mut rng(seed))?;
    let probe = Probe {
        k,
        f,
        route: ProbeRoute::Blr,
        region: region.clone(),
    };
    probe.run(n_samples, seed, seeds, cfg)
}

/// Local probe on the ball of `radius` around `x_star ∈ F`.
pub fn subtransversality_check(
    k: &ConeSpec,
    f: &FaceHandle,
    x_star: &Vector,
    radius: f64,
    n_samples: usize,
    seed: u64,
) -> Result<ErrorBoundEstimate> {
    check_dim(k.dim(), x_star.len())?;
    let tol = Tolerance::default();
    if f.distance(x_star)? > tol.eps(x_star.norm()) {
        return Err(ConeError::Precondition("x_star is not in the face".into()));
    }
    let probe = Probe {
        k,
        f,
        route: ProbeRoute::Subtransversality,
        region: BoundedRegion::ball(x_star.clone(), radius)?,
    };
    probe.run(n_samples, seed, &[], &ProbeConfig::default())
}

/// Ratios along an explicit list of points, e.g. an unbounded family.
pub fn evaluate_points(
    k: &ConeSpec,
    f: &FaceHandle,
    route: ProbeRoute,
    points: &[Vector],
) -> Result<Vec<ProbeSample>> {
    let probe = Probe {
        k,
        f,
        route,
        region: BoundedRegion::ball(Vector::zeros(k.dim()), 1.0)?,
    };
    probe.evaluate_all(points)
}

/// A curve `t ↦ w(t)` inside `aff F` along which the error bound is tested.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessCurve {
    pub label: String,
    /// Decreasing positive parameters.
    pub t_grid: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

impl WitnessCurve {
    pub fn new(label: &str, t_grid: &[f64], curve: impl Fn(f64) -> Vector) -> Result<Self> {
        if t_grid.iter().any(|&t| !(t > 0.0)) || t_grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(ConeError::Precondition("t_grid must be positive and decreasing".into()));
        }
        Ok(Self {
            label: label.into(),
            t_grid: t_grid.to_vec(),
            points: t_grid.iter().map(|&t| to_vec(&curve(t))).collect(),
        })
    }

    /// `w(t) = (2cos 2t − 1, 2sin 2t, 1)` for the disk face of the gallery slice.
    pub fn gallery(t_grid: &[f64]) -> Result<Self> {
        Self::new("gallery_w", t_grid, crate::gallery::witness_w)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessRow {
    pub t: f64,
    pub dist_face: f64,
    /// Upper bound for hull-based distances.
    pub dist_cone: f64,
    /// Certified lower bound; equals `dist_cone` for exact projections.
    pub dist_cone_lower: f64,
    /// `dist(w, F) / dist(w, K)`.
    pub ratio: f64,
    /// `dist(w, K)² / dist(w, F)²`.
    pub collapse: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessReport {
    pub label: String,
    pub rows: Vec<WitnessRow>,
    /// Log-log slope of `ratio` against `t`.
    pub slope_ratio: f64,
    /// Log-log slope of `collapse` against `t`; the fitted growth exponent.
    pub fitted_growth_exponent: f64,
    pub warnings: Vec<String>,
}

pub fn evaluate_witness(k: &ConeSpec, f: &FaceHandle, w: &WitnessCurve) -> Result<WitnessReport> {
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (&t, p) in w.t_grid.iter().zip(&w.points) {
        let x = Vector::from_vec(p.clone());
        check_dim(k.dim(), x.len())?;
        if (&x - f.affine_hull.project(&x)).norm() > 1e-10 * (1.0 + x.norm()) {
            return Err(ConeError::Precondition(format!("w({t}) is not in aff F")));
        }
        let dist_face = f.distance(&x)?;
        let pr = projection::project(k, &x)?;
        let dist_cone = pr.distance;
        let dist_cone_lower = if pr.method == ProjectionMethod::HullQp && dist_cone > 0.0 {
            ((dist_cone * dist_cone - pr.certificate_gap) / dist_cone).max(0.0)
        } else {
            dist_cone
        };
        if dist_face < 1e-12 || dist_cone < 1e-12 {
            warnings.push(format!("t = {t}: distance below 1e-12, excluded from the fit"));
        }
        rows.push(WitnessRow {
            t,
            dist_face,
            dist_cone,
            dist_cone_lower,
            ratio: dist_face / dist_cone,
            collapse: (dist_cone / dist_face).powi(2),
        });
    }
    let fit: Vec<&WitnessRow> = rows
        .iter()
        .filter(|r| r.dist_face >= 1e-12 && r.dist_cone >= 1e-12)
        .collect();
    let lt: Vec<f64> = fit.iter().map(|r| r.t.ln()).collect();
    let (slope_ratio, fitted_growth_exponent) = if fit.len() >= 2 {
        (
            fit_slope(&lt, &fit.iter().map(|r| r.ratio.ln()).collect::<Vec<_>>()),
            fit_slope(&lt, &fit.iter().map(|r| r.collapse.ln()).collect::<Vec<_>>()),
        )
    } else {
        warnings.push("fewer than two usable points; no slope fitted".into());
        (f64::NAN, f64::NAN)
    };
    Ok(WitnessReport {
        label: w.label.clone(),
        rows,
        slope_ratio,
        fitted_growth_exponent,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{self, GalleryName};
    use crate::linalg::from_slice;

    fn ball(c: &[f64], r: f64) -> BoundedRegion {
        BoundedRegion::ball(from_slice(c), r).unwrap()
    }

    #[test]
    fn orthant_facet_has_kappa_one() {
        let k = ConeSpec::orthant(3);
        let f = FaceHandle::from_descriptor(&k, "orthant:zero=1").unwrap();
        let est = estimate_kappa(&k, &f, &ball(&[0.0, 0.0, 0.0], 1.0), 500, 1).unwrap();
        assert!((est.kappa_hat - 1.0).abs() < 1e-12, "{}", est.kappa_hat);
        assert_eq!(est.verdict, Verdict::Bounded);
        // oracle: on aff F the two distances coincide
        for s in &est.samples {
            assert!((s.dist_face - s.dist_cone).abs() < 1e-12);
            assert!(s.dist_aff < 1e-12);
        }
    }

    #[test]
    fn psd_range_face_is_bounded() {
        let k = ConeSpec::psd(2);
        let f = FaceHandle::from_descriptor(&k, "psd:range=[1;0]").unwrap();
        let est = estimate_kappa(&k, &f, &ball(&[0.0, 0.0, 0.0], 2.0), 400, 2).unwrap();
        assert_eq!(est.verdict, Verdict::Bounded);
        let blr = blr_check(&k, &f, &ball(&[0.0, 0.0, 0.0], 2.0), 400, 2).unwrap();
        assert_eq!(blr.verdict, Verdict::Bounded);
    }

    #[test]
    fn whole_cone_blr_ratio_at_most_one() {
        let k = ConeSpec::soc(3);
        let f = FaceHandle::whole(k.clone()).unwrap();
        let est = blr_check(&k, &f, &ball(&[0.0, 0.0, 0.0], 1.0), 300, 3).unwrap();
        assert!(est.kappa_hat <= 1.0 + 1e-10);
        assert_eq!(est.verdict, Verdict::Bounded);
    }

    #[test]
    fn gallery_disk_face_shows_growth() {
        let c = ConeSpec::gallery(GalleryName::NiceNotAmenableC);
        let f = FaceHandle::from_descriptor(&c, "gallery:disk_alpha").unwrap();
        let est = estimate_kappa_with(
            &c,
            &f,
            &gallery::witness_region(),
            100,
            4,
            &[gallery::witness_w(0.2)],
            &ProbeConfig::default(),
        )
        .unwrap();
        assert_eq!(est.verdict, Verdict::GrowthDetected, "growth {}", est.growth);
    }

    #[test]
    fn witness_matches_closed_forms() {
        let c = ConeSpec::gallery(GalleryName::NiceNotAmenableC);
        let f = FaceHandle::from_descriptor(&c, "gallery:disk_alpha").unwrap();
        let grid = [0.2, 0.1, 0.05, 0.025];
        let rep = evaluate_witness(&c, &f, &WitnessCurve::gallery(&grid).unwrap()).unwrap();
        for row in &rep.rows {
            let want = gallery::witness_face_distance_sq(row.t);
            assert!((row.dist_face.powi(2) - want).abs() < 1e-10);
            assert!(row.dist_cone.powi(2) <= gallery::witness_gamma_distance_sq(row.t) + 1e-15);
            assert!(row.dist_cone_lower <= row.dist_cone);
        }
        assert!((rep.fitted_growth_exponent - 4.0).abs() < 0.3, "{}", rep.fitted_growth_exponent);
        assert!((rep.slope_ratio + 2.0).abs() < 0.15);
    }

    #[test]
    fn witness_off_affine_hull_is_rejected() {
        let c = ConeSpec::gallery(GalleryName::NiceNotAmenableC);
        let f = FaceHandle::from_descriptor(&c, "gallery:disk_alpha").unwrap();
        let w = WitnessCurve::new("bad", &[0.2, 0.1], |t| from_slice(&[t, 0.0, 0.5])).unwrap();
        assert!(evaluate_witness(&c, &f, &w).is_err());
        assert!(WitnessCurve::new("inc", &[0.1, 0.2], gallery::witness_w).is_err());
    }

    #[test]
    fn sturm_bounded_region_probe() {
        let c = ConeSpec::gallery(GalleryName::SturmSlice);
        let f = FaceHandle::from_descriptor(&c, "gallery:sturm_face").unwrap();
        let region = ball(&[1.0, 0.0, 1.0], 3.0);
        let est = blr_check(&c, &f, &region, 500, 5).unwrap();
        assert_eq!(est.verdict, Verdict::Bounded, "{} {}", est.growth, est.drift);
    }

    #[test]
    fn sturm_family_ratio_blows_up() {
        let c = ConeSpec::gallery(GalleryName::SturmSlice);
        let f = FaceHandle::from_descriptor(&c, "gallery:sturm_face").unwrap();
        let pts: Vec<Vector> = [1e-1, 1e-2, 1e-3].iter().map(|&e| gallery::sturm_x_eps(e)).collect();
        let s = evaluate_points(&c, &f, ProbeRoute::Blr, &pts).unwrap();
        let r: Vec<f64> = s.iter().map(|p| p.ratio.unwrap()).collect();
        assert!(r[0] < r[1] && r[1] < r[2]);
        assert!(r[2] > 100.0);
    }

    #[test]
    fn subtransversality_examples() {
        let k = ConeSpec::orthant(3);
        let f = FaceHandle::from_descriptor(&k, "orthant:zero=2").unwrap();
        let est = subtransversality_check(&k, &f, &from_slice(&[1.0, 1.0, 0.0]), 0.5, 300, 6).unwrap();
        assert_eq!(est.verdict, Verdict::Bounded);
        assert!(subtransversality_check(&k, &f, &from_slice(&[1.0, 1.0, 1.0]), 0.5, 10, 6).is_err());

        let c = ConeSpec::gallery(GalleryName::NiceNotAmenableC);
        let f = FaceHandle::from_descriptor(&c, "gallery:disk_alpha").unwrap();
        let est = subtransversality_check(&c, &f, &gallery::alpha(0.0), 0.3, 100, 7).unwrap();
        assert_eq!(est.verdict, Verdict::GrowthDetected, "growth {}", est.growth);
    }

    #[test]
    fn nested_sampling_never_lowers_kappa() {
        let k = ConeSpec::soc(3);
        let f = FaceHandle::from_descriptor(&k, "ray=[0.6,0.8,1]").unwrap();
        let region = ball(&[0.0, 0.0, 0.0], 1.0);
        let cfg = ProbeConfig {
            refinement_rounds: 0,
            ..ProbeConfig::default()
        };
        let mut last = 0.0;
        for n in [50, 100, 200, 400] {
            let est = blr_check_with(&k, &f, &region, n, 8, &[], &cfg).unwrap();
            assert!(est.kappa_hat >= last);
            last = est.kappa_hat;
        }
    }

    #[test]
    fn kappa_is_scale_invariant_for_cones() {
        let k = ConeSpec::psd(2);
        let f = FaceHandle::from_descriptor(&k, "psd:range=[1;1]").unwrap();
        let cfg = ProbeConfig {
            refinement_rounds: 0,
            ..ProbeConfig::default()
        };
        let region = ball(&[0.5, 0.0, 0.5], 1.0);
        let a = blr_check_with(&k, &f, &region, 200, 9, &[], &cfg).unwrap();
        let b = blr_check_with(&k, &f, &region.scaled(7.0), 200, 9, &[], &cfg).unwrap();
        assert!((a.kappa_hat - b.kappa_hat).abs() < 1e-9 * a.kappa_hat.max(1.0));
    }

    #[test]
    fn empty_affine_intersection_is_an_error() {
        let k = ConeSpec::orthant(2);
        let f = FaceHandle::from_descriptor(&k, "orthant:zero=0").unwrap();
        let far = ball(&[5.0, 0.0], 1.0);
        assert!(matches!(estimate_kappa(&k, &f, &far, 10, 0), Err(ConeError::EmptyRegion)));
        assert!(matches!(blr_check(&k, &f, &far, 10, 0), Err(ConeError::EmptyRegion)));
    }
}
