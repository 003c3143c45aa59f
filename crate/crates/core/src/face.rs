//! Faces, minimal faces, conjugate faces `F^Δ = K* ∩ F^⊥`, exposedness tests
//! and the dual-sum membership `K* + F^⊥` used for niceness.

use std::f64::consts::SQRT_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cone::{concat, split, ConeSpec};
use crate::error::{check_dim, ConeError, Result};
use crate::gallery::{self, GalleryName};
use crate::linalg::{
    from_slice, gaussian, orthogonal_complement, orthonormalize, rng, smat, svec, sym_eigen,
    to_vec, AffineSubspace, Matrix, Tolerance, Vector, RANK_CUTOFF,
};
use crate::projection::{self, project_psd};

/// Variant-specific description of a face.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FaceDescriptor {
    Whole,
    Zero,
    /// Orthant face `{z ≥ 0 : z_i = 0, i ∈ zero}` (0-based indices).
    OrthantZeros { zero: Vec<usize> },
    /// PSD face `{X ⪰ 0 : range X ⊆ span(range)}`; `range` holds an
    /// orthonormal basis of the subspace in R^n.
    PsdRange { n: usize, range: Vec<Vec<f64>> },
    Ray { generator: Vec<f64> },
    /// Face of `{A x ≥ 0}` where the listed rows are active.
    PolyhedralActive { active: Vec<usize> },
    /// Face given as the cone generated by the listed points.
    Generated { generators: Vec<Vec<f64>> },
    /// Top disk `conv α` of the gallery slice `C`.
    DiskAlpha,
    /// `{(a, b, t, t) : √(a² + b²) ≤ t}`, the lift of `conv α`.
    LiftedDiskAlpha,
    /// The exposed point `γ(t)` of the gallery slice.
    GammaPoint { t: f64 },
    /// `{X ⪰ 0 : X₂₂ = 1}` in the Sturm set.
    SturmFace,
    Product {
        left: Box<FaceDescriptor>,
        right: Box<FaceDescriptor>,
    },
    /// Face described by an arbitrary cone spec (e.g. a computed conjugate face).
    Cone { spec: ConeSpec },
}

/// A face of `parent` with its span (or affine hull, for faces of compact
/// sets) and an exact or iterative projector.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceHandle {
    pub parent: ConeSpec,
    pub descriptor: FaceDescriptor,
    pub span_basis: Vec<Vector>,
    pub affine_hull: AffineSubspace,
}

fn unit(dim: usize, i: usize) -> Vector {
    let mut e = Vector::zeros(dim);
    e[i] = 1.0;
    e
}

/// Projection onto the circular cone `{(u, τ) : ‖u‖ ≤ k τ}`.
fn project_circular(u: &Vector, tau: f64, k: f64) -> (Vector, f64) {
    let r = u.norm();
    if r <= k * tau {
        return (u.clone(), tau);
    }
    if k * r <= -tau {
        return (Vector::zeros(u.len()), 0.0);
    }
    let s = (k * r + tau) / (1.0 + k * k);
    let scale = if r > 0.0 { k * s / r } else { 0.0 };
    (u * scale, s)
}

fn lifted_disk_project(x: &Vector) -> Vector {
    let u = x.rows(0, 2).into_owned();
    let tau = (x[2] + x[3]) / SQRT_2;
    // t = τ/√2, so ‖u‖ ≤ t reads ‖u‖ ≤ τ/√2
    let (pu, pt) = project_circular(&u, tau, 1.0 / SQRT_2);
    let t = pt / SQRT_2;
    from_slice(&[pu[0], pu[1], t, t])
}

fn psd_range_matrix(n: usize, range: &[Vec<f64>]) -> Matrix {
    Matrix::from_fn(n, range.len(), |i, j| range[j][i])
}

fn psd_face_basis(v: &Matrix) -> Vec<Vector> {
    let r = v.ncols();
    let mut out = Vec::new();
    for i in 0..r {
        for j in i..r {
            let a = v.column(i) * v.column(j).transpose();
            out.push(svec(&((&a + a.transpose()) * 0.5)));
        }
    }
    orthonormalize(&out).unwrap_or_default()
}

impl FaceHandle {
    pub fn new(parent: ConeSpec, descriptor: FaceDescriptor) -> Result<Self> {
        let dim = parent.dim();
        let linear = |basis: Vec<Vector>| AffineSubspace::linear(dim, &basis);
        let (span_basis, affine_hull) = match &descriptor {
            FaceDescriptor::Whole => {
                let basis = match &parent {
                    ConeSpec::LinearSubspace { .. } => projection::subspace_basis(&parent)?,
                    _ => (0..dim).map(|i| unit(dim, i)).collect(),
                };
                (basis.clone(), linear(basis)?)
            }
            FaceDescriptor::Zero => (Vec::new(), linear(Vec::new())?),
            FaceDescriptor::OrthantZeros { zero } => {
                if zero.iter().any(|&i| i >= dim) {
                    return Err(ConeError::InvalidSpec(format!("face index out of range in {zero:?}")));
                }
                let basis: Vec<Vector> =
                    (0..dim).filter(|i| !zero.contains(i)).map(|i| unit(dim, i)).collect();
                (basis.clone(), linear(basis)?)
            }
            FaceDescriptor::PsdRange { n, range } => {
                check_dim(dim, crate::linalg::svec_dim(*n))?;
                let basis = psd_face_basis(&psd_range_matrix(*n, range));
                (basis.clone(), linear(basis)?)
            }
            FaceDescriptor::Ray { generator } => {
                check_dim(dim, generator.len())?;
                let basis = orthonormalize(&[from_slice(generator)])?;
                (basis.clone(), linear(basis)?)
            }
            FaceDescriptor::Generated { generators } => {
                let gens: Vec<Vector> = generators.iter().map(|g| from_slice(g)).collect();
                for g in &gens {
                    check_dim(dim, g.len())?;
                }
                let basis = orthonormalize(&gens)?;
                (basis.clone(), linear(basis)?)
            }
            FaceDescriptor::PolyhedralActive { active } => {
                let ConeSpec::Polyhedral { rows, .. } = &parent else {
                    return Err(ConeError::InvalidSpec("active-set face needs a polyhedral parent".into()));
                };
                let act: Vec<Vector> = active.iter().map(|&i| from_slice(&rows[i])).collect();
                let normals = orthonormalize(&act)?;
                let basis = orthogonal_complement(&normals, dim);
                (basis.clone(), linear(basis)?)
            }
            FaceDescriptor::DiskAlpha => {
                check_dim(dim, 3)?;
                let basis = vec![unit(3, 0), unit(3, 1)];
                let aff = AffineSubspace::new(unit(3, 2), &basis)?;
                (vec![unit(3, 0), unit(3, 1), unit(3, 2)], aff)
            }
            FaceDescriptor::LiftedDiskAlpha => {
                check_dim(dim, 4)?;
                let basis = vec![
                    unit(4, 0),
                    unit(4, 1),
                    from_slice(&[0.0, 0.0, 1.0, 1.0]) / SQRT_2,
                ];
                (basis.clone(), linear(basis)?)
            }
            FaceDescriptor::GammaPoint { t } => {
                check_dim(dim, 3)?;
                let p = gallery::gamma(*t);
                let basis = orthonormalize(&[p.clone()])?;
                (basis, AffineSubspace::new(p, &[])?)
            }
            FaceDescriptor::SturmFace => {
                check_dim(dim, 3)?;
                let basis = vec![unit(3, 0), unit(3, 1)];
                let aff = AffineSubspace::new(unit(3, 2), &basis)?;
                (vec![unit(3, 0), unit(3, 1), unit(3, 2)], aff)
            }
            FaceDescriptor::Product { left, right } => {
                let ConeSpec::Product { left: pl, right: pr } = &parent else {
                    return Err(ConeError::InvalidSpec("product face needs a product parent".into()));
                };
                let fl = FaceHandle::new((**pl).clone(), (**left).clone())?;
                let fr = FaceHandle::new((**pr).clone(), (**right).clone())?;
                let (dl, dr) = (pl.dim(), pr.dim());
                let mut basis: Vec<Vector> = fl
                    .span_basis
                    .iter()
                    .map(|b| concat(b, &Vector::zeros(dr)))
                    .collect();
                basis.extend(fr.span_basis.iter().map(|b| concat(&Vector::zeros(dl), b)));
                (basis.clone(), linear(basis)?)
            }
            FaceDescriptor::Cone { spec } => {
                check_dim(dim, spec.dim())?;
                let mut r = rng(0x5eed);
                let samples: Vec<Vector> = (0..4 * dim + 8)
                    .map(|_| projection::project(spec, &gaussian(dim, &mut r)).map(|p| p.point))
                    .collect::<Result<_>>()?;
                let basis = orthonormalize(&samples)?;
                (basis.clone(), linear(basis)?)
            }
        };
        Ok(Self {
            parent,
            descriptor,
            span_basis,
            affine_hull,
        })
    }

    pub fn whole(parent: ConeSpec) -> Result<Self> {
        Self::new(parent, FaceDescriptor::Whole)
    }

    pub fn dim(&self) -> usize {
        self.affine_hull.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.parent.dim()
    }

    pub fn is_whole(&self) -> bool {
        self.descriptor == FaceDescriptor::Whole
    }

    /// Nearest point of the face.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.ambient_dim(), x.len())?;
        Ok(match &self.descriptor {
            FaceDescriptor::Whole => projection::project(&self.parent, x)?.point,
            FaceDescriptor::Zero => Vector::zeros(x.len()),
            FaceDescriptor::OrthantZeros { zero } => {
                let mut y = x.map(|v| v.max(0.0));
                for &i in zero {
                    y[i] = 0.0;
                }
                y
            }
            FaceDescriptor::PsdRange { n, range } => {
                let v = psd_range_matrix(*n, range);
                let inner = v.transpose() * smat(x, *n) * &v;
                let p = project_psd(&svec(&inner), v.ncols());
                svec(&(&v * smat(&p, v.ncols()) * v.transpose()))
            }
            FaceDescriptor::Ray { generator } => {
                let g = from_slice(generator);
                &g * (g.dot(x).max(0.0) / g.norm_squared())
            }
            FaceDescriptor::Generated { generators } => {
                let gens: Vec<Vector> = generators.iter().map(|g| from_slice(g)).collect();
                projection::nnls::project_generated(&gens, x).0
            }
            FaceDescriptor::PolyhedralActive { active } => {
                let ConeSpec::Polyhedral { rows, .. } = &self.parent else {
                    unreachable!("checked at construction")
                };
                let mut all = rows.clone();
                for &i in active {
                    all.push(rows[i].iter().map(|v| -v).collect());
                }
                projection::project_polyhedral(&all, x)
            }
            FaceDescriptor::DiskAlpha => gallery::project_disk_alpha(x),
            FaceDescriptor::LiftedDiskAlpha => lifted_disk_project(x),
            FaceDescriptor::GammaPoint { t } => gallery::gamma(*t),
            FaceDescriptor::SturmFace => gallery::project_sturm_face(x),
            FaceDescriptor::Product { left, right } => {
                let ConeSpec::Product { left: pl, right: pr } = &self.parent else {
                    unreachable!("checked at construction")
                };
                let (a, b) = split(x, pl.dim());
                let fl = FaceHandle::new((**pl).clone(), (**left).clone())?;
                let fr = FaceHandle::new((**pr).clone(), (**right).clone())?;
                concat(&fl.project(&a)?, &fr.project(&b)?)
            }
            FaceDescriptor::Cone { spec } => projection::project(spec, x)?.point,
        })
    }

    pub fn distance(&self, x: &Vector) -> Result<f64> {
        Ok((x - self.project(x)?).norm())
    }

    pub fn contains(&self, x: &Vector, tol: &Tolerance) -> Result<bool> {
        Ok(self.distance(x)? <= tol.eps(x.norm()))
    }

    /// Random members of the face.
    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> Result<Vec<Vector>> {
        let dim = self.ambient_dim();
        (0..n)
            .map(|_| -> Result<Vector> {
                Ok(match &self.descriptor {
                    FaceDescriptor::Whole => self.parent.sample(1, rng)?.remove(0),
                    FaceDescriptor::DiskAlpha => {
                        let r: f64 = rng.random::<f64>().sqrt();
                        let th: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                        from_slice(&[r * th.cos(), r * th.sin(), 1.0])
                    }
                    FaceDescriptor::LiftedDiskAlpha => {
                        let r: f64 = rng.random::<f64>().sqrt();
                        let th: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                        let t: f64 = rng.random::<f64>() * 3.0;
                        from_slice(&[t * r * th.cos(), t * r * th.sin(), t, t])
                    }
                    FaceDescriptor::SturmFace => {
                        let b: f64 = rng.sample(rand_distr::StandardNormal);
                        let a = b * b + rng.random::<f64>() * 2.0;
                        from_slice(&[a, SQRT_2 * b, 1.0])
                    }
                    FaceDescriptor::PsdRange { n, range } => {
                        let v = psd_range_matrix(*n, range);
                        let r = v.ncols();
                        let g = Matrix::from_fn(r, r, |_, _| rng.sample(rand_distr::StandardNormal));
                        svec(&(&v * (&g * g.transpose()) * v.transpose()))
                    }
                    _ => {
                        // members of a cone face: project a random member of the
                        // parent, or a Gaussian, onto the face
                        let g = if rng.random_bool(0.5) && self.parent.is_cone() {
                            self.parent.sample(1, rng)?.remove(0)
                        } else {
                            gaussian(dim, rng) * 2.0
                        };
                        self.project(&g)?
                    }
                })
            })
            .collect()
    }

    /// Parses CLI descriptors: `whole`, `zero`, `orthant:zero=1,2`,
    /// `psd:range=[1,0;0,0]`, `ray=[1,0,1]`, `polyhedral:active=[0,2]`,
    /// `generated=[1,0,1;1,0,-1]`, `gallery:disk_alpha`, `gallery:lifted_disk`,
    /// `gallery:gamma_point=0.7`, `gallery:sturm_face`, `minimal:point=[..]`.
    pub fn from_descriptor(parent: &ConeSpec, text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = || ConeError::InvalidSpec(format!("unrecognized face descriptor {text:?}"));
        let desc = if text == "whole" {
            FaceDescriptor::Whole
        } else if text == "zero" {
            FaceDescriptor::Zero
        } else if let Some(rest) = text.strip_prefix("orthant:zero=") {
            FaceDescriptor::OrthantZeros {
                zero: parse_list(rest)?.iter().map(|v| *v as usize).collect(),
            }
        } else if let Some(rest) = text.strip_prefix("psd:range=") {
            let m = parse_matrix(rest)?;
            let n = m.nrows();
            let cols: Vec<Vector> = (0..m.ncols()).map(|j| m.column(j).into_owned()).collect();
            FaceDescriptor::PsdRange {
                n,
                range: orthonormalize(&cols)?.iter().map(to_vec).collect(),
            }
        } else if let Some(rest) = text.strip_prefix("ray=") {
            FaceDescriptor::Ray {
                generator: parse_list(rest)?,
            }
        } else if let Some(rest) = text.strip_prefix("polyhedral:active=") {
            FaceDescriptor::PolyhedralActive {
                active: parse_list(rest)?.iter().map(|v| *v as usize).collect(),
            }
        } else if let Some(rest) = text.strip_prefix("generated=") {
            let m = parse_matrix(rest)?;
            FaceDescriptor::Generated {
                generators: (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect(),
            }
        } else if let Some(rest) = text.strip_prefix("minimal:point=") {
            return minimal_face(parent, &from_slice(&parse_list(rest)?), &Tolerance::default());
        } else if let Some(rest) = text.strip_prefix("gallery:") {
            match rest {
                "disk_alpha" => FaceDescriptor::DiskAlpha,
                "lifted_disk" => FaceDescriptor::LiftedDiskAlpha,
                "sturm_face" => FaceDescriptor::SturmFace,
                _ => match rest.strip_prefix("gamma_point=") {
                    Some(t) => FaceDescriptor::GammaPoint {
                        t: t.trim().parse().map_err(|_| bad())?,
                    },
                    None => return Err(bad()),
                },
            }
        } else {
            return Err(bad());
        };
        Self::new(parent.clone(), desc)
    }
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    let t = text.trim().trim_start_matches('[').trim_end_matches(']');
    if t.trim().is_empty() {
        return Ok(Vec::new());
    }
    t.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| ConeError::InvalidSpec(format!("bad number {s:?}")))
        })
        .collect()
}

/// `[a,b;c,d]` row-major, rows separated by `;`.
fn parse_matrix(text: &str) -> Result<Matrix> {
    let t = text.trim().trim_start_matches('[').trim_end_matches(']');
    let rows: Vec<Vec<f64>> = t.split(';').map(parse_list).collect::<Result<_>>()?;
    let ncols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != ncols) || ncols == 0 {
        return Err(ConeError::InvalidSpec(format!("ragged matrix {text:?}")));
    }
    Ok(Matrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// The face of `k` containing `x` in its relative interior.
pub fn minimal_face(k: &ConeSpec, x: &Vector, tol: &Tolerance) -> Result<FaceHandle> {
    check_dim(k.dim(), x.len())?;
    let eps = tol.eps(x.norm());
    if !k.contains(x, tol)? {
        return Err(ConeError::Precondition("point is not in the cone".into()));
    }
    let desc = match k {
        ConeSpec::NonnegativeOrthant { .. } => {
            let zero: Vec<usize> = (0..x.len()).filter(|&i| x[i] <= eps).collect();
            if zero.is_empty() {
                FaceDescriptor::Whole
            } else if zero.len() == x.len() {
                FaceDescriptor::Zero
            } else {
                FaceDescriptor::OrthantZeros { zero }
            }
        }
        ConeSpec::Psd { n } => {
            let (vals, vecs) = sym_eigen(&smat(x, *n));
            let lmax = vals.amax();
            let idx: Vec<usize> = (0..*n)
                .filter(|&i| vals[i] > (RANK_CUTOFF * lmax).max(eps))
                .collect();
            if idx.len() == *n {
                FaceDescriptor::Whole
            } else if idx.is_empty() {
                FaceDescriptor::Zero
            } else {
                FaceDescriptor::PsdRange {
                    n: *n,
                    range: idx.iter().map(|&i| to_vec(&vecs.column(i).into_owned())).collect(),
                }
            }
        }
        ConeSpec::SecondOrder { dim } => {
            let t = x[dim - 1];
            let r = x.rows(0, dim - 1).norm();
            if x.norm() <= eps {
                FaceDescriptor::Zero
            } else if t - r > eps {
                FaceDescriptor::Whole
            } else {
                FaceDescriptor::Ray {
                    generator: to_vec(x),
                }
            }
        }
        ConeSpec::Polyhedral { rows, .. } => {
            let active: Vec<usize> = rows
                .iter()
                .enumerate()
                .filter(|(_, r)| from_slice(r).dot(x).abs() <= eps * from_slice(r).norm().max(1.0))
                .map(|(i, _)| i)
                .collect();
            if active.is_empty() {
                FaceDescriptor::Whole
            } else {
                FaceDescriptor::PolyhedralActive { active }
            }
        }
        ConeSpec::Product { left, right } => {
            let (a, b) = split(x, left.dim());
            let fl = minimal_face(left, &a, tol)?;
            let fr = minimal_face(right, &b, tol)?;
            if fl.is_whole() && fr.is_whole() {
                FaceDescriptor::Whole
            } else {
                FaceDescriptor::Product {
                    left: Box::new(fl.descriptor),
                    right: Box::new(fr.descriptor),
                }
            }
        }
        _ => {
            return Err(ConeError::Unsupported {
                operation: "minimal_face",
                variant: k.variant_name(),
            })
        }
    };
    FaceHandle::new(k.clone(), desc)
}

/// `F^Δ = K* ∩ F^⊥`, returned as a face of `dual_cone(K)`.
pub fn conjugate_face(k: &ConeSpec, f: &FaceHandle) -> Result<FaceHandle> {
    if !k.is_cone() {
        return Err(ConeError::Unsupported {
            operation: "conjugate_face",
            variant: k.variant_name(),
        });
    }
    let dual = k.dual_cone()?;
    let dim = k.dim();
    let desc = match (&f.descriptor, k) {
        (FaceDescriptor::Zero, _) => FaceDescriptor::Whole,
        (FaceDescriptor::OrthantZeros { zero }, ConeSpec::NonnegativeOrthant { .. }) => {
            let comp: Vec<usize> = (0..dim).filter(|i| !zero.contains(i)).collect();
            FaceDescriptor::OrthantZeros { zero: comp }
        }
        (FaceDescriptor::Whole, ConeSpec::NonnegativeOrthant { .. } | ConeSpec::Psd { .. } | ConeSpec::SecondOrder { .. }) => {
            FaceDescriptor::Zero
        }
        (FaceDescriptor::PsdRange { n, range }, ConeSpec::Psd { .. }) => {
            let v: Vec<Vector> = range.iter().map(|r| from_slice(r)).collect();
            FaceDescriptor::PsdRange {
                n: *n,
                range: orthogonal_complement(&v, *n).iter().map(to_vec).collect(),
            }
        }
        (FaceDescriptor::Ray { generator }, ConeSpec::SecondOrder { dim }) => {
            let mut g = from_slice(generator);
            for i in 0..dim - 1 {
                g[i] = -g[i];
            }
            FaceDescriptor::Ray { generator: to_vec(&g) }
        }
        (FaceDescriptor::PolyhedralActive { active }, ConeSpec::Polyhedral { rows, .. }) => {
            FaceDescriptor::Generated {
                generators: active.iter().map(|&i| rows[i].clone()).collect(),
            }
        }
        (
            FaceDescriptor::LiftedDiskAlpha,
            ConeSpec::Gallery {
                name: GalleryName::CylinderKTilde | GalleryName::NiceNotAmenableK,
            },
        ) => FaceDescriptor::Ray {
            generator: vec![0.0, 0.0, -1.0, 1.0],
        },
        (
            FaceDescriptor::Ray { generator },
            ConeSpec::Gallery {
                name: GalleryName::CylinderKTilde,
            },
        ) if k_tilde_rim_ray(generator).is_some() => {
            // rim ray (cos s, sin s, ±1, 1): tangent rim ray and opposite tip of K̃*
            let (c, s, h) = k_tilde_rim_ray(generator).expect("guarded");
            FaceDescriptor::Generated {
                generators: vec![vec![-c, -s, 0.0, 1.0], vec![0.0, 0.0, -h, 1.0]],
            }
        }
        (FaceDescriptor::Product { left, right }, ConeSpec::Product { left: kl, right: kr }) => {
            let fl = conjugate_face(kl, &FaceHandle::new((**kl).clone(), (**left).clone())?)?;
            let fr = conjugate_face(kr, &FaceHandle::new((**kr).clone(), (**right).clone())?)?;
            FaceDescriptor::Product {
                left: Box::new(fl.descriptor),
                right: Box::new(fr.descriptor),
            }
        }
        _ => {
            let perp = orthogonal_complement(&f.span_basis, dim);
            match restricted_generators(&dual, &perp)? {
                Some(g) if g.is_empty() => FaceDescriptor::Zero,
                Some(g) => FaceDescriptor::Generated {
                    generators: g.iter().map(to_vec).collect(),
                },
                None => {
                    let sub = ConeSpec::LinearSubspace {
                        ambient_dim: dim,
                        basis: perp.iter().map(to_vec).collect(),
                    };
                    FaceDescriptor::Cone {
                        spec: ConeSpec::Intersection {
                            parts: vec![dual.clone(), sub],
                        },
                    }
                }
            }
        }
    };
    FaceHandle::new(dual, desc)
}

/// `(cos s, sin s, ±1)` when `g` spans an extreme ray `(cos s, sin s, ±1, 1)` of K̃.
fn k_tilde_rim_ray(g: &[f64]) -> Option<(f64, f64, f64)> {
    if g.len() != 4 || g[3] <= 0.0 {
        return None;
    }
    let (a, b, c) = (g[0] / g[3], g[1] / g[3], g[2] / g[3]);
    let on_rim = ((a * a + b * b).sqrt() - 1.0).abs() <= 1e-12 && (c.abs() - 1.0).abs() <= 1e-12;
    on_rim.then(|| {
        let r = (a * a + b * b).sqrt();
        (a / r, b / r, c.signum())
    })
}

const RAY_TOL: f64 = 1e-10;

fn dedup_directions(gens: Vec<Vector>) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for g in gens {
        let u = &g / g.norm();
        if out.iter().all(|o| (o - &u).norm() > 1e-7) {
            out.push(u);
        }
    }
    out
}

fn golden_min(f: &dyn Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<f64> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while b - a > 1e-15 * (1.0 + a.abs()) {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Generators of `cone ∩ span(basis)` when the span has dimension at most 2:
/// the directions of the span are scanned on the unit circle, in-set arcs are
/// refined by bisection and isolated rays by golden-section search on the
/// distance to the cone. Returns `None` for larger spans.
fn restricted_generators(cone: &ConeSpec, basis: &[Vector]) -> Result<Option<Vec<Vector>>> {
    match basis.len() {
        0 => Ok(Some(Vec::new())),
        1 => {
            let mut g = Vec::new();
            for sg in [1.0, -1.0] {
                let v = &basis[0] * sg;
                if projection::distance(cone, &v)? <= RAY_TOL {
                    g.push(v);
                }
            }
            Ok(Some(g))
        }
        2 => {
            let dir = |th: f64| &basis[0] * th.cos() + &basis[1] * th.sin();
            let d = |th: f64| projection::distance(cone, &dir(th));
            let n = 720;
            let h = std::f64::consts::TAU / n as f64;
            let vals: Vec<f64> = (0..n).map(|i| d(i as f64 * h)).collect::<Result<_>>()?;
            let inside: Vec<bool> = vals.iter().map(|&v| v <= RAY_TOL).collect();
            if inside.iter().all(|&b| b) {
                return Ok(Some(vec![basis[0].clone(), -&basis[0], basis[1].clone(), -&basis[1]]));
            }
            let mut gens = Vec::new();
            let bisect = |mut a: f64, mut b: f64| -> Result<f64> {
                // a inside, b outside
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    if d(m)? <= RAY_TOL {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                Ok(a)
            };
            if let Some(first_out) = inside.iter().position(|&b| !b) {
                // walk counterclockwise from an outside direction; each arc
                // contributes its two edges and its midpoint
                let mut start = None;
                for k in 1..=n {
                    let i = (first_out + k) % n;
                    let prev = (first_out + k - 1) % n;
                    let (tp, ti) = ((first_out + k - 1) as f64 * h, (first_out + k) as f64 * h);
                    if inside[i] && !inside[prev] {
                        start = Some(bisect(ti, tp)?);
                    } else if !inside[i] && inside[prev] {
                        let a = start.take().expect("arc start precedes its end");
                        let b = bisect(tp, ti)?;
                        if b - a < 1e-3 {
                            // tangential contact: one ray
                            gens.push(dir(golden_min(&d, a - h, b + h)?));
                        } else {
                            gens.push(dir(a));
                            gens.push(dir(b));
                            gens.push(dir(0.5 * (a + b)));
                        }
                    }
                }
                if !gens.is_empty() {
                    return Ok(Some(dedup_directions(gens)));
                }
            }
            // isolated rays: local minima of the distance that reach zero
            for i in 0..n {
                let (p, q) = ((i + n - 1) % n, (i + 1) % n);
                if vals[i] <= vals[p] && vals[i] < vals[q] && vals[i] < 1e-3 {
                    let t = i as f64 * h;
                    let th = golden_min(&d, t - h, t + h)?;
                    if d(th)? <= RAY_TOL {
                        gens.push(dir(th));
                    }
                }
            }
            Ok(Some(dedup_directions(gens)))
        }
        _ => Ok(None),
    }
}

/// Outcome of the exposedness test. Exposed faces satisfy
/// `<normal, x> ≥ level` on the parent with equality exactly on the face.
#[derive(Clone, Debug, PartialEq)]
pub enum Exposure {
    Exposed {
        normal: Vector,
        level: f64,
        /// `min <normal, x> − level` over sampled parent points away from the
        /// face, divided by their distance to the face.
        margin: f64,
    },
    NotExposed {
        /// Member of `F^ΔΔ` outside `F`.
        witness: Vector,
        double_conjugate: FaceDescriptor,
    },
    Undecided {
        margin: f64,
    },
}

pub const EXPOSURE_MARGIN: f64 = 1e-7;

fn candidate_normal(k: &ConeSpec, f: &FaceHandle) -> Result<Option<(Vector, f64)>> {
    let dim = k.dim();
    Ok(match (&f.descriptor, k) {
        (FaceDescriptor::DiskAlpha, ConeSpec::Gallery { .. }) => Some((from_slice(&[0.0, 0.0, -1.0]), -1.0)),
        (FaceDescriptor::GammaPoint { t }, ConeSpec::Gallery { .. }) => {
            let p = from_slice(&[(2.0 * t).cos(), (2.0 * t).sin(), 0.0]);
            let h = p.dot(&gallery::gamma(*t));
            Some((-p, -h))
        }
        (FaceDescriptor::SturmFace, _) => Some((from_slice(&[0.0, 0.0, 1.0]), 1.0)),
        _ if k.is_cone() => {
            // a relative-interior point of F^Δ exposes F when F is exposed
            let conj = conjugate_face(k, f)?;
            let s = match &conj.descriptor {
                FaceDescriptor::Whole => {
                    let mut r = rng(17);
                    let pts = conj.sample(64, &mut r)?;
                    pts.iter().fold(Vector::zeros(dim), |a, b| a + b / (1.0 + b.norm()))
                }
                FaceDescriptor::Zero => Vector::zeros(dim),
                FaceDescriptor::OrthantZeros { zero } => {
                    let mut s = Vector::from_element(dim, 1.0);
                    for &i in zero {
                        s[i] = 0.0;
                    }
                    s
                }
                FaceDescriptor::PsdRange { n, range } => {
                    let v = psd_range_matrix(*n, range);
                    svec(&(&v * v.transpose()))
                }
                FaceDescriptor::Ray { generator } => from_slice(generator),
                FaceDescriptor::Generated { generators } => generators
                    .iter()
                    .fold(Vector::zeros(dim), |a, g| a + from_slice(g)),
                _ => {
                    let mut r = rng(17);
                    let pts = conj.sample(64, &mut r)?;
                    pts.iter().fold(Vector::zeros(dim), |a, b| a + b / (1.0 + b.norm()))
                }
            };
            Some((s, 0.0))
        }
        _ => None,
    })
}

/// Decides exposedness by constructing a candidate normal and checking it
/// on `n_samples` parent samples; falls back to the `F^ΔΔ` route.
pub fn is_exposed(k: &ConeSpec, f: &FaceHandle, n_samples: usize, seed: u64) -> Result<Exposure> {
    let dim = k.dim();
    if f.is_whole() {
        return Ok(Exposure::Exposed {
            normal: Vector::zeros(dim),
            level: 0.0,
            margin: f64::INFINITY,
        });
    }
    let tol = Tolerance::default();
    let mut r = rng(seed);
    let Some((s, level)) = candidate_normal(k, f)? else {
        return Ok(Exposure::Undecided { margin: 0.0 });
    };
    // equality on the face
    let on_face = f.sample(n_samples.min(200), &mut r)?;
    let face_ok = on_face
        .iter()
        .all(|x| (s.dot(x) - level).abs() <= 1e-9 * (1.0 + s.norm() * x.norm()));
    // strict inequality away from it
    let mut margin = f64::INFINITY;
    for x in k.sample(n_samples, &mut r)? {
        let d = f.distance(&x)?;
        if d > 1e-4 * (1.0 + x.norm()) {
            margin = margin.min((s.dot(&x) - level) / d);
        }
    }
    if s.norm() > 0.0 && face_ok && margin > EXPOSURE_MARGIN {
        return Ok(Exposure::Exposed {
            normal: s,
            level,
            margin,
        });
    }
    if k.is_cone() {
        if let Ok(conj) = conjugate_face(k, f) {
            if let Ok(dd) = conjugate_face(&conj.parent, &conj) {
                for y in dd.sample(200, &mut r)? {
                    if f.distance(&y)? > 1e-6 * (1.0 + y.norm()) && k.contains(&y, &tol)? {
                        return Ok(Exposure::NotExposed {
                            witness: y,
                            double_conjugate: dd.descriptor,
                        });
                    }
                }
            }
        }
    }
    Ok(Exposure::Undecided {
        margin: if margin.is_finite() { margin } else { 0.0 },
    })
}

/// Result of testing `s ∈ K* + F^⊥`.
#[derive(Clone, Debug, PartialEq)]
pub enum DualSum {
    InSum {
        dual_part: Vector,
        perp_part: Vector,
        residual: f64,
    },
    NotInSum {
        /// `inf_{v ∈ F^⊥} dist(s − v, K*)` as computed.
        gap: f64,
    },
}

impl DualSum {
    pub fn is_in_sum(&self) -> bool {
        matches!(self, DualSum::InSum { .. })
    }
}

fn lifted_disk_parent(k: &ConeSpec, f: &FaceHandle) -> bool {
    f.descriptor == FaceDescriptor::LiftedDiskAlpha
        && matches!(
            k,
            ConeSpec::Gallery {
                name: GalleryName::CylinderKTilde | GalleryName::NiceNotAmenableK
            }
        )
}

/// Membership in `K* + F^⊥`. For the gallery cones with the lifted disk face
/// this uses the closed form `√(x² + y²) ≤ z + w` and the explicit
/// decomposition through exposing normals; otherwise it falls back to
/// [`dual_sum_membership_numeric`].
pub fn dual_sum_membership(k: &ConeSpec, f: &FaceHandle, s: &Vector, tol: &Tolerance) -> Result<DualSum> {
    check_dim(k.dim(), s.len())?;
    if !lifted_disk_parent(k, f) {
        return dual_sum_membership_numeric(k, f, s, tol);
    }
    let eps = tol.eps(s.norm());
    let m = gallery::dual_sum_margin(s);
    if m < -eps {
        return Ok(DualSum::NotInSum { gap: -m / SQRT_2 });
    }
    let dual = k.dual_cone()?;
    if dual.margin(s).is_some_and(|v| v >= -eps) {
        return Ok(DualSum::InSum {
            dual_part: s.clone(),
            perp_part: Vector::zeros(4),
            residual: 0.0,
        });
    }
    // move to the boundary along (0, 0, 1, 0), then use the explicit form
    let rho = s[0].hypot(s[1]);
    let slack = (s[2] + s[3] - rho).max(0.0);
    let b = from_slice(&[s[0], s[1], s[2] - slack, s[3]]);
    let d = gallery::decompose_dual_sum_boundary(&b)?;
    let dual_part = &d.dual_part + from_slice(&[0.0, 0.0, 0.0, slack]);
    let perp_part = &d.perp_part + from_slice(&[0.0, 0.0, slack, -slack]);
    let residual = (s - &dual_part - &perp_part).norm();
    Ok(DualSum::InSum {
        dual_part,
        perp_part,
        residual,
    })
}

/// Numerical membership in `K* + F^⊥`: minimizes the convex function
/// `c ↦ dist(s − V c, K*)` over coordinates `c` of `F^⊥`.
pub fn dual_sum_membership_numeric(
    k: &ConeSpec,
    f: &FaceHandle,
    s: &Vector,
    tol: &Tolerance,
) -> Result<DualSum> {
    let dual = k.dual_cone()?;
    let dim = k.dim();
    let perp = orthogonal_complement(&f.span_basis, dim);
    let eps = tol.eps(s.norm());
    let phi = |c: &Vector| -> Result<(f64, Vector)> {
        let mut v = Vector::zeros(dim);
        for (b, ci) in perp.iter().zip(c.iter()) {
            v.axpy(*ci, b, 1.0);
        }
        let u = s - &v;
        let p = projection::project(&dual, &u)?;
        Ok((p.distance, v))
    };
    let m = perp.len();
    let mut c = Vector::zeros(m);
    if m == 1 {
        // convex in one variable: bracket and golden-section search
        let f1 = |t: f64| phi(&from_slice(&[t])).map(|r| r.0);
        let span = 10.0 * (1.0 + s.norm());
        let (mut a, mut b) = (-span, span);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let mut f1v = f1(x1)?;
        let mut f2v = f1(x2)?;
        for _ in 0..200 {
            if f1v <= f2v {
                b = x2;
                x2 = x1;
                f2v = f1v;
                x1 = b - g * (b - a);
                f1v = f1(x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1v = f2v;
                x2 = a + g * (b - a);
                f2v = f1(x2)?;
            }
            if b - a < 1e-14 * span {
                break;
            }
        }
        c[0] = 0.5 * (a + b);
    } else if m > 1 {
        // alternating projections between s − F^⊥ and K*
        for _ in 0..20_000 {
            let (_, v) = phi(&c)?;
            let u = s - &v;
            let p = projection::project(&dual, &u)?.point;
            let r = &u - &p;
            let step = Vector::from_iterator(m, perp.iter().map(|b| b.dot(&r)));
            c += &step;
            if step.norm() <= 1e-15 * (1.0 + s.norm()) {
                break;
            }
        }
    }
    let (gap, v) = phi(&c)?;
    if gap <= eps {
        let u = s - &v;
        let dual_part = projection::project(&dual, &u)?.point;
        let residual = (s - &dual_part - &v).norm();
        Ok(DualSum::InSum {
            dual_part,
            perp_part: v,
            residual,
        })
    } else {
        Ok(DualSum::NotInSum { gap })
    }
}
