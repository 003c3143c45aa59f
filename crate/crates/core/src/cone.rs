//! Cone specifications: atoms, combinators, compact slices and the named
//! gallery sets, with membership, dual and sampling oracles.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, ConeError, Result};
use crate::gallery::{self, CurveFamily, CurveSet, GalleryName};
use crate::linalg::{
    from_slice, gaussian, orthogonal_complement, orthonormalize, smat, svec_dim, sym_eigen, Matrix,
    Tolerance, Vector,
};
use crate::projection;

/// Tagged-union description of a closed convex cone.
///
/// Symmetric matrices live in scaled vectorized form (see [`crate::linalg::svec`]),
/// so `psd(n)` has ambient dimension `n(n+1)/2`. The `gallery` variant also
/// names the compact slice `C` and the Sturm set, which are not cones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConeSpec {
    /// `{x : <normal, x> ≥ offset}`.
    Halfspace {
        normal: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    LinearSubspace {
        ambient_dim: usize,
        basis: Vec<Vec<f64>>,
    },
    /// `{x : A x ≥ 0}` with the rows of `A` given.
    Polyhedral {
        ambient_dim: usize,
        rows: Vec<Vec<f64>>,
    },
    /// Nonnegative combinations of finitely many generators.
    Generated {
        ambient_dim: usize,
        generators: Vec<Vec<f64>>,
    },
    /// `{(x̄, t) : ‖x̄‖ ≤ t}` with `t` the last coordinate.
    SecondOrder {
        dim: usize,
    },
    Psd {
        n: usize,
    },
    NonnegativeOrthant {
        dim: usize,
    },
    Product {
        left: Box<ConeSpec>,
        right: Box<ConeSpec>,
    },
    Intersection {
        parts: Vec<ConeSpec>,
    },
    /// Image of `inner` under an injective map given row-major.
    LinearImage {
        map: Vec<Vec<f64>>,
        inner: Box<ConeSpec>,
    },
    ConicHull {
        slice: SliceSpec,
    },
    Gallery {
        name: GalleryName,
    },
    Dual {
        primal: Box<ConeSpec>,
    },
}

/// A compact slice `C = K ∩ {<e, ·> = 1}` given by its extreme-point generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceSpec {
    pub e: Vec<f64>,
    pub generator: SliceGenerator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SliceGenerator {
    /// Finite point set on the slice hyperplane.
    Points { points: Vec<Vec<f64>> },
    /// Lifted gallery curves `(p, 1)` with `p` on the chosen curve family.
    Curves { family: CurveFamily, density: usize },
}

impl SliceSpec {
    pub fn level(&self) -> f64 {
        1.0
    }

    pub fn e(&self) -> Vector {
        from_slice(&self.e)
    }

    pub fn samples(&self) -> Vec<Vector> {
        match &self.generator {
            SliceGenerator::Points { points } => points.iter().map(|p| from_slice(p)).collect(),
            SliceGenerator::Curves { family, density } => {
                CurveSet::new(*family, *density).lifted_samples()
            }
        }
    }

    /// Dimension of the affine hull of the sampled slice.
    pub fn hull_dim(&self) -> usize {
        let pts = self.samples();
        let Some(first) = pts.first() else { return 0 };
        let diffs: Vec<Vector> = pts.iter().skip(1).map(|p| p - first).collect();
        orthonormalize(&diffs).map(|b| b.len()).unwrap_or(0)
    }

    /// Exact linear maximization oracle over the slice, when one exists.
    pub fn curves(&self) -> Option<CurveSet> {
        match &self.generator {
            SliceGenerator::Curves { family, density } => Some(CurveSet::new(*family, *density)),
            SliceGenerator::Points { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let e = self.e();
        if e.norm() == 0.0 {
            return Err(ConeError::InvalidSpec("slice normal e must be nonzero".into()));
        }
        match &self.generator {
            SliceGenerator::Points { points } => {
                if points.is_empty() {
                    return Err(ConeError::InvalidSpec("slice needs at least one point".into()));
                }
                for p in points {
                    check_dim(e.len(), p.len())?;
                    let v = from_slice(p);
                    if (e.dot(&v) - 1.0).abs() > 1e-10 || !v.iter().all(|c| c.is_finite()) {
                        return Err(ConeError::InvalidSpec(format!(
                            "slice point {p:?} is not on <e, x> = 1"
                        )));
                    }
                }
            }
            SliceGenerator::Curves { .. } => {
                if self.e != [0.0, 0.0, 0.0, 1.0] {
                    return Err(ConeError::InvalidSpec(
                        "curve slices use e = (0, 0, 0, 1)".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MembershipStatus {
    Inside,
    Boundary,
    Outside,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Membership {
    pub status: MembershipStatus,
    pub distance: f64,
    /// `false` when decided by projection distance and perturbation rather
    /// than a closed-form description.
    pub exact: bool,
}

impl Membership {
    pub fn is_member(&self) -> bool {
        self.status != MembershipStatus::Outside
    }
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>], ncols: usize) -> Result<Matrix> {
    for r in rows {
        check_dim(ncols, r.len())?;
    }
    Ok(Matrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

impl ConeSpec {
    pub fn soc(dim: usize) -> Self {
        Self::SecondOrder { dim }
    }

    pub fn psd(n: usize) -> Self {
        Self::Psd { n }
    }

    pub fn orthant(dim: usize) -> Self {
        Self::NonnegativeOrthant { dim }
    }

    /// `psd(n) ∩ {entrywise nonnegative}`; the √2 scaling keeps signs, so the
    /// second part is an orthant in scaled coordinates.
    pub fn doubly_nonnegative(n: usize) -> Self {
        Self::Intersection {
            parts: vec![Self::Psd { n }, Self::NonnegativeOrthant { dim: svec_dim(n) }],
        }
    }

    pub fn gallery(name: GalleryName) -> Self {
        Self::Gallery { name }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| {
            // errors inside tagged variants carry no position
            if e.line() == 0 {
                ConeError::InvalidSpec(e.to_string())
            } else {
                ConeError::InvalidSpec(format!("line {}, column {}: {e}", e.line(), e.column()))
            }
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn variant_name(&self) -> String {
        match self {
            Self::Halfspace { .. } => "halfspace".into(),
            Self::LinearSubspace { .. } => "linear_subspace".into(),
            Self::Polyhedral { .. } => "polyhedral".into(),
            Self::Generated { .. } => "generated".into(),
            Self::SecondOrder { .. } => "second_order".into(),
            Self::Psd { .. } => "psd".into(),
            Self::NonnegativeOrthant { .. } => "nonnegative_orthant".into(),
            Self::Product { .. } => "product".into(),
            Self::Intersection { .. } => "intersection".into(),
            Self::LinearImage { .. } => "linear_image".into(),
            Self::ConicHull { .. } => "conic_hull".into(),
            Self::Gallery { name } => format!("gallery({})", name.label()),
            Self::Dual { primal } => format!("dual({})", primal.variant_name()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Halfspace { normal, .. } => normal.len(),
            Self::LinearSubspace { ambient_dim, .. }
            | Self::Polyhedral { ambient_dim, .. }
            | Self::Generated { ambient_dim, .. } => *ambient_dim,
            Self::SecondOrder { dim } | Self::NonnegativeOrthant { dim } => *dim,
            Self::Psd { n } => svec_dim(*n),
            Self::Product { left, right } => left.dim() + right.dim(),
            Self::Intersection { parts } => parts.first().map_or(0, |p| p.dim()),
            Self::LinearImage { map, .. } => map.len(),
            Self::ConicHull { slice } => slice.e.len(),
            Self::Gallery { name } => name.ambient_dim(),
            Self::Dual { primal } => primal.dim(),
        }
    }

    /// `false` for the named gallery sets that are not cones and for
    /// halfspaces with nonzero offset.
    pub fn is_cone(&self) -> bool {
        match self {
            Self::Halfspace { offset, .. } => *offset == 0.0,
            Self::Gallery { name } => name.is_cone(),
            Self::Product { left, right } => left.is_cone() && right.is_cone(),
            Self::Intersection { parts } => parts.iter().all(|p| p.is_cone()),
            Self::LinearImage { inner, .. } => inner.is_cone(),
            Self::Dual { .. } => true,
            _ => true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ConeError::InvalidSpec(m.to_string()));
        match self {
            Self::Halfspace { normal, offset } => {
                if normal.is_empty() || normal.iter().all(|c| *c == 0.0) {
                    return bad("halfspace normal must be nonzero");
                }
                if *offset > 0.0 {
                    return bad("halfspace must contain the origin (offset ≤ 0)");
                }
            }
            Self::LinearSubspace { ambient_dim, basis } => {
                for b in basis {
                    check_dim(*ambient_dim, b.len())?;
                }
            }
            Self::Polyhedral { ambient_dim, rows } => {
                matrix_from_rows(rows, *ambient_dim)?;
            }
            Self::Generated {
                ambient_dim,
                generators,
            } => {
                matrix_from_rows(generators, *ambient_dim)?;
            }
            Self::SecondOrder { dim } | Self::NonnegativeOrthant { dim } => {
                if *dim == 0 {
                    return bad("dimension must be positive");
                }
            }
            Self::Psd { n } => {
                if *n == 0 {
                    return bad("matrix order must be positive");
                }
            }
            Self::Product { left, right } => {
                left.validate()?;
                right.validate()?;
            }
            Self::Intersection { parts } => {
                let Some(first) = parts.first() else {
                    return bad("intersection needs at least one part");
                };
                for p in parts {
                    p.validate()?;
                    check_dim(first.dim(), p.dim())?;
                }
            }
            Self::LinearImage { map, inner } => {
                inner.validate()?;
                let a = matrix_from_rows(map, inner.dim())?;
                let rank = orthonormalize(
                    &(0..a.ncols()).map(|j| a.column(j).into_owned()).collect::<Vec<_>>(),
                )?
                .len();
                if rank < a.ncols() {
                    return bad("linear_image map must have full column rank");
                }
            }
            Self::ConicHull { slice } => slice.validate()?,
            Self::Gallery { .. } => {}
            Self::Dual { primal } => primal.validate()?,
        }
        Ok(())
    }

    /// Signed slack of a closed-form description (positive inside), for the
    /// variants that have one.
    pub fn margin(&self, x: &Vector) -> Option<f64> {
        match self {
            Self::Halfspace { normal, offset } => {
                let n = from_slice(normal);
                Some((n.dot(x) - offset) / n.norm())
            }
            Self::NonnegativeOrthant { .. } => Some(x.min()),
            Self::SecondOrder { dim } => {
                let t = x[dim - 1];
                Some(t - x.rows(0, dim - 1).norm())
            }
            Self::Psd { n } => Some(sym_eigen(&smat(x, *n)).0[0]),
            Self::Polyhedral { rows, .. } => Some(
                rows.iter()
                    .map(|r| {
                        let a = from_slice(r);
                        let n = a.norm();
                        if n > 0.0 {
                            a.dot(x) / n
                        } else {
                            f64::INFINITY
                        }
                    })
                    .fold(f64::INFINITY, f64::min),
            ),
            Self::Gallery {
                name: GalleryName::CylinderKTilde,
            } => Some(gallery::k_tilde_margin(x)),
            Self::Gallery {
                name: GalleryName::SturmSlice,
            } => Some(gallery::sturm_margin(x)),
            Self::Dual { primal } => match primal.as_ref() {
                Self::Gallery {
                    name: GalleryName::CylinderKTilde,
                } => Some(gallery::k_tilde_dual_margin(x)),
                Self::Gallery {
                    name: GalleryName::NiceNotAmenableK,
                } => {
                    // s = (v, c) ∈ K* iff c ≥ max_{p ∈ C} <−v, p>
                    let v = x.rows(0, 3).into_owned();
                    Some(x[3] - CurveSet::default().support(&(-v)))
                }
                Self::SecondOrder { .. } | Self::Psd { .. } | Self::NonnegativeOrthant { .. } => {
                    primal.margin(x)
                }
                _ => None,
            },
            _ => None,
        }
    }

    /// Membership trichotomy. Variants without a closed-form description are
    /// decided by projection distance plus a coordinate perturbation test,
    /// flagged with `exact = false`.
    pub fn membership(&self, x: &Vector, tol: &Tolerance) -> Result<Membership> {
        check_dim(self.dim(), x.len())?;
        let eps = tol.eps(x.norm());
        match self {
            Self::Product { left, right } => {
                let (a, b) = split(x, left.dim());
                let ma = left.membership(&a, tol)?;
                let mb = right.membership(&b, tol)?;
                let distance = ma.distance.hypot(mb.distance);
                use MembershipStatus::*;
                let status = match (ma.status, mb.status) {
                    (Outside, _) | (_, Outside) => Outside,
                    (Inside, Inside) => Inside,
                    _ => Boundary,
                };
                return Ok(Membership {
                    status,
                    distance,
                    exact: ma.exact && mb.exact,
                });
            }
            Self::Intersection { parts } => {
                let ms = parts
                    .iter()
                    .map(|p| p.membership(x, tol))
                    .collect::<Result<Vec<_>>>()?;
                let exact = ms.iter().all(|m| m.exact);
                if ms.iter().any(|m| m.status == MembershipStatus::Outside) {
                    let distance = projection::distance(self, x)?;
                    return Ok(Membership {
                        status: MembershipStatus::Outside,
                        distance: distance.max(ms.iter().map(|m| m.distance).fold(0.0, f64::max)),
                        exact,
                    });
                }
                let status = if ms.iter().all(|m| m.status == MembershipStatus::Inside) {
                    MembershipStatus::Inside
                } else {
                    MembershipStatus::Boundary
                };
                return Ok(Membership {
                    status,
                    distance: 0.0,
                    exact,
                });
            }
            Self::LinearSubspace { ambient_dim, .. } => {
                let distance = projection::distance(self, x)?;
                let full = projection::subspace_basis(self)?.len() == *ambient_dim;
                let status = if distance > eps {
                    MembershipStatus::Outside
                } else if full {
                    MembershipStatus::Inside
                } else {
                    MembershipStatus::Boundary
                };
                return Ok(Membership {
                    status,
                    distance,
                    exact: true,
                });
            }
            _ => {}
        }
        let distance = projection::distance(self, x)?;
        if let Some(m) = self.margin(x) {
            let status = if distance > eps && m < 0.0 {
                MembershipStatus::Outside
            } else if m > eps {
                MembershipStatus::Inside
            } else {
                MembershipStatus::Boundary
            };
            return Ok(Membership {
                status,
                distance,
                exact: true,
            });
        }
        if distance > eps {
            return Ok(Membership {
                status: MembershipStatus::Outside,
                distance,
                exact: false,
            });
        }
        let delta = 1e-6 * (1.0 + x.norm());
        let mut interior = true;
        'outer: for i in 0..x.len() {
            for sign in [-1.0, 1.0] {
                let mut y = x.clone();
                y[i] += sign * delta;
                if projection::distance(self, &y)? > tol.eps(y.norm()) {
                    interior = false;
                    break 'outer;
                }
            }
        }
        Ok(Membership {
            status: if interior {
                MembershipStatus::Inside
            } else {
                MembershipStatus::Boundary
            },
            distance,
            exact: false,
        })
    }

    pub fn contains(&self, x: &Vector, tol: &Tolerance) -> Result<bool> {
        Ok(self.membership(x, tol)?.is_member())
    }

    /// The dual cone `K* = {s : <s, x> ≥ 0 ∀ x ∈ K}`.
    pub fn dual_cone(&self) -> Result<ConeSpec> {
        let unavailable = || ConeError::DualUnavailable(self.variant_name());
        Ok(match self {
            Self::Halfspace { normal, offset } => {
                if *offset != 0.0 {
                    return Err(unavailable());
                }
                Self::Generated {
                    ambient_dim: normal.len(),
                    generators: vec![normal.clone()],
                }
            }
            Self::LinearSubspace { ambient_dim, .. } => {
                let basis = projection::subspace_basis(self)?;
                Self::LinearSubspace {
                    ambient_dim: *ambient_dim,
                    basis: orthogonal_complement(&basis, *ambient_dim)
                        .iter()
                        .map(crate::linalg::to_vec)
                        .collect(),
                }
            }
            Self::Polyhedral { ambient_dim, rows } => Self::Generated {
                ambient_dim: *ambient_dim,
                generators: rows.clone(),
            },
            Self::Generated {
                ambient_dim,
                generators,
            } => Self::Polyhedral {
                ambient_dim: *ambient_dim,
                rows: generators.clone(),
            },
            Self::SecondOrder { .. } | Self::Psd { .. } | Self::NonnegativeOrthant { .. } => {
                self.clone()
            }
            Self::Product { left, right } => Self::Product {
                left: Box::new(left.dual_cone()?),
                right: Box::new(right.dual_cone()?),
            },
            Self::LinearImage { map, inner } => {
                // (A K)* = A^{-T} K* for invertible A
                let a = matrix_from_rows(map, inner.dim())?;
                if !a.is_square() {
                    return Err(unavailable());
                }
                let inv = a.try_inverse().ok_or_else(unavailable)?;
                let it = inv.transpose();
                Self::LinearImage {
                    map: (0..it.nrows())
                        .map(|i| it.row(i).iter().copied().collect())
                        .collect(),
                    inner: Box::new(inner.dual_cone()?),
                }
            }
            Self::ConicHull { slice } => match &slice.generator {
                SliceGenerator::Points { points } => Self::Polyhedral {
                    ambient_dim: slice.e.len(),
                    rows: points.clone(),
                },
                SliceGenerator::Curves { .. } => Self::Dual {
                    primal: Box::new(self.clone()),
                },
            },
            Self::Gallery { name } => match name {
                GalleryName::NiceNotAmenableK | GalleryName::CylinderKTilde => Self::Dual {
                    primal: Box::new(self.clone()),
                },
                _ => return Err(unavailable()),
            },
            Self::Dual { primal } => primal.as_ref().clone(),
            Self::Intersection { .. } => return Err(unavailable()),
        })
    }

    /// `x / <e, x>` for a conic hull with slice normal `e`.
    pub fn rescale_to_slice(&self, x: &Vector) -> Result<Vector> {
        let e = self.slice_normal().ok_or_else(|| ConeError::Unsupported {
            operation: "rescale_to_slice",
            variant: self.variant_name(),
        })?;
        check_dim(e.len(), x.len())?;
        let pairing = e.dot(x);
        if !(pairing > 0.0) {
            return Err(ConeError::NotRescalable { pairing });
        }
        if pairing == 1.0 {
            return Ok(x.clone());
        }
        Ok(x / pairing)
    }

    pub fn slice_normal(&self) -> Option<Vector> {
        match self {
            Self::ConicHull { slice } => Some(slice.e()),
            Self::Gallery {
                name: GalleryName::NiceNotAmenableK | GalleryName::CylinderKTilde,
            } => Some(from_slice(&[0.0, 0.0, 0.0, 1.0])),
            _ => None,
        }
    }

    /// The compact slice of a conic hull.
    pub fn slice(&self) -> Option<SliceSpec> {
        match self {
            Self::ConicHull { slice } => Some(slice.clone()),
            Self::Gallery {
                name: GalleryName::NiceNotAmenableK,
            } => Some(gallery::nice_not_amenable_slice(gallery::DEFAULT_CURVE_DENSITY)),
            Self::Gallery {
                name: GalleryName::CylinderKTilde,
            } => Some(SliceSpec {
                e: vec![0.0, 0.0, 0.0, 1.0],
                generator: SliceGenerator::Curves {
                    family: CurveFamily::Cylinder,
                    density: gallery::DEFAULT_CURVE_DENSITY,
                },
            }),
            _ => None,
        }
    }

    /// Random elements of the set, mixing interior and boundary points.
    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> Result<Vec<Vector>> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }

    fn sample_one(&self, rng: &mut impl Rng) -> Result<Vector> {
        let d = self.dim();
        Ok(match self {
            Self::NonnegativeOrthant { .. } => Vector::from_iterator(
                d,
                (0..d).map(|_| {
                    let g: f64 = rng.sample(rand_distr::StandardNormal);
                    if rng.random_bool(0.3) {
                        0.0
                    } else {
                        g.abs()
                    }
                }),
            ),
            Self::SecondOrder { dim } => {
                let mut x = gaussian(*dim, rng);
                let head = x.rows(0, dim - 1).norm();
                let extra: f64 = if rng.random_bool(0.3) {
                    0.0
                } else {
                    x[dim - 1].abs()
                };
                x[dim - 1] = head + extra;
                x
            }
            Self::Psd { n } => {
                let k = rng.random_range(1..=*n);
                let g = Matrix::from_fn(*n, k, |_, _| rng.sample(rand_distr::StandardNormal));
                crate::linalg::svec(&(&g * g.transpose()))
            }
            Self::Generated { generators, .. } => {
                let mut x = Vector::zeros(d);
                if !generators.is_empty() {
                    for _ in 0..rng.random_range(1..=3usize) {
                        let g = &generators[rng.random_range(0..generators.len())];
                        let w: f64 = rng.random();
                        x += from_slice(g) * w;
                    }
                }
                x
            }
            Self::Product { left, right } => {
                let a = left.sample_one(rng)?;
                let b = right.sample_one(rng)?;
                concat(&a, &b)
            }
            Self::LinearImage { map, inner } => {
                let a = matrix_from_rows(map, inner.dim())?;
                a * inner.sample_one(rng)?
            }
            Self::ConicHull { slice } => {
                let lam: f64 = rng.random::<f64>() * 3.0;
                slice_combination(&slice.samples(), rng) * lam
            }
            Self::Gallery { name } => match name {
                GalleryName::NiceNotAmenableC => {
                    slice_combination(&CurveSet::new(CurveFamily::Full, 256).samples(), rng)
                }
                GalleryName::NiceNotAmenableK | GalleryName::CylinderKTilde => {
                    let fam = if *name == GalleryName::CylinderKTilde {
                        CurveFamily::Cylinder
                    } else {
                        CurveFamily::Full
                    };
                    let lam: f64 = rng.random::<f64>() * 3.0;
                    slice_combination(&CurveSet::new(fam, 256).lifted_samples(), rng) * lam
                }
                GalleryName::SturmSlice => {
                    let mut x = Self::Psd { n: 2 }.sample_one(rng)?;
                    if x[2] < 1.0 {
                        x /= x[2].max(1e-3);
                        x[2] = x[2].max(1.0);
                    }
                    x
                }
            },
            _ => {
                let g = gaussian(d, rng) * 2.0;
                projection::project(self, &g)?.point
            }
        })
    }
}

/// Random convex combination of one to four points of `pts`.
fn slice_combination(pts: &[Vector], rng: &mut impl Rng) -> Vector {
    let k = rng.random_range(1..=4usize);
    let mut w: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    let mut out = Vector::zeros(pts[0].len());
    for wi in w {
        out += &pts[rng.random_range(0..pts.len())] * wi;
    }
    out
}

pub(crate) fn split(x: &Vector, k: usize) -> (Vector, Vector) {
    (
        x.rows(0, k).into_owned(),
        x.rows(k, x.len() - k).into_owned(),
    )
}

pub(crate) fn concat(a: &Vector, b: &Vector) -> Vector {
    Vector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rng, svec};
    use proptest::prelude::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn membership_examples() {
        let soc = ConeSpec::soc(3);
        let m = soc.membership(&from_slice(&[0.0, 0.0, 1.0]), &tol()).unwrap();
        assert_eq!(m.status, MembershipStatus::Inside);
        let psd = ConeSpec::psd(2);
        let x = svec(&Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        assert_eq!(psd.membership(&x, &tol()).unwrap().status, MembershipStatus::Outside);
    }

    #[test]
    fn doubly_nonnegative_rejects_negative_entry() {
        let dnn = ConeSpec::doubly_nonnegative(2);
        let m = Matrix::from_row_slice(2, 2, &[1.0, -0.5, -0.5, 1.0]);
        let x = svec(&m);
        // oracle: eigenvalues 0.5 and 1.5 are positive, the off-diagonal sign is not
        assert!(m.symmetric_eigenvalues().iter().all(|l| *l > 0.0));
        assert!(m[(0, 1)] < 0.0);
        let res = dnn.membership(&x, &tol()).unwrap();
        assert_eq!(res.status, MembershipStatus::Outside);
        assert!(res.distance > 1e-3);
    }

    #[test]
    fn boundary_classification() {
        let soc = ConeSpec::soc(3);
        let m = soc.membership(&from_slice(&[1.0, 0.0, 1.0]), &tol()).unwrap();
        assert_eq!(m.status, MembershipStatus::Boundary);
        let o = ConeSpec::orthant(3);
        assert_eq!(
            o.membership(&from_slice(&[1.0, 0.0, 2.0]), &tol()).unwrap().status,
            MembershipStatus::Boundary
        );
    }

    #[test]
    fn fallback_membership_is_flagged() {
        let k = ConeSpec::Generated {
            ambient_dim: 2,
            generators: vec![vec![1.0, 0.0], vec![1.0, 1.0]],
        };
        let m = k.membership(&from_slice(&[2.0, 1.0]), &tol()).unwrap();
        assert_eq!(m.status, MembershipStatus::Inside);
        assert!(!m.exact);
        let b = k.membership(&from_slice(&[1.0, 0.0]), &tol()).unwrap();
        assert_eq!(b.status, MembershipStatus::Boundary);
        let out = k.membership(&from_slice(&[0.0, 1.0]), &tol()).unwrap();
        assert_eq!(out.status, MembershipStatus::Outside);
    }

    #[test]
    fn dual_examples() {
        assert_eq!(ConeSpec::soc(5).dual_cone().unwrap(), ConeSpec::soc(5));
        let l = ConeSpec::LinearSubspace {
            ambient_dim: 3,
            basis: vec![vec![1.0, 1.0, 0.0]],
        };
        let ld = l.dual_cone().unwrap();
        let b = projection::subspace_basis(&ld).unwrap();
        assert_eq!(b.len(), 2);
        for v in &b {
            assert!(v.dot(&from_slice(&[1.0, 1.0, 0.0])).abs() < 1e-12);
        }
        let kt = ConeSpec::gallery(GalleryName::CylinderKTilde).dual_cone().unwrap();
        for (s, inside) in [
            (vec![0.0, 0.0, 1.0, 1.0], true),
            (vec![0.6, 0.8, 0.0, 1.0], true),
            (vec![0.6, 0.8, 0.5, 1.0], false),
        ] {
            assert_eq!(kt.contains(&from_slice(&s), &tol()).unwrap(), inside, "{s:?}");
        }
        assert!(matches!(
            ConeSpec::doubly_nonnegative(2).dual_cone(),
            Err(ConeError::DualUnavailable(_))
        ));
    }

    #[test]
    fn rescale_examples() {
        let k = ConeSpec::gallery(GalleryName::NiceNotAmenableK);
        let r = k.rescale_to_slice(&from_slice(&[1.0, 0.0, 0.0, 2.0])).unwrap();
        assert_eq!(r, from_slice(&[0.5, 0.0, 0.0, 1.0]));
        let x = from_slice(&[0.3, 0.1, 0.2, 1.0]);
        assert_eq!(k.rescale_to_slice(&x).unwrap(), x);
        assert!(matches!(
            k.rescale_to_slice(&from_slice(&[1.0, 0.0, 0.0, 0.0])),
            Err(ConeError::NotRescalable { .. })
        ));
    }

    #[test]
    fn json_round_trip_and_errors() {
        let spec = ConeSpec::Intersection {
            parts: vec![
                ConeSpec::psd(2),
                ConeSpec::Halfspace {
                    normal: vec![1.0, 0.0, 0.0],
                    offset: 0.0,
                },
            ],
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(ConeSpec::from_json(&text).unwrap(), spec);
        let g = ConeSpec::from_json(r#"{"type":"gallery","name":"cylinder_K_tilde"}"#).unwrap();
        assert_eq!(g.dim(), 4);
        assert!(ConeSpec::from_json(r#"{"type":"second_order"}"#).is_err());
        assert!(ConeSpec::from_json(r#"{"type":"linear_image","map":[[1,0],[2,0]],"inner":{"type":"nonnegative_orthant","dim":2}}"#).is_err());
    }

    #[test]
    fn duality_pairing_on_samples() {
        let mut r = rng(7);
        for k in [
            ConeSpec::soc(4),
            ConeSpec::psd(3),
            ConeSpec::orthant(3),
            ConeSpec::Polyhedral {
                ambient_dim: 3,
                rows: vec![vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 1.0], vec![0.0, -1.0, 2.0]],
            },
            ConeSpec::gallery(GalleryName::CylinderKTilde),
            ConeSpec::Product {
                left: Box::new(ConeSpec::soc(3)),
                right: Box::new(ConeSpec::orthant(2)),
            },
        ] {
            let d = k.dual_cone().unwrap();
            let xs = k.sample(1000, &mut r).unwrap();
            let ss = d.sample(1000, &mut r).unwrap();
            for (x, s) in xs.iter().zip(&ss) {
                assert!(x.dot(s) >= -1e-10 * (1.0 + x.norm() * s.norm()), "{}", k.variant_name());
            }
        }
    }

    proptest! {
        #[test]
        fn conic_closure(seed in any::<u64>()) {
            let mut r = rng(seed);
            for k in [ConeSpec::soc(3), ConeSpec::psd(2), ConeSpec::orthant(4), ConeSpec::gallery(GalleryName::CylinderKTilde)] {
                let x = k.sample(1, &mut r).unwrap().remove(0);
                for lam in [0.0, 0.5, 2.0, 10.0] {
                    prop_assert!(k.contains(&(&x * lam), &tol()).unwrap());
                }
            }
        }

        #[test]
        fn product_distance_is_pythagorean(a in prop::collection::vec(-3.0..3.0f64, 3), b in prop::collection::vec(-3.0..3.0f64, 4)) {
            let k1 = ConeSpec::soc(3);
            let k2 = ConeSpec::psd(2);
            let k2 = ConeSpec::Product { left: Box::new(ConeSpec::orthant(1)), right: Box::new(k2) };
            let prod = ConeSpec::Product { left: Box::new(k1.clone()), right: Box::new(k2.clone()) };
            let x = from_slice(&a);
            let y = from_slice(&b);
            let d1 = projection::distance(&k1, &x).unwrap();
            let d2 = projection::distance(&k2, &y).unwrap();
            let d = projection::distance(&prod, &concat(&x, &y)).unwrap();
            prop_assert!((d * d - d1 * d1 - d2 * d2).abs() <= 1e-8 * (1.0 + d * d));
        }
    }
}
