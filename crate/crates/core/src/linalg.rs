//! Dense linear-algebra substrate: tolerances, orthonormal bases, affine
//! subspaces, bounded regions, symmetric-matrix vectorization and sampling
//! helpers shared by every other module.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, ConeError, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;
pub type SeededRng = ChaCha8Rng;

/// Relative singular-value cutoff used for every rank decision.
pub const RANK_CUTOFF: f64 = 1e-10;

/// The single tolerance record threaded through all comparisons.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-10,
            rel: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    /// Absolute threshold for a quantity whose natural magnitude is `scale`.
    pub fn eps(&self, scale: f64) -> f64 {
        self.abs + self.rel * scale.abs()
    }

    pub fn is_zero(&self, value: f64, scale: f64) -> bool {
        value.abs() <= self.eps(scale)
    }

    pub fn close(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.eps(a.abs().max(b.abs()))
    }
}

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(dim: usize, rng: &mut impl Rng) -> Vector {
    Vector::from_fn(dim, |_, _| rng.sample(StandardNormal))
}

pub fn unit_gaussian(dim: usize, rng: &mut impl Rng) -> Vector {
    loop {
        let g = gaussian(dim, rng);
        let n = g.norm();
        if n > 1e-12 {
            return g / n;
        }
    }
}

pub fn from_slice(v: &[f64]) -> Vector {
    Vector::from_column_slice(v)
}

pub fn to_vec(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

/// Orthonormal basis of the span of `vectors`, kept in input order.
///
/// Rank is decided by the singular values of the stacked matrix: a vector is
/// dropped when its component orthogonal to the previously accepted ones is
/// below `RANK_CUTOFF` times the largest singular value.
pub fn orthonormalize(vectors: &[Vector]) -> Result<Vec<Vector>> {
    let Some(first) = vectors.first() else {
        return Ok(Vec::new());
    };
    let dim = first.len();
    for v in vectors {
        check_dim(dim, v.len())?;
    }
    let stacked = Matrix::from_columns(vectors);
    let sigma_max = stacked
        .clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |a, &b| a.max(b));
    if sigma_max == 0.0 {
        return Ok(Vec::new());
    }
    let cutoff = RANK_CUTOFF * sigma_max;
    let rank = stacked
        .singular_values()
        .iter()
        .filter(|&&s| s > cutoff)
        .count();

    let mut basis: Vec<Vector> = Vec::with_capacity(rank);
    for v in vectors {
        if basis.len() == rank {
            break;
        }
        let mut r = v.clone();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&r);
                r.axpy(-c, b, 1.0);
            }
        }
        let n = r.norm();
        if n > cutoff {
            basis.push(r / n);
        }
    }
    Ok(basis)
}

/// Orthonormal basis of the orthogonal complement of span(`basis`) in R^dim.
pub fn orthogonal_complement(basis: &[Vector], dim: usize) -> Vec<Vector> {
    let mut out: Vec<Vector> = basis.to_vec();
    let start = out.len();
    for i in 0..dim {
        if out.len() == dim {
            break;
        }
        let mut r = Vector::zeros(dim);
        r[i] = 1.0;
        for _ in 0..2 {
            for b in &out {
                let c = b.dot(&r);
                r.axpy(-c, b, 1.0);
            }
        }
        let n = r.norm();
        if n > 1e-8 {
            out.push(r / n);
        }
    }
    out.split_off(start)
}

/// `basepoint + span(basis)` with an orthonormal direction basis.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineSubspace {
    basepoint: Vector,
    basis: Vec<Vector>,
}

impl AffineSubspace {
    pub fn new(basepoint: Vector, directions: &[Vector]) -> Result<Self> {
        for d in directions {
            check_dim(basepoint.len(), d.len())?;
        }
        let basis = orthonormalize(directions)?;
        Ok(Self { basepoint, basis })
    }

    /// Linear subspace through the origin.
    pub fn linear(dim: usize, directions: &[Vector]) -> Result<Self> {
        Self::new(Vector::zeros(dim), directions)
    }

    pub fn whole_space(dim: usize) -> Self {
        let basis = (0..dim)
            .map(|i| {
                let mut e = Vector::zeros(dim);
                e[i] = 1.0;
                e
            })
            .collect();
        Self {
            basepoint: Vector::zeros(dim),
            basis,
        }
    }

    /// `{x : <normal, x> = level}`.
    pub fn hyperplane(normal: &Vector, level: f64) -> Result<Self> {
        let n2 = normal.norm_squared();
        if n2 == 0.0 {
            return Err(ConeError::InvalidSpec("zero hyperplane normal".into()));
        }
        let basepoint = normal * (level / n2);
        let unit = normal / n2.sqrt();
        let basis = orthogonal_complement(&[unit], normal.len());
        Ok(Self { basepoint, basis })
    }

    pub fn basepoint(&self) -> &Vector {
        &self.basepoint
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basepoint.len()
    }

    pub fn is_linear(&self) -> bool {
        self.project(&Vector::zeros(self.ambient_dim())).norm() <= 1e-12
    }

    pub fn coords(&self, x: &Vector) -> Vector {
        let d = x - &self.basepoint;
        Vector::from_iterator(self.basis.len(), self.basis.iter().map(|b| b.dot(&d)))
    }

    pub fn point(&self, coords: &Vector) -> Vector {
        let mut p = self.basepoint.clone();
        for (c, b) in coords.iter().zip(&self.basis) {
            p.axpy(*c, b, 1.0);
        }
        p
    }

    pub fn project(&self, x: &Vector) -> Vector {
        self.point(&self.coords(x))
    }

    pub fn try_project(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.ambient_dim(), x.len())?;
        Ok(self.project(x))
    }

    /// Orthonormal basis of the orthogonal complement of the direction space.
    pub fn normal_basis(&self) -> Vec<Vector> {
        orthogonal_complement(&self.basis, self.ambient_dim())
    }

    pub fn contains(&self, x: &Vector, tol: &Tolerance) -> bool {
        distance_to_affine(x, self).is_ok_and(|d| tol.is_zero(d, x.norm()))
    }
}

/// Euclidean distance from `x` to the affine subspace.
pub fn distance_to_affine(x: &Vector, a: &AffineSubspace) -> Result<f64> {
    Ok((x - a.try_project(x)?).norm())
}

/// The bounded set `B` over which error bounds are probed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundedRegion {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl BoundedRegion {
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(ConeError::InvalidSpec(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self::Ball {
            center: to_vec(&center),
            radius,
        })
    }

    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.iter().zip(upper.iter()).any(|(l, u)| !(l <= u)) {
            return Err(ConeError::InvalidSpec("empty box interval".into()));
        }
        Ok(Self::Box {
            lower: to_vec(&lower),
            upper: to_vec(&upper),
        })
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Self::Ball { center, .. } => center.len(),
            Self::Box { lower, .. } => lower.len(),
        }
    }

    pub fn contains(&self, x: &Vector) -> bool {
        match self {
            Self::Ball { center, radius } => (x - from_slice(center)).norm() <= radius * (1.0 + 1e-12),
            Self::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| *l <= *v && *v <= *u),
        }
    }

    /// Center and radius of a ball containing the region.
    pub fn bounding_ball(&self) -> (Vector, f64) {
        match self {
            Self::Ball { center, radius } => (from_slice(center), *radius),
            Self::Box { lower, upper } => {
                let l = from_slice(lower);
                let u = from_slice(upper);
                ((&l + &u) * 0.5, (&u - &l).norm() * 0.5)
            }
        }
    }

    /// Multiplies the region about the origin by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            Self::Ball { center, radius } => Self::Ball {
                center: center.iter().map(|c| c * factor).collect(),
                radius: radius * factor,
            },
            Self::Box { lower, upper } => Self::Box {
                lower: lower.iter().map(|c| c * factor).collect(),
                upper: upper.iter().map(|c| c * factor).collect(),
            },
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vector {
        match self {
            Self::Ball { center, radius } => {
                let c = from_slice(center);
                let k = c.len();
                &c + uniform_in_ball(k, *radius, rng)
            }
            Self::Box { lower, upper } => Vector::from_iterator(
                lower.len(),
                lower
                    .iter()
                    .zip(upper)
                    .map(|(l, u)| if l < u { rng.random_range(*l..=*u) } else { *l }),
            ),
        }
    }

    /// Uniform sample of `self ∩ aff`; `EmptyRegion` when they do not meet.
    pub fn sample_in_affine(&self, aff: &AffineSubspace, rng: &mut impl Rng) -> Result<Vector> {
        check_dim(self.ambient_dim(), aff.ambient_dim())?;
        let (center, radius) = self.bounding_ball();
        let foot = aff.project(&center);
        let offset = (&foot - &center).norm();
        if offset > radius * (1.0 + 1e-12) {
            return Err(ConeError::EmptyRegion);
        }
        let inner = (radius * radius - offset * offset).max(0.0).sqrt();
        let base = aff.coords(&foot);
        for _ in 0..10_000 {
            let z = &base + uniform_in_ball(aff.dim(), inner, rng);
            let x = aff.point(&z);
            if self.contains(&x) {
                return Ok(x);
            }
        }
        Err(ConeError::EmptyRegion)
    }
}

fn uniform_in_ball(dim: usize, radius: f64, rng: &mut impl Rng) -> Vector {
    if dim == 0 {
        return Vector::zeros(0);
    }
    let dir = unit_gaussian(dim, rng);
    let u: f64 = rng.random();
    dir * (radius * u.powf(1.0 / dim as f64))
}

// ---------------------------------------------------------------------------
// Symmetric matrices: upper triangle, row-major, off-diagonals scaled by √2 so
// that the Euclidean inner product is the Frobenius inner product.

pub fn svec_dim(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Inverse of `svec_dim`.
pub fn smat_order(dim: usize) -> Option<usize> {
    let n = ((((8 * dim + 1) as f64).sqrt() - 1.0) / 2.0).round() as usize;
    (svec_dim(n) == dim).then_some(n)
}

pub fn svec(m: &Matrix) -> Vector {
    let n = m.nrows();
    let mut v = Vector::zeros(svec_dim(n));
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            v[k] = if i == j {
                m[(i, i)]
            } else {
                std::f64::consts::SQRT_2 * 0.5 * (m[(i, j)] + m[(j, i)])
            };
            k += 1;
        }
    }
    v
}

pub fn smat(v: &Vector, n: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            if i == j {
                m[(i, i)] = v[k];
            } else {
                let x = v[k] / std::f64::consts::SQRT_2;
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
            k += 1;
        }
    }
    m
}

/// Symmetric eigendecomposition with eigenvalues ascending.
pub fn sym_eigen(m: &Matrix) -> (Vector, Matrix) {
    let eig = m
        .clone()
        .try_symmetric_eigen(1e-15, 0)
        .unwrap_or_else(|| m.clone().symmetric_eigen());
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = Vector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = Matrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}

// ---------------------------------------------------------------------------
// Deterministic direction grids.

/// `n` points of the Fibonacci lattice on the unit 2-sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<Vector> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            Vector::from_vec(vec![r * phi.cos(), r * phi.sin(), z])
        })
        .collect()
}

pub fn circle_grid(n: usize) -> Vec<Vector> {
    (0..n)
        .map(|i| {
            let th = std::f64::consts::TAU * i as f64 / n as f64;
            Vector::from_vec(vec![th.cos(), th.sin()])
        })
        .collect()
}

/// Unit directions in R^dim: exact grids for dim ≤ 3, seeded Gaussian
/// directions above. Returns the grid and its nominal angular resolution.
pub fn unit_directions(dim: usize, n: usize, seed: u64) -> (Vec<Vector>, f64) {
    match dim {
        0 => (Vec::new(), 0.0),
        1 => (vec![from_slice(&[1.0]), from_slice(&[-1.0])], 0.0),
        2 => (circle_grid(n), std::f64::consts::TAU / n as f64),
        3 => (fibonacci_sphere(n), (4.0 * std::f64::consts::PI / n as f64).sqrt()),
        _ => {
            let mut r = rng(seed);
            let dirs = (0..n).map(|_| unit_gaussian(dim, &mut r)).collect();
            // covering radius of n random caps on S^{dim-1}, up to log factors
            (dirs, (1.0 / n as f64).powf(1.0 / (dim - 1) as f64))
        }
    }
}

// ---------------------------------------------------------------------------

/// Minimum-norm least-squares solution of `a x ≈ b`.
pub fn lstsq(a: &Matrix, b: &Vector) -> Vector {
    if a.ncols() == 0 {
        return Vector::zeros(0);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0_f64, |m, &s| m.max(s));
    svd.solve(b, RANK_CUTOFF * smax.max(f64::MIN_POSITIVE))
        .unwrap_or_else(|_| Vector::zeros(a.ncols()))
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
