//! The excision construction in k dimensions, for bodies whose volume and
//! centroid are known in closed form: the hyperball, the axis-aligned
//! hypercube and the simplex.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::balance_poly::{physicality_threshold, positive_root, BalancePolynomial, BalanceProblem};
use crate::geom2d::{GEOM_EPS, ROOT_TOL};
use crate::{Error, Result, MAX_DIMENSION};

/// A non-degenerate simplex with `k + 1` vertices in `k` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    vertices: Vec<Vec<f64>>,
    /// Inverse of the edge matrix `[v₁ − v₀ | … | v_k − v₀]`.
    inverse: DMatrix<f64>,
    determinant: f64,
}

impl Simplex {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let k = vertices.len().saturating_sub(1);
        check_dim(k)?;
        if vertices.iter().any(|v| v.len() != k) {
            return Err(Error::InvalidShape(format!(
                "a {k}-simplex needs {} vertices of length {k}",
                k + 1
            )));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidShape("simplex has non-finite coordinates".into()));
        }
        let edges = DMatrix::from_fn(k, k, |r, c| vertices[c + 1][r] - vertices[0][r]);
        let determinant = edges.determinant();
        let scale: f64 = edges.column_iter().map(|c| c.norm()).product();
        if !(determinant.abs() > 1e-12 * scale) {
            return Err(Error::InvalidShape("simplex vertices are affinely dependent".into()));
        }
        let inverse = edges
            .try_inverse()
            .ok_or_else(|| Error::InvalidShape("simplex edge matrix is singular".into()))?;
        Ok(Self { vertices, inverse, determinant })
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Barycentric coordinates `(λ₀, …, λ_k)`, summing to 1.
    pub fn barycentric(&self, p: &[f64]) -> Vec<f64> {
        let rel = DVector::from_iterator(self.dim(), p.iter().zip(&self.vertices[0]).map(|(a, b)| a - b));
        let tail = &self.inverse * rel;
        let mut lambda = Vec::with_capacity(self.dim() + 1);
        lambda.push(1.0 - tail.sum());
        lambda.extend(tail.iter());
        lambda
    }

    /// Rate of change of the barycentric coordinates along `dir`.
    fn barycentric_velocity(&self, dir: &[f64]) -> Vec<f64> {
        let tail = &self.inverse * DVector::from_column_slice(dir);
        let mut v = Vec::with_capacity(self.dim() + 1);
        v.push(-tail.sum());
        v.extend(tail.iter());
        v
    }
}

/// Convex k-dimensional body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ShapeKdSpec", into = "ShapeKdSpec")]
pub enum ShapeKd {
    Hyperball { center: Vec<f64>, radius: f64 },
    Hypercube { min_corner: Vec<f64>, side: f64 },
    Simplex(Simplex),
}

/// Wire form of [`ShapeKd`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ShapeKdSpec {
    Hyperball { center: Vec<f64>, radius: f64 },
    Hypercube { min_corner: Vec<f64>, side: f64 },
    Simplex { vertices: Vec<Vec<f64>> },
}

impl TryFrom<ShapeKdSpec> for ShapeKd {
    type Error = Error;

    fn try_from(spec: ShapeKdSpec) -> Result<Self> {
        match spec {
            ShapeKdSpec::Hyperball { center, radius } => ShapeKd::hyperball(center, radius),
            ShapeKdSpec::Hypercube { min_corner, side } => ShapeKd::hypercube(min_corner, side),
            ShapeKdSpec::Simplex { vertices } => ShapeKd::simplex(vertices),
        }
    }
}

impl From<ShapeKd> for ShapeKdSpec {
    fn from(shape: ShapeKd) -> Self {
        match shape {
            ShapeKd::Hyperball { center, radius } => ShapeKdSpec::Hyperball { center, radius },
            ShapeKd::Hypercube { min_corner, side } => ShapeKdSpec::Hypercube { min_corner, side },
            ShapeKd::Simplex(s) => ShapeKdSpec::Simplex { vertices: s.vertices },
        }
    }
}

fn check_dim(k: usize) -> Result<()> {
    if (1..=MAX_DIMENSION).contains(&k) {
        Ok(())
    } else {
        Err(Error::InvalidDimension { k, max: MAX_DIMENSION })
    }
}

fn check_coords(p: &[f64]) -> Result<()> {
    check_dim(p.len())?;
    if p.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidShape("non-finite coordinates".into()))
    }
}

/// Volume of the unit ball, `π^{k/2} / Γ(k/2 + 1)`, by the two-step
/// recurrence `V_k = V_{k−2} · 2π / k`.
pub fn unit_ball_volume(k: usize) -> f64 {
    let (mut v, start) = if k % 2 == 0 { (1.0, 2) } else { (2.0, 3) };
    let mut j = start;
    while j <= k {
        v *= 2.0 * PI / j as f64;
        j += 2;
    }
    v
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(origin: &[f64], t: f64, dir: &[f64]) -> Vec<f64> {
    origin.iter().zip(dir).map(|(o, d)| o + t * d).collect()
}

fn scale_point(p: &[f64], center: &[f64], scale: f64) -> Vec<f64> {
    p.iter().zip(center).map(|(x, c)| c + (x - c) * scale).collect()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    norm(&sub(a, b))
}

impl ShapeKd {
    pub fn hyperball(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_coords(&center)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidShape(format!("radius must be positive, got {radius}")));
        }
        Ok(ShapeKd::Hyperball { center, radius })
    }

    pub fn hypercube(min_corner: Vec<f64>, side: f64) -> Result<Self> {
        check_coords(&min_corner)?;
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::InvalidShape(format!("side must be positive, got {side}")));
        }
        Ok(ShapeKd::Hypercube { min_corner, side })
    }

    pub fn simplex(vertices: Vec<Vec<f64>>) -> Result<Self> {
        Simplex::new(vertices).map(ShapeKd::Simplex)
    }

    /// The origin plus the `k` unit basis vectors.
    pub fn standard_simplex(k: usize) -> Result<Self> {
        let mut vertices = vec![vec![0.0; k]];
        for i in 0..k {
            let mut v = vec![0.0; k];
            v[i] = 1.0;
            vertices.push(v);
        }
        Self::simplex(vertices)
    }

    pub fn dim(&self) -> usize {
        match self {
            ShapeKd::Hyperball { center, .. } => center.len(),
            ShapeKd::Hypercube { min_corner, .. } => min_corner.len(),
            ShapeKd::Simplex(s) => s.dim(),
        }
    }

    pub fn volume(&self) -> f64 {
        let k = self.dim();
        match self {
            ShapeKd::Hyperball { radius, .. } => unit_ball_volume(k) * radius.powi(k as i32),
            ShapeKd::Hypercube { side, .. } => side.powi(k as i32),
            ShapeKd::Simplex(s) => s.determinant.abs() / factorial(k),
        }
    }

    pub fn centroid(&self) -> Vec<f64> {
        match self {
            ShapeKd::Hyperball { center, .. } => center.clone(),
            ShapeKd::Hypercube { min_corner, side } => {
                min_corner.iter().map(|m| m + 0.5 * side).collect()
            }
            ShapeKd::Simplex(s) => {
                let n = s.vertices.len() as f64;
                (0..s.dim())
                    .map(|i| s.vertices.iter().map(|v| v[i]).sum::<f64>() / n)
                    .collect()
            }
        }
    }

    /// Signed boundary offset: negative inside, zero on the boundary.
    /// Simplices report `−min λᵢ` in barycentric units.
    pub fn boundary_offset(&self, p: &[f64]) -> f64 {
        match self {
            ShapeKd::Hyperball { center, radius } => distance(p, center) - radius,
            ShapeKd::Hypercube { min_corner, side } => p
                .iter()
                .zip(min_corner)
                .map(|(x, m)| (m - x).max(x - (m + side)))
                .fold(f64::NEG_INFINITY, f64::max),
            ShapeKd::Simplex(s) => -s
                .barycentric(p)
                .into_iter()
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Membership with [`GEOM_EPS`] slack.
    pub fn contains(&self, p: &[f64]) -> bool {
        self.boundary_offset(p) <= GEOM_EPS
    }

    /// Exact membership, as used by rejection sampling.
    pub fn contains_strict(&self, p: &[f64]) -> bool {
        match self {
            ShapeKd::Hyperball { center, radius } => {
                let d = sub(p, center);
                dot(&d, &d) <= radius * radius
            }
            _ => self.boundary_offset(p) <= 0.0,
        }
    }

    pub fn on_boundary(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && self.boundary_offset(p).abs() <= GEOM_EPS
    }

    /// Distance from an interior point to the boundary along the unit
    /// vector `dir`.
    pub fn ray_exit(&self, origin: &[f64], dir: &[f64]) -> Result<f64> {
        let t = match self {
            ShapeKd::Hyperball { center, radius } => {
                let o = sub(origin, center);
                let b = dot(&o, dir);
                let c = dot(&o, &o) - radius * radius;
                let disc = b * b - c;
                (disc >= 0.0).then(|| {
                    let sq = disc.sqrt();
                    if b > 0.0 { -c / (b + sq) } else { sq - b }
                })
            }
            ShapeKd::Hypercube { min_corner, side } => origin
                .iter()
                .zip(min_corner)
                .zip(dir)
                .filter(|(_, d)| **d != 0.0)
                .map(|((o, m), d)| if *d > 0.0 { (m + side - o) / d } else { (m - o) / d })
                .fold(None, |best: Option<f64>, t| Some(best.map_or(t, |b| b.min(t)))),
            ShapeKd::Simplex(s) => {
                let lambda = s.barycentric(origin);
                let rate = s.barycentric_velocity(dir);
                lambda
                    .iter()
                    .zip(&rate)
                    .filter(|(_, r)| **r < 0.0)
                    .map(|(l, r)| -l / r)
                    .fold(None, |best: Option<f64>, t| Some(best.map_or(t, |b| b.min(t))))
            }
        };
        match t {
            Some(t) if t > 0.0 && t.is_finite() => Ok(t),
            _ => Err(Error::DegenerateIntersection("ray does not leave the body".into())),
        }
    }

    /// The similar body scaled by `scale` about `center`.
    pub fn scaled_about(&self, center: &[f64], scale: f64) -> Self {
        match self {
            ShapeKd::Hyperball { center: c, radius } => ShapeKd::Hyperball {
                center: scale_point(c, center, scale),
                radius: radius * scale,
            },
            ShapeKd::Hypercube { min_corner, side } => ShapeKd::Hypercube {
                min_corner: scale_point(min_corner, center, scale),
                side: side * scale,
            },
            ShapeKd::Simplex(s) => {
                let k = s.dim() as i32;
                ShapeKd::Simplex(Simplex {
                    vertices: s.vertices.iter().map(|v| scale_point(v, center, scale)).collect(),
                    inverse: &s.inverse / scale,
                    determinant: s.determinant * scale.powi(k),
                })
            }
        }
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            ShapeKd::Hyperball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            ShapeKd::Hypercube { min_corner, side } => {
                (min_corner.clone(), min_corner.iter().map(|m| m + side).collect())
            }
            ShapeKd::Simplex(s) => {
                let k = s.dim();
                let lo = (0..k)
                    .map(|i| s.vertices.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min))
                    .collect();
                let hi = (0..k)
                    .map(|i| s.vertices.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max))
                    .collect();
                (lo, hi)
            }
        }
    }
}

/// A k-dimensional cavity similar to the body, scaled by `1/x` about `O`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcisionPlanKd {
    pub shape: ShapeKd,
    pub o: Vec<f64>,
    pub q: Vec<f64>,
    pub centroid: Vec<f64>,
    pub beta: f64,
    pub x: f64,
    pub cavity: ShapeKd,
    pub p: Vec<f64>,
}

impl ExcisionPlanKd {
    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn chord_length(&self) -> f64 {
        distance(&self.o, &self.q)
    }

    /// Same chord, cavity rebuilt for another ratio `x > 1`.
    pub fn with_ratio(&self, x: f64) -> Result<Self> {
        if !(x > 1.0 && x.is_finite()) {
            return Err(Error::DegenerateCavity);
        }
        let scale = 1.0 / x;
        Ok(Self {
            x,
            cavity: self.shape.scaled_about(&self.o, scale),
            p: scale_point(&self.q, &self.o, scale),
            ..self.clone()
        })
    }
}

/// Plans the excision tangent at `o`, along the ray from `o` in `direction`,
/// which must pass through the centroid.
pub fn plan_excision_kd(shape: &ShapeKd, o: &[f64], direction: &[f64]) -> Result<ExcisionPlanKd> {
    let k = shape.dim();
    if o.len() != k || direction.len() != k {
        return Err(Error::InvalidChord(format!(
            "point and direction must have {k} coordinates"
        )));
    }
    if !shape.on_boundary(o) {
        return Err(Error::NotOnBoundary(format!("{o:?}")));
    }
    let len = norm(direction);
    if !(len > 0.0 && len.is_finite()) {
        return Err(Error::InvalidChord("zero direction".into()));
    }
    let u: Vec<f64> = direction.iter().map(|d| d / len).collect();
    let c = shape.centroid();
    let to_centroid = sub(&c, o);
    let along = dot(&to_centroid, &u);
    let off_axis = norm(&axpy(&to_centroid, -along, &u));
    if !(along > 0.0) || off_axis > 1e-9 * norm(&to_centroid).max(1.0) {
        return Err(Error::InvalidChord("ray from O does not pass through the centroid".into()));
    }
    let ahead = shape.ray_exit(&c, &u)?;
    let q = axpy(&c, ahead, &u);
    let beta = along / (along + ahead);
    let threshold = physicality_threshold(k);
    if !(beta < threshold - GEOM_EPS) {
        return Err(Error::NotPhysical { k, beta, threshold });
    }
    let root = positive_root(&BalanceProblem::new(k, beta)?, ROOT_TOL)?;
    let plan = ExcisionPlanKd {
        shape: shape.clone(),
        o: o.to_vec(),
        q,
        centroid: c,
        beta,
        x: f64::NAN,
        cavity: shape.clone(),
        p: Vec::new(),
    };
    plan.with_ratio(root.value)
}

/// `β` of the ray from the boundary point `o` through the centroid.
pub fn centroid_ray_beta(shape: &ShapeKd, o: &[f64]) -> Result<f64> {
    let c = shape.centroid();
    let w = sub(&c, o);
    let behind = norm(&w);
    if !(behind > 0.0) {
        return Err(Error::InvalidChord("point coincides with the centroid".into()));
    }
    let u: Vec<f64> = w.iter().map(|x| x / behind).collect();
    let ahead = shape.ray_exit(&c, &u)?;
    Ok(behind / (behind + ahead))
}

/// A boundary point whose centroid ray has `β = 1/2` within `tol`.
///
/// Balls use the point below the center on the first axis and cubes the
/// minimal corner. Simplices bisect along the boundary path from `v₀` to
/// the centroid of the facet opposite `v₁`, where `β` falls from
/// `k/(k+1)` to `1/(k+1)`.
pub fn balanced_boundary_point(shape: &ShapeKd, tol: f64) -> Result<Vec<f64>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    match shape {
        ShapeKd::Hyperball { center, radius } => {
            let mut o = center.clone();
            o[0] -= radius;
            Ok(o)
        }
        ShapeKd::Hypercube { min_corner, .. } => Ok(min_corner.clone()),
        ShapeKd::Simplex(s) => {
            let k = s.dim();
            let v0 = &s.vertices[0];
            if k == 1 {
                return Ok(v0.clone());
            }
            let g: Vec<f64> = (0..k)
                .map(|j| {
                    s.vertices.iter().enumerate().filter(|(i, _)| *i != 1).map(|(_, v)| v[j]).sum::<f64>()
                        / k as f64
                })
                .collect();
            let along = sub(&g, v0);
            let at = |t: f64| axpy(v0, t, &along);
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let beta = centroid_ray_beta(shape, &at(mid))?;
                if (beta - 0.5).abs() <= 0.25 * tol {
                    return Ok(at(mid));
                }
                if beta > 0.5 { lo = mid } else { hi = mid }
            }
            let o = at(0.5 * (lo + hi));
            let beta = centroid_ray_beta(shape, &o)?;
            if (beta - 0.5).abs() <= tol {
                Ok(o)
            } else {
                Err(Error::SolverFailure(format!("β = 1/2 not reached, last β = {beta}")))
            }
        }
    }
}

/// [`plan_excision_kd`] with the direction from `o` toward the centroid.
pub fn plan_toward_centroid(shape: &ShapeKd, o: &[f64]) -> Result<ExcisionPlanKd> {
    if o.len() != shape.dim() {
        return Err(Error::InvalidChord(format!("point must have {} coordinates", shape.dim())));
    }
    let dir = sub(&shape.centroid(), o);
    plan_excision_kd(shape, o, &dir)
}

/// `(V·C − V′·C′) / (V − V′)`.
pub fn composite_centroid_kd(plan: &ExcisionPlanKd) -> Result<Vec<f64>> {
    let (v, v_cav) = (plan.shape.volume(), plan.cavity.volume());
    if !(v - v_cav > 0.0) {
        return Err(Error::DegenerateCavity);
    }
    let c = sub(&plan.shape.centroid(), &plan.o);
    let c_cav = sub(&plan.cavity.centroid(), &plan.o);
    Ok(plan
        .o
        .iter()
        .zip(c.iter().zip(&c_cav))
        .map(|(o, (a, b))| o + (v * a - v_cav * b) / (v - v_cav))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceReportKd {
    pub composite: Vec<f64>,
    pub p: Vec<f64>,
    pub distance: f64,
    /// `distance / |OQ|`; compared against the tolerance.
    pub relative_distance: f64,
    pub passed: bool,
    pub residual: f64,
}

pub fn verify_balance_kd(plan: &ExcisionPlanKd, tol: f64) -> BalanceReportKd {
    let composite =
        composite_centroid_kd(plan).unwrap_or_else(|_| vec![f64::NAN; plan.dim()]);
    let d = distance(&composite, &plan.p);
    let relative_distance = d / plan.chord_length();
    let residual = BalancePolynomial::new(plan.dim(), plan.beta)
        .map(|p| p.scaled_residual(plan.x))
        .unwrap_or(f64::NAN);
    BalanceReportKd {
        composite,
        p: plan.p.clone(),
        distance: d,
        relative_distance,
        passed: relative_distance <= tol,
        residual,
    }
}
