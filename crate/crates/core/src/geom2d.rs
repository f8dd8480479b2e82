//! Convex planar shapes and the self-similar excision that balances them.
//!
//! All geometric predicates use an absolute slack of `1e-12`, so shapes are
//! expected at roughly unit scale; callers with large coordinates should
//! normalize first.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::balance_poly::{physicality_threshold, positive_root, BalancePolynomial, BalanceProblem};
use crate::{Error, Result};

/// Slack for boundary and containment predicates.
pub const GEOM_EPS: f64 = 1e-12;

/// Residual tolerance used when solving for the excision ratio.
pub const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c, s)
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    /// Rotation by `theta` counterclockwise.
    pub fn rotate(self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Image under the homothety with center `center` and ratio `scale`.
    pub fn scale_about(self, center: Self, scale: f64) -> Self {
        center + (self - center) * scale
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// A strictly convex polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl ConvexPolygon {
    /// Accepts either orientation; stores the vertices counterclockwise.
    pub fn new(mut vertices: Vec<Point2>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidShape(format!("polygon needs at least 3 vertices, got {n}")));
        }
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(Error::InvalidShape("polygon has non-finite coordinates".into()));
        }
        for i in 0..n {
            if vertices[i] == vertices[(i + 1) % n] {
                return Err(Error::InvalidShape(format!("repeated vertex at index {i}")));
            }
        }
        let turns: Vec<f64> = (0..n)
            .map(|i| {
                let a = vertices[i];
                let b = vertices[(i + 1) % n];
                let c = vertices[(i + 2) % n];
                (b - a).cross(c - b)
            })
            .collect();
        let ccw = turns.iter().all(|&t| t > 0.0);
        let cw = turns.iter().all(|&t| t < 0.0);
        if !(ccw || cw) {
            return Err(Error::InvalidShape("polygon is not strictly convex".into()));
        }
        // A star polygon turns consistently but winds more than once.
        let winding: f64 = (0..n)
            .map(|i| {
                let a = vertices[i];
                let b = vertices[(i + 1) % n];
                let c = vertices[(i + 2) % n];
                (b - a).cross(c - b).atan2((b - a).dot(c - b))
            })
            .sum();
        if (winding.abs() - TAU).abs() > 1e-6 {
            return Err(Error::InvalidShape("polygon winds more than once".into()));
        }
        if cw {
            vertices.reverse();
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    fn area(&self) -> f64 {
        let v0 = self.vertices[0];
        self.vertices
            .windows(2)
            .map(|w| (w[0] - v0).cross(w[1] - v0))
            .sum::<f64>()
            / 2.0
    }

    fn centroid(&self) -> Point2 {
        let v0 = self.vertices[0];
        let mut twice_area = 0.0;
        let mut moment = Point2::default();
        for w in self.vertices.windows(2) {
            let (a, b) = (w[0] - v0, w[1] - v0);
            let cross = a.cross(b);
            twice_area += cross;
            moment = moment + (a + b) * cross;
        }
        v0 + moment * (1.0 / (3.0 * twice_area))
    }

    /// Largest signed distance to an edge line; negative inside.
    fn boundary_offset(&self, p: Point2) -> f64 {
        self.edges()
            .map(|(a, b)| {
                let e = b - a;
                e.cross(p - a) / -e.norm()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Exit distance along `dir` from an interior `origin`: the nearest
    /// supporting half-plane the ray crosses. A ray through a vertex gets
    /// the same value from both incident edges.
    fn ray_exit(&self, origin: Point2, dir: Point2) -> Option<f64> {
        self.edges()
            .filter_map(|(a, b)| {
                let e = b - a;
                let outward = Point2::new(e.y, -e.x);
                let speed = outward.dot(dir);
                (speed > 0.0).then(|| outward.dot(a - origin) / speed)
            })
            .fold(None, |best: Option<f64>, t| Some(best.map_or(t, |b| b.min(t))))
    }

    fn scaled_about(&self, center: Point2, scale: f64) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| v.scale_about(center, scale)).collect(),
        }
    }
}

/// Convex planar body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ShapeSpec", into = "ShapeSpec")]
pub enum Shape2D {
    Polygon(ConvexPolygon),
    Circle {
        center: Point2,
        radius: f64,
    },
    Ellipse {
        center: Point2,
        semi_axes: (f64, f64),
        rotation: f64,
    },
    RegularPolygon {
        n: usize,
        circumradius: f64,
        orientation: f64,
        center: Point2,
        polygon: ConvexPolygon,
    },
}

/// Wire form of [`Shape2D`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ShapeSpec {
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    Circle {
        center: [f64; 2],
        radius: f64,
    },
    Ellipse {
        center: [f64; 2],
        semi_axes: [f64; 2],
        #[serde(default)]
        rotation: f64,
    },
    RegularPolygon {
        n: usize,
        circumradius: f64,
        #[serde(default)]
        orientation: f64,
        #[serde(default)]
        center: [f64; 2],
    },
}

impl TryFrom<ShapeSpec> for Shape2D {
    type Error = Error;

    fn try_from(spec: ShapeSpec) -> Result<Self> {
        match spec {
            ShapeSpec::Polygon { vertices } => {
                Shape2D::polygon(vertices.into_iter().map(Point2::from).collect())
            }
            ShapeSpec::Circle { center, radius } => Shape2D::circle(center.into(), radius),
            ShapeSpec::Ellipse { center, semi_axes, rotation } => {
                Shape2D::ellipse(center.into(), semi_axes[0], semi_axes[1], rotation)
            }
            ShapeSpec::RegularPolygon { n, circumradius, orientation, center } => {
                Shape2D::regular_polygon_at(center.into(), n, circumradius, orientation)
            }
        }
    }
}

impl From<Shape2D> for ShapeSpec {
    fn from(shape: Shape2D) -> Self {
        match shape {
            Shape2D::Polygon(p) => ShapeSpec::Polygon {
                vertices: p.vertices.into_iter().map(Into::into).collect(),
            },
            Shape2D::Circle { center, radius } => ShapeSpec::Circle { center: center.into(), radius },
            Shape2D::Ellipse { center, semi_axes, rotation } => ShapeSpec::Ellipse {
                center: center.into(),
                semi_axes: [semi_axes.0, semi_axes.1],
                rotation,
            },
            Shape2D::RegularPolygon { n, circumradius, orientation, center, .. } => {
                ShapeSpec::RegularPolygon {
                    n,
                    circumradius,
                    orientation,
                    center: center.into(),
                }
            }
        }
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidShape(format!("{name} must be positive, got {value}")))
    }
}

fn check_point(p: Point2) -> Result<()> {
    if p.x.is_finite() && p.y.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidShape("non-finite coordinates".into()))
    }
}

impl Shape2D {
    pub fn polygon(vertices: Vec<Point2>) -> Result<Self> {
        ConvexPolygon::new(vertices).map(Shape2D::Polygon)
    }

    pub fn circle(center: Point2, radius: f64) -> Result<Self> {
        check_point(center)?;
        check_positive("radius", radius)?;
        Ok(Shape2D::Circle { center, radius })
    }

    pub fn ellipse(center: Point2, a: f64, b: f64, rotation: f64) -> Result<Self> {
        check_point(center)?;
        check_positive("semi-axis a", a)?;
        check_positive("semi-axis b", b)?;
        if !rotation.is_finite() {
            return Err(Error::InvalidShape("rotation must be finite".into()));
        }
        Ok(Shape2D::Ellipse { center, semi_axes: (a, b), rotation })
    }

    /// Regular `n`-gon centred at the origin with its first vertex at angle
    /// `orientation`.
    pub fn regular_polygon(n: usize, circumradius: f64, orientation: f64) -> Result<Self> {
        Self::regular_polygon_at(Point2::default(), n, circumradius, orientation)
    }

    pub fn regular_polygon_at(
        center: Point2,
        n: usize,
        circumradius: f64,
        orientation: f64,
    ) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidShape(format!("regular polygon needs n >= 3, got {n}")));
        }
        check_point(center)?;
        check_positive("circumradius", circumradius)?;
        if !orientation.is_finite() {
            return Err(Error::InvalidShape("orientation must be finite".into()));
        }
        let vertices = (0..n)
            .map(|i| center + Point2::from_angle(orientation + TAU * i as f64 / n as f64) * circumradius)
            .collect();
        Ok(Shape2D::RegularPolygon {
            n,
            circumradius,
            orientation,
            center,
            polygon: ConvexPolygon::new(vertices)?,
        })
    }

    /// Polygon vertices, if the shape has any.
    pub fn vertices(&self) -> Option<&[Point2]> {
        match self {
            Shape2D::Polygon(p) | Shape2D::RegularPolygon { polygon: p, .. } => Some(p.vertices()),
            _ => None,
        }
    }

    pub fn is_conic(&self) -> bool {
        matches!(self, Shape2D::Circle { .. } | Shape2D::Ellipse { .. })
    }

    pub fn area(&self) -> f64 {
        match self {
            Shape2D::Polygon(p) => p.area(),
            Shape2D::Circle { radius, .. } => PI * radius * radius,
            Shape2D::Ellipse { semi_axes: (a, b), .. } => PI * a * b,
            Shape2D::RegularPolygon { n, circumradius: r, .. } => {
                0.5 * *n as f64 * r * r * (TAU / *n as f64).sin()
            }
        }
    }

    pub fn centroid(&self) -> Point2 {
        match self {
            Shape2D::Polygon(p) => p.centroid(),
            Shape2D::Circle { center, .. }
            | Shape2D::Ellipse { center, .. }
            | Shape2D::RegularPolygon { center, .. } => *center,
        }
    }

    /// Ellipse point in its local (unrotated, centred) frame.
    fn to_local(center: Point2, rotation: f64, p: Point2) -> Point2 {
        (p - center).rotate(-rotation)
    }

    /// Signed boundary offset: negative inside, zero on the boundary.
    ///
    /// Polygons give the signed distance to the nearest edge line. Conics
    /// give `(ρ − 1)·min(a, b)` with `ρ` the normalized radius, which has the
    /// same sign and is within a constant factor of the true distance.
    pub fn boundary_offset(&self, p: Point2) -> f64 {
        match self {
            Shape2D::Polygon(poly) | Shape2D::RegularPolygon { polygon: poly, .. } => {
                poly.boundary_offset(p)
            }
            Shape2D::Circle { center, radius } => p.distance(*center) - radius,
            Shape2D::Ellipse { center, semi_axes: (a, b), rotation } => {
                let q = Self::to_local(*center, *rotation, p);
                ((q.x / a).hypot(q.y / b) - 1.0) * a.min(*b)
            }
        }
    }

    /// Membership with [`GEOM_EPS`] slack.
    pub fn contains(&self, p: Point2) -> bool {
        self.boundary_offset(p) <= GEOM_EPS
    }

    /// Exact membership, as used by rejection sampling.
    pub fn contains_strict(&self, p: Point2) -> bool {
        match self {
            Shape2D::Circle { center, radius } => {
                let d = p - *center;
                d.dot(d) <= radius * radius
            }
            Shape2D::Ellipse { center, semi_axes: (a, b), rotation } => {
                let q = Self::to_local(*center, *rotation, p);
                (q.x / a).powi(2) + (q.y / b).powi(2) <= 1.0
            }
            _ => self.boundary_offset(p) <= 0.0,
        }
    }

    pub fn on_boundary(&self, p: Point2) -> bool {
        self.boundary_offset(p).abs() <= GEOM_EPS
    }

    /// Distance from an interior point to the boundary along `dir`.
    pub fn ray_exit(&self, origin: Point2, dir: Point2) -> Result<f64> {
        let len = dir.norm();
        if !(len > 0.0 && len.is_finite()) {
            return Err(Error::DegenerateIntersection("zero direction".into()));
        }
        let u = dir * (1.0 / len);
        let t = match self {
            Shape2D::Polygon(poly) | Shape2D::RegularPolygon { polygon: poly, .. } => {
                poly.ray_exit(origin, u)
            }
            Shape2D::Circle { center, radius } => conic_exit(origin - *center, u, *radius, *radius),
            Shape2D::Ellipse { center, semi_axes: (a, b), rotation } => conic_exit(
                Self::to_local(*center, *rotation, origin),
                u.rotate(-rotation),
                *a,
                *b,
            ),
        };
        match t {
            Some(t) if t > 0.0 && t.is_finite() => Ok(t),
            _ => Err(Error::DegenerateIntersection(format!(
                "ray from ({}, {}) does not leave the shape",
                origin.x, origin.y
            ))),
        }
    }

    /// The similar shape with the same orientation, scaled by `scale` about
    /// `center`.
    pub fn scaled_about(&self, center: Point2, scale: f64) -> Self {
        match self {
            Shape2D::Polygon(p) => Shape2D::Polygon(p.scaled_about(center, scale)),
            Shape2D::Circle { center: c, radius } => Shape2D::Circle {
                center: c.scale_about(center, scale),
                radius: radius * scale,
            },
            Shape2D::Ellipse { center: c, semi_axes: (a, b), rotation } => Shape2D::Ellipse {
                center: c.scale_about(center, scale),
                semi_axes: (a * scale, b * scale),
                rotation: *rotation,
            },
            Shape2D::RegularPolygon { n, circumradius, orientation, center: c, polygon } => {
                Shape2D::RegularPolygon {
                    n: *n,
                    circumradius: circumradius * scale,
                    orientation: *orientation,
                    center: c.scale_about(center, scale),
                    polygon: polygon.scaled_about(center, scale),
                }
            }
        }
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn bounding_box(&self) -> (Point2, Point2) {
        match self {
            Shape2D::Polygon(p) | Shape2D::RegularPolygon { polygon: p, .. } => {
                let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for v in p.vertices() {
                    lo = Point2::new(lo.x.min(v.x), lo.y.min(v.y));
                    hi = Point2::new(hi.x.max(v.x), hi.y.max(v.y));
                }
                (lo, hi)
            }
            Shape2D::Circle { center, radius } => {
                let r = Point2::new(*radius, *radius);
                (*center - r, *center + r)
            }
            Shape2D::Ellipse { center, semi_axes: (a, b), rotation } => {
                let (s, c) = rotation.sin_cos();
                let half = Point2::new((a * c).hypot(b * s), (a * s).hypot(b * c));
                (*center - half, *center + half)
            }
        }
    }

    /// Boundary point for the parameter `s ∈ [0, 1)`: arc over the
    /// vertices for polygons, the angular parameter for conics.
    pub fn boundary_point(&self, s: f64) -> Point2 {
        let s = s.rem_euclid(1.0);
        match self {
            Shape2D::Polygon(p) | Shape2D::RegularPolygon { polygon: p, .. } => {
                let v = p.vertices();
                let pos = s * v.len() as f64;
                let i = (pos.floor() as usize).min(v.len() - 1);
                let f = pos - i as f64;
                let (a, b) = (v[i], v[(i + 1) % v.len()]);
                a + (b - a) * f
            }
            Shape2D::Circle { center, radius } => *center + Point2::from_angle(TAU * s) * *radius,
            Shape2D::Ellipse { center, semi_axes: (a, b), rotation } => {
                let (sn, cs) = (TAU * s).sin_cos();
                *center + Point2::new(a * cs, b * sn).rotate(*rotation)
            }
        }
    }
}

/// Positive root of `|o + t u|` hitting the axis-aligned ellipse `(a, b)`.
fn conic_exit(o: Point2, u: Point2, a: f64, b: f64) -> Option<f64> {
    let (ia2, ib2) = (1.0 / (a * a), 1.0 / (b * b));
    let qa = u.x * u.x * ia2 + u.y * u.y * ib2;
    let qb = 2.0 * (o.x * u.x * ia2 + o.y * u.y * ib2);
    let qc = o.x * o.x * ia2 + o.y * o.y * ib2 - 1.0;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Avoid cancellation: pick the form whose denominator adds magnitudes.
    let t = if qb > 0.0 { -2.0 * qc / (qb + sq) } else { (-qb + sq) / (2.0 * qa) };
    Some(t)
}

/// Chord `OQ` through the centroid `C`, with `β = |OC| / |OQ|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chord {
    pub o: Point2,
    pub q: Point2,
    pub centroid: Point2,
    pub beta: f64,
    /// Direction from `O` toward `Q`.
    pub theta: f64,
}

impl Chord {
    pub fn length(&self) -> f64 {
        self.o.distance(self.q)
    }
}

/// The chord through the centroid along direction `theta`; `O` lies behind
/// the centroid and `Q` ahead of it.
pub fn chord_through_centroid(shape: &Shape2D, theta: f64) -> Result<Chord> {
    let c = shape.centroid();
    let u = Point2::from_angle(theta);
    let ahead = shape.ray_exit(c, u)?;
    let behind = shape.ray_exit(c, -u)?;
    Ok(Chord {
        o: c - u * behind,
        q: c + u * ahead,
        centroid: c,
        beta: behind / (behind + ahead),
        theta,
    })
}

/// `(β(θ), β(θ + π))`; the same chord traversed both ways, so the pair sums
/// to 1.
pub fn beta_complement(shape: &Shape2D, theta: f64) -> Result<(f64, f64)> {
    let forward = chord_through_centroid(shape, theta)?.beta;
    let backward = chord_through_centroid(shape, theta + PI)?.beta;
    Ok((forward, backward))
}

/// Direction from the centroid to the first vertex, or 0 for conics.
fn reference_angle(shape: &Shape2D) -> f64 {
    match shape.vertices() {
        Some(v) => {
            let d = v[0] - shape.centroid();
            d.y.atan2(d.x)
        }
        None => 0.0,
    }
}

fn beta_offset(shape: &Shape2D, theta: f64) -> Result<f64> {
    Ok(chord_through_centroid(shape, theta)?.beta - 0.5)
}

/// Bisection on `β(θ) − 1/2` over `[a, b]`, given opposite signs at the ends.
fn bisect_balanced(shape: &Shape2D, mut a: f64, mut b: f64, mut ga: f64, tol: f64) -> Result<Chord> {
    let mut best = chord_through_centroid(shape, a)?;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let chord = chord_through_centroid(shape, mid)?;
        let gm = chord.beta - 0.5;
        if gm.abs() < (best.beta - 0.5).abs() {
            best = chord;
        }
        if gm.abs() <= tol || mid <= a || mid >= b {
            break;
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    Ok(best)
}

/// A chord through the centroid with `|β − 1/2| ≤ tol`.
///
/// Rotating the chord by π swaps `β` and `1 − β`, so `β(θ) − 1/2` changes
/// sign on `[θ₀, θ₀ + π]` with `θ₀` the direction to the first vertex.
/// Shapes with `β ≡ 1/2` (conics, centrally symmetric polygons) return the
/// chord at `θ = 0`.
pub fn find_balanced_chord(shape: &Shape2D, tol: f64) -> Result<Chord> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    if shape.is_conic() {
        return chord_through_centroid(shape, 0.0);
    }
    let theta0 = reference_angle(shape);
    let symmetric = (0..16)
        .map(|i| beta_offset(shape, theta0 + PI * i as f64 / 16.0))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .all(|g| g.abs() <= tol);
    if symmetric {
        return chord_through_centroid(shape, 0.0);
    }
    let g0 = beta_offset(shape, theta0)?;
    if g0.abs() <= tol {
        return chord_through_centroid(shape, theta0);
    }
    bisect_balanced(shape, theta0, theta0 + PI, g0, tol)
}

/// Every balanced chord found by scanning `samples` directions over half a
/// turn and bisecting each sign change. Opposite directions describe the
/// same chord, so only `[θ₀, θ₀ + π)` is scanned.
pub fn balanced_chords(shape: &Shape2D, samples: usize, tol: f64) -> Result<Vec<Chord>> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    let samples = samples.max(2);
    let theta0 = reference_angle(shape);
    let thetas: Vec<f64> = (0..=samples).map(|i| theta0 + PI * i as f64 / samples as f64).collect();
    let g = thetas
        .iter()
        .map(|&t| beta_offset(shape, t))
        .collect::<Result<Vec<_>>>()?;
    if g.iter().all(|v| v.abs() <= tol) {
        return Ok(vec![chord_through_centroid(shape, 0.0)?]);
    }
    let mut chords = Vec::new();
    for i in 0..samples {
        if g[i].abs() <= tol {
            chords.push(chord_through_centroid(shape, thetas[i])?);
        } else if g[i + 1].abs() > tol && (g[i] < 0.0) != (g[i + 1] < 0.0) {
            chords.push(bisect_balanced(shape, thetas[i], thetas[i + 1], g[i], tol)?);
        }
    }
    Ok(chords)
}

/// `(vertex-excision β, midpoint-excision β)` for an odd regular `n`-gon:
/// `1/(1 + cos(π/n))` and `cos(π/n)/(1 + cos(π/n))`. Even polygons give
/// `(1/2, 1/2)`.
pub fn regular_polygon_betas(n: usize) -> Result<(f64, f64)> {
    if n < 3 {
        return Err(Error::InvalidShape(format!("regular polygon needs n >= 3, got {n}")));
    }
    if n % 2 == 0 {
        return Ok((0.5, 0.5));
    }
    let c = (PI / n as f64).cos();
    Ok((1.0 / (1.0 + c), c / (1.0 + c)))
}

/// A cavity similar to the shape, scaled by `1/x` about `O`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcisionPlan {
    pub shape: Shape2D,
    pub chord: Chord,
    /// `|OQ| / |OP|`.
    pub x: f64,
    pub cavity: Shape2D,
    /// Predicted balance point, the image of `Q` on the cavity boundary.
    pub p: Point2,
}

impl ExcisionPlan {
    /// Builds the cavity for an arbitrary ratio `x > 1`, balanced or not.
    pub fn with_ratio(shape: &Shape2D, chord: &Chord, x: f64) -> Result<Self> {
        if !(x > 1.0 && x.is_finite()) {
            return Err(Error::DegenerateCavity);
        }
        let scale = 1.0 / x;
        Ok(Self {
            shape: shape.clone(),
            chord: *chord,
            x,
            cavity: shape.scaled_about(chord.o, scale),
            p: chord.q.scale_about(chord.o, scale),
        })
    }

    pub fn cavity_centroid(&self) -> Point2 {
        self.cavity.centroid()
    }
}

/// Checks that `chord` is a chord of `shape` through its centroid.
fn check_chord(shape: &Shape2D, chord: &Chord) -> Result<()> {
    let scale = chord.length().max(1.0);
    let c = shape.centroid();
    if chord.centroid.distance(c) > GEOM_EPS * scale {
        return Err(Error::InvalidChord("chord does not pass through the centroid".into()));
    }
    if !shape.on_boundary(chord.o) || !shape.on_boundary(chord.q) {
        return Err(Error::InvalidChord("chord endpoints are not on the boundary".into()));
    }
    let oq = chord.q - chord.o;
    let oc = c - chord.o;
    if oq.cross(oc).abs() > GEOM_EPS * scale * scale {
        return Err(Error::InvalidChord("O, C and Q are not collinear".into()));
    }
    let beta = oc.dot(oq) / oq.dot(oq);
    if !(beta > 0.0 && beta < 1.0) || (beta - chord.beta).abs() > 1e-9 {
        return Err(Error::InvalidChord(format!(
            "centroid is not strictly inside the chord (beta = {beta})"
        )));
    }
    Ok(())
}

/// Solves the `k = 2` balance polynomial at `chord.beta` and builds the
/// cavity. Refuses chords at or above the physicality threshold `2/3`.
///
/// A `β` measured from geometry carries rounding error, so chords within
/// [`GEOM_EPS`] of the threshold count as reaching it.
pub fn plan_excision(shape: &Shape2D, chord: &Chord) -> Result<ExcisionPlan> {
    check_chord(shape, chord)?;
    let threshold = physicality_threshold(2);
    if !(chord.beta < threshold - GEOM_EPS) {
        return Err(Error::NotPhysical { k: 2, beta: chord.beta, threshold });
    }
    let root = positive_root(&BalanceProblem::new(2, chord.beta)?, ROOT_TOL)?;
    ExcisionPlan::with_ratio(shape, chord, root.value)
}

/// Centroid of the shape with the cavity removed:
/// `(A·C − A′·C′) / (A − A′)`.
pub fn composite_centroid(plan: &ExcisionPlan) -> Result<Point2> {
    let (a, a_cav) = (plan.shape.area(), plan.cavity.area());
    if !(a - a_cav > 0.0) {
        return Err(Error::DegenerateCavity);
    }
    let (c, c_cav) = (plan.shape.centroid(), plan.cavity.centroid());
    // Relative to O to keep the subtraction well scaled.
    let o = plan.chord.o;
    let moment = (c - o) * a - (c_cav - o) * a_cav;
    Ok(o + moment * (1.0 / (a - a_cav)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub composite: Point2,
    pub p: Point2,
    /// `|composite − P|`.
    pub distance: f64,
    /// `distance / |OQ|`; compared against the tolerance.
    pub relative_distance: f64,
    pub passed: bool,
    /// Scaled residual of the balance polynomial at the plan's ratio.
    pub residual: f64,
}

/// Compares the exact composite centroid with `P`.
pub fn verify_balance(plan: &ExcisionPlan, tol: f64) -> BalanceReport {
    let composite = composite_centroid(plan).unwrap_or(Point2::new(f64::NAN, f64::NAN));
    let distance = composite.distance(plan.p);
    let relative_distance = distance / plan.chord.length();
    let residual = BalancePolynomial::new(2, plan.chord.beta)
        .map(|p| p.scaled_residual(plan.x))
        .unwrap_or(f64::NAN);
    BalanceReport {
        composite,
        p: plan.p,
        distance,
        relative_distance,
        passed: relative_distance <= tol,
        residual,
    }
}
