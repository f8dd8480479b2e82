//! Rejection-sampling estimates of the centroid of a body minus a cavity.
//!
//! Points are drawn uniformly from the body's bounding box with
//! `ChaCha8Rng`, seeded by `seed_from_u64(seed)`. The draw is cut into fixed
//! batches of [`BATCH_SIZE`] samples; batch `b` uses stream `b` of that
//! generator. Batches run in parallel and are merged in batch order, so the
//! estimate is bit-identical for a given `(seed, n)` whatever the number of
//! worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geom2d::{Point2, Shape2D};
use crate::geomkd::ShapeKd;
use crate::{Error, Result};

pub const BATCH_SIZE: u64 = 1 << 16;
pub const MIN_SAMPLES: u64 = 1000;
/// Rejection from the bounding box stops being practical past this.
pub const MAX_ORACLE_DIMENSION: usize = 10;

/// A body the oracle can sample.
pub trait Region {
    fn dim(&self) -> usize;
    fn bounds(&self) -> (Vec<f64>, Vec<f64>);
    /// Exact membership, no slack.
    fn contains_point(&self, p: &[f64]) -> bool;
}

impl Region for Shape2D {
    fn dim(&self) -> usize {
        2
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let (lo, hi) = self.bounding_box();
        (vec![lo.x, lo.y], vec![hi.x, hi.y])
    }

    fn contains_point(&self, p: &[f64]) -> bool {
        self.contains_strict(Point2::new(p[0], p[1]))
    }
}

impl Region for ShapeKd {
    fn dim(&self) -> usize {
        ShapeKd::dim(self)
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        self.bounding_box()
    }

    fn contains_point(&self, p: &[f64]) -> bool {
        self.contains_strict(p)
    }
}

pub fn point_in_shape<R: Region + ?Sized>(shape: &R, p: &[f64]) -> bool {
    p.len() == shape.dim() && shape.contains_point(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub centroid_estimate: Vec<f64>,
    pub samples_accepted: u64,
    pub samples_total: u64,
    /// Sample standard deviation over `√accepted`, per coordinate.
    pub std_error: Vec<f64>,
    pub seed: u64,
    pub box_volume: f64,
}

impl McEstimate {
    pub fn acceptance_fraction(&self) -> f64 {
        self.samples_accepted as f64 / self.samples_total as f64
    }

    /// Volume of the sampled region and its binomial standard error.
    pub fn volume_estimate(&self) -> (f64, f64) {
        let f = self.acceptance_fraction();
        let se = (f * (1.0 - f) / self.samples_total as f64).sqrt();
        (f * self.box_volume, se * self.box_volume)
    }

    /// Largest per-coordinate deviation from `truth`, in standard errors.
    pub fn max_sigma(&self, truth: &[f64]) -> f64 {
        self.centroid_estimate
            .iter()
            .zip(truth)
            .zip(&self.std_error)
            .map(|((e, t), s)| {
                let d = (e - t).abs();
                if d == 0.0 { 0.0 } else { d / s }
            })
            .fold(0.0, f64::max)
    }

    pub fn within_sigma(&self, truth: &[f64], sigmas: f64) -> bool {
        self.max_sigma(truth) <= sigmas
    }
}

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone)]
struct Moments {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(dim: usize) -> Self {
        Self { count: 0, mean: vec![0.0; dim], m2: vec![0.0; dim] }
    }

    fn push(&mut self, p: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), x) in self.mean.iter_mut().zip(&mut self.m2).zip(p) {
            let d = x - *m;
            *m += d / n;
            *s += d * (x - *m);
        }
    }

    fn merge(mut self, other: &Moments) -> Self {
        if other.count == 0 {
            return self;
        }
        if self.count == 0 {
            return other.clone();
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.mean[i] += d * nb / n;
            self.m2[i] += other.m2[i] + d * d * na * nb / n;
        }
        self.count += other.count;
        self
    }
}

fn sample_batch<R: Region + ?Sized>(
    shape: &R,
    cavity: Option<&R>,
    lo: &[f64],
    hi: &[f64],
    seed: u64,
    batch: u64,
    count: u64,
) -> Moments {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    let mut moments = Moments::new(lo.len());
    let mut p = vec![0.0; lo.len()];
    for _ in 0..count {
        for ((x, a), b) in p.iter_mut().zip(lo).zip(hi) {
            *x = a + (b - a) * rng.random::<f64>();
        }
        if shape.contains_point(&p) && !cavity.is_some_and(|c| c.contains_point(&p)) {
            moments.push(&p);
        }
    }
    moments
}

/// Estimates the centroid of `shape` minus `cavity` from `n` uniform draws
/// in the bounding box of `shape`.
pub fn sample_region_centroid<R: Region + Sync + ?Sized>(
    shape: &R,
    cavity: Option<&R>,
    n: u64,
    seed: u64,
) -> Result<McEstimate> {
    if n < MIN_SAMPLES {
        return Err(Error::TooFewSamples { n, min: MIN_SAMPLES });
    }
    let dim = shape.dim();
    if dim > MAX_ORACLE_DIMENSION {
        return Err(Error::InvalidDimension { k: dim, max: MAX_ORACLE_DIMENSION });
    }
    if let Some(c) = cavity {
        if c.dim() != dim {
            return Err(Error::InvalidShape("cavity dimension differs from body".into()));
        }
    }
    let (lo, hi) = shape.bounds();
    let batches = n.div_ceil(BATCH_SIZE);
    let parts: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let count = BATCH_SIZE.min(n - b * BATCH_SIZE);
            sample_batch(shape, cavity, &lo, &hi, seed, b, count)
        })
        .collect();
    let total = parts.iter().fold(Moments::new(dim), |acc, m| acc.merge(m));
    if total.count == 0 {
        return Err(Error::NoAcceptedSamples);
    }
    let accepted = total.count as f64;
    let std_error = if total.count > 1 {
        total.m2.iter().map(|s| (s / (accepted - 1.0)).sqrt() / accepted.sqrt()).collect()
    } else {
        vec![f64::INFINITY; dim]
    };
    Ok(McEstimate {
        centroid_estimate: total.mean,
        samples_accepted: total.count,
        samples_total: n,
        std_error,
        seed,
        box_volume: lo.iter().zip(&hi).map(|(a, b)| b - a).product(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom2d::{chord_through_centroid, composite_centroid, plan_excision};
    use crate::geomkd::{composite_centroid_kd, plan_toward_centroid};

    fn unit_square() -> Shape2D {
        Shape2D::polygon(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn membership() {
        let sq = unit_square();
        assert!(point_in_shape(&sq, &[0.5, 0.5]));
        assert!(!point_in_shape(&sq, &[1.5, 0.5]));
        let s = ShapeKd::standard_simplex(3).unwrap();
        assert!(point_in_shape(&s, &[0.1, 0.1, 0.1]));
        assert!(!point_in_shape(&s, &[0.1, 0.1]));
    }

    #[test]
    fn rejects_bad_requests() {
        let sq = unit_square();
        assert!(matches!(
            sample_region_centroid(&sq, None, 999, 1),
            Err(Error::TooFewSamples { .. })
        ));
        assert!(matches!(
            sample_region_centroid(&sq, Some(&sq), 10_000, 1),
            Err(Error::NoAcceptedSamples)
        ));
        let big = ShapeKd::hypercube(vec![0.0; 11], 1.0).unwrap();
        assert!(sample_region_centroid(&big, None, 10_000, 1).is_err());
    }

    #[test]
    fn square_centroid() {
        let est = sample_region_centroid(&unit_square(), None, 1_000_000, 42).unwrap();
        assert_eq!(est.samples_accepted, est.samples_total);
        assert!(est.within_sigma(&[0.5, 0.5], 4.0), "{est:?}");
        let expected_se = (1.0f64 / 12.0).sqrt() / 1000.0;
        for se in &est.std_error {
            assert!((se / expected_se - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let sq = unit_square();
        let a = sample_region_centroid(&sq, None, 200_001, 9).unwrap();
        let b = sample_region_centroid(&sq, None, 200_001, 9).unwrap();
        assert_eq!(a, b);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = single.install(|| sample_region_centroid(&sq, None, 200_001, 9).unwrap());
        assert_eq!(a, c);
        let d = sample_region_centroid(&sq, None, 200_001, 10).unwrap();
        assert_ne!(a.centroid_estimate, d.centroid_estimate);
    }

    #[test]
    fn coverage_over_seeds() {
        let sq = unit_square();
        let hits = (0..50u64)
            .filter(|&seed| {
                let est = sample_region_centroid(&sq, None, 20_000, seed).unwrap();
                est.within_sigma(&[0.5, 0.5], 3.0)
            })
            .count();
        assert!(hits >= 47, "{hits} of 50");
    }

    #[test]
    fn crescent_and_area() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let disk = Shape2D::circle(Point2::new(phi / 2.0, 0.0), phi / 2.0).unwrap();
        let plan = plan_excision(&disk, &chord_through_centroid(&disk, 0.0).unwrap()).unwrap();
        let est = sample_region_centroid(&disk, Some(&plan.cavity), 2_000_000, 42).unwrap();
        assert!(est.within_sigma(&[plan.p.x, plan.p.y], 4.0), "{est:?}");
        let exact = composite_centroid(&plan).unwrap();
        assert!(est.within_sigma(&[exact.x, exact.y], 4.0));
        let (v, se) = est.volume_estimate();
        let true_area = disk.area() - plan.cavity.area();
        assert!((v - true_area).abs() <= 5.0 * se, "{v} vs {true_area}");
    }

    #[test]
    fn ball_k4_golden_excision() {
        let ball = ShapeKd::hyperball(vec![0.0; 4], 1.0).unwrap();
        let plan = plan_toward_centroid(&ball, &[-1.0, 0.0, 0.0, 0.0]).unwrap();
        let est = sample_region_centroid(&ball, Some(&plan.cavity), 1_000_000, 3).unwrap();
        let exact = composite_centroid_kd(&plan).unwrap();
        assert!(est.within_sigma(&exact, 4.0), "{est:?} vs {exact:?}");
        let (v, se) = est.volume_estimate();
        assert!((v - (ball.volume() - plan.cavity.volume())).abs() <= 5.0 * se);
    }

    #[test]
    fn simplex_centroid() {
        let s = ShapeKd::standard_simplex(3).unwrap();
        let est = sample_region_centroid(&s, None, 500_000, 5).unwrap();
        assert!(est.within_sigma(&[0.25; 3], 4.0));
        let (v, se) = est.volume_estimate();
        assert!((v - 1.0 / 6.0).abs() <= 5.0 * se);
    }
}
