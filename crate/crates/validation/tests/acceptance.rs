//! Acceptance criteria, one line each. Exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use edgebalance::balance_poly::{knacci_constant, physicality_threshold, positive_root, BalanceProblem};
use edgebalance::geom2d::{
    chord_through_centroid, find_balanced_chord, plan_excision, verify_balance, Chord, ExcisionPlan,
    Point2, Shape2D,
};
use edgebalance::geomkd::{
    balanced_boundary_point, centroid_ray_beta, plan_toward_centroid, verify_balance_kd, ShapeKd,
};
use edgebalance::knacci_seq::{converged_ratio, doubling_prefix, generate, DEFAULT_MAX_TERMS};
use edgebalance::mc_oracle::sample_region_centroid;
use num_bigint::{BigInt, BigUint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PHI: f64 = 1.618033988749895;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn run(id: u32, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed < limit;
    let passed = out.passed && in_time;
    let timing = if in_time {
        format!("{elapsed:.2?} < {limit:?}")
    } else {
        format!("{elapsed:.2?} EXCEEDS {limit:?}")
    };
    println!(
        "{} {id:>2} {name}: {} [{timing}]",
        if passed { "PASS" } else { "FAIL" },
        out.detail
    );
    passed
}

/// Random convex polygon with `n` vertices: a random triangle whose corners
/// are clipped one at a time.
fn random_polygon(rng: &mut impl Rng, n: usize) -> Shape2D {
    loop {
        let mut v: Vec<Point2> = (0..3)
            .map(|_| Point2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let area = (v[1] - v[0]).cross(v[2] - v[0]);
        if area.abs() < 0.2 {
            continue;
        }
        if area < 0.0 {
            v.swap(1, 2);
        }
        while v.len() < n {
            let i = rng.random_range(0..v.len());
            let m = v.len();
            let (a, p, b) = (v[(i + m - 1) % m], v[i], v[(i + 1) % m]);
            let depth = 10f64.powf(rng.random_range(-4.0..-0.4));
            let t1 = depth * rng.random_range(0.5..1.0);
            let t2 = depth * rng.random_range(0.5..1.0);
            v[i] = p + (a - p) * t1;
            v.insert(i + 1, p + (b - p) * t2);
        }
        if let Ok(shape) = Shape2D::polygon(v) {
            return shape;
        }
    }
}

/// A chord through the centroid with `β = target`, if the shape has one.
fn chord_with_beta(shape: &Shape2D, target: f64) -> Option<Chord> {
    const SCAN: usize = 720;
    let g = |theta: f64| chord_through_centroid(shape, theta).map(|c| c.beta - target).ok();
    let thetas: Vec<f64> = (0..=SCAN).map(|i| 2.0 * PI * i as f64 / SCAN as f64).collect();
    let values: Vec<f64> = thetas.iter().map(|&t| g(t)).collect::<Option<_>>()?;
    let i = (0..SCAN).find(|&i| (values[i] < 0.0) != (values[i + 1] < 0.0))?;
    let (mut lo, mut hi, glo) = (thetas[i], thetas[i + 1], values[i]);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid)?;
        if (gm < 0.0) == (glo < 0.0) { lo = mid } else { hi = mid }
    }
    chord_through_centroid(shape, 0.5 * (lo + hi)).ok()
}

fn golden_ratio() -> Outcome {
    let root = positive_root(&BalanceProblem::new(2, 0.5).unwrap(), 1e-12).unwrap();
    let closed = (1.0 + 5f64.sqrt()) / 2.0;
    let err = (root.value - PHI).abs().max((root.value - closed).abs());
    outcome(err <= 1e-9, format!("x = {} (error {err:.1e})", root.value))
}

fn knacci_pair() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (k, expected) in [(3, 1.8393), (4, 1.9276)] {
        let start = Instant::now();
        let root = knacci_constant(k, 1e-12).unwrap();
        let elapsed = start.elapsed();
        let err = (root.value - expected).abs();
        passed &= err <= 5e-4 && elapsed < Duration::from_millis(1);
        parts.push(format!("φ_{k} = {} vs {expected} (error {err:.1e}, {elapsed:.2?})", root.value));
    }
    outcome(passed, parts.join(", "))
}

fn duality() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 1..=10 {
        let seq = converged_ratio(k, 1e-12, DEFAULT_MAX_TERMS).unwrap();
        let root = knacci_constant(k, 1e-12).unwrap().value;
        worst = worst.max((seq - root).abs());
    }
    outcome(worst <= 1e-9, format!("max |ratio − φ_k| = {worst:.1e} over k = 1..10"))
}

fn hierarchy() -> Outcome {
    let values: Vec<f64> = (1..=40).map(|k| knacci_constant(k, 1e-12).unwrap().value).collect();
    let increasing = values.windows(2).all(|w| w[0] < w[1]);
    let below_two = values.iter().all(|&v| v < 2.0);
    let gap = 2.0 - values[39];
    outcome(
        increasing && below_two && gap < 1e-11,
        format!("increasing = {increasing}, all < 2 = {below_two}, 2 − φ_40 = {gap:.3e}"),
    )
}

fn balanced_polygons() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..200 {
        let n = rng.random_range(5..=40);
        let shape = random_polygon(&mut rng, n);
        let result = find_balanced_chord(&shape, 1e-13)
            .and_then(|chord| ExcisionPlan::with_ratio(&shape, &chord, PHI))
            .map(|plan| verify_balance(&plan, 1e-10));
        match result {
            Ok(report) => {
                worst = worst.max(report.relative_distance);
                failures += usize::from(!report.passed);
            }
            Err(_) => failures += 1,
        }
    }
    outcome(failures == 0, format!("{failures} of 200 failed, max relative distance {worst:.1e}"))
}

fn general_beta() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let (mut balanced, mut unbalanced, mut unattainable) = (0, 0, 0);
    let (mut lowest_missed, mut highest_missed) = (f64::INFINITY, 0.0f64);
    for _ in 0..200 {
        let target = rng.random_range(0.1..0.6);
        let found = (0..20).find_map(|_| {
            let n = rng.random_range(5..=40);
            let shape = random_polygon(&mut rng, n);
            chord_with_beta(&shape, target).map(|c| (shape, c))
        });
        let Some((shape, chord)) = found else {
            unattainable += 1;
            lowest_missed = lowest_missed.min(target);
            highest_missed = highest_missed.max(target);
            continue;
        };
        let report = plan_excision(&shape, &chord).map(|plan| {
            let on_cavity = plan.cavity.on_boundary(plan.p);
            (verify_balance(&plan, 1e-10), on_cavity)
        });
        match report {
            Ok((r, true)) if r.passed && (chord.beta - target).abs() < 1e-9 => {
                balanced += 1;
                worst = worst.max(r.relative_distance);
            }
            _ => unbalanced += 1,
        }
    }
    let mut detail = format!("{balanced} of 200 balanced (max relative distance {worst:.1e})");
    if unbalanced > 0 {
        detail += &format!(", {unbalanced} off balance");
    }
    if unattainable > 0 {
        detail += &format!(
            ", {unattainable} draws have no chord through the centroid (missed β in [{lowest_missed:.4}, {highest_missed:.4}]; chords through a planar centroid satisfy β ≥ 1/3)"
        );
    }
    outcome(balanced == 200, detail)
}

fn physicality_boundary() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for k in 2..=8 {
        let t = physicality_threshold(k);
        let mut offsets: Vec<f64> = vec![-1e-3, 1e-3, -1e-9, 1e-9, -1e-6, 1e-6];
        offsets.extend((0..500).map(|_| rng.random_range(-1e-3..1e-3)));
        for d in offsets {
            let beta = t + d;
            let root = positive_root(&BalanceProblem::new(k, beta).unwrap(), 1e-12).unwrap();
            let expect = beta < t;
            checked += 1;
            if root.physical != expect || (root.value > 1.0) != expect {
                mismatches.push((k, beta, root.value));
            }
        }
        // Geometric side: simplex boundary points near a vertex.
        let simplex = ShapeKd::standard_simplex(k).unwrap();
        for step in [0.0, 1e-7, 1e-5, 1e-4, 1e-3] {
            let mut o = vec![0.0; k];
            o[0] = step;
            let beta = centroid_ray_beta(&simplex, &o).unwrap();
            if (beta - t).abs() > 1e-3 {
                continue;
            }
            checked += 1;
            let planned = plan_toward_centroid(&simplex, &o);
            if planned.is_ok() != (beta < t - 1e-12) || planned.is_ok_and(|p| p.x <= 1.0) {
                mismatches.push((k, beta, f64::NAN));
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        match mismatches.first() {
            None => format!("{checked} plans, all on the expected side of k/(k+1)"),
            Some(m) => format!("{checked} plans, {} on the wrong side, first {m:?}", mismatches.len()),
        },
    )
}

fn kdim_balance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut count = 0;
    for k in 2..=8 {
        let phi_k = knacci_constant(k, 1e-12).unwrap().value;
        let mut shapes = vec![
            ShapeKd::hyperball(vec![0.3; k], 1.7).unwrap(),
            ShapeKd::hypercube(vec![-0.5; k], 2.0).unwrap(),
            ShapeKd::standard_simplex(k).unwrap(),
        ];
        while shapes.len() < 6 {
            let vertices = (0..=k).map(|_| (0..k).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            if let Ok(s) = ShapeKd::simplex(vertices) {
                shapes.push(s);
            }
        }
        for shape in &shapes {
            count += 1;
            let report = balanced_boundary_point(shape, 1e-13)
                .and_then(|o| plan_toward_centroid(shape, &o))
                .map(|plan| ((plan.x - phi_k).abs(), verify_balance_kd(&plan, 1e-10)));
            match report {
                Ok((dx, r)) if r.passed && dx < 1e-10 => worst = worst.max(r.relative_distance),
                _ => failures.push(k),
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{count} plans, failures at k = {failures:?}, max relative distance {worst:.1e}"),
    )
}

fn monte_carlo() -> Outcome {
    let disk = Shape2D::circle(Point2::new(PHI / 2.0, 0.0), PHI / 2.0).unwrap();
    let plan = plan_excision(&disk, &chord_through_centroid(&disk, 0.0).unwrap()).unwrap();
    let est = sample_region_centroid(&disk, Some(&plan.cavity), 10_000_000, 42).unwrap();
    let sigma = est.max_sigma(&[plan.p.x, plan.p.y]);
    outcome(
        sigma <= 4.0,
        format!(
            "estimate ({:.6}, {:.6}) vs P ({}, {}), {sigma:.2} standard errors",
            est.centroid_estimate[0], est.centroid_estimate[1], plan.p.x, plan.p.y
        ),
    )
}

fn fibonacci_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut ratios = 0;
    let mut violations = 0;
    for k in 2..=8 {
        for _ in 0..100 {
            let seeds: Vec<BigInt> = (0..k).map(|_| BigInt::from(rng.random_range(1u64..1_000_000))).collect();
            let seq = generate(k, &seeds, 120).unwrap();
            let terms = seq.terms();
            let start = seq.ratio_bound_start().unwrap();
            for n in start..terms.len() {
                ratios += 1;
                let doubled: BigUint = &terms[n - 1] << 1;
                if !(terms[n] > terms[n - 1] && terms[n] < doubled) {
                    violations += 1;
                }
            }
        }
    }
    outcome(violations == 0, format!("{ratios} ratios, {violations} outside (1, 2)"))
}

fn doubling() -> Outcome {
    let expected: Vec<BigUint> = [0u32, 0, 0, 1, 1, 2, 4, 8, 16].map(BigUint::from).to_vec();
    let (seq, run) = doubling_prefix(4, 9).unwrap();
    let got: Vec<String> = seq.terms().iter().map(|t| t.to_string()).collect();
    outcome(
        seq.terms() == expected.as_slice(),
        format!("got ⟨{}⟩, exact doubling over indices {run:?}, expected ⟨0,0,0,1,1,2,4,8,16⟩", got.join(",")),
    )
}

fn main() -> ExitCode {
    let ms = Duration::from_millis;
    let results = [
        run(1, "golden ratio", ms(1), golden_ratio),
        run(2, "k-nacci constants", ms(2), knacci_pair),
        run(3, "sequence-root duality", ms(1000), duality),
        run(4, "hierarchy and limit", ms(10), hierarchy),
        run(5, "balanced 2-D polygons", ms(5000), balanced_polygons),
        run(6, "general-beta balance", ms(5000), general_beta),
        run(7, "physicality boundary", ms(1000), physicality_boundary),
        run(8, "k-dim balance", ms(1000), kdim_balance),
        run(9, "Monte-Carlo crescent", ms(30_000), monte_carlo),
        run(10, "Fibonacci ratio bound", ms(1000), fibonacci_bound),
        run(11, "doubling sequence", ms(100), doubling),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
