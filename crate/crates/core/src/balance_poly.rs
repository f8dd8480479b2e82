//! The balance polynomial and its unique positive root.
//!
//! Removing a cavity scaled by `1/x` about the tangency point `O` puts the
//! centroid of the remainder on the cavity edge exactly when
//!
//! ```text
//! β x^k + (β − 1) x^{k−1} + … + (β − 1) x + (β − 1) = 0
//! ```
//!
//! where `β = |OC| / |OQ|` is the offset of the centroid along the chord. The
//! trivial root `x = 1` of the unreduced balance equation is already divided
//! out. For `β = 1/2` this is (half of) `x^k − x^{k−1} − … − 1`, whose positive
//! root is the k-nacci constant.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, MAX_DIMENSION};

const BISECTION_WIDTH: f64 = 1e-13;
const MAX_BISECTIONS: usize = 200;
const MAX_DOUBLINGS: usize = 1100;
const MAX_NEWTON: usize = 20;

/// Dimension `k` and centroid offset `β` of a balance problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceProblem {
    k: usize,
    beta: f64,
}

impl BalanceProblem {
    pub fn new(k: usize, beta: f64) -> Result<Self> {
        if k < 1 || k > MAX_DIMENSION {
            return Err(Error::InvalidDimension { k, max: MAX_DIMENSION });
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidBeta(beta));
        }
        Ok(Self { k, beta })
    }

    /// The `β = 1/2` problem whose root is the k-nacci constant.
    pub fn symmetric(k: usize) -> Result<Self> {
        Self::new(k, 0.5)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// True iff the positive root exceeds 1, i.e. the cavity is strictly
    /// smaller than the body.
    pub fn is_physical(&self) -> bool {
        self.beta < physicality_threshold(self.k)
    }
}

/// Coefficients of the balance polynomial, highest power first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancePolynomial {
    coefficients: Vec<f64>,
}

impl BalancePolynomial {
    pub fn new(k: usize, beta: f64) -> Result<Self> {
        BalanceProblem::new(k, beta).map(|p| build_general(&p))
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Coefficients ordered from `x^k` down to the constant term.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn beta(&self) -> f64 {
        self.coefficients[0]
    }

    /// Value at `x` by compensated Horner evaluation, which is as accurate
    /// as plain Horner carried out in twice the working precision.
    pub fn evaluate(&self, x: f64) -> f64 {
        let mut s = self.coefficients[0];
        let mut err = 0.0;
        for &a in &self.coefficients[1..] {
            let (p, p_err) = two_prod(s, x);
            let (sum, s_err) = two_sum(p, a);
            s = sum;
            err = err * x + (p_err + s_err);
        }
        s + err
    }

    /// Value and first derivative by plain Horner.
    pub fn evaluate_with_derivative(&self, x: f64) -> (f64, f64) {
        let mut value = self.coefficients[0];
        let mut slope = 0.0;
        for &a in &self.coefficients[1..] {
            slope = slope * x + value;
            value = value * x + a;
        }
        (value, slope)
    }

    /// `P(x) / max(1, x)^k`, evaluated without forming large powers.
    ///
    /// Has the sign of `P` for every `x > 0` and stays `O(1)` near the
    /// root, so it is the function the solver brackets and polishes.
    pub fn scaled_value(&self, x: f64) -> f64 {
        self.scaled_with_derivative(x).0
    }

    /// Scaled value together with its derivative in `x`.
    pub fn scaled_with_derivative(&self, x: f64) -> (f64, f64) {
        if x <= 1.0 {
            return self.evaluate_with_derivative(x);
        }
        // P(x)/x^k = β + (β − 1)(y + y² + … + y^k) with y = 1/x.
        let beta = self.beta();
        let y = x.recip();
        let k = self.degree();
        let mut geometric = 0.0;
        let mut weighted = 0.0;
        for i in (1..=k).rev() {
            geometric = (geometric + 1.0) * y;
            weighted = (weighted + i as f64) * y;
        }
        let value = beta + (beta - 1.0) * geometric;
        // d/dx y^i = −i y^{i+1}
        let slope = (1.0 - beta) * weighted * y;
        (value, slope)
    }

    /// `|P(x)| / max(1, x)^k`, the residual reported by the solver.
    pub fn scaled_residual(&self, x: f64) -> f64 {
        if x <= 1.0 {
            return self.evaluate(x).abs();
        }
        let power = x.powi(self.degree() as i32);
        if power.is_finite() {
            self.evaluate(x).abs() / power
        } else {
            self.scaled_value(x).abs()
        }
    }
}

/// Coefficients `β, β − 1, …, β − 1` of the reduced balance polynomial.
pub fn build_general(problem: &BalanceProblem) -> BalancePolynomial {
    let mut coefficients = vec![problem.beta - 1.0; problem.k + 1];
    coefficients[0] = problem.beta;
    BalancePolynomial { coefficients }
}

/// The value of `β` at which the positive root reaches 1: `k / (k + 1)`.
///
/// `P(1) = (k + 1) β − k`, so a root strictly above 1 exists iff `β` lies
/// below this threshold.
pub fn physicality_threshold(k: usize) -> f64 {
    k as f64 / (k as f64 + 1.0)
}

/// The unique positive root of a balance polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootResult {
    pub value: f64,
    /// `|P(value)| / max(1, value)^k`.
    pub residual: f64,
    /// Interval on which the scaled polynomial changes sign.
    pub bracket: (f64, f64),
    /// `value > 1`; decided exactly by comparing `β` with the threshold.
    pub physical: bool,
    pub iterations: usize,
}

/// Finds the unique positive root by certified bisection followed by a
/// Newton polish and a final walk to the closest binary64 neighbour.
///
/// Fails with [`Error::SolverFailure`] when the residual cannot be brought
/// below `tol`.
pub fn positive_root(problem: &BalanceProblem, tol: f64) -> Result<RootResult> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    let poly = build_general(problem);
    let beta = problem.beta;
    let physical = problem.is_physical();

    if problem.k == 1 {
        // β x + (β − 1) = 0
        let value = (1.0 - beta) / beta;
        return finish(&poly, value, (value, value), physical, 0, tol);
    }

    let mut iterations = 0;
    let (mut lo, mut hi) = if beta == 0.5 {
        (1.0 + 1e-15, 2.0)
    } else {
        let mut hi = 1.0;
        while poly.scaled_value(hi) < 0.0 {
            hi *= 2.0;
            iterations += 1;
            if iterations > MAX_DOUBLINGS || !hi.is_finite() {
                return Err(Error::SolverFailure(format!(
                    "no sign change found below {hi:e} for k = {}, beta = {beta}",
                    problem.k
                )));
            }
        }
        (0.0, hi)
    };
    if !(poly.scaled_value(lo) < 0.0 && poly.scaled_value(hi) >= 0.0) {
        return Err(Error::SolverFailure(format!(
            "initial bracket ({lo}, {hi}) does not straddle the root"
        )));
    }

    let mut bisections = 0;
    while hi - lo > BISECTION_WIDTH * hi.max(1.0) {
        if bisections == MAX_BISECTIONS {
            return Err(Error::SolverFailure(format!(
                "bisection stalled at ({lo}, {hi})"
            )));
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if poly.scaled_value(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        bisections += 1;
    }
    iterations += bisections;

    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_NEWTON {
        let (f, df) = poly.scaled_with_derivative(x);
        if f == 0.0 || df == 0.0 || !df.is_finite() {
            break;
        }
        let next = x - f / df;
        iterations += 1;
        if !(next >= lo && next <= hi) || next == x {
            break;
        }
        if poly.scaled_value(next) < 0.0 {
            lo = lo.max(next);
        } else {
            hi = hi.min(next);
        }
        x = next;
    }
    let (x, walked) = nearest_double(&poly, x, (lo, hi));
    iterations += walked;
    finish(&poly, x, (lo, hi), physical, iterations, tol)
}

/// Convenience wrapper: the positive root at `β = 1/2`.
pub fn knacci_constant(k: usize, tol: f64) -> Result<RootResult> {
    positive_root(&BalanceProblem::symmetric(k)?, tol)
}

fn finish(
    poly: &BalancePolynomial,
    mut value: f64,
    bracket: (f64, f64),
    physical: bool,
    iterations: usize,
    tol: f64,
) -> Result<RootResult> {
    // At the threshold the root sits within rounding of 1; make the value
    // agree with the exact physicality decision.
    if physical && value <= 1.0 {
        value = 1.0f64.next_up();
    } else if !physical && value > 1.0 {
        value = 1.0;
    }
    let residual = poly.scaled_residual(value);
    if residual > tol {
        return Err(Error::SolverFailure(format!(
            "residual {residual:e} exceeds tolerance {tol:e} at x = {value}"
        )));
    }
    Ok(RootResult {
        value,
        residual,
        bracket,
        physical,
        iterations,
    })
}

/// Steps one ulp at a time toward smaller compensated residual, staying
/// inside the bracket.
fn nearest_double(poly: &BalancePolynomial, mut x: f64, (lo, hi): (f64, f64)) -> (f64, usize) {
    if !x.powi(poly.degree() as i32).is_finite() {
        return (x, 0);
    }
    let mut best = poly.evaluate(x).abs();
    let mut steps = 0;
    for _ in 0..64 {
        let down = x.next_down();
        let up = x.next_up();
        let r_down = if down >= lo { poly.evaluate(down).abs() } else { f64::INFINITY };
        let r_up = if up <= hi { poly.evaluate(up).abs() } else { f64::INFINITY };
        if r_down < best && r_down <= r_up {
            x = down;
            best = r_down;
        } else if r_up < best {
            x = up;
            best = r_up;
        } else {
            break;
        }
        steps += 1;
    }
    (x, steps)
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}
