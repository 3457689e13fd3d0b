//! The invariant measure and its estimators.
//!
//! For a probability vector p the system carries a unique Borel
//! probability measure with mu(f_n(B)) = p_n mu(B); it lives on the
//! attractor and is continuous (no atoms). We never materialize it as a
//! density: it is usually singular. Instead it exists through
//!
//! * cylinder masses: the cylinder with digit word w has mass prod p_w,
//! * interval masses: two-sided brackets from a depth-k cylinder sweep,
//! * sampling: i.i.d. digit strings give points distributed by the
//!   measure, which feed the Monte Carlo checks for preservation and
//!   mixing of the transfer map.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::attractor::walk_cylinders;
use crate::contraction::ContractionSystem;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Positive weights p_0, ..., p_N summing to 1.
///
/// Built from floats (weights used as given, sum checked to 1e-15) or
/// from rationals (sum must be exactly 1); the latter keeps every
/// downstream mass computation exact.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector {
    weights: Vec<f64>,
    exact: Option<Vec<BigRational>>,
}

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::BadProbability(format!(
                "need at least 2 weights, got {}",
                weights.len()
            )));
        }
        for (n, w) in weights.iter().enumerate() {
            if !w.is_finite() || *w <= 0.0 {
                return Err(Error::BadProbability(format!(
                    "weight p_{n} = {w} is not a positive finite number"
                )));
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-15 {
            return Err(Error::BadProbability(format!(
                "weights sum to {sum}, not 1"
            )));
        }
        Ok(ProbabilityVector {
            weights,
            exact: None,
        })
    }

    pub fn from_rationals(weights: Vec<BigRational>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::BadProbability(format!(
                "need at least 2 weights, got {}",
                weights.len()
            )));
        }
        for (n, w) in weights.iter().enumerate() {
            if *w <= BigRational::zero() {
                return Err(Error::BadProbability(format!(
                    "weight p_{n} = {w} is not positive"
                )));
            }
        }
        let sum: BigRational = weights.iter().cloned().sum();
        if sum != BigRational::one() {
            return Err(Error::BadProbability(format!(
                "weights sum to {sum}, not 1"
            )));
        }
        let floats = weights.iter().map(crate::scalar::rational_to_f64).collect();
        Ok(ProbabilityVector {
            weights: floats,
            exact: Some(weights),
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn weight_f64(&self, n: usize) -> f64 {
        self.weights[n]
    }

    pub fn weights_f64(&self) -> &[f64] {
        &self.weights
    }

    /// Weight p_n, exact when the vector was built from rationals.
    pub fn scalar(&self, n: usize) -> Scalar {
        match &self.exact {
            Some(ws) => Scalar::Exact(ws[n].clone()),
            None => Scalar::approx(self.weights[n]),
        }
    }

    /// Cumulative sums c_0 = 0, c_{n+1} = c_n + p_n; length N + 2, last
    /// entry 1 (exactly so for exact vectors).
    pub fn cumulative(&self) -> Vec<Scalar> {
        let mut out = Vec::with_capacity(self.len() + 1);
        out.push(Scalar::zero());
        for n in 0..self.len() {
            let next = &out[n] + &self.scalar(n);
            out.push(next);
        }
        out
    }

    pub fn max_weight(&self) -> Scalar {
        let mut best = self.scalar(0);
        for n in 1..self.len() {
            best = best.max(self.scalar(n));
        }
        best
    }

    fn check_against(&self, system: &ContractionSystem) -> Result<()> {
        if self.len() != system.len() {
            return Err(Error::LengthMismatch {
                expected: system.len(),
                got: self.len(),
            });
        }
        Ok(())
    }

    fn digit_in_range(&self, digit: u8) -> Result<()> {
        if usize::from(digit) < self.len() {
            Ok(())
        } else {
            Err(Error::DigitOutOfRange {
                digit,
                max: (self.len() - 1) as u8,
            })
        }
    }

    fn describe(&self) -> String {
        let parts: Vec<String> = (0..self.len()).map(|n| self.scalar(n).to_string()).collect();
        format!("({})", parts.join(", "))
    }
}

/// A depth-k cylinder: its digit word and geometric realization
/// [f_w(0), f_w(1)].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CylinderSpec {
    pub digits: Vec<u8>,
    pub left: Scalar,
    pub right: Scalar,
}

impl CylinderSpec {
    pub fn mass(&self, p: &ProbabilityVector) -> Result<Scalar> {
        cylinder_mass(p, &self.digits)
    }
}

/// All depth-k cylinders in lexicographic order.
pub fn cylinders(system: &ContractionSystem, depth: usize) -> Result<Vec<CylinderSpec>> {
    let mut out = Vec::new();
    walk_cylinders(system, depth, &mut |digits, lo, hi| {
        out.push(CylinderSpec {
            digits: digits.to_vec(),
            left: lo,
            right: hi,
        });
    })?;
    Ok(out)
}

/// Mass of the cylinder with the given digit word: prod_i p_{w_i}.
/// The empty word is the whole space, mass 1.
pub fn cylinder_mass(p: &ProbabilityVector, digits: &[u8]) -> Result<Scalar> {
    let mut mass = Scalar::one();
    for &d in digits {
        p.digit_in_range(d)?;
        mass = &mass * &p.scalar(usize::from(d));
    }
    Ok(mass)
}

const INTERVAL_SWEEP_DEPTH_CAP: usize = 4096;

/// Two-sided bracket for mu([a, b]) from a depth-k cylinder sweep.
///
/// Each cylinder is tested through its attractor hull [f_w(0-hat),
/// f_w(1-hat)], which carries the full cylinder mass; hulls contained in
/// [a, b] feed the lower bound, hulls properly straddling an endpoint
/// feed the upper bound only. A hull meeting [a, b] in a single point is
/// discarded: the measure has no atoms, so such contact carries no mass.
/// The bracket always contains the true value and its width is at most
/// 2 (max p)^k. Working with hulls rather than the raw images f_w([0, 1])
/// lets intervals that miss the attractor (flanks, gaps) settle at (0, 0)
/// after finitely many levels.
///
/// The sweep prunes: only cylinders whose hull contains one of the two
/// endpoints recurse, so the cost is linear in the depth, not
/// exponential.
pub fn interval_mass(
    system: &ContractionSystem,
    p: &ProbabilityVector,
    a: &Scalar,
    b: &Scalar,
    depth: usize,
) -> Result<(Scalar, Scalar)> {
    p.check_against(system)?;
    if *a < Scalar::zero() || *b > Scalar::one() {
        return Err(Error::DomainError(if *a < Scalar::zero() {
            a.to_f64()
        } else {
            b.to_f64()
        }));
    }
    if depth > INTERVAL_SWEEP_DEPTH_CAP {
        return Err(Error::DepthTooLarge {
            what: "interval mass sweep",
            depth,
            cap: INTERVAL_SWEEP_DEPTH_CAP,
        });
    }
    if b <= a {
        // Degenerate or empty interval: no atoms, no mass.
        return Ok((Scalar::zero(), Scalar::zero()));
    }

    let mut lower = Scalar::zero();
    let mut upper = Scalar::zero();
    let mut digits: Vec<u8> = Vec::with_capacity(depth);

    // Walks the cylinder tree, pruning subtrees that cannot meet (a, b).
    // Realizations nest, so a pruned or settled node settles its children.
    fn descend(
        system: &ContractionSystem,
        p: &ProbabilityVector,
        a: &Scalar,
        b: &Scalar,
        depth: usize,
        digits: &mut Vec<u8>,
        mass: &Scalar,
        lower: &mut Scalar,
        upper: &mut Scalar,
    ) -> Result<()> {
        let lo = system.apply_digits(digits, system.zero_hat())?;
        let hi = system.apply_digits(digits, system.one_hat())?;
        if hi <= *a || lo >= *b {
            return Ok(());
        }
        if lo >= *a && hi <= *b {
            *lower = &*lower + mass;
            *upper = &*upper + mass;
            return Ok(());
        }
        if digits.len() == depth {
            *upper = &*upper + mass;
            return Ok(());
        }
        for n in 0..system.len() {
            digits.push(n as u8);
            let child_mass = mass * &p.scalar(n);
            descend(system, p, a, b, depth, digits, &child_mass, lower, upper)?;
            digits.pop();
        }
        Ok(())
    }

    descend(
        system,
        p,
        a,
        b,
        depth,
        &mut digits,
        &Scalar::one(),
        &mut lower,
        &mut upper,
    )?;
    Ok((lower, upper))
}

/// Upper bound (max p)^k on the mass of any single point at resolution
/// k; it witnesses that the measure has no atoms.
pub fn atom_bound(p: &ProbabilityVector, depth: usize) -> Scalar {
    p.max_weight().powi(depth as u32)
}

/// An i.i.d. digit string of length k, digit n drawn with probability
/// p_n. Deterministic for a fixed seed.
pub fn sample_address(p: &ProbabilityVector, seed: u64, length: usize) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cum = float_cumulative(p);
    (0..length).map(|_| draw_digit(&mut rng, &cum)).collect()
}

fn float_cumulative(p: &ProbabilityVector) -> Vec<f64> {
    let mut cum = Vec::with_capacity(p.len());
    let mut acc = 0.0;
    for n in 0..p.len() {
        acc += p.weight_f64(n);
        cum.push(acc);
    }
    *cum.last_mut().expect("at least two weights") = 1.0;
    cum
}

fn draw_digit(rng: &mut ChaCha8Rng, cum: &[f64]) -> u8 {
    let u: f64 = rng.random();
    for (n, c) in cum.iter().enumerate() {
        if u < *c {
            return n as u8;
        }
    }
    (cum.len() - 1) as u8
}

/// Outcome of a Monte Carlo estimator, ready for JSON reporting.
#[derive(Clone, Debug, Serialize)]
pub struct EstimatorReport {
    pub operation: String,
    pub inputs: String,
    pub estimate: f64,
    pub exact_or_bound: Scalar,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub product: Option<Scalar>,
    pub tolerance: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub pass: bool,
}

/// Monte Carlo check that the transfer map preserves the measure.
///
/// Samples attractor points through their addresses (k digits completed
/// with zeros, so each point is exactly f_w(0-hat)), applies the
/// geometric transfer once, and counts hits in cylinder B. Membership is
/// resolved digit by digit with the transfer's own largest-branch
/// tie-break, so a point on a shared cylinder boundary counts for
/// exactly one side, the one the transfer itself takes; a closed
/// interval test would overcount those doubly coded points by a
/// positive-mass set of sampled words. The empirical frequency
/// estimates mu(T^{-1} B) and is compared against the exact mass of B
/// with a 4 sigma tolerance 4 sqrt(mu(B) / n).
///
/// Needs k >= len(B) + 1: one digit is consumed by the transfer and the
/// rest must still resolve membership in B.
pub fn preservation_check(
    system: &ContractionSystem,
    p: &ProbabilityVector,
    b_digits: &[u8],
    k: usize,
    n_samples: usize,
    seed: u64,
) -> Result<EstimatorReport> {
    p.check_against(system)?;
    for &d in b_digits {
        system.digit_in_range(d)?;
    }
    if k < b_digits.len() + 1 {
        return Err(Error::DepthTooLarge {
            what: "preservation sampling needs k >= len(B) + 1; raise k",
            depth: k,
            cap: b_digits.len() + 1,
        });
    }

    let tol = system.tolerances();
    let hull0: Vec<f64> = (0..system.len()).map(|n| system.hull_left(n).to_f64()).collect();
    let hull1: Vec<f64> = (0..system.len()).map(|n| system.hull_right(n).to_f64()).collect();
    let zero_hat = system.zero_hat().to_f64();

    // Largest branch whose hull image contains the point, cushioned for
    // float roundoff: scanning downward realizes the maximal tie-break.
    let branch_of = |x: f64| {
        (0..system.len())
            .rev()
            .find(|&n| x >= hull0[n] - tol.fix && x <= hull1[n] + tol.fix)
    };

    let cum = float_cumulative(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut digits = vec![0u8; k];
    let mut hits = 0usize;
    for _ in 0..n_samples {
        for d in digits.iter_mut() {
            *d = draw_digit(&mut rng, &cum);
        }
        // x = f_{w_1} ... f_{w_k}(0-hat), an attractor point.
        let mut x = zero_hat;
        for &d in digits.iter().rev() {
            x = system.map(usize::from(d)).apply_f64(x);
        }
        // One step of the transfer map, in floats: largest containing
        // branch, then its inverse.
        let Some(n) = branch_of(x) else { continue };
        let mut y = match system.map(n).invert(&Scalar::approx(x), tol.inv) {
            Ok(y) => y.to_f64(),
            Err(_) => continue,
        };
        // Resolve membership in cylinder B by extracting its digits with
        // the same tie-break.
        let mut hit = true;
        for &b in b_digits {
            match branch_of(y) {
                Some(m) if m == usize::from(b) => {
                    y = match system.map(m).invert(&Scalar::approx(y), tol.inv) {
                        Ok(next) => next.to_f64(),
                        Err(_) => {
                            hit = false;
                            break;
                        }
                    };
                }
                _ => {
                    hit = false;
                    break;
                }
            }
        }
        if hit {
            hits += 1;
        }
    }

    let mass = cylinder_mass(p, b_digits)?;
    let estimate = hits as f64 / n_samples as f64;
    let tolerance = 4.0 * (mass.to_f64() / n_samples as f64).sqrt();
    let pass = (estimate - mass.to_f64()).abs() <= tolerance;
    Ok(EstimatorReport {
        operation: "preservation_check".into(),
        inputs: format!("B={b_digits:?} p={} k={k}", p.describe()),
        estimate,
        exact_or_bound: mass,
        product: None,
        tolerance,
        n_samples,
        seed,
        pass,
    })
}

/// Joint mass of the cylinder constraints "digits 0.. spell B" and
/// "digits m.. spell A": zero on conflict, otherwise the product of p
/// over the merged constrained positions.
fn joint_mass(p: &ProbabilityVector, a_digits: &[u8], b_digits: &[u8], m: usize) -> Scalar {
    let mut constraints: std::collections::BTreeMap<usize, u8> = std::collections::BTreeMap::new();
    for (i, &d) in b_digits.iter().enumerate() {
        constraints.insert(i, d);
    }
    for (j, &d) in a_digits.iter().enumerate() {
        if let Some(&prev) = constraints.get(&(m + j)) {
            if prev != d {
                return Scalar::zero();
            }
        } else {
            constraints.insert(m + j, d);
        }
    }
    let mut mass = Scalar::one();
    for (_, d) in constraints {
        mass = &mass * &p.scalar(usize::from(d));
    }
    mass
}

/// Symbolic mixing check: estimate P(sigma^{-m} A and B) by counting
/// sampled digit strings that spell B from position 0 and A from
/// position m, against the exact joint mass and the product
/// P(A) P(B). For m >= len(B) the coordinate blocks are disjoint and
/// the joint equals the product exactly.
pub fn mixing_estimate(
    system: &ContractionSystem,
    p: &ProbabilityVector,
    a_digits: &[u8],
    b_digits: &[u8],
    m: usize,
    n_samples: usize,
    seed: u64,
) -> Result<EstimatorReport> {
    p.check_against(system)?;
    for &d in a_digits.iter().chain(b_digits) {
        system.digit_in_range(d)?;
    }

    let needed = (m + a_digits.len()).max(b_digits.len());
    let cum = float_cumulative(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut digits = vec![0u8; needed];
    let mut hits = 0usize;
    for _ in 0..n_samples {
        for d in digits.iter_mut() {
            *d = draw_digit(&mut rng, &cum);
        }
        let in_b = digits[..b_digits.len()] == *b_digits;
        let in_shifted_a = in_b && digits[m..m + a_digits.len()] == *a_digits;
        if in_shifted_a {
            hits += 1;
        }
    }

    let joint = joint_mass(p, a_digits, b_digits, m);
    let product = &cylinder_mass(p, a_digits)? * &cylinder_mass(p, b_digits)?;
    let estimate = hits as f64 / n_samples as f64;
    let tolerance = 4.0 * (joint.to_f64() / n_samples as f64).sqrt();
    let pass = (estimate - joint.to_f64()).abs() <= tolerance;
    Ok(EstimatorReport {
        operation: "mixing_estimate".into(),
        inputs: format!("A={a_digits:?} B={b_digits:?} m={m} p={}", p.describe()),
        estimate,
        exact_or_bound: joint,
        product: Some(product),
        tolerance,
        n_samples,
        seed,
        pass,
    })
}
