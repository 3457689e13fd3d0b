//! The increasing solution of the self-similarity equation.
//!
//! For a system f_0, ..., f_N and a probability vector p, the cumulative
//! distribution function phi(x) = mu([0, x]) of the invariant measure is
//! the unique increasing continuous solution with phi(0) = 0, phi(1) = 1
//! of
//!
//! ```text
//! phi(x) = sum_n phi(f_n(x)) - sum_n phi(f_n(0)).          (*)
//! ```
//!
//! Evaluation follows the point through the cylinder structure and is
//! exact on every finite case:
//!
//! * x at or below the smallest fixed point: phi(x) = 0;
//! * x at or above the largest fixed point: phi(x) = 1;
//! * x in an enumerated gap after digits w: the plateau constant, a
//!   finite sum;
//! * x in the attractor: the digit series, truncated when the remaining
//!   cylinder mass falls below the evaluation tolerance; the truncation
//!   error is exactly that mass.
//!
//! Rational maps and weights keep the whole computation in exact
//! arithmetic, so gap plateaus, boundary identities and telescoping sums
//! can be asserted as equalities rather than approximations.

use std::sync::Arc;

use serde::Serialize;

use crate::attractor::{measure_bound, walk_cylinders};
use crate::coding::{Address, Tail};
use crate::contraction::{ContractionSystem, Position, DEFAULT_TOL_PHI};
use crate::error::{Error, Result};
use crate::measure::ProbabilityVector;
use crate::scalar::Scalar;

const MAX_EVAL_STEPS: usize = 100_000;

/// A function value with a rigorous error bound. `error` is zero on the
/// exact evaluation paths and otherwise the remaining cylinder mass at
/// truncation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiValue {
    pub value: Scalar,
    pub error: f64,
}

/// The plateau constant of the gap reached after a digit word: the value
/// the solution holds on the whole closed gap.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlateauValue {
    pub digits: Vec<u8>,
    pub value: Scalar,
}

/// One asserted identity of the boundary table.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryCheck {
    pub name: String,
    pub lhs: Scalar,
    pub rhs: Scalar,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryReport {
    pub checks: Vec<BoundaryCheck>,
    pub pass: bool,
}

/// Support length versus retained variation at one resolution: the
/// variation stays 1 while the supporting length shrinks, which is the
/// numerical shadow of singularity for thin attractors.
#[derive(Clone, Debug, Serialize)]
pub struct SingularityEvidence {
    pub depth: usize,
    pub support_length: Scalar,
    pub variation: Scalar,
}

/// The increasing solution of (*) for one (system, weights) pair.
#[derive(Clone, Debug)]
pub struct SolutionPhi {
    system: Arc<ContractionSystem>,
    p: ProbabilityVector,
    cum: Vec<Scalar>,
    tol_phi: f64,
}

impl SolutionPhi {
    pub fn new(system: Arc<ContractionSystem>, p: ProbabilityVector) -> Result<Self> {
        Self::with_tolerance(system, p, DEFAULT_TOL_PHI)
    }

    pub fn with_tolerance(
        system: Arc<ContractionSystem>,
        p: ProbabilityVector,
        tol_phi: f64,
    ) -> Result<Self> {
        if p.len() != system.len() {
            return Err(Error::LengthMismatch {
                expected: system.len(),
                got: p.len(),
            });
        }
        if !tol_phi.is_finite() || tol_phi <= 0.0 {
            return Err(Error::BadEpsilon(tol_phi));
        }
        let cum = p.cumulative();
        Ok(SolutionPhi {
            system,
            p,
            cum,
            tol_phi,
        })
    }

    pub fn system(&self) -> &Arc<ContractionSystem> {
        &self.system
    }

    pub fn probabilities(&self) -> &ProbabilityVector {
        &self.p
    }

    pub fn tol_phi(&self) -> f64 {
        self.tol_phi
    }

    /// True when evaluation runs in exact rational arithmetic.
    pub fn is_exact(&self) -> bool {
        self.system.is_exact() && self.p.is_exact()
    }

    pub fn eval(&self, x: f64) -> Result<PhiValue> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::DomainError(x));
        }
        self.eval_scalar(&Scalar::from_f64_exact(x))
    }

    /// Evaluate by descending the cylinder tree. Each step either
    /// resolves exactly (flank, gap) or consumes one digit, multiplying
    /// the tracked cylinder mass by its weight; the series truncates
    /// once that mass drops to `tol_phi`.
    ///
    /// Exact systems invert the digit's map per step, which is exact
    /// rational arithmetic. Systems with general maps instead refine the
    /// cylinder forward (`eval_forward`): stepwise bisection error would
    /// be amplified by the inverse Lipschitz factor at every level.
    pub fn eval_scalar(&self, x: &Scalar) -> Result<PhiValue> {
        if *x < Scalar::zero() || *x > Scalar::one() {
            return Err(Error::DomainError(x.to_f64()));
        }
        if !self.system.is_exact() {
            return self.eval_forward(x);
        }
        let exactified;
        let x = if x.is_exact() {
            x
        } else {
            // Promote float inputs so the per-digit inversions stay
            // exact all the way down.
            exactified = Scalar::from_f64_exact(x.to_f64());
            &exactified
        };
        let sys = &*self.system;
        let mut sum = Scalar::zero();
        let mut mass = Scalar::one();
        let mut y = x.clone();
        for _ in 0..MAX_EVAL_STEPS {
            let slack = sys.decision_slack(&y);
            if le_with(&y, sys.zero_hat(), slack) {
                return Ok(PhiValue {
                    value: sum,
                    error: 0.0,
                });
            }
            if ge_with(&y, sys.one_hat(), slack) {
                return Ok(PhiValue {
                    value: &sum + &mass,
                    error: 0.0,
                });
            }
            match sys.position_in_hull_images(&y, slack) {
                Position::Inside(n) => {
                    sum = &sum + &(&mass * &self.cum[n]);
                    mass = &mass * &self.p.scalar(n);
                    y = sys.map(n).invert(&y, sys.tolerances().inv)?;
                    if mass.to_f64() <= self.tol_phi {
                        return Ok(PhiValue {
                            value: sum,
                            error: mass.to_f64(),
                        });
                    }
                }
                Position::Between(n) => {
                    return Ok(PhiValue {
                        value: &sum + &(&mass * &self.cum[n + 1]),
                        error: 0.0,
                    });
                }
                Position::Below => {
                    return Ok(PhiValue {
                        value: sum,
                        error: 0.0,
                    });
                }
                Position::Above => {
                    return Ok(PhiValue {
                        value: &sum + &mass,
                        error: 0.0,
                    });
                }
            }
        }
        Ok(PhiValue {
            value: sum,
            error: mass.to_f64(),
        })
    }

    /// Float-lane evaluation: keep the original point and locate it at
    /// each level among the child hulls f_w(f_n([0-hat, 1-hat])),
    /// recomputed from the root. Forward compositions are contractions,
    /// so the comparisons stay accurate at every depth, where a chain of
    /// bisected inversions loses a factor of the inverse Lipschitz bound
    /// per digit.
    fn eval_forward(&self, x: &Scalar) -> Result<PhiValue> {
        let sys = &*self.system;
        let slack = sys.decision_slack(x);
        let count = sys.len();
        let mut sum = Scalar::zero();
        let mut mass = Scalar::one();
        let mut digits: Vec<u8> = Vec::new();
        let mut child_lo = vec![Scalar::zero(); count];
        let mut child_hi = vec![Scalar::zero(); count];
        for _ in 0..MAX_EVAL_STEPS {
            let lo = sys.apply_digits(&digits, sys.zero_hat())?;
            let hi = sys.apply_digits(&digits, sys.one_hat())?;
            if le_with(x, &lo, slack) {
                return Ok(PhiValue {
                    value: sum,
                    error: 0.0,
                });
            }
            if ge_with(x, &hi, slack) {
                return Ok(PhiValue {
                    value: &sum + &mass,
                    error: 0.0,
                });
            }
            for n in 0..count {
                child_lo[n] = sys.apply_digits(&digits, sys.hull_left(n))?;
                child_hi[n] = sys.apply_digits(&digits, sys.hull_right(n))?;
            }
            match sys.position_among(x, &child_lo, &child_hi, slack) {
                Position::Inside(n) => {
                    sum = &sum + &(&mass * &self.cum[n]);
                    mass = &mass * &self.p.scalar(n);
                    digits.push(n as u8);
                    if mass.to_f64() <= self.tol_phi {
                        return Ok(PhiValue {
                            value: sum,
                            error: mass.to_f64(),
                        });
                    }
                }
                Position::Between(n) => {
                    return Ok(PhiValue {
                        value: &sum + &(&mass * &self.cum[n + 1]),
                        error: 0.0,
                    });
                }
                Position::Below => {
                    return Ok(PhiValue {
                        value: sum,
                        error: 0.0,
                    });
                }
                Position::Above => {
                    return Ok(PhiValue {
                        value: &sum + &mass,
                        error: 0.0,
                    });
                }
            }
        }
        Ok(PhiValue {
            value: sum,
            error: mass.to_f64(),
        })
    }

    /// The digit series evaluated symbolically. Constant tails sum in
    /// closed form (error 0); a truncated address brackets the value by
    /// its remaining cylinder mass.
    pub fn series_value(&self, address: &Address) -> Result<PhiValue> {
        let mut sum = Scalar::zero();
        let mut mass = Scalar::one();
        for &d in address.prefix() {
            self.system.digit_in_range(d)?;
            let n = usize::from(d);
            sum = &sum + &(&mass * &self.cum[n]);
            mass = &mass * &self.p.scalar(n);
        }
        Ok(match address.tail() {
            // All further digits are 0, contributing nothing.
            Tail::Constant0 => PhiValue {
                value: sum,
                error: 0.0,
            },
            // The all-N tail sums the geometric series
            // mass * cum_N * (1 + p_N + p_N^2 + ...) = mass.
            Tail::ConstantN => PhiValue {
                value: &sum + &mass,
                error: 0.0,
            },
            Tail::Truncated => PhiValue {
                error: mass.to_f64(),
                value: sum,
            },
        })
    }

    /// Plateau constant of the gap opened after the digit word: the
    /// finite series through the digits plus the full cylinder mass.
    /// The word must not end in the top digit (no gap opens there).
    pub fn plateau(&self, digits: &[u8]) -> Result<PlateauValue> {
        let top = self.system.top_digit();
        match digits.last() {
            None => return Err(Error::LastDigitIsN { max: top }),
            Some(&d) if d >= top => {
                self.system.digit_in_range(d)?;
                return Err(Error::LastDigitIsN { max: top });
            }
            Some(_) => {}
        }
        let mut sum = Scalar::zero();
        let mut mass = Scalar::one();
        for &d in digits {
            self.system.digit_in_range(d)?;
            let n = usize::from(d);
            sum = &sum + &(&mass * &self.cum[n]);
            mass = &mass * &self.p.scalar(n);
        }
        Ok(PlateauValue {
            digits: digits.to_vec(),
            value: &sum + &mass,
        })
    }

    /// Residual of (*) at x; zero on exact paths and below
    /// (2N + 3) tol_phi everywhere (one evaluation of phi(x) and N + 1
    /// each of the two sums).
    pub fn residual_scalar(&self, x: &Scalar) -> Result<Scalar> {
        let mut total = self.eval_scalar(x)?.value;
        for n in 0..self.system.len() {
            let fx = self.system.map(n).apply(x);
            total = &total - &self.eval_scalar(&fx)?.value;
            total = &total + &self.eval_scalar(self.system.left_end(n))?.value;
        }
        Ok(total)
    }

    pub fn equation_residual(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::DomainError(x));
        }
        Ok(self
            .residual_scalar(&Scalar::from_f64_exact(x))?
            .to_f64())
    }

    /// Table of the boundary and gap identities: phi vanishes up to the
    /// smallest fixed point, is 1 from the largest one on, and holds the
    /// plateau constant across each first-level gap.
    pub fn boundary_report(&self) -> Result<BoundaryReport> {
        let sys = &*self.system;
        let tol = 2.0 * self.tol_phi;
        let mut checks = Vec::new();
        let push = |name: String, lhs: Scalar, rhs: Scalar, checks: &mut Vec<BoundaryCheck>| {
            let pass = (&lhs - &rhs).abs().to_f64() <= tol;
            checks.push(BoundaryCheck {
                name,
                lhs,
                rhs,
                pass,
            });
        };

        let zero_checks = [
            ("phi(0) = 0", Scalar::zero()),
            ("phi(0-hat) = 0", sys.zero_hat().clone()),
            ("phi(f_0(0)) = 0", sys.left_end(0).clone()),
        ];
        for (name, point) in zero_checks {
            let v = self.eval_scalar(&point)?.value;
            push(name.into(), v, Scalar::zero(), &mut checks);
        }
        let one_checks = [
            ("phi(f_N(1)) = 1", sys.right_end(sys.len() - 1).clone()),
            ("phi(1-hat) = 1", sys.one_hat().clone()),
            ("phi(1) = 1", Scalar::one()),
        ];
        for (name, point) in one_checks {
            let v = self.eval_scalar(&point)?.value;
            push(name.into(), v, Scalar::one(), &mut checks);
        }

        for n in 0..sys.len() - 1 {
            let left = sys.hull_right(n).clone();
            let right = sys.hull_left(n + 1).clone();
            let v_left = self.eval_scalar(&left)?.value;
            let v_right = self.eval_scalar(&right)?.value;
            let c = self.plateau(&[n as u8])?.value;
            let mid = self.eval_scalar(&Scalar::midpoint(&left, &right))?.value;
            push(
                format!("gap {n}: phi at both edges agree"),
                v_left.clone(),
                v_right,
                &mut checks,
            );
            push(
                format!("gap {n}: edge value is the plateau constant"),
                v_left,
                c.clone(),
                &mut checks,
            );
            push(
                format!("gap {n}: midpoint value is the plateau constant"),
                mid,
                c,
                &mut checks,
            );
        }

        let pass = checks.iter().all(|c| c.pass);
        Ok(BoundaryReport { checks, pass })
    }

    /// Length of the depth-k cover of the attractor against the
    /// variation of the solution across its cylinders. The variation
    /// telescopes to 1; the cover length shrinks geometrically for
    /// strictly non-covering systems.
    pub fn singularity_evidence(&self, depth: usize) -> Result<SingularityEvidence> {
        let support_length = measure_bound(&self.system, depth)?;
        let mut spans = Vec::new();
        walk_cylinders(&self.system, depth, &mut |_, lo, hi| {
            spans.push((lo, hi));
        })?;
        let mut variation = Scalar::zero();
        for (lo, hi) in spans {
            let rise = &self.eval_scalar(&hi)?.value - &self.eval_scalar(&lo)?.value;
            variation = &variation + &rise;
        }
        Ok(SingularityEvidence {
            depth,
            support_length,
            variation,
        })
    }
}

fn le_with(y: &Scalar, bound: &Scalar, slack: f64) -> bool {
    if slack == 0.0 {
        y <= bound
    } else {
        y.to_f64() <= bound.to_f64() + slack
    }
}

fn ge_with(y: &Scalar, bound: &Scalar, slack: f64) -> bool {
    if slack == 0.0 {
        y >= bound
    } else {
        y.to_f64() >= bound.to_f64() - slack
    }
}

fn check_same_system(solutions: &[SolutionPhi], alphas: &[f64]) -> Result<()> {
    if solutions.is_empty() {
        return Err(Error::LengthMismatch {
            expected: 1,
            got: 0,
        });
    }
    if solutions.len() != alphas.len() {
        return Err(Error::LengthMismatch {
            expected: solutions.len(),
            got: alphas.len(),
        });
    }
    let first = solutions[0].system();
    for s in &solutions[1..] {
        if !Arc::ptr_eq(s.system(), first) && **s.system() != **first {
            return Err(Error::MixedSystems);
        }
    }
    Ok(())
}

pub(crate) fn combination_value(
    solutions: &[SolutionPhi],
    alphas: &[f64],
    alpha0: f64,
    t: &Scalar,
) -> Result<f64> {
    let mut acc = alpha0;
    for (s, a) in solutions.iter().zip(alphas) {
        acc += a * s.eval_scalar(t)?.value.to_f64();
    }
    Ok(acc)
}

/// Residual of the shifted equation
///
/// ```text
/// F(x) = sum_{n=0}^{N} F(f_n(x)) - sum_{n=1}^{N} F(f_n(0))
/// ```
///
/// for the affine combination F = sum alpha_i phi_i + alpha0. Dropping
/// the n = 0 term from the constant sum makes additive shifts harmless:
/// every constant solves the equation, and so does any combination of
/// solutions of (*) plus a constant, because phi_i(f_0(0)) = 0.
/// All solutions must share one system.
pub fn affine_combination_residual(
    solutions: &[SolutionPhi],
    alphas: &[f64],
    alpha0: f64,
    x: f64,
) -> Result<f64> {
    check_same_system(solutions, alphas)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::DomainError(x));
    }
    let system = solutions[0].system().clone();
    let xs = Scalar::from_f64_exact(x);
    let mut residual = combination_value(solutions, alphas, alpha0, &xs)?;
    for n in 0..system.len() {
        let fx = system.map(n).apply(&xs);
        residual -= combination_value(solutions, alphas, alpha0, &fx)?;
        if n >= 1 {
            residual += combination_value(solutions, alphas, alpha0, system.left_end(n))?;
        }
    }
    Ok(residual)
}

/// Scan the affine combination for monotonicity on a uniform grid,
/// allowing twice the accumulated evaluation tolerance. Meaningful when
/// all alphas share a sign.
pub fn affine_combination_monotone(
    solutions: &[SolutionPhi],
    alphas: &[f64],
    alpha0: f64,
    grid: usize,
) -> Result<bool> {
    check_same_system(solutions, alphas)?;
    let weight: f64 = alphas.iter().map(|a| a.abs()).sum();
    let tol_max = solutions
        .iter()
        .map(|s| s.tol_phi())
        .fold(0.0_f64, f64::max);
    let slack = 2.0 * weight * tol_max + 1e-12;
    let mut prev = f64::NEG_INFINITY;
    for i in 0..=grid {
        let x = Scalar::ratio(i as i64, grid as i64);
        let v = combination_value(solutions, alphas, alpha0, &x)?;
        if v < prev - slack {
            return Ok(false);
        }
        prev = prev.max(v);
    }
    Ok(true)
}
