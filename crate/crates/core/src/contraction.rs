//! Families of increasing contractions on the unit interval.
//!
//! A system is a list of strictly increasing contractions
//! f_0, ..., f_N : [0, 1] -> [0, 1] whose images sit strictly in order,
//!
//! ```text
//! 0 <= f_0(0) < f_0(1) <= f_1(0) < f_1(1) <= ... <= f_N(0) < f_N(1) <= 1,
//! ```
//!
//! and do not tile all of [0, 1]: somewhere a strict inequality leaves a
//! genuine hole. Consecutive images may touch in a point; they may never
//! overlap. These are the only standing assumptions, and everything else
//! in the crate (attractor geometry, symbolic coding, self-similar
//! measures, staircase solutions) is built on top of them.
//!
//! Two map shapes are supported: affine maps, which carry exact rational
//! coefficients and keep the whole computation in exact arithmetic, and
//! general maps given by an arbitrary monotone callable with a certified
//! Lipschitz bound.

use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default tolerance for detecting fixed points and endpoint ties.
pub const DEFAULT_TOL_FIX: f64 = 1e-13;
/// Default tolerance for inverting maps by bisection.
pub const DEFAULT_TOL_INV: f64 = 1e-12;
/// Default truncation tolerance for staircase evaluation.
pub const DEFAULT_TOL_PHI: f64 = 1e-10;

/// Number of probe points used to sanity-check a general map's
/// monotonicity and Lipschitz certificate.
const PROBE_POINTS: usize = 1024;

/// Iteration cap for fixed-point searches on general maps.
const FIXED_POINT_ITERATIONS: usize = 20_000;

/// Tolerances used by the numeric (non-exact) code paths.
///
/// `fix` governs fixed-point and tie detection, `inv` the bisection
/// stopping rule for inverses, `phi` the truncation of staircase series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub fix: f64,
    pub inv: f64,
    pub phi: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            fix: DEFAULT_TOL_FIX,
            inv: DEFAULT_TOL_INV,
            phi: DEFAULT_TOL_PHI,
        }
    }
}

/// The affine map x -> slope * x + intercept with exact rational
/// coefficients. Cached `f64` images of the coefficients serve the fast
/// float paths.
#[derive(Clone, Debug)]
pub struct AffineMap {
    slope: BigRational,
    intercept: BigRational,
    slope_f: f64,
    intercept_f: f64,
}

impl AffineMap {
    /// Validated constructor: slope in (0, 1), intercept in [0, 1), image
    /// inside [0, 1].
    pub fn new(slope: BigRational, intercept: BigRational) -> Result<Self> {
        if slope <= BigRational::zero() {
            return Err(Error::BadMap(format!("slope {slope} must be positive")));
        }
        if slope >= BigRational::one() {
            return Err(Error::NotContractive {
                bound: slope.to_f64().unwrap_or(f64::INFINITY),
            });
        }
        if intercept < BigRational::zero() || intercept >= BigRational::one() {
            return Err(Error::BadMap(format!(
                "intercept {intercept} must lie in [0, 1)"
            )));
        }
        if &slope + &intercept > BigRational::one() {
            return Err(Error::BadMap(format!(
                "image [{intercept}, {}] escapes [0, 1]",
                &slope + &intercept
            )));
        }
        Ok(Self::raw(slope, intercept))
    }

    /// Constructor from binary floating-point coefficients; the exact
    /// rational value of each `f64` is used, so the map is still exact.
    pub fn from_f64(slope: f64, intercept: f64) -> Result<Self> {
        let (Some(a), Some(b)) = (
            BigRational::from_float(slope),
            BigRational::from_float(intercept),
        ) else {
            return Err(Error::BadMap(format!(
                "coefficients ({slope}, {intercept}) must be finite"
            )));
        };
        Self::new(a, b)
    }

    /// Unvalidated constructor for internal use: compositions and the
    /// identity legitimately fall outside the single-map constraints.
    fn raw(slope: BigRational, intercept: BigRational) -> Self {
        let slope_f = slope.to_f64().unwrap_or(f64::NAN);
        let intercept_f = intercept.to_f64().unwrap_or(f64::NAN);
        AffineMap {
            slope,
            intercept,
            slope_f,
            intercept_f,
        }
    }

    pub fn slope(&self) -> &BigRational {
        &self.slope
    }

    pub fn intercept(&self) -> &BigRational {
        &self.intercept
    }
}

/// A strictly increasing contraction given by an arbitrary callable plus
/// a certified Lipschitz bound below one.
///
/// The constructor spot-checks the certificate on a uniform probe grid;
/// it cannot prove it, but it reliably rejects misdeclared maps.
#[derive(Clone)]
pub struct GeneralMap {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    lipschitz: f64,
    label: String,
}

impl GeneralMap {
    pub fn new(
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        lipschitz: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        let label = label.into();
        if !lipschitz.is_finite() || lipschitz <= 0.0 {
            return Err(Error::BadMap(format!(
                "{label}: Lipschitz bound {lipschitz} must be a positive number"
            )));
        }
        if lipschitz >= 1.0 {
            return Err(Error::NotContractive { bound: lipschitz });
        }
        let h = 1.0 / (PROBE_POINTS as f64);
        let mut prev = f(0.0);
        if !(0.0..=1.0).contains(&prev) {
            return Err(Error::BadMap(format!("{label}: f(0) = {prev} not in [0, 1]")));
        }
        for i in 1..=PROBE_POINTS {
            let x = i as f64 * h;
            let y = f(x);
            if !y.is_finite() {
                return Err(Error::BadMap(format!("{label}: f({x}) is not finite")));
            }
            if y <= prev {
                return Err(Error::BadMap(format!(
                    "{label}: not strictly increasing near x = {x}"
                )));
            }
            if y - prev > lipschitz * h + 1e-12 {
                return Err(Error::BadMap(format!(
                    "{label}: increment near x = {x} exceeds the declared Lipschitz bound"
                )));
            }
            prev = y;
        }
        if prev > 1.0 + 1e-12 {
            return Err(Error::BadMap(format!("{label}: f(1) = {prev} not in [0, 1]")));
        }
        Ok(GeneralMap {
            f,
            lipschitz,
            label,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for GeneralMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralMap")
            .field("label", &self.label)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

/// One member map of a system.
#[derive(Clone, Debug)]
pub enum ContractionMap {
    Affine(AffineMap),
    General(GeneralMap),
}

impl ContractionMap {
    pub fn affine(slope: f64, intercept: f64) -> Result<Self> {
        Ok(ContractionMap::Affine(AffineMap::from_f64(slope, intercept)?))
    }

    pub fn affine_exact(slope: BigRational, intercept: BigRational) -> Result<Self> {
        Ok(ContractionMap::Affine(AffineMap::new(slope, intercept)?))
    }

    pub fn general(
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        lipschitz: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        Ok(ContractionMap::General(GeneralMap::new(f, lipschitz, label)?))
    }

    /// The identity, i.e. the empty composition. Not a valid member map.
    pub fn identity() -> Self {
        ContractionMap::Affine(AffineMap::raw(BigRational::one(), BigRational::zero()))
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, ContractionMap::Affine(_))
    }

    pub fn as_affine(&self) -> Option<&AffineMap> {
        match self {
            ContractionMap::Affine(m) => Some(m),
            ContractionMap::General(_) => None,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            ContractionMap::Affine(m) => m.slope_f,
            ContractionMap::General(m) => m.lipschitz,
        }
    }

    /// Apply the map. Exact input through an affine map stays exact.
    pub fn apply(&self, x: &Scalar) -> Scalar {
        match (self, x) {
            (ContractionMap::Affine(m), Scalar::Exact(r)) => {
                Scalar::Exact(&m.slope * r + &m.intercept)
            }
            (ContractionMap::Affine(m), Scalar::Approx(v)) => {
                Scalar::Approx(m.slope_f * v + m.intercept_f)
            }
            (ContractionMap::General(m), x) => Scalar::Approx((m.f)(x.to_f64())),
        }
    }

    pub fn apply_f64(&self, x: f64) -> f64 {
        match self {
            ContractionMap::Affine(m) => m.slope_f * x + m.intercept_f,
            ContractionMap::General(m) => (m.f)(x),
        }
    }

    /// Invert the map on its image. Affine inversion is closed-form (and
    /// exact for exact input); general maps are inverted by bisection to
    /// within `tol`, so the defect |f(x) - y| is at most Lipschitz * tol.
    ///
    /// Values within `tol` outside the image are accepted and clamped;
    /// anything further out is refused.
    pub fn invert(&self, y: &Scalar, tol: f64) -> Result<Scalar> {
        let lo = self.apply_f64(0.0);
        let hi = self.apply_f64(1.0);
        let yf = y.to_f64();
        if yf < lo - tol || yf > hi + tol {
            return Err(Error::OutOfImage { value: yf });
        }
        match self {
            ContractionMap::Affine(m) => match y {
                Scalar::Exact(r) => {
                    let x = (r - &m.intercept) / &m.slope;
                    let x = x.max(BigRational::zero()).min(BigRational::one());
                    Ok(Scalar::Exact(x))
                }
                Scalar::Approx(v) => {
                    let x = (v - m.intercept_f) / m.slope_f;
                    Ok(Scalar::Approx(x.clamp(0.0, 1.0)))
                }
            },
            ContractionMap::General(m) => {
                let y = yf.clamp(lo, hi);
                let (mut a, mut b) = (0.0_f64, 1.0_f64);
                while b - a > tol {
                    let mid = 0.5 * (a + b);
                    if (m.f)(mid) < y {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                Ok(Scalar::Approx(0.5 * (a + b)))
            }
        }
    }
}

/// Compose maps left to right: `compose([f, g])` is x -> f(g(x)), matching
/// the digit-string convention where the first digit acts last. The empty
/// composition is the identity.
pub fn compose(maps: &[ContractionMap]) -> ContractionMap {
    if maps.iter().all(ContractionMap::is_affine) {
        let mut slope = BigRational::one();
        let mut intercept = BigRational::zero();
        // Fold from the left: (a, b) after k maps represents the
        // composition of the first k, and appending g on the right gives
        // x -> a * g(x) + b.
        for m in maps {
            let m = m.as_affine().expect("checked affine above");
            intercept = &intercept + &slope * &m.intercept;
            slope = &slope * &m.slope;
        }
        return ContractionMap::Affine(AffineMap::raw(slope, intercept));
    }
    let chain: Vec<ContractionMap> = maps.to_vec();
    let lipschitz = chain.iter().map(ContractionMap::lipschitz).product();
    let f = Arc::new(move |x: f64| chain.iter().rev().fold(x, |v, m| m.apply_f64(v)));
    ContractionMap::General(GeneralMap {
        f,
        lipschitz,
        label: "composition".into(),
    })
}

/// Where a point sits relative to the ordered images of a family of
/// intervals `[lo_n, hi_n]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Position {
    /// Below the first interval.
    Below,
    /// Inside interval `n`; ties between touching intervals resolve to the
    /// larger index.
    Inside(usize),
    /// Strictly between intervals `n` and `n + 1`.
    Between(usize),
    /// Above the last interval.
    Above,
}

/// A validated gapped system of increasing contractions.
///
/// Construction checks the ordering chain of the images, rejects systems
/// that tile [0, 1] completely, and precomputes the data every other
/// module leans on: the endpoint images f_n(0), f_n(1), the extremal
/// fixed points, and the images of the attractor hull.
#[derive(Clone, Debug)]
pub struct ContractionSystem {
    maps: Vec<ContractionMap>,
    /// f_n(0) and f_n(1).
    at0: Vec<Scalar>,
    at1: Vec<Scalar>,
    /// Fixed point of f_0, reached from 0; smallest attractor point.
    zero_hat: Scalar,
    /// Fixed point of f_N, reached from 1; largest attractor point.
    one_hat: Scalar,
    /// f_n(zero_hat) and f_n(one_hat): the images of the attractor hull.
    hull0: Vec<Scalar>,
    hull1: Vec<Scalar>,
    lipschitz: f64,
    tol: Tolerances,
    exact: bool,
}

impl ContractionSystem {
    pub fn new(maps: Vec<ContractionMap>) -> Result<Self> {
        Self::with_tolerances(maps, Tolerances::default())
    }

    pub fn with_tolerances(maps: Vec<ContractionMap>, tol: Tolerances) -> Result<Self> {
        if maps.len() < 2 {
            return Err(Error::TooFewMaps(maps.len()));
        }
        let exact = maps.iter().all(ContractionMap::is_affine);
        let at0: Vec<Scalar> = maps.iter().map(|m| m.apply(&Scalar::zero())).collect();
        let at1: Vec<Scalar> = maps.iter().map(|m| m.apply(&Scalar::one())).collect();
        let n_top = maps.len() - 1;

        let zero = Scalar::zero();
        let one = Scalar::one();
        if at0[0] < zero {
            return Err(Error::OrderingViolation(format!(
                "f_0(0) = {} is below 0",
                at0[0]
            )));
        }
        if at1[n_top] > one {
            return Err(Error::OrderingViolation(format!(
                "f_{n_top}(1) = {} is above 1",
                at1[n_top]
            )));
        }
        for n in 0..=n_top {
            if at0[n] >= at1[n] {
                return Err(Error::OrderingViolation(format!(
                    "map {n} has a degenerate image [{}, {}]",
                    at0[n], at1[n]
                )));
            }
            if n < n_top && at1[n] > at0[n + 1] {
                return Err(Error::OrderingViolation(format!(
                    "images of maps {n} and {} overlap: f_{n}(1) = {} > {} = f_{}(0)",
                    n + 1,
                    at1[n],
                    at0[n + 1],
                    n + 1
                )));
            }
        }

        // The images must leave a hole somewhere, otherwise the attractor
        // is all of [0, 1] and there is nothing to study. Exact systems
        // are checked exactly; float systems need slack beyond tol.fix so
        // that a hairline opening is not mistaken for a real one.
        let mut slack = &at0[0] - &zero;
        slack = slack.max(&one - &at1[n_top]);
        for n in 0..n_top {
            slack = slack.max(&at0[n + 1] - &at1[n]);
        }
        let covered = if exact {
            slack <= zero
        } else {
            slack.to_f64() <= tol.fix
        };
        if covered {
            return Err(Error::CoverViolation);
        }

        let lipschitz = maps
            .iter()
            .map(ContractionMap::lipschitz)
            .fold(0.0_f64, f64::max);

        let zero_hat = extremal_fixed_point(&maps[0], false, tol.fix)?;
        let one_hat = extremal_fixed_point(&maps[n_top], true, tol.fix)?;
        let hull0: Vec<Scalar> = maps.iter().map(|m| m.apply(&zero_hat)).collect();
        let hull1: Vec<Scalar> = maps.iter().map(|m| m.apply(&one_hat)).collect();

        Ok(ContractionSystem {
            maps,
            at0,
            at1,
            zero_hat,
            one_hat,
            hull0,
            hull1,
            lipschitz,
            tol,
            exact,
        })
    }

    /// Number of maps, N + 1.
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The largest digit N.
    pub fn top_digit(&self) -> u8 {
        (self.maps.len() - 1) as u8
    }

    pub fn map(&self, n: usize) -> &ContractionMap {
        &self.maps[n]
    }

    pub fn maps(&self) -> &[ContractionMap] {
        &self.maps
    }

    /// f_n(0).
    pub fn left_end(&self, n: usize) -> &Scalar {
        &self.at0[n]
    }

    /// f_n(1).
    pub fn right_end(&self, n: usize) -> &Scalar {
        &self.at1[n]
    }

    /// f_n(0-hat), the left end of the n-th image of the attractor hull.
    pub fn hull_left(&self, n: usize) -> &Scalar {
        &self.hull0[n]
    }

    /// f_n(1-hat), the right end of the n-th image of the attractor hull.
    pub fn hull_right(&self, n: usize) -> &Scalar {
        &self.hull1[n]
    }

    /// The extremal fixed points (0-hat, 1-hat): the fixed point of the
    /// first map and of the last, which are the smallest and largest
    /// points of the attractor.
    pub fn extremal_fixed_points(&self) -> (&Scalar, &Scalar) {
        (&self.zero_hat, &self.one_hat)
    }

    pub fn zero_hat(&self) -> &Scalar {
        &self.zero_hat
    }

    pub fn one_hat(&self) -> &Scalar {
        &self.one_hat
    }

    /// Largest Lipschitz bound among the maps.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    /// True when every map is affine, so the whole computation can run in
    /// exact rational arithmetic.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// 1 minus the sum of the slopes, for all-affine systems: the total
    /// length removed from an interval by one application of the family.
    /// The level-k cover then has total length (1 - d)^k.
    pub fn contraction_deficit(&self) -> Option<Scalar> {
        let mut total = BigRational::zero();
        for m in &self.maps {
            total += m.as_affine()?.slope();
        }
        Some(Scalar::Exact(BigRational::one() - total))
    }

    pub fn digit_in_range(&self, digit: u8) -> Result<()> {
        if usize::from(digit) < self.maps.len() {
            Ok(())
        } else {
            Err(Error::DigitOutOfRange {
                digit,
                max: self.top_digit(),
            })
        }
    }

    /// Apply the composition f_{d_1} o ... o f_{d_k} (first digit acts
    /// last) to a value.
    pub fn apply_digits(&self, digits: &[u8], x: &Scalar) -> Result<Scalar> {
        let mut v = x.clone();
        for &d in digits.iter().rev() {
            self.digit_in_range(d)?;
            v = self.maps[usize::from(d)].apply(&v);
        }
        Ok(v)
    }

    /// The composition along a digit string as a single map.
    pub fn compose_digits(&self, digits: &[u8]) -> Result<ContractionMap> {
        let mut chain = Vec::with_capacity(digits.len());
        for &d in digits {
            self.digit_in_range(d)?;
            chain.push(self.maps[usize::from(d)].clone());
        }
        Ok(compose(&chain))
    }

    /// Whether `y` lies below, inside, between, or above the closed
    /// intervals `[lo_n, hi_n]`, which are assumed ordered. Ties at a
    /// shared endpoint go to the larger index. A positive `slack` widens
    /// every interval, for float inputs that carry roundoff.
    pub(crate) fn position_among(
        &self,
        y: &Scalar,
        lo: &[Scalar],
        hi: &[Scalar],
        slack: f64,
    ) -> Position {
        let n_top = lo.len() - 1;
        if slack > 0.0 {
            let yf = y.to_f64();
            for n in (0..=n_top).rev() {
                if yf >= lo[n].to_f64() - slack && yf <= hi[n].to_f64() + slack {
                    return Position::Inside(n);
                }
            }
            if yf < lo[0].to_f64() {
                return Position::Below;
            }
            if yf > hi[n_top].to_f64() {
                return Position::Above;
            }
            for n in 0..n_top {
                if yf > hi[n].to_f64() && yf < lo[n + 1].to_f64() {
                    return Position::Between(n);
                }
            }
            unreachable!("ordered intervals leave no other position");
        } else {
            for n in (0..=n_top).rev() {
                if *y >= lo[n] && *y <= hi[n] {
                    return Position::Inside(n);
                }
            }
            if *y < lo[0] {
                return Position::Below;
            }
            if *y > hi[n_top] {
                return Position::Above;
            }
            for n in 0..n_top {
                if *y > hi[n] && *y < lo[n + 1] {
                    return Position::Between(n);
                }
            }
            unreachable!("ordered intervals leave no other position");
        }
    }

    /// Position of `y` relative to the hull images f_n([0-hat, 1-hat]).
    pub(crate) fn position_in_hull_images(&self, y: &Scalar, slack: f64) -> Position {
        self.position_among(y, &self.hull0, &self.hull1, slack)
    }

    /// Slack to use for membership decisions on a given input: exact
    /// values in an exact system are decided exactly, everything else gets
    /// the tie tolerance.
    pub(crate) fn decision_slack(&self, y: &Scalar) -> f64 {
        if self.exact && y.is_exact() {
            0.0
        } else {
            self.tol.fix
        }
    }
}

impl PartialEq for ContractionSystem {
    /// Structural equality for affine maps; identity of the callable for
    /// general maps.
    fn eq(&self, other: &Self) -> bool {
        self.maps.len() == other.maps.len()
            && self.maps.iter().zip(&other.maps).all(|(a, b)| match (a, b) {
                (ContractionMap::Affine(a), ContractionMap::Affine(b)) => {
                    a.slope == b.slope && a.intercept == b.intercept
                }
                (ContractionMap::General(a), ContractionMap::General(b)) => {
                    Arc::ptr_eq(&a.f, &b.f)
                }
                _ => false,
            })
    }
}

/// Fixed point of a single contraction, approached from 0 or from 1.
/// Affine maps get the closed form b / (1 - a); general maps iterate.
fn extremal_fixed_point(map: &ContractionMap, from_one: bool, tol: f64) -> Result<Scalar> {
    match map {
        ContractionMap::Affine(m) => {
            let x = &m.intercept / (BigRational::one() - &m.slope);
            Ok(Scalar::Exact(x))
        }
        ContractionMap::General(_) => {
            let mut x = if from_one { 1.0 } else { 0.0 };
            for _ in 0..FIXED_POINT_ITERATIONS {
                let next = map.apply_f64(x);
                if (next - x).abs() <= tol {
                    return Ok(Scalar::Approx(next));
                }
                x = next;
            }
            Err(Error::BadMap(format!(
                "fixed-point iteration did not settle within {FIXED_POINT_ITERATIONS} steps (map {})",
                match map {
                    ContractionMap::General(m) => m.label.as_str(),
                    ContractionMap::Affine(_) => unreachable!(),
                }
            )))
        }
    }
}
