//! Geometry of the attractor: nested level sets, the gap decomposition,
//! and pointwise location.
//!
//! The attractor of a gapped system is the intersection of the nested
//! covers A_0 = [0, 1], A_k = union of f_n(A_{k-1}). It is a Cantor-like
//! set: compact, perfect, nowhere dense. Its complement inside the hull
//! [0-hat, 1-hat] is a countable union of open gaps, each indexed by the
//! digit string of the cylinder it punctures, and the two flanks [0, 0-hat]
//! and [1-hat, 1] fall off the ends.
//!
//! All endpoint arithmetic runs on [`Scalar`], so for affine systems the
//! level sets and gaps come out exact.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::coding::{pi, Address};
use crate::contraction::{ContractionSystem, Position};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Hard cap on the number of intervals, gaps, or cylinders any single
/// enumeration may produce.
pub const ENUMERATION_CAP: usize = 1 << 20;

/// A finite union of closed, ordered, pairwise disjoint intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalSet {
    spans: Vec<(Scalar, Scalar)>,
}

impl IntervalSet {
    pub(crate) fn from_spans(spans: Vec<(Scalar, Scalar)>) -> Self {
        debug_assert!(spans.iter().all(|(a, b)| a <= b));
        debug_assert!(spans.windows(2).all(|w| w[0].1 < w[1].0));
        IntervalSet { spans }
    }

    /// The whole unit interval.
    pub fn unit() -> Self {
        IntervalSet {
            spans: vec![(Scalar::zero(), Scalar::one())],
        }
    }

    pub fn spans(&self) -> &[(Scalar, Scalar)] {
        &self.spans
    }

    pub fn count(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn total_length(&self) -> Scalar {
        let mut sum = Scalar::zero();
        for (a, b) in &self.spans {
            sum = &sum + &(b - a);
        }
        sum
    }

    pub fn contains_point(&self, x: &Scalar) -> bool {
        self.spans.iter().any(|(a, b)| a <= x && x <= b)
    }

    /// Every interval of `self` is contained in an interval of `other`.
    pub fn is_subset_of(&self, other: &IntervalSet) -> bool {
        self.spans
            .iter()
            .all(|(a, b)| other.spans.iter().any(|(c, d)| c <= a && b <= d))
    }

    pub fn to_f64_spans(&self) -> Vec<(f64, f64)> {
        self.spans
            .iter()
            .map(|(a, b)| (a.to_f64(), b.to_f64()))
            .collect()
    }
}

/// The level-k cover A_k of the attractor, as a union of at most
/// (N+1)^k intervals with touching neighbours merged.
pub fn level_set(system: &ContractionSystem, k: usize) -> Result<IntervalSet> {
    guard_enumeration(system.len(), k, "level set")?;
    // Float systems seed in the float lane: an exact seed would leave
    // affine images exact at level 1 but float from level 2 on, and the
    // two spellings of one endpoint differ by an ulp, which the exact
    // span comparisons in is_subset_of would read as an overhang.
    let mut spans = if system.is_exact() {
        vec![(Scalar::zero(), Scalar::one())]
    } else {
        vec![(Scalar::approx(0.0), Scalar::approx(1.0))]
    };
    for _ in 0..k {
        let mut next: Vec<(Scalar, Scalar)> = Vec::with_capacity(spans.len() * system.len());
        for n in 0..system.len() {
            let map = system.map(n);
            for (a, b) in &spans {
                let lo = map.apply(a);
                let hi = map.apply(b);
                match next.last_mut() {
                    Some(prev) if touches(&prev.1, &lo, system) => {
                        prev.1 = hi;
                    }
                    _ => next.push((lo, hi)),
                }
            }
        }
        spans = next;
    }
    Ok(IntervalSet::from_spans(spans))
}

/// Total length of the level-k cover; an upper bound for the Lebesgue
/// measure of the attractor, exact for affine systems.
pub fn measure_bound(system: &ContractionSystem, k: usize) -> Result<Scalar> {
    Ok(level_set(system, k)?.total_length())
}

fn touches(prev_hi: &Scalar, next_lo: &Scalar, system: &ContractionSystem) -> bool {
    if system.is_exact() {
        prev_hi >= next_lo
    } else {
        next_lo.to_f64() - prev_hi.to_f64() <= system.tolerances().fix
    }
}

pub(crate) fn guard_enumeration(base: usize, depth: usize, what: &'static str) -> Result<usize> {
    let mut count: usize = 1;
    for _ in 0..depth {
        count = count
            .checked_mul(base)
            .filter(|c| *c <= ENUMERATION_CAP)
            .ok_or(Error::DepthTooLarge {
                what,
                depth,
                cap: ENUMERATION_CAP,
            })?;
    }
    Ok(count)
}

/// One open gap of the attractor: the hole punched between the images of
/// consecutive digits inside the cylinder `digits[..len-1]`, recorded with
/// the digit string whose last entry names the map on its left.
#[derive(Clone, Debug, PartialEq)]
pub struct Gap {
    pub digits: Vec<u8>,
    pub left: Scalar,
    pub right: Scalar,
}

impl Gap {
    pub fn depth(&self) -> usize {
        self.digits.len()
    }

    pub fn length(&self) -> Scalar {
        &self.right - &self.left
    }

    pub fn midpoint(&self) -> Scalar {
        Scalar::midpoint(&self.left, &self.right)
    }
}

/// The gap decomposition of [0, 1] minus the attractor, down to a given
/// depth: the two flanks plus every open gap indexed by a digit string of
/// that length or shorter.
#[derive(Clone, Debug)]
pub struct GapDecomposition {
    /// [0, 0-hat]; degenerate when f_0 fixes 0.
    pub left_flank: (Scalar, Scalar),
    /// [1-hat, 1]; degenerate when f_N fixes 1.
    pub right_flank: (Scalar, Scalar),
    /// Listed by depth, then lexicographically by digits. Pairwise
    /// disjoint; empty candidates (at touching images) are dropped.
    pub gaps: Vec<Gap>,
}

impl GapDecomposition {
    /// Gaps of one fixed depth.
    pub fn at_depth(&self, depth: usize) -> impl Iterator<Item = &Gap> {
        self.gaps.iter().filter(move |g| g.depth() == depth)
    }
}

/// Enumerate all gaps of depth at most `max_depth`.
///
/// A depth-1 gap sits between the hull images of consecutive maps; a
/// deeper gap is the image of a shallower one under a member map. Empty
/// candidates, which arise where consecutive images touch, are dropped at
/// the seed level, so their (equally empty) descendants are never visited.
pub fn gaps(system: &ContractionSystem, max_depth: usize) -> Result<GapDecomposition> {
    // Total candidates: sum over d <= max_depth of N * (N+1)^(d-1).
    let mut total: usize = 0;
    let mut level_count = system.len() - 1;
    for d in 1..=max_depth {
        total = total
            .checked_add(level_count)
            .filter(|t| *t <= ENUMERATION_CAP)
            .ok_or(Error::DepthTooLarge {
                what: "gap enumeration",
                depth: d,
                cap: ENUMERATION_CAP,
            })?;
        level_count = level_count
            .checked_mul(system.len())
            .ok_or(Error::DepthTooLarge {
                what: "gap enumeration",
                depth: d,
                cap: ENUMERATION_CAP,
            })?;
    }

    let mut gaps: Vec<Gap> = Vec::new();
    let mut level: Vec<Gap> = Vec::new();
    if max_depth >= 1 {
        for n in 0..system.len() - 1 {
            let left = system.hull_right(n).clone();
            let right = system.hull_left(n + 1).clone();
            let gap = Gap {
                digits: vec![n as u8],
                left,
                right,
            };
            if is_genuine(&gap, system) {
                level.push(gap);
            }
        }
        gaps.extend(level.iter().cloned());
    }
    for _ in 2..=max_depth {
        let mut next: Vec<Gap> = Vec::with_capacity(level.len() * system.len());
        for n in 0..system.len() {
            let map = system.map(n);
            for g in &level {
                let mut digits = Vec::with_capacity(g.digits.len() + 1);
                digits.push(n as u8);
                digits.extend_from_slice(&g.digits);
                next.push(Gap {
                    digits,
                    left: map.apply(&g.left),
                    right: map.apply(&g.right),
                });
            }
        }
        gaps.extend(next.iter().cloned());
        level = next;
    }

    let (zero_hat, one_hat) = system.extremal_fixed_points();
    Ok(GapDecomposition {
        left_flank: (Scalar::zero(), zero_hat.clone()),
        right_flank: (one_hat.clone(), Scalar::one()),
        gaps,
    })
}

fn is_genuine(gap: &Gap, system: &ContractionSystem) -> bool {
    if system.is_exact() {
        gap.left < gap.right
    } else {
        gap.right.to_f64() - gap.left.to_f64() > system.tolerances().fix
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Verdict of [`locate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Location {
    /// In [0, 0-hat] or [1-hat, 1].
    InFlank(Side),
    /// In an open gap, identified by its digit string.
    InGap(Gap),
    /// Certified on the attractor: the descent hit an extremal fixed
    /// point, so the point is the limit of the recorded digits followed
    /// by a constant tail.
    InAttractorCylinder(Vec<u8>),
    /// Still inside the depth-`max_depth` cylinder with these digits when
    /// the budget ran out. The expected outcome for attractor points with
    /// no eventually-constant address.
    Undecided(Vec<u8>),
}

/// Decide where `x` lies relative to the attractor, descending at most
/// `max_depth` cylinder levels.
pub fn locate(system: &ContractionSystem, x: &Scalar, max_depth: usize) -> Result<Location> {
    if *x < Scalar::zero() || *x > Scalar::one() {
        return Err(Error::DomainError(x.to_f64()));
    }
    if x <= system.zero_hat() {
        return Ok(Location::InFlank(Side::Left));
    }
    if x >= system.one_hat() {
        return Ok(Location::InFlank(Side::Right));
    }
    let slack = system.decision_slack(x);
    let mut digits: Vec<u8> = Vec::new();
    let mut y = x.clone();
    loop {
        if !digits.is_empty() && near(&y, system.zero_hat(), slack)
            || !digits.is_empty() && near(&y, system.one_hat(), slack)
        {
            return Ok(Location::InAttractorCylinder(digits));
        }
        if digits.len() == max_depth {
            return Ok(Location::Undecided(digits));
        }
        match system.position_in_hull_images(&y, slack) {
            Position::Inside(n) => {
                y = system.map(n).invert(&y, system.tolerances().inv)?;
                y = clamp_to_hull(y, system);
                digits.push(n as u8);
            }
            Position::Between(n) => {
                let left = system.apply_digits(&digits, system.hull_right(n))?;
                let right = system.apply_digits(&digits, system.hull_left(n + 1))?;
                let mut gap_digits = digits;
                gap_digits.push(n as u8);
                return Ok(Location::InGap(Gap {
                    digits: gap_digits,
                    left,
                    right,
                }));
            }
            // Unreachable for exact input; float roundoff can push a
            // residual just past a hull end, which means the point rides
            // an extremal fixed point to working precision.
            Position::Below | Position::Above => {
                return Ok(Location::InAttractorCylinder(digits));
            }
        }
    }
}

fn near(y: &Scalar, target: &Scalar, slack: f64) -> bool {
    if slack == 0.0 {
        y == target
    } else {
        (y.to_f64() - target.to_f64()).abs() <= slack
    }
}

fn clamp_to_hull(y: Scalar, system: &ContractionSystem) -> Scalar {
    if y < *system.zero_hat() {
        system.zero_hat().clone()
    } else if y > *system.one_hat() {
        system.one_hat().clone()
    } else {
        y
    }
}

/// Witness that the attractor has no isolated points: a second attractor
/// point strictly within any requested distance of a given one.
#[derive(Clone, Debug)]
pub struct PerfectnessWitness {
    /// 1-based index of the flipped digit.
    pub flip_index: usize,
    /// The address with one digit flipped.
    pub flipped: Address,
    /// The point coded by the input address.
    pub base: Scalar,
    /// The nearby distinct attractor point.
    pub witness: Scalar,
}

impl PerfectnessWitness {
    pub fn separation(&self) -> f64 {
        (&self.witness - &self.base).abs().to_f64()
    }
}

/// Produce a distinct attractor point within `epsilon` of the point coded
/// by `address`.
///
/// Two points whose addresses first differ at position m are at most
/// L^(m-1) apart, so it suffices to flip the digit at the first position
/// m with L^(m-1) < epsilon; the flip adds 1 modulo the digit count. A
/// truncated address is completed with zeros first.
pub fn perfectness_probe(
    system: &ContractionSystem,
    address: &Address,
    epsilon: f64,
) -> Result<PerfectnessWitness> {
    if !(epsilon > 0.0) {
        return Err(Error::BadEpsilon(epsilon));
    }
    for &d in address.prefix() {
        system.digit_in_range(d)?;
    }
    let lip = system.lipschitz();
    let mut m = 1usize;
    let mut scale = 1.0_f64;
    while scale >= epsilon {
        scale *= lip;
        m += 1;
        if m > 100_000 {
            return Err(Error::DepthTooLarge {
                what: "perfectness probe",
                depth: m,
                cap: 100_000,
            });
        }
    }

    let top = system.top_digit();
    let base_address = address.completed();
    let old = base_address
        .digit_at(m - 1, top)
        .expect("completed addresses have digits everywhere");
    let flip = (old + 1) % (top + 1);

    let mut prefix: Vec<u8> = (0..m - 1)
        .map(|i| {
            base_address
                .digit_at(i, top)
                .expect("completed addresses have digits everywhere")
        })
        .collect();
    prefix.push(flip);
    let tail = if m <= base_address.prefix().len() {
        prefix.extend_from_slice(&base_address.prefix()[m..]);
        base_address.tail()
    } else {
        base_address.tail()
    };
    let flipped = Address::new(prefix, tail);

    let base = pi(system, &base_address)?.value;
    let witness = pi(system, &flipped)?.value;
    Ok(PerfectnessWitness {
        flip_index: m,
        flipped,
        base,
        witness,
    })
}

/// Visit every depth-k cylinder in lexicographic digit order, with its
/// realization [f_digits(0), f_digits(1)] over the unit interval.
pub(crate) fn walk_cylinders(
    system: &ContractionSystem,
    depth: usize,
    visit: &mut dyn FnMut(&[u8], Scalar, Scalar),
) -> Result<()> {
    guard_enumeration(system.len(), depth, "cylinder enumeration")?;
    enum Composed {
        Exact(BigRational, BigRational),
        Approx,
    }
    fn recurse(
        system: &ContractionSystem,
        remaining: usize,
        digits: &mut Vec<u8>,
        pre: &Composed,
        visit: &mut dyn FnMut(&[u8], Scalar, Scalar),
    ) {
        if remaining == 0 {
            let (lo, hi) = match pre {
                Composed::Exact(a, b) => (Scalar::Exact(b.clone()), Scalar::Exact(a + b)),
                Composed::Approx => {
                    let fold = |x: f64| {
                        digits
                            .iter()
                            .rev()
                            .fold(x, |v, &d| system.map(usize::from(d)).apply_f64(v))
                    };
                    (Scalar::approx(fold(0.0)), Scalar::approx(fold(1.0)))
                }
            };
            visit(digits, lo, hi);
            return;
        }
        for n in 0..system.len() {
            let child = match pre {
                Composed::Exact(a, b) => {
                    let m = system.map(n).as_affine().expect("exact walk is all affine");
                    Composed::Exact(a * m.slope(), a * m.intercept() + b)
                }
                Composed::Approx => Composed::Approx,
            };
            digits.push(n as u8);
            recurse(system, remaining - 1, digits, &child, visit);
            digits.pop();
        }
    }
    let root = if system.is_exact() {
        Composed::Exact(BigRational::one(), BigRational::zero())
    } else {
        Composed::Approx
    };
    recurse(system, depth, &mut Vec::new(), &root, visit);
    Ok(())
}
