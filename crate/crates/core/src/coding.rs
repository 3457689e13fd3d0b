//! Symbolic coding of attractor points.
//!
//! Every point of the attractor is the limit of a digit string
//! (x_1, x_2, ...) through the coding map
//!
//! ```text
//! pi((x_k)) = lim_k f_{x_1} o ... o f_{x_k}(0),
//! ```
//!
//! and the transfer map T, which peels off the leading digit by applying
//! the inverse branch the point sits in, makes pi intertwine the digit
//! shift with T. The coding is one-to-one except where consecutive images
//! touch at a shared endpoint *and* the attractor reaches 0 and 1: then a
//! string ending in (n, N, N, ...) with f_n(1) = f_{n+1}(0) names the same
//! point as (n+1, 0, 0, ...), and [`canonicalize`] rewrites the former to
//! the latter.
//!
//! Addresses are stored as a finite digit prefix plus a tail marker: the
//! all-zeros tail, the all-top-digit tail, or a truncation marker for
//! points only known to cylinder precision.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::contraction::{ContractionSystem, Position};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tail of an address beyond its stored prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    /// Digits continue as 0, 0, 0, ...: the point f_prefix(0-hat).
    Constant0,
    /// Digits continue as N, N, N, ...: the point f_prefix(1-hat).
    ConstantN,
    /// Digits beyond the prefix are unknown.
    Truncated,
}

/// A symbolic address: digit prefix plus tail marker.
///
/// Equality is structural; use [`Address::normalized`] (or the functions
/// here, which normalize their output) before comparing addresses that
/// may spell the same digit stream differently, e.g. `2^N` vs `^N` in a
/// three-map system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Address {
    prefix: Vec<u8>,
    tail: Tail,
}

impl Address {
    pub fn new(prefix: Vec<u8>, tail: Tail) -> Self {
        Address { prefix, tail }
    }

    pub fn truncated(prefix: Vec<u8>) -> Self {
        Address {
            prefix,
            tail: Tail::Truncated,
        }
    }

    pub fn prefix(&self) -> &[u8] {
        &self.prefix
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn has_exact_tail(&self) -> bool {
        !matches!(self.tail, Tail::Truncated)
    }

    /// Digit at a 0-based position, reading into the tail; `None` beyond
    /// the prefix of a truncated address.
    pub fn digit_at(&self, index: usize, top: u8) -> Option<u8> {
        if index < self.prefix.len() {
            return Some(self.prefix[index]);
        }
        match self.tail {
            Tail::Constant0 => Some(0),
            Tail::ConstantN => Some(top),
            Tail::Truncated => None,
        }
    }

    /// The same digit stream with redundant trailing digits folded into
    /// the tail marker: `(1, 0, 0 | ^0)` becomes `(1 | ^0)`.
    pub fn normalized(&self, top: u8) -> Address {
        let strip = match self.tail {
            Tail::Constant0 => 0u8,
            Tail::ConstantN => top,
            Tail::Truncated => return self.clone(),
        };
        let mut prefix = self.prefix.clone();
        while prefix.last() == Some(&strip) {
            prefix.pop();
        }
        Address {
            prefix,
            tail: self.tail,
        }
    }

    /// A truncated address completed with zeros; exact tails are kept.
    pub fn completed(&self) -> Address {
        match self.tail {
            Tail::Truncated => Address {
                prefix: self.prefix.clone(),
                tail: Tail::Constant0,
            },
            _ => self.clone(),
        }
    }
}

impl fmt::Display for Address {
    /// Digits joined by `.`, then `^0`, `^N`, or `^?`: e.g. `0.1.0.1^?`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.prefix.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{d}")?;
        }
        match self.tail {
            Tail::Constant0 => write!(f, "^0"),
            Tail::ConstantN => write!(f, "^N"),
            Tail::Truncated => write!(f, "^?"),
        }
    }
}

impl FromStr for Address {
    type Err = Error;

    fn from_str(s: &str) -> Result<Address> {
        let (digits, tail) = s
            .rsplit_once('^')
            .ok_or_else(|| Error::AddressParse(format!("missing ^ tail marker in {s:?}")))?;
        let tail = match tail {
            "0" => Tail::Constant0,
            "N" => Tail::ConstantN,
            "?" => Tail::Truncated,
            other => {
                return Err(Error::AddressParse(format!(
                    "tail must be 0, N or ?, got {other:?}"
                )))
            }
        };
        let mut prefix = Vec::new();
        if !digits.is_empty() {
            for part in digits.split('.') {
                let d: u8 = part
                    .parse()
                    .map_err(|_| Error::AddressParse(format!("bad digit {part:?} in {s:?}")))?;
                prefix.push(d);
            }
        }
        Ok(Address { prefix, tail })
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Which consecutive images share an endpoint, and whether that actually
/// makes the coding ambiguous.
///
/// Ambiguity needs the shared endpoints to belong to the attractor, which
/// happens exactly when f_0 fixes 0 and f_N fixes 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AmbiguityTable {
    /// Digits n with f_n(1) = f_{n+1}(0).
    pub touching: Vec<u8>,
    /// True when the touching points carry two addresses each.
    pub active: bool,
}

impl AmbiguityTable {
    pub fn is_touching(&self, digit: u8) -> bool {
        self.touching.contains(&digit)
    }
}

/// Detect shared endpoints between consecutive images.
pub fn ambiguity(system: &ContractionSystem) -> AmbiguityTable {
    let tol = system.tolerances().fix;
    let close = |a: &Scalar, b: &Scalar| {
        if system.is_exact() {
            a == b
        } else {
            (a.to_f64() - b.to_f64()).abs() <= tol
        }
    };
    let mut touching = Vec::new();
    for n in 0..system.len() - 1 {
        if close(system.right_end(n), system.left_end(n + 1)) {
            touching.push(n as u8);
        }
    }
    let active = !touching.is_empty()
        && close(system.left_end(0), &Scalar::zero())
        && close(system.right_end(system.len() - 1), &Scalar::one());
    AmbiguityTable { touching, active }
}

/// One step of the transfer map: the digit of the hull image containing
/// `y` (ties at shared endpoints resolve to the larger digit) and the
/// preimage under that branch.
pub fn transfer(system: &ContractionSystem, y: &Scalar) -> Result<(u8, Scalar)> {
    let slack = system.decision_slack(y);
    match system.position_in_hull_images(y, slack) {
        Position::Inside(n) => {
            let back = system.map(n).invert(y, system.tolerances().inv)?;
            let back = clamp_hull(back, system);
            Ok((n as u8, back))
        }
        _ => Err(Error::NotInAttractor(y.to_f64())),
    }
}

fn clamp_hull(y: Scalar, system: &ContractionSystem) -> Scalar {
    if y < *system.zero_hat() {
        system.zero_hat().clone()
    } else if y > *system.one_hat() {
        system.one_hat().clone()
    } else {
        y
    }
}

fn near(y: &Scalar, target: &Scalar, slack: f64) -> bool {
    if slack == 0.0 {
        y == target
    } else {
        (y.to_f64() - target.to_f64()).abs() <= slack
    }
}

/// Read off the address of an attractor point by iterating the transfer
/// map, stopping with an exact tail when the orbit lands on an extremal
/// fixed point and with a truncated address after `max_depth` digits.
///
/// Points in a gap or flank (beyond tolerance) are refused.
pub fn extract_address(
    system: &ContractionSystem,
    x: &Scalar,
    max_depth: usize,
) -> Result<Address> {
    if *x < Scalar::zero() || *x > Scalar::one() {
        return Err(Error::DomainError(x.to_f64()));
    }
    let slack = system.decision_slack(x);
    let top = system.top_digit();
    let mut digits = Vec::new();
    let mut y = x.clone();
    loop {
        if near(&y, system.zero_hat(), slack) {
            return Ok(Address::new(digits, Tail::Constant0).normalized(top));
        }
        if near(&y, system.one_hat(), slack) {
            return Ok(Address::new(digits, Tail::ConstantN).normalized(top));
        }
        if digits.len() == max_depth {
            return Ok(Address::truncated(digits));
        }
        let (d, back) = transfer(system, &y)?;
        digits.push(d);
        y = back;
    }
}

/// Value of the coding map, with a rigorous error bound.
///
/// Exact tails give the limit point itself (error 0): the prefix applied
/// to the matching extremal fixed point. A truncated address gives the
/// midpoint of its cylinder with error half the cylinder length.
#[derive(Clone, Debug, PartialEq)]
pub struct PointApprox {
    pub value: Scalar,
    pub error: Scalar,
}

pub fn pi(system: &ContractionSystem, address: &Address) -> Result<PointApprox> {
    for &d in address.prefix() {
        system.digit_in_range(d)?;
    }
    match address.tail() {
        Tail::Constant0 => Ok(PointApprox {
            value: system.apply_digits(address.prefix(), system.zero_hat())?,
            error: Scalar::zero(),
        }),
        Tail::ConstantN => Ok(PointApprox {
            value: system.apply_digits(address.prefix(), system.one_hat())?,
            error: Scalar::zero(),
        }),
        Tail::Truncated => {
            let lo = system.apply_digits(address.prefix(), &Scalar::zero())?;
            let hi = system.apply_digits(address.prefix(), &Scalar::one())?;
            Ok(PointApprox {
                value: Scalar::midpoint(&lo, &hi),
                error: &Scalar::midpoint(&lo, &hi) - &lo,
            })
        }
    }
}

/// Drop the leading digit. Constant tails shift to themselves; a
/// truncated address with nothing stored cannot be shifted.
pub fn shift(address: &Address) -> Result<Address> {
    if address.prefix().is_empty() {
        return match address.tail() {
            Tail::Truncated => Err(Error::EmptyTruncated),
            _ => Ok(address.clone()),
        };
    }
    Ok(Address::new(
        address.prefix()[1..].to_vec(),
        address.tail(),
    ))
}

/// Maximum deviation |pi(shift^j a) - T^j(pi a)| over j = 0..=n.
///
/// The address must have an exact tail, and for meaningful output it
/// should be the canonical spelling of its point (the transfer map always
/// follows the larger digit at an ambiguous point).
pub fn commute_check(system: &ContractionSystem, address: &Address, n: usize) -> Result<f64> {
    if !address.has_exact_tail() {
        return Err(Error::TruncatedAddress);
    }
    let mut sym = address.clone();
    let mut geo = pi(system, address)?.value;
    let mut worst = 0.0_f64;
    for _ in 0..n {
        sym = shift(&sym)?;
        geo = transfer(system, &geo)?.1;
        let here = pi(system, &sym)?.value;
        worst = worst.max((&here - &geo).abs().to_f64());
    }
    Ok(worst)
}

/// Rewrite the non-canonical spelling of a doubly-coded point: a prefix
/// ending in a touching digit followed by the all-N tail becomes the next
/// digit up followed by the all-zeros tail. Everything else (including
/// every address when the ambiguity is inactive) is only normalized.
pub fn canonicalize(system: &ContractionSystem, address: &Address) -> Result<Address> {
    for &d in address.prefix() {
        system.digit_in_range(d)?;
    }
    let top = system.top_digit();
    let a = address.normalized(top);
    if a.tail() != Tail::ConstantN {
        return Ok(a);
    }
    let table = ambiguity(system);
    if !table.active {
        return Ok(a);
    }
    let Some(&last) = a.prefix().last() else {
        return Ok(a);
    };
    if !table.is_touching(last) {
        return Ok(a);
    }
    let mut prefix = a.prefix().to_vec();
    *prefix.last_mut().expect("nonempty checked above") = last + 1;
    Ok(Address::new(prefix, Tail::Constant0).normalized(top))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::ContractionMap;
    use num_rational::BigRational;
    use num_traits::Zero;

    fn cantor() -> ContractionSystem {
        ContractionSystem::new(vec![
            ContractionMap::affine_exact(
                BigRational::new(1.into(), 3.into()),
                BigRational::zero(),
            )
            .unwrap(),
            ContractionMap::affine_exact(
                BigRational::new(1.into(), 3.into()),
                BigRational::new(2.into(), 3.into()),
            )
            .unwrap(),
        ])
        .unwrap()
    }

    fn touching() -> ContractionSystem {
        let q = || BigRational::new(1.into(), 4.into());
        ContractionSystem::new(vec![
            ContractionMap::affine_exact(q(), BigRational::zero()).unwrap(),
            ContractionMap::affine_exact(q(), BigRational::new(1.into(), 4.into())).unwrap(),
            ContractionMap::affine_exact(q(), BigRational::new(3.into(), 4.into())).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn display_and_parse_round_trip() {
        for text in ["0.1.0.1^?", "^0", "1^N", "2.0^N"] {
            let a: Address = text.parse().unwrap();
            assert_eq!(a.to_string(), text);
        }
        assert!("0.1".parse::<Address>().is_err());
        assert!("0.x^0".parse::<Address>().is_err());
    }

    #[test]
    fn transfer_follows_the_containing_branch() {
        let s = cantor();
        let (d, y) = transfer(&s, &Scalar::ratio(1, 4)).unwrap();
        assert_eq!(d, 0);
        assert_eq!(y, Scalar::ratio(3, 4));
    }

    #[test]
    fn transfer_prefers_the_larger_digit_at_touching_points() {
        let s = touching();
        let (d, y) = transfer(&s, &Scalar::ratio(1, 4)).unwrap();
        assert_eq!(d, 1);
        assert_eq!(y, Scalar::zero());
    }

    #[test]
    fn transfer_refuses_gap_points() {
        let s = cantor();
        let r = transfer(&s, &Scalar::ratio(1, 2));
        assert!(matches!(r, Err(Error::NotInAttractor(_))));
    }

    #[test]
    fn extract_lands_on_exact_tails() {
        let s = cantor();
        let a = extract_address(&s, &Scalar::ratio(2, 3), 16).unwrap();
        assert_eq!(a, Address::new(vec![1], Tail::Constant0));

        let t = touching();
        let a = extract_address(&t, &Scalar::ratio(1, 4), 16).unwrap();
        assert_eq!(a, Address::new(vec![1], Tail::Constant0));
    }

    #[test]
    fn extract_truncates_aperiodic_points() {
        let s = cantor();
        let a = extract_address(&s, &Scalar::ratio(1, 4), 6).unwrap();
        assert_eq!(a, Address::truncated(vec![0, 1, 0, 1, 0, 1]));
    }

    #[test]
    fn pi_inverts_extraction() {
        let s = cantor();
        let a = Address::new(vec![1], Tail::Constant0);
        let p = pi(&s, &a).unwrap();
        assert_eq!(p.value, Scalar::ratio(2, 3));
        assert_eq!(p.error, Scalar::zero());

        let t = touching();
        let a = Address::new(vec![0], Tail::ConstantN);
        assert_eq!(pi(&t, &a).unwrap().value, Scalar::ratio(1, 4));
    }

    #[test]
    fn pi_truncated_gives_cylinder_midpoint() {
        let s = cantor();
        let a = Address::truncated(vec![0, 1]);
        let p = pi(&s, &a).unwrap();
        assert_eq!(p.value, Scalar::ratio(5, 18));
        assert_eq!(p.error, Scalar::ratio(1, 18));
    }

    #[test]
    fn shift_behaviour() {
        let a = Address::new(vec![0, 1], Tail::Constant0);
        assert_eq!(shift(&a).unwrap(), Address::new(vec![1], Tail::Constant0));
        let fixed = Address::new(vec![], Tail::ConstantN);
        assert_eq!(shift(&fixed).unwrap(), fixed);
        assert!(matches!(
            shift(&Address::truncated(vec![])),
            Err(Error::EmptyTruncated)
        ));
    }

    #[test]
    fn ambiguity_tables() {
        let s = cantor();
        let t = ambiguity(&s);
        assert!(t.touching.is_empty());
        assert!(!t.active);

        let s = touching();
        let t = ambiguity(&s);
        assert_eq!(t.touching, vec![0]);
        assert!(t.active);
    }

    #[test]
    fn canonicalize_rewrites_double_codes() {
        let s = touching();
        let a = Address::new(vec![0], Tail::ConstantN);
        assert_eq!(
            canonicalize(&s, &a).unwrap(),
            Address::new(vec![1], Tail::Constant0)
        );
        let a = Address::new(vec![2, 0], Tail::ConstantN);
        assert_eq!(
            canonicalize(&s, &a).unwrap(),
            Address::new(vec![2, 1], Tail::Constant0)
        );
        // Both spellings of 1/4 code the same point.
        let twin = pi(&s, &Address::new(vec![0], Tail::ConstantN)).unwrap();
        let canon = pi(&s, &Address::new(vec![1], Tail::Constant0)).unwrap();
        assert_eq!(twin.value, canon.value);
    }

    #[test]
    fn canonicalize_is_identity_without_active_ambiguity() {
        let s = cantor();
        let a = Address::new(vec![0], Tail::ConstantN);
        assert_eq!(canonicalize(&s, &a).unwrap(), a);
    }

    #[test]
    fn canonicalize_normalizes_spelling() {
        let s = touching();
        // 2^N spells the same stream as ^N.
        let a = Address::new(vec![2], Tail::ConstantN);
        assert_eq!(
            canonicalize(&s, &a).unwrap(),
            Address::new(vec![], Tail::ConstantN)
        );
    }

    #[test]
    fn commute_on_exact_addresses_is_exact() {
        let s = cantor();
        let a = Address::new(vec![0, 1, 0, 1, 0, 1], Tail::ConstantN);
        let dev = commute_check(&s, &a, 6).unwrap();
        assert_eq!(dev, 0.0);
    }

    #[test]
    fn commute_requires_exact_tail() {
        let s = cantor();
        let a = Address::truncated(vec![0, 1]);
        assert!(matches!(
            commute_check(&s, &a, 3),
            Err(Error::TruncatedAddress)
        ));
    }
}
