#![allow(dead_code)]

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use staircase::{ContractionMap, ContractionSystem, ProbabilityVector};

pub fn big(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn system(maps: Vec<ContractionMap>) -> Arc<ContractionSystem> {
    Arc::new(ContractionSystem::new(maps).expect("valid test system"))
}

/// The classic middle-thirds pair x/3 and x/3 + 2/3.
pub fn cantor() -> Arc<ContractionSystem> {
    system(vec![
        ContractionMap::affine_exact(big(1, 3), big(0, 1)).unwrap(),
        ContractionMap::affine_exact(big(1, 3), big(2, 3)).unwrap(),
    ])
}

/// Three quarter-scale maps whose first two images touch at 1/4.
pub fn touching() -> Arc<ContractionSystem> {
    system(vec![
        ContractionMap::affine_exact(big(1, 4), big(0, 1)).unwrap(),
        ContractionMap::affine_exact(big(1, 4), big(1, 4)).unwrap(),
        ContractionMap::affine_exact(big(1, 4), big(3, 4)).unwrap(),
    ])
}

/// A pair with both endpoints free: x/3 + 1/6 and x/3 + 7/12, so the
/// attractor lives in [1/4, 7/8] and both flanks are nondegenerate.
pub fn shifted() -> Arc<ContractionSystem> {
    system(vec![
        ContractionMap::affine_exact(big(1, 3), big(1, 6)).unwrap(),
        ContractionMap::affine_exact(big(1, 3), big(7, 12)).unwrap(),
    ])
}

/// Exact probability vector from (numerator, denominator) pairs.
pub fn weights(entries: &[(i64, i64)]) -> ProbabilityVector {
    ProbabilityVector::from_rationals(entries.iter().map(|&(n, d)| big(n, d)).collect())
        .expect("valid test weights")
}

/// Independent Cantor-function oracle: read off exact ternary digits of
/// x and rewrite them in binary, halving 2s and stopping at the first 1.
/// The input is converted to an exact rational first, so digit
/// extraction never suffers float drift; truncation after 64 digits is
/// below 1e-18.
pub fn cantor_oracle(x: f64) -> f64 {
    assert!((0.0..=1.0).contains(&x), "oracle domain is [0, 1]");
    if x == 1.0 {
        return 1.0;
    }
    let three = BigRational::from_integer(BigInt::from(3));
    let mut rest = BigRational::from_float(x).expect("finite input");
    let mut value = 0.0;
    let mut scale = 0.5;
    for _ in 0..64 {
        if rest.is_zero() {
            break;
        }
        rest *= &three;
        let digit = rest.to_integer();
        rest -= BigRational::from_integer(digit.clone());
        match digit.to_u8().expect("ternary digit") {
            0 => {}
            1 => {
                value += scale;
                break;
            }
            2 => value += scale,
            other => unreachable!("ternary digit {other}"),
        }
        scale *= 0.5;
    }
    value
}
