//! Named curved map families.
//!
//! Config files and the Python bindings refer to curved maps by name, so
//! the registry lives here rather than in each front end. Every family is
//! strictly increasing on [0, 1] for admissible parameters and carries a
//! certified Lipschitz bound.

use std::sync::Arc;

use crate::contraction::ContractionMap;
use crate::error::{Error, Result};

/// Build a member of a named family.
///
/// * `logistic a b`: x -> a + (b - a) x (3 - x) / 2, bound 3(b - a)/2.
///   The derivative (b - a)(3 - 2x)/2 stays in [(b - a)/2, 3(b - a)/2].
/// * `power a b g` with g >= 1: x -> a + (b - a) x^g, bound (b - a) g.
///
/// Unknown names, wrong arity and out-of-range parameters all come back
/// as [`Error::BadMap`].
pub fn family(name: &str, args: &[f64]) -> Result<ContractionMap> {
    match (name, args) {
        ("logistic", &[a, b]) => {
            let f = move |x: f64| a + (b - a) * x * (3.0 - x) / 2.0;
            ContractionMap::general(Arc::new(f), 1.5 * (b - a), format!("logistic {a} {b}"))
        }
        ("power", &[a, b, g]) => {
            if g < 1.0 {
                return Err(Error::BadMap(format!(
                    "power exponent must be at least 1, got {g}"
                )));
            }
            let f = move |x: f64| a + (b - a) * x.powf(g);
            ContractionMap::general(Arc::new(f), (b - a) * g, format!("power {a} {b} {g}"))
        }
        ("logistic", _) => Err(Error::BadMap("logistic takes 'a b'".into())),
        ("power", _) => Err(Error::BadMap("power takes 'a b g'".into())),
        _ => Err(Error::BadMap(format!("unknown map family '{name}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    #[test]
    fn logistic_matches_its_formula() {
        let map = family("logistic", &[0.0, 0.55]).unwrap();
        let y = map.apply(&Scalar::approx(0.5)).to_f64();
        assert!((y - 0.55 * 0.5 * 2.5 / 2.0).abs() < 1e-15);
        assert!((map.lipschitz() - 0.825).abs() < 1e-15);
    }

    #[test]
    fn power_rejects_exponents_below_one() {
        assert!(matches!(
            family("power", &[0.0, 0.5, 0.5]),
            Err(Error::BadMap(_))
        ));
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!(matches!(family("spline", &[0.0, 1.0]), Err(Error::BadMap(_))));
    }
}
