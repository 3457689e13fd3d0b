//! Line-based run configuration.
//!
//! One `key = value` pair per line; `#` starts a comment. Repeatable keys
//! keep their file order. A numeric token is either a rational literal
//! such as `1/3` or `2` (kept exact, enabling rational arithmetic all the
//! way through) or a decimal such as `0.25` or `1e-10` (handled in
//! floats).
//!
//! ```text
//! map = 1/3 0            # affine map: slope intercept
//! map = logistic 0 0.55  # named curved map from the registry
//! p = 1/2 1/2            # probability weights; repeat for more vectors
//! tol_phi = 1e-10
//! seed = 42
//! out = curve.csv
//! ```
//!
//! The registry currently knows two curved families, both strictly
//! increasing with a certified Lipschitz bound:
//!
//! * `logistic a b`: x -> a + (b - a) x (3 - x) / 2, bound 3(b - a)/2;
//! * `power a b g` (g >= 1): x -> a + (b - a) x^g, bound (b - a) g.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use staircase::{ContractionMap, ContractionSystem, Error, ProbabilityVector, Tolerances};

use crate::Failure;

pub struct RunConfig {
    pub system: Arc<ContractionSystem>,
    pub vectors: Vec<ProbabilityVector>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// First probability vector of the config, the one most commands use.
    pub fn primary(&self) -> Result<&ProbabilityVector, Failure> {
        self.vectors
            .first()
            .ok_or_else(|| Failure::Invalid("the config has no p line".into()))
    }
}

pub(crate) enum Num {
    Exact(BigRational),
    Approx(f64),
}

impl Num {
    fn to_f64(&self) -> f64 {
        match self {
            Num::Exact(r) => crate::rational_f64(r),
            Num::Approx(f) => *f,
        }
    }
}

pub(crate) fn parse_num(token: &str) -> Option<Num> {
    if let Some((num, den)) = token.split_once('/') {
        let num: i64 = num.parse().ok()?;
        let den: i64 = den.parse().ok()?;
        if den == 0 {
            return None;
        }
        Some(Num::Exact(BigRational::new(
            BigInt::from(num),
            BigInt::from(den),
        )))
    } else if let Ok(int) = token.parse::<i64>() {
        Some(Num::Exact(BigRational::from_integer(BigInt::from(int))))
    } else {
        token.parse::<f64>().ok().map(Num::Approx)
    }
}

fn parse_map(tokens: &[&str], line: usize) -> Result<ContractionMap, Failure> {
    let Some(&first) = tokens.first() else {
        return Err(Failure::Parse(format!("line {line}: map needs arguments")));
    };
    if let Some(slope) = parse_num(first) {
        if tokens.len() != 2 {
            return Err(Failure::Parse(format!(
                "line {line}: an affine map takes exactly 'slope intercept'"
            )));
        }
        let Some(intercept) = parse_num(tokens[1]) else {
            return Err(Failure::Parse(format!(
                "line {line}: cannot read number '{}'",
                tokens[1]
            )));
        };
        let map = match (slope, intercept) {
            (Num::Exact(s), Num::Exact(t)) => ContractionMap::affine_exact(s, t),
            (s, t) => ContractionMap::affine(s.to_f64(), t.to_f64()),
        };
        return map.map_err(Failure::Validation);
    }

    let mut args = Vec::with_capacity(tokens.len() - 1);
    for token in &tokens[1..] {
        let Some(num) = parse_num(token) else {
            return Err(Failure::Parse(format!(
                "line {line}: cannot read number '{token}'"
            )));
        };
        args.push(num.to_f64());
    }
    // A bad family spelling is a malformed line, not an invalid system.
    staircase::family(first, &args).map_err(|e| match e {
        Error::BadMap(msg) => Failure::Parse(format!("line {line}: {msg}")),
        other => Failure::Validation(other),
    })
}

fn parse_vector(tokens: &[&str], line: usize) -> Result<ProbabilityVector, Failure> {
    let mut nums = Vec::with_capacity(tokens.len());
    for token in tokens {
        let Some(num) = parse_num(token) else {
            return Err(Failure::Parse(format!(
                "line {line}: cannot read number '{token}'"
            )));
        };
        nums.push(num);
    }
    let vector = if nums.iter().all(|n| matches!(n, Num::Exact(_))) {
        ProbabilityVector::from_rationals(
            nums.iter()
                .map(|n| match n {
                    Num::Exact(r) => r.clone(),
                    Num::Approx(_) => unreachable!(),
                })
                .collect(),
        )
    } else {
        ProbabilityVector::new(nums.iter().map(Num::to_f64).collect())
    };
    vector.map_err(Failure::Validation)
}

fn parse_scalar_value<T: std::str::FromStr>(
    tokens: &[&str],
    key: &str,
    line: usize,
) -> Result<T, Failure> {
    if tokens.len() != 1 {
        return Err(Failure::Parse(format!(
            "line {line}: {key} takes a single value"
        )));
    }
    tokens[0].parse().map_err(|_| {
        Failure::Parse(format!(
            "line {line}: cannot read {key} value '{}'",
            tokens[0]
        ))
    })
}

/// Parse and gate a config file: syntax errors come back as parse
/// failures, while the system, probability and tolerance gates report
/// validation failures before any command runs.
pub fn load(path: &Path, tol_phi_override: Option<f64>) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Parse(format!("cannot read {}: {e}", path.display())))?;

    let mut maps = Vec::new();
    let mut vectors = Vec::new();
    let mut tol = Tolerances::default();
    let mut seed = 17_u64;
    let mut out = None;

    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let stripped = raw.split('#').next().unwrap_or("").trim();
        if stripped.is_empty() {
            continue;
        }
        let Some((key, value)) = stripped.split_once('=') else {
            return Err(Failure::Parse(format!(
                "line {line}: expected 'key = value'"
            )));
        };
        let tokens: Vec<&str> = value.split_whitespace().collect();
        match key.trim() {
            "map" => maps.push(parse_map(&tokens, line)?),
            "p" => vectors.push(parse_vector(&tokens, line)?),
            "seed" => seed = parse_scalar_value(&tokens, "seed", line)?,
            "tol_fix" => tol.fix = parse_scalar_value(&tokens, "tol_fix", line)?,
            "tol_inv" => tol.inv = parse_scalar_value(&tokens, "tol_inv", line)?,
            "tol_phi" => tol.phi = parse_scalar_value(&tokens, "tol_phi", line)?,
            "out" => out = Some(PathBuf::from(value.trim())),
            other => {
                return Err(Failure::Parse(format!(
                    "line {line}: unknown key '{other}'"
                )))
            }
        }
    }

    if let Some(t) = tol_phi_override {
        if !t.is_finite() || t <= 0.0 {
            return Err(Failure::Validation(Error::BadEpsilon(t)));
        }
        tol.phi = t;
    }

    let system = Arc::new(
        ContractionSystem::with_tolerances(maps, tol).map_err(Failure::Validation)?,
    );
    for vector in &vectors {
        if vector.len() != system.len() {
            return Err(Failure::Validation(Error::LengthMismatch {
                expected: system.len(),
                got: vector.len(),
            }));
        }
    }

    Ok(RunConfig {
        system,
        vectors,
        seed,
        out,
    })
}
