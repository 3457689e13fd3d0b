//! Python bindings for the staircase crate.
//!
//! The module exposes the two main types: [`System`], a validated family
//! of strictly increasing contractions on [0, 1], and [`Solution`], the
//! staircase solution attached to a probability vector. Numeric
//! arguments accept ints, floats, and strings: `"1/3"` stays an exact
//! rational all the way through, `0.25` rides the float lane, matching
//! the config file convention of the command line tool.
//!
//! Build the importable module with
//! `cargo build -p staircase-py --release --features extension-module`
//! and rename the produced `libstaircase_py.so` to `staircase_py.so`
//! (see `python/smoke.py`, which automates both steps).

use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyString;

use staircase::{
    ambiguity, canonicalize, cylinder_mass, extract_address, family, gaps, independence_rank,
    level_set, pi, sample_address, transfer, Address, ContractionMap, ContractionSystem,
    ProbabilityVector, Scalar, SolutionPhi, Tolerances,
};

fn err(e: staircase::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

enum Num {
    Exact(BigRational),
    Approx(f64),
}

impl Num {
    fn to_f64(&self) -> f64 {
        match self {
            Num::Exact(r) => Scalar::Exact(r.clone()).to_f64(),
            Num::Approx(f) => *f,
        }
    }

    /// The evaluation-lane scalar: exact rationals stay exact, floats are
    /// converted without rounding so the core decides how to treat them.
    fn to_scalar(&self) -> Scalar {
        match self {
            Num::Exact(r) => Scalar::Exact(r.clone()),
            Num::Approx(f) => Scalar::from_f64_exact(*f),
        }
    }
}

fn text_number(token: &str) -> Option<Num> {
    if let Some((num, den)) = token.split_once('/') {
        let num: i64 = num.trim().parse().ok()?;
        let den: i64 = den.trim().parse().ok()?;
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

fn number(ob: &Bound<'_, PyAny>) -> PyResult<Num> {
    if ob.is_instance_of::<PyString>() {
        let text: String = ob.extract()?;
        return text_number(text.trim())
            .ok_or_else(|| PyValueError::new_err(format!("not a number: {text:?}")));
    }
    if let Ok(int) = ob.extract::<i64>() {
        return Ok(Num::Exact(BigRational::from_integer(BigInt::from(int))));
    }
    if let Ok(f) = ob.extract::<f64>() {
        return Ok(Num::Approx(f));
    }
    Err(PyValueError::new_err(
        "expected an int, a float, or a numeric string like '1/3'",
    ))
}

fn parse_map(ob: &Bound<'_, PyAny>) -> PyResult<ContractionMap> {
    let items: Vec<Bound<'_, PyAny>> = ob.extract().map_err(|_| {
        PyValueError::new_err("each map is a (slope, intercept) pair or ('family', params...)")
    })?;
    if let Some(first) = items.first() {
        if first.is_instance_of::<PyString>() {
            let name: String = first.extract()?;
            if text_number(&name).is_none() {
                let mut args = Vec::with_capacity(items.len() - 1);
                for item in &items[1..] {
                    args.push(number(item)?.to_f64());
                }
                return family(name.trim(), &args).map_err(err);
            }
        }
    }
    if items.len() != 2 {
        return Err(PyValueError::new_err(
            "an affine map takes exactly (slope, intercept)",
        ));
    }
    let slope = number(&items[0])?;
    let intercept = number(&items[1])?;
    match (slope, intercept) {
        (Num::Exact(s), Num::Exact(t)) => ContractionMap::affine_exact(s, t),
        (s, t) => ContractionMap::affine(s.to_f64(), t.to_f64()),
    }
    .map_err(err)
}

fn parse_weights(entries: &[Bound<'_, PyAny>]) -> PyResult<ProbabilityVector> {
    let mut nums = Vec::with_capacity(entries.len());
    for entry in entries {
        nums.push(number(entry)?);
    }
    let vector = if nums.iter().all(|n| matches!(n, Num::Exact(_))) {
        ProbabilityVector::from_rationals(
            nums.into_iter()
                .map(|n| match n {
                    Num::Exact(r) => r,
                    Num::Approx(_) => unreachable!(),
                })
                .collect(),
        )
    } else {
        ProbabilityVector::new(nums.iter().map(Num::to_f64).collect())
    };
    vector.map_err(err)
}

fn parse_address(s: &str) -> PyResult<Address> {
    Address::from_str(s).map_err(err)
}

/// A validated system of strictly increasing contractions on [0, 1] whose
/// images are ordered and leave at least one gap.
#[pyclass(frozen, module = "staircase_py")]
pub struct System {
    inner: Arc<ContractionSystem>,
}

#[pymethods]
impl System {
    /// System(maps, tol_phi=None)
    ///
    /// Each map is an affine pair `(slope, intercept)` or a named family
    /// entry such as `("logistic", a, b)` or `("power", a, b, g)`.
    #[new]
    #[pyo3(signature = (maps, tol_phi=None))]
    fn new(maps: Vec<Bound<'_, PyAny>>, tol_phi: Option<f64>) -> PyResult<Self> {
        let mut built = Vec::with_capacity(maps.len());
        for ob in &maps {
            built.push(parse_map(ob)?);
        }
        let system = match tol_phi {
            Some(phi) => {
                let tol = Tolerances {
                    phi,
                    ..Tolerances::default()
                };
                ContractionSystem::with_tolerances(built, tol)
            }
            None => ContractionSystem::new(built),
        }
        .map_err(err)?;
        Ok(System {
            inner: Arc::new(system),
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "System({} maps, hull [{}, {}], {})",
            self.inner.len(),
            self.inner.zero_hat().to_f64(),
            self.inner.one_hat().to_f64(),
            if self.inner.is_exact() { "exact" } else { "float" },
        )
    }

    /// True when every map is affine with rational coefficients.
    #[getter]
    fn exact(&self) -> bool {
        self.inner.is_exact()
    }

    /// Attractor hull endpoints (fixed points of the outermost maps).
    #[getter]
    fn hull(&self) -> (f64, f64) {
        (
            self.inner.zero_hat().to_f64(),
            self.inner.one_hat().to_f64(),
        )
    }

    /// 1 minus the slope sum when every map is affine, else None.
    #[getter]
    fn contraction_deficit(&self) -> Option<f64> {
        self.inner.contraction_deficit().map(|d| d.to_f64())
    }

    /// Digits n whose image touches the next one: f_n(1) = f_{n+1}(0).
    /// (Digit lists cross into Python as lists of ints, never as bytes.)
    #[getter]
    fn touching(&self) -> Vec<u16> {
        ambiguity(&self.inner).touching.iter().map(|&d| d.into()).collect()
    }

    /// True when the touching points carry two addresses each.
    #[getter]
    fn ambiguity_active(&self) -> bool {
        ambiguity(&self.inner).active
    }

    /// Apply the digit word left to right: f_{d0}(f_{d1}(... x)).
    fn apply(&self, digits: Vec<u8>, x: f64) -> PyResult<f64> {
        let x = if self.inner.is_exact() {
            Scalar::from_f64_exact(x)
        } else {
            Scalar::approx(x)
        };
        self.inner
            .apply_digits(&digits, &x)
            .map(|y| y.to_f64())
            .map_err(err)
    }

    /// The level-k cover of the attractor as a list of (left, right) spans.
    fn level_set(&self, depth: usize) -> PyResult<Vec<(f64, f64)>> {
        level_set(&self.inner, depth)
            .map(|set| set.to_f64_spans())
            .map_err(err)
    }

    /// Gaps up to the given depth as (digits, left, right) rows, ordered
    /// by depth then by digits.
    fn gaps(&self, depth: usize) -> PyResult<Vec<(Vec<u16>, f64, f64)>> {
        let d = gaps(&self.inner, depth).map_err(err)?;
        Ok(d.gaps
            .into_iter()
            .map(|g| {
                let digits = g.digits.iter().map(|&d| d.into()).collect();
                (digits, g.left.to_f64(), g.right.to_f64())
            })
            .collect())
    }

    /// The coding of a point as an address string, e.g. "0.2.1^?".
    fn extract_address(&self, x: f64, depth: usize) -> PyResult<String> {
        let x = if self.inner.is_exact() {
            Scalar::from_f64_exact(x)
        } else {
            Scalar::approx(x)
        };
        extract_address(&self.inner, &x, depth)
            .map(|a| a.to_string())
            .map_err(err)
    }

    /// The canonical spelling of an address (the one the coding map picks).
    fn canonicalize(&self, address: &str) -> PyResult<String> {
        canonicalize(&self.inner, &parse_address(address)?)
            .map(|a| a.to_string())
            .map_err(err)
    }

    /// The attractor point an address spells. Truncated addresses ("^?")
    /// give their cylinder midpoint.
    fn point(&self, address: &str) -> PyResult<f64> {
        pi(&self.inner, &parse_address(address)?)
            .map(|p| p.value.to_f64())
            .map_err(err)
    }

    /// One step of the expanding left inverse: the branch digit at y and
    /// the preimage under that branch.
    fn transfer(&self, y: f64) -> PyResult<(u8, f64)> {
        let y = if self.inner.is_exact() {
            Scalar::from_f64_exact(y)
        } else {
            Scalar::approx(y)
        };
        transfer(&self.inner, &y)
            .map(|(digit, pre)| (digit, pre.to_f64()))
            .map_err(err)
    }
}

/// The staircase solution for one system and probability vector: the
/// cumulative function of the invariant measure, constant on every gap.
#[pyclass(frozen, module = "staircase_py")]
pub struct Solution {
    phi: SolutionPhi,
    p: ProbabilityVector,
    system: Arc<ContractionSystem>,
}

#[pymethods]
impl Solution {
    /// Solution(system, p, tol_phi=None)
    ///
    /// `p` lists one positive weight per map, summing to 1. Rational
    /// strings keep the solution exact on exact systems.
    #[new]
    #[pyo3(signature = (system, p, tol_phi=None))]
    fn new(system: &System, p: Vec<Bound<'_, PyAny>>, tol_phi: Option<f64>) -> PyResult<Self> {
        let weights = parse_weights(&p)?;
        let tol = tol_phi.unwrap_or(system.inner.tolerances().phi);
        let phi = SolutionPhi::with_tolerance(system.inner.clone(), weights.clone(), tol)
            .map_err(err)?;
        Ok(Solution {
            phi,
            p: weights,
            system: system.inner.clone(),
        })
    }

    fn __repr__(&self) -> String {
        format!("Solution(p = {:?})", self.p.weights_f64())
    }

    /// The weights as floats.
    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.p.weights_f64().to_vec()
    }

    /// Evaluate at a point of [0, 1]. Accepts floats and rational strings.
    fn eval(&self, x: &Bound<'_, PyAny>) -> PyResult<f64> {
        self.eval_with_error(x).map(|(value, _)| value)
    }

    /// Evaluate with the truncation error bound (0.0 on exact paths).
    fn eval_with_error(&self, x: &Bound<'_, PyAny>) -> PyResult<(f64, f64)> {
        let x = number(x)?.to_scalar();
        self.phi
            .eval_scalar(&x)
            .map(|v| (v.value.to_f64(), v.error))
            .map_err(err)
    }

    /// Evaluate at many points.
    fn eval_many(&self, xs: Vec<Bound<'_, PyAny>>) -> PyResult<Vec<f64>> {
        xs.iter().map(|x| self.eval(x)).collect()
    }

    /// The constant value held on the closed gap reached by a digit word.
    fn plateau(&self, digits: Vec<u8>) -> PyResult<f64> {
        self.phi
            .plateau(&digits)
            .map(|p| p.value.to_f64())
            .map_err(err)
    }

    /// The solution value at the point an address spells, computed from
    /// the digit series rather than by locating the point.
    fn series_value(&self, address: &str) -> PyResult<f64> {
        self.phi
            .series_value(&parse_address(address)?)
            .map(|v| v.value.to_f64())
            .map_err(err)
    }

    /// The invariant measure of the cylinder of a digit word.
    fn mass(&self, digits: Vec<u8>) -> PyResult<f64> {
        cylinder_mass(&self.p, &digits)
            .map(|m| m.to_f64())
            .map_err(err)
    }

    /// Draw addresses from the weights and map them to attractor points.
    /// Returns (digits, point) pairs, deterministic in the seed.
    #[pyo3(signature = (n, seed=17, depth=12))]
    fn sample(&self, n: usize, seed: u64, depth: usize) -> PyResult<Vec<(Vec<u16>, f64)>> {
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let digits = sample_address(&self.p, seed.wrapping_add(i as u64), depth);
            let point = self
                .system
                .apply_digits(&digits, self.system.zero_hat())
                .map_err(err)?;
            rows.push((digits.iter().map(|&d| d.into()).collect(), point.to_f64()));
        }
        Ok(rows)
    }

    /// True when the boundary and endpoint identities all hold.
    fn boundary_pass(&self) -> PyResult<bool> {
        self.phi.boundary_report().map(|r| r.pass).map_err(err)
    }
}

/// Numerical rank of the family of solutions over one system, sampled at
/// m gap-plateau points. Returns (rank, singular_values, threshold);
/// rank == len(ps) certifies linear independence.
#[pyfunction]
#[pyo3(name = "independence_rank", signature = (system, ps, m=24))]
fn independence_rank_py(
    system: &System,
    ps: Vec<Vec<Bound<'_, PyAny>>>,
    m: usize,
) -> PyResult<(usize, Vec<f64>, f64)> {
    let mut vectors = Vec::with_capacity(ps.len());
    for p in &ps {
        vectors.push(parse_weights(p)?);
    }
    let report = independence_rank(&system.inner, &vectors, m).map_err(err)?;
    Ok((report.rank, report.singular_values, report.threshold))
}

/// Gapped iterated function systems on [0, 1]: attractors, invariant
/// measures and their singular staircase solutions.
#[pymodule]
pub fn staircase_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<System>()?;
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(independence_rank_py, m)?)?;
    Ok(())
}
