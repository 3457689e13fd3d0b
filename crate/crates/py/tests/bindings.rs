//! Exercise the bindings through a real embedded interpreter: the module
//! is registered on the init table, imported from Python, and driven the
//! way a Python caller would drive it.

use std::sync::Once;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyList, PyModule};
use staircase_py::staircase_py as pymodule;

static INIT: Once = Once::new();

fn setup() {
    INIT.call_once(|| {
        pyo3::append_to_inittab!(pymodule);
        Python::initialize();
    });
}

fn module(py: Python<'_>) -> Bound<'_, PyModule> {
    py.import("staircase_py").expect("import staircase_py")
}

#[test]
fn cantor_system_end_to_end() {
    setup();
    Python::attach(|py| {
        let m = module(py);
        let system = m
            .getattr("System")
            .unwrap()
            .call1((vec![("1/3", "0"), ("1/3", "2/3")],))
            .unwrap();

        assert_eq!(system.len().unwrap(), 2);
        assert!(system.getattr("exact").unwrap().extract::<bool>().unwrap());
        let hull: (f64, f64) = system.getattr("hull").unwrap().extract().unwrap();
        assert_eq!(hull, (0.0, 1.0));
        let deficit: f64 = system
            .getattr("contraction_deficit")
            .unwrap()
            .extract()
            .unwrap();
        assert!((deficit - 1.0 / 3.0).abs() < 1e-15);
        assert!(!system
            .getattr("ambiguity_active")
            .unwrap()
            .extract::<bool>()
            .unwrap());

        let spans: Vec<(f64, f64)> = system
            .call_method1("level_set", (2,))
            .unwrap()
            .extract()
            .unwrap();
        assert_eq!(spans.len(), 4);
        let total: f64 = spans.iter().map(|(a, b)| b - a).sum();
        assert!((total - 4.0 / 9.0).abs() < 1e-15);

        let gaps: Vec<(Vec<u8>, f64, f64)> = system
            .call_method1("gaps", (2,))
            .unwrap()
            .extract()
            .unwrap();
        assert_eq!(gaps.len(), 3);
        assert_eq!(gaps[0].0, vec![0]);
        assert!((gaps[0].1 - 1.0 / 3.0).abs() < 1e-15);
        assert!((gaps[0].2 - 2.0 / 3.0).abs() < 1e-15);

        let solution = m
            .getattr("Solution")
            .unwrap()
            .call1((&system, vec!["1/2", "1/2"]))
            .unwrap();
        let at_half: f64 = solution
            .call_method1("eval", (0.5,))
            .unwrap()
            .extract()
            .unwrap();
        assert_eq!(at_half, 0.5);
        let at_third: f64 = solution
            .call_method1("eval", ("1/3",))
            .unwrap()
            .extract()
            .unwrap();
        assert_eq!(at_third, 0.5);
        let at_quarter: f64 = solution
            .call_method1("eval", (0.25,))
            .unwrap()
            .extract()
            .unwrap();
        assert!((at_quarter - 1.0 / 3.0).abs() < 1e-9);

        let plateau: f64 = solution
            .call_method1("plateau", (vec![0u8],))
            .unwrap()
            .extract()
            .unwrap();
        assert_eq!(plateau, 0.5);
        let mass: f64 = solution
            .call_method1("mass", (vec![0u8, 1u8],))
            .unwrap()
            .extract()
            .unwrap();
        assert_eq!(mass, 0.25);
        assert!(solution
            .call_method0("boundary_pass")
            .unwrap()
            .extract::<bool>()
            .unwrap());

        let rows: Vec<(Vec<u8>, f64)> = solution
            .call_method1("sample", (8,))
            .unwrap()
            .extract()
            .unwrap();
        let again: Vec<(Vec<u8>, f64)> = solution
            .call_method1("sample", (8,))
            .unwrap()
            .extract()
            .unwrap();
        assert_eq!(rows, again);
        assert!(rows.iter().all(|(_, x)| (0.0..=1.0).contains(x)));
    });
}

#[test]
fn touching_system_coding() {
    setup();
    Python::attach(|py| {
        let m = module(py);
        let system = m
            .getattr("System")
            .unwrap()
            .call1((vec![("1/4", "0"), ("1/4", "1/4"), ("1/4", "3/4")],))
            .unwrap();

        assert!(system
            .getattr("ambiguity_active")
            .unwrap()
            .extract::<bool>()
            .unwrap());
        assert_eq!(
            system
                .getattr("touching")
                .unwrap()
                .extract::<Vec<u8>>()
                .unwrap(),
            vec![0]
        );

        let canonical: String = system
            .call_method1("canonicalize", ("0^N",))
            .unwrap()
            .extract()
            .unwrap();
        assert_eq!(canonical, "1^0");
        let point: f64 = system.call_method1("point", ("1^0",)).unwrap().extract().unwrap();
        assert_eq!(point, 0.25);

        let solution = m
            .getattr("Solution")
            .unwrap()
            .call1((&system, vec!["1/4", "1/4", "1/2"]))
            .unwrap();
        let upper: f64 = solution
            .call_method1("series_value", ("0^N",))
            .unwrap()
            .extract()
            .unwrap();
        let lower: f64 = solution
            .call_method1("series_value", ("1^0",))
            .unwrap()
            .extract()
            .unwrap();
        assert_eq!(upper, 0.25);
        assert_eq!(lower, 0.25);
    });
}

#[test]
fn curved_maps_and_rank() {
    setup();
    Python::attach(|py| {
        let m = module(py);

        let maps = PyList::empty(py);
        maps.append(("logistic", 0.0, 0.55)).unwrap();
        maps.append(("2/5", "3/5")).unwrap();
        let system = m.getattr("System").unwrap().call1((maps,)).unwrap();
        assert!(!system.getattr("exact").unwrap().extract::<bool>().unwrap());

        let solution = m
            .getattr("Solution")
            .unwrap()
            .call1((&system, vec![0.5, 0.5]))
            .unwrap();
        let in_gap: f64 = solution
            .call_method1("eval", (0.575,))
            .unwrap()
            .extract()
            .unwrap();
        assert!((in_gap - 0.5).abs() < 1e-9);

        let shifted = m
            .getattr("System")
            .unwrap()
            .call1((vec![("1/3", "1/6"), ("1/3", "7/12")],))
            .unwrap();
        let ps = vec![
            vec!["1/2", "1/2"],
            vec!["1/3", "2/3"],
            vec!["1/4", "3/4"],
        ];
        let (rank, singulars, threshold): (usize, Vec<f64>, f64) = m
            .getattr("independence_rank")
            .unwrap()
            .call1((&shifted, ps))
            .unwrap()
            .extract()
            .unwrap();
        assert_eq!(rank, 3);
        assert_eq!(singulars.len(), 3);
        assert!(threshold > 0.0);
    });
}

#[test]
fn invalid_systems_raise_value_error() {
    setup();
    Python::attach(|py| {
        let m = module(py);
        let attempt = m
            .getattr("System")
            .unwrap()
            .call1((vec![("3/2", "0"), ("1/4", "3/4")],));
        let error = attempt.unwrap_err();
        assert!(error.is_instance_of::<PyValueError>(py));

        let tiling = m
            .getattr("System")
            .unwrap()
            .call1((vec![("1/2", "0"), ("1/2", "1/2")],));
        assert!(tiling.unwrap_err().is_instance_of::<PyValueError>(py));
    });
}
