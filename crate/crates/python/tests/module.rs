use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module<F: FnOnce(&Bound<'_, PyDict>)>(body: F) {
    Python::attach(|py| {
        let module = PyModule::new(py, "pycubature5").unwrap();
        pycubature5::register(&module).unwrap();
        let globals = PyDict::new(py);
        globals.set_item("pc", module).unwrap();
        body(&globals);
    });
}

fn eval(globals: &Bound<'_, PyDict>, code: &str) -> String {
    let code = std::ffi::CString::new(code).unwrap();
    globals
        .py()
        .eval(&code, Some(globals), None)
        .unwrap()
        .str()
        .unwrap()
        .to_string()
}

#[test]
fn builds_and_verifies_rules() {
    with_module(|g| {
        assert_eq!(eval(g, "len(pc.build_rule(pc.Measure.gaussian(7)))"), "57");
        assert_eq!(eval(g, "pc.build_rule(pc.Measure.cube(4)).verify(pc.Measure.cube(4))['pass']"), "True");
        assert_eq!(eval(g, "pc.moller_bound(4)"), "21");
        assert_eq!(eval(g, "pc.Measure.shell(5, 0.5).region"), "shell(r=0.5)");
        assert_eq!(
            eval(g, "[d['degree'] for d in pc.build_rule(pc.Measure.unit_ball(6)).verify(pc.Measure.unit_ball(6), 6)['degrees'] if d['max_rel_error'] > 1e-10]"),
            "[6]"
        );
    });
}

#[test]
fn errors_become_python_exceptions() {
    with_module(|g| {
        let py = g.py();
        let code = std::ffi::CString::new("pc.Measure.cube(2)").unwrap();
        let err = py.eval(&code, Some(g), None).unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        assert!(err.to_string().contains("minimum"));
    });
}
