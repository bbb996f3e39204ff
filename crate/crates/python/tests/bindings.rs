use std::ffi::CString;
use std::sync::Once;

use openimc_py::py_module;
use pyo3::prelude::*;

static INIT: Once = Once::new();

fn run(code: &str) {
    INIT.call_once(|| {
        pyo3::append_to_inittab!(py_module);
        Python::initialize();
    });
    let code = CString::new(code).unwrap();
    Python::attach(|py| {
        if let Err(e) = py.run(&code, None, None) {
            e.print(py);
            panic!("python code failed");
        }
    });
}

#[test]
fn analyze_fig1() {
    run(r#"
import openimc
m = openimc.Model.parse("states: s0 s1\ns0 -> s0 (0,1)\ns0 -> s1 (0,1)\ns1 -> s1 [1,1]\n")
sets = m.analyze(["s1"])
assert sets["UMC"]["AQ1"] == ["s0", "s1"], sets
assert sets["IMDP"]["AQ1"] == ["s1"], sets
assert m.ilecs(["s1"]) == [["s0"]]
assert m.ilec_violations(["s0"]) == []
"#);
}

#[test]
fn errors_become_value_errors() {
    run(r#"
import openimc
try:
    openimc.Model.parse("states: a\na -> b [1,1]\n")
    raise AssertionError("accepted undeclared state")
except ValueError as e:
    assert "undeclared" in str(e), e
m = openimc.Model.parse("states: a\na -> a [1,1]\n")
try:
    m.analyze(["zz"])
    raise AssertionError("accepted unknown target")
except ValueError:
    pass
"#);
}

#[test]
fn reference_and_simulation() {
    run(r#"
import openimc
assert openimc.reference_decay_probability("1/2", 1) == 0.5
m = openimc.Model.parse("states: s0 s1\ns0 -> s0 (0,1)\ns0 -> s1 (0,1)\ns1 -> s1 [1,1]\n")
hits, trials, est, half = m.simulate(["s1"], "constant:0.5", trials=500, horizon=20, seed=3)
assert trials == 500 and est > 0.99
assert m.simulate(["s1"], "decaying:1/2", trials=50, start="s1")[2] == 1.0
"#);
}

#[test]
fn ilec_reason_codes() {
    run(r#"
import openimc
a = openimc.Model.parse("states: s o1 o2\ns -> s [3/5,4/5]\ns -> o1 [0,1/5]\ns -> o2 [0,1/5]\no1 -> o1 [1,1]\no2 -> o2 [1,1]\n")
assert a.ilec_violations(["s"]) == [2]
b = openimc.Model.parse("states: s c o\ns -> s [0,1/2]\ns -> c [0,1/2]\ns -> o [1/10,1/2]\nc -> s [1,1]\no -> o [1,1]\n")
assert b.ilec_violations(["s", "c"]) == [1]
"#);
}
