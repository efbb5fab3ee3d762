use pyo3::prelude::*;

#[pymodule]
fn tpbr_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
