//! Python bindings. Reports come back as plain dicts built from the same JSON
//! the command-line tool prints.

use boundkey::io;
use boundkey::keyrate::{self, Direction};
use boundkey::optimizer::{self, OptConfig};
use boundkey::{
    coherent_information, from_diagram, lift_state, reduce_to_ab, DensityMatrix as CoreDensity,
    Diagram as CoreDiagram, JointDistribution3, MarginalDistribution, NoisyChannel, RenderFormat,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;

fn err(e: boundkey::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py(py: Python<'_>, value: &impl serde::Serialize) -> PyResult<Py<PyAny>> {
    let text = io::to_json_string(value).map_err(err)?;
    Ok(PyModule::import(py, "json")?
        .call_method1("loads", (text,))?
        .unbind())
}

fn direction(s: &str) -> PyResult<Direction> {
    Direction::parse(s).ok_or_else(|| PyValueError::new_err(format!("unknown direction {s:?}")))
}

fn channel(rows: Option<Vec<Vec<f64>>>) -> PyResult<Option<NoisyChannel>> {
    rows.map(|r| NoisyChannel::from_rows(&r).map_err(err))
        .transpose()
}

/// A joint distribution P_ABE stored as a dense dA x dB x dE array.
#[pyclass(name = "Distribution", module = "boundkey", frozen)]
pub struct Distribution(JointDistribution3);

#[pymethods]
impl Distribution {
    /// `probs` is the flattened array in (a, b, e) row-major order.
    #[new]
    fn new(d_a: usize, d_b: usize, d_e: usize, probs: Vec<f64>) -> PyResult<Self> {
        JointDistribution3::new(d_a, d_b, d_e, probs)
            .map(Self)
            .map_err(err)
    }

    /// Builds a distribution from `(a, b, e, p)` tuples; unlisted outcomes are 0.
    #[staticmethod]
    fn from_entries(
        d_a: usize,
        d_b: usize,
        d_e: usize,
        entries: Vec<(usize, usize, usize, f64)>,
    ) -> PyResult<Self> {
        JointDistribution3::from_entries(d_a, d_b, d_e, &entries)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        io::load_distribution(path).map(Self).map_err(err)
    }

    #[getter]
    fn dims(&self) -> (usize, usize, usize) {
        let [a, b, e] = self.0.dims();
        (a, b, e)
    }

    fn probs(&self) -> Vec<f64> {
        self.0.probs().to_vec()
    }

    fn get(&self, a: usize, b: usize, e: usize) -> PyResult<f64> {
        let [d_a, d_b, d_e] = self.0.dims();
        if a >= d_a || b >= d_b || e >= d_e {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(self.0.get(a, b, e))
    }

    fn is_unambiguous(&self) -> bool {
        self.0.validate_unambiguous().is_unambiguous()
    }

    fn validate_unambiguous(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.0.validate_unambiguous())
    }

    /// rho_AB of the square-root lift.
    fn lift(&self) -> DensityMatrix {
        DensityMatrix(reduce_to_ab(&lift_state(&self.0)))
    }

    /// Coherent information S(B) - S(AB) of the lifted state, in bits.
    fn coherent_information(&self) -> PyResult<f64> {
        coherent_information(&lift_state(&self.0)).map_err(err)
    }

    /// `channel` holds rows q[x][a]; without it the identity channel is used.
    #[pyo3(signature = (channel=None, direction="A->B"))]
    fn keyrate(
        &self,
        py: Python<'_>,
        channel: Option<Vec<Vec<f64>>>,
        direction: &str,
    ) -> PyResult<Py<PyAny>> {
        let ch = self::channel(channel)?;
        let r = keyrate::key_rate_report(&self.0, ch.as_ref(), self::direction(direction)?)
            .map_err(err)?;
        to_py(py, &r)
    }

    fn advantage(&self, direction: &str) -> PyResult<f64> {
        Ok(keyrate::advantage(&self.0, self::direction(direction)?))
    }

    fn to_json(&self) -> PyResult<String> {
        io::to_json_string(&io::DistributionFile::from(&self.0)).map_err(err)
    }

    fn __repr__(&self) -> String {
        let [a, b, e] = self.0.dims();
        format!("Distribution(dA={a}, dB={b}, dE={e})")
    }
}

/// The AB density matrix of a lifted state.
#[pyclass(name = "DensityMatrix", module = "boundkey", frozen)]
pub struct DensityMatrix(CoreDensity);

#[pymethods]
impl DensityMatrix {
    #[getter]
    fn dims(&self) -> (usize, usize) {
        (self.0.d_a(), self.0.d_b())
    }

    /// Rows of the dA*dB x dA*dB matrix indexed by a*dB + b.
    fn matrix(&self) -> Vec<Vec<f64>> {
        self.0
            .matrix()
            .chunks(self.0.n())
            .map(<[f64]>::to_vec)
            .collect()
    }

    fn trace(&self) -> f64 {
        self.0.trace()
    }

    fn eigenvalues(&self) -> PyResult<Vec<f64>> {
        self.0.eigenvalues().map_err(err)
    }

    fn min_eigenvalue(&self) -> PyResult<f64> {
        self.0.min_eigenvalue().map_err(err)
    }

    fn partial_transpose(&self) -> DensityMatrix {
        DensityMatrix(self.0.partial_transpose())
    }

    #[pyo3(signature = (tol=1e-9))]
    fn pt_report(&self, py: Python<'_>, tol: f64) -> PyResult<Py<PyAny>> {
        to_py(py, &self.0.pt_report(tol).map_err(err)?)
    }
}

/// A partition of grid cells into cliques with no shared row or column.
#[pyclass(name = "Diagram", module = "boundkey", frozen)]
pub struct Diagram(CoreDiagram);

#[pymethods]
impl Diagram {
    #[new]
    fn new(d_a: usize, d_b: usize, cliques: Vec<Vec<(usize, usize)>>) -> PyResult<Self> {
        CoreDiagram::new(d_a, d_b, cliques).map(Self).map_err(err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        io::load_diagram(path).map(Self).map_err(err)
    }

    #[getter]
    fn dims(&self) -> (usize, usize, usize) {
        (self.0.d_a(), self.0.d_b(), self.0.d_e())
    }

    #[getter]
    fn cliques(&self) -> Vec<Vec<(usize, usize)>> {
        self.0.cliques().to_vec()
    }

    fn crosses(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.0.crosses())
    }

    #[pyo3(signature = (format="ascii"))]
    fn render(&self, format: &str) -> PyResult<String> {
        Ok(boundkey::render_diagram(
            &self.0,
            RenderFormat::parse(format).map_err(err)?,
        ))
    }

    /// P_ABE with P_AB given by `p_ab` rows and Eve holding the clique label.
    fn distribution(&self, p_ab: Vec<Vec<f64>>) -> PyResult<Distribution> {
        let m = MarginalDistribution::from_rows(&p_ab).map_err(err)?;
        from_diagram(&self.0, &m).map(Distribution).map_err(err)
    }

    #[pyo3(signature = (starts=50, seed=0, dx=2, penalty_schedule=None, max_evals=200_000))]
    fn optimize(
        &self,
        py: Python<'_>,
        starts: usize,
        seed: u64,
        dx: usize,
        penalty_schedule: Option<Vec<f64>>,
        max_evals: usize,
    ) -> PyResult<Py<PyAny>> {
        let defaults = OptConfig::default();
        let cfg = OptConfig {
            starts,
            seed,
            d_x: dx,
            penalty_schedule: penalty_schedule.unwrap_or(defaults.penalty_schedule.clone()),
            max_evals_per_start: max_evals,
            ..defaults
        };
        let d = self.0.clone();
        let r = py
            .detach(move || optimizer::maximize_keyrate(&d, &cfg))
            .map_err(err)?;
        to_py(py, &r)
    }

    fn __repr__(&self) -> String {
        format!(
            "Diagram(dA={}, dB={}, dE={})",
            self.0.d_a(),
            self.0.d_b(),
            self.0.d_e()
        )
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

#[pyfunction]
#[pyo3(signature = (d_a, d_b, max_cliques=None))]
fn enumerate_diagrams(
    d_a: usize,
    d_b: usize,
    max_cliques: Option<usize>,
) -> PyResult<Vec<Diagram>> {
    let ds =
        optimizer::enumerate_diagrams(d_a, d_b, max_cliques.unwrap_or(d_a * d_b)).map_err(err)?;
    Ok(ds.into_iter().map(Diagram).collect())
}

#[pyfunction]
#[pyo3(signature = (p_ab, d_e, tol=boundkey::dist::FIXTURE_TOLERANCE))]
fn infer_diagram(p_ab: Vec<Vec<f64>>, d_e: usize, tol: f64) -> PyResult<Vec<Diagram>> {
    let m = MarginalDistribution::from_rows(&p_ab).map_err(err)?;
    let ds = optimizer::infer_diagram(&m, d_e, tol).map_err(err)?;
    Ok(ds.into_iter().map(Diagram).collect())
}

#[pyfunction]
fn f_structured(a: f64, b: f64, c: f64, d: f64, e: f64) -> PyResult<f64> {
    keyrate::f_structured(a, b, c, d, e).map_err(err)
}

/// One published fixture as `(distribution, channel rows, diagram)`.
#[pyfunction]
fn fixture(name: &str) -> PyResult<(Distribution, Vec<Vec<f64>>, Diagram)> {
    let f = boundkey::fixture(name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown fixture {name:?}")))?;
    Ok((
        Distribution(f.distribution()),
        f.channel().rows(),
        Diagram(f.diagram()),
    ))
}

#[pyfunction]
fn fixture_names() -> Vec<&'static str> {
    boundkey::FIXTURES.iter().map(|f| f.name).collect()
}

#[pyfunction]
#[pyo3(signature = (reinfer=false))]
fn reproduce(py: Python<'_>, reinfer: bool) -> PyResult<Py<PyAny>> {
    to_py(py, &boundkey::reproduce(reinfer).map_err(err)?)
}

#[pymodule]
#[pyo3(name = "boundkey")]
fn boundkey_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Distribution>()?;
    m.add_class::<DensityMatrix>()?;
    m.add_class::<Diagram>()?;
    m.add_function(wrap_pyfunction!(enumerate_diagrams, m)?)?;
    m.add_function(wrap_pyfunction!(infer_diagram, m)?)?;
    m.add_function(wrap_pyfunction!(f_structured, m)?)?;
    m.add_function(wrap_pyfunction!(fixture, m)?)?;
    m.add_function(wrap_pyfunction!(fixture_names, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce, m)?)?;
    Ok(())
}
