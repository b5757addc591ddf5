//! Python bindings. Polytopes are passed as lists of vertices and subspaces
//! as lists of spanning vectors.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use convex_valuations::io::parse_json;
use convex_valuations::membership::{decide_g, zonoid_witness, Verdict, WitnessOutcome};
use convex_valuations::radii::{successive_radii, RadiiOptions};
use convex_valuations::subspace::orthonormalize;
use convex_valuations::valuation::homogeneous_components;
use convex_valuations::{volumes, Polytope, RandomStream, Subspace, ValuationSpec, Vector};

fn err(e: convex_valuations::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn polytope(vertices: &[Vec<f64>]) -> PyResult<Polytope> {
    Polytope::from_vertex_lists(vertices).map_err(err)
}

fn subspace(span: &[Vec<f64>]) -> PyResult<Subspace> {
    let vs: Vec<Vector> = span.iter().map(|v| Vector::from_column_slice(v)).collect();
    orthonormalize(&vs).map_err(err)
}

/// Volume inside the ambient space (zero for lower-dimensional bodies).
#[pyfunction]
pub fn volume(vertices: Vec<Vec<f64>>) -> PyResult<f64> {
    Ok(polytope(&vertices)?.volume())
}

/// Number of faces of each dimension, the body itself last.
#[pyfunction]
pub fn face_counts(vertices: Vec<Vec<f64>>) -> PyResult<Vec<usize>> {
    Ok(polytope(&vertices)?.face_lattice().counts())
}

#[pyfunction]
pub fn intrinsic_volumes(vertices: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let p = polytope(&vertices)?;
    Ok((0..=p.ambient_dim()).map(|i| volumes::intrinsic_volume(&p, i)).collect())
}

#[pyfunction]
pub fn mixed_volume(bodies: Vec<Vec<Vec<f64>>>) -> PyResult<f64> {
    let ps = bodies.iter().map(|b| polytope(b)).collect::<PyResult<Vec<_>>>()?;
    volumes::mixed_volume(&ps).map_err(err)
}

#[pyfunction]
pub fn projection_volume(vertices: Vec<Vec<f64>>, span: Vec<Vec<f64>>) -> PyResult<f64> {
    volumes::projection_volume(&polytope(&vertices)?, &subspace(&span)?).map_err(err)
}

#[pyfunction]
pub fn cos_angle(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> PyResult<f64> {
    subspace(&a)?.cos_angle(&subspace(&b)?).map_err(err)
}

/// Klain function of a JSON valuation spec at `span`.
#[pyfunction]
pub fn klain(spec_json: &str, span: Vec<Vec<f64>>) -> PyResult<f64> {
    let spec: ValuationSpec = parse_json(spec_json, "spec").map_err(err)?;
    let e = subspace(&span)?;
    spec.validate(e.ambient_dim()).map_err(err)?;
    spec.klain(&e).map_err(err)
}

/// Homogeneous components `phi_0(K), ..., phi_n(K)`.
#[pyfunction]
pub fn decompose(spec_json: &str, vertices: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let spec: ValuationSpec = parse_json(spec_json, "spec").map_err(err)?;
    let p = polytope(&vertices)?;
    spec.validate(p.ambient_dim()).map_err(err)?;
    Ok(homogeneous_components(&|k| spec.evaluate(k), &p).map_err(err)?.values)
}

/// `(member, number of violating faces)` for the class `G(i)`.
#[pyfunction]
pub fn membership(vertices: Vec<Vec<f64>>, i: usize) -> PyResult<(bool, usize)> {
    let cert = decide_g(&polytope(&vertices)?, i).map_err(err)?;
    Ok((cert.verdict == Verdict::Member, cert.violating_faces.map_or(0, |f| f.len())))
}

/// LP objective of the separating witness, or `None` when none exists on the grid.
#[pyfunction]
#[pyo3(signature = (vertices, grid=240))]
pub fn witness_objective(vertices: Vec<Vec<f64>>, grid: usize) -> PyResult<Option<f64>> {
    match zonoid_witness(&polytope(&vertices)?, grid).map_err(err)? {
        WitnessOutcome::Found(w) => Ok(Some(w.objective)),
        WitnessOutcome::NoneFound { .. } => Ok(None),
    }
}

/// Sampled `(R_i upper bound, r_i lower bound)`.
#[pyfunction]
#[pyo3(signature = (vertices, i, seed, samples=10_000))]
pub fn radii(vertices: Vec<Vec<f64>>, i: usize, seed: u64, samples: usize) -> PyResult<(f64, f64)> {
    let opts = RadiiOptions { samples, ..RadiiOptions::default() };
    let r = successive_radii(&polytope(&vertices)?, i, opts, &RandomStream::new(seed)).map_err(err)?;
    Ok((r.r_upper, r.r_lower))
}

#[pymodule]
fn convex_valuations_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(volume, m)?)?;
    m.add_function(wrap_pyfunction!(face_counts, m)?)?;
    m.add_function(wrap_pyfunction!(intrinsic_volumes, m)?)?;
    m.add_function(wrap_pyfunction!(mixed_volume, m)?)?;
    m.add_function(wrap_pyfunction!(projection_volume, m)?)?;
    m.add_function(wrap_pyfunction!(cos_angle, m)?)?;
    m.add_function(wrap_pyfunction!(klain, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(membership, m)?)?;
    m.add_function(wrap_pyfunction!(witness_objective, m)?)?;
    m.add_function(wrap_pyfunction!(radii, m)?)?;
    Ok(())
}
