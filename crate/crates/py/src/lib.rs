//! Python bindings. Reports from the sweeps come back as JSON text.

use num_bigint::BigInt;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use arbiterlab_core::arbiters::{check_power_axioms, PowerAxiomConfig};
use arbiterlab_core::complexes::{self, homology};
use arbiterlab_core::dyadic::{self, ModelPiece, Multiindex};
use arbiterlab_core::milnor::{self, DoublingPattern, LinkPresentation, RelationSystem};
use arbiterlab_core::percolation::{crossing_bound_experiment, AxisMode, ExperimentConfig};
use arbiterlab_core::{BitVector, CellComplex as Complex};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_json(v: &impl serde::Serialize) -> PyResult<String> {
    serde_json::to_string(v).map_err(value_error)
}

fn bits(v: &[u8]) -> BitVector {
    BitVector::from_indices(v.len(), (0..v.len()).filter(|&i| v[i] & 1 == 1))
}

#[pyclass(module = "arbiterlab")]
struct BitMatrix {
    inner: arbiterlab_core::BitMatrix,
}

#[pymethods]
impl BitMatrix {
    #[new]
    fn new(rows: Vec<Vec<u8>>) -> PyResult<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(value_error("rows must have equal length"));
        }
        let inner = arbiterlab_core::BitMatrix::from_rows(cols, rows.iter().map(|r| bits(r)).collect())
            .map_err(value_error)?;
        Ok(BitMatrix { inner })
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.rows(), self.inner.cols())
    }

    fn rank(&self) -> usize {
        self.inner.rank()
    }

    fn in_column_space(&self, v: Vec<u8>) -> PyResult<bool> {
        self.inner.in_column_space(&bits(&v)).map_err(value_error)
    }

    fn kernel(&self) -> Vec<Vec<u32>> {
        self.inner
            .kernel_basis()
            .iter()
            .map(|k| (0..k.len()).map(|i| u32::from(k.get(i))).collect())
            .collect()
    }
}

#[pyclass(module = "arbiterlab")]
struct CellComplex {
    inner: Complex,
}

#[pymethods]
impl CellComplex {
    #[staticmethod]
    fn rp2() -> Self {
        CellComplex {
            inner: complexes::build_rp2(),
        }
    }

    #[staticmethod]
    fn s2() -> Self {
        CellComplex {
            inner: complexes::build_s2(),
        }
    }

    #[staticmethod]
    fn rp3() -> Self {
        CellComplex {
            inner: complexes::build_rp3(),
        }
    }

    #[staticmethod]
    fn torus(n: usize) -> PyResult<Self> {
        let inner = complexes::build_torus_grid(n).map_err(value_error)?;
        Ok(CellComplex { inner })
    }

    #[staticmethod]
    fn cube_grid(d: usize, n: usize) -> PyResult<Self> {
        let inner = complexes::build_cube_grid(d, n).map_err(value_error)?;
        Ok(CellComplex { inner })
    }

    #[staticmethod]
    fn generic_cube(d: usize, n: usize) -> PyResult<Self> {
        let inner = complexes::generic_cube(d, n).map_err(value_error)?.complex;
        Ok(CellComplex { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn counts(&self) -> Vec<usize> {
        self.inner.counts()
    }

    fn euler_characteristic(&self) -> i64 {
        self.inner.euler_characteristic()
    }

    fn boundary_squared_is_zero(&self) -> bool {
        self.inner.boundary_squared_is_zero()
    }

    /// Z/2 Betti numbers in every degree.
    fn betti(&self) -> PyResult<Vec<usize>> {
        (0..=self.inner.dim())
            .map(|k| homology(&self.inner, k).map(|h| h.dimension).map_err(value_error))
            .collect()
    }

    fn to_json(&self) -> PyResult<String> {
        to_json(&self.inner.to_json())
    }
}

#[pyclass(module = "arbiterlab", eq, ord, hash, frozen)]
#[derive(PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Ray {
    inner: dyadic::Ray,
}

#[pymethods]
impl Ray {
    /// `stem:period`, e.g. `10:01`.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Ray {
            inner: text.parse().map_err(value_error)?,
        })
    }

    fn letter(&self, n: usize) -> u8 {
        self.inner.letter(n)
    }

    fn prefix(&self, len: usize) -> String {
        self.inner.prefix(len).to_string()
    }

    /// Value of the partial arbiter on a piece such as `A_10` or `B_1`.
    fn value(&self, piece: &str) -> PyResult<u8> {
        let p: ModelPiece = piece.parse().map_err(value_error)?;
        Ok(dyadic::partial_arbiter(&self.inner, &p)
            .map_err(value_error)?
            .bit())
    }

    fn distinguish(&self, other: &Ray) -> PyResult<String> {
        Ok(dyadic::distinguish_rays(&self.inner, &other.inner)
            .map_err(value_error)?
            .to_string())
    }

    fn greedy_consistency(&self, depth: usize) -> PyResult<String> {
        to_json(&dyadic::check_greedy_consistency(&self.inner, depth).map_err(value_error)?)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Ray('{}')", self.inner)
    }
}

/// -1, 0 or 1 as the first word sorts before, with or after the second;
/// a proper prefix sorts first.
#[pyfunction]
fn lex_compare(a: &str, b: &str) -> PyResult<i8> {
    let (i, j): (Multiindex, Multiindex) = (a.parse().map_err(value_error)?, b.parse().map_err(value_error)?);
    Ok(dyadic::lex_compare(&i, &j) as i8)
}

#[pyclass(module = "arbiterlab")]
struct Link {
    inner: LinkPresentation,
}

#[pymethods]
impl Link {
    /// One `meridian: longitude` line per component.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Link {
            inner: text.parse().map_err(value_error)?,
        })
    }

    #[staticmethod]
    fn hopf() -> Self {
        Link {
            inner: LinkPresentation::hopf(),
        }
    }

    /// The link of a doubling pattern such as `(H (d 1))`.
    #[staticmethod]
    fn from_pattern(pattern: &str) -> PyResult<Self> {
        let p: DoublingPattern = pattern.parse().map_err(value_error)?;
        Ok(Link {
            inner: p.build().map_err(value_error)?.link,
        })
    }

    fn meridians(&self) -> Vec<usize> {
        self.inner.meridians()
    }

    fn bing_double(&self, component: usize) -> PyResult<Link> {
        Ok(Link {
            inner: milnor::bing_double(&self.inner, component).map_err(value_error)?,
        })
    }

    #[pyo3(signature = (seq, q=None))]
    fn mu(&self, seq: Vec<usize>, q: Option<usize>) -> PyResult<BigInt> {
        let q = q.unwrap_or(seq.len().saturating_sub(1));
        milnor::mu_bar(&self.inner, &seq, q).map_err(value_error)
    }

    /// The first nonzero non-repeating invariant as `(sequence, value)`.
    #[pyo3(signature = (q=None))]
    fn first_nonzero_invariant(&self, q: Option<usize>) -> PyResult<(Vec<usize>, i64)> {
        let q = q.unwrap_or(self.inner.len().saturating_sub(1).max(1));
        let c = milnor::first_nonzero_invariant(&self.inner, q).map_err(value_error)?;
        Ok((c.sequence, c.value))
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }
}

/// Magnus coefficients of a word like `m1 m2 M1 M2`, keyed by monomial.
#[pyfunction]
fn magnus_expand(word: &str, q: usize) -> PyResult<Vec<(Vec<usize>, BigInt)>> {
    let w: milnor::GroupWord = word.parse().map_err(value_error)?;
    let s = milnor::magnus_expand(&w, q).map_err(value_error)?;
    Ok(s.terms().map(|(m, c)| (m.clone(), c.clone())).collect())
}

#[pyfunction]
#[pyo3(signature = (pattern, q=None))]
fn essentiality_certificate(pattern: &str, q: Option<usize>) -> PyResult<(Vec<usize>, i64)> {
    let p: DoublingPattern = pattern.parse().map_err(value_error)?;
    let q = q.unwrap_or(p.component_count().saturating_sub(1).max(1));
    let c = milnor::essentiality_certificate(&p, q).map_err(value_error)?;
    Ok((c.sequence, c.value))
}

/// Whether the target survives the Bing-cell quotient with extra commuting
/// pairs; returns the verdict and a surviving monomial.
#[pyfunction]
#[pyo3(signature = (commute=Vec::new(), target=None, q=4))]
fn bing_cell_quotient(
    commute: Vec<(usize, usize)>,
    target: Option<&str>,
    q: usize,
) -> PyResult<(bool, Option<Vec<usize>>)> {
    let mut rel = RelationSystem::bing_cell_pair();
    for (i, j) in commute {
        rel.add_commuting(i, j);
    }
    let target = match target {
        Some(t) => t.parse().map_err(value_error)?,
        None => RelationSystem::bing_cell_target(),
    };
    let v = milnor::quotient_nonvanishing(&rel, &target, q).map_err(value_error)?;
    Ok((v.nonzero, v.witness))
}

#[pyfunction]
fn power_axioms(d: usize, n: usize, samples: usize, seed: u64) -> PyResult<String> {
    let cfg = PowerAxiomConfig::new(d, n, samples, seed);
    to_json(&check_power_axioms(&cfg).map_err(value_error)?)
}

#[pyfunction]
#[pyo3(signature = (d, intensity, samples, seed, k=None, any_axis=false))]
fn crossing_experiment(
    d: usize,
    intensity: f64,
    samples: usize,
    seed: u64,
    k: Option<usize>,
    any_axis: bool,
) -> PyResult<String> {
    let mut cfg = ExperimentConfig::new(d, intensity, samples, seed);
    cfg.k = k.unwrap_or(d);
    if any_axis {
        cfg.axis_mode = AxisMode::Any;
    }
    to_json(&crossing_bound_experiment(&cfg).map_err(value_error)?)
}

#[pymodule]
fn arbiterlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<BitMatrix>()?;
    m.add_class::<CellComplex>()?;
    m.add_class::<Ray>()?;
    m.add_class::<Link>()?;
    m.add_function(wrap_pyfunction!(lex_compare, m)?)?;
    m.add_function(wrap_pyfunction!(magnus_expand, m)?)?;
    m.add_function(wrap_pyfunction!(essentiality_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(bing_cell_quotient, m)?)?;
    m.add_function(wrap_pyfunction!(power_axioms, m)?)?;
    m.add_function(wrap_pyfunction!(crossing_experiment, m)?)?;
    Ok(())
}
