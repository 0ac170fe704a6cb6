//! Python bindings. Point indices are 0-based, cluster labels 1-based, and
//! the root's nearest-denser neighbour is `None`.

use leading_tree::hierarchy::{Hierarchy, Layer};
use leading_tree::prelude::*;
use leading_tree::Error;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn kernel(name: &str) -> PyResult<Kernel> {
    name.parse().map_err(py_err)
}

#[pyclass(name = "Dataset", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyDataset {
    inner: Dataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    #[pyo3(signature = (points, labels=None))]
    fn new(points: Vec<Vec<f64>>, labels: Option<Vec<usize>>) -> PyResult<Self> {
        Dataset::new(points, labels)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn labels(&self) -> Option<Vec<usize>> {
        self.inner.labels().map(<[usize]>::to_vec)
    }

    fn points(&self) -> Vec<Vec<f64>> {
        self.inner.points().map(<[f64]>::to_vec).collect()
    }

    fn write_csv(&self, path: &str) -> PyResult<()> {
        write_points_csv(path, &self.inner).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Dataset(n={}, dim={})", self.inner.len(), self.inner.dim())
    }
}

#[pyclass(name = "DistanceMatrix", frozen)]
pub struct PyDistanceMatrix {
    inner: CondensedDistanceMatrix,
}

#[pymethods]
impl PyDistanceMatrix {
    #[staticmethod]
    fn from_points(dataset: &PyDataset) -> PyResult<Self> {
        pairwise_distances(&dataset.inner)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    #[staticmethod]
    fn from_square(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        CondensedDistanceMatrix::from_square(&rows)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    #[staticmethod]
    fn read_csv(path: &str) -> PyResult<Self> {
        CondensedDistanceMatrix::read_csv(path)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn get(&self, i: usize, j: usize) -> PyResult<f64> {
        let n = self.inner.n();
        if i >= n || j >= n {
            return Err(PyValueError::new_err(format!(
                "index out of range for {n} objects"
            )));
        }
        Ok(self.inner.get(i, j))
    }

    /// Distance at the given percentile of all pairs.
    #[pyo3(signature = (percent=2.0))]
    fn estimate_dc(&self, percent: f64) -> PyResult<f64> {
        estimate_dc(&self.inner, percent).map_err(py_err)
    }
}

#[derive(FromPyObject)]
enum Source<'py> {
    Points(PyRef<'py, PyDataset>),
    Matrix(PyRef<'py, PyDistanceMatrix>),
}

#[pyclass(name = "PeakProfile", frozen)]
pub struct PyPeakProfile {
    inner: PeakProfile,
}

#[pymethods]
impl PyPeakProfile {
    /// `source` is a `Dataset` or a `DistanceMatrix`. An explicit `dc`
    /// overrides `dc_percent`.
    #[new]
    #[pyo3(signature = (source, kernel="gaussian", dc_percent=2.0, dc=None))]
    fn new(source: Source<'_>, kernel: &str, dc_percent: f64, dc: Option<f64>) -> PyResult<Self> {
        let kernel = self::kernel(kernel)?;
        let owned;
        let d = match &source {
            Source::Points(ds) => {
                owned = pairwise_distances(&ds.inner).map_err(py_err)?;
                &owned
            }
            Source::Matrix(m) => &m.inner,
        };
        let dc = match dc {
            Some(dc) => dc,
            None => estimate_dc(d, dc_percent).map_err(py_err)?,
        };
        let rho = local_density(d, kernel, dc).map_err(py_err)?;
        PeakProfile::compute(d, rho)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn rho(&self) -> Vec<f64> {
        self.inner.rho().to_vec()
    }

    #[getter]
    fn delta(&self) -> Vec<f64> {
        self.inner.delta().to_vec()
    }

    #[getter]
    fn nn(&self) -> Vec<Option<usize>> {
        self.inner.nn().to_vec()
    }

    #[getter]
    fn gamma(&self) -> Vec<f64> {
        self.inner.gamma().to_vec()
    }

    /// Indices by descending density.
    #[getter]
    fn q(&self) -> Vec<usize> {
        self.inner.q().to_vec()
    }

    #[getter]
    fn gamma_order(&self) -> Vec<usize> {
        self.inner.gamma_order().to_vec()
    }

    #[getter]
    fn root(&self) -> usize {
        self.inner.root()
    }

    #[getter]
    fn dc(&self) -> f64 {
        self.inner.density().dc
    }

    #[getter]
    fn kernel(&self) -> String {
        self.inner.density().kernel.to_string()
    }

    /// The `m` highest-gamma points.
    fn select_centers(&self, m: usize) -> PyResult<Vec<usize>> {
        select_centers(self.inner.gamma_order(), m)
            .map(CenterSet::into_vec)
            .map_err(py_err)
    }

    /// Labels by propagating along nearest-denser links in density order.
    fn assign_baseline(&self, centers: Vec<usize>) -> PyResult<Vec<usize>> {
        let centers = CenterSet::new(centers, self.inner.len()).map_err(py_err)?;
        assign_baseline(self.inner.nn(), self.inner.q(), &centers).map_err(py_err)
    }

    fn write_csv(&self, path: &str) -> PyResult<()> {
        self.inner.write_csv(path).map_err(py_err)
    }
}

#[pyclass(name = "LeadingTree", frozen)]
pub struct PyLeadingTree {
    inner: LeadingTree,
}

#[pymethods]
impl PyLeadingTree {
    #[new]
    fn new(profile: &PyPeakProfile) -> Self {
        Self {
            inner: LeadingTree::from_profile(&profile.inner),
        }
    }

    /// Builds and validates a tree from a raw parent array.
    #[staticmethod]
    fn from_parents(parents: Vec<Option<usize>>, gamma_order: Vec<usize>) -> PyResult<Self> {
        LeadingTree::build(&parents, &gamma_order)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn root(&self) -> usize {
        self.inner.root()
    }

    #[getter]
    fn parents(&self) -> Vec<Option<usize>> {
        self.inner.parents().to_vec()
    }

    fn children(&self, i: usize) -> PyResult<Vec<usize>> {
        if i >= self.inner.len() {
            return Err(PyValueError::new_err(format!("node {i} out of range")));
        }
        Ok(self.inner.children(i).to_vec())
    }

    #[getter]
    fn gamma_order(&self) -> Vec<usize> {
        self.inner.gamma_order().to_vec()
    }

    /// Splits into `len(centers)` clusters by cutting each center from its parent.
    #[pyo3(signature = (centers, mode="prefix"))]
    fn split(slf: &Bound<'_, Self>, centers: Vec<usize>, mode: &str) -> PyResult<PyClusterForest> {
        let mode = match mode {
            "prefix" | "prefix_fast" => SplitMode::PrefixFast,
            "general" => SplitMode::General,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown mode {other:?}, expected \"prefix\" or \"general\""
                )))
            }
        };
        let tree = &slf.get().inner;
        let centers = CenterSet::new(centers, tree.len()).map_err(py_err)?;
        let forest = split(tree, &centers, mode).map_err(py_err)?;
        let (labels, depths) = forest.labels_and_depths();
        Ok(PyClusterForest {
            tree: slf.clone().unbind(),
            centers,
            mode,
            cuts: forest.cuts().to_vec(),
            labels,
            depths,
        })
    }

    /// Nested labelings for strictly ascending center counts.
    fn hierarchy(&self, counts: Vec<usize>) -> PyResult<Vec<(usize, Vec<usize>)>> {
        let h = build_hierarchy(&self.inner, &counts).map_err(py_err)?;
        Ok(h.layers
            .into_iter()
            .map(|l| (l.centers, l.labels))
            .collect())
    }
}

#[pyclass(name = "ClusterForest", frozen)]
pub struct PyClusterForest {
    tree: Py<PyLeadingTree>,
    centers: CenterSet,
    mode: SplitMode,
    cuts: Vec<(usize, usize)>,
    labels: Vec<usize>,
    depths: Vec<usize>,
}

impl PyClusterForest {
    fn with_forest<R>(
        &self,
        py: Python<'_>,
        f: impl FnOnce(&ClusterForest<'_>) -> R,
    ) -> PyResult<R> {
        let tree = &self.tree.bind(py).get().inner;
        let forest = split(tree, &self.centers, self.mode).map_err(py_err)?;
        Ok(f(&forest))
    }
}

#[pymethods]
impl PyClusterForest {
    #[getter]
    fn centers(&self) -> Vec<usize> {
        self.centers.to_vec()
    }

    /// Removed `(parent, center)` edges.
    #[getter]
    fn cuts(&self) -> Vec<(usize, usize)> {
        self.cuts.clone()
    }

    #[getter]
    fn labels(&self) -> Vec<usize> {
        self.labels.clone()
    }

    /// Parent hops from each point to its cluster center.
    #[getter]
    fn depths(&self) -> Vec<usize> {
        self.depths.clone()
    }

    fn members(&self, py: Python<'_>, label: usize) -> PyResult<Vec<usize>> {
        self.with_forest(py, |f| f.members(label))
    }

    fn to_dot(&self, py: Python<'_>) -> PyResult<String> {
        self.with_forest(py, |f| f.to_dot())
    }

    fn write_parents_csv(&self, py: Python<'_>, path: &str) -> PyResult<()> {
        self.with_forest(py, |f| f.write_parents_csv(path))?
            .map_err(py_err)
    }
}

/// First `(layer, i, j)` where points `i` and `j` share a cluster on
/// `layer` but not on the layer before, or `None` if the layers nest.
#[pyfunction(name = "check_refinement")]
fn py_check_refinement(layers: Vec<Vec<usize>>) -> Option<(usize, usize, usize)> {
    let h = Hierarchy {
        layers: layers
            .into_iter()
            .map(|labels| Layer {
                centers: labels.iter().copied().max().unwrap_or(0),
                labels,
            })
            .collect(),
    };
    leading_tree::hierarchy::check_refinement(&h)
        .err()
        .map(|v| (v.layer, v.points.0, v.points.1))
}

#[pyfunction(name = "adjusted_rand_index")]
fn py_adjusted_rand_index(a: Vec<usize>, b: Vec<usize>) -> PyResult<f64> {
    leading_tree::hierarchy::adjusted_rand_index(&a, &b).map_err(py_err)
}

/// Smallest layer count at which building the tree once beats per-layer assignment.
#[pyfunction]
fn break_even_layers(t_construct: f64, t_assign: f64, t_split: f64) -> Option<u64> {
    leading_tree::bench::break_even_layers(t_construct, t_assign, t_split)
}

#[pyfunction]
#[pyo3(signature = (n_points=2200, seed=42))]
fn five_spherical(n_points: usize, seed: u64) -> PyResult<PyDataset> {
    let p = SphereParams {
        n_points,
        seed,
        ..Default::default()
    };
    gen_five_spherical(&p)
        .map(|inner| PyDataset { inner })
        .map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (n_points=1060, seed=42))]
fn five_spiral(n_points: usize, seed: u64) -> PyResult<PyDataset> {
    let p = SpiralParams {
        n_points,
        seed,
        ..Default::default()
    };
    gen_five_spiral(&p)
        .map(|inner| PyDataset { inner })
        .map_err(py_err)
}

#[pyfunction(name = "load_ecoli")]
fn py_load_ecoli(path: &str) -> PyResult<PyDataset> {
    load_ecoli(path)
        .map(|inner| PyDataset { inner })
        .map_err(py_err)
}

#[pyfunction(name = "read_points_csv")]
#[pyo3(signature = (path, has_header=true))]
fn py_read_points_csv(path: &str, has_header: bool) -> PyResult<PyDataset> {
    read_points_csv(path, has_header)
        .map(|inner| PyDataset { inner })
        .map_err(py_err)
}

#[pymodule]
pub fn ltree_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyDistanceMatrix>()?;
    m.add_class::<PyPeakProfile>()?;
    m.add_class::<PyLeadingTree>()?;
    m.add_class::<PyClusterForest>()?;
    m.add_function(wrap_pyfunction!(py_check_refinement, m)?)?;
    m.add_function(wrap_pyfunction!(py_adjusted_rand_index, m)?)?;
    m.add_function(wrap_pyfunction!(break_even_layers, m)?)?;
    m.add_function(wrap_pyfunction!(five_spherical, m)?)?;
    m.add_function(wrap_pyfunction!(five_spiral, m)?)?;
    m.add_function(wrap_pyfunction!(py_load_ecoli, m)?)?;
    m.add_function(wrap_pyfunction!(py_read_points_csv, m)?)?;
    Ok(())
}
