//! Python module `protosample_py`: containers, similarity maps, keyword
//! search, retrieval, region selection and the fixture sweep.

use protosample::captions::{keyword_search as search, KeywordQuery as CoreQuery};
use protosample::eval::{fixture_dataset, region_area_mm2 as area_mm2, run_sweep, sweep_csv, SweepSpec};
use protosample::io::{read_captions, read_grid_meta, read_mask, GridMeta, Region, Strategy};
use protosample::select::{
    kmeans as core_kmeans, otsu_threshold as core_otsu, select_adaptive, select_random, select_standard,
    SelectionConfig,
};
use protosample::{io, retrieval, simmap};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: protosample::Error) -> PyErr {
    match e {
        protosample::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn strategy(s: &str) -> PyResult<Strategy> {
    Strategy::parse(s).ok_or_else(|| PyValueError::new_err(format!("unknown strategy {s:?}")))
}

/// Row-major float32 matrix as stored in `.emb` files.
#[pyclass(name = "Container", module = "protosample_py")]
struct Container {
    inner: io::EmbeddingContainer,
}

#[pymethods]
impl Container {
    #[new]
    #[pyo3(signature = (rows, normalized = false))]
    fn new(rows: Vec<Vec<f32>>, normalized: bool) -> PyResult<Self> {
        let inner = io::EmbeddingContainer::from_rows(&rows, normalized).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: io::read_container(path).map_err(err)?,
        })
    }

    fn write(&self, path: &str) -> PyResult<()> {
        io::write_container(&self.inner, path).map_err(err)
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.rows(), self.inner.cols())
    }

    #[getter]
    fn normalized(&self) -> bool {
        self.inner.is_normalized()
    }

    fn row(&self, i: usize) -> PyResult<Vec<f32>> {
        if i >= self.inner.rows() {
            return Err(PyValueError::new_err(format!("row {i} out of range")));
        }
        Ok(self.inner.row(i).to_vec())
    }

    fn tolist(&self) -> Vec<Vec<f32>> {
        self.inner.iter_rows().map(<[f32]>::to_vec).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.rows()
    }

    fn __repr__(&self) -> String {
        format!("Container(rows={}, cols={})", self.inner.rows(), self.inner.cols())
    }
}

/// Per-cell similarity to a class, values in [0, 1].
#[pyclass(name = "SimilarityMap", module = "protosample_py")]
struct SimilarityMap {
    inner: simmap::SimilarityMap,
}

#[pymethods]
impl SimilarityMap {
    #[new]
    fn new(wsi_id: String, grid_h: usize, grid_w: usize, values: Vec<f32>) -> PyResult<Self> {
        Ok(Self {
            inner: simmap::SimilarityMap::from_values(wsi_id, grid_h, grid_w, values).map_err(err)?,
        })
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: simmap::read_map(path).map_err(err)?,
        })
    }

    /// Scores every cell of a grid against prototype embeddings.
    #[staticmethod]
    #[pyo3(signature = (grid_path, prototypes, tissue_mask_path = None))]
    fn build(grid_path: &str, prototypes: &Container, tissue_mask_path: Option<&str>) -> PyResult<Self> {
        let (grid, meta) = io::load_grid(grid_path, None).map_err(err)?;
        let rows: Vec<&[f32]> = prototypes.inner.iter_rows().collect();
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        let set = retrieval::build_prototype_set("class", &rows, ids).map_err(err)?;
        let mask = tissue_mask_path.map(read_mask).transpose().map_err(err)?;
        let (inner, _) = simmap::build_similarity_map(&grid, &meta, &set, mask.as_ref()).map_err(err)?;
        Ok(Self { inner })
    }

    fn write(&self, path: &str) -> PyResult<()> {
        simmap::write_map(&self.inner, path).map_err(err)
    }

    #[getter]
    fn wsi_id(&self) -> &str {
        self.inner.wsi_id()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.grid_h(), self.inner.grid_w())
    }

    fn values(&self) -> Vec<f32> {
        self.inner.values().to_vec()
    }

    /// `(y0, x0, y1, x1, sum)` of the best non-overlapping `side x side` windows.
    fn standard_windows(&self, side: usize, n: usize) -> PyResult<Vec<(usize, usize, usize, usize, f64)>> {
        let picks = protosample::select::standard_windows(&self.inner, side, n).map_err(err)?;
        Ok(picks.into_iter().map(|(b, s)| (b.y0, b.x0, b.y1, b.x1, s)).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "SimilarityMap({:?}, {}x{})",
            self.inner.wsi_id(),
            self.inner.grid_h(),
            self.inner.grid_w()
        )
    }
}

/// Caption filter: every `with` group must match, no `without` group may.
#[pyclass(name = "KeywordQuery", module = "protosample_py")]
struct KeywordQuery {
    inner: CoreQuery,
}

#[pymethods]
impl KeywordQuery {
    #[new]
    #[pyo3(signature = (with_groups, without_groups = Vec::new()))]
    fn new(with_groups: Vec<Vec<String>>, without_groups: Vec<Vec<String>>) -> PyResult<Self> {
        Ok(Self {
            inner: CoreQuery::new(with_groups, without_groups).map_err(err)?,
        })
    }

    fn matches(&self, caption: &str) -> bool {
        self.inner.matches(caption)
    }

    /// Ids of matching records in a JSON-lines corpus, in file order.
    fn search(&self, corpus_path: &str) -> PyResult<Vec<String>> {
        let corpus = read_captions(corpus_path).map_err(err)?;
        Ok(search(&corpus, &self.inner).into_iter().map(|r| r.id).collect())
    }
}

#[pyfunction]
fn l2_normalize(v: Vec<f32>) -> PyResult<Vec<f32>> {
    retrieval::l2_normalize(&v).map_err(err)
}

#[pyfunction]
fn cosine_similarity(a: Vec<f32>, b: Vec<f32>) -> PyResult<f64> {
    retrieval::cosine_similarity(&a, &b).map_err(err)
}

/// `(index, score)` of the `k` closest rows, best first.
#[pyfunction]
fn top_k_retrieval(query: Vec<f32>, database: &Container, k: usize) -> PyResult<Vec<(usize, f64)>> {
    retrieval::top_k_retrieval(&query, &database.inner, k).map_err(err)
}

#[pyfunction]
fn otsu_threshold(histogram: Vec<u64>) -> PyResult<usize> {
    let h: [u64; 256] = histogram
        .try_into()
        .map_err(|_| PyValueError::new_err("histogram needs 256 bins"))?;
    Ok(core_otsu(&h).map_err(err)?.threshold)
}

/// Returns `(assignments, inertia)`.
#[pyfunction]
#[pyo3(signature = (points, k, seed = 0, max_iters = 300, tol = 1e-4))]
fn kmeans(points: Vec<Vec<f64>>, k: usize, seed: u64, max_iters: usize, tol: f64) -> PyResult<(Vec<usize>, f64)> {
    let r = core_kmeans(&points, k, seed, max_iters, tol).map_err(err)?;
    Ok((r.assignments.clone(), r.inertia()))
}

#[pyfunction]
fn region_area_mm2(l_px: u64, mpp: f64) -> f64 {
    area_mm2(l_px, mpp)
}

fn region_dict<'py>(py: Python<'py>, r: &Region) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("wsi_id", &r.wsi_id)?;
    d.set_item("x_px", r.x_px)?;
    d.set_item("y_px", r.y_px)?;
    d.set_item("w_px", r.w_px)?;
    d.set_item("h_px", r.h_px)?;
    d.set_item("score", r.score)?;
    d.set_item("rank", r.rank)?;
    d.set_item("strategy", r.strategy.as_str())?;
    Ok(d)
}

/// Regions for one slide as dicts. Prototype strategies need `map`;
/// random sampling may take a tissue mask.
#[pyfunction]
#[pyo3(signature = (strategy_name, meta_path, n, l_px, seed = 0, map = None, tissue_mask_path = None))]
#[allow(clippy::too_many_arguments)]
fn select<'py>(
    py: Python<'py>,
    strategy_name: &str,
    meta_path: &str,
    n: usize,
    l_px: u64,
    seed: u64,
    map: Option<&SimilarityMap>,
    tissue_mask_path: Option<&str>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let s = strategy(strategy_name)?;
    let meta: GridMeta = read_grid_meta(meta_path).map_err(err)?;
    let cfg = SelectionConfig::new(s, n, l_px, seed);
    let need_map = || map.map(|m| &m.inner).ok_or_else(|| PyValueError::new_err("this strategy needs a map"));
    let sel = match s {
        Strategy::Random => {
            let mask = tissue_mask_path.map(read_mask).transpose().map_err(err)?;
            select_random(&meta, mask.as_ref(), &cfg)
        }
        Strategy::ProtoStandard => select_standard(need_map()?, &meta, &cfg),
        Strategy::ProtoAdaptive => select_adaptive(need_map()?, &meta, &cfg),
        Strategy::Diversity => {
            return Err(PyValueError::new_err("diversity spans several slides; use the CLI"));
        }
    }
    .map_err(err)?;
    sel.regions.iter().map(|r| region_dict(py, r)).collect()
}

/// Sweep over synthetic planted-blob slides; returns the CSV text.
#[pyfunction]
#[pyo3(signature = (fixture_seed, count, strategies, n_set, l_set, seeds))]
fn fixture_sweep(
    py: Python<'_>,
    fixture_seed: u64,
    count: usize,
    strategies: Vec<String>,
    n_set: Vec<usize>,
    l_set: Vec<u64>,
    seeds: Vec<u64>,
) -> PyResult<String> {
    let strategies = strategies.iter().map(|s| strategy(s)).collect::<PyResult<Vec<_>>>()?;
    let spec = SweepSpec::new(strategies, n_set, l_set, seeds);
    py.detach(|| {
        let data = fixture_dataset(fixture_seed, count)?;
        Ok(sweep_csv(&run_sweep(&data, &spec)?))
    })
    .map_err(err)
}

#[pymodule]
fn protosample_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Container>()?;
    m.add_class::<SimilarityMap>()?;
    m.add_class::<KeywordQuery>()?;
    m.add_function(wrap_pyfunction!(l2_normalize, m)?)?;
    m.add_function(wrap_pyfunction!(cosine_similarity, m)?)?;
    m.add_function(wrap_pyfunction!(top_k_retrieval, m)?)?;
    m.add_function(wrap_pyfunction!(otsu_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(kmeans, m)?)?;
    m.add_function(wrap_pyfunction!(region_area_mm2, m)?)?;
    m.add_function(wrap_pyfunction!(select, m)?)?;
    m.add_function(wrap_pyfunction!(fixture_sweep, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
