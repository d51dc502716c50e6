use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sqz::adaptive::LengthHint;
use sqz::bounded::{self, Lambda, Slack};
use sqz::container::{self, Codec};
use sqz::harness::{self, StreamAccount, StreamProcessor};
use sqz::{bwt, comparison_sorter, online_sorter, text_stats, Symbol};

create_exception!(pysqz, CorruptError, PyValueError, "Raised when a stream or container is damaged.");

fn err(e: sqz::Error) -> PyErr {
    if e.is_corruption() {
        CorruptError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn max_sigma(s: &[Symbol]) -> u32 {
    s.iter().max().map_or(1, |&m| m + 1)
}

#[pyfunction]
#[pyo3(signature = (symbols, sigma=None))]
fn h0(symbols: Vec<Symbol>, sigma: Option<u32>) -> PyResult<f64> {
    let sigma = sigma.unwrap_or_else(|| max_sigma(&symbols));
    text_stats::FrequencyTable::from_symbols(&symbols, sigma as usize)
        .and_then(|t| t.h0())
        .map_err(err)
}

#[pyfunction]
fn hk(symbols: Vec<Symbol>, k: usize) -> PyResult<f64> {
    text_stats::hk(&symbols, k).map_err(err)
}

#[pyfunction]
fn gen_debruijn(k: u32) -> PyResult<Vec<u8>> {
    text_stats::gen_debruijn(k).map_err(err)
}

#[pyclass(frozen, name = "BoundedParams")]
struct PyBoundedParams {
    inner: bounded::BoundedParams,
}

#[pymethods]
impl PyBoundedParams {
    #[new]
    #[pyo3(signature = (sigma, lambda_=1.0, k=0, mu=1.0))]
    fn new(sigma: u32, lambda_: f64, k: u32, mu: f64) -> PyResult<Self> {
        Ok(Self {
            inner: bounded::BoundedParams::new(sigma, lambda_, k, mu).map_err(err)?,
        })
    }

    #[getter]
    fn sigma(&self) -> u32 {
        self.inner.sigma
    }

    #[getter]
    fn outer_block_len(&self) -> usize {
        self.inner.outer_block_len()
    }

    #[getter]
    fn precision_bits(&self) -> u32 {
        self.inner.precision_bits()
    }

    #[getter]
    fn state_size_bits(&self) -> u64 {
        self.inner.state_size_bits()
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "BoundedParams(sigma={}, lambda_={}, k={}, mu={})",
            p.sigma,
            p.lambda.value(),
            p.k,
            p.mu.value()
        )
    }
}

/// Streaming adaptive coder; call `push` per symbol, then `finish`.
#[pyclass(name = "AdaptiveEncoder")]
struct PyAdaptiveEncoder {
    inner: Option<harness::AdaptiveProcessor>,
}

#[pymethods]
impl PyAdaptiveEncoder {
    #[new]
    #[pyo3(signature = (sigma, n=None))]
    fn new(sigma: usize, n: Option<u64>) -> PyResult<Self> {
        let hint = n.map_or(LengthHint::Unknown, LengthHint::Known);
        Ok(Self {
            inner: Some(harness::AdaptiveProcessor::new(sigma, hint).map_err(err)?),
        })
    }

    fn push(&mut self, symbol: Symbol) -> PyResult<()> {
        self.live()?.on_symbol(symbol).map_err(err)
    }

    fn state_size_bits(&mut self) -> PyResult<u64> {
        Ok(self.live()?.state_size_bits())
    }

    /// Returns `(payload bytes, bit length)`.
    fn finish(&mut self) -> PyResult<(Vec<u8>, u64)> {
        let p = self
            .inner
            .take()
            .ok_or_else(|| PyValueError::new_err("encoder already finished"))?;
        let bits = p.finish().map_err(err)?;
        Ok((bits.to_bytes(), bits.len()))
    }
}

impl PyAdaptiveEncoder {
    fn live(&mut self) -> PyResult<&mut harness::AdaptiveProcessor> {
        self.inner
            .as_mut()
            .ok_or_else(|| PyValueError::new_err("encoder already finished"))
    }
}

#[pyfunction]
#[pyo3(signature = (payload, bit_len, sigma, n, known_length=true))]
fn adaptive_decode(payload: &[u8], bit_len: u64, sigma: usize, n: u64, known_length: bool) -> PyResult<Vec<Symbol>> {
    let hint = if known_length { LengthHint::Known(n) } else { LengthHint::Unknown };
    let bits = sqz::bitio::BitSink::from_bytes(payload, bit_len).map_err(err)?;
    sqz::adaptive::decode_stream(&bits, sigma, n, hint).map_err(err)
}

/// One-pass gap-list sorter.
#[pyclass(name = "GapListSorter")]
struct PyGapListSorter {
    inner: Option<online_sorter::GapListSet>,
}

#[pymethods]
impl PyGapListSorter {
    #[new]
    fn new() -> Self {
        Self {
            inner: Some(online_sorter::GapListSet::new()),
        }
    }

    fn push(&mut self, symbol: Symbol) -> PyResult<()> {
        self.live()?.push(symbol).map_err(err)
    }

    fn state_size_bits(&mut self) -> PyResult<u64> {
        Ok(self.live()?.state_size_bits())
    }

    /// Returns the 1-based stable sorting permutation.
    fn finish(&mut self) -> PyResult<Vec<u64>> {
        let set = self
            .inner
            .take()
            .ok_or_else(|| PyValueError::new_err("sorter already finished"))?;
        set.finalize().and_then(|f| f.permutation()).map_err(err)
    }
}

impl PyGapListSorter {
    fn live(&mut self) -> PyResult<&mut online_sorter::GapListSet> {
        self.inner
            .as_mut()
            .ok_or_else(|| PyValueError::new_err("sorter already finished"))
    }
}

#[pyfunction]
fn sort_permutation(symbols: Vec<Symbol>) -> PyResult<Vec<u64>> {
    online_sorter::sort_permutation(&symbols)
        .and_then(|f| f.permutation())
        .map_err(err)
}

/// Returns `(permutation, comparisons)` from the weighted search tree sorter.
#[pyfunction]
fn sort_comparisons(symbols: Vec<Symbol>) -> (Vec<u64>, u64) {
    comparison_sorter::sort_counting(symbols)
}

/// Quantized probabilities for the empirical distribution given by `counts`.
#[pyfunction]
#[pyo3(signature = (counts, lambda_=1.0, mu=1.0))]
fn quantize(counts: Vec<u64>, lambda_: f64, mu: f64) -> PyResult<Vec<f64>> {
    let q = bounded::quantize(
        &counts,
        Lambda::from_f64(lambda_).map_err(err)?,
        Slack::from_f64(mu).map_err(err)?,
    )
    .map_err(err)?;
    Ok((0..counts.len() as Symbol).map(|s| q.probability(s)).collect())
}

/// BWT with the sentinel written as `sigma`.
#[pyfunction]
fn bwt_transform(symbols: Vec<Symbol>, sigma: u32) -> PyResult<Vec<Symbol>> {
    Ok(bwt::bwt(&symbols, sigma).map_err(err)?.into_symbols())
}

#[pyfunction]
fn bwt_inverse(transformed: Vec<Symbol>, sigma: u32) -> PyResult<Vec<Symbol>> {
    let t = bwt::BwtString::new(transformed, sigma).map_err(err)?;
    bwt::ibwt(&t).map_err(err)
}

#[pyfunction]
fn mtf_encode(symbols: Vec<Symbol>, sigma: u32) -> PyResult<Vec<u32>> {
    bwt::mtf_encode(&symbols, sigma).map_err(err)
}

#[pyfunction]
fn mtf_decode(indices: Vec<u32>, sigma: u32) -> PyResult<Vec<Symbol>> {
    bwt::mtf_decode(&indices, sigma).map_err(err)
}

fn codec_from(
    name: &str,
    sigma: u32,
    lambda_: f64,
    k: u32,
    mu: f64,
    unknown_length: bool,
) -> PyResult<Codec> {
    Ok(match name {
        "adaptive" => Codec::Adaptive { unknown_length },
        "bounded" => Codec::Bounded(bounded::BoundedParams::new(sigma, lambda_, k, mu).map_err(err)?),
        "bwt" => Codec::Bwt,
        "gaplists" => Codec::GapLists,
        other => return Err(PyValueError::new_err(format!("unknown codec {other:?}"))),
    })
}

/// Packs `symbols` into a container.
#[pyfunction]
#[pyo3(signature = (symbols, sigma=None, codec="adaptive", lambda_=1.0, k=0, mu=1.0, unknown_length=false))]
fn encode(
    symbols: Vec<Symbol>,
    sigma: Option<u32>,
    codec: &str,
    lambda_: f64,
    k: u32,
    mu: f64,
    unknown_length: bool,
) -> PyResult<Vec<u8>> {
    let sigma = sigma.unwrap_or_else(|| max_sigma(&symbols));
    let codec = codec_from(codec, sigma, lambda_, k, mu, unknown_length)?;
    container::encode_container(codec, &symbols, sigma).map_err(err)
}

/// Unpacks a container into `(codec name, sigma, symbols)`.
#[pyfunction]
fn decode(data: &[u8]) -> PyResult<(&'static str, u32, Vec<Symbol>)> {
    let (header, symbols) = container::decode_container(data).map_err(err)?;
    Ok((header.codec.id().name(), header.sigma, symbols))
}

fn account_dict<'py>(py: Python<'py>, a: &StreamAccount) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("codec", &a.codec)?;
    d.set_item("n", a.n)?;
    d.set_item("passes", a.passes)?;
    d.set_item("polls", a.polls)?;
    d.set_item("peak_state_bits", a.peak_state_bits)?;
    d.set_item("peak_resident_block_bits", a.peak_resident_block_bits)?;
    Ok(d)
}

/// Runs a one-pass processor over `symbols` and returns its account.
#[pyfunction]
#[pyo3(signature = (symbols, processor="adaptive", sigma=None, lambda_=1.0, k=0, mu=1.0))]
fn audit<'py>(
    py: Python<'py>,
    symbols: Vec<Symbol>,
    processor: &str,
    sigma: Option<u32>,
    lambda_: f64,
    k: u32,
    mu: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let sigma = sigma.unwrap_or_else(|| max_sigma(&symbols));
    let n = symbols.len() as u64;
    let account = match processor {
        "adaptive" => {
            let p = harness::AdaptiveProcessor::new(sigma as usize, LengthHint::Known(n)).map_err(err)?;
            harness::run_one_pass(p, symbols).map_err(err)?.1
        }
        "bounded" => {
            let params = bounded::BoundedParams::new(sigma, lambda_, k, mu).map_err(err)?;
            harness::run_one_pass(harness::BoundedProcessor::new(params), symbols)
                .map_err(err)?
                .1
        }
        "gaplists" => harness::run_one_pass(harness::GapListProcessor::new(), symbols).map_err(err)?.1,
        "sortcmp" => harness::run_one_pass(harness::ComparisonProcessor::new(), symbols).map_err(err)?.1,
        other => return Err(PyValueError::new_err(format!("unknown processor {other:?}"))),
    };
    account_dict(py, &account)
}

#[pymodule]
fn pysqz(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CorruptError", m.py().get_type::<CorruptError>())?;
    m.add_class::<PyBoundedParams>()?;
    m.add_class::<PyAdaptiveEncoder>()?;
    m.add_class::<PyGapListSorter>()?;
    m.add_function(wrap_pyfunction!(h0, m)?)?;
    m.add_function(wrap_pyfunction!(hk, m)?)?;
    m.add_function(wrap_pyfunction!(gen_debruijn, m)?)?;
    m.add_function(wrap_pyfunction!(adaptive_decode, m)?)?;
    m.add_function(wrap_pyfunction!(sort_permutation, m)?)?;
    m.add_function(wrap_pyfunction!(sort_comparisons, m)?)?;
    m.add_function(wrap_pyfunction!(quantize, m)?)?;
    m.add_function(wrap_pyfunction!(bwt_transform, m)?)?;
    m.add_function(wrap_pyfunction!(bwt_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(mtf_encode, m)?)?;
    m.add_function(wrap_pyfunction!(mtf_decode, m)?)?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(decode, m)?)?;
    m.add_function(wrap_pyfunction!(audit, m)?)?;
    Ok(())
}
