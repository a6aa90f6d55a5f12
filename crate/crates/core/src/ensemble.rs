//! Ensemble execution and Monte Carlo statistics.
//!
//! Trajectory `i` always uses `substream(seed, i)` and results are reduced in
//! index order, so a run is bit-for-bit reproducible for any worker count.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::correlations::{correlate, CorrelationRequest};
use crate::error::{Error, Result};
use nalgebra::DMatrix;

use crate::hilbert::{check_dim, Ket, LindbladModel, C64};
use crate::rng::{substream, Counters, NoiseStream};
use crate::unraveling::Unraveling;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleOptions {
    pub seed: u64,
    pub workers: usize,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self { seed: 0, workers: 1 }
    }
}

/// Mean of complex samples with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: C64,
    pub std_error: f64,
    pub n: usize,
}

/// Sum of values in ascending order. Sorting first makes every statistic
/// independent of trajectory order, not just up to rounding.
fn ordered_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    values.iter().sum()
}

/// Sample mean and standard error `sqrt((var_re + var_im)/n)` with the
/// unbiased sample variances of the real and imaginary parts.
pub fn summarize(samples: &[C64]) -> Result<Estimate> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::TooFewSamples { required: 1, found: 0 });
    }
    let nf = n as f64;
    let mut re: Vec<f64> = samples.iter().map(|z| z.re).collect();
    let mut im: Vec<f64> = samples.iter().map(|z| z.im).collect();
    let mean = C64::new(ordered_sum(&mut re) / nf, ordered_sum(&mut im) / nf);
    let std_error = if n < 2 {
        0.0
    } else {
        let mut dev: Vec<f64> = samples
            .iter()
            .map(|z| (z.re - mean.re).powi(2) + (z.im - mean.im).powi(2))
            .collect();
        (ordered_sum(&mut dev) / (nf - 1.0) / nf).sqrt()
    };
    Ok(Estimate { mean, std_error, n })
}

/// Per-node estimates of a series with run metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub method: String,
    pub grid: Vec<f64>,
    #[serde(skip)]
    pub mean: Vec<C64>,
    pub std_error: Vec<f64>,
    pub n: usize,
    pub wall_time_seconds: f64,
    /// Sum of per-trajectory compute times.
    pub core_seconds: f64,
    pub counters: Counters,
}

impl EnsembleResult {
    pub fn estimate(&self, node: usize) -> Estimate {
        Estimate {
            mean: self.mean[node],
            std_error: self.std_error[node],
            n: self.n,
        }
    }
}

/// Output of one trajectory task.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord<T> {
    pub index: usize,
    pub value: T,
    pub counters: Counters,
    pub seconds: f64,
}

const CHUNK: usize = 2048;

/// Runs `task(i, stream_i)` for `i in 0..n` on `opts.workers` threads and
/// feeds the records to `sink` in index order. Returns the wall time.
pub fn for_each_trajectory<T, F, S>(n: usize, opts: &EnsembleOptions, task: F, mut sink: S) -> Result<f64>
where
    T: Send,
    F: Fn(usize, &mut NoiseStream) -> T + Sync,
    S: FnMut(TrajectoryRecord<T>),
{
    let start = Instant::now();
    let one = |i: usize| {
        let t0 = Instant::now();
        let mut stream = substream(opts.seed, i as u64);
        let value = task(i, &mut stream);
        TrajectoryRecord {
            index: i,
            value,
            counters: stream.counters(),
            seconds: t0.elapsed().as_secs_f64(),
        }
    };
    if opts.workers <= 1 {
        for i in 0..n {
            sink(one(i));
        }
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        let mut lo = 0;
        while lo < n {
            let hi = (lo + CHUNK * opts.workers).min(n);
            let batch: Vec<_> = pool.install(|| (lo..hi).into_par_iter().map(one).collect());
            batch.into_iter().for_each(&mut sink);
            lo = hi;
        }
    }
    Ok(start.elapsed().as_secs_f64().max(f64::MIN_POSITIVE))
}

/// Runs `n` trajectory tasks, each returning one sample per grid node, and
/// reduces them to means and standard errors. Failed tasks are collected
/// with their indices.
pub fn run_ensemble<F>(method: &str, grid: &[f64], n: usize, opts: &EnsembleOptions, task: F) -> Result<EnsembleResult>
where
    F: Fn(usize, &mut NoiseStream) -> Result<Vec<C64>> + Sync,
{
    if n < 2 {
        return Err(Error::TooFewSamples { required: 2, found: n });
    }
    let nodes = grid.len();
    let mut columns: Vec<Vec<C64>> = (0..nodes).map(|_| Vec::with_capacity(n)).collect();
    let mut failures = Vec::new();
    let mut counters = Counters::default();
    let mut core_seconds = 0.0;
    let wall = for_each_trajectory(n, opts, task, |rec| {
        counters += rec.counters;
        core_seconds += rec.seconds;
        match rec.value {
            Ok(v) if v.len() == nodes => {
                for (col, x) in columns.iter_mut().zip(v) {
                    col.push(x);
                }
            }
            Ok(v) => failures.push((
                rec.index,
                Error::DimensionMismatch {
                    expected: nodes,
                    found: v.len(),
                },
            )),
            Err(e) => failures.push((rec.index, e)),
        }
    })?;
    if !failures.is_empty() {
        return Err(Error::TrajectoryFailures(failures));
    }
    let stats = columns.iter().map(|c| summarize(c)).collect::<Result<Vec<_>>>()?;
    Ok(EnsembleResult {
        method: method.to_string(),
        grid: grid.to_vec(),
        mean: stats.iter().map(|e| e.mean).collect(),
        std_error: stats.iter().map(|e| e.std_error).collect(),
        n,
        wall_time_seconds: wall,
        core_seconds,
        counters,
    })
}

/// Entrywise estimate of a matrix-valued expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixEstimate {
    pub mean: DMatrix<C64>,
    pub std_error: DMatrix<f64>,
}

/// Estimates `E|ψ_t⟩⟨ψ_t|` at each node of `t_grid` for trajectories started
/// in `psi0`; the ensemble counterpart of the master-equation solution.
pub fn ensemble_covariance(
    psi0: &Ket,
    model: &LindbladModel,
    t_grid: &[f64],
    n: usize,
    unraveling: &dyn Unraveling,
    opts: &EnsembleOptions,
) -> Result<Vec<MatrixEstimate>> {
    let d = model.dim();
    check_dim(d, psi0.dim())?;
    let prop = unraveling.prepare(model)?;
    let flat_grid: Vec<f64> = (0..t_grid.len() * d * d).map(|i| i as f64).collect();
    let res = run_ensemble(unraveling.name(), &flat_grid, n, opts, |_, stream| {
        let mut psi = psi0.amplitudes().to_vec();
        let mut out = vec![C64::new(0.0, 0.0); flat_grid.len()];
        prop.run(&mut psi, t_grid, stream, &mut |node, v, w| {
            let block = &mut out[node * d * d..(node + 1) * d * d];
            // column-major, entry (i, j) = w ψ_i ψ_j*
            for j in 0..d {
                for i in 0..d {
                    block[j * d + i] = v[i] * v[j].conj() * w;
                }
            }
        })?;
        Ok(out)
    })?;
    Ok((0..t_grid.len())
        .map(|k| {
            let r = k * d * d..(k + 1) * d * d;
            MatrixEstimate {
                mean: DMatrix::from_column_slice(d, d, &res.mean[r.clone()]),
                std_error: DMatrix::from_column_slice(d, d, &res.std_error[r]),
            }
        })
        .collect())
}

/// `sqrt(Σ|est−ref|² / Σ|ref|²)` over a grid.
pub fn relative_rms_error(estimate: &[C64], reference: &[C64]) -> Result<f64> {
    if estimate.len() != reference.len() {
        return Err(Error::DimensionMismatch {
            expected: reference.len(),
            found: estimate.len(),
        });
    }
    let denom: f64 = reference.iter().map(|z| z.norm_sqr()).sum();
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    let num: f64 = estimate.iter().zip(reference).map(|(e, r)| (e - r).norm_sqr()).sum();
    Ok((num / denom).sqrt())
}

/// RMS of the standard errors relative to the RMS of the reference; the
/// error a bias-free estimator is expected to show.
pub fn relative_std(std_error: &[f64], reference: &[C64]) -> Result<f64> {
    let denom: f64 = reference.iter().map(|z| z.norm_sqr()).sum();
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((std_error.iter().map(|s| s * s).sum::<f64>() / denom).sqrt())
}

/// One point of an accuracy-versus-cost curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkPoint {
    pub method: String,
    pub n: usize,
    pub rms_relative_error: f64,
    pub est_std: f64,
    pub wall_time_seconds: f64,
    pub draws_total: u64,
    pub steps_total: u64,
    pub jumps_total: u64,
}

impl BenchmarkPoint {
    /// Wall time this method would need to reach `target` relative error,
    /// scaling cost linearly in `n` and error as `n^{-1/2}`.
    pub fn wall_time_at_error(&self, target: f64) -> f64 {
        self.wall_time_seconds * (self.est_std / target).powi(2)
    }
}

/// Runs the two-time correlation `request` with every method and ensemble
/// size, comparing against `reference` (same grid as `request.tau_grid`).
pub fn benchmark_sweep(
    request: &CorrelationRequest,
    model: &LindbladModel,
    reference: &[C64],
    n_list: &[usize],
    methods: &[&dyn Unraveling],
    seed: u64,
    workers: usize,
) -> Result<Vec<BenchmarkPoint>> {
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("empty ensemble-size list".into()));
    }
    let mut points = Vec::new();
    for method in methods {
        for &n in n_list {
            let req = CorrelationRequest {
                n_trajectories: n,
                ..request.clone()
            };
            let res = correlate(&req, model, *method, &EnsembleOptions { seed, workers })?;
            points.push(BenchmarkPoint {
                method: method.name().to_string(),
                n,
                rms_relative_error: relative_rms_error(&res.mean, reference)?,
                est_std: relative_std(&res.std_error, reference)?,
                wall_time_seconds: res.wall_time_seconds,
                draws_total: res.counters.draws,
                steps_total: res.counters.steps,
                jumps_total: res.counters.jumps,
            });
        }
    }
    Ok(points)
}
