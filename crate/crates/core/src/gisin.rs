//! The coupled two-state scheme for Heisenberg matrix elements.
//!
//! A pair `(ψ, φ)` driven by the same noise, with the cross functionals
//! `l_j(α, β) = ⟨α|L_j|β⟩/⟨α|β⟩`:
//!
//! ```text
//! dψ = Gψ dt + Σ_j [L_jψ (l_j(ψ,φ)* dt + dξ_j) − ψ (½ l_j(φ,ψ) l_j(ψ,φ)* dt + l_j(φ,ψ) dξ_j)]
//! dφ = Gφ dt + Σ_j [L_jφ (l_j(φ,ψ)* dt + dξ_j) − φ (½ l_j(ψ,φ) l_j(φ,ψ)* dt + l_j(ψ,φ) dξ_j)]
//! ```
//!
//! with `G = −iH − ½Σ_j L_j†L_j`. The continuum equations conserve `⟨φ|ψ⟩`
//! and `E⟨φ_t|A|ψ_t⟩ = ⟨φ_0|A(t)|ψ_0⟩`, but the `1/⟨φ|ψ⟩` coefficients make
//! realizations wander far from the mean. The scheme is kept to show that,
//! not as a production method: realizations whose overlap collapses are
//! aborted and counted rather than regularized.
//!
//! The quasi-linear variant drops the terms along `ψ` and `φ`. The dropped
//! factors are scalar martingales whose product compensates the change of
//! `⟨φ̂|ψ̂⟩`, so the estimator becomes `⟨φ̂|A|ψ̂⟩ ⟨φ_0|ψ_0⟩/⟨φ̂|ψ̂⟩`.

use serde::{Deserialize, Serialize};

use crate::ensemble::{for_each_trajectory, summarize, EnsembleOptions, EnsembleResult};
use crate::error::{Error, Result};
use crate::hilbert::{check_dim, Ket, LindbladModel, Operator, C64, I, ZERO};
use crate::kernel::{check_norm, inner, norm_sqr, steps_per_interval, DenseOp};
use crate::rng::{wiener_scale, Counters, NoiseStream};

pub const DEFAULT_OVERLAP_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GisinVariant {
    /// The coupled equations above, preserving `⟨φ|ψ⟩`.
    Coupled,
    QuasiLinear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GisinConfig {
    pub dt: f64,
    pub variant: GisinVariant,
    /// Realizations with `|⟨φ|ψ⟩|/(‖φ‖‖ψ‖)` below this are aborted.
    pub overlap_floor: f64,
}

impl GisinConfig {
    pub fn new(dt: f64, variant: GisinVariant) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::NonPositiveStep(dt));
        }
        Ok(Self {
            dt,
            variant,
            overlap_floor: DEFAULT_OVERLAP_FLOOR,
        })
    }
}

/// The two states with the overlap `⟨φ|ψ⟩` after every step.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledPair {
    pub psi: Ket,
    pub phi: Ket,
    pub scalar_product_history: Vec<C64>,
}

impl CoupledPair {
    pub fn new(psi: Ket, phi: Ket) -> Result<Self> {
        check_dim(psi.dim(), phi.dim())?;
        let s = phi.inner(&psi);
        Ok(Self {
            psi,
            phi,
            scalar_product_history: vec![s],
        })
    }

    pub fn scalar_product(&self) -> C64 {
        self.phi.inner(&self.psi)
    }
}

struct GisinKernel {
    dim: usize,
    generator: DenseOp,
    lindblads: Vec<DenseOp>,
}

struct Scratch {
    lpsi: Vec<C64>,
    lphi: Vec<C64>,
    gpsi: Vec<C64>,
    gphi: Vec<C64>,
    l_fp: Vec<C64>,
    l_pf: Vec<C64>,
    increments: Vec<C64>,
}

impl GisinKernel {
    fn new(model: &LindbladModel) -> Self {
        let g = model.hamiltonian().matrix() * (-I) - model.decay_operator() * C64::new(0.5, 0.0);
        Self {
            dim: model.dim(),
            generator: DenseOp::new(&g),
            lindblads: model.lindblads().iter().map(|l| DenseOp::new(l.matrix())).collect(),
        }
    }

    fn scratch(&self) -> Scratch {
        let m = self.lindblads.len();
        let n = self.dim;
        Scratch {
            lpsi: vec![ZERO; m * n],
            lphi: vec![ZERO; m * n],
            gpsi: vec![ZERO; n],
            gphi: vec![ZERO; n],
            l_fp: vec![ZERO; m],
            l_pf: vec![ZERO; m],
            increments: vec![ZERO; m],
        }
    }

    /// One Euler–Maruyama step with `ws.increments`; returns the new `⟨φ|ψ⟩`.
    fn step(&self, psi: &mut [C64], phi: &mut [C64], dt: f64, variant: GisinVariant, floor: f64, ws: &mut Scratch) -> Result<C64> {
        let n = self.dim;
        let s = inner(phi, psi);
        let scale = (norm_sqr(phi) * norm_sqr(psi)).sqrt();
        if !(s.norm() >= floor * scale) {
            return Err(Error::ScalarProductCollapse(s.norm() / scale));
        }
        for (j, l) in self.lindblads.iter().enumerate() {
            let lp = &mut ws.lpsi[j * n..(j + 1) * n];
            l.apply(psi, lp);
            ws.l_fp[j] = inner(phi, lp) / s;
            let lf = &mut ws.lphi[j * n..(j + 1) * n];
            l.apply(phi, lf);
            ws.l_pf[j] = inner(psi, lf) / s.conj();
        }
        self.generator.apply(psi, &mut ws.gpsi);
        self.generator.apply(phi, &mut ws.gphi);
        let (mut keep_psi, mut keep_phi) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        if variant == GisinVariant::Coupled {
            for j in 0..self.lindblads.len() {
                let (a, b, dxi) = (ws.l_fp[j], ws.l_pf[j], ws.increments[j]);
                keep_psi -= 0.5 * a * b.conj() * dt + a * dxi;
                keep_phi -= 0.5 * b * a.conj() * dt + b * dxi;
            }
        }
        for k in 0..n {
            let mut vp = psi[k] * keep_psi + ws.gpsi[k] * dt;
            let mut vf = phi[k] * keep_phi + ws.gphi[k] * dt;
            for j in 0..self.lindblads.len() {
                let dxi = ws.increments[j];
                vp += ws.lpsi[j * n + k] * (ws.l_pf[j].conj() * dt + dxi);
                vf += ws.lphi[j * n + k] * (ws.l_fp[j].conj() * dt + dxi);
            }
            psi[k] = vp;
            phi[k] = vf;
        }
        check_norm(norm_sqr(psi))?;
        check_norm(norm_sqr(phi))?;
        Ok(inner(phi, psi))
    }
}

fn step_pair(pair: &CoupledPair, model: &LindbladModel, dt: f64, increments: &[C64], variant: GisinVariant) -> Result<CoupledPair> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveStep(dt));
    }
    check_dim(model.dim(), pair.psi.dim())?;
    check_dim(model.dim(), pair.phi.dim())?;
    if increments.len() != model.n_channels() {
        return Err(Error::IncrementCount {
            expected: model.n_channels(),
            found: increments.len(),
        });
    }
    let kernel = GisinKernel::new(model);
    let mut ws = kernel.scratch();
    ws.increments.copy_from_slice(increments);
    let mut psi = pair.psi.amplitudes().to_vec();
    let mut phi = pair.phi.amplitudes().to_vec();
    let s = kernel.step(&mut psi, &mut phi, dt, variant, DEFAULT_OVERLAP_FLOOR, &mut ws)?;
    let mut history = pair.scalar_product_history.clone();
    history.push(s);
    Ok(CoupledPair {
        psi: Ket::new(psi)?,
        phi: Ket::new(phi)?,
        scalar_product_history: history,
    })
}

/// One step of the coupled equations with shared increments.
pub fn step_coupled(pair: &CoupledPair, model: &LindbladModel, dt: f64, increments: &[C64]) -> Result<CoupledPair> {
    step_pair(pair, model, dt, increments, GisinVariant::Coupled)
}

/// One step of the quasi-linear pair. Fails with `NormOutOfRange` once a
/// norm leaves the representable window.
pub fn step_coupled_quasilinear(pair: &CoupledPair, model: &LindbladModel, dt: f64, increments: &[C64]) -> Result<CoupledPair> {
    step_pair(pair, model, dt, increments, GisinVariant::QuasiLinear)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RealizationStatus {
    Completed,
    /// The overlap fell below the floor.
    Aborted,
    /// A norm over- or underflowed.
    Overflowed,
}

/// One realization: estimator samples at the nodes reached and the largest
/// `|⟨φ|ψ⟩ − ⟨φ_0|ψ_0⟩|` seen at a node.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationOutcome {
    pub status: RealizationStatus,
    pub samples: Vec<C64>,
    pub max_scalar_product_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstabilityReport {
    pub grid: Vec<f64>,
    /// Sample variance `E|x − x̄|²` of completed realizations at each node.
    pub variance: Vec<f64>,
    pub aborted: usize,
    pub overflowed: usize,
    pub n_total: usize,
    pub max_scalar_product_drift: f64,
}

pub fn instability_report(outcomes: &[RealizationOutcome], grid: &[f64]) -> Result<InstabilityReport> {
    if outcomes.is_empty() {
        return Err(Error::TooFewSamples { required: 1, found: 0 });
    }
    let completed: Vec<&RealizationOutcome> = outcomes.iter().filter(|o| o.status == RealizationStatus::Completed).collect();
    let variance = (0..grid.len())
        .map(|k| {
            let col: Vec<C64> = completed.iter().map(|o| o.samples[k]).collect();
            if col.len() < 2 {
                return Ok(f64::NAN);
            }
            let e = summarize(&col)?;
            Ok(e.std_error.powi(2) * col.len() as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    let count = |s| outcomes.iter().filter(|o| o.status == s).count();
    Ok(InstabilityReport {
        grid: grid.to_vec(),
        variance,
        aborted: count(RealizationStatus::Aborted),
        overflowed: count(RealizationStatus::Overflowed),
        n_total: outcomes.len(),
        max_scalar_product_drift: outcomes.iter().map(|o| o.max_scalar_product_drift).fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GisinRun {
    /// Statistics over completed realizations only.
    pub estimate: EnsembleResult,
    pub report: InstabilityReport,
}

fn realization(
    kernel: &GisinKernel,
    a: &DenseOp,
    config: &GisinConfig,
    phi0: &Ket,
    psi0: &Ket,
    steps: &[usize],
    stream: &mut NoiseStream,
) -> RealizationOutcome {
    let mut ws = kernel.scratch();
    let mut psi = psi0.amplitudes().to_vec();
    let mut phi = phi0.amplitudes().to_vec();
    let s0 = inner(&phi, &psi);
    let sc = wiener_scale(config.dt);
    let mut samples = Vec::with_capacity(steps.len());
    let mut drift: f64 = 0.0;
    for &k in steps {
        let mut s = inner(&phi, &psi);
        for _ in 0..k {
            stream.fill_wiener(sc, &mut ws.increments);
            stream.record_step();
            match kernel.step(&mut psi, &mut phi, config.dt, config.variant, config.overlap_floor, &mut ws) {
                Ok(next) => s = next,
                Err(Error::ScalarProductCollapse(_)) => {
                    return RealizationOutcome {
                        status: RealizationStatus::Aborted,
                        samples,
                        max_scalar_product_drift: drift,
                    }
                }
                Err(_) => {
                    return RealizationOutcome {
                        status: RealizationStatus::Overflowed,
                        samples,
                        max_scalar_product_drift: drift,
                    }
                }
            }
        }
        let el = a.sandwich(&phi, &psi);
        let value = match config.variant {
            GisinVariant::Coupled => {
                drift = drift.max((s - s0).norm());
                el
            }
            GisinVariant::QuasiLinear => el * s0 / s,
        };
        if !value.re.is_finite() || !value.im.is_finite() {
            return RealizationOutcome {
                status: RealizationStatus::Overflowed,
                samples,
                max_scalar_product_drift: drift,
            };
        }
        samples.push(value);
    }
    RealizationOutcome {
        status: RealizationStatus::Completed,
        samples,
        max_scalar_product_drift: drift,
    }
}

/// Estimates `⟨φ_0|A(t)|ψ_0⟩` with the coupled scheme. Aborted and
/// overflowed realizations are excluded from the estimate and counted in
/// the report; at least two must complete.
#[allow(clippy::too_many_arguments)]
pub fn gisin_matrix_element(
    a: &Operator,
    phi0: &Ket,
    psi0: &Ket,
    model: &LindbladModel,
    t_grid: &[f64],
    n_trajectories: usize,
    config: &GisinConfig,
    opts: &EnsembleOptions,
) -> Result<GisinRun> {
    let dim = model.dim();
    check_dim(dim, a.dim())?;
    check_dim(dim, phi0.dim())?;
    check_dim(dim, psi0.dim())?;
    if phi0.inner(psi0).norm() == 0.0 {
        return Err(Error::ScalarProductCollapse(0.0));
    }
    let steps = steps_per_interval(t_grid, config.dt)?;
    let kernel = GisinKernel::new(model);
    let a_op = DenseOp::new(a.matrix());
    let mut outcomes = Vec::with_capacity(n_trajectories);
    let mut counters = Counters::default();
    let mut core_seconds = 0.0;
    let wall = for_each_trajectory(
        n_trajectories,
        opts,
        |_, stream| realization(&kernel, &a_op, config, phi0, psi0, &steps, stream),
        |rec| {
            counters += rec.counters;
            core_seconds += rec.seconds;
            outcomes.push(rec.value);
        },
    )?;
    let report = instability_report(&outcomes, t_grid)?;
    let completed: Vec<&RealizationOutcome> = outcomes.iter().filter(|o| o.status == RealizationStatus::Completed).collect();
    if completed.len() < 2 {
        return Err(Error::TooFewSamples {
            required: 2,
            found: completed.len(),
        });
    }
    let stats = (0..t_grid.len())
        .map(|k| summarize(&completed.iter().map(|o| o.samples[k]).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let method = match config.variant {
        GisinVariant::Coupled => "gisin",
        GisinVariant::QuasiLinear => "gisin-quasilinear",
    };
    Ok(GisinRun {
        estimate: EnsembleResult {
            method: method.into(),
            grid: t_grid.to_vec(),
            mean: stats.iter().map(|e| e.mean).collect(),
            std_error: stats.iter().map(|e| e.std_error).collect(),
            n: completed.len(),
            wall_time_seconds: wall,
            core_seconds,
            counters,
        },
        report,
    })
}
