//! Heisenberg-picture matrix elements and two-time correlation functions
//! from trajectories in the doubled space.
//!
//! Matrix elements: start from `θ_0 = (φ_0, ψ_0)ᵀ/√2`, propagate with the
//! extended model and average `2⟨φ_t|A|ψ_t⟩`.
//!
//! Two-time correlations `g(t, t+τ) = ⟨A(t+τ) B(t)⟩`: propagate `ψ` to `t`
//! in the original space, restart from `θ_t = (ψ_t, Bψ_t)ᵀ/√w` with
//! `w = 1 + ‖Bψ_t‖²`, propagate over `τ` in the doubled space and average
//! `w⟨φ_{t+τ}|A|ψ_{t+τ}⟩`.

use crate::ensemble::{run_ensemble, EnsembleOptions, EnsembleResult};
use crate::error::{Error, Result};
use crate::hilbert::{check_dim, extend_model, make_theta, DoubledState, Ket, LindbladModel, Operator, C64, ZERO};
use crate::kernel::{norm_sqr, scale, DenseOp};
use crate::rng::NoiseStream;
use crate::unraveling::{Propagator, Unraveling};

/// Default warmup for steady-state starts, in units of `1/γ`.
pub const DEFAULT_STEADY_STATE_WARMUP: f64 = 30.0;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Ket(Ket),
    /// Haar-random ket followed by the warmup.
    RandomUniform,
    /// Haar-random ket with a warmup long enough to reach the steady state.
    SteadyState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRequest {
    pub a: Operator,
    pub b: Operator,
    /// Time of the `B` insertion, measured after the warmup.
    pub t: f64,
    pub tau_grid: Vec<f64>,
    pub n_trajectories: usize,
    pub initial: InitialCondition,
    /// Defaults to [`DEFAULT_STEADY_STATE_WARMUP`] for steady-state starts and
    /// to zero otherwise.
    pub warmup_time: Option<f64>,
}

impl CorrelationRequest {
    pub fn validate(&self, dim: usize) -> Result<()> {
        check_dim(dim, self.a.dim())?;
        check_dim(dim, self.b.dim())?;
        if let InitialCondition::Ket(k) = &self.initial {
            check_dim(dim, k.dim())?;
        }
        if self.n_trajectories < 2 {
            return Err(Error::TooFewSamples {
                required: 2,
                found: self.n_trajectories,
            });
        }
        if !(self.t >= 0.0) || self.warmup().is_sign_negative() {
            return Err(Error::InvalidArgument("times must be nonnegative".into()));
        }
        if self.tau_grid.is_empty() || self.tau_grid[0] < 0.0 || self.tau_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::NonMonotoneGrid);
        }
        Ok(())
    }

    pub fn warmup(&self) -> f64 {
        match (self.warmup_time, &self.initial) {
            (Some(w), _) => w,
            (None, InitialCondition::SteadyState) => DEFAULT_STEADY_STATE_WARMUP,
            (None, _) => 0.0,
        }
    }
}

/// Haar-uniform random unit vector: i.i.d. complex Gaussians, normalized.
pub fn haar_random_ket(dim: usize, stream: &mut NoiseStream) -> Result<Ket> {
    let v: Vec<C64> = (0..dim).map(|_| stream.complex_gaussian()).collect();
    Ket::new(v)?.normalized()
}

/// Propagates a normalized single-space state forward by `duration` and
/// returns it normalized.
fn advance(prop: &dyn Propagator, psi: &mut [C64], duration: f64, stream: &mut NoiseStream) -> Result<()> {
    if duration > 0.0 {
        prop.run(psi, &[duration], stream, &mut |_, _, _| {})?;
        let n2 = norm_sqr(psi);
        scale(psi, 1.0 / n2.sqrt());
    }
    Ok(())
}

fn prepare_initial_with(
    initial: &InitialCondition,
    dim: usize,
    warmup_time: f64,
    prop: &dyn Propagator,
    stream: &mut NoiseStream,
) -> Result<Ket> {
    match initial {
        InitialCondition::Ket(k) => Ok(k.clone()),
        InitialCondition::RandomUniform | InitialCondition::SteadyState => {
            let k = haar_random_ket(dim, stream)?;
            let mut v = k.amplitudes().to_vec();
            advance(prop, &mut v, warmup_time, stream)?;
            Ket::new(v)
        }
    }
}

/// Builds the starting ket of one realization. Explicit kets are returned
/// unchanged; random starts are propagated for `warmup_time` (defaulting to
/// [`DEFAULT_STEADY_STATE_WARMUP`] for steady-state starts).
pub fn prepare_initial(
    initial: &InitialCondition,
    model: &LindbladModel,
    warmup_time: Option<f64>,
    unraveling: &dyn Unraveling,
    stream: &mut NoiseStream,
) -> Result<Ket> {
    let warmup = match (warmup_time, initial) {
        (Some(w), _) => w,
        (None, InitialCondition::SteadyState) => DEFAULT_STEADY_STATE_WARMUP,
        (None, _) => 0.0,
    };
    if warmup < 0.0 {
        return Err(Error::InvalidArgument("warmup must be nonnegative".into()));
    }
    let prop = unraveling.prepare(model)?;
    prepare_initial_with(initial, model.dim(), warmup, prop.as_ref(), stream)
}

/// `θ_t = (ψ, Bψ)ᵀ/√w` and its weight `w = 1 + ‖Bψ‖²`.
pub fn doubled_seed(psi: &Ket, b: &Operator) -> Result<(DoubledState, f64)> {
    let bpsi = b.apply(psi)?;
    let w = 1.0 + bpsi.norm_sqr();
    let s = C64::new(1.0 / w.sqrt(), 0.0);
    Ok((DoubledState::new(psi.scaled(s), bpsi.scaled(s))?, w))
}

/// `⟨upper|A|lower⟩` for a flattened doubled vector.
#[inline]
fn cross(a: &DenseOp, theta: &[C64]) -> C64 {
    let n = theta.len() / 2;
    a.sandwich(&theta[..n], &theta[n..])
}

/// Estimates `⟨φ_0|A(t)|ψ_0⟩` at every node of `t_grid`.
#[allow(clippy::too_many_arguments)]
pub fn heisenberg_element(
    a: &Operator,
    phi0: &Ket,
    psi0: &Ket,
    model: &LindbladModel,
    t_grid: &[f64],
    n_trajectories: usize,
    unraveling: &dyn Unraveling,
    opts: &EnsembleOptions,
) -> Result<EnsembleResult> {
    check_dim(model.dim(), a.dim())?;
    let theta0 = make_theta(phi0, psi0)?.to_ket();
    let prop = unraveling.prepare(&extend_model(model))?;
    let a_op = DenseOp::new(a.matrix());
    let nodes = t_grid.len();
    run_ensemble(unraveling.name(), t_grid, n_trajectories, opts, |_, stream| {
        let mut theta = theta0.amplitudes().to_vec();
        let mut out = vec![ZERO; nodes];
        prop.run(&mut theta, t_grid, stream, &mut |k, s, w| {
            out[k] = cross(&a_op, s) * (2.0 * w);
        })?;
        Ok(out)
    })
}

/// Estimates `g(t, t+τ) = ⟨A(t+τ) B(t)⟩` at every node of `request.tau_grid`.
pub fn correlate(
    request: &CorrelationRequest,
    model: &LindbladModel,
    unraveling: &dyn Unraveling,
    opts: &EnsembleOptions,
) -> Result<EnsembleResult> {
    let dim = model.dim();
    request.validate(dim)?;
    let single = unraveling.prepare(model)?;
    let doubled = unraveling.prepare(&extend_model(model))?;
    let a_op = DenseOp::new(request.a.matrix());
    let b_op = DenseOp::new(request.b.matrix());
    let warmup = request.warmup();
    let grid = &request.tau_grid;
    let nodes = grid.len();
    run_ensemble(unraveling.name(), grid, request.n_trajectories, opts, |_, stream| {
        let start = prepare_initial_with(&request.initial, dim, warmup, single.as_ref(), stream)?;
        let mut theta = vec![ZERO; 2 * dim];
        let (upper, lower) = theta.split_at_mut(dim);
        upper.copy_from_slice(start.amplitudes());
        advance(single.as_ref(), upper, request.t, stream)?;
        b_op.apply(upper, lower);
        let w = 1.0 + norm_sqr(lower);
        scale(&mut theta, 1.0 / w.sqrt());
        let mut out = vec![ZERO; nodes];
        doubled.run(&mut theta, grid, stream, &mut |k, s, scale| {
            out[k] = cross(&a_op, s) * (w * scale);
        })?;
        Ok(out)
    })
}
