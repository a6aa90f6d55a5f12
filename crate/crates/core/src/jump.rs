//! Piecewise-deterministic (quantum jump) unraveling.
//!
//! Each substep of length `dt` jumps with the first-order probability
//! `p = dt·Σ_j‖L_jψ‖²`, to `L_jψ/‖L_jψ‖` with channel weights `‖L_jψ‖²`;
//! otherwise the state takes an Euler step of the effective non-Hermitian
//! generator `−iH − ½Σ_j L_j†L_j` and is renormalized.
//!
//! Instead of one uniform per substep, the survival probability `Π(1 − p)`
//! since the last jump is accumulated and compared with a single uniform
//! threshold drawn at the previous jump. The jump substep has exactly the
//! same distribution, but each jump costs two uniforms (channel and next
//! threshold), plus one threshold when a propagation segment starts.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hilbert::{check_dim, extend_model, DoubledState, LindbladModel, Operator, C64, I, ZERO};
use crate::kernel::{norm_sqr, steps_per_interval, DenseOp};
use crate::rng::NoiseStream;
use crate::unraveling::{Propagator, Unraveling, Visitor};

/// Largest allowed jump probability `dt·Σ_j‖L_jψ‖²` in a single substep.
pub const MAX_JUMP_PROBABILITY: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpConfig {
    pub dt: f64,
}

/// Normalized state with its jump threshold and the survival probability
/// accumulated since the last jump.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpState {
    amplitudes: Vec<C64>,
    threshold: f64,
    survival: f64,
}

impl JumpState {
    /// Starts a segment from a normalized vector, drawing the first threshold.
    pub fn start(amplitudes: Vec<C64>, stream: &mut NoiseStream) -> Result<Self> {
        let n2 = norm_sqr(&amplitudes);
        if (n2 - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self {
            amplitudes,
            threshold: stream.uniform(),
            survival: 1.0,
        })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn survival(&self) -> f64 {
        self.survival
    }

    pub fn doubled(&self) -> Result<DoubledState> {
        DoubledState::from_amplitudes(&self.amplitudes)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct JumpKernel {
    dim: usize,
    /// `I + dt(−iH − ½ Σ_j L_j†L_j)`
    no_jump: DenseOp,
    lindblads: Vec<DenseOp>,
    dt: f64,
}

impl JumpKernel {
    pub(crate) fn new(model: &LindbladModel, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::NonPositiveStep(dt));
        }
        // Worst-case jump probability over all states.
        let k_max = nalgebra::SymmetricEigen::new(model.decay_operator()).eigenvalues.max();
        if dt * k_max > MAX_JUMP_PROBABILITY {
            return Err(Error::JumpProbabilityTooLarge(dt * k_max));
        }
        Ok(Self::new_unchecked(model, dt))
    }

    fn new_unchecked(model: &LindbladModel, dt: f64) -> Self {
        let n = model.dim();
        let g = model.hamiltonian().matrix() * (-I) - model.decay_operator() * C64::new(0.5, 0.0);
        Self {
            dim: n,
            no_jump: DenseOp::new(&(DMatrix::identity(n, n) + g * C64::new(dt, 0.0))),
            lindblads: model.lindblads().iter().map(|l| DenseOp::new(l.matrix())).collect(),
            dt,
        }
    }

    /// One substep; returns the channel index if a jump occurred.
    #[inline]
    fn step(&self, state: &mut JumpState, tmp: &mut [C64], lpsi: &mut [C64], stream: &mut NoiseStream) -> Option<usize> {
        stream.record_step();
        let n = self.dim;
        let mut total = 0.0;
        for (j, l) in self.lindblads.iter().enumerate() {
            let out = &mut lpsi[j * n..(j + 1) * n];
            l.apply(&state.amplitudes, out);
            total += norm_sqr(out);
        }
        let survival = state.survival * (1.0 - self.dt * total);
        if survival >= state.threshold || !(total > 0.0) {
            state.survival = survival;
            self.no_jump.apply(&state.amplitudes, tmp);
            let n2 = norm_sqr(tmp);
            for (a, b) in state.amplitudes.iter_mut().zip(tmp.iter()) {
                *a = b / n2.sqrt();
            }
            return None;
        }
        let target = stream.uniform() * total;
        let mut acc = 0.0;
        let mut chosen = self.lindblads.len() - 1;
        for j in 0..self.lindblads.len() {
            acc += norm_sqr(&lpsi[j * n..(j + 1) * n]);
            if target < acc {
                chosen = j;
                break;
            }
        }
        let out = &lpsi[chosen * n..(chosen + 1) * n];
        let w = norm_sqr(out).sqrt();
        for (a, b) in state.amplitudes.iter_mut().zip(out) {
            *a = b / w;
        }
        state.threshold = stream.uniform();
        state.survival = 1.0;
        stream.record_jump();
        Some(chosen)
    }

    pub(crate) fn run(&self, state: &mut JumpState, steps: &[usize], stream: &mut NoiseStream, visit: &mut dyn FnMut(usize, &[C64])) {
        let mut tmp = vec![ZERO; self.dim];
        let mut lpsi = vec![ZERO; self.dim * self.lindblads.len()];
        for (node, &k) in steps.iter().enumerate() {
            for _ in 0..k {
                self.step(state, &mut tmp, &mut lpsi, stream);
            }
            visit(node, &state.amplitudes);
        }
    }
}

/// One substep of the jump process on the doubled space (the model is
/// extended internally). Fails if the current jump probability
/// `dt·Σ_j‖L̃_jθ‖²` exceeds [`MAX_JUMP_PROBABILITY`].
pub fn step_jump(state: &mut JumpState, model: &LindbladModel, dt: f64, stream: &mut NoiseStream) -> Result<Option<usize>> {
    let ext = extend_model(model);
    step_jump_in(state, &ext, dt, stream)
}

/// As [`step_jump`] but with `model` acting directly on the state.
pub fn step_jump_in(state: &mut JumpState, model: &LindbladModel, dt: f64, stream: &mut NoiseStream) -> Result<Option<usize>> {
    check_dim(model.dim(), state.amplitudes.len())?;
    if !(dt > 0.0) {
        return Err(Error::NonPositiveStep(dt));
    }
    let p: f64 = model
        .lindblads()
        .iter()
        .map(|l| {
            let v = l.matrix() * nalgebra::DVector::from_column_slice(&state.amplitudes);
            v.norm_squared()
        })
        .sum::<f64>()
        * dt;
    if p > MAX_JUMP_PROBABILITY {
        return Err(Error::JumpProbabilityTooLarge(p));
    }
    let kernel = JumpKernel::new_unchecked(model, dt);
    let mut tmp = vec![ZERO; kernel.dim];
    let mut lpsi = vec![ZERO; kernel.dim * kernel.lindblads.len()];
    Ok(kernel.step(state, &mut tmp, &mut lpsi, stream))
}

/// The jump unraveling as a registry strategy.
#[derive(Debug, Clone, Copy)]
pub struct JumpUnraveling {
    config: JumpConfig,
}

impl JumpUnraveling {
    pub fn new(dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::NonPositiveStep(dt));
        }
        Ok(Self {
            config: JumpConfig { dt },
        })
    }
}

struct JumpPropagator {
    kernel: JumpKernel,
}

impl Propagator for JumpPropagator {
    fn dim(&self) -> usize {
        self.kernel.dim
    }

    fn run(&self, state: &mut [C64], grid: &[f64], stream: &mut NoiseStream, visit: &mut Visitor<'_>) -> Result<()> {
        let steps = steps_per_interval(grid, self.kernel.dt)?;
        let mut js = JumpState::start(state.to_vec(), stream)?;
        self.kernel.run(&mut js, &steps, stream, &mut |node, s| visit(node, s, 1.0));
        state.copy_from_slice(&js.amplitudes);
        Ok(())
    }
}

impl Unraveling for JumpUnraveling {
    fn name(&self) -> &'static str {
        "jump"
    }

    fn dt(&self) -> f64 {
        self.config.dt
    }

    fn prepare(&self, model: &LindbladModel) -> Result<Box<dyn Propagator>> {
        Ok(Box::new(JumpPropagator {
            kernel: JumpKernel::new(model, self.config.dt)?,
        }))
    }
}

/// Heisenberg matrix element with the jump propagator.
#[allow(clippy::too_many_arguments)]
pub fn jump_matrix_element(
    a: &Operator,
    phi0: &crate::hilbert::Ket,
    psi0: &crate::hilbert::Ket,
    model: &LindbladModel,
    t_grid: &[f64],
    n_trajectories: usize,
    config: JumpConfig,
    opts: &crate::ensemble::EnsembleOptions,
) -> Result<crate::ensemble::EnsembleResult> {
    let u = JumpUnraveling::new(config.dt)?;
    crate::correlations::heisenberg_element(a, phi0, psi0, model, t_grid, n_trajectories, &u, opts)
}

/// Two-time correlation with the jump propagator.
pub fn jump_correlate(
    request: &crate::correlations::CorrelationRequest,
    model: &LindbladModel,
    config: JumpConfig,
    opts: &crate::ensemble::EnsembleOptions,
) -> Result<crate::ensemble::EnsembleResult> {
    let u = JumpUnraveling::new(config.dt)?;
    crate::correlations::correlate(request, model, &u, opts)
}
