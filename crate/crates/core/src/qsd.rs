//! Quantum state diffusion integrators.
//!
//! Two Euler–Maruyama schemes share one kernel:
//!
//! * `Normalized`: the nonlinear Itô equation
//!   `dψ = −iHψ dt + ½Σ_j[2⟨L_j†⟩L_j − L_j†L_j − ⟨L_j⟩⟨L_j†⟩]ψ dt + Σ_j(L_j − ⟨L_j⟩)ψ dξ_j`,
//!   renormalized after every step;
//! * `QuasiLinear`: the unnormalized equation
//!   `dψ̂ = −iHψ̂ dt + Σ_j L_jψ̂(dξ_j + ⟨L_j†⟩ dt) − ½Σ_j L_j†L_jψ̂ dt`,
//!   whose estimators divide by `‖ψ̂‖²`.
//!
//! Applied to a [`DoubledState`] the equations run with the block-diagonal
//! extended operators and expectation values over the whole doubled vector.

use serde::{Deserialize, Serialize};

use crate::ensemble::{summarize, Estimate};
use crate::error::{Error, Result};
use crate::hilbert::{extend_model, DoubledState, Ket, LindbladModel, Operator, C64, I, ZERO};
use crate::kernel::{check_norm, inner, norm_sqr, scale, steps_per_interval, DenseOp};
use crate::rng::{wiener_scale, NoiseStream};
use crate::unraveling::{Propagator, Unraveling, Visitor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdeScheme {
    Normalized,
    QuasiLinear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeConfig {
    dt: f64,
    scheme: SdeScheme,
    renormalize_each_step: bool,
}

impl SdeConfig {
    /// Renormalization is on by default; it only affects the normalized scheme.
    pub fn new(dt: f64, scheme: SdeScheme) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::NonPositiveStep(dt));
        }
        Ok(Self {
            dt,
            scheme,
            renormalize_each_step: true,
        })
    }

    /// For the quasi-linear scheme the propagated state is never rescaled;
    /// the flag is ignored there.
    pub fn with_renormalization(mut self, on: bool) -> Self {
        self.renormalize_each_step = on;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn scheme(&self) -> SdeScheme {
        self.scheme
    }

    pub fn renormalize_each_step(&self) -> bool {
        self.renormalize_each_step
    }
}

/// States the integrators accept: plain kets, and doubled states which are
/// propagated with the extended model.
pub trait StateVector: Clone + Sized {
    fn flatten(&self) -> Vec<C64>;
    fn unflatten(amps: Vec<C64>) -> Result<Self>;
    /// The model acting on the flattened vector.
    fn acting_model(model: &LindbladModel) -> LindbladModel;
}

impl StateVector for Ket {
    fn flatten(&self) -> Vec<C64> {
        self.amplitudes().to_vec()
    }
    fn unflatten(amps: Vec<C64>) -> Result<Self> {
        Ket::new(amps)
    }
    fn acting_model(model: &LindbladModel) -> LindbladModel {
        model.clone()
    }
}

impl StateVector for DoubledState {
    fn flatten(&self) -> Vec<C64> {
        self.to_ket().amplitudes().to_vec()
    }
    fn unflatten(amps: Vec<C64>) -> Result<Self> {
        DoubledState::from_amplitudes(&amps)
    }
    fn acting_model(model: &LindbladModel) -> LindbladModel {
        extend_model(model)
    }
}

/// Precomputed operators for one model.
#[derive(Debug, Clone)]
pub(crate) struct QsdKernel {
    dim: usize,
    /// `−iH − ½ Σ_j L_j†L_j`
    generator: DenseOp,
    lindblads: Vec<DenseOp>,
}

/// Scratch buffers reused across steps.
#[derive(Debug, Clone)]
pub(crate) struct Workspace {
    lpsi: Vec<C64>,
    gpsi: Vec<C64>,
    ell: Vec<C64>,
    pub(crate) increments: Vec<C64>,
}

impl QsdKernel {
    pub(crate) fn new(model: &LindbladModel) -> Self {
        let g = model.hamiltonian().matrix() * (-I) - model.decay_operator() * C64::new(0.5, 0.0);
        Self {
            dim: model.dim(),
            generator: DenseOp::new(&g),
            lindblads: model.lindblads().iter().map(|l| DenseOp::new(l.matrix())).collect(),
        }
    }

    pub(crate) fn n_channels(&self) -> usize {
        self.lindblads.len()
    }

    pub(crate) fn workspace(&self) -> Workspace {
        let m = self.lindblads.len();
        Workspace {
            lpsi: vec![ZERO; m * self.dim],
            gpsi: vec![ZERO; self.dim],
            ell: vec![ZERO; m],
            increments: vec![ZERO; m],
        }
    }

    /// Fills `L_jψ` and `⟨L_j⟩ = ⟨ψ|L_j|ψ⟩/‖ψ‖²`.
    #[inline]
    fn expectations(&self, psi: &[C64], ws: &mut Workspace) {
        let n = self.dim;
        let inv = 1.0 / norm_sqr(psi);
        for (j, l) in self.lindblads.iter().enumerate() {
            let out = &mut ws.lpsi[j * n..(j + 1) * n];
            l.apply(psi, out);
            ws.ell[j] = inner(psi, out) * inv;
        }
        self.generator.apply(psi, &mut ws.gpsi);
    }

    /// One step of the normalized equation using `ws.increments`; returns the
    /// squared norm before any renormalization.
    #[inline]
    pub(crate) fn step_normalized(&self, psi: &mut [C64], dt: f64, renormalize: bool, ws: &mut Workspace) -> Result<f64> {
        self.expectations(psi, ws);
        let n = self.dim;
        let mut along = C64::new(0.0, 0.0);
        for j in 0..self.lindblads.len() {
            let ell = ws.ell[j];
            let dxi = ws.increments[j];
            along += ell.norm_sqr() * 0.5 * dt + ell * dxi;
        }
        let keep = C64::new(1.0, 0.0) - along;
        for k in 0..n {
            let mut v = psi[k] * keep + ws.gpsi[k] * dt;
            for j in 0..self.lindblads.len() {
                v += ws.lpsi[j * n + k] * (ws.ell[j].conj() * dt + ws.increments[j]);
            }
            psi[k] = v;
        }
        let n2 = check_norm(norm_sqr(psi))?;
        if renormalize {
            scale(psi, 1.0 / n2.sqrt());
        }
        Ok(n2)
    }

    /// One step of the quasi-linear equation using `ws.increments`; returns
    /// the new squared norm. The state is not rescaled.
    #[inline]
    pub(crate) fn step_quasilinear(&self, psi: &mut [C64], dt: f64, ws: &mut Workspace) -> Result<f64> {
        self.expectations(psi, ws);
        let n = self.dim;
        for k in 0..n {
            let mut v = psi[k] + ws.gpsi[k] * dt;
            for j in 0..self.lindblads.len() {
                v += ws.lpsi[j * n + k] * (ws.increments[j] + ws.ell[j].conj() * dt);
            }
            psi[k] = v;
        }
        check_norm(norm_sqr(psi))
    }

    /// Runs `steps[i]` substeps before visiting node `i`. The visitor gets the
    /// pre-renormalization squared norm.
    pub(crate) fn run(
        &self,
        config: &SdeConfig,
        psi: &mut [C64],
        steps: &[usize],
        stream: &mut NoiseStream,
        visit: &mut dyn FnMut(usize, &[C64], f64),
    ) -> Result<()> {
        let mut ws = self.workspace();
        let dt = config.dt;
        let sc = wiener_scale(dt);
        let mut n2 = norm_sqr(psi);
        for (node, &k) in steps.iter().enumerate() {
            for _ in 0..k {
                stream.fill_wiener(sc, &mut ws.increments);
                stream.record_step();
                n2 = match config.scheme {
                    SdeScheme::Normalized => self.step_normalized(psi, dt, config.renormalize_each_step, &mut ws)?,
                    SdeScheme::QuasiLinear => self.step_quasilinear(psi, dt, &mut ws)?,
                };
            }
            visit(node, psi, n2);
        }
        Ok(())
    }
}

fn check_increments(expected: usize, increments: &[C64]) -> Result<()> {
    if increments.len() != expected {
        return Err(Error::IncrementCount {
            expected,
            found: increments.len(),
        });
    }
    Ok(())
}

/// One Euler–Maruyama step of the normalized equation followed by
/// renormalization.
pub fn step_normalized<S: StateVector>(state: &S, model: &LindbladModel, dt: f64, increments: &[C64]) -> Result<S> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveStep(dt));
    }
    let kernel = QsdKernel::new(&S::acting_model(model));
    check_increments(kernel.n_channels(), increments)?;
    let mut psi = state.flatten();
    crate::hilbert::check_dim(kernel.dim, psi.len())?;
    let n2 = norm_sqr(&psi);
    if (n2 - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(n2));
    }
    let mut ws = kernel.workspace();
    ws.increments.copy_from_slice(increments);
    kernel.step_normalized(&mut psi, dt, true, &mut ws)?;
    S::unflatten(psi)
}

/// One Euler–Maruyama step of the quasi-linear equation.
pub fn step_quasilinear<S: StateVector>(state: &S, model: &LindbladModel, dt: f64, increments: &[C64]) -> Result<S> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveStep(dt));
    }
    let kernel = QsdKernel::new(&S::acting_model(model));
    check_increments(kernel.n_channels(), increments)?;
    let mut psi = state.flatten();
    crate::hilbert::check_dim(kernel.dim, psi.len())?;
    if norm_sqr(&psi) == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let mut ws = kernel.workspace();
    ws.increments.copy_from_slice(increments);
    kernel.step_quasilinear(&mut psi, dt, &mut ws)?;
    S::unflatten(psi)
}

/// States recorded at grid nodes, with the squared norm before
/// renormalization at each node.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub norm_history: Vec<f64>,
}

/// Propagates one realization from `t = 0` and records it at each node of
/// `t_grid`; nodes must be multiples of `config.dt()`.
pub fn propagate<S: StateVector>(
    state0: &S,
    model: &LindbladModel,
    config: &SdeConfig,
    stream: &mut NoiseStream,
    t_grid: &[f64],
) -> Result<Trajectory<S>> {
    let kernel = QsdKernel::new(&S::acting_model(model));
    let mut psi = state0.flatten();
    crate::hilbert::check_dim(kernel.dim, psi.len())?;
    let steps = steps_per_interval(t_grid, config.dt)?;
    let mut recorded = Vec::with_capacity(t_grid.len());
    let mut norms = Vec::with_capacity(t_grid.len());
    kernel.run(config, &mut psi, &steps, stream, &mut |_, s, n2| {
        recorded.push(s.to_vec());
        norms.push(n2);
    })?;
    Ok(Trajectory {
        times: t_grid.to_vec(),
        states: recorded.into_iter().map(S::unflatten).collect::<Result<_>>()?,
        norm_history: norms,
    })
}

/// `2·mean⟨φ|A|ψ⟩` (normalized) or `2·mean(⟨φ̂|A|ψ̂⟩/‖θ̂‖²)` (quasi-linear)
/// over doubled-state samples taken at one time.
pub fn estimate_matrix_element(samples: &[DoubledState], a: &Operator, scheme: SdeScheme) -> Result<Estimate> {
    if samples.is_empty() {
        return Err(Error::TooFewSamples { required: 1, found: 0 });
    }
    let values = samples
        .iter()
        .map(|theta| {
            let v = theta.cross_element(a)? * 2.0;
            Ok(match scheme {
                SdeScheme::Normalized => v,
                SdeScheme::QuasiLinear => v / theta.norm_sqr(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    summarize(&values)
}

/// The diffusion unraveling as a registry strategy.
#[derive(Debug, Clone, Copy)]
pub struct QsdUnraveling {
    config: SdeConfig,
}

impl QsdUnraveling {
    pub fn new(config: SdeConfig) -> Self {
        Self { config }
    }

    pub fn config(&self) -> &SdeConfig {
        &self.config
    }
}

struct QsdPropagator {
    kernel: QsdKernel,
    config: SdeConfig,
}

impl Propagator for QsdPropagator {
    fn dim(&self) -> usize {
        self.kernel.dim
    }

    fn run(&self, state: &mut [C64], grid: &[f64], stream: &mut NoiseStream, visit: &mut Visitor<'_>) -> Result<()> {
        let steps = steps_per_interval(grid, self.config.dt)?;
        self.kernel.run(&self.config, state, &steps, stream, &mut |node, s, _| {
            visit(node, s, 1.0 / norm_sqr(s));
        })
    }
}

impl Unraveling for QsdUnraveling {
    fn name(&self) -> &'static str {
        "qsd"
    }

    fn dt(&self) -> f64 {
        self.config.dt
    }

    fn prepare(&self, model: &LindbladModel) -> Result<Box<dyn Propagator>> {
        Ok(Box::new(QsdPropagator {
            kernel: QsdKernel::new(model),
            config: self.config,
        }))
    }
}
