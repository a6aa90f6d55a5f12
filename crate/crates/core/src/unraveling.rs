//! Interchangeable stochastic unravelings of the master equation.
//!
//! An [`Unraveling`] turns a [`LindbladModel`] into a [`Propagator`] that
//! evolves individual state vectors. The Heisenberg-picture and two-time
//! estimators only talk to this trait, so the diffusion and jump methods are
//! swapped by name through an [`UnravelingRegistry`].

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::hilbert::{LindbladModel, C64};
use crate::jump::JumpUnraveling;
use crate::qsd::{QsdUnraveling, SdeConfig, SdeScheme};
use crate::rng::NoiseStream;

/// Called at each grid node with the node index, the current (possibly
/// unnormalized) state and the factor `s` such that `s·|θ⟩⟨θ|` is this
/// realization's contribution to the density matrix estimate.
pub type Visitor<'a> = dyn FnMut(usize, &[C64], f64) + 'a;

pub trait Propagator: Send + Sync {
    fn dim(&self) -> usize;

    /// Evolves `state` from `t = 0` through every node of `grid`. The state
    /// must be normalized on entry; on return it may not be.
    fn run(&self, state: &mut [C64], grid: &[f64], stream: &mut NoiseStream, visit: &mut Visitor<'_>) -> Result<()>;
}

pub trait Unraveling: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Substep length used by the propagators.
    fn dt(&self) -> f64;

    fn prepare(&self, model: &LindbladModel) -> Result<Box<dyn Propagator>>;
}

/// Parameters handed to registry factories.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnravelingParams {
    pub dt: f64,
    pub scheme: SdeScheme,
}

impl Default for UnravelingParams {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            scheme: SdeScheme::Normalized,
        }
    }
}

type Factory = Box<dyn Fn(&UnravelingParams) -> Result<Box<dyn Unraveling>> + Send + Sync>;

pub struct UnravelingRegistry {
    factories: BTreeMap<String, Factory>,
}

impl UnravelingRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&UnravelingParams) -> Result<Box<dyn Unraveling>> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn create(&self, name: &str, params: &UnravelingParams) -> Result<Box<dyn Unraveling>> {
        let f = self
            .factories
            .get(name)
            .ok_or_else(|| Error::UnknownUnraveling(name.to_string()))?;
        f(params)
    }
}

impl Default for UnravelingRegistry {
    /// Registers `qsd` and `jump`.
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("qsd", |p| {
            let config = SdeConfig::new(p.dt, p.scheme)?;
            Ok(Box::new(QsdUnraveling::new(config)))
        });
        r.register("jump", |p| Ok(Box::new(JumpUnraveling::new(p.dt)?)));
        r
    }
}

impl fmt::Debug for UnravelingRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.factories.keys()).finish()
    }
}
