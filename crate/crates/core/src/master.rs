//! Deterministic dense integration of the Lindblad master equation.
//!
//! This is the reference every stochastic estimate is checked against:
//! one-time dynamics, regression-theorem matrix elements, the block
//! structure of the doubled-space equation, two-time correlations and
//! steady states. Density matrices are vectorized by column stacking, so
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hilbert::{check_dim, extend_model, make_theta, Ket, LindbladModel, Operator, C64, I, ONE, ZERO};

const DENSITY_TOLERANCE: f64 = 1e-10;

/// A (possibly non-Hermitian) matrix evolved by the master equation.
///
/// `hermitian` marks matrices that are genuine density matrices; off-diagonal
/// blocks of a doubled-space matrix and regression seeds like `|ψ⟩⟨φ|` carry
/// `false`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<C64>,
    hermitian: bool,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity when `hermitian` is set.
    pub fn new(entries: DMatrix<C64>, hermitian: bool) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::NotSquare {
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        if entries.nrows() == 0 {
            return Err(Error::EmptyDimension);
        }
        let rho = Self { entries, hermitian };
        if hermitian {
            let defect = (&rho.entries - rho.entries.adjoint())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            if defect > 1e-12 {
                return Err(Error::InvalidDensityMatrix(format!("not hermitian ({defect:e})")));
            }
            let tr = rho.trace();
            if (tr - ONE).norm() > DENSITY_TOLERANCE {
                return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
            }
            let min = rho.eigenvalues_hermitian().into_iter().fold(f64::INFINITY, f64::min);
            if min < -DENSITY_TOLERANCE {
                return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(rho)
    }

    pub(crate) fn from_outer_unchecked(entries: DMatrix<C64>, hermitian: bool) -> Self {
        Self { entries, hermitian }
    }

    /// `|ket⟩⟨ket|`.
    pub fn pure(ket: &Ket) -> Result<Self> {
        Self::new(ket.vector() * ket.vector().adjoint(), true)
    }

    /// `I/dim`, the Haar average of `|ψ⟩⟨ψ|`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        let diag = C64::new(1.0 / dim as f64, 0.0);
        Ok(Self::from_outer_unchecked(DMatrix::from_diagonal_element(dim, dim, diag), true))
    }

    /// `|a⟩⟨b|`, flagged non-Hermitian.
    pub fn outer(a: &Ket, b: &Ket) -> Result<Self> {
        check_dim(a.dim(), b.dim())?;
        Ok(Self::from_outer_unchecked(a.vector() * b.vector().adjoint(), false))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn is_hermitian_flagged(&self) -> bool {
        self.hermitian
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// `Tr{A ρ}`.
    pub fn expectation(&self, a: &Operator) -> Result<C64> {
        check_dim(self.dim(), a.dim())?;
        Ok((a.matrix() * &self.entries).trace())
    }

    /// Eigenvalues of the Hermitian part `(ρ + ρ†)/2`.
    pub fn eigenvalues_hermitian(&self) -> Vec<f64> {
        let h = (&self.entries + self.entries.adjoint()) * C64::new(0.5, 0.0);
        nalgebra::SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
    }

    /// Block `(i, j)` of a doubled-space matrix (`0` = upper/φ, `1` = lower/ψ).
    /// Blocks are always flagged non-Hermitian; they do not have unit trace.
    pub fn block(&self, i: usize, j: usize) -> Result<DensityMatrix> {
        if !self.dim().is_multiple_of(2) || i > 1 || j > 1 {
            return Err(Error::InvalidArgument("not a doubled-space matrix".into()));
        }
        let n = self.dim() / 2;
        Ok(Self::from_outer_unchecked(
            self.entries.view((i * n, j * n), (n, n)).into_owned(),
            false,
        ))
    }
}

/// Matrix of the master-equation generator acting on column-stacked `vec(ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    dim: usize,
    matrix: DMatrix<C64>,
}

impl Liouvillian {
    /// Hilbert-space dimension (the matrix is `dim² × dim²`).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn apply(&self, rho: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        check_dim(self.dim, rho.nrows())?;
        let v = &self.matrix * vectorize(rho);
        Ok(unvectorize(&v, self.dim))
    }
}

pub fn vectorize(m: &DMatrix<C64>) -> DVector<C64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &DVector<C64>, dim: usize) -> DMatrix<C64> {
    DMatrix::from_column_slice(dim, dim, v.as_slice())
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// `ρ ↦ −i[H,ρ] + ½ Σ_j (2 L_j ρ L_j† − L_j†L_j ρ − ρ L_j†L_j)`.
pub fn build_liouvillian(model: &LindbladModel) -> Liouvillian {
    let n = model.dim();
    let id = DMatrix::<C64>::identity(n, n);
    let h = model.hamiltonian().matrix();
    let k = model.decay_operator();
    let mut m = (kron(&id, h) - kron(&h.transpose(), &id)) * (-I);
    for l in model.lindblads() {
        let l = l.matrix();
        m += kron(&l.map(|z| z.conj()), l);
    }
    m -= (kron(&id, &k) + kron(&k.transpose(), &id)) * C64::new(0.5, 0.0);
    Liouvillian { dim: n, matrix: m }
}

/// Right-hand side of the master equation evaluated directly from
/// commutators and dissipators, independent of the Liouvillian matrix.
pub fn lindblad_rhs(model: &LindbladModel, rho: &DMatrix<C64>) -> DMatrix<C64> {
    let h = model.hamiltonian().matrix();
    let mut out = (h * rho - rho * h) * (-I);
    for l in model.lindblads() {
        let l = l.matrix();
        let ld = l.adjoint();
        let ldl = &ld * l;
        out += l * rho * &ld - (&ldl * rho + rho * &ldl) * C64::new(0.5, 0.0);
    }
    out
}

/// Fixed step of the classical fourth-order Runge–Kutta integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeConfig {
    pub h: f64,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self { h: 1e-3 }
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    let mut prev = 0.0;
    for &t in grid {
        if !(t >= prev) || !t.is_finite() {
            return Err(Error::NonMonotoneGrid);
        }
        prev = t;
    }
    Ok(())
}

/// Integrates `dv/dt = M v` from `t = 0` and records `v` at every grid node.
/// Each interval is split into `ceil(Δ/h)` equal RK4 steps.
fn rk4_linear(m: &DMatrix<C64>, v0: DVector<C64>, grid: &[f64], h: f64) -> Result<Vec<DVector<C64>>> {
    if !(h > 0.0) {
        return Err(Error::NonPositiveStep(h));
    }
    check_grid(grid)?;
    let mut v = v0;
    let mut t = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    let n = v.len();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        DVector::zeros(n),
        DVector::zeros(n),
        DVector::zeros(n),
        DVector::zeros(n),
        DVector::zeros(n),
    );
    for &node in grid {
        let span = node - t;
        let steps = (span / h - 1e-9).ceil().max(0.0) as usize;
        if steps > 0 {
            let step = span / steps as f64;
            let hc = C64::new(step, 0.0);
            let half = C64::new(0.5 * step, 0.0);
            for _ in 0..steps {
                k1.gemv(ONE, m, &v, ZERO);
                tmp.copy_from(&v);
                tmp.axpy(half, &k1, ONE);
                k2.gemv(ONE, m, &tmp, ZERO);
                tmp.copy_from(&v);
                tmp.axpy(half, &k2, ONE);
                k3.gemv(ONE, m, &tmp, ZERO);
                tmp.copy_from(&v);
                tmp.axpy(hc, &k3, ONE);
                k4.gemv(ONE, m, &tmp, ZERO);
                let sixth = C64::new(step / 6.0, 0.0);
                v.axpy(sixth, &k1, ONE);
                v.axpy(sixth * 2.0, &k2, ONE);
                v.axpy(sixth * 2.0, &k3, ONE);
                v.axpy(sixth, &k4, ONE);
            }
        }
        t = node;
        out.push(v.clone());
    }
    Ok(out)
}

/// Evolves `rho0` (given at `t = 0`) and returns `ρ(t)` at each grid node.
pub fn evolve(rho0: &DensityMatrix, liouvillian: &Liouvillian, t_grid: &[f64], ode: &OdeConfig) -> Result<Vec<DensityMatrix>> {
    check_dim(liouvillian.dim(), rho0.dim())?;
    let vs = rk4_linear(liouvillian.matrix(), vectorize(rho0.matrix()), t_grid, ode.h)?;
    Ok(vs
        .iter()
        .map(|v| DensityMatrix::from_outer_unchecked(unvectorize(v, rho0.dim()), rho0.hermitian))
        .collect())
}

/// `⟨φ_0|A(t)|ψ_0⟩ = Tr{A V(t,0)[|ψ_0⟩⟨φ_0|]}` via the original generator.
pub fn regression_matrix_element(
    a: &Operator,
    phi0: &Ket,
    psi0: &Ket,
    model: &LindbladModel,
    t_grid: &[f64],
    ode: &OdeConfig,
) -> Result<Vec<C64>> {
    check_dim(model.dim(), a.dim())?;
    check_dim(model.dim(), phi0.dim())?;
    let seed = DensityMatrix::outer(psi0, phi0)?;
    evolve(&seed, &build_liouvillian(model), t_grid, ode)?
        .iter()
        .map(|rho| rho.expectation(a))
        .collect()
}

/// Evolves `|θ_0⟩⟨θ_0|` under the doubled-space generator and returns the
/// full doubled matrices.
pub fn doubled_evolution(
    phi0: &Ket,
    psi0: &Ket,
    model: &LindbladModel,
    t_grid: &[f64],
    ode: &OdeConfig,
) -> Result<Vec<DensityMatrix>> {
    check_dim(model.dim(), phi0.dim())?;
    let theta = make_theta(phi0, psi0)?;
    let rho0 = crate::hilbert::projector(&theta);
    evolve(&rho0, &build_liouvillian(&extend_model(model)), t_grid, ode)
}

/// The `ρ̃_21` block of [`doubled_evolution`]; the matrix element of `A` is
/// `2 Tr{A ρ̃_21(t)}`.
pub fn doubled_block_evolution(
    phi0: &Ket,
    psi0: &Ket,
    model: &LindbladModel,
    t_grid: &[f64],
    ode: &OdeConfig,
) -> Result<Vec<DensityMatrix>> {
    doubled_evolution(phi0, psi0, model, t_grid, ode)?
        .iter()
        .map(|r| r.block(1, 0))
        .collect()
}

/// `Tr{A V(t+τ,t)[B ρ(t)]}` with `ρ(t)` obtained from `rho0` at `t = 0`.
pub fn oracle_two_time(
    a: &Operator,
    b: &Operator,
    model: &LindbladModel,
    rho0: &DensityMatrix,
    t: f64,
    tau_grid: &[f64],
    ode: &OdeConfig,
) -> Result<Vec<C64>> {
    if !(t >= 0.0) {
        return Err(Error::NonMonotoneGrid);
    }
    check_dim(model.dim(), a.dim())?;
    check_dim(model.dim(), b.dim())?;
    let liou = build_liouvillian(model);
    let rho_t = evolve(rho0, &liou, &[t], ode)?.pop().expect("one node");
    let seed = DensityMatrix::from_outer_unchecked(b.matrix() * rho_t.matrix(), false);
    evolve(&seed, &liou, tau_grid, ode)?
        .iter()
        .map(|r| r.expectation(a))
        .collect()
}

/// Threshold (relative to the largest singular value) below which a
/// singular value of the Liouvillian counts as zero.
const NULL_SPACE_TOLERANCE: f64 = 1e-10;

/// The unique stationary state, from a direct null-space solve.
pub fn steady_state(model: &LindbladModel) -> Result<DensityMatrix> {
    let n = model.dim();
    let liou = build_liouvillian(model);
    let m = liou.matrix();
    let sv = m.singular_values();
    let scale = sv.max().max(1.0);
    let nullity = sv.iter().filter(|&&s| s <= NULL_SPACE_TOLERANCE * scale).count();
    if nullity != 1 {
        return Err(Error::DegenerateSteadyState(nullity));
    }
    // Row 0 is a combination of the other diagonal rows (trace preservation),
    // so it can be swapped for the normalization constraint Tr ρ = 1.
    let mut system = m.clone();
    for c in 0..n * n {
        system[(0, c)] = ZERO;
    }
    for d in 0..n {
        system[(0, d * (n + 1))] = ONE;
    }
    let mut rhs = DVector::zeros(n * n);
    rhs[0] = ONE;
    let v = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("steady-state system".into()))?;
    let rho = unvectorize(&v, n);
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    DensityMatrix::new(rho, true)
}
