//! Finite-dimensional state vectors, operators and Lindblad models, plus the
//! embedding into the doubled space `H ⊕ H`.
//!
//! All types are dense and immutable after construction. The doubled space
//! stores the `φ` block in the upper half and the `ψ` block in the lower
//! half, so a doubled vector is `θ = (φ, ψ)ᵀ`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::master::DensityMatrix;

pub type C64 = Complex64;

/// Tolerance for the `normalized` predicate on kets.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Tolerance used when checking that a Hamiltonian is Hermitian.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// A state vector. Not necessarily normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amplitudes: DVector<C64>,
}

impl Ket {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyDimension);
        }
        Ok(Self {
            amplitudes: DVector::from_vec(amplitudes),
        })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// The `index`-th computational basis vector.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index + 1,
            });
        }
        let mut v = vec![ZERO; dim];
        v[index] = ONE;
        Self::new(v)
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(vec![ZERO; dim])
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }

    pub fn vector(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    /// Returns the unit vector along `self`.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            amplitudes: &self.amplitudes * factor,
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

/// A square complex matrix acting on a state space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::EmptyDimension);
        }
        Ok(Self { matrix })
    }

    /// Builds an operator from row-major entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        for r in rows {
            if r.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: r.len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    /// Largest entrywise deviation from hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn apply(&self, ket: &Ket) -> Result<Ket> {
        check_dim(self.dim(), ket.dim())?;
        Ok(Ket {
            amplitudes: &self.matrix * &ket.amplitudes,
        })
    }

    /// `⟨bra|self|ket⟩`.
    pub fn matrix_element(&self, bra: &Ket, ket: &Ket) -> Result<C64> {
        check_dim(self.dim(), bra.dim())?;
        check_dim(self.dim(), ket.dim())?;
        Ok(bra.amplitudes.dotc(&(&self.matrix * &ket.amplitudes)))
    }

    pub fn mul(&self, rhs: &Operator) -> Result<Operator> {
        check_dim(self.dim(), rhs.dim())?;
        Ok(Self {
            matrix: &self.matrix * &rhs.matrix,
        })
    }

    pub fn add(&self, rhs: &Operator) -> Result<Operator> {
        check_dim(self.dim(), rhs.dim())?;
        Ok(Self {
            matrix: &self.matrix + &rhs.matrix,
        })
    }

    pub fn scaled(&self, factor: C64) -> Operator {
        Self {
            matrix: &self.matrix * factor,
        }
    }

    /// Block-diagonal `diag(self, self)` on the doubled space.
    pub fn doubled(&self) -> Operator {
        let n = self.dim();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.matrix);
        m.view_mut((n, n), (n, n)).copy_from(&self.matrix);
        Self { matrix: m }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// A Hamiltonian together with its Lindblad (jump) operators.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    hamiltonian: Operator,
    lindblads: Vec<Operator>,
}

impl LindbladModel {
    pub fn new(hamiltonian: Operator, lindblads: Vec<Operator>) -> Result<Self> {
        let dim = hamiltonian.dim();
        let defect = hamiltonian.hermiticity_defect();
        if defect > HERMITIAN_TOLERANCE {
            return Err(Error::NonHermitianHamiltonian(defect));
        }
        for l in &lindblads {
            check_dim(dim, l.dim())?;
        }
        Ok(Self {
            hamiltonian,
            lindblads,
        })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn lindblads(&self) -> &[Operator] {
        &self.lindblads
    }

    pub fn n_channels(&self) -> usize {
        self.lindblads.len()
    }

    /// `Σ_j L_j† L_j`.
    pub fn decay_operator(&self) -> DMatrix<C64> {
        let n = self.dim();
        self.lindblads
            .iter()
            .fold(DMatrix::zeros(n, n), |acc, l| acc + l.matrix.adjoint() * &l.matrix)
    }

    /// Restricts a block-diagonal model on the doubled space to one of its
    /// diagonal blocks (`0` = upper, `1` = lower).
    pub fn restrict_to_block(&self, block: usize) -> Result<LindbladModel> {
        if !self.dim().is_multiple_of(2) || block > 1 {
            return Err(Error::InvalidArgument(
                "model is not on a doubled space".into(),
            ));
        }
        let n = self.dim() / 2;
        let sub = |op: &Operator| {
            Operator::new(op.matrix.view((block * n, block * n), (n, n)).into_owned())
        };
        LindbladModel::new(
            sub(&self.hamiltonian)?,
            self.lindblads.iter().map(sub).collect::<Result<_>>()?,
        )
    }
}

/// Lifts a model to the doubled space with `H̃ = diag(H, H)` and
/// `L̃_j = diag(L_j, L_j)`.
pub fn extend_model(model: &LindbladModel) -> LindbladModel {
    LindbladModel {
        hamiltonian: model.hamiltonian.doubled(),
        lindblads: model.lindblads.iter().map(Operator::doubled).collect(),
    }
}

/// A vector `θ = (φ, ψ)ᵀ` on the doubled space.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubledState {
    upper: Ket,
    lower: Ket,
}

impl DoubledState {
    pub fn new(upper: Ket, lower: Ket) -> Result<Self> {
        check_dim(upper.dim(), lower.dim())?;
        let n = upper.norm_sqr() + lower.norm_sqr();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self { upper, lower })
    }

    /// The `φ` block.
    pub fn upper(&self) -> &Ket {
        &self.upper
    }

    /// The `ψ` block.
    pub fn lower(&self) -> &Ket {
        &self.lower
    }

    /// Dimension of a single block.
    pub fn block_dim(&self) -> usize {
        self.upper.dim()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.upper.norm_sqr() + self.lower.norm_sqr()
    }

    /// Concatenated amplitudes `(φ, ψ)`.
    pub fn to_ket(&self) -> Ket {
        let mut v = Vec::with_capacity(2 * self.block_dim());
        v.extend_from_slice(self.upper.amplitudes());
        v.extend_from_slice(self.lower.amplitudes());
        Ket {
            amplitudes: DVector::from_vec(v),
        }
    }

    pub fn from_ket(ket: &Ket) -> Result<Self> {
        Self::from_amplitudes(ket.amplitudes())
    }

    pub fn from_amplitudes(amps: &[C64]) -> Result<Self> {
        if !amps.len().is_multiple_of(2) || amps.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "doubled state needs an even number of amplitudes, got {}",
                amps.len()
            )));
        }
        let n = amps.len() / 2;
        Self::new(Ket::new(amps[..n].to_vec())?, Ket::new(amps[n..].to_vec())?)
    }

    /// `⟨φ|A|ψ⟩`.
    pub fn cross_element(&self, a: &Operator) -> Result<C64> {
        a.matrix_element(&self.upper, &self.lower)
    }
}

/// The initial doubled state `θ_0 = (φ_0, ψ_0)ᵀ/√2`.
pub fn make_theta(phi0: &Ket, psi0: &Ket) -> Result<DoubledState> {
    check_dim(phi0.dim(), psi0.dim())?;
    for k in [phi0, psi0] {
        let n = k.norm_sqr();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(n));
        }
    }
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    DoubledState::new(phi0.scaled(s), psi0.scaled(s))
}

/// The rank-one matrix `|θ⟩⟨θ|` on the doubled space.
pub fn projector(theta: &DoubledState) -> DensityMatrix {
    let v = theta.to_ket();
    DensityMatrix::from_outer_unchecked(v.vector() * v.vector().adjoint(), true)
}

/// Two-level atom operators in the ordering (ground, excited).
pub mod two_level {
    use super::*;

    pub const GROUND: usize = 0;
    pub const EXCITED: usize = 1;

    /// Lowering operator `|g⟩⟨e|`.
    pub fn sigma_minus() -> Operator {
        let mut m = DMatrix::zeros(2, 2);
        m[(GROUND, EXCITED)] = ONE;
        Operator { matrix: m }
    }

    /// Raising operator `|e⟩⟨g|`.
    pub fn sigma_plus() -> Operator {
        sigma_minus().adjoint()
    }

    /// Resonant drive in the rotating frame, `(Ω/2)(σ⁺ + σ⁻)`.
    pub fn driving_hamiltonian(omega: f64) -> Operator {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(0.5 * omega, 0.0);
        m[(1, 0)] = C64::new(0.5 * omega, 0.0);
        Operator { matrix: m }
    }

    pub fn builders(omega: f64) -> (Operator, Operator, Operator) {
        (sigma_minus(), sigma_plus(), driving_hamiltonian(omega))
    }

    pub fn ground() -> Ket {
        Ket::basis(2, GROUND).expect("dim 2")
    }

    pub fn excited() -> Ket {
        Ket::basis(2, EXCITED).expect("dim 2")
    }

    /// Spontaneous emission at rate `gamma`, no Hamiltonian.
    pub fn decay_model(gamma: f64) -> LindbladModel {
        LindbladModel::new(
            Operator::zeros(2).expect("dim 2"),
            vec![sigma_minus().scaled(C64::new(gamma.sqrt(), 0.0))],
        )
        .expect("valid two-level model")
    }

    /// Resonantly driven, spontaneously decaying atom.
    pub fn fluorescence_model(omega: f64, gamma: f64) -> LindbladModel {
        LindbladModel::new(
            driving_hamiltonian(omega),
            vec![sigma_minus().scaled(C64::new(gamma.sqrt(), 0.0))],
        )
        .expect("valid two-level model")
    }
}
