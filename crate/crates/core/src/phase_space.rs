//! Linear algebra on the 2n-dimensional real phase space.
//!
//! Everything inside the crate uses the interleaved ordering
//! `(x1, p1, x2, p2, ...)`. The block ordering `(x1, ..., xn, p1, ..., pn)` is
//! only accepted at conversion boundaries through [`reorder`] and
//! [`PhaseSpaceVector::to_ordering`].

use nalgebra::{Cholesky, Complex, DMatrix, Dyn, SymmetricEigen};

use crate::error::{invalid, Error, Result};
use crate::{Matrix, Vector};

/// Complex Hermitian matrix used by the positivity checks.
pub type HermitianMatrix = DMatrix<Complex<f64>>;

/// Elementwise tolerance for symmetry and Hermiticity checks.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Relative tolerance below which a Hermitian matrix still counts as PSD.
pub const PSD_TOL: f64 = 1e-9;

/// Smallest admissible eigenvalue of an SPD matrix, relative to its norm.
pub const SPD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum QuadratureOrdering {
    /// `(x1, p1, ..., xn, pn)`
    #[default]
    Interleaved,
    /// `(x1, ..., xn, p1, ..., pn)`
    Block,
}

impl QuadratureOrdering {
    /// Position of quadrature `quad` (0 = x, 1 = p) of `mode` among `2n` entries.
    pub fn index(self, n: usize, mode: usize, quad: usize) -> usize {
        debug_assert!(mode < n && quad < 2);
        match self {
            QuadratureOrdering::Interleaved => 2 * mode + quad,
            QuadratureOrdering::Block => quad * n + mode,
        }
    }
}

/// The canonical antisymmetric form, a direct sum of `[[0, 1], [-1, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    n: usize,
    matrix: Matrix,
}

impl SymplecticForm {
    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }
}

/// Builds the interleaved symplectic form for `n` modes.
pub fn symplectic_form(n: usize) -> Result<SymplecticForm> {
    if n == 0 {
        return invalid("symplectic form needs at least one mode");
    }
    let mut matrix = Matrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        matrix[(2 * k, 2 * k + 1)] = 1.0;
        matrix[(2 * k + 1, 2 * k)] = -1.0;
    }
    Ok(SymplecticForm { n, matrix })
}

/// A real phase-space vector tagged with its quadrature ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceVector {
    components: Vector,
    ordering: QuadratureOrdering,
}

impl PhaseSpaceVector {
    pub fn new(components: Vector, ordering: QuadratureOrdering) -> Result<Self> {
        if components.is_empty() || !components.len().is_multiple_of(2) {
            return invalid(format!(
                "phase-space vector must have positive even length, got {}",
                components.len()
            ));
        }
        Ok(Self {
            components,
            ordering,
        })
    }

    pub fn interleaved(components: &[f64]) -> Result<Self> {
        Self::new(
            Vector::from_column_slice(components),
            QuadratureOrdering::Interleaved,
        )
    }

    pub fn modes(&self) -> usize {
        self.components.len() / 2
    }

    pub fn ordering(&self) -> QuadratureOrdering {
        self.ordering
    }

    pub fn components(&self) -> &Vector {
        &self.components
    }

    pub fn to_ordering(&self, to: QuadratureOrdering) -> PhaseSpaceVector {
        let n = self.modes();
        let mut out = Vector::zeros(2 * n);
        for mode in 0..n {
            for quad in 0..2 {
                out[to.index(n, mode, quad)] = self.components[self.ordering.index(n, mode, quad)];
            }
        }
        PhaseSpaceVector {
            components: out,
            ordering: to,
        }
    }
}

pub(crate) fn ensure_square(m: &Matrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return invalid(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        ));
    }
    Ok(m.nrows())
}

pub(crate) fn ensure_phase_space_dim(m: &Matrix, what: &str) -> Result<usize> {
    let dim = ensure_square(m, what)?;
    if dim == 0 || dim % 2 != 0 {
        return invalid(format!("{what} must have positive even dimension, got {dim}"));
    }
    Ok(dim / 2)
}

/// Permutes rows and columns of `m` from one quadrature ordering to another.
pub fn reorder(m: &Matrix, from: QuadratureOrdering, to: QuadratureOrdering) -> Result<Matrix> {
    let n = ensure_phase_space_dim(m, "reordered matrix")?;
    let mut out = Matrix::zeros(2 * n, 2 * n);
    for (ma, qa) in (0..n).flat_map(|k| [(k, 0), (k, 1)]) {
        for (mb, qb) in (0..n).flat_map(|k| [(k, 0), (k, 1)]) {
            out[(to.index(n, ma, qa), to.index(n, mb, qb))] =
                m[(from.index(n, ma, qa), from.index(n, mb, qb))];
        }
    }
    Ok(out)
}

/// Largest elementwise deviation from symmetry.
pub fn asymmetry(m: &Matrix) -> f64 {
    let dim = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..dim {
        for j in (i + 1)..dim {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn is_symmetric(m: &Matrix) -> bool {
    m.is_square() && asymmetry(m) <= SYMMETRY_TOL
}

/// `re + i·im` as a complex matrix.
pub fn complexify(re: &Matrix, im: &Matrix) -> HermitianMatrix {
    HermitianMatrix::from_fn(re.nrows(), re.ncols(), |i, j| {
        Complex::new(re[(i, j)], im[(i, j)])
    })
}

fn hermitian_spectrum(h: &HermitianMatrix) -> Result<Vec<f64>> {
    if !h.is_square() {
        return invalid(format!(
            "Hermitian matrix must be square, got {}x{}",
            h.nrows(),
            h.ncols()
        ));
    }
    let dim = h.nrows();
    let mut worst = 0.0_f64;
    for i in 0..dim {
        for j in i..dim {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    if worst > SYMMETRY_TOL {
        return invalid(format!("matrix is not Hermitian (deviation {worst:e})"));
    }
    if dim == 0 {
        return Ok(Vec::new());
    }
    let eig = SymmetricEigen::new(h.clone());
    Ok(eig.eigenvalues.iter().copied().collect())
}

/// Smallest eigenvalue of a complex Hermitian matrix.
pub fn min_eig_hermitian(h: &HermitianMatrix) -> Result<f64> {
    let spectrum = hermitian_spectrum(h)?;
    spectrum
        .into_iter()
        .reduce(f64::min)
        .ok_or_else(|| Error::InvalidArgument("empty matrix".into()))
}

/// Outcome of a positive-semidefiniteness test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdCheck {
    pub min_eig: f64,
    pub spectral_norm: f64,
}

impl PsdCheck {
    /// `min_eig >= -1e-9 · max(1, ‖H‖)`.
    pub fn holds(&self) -> bool {
        self.min_eig >= -PSD_TOL * self.spectral_norm.max(1.0)
    }
}

pub fn psd_check(h: &HermitianMatrix) -> Result<PsdCheck> {
    let spectrum = hermitian_spectrum(h)?;
    let min_eig = spectrum.iter().copied().fold(f64::INFINITY, f64::min);
    let spectral_norm = spectrum.iter().fold(0.0_f64, |acc, l| acc.max(l.abs()));
    Ok(PsdCheck {
        min_eig,
        spectral_norm,
    })
}

/// PSD test for a real symmetric matrix.
pub fn real_psd_check(m: &Matrix) -> Result<PsdCheck> {
    psd_check(&complexify(m, &Matrix::zeros(m.nrows(), m.ncols())))
}

/// Cholesky factor of a validated symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    chol: Cholesky<f64, Dyn>,
    min_eig: f64,
    max_eig: f64,
}

impl SpdFactor {
    pub fn new(m: &Matrix) -> Result<Self> {
        ensure_square(m, "SPD matrix")?;
        if m.nrows() == 0 {
            return invalid("SPD matrix must be non-empty");
        }
        let dev = asymmetry(m);
        let scale = m.amax().max(1.0);
        if dev > SYMMETRY_TOL * scale {
            return Err(Error::SingularMatrix(format!(
                "matrix is not symmetric (deviation {dev:e})"
            )));
        }
        let eig = SymmetricEigen::new(m.clone());
        let min_eig = eig.eigenvalues.min();
        let max_eig = eig.eigenvalues.max();
        let norm = eig.eigenvalues.amax();
        if min_eig.is_nan() || min_eig <= SPD_TOL * norm {
            return Err(Error::SingularMatrix(format!(
                "matrix is not positive definite (min eigenvalue {min_eig:e}, norm {norm:e})"
            )));
        }
        let chol = Cholesky::new(m.clone()).ok_or_else(|| {
            Error::SingularMatrix("Cholesky factorization failed".into())
        })?;
        Ok(Self {
            chol,
            min_eig,
            max_eig,
        })
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    pub fn solve(&self, v: &Vector) -> Result<Vector> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(self.chol.solve(v))
    }

    /// `√det M` as the product of the Cholesky diagonal.
    pub fn sqrt_det(&self) -> f64 {
        self.chol.l_dirty().diagonal().iter().product()
    }

    pub fn condition_number(&self) -> f64 {
        self.max_eig / self.min_eig
    }

    pub fn inverse(&self) -> Matrix {
        self.chol.inverse()
    }
}

/// Solves `M w = v` for symmetric positive definite `M`.
pub fn spd_solve(m: &Matrix, v: &Vector) -> Result<Vector> {
    SpdFactor::new(m)?.solve(v)
}

/// `√det M` for symmetric positive definite `M`.
pub fn sqrt_det(m: &Matrix) -> Result<f64> {
    Ok(SpdFactor::new(m)?.sqrt_det())
}
