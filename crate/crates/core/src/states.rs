//! Gaussian states in covariance-matrix form.
//!
//! Units are dimensionless with ℏ = 1 and vacuum covariance `I/2`, so a
//! covariance matrix is physical when `Γ + (i/2)Ω ⪰ 0`.

use nalgebra::Complex;

use crate::error::{invalid, Error, Result};
use crate::phase_space::{
    asymmetry, complexify, ensure_phase_space_dim, psd_check, symplectic_form, PhaseSpaceVector,
    QuadratureOrdering, SpdFactor, SYMMETRY_TOL,
};
use crate::{Matrix, Vector};

/// Purity may exceed one by at most this much before the state is rejected.
pub const PURITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    cov: Matrix,
    disp: Vector,
}

impl GaussianState {
    /// Validated constructor; rejects asymmetric or unphysical covariances.
    pub fn new(cov: Matrix, disp: Vector) -> Result<Self> {
        let n = ensure_phase_space_dim(&cov, "covariance matrix")?;
        if disp.len() != 2 * n {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                got: disp.len(),
            });
        }
        let dev = asymmetry(&cov);
        if dev > SYMMETRY_TOL {
            return Err(Error::InvalidState(format!(
                "covariance matrix is not symmetric (deviation {dev:e})"
            )));
        }
        if cov.iter().chain(disp.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let state = Self { cov, disp };
        let check = state.uncertainty_check()?;
        if !check.holds() {
            return Err(Error::InvalidState(format!(
                "uncertainty relation violated (min eigenvalue of Γ + iΩ/2 is {:e})",
                check.min_eig
            )));
        }
        Ok(state)
    }

    /// Pure state `Γ = S Sᵀ / 2` for a symplectic matrix `S`.
    pub fn from_symplectic(s: &Matrix, disp: Vector) -> Result<Self> {
        let n = ensure_phase_space_dim(s, "symplectic matrix")?;
        let omega = symplectic_form(n)?.into_matrix();
        let dev = (s * &omega * s.transpose() - &omega).amax();
        if dev > 1e-9 * s.amax().powi(2).max(1.0) {
            return invalid(format!("matrix is not symplectic (deviation {dev:e})"));
        }
        let cov = s * s.transpose() * 0.5;
        // symmetrize round-off from the product
        let cov = (&cov + cov.transpose()) * 0.5;
        Self::new(cov, disp)
    }

    pub fn modes(&self) -> usize {
        self.disp.len() / 2
    }

    pub fn cov(&self) -> &Matrix {
        &self.cov
    }

    pub fn disp(&self) -> &Vector {
        &self.disp
    }

    /// Same covariance, new displacement.
    pub fn displaced(&self, disp: Vector) -> Result<Self> {
        if disp.len() != self.disp.len() {
            return Err(Error::DimensionMismatch {
                expected: self.disp.len(),
                got: disp.len(),
            });
        }
        Ok(Self {
            cov: self.cov.clone(),
            disp,
        })
    }

    fn uncertainty_check(&self) -> Result<crate::phase_space::PsdCheck> {
        let omega = symplectic_form(self.modes())?.into_matrix();
        psd_check(&complexify(&self.cov, &(omega * 0.5)))
    }

    /// Smallest eigenvalue of `Γ + (i/2)Ω`.
    pub fn uncertainty_min_eig(&self) -> f64 {
        self.uncertainty_check()
            .map(|c| c.min_eig)
            .unwrap_or(f64::NAN)
    }

    pub(crate) fn from_parts_unchecked(cov: Matrix, disp: Vector) -> Self {
        Self { cov, disp }
    }
}

pub fn vacuum(n: usize) -> Result<GaussianState> {
    if n == 0 {
        return invalid("vacuum needs at least one mode");
    }
    Ok(GaussianState::from_parts_unchecked(
        Matrix::identity(2 * n, 2 * n) * 0.5,
        Vector::zeros(2 * n),
    ))
}

/// Product of coherent states; `D = √2 (Re α1, Im α1, ..., Re αn, Im αn)`.
pub fn coherent(amplitudes: &[Complex<f64>]) -> Result<GaussianState> {
    if amplitudes.is_empty() {
        return invalid("coherent state needs at least one amplitude");
    }
    if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return invalid("coherent amplitudes must be finite");
    }
    let n = amplitudes.len();
    let disp = Vector::from_iterator(
        2 * n,
        amplitudes
            .iter()
            .flat_map(|a| [a.re * std::f64::consts::SQRT_2, a.im * std::f64::consts::SQRT_2]),
    );
    Ok(GaussianState::from_parts_unchecked(
        Matrix::identity(2 * n, 2 * n) * 0.5,
        disp,
    ))
}

/// Two-mode squeezed vacuum with squeeze parameter `r`.
pub fn two_mode_squeezed(r: f64) -> Result<GaussianState> {
    if !r.is_finite() {
        return invalid("squeeze parameter must be finite");
    }
    let c = (2.0 * r).cosh() / 2.0;
    let s = (2.0 * r).sinh() / 2.0;
    #[rustfmt::skip]
    let cov = Matrix::from_row_slice(4, 4, &[
         c, 0.0,  -s, 0.0,
        0.0,  c, 0.0,   s,
         -s, 0.0,  c, 0.0,
        0.0,  s, 0.0,   c,
    ]);
    Ok(GaussianState::from_parts_unchecked(cov, Vector::zeros(4)))
}

/// Single-mode squeezed vacuum, `Γ = diag(e^{-2r}, e^{2r}) / 2`.
pub fn squeezed_vacuum(r: f64) -> Result<GaussianState> {
    if !r.is_finite() {
        return invalid("squeeze parameter must be finite");
    }
    let cov = Matrix::from_diagonal(&Vector::from_vec(vec![
        (-2.0 * r).exp() / 2.0,
        (2.0 * r).exp() / 2.0,
    ]));
    Ok(GaussianState::from_parts_unchecked(cov, Vector::zeros(2)))
}

/// `1/√det(2Γ)`, equal to one exactly for pure states.
pub fn purity(s: &GaussianState) -> Result<f64> {
    let two_cov = s.cov() * 2.0;
    let factor = SpdFactor::new(&two_cov)
        .map_err(|e| Error::InvalidState(format!("covariance is not positive definite: {e}")))?;
    let p = 1.0 / factor.sqrt_det();
    if !(p > 0.0 && p <= 1.0 + PURITY_SLACK) {
        return Err(Error::InvalidState(format!("purity {p} outside (0, 1]")));
    }
    Ok(p)
}

/// `Tr(ρ W_ε) = exp(-½ εᵀΓε + i D·ε)`.
pub fn char_function(s: &GaussianState, eps: &PhaseSpaceVector) -> Result<Complex<f64>> {
    if eps.modes() != s.modes() {
        return Err(Error::DimensionMismatch {
            expected: 2 * s.modes(),
            got: 2 * eps.modes(),
        });
    }
    let eps = eps.to_ordering(QuadratureOrdering::Interleaved);
    let e = eps.components();
    let quad = e.dot(&(s.cov() * e));
    let phase = s.disp().dot(e);
    Ok(Complex::from_polar((-0.5 * quad).exp(), phase))
}
