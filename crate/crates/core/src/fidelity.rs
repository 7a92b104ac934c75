//! Input-output fidelity of a Gaussian channel with a pure Gaussian input,
//! plus closed-form expressions for the standard channel families.

use crate::channels::GaussianChannel;
use crate::error::{invalid, Error, Result};
use crate::phase_space::SpdFactor;
use crate::states::{purity, GaussianState};
use crate::Vector;

/// Inputs with purity below `1 - PURE_TOL` are rejected by [`channel_fidelity`].
pub const PURE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityResult {
    pub value: f64,
    /// `1/√det(AΓAᵀ + Γ + G)`
    pub det_factor: f64,
    /// `exp(-½ ΔDᵀ (AΓAᵀ + Γ + G)⁻¹ ΔD)` with `ΔD = A D - D`
    pub disp_factor: f64,
    pub matrix_condition: f64,
}

fn gaussian_overlap(sum_cov: &nalgebra::DMatrix<f64>, delta: &Vector) -> Result<FidelityResult> {
    let factor = SpdFactor::new(sum_cov)?;
    let det_factor = 1.0 / factor.sqrt_det();
    let disp_factor = if delta.iter().all(|d| *d == 0.0) {
        1.0
    } else {
        let w = factor.solve(delta)?;
        (-0.5 * delta.dot(&w)).exp()
    };
    Ok(FidelityResult {
        value: det_factor * disp_factor,
        det_factor,
        disp_factor,
        matrix_condition: factor.condition_number(),
    })
}

/// `Tr(ρ₁ρ₂)` for two Gaussian states.
pub fn overlap(s1: &GaussianState, s2: &GaussianState) -> Result<f64> {
    if s1.modes() != s2.modes() {
        return Err(Error::DimensionMismatch {
            expected: 2 * s1.modes(),
            got: 2 * s2.modes(),
        });
    }
    let delta: Vector = s1.disp() - s2.disp();
    Ok(gaussian_overlap(&(s1.cov() + s2.cov()), &delta)?.value)
}

/// Fidelity `Tr(ρ_in ρ_out)` of channel `c` on the pure input `s`.
pub fn channel_fidelity(c: &GaussianChannel, s: &GaussianState) -> Result<FidelityResult> {
    if c.modes() != s.modes() {
        return Err(Error::DimensionMismatch {
            expected: 2 * c.modes(),
            got: 2 * s.modes(),
        });
    }
    let p = purity(s)?;
    if p < 1.0 - PURE_TOL {
        return Err(Error::Precondition(format!(
            "input state must be pure (purity {p})"
        )));
    }
    let a = c.a();
    let m = a * s.cov() * a.transpose() + s.cov() + c.g();
    let m = (&m + m.transpose()) * 0.5;
    let delta: Vector = a * s.disp() - s.disp();
    gaussian_overlap(&m, &delta)
}

fn check_memory_domain(noise: f64, correlation: f64) -> Result<()> {
    if !(noise >= 0.0 && noise.is_finite()) {
        return invalid(format!("noise variance N must be finite and >= 0, got {noise}"));
    }
    if !(0.0..=1.0).contains(&correlation) {
        return invalid(format!("correlation x must lie in [0, 1], got {correlation}"));
    }
    Ok(())
}

/// `1/((N+1)² - N²x²)`: correlated-noise channel on a product coherent input.
pub fn closed_form_memory(noise: f64, correlation: f64) -> Result<f64> {
    check_memory_domain(noise, correlation)?;
    let n = noise;
    Ok(1.0 / ((n + 1.0).powi(2) - n * n * correlation * correlation))
}

/// `(min, max)` of [`closed_form_memory`] over `x ∈ [0, 1]`, attained at
/// `x = 0` and `x = 1` respectively.
pub fn memory_bounds(noise: f64) -> Result<(f64, f64)> {
    Ok((
        closed_form_memory(noise, 0.0)?,
        closed_form_memory(noise, 1.0)?,
    ))
}

/// Correlated-noise channel on a two-mode squeezed vacuum input:
/// `1/(1 + N² + 2N cosh 2r - x²N² - 2xN sinh 2r)`.
pub fn closed_form_entangled(noise: f64, correlation: f64, r: f64) -> Result<f64> {
    check_memory_domain(noise, correlation)?;
    if !r.is_finite() {
        return invalid("squeeze parameter must be finite");
    }
    let (n, x) = (noise, correlation);
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    Ok(1.0 / (1.0 + n * n + 2.0 * n * c - x * x * n * n - 2.0 * x * n * s))
}

/// `2/(3η - 1)`: amplifier fidelity on the vacuum, the best pure single-mode input.
pub fn amplifier_max_fidelity(eta: f64) -> Result<f64> {
    if !(eta >= 1.0 && eta.is_finite()) {
        return invalid(format!("amplifier gain must be >= 1, got {eta}"));
    }
    Ok(2.0 / (3.0 * eta - 1.0))
}
