//! Gaussian channels as `(A, G)` pairs.
//!
//! A channel maps the characteristic function as `χ(ε) -> χ(Aᵀε) e^{-½ εᵀGε}`,
//! which on moments reads `Γ -> AΓAᵀ + G` and `D -> A D`.

use crate::error::{invalid, Error, Result};
use crate::phase_space::{
    asymmetry, complexify, ensure_phase_space_dim, psd_check, real_psd_check, symplectic_form,
    SYMMETRY_TOL,
};
use crate::states::GaussianState;
use crate::{Matrix, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianChannel {
    a: Matrix,
    g: Matrix,
}

impl GaussianChannel {
    /// Builds a channel from raw matrices. Only shapes and finiteness are
    /// checked here; use [`validate`] for the positivity conditions.
    pub fn new(a: Matrix, g: Matrix) -> Result<Self> {
        let n = ensure_phase_space_dim(&a, "A")?;
        let ng = ensure_phase_space_dim(&g, "G")?;
        if n != ng {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                got: 2 * ng,
            });
        }
        if a.iter().chain(g.iter()).any(|v| !v.is_finite()) {
            return invalid("channel matrices must be finite");
        }
        Ok(Self { a, g })
    }

    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("identity channel needs at least one mode");
        }
        Ok(Self {
            a: Matrix::identity(2 * n, 2 * n),
            g: Matrix::zeros(2 * n, 2 * n),
        })
    }

    pub fn modes(&self) -> usize {
        self.a.nrows() / 2
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn g(&self) -> &Matrix {
        &self.g
    }

    /// True when `A` is exactly the identity (classical noise channels).
    pub fn is_classical_noise(&self) -> bool {
        self.a == Matrix::identity(self.a.nrows(), self.a.ncols())
    }
}

/// Noise parameters of the two-mode correlated-noise channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryNoiseSpec {
    noise: f64,
    correlation: f64,
}

impl MemoryNoiseSpec {
    /// `noise` is the variance `N ≥ 0`, `correlation` is `x ∈ [0, 1]`.
    pub fn new(noise: f64, correlation: f64) -> Result<Self> {
        if !(noise >= 0.0 && noise.is_finite()) {
            return invalid(format!("noise variance N must be finite and >= 0, got {noise}"));
        }
        if !(0.0..=1.0).contains(&correlation) {
            return invalid(format!("correlation x must lie in [0, 1], got {correlation}"));
        }
        Ok(Self { noise, correlation })
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn correlation(&self) -> f64 {
        self.correlation
    }

    /// Noise covariance of the two uses, interleaved ordering.
    pub fn covariance(&self) -> Matrix {
        let n = self.noise;
        let xn = self.correlation * n;
        #[rustfmt::skip]
        let g = Matrix::from_row_slice(4, 4, &[
              n, 0.0, -xn, 0.0,
            0.0,   n, 0.0,  xn,
            -xn, 0.0,   n, 0.0,
            0.0,  xn, 0.0,   n,
        ]);
        g
    }
}

fn check_modes(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch {
            expected: 2 * expected,
            got: 2 * got,
        });
    }
    Ok(())
}

fn symmetrized(m: Matrix) -> Matrix {
    (&m + m.transpose()) * 0.5
}

/// Output state `(AΓAᵀ + G, A D)`.
///
/// Fails with [`Error::InvalidState`] if the output violates the uncertainty
/// relation, which can only happen for channels failing the CP condition.
pub fn apply(c: &GaussianChannel, s: &GaussianState) -> Result<GaussianState> {
    check_modes(c.modes(), s.modes())?;
    let cov = symmetrized(&c.a * s.cov() * c.a.transpose() + &c.g);
    let disp: Vector = &c.a * s.disp();
    GaussianState::new(cov, disp)
}

/// The channel applying `first`, then `second`.
pub fn compose(second: &GaussianChannel, first: &GaussianChannel) -> Result<GaussianChannel> {
    check_modes(second.modes(), first.modes())?;
    let a = &second.a * &first.a;
    let g = &second.a * &first.g * second.a.transpose() + &second.g;
    Ok(GaussianChannel { a, g })
}

/// Phase-insensitive amplifier: `A = √η I₂`, `G = (η - 1) I₂`.
pub fn amplifier(eta: f64) -> Result<GaussianChannel> {
    if !(eta >= 1.0 && eta.is_finite()) {
        return invalid(format!(
            "amplifier gain must be >= 1 (got {eta}); use an attenuator for η < 1"
        ));
    }
    Ok(GaussianChannel {
        a: Matrix::identity(2, 2) * eta.sqrt(),
        g: Matrix::identity(2, 2) * (eta - 1.0),
    })
}

/// Pure-loss channel: `A = √η I₂`, `G = (1 - η)/2 I₂`.
pub fn attenuator(eta: f64) -> Result<GaussianChannel> {
    if !(0.0..=1.0).contains(&eta) {
        return invalid(format!("attenuator transmissivity must lie in [0, 1], got {eta}"));
    }
    Ok(GaussianChannel {
        a: Matrix::identity(2, 2) * eta.sqrt(),
        g: Matrix::identity(2, 2) * ((1.0 - eta) / 2.0),
    })
}

/// Random displacement channel: `A = I` with noise covariance `G`.
pub fn classical_noise(g: Matrix) -> Result<GaussianChannel> {
    let n = ensure_phase_space_dim(&g, "G")?;
    let dev = asymmetry(&g);
    if dev > SYMMETRY_TOL {
        return invalid(format!("noise covariance is not symmetric (deviation {dev:e})"));
    }
    let check = real_psd_check(&g)?;
    if !check.holds() {
        return invalid(format!(
            "noise covariance is not positive semidefinite (min eigenvalue {:e})",
            check.min_eig
        ));
    }
    GaussianChannel::new(Matrix::identity(2 * n, 2 * n), g)
}

/// Two-mode channel with correlated classical noise, `A = I₄`, `G = γ_N`.
pub fn memory_channel(spec: MemoryNoiseSpec) -> GaussianChannel {
    GaussianChannel {
        a: Matrix::identity(4, 4),
        g: spec.covariance(),
    }
}

/// Positivity diagnostics for a channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityReport {
    /// `G` is symmetric and positive semidefinite.
    pub noise_condition: bool,
    /// `G + (i/2)(Ω - AΩAᵀ) ⪰ 0`.
    pub cp_condition: bool,
    pub g_symmetric: bool,
    /// `G` is PSD but has a (numerically) zero eigenvalue.
    pub g_degenerate: bool,
    pub g_min_eig: f64,
    pub cp_min_eig: f64,
}

pub fn validate(c: &GaussianChannel) -> ValidityReport {
    let dim = c.a.nrows();
    let g_symmetric = asymmetry(&c.g) <= SYMMETRY_TOL;
    let g_sym = symmetrized(c.g.clone());
    let g_check = real_psd_check(&g_sym).expect("symmetric part is Hermitian");

    let omega = symplectic_form(c.modes())
        .expect("channel has at least one mode")
        .into_matrix();
    let skew = (&omega - &c.a * &omega * c.a.transpose()) * 0.5;
    // exact antisymmetry keeps the complex matrix Hermitian
    let skew = (&skew - skew.transpose()) * 0.5;
    let cp_check = psd_check(&complexify(&g_sym, &skew)).expect("CP matrix is Hermitian");

    let noise_condition = g_symmetric && g_check.holds();
    let g_degenerate =
        noise_condition && g_check.min_eig <= 1e-9 * g_check.spectral_norm.max(1.0);
    debug_assert_eq!(dim, g_sym.nrows());
    ValidityReport {
        noise_condition,
        cp_condition: g_symmetric && cp_check.holds(),
        g_symmetric,
        g_degenerate,
        g_min_eig: g_check.min_eig,
        cp_min_eig: cp_check.min_eig,
    }
}
