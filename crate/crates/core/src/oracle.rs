//! Independent numerical checks of the closed-form channel fidelity.
//!
//! [`quad_fidelity`] integrates the phase-space overlap integral
//! `(2π)^{-n} ∫ exp(-½ εᵀMε) cos(ΔD·ε) dε` on a midpoint grid, with
//! `M = AΓAᵀ + Γ + G`. [`mc_fidelity`] averages the overlap of the input
//! with randomly displaced copies of itself, `E_{d ~ N(0, G)}[exp(-¼ dᵀΓ⁻¹d)]`,
//! which only applies to classical noise channels (`A = I`).
//!
//! Both split their work into fixed chunks and reduce chunk results with a
//! fixed pairwise tree, so results do not depend on the rayon pool size.

use nalgebra::SymmetricEigen;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::channels::{validate, GaussianChannel};
use crate::error::{invalid, Error, Result};
use crate::fidelity::PURE_TOL;
use crate::phase_space::SpdFactor;
use crate::states::{purity, GaussianState};
use crate::{Matrix, Vector};

/// Largest number of quadrature nodes accepted.
pub const MAX_GRID_POINTS: f64 = 1e8;
pub const MIN_POINTS_PER_AXIS: usize = 16;
pub const MIN_MC_SAMPLES: u64 = 10_000;
/// Samples per Monte-Carlo chunk; each chunk owns one ChaCha stream.
pub const MC_CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureGrid {
    half_width: f64,
    points_per_axis: usize,
}

impl QuadratureGrid {
    pub fn new(half_width: f64, points_per_axis: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return invalid(format!("grid half-width must be positive, got {half_width}"));
        }
        if points_per_axis < MIN_POINTS_PER_AXIS {
            return invalid(format!(
                "grid needs at least {MIN_POINTS_PER_AXIS} points per axis, got {points_per_axis}"
            ));
        }
        Ok(Self {
            half_width,
            points_per_axis,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Default grid for `n` modes: `L = 8, m = 201` for one mode, `L = 6, m = 41` for two.
    pub fn default_for(modes: usize) -> Self {
        match modes {
            1 => Self::new(8.0, 201).unwrap(),
            _ => Self::new(6.0, 41).unwrap(),
        }
    }

    fn check_size(&self, dims: usize) -> Result<()> {
        let points = (self.points_per_axis as f64).powi(dims as i32);
        if points > MAX_GRID_POINTS {
            return Err(Error::GridTooLarge {
                points,
                limit: MAX_GRID_POINTS,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    samples: u64,
    seed: u64,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Result<Self> {
        if samples < MIN_MC_SAMPLES {
            return invalid(format!(
                "Monte-Carlo needs at least {MIN_MC_SAMPLES} samples, got {samples}"
            ));
        }
        Ok(Self { samples, seed })
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// splitmix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for item `index` derived from a root seed:
/// `splitmix64(root ^ splitmix64(index))`.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    splitmix64(root ^ splitmix64(index))
}

/// Reduces `items` with a balanced binary tree whose shape depends only on
/// `items.len()`.
pub(crate) fn pairwise<T: Copy>(items: &[T], combine: &impl Fn(T, T) -> T) -> Option<T> {
    match items.len() {
        0 => None,
        1 => Some(items[0]),
        len => {
            let (lo, hi) = items.split_at(len / 2);
            Some(combine(
                pairwise(lo, combine).unwrap(),
                pairwise(hi, combine).unwrap(),
            ))
        }
    }
}

fn require_pure(s: &GaussianState) -> Result<()> {
    let p = purity(s)?;
    if p < 1.0 - PURE_TOL {
        return Err(Error::Precondition(format!(
            "oracle requires a pure input (purity {p})"
        )));
    }
    Ok(())
}

/// Midpoint-rule evaluation of the overlap integral.
pub fn quad_fidelity(c: &GaussianChannel, s: &GaussianState, grid: QuadratureGrid) -> Result<f64> {
    let n = s.modes();
    if c.modes() != n {
        return Err(Error::DimensionMismatch {
            expected: 2 * c.modes(),
            got: 2 * n,
        });
    }
    if n > 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    let dims = 2 * n;
    grid.check_size(dims)?;
    require_pure(s)?;

    let a = c.a();
    let m = a * s.cov() * a.transpose() + s.cov() + c.g();
    let m = (&m + m.transpose()) * 0.5;
    let delta: Vector = a * s.disp() - s.disp();

    let points = grid.points_per_axis;
    let h = 2.0 * grid.half_width / points as f64;
    let nodes: Vec<f64> = (0..points)
        .map(|k| -grid.half_width + (k as f64 + 0.5) * h)
        .collect();
    let mvals: Vec<f64> = m.iter().copied().collect(); // column-major
    let dvals: Vec<f64> = delta.iter().copied().collect();
    let inner = points.pow(dims as u32 - 1);

    let slices: Vec<f64> = (0..points)
        .into_par_iter()
        .map(|first| {
            let mut eps = vec![0.0; dims];
            let mut idx = vec![0usize; dims];
            idx[0] = first;
            let mut acc = 0.0;
            for _ in 0..inner {
                for (e, &i) in eps.iter_mut().zip(&idx) {
                    *e = nodes[i];
                }
                let mut quad = 0.0;
                for j in 0..dims {
                    let col = &mvals[j * dims..(j + 1) * dims];
                    let row: f64 = col.iter().zip(&eps).map(|(mij, ei)| mij * ei).sum();
                    quad += row * eps[j];
                }
                let phase: f64 = dvals.iter().zip(&eps).map(|(d, e)| d * e).sum();
                acc += (-0.5 * quad).exp() * phase.cos();
                // odometer over the trailing axes
                for k in (1..dims).rev() {
                    idx[k] += 1;
                    if idx[k] < points {
                        break;
                    }
                    idx[k] = 0;
                }
            }
            acc
        })
        .collect();

    let total = pairwise(&slices, &|x, y| x + y).unwrap_or(0.0);
    let volume = h.powi(dims as i32);
    Ok(total * volume / (2.0 * std::f64::consts::PI).powi(n as i32))
}

#[derive(Debug, Clone, Copy)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / count as f64;
        Moments {
            count,
            mean: self.mean + delta * w,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * w,
        }
    }
}

/// Monte-Carlo estimate of the fidelity of a classical noise channel.
pub fn mc_fidelity(c: &GaussianChannel, s: &GaussianState, cfg: McConfig) -> Result<McEstimate> {
    if c.modes() != s.modes() {
        return Err(Error::DimensionMismatch {
            expected: 2 * c.modes(),
            got: 2 * s.modes(),
        });
    }
    if !c.is_classical_noise() {
        return Err(Error::UnsupportedChannel(
            "Monte-Carlo oracle requires A = I".into(),
        ));
    }
    if !validate(c).noise_condition {
        return invalid("noise covariance G must be symmetric positive semidefinite");
    }
    require_pure(s)?;

    let dims = 2 * s.modes();
    // G = L Lᵀ with eigenvalues clamped at zero for rank-deficient noise
    let g = (c.g() + c.g().transpose()) * 0.5;
    let eig = SymmetricEigen::new(g);
    let sqrt_eigs = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let l = &eig.eigenvectors * Matrix::from_diagonal(&sqrt_eigs);
    let cov_inv = SpdFactor::new(s.cov())?.inverse();
    let q = l.transpose() * cov_inv * &l * 0.25;
    let q = (&q + q.transpose()) * 0.5;
    let qvals: Vec<f64> = q.iter().copied().collect();

    let chunks = cfg.samples.div_ceil(MC_CHUNK);
    let moments: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(chunk);
            let count = MC_CHUNK.min(cfg.samples - chunk * MC_CHUNK);
            let mut z = vec![0.0; dims];
            let mut acc = Moments {
                count: 0,
                mean: 0.0,
                m2: 0.0,
            };
            for _ in 0..count {
                for zi in z.iter_mut() {
                    *zi = StandardNormal.sample(&mut rng);
                }
                let mut quad = 0.0;
                for j in 0..dims {
                    let col = &qvals[j * dims..(j + 1) * dims];
                    let row: f64 = col.iter().zip(&z).map(|(qij, zi)| qij * zi).sum();
                    quad += row * z[j];
                }
                let f = (-quad).exp();
                acc.count += 1;
                let d = f - acc.mean;
                acc.mean += d / acc.count as f64;
                acc.m2 += d * (f - acc.mean);
            }
            acc
        })
        .collect();

    let total = pairwise(&moments, &Moments::merge).expect("at least one chunk");
    let variance = if total.count > 1 {
        (total.m2 / (total.count - 1) as f64).max(0.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        estimate: total.mean,
        std_error: (variance / total.count as f64).sqrt(),
        samples: total.count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{amplifier, memory_channel, MemoryNoiseSpec};
    use crate::fidelity::closed_form_memory;
    use crate::states::{coherent, vacuum};
    use nalgebra::Complex;

    #[test]
    fn grid_validation() {
        assert!(QuadratureGrid::new(0.0, 100).is_err());
        assert!(QuadratureGrid::new(5.0, 15).is_err());
        let big = QuadratureGrid::new(6.0, 101).unwrap();
        let s = coherent(&[Complex::new(0.0, 0.0); 2]).unwrap();
        let ch = memory_channel(MemoryNoiseSpec::new(1.0, 0.5).unwrap());
        assert!(matches!(quad_fidelity(&ch, &s, big), Err(Error::GridTooLarge { .. })));
    }

    #[test]
    fn quad_rejects_three_modes() {
        let ch = GaussianChannel::identity(3).unwrap();
        let s = vacuum(3).unwrap();
        assert!(matches!(
            quad_fidelity(&ch, &s, QuadratureGrid::new(6.0, 16).unwrap()),
            Err(Error::UnsupportedDimension(3))
        ));
    }

    #[test]
    fn quad_single_mode_examples() {
        let grid = QuadratureGrid::new(8.0, 201).unwrap();
        let v = vacuum(1).unwrap();
        let f = quad_fidelity(&GaussianChannel::identity(1).unwrap(), &v, grid).unwrap();
        assert!((f - 1.0).abs() < 1e-6);
        let f = quad_fidelity(&amplifier(2.0).unwrap(), &v, grid).unwrap();
        assert!((f - 0.4).abs() < 1e-6);
    }

    #[test]
    fn mc_degenerate_noise_is_exact() {
        let s = coherent(&[Complex::new(0.3, 0.1)]).unwrap();
        let ch = GaussianChannel::identity(1).unwrap();
        let est = mc_fidelity(&ch, &s, McConfig::new(20_000, 5).unwrap()).unwrap();
        assert_eq!(est.estimate, 1.0);
        assert_eq!(est.std_error, 0.0);
        assert_eq!(est.samples, 20_000);
    }

    #[test]
    fn mc_rejects_non_identity_a() {
        let v = vacuum(1).unwrap();
        let err = mc_fidelity(&amplifier(2.0).unwrap(), &v, McConfig::new(10_000, 0).unwrap());
        assert!(matches!(err, Err(Error::UnsupportedChannel(_))));
        assert!(McConfig::new(9_999, 0).is_err());
    }

    #[test]
    fn mc_memoryless_estimate() {
        let s = coherent(&[Complex::new(0.0, 0.0); 2]).unwrap();
        let ch = memory_channel(MemoryNoiseSpec::new(1.0, 0.0).unwrap());
        let est = mc_fidelity(&ch, &s, McConfig::new(200_000, 11).unwrap()).unwrap();
        let exact = closed_form_memory(1.0, 0.0).unwrap();
        assert!((est.estimate - exact).abs() <= 4.0 * est.std_error);
    }

    #[test]
    fn seed_derivation_is_stable() {
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_ne!(derive_seed(42, 0), derive_seed(42, 1));
        assert_eq!(derive_seed(42, 7), derive_seed(42, 7));
    }

    #[test]
    fn pairwise_shape() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(pairwise(&xs, &|a, b| a + b), Some(15.0));
        assert_eq!(pairwise::<f64>(&[], &|a, b| a + b), None);
    }
}
