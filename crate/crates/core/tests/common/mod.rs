#![allow(dead_code)]

use gaussfid::channels::{validate, GaussianChannel};
use gaussfid::phase_space::{complexify, min_eig_hermitian, symplectic_form};
use gaussfid::{GaussianState, Matrix, Vector};
use nalgebra::Complex;
use rand::Rng;

pub fn rotation(n: usize, mode: usize, theta: f64) -> Matrix {
    let mut s = Matrix::identity(2 * n, 2 * n);
    let (c, si) = (theta.cos(), theta.sin());
    let k = 2 * mode;
    s[(k, k)] = c;
    s[(k, k + 1)] = si;
    s[(k + 1, k)] = -si;
    s[(k + 1, k + 1)] = c;
    s
}

pub fn squeezer(n: usize, mode: usize, r: f64) -> Matrix {
    let mut s = Matrix::identity(2 * n, 2 * n);
    s[(2 * mode, 2 * mode)] = (-r).exp();
    s[(2 * mode + 1, 2 * mode + 1)] = r.exp();
    s
}

/// Mixes modes `i` and `j` identically in x and p.
pub fn beam_splitter(n: usize, i: usize, j: usize, theta: f64) -> Matrix {
    let mut s = Matrix::identity(2 * n, 2 * n);
    let (c, si) = (theta.cos(), theta.sin());
    for q in 0..2 {
        let (a, b) = (2 * i + q, 2 * j + q);
        s[(a, a)] = c;
        s[(a, b)] = si;
        s[(b, a)] = -si;
        s[(b, b)] = c;
    }
    s
}

pub fn random_symplectic<R: Rng>(rng: &mut R, n: usize, max_r: f64) -> Matrix {
    let mut s = Matrix::identity(2 * n, 2 * n);
    for _ in 0..2 {
        for mode in 0..n {
            s = rotation(n, mode, rng.random_range(0.0..std::f64::consts::TAU)) * s;
            s = squeezer(n, mode, rng.random_range(-max_r..=max_r)) * s;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                s = beam_splitter(n, i, j, rng.random_range(0.0..std::f64::consts::TAU)) * s;
            }
        }
    }
    s
}

pub fn random_vector<R: Rng>(rng: &mut R, len: usize, scale: f64) -> Vector {
    Vector::from_fn(len, |_, _| rng.random_range(-scale..=scale))
}

pub fn random_pure_state<R: Rng>(rng: &mut R, n: usize) -> GaussianState {
    let s = random_symplectic(rng, n, 0.8);
    GaussianState::from_symplectic(&s, random_vector(rng, 2 * n, 2.0)).unwrap()
}

pub fn random_psd<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> Matrix {
    let b = Matrix::from_fn(dim, dim, |_, _| rng.random_range(-scale..=scale));
    &b * b.transpose()
}

/// Random `(A, G)` satisfying the complete-positivity condition.
pub fn random_cp_channel<R: Rng>(rng: &mut R, n: usize) -> GaussianChannel {
    let dim = 2 * n;
    let a = Matrix::from_fn(dim, dim, |_, _| rng.random_range(-1.5..=1.5));
    let omega = symplectic_form(n).unwrap().into_matrix();
    let skew = (&omega - &a * &omega * a.transpose()) * 0.5;
    let lam = min_eig_hermitian(&complexify(&Matrix::zeros(dim, dim), &skew)).unwrap();
    let g = random_psd(rng, dim, 0.7) + Matrix::identity(dim, dim) * (-lam + rng.random_range(0.0..0.5));
    let c = GaussianChannel::new(a, g).unwrap();
    assert!(validate(&c).cp_condition);
    c
}

/// Random classical noise channel (`A = I`).
pub fn random_noise_channel<R: Rng>(rng: &mut R, n: usize) -> GaussianChannel {
    GaussianChannel::new(Matrix::identity(2 * n, 2 * n), random_psd(rng, 2 * n, 0.8)).unwrap()
}

pub fn random_alphas<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Vec<Complex<f64>> {
    (0..n)
        .map(|_| Complex::new(rng.random_range(-scale..=scale), rng.random_range(-scale..=scale)))
        .collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
