mod common;

use common::*;
use gaussfid::channels::{apply, compose, memory_channel, validate, GaussianChannel, MemoryNoiseSpec};
use gaussfid::fidelity::{
    channel_fidelity, closed_form_entangled, closed_form_memory, overlap,
};
use gaussfid::phase_space::{reorder, spd_solve, sqrt_det, PhaseSpaceVector, QuadratureOrdering};
use gaussfid::states::{char_function, coherent, purity, two_mode_squeezed, vacuum};
use gaussfid::{GaussianState, Matrix, Vector};
use nalgebra::Complex;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn matrix_strategy(max_dim: usize) -> impl Strategy<Value = Matrix> {
    (1..=max_dim).prop_flat_map(|d| {
        prop::collection::vec(-10.0..10.0f64, d * d).prop_map(move |v| Matrix::from_vec(d, d, v))
    })
}

proptest! {
    #[test]
    fn reorder_round_trip_is_bit_exact(n in 1usize..=4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_vector(&mut rng, 4 * n * n, 5.0);
        let m = Matrix::from_vec(2 * n, 2 * n, m.as_slice().to_vec());
        let there = reorder(&m, QuadratureOrdering::Interleaved, QuadratureOrdering::Block).unwrap();
        let back = reorder(&there, QuadratureOrdering::Block, QuadratureOrdering::Interleaved).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn spd_solve_residual(b in matrix_strategy(8), eps in 0.01..1.0f64, seed in any::<u64>()) {
        let d = b.nrows();
        let m = &b * b.transpose() + Matrix::identity(d, d) * eps;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_vector(&mut rng, d, 3.0);
        let w = spd_solve(&m, &v).unwrap();
        let resid = (&m * w - &v).norm() / v.norm().max(1e-300);
        prop_assert!(resid <= 1e-10, "residual {resid}");
    }

    #[test]
    fn sqrt_det_squares_to_det(b in matrix_strategy(8), eps in 0.05..1.0f64) {
        let d = b.nrows();
        let m = &b * b.transpose() + Matrix::identity(d, d) * eps;
        let sd = sqrt_det(&m).unwrap();
        let det = m.clone().lu().determinant();
        prop_assert!(rel_err(sd * sd, det) <= 1e-10, "{} vs {}", sd * sd, det);
    }

    #[test]
    fn char_function_bounded_and_hermitian(seed in any::<u64>(), n in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_pure_state(&mut rng, n);
        let e = random_vector(&mut rng, 2 * n, 3.0);
        let eps = PhaseSpaceVector::new(e.clone(), QuadratureOrdering::Interleaved).unwrap();
        let neg = PhaseSpaceVector::new(-e, QuadratureOrdering::Interleaved).unwrap();
        let chi = char_function(&s, &eps).unwrap();
        prop_assert!(chi.norm() <= 1.0);
        let chi_neg = char_function(&s, &neg).unwrap();
        prop_assert!((chi_neg - chi.conj()).norm() <= 1e-15);
    }

    #[test]
    fn memory_noise_is_psd(noise in 0.0..50.0f64, x in 0.0..=1.0f64) {
        let c = memory_channel(MemoryNoiseSpec::new(noise, x).unwrap());
        let r = validate(&c);
        prop_assert!(r.noise_condition && r.cp_condition);
        prop_assert!(r.g_min_eig >= -1e-9 * noise.max(1.0));
        prop_assert!((r.g_min_eig - noise * (1.0 - x)).abs() <= 1e-9 * noise.max(1.0));
    }

    #[test]
    fn classical_noise_fidelity_ignores_alpha(seed in any::<u64>(), n in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_noise_channel(&mut rng, n);
        let f0 = channel_fidelity(&c, &coherent(&random_alphas(&mut rng, n, 3.0)).unwrap()).unwrap().value;
        let f1 = channel_fidelity(&c, &coherent(&random_alphas(&mut rng, n, 3.0)).unwrap()).unwrap().value;
        prop_assert_eq!(f0, f1);
    }
}

#[test]
fn purity_detects_pure_and_thermal() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let n = 1 + (rand::Rng::random_range(&mut rng, 0..2usize));
        let pure = random_pure_state(&mut rng, n);
        let det = (pure.cov() * 2.0).determinant();
        assert!((det - 1.0).abs() <= 1e-9);
        assert!((purity(&pure).unwrap() - 1.0).abs() <= 1e-9);

        let nbar = rand::Rng::random_range(&mut rng, 0.01..3.0);
        let thermal = GaussianState::new(Matrix::identity(2 * n, 2 * n) * (nbar + 0.5), Vector::zeros(2 * n)).unwrap();
        let det = (thermal.cov() * 2.0).determinant();
        assert!((det - 1.0).abs() > 1e-9);
        assert!(purity(&thermal).unwrap() < 1.0 - 1e-9);
    }
}

#[test]
fn cp_channels_preserve_physicality() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for k in 0..300 {
        let n = 1 + k % 2;
        let c = random_cp_channel(&mut rng, n);
        let s = random_pure_state(&mut rng, n);
        let out = apply(&c, &s).expect("CP channel output is physical");
        assert!(out.uncertainty_min_eig() >= -1e-9);
        // mixed inputs as well
        let mixed = apply(&random_noise_channel(&mut rng, n), &s).unwrap();
        assert!(apply(&c, &mixed).is_ok());
    }
}

#[test]
fn compose_is_associative_and_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for k in 0..200 {
        let n = 1 + k % 2;
        let (c1, c2, c3) = (
            random_cp_channel(&mut rng, n),
            random_cp_channel(&mut rng, n),
            random_cp_channel(&mut rng, n),
        );
        let s = random_pure_state(&mut rng, n);
        let left = apply(&compose(&c3, &compose(&c2, &c1).unwrap()).unwrap(), &s).unwrap();
        let right = apply(&compose(&compose(&c3, &c2).unwrap(), &c1).unwrap(), &s).unwrap();
        let seq = apply(&c3, &apply(&c2, &apply(&c1, &s).unwrap()).unwrap()).unwrap();
        let scale = left.cov().amax().max(1.0);
        assert!((left.cov() - right.cov()).amax() <= 1e-12 * scale);
        assert!((left.disp() - right.disp()).amax() <= 1e-12 * left.disp().amax().max(1.0));
        assert!((left.cov() - seq.cov()).amax() <= 1e-12 * scale);
    }
}

#[test]
fn identity_channel_is_exact_fixed_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 1..=3 {
        let s = random_pure_state(&mut rng, n);
        assert_eq!(apply(&GaussianChannel::identity(n).unwrap(), &s).unwrap(), s);
        assert_eq!(channel_fidelity(&GaussianChannel::identity(n).unwrap(), &s).unwrap().disp_factor, 1.0);
    }
}

#[test]
fn fidelity_in_unit_interval_and_one_only_for_fixed_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for k in 0..500 {
        let n = 1 + k % 2;
        let c = random_cp_channel(&mut rng, n);
        let s = random_pure_state(&mut rng, n);
        let f = channel_fidelity(&c, &s).unwrap();
        assert!(f.value > 0.0 && f.value <= 1.0 + 1e-12, "{}", f.value);
        let out = apply(&c, &s).unwrap();
        let moved = (out.cov() - s.cov()).amax() > 1e-6 || (out.disp() - s.disp()).amax() > 1e-6;
        assert!(moved && f.value < 1.0);
        assert!((f.value - f.det_factor * f.disp_factor).abs() <= 1e-12 * f.value);
    }
}

#[test]
fn formula_matches_overlap() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for k in 0..400 {
        let n = 1 + k % 2;
        let c = random_cp_channel(&mut rng, n);
        let s = random_pure_state(&mut rng, n);
        let f = channel_fidelity(&c, &s).unwrap().value;
        let o = overlap(&s, &apply(&c, &s).unwrap()).unwrap();
        assert!(rel_err(f, o) <= 1e-12, "{f} vs {o}");
    }
}

#[test]
fn closed_forms_match_channel_on_grid() {
    let coherent_in = coherent(&[Complex::new(0.7, -0.2), Complex::new(-1.0, 0.4)]).unwrap();
    for noise in [0.0, 0.5, 1.0, 2.0] {
        for x in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let c = memory_channel(MemoryNoiseSpec::new(noise, x).unwrap());
            let f = channel_fidelity(&c, &coherent_in).unwrap().value;
            assert!(rel_err(f, closed_form_memory(noise, x).unwrap()) <= 1e-12);
            for r in [0.0, 0.5, 1.0] {
                let f = channel_fidelity(&c, &two_mode_squeezed(r).unwrap()).unwrap().value;
                assert!(rel_err(f, closed_form_entangled(noise, x, r).unwrap()) <= 1e-12);
            }
        }
    }
}

fn central_diff(f: impl Fn(f64) -> f64, at: f64, h: f64) -> f64 {
    (f(at + h) - f(at - h)) / (2.0 * h)
}

#[test]
fn closed_form_monotonicity() {
    let h = 1e-5;
    for noise in [0.25, 0.5, 1.0, 2.0, 5.0] {
        for x in [0.1, 0.3, 0.5, 0.7, 0.9] {
            assert!(central_diff(|x| closed_form_memory(noise, x).unwrap(), x, h) > 0.0);
            assert!(central_diff(|n| closed_form_memory(n, x).unwrap(), noise, h) < 0.0);
            for r in [0.0, 0.25, 0.5, 1.0, 1.5] {
                assert!(central_diff(|x| closed_form_entangled(noise, x, r).unwrap(), x, h) > 0.0);
                assert!(central_diff(|n| closed_form_entangled(n, x, r).unwrap(), noise, h) < 0.0);
            }
        }
    }
}

#[test]
fn full_memory_fidelity_grows_with_squeezing() {
    let h = 1e-5;
    for noise in [0.0, 0.5, 1.0, 3.0] {
        for k in 1..=30 {
            let r = k as f64 * 0.1;
            let d = central_diff(|r| closed_form_entangled(noise, 1.0, r).unwrap(), r, h);
            assert!(d >= 0.0, "N={noise} r={r} d={d}");
        }
    }
}

#[test]
fn squeezing_claim_fails_without_full_memory() {
    // at x < 1 the cosh term eventually dominates
    let f1 = closed_form_entangled(1.0, 0.5, 1.0).unwrap();
    let f2 = closed_form_entangled(1.0, 0.5, 2.0).unwrap();
    assert!(f2 < f1);
}

#[test]
fn displacement_never_helps() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let mut checked = 0;
    while checked < 200 {
        let n = 1 + checked % 2;
        let c = random_cp_channel(&mut rng, n);
        if c.is_classical_noise() {
            continue;
        }
        let base = random_pure_state(&mut rng, n);
        let s = base.displaced(random_vector(&mut rng, 2 * n, 2.0)).unwrap();
        let delta = c.a() * s.disp() - s.disp();
        let f = channel_fidelity(&c, &s).unwrap();
        if delta.amax() > 1e-6 {
            assert!(f.disp_factor < 1.0);
        }
        let centered = s.displaced(Vector::zeros(2 * n)).unwrap();
        assert!(f.value <= channel_fidelity(&c, &centered).unwrap().value * (1.0 + 1e-12));
        checked += 1;
    }
}

#[test]
fn vacuum_overlap_with_itself_after_noise_is_closed_form() {
    let v = vacuum(2).unwrap();
    let c = memory_channel(MemoryNoiseSpec::new(2.0, 0.3).unwrap());
    let f = channel_fidelity(&c, &v).unwrap().value;
    assert!(rel_err(f, closed_form_memory(2.0, 0.3).unwrap()) <= 1e-12);
}
