mod common;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use common::*;
use wishart_gp::gp::{build_kernel_matrix, gp_log_likelihood, kernel_matrix, CovMatrix, HyperparamVector};
use wishart_gp::priors::{assemble_scale_matrix, log_det_coefficient, wishart_log_density, LookbackBuffer};

#[test]
fn likelihood_matches_dense_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..50 {
        let p = rng.random_range(1..=10);
        let sigma = if case % 2 == 0 {
            random_spd(p, &mut rng)
        } else {
            let x = random_matrix(p, 3, -2.0, 2.0, &mut rng);
            let theta = HyperparamVector::new(vec![0.3, -0.2, 0.5], (0.4f64).ln()).unwrap();
            if p < 2 {
                random_spd(p, &mut rng)
            } else {
                build_kernel_matrix(&x, &theta, true, 1e-8).unwrap().into_entries()
            }
        };
        let y = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
        let got = gp_log_likelihood(&y, &CovMatrix::from_entries(sigma.clone()).unwrap()).unwrap();
        let want = dense_log_likelihood(&y, &sigma);
        assert!((got - want).abs() < 1e-8, "case {case}: {got} vs {want}");
    }
}

#[test]
fn wishart_matches_dense_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..50 {
        let p = rng.random_range(1..=5);
        let sigma = random_spd(p, &mut rng);
        let v = random_spd(p, &mut rng);
        let n = [p + 1, p + 2, p + 10][case % 3];
        let got = wishart_log_density(
            &CovMatrix::from_entries(sigma.clone()).unwrap(),
            &CovMatrix::from_entries(v.clone()).unwrap(),
            n,
            false,
        )
        .unwrap();
        let want = dense_wishart(&sigma, &v, n);
        assert!((got - want).abs() < 1e-8, "case {case}: {got} vs {want}");
    }
}

#[test]
fn determinant_coefficient_vanishes_at_p_plus_one() {
    for p in 1..=20 {
        assert_eq!(log_det_coefficient(p + 1, p), 0.0);
    }
    // At n = p + 1 only the trace term responds to rescaling Σ.
    let v = CovMatrix::identity(3);
    let at = |c: f64| {
        let s = CovMatrix::from_entries(DMatrix::identity(3, 3) * c).unwrap();
        wishart_log_density(&s, &v, 4, false).unwrap()
    };
    assert!((at(2.0) - at(1.0) + 1.5).abs() < 1e-12);
    assert!((at(1e-6) - at(1.0) - 1.5 * (1.0 - 1e-6)).abs() < 1e-12);
}

#[test]
fn kernel_matches_direct_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let x = random_matrix(8, 4, -3.0, 3.0, &mut rng);
        let ls: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let got = kernel_matrix(&x, &ls).unwrap();
        let want = naive_kernel(&x, &ls);
        assert!((got - want).amax() < 1e-14);
    }
}

fn dyadic_state(rng: &mut ChaCha8Rng, d: usize) -> HyperparamVector {
    let ls = (0..d).map(|_| rng.random_range(-16i32..=16) as f64 / 8.0).collect();
    HyperparamVector::new(ls, rng.random_range(-24i32..=0) as f64 / 8.0).unwrap()
}

#[test]
fn scale_matrix_equals_two_step_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let (p, d, n) = (5, 3, 7);
    for _ in 0..20 {
        let x = random_matrix(p, d, -1.5, 1.5, &mut rng);
        let window: Vec<HyperparamVector> = (0..n).map(|_| dyadic_state(&mut rng, d)).collect();
        let mut buffer = LookbackBuffer::new(n).unwrap();
        for s in &window[..n - 1] {
            buffer.push(s.clone());
        }
        let v = assemble_scale_matrix(&buffer, &window[n - 1], &x, 1e-8).unwrap();

        // Window mean by plain summation; dyadic entries make it exact.
        let mean: Vec<f64> = (0..d)
            .map(|q| window.iter().map(|s| s.log_lengthscales[q]).sum::<f64>() / n as f64)
            .collect();
        let mut want = kernel_matrix(&x, &mean).unwrap();
        for i in 0..p {
            want[(i, i)] += 1e-8;
        }
        assert_eq!(v.entries(), &want);
    }
}

#[test]
fn scale_matrix_ignores_window_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let (p, d, n) = (5, 4, 9);
    for _ in 0..20 {
        let x = random_matrix(p, d, -1.5, 1.5, &mut rng);
        let mut window: Vec<HyperparamVector> = (0..n)
            .map(|_| {
                let ls = (0..d).map(|_| rng.random_range(-1.0..1.5)).collect();
                HyperparamVector::new(ls, -1.0).unwrap()
            })
            .collect();
        let build = |w: &[HyperparamVector]| {
            let mut b = LookbackBuffer::new(n).unwrap();
            for s in &w[..n - 1] {
                b.push(s.clone());
            }
            assemble_scale_matrix(&b, &w[n - 1], &x, 1e-8).unwrap().into_entries()
        };
        let reference = build(&window);
        for _ in 0..5 {
            window.shuffle(&mut rng);
            assert_eq!(build(&window), reference);
        }
    }
}
