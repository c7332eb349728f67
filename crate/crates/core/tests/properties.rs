use std::f64::consts::PI;

use hinv::channel::MixedUnitaryChannel;
use hinv::charfit::{lm_fit_joint, predict_p0, run_grid, Bounds, FitOptions, GridMode, SweepSpec, SweepVariant};
use hinv::circuit::{simulate, CompileMode};
use hinv::gates::{h_inverse, h_native, noisy_rx, rx, MsMode, MsNoiseParams, SqNoiseParams};
use hinv::linalg::{eig_herm, mat_exp_2x2_pauli};
use hinv::vqe::{ansatz, energy, exact_ground_energy, h2_hamiltonian, one_particle_ground_energy, purify, ExpectationSet};
use hinv::{ComplexMatrix, DensityMatrix, PauliString, C64};
use proptest::prelude::*;

fn random_state(re: &[f64], im: &[f64], weights: &[f64]) -> DensityMatrix {
    // Mixture of two random pure states.
    let a: Vec<C64> = (0..4).map(|i| C64::new(re[i], im[i])).collect();
    let b: Vec<C64> = (0..4).map(|i| C64::new(re[i + 4], im[i + 4])).collect();
    let norm = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-6);
    let (na, nb) = (norm(&a), norm(&b));
    let a: Vec<C64> = a.iter().map(|z| z / na).collect();
    let b: Vec<C64> = b.iter().map(|z| z / nb).collect();
    let w = weights[0];
    let m = &ComplexMatrix::outer(&a, &a).scale_real(w) + &ComplexMatrix::outer(&b, &b).scale_real(1.0 - w);
    DensityMatrix::from_matrix(m).unwrap()
}

fn random_unitary(c: &[f64]) -> ComplexMatrix {
    &mat_exp_2x2_pauli(c[0], c[1], c[2]).kron(&mat_exp_2x2_pauli(c[3], c[4], c[5])) * &hinv::gates::xx(c[6])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn channels_preserve_trace_and_hermiticity(
        re in prop::collection::vec(-1.0f64..1.0, 8),
        im in prop::collection::vec(-1.0f64..1.0, 8),
        w in prop::collection::vec(0.0f64..1.0, 1),
        c in prop::collection::vec(-3.0f64..3.0, 7),
        p in 0.0f64..1.0,
    ) {
        let dm = random_state(&re, &im, &w);
        let u = random_unitary(&c);
        let ch = MixedUnitaryChannel::new(vec![(0.4, u.clone()), (0.6, ComplexMatrix::identity(4))], p).unwrap();
        for out in [dm.apply_unitary(&u, &[0, 1]).unwrap(), dm.apply_depolarizing(p, &[1]).unwrap(), ch.apply(&dm, &[0, 1]).unwrap()] {
            prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-9);
            prop_assert!(out.matrix().hermiticity_error() < 1e-9);
            for pauli in PauliString::all(2) {
                prop_assert!(out.expectation(&pauli).unwrap().abs() <= 1.0 + 1e-9);
            }
        }
        let back = dm.apply_unitary(&u, &[0, 1]).unwrap().apply_unitary(&u.adjoint(), &[0, 1]).unwrap();
        prop_assert!(back.matrix().max_abs_diff(dm.matrix()) < 1e-9);
    }

    #[test]
    fn eigenvectors_are_orthonormal(entries in prop::collection::vec(-1.0f64..1.0, 16)) {
        let mut m = ComplexMatrix::zeros(4, 4);
        for i in 0..4 {
            for j in i..4 {
                let z = if i == j { C64::new(entries[4 * i + j], 0.0) } else { C64::new(entries[4 * i + j], entries[4 * j + i]) };
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        let (vals, vecs) = eig_herm(&m).unwrap();
        prop_assert!((&vecs.adjoint() * &vecs).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-9);
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn hidden_inverse_cancels_without_detuning(eps in -0.3f64..0.3, phi in -0.5f64..0.5) {
        let p = SqNoiseParams::new(eps, phi, 0.0).unwrap();
        let u = &h_inverse().compose(1, &p).unwrap() * &h_native().compose(1, &p).unwrap();
        prop_assert!(u.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-10);
    }

    #[test]
    fn detuning_breaks_cancellation(eps in -0.05f64..0.05, d in 0.01f64..0.2) {
        let dev = |d: f64| {
            let p = SqNoiseParams::new(eps, 0.0, d).unwrap();
            (&h_inverse().compose(1, &p).unwrap() * &h_native().compose(1, &p).unwrap()).phase_insensitive_diff(&ComplexMatrix::identity(2))
        };
        prop_assert!(dev(d) > 1e-6);
        prop_assert!(dev(2.0 * d) > dev(d));
    }

    #[test]
    fn purification_is_a_projector_and_idempotent(v in prop::collection::vec(-1.0f64..1.0, 5)) {
        let e = ExpectationSet::new(v[0], v[1], v[2], v[3], v[4]);
        let p = purify(&e).expectations;
        let rho = ComplexMatrix::from_real(2, 2, &[(1.0 - p.iz) / 2.0, (p.xx + p.yy) / 4.0, (p.xx + p.yy) / 4.0, (1.0 - p.zi) / 2.0]).unwrap();
        prop_assert!((&rho * &rho).max_abs_diff(&rho) < 1e-10);
        let pp = purify(&p).expectations;
        for (a, b) in p.as_array().iter().zip(pp.as_array()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        let floor = one_particle_ground_energy(&h2_hamiltonian()).unwrap();
        prop_assert!(energy(&p, &h2_hamiltonian()).unwrap() >= floor - 1e-9);
    }

    #[test]
    fn raw_energies_are_variational(
        alpha in -PI / 2.0..PI / 2.0,
        nbar in 0.0f64..1.0,
        over in -0.6f64..0.3,
        dp in 0.0f64..0.2,
        hi in any::<bool>(),
    ) {
        let mode = if hi { CompileMode::HiddenInverse } else { CompileMode::Default };
        let ms = MsNoiseParams::new(nbar, over, dp, 0.3, MsMode::Analytic).unwrap();
        let dm = simulate(&ansatz(alpha, mode).unwrap(), &SqNoiseParams::zero(), &ms, &DensityMatrix::new(2, 0).unwrap()).unwrap();
        let h = h2_hamiltonian();
        let e = energy(&ExpectationSet::from_density(&dm).unwrap(), &h).unwrap();
        prop_assert!(e >= exact_ground_energy(&h).unwrap() - 1e-9);
    }
}

#[test]
fn noisy_rx_is_continuous_at_zero_noise() {
    let p = SqNoiseParams::new(1e-8, 1e-8, 1e-8).unwrap();
    for &t in &[0.1, PI / 2.0, PI, -2.5] {
        assert!(noisy_rx(t, &p).max_abs_diff(&rx(t)) < 1e-6);
    }
}

#[test]
fn fit_is_initialization_robust() {
    let spec = SweepSpec::default();
    let truth = SqNoiseParams::new(0.01, 0.005, 0.002).unwrap();
    let map = run_grid(&spec, &truth, GridMode::Analytic, 0).unwrap();
    let fit = |init: SqNoiseParams| {
        lm_fit_joint(&[(&map, &spec)], &init, &Bounds::default(), &FitOptions::default()).unwrap()
    };
    let a = fit(SqNoiseParams::zero());
    let b = fit(SqNoiseParams::new(0.005, 0.005, 0.005).unwrap());
    for (x, y) in a.params.as_array().iter().zip(b.params.as_array()) {
        assert!((x - y).abs() < 1e-6, "{a:?} {b:?}");
    }
}

#[test]
fn inverse_cancels_while_native_amplifies() {
    for &eps in &[0.005, 0.01, -0.02] {
        let p = SqNoiseParams::new(eps, 0.0, 0.0).unwrap();
        let inv = predict_p0(&SweepSpec::with_variant(SweepVariant::INVERSE_XZ), 0.0, 0.0, &p);
        let native = predict_p0(&SweepSpec::with_variant(SweepVariant::NATIVE_XZ), 0.0, 0.0, &p);
        assert!((inv - 1.0).abs() < 1e-10);
        let bound = 1.0 - 100.0 * (eps * PI).powi(2) / 8.0 * 0.5;
        assert!(native < bound, "eps {eps}: native {native} bound {bound}");
    }
}
