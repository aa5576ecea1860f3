use std::cell::RefCell;

use openqst_core::optimizer::optimize_observed;
use openqst_core::*;
use proptest::prelude::*;

fn scalar(f: impl Fn(&[f64]) -> f64) -> impl Fn(&[f64]) -> Result<Evaluation> {
    move |x| Ok(Evaluation::scalar(f(x)))
}

/// Textbook Adam, written out independently of the crate.
fn reference_adam(x0: &[f64], grads: &[Vec<f64>], c: &AdamConfig) -> Vec<Vec<f64>> {
    let n = x0.len();
    let (mut x, mut m, mut v) = (x0.to_vec(), vec![0.0; n], vec![0.0; n]);
    let mut out = Vec::new();
    for (k, g) in grads.iter().enumerate() {
        let t = (k + 1) as i32;
        for i in 0..n {
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
            let mh = m[i] / (1.0 - c.beta1.powi(t));
            let vh = v[i] / (1.0 - c.beta2.powi(t));
            x[i] -= c.alpha * mh / (vh.sqrt() + c.epsilon);
        }
        out.push(x.clone());
    }
    out
}

struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }
}

#[test]
fn adam_recurrence_matches_reference() {
    let mut rng = Lcg(7);
    for seq in 0..10 {
        let n = 1 + seq % 5;
        let config = AdamConfig { alpha: 0.01 * (1 + seq) as f64, ..AdamConfig::for_couplings() };
        let x0: Vec<f64> = (0..n).map(|_| 3.0 * rng.next()).collect();
        let grads: Vec<Vec<f64>> = (0..50).map(|_| (0..n).map(|_| 10.0 * rng.next()).collect()).collect();
        let expected = reference_adam(&x0, &grads, &config);
        let mut state = AdamState::new(x0);
        for (g, want) in grads.iter().zip(&expected) {
            state.step(g, &config, None).unwrap();
            for (a, b) in state.params.iter().zip(want) {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "sequence {seq}: {a} vs {b}");
            }
        }
        assert_eq!(state.iteration, 50);
    }
}

proptest! {
    #[test]
    fn central_differences_are_exact_on_quadratics(
        a in prop::collection::vec(-5.0..5.0f64, 1..6),
        b in prop::collection::vec(-5.0..5.0f64, 6),
        x in prop::collection::vec(-4.0..4.0f64, 6),
    ) {
        let n = a.len();
        let x = &x[..n];
        let f = scalar(|p: &[f64]| (0..n).map(|i| a[i] * p[i] * p[i] + b[i] * p[i]).sum());
        let g = finite_diff_gradient(&f, x, 1e-3, None).unwrap();
        for i in 0..n {
            prop_assert!((g[i] - (2.0 * a[i] * x[i] + b[i])).abs() <= 1e-6);
        }
        let affine = scalar(|p: &[f64]| 2.5 + (0..n).map(|i| b[i] * p[i]).sum::<f64>());
        let g = finite_diff_gradient(&affine, x, 1e-3, None).unwrap();
        for i in 0..n {
            prop_assert!((g[i] - b[i]).abs() <= 1e-6);
        }
    }

    #[test]
    fn iterates_stay_in_the_box(start in prop::collection::vec(-5.0..5.0f64, 3), alpha in 0.01..2.0f64) {
        let bounds = ParamBounds::new(vec![-3.0, -1.0, 0.0], vec![-2.0, 1.0, 0.5]).unwrap();
        let config = AdamConfig { alpha, max_iterations: 40, ..AdamConfig::for_couplings() };
        let f = scalar(|p: &[f64]| 1.0 + p.iter().map(|v| (v - 10.0).powi(2)).sum::<f64>());
        let seen = RefCell::new(Vec::new());
        let report = optimize_observed(&start, &f, &config, Some(&bounds), |p| seen.borrow_mut().push(p.params.to_vec())).unwrap();
        prop_assert_eq!(seen.borrow().len(), 41);
        for p in seen.borrow().iter() {
            prop_assert!(bounds.contains(p), "{:?}", p);
        }
        prop_assert!(bounds.contains(&report.best_params));
    }
}

#[test]
fn best_is_the_history_minimum() {
    // oversized steps make the loss oscillate
    let config = AdamConfig { alpha: 0.9, max_iterations: 60, ..AdamConfig::for_couplings() };
    let f = scalar(|p: &[f64]| 0.5 + (p[0] - 1.0).powi(2) + (3.0 * p[1]).sin().powi(2));
    let report = optimize(&[4.0, 0.7], &f, &config, None).unwrap();
    let min = report.loss_history.iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(report.best_loss, min);
    assert_eq!(report.loss_history[report.best_iteration], min);
    assert_eq!(report.loss_history.len(), 61);
    assert_eq!(report.termination, Termination::MaxIterations);
}

#[test]
fn runs_are_reproducible() {
    let config = AdamConfig { alpha: 0.05, max_iterations: 100, ..AdamConfig::for_couplings() };
    let f = |p: &[f64]| {
        let loss = 0.01 + (p[0] * p[1] - 1.0).powi(2) + 0.1 * p[0].cos();
        Ok(Evaluation::new(loss, 1.0 - loss))
    };
    let a = optimize(&[0.3, -0.2], &f, &config, None).unwrap();
    let b = optimize(&[0.3, -0.2], &f, &config, None).unwrap();
    assert_eq!(a, b);
}

#[test]
fn coupling_loss_adds_the_magnitude_penalty() {
    let bath = BathParams::new(0.1, 2.0, 10.0).unwrap();
    let setup = SimulationSetup::new(
        3,
        LindbladKind::CollectiveLowering,
        bath,
        Propagator::Qsd,
        PropagateOptions::new(std::f64::consts::FRAC_PI_4, 200),
    )
    .unwrap();
    let j = [-1.5, -2.5];
    let free = coupling_loss(&j, &setup, 0.0).unwrap();
    let penalized = coupling_loss(&j, &setup, 0.01).unwrap();
    assert_eq!(free.fidelity, penalized.fidelity);
    assert!((penalized.loss - free.loss - 0.025).abs() < 1e-15);
    assert!((free.loss - (1.0 - free.fidelity)).abs() < 1e-15);
}
