use std::f64::consts::{FRAC_PI_4, PI};

use nalgebra::DMatrix;
use openqst_core::*;
use proptest::prelude::*;

const KINDS: [LindbladKind; 3] =
    [LindbladKind::CollectiveLowering, LindbladKind::CollectiveSigmaX, LindbladKind::CollectiveSigmaZ];

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn to_na(m: &CMatrix) -> DMatrix<C64> {
    DMatrix::from_fn(m.dim(), m.dim(), |i, j| m[(i, j)])
}

fn lcg(seed: &mut u64) -> f64 {
    *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (*seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
}

fn random_matrix(dim: usize, seed: &mut u64) -> CMatrix {
    CMatrix::from_fn(dim, |_, _| c(lcg(seed), lcg(seed)))
}

fn random_density(dim: usize, seed: &mut u64) -> CMatrix {
    let a = random_matrix(dim, seed);
    let mut rho = a.matmul(&a.adjoint());
    let tr = rho.trace();
    rho.scale(tr.inv());
    // exact Hermitian symmetrization
    CMatrix::from_fn(dim, |i, j| if i <= j { rho[(i, j)] } else { rho[(j, i)].conj() })
}

fn pst_setup(n: usize, kind: LindbladKind, bath: (f64, f64, f64)) -> (ChainSpec, CMatrix, BathParams) {
    (
        ChainSpec::pst(n).unwrap(),
        collective_lindblad(kind, n).unwrap(),
        BathParams::new(bath.0, bath.1, bath.2).unwrap(),
    )
}

/// Straight five-commutator evaluation of the hierarchy.
fn five_commutators(s: &DynamicState, h: &CMatrix, l: &CMatrix, bath: &BathParams) -> Derivative {
    let ld = l.adjoint();
    let (g, w, t) = (bath.gamma_coupling, bath.gamma_memory, bath.temperature);
    let rho = &s.rho;
    let drho = &(&(&(&(&h.commutator(rho) * c(0.0, -1.0)) + &l.commutator(&rho.matmul(&s.o_z.adjoint())))
        - &ld.commutator(&s.o_z.matmul(rho)))
        + &ld.commutator(&rho.matmul(&s.o_w.adjoint())))
        - &l.commutator(&s.o_w.matmul(rho));
    let m = &(h * c(0.0, -1.0)) - &(&ld.matmul(&s.o_z) + &l.matmul(&s.o_w));
    let o_z = &(&(l * c(g * t * w / 2.0, -g * w * w / 2.0)) - &(&s.o_z * c(w, 0.0))) + &m.commutator(&s.o_z);
    let o_w = &(&(&ld * c(g * t * w / 2.0, 0.0)) - &(&s.o_w * c(w, 0.0))) + &m.commutator(&s.o_w);
    Derivative { rho: drho, o_z, o_w }
}

#[test]
fn rhs_matches_five_commutator_form() {
    let mut seed = 7;
    for n in [2, 3] {
        let dim = 1 << n;
        for kind in KINDS {
            let l = collective_lindblad(kind, n).unwrap();
            let h = random_matrix(dim, &mut seed);
            let h = &h + &h.adjoint();
            let state = DynamicState {
                rho: random_density(dim, &mut seed),
                o_z: random_matrix(dim, &mut seed),
                o_w: random_matrix(dim, &mut seed),
                time: 0.0,
            };
            let bath = BathParams::new(0.3, 2.5, 7.0).unwrap();
            let d = qsd_rhs(&state, &h, &l, &bath).unwrap();
            let oracle = five_commutators(&state, &h, &l, &bath);
            assert!((&d.rho - &oracle.rho).max_abs() < 1e-12);
            assert!((&d.o_z - &oracle.o_z).max_abs() < 1e-12);
            assert!((&d.o_w - &oracle.o_w).max_abs() < 1e-12);
            assert!(d.rho.trace().norm() <= 1e-13);
            assert!(d.rho.hermitian_defect() <= 1e-13);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rhs_is_traceless_and_hermitian(seed in any::<u64>(), kind in 0usize..3, g in 0.0..1.0f64, w in 0.1..20.0f64, t in 0.0..20.0f64) {
        let mut seed = seed;
        let n = 3;
        let l = collective_lindblad(KINDS[kind], n).unwrap();
        let h = random_matrix(8, &mut seed);
        let h = &h + &h.adjoint();
        let state = DynamicState {
            rho: random_density(8, &mut seed),
            o_z: random_matrix(8, &mut seed),
            o_w: random_matrix(8, &mut seed),
            time: 0.0,
        };
        let d = qsd_rhs(&state, &h, &l, &BathParams::new(g, w, t).unwrap()).unwrap();
        prop_assert!(d.rho.trace().norm() <= 1e-13 * (1.0 + g * (1.0 + t) * w));
        prop_assert_eq!(d.rho.hermitian_defect(), 0.0);
    }
}

/// Plain RK4 over the public dense right-hand side, with `H(t)` rebuilt at
/// every substage.
fn reference_qsd(
    chain: &ChainSpec,
    l: &CMatrix,
    bath: &BathParams,
    control: Option<&LeoControl>,
    opts: &PropagateOptions,
) -> DynamicState {
    let h0 = build_xy_hamiltonian(chain);
    let h_at = |t: f64| match control {
        Some(ctl) => {
            let value = pulse_value(&ctl.shape, t, opts.t_total).unwrap();
            &h0 + &leo_hamiltonian(value, &ctl.passage.state_at(t))
        }
        None => h0.clone(),
    };
    let n = opts.n_steps;
    let dt = opts.t_total / n as f64;
    let time = |g: usize| opts.t_total * (g as f64 / (2 * n) as f64);
    let add = |s: &DynamicState, d: &Derivative, f: f64| DynamicState {
        rho: &s.rho + &(&d.rho * c(f, 0.0)),
        o_z: &s.o_z + &(&d.o_z * c(f, 0.0)),
        o_w: &s.o_w + &(&d.o_w * c(f, 0.0)),
        time: 0.0,
    };
    let mut s = DynamicState::initial(chain.n_sites()).unwrap();
    for k in 0..n {
        let k1 = qsd_rhs(&s, &h_at(time(2 * k)), l, bath).unwrap();
        let k2 = qsd_rhs(&add(&s, &k1, dt / 2.0), &h_at(time(2 * k + 1)), l, bath).unwrap();
        let k3 = qsd_rhs(&add(&s, &k2, dt / 2.0), &h_at(time(2 * k + 1)), l, bath).unwrap();
        let k4 = qsd_rhs(&add(&s, &k3, dt), &h_at(time(2 * k + 2)), l, bath).unwrap();
        for (d, w) in [(&k1, 1.0), (&k2, 2.0), (&k3, 2.0), (&k4, 1.0)] {
            s = add(&s, d, w * dt / 6.0);
        }
    }
    s
}

#[test]
fn propagator_matches_dense_reference() {
    let tau = PI / 40.0;
    let ideal = PulseShape::IdealSine { intensity: ideal_intensity(tau).unwrap(), half_period: tau };
    let opts = PropagateOptions::new(FRAC_PI_4, 100);
    for kind in KINDS {
        let (chain, l, bath) = pst_setup(3, kind, (0.1, 5.0, 10.0));
        for control in [None, Some(LeoControl::along_pst(ideal.clone(), 3).unwrap())] {
            let fast = propagate_qsd(&chain, &l, &bath, control.as_ref(), &opts).unwrap().final_state;
            let slow = reference_qsd(&chain, &l, &bath, control.as_ref(), &opts);
            assert!((&fast.rho - &slow.rho).max_abs() < 1e-12, "{kind:?}");
            assert!((&fast.o_z - &slow.o_z).max_abs() < 1e-10, "{kind:?}");
            assert!((&fast.o_w - &slow.o_w).max_abs() < 1e-10, "{kind:?}");
        }
    }
}

#[test]
fn lindblad_matches_dense_formula() {
    let mut seed = 3;
    for kind in KINDS {
        let (chain, l, bath) = pst_setup(3, kind, (0.2, 1.0, 4.0));
        let h = build_xy_hamiltonian(&chain);
        let rho = random_density(8, &mut seed);
        let ld = l.adjoint();
        let k = c(bath.gamma_coupling * bath.temperature / 2.0, 0.0);
        let ltl = ld.matmul(&l);
        let llt = l.matmul(&ld);
        let first = &(&(&l.matmul(&rho).matmul(&ld) * c(2.0, 0.0)) - &ltl.matmul(&rho)) - &rho.matmul(&ltl);
        let second = &(&(&ld.matmul(&rho).matmul(&l) * c(2.0, 0.0)) - &llt.matmul(&rho)) - &rho.matmul(&llt);
        let expected = &(&h.commutator(&rho) * c(0.0, -1.0)) + &(&(&first + &second) * k);
        let got = lindblad_rhs(&rho, &h, &l, &bath).unwrap();
        assert!((&got - &expected).max_abs() < 1e-13);
        assert_eq!(got.hermitian_defect(), 0.0);
    }
}

#[test]
fn closed_chain_matches_matrix_exponential() {
    let (chain, l, bath) = pst_setup(6, LindbladKind::CollectiveLowering, (0.0, 2.0, 10.0));
    let opts = PropagateOptions::default();
    let traj = propagate_qsd(&chain, &l, &bath, None, &opts).unwrap();
    let h = to_na(&build_xy_hamiltonian(&chain));
    let psi0 = nalgebra::DVector::from_vec(basis_state(1, 6).unwrap());
    let target = basis_state(6, 6).unwrap();
    let mut worst = 0.0f64;
    for (k, (&t, &f)) in traj.times.iter().zip(&traj.fidelities).enumerate() {
        if k % 50 != 0 {
            continue;
        }
        let psi = (&h * c(0.0, -t)).exp() * &psi0;
        let exact = psi.iter().zip(&target).map(|(a, b)| a * b.conj()).sum::<C64>().norm();
        worst = worst.max((f - exact).abs());
    }
    assert!(worst <= 1e-6, "max deviation {worst:e}");
    let (f_max, t_a) = max_fidelity_and_arrival(&traj);
    assert!(f_max >= 0.9999);
    assert!((t_a - FRAC_PI_4).abs() <= FRAC_PI_4 / opts.n_steps as f64 + 1e-15);
}

#[test]
fn vanishing_dissipator_reduces_to_closed_evolution() {
    let opts = PropagateOptions::new(FRAC_PI_4, 400);
    let chain = ChainSpec::pst(4).unwrap();
    let closed = propagate_closed(&chain, None, &opts).unwrap();
    for (g, t) in [(0.0, 10.0), (0.1, 0.0)] {
        let (chain, l, bath) = pst_setup(4, LindbladKind::CollectiveLowering, (g, 10.0, t));
        let lind = propagate_lindblad(&chain, &l, &bath, None, &opts).unwrap();
        let gap = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if g == 0.0 {
            // Same density-matrix equation on both sides.
            let qsd = propagate_qsd(&chain, &l, &bath, None, &opts).unwrap();
            assert!(gap(&lind.fidelities, &qsd.fidelities) < 1e-12);
        }
        // RK4 on ρ against RK4 on ψ: only truncation error separates them.
        let worst = gap(&lind.fidelities, &closed.fidelities);
        assert!(worst <= 1e-6, "{worst:e}");
    }
}

#[test]
fn leo_pulse_is_inert_on_the_ideal_passage() {
    // In the closed PST chain the state is the passage itself, so c(t)|Ψ⟩⟨Ψ|
    // contributes only a global phase.
    let tau = PI / 40.0;
    let shape = PulseShape::IdealSine { intensity: ideal_intensity(tau).unwrap(), half_period: tau };
    let ctl = LeoControl::along_pst(shape, 4).unwrap();
    let (chain, l, bath) = pst_setup(4, LindbladKind::CollectiveLowering, (0.0, 10.0, 10.0));
    let opts = PropagateOptions::default();
    let free = propagate_qsd(&chain, &l, &bath, None, &opts).unwrap();
    let driven = propagate_qsd(&chain, &l, &bath, Some(&ctl), &opts).unwrap();
    for (a, b) in free.fidelities.iter().zip(&driven.fidelities) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn fourth_order_step_halving() {
    let (chain, l, bath) = pst_setup(4, LindbladKind::CollectiveLowering, (0.1, 10.0, 10.0));
    let coarse = propagate_qsd(&chain, &l, &bath, None, &PropagateOptions::default()).unwrap();
    let fine = propagate_qsd(&chain, &l, &bath, None, &PropagateOptions::new(FRAC_PI_4, 4000)).unwrap();
    let diff = (coarse.fidelities.last().unwrap() - fine.fidelities.last().unwrap()).abs();
    assert!(diff <= 1e-7, "{diff:e}");
}

#[test]
fn trajectory_preserves_trace_and_hermiticity() {
    let opts = PropagateOptions::new(FRAC_PI_4, 200).recording();
    for kind in KINDS {
        let (chain, l, bath) = pst_setup(3, kind, (0.1, 2.0, 10.0));
        for traj in [
            propagate_qsd(&chain, &l, &bath, None, &opts).unwrap(),
            propagate_lindblad(&chain, &l, &bath, None, &opts).unwrap(),
        ] {
            let snaps = traj.rho_snapshots.as_ref().unwrap();
            assert_eq!(snaps.len(), 201);
            for rho in snaps {
                assert!((rho.trace() - 1.0).norm() <= 1e-8);
                assert!(rho.hermitian_defect() <= 1e-8);
            }
        }
    }
}

#[test]
fn snapshots_are_in_the_natural_basis() {
    let (chain, l, bath) = pst_setup(3, LindbladKind::CollectiveLowering, (0.1, 2.0, 10.0));
    let traj = propagate_qsd(&chain, &l, &bath, None, &PropagateOptions::new(1.0, 100).recording()).unwrap();
    let snaps = traj.rho_snapshots.unwrap();
    assert_eq!(snaps[0][(4, 4)], c(1.0, 0.0));
    for (rho, f) in snaps.iter().zip(&traj.fidelities) {
        assert_eq!(fidelity(rho, 3).unwrap(), *f);
    }
    assert_eq!(snaps.last().unwrap(), &traj.final_state.rho);
}

#[test]
fn dephasing_keeps_populations_in_the_single_excitation_sector() {
    let (chain, l, bath) = pst_setup(4, LindbladKind::CollectiveSigmaZ, (0.1, 10.0, 10.0));
    let traj = propagate_qsd(&chain, &l, &bath, None, &PropagateOptions::default()).unwrap();
    let rho = &traj.final_state.rho;
    let single: f64 = (1..=4).map(|s| rho[(1 << (4 - s), 1 << (4 - s))].re).sum();
    assert!((single - 1.0).abs() < 1e-12);
    let (f_max, _) = max_fidelity_and_arrival(&traj);
    assert!(f_max > 0.0 && f_max < 1.0);
}

#[test]
fn coupling_degrades_monotonically() {
    let opts = PropagateOptions::new(FRAC_PI_4, 400);
    let f = |g: f64, w: f64, t: f64| {
        let (chain, l, bath) = pst_setup(6, LindbladKind::CollectiveLowering, (g, w, t));
        max_fidelity_and_arrival(&propagate_qsd(&chain, &l, &bath, None, &opts).unwrap()).0
    };
    assert!(f(0.05, 2.0, 10.0) > f(0.1, 2.0, 10.0));
    assert!(f(0.1, 2.0, 10.0) > f(0.1, 5.0, 10.0));
}

#[test]
fn propagation_is_deterministic() {
    let (chain, l, bath) = pst_setup(4, LindbladKind::CollectiveSigmaX, (0.1, 2.0, 10.0));
    let opts = PropagateOptions::new(FRAC_PI_4, 300);
    let a = propagate_qsd(&chain, &l, &bath, None, &opts).unwrap();
    let b = propagate_qsd(&chain, &l, &bath, None, &opts).unwrap();
    assert_eq!(a.fidelities, b.fidelities);
    assert_eq!(a.final_state, b.final_state);
}
