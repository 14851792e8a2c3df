use hnlsqec::code::{build_example_code, CodeKind, CodeSpace};
use hnlsqec::lindblad::{
    apply_product_channel, builtin, liouvillian, propagator, DensityState, LindbladModel,
};
use hnlsqec::operators::{DimCap, StateVector, C64};
use hnlsqec::protocol::{ghz_input, precision_report, run_protocol, ProtocolConfig};

fn cap() -> DimCap {
    DimCap::default()
}

fn three_level_config(slices: usize) -> ProtocolConfig {
    let mut cfg = ProtocolConfig::corrected(
        builtin::three_level(),
        build_example_code(3, cap()).unwrap(),
    );
    cfg.slices = slices;
    cfg
}

/// The whole register as one model: `sum_n H^(n)` with every lifted jump.
fn register_model(model: &LindbladModel, n: usize) -> LindbladModel {
    let ls = model
        .lifted_lindblads(n, cap())
        .unwrap()
        .into_iter()
        .map(|j| j.op)
        .collect();
    LindbladModel::new(model.total_hamiltonian(n, cap()).unwrap(), ls, "register").unwrap()
}

#[test]
fn product_channel_matches_dense_register_superoperator() {
    for model in [builtin::qubit_rank_one_pauli(), builtin::qubit_dephasing()] {
        let psi = StateVector::normalized(nalgebra::DVector::from_fn(8, |i, _| {
            C64::new(1.0 + i as f64, 0.5 * i as f64)
        }))
        .unwrap();
        let rho = DensityState::pure(&psi);
        let (omega, dt) = (0.7, 0.13);
        let fast = apply_product_channel(&propagator(&model, omega, dt), &rho, 3).unwrap();
        let dense = liouvillian(&register_model(&model, 3), omega)
            .exp(dt)
            .apply(&rho)
            .unwrap();
        assert!(fast.trace_distance(&dense).unwrap() < 1e-12);
    }
}

#[test]
fn product_channel_matches_dense_for_three_level_pair() {
    let model = builtin::three_level();
    let psi = StateVector::normalized(nalgebra::DVector::from_fn(9, |i, _| {
        C64::new((i as f64).cos(), (i as f64).sin() * 0.3)
    }))
    .unwrap();
    let rho = DensityState::pure(&psi);
    let fast = apply_product_channel(&propagator(&model, 1.0, 0.05), &rho, 2).unwrap();
    let dense = liouvillian(&register_model(&model, 2), 1.0)
        .exp(0.05)
        .apply(&rho)
        .unwrap();
    assert!(fast.trace_distance(&dense).unwrap() < 1e-12);
}

#[test]
fn code_space_leakage_falls_as_one_over_slices() {
    // only two jumps inside one slice escape recovery, so leakage ~ T dt
    let leak = |d| {
        let cfg = three_level_config(d);
        let run = run_protocol(&cfg).unwrap();
        1.0 - (cfg.code.as_ref().unwrap().projector().matrix() * run.final_state.matrix())
            .trace()
            .re
    };
    let (a, b) = (leak(100), leak(200));
    assert!(a < 0.05 && (1.7..2.3).contains(&(a / b)), "{a} {b}");
}

#[test]
fn per_step_error_constant_is_stable() {
    let constants: Vec<f64> = [50, 100, 200]
        .iter()
        .map(|&d| {
            let err = run_protocol(&three_level_config(d)).unwrap().per_step_error;
            err * (d * d) as f64
        })
        .collect();
    let (lo, hi) = constants
        .iter()
        .fold((f64::MAX, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
    assert!(hi / lo < 1.25, "{constants:?}");
}

#[test]
fn corrected_fidelity_improves_with_slices() {
    let f100 = run_protocol(&three_level_config(100))
        .unwrap()
        .fidelity_to_ideal;
    let f200 = run_protocol(&three_level_config(200))
        .unwrap()
        .fidelity_to_ideal;
    assert!(f200 > f100);
    // infidelity roughly halves
    let ratio = (1.0 - f100) / (1.0 - f200);
    assert!((1.6..2.4).contains(&ratio), "{ratio}");
}

#[test]
fn qfi_does_not_grow_with_noise() {
    let mut prev = f64::INFINITY;
    for scale in [0.5, 1.0, 2.0] {
        let mut cfg = three_level_config(100);
        cfg.model = builtin::three_level().with_noise_scale(scale);
        let q = precision_report(&cfg).unwrap().qfi;
        assert!(q <= prev * 1.01, "scale {scale}: {q} > {prev}");
        prev = q;
    }
}

#[test]
fn crb_not_below_noiseless_optimum() {
    for d in [50, 200] {
        let r = precision_report(&three_level_config(d)).unwrap();
        assert!(
            r.crb >= r.hl_reference * 0.99,
            "D={d}: {} < {}",
            r.crb,
            r.hl_reference
        );
    }
}

#[test]
fn noiseless_corrected_and_uncorrected_agree() {
    let model = LindbladModel::noiseless(builtin::three_level().hamiltonian().clone(), "clean");
    let code = build_example_code(3, cap()).unwrap();
    let corrected =
        precision_report(&ProtocolConfig::corrected(model.clone(), code.clone())).unwrap();
    let plain = precision_report(&ProtocolConfig::uncorrected(model, ghz_input(&code), 3)).unwrap();
    assert!((corrected.crb - plain.crb).abs() < 1e-3 * plain.crb);
    assert!((plain.qfi - 36.0).abs() < 1e-4);
}

#[test]
fn uncorrected_ghz_coherence_decays_exponentially() {
    // H = L = Z on each qubit: the GHZ coherence of N qubits decays as exp(-2 N t)
    let model = builtin::qubit_dephasing_parallel();
    let n = 3;
    let (up, down) = (StateVector::basis(2, 0), StateVector::basis(2, 1));
    let code = CodeSpace::tensor_power(&up, &down, n, cap()).unwrap();
    for t in [0.25, 0.5, 1.0] {
        let mut cfg = ProtocolConfig::uncorrected(model.clone(), ghz_input(&code), n);
        cfg.total_time = t;
        cfg.slices = 7;
        let rho = run_protocol(&cfg).unwrap().final_state;
        let coherence = rho.matrix()[(0, 7)].norm();
        let expected = 0.5 * (-2.0 * n as f64 * t).exp();
        assert!(
            (coherence - expected).abs() < 1e-12,
            "t={t}: {coherence} vs {expected}"
        );
    }
}

#[test]
fn correction_beats_no_correction() {
    let model = builtin::qubit_dephasing();
    let code = CodeKind::AutoQubit
        .build(&model, 3, cap())
        .unwrap()
        .unwrap();
    let mut corrected = ProtocolConfig::corrected(model.clone(), code.clone());
    corrected.slices = 100;
    let mut plain = ProtocolConfig::uncorrected(model, ghz_input(&code), 3);
    plain.slices = 100;
    let (c, p) = (
        precision_report(&corrected).unwrap(),
        precision_report(&plain).unwrap(),
    );
    assert!(p.crb > c.crb);
}
