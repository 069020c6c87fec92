use std::f64::consts::{PI, TAU};

use mbqc_core::analysis::{
    analytic_branch_stats, entanglement_s, experiment_report, fidelity_upper_bound, mean_fidelity_analytic,
    process_g_branches, verify_proof_relation, AnalyticInputs,
};
use mbqc_core::basis::{deviated_basis, ideal_basis, DeviationParams, MeasurementAngle, Outcome};
use mbqc_core::experiment::sample_random_state;
use mbqc_core::pattern::{
    cnot_pattern, decompose_to_elementary, execute_exhaustive, replay_exhaustive, x_rotation_pattern,
    z_rotation_pattern, CommutationOrder,
};
use mbqc_core::state::{fidelity, Gate2x2, StateVector};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn angle(u: f64) -> MeasurementAngle {
    MeasurementAngle::new(u).unwrap()
}

/// Qubit 0 Z-diagonal: cos t |0⟩|a⟩ + sin t |1⟩|b⟩ with ⟨a|b⟩ = 0.
fn z_aligned_state(n: usize, t: f64, seed: u64) -> StateVector {
    let rest = sample_random_state(n - 1, seed).unwrap();
    let mut a = rest.amplitudes().to_vec();
    // Gram-Schmidt a second random vector against a
    let other = sample_random_state(n - 1, seed ^ 0xABCD).unwrap();
    let overlap: C64 = a.iter().zip(other.amplitudes()).map(|(x, y)| x.conj() * y).sum();
    let mut b: Vec<C64> = other
        .amplitudes()
        .iter()
        .zip(&a)
        .map(|(y, x)| y - overlap * x)
        .collect();
    let nb = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    b.iter_mut().for_each(|x| *x /= nb);
    a.iter_mut().for_each(|x| *x *= t.cos());
    b.iter_mut().for_each(|x| *x *= t.sin());
    let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
    for (j, (x, y)) in a.iter().zip(&b).enumerate() {
        amps[j << 1] = *x;
        amps[(j << 1) | 1] = *y;
    }
    StateVector::from_amplitudes(amps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unitary_ops_preserve_norm(n in 1usize..6, seed in any::<u64>(), u in 0.0f64..TAU, q in 0usize..6) {
        let s = sample_random_state(n, seed).unwrap();
        let q = q % n;
        for g in [Gate2x2::rx(u), Gate2x2::rz(u), Gate2x2::hadamard(), Gate2x2::pauli_y()] {
            prop_assert!((s.apply_single_qubit(q, &g).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
        }
        let e = s.extend_with_plus(2).unwrap();
        prop_assert!((e.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!((e.apply_cz(q, n + 1).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cz_symmetric_and_involutive(n in 2usize..6, seed in any::<u64>(), a in 0usize..6, b in 0usize..6) {
        let (a, b) = (a % n, b % n);
        prop_assume!(a != b);
        let s = sample_random_state(n, seed).unwrap();
        let ab = s.apply_cz(a, b).unwrap();
        prop_assert_eq!(&ab, &s.apply_cz(b, a).unwrap());
        prop_assert_eq!(ab.apply_cz(a, b).unwrap(), s);
    }

    #[test]
    fn branch_probabilities_sum_to_one(n in 1usize..6, seed in any::<u64>(), q in 0usize..6,
                                       u in 0.0f64..TAU, eps in 0.0f64..=PI, delta in 0.0f64..TAU) {
        let s = sample_random_state(n, seed).unwrap();
        let basis = deviated_basis(angle(u), DeviationParams::new(eps, delta).unwrap());
        let total: f64 = Outcome::BOTH
            .iter()
            .map(|&o| s.project_measure(q % n, &basis, o).map(|(p, _)| p).unwrap_or(0.0))
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduced_density_is_a_state(n in 1usize..7, seed in any::<u64>(), q in 0usize..7) {
        let rho = sample_random_state(n, seed).unwrap().reduced_density_single(q % n).unwrap();
        let e = rho.eigen();
        prop_assert!(rho.hermiticity_defect() < 1e-12);
        prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
        prop_assert!((-1e-10..=1.0 + 1e-10).contains(&e.lambda0));
        prop_assert!((-1e-10..=1.0 + 1e-10).contains(&e.lambda1));
        prop_assert!((e.lambda0 + e.lambda1 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn measurement_commutes_with_survivor_cz(seed in any::<u64>(), u in 0.0f64..TAU, eps in 0.0f64..=PI, delta in 0.0f64..TAU) {
        let s = sample_random_state(3, seed).unwrap();
        let basis = deviated_basis(angle(u), DeviationParams::new(eps, delta).unwrap());
        for o in Outcome::BOTH {
            let (p1, a) = s.project_measure(0, &basis, o).unwrap();
            let a = a.apply_cz(0, 1).unwrap();
            let (p2, b) = s.apply_cz(1, 2).unwrap().project_measure(0, &basis, o).unwrap();
            prop_assert!((p1 - p2).abs() < 1e-12);
            prop_assert!(a.max_amplitude_diff(&b).unwrap() < 1e-12);
        }
    }

    #[test]
    fn closed_forms_match_simulation(n in 2usize..7, seed in any::<u64>(), u in 0.0f64..TAU,
                                     eps in 0.0f64..=PI, delta in 0.0f64..TAU) {
        let s = sample_random_state(n, seed).unwrap();
        let dev = DeviationParams::new(eps, delta).unwrap();
        let stats = analytic_branch_stats(&AnalyticInputs::from_state(&s, dev).unwrap()).unwrap();
        let (ip, im) = process_g_branches(&s, angle(u), DeviationParams::none()).unwrap();
        let (dp, dm) = process_g_branches(&s, angle(u), dev).unwrap();
        for (ideal, noisy) in [(ip, dp), (im, dm)] {
            prop_assert!((noisy.probability - stats.probability(noisy.label)).abs() < 1e-10);
            if let (Some(a), Some(b), Some(f)) = (&ideal.post_state, &noisy.post_state, stats.fidelity(noisy.label)) {
                prop_assert!((fidelity(a, b).unwrap() - f).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn mean_fidelity_obeys_bound(n in 2usize..7, seed in any::<u64>(), eps in 0.0f64..=PI) {
        let s = sample_random_state(n, seed).unwrap();
        let inputs = AnalyticInputs::from_state(&s, DeviationParams::new(eps, 0.0).unwrap()).unwrap();
        let bound = fidelity_upper_bound(entanglement_s(&s, 0).unwrap(), eps).unwrap();
        prop_assert!(mean_fidelity_analytic(&inputs) <= bound + 1e-10);
    }

    #[test]
    fn bound_is_tight_for_z_aligned_states(n in 2usize..6, seed in any::<u64>(), t in 0.0f64..PI, eps in 0.0f64..=PI) {
        let s = z_aligned_state(n, t, seed);
        let rel = verify_proof_relation(&s, 0).unwrap();
        prop_assert!((rel.lhs - rel.rhs).abs() < 1e-10);
        let inputs = AnalyticInputs::from_state(&s, DeviationParams::new(eps, 0.0).unwrap()).unwrap();
        let bound = fidelity_upper_bound(inputs.s, eps).unwrap();
        prop_assert!((mean_fidelity_analytic(&inputs) - bound).abs() < 1e-10);
    }

    #[test]
    fn proof_relation_holds(n in 2usize..7, seed in any::<u64>()) {
        let s = sample_random_state(n, seed).unwrap();
        let rel = verify_proof_relation(&s, 0).unwrap();
        prop_assert!(rel.lhs >= rel.rhs - 1e-10);
        // equality exactly when the eigenbasis is Z-aligned (or ρ is maximally mixed)
        let gap = rel.lhs - rel.rhs;
        let spread = (rel.eigen.lambda0 - rel.eigen.lambda1).powi(2);
        prop_assert!((gap - spread * rel.mu.sin().powi(2)).abs() < 1e-10);
    }

    #[test]
    fn simulated_mean_is_delta_independent(n in 2usize..5, seed in any::<u64>(), u in 0.0f64..TAU, eps in 0.0f64..=PI) {
        let s = sample_random_state(n, seed).unwrap();
        let reference = experiment_report(&s, angle(u), DeviationParams::new(eps, 0.0).unwrap()).unwrap();
        for delta in [0.5, 1.7, PI, 4.4] {
            let r = experiment_report(&s, angle(u), DeviationParams::new(eps, delta).unwrap()).unwrap();
            prop_assert!((r.f_mean_simulated - reference.f_mean_simulated).abs() < 1e-10);
        }
    }

    #[test]
    fn mean_fidelity_decreases_in_epsilon(n in 2usize..6, seed in any::<u64>()) {
        let s = sample_random_state(n, seed).unwrap();
        let mut last = f64::INFINITY;
        for k in 0..=64 {
            let eps = PI * k as f64 / 64.0;
            let m = mean_fidelity_analytic(&AnalyticInputs::from_state(&s, DeviationParams::new(eps, 0.0).unwrap()).unwrap());
            prop_assert!(m <= last + 1e-15);
            last = m;
        }
    }

    #[test]
    fn noiseless_patterns_are_outcome_independent(seed in any::<u64>(), u in 0.0f64..TAU) {
        let input = sample_random_state(2, seed).unwrap();
        for p in [x_rotation_pattern(angle(u), 1), z_rotation_pattern(angle(u), 0), cnot_pattern(1, 0).unwrap()] {
            let exec = execute_exhaustive(&input, &p).unwrap();
            prop_assert!((exec.total_probability() - 1.0).abs() < 1e-10);
            for b in &exec.branches {
                prop_assert!(fidelity(&b.state, &exec.branches[0].state).unwrap() > 1.0 - 1e-10);
            }
        }
    }

    #[test]
    fn replay_matches_direct_execution(seed in any::<u64>(), u in 0.0f64..TAU, eps in 0.0f64..1.0, delta in 0.0f64..TAU) {
        let input = sample_random_state(3, seed).unwrap();
        let dev = DeviationParams::new(eps, delta).unwrap();
        for p in [
            x_rotation_pattern(angle(u), 0).with_uniform_deviation(dev),
            z_rotation_pattern(angle(u), 2).with_uniform_deviation(dev),
            cnot_pattern(0, 2).unwrap().with_uniform_deviation(dev),
        ] {
            let direct = execute_exhaustive(&input, &p).unwrap();
            let steps = decompose_to_elementary(&p).unwrap();
            let replay = replay_exhaustive(&input, &p, &steps, CommutationOrder::MeasureFirst).unwrap();
            prop_assert_eq!(replay.branches.len(), direct.branches.len());
            for (r, d) in replay.branches.iter().zip(&direct.branches) {
                prop_assert!((r.probability - d.probability).abs() < 1e-10);
                prop_assert!(r.state.max_amplitude_diff(&d.state).unwrap() < 1e-10);
            }
        }
    }
}

#[test]
fn zero_deviation_projectors_match_ideal_on_delta_grid() {
    for u in [0.0, 1.0, 3.0] {
        let ideal = ideal_basis(angle(u));
        for delta in [0.0, PI / 3.0, PI, 1.5 * PI] {
            let d = deviated_basis(angle(u), DeviationParams::new(0.0, delta).unwrap());
            for o in Outcome::BOTH {
                let (a, b) = (ideal.projector(o), d.projector(o));
                for r in 0..2 {
                    for c in 0..2 {
                        assert!((a[r][c] - b[r][c]).norm() < 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn haar_two_qubit_entanglement_is_spread() {
    // independent S from raw amplitudes: 2(1 − Tr ρ²) with ρ built by hand.
    // Haar average purity for 2 ⊗ 2 is (2 + 2)/(4 + 1), so E[S] = 0.4.
    let n = 10_000;
    let mean = (0..n)
        .map(|seed| {
            let a = sample_random_state(2, seed).unwrap().amplitudes().to_vec();
            let r00 = a[0].norm_sqr() + a[2].norm_sqr();
            let r11 = a[1].norm_sqr() + a[3].norm_sqr();
            let r01 = a[0] * a[1].conj() + a[2] * a[3].conj();
            2.0 * (1.0 - (r00 * r00 + r11 * r11 + 2.0 * r01.norm_sqr()))
        })
        .sum::<f64>()
        / n as f64;
    assert!(mean > 0.0 && mean < 1.0);
    assert!((mean - 0.4).abs() < 0.01, "mean S = {mean}");
}
