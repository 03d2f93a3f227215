use std::f64::consts::PI;

use proptest::prelude::*;
use vqsd_core::ansatz::{brick_wall_circuit, universal_params_from_unitary};
use vqsd_core::linalg::{adjoint, eigh, kron, mul, trace, ComplexMatrix};
use vqsd_core::objective::{evaluate, local_objective};
use vqsd_core::oracle::{eigenvalues_2x2, evolved_offdiag, pi_surface, SingleQubitState};
use vqsd_core::state::{evolve, purity, random_density_matrix, sample_probabilities};
use vqsd_core::trainer::{train, StateSource, TrainConfig};
use vqsd_core::{
    AnsatzDescriptor, AnsatzKind, AnsatzParams, Complex64, DensityMatrix, GradientMethod, ObjectiveKind, PauliString,
};

fn matrix(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
        ComplexMatrix::from_vec(dim, dim, v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).unwrap()
    })
}

fn hermitian(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    matrix(dim).prop_map(|a| a.add(&adjoint(&a)).unwrap().scale(Complex64::new(0.5, 0.0)))
}

fn state(max_n: usize) -> impl Strategy<Value = DensityMatrix> {
    (1..=max_n, any::<u64>()).prop_flat_map(|(n, seed)| {
        (1..=1usize << n).prop_map(move |rank| random_density_matrix(n, rank, seed).unwrap())
    })
}

fn angles(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-PI..PI, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigh_reconstructs_and_is_orthonormal(h in (1usize..=16).prop_flat_map(hermitian)) {
        let eig = eigh(&h).unwrap();
        prop_assert!(eig.reconstruct().max_abs_diff(&h).unwrap() <= 1e-10 * (1.0 + h.max_abs()));
        prop_assert!(eig.eigenvectors.unitary_deviation().unwrap() <= 1e-10);
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn kron_is_associative_and_mixed_product(
        a in matrix(2), b in matrix(2), c in matrix(2), d in matrix(2)
    ) {
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        prop_assert!(left.max_abs_diff(&right).unwrap() <= 1e-12);
        let lhs = mul(&kron(&a, &b), &kron(&c, &d)).unwrap();
        let rhs = kron(&mul(&a, &c).unwrap(), &mul(&b, &d).unwrap());
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn trace_is_cyclic(a in matrix(4), b in matrix(4)) {
        let ab = trace(&mul(&a, &b).unwrap()).unwrap();
        let ba = trace(&mul(&b, &a).unwrap()).unwrap();
        prop_assert!((ab - ba).norm() <= 1e-12);
    }

    #[test]
    fn circuits_are_unitary(
        (n, blocks, theta) in (1usize..=4, 1usize..=3)
            .prop_flat_map(|(n, m)| (Just(n), Just(m), angles(3 * n * m))),
        (un, utheta) in (1usize..=3).prop_flat_map(|n| (Just(n), angles((1 << (2 * n)) - 1)))
    ) {
        let bw = AnsatzParams::new(AnsatzDescriptor::brick_wall(n, blocks).unwrap(), theta).unwrap();
        prop_assert!(bw.unitary().unwrap().unitary_deviation().unwrap() <= 1e-10);
        let uni = AnsatzParams::new(AnsatzDescriptor::universal(un).unwrap(), utheta).unwrap();
        prop_assert!(uni.unitary().unwrap().unitary_deviation().unwrap() <= 1e-10);
    }

    #[test]
    fn brick_wall_depth_composes(
        (n, m1, m2, theta) in (1usize..=3, 1usize..=3, 1usize..=3)
            .prop_flat_map(|(n, a, b)| (Just(n), Just(a), Just(b), angles(3 * n * (a + b))))
    ) {
        let split = 3 * n * m1;
        let first = AnsatzParams::new(AnsatzDescriptor::brick_wall(n, m1).unwrap(), theta[..split].to_vec()).unwrap();
        let second = AnsatzParams::new(AnsatzDescriptor::brick_wall(n, m2).unwrap(), theta[split..].to_vec()).unwrap();
        let whole = AnsatzParams::new(AnsatzDescriptor::brick_wall(n, m1 + m2).unwrap(), theta).unwrap();
        let composed = mul(&brick_wall_circuit(&second).unwrap(), &brick_wall_circuit(&first).unwrap()).unwrap();
        prop_assert!(composed.max_abs_diff(&brick_wall_circuit(&whole).unwrap()).unwrap() <= 1e-12);
    }

    #[test]
    fn universal_ansatz_is_continuous(
        (theta, direction) in angles(15).prop_flat_map(|t| (Just(t), angles(15)))
    ) {
        let desc = AnsatzDescriptor::universal(2).unwrap();
        let u0 = AnsatzParams::new(desc, theta.clone()).unwrap().unitary().unwrap();
        let eps = 1e-7;
        let moved: Vec<f64> = theta.iter().zip(&direction).map(|(t, d)| t + eps * d).collect();
        let u1 = AnsatzParams::new(desc, moved).unwrap().unitary().unwrap();
        let bound: f64 = direction.iter().map(|d| d.abs()).sum::<f64>() * eps;
        prop_assert!(u0.max_abs_diff(&u1).unwrap() <= bound + 1e-12);
    }

    #[test]
    fn global_objective_never_exceeds_purity(
        (rho, theta) in state(3).prop_flat_map(|r| {
            let len = (1usize << (2 * r.n_qubits())) - 1;
            (Just(r), angles(len))
        })
    ) {
        let params = AnsatzParams::new(AnsatzDescriptor::universal(rho.n_qubits()).unwrap(), theta).unwrap();
        let d = evaluate(&rho, &params, ObjectiveKind::GlobalD).unwrap();
        prop_assert!(d <= purity(&rho) + 1e-9);
        prop_assert!(d >= 1.0 / rho.dim() as f64 - 1e-12);
        let evolved = evolve(&rho, &params.unitary().unwrap()).unwrap();
        prop_assert!((purity(&evolved) - purity(&rho)).abs() <= 1e-10);
    }

    #[test]
    fn local_objective_is_monotone(
        pi in prop::collection::vec(0.0f64..0.99, 1..=5),
        q in any::<prop::sample::Index>(),
        bump in 1e-6f64..0.01
    ) {
        let i = q.index(pi.len());
        let mut raised = pi.clone();
        raised[i] += bump;
        prop_assert!(local_objective(&raised).unwrap() > local_objective(&pi).unwrap());
    }

    #[test]
    fn sampled_frequencies_are_a_distribution(rho in state(3), shots in 1u64..5000, seed in any::<u64>()) {
        let a = sample_probabilities(&rho, shots, seed).unwrap();
        let b = sample_probabilities(&rho, shots, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!((a.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        for p in a.probs() {
            let count = p * shots as f64;
            prop_assert!((count - count.round()).abs() <= 1e-6);
        }
    }

    #[test]
    fn single_qubit_surface_within_eigenvalues(
        seed in any::<u64>(), theta in -PI..PI, phi in -PI..PI, omega in -PI..PI
    ) {
        let rho = random_density_matrix(1, 2, seed).unwrap();
        let s = SingleQubitState::from_density(&rho).unwrap();
        let (lo, hi) = eigenvalues_2x2(&s);
        let pi = pi_surface(&s, theta, phi);
        prop_assert!(pi >= lo - 1e-12 && pi <= hi + 1e-12);
        // the evolved state's own spectrum pins |rho'12|
        let off = evolved_offdiag(&s, theta, phi, omega).norm_sqr();
        prop_assert!((pi * (1.0 - pi) - off - lo * hi).abs() <= 1e-12);
    }

    #[test]
    fn pauli_strings_round_trip(letters in "[IXYZ]{1,6}") {
        let p: PauliString = letters.parse().unwrap();
        prop_assert_eq!(p.to_string(), letters);
    }

    #[test]
    fn exact_diagonalizers_survive_the_pauli_round_trip(rho in state(3)) {
        let eig = eigh(rho.matrix()).unwrap();
        let params = universal_params_from_unitary(&adjoint(&eig.eigenvectors)).unwrap();
        let evolved = evolve(&rho, &params.unitary().unwrap()).unwrap();
        let d: f64 = evolved.matrix().diag().iter().map(|z| z.re * z.re).sum();
        prop_assert!((purity(&rho) - d).abs() <= 1e-9);
    }
}

/// Swapping two qubits of the input leaves the reachable minimum of the local objective unchanged.
#[test]
fn local_minimum_is_invariant_under_qubit_swap() {
    let swap = {
        let mut m = ComplexMatrix::zeros(4, 4);
        for (from, to) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            m[(to, from)] = Complex64::new(1.0, 0.0);
        }
        m
    };
    for seed in [3u64, 4, 5] {
        let rho = random_density_matrix(2, 4, seed).unwrap();
        let swapped = evolve(&rho, &swap).unwrap();
        let minimum = |state: DensityMatrix| {
            let mut config = TrainConfig::new(
                StateSource::Inline { state },
                AnsatzKind::UniversalPauli,
                0,
                ObjectiveKind::LocalL,
            );
            config.gradient = GradientMethod::Analytic;
            config.adam.lr = 0.01;
            config.lr_decay = 1e-3;
            config.epochs = 10_000;
            config.tau_conv = 1e-12;
            train(&config).unwrap().record.best_objective
        };
        let a = minimum(rho);
        let b = minimum(swapped);
        assert!((a - b).abs() <= 1e-6, "seed {seed}: {a} vs {b}");
    }
}
