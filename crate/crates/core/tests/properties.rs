use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ybx::entanglement::{invariants, reduced_density, schmidt_decompose, Side, TwoQuditState};
use ybx::entangling_power::{entangling_power_closed, haar_state, haar_unitary};
use ybx::generation::{
    generate, generate_with_locals, local_unitary_b, qutrit_region_contains, sample_region,
    solve_parameters, Ensemble, GenerationParams,
};
use ybx::parallel::with_workers;
use ybx::tensor::{hermitian_eigensystem, kron, DenseMatrix};
use ybx::yang_baxter::{
    circulation_int, r_matrix, r_matrix_from_weights, weight_functions, ybe_residual,
    QuditDimension,
};

fn dim(d: usize) -> QuditDimension {
    QuditDimension::new(d).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

fn random_state(d: QuditDimension, rng: &mut ChaCha8Rng) -> TwoQuditState {
    TwoQuditState::normalize(d, haar_state(d.get() * d.get(), rng)).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn matrix_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.sub(b)
        .unwrap()
        .entries()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // Integer entries keep every product exact.
    #[test]
    fn kron_is_associative(r in 1usize..4, c in 1usize..4, seed: u64) {
        let mut g = rng(seed);
        let mut int_matrix = |rows, cols| {
            DenseMatrix::from_fn(rows, cols, |_, _| {
                Complex64::new(g.random_range(-9..=9) as f64, g.random_range(-9..=9) as f64)
            })
        };
        let a = int_matrix(r, c);
        let b = int_matrix(c, r);
        let m = int_matrix(2, r);
        prop_assert_eq!(kron(&kron(&a, &b), &m), kron(&a, &kron(&b, &m)));
    }

    #[test]
    fn kron_of_unitaries_is_unitary(n in 1usize..6, m in 1usize..6, seed: u64) {
        let mut g = rng(seed);
        let u = kron(&haar_unitary(n, &mut g), &haar_unitary(m, &mut g));
        prop_assert!(u.unitarity_residual() <= 1e-12);
    }

    #[test]
    fn eigenvalues_sum_to_trace(n in 1usize..12, seed: u64) {
        let a = gaussian_matrix(n, n, &mut rng(seed));
        let h = a.add(&a.adjoint()).unwrap();
        let eig = hermitian_eigensystem(&h).unwrap();
        let sum: f64 = eig.values.iter().sum();
        prop_assert!((sum - h.trace().re).abs() <= 1e-10);
    }

    #[test]
    fn density_spectrum_in_unit_interval(d in 2usize..=8, seed: u64) {
        let state = random_state(dim(d), &mut rng(seed));
        let eig = hermitian_eigensystem(&reduced_density(&state, Side::A)).unwrap();
        prop_assert!(eig.values.iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v)));
    }

    #[test]
    fn circulation_matrices_compose(d in 2usize..=8, m in 0usize..8, n in 0usize..8) {
        let d = dim(d);
        let (m, n) = (m % d.get(), n % d.get());
        let pm = circulation_int(d, m).unwrap();
        let pn = circulation_int(d, n).unwrap();
        let sum = circulation_int(d, (m + n) % d.get()).unwrap();
        prop_assert_eq!(pm.matmul(&pn), sum.clone());
        prop_assert_eq!(pn.matmul(&pm), sum);
        if m != 0 {
            prop_assert_eq!(pm.trace(), 0);
        }
    }

    #[test]
    fn expanded_and_weighted_forms_agree(d in 2usize..=8, theta in 0.0..TAU) {
        let d = dim(d);
        if !weight_functions(d, theta).singular() {
            let weighted = r_matrix_from_weights(d, theta).unwrap();
            prop_assert!(matrix_diff(r_matrix(d, theta).matrix(), &weighted) <= 1e-12);
        }
    }

    #[test]
    fn opposite_angle_inverts(d in 2usize..=8, theta in 0.0..TAU) {
        let d = dim(d);
        let product = r_matrix(d, theta).matrix().matmul(r_matrix(d, -theta).matrix()).unwrap();
        let n = d.pair();
        prop_assert!(matrix_diff(&product, &DenseMatrix::identity(n)) <= 1e-12);
    }

    #[test]
    fn invariants_are_local_unitary_invariant(d in 2usize..=6, seed: u64) {
        let d = dim(d);
        let mut g = rng(seed);
        let state = random_state(d, &mut g);
        let wa = haar_unitary(d.get(), &mut g);
        let wb = haar_unitary(d.get(), &mut g);
        let before = invariants(&state);
        let after = invariants(&state.apply_local(&wa, &wb).unwrap());
        prop_assert!(max_diff(&before.i, &after.i) <= 1e-10);
        prop_assert!(max_diff(&before.iprime, &after.iprime) <= 1e-10);
        prop_assert!((before.concurrence - after.concurrence).abs() <= 1e-10);
    }

    #[test]
    fn schmidt_coefficients_match_singular_values(d in 2usize..=8, seed: u64) {
        let d = dim(d);
        let state = random_state(d, &mut rng(seed));
        let n = d.get();
        let c = DMatrix::from_fn(n, n, |i, j| state.amplitude(i, j));
        let mut sv: Vec<f64> = c.svd(false, false).singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        prop_assert!(max_diff(&schmidt_decompose(&state).kappa, &sv) <= 1e-10);
    }

    #[test]
    fn concurrence_in_unit_interval_and_invariants_decrease(d in 2usize..=8, seed: u64) {
        let state = random_state(dim(d), &mut rng(seed));
        let inv = invariants(&state);
        prop_assert!((0.0..=1.0).contains(&inv.concurrence));
        prop_assert!(inv.i.windows(2).all(|w| w[0] >= w[1]));
        let kappa = schmidt_decompose(&state).kappa;
        let flat = max_diff(&kappa, &vec![1.0 / (d as f64).sqrt(); d]) <= 1e-8;
        prop_assert_eq!(inv.concurrence >= 1.0 - 1e-12, flat);
    }

    #[test]
    fn maximally_entangled_states_have_unit_concurrence(d in 2usize..=8, seed: u64) {
        let d = dim(d);
        let mut g = rng(seed);
        let flat = TwoQuditState::from_schmidt(d, &vec![1.0 / d.as_f64().sqrt(); d.get()]).unwrap();
        let dressed = flat
            .apply_local(&haar_unitary(d.get(), &mut g), &haar_unitary(d.get(), &mut g))
            .unwrap();
        prop_assert!((invariants(&dressed).concurrence - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn qubit_family_spectrum(theta in 0.0..TAU) {
        let kappa = schmidt_decompose(&generate(&GenerationParams::direct(dim(2), theta))).kappa;
        let (c, s) = (theta.cos().abs(), theta.sin().abs());
        prop_assert!(max_diff(&kappa, &[c.max(s), c.min(s)]) <= 1e-12);
    }

    #[test]
    fn outer_local_unitaries_leave_invariants_unchanged(
        d in 2usize..=6,
        theta in 0.0..TAU,
        phi in prop::collection::vec(0.0..=PI, 6),
        seed: u64,
    ) {
        let d = dim(d);
        let params = GenerationParams::new(d, theta, phi[..d.get() - 2].to_vec()).unwrap();
        let mut g = rng(seed);
        let va = haar_unitary(d.get(), &mut g);
        let vb = haar_unitary(d.get(), &mut g);
        let ub = local_unitary_b(d, params.phi()).unwrap();
        let ua = DenseMatrix::identity(d.get());
        let dressed = generate_with_locals(d, theta, (&ua, &ub), (&va, &vb)).unwrap();
        let plain = invariants(&generate(&params));
        prop_assert!(max_diff(&invariants(&dressed).iprime, &plain.iprime) <= 1e-10);
    }

    #[test]
    fn qubit_solver_reaches_every_spectrum(k0 in std::f64::consts::FRAC_1_SQRT_2..=1.0) {
        let k1 = (1.0 - k0 * k0).max(0.0).sqrt();
        let solution = solve_parameters(dim(2), &[k0, k1], 1e-10).unwrap();
        prop_assert!(solution.residual <= 1e-10);
        prop_assert!(solution.params.phi().is_empty());
    }

    #[test]
    fn closed_entangling_power_is_local_invariant_and_bounded(d in 2usize..=3, seed: u64) {
        let d = dim(d);
        let mut g = rng(seed);
        let u = haar_unitary(d.pair(), &mut g);
        let base = entangling_power_closed(&u).unwrap();
        prop_assert!((-1e-10..=1.0 + 1e-10).contains(&base));
        let n = d.get();
        let left = kron(&haar_unitary(n, &mut g), &haar_unitary(n, &mut g));
        let right = kron(&haar_unitary(n, &mut g), &haar_unitary(n, &mut g));
        let dressed = left.matmul(&u).unwrap().matmul(&right).unwrap();
        prop_assert!((entangling_power_closed(&dressed).unwrap() - base).abs() <= 1e-9);
    }
}

#[test]
fn ybe_holds_for_every_dimension() {
    let mut g = rng(7);
    for d in QuditDimension::all() {
        for _ in 0..50 {
            let (t1, t2) = (g.random_range(0.0..TAU), g.random_range(0.0..TAU));
            let r = ybe_residual(d, t1, t2);
            assert!(r <= 1e-10, "d = {d}, angles ({t1}, {t2}): {r:e}");
        }
    }
}

#[test]
fn pipeline_samples_stay_inside_qutrit_region() {
    for s in sample_region(dim(3), 50_000, 11, Ensemble::YangBaxter) {
        assert!(qutrit_region_contains(&s.iprime, 1e-8), "{:?}", s);
    }
}

#[test]
fn region_samples_are_deterministic() {
    for ensemble in [Ensemble::Schmidt, Ensemble::YangBaxter] {
        let a = sample_region(dim(4), 10_000, 5, ensemble);
        let b = with_workers(Some(3), || sample_region(dim(4), 10_000, 5, ensemble));
        assert_eq!(a, b);
    }
}

#[test]
fn entangling_power_is_continuous_in_angle() {
    for d in [2, 3, 4] {
        let steps = 200;
        let step = PI / steps as f64;
        let values: Vec<f64> = (0..=steps)
            .map(|k| entangling_power_closed(r_matrix(dim(d), k as f64 * step).matrix()).unwrap())
            .collect();
        assert_eq!(values[0], 0.0);
        let jump = values
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max);
        assert!(jump <= 2.0 * step, "d = {d}: jump {jump}");
    }
}
