//! Invariants of every module, checked on random inputs.

use proptest::prelude::*;
use riu_core::decomp::{closest_product_state, hosvd, parafac_als, AlsOptions};
use riu_core::entropy::{renyi_slice, RenyiOrder};
use riu_core::haar::{haar_state, haar_unitary, perturb_unitary, random_hermitian_unit, unitary_exp};
use riu_core::polyinv::{det3, det4, hyper_t, monogamy, tangle};
use riu_core::riu::{apply_local, lambda_max_sep, riu_minimize, LocalUnitarySet, RiuOptions};
use riu_core::studies::{histogram, schmidt_bound, Binning};
use riu_core::{ComplexMatrix, RngStream, StateFile, StateTensor, C64};

fn state(dims: &[usize], seed: u64) -> StateTensor {
    haar_state(dims, &RngStream::new(seed, 0)).unwrap()
}

fn local_unitaries(dims: &[usize], seed: u64) -> LocalUnitarySet {
    let factors = dims
        .iter()
        .enumerate()
        .map(|(k, &d)| haar_unitary(d, &RngStream::new(seed, 100 + k as u64)).unwrap())
        .collect();
    LocalUnitarySet::new(factors).unwrap()
}

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=4, 1..=4)
}

fn orders() -> Vec<RenyiOrder> {
    let mut qs: Vec<RenyiOrder> =
        [0.0, 0.3, 0.5, 0.999, 1.0, 1.001, 2.0, 3.5, 10.0, 100.0].into_iter().map(RenyiOrder::Finite).collect();
    qs.push(RenyiOrder::Infinity);
    qs
}

fn close(a: &StateTensor, b: &StateTensor, tol: f64) -> bool {
    a.sub(b).unwrap().frobenius() < tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fold_inverts_unfold(dims in dims_strategy(), seed in any::<u64>()) {
        let c = state(&dims, seed);
        for k in 0..dims.len() {
            let m = c.unfold(k).unwrap();
            prop_assert_eq!(m.rows(), dims[k]);
            let back = StateTensor::fold(&m, &dims, k).unwrap();
            prop_assert_eq!(back.coeffs(), c.coeffs());
        }
    }

    #[test]
    fn kmode_products_compose(dims in dims_strategy(), seed in any::<u64>(), k in 0usize..4) {
        let k = k % dims.len();
        let c = state(&dims, seed);
        let u = haar_unitary(dims[k], &RngStream::new(seed, 1)).unwrap();
        let v = haar_unitary(dims[k], &RngStream::new(seed, 2)).unwrap();
        let lhs = c.kmode_product(&v, k).unwrap().kmode_product(&u, k).unwrap();
        let rhs = c.kmode_product(&u.matmul(&v).unwrap(), k).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
        // Unitary k-mode products preserve the norm.
        prop_assert!((lhs.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unitaries_are_unitary(d in 1usize..=8, seed in any::<u64>(), eps in 0.0f64..2.0) {
        let u = haar_unitary(d, &RngStream::new(seed, 0)).unwrap();
        prop_assert!(u.unitarity_residual() < 1e-12);
        let p = perturb_unitary(&u, eps, &RngStream::new(seed, 1)).unwrap();
        prop_assert!(p.unitarity_residual() < 1e-12);
        let g = random_hermitian_unit(d, &mut RngStream::new(seed, 2).rng());
        prop_assert!(g.hermiticity_residual() < 1e-14);
        prop_assert!(unitary_exp(&g, eps).unwrap().unitarity_residual() < 1e-12);
    }

    #[test]
    fn renyi_is_non_increasing_in_q(dims in dims_strategy(), seed in any::<u64>()) {
        let c = state(&dims, seed);
        let p: Vec<f64> = c.coeffs().iter().map(|z| z.norm_sqr()).collect();
        let values: Vec<f64> = orders().into_iter().map(|q| renyi_slice(&p, q)).collect();
        for w in values.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9, "{:?}", values);
        }
        prop_assert!(values[0] <= (p.len() as f64).ln() + 1e-12);
        prop_assert!(*values.last().unwrap() >= 0.0);
    }

    #[test]
    fn hosvd_core_is_all_orthogonal(dims in dims_strategy(), seed in any::<u64>()) {
        let c = state(&dims, seed);
        let h = hosvd(&c).unwrap();
        for (k, u) in h.factors.iter().enumerate() {
            prop_assert!(u.unitarity_residual() < 1e-10);
            let m = h.core.unfold(k).unwrap();
            let gram = m.matmul(&m.adjoint()).unwrap();
            let sv = &h.kmode_sv[k];
            for i in 0..dims[k] {
                for j in 0..dims[k] {
                    let want = if i == j { sv[i] * sv[i] } else { 0.0 };
                    prop_assert!((gram[(i, j)] - C64::new(want, 0.0)).norm() < 1e-10);
                }
            }
            for w in sv.windows(2) {
                prop_assert!(w[0] >= w[1] - 1e-12);
            }
        }
        prop_assert!(close(&h.reconstruct().unwrap(), &c, 1e-10));
    }

    #[test]
    fn state_files_round_trip(dims in dims_strategy(), seed in any::<u64>()) {
        let c = state(&dims, seed);
        let text = StateFile::from(&c).to_json();
        let back = StateFile::from_json(&text).unwrap().into_tensor(true).unwrap();
        prop_assert_eq!(back.dims(), c.dims());
        for (a, b) in back.coeffs().iter().zip(c.coeffs()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn haar_streams_are_deterministic(seed in any::<u64>(), stream in any::<u64>()) {
        let a = haar_state(&[2, 3, 2], &RngStream::new(seed, stream)).unwrap();
        let b = haar_state(&[2, 3, 2], &RngStream::new(seed, stream)).unwrap();
        prop_assert_eq!(a.coeffs(), b.coeffs());
        let c = haar_state(&[2, 3, 2], &RngStream::new(seed, stream.wrapping_add(1))).unwrap();
        prop_assert_ne!(a.coeffs(), c.coeffs());
    }

    #[test]
    fn tangle_is_lu_and_permutation_invariant(seed in any::<u64>()) {
        let c = state(&[2, 2, 2], seed);
        let t = tangle(&c).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&t));
        let moved = apply_local(&local_unitaries(&[2, 2, 2], seed), &c).unwrap();
        prop_assert!((tangle(&moved).unwrap() - t).abs() < 1e-10);
        for perm in [[0, 2, 1], [1, 0, 2], [2, 1, 0], [1, 2, 0], [2, 0, 1]] {
            prop_assert!((tangle(&c.permute_axes(&perm).unwrap()).unwrap() - t).abs() < 1e-10);
        }
    }

    #[test]
    fn hyperdeterminant_t_is_lu_invariant(seed in any::<u64>()) {
        let c = state(&[2, 2, 2, 2], seed);
        let t = hyper_t(&c).unwrap();
        let moved = apply_local(&local_unitaries(&[2, 2, 2, 2], seed), &c).unwrap();
        prop_assert!((hyper_t(&moved).unwrap() - t).abs() < 1e-9 * (1.0 + t));
        let swapped = c.permute_axes(&[3, 1, 2, 0]).unwrap();
        prop_assert!((hyper_t(&swapped).unwrap() - t).abs() < 1e-9 * (1.0 + t));
    }

    #[test]
    fn hyperdeterminants_are_homogeneous(seed in any::<u64>(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let s = C64::new(re, im);
        prop_assume!(s.norm() > 0.1);
        let c3 = state(&[2, 2, 2], seed);
        let lhs = det3(&c3.scale(s)).unwrap();
        let rhs = det3(&c3).unwrap() * s.powi(4);
        prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
        let c4 = state(&[2, 2, 2, 2], seed);
        let lhs = det4(&c4.scale(s)).unwrap();
        let rhs = det4(&c4).unwrap() * s.powi(24);
        prop_assert!((lhs - rhs).norm() <= 1e-9 * rhs.norm() + 1e-30);
    }

    #[test]
    fn histogram_density_integrates_to_one(values in prop::collection::vec(-1e3f64..1e3, 1..400), bins in 1usize..50) {
        for binning in [Binning::FreedmanDiaconis, Binning::Fixed(bins)] {
            let h = histogram(&values, binning).unwrap();
            let mass: f64 = h.iter().map(|b| b.density * (b.bin_right - b.bin_left)).sum();
            prop_assert!((mass - 1.0).abs() < 1e-9);
            prop_assert_eq!(h.iter().map(|b| b.count).sum::<u64>(), values.len() as u64);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn als_residuals_never_increase(dims in prop::collection::vec(2usize..=3, 3), r in 1usize..=4, seed in any::<u64>()) {
        let c = state(&dims, seed);
        let opts = AlsOptions { max_iters: 200, restarts: 2, stream: RngStream::new(seed, 1), ..AlsOptions::default() };
        let m = parafac_als(&c, r, &opts).unwrap();
        for w in m.history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-10) + 1e-14, "{:?}", m.history);
        }
        prop_assert!(m.residual <= 1.0 + 1e-12);
    }

    #[test]
    fn riu_never_exceeds_its_starting_points(seed in any::<u64>(), q in prop::sample::select(vec![0.5, 1.0, 2.0, 100.0])) {
        let c = state(&[2, 2, 2], seed);
        let q = RenyiOrder::Finite(q);
        let opts = RiuOptions { restarts: 2, steps: 500, stream: RngStream::new(seed, 1), ..RiuOptions::default() };
        let res = riu_minimize(&c, q, &opts).unwrap();
        let raw: Vec<f64> = c.coeffs().iter().map(|z| z.norm_sqr()).collect();
        let core: Vec<f64> = hosvd(&c).unwrap().core.coeffs().iter().map(|z| z.norm_sqr()).collect();
        prop_assert!(res.value <= renyi_slice(&raw, q) + 1e-9);
        prop_assert!(res.value <= renyi_slice(&core, q) + 1e-9);
        prop_assert!(res.optimizer.factors().iter().all(|u| u.unitarity_residual() < 1e-9));
        let reached = apply_local(&res.optimizer, &c).unwrap();
        let p: Vec<f64> = reached.coeffs().iter().map(|z| z.norm_sqr()).collect();
        prop_assert!((renyi_slice(&p, q) - res.value).abs() < 1e-9);
    }
}

#[test]
fn coffman_identity_on_a_thousand_states() {
    for i in 0..1000 {
        let c = state(&[2, 2, 2], i);
        let m = monogamy(&c).unwrap();
        let direct = tangle(&c).unwrap();
        assert!((m.tangle() - direct).abs() < 1e-8, "state {i}: {} vs {direct}", m.tangle());
    }
}

#[test]
fn separable_overlap_ordering() {
    for (dims, seeds) in [([2usize, 2, 2], 0..12u64), ([3, 3, 3], 0..4u64)] {
        for seed in seeds {
            let c = state(&dims, seed);
            let riu = RiuOptions { restarts: 3, steps: 3000, stream: RngStream::new(seed, 1), ..RiuOptions::default() };
            let als = AlsOptions { restarts: 4, stream: RngStream::new(seed, 2), ..AlsOptions::default() };
            let sep = lambda_max_sep(&c, &riu, &als).unwrap();
            let (_, lambda_p) = closest_product_state(&c, &als).unwrap();
            let bound = schmidt_bound(&c).unwrap();
            assert!(lambda_p <= sep.lambda_max + 1e-9, "{dims:?}/{seed}: {lambda_p} > {}", sep.lambda_max);
            assert!(sep.lambda_max <= bound + 1e-6, "{dims:?}/{seed}: {} > {bound}", sep.lambda_max);
            assert!((sep.geometric_measure - (1.0 - sep.lambda_max)).abs() < 1e-15);
        }
    }
}

#[test]
fn schmidt_bound_is_lu_invariant() {
    for seed in 0..20 {
        let c = state(&[2, 3, 4], seed);
        let moved = apply_local(&local_unitaries(&[2, 3, 4], seed), &c).unwrap();
        assert!((schmidt_bound(&c).unwrap() - schmidt_bound(&moved).unwrap()).abs() < 1e-10);
    }
}

#[test]
fn matrix_identity_is_unitary() {
    assert_eq!(ComplexMatrix::identity(5).unitarity_residual(), 0.0);
}
