use std::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use qfound_core::bell::{self, ChshSettings, LhvModel};
use qfound_core::charge::{self, ChargeModel};
use qfound_core::dynamics;
use qfound_core::grid::Grid;
use qfound_core::hilbert::{self, partial_trace, DensityOperator, Operator, SpaceSpec, StateVector};
use qfound_core::symmetry::{self, Permutation, SymmetrySector};

fn state_from(space: SpaceSpec, parts: &[(f64, f64)]) -> StateVector {
    let v: Vec<C64> = parts.iter().map(|&(re, im)| C64::new(re, im)).collect();
    StateVector::from_slice(space, &v).unwrap().normalized().unwrap()
}

fn hermitian_from(n: usize, entries: &[(f64, f64)]) -> Operator {
    let a = DMatrix::from_fn(n, n, |i, j| {
        let (re, im) = entries[i * n + j];
        C64::new(re, im)
    });
    let h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
    Operator::new(SpaceSpec::single(n).unwrap(), h).unwrap()
}

fn amplitudes(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len)
        .prop_filter("non-zero", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_recovers_factors(a in amplitudes(2), b in amplitudes(3)) {
        let pa = DensityOperator::pure(&state_from(SpaceSpec::single(2).unwrap(), &a)).unwrap();
        let pb = DensityOperator::pure(&state_from(SpaceSpec::single(3).unwrap(), &b)).unwrap();
        let joint = pa.tensor(&pb);
        let left = partial_trace(&joint, &[0]).unwrap();
        let right = partial_trace(&joint, &[1]).unwrap();
        prop_assert!((left.matrix() - pa.matrix()).norm() < 1e-12);
        prop_assert!((right.matrix() - pb.matrix()).norm() < 1e-12);
    }

    #[test]
    fn lifts_on_different_factors_commute(a in amplitudes(4), b in amplitudes(4)) {
        let space = SpaceSpec::uniform(2, 2).unwrap();
        let x = hilbert::lift(&hermitian_from(2, &a), 0, &space).unwrap();
        let y = hilbert::lift(&hermitian_from(2, &b), 1, &space).unwrap();
        prop_assert!(x.commutator(&y).unwrap().norm() < 1e-12);
    }

    #[test]
    fn spectral_decomposition_reconstructs(a in amplitudes(16)) {
        let h = hermitian_from(4, &a);
        let eig = h.eigh().unwrap();
        let back = eig.function(|x| C64::new(x, 0.0));
        prop_assert!((back - h.matrix()).norm() < 1e-10);
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(h.exp_i(0.7).unwrap().unitarity_residual() < 1e-10);
    }

    #[test]
    fn born_probabilities_sum_to_one(a in amplitudes(16), s in amplitudes(4)) {
        let h = hermitian_from(4, &a);
        let psi = state_from(SpaceSpec::single(4).unwrap(), &s);
        let total = hilbert::born_probability(&psi, &h, -1e3, 1e3).unwrap();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn symmetrized_states_are_classified(s in amplitudes(8)) {
        let pair = symmetry::build_projectors(3, 2).unwrap();
        let psi = state_from(pair.space.clone(), &s);
        let sym = pair.symmetrizer.apply(&psi).unwrap();
        prop_assume!(sym.norm() > 1e-3);
        prop_assert_eq!(symmetry::classify_with(&pair, &sym.normalized().unwrap()).unwrap(), SymmetrySector::Symmetric);
    }

    #[test]
    fn parity_is_multiplicative(i in 0usize..24, j in 0usize..24) {
        let all = Permutation::all(4);
        let (p, q) = (&all[i], &all[j]);
        prop_assert_eq!(p.compose(q).unwrap().parity(), p.parity() * q.parity());
    }

    #[test]
    fn gauge_invariance_at_any_angle(theta in -10.0..10.0f64) {
        prop_assert!(charge::gauge_residual(&ChargeModel::two_mode(), theta) < 1e-10);
    }

    #[test]
    fn quantum_chsh_never_exceeds_the_quantum_bound(a in -PI..PI, b in -PI..PI, c in -PI..PI, d in -PI..PI) {
        let settings = ChshSettings::new(a, b, c, d);
        prop_assert!(bell::chsh_quantum(&settings).abs() <= 2.0 * SQRT_2 + 1e-12);
        for model in LhvModel::ALL {
            prop_assert!(model.chsh_exact(&settings).abs() <= 2.0 + 1e-9);
        }
    }

    #[test]
    fn evolution_is_unitary(a in amplitudes(9), s in amplitudes(3)) {
        let h = hermitian_from(3, &a);
        let psi = state_from(SpaceSpec::single(3).unwrap(), &s);
        let run = dynamics::evolve(&psi, &h, 1.0, 5.0, 20).unwrap();
        prop_assert!(run.norm_drift() < 1e-10);
        prop_assert!(run.energy_drift() < 1e-9);
    }
}

#[test]
fn momentum_is_exact_on_resolved_plane_waves() {
    let grid = Grid::new(16, 5.0).unwrap();
    let p = grid.momentum_matrix(1.0);
    let xs = grid.positions();
    for m in -7i32..=7 {
        let k = 2.0 * PI * m as f64 / grid.length;
        let wave = nalgebra::DVector::from_iterator(16, xs.iter().map(|&x| C64::from_polar(1.0, k * x)));
        let residual = (&p * &wave - &wave * C64::new(k, 0.0)).norm();
        assert!(residual < 1e-10, "m = {m}: {residual}");
    }
}
