use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use cosymplectic::dynamics::{integrate, IntegratorConfig};
use cosymplectic::equilibria::chebyshev_grid;
use cosymplectic::field::{coordinate, shifted};
use cosymplectic::geometry::{evolution_field, field_closure, hamiltonian_field, lie_bracket_fd};
use cosymplectic::quantum::{
    observable_field, pauli_basis, pauli_fields, point_to_state, rep_eigenvector_certify, schrodinger_field,
    state_to_point, u1_action, Envelope, HermitianPath, HopfChart,
};
use cosymplectic::symmetry::{
    cocycle_form, reduced_hamiltonian, tangency_check, verify_momentum_map, verify_reduction, LieAlgebraSpec,
    ReductionChart, SymmetryAction,
};
use cosymplectic::{Error, FieldKind, Jet2};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn points(count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut x = vec![rng.gen_range(0.0..10.0)];
            x.extend((0..4).map(|_| rng.gen_range(-1.0..1.0)));
            x
        })
        .collect()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn observables_in_the_real_chart() {
    let [h0, h1, h2, h3] = pauli_fields();
    for x in points(100, 1) {
        let (q1, q2, p1, p2) = (x[1], x[2], x[3], x[4]);
        assert!((h0.value(&x).unwrap() - 0.5 * (q1 * q1 + p1 * p1 + q2 * q2 + p2 * p2)).abs() <= 1e-14);
        assert!((h3.value(&x).unwrap() - 0.25 * (p1 * p1 + q1 * q1 - p2 * p2 - q2 * q2)).abs() <= 1e-14);
        let v: Vec<f64> = [&h0, &h1, &h2, &h3].iter().map(|h| h.value(&x).unwrap()).collect();
        assert!((v[0] * v[0] - 4.0 * (v[1] * v[1] + v[2] * v[2] + v[3] * v[3])).abs() <= 1e-10);
        // f_A = 1/2 <psi, A psi> for each basis matrix
        let psi = DVector::from_vec(point_to_state(&x));
        for (a, val) in pauli_basis().iter().zip(&v) {
            let e = psi.dotc(&(a * &psi)).re * 0.5;
            assert!((e - val).abs() <= 1e-14);
        }
    }
    let bad = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    assert!(observable_field(&bad, "bad").is_err());
}

#[test]
fn schrodinger_array() {
    let path = HermitianPath::two_level([0.3, -0.7, 0.4, 1.1], Envelope::Modulated { a: 0.5, b: 1.0 });
    let h = schrodinger_field(&path).unwrap();
    for x in points(50, 2) {
        let e = evolution_field(h.as_ref(), &x).unwrap().components;
        // psi' = -i H(t) psi
        let psi = DVector::from_vec(point_to_state(&x));
        let dpsi = (path.at(x[0]) * psi) * c(0.0, -1.0);
        let oracle = [1.0, dpsi[0].re, dpsi[1].re, dpsi[0].im, dpsi[1].im];
        for (a, b) in e.iter().zip(oracle) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn spin_up_acquires_a_phase() {
    let path = HermitianPath::two_level([0.0, 0.0, 0.0, 1.0], Envelope::Constant(1.0));
    let h = schrodinger_field(&path).unwrap();
    let x0 = state_to_point(0.0, &[c(1.0, 0.0), c(0.0, 0.0)]);
    let traj = integrate(FieldKind::Evolution, h.as_ref(), &x0, 0.0, 6.0, &IntegratorConfig::rk45(1e-12)).unwrap();
    let h0 = &pauli_fields()[0];
    let n0 = h0.value(&x0).unwrap();
    for (s, x) in traj.s.iter().zip(&traj.states) {
        let psi = point_to_state(x);
        let exact = c(0.0, -s / 2.0).exp();
        assert!((psi[0] - exact).norm() <= 1e-9 && psi[1].norm() <= 1e-12, "at t = {s}");
        assert!((h0.value(x).unwrap() - n0).abs() <= 1e-8);
    }
}

#[test]
fn pauli_field_commutators() {
    let [_, h1, h2, h3] = pauli_fields();
    let xs = [&h1, &h2, &h3].map(|h| field_closure(FieldKind::Hamiltonian, h.as_ref()));
    for x in points(20, 3) {
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            let comm = lie_bracket_fd(&xs[i], &xs[j], &x, 1e-4).unwrap();
            let xk = xs[k](&x).unwrap();
            assert!((comm + xk).amax() <= 1e-6);
        }
    }
}

#[test]
fn phase_action_is_a_momentum_map() {
    let u1 = u1_action(2).unwrap();
    let [h0, ..] = pauli_fields();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for x in points(20, 4) {
        assert_eq!(u1.momentum(&x).unwrap()[0], h0.value(&x).unwrap());
    }
    for _ in 0..5 {
        let b = [0, 1, 2, 3].map(|_| rng.gen_range(-2.0..2.0));
        let path = HermitianPath::two_level(b, Envelope::Decaying { a: 0.4, b: 0.3 });
        let h = schrodinger_field(&path).unwrap();
        let rep = verify_momentum_map(&u1, h.as_ref(), &points(100, 5), 1e-10).unwrap();
        assert!(rep.passed && rep.max_residual() <= 1e-10);
    }
    // J = t violates R J = 0
    let chart = cosymplectic::quantum::quantum_chart(2).unwrap();
    let bad = SymmetryAction::new(LieAlgebraSpec::abelian(1), vec![coordinate(&chart, 0)], chart).unwrap();
    let h = schrodinger_field(&HermitianPath::two_level([0.0, 0.0, 0.0, 1.0], Envelope::Constant(1.0))).unwrap();
    let rep = verify_momentum_map(&bad, h.as_ref(), &points(10, 6), 1e-10).unwrap();
    assert!(!rep.passed);
    assert!((rep.time_independence.iter().copied().fold(0.0, f64::max) - 1.0).abs() <= 1e-15);
    // n levels
    let diag = DMatrix::from_fn(3, 3, |i, j| c(if i == j { i as f64 - 1.0 } else { 0.0 }, 0.0));
    let three = HermitianPath::new(vec![(Envelope::Constant(1.0), diag)]).unwrap();
    let pts: Vec<Vec<f64>> = (0..20).map(|k| (0..7).map(|i| ((k * 7 + i) as f64 * 0.37).sin()).collect()).collect();
    let rep = verify_momentum_map(&u1_action(3).unwrap(), schrodinger_field(&three).unwrap().as_ref(), &pts, 1e-10).unwrap();
    assert!(rep.passed);
}

#[test]
fn flows_conserve_the_norm() {
    let u1 = u1_action(2).unwrap();
    let j = u1.components[0].clone();
    let x0 = [0.0, 0.6, 0.0, 0.0, 0.8];
    let traj = integrate(FieldKind::Hamiltonian, j.as_ref(), &x0, 0.0, 10.0, &IntegratorConfig::rk45(1e-12)).unwrap();
    for x in &traj.states {
        assert!((j.value(x).unwrap() - 0.5).abs() <= 1e-10);
    }
    let path = HermitianPath::two_level([0.0, 0.0, 0.0, 1.0], Envelope::Modulated { a: 0.5, b: 1.0 });
    let h = schrodinger_field(&path).unwrap();
    let x0 = [0.0, 0.3, 0.5, -0.2, 0.7];
    let traj = integrate(FieldKind::Evolution, h.as_ref(), &x0, 0.0, 10.0, &IntegratorConfig::rk45(1e-10)).unwrap();
    let j0 = j.value(&x0).unwrap();
    for x in &traj.states {
        assert!((j.value(x).unwrap() - j0).abs() <= 1e-8);
    }
}

#[test]
fn cocycles() {
    let u1 = u1_action(2).unwrap();
    let pts = points(10, 7);
    let rep = cocycle_form(&u1, &pts).unwrap();
    assert!(rep.mean.amax() == 0.0 && rep.max_deviation == 0.0);
    let [_, h1, h2, h3] = pauli_fields();
    let chart = cosymplectic::quantum::quantum_chart(2).unwrap();
    let su2 = SymmetryAction::new(LieAlgebraSpec::su2(), vec![h1.clone(), h2.clone(), h3.clone()], chart.clone()).unwrap();
    let rep = cocycle_form(&su2, &pts).unwrap();
    assert!(rep.mean.amax() <= 1e-8 && rep.max_deviation <= 1e-8);
    let shifted_action =
        SymmetryAction::new(LieAlgebraSpec::su2(), vec![shifted(&h1, 0.3), shifted(&h2, -1.0), h3], chart).unwrap();
    let other = cocycle_form(&shifted_action, &pts).unwrap();
    // brackets kill constants but J_[j,i] does not: Sigma(xi_i, xi_j) moves
    // by the shift of J_[i,j]
    let mut expected = DMatrix::zeros(3, 3);
    expected[(1, 2)] = 0.3; // [xi_2, xi_3] = xi_1
    expected[(2, 1)] = -0.3;
    expected[(2, 0)] = -1.0; // [xi_3, xi_1] = xi_2
    expected[(0, 2)] = 1.0;
    assert!((&other.mean - &rep.mean - &expected).amax() <= 1e-12, "{}", other.mean);
    assert!(other.max_deviation <= 1e-8);
}

#[test]
fn tangency_on_the_sphere() {
    let u1 = u1_action(2).unwrap();
    let x = [0.0, 1.0, 0.0, 0.0, 0.0];
    let rep = tangency_check(&u1, &[0.5], &x).unwrap();
    assert!(rep.passed);
    assert_eq!(rep.kernel_dim, 4);
    let zero = [0.0; 5];
    assert!(matches!(tangency_check(&u1, &[0.0], &zero), Err(Error::NotRegular { .. })));
}

#[test]
fn hopf_chart_reduction() {
    assert!(HopfChart::new(0.0).is_err());
    let mu = 0.5;
    let chart = Arc::new(HopfChart::new(mu).unwrap());
    let u1 = u1_action(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let level: Vec<Vec<f64>> = (0..40)
        .map(|_| {
            vec![rng.gen_range(0.0..5.0), rng.gen_range(0.1..FRAC_PI_2 - 0.1), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)]
        })
        .collect();
    let rep = verify_reduction(chart.as_ref(), &u1, &level, 1e-9).unwrap();
    assert!(rep.passed && rep.eta_residual == 0.0);
    for u in &level {
        let x: Vec<f64> = chart.embed(&Jet2::variables(u)).iter().map(|j| j.value).collect();
        assert!((u1.momentum(&x).unwrap()[0] - mu).abs() <= 1e-12);
    }
    let degenerate = vec![vec![0.0, 0.0, 0.3, 0.1]];
    assert!(matches!(verify_reduction(chart.as_ref(), &u1, &degenerate, 1e-9), Err(Error::ChartDegeneracy(_))));

    let ys: Vec<Vec<f64>> = level.iter().map(|u| vec![u[0], u[1], u[2] - u[3]]).collect();
    let [h0, h1, _, h3] = pauli_fields();
    let k0 = reduced_hamiltonian(chart.clone(), h0, &ys).unwrap();
    let k1 = reduced_hamiltonian(chart.clone(), h1, &ys).unwrap();
    let k3 = reduced_hamiltonian(chart.clone(), h3, &ys).unwrap();
    use cosymplectic::ScalarField;
    for y in &ys {
        assert!((k0.value(y).unwrap() - mu).abs() <= 1e-12);
        assert!((k1.value(y).unwrap() - 0.5 * mu * (2.0 * y[1]).sin() * y[2].cos()).abs() <= 1e-12);
        assert!((k3.value(y).unwrap() + 0.5 * mu * (2.0 * y[1]).cos()).abs() <= 1e-12);
    }
    // a field that is not phase invariant cannot be reduced
    let q1 = coordinate(&cosymplectic::quantum::quantum_chart(2).unwrap(), 1);
    assert!(reduced_hamiltonian(chart, q1, &ys).is_err());
}

#[test]
fn certified_rays() {
    let grid = chebyshev_grid(0.0, 10.0, 9);
    for env in [Envelope::Constant(1.0), Envelope::Modulated { a: 0.5, b: 1.0 }, Envelope::Decaying { a: 0.5, b: 1.0 }] {
        let path = HermitianPath::two_level([0.0, 0.0, 0.0, 1.0], env);
        let rays = rep_eigenvector_certify(&path, &grid, 1e-10).unwrap();
        assert_eq!(rays.len(), 2);
        let mut hits = [false; 2];
        for r in &rays {
            for (k, hit) in hits.iter_mut().enumerate() {
                if (r.vector[k] - c(1.0, 0.0)).norm() <= 1e-12 {
                    *hit = true;
                }
            }
            assert!(r.agreement <= 1e-8);
        }
        assert_eq!(hits, [true, true]);
    }
    // rotating eigenvectors: B1 ~ sin t, B3 ~ cos t
    let basis = pauli_basis();
    let path = HermitianPath::new(vec![
        (Envelope::Sinusoid { amplitude: 1.0, frequency: 1.0, phase: 0.0 }, basis[1].clone()),
        (Envelope::Sinusoid { amplitude: 1.0, frequency: 1.0, phase: FRAC_PI_2 }, basis[3].clone()),
    ])
    .unwrap();
    assert!(rep_eigenvector_certify(&path, &grid, 1e-10).unwrap().is_empty());
    // three levels
    let diag = DMatrix::from_fn(3, 3, |i, j| c(if i == j { (i + 1) as f64 } else { 0.0 }, 0.0));
    let three = HermitianPath::new(vec![(Envelope::Modulated { a: 0.5, b: 1.0 }, diag)]).unwrap();
    assert_eq!(rep_eigenvector_certify(&three, &grid, 1e-10).unwrap().len(), 3);
}

#[test]
fn degenerate_spectra_are_flagged() {
    let s3 = pauli_basis()[3].clone();
    let osc = HermitianPath::new(vec![(Envelope::Sinusoid { amplitude: 1.0, frequency: 1.0, phase: 0.0 }, s3)]).unwrap();
    assert!(matches!(rep_eigenvector_certify(&osc, &[0.0, 1.0], 1e-10), Err(Error::DegenerateSpectrum { .. })));
    let rays = rep_eigenvector_certify(&osc, &[1.0, PI, 4.0], 1e-10).unwrap();
    assert_eq!(rays.len(), 2);
    assert!(rays.iter().all(|r| r.degenerate_times == vec![PI]));
    let id = pauli_basis()[0].clone();
    let flat = HermitianPath::new(vec![(Envelope::Constant(1.0), id)]).unwrap();
    assert!(matches!(rep_eigenvector_certify(&flat, &[0.0], 1e-10), Err(Error::DegenerateSpectrum { .. })));
}

#[test]
fn non_hermitian_paths_are_rejected() {
    let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(1.0, 0.0)]);
    assert!(HermitianPath::new(vec![(Envelope::Constant(1.0), m)]).is_err());
    let h = schrodinger_field(&HermitianPath::two_level([1.0, 0.0, 0.0, 0.0], Envelope::Constant(2.0))).unwrap();
    let x = [0.0, 1.0, 0.0, 0.0, 0.0];
    // B0 term alone rotates the global phase: X_h = (0, 0, 0, -2, 0) at (1, 0)
    let xh = hamiltonian_field(h.as_ref(), &x).unwrap().components;
    assert!((xh[3] + 2.0).abs() <= 1e-15);
}
