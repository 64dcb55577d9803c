use std::f64::consts::PI;

use cosymplectic::dynamics::{integrate_ode, IntegratorConfig};
use cosymplectic::geometry::{bivector_lie_derivative_fd, evolution_field, field_closure, gradient_field, hamiltonian_field};
use cosymplectic::threebody::{
    self, approximations, convergence_diagnostics, cleared_collinear, gradient_rep_residual, l3_minus_branch_sign_changes,
    lagrange_points, lagrange_table_csv, project, pushforward, quintic, quintic_coefficients, reduced_field,
    reduced_field_closed_form, solve_collinear, solve_triangular, AngleMode, Branch, LagrangePoint, ThreeBodyParams,
};
use cosymplectic::{Error, FieldKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params() -> ThreeBodyParams {
    ThreeBodyParams::new(0.99, 1.0).unwrap()
}

fn samples(p: &ThreeBodyParams, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let x = vec![
            rng.gen_range(-3.0..3.0),
            rng.gen_range(0.3..2.0),
            rng.gen_range(-PI..PI),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-2.0..2.0),
        ];
        let (d1, d2) = p.distances(&x);
        if d1 > 0.05 && d2 > 0.05 {
            out.push(x);
        }
    }
    out
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Hamilton equations written out component by component.
fn equations(p: &ThreeBodyParams, x: &[f64]) -> [f64; 5] {
    let (mu, w, r1, r2) = (p.mu, p.varpi, 1.0 - p.mu, p.mu);
    let (t, r, ph, pr, pp) = (x[0], x[1], x[2], x[3], x[4]);
    let (s, c) = (ph - w * t).sin_cos();
    let d1 = (r * r + r1 * r1 + 2.0 * r * r1 * c).powf(1.5);
    let d2 = (r * r + r2 * r2 - 2.0 * r * r2 * c).powf(1.5);
    [
        1.0,
        pr,
        pp / (r * r),
        pp * pp / r.powi(3) - mu * (r + r1 * c) / d1 - (1.0 - mu) * (r - r2 * c) / d2,
        mu * r * r1 * s / d1 - (1.0 - mu) * r * r2 * s / d2,
    ]
}

#[test]
fn hamilton_equations_match_closed_form() {
    for varpi in [1.0, -1.0] {
        let p = ThreeBodyParams::new(0.99, varpi).unwrap();
        let h = threebody::hamiltonian(&p);
        for x in samples(&p, 50, 1) {
            let e = evolution_field(h.as_ref(), &x).unwrap().components;
            let oracle = equations(&p, &x);
            assert!(max_abs_diff(e.as_slice(), &oracle) <= 1e-12, "{x:?}");
            let xh = hamiltonian_field(h.as_ref(), &x).unwrap().components;
            assert_eq!(xh[0], 0.0);
            assert!(max_abs_diff(&xh.as_slice()[1..], &oracle[1..]) <= 1e-12);
        }
    }
}

#[test]
fn kepler_limit() {
    let p = ThreeBodyParams::new(1.0 - 1e-13, 1.0).unwrap();
    let h = threebody::hamiltonian(&p);
    for x in samples(&p, 50, 2) {
        let kinetic = 0.5 * x[3] * x[3] + 0.5 * x[4] * x[4] / (x[1] * x[1]);
        let v = h.value(&x).unwrap() - kinetic;
        assert!((v + 1.0 / x[1]).abs() <= 1e-10, "{v} at r = {}", x[1]);
    }
}

#[test]
fn collisions_are_domain_errors() {
    let p = params();
    let h = threebody::hamiltonian(&p);
    // light primary at r = mu on the ray phi = varpi t
    for x in [[0.0, 0.99, 0.0, 0.0, 0.0], [0.0, 0.01, PI, 0.0, 0.0], [0.0, 0.0, 0.3, 0.0, 0.0]] {
        assert!(matches!(h.value(&x), Err(Error::Domain { .. })), "{x:?}");
    }
    assert!(ThreeBodyParams::new(0.4, 1.0).is_err());
    assert!(ThreeBodyParams::new(0.9, 0.5).is_err());
}

#[test]
fn upsilon_gradient_and_bivector_invariance() {
    for varpi in [1.0, -1.0] {
        let p = ThreeBodyParams::new(0.99, varpi).unwrap();
        let ups = threebody::upsilon(&p);
        let chart = threebody::chart();
        for x in samples(&p, 20, 3) {
            let g = gradient_field(ups.as_ref(), &x).unwrap().components;
            assert_eq!(g.as_slice(), &[1.0, 0.0, varpi, 0.0, 0.0]);
            assert_eq!(ups.jet(&x).unwrap().grad[0], 1.0);
            let l = bivector_lie_derivative_fd(&chart, &field_closure(FieldKind::Gradient, ups.as_ref()), &x, 1e-4).unwrap();
            assert!(l.amax() <= 1e-6);
        }
    }
}

#[test]
fn reduced_dynamics_agree_three_ways() {
    let p = params();
    let h = threebody::hamiltonian(&p);
    let k = threebody::reduced_hamiltonian(&p);
    for x in samples(&p, 50, 4) {
        let e = evolution_field(h.as_ref(), &x).unwrap().components;
        let pushed = pushforward(&p, e.as_slice());
        let y = project(&p, &x);
        let closed = reduced_field_closed_form(&p, &y);
        let xk = hamiltonian_field(k.as_ref(), &y).unwrap().components;
        let rf = reduced_field(&p, &y).unwrap();
        assert!(max_abs_diff(&pushed, &closed) <= 1e-10);
        assert!(max_abs_diff(&pushed, xk.as_slice()) <= 1e-10);
        assert!(max_abs_diff(&pushed, rf.as_slice()) <= 1e-10);
        // k does not see the time slot
        assert_eq!(k.jet(&y).unwrap().grad[0], 0.0);
    }
}

#[test]
fn k_is_conserved_along_reduced_trajectories() {
    let p = params();
    let k = threebody::reduced_hamiltonian(&p);
    let l4 = &solve_triangular(&p).unwrap()[0];
    let y0 = project(&p, &l4.at(&p, 0.0));
    let start = [0.0, y0[1] + 2e-3, y0[2] - 1e-3, 1e-3, y0[4]];
    let rhs = |_s: f64, y: &[f64]| reduced_field(&p, y);
    let traj = integrate_ode(&rhs, &start, 0.0, 20.0, &IntegratorConfig::rk45(1e-11)).unwrap();
    assert!(traj.completed());
    let k0 = k.value(&start).unwrap();
    for y in &traj.states {
        assert!((k.value(y).unwrap() - k0).abs() <= 1e-8);
    }
}

#[test]
fn quintic_matches_cleared_force_balance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let r = rng.gen_range(0.0..2.0);
        let mu = rng.gen_range(0.5..1.0);
        for b in [Branch::Plus, Branch::Minus] {
            let d = quintic(mu, b).eval(r) - cleared_collinear(mu, b).eval(r);
            assert!(d.abs() <= 1e-10, "{b:?} at r = {r}, mu = {mu}: {d}");
        }
    }
}

#[test]
fn quintic_landmarks() {
    for b in [Branch::Plus, Branch::Minus] {
        assert!(quintic(1.0, b).eval(1.0).abs() <= 1e-15);
        assert!(quintic(0.99, b).eval(0.0) < 0.0);
    }
    let c = quintic_coefficients(0.99, Branch::Plus);
    assert_eq!(c[0], 1.0);
    assert!((c[1] - (2.0 - 4.0 * 0.99)).abs() < 1e-15);
}

#[test]
fn collinear_points_have_consistent_labels() {
    let p = params();
    let pts = lagrange_points(&p).unwrap();
    let labels: Vec<&str> = pts.iter().map(|l| l.label.as_str()).collect();
    assert_eq!(labels, ["L1", "L2", "L3", "L4", "L5"]);
    for l in &pts {
        assert!(l.r > 0.0);
        assert_eq!(l.p_r, 0.0);
        assert!((l.p_phi - p.varpi * l.r * l.r).abs() <= 1e-12);
        assert!(l.residual_polynomial <= 1e-12);
    }
    let a = approximations(0.99);
    assert!((pts[0].r - a.l1).abs() <= 0.02 && (pts[1].r - a.l2).abs() <= 0.02);
    assert!((pts[2].r - a.l3).abs() <= 2e-3);
    assert_eq!(pts[0].mode, AngleMode::Collinear { k: 0 });
    assert_eq!(pts[2].mode, AngleMode::Collinear { k: 1 });
    assert!((1.0 - a.l1 - 0.149380).abs() < 5e-7 && (a.l2 - 1.0 - 0.149380).abs() < 5e-7);
    assert_eq!(l3_minus_branch_sign_changes(0.99), 0);
}

#[test]
fn triangular_points() {
    let p = params();
    let [l4, l5] = solve_triangular(&p).unwrap();
    assert!((l4.r - 0.9901f64.sqrt()).abs() <= 1e-15);
    for l in [&l4, &l5] {
        let (d1, d2) = p.distances(&l.at(&p, 0.7));
        assert!((d1 - 1.0).abs() <= 1e-12 && (d2 - 1.0).abs() <= 1e-12);
    }
    assert!((l4.delta_or_k() + l5.delta_or_k()).abs() <= 1e-15);
    assert!((l4.residual_field - l5.residual_field).abs() <= 1e-12);
    // close to the heavy-mass limit the triangle becomes equilateral
    let q = ThreeBodyParams::new(1.0 - 1e-9, 1.0).unwrap();
    let [m4, _] = solve_triangular(&q).unwrap();
    assert!((m4.r - 1.0).abs() < 1e-8 && (m4.delta_or_k() - PI / 3.0).abs() < 1e-8);
}

#[test]
fn gradient_rep_residuals() {
    let p = params();
    let times = [0.0, 1.0, 2.5];
    for l in lagrange_points(&p).unwrap() {
        let res = gradient_rep_residual(&p, &l, &times).unwrap();
        assert!(res.field <= 1e-8, "{}: {}", l.label, res.field);
        assert!(res.reduced <= 1e-8);
        // the literal gradient condition differs by the Reeb component
        assert!(res.literal > 0.5);
        let mut moved: LagrangePoint = l.clone();
        moved.r += 1e-3;
        moved.p_phi = p.varpi * moved.r * moved.r;
        let off = gradient_rep_residual(&p, &moved, &times).unwrap();
        assert!(off.field > 1e-5, "{}: perturbed residual {}", l.label, off.field);
    }
}

#[test]
fn convergence_rows_and_table() {
    let rows = convergence_diagnostics(&[1e-2, 1e-3, 1e-4], 1.0).unwrap();
    for row in &rows {
        let (a, b) = row.hill_ratios();
        assert!(a <= 1.0 && b <= 1.0);
    }
    assert!(rows[0].l3_error / rows[1].l3_error >= 8.0);
    let a = approximations(1.0 - 1e-12);
    assert!((a.l1 - 1.0).abs() < 1e-4 && (a.l2 - 1.0).abs() < 1e-4 && (a.l3 - 1.0).abs() < 1e-11);

    let csv = lagrange_table_csv(&lagrange_points(&params()).unwrap());
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("label,r,delta_or_k,p_phi,residual_field,residual_quintic"));
    assert_eq!(lines.count(), 5);
    assert_eq!(solve_collinear(&params()).unwrap().len(), 3);
}
