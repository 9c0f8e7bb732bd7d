mod common;

use rand::Rng;
use stochcoop_core::lp::{Direction, LinearSystem, LpOutcome};

const TOL: f64 = 1e-9;

/// Fourier-Motzkin feasibility of `{x : a·x >= b}`.
fn fm_feasible(mut rows: Vec<(Vec<f64>, f64)>, m: usize, slack: f64) -> bool {
    for (_, b) in rows.iter_mut() {
        *b -= slack;
    }
    for j in 0..m {
        let (mut pos, mut neg, mut zero) = (Vec::new(), Vec::new(), Vec::new());
        for row in rows {
            if row.0[j] > 1e-12 {
                pos.push(row);
            } else if row.0[j] < -1e-12 {
                neg.push(row);
            } else {
                zero.push(row);
            }
        }
        for (ap, bp) in &pos {
            for (aq, bq) in &neg {
                let (wp, wq) = (-aq[j], ap[j]);
                let a: Vec<f64> = ap.iter().zip(aq).map(|(x, y)| wp * x + wq * y).collect();
                zero.push((a, wp * bp + wq * bq));
            }
        }
        rows = zero;
    }
    rows.iter().all(|(_, b)| *b <= 0.0)
}

fn random_system(rng: &mut impl Rng, m: usize, k: usize, eq: usize) -> (LinearSystem, Vec<(Vec<f64>, f64)>) {
    let mut sys = LinearSystem::new(m);
    let mut rows = Vec::new();
    for _ in 0..k {
        let a: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
        let b = rng.random_range(-4.0..4.0);
        if rng.random_bool(0.5) {
            sys.add_ge(a.clone(), b);
            rows.push((a, b));
        } else {
            sys.add_le(a.clone(), b);
            rows.push((a.iter().map(|v| -v).collect(), -b));
        }
    }
    for _ in 0..eq {
        let a: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
        let b = rng.random_range(-4.0..4.0);
        sys.add_eq(a.clone(), b);
        rows.push((a.iter().map(|v| -v).collect(), -b));
        rows.push((a, b));
    }
    (sys, rows)
}

#[test]
fn feasibility_matches_fourier_motzkin() {
    let mut rng = common::rng(11);
    let (mut checked, mut feasible) = (0, 0);
    for _ in 0..600 {
        let m = rng.random_range(1..=3);
        let k = rng.random_range(1..=7);
        let eq = rng.random_range(0..m);
        let (sys, rows) = random_system(&mut rng, m, k, eq);
        let loose = fm_feasible(rows.clone(), m, 1e-6);
        let tight = fm_feasible(rows, m, -1e-6);
        if loose != tight {
            continue;
        }
        checked += 1;
        let outcome = sys.solve(TOL).unwrap();
        assert_eq!(outcome.is_feasible(), loose, "{sys:?}");
        if let LpOutcome::Feasible { point, .. } = outcome {
            feasible += 1;
            for ineq in sys.inequalities() {
                assert!(ineq.slack(&point) >= -1e-7);
            }
        }
    }
    assert!(checked > 500 && feasible > 100 && checked - feasible > 100, "{checked} {feasible}");
}

#[test]
fn scaling_rows_keeps_status() {
    let mut rng = common::rng(12);
    for _ in 0..300 {
        let m = rng.random_range(1..=4);
        let k = rng.random_range(1..=8);
        let (sys, _) = random_system(&mut rng, m, k, 0);
        let mut scaled = LinearSystem::new(m);
        for ineq in sys.inequalities() {
            let lambda = 10f64.powf(rng.random_range(-3.0..3.0));
            scaled.add_inequality(ineq.coeffs.iter().map(|v| v * lambda).collect(), ineq.relation, ineq.rhs * lambda);
        }
        assert_eq!(sys.solve(TOL).unwrap().is_feasible(), scaled.solve(TOL).unwrap().is_feasible());
    }
}

#[test]
fn box_witness_lies_in_box_and_objective_hits_corner() {
    let mut rng = common::rng(13);
    for _ in 0..200 {
        let m = rng.random_range(1..=6);
        let lo: Vec<f64> = (0..m).map(|_| rng.random_range(-5.0..5.0)).collect();
        let hi: Vec<f64> = lo.iter().map(|l| l + rng.random_range(0.1..4.0)).collect();
        let mut sys = LinearSystem::new(m);
        for j in 0..m {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            sys.add_ge(e.clone(), lo[j]).add_le(e, hi[j]);
        }
        let x = sys.solve(TOL).unwrap().into_point().unwrap();
        for j in 0..m {
            assert!(x[j] >= lo[j] - 1e-9 && x[j] <= hi[j] + 1e-9);
        }
        let c: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let best: f64 = (0..m).map(|j| (c[j] * lo[j]).min(c[j] * hi[j])).sum();
        sys.set_objective(c, Direction::Minimize);
        match sys.solve(TOL).unwrap() {
            LpOutcome::Feasible { value, .. } => assert!((value - best).abs() < 1e-8),
            LpOutcome::Infeasible => panic!("box is feasible"),
        }
    }
}

#[test]
fn simplex_witness_is_the_barycentre() {
    for m in 1..=8 {
        let total = 3.0 * m as f64;
        let mut sys = LinearSystem::new(m);
        sys.add_eq(vec![1.0; m], total);
        for j in 0..m {
            sys.set_lower(j, 0.0);
        }
        let x = sys.solve(TOL).unwrap().into_point().unwrap();
        for xj in x {
            assert!((xj - 3.0).abs() < 1e-9);
        }
    }
}
