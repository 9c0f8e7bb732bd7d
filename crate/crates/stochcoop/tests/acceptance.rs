//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::time::{Duration, Instant};

use rand::Rng;
use stochcoop::harness;
use stochcoop::selftest::{losing_pair, three_player_games, two_vendors};
use stochcoop_core::ssd::{alpha_cut_conditions, dominates_closed_form, dominates_numeric, uniform_conditions};
use stochcoop_core::ssdcore::{
    dc_membership, dc_nonempty_dr_normal, dc_nonempty_dr_uniform, dr_condition_feasible, process_p, udc_membership_dr,
};
use stochcoop_core::{Allocation, ClassicalGame, Coalition, Distribution, Family, NumericVerdict, OracleConfig};

const TOL: f64 = 1e-9;
const MEMBER_TOL: f64 = 1e-8;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn three_player_golden() -> Outcome {
    let (mean, lower) = three_player_games(2.0, 12.0);
    let original_empty = dr_condition_feasible(&mean, &lower, TOL).unwrap().is_none();
    let (mean, lower) = three_player_games(5.0, 15.0);
    let raised_nonempty = dr_condition_feasible(&mean, &lower, TOL).unwrap().is_some();
    let d = [5.0, 5.0, 5.0];
    let r = [5.0 / 12.0, 2.0 / 12.0, 5.0 / 12.0];
    let gap = mean.grand_value() - lower.grand_value();
    let mut slack = -(d.iter().sum::<f64>() - mean.grand_value()).abs().max((r.iter().sum::<f64>() - 1.0).abs());
    for s in Coalition::all_nonempty(3) {
        slack = slack.min(s.sum(&d) - mean.value(s)).min(s.sum(&d) - lower.value(s) - s.sum(&r) * gap);
    }
    slack = slack.min(r.iter().copied().fold(f64::INFINITY, f64::min));
    outcome(
        original_empty && raised_nonempty && slack >= -1e-9,
        format!("original empty {original_empty}, raised nonempty {raised_nonempty}, given pair min slack {slack:e}"),
    )
}

fn losing_pair_golden() -> Outcome {
    let g = losing_pair();
    let empty = dc_nonempty_dr_normal(&g, TOL).unwrap().is_none();
    let accepts = udc_membership_dr(&g, &[11.0, -9.0], &[0.95, 0.05], TOL).unwrap();
    let mirror = udc_membership_dr(&g, &[-9.0, 11.0], &[0.05, 0.95], TOL).unwrap();
    let rejects = !udc_membership_dr(&g, &[1.0, 1.0], &[0.5, 0.5], TOL).unwrap();
    outcome(
        empty && accepts && mirror && rejects,
        format!("core empty {empty}, accepts {accepts}, mirror {mirror}, rejects (1,1) {rejects}"),
    )
}

fn normal_equivalence() -> Outcome {
    let mut rng = harness::rng(1003);
    let (mut agree, mut members, mut nonempty) = (0, 0, 0);
    for k in 0..300 {
        let n = 2 + k % 5;
        let g = harness::normal_game(&mut rng, n);
        let sd = |s: Coalition| g.value(s).variance().sqrt();
        let sigma_n = sd(Coalition::grand(n));
        let mu = ClassicalGame::from_fn(n, |s| g.value(s).mean()).unwrap();
        let sigma_hat = ClassicalGame::from_fn(n, |s| sd(s) / sigma_n).unwrap();
        let expected = mu.core_nonempty(TOL).unwrap().is_some() && sigma_hat.cost_core_nonempty(TOL).unwrap().is_some();
        let got = dc_nonempty_dr_normal(&g, TOL).unwrap();
        agree += (got.is_some() == expected) as usize;
        if let Some((d, r)) = got {
            nonempty += 1;
            members += dc_membership(&g, &Allocation::Dr { d, r }, MEMBER_TOL).unwrap() as usize;
        }
    }
    outcome(
        agree == 300 && members == nonempty,
        format!("{agree}/300 verdicts agree, {members}/{nonempty} witnesses are members"),
    )
}

fn uniform_directions() -> Outcome {
    let mut rng = harness::rng(1004);
    let (mut necessity_bad, mut sufficient, mut sufficient_bad, mut nonempty) = (0, 0, 0, 0);
    for k in 0..300 {
        let n = 1 + k % 6;
        let g = harness::uniform_game(&mut rng, n);
        let mean = g.mean_game();
        let lower = g.lower_bound_game().unwrap();
        let rep = dc_nonempty_dr_uniform(&g, TOL).unwrap();
        let mean_ok = mean.core_nonempty(TOL).unwrap();
        let lower_ok = lower.core_nonempty(TOL).unwrap().is_some();
        if rep.nonempty {
            nonempty += 1;
            necessity_bad += !(mean_ok.is_some() && lower_ok) as usize;
        }
        if let (true, Some(d)) = (lower.is_convex(), mean_ok) {
            sufficient += 1;
            let ok = rep.nonempty
                && match process_p(&d, &lower, mean.grand_value(), TOL) {
                    Ok((x, r)) => {
                        lower.core_membership(&x, MEMBER_TOL).unwrap()
                            && (lower.grand().sum(&x) - lower.grand_value()).abs() <= MEMBER_TOL
                            && r.iter().all(|&ri| ri >= -MEMBER_TOL)
                            && (r.iter().sum::<f64>() - 1.0).abs() <= MEMBER_TOL
                            && dc_membership(&g, &Allocation::Dr { d, r }, MEMBER_TOL).unwrap()
                    }
                    Err(_) => false,
                };
            sufficient_bad += !ok as usize;
        }
    }
    outcome(
        necessity_bad == 0 && sufficient_bad == 0 && sufficient > 0,
        format!(
            "{nonempty} nonempty with {necessity_bad} necessity violations; \
             {sufficient} convex-and-balanced with {sufficient_bad} violations"
        ),
    )
}

fn pinned_counterexamples() -> Outcome {
    let mut rng = harness::rng(1005);
    let (mut built, mut empty, mut attempts) = (0, 0, 0);
    while built < 50 && attempts < 100_000 {
        attempts += 1;
        let Some(inst) = harness::pinned_instance(&mut rng) else { continue };
        built += 1;
        let premise = inst.lower.core_nonempty(TOL).unwrap().is_some()
            && inst.mean.core_nonempty(TOL).unwrap().is_some()
            && inst.lower.core_min_coordinate(inst.player, TOL).unwrap()
                > inst.lower.value(Coalition::singleton(inst.player));
        empty += (premise && dr_condition_feasible(&inst.mean, &inst.lower, TOL).unwrap().is_none()) as usize;
    }
    outcome(built == 50 && empty == 50, format!("{empty}/{built} constructed instances are empty ({attempts} draws)"))
}

fn oracle_agreement() -> Outcome {
    let cfg = OracleConfig::default();
    let mut rng = harness::rng(1006);
    let mut pass = true;
    let mut parts = Vec::new();
    for family in [Family::Normal, Family::Uniform, Family::AlphaCutUniform, Family::DiscreteUniform, Family::Gamma] {
        let (mut mismatch, mut borderline) = (0, 0);
        for _ in 0..200 {
            let (x, y) = harness::dominance_pair(&mut rng, family);
            let cf = dominates_closed_form(&x, &y).unwrap();
            match dominates_numeric(&x, &y, &cfg).verdict {
                NumericVerdict::Borderline => borderline += 1,
                v => mismatch += ((v == NumericVerdict::True) != cf) as usize,
            }
        }
        if family == Family::Gamma {
            parts.push(format!("gamma (informational) {mismatch} mismatches, {borderline} borderline"));
        } else {
            pass &= mismatch == 0 && borderline * 20 < 200;
            parts.push(format!("{} {mismatch} mismatches, {borderline} borderline", family.name()));
        }
    }
    outcome(pass, parts.join("; "))
}

fn newsvendor_equivalence() -> Outcome {
    let mut rng = harness::rng(1007);
    let mut agree = 0;
    for k in 0..200 {
        let prob = harness::newsvendor_problem(&mut rng, 1 + k % 5);
        let a = prob.cooperation_feasible(TOL).unwrap().feasible;
        let b = prob.cooperation_feasible_direct(TOL).unwrap().feasible;
        agree += (a == b) as usize;
    }
    let worked = two_vendors((2.0, 18.0));
    let feasible = worked.cooperation_feasible(TOL).unwrap().feasible;
    // Singleton rows: r·protection(N) >= protection(S) and r·weighted(N) >= weighted(S).
    let (grand, one) = (Coalition::grand(2), Coalition::singleton(0));
    let weighted = |s: Coalition| {
        let (a, b) = worked.demand(s);
        a * (worked.price() + worked.cost()) + b * (worked.price() - worked.cost())
    };
    let upper = worked.protection(one) / worked.protection(grand);
    let lower = weighted(one) / weighted(grand);
    let bounds = (lower - 5.0 / 12.0).abs() < 1e-12 && (upper - 5.0 / 6.0).abs() < 1e-12;
    let half_ok = (lower..=upper).contains(&0.5);
    let no_pooling = !two_vendors((0.0, 10.0)).cooperation_feasible(TOL).unwrap().feasible;
    outcome(
        agree == 200 && feasible && bounds && half_ok && no_pooling,
        format!(
            "{agree}/200 agree; worked instance feasible {feasible}, r_i in [{lower:.6}, {upper:.6}], \
             no-pooling infeasible {no_pooling}"
        ),
    )
}

fn alpha_one_reduction() -> Outcome {
    let mut rng = harness::rng(1008);
    let mut equal = 0;
    for _ in 0..100 {
        let mut ends = || {
            let a = rng.random_range(-100.0..100.0);
            (a, a + rng.random_range(0.001..50.0))
        };
        let (x, y) = (ends(), ends());
        let cut = alpha_cut_conditions(x, y, 1.0);
        let plain = uniform_conditions(x, y);
        let same = cut.iter().zip(&plain).all(|(c, u)| {
            (c.lhs - u.lhs).abs() <= f64::EPSILON * u.lhs.abs() && (c.rhs - u.rhs).abs() <= f64::EPSILON * u.rhs.abs()
        });
        equal += same as usize;
    }
    outcome(equal == 100, format!("{equal}/100 draws equal"))
}

fn alpha_cut_monte_carlo() -> Outcome {
    const SAMPLES: usize = 1_000_000;
    let mut rng = harness::rng(1009);
    let mut worst: f64 = 0.0;
    let mut ok = 0;
    for _ in 0..20 {
        let a = rng.random_range(-20.0..20.0);
        let b = a + rng.random_range(0.1..30.0);
        let alpha = rng.random_range(0.02..0.98);
        let law = Distribution::alpha_cut_uniform(a, b, alpha).unwrap();
        // Sampler: the jump at b has mass 1 − alpha, the rest is uniform on [a, b).
        let xs: Vec<f64> =
            (0..SAMPLES).map(|_| if rng.random_bool(alpha) { rng.random_range(a..b) } else { b }).collect();
        let m = SAMPLES as f64;
        let mean = xs.iter().sum::<f64>() / m;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / m;
        let mut z: Vec<f64> = vec![
            (mean - law.mean()).abs() / (law.variance() / m).sqrt(),
            (var - law.variance()).abs() / ((m4 - var * var) / m).sqrt(),
        ];
        for t in [0.1, 0.5, 0.9].map(|u| a + u * (b - a)) {
            let f = law.cdf(t);
            let emp = xs.iter().filter(|&&x| x <= t).count() as f64 / m;
            z.push((emp - f).abs() / (f * (1.0 - f) / m).sqrt());
        }
        let max_z = z.into_iter().fold(0.0, f64::max);
        worst = worst.max(max_z);
        ok += (max_z <= 4.0) as usize;
    }
    outcome(ok == 20, format!("{ok}/20 parameter sets within 4 SE (largest z {worst:.2})"))
}

type Criterion = (&'static str, fn() -> Outcome, u64);

fn main() {
    let criteria: [Criterion; 9] = [
        ("three-player golden instances", three_player_golden, 1),
        ("two-player normal golden instance", losing_pair_golden, 1),
        ("normal decision equals the two classical cores", normal_equivalence, 30),
        ("uniform decision necessity and sufficiency", uniform_directions, 60),
        ("pinned-player instances are empty", pinned_counterexamples, 60),
        ("closed-form dominance matches the integral oracle", oracle_agreement, 60),
        ("newsvendor routes agree", newsvendor_equivalence, 60),
        ("alpha = 1 reduces to the uniform conditions", alpha_one_reduction, 1),
        ("alpha-cut moments and CDF match sampling", alpha_cut_monte_carlo, 60),
    ];
    let mut failed = 0;
    let total = Instant::now();
    for (k, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let pass = out.pass && in_time;
        failed += !pass as usize;
        println!(
            "criterion {} {}: {} ({}; {:.2}s of {}s)",
            k + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            budget
        );
    }
    let total = total.elapsed().as_secs_f64();
    println!("acceptance: {} of 9 passed in {total:.1}s", 9 - failed);
    if failed > 0 || total > 180.0 {
        std::process::exit(1);
    }
}
