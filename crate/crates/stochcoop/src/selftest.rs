//! Golden examples plus a short seeded sweep.

use stochcoop_core::ssd::{dominates_closed_form, dominates_numeric, NumericVerdict};
use stochcoop_core::ssdcore::{
    dc_membership, dc_nonempty_dr_normal, dc_nonempty_dr_uniform, dc_nonempty_r, dr_condition_feasible, process_p,
    udc_membership_dr, unstructured_membership,
};
use stochcoop_core::{
    Allocation, ClassicalGame, Coalition, Distribution, Family, NewsvendorProblem, OracleConfig, StochasticGame,
};

use crate::harness;

#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn case(name: &str, check: impl FnOnce() -> Result<String, String>) -> Case {
    let (passed, detail) = match check() {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Case { name: name.to_string(), passed, detail }
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// The three-player lower-bound and mean games, with player 2's mean and the grand mean free.
pub fn three_player_games(mu2: f64, mu_n: f64) -> (ClassicalGame, ClassicalGame) {
    let lower = ClassicalGame::from_fn(3, |s| match s.mask() {
        0b011 | 0b110 | 0b111 => 3.0,
        _ => 0.0,
    })
    .unwrap();
    let mean = ClassicalGame::from_fn(3, |s| match s.mask() {
        0b001 | 0b100 => 5.0,
        0b010 => mu2,
        0b111 => mu_n,
        m => lower.value(Coalition::from_mask(m)),
    })
    .unwrap();
    (mean, lower)
}

/// Two players worth `N(10, 1)` alone and `N(2, 10)` together.
pub fn losing_pair() -> StochasticGame {
    StochasticGame::from_fn(2, |s| {
        if s.len() == 1 {
            Distribution::normal(10.0, 1.0).unwrap()
        } else {
            Distribution::normal(2.0, 10.0).unwrap()
        }
    })
    .unwrap()
}

/// Two vendors with `U[0,10]` demand each and `grand` pooled, at `p = 2`, `c = 1`.
pub fn two_vendors(grand: (f64, f64)) -> NewsvendorProblem {
    NewsvendorProblem::from_fn(2, |s| if s.len() == 1 { (0.0, 10.0) } else { grand }, 2.0, 1.0).unwrap()
}

fn golden(tol: f64) -> Vec<Case> {
    let mut cases = Vec::new();
    cases.push(case("alpha-cut moments and cdf", || {
        let d = Distribution::alpha_cut_uniform(-5.0, 5.0, 0.5).unwrap();
        ensure(d.mean() == 2.5 && d.cdf(0.0) == 0.25 && d.cdf(5.0) == 1.0, format!("mean {}", d.mean()))?;
        Ok(format!("mean {}, F(0) {}", d.mean(), d.cdf(0.0)))
    }));
    cases.push(case("alpha-cut dominance", || {
        let x = Distribution::alpha_cut_uniform(0.0, 5.0, 0.5).unwrap();
        let y = Distribution::alpha_cut_uniform(-5.0, 5.0, 0.5).unwrap();
        let cf = dominates_closed_form(&x, &y).map_err(|e| e.to_string())?;
        let nv = dominates_numeric(&x, &y, &OracleConfig::default()).verdict;
        ensure(cf && nv == NumericVerdict::True, format!("{cf} {nv:?}"))?;
        Ok("closed form and oracle agree".into())
    }));
    cases.push(case("three players, mean 2 for player 2", || {
        let (mean, lower) = three_player_games(2.0, 12.0);
        let w = dr_condition_feasible(&mean, &lower, tol).map_err(|e| e.to_string())?;
        ensure(w.is_none(), "expected empty")?;
        Ok("empty".into())
    }));
    cases.push(case("three players, mean 5 for player 2", || {
        let (mean, lower) = three_player_games(5.0, 15.0);
        let w = dr_condition_feasible(&mean, &lower, tol).map_err(|e| e.to_string())?;
        ensure(w.is_some(), "expected nonempty")?;
        let (d, r) = ([5.0, 5.0, 5.0], [5.0 / 12.0, 2.0 / 12.0, 5.0 / 12.0]);
        let gap = mean.grand_value() - lower.grand_value();
        let slack = Coalition::all_nonempty(3)
            .flat_map(|s| [s.sum(&d) - mean.value(s), s.sum(&d) - lower.value(s) - s.sum(&r) * gap])
            .fold(f64::INFINITY, f64::min);
        ensure(slack >= -1e-9, format!("slack {slack}"))?;
        Ok(format!("nonempty; given pair has slack {slack}"))
    }));
    cases.push(case("losing pair has an empty core", || {
        let g = losing_pair();
        ensure(dc_nonempty_dr_normal(&g, tol).map_err(|e| e.to_string())?.is_none(), "expected empty")?;
        Ok("empty".into())
    }));
    cases.push(case("losing pair undominated allocations", || {
        let g = losing_pair();
        let udc = |d: [f64; 2], r: [f64; 2]| udc_membership_dr(&g, &d, &r, tol).map_err(|e| e.to_string());
        ensure(udc([11.0, -9.0], [0.95, 0.05])?, "(11,-9) rejected")?;
        ensure(udc([-9.0, 11.0], [0.05, 0.95])?, "mirror rejected")?;
        ensure(!udc([1.0, 1.0], [0.5, 0.5])?, "(1,1) accepted")?;
        Ok("accepts (11,-9) and its mirror, rejects (1,1)".into())
    }));
    cases.push(case("normal pair with a witness", || {
        let g = StochasticGame::from_fn(2, |s| {
            if s.len() == 1 {
                Distribution::normal(1.0, 1.0).unwrap()
            } else {
                Distribution::normal(3.0, 4.0).unwrap()
            }
        })
        .unwrap();
        let (d, r) = dc_nonempty_dr_normal(&g, tol).map_err(|e| e.to_string())?.ok_or("expected a witness")?;
        ensure(dc_membership(&g, &Allocation::Dr { d, r }, 1e-8).map_err(|e| e.to_string())?, "not a member")?;
        let (m, c) = ([1.5, 1.5], [1.0, 1.0, 1.0, 1.0]);
        ensure(unstructured_membership(&g, &m, &c, tol).map_err(|e| e.to_string())?, "correlated split rejected")?;
        let wide = [5.0, 1.0, 1.0, 5.0];
        ensure(!unstructured_membership(&g, &m, &wide, tol).map_err(|e| e.to_string())?, "wide split accepted")?;
        Ok("witness is a member".into())
    }));
    cases.push(case("uniform pair", || {
        let g = StochasticGame::from_fn(2, |s| {
            if s.len() == 1 {
                Distribution::uniform(0.0, 2.0).unwrap()
            } else {
                Distribution::uniform(1.0, 5.0).unwrap()
            }
        })
        .unwrap();
        let rep = dc_nonempty_dr_uniform(&g, tol).map_err(|e| e.to_string())?;
        ensure(rep.nonempty && rep.theorem_consistent, "expected nonempty")?;
        let r = dc_nonempty_r(&g, tol).map_err(|e| e.to_string())?.ok_or("expected an r witness")?;
        ensure(dc_membership(&g, &Allocation::R { r }, 1e-8).map_err(|e| e.to_string())?, "r witness not a member")?;
        ensure(
            dc_membership(&g, &Allocation::R { r: vec![0.5, 0.5] }, tol).map_err(|e| e.to_string())?,
            "(0.5, 0.5) rejected",
        )?;
        Ok("nonempty for dr and r".into())
    }));
    cases.push(case("gamma pair needs r_i >= 1", || {
        let g = StochasticGame::from_fn(2, |s| Distribution::gamma(s.len() as f64, 1.0).unwrap()).unwrap();
        ensure(dc_nonempty_r(&g, tol).map_err(|e| e.to_string())?.is_none(), "expected empty")?;
        Ok("empty".into())
    }));
    cases.push(case("process P hand trace", || {
        let lower = ClassicalGame::new(2, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let (x, r) = process_p(&[1.5, 1.5], &lower, 3.0, tol).map_err(|e| e.to_string())?;
        ensure(x == [0.0, 1.0] && r == [0.75, 0.25], format!("x {x:?}, r {r:?}"))?;
        Ok("x = (0, 1), r = (0.75, 0.25)".into())
    }));
    cases.push(case("two vendors with pooling", || {
        let p = two_vendors((2.0, 18.0));
        let g = p.build_game().map_err(|e| e.to_string())?;
        ensure(*g.value(Coalition::singleton(0)) == Distribution::alpha_cut_uniform(-5.0, 5.0, 0.5).unwrap(), "v1")?;
        ensure(*g.grand_value() == Distribution::alpha_cut_uniform(-6.0, 10.0, 0.5).unwrap(), "vN")?;
        let rep = p.cooperation_feasible(tol).map_err(|e| e.to_string())?;
        let direct = p.cooperation_feasible_direct(tol).map_err(|e| e.to_string())?;
        ensure(rep.feasible && direct.feasible, "expected feasible")?;
        let ok = |r: f64| (5.0 / 12.0..=5.0 / 6.0).contains(&r);
        ensure(ok(0.5), "0.5 outside [5/12, 5/6]")?;
        Ok(format!("feasible, witness {:?}", rep.witness.unwrap()))
    }));
    cases.push(case("two vendors without pooling", || {
        let p = two_vendors((0.0, 10.0));
        let rep = p.cooperation_feasible(tol).map_err(|e| e.to_string())?;
        let direct = p.cooperation_feasible_direct(tol).map_err(|e| e.to_string())?;
        ensure(!rep.feasible && !direct.feasible, "expected infeasible")?;
        Ok("infeasible".into())
    }));
    cases
}

fn sweep(seed: u64, tol: f64) -> Vec<Case> {
    let mut rng = harness::rng(seed);
    let mut cases = Vec::new();
    cases.push(case("sweep: normal verdict equals the two classical cores", || {
        for k in 0..20 {
            let g = harness::normal_game(&mut rng, 2 + k % 4);
            let derived = g.derive_games();
            let dev = derived.deviation.ok_or("zero grand variance")?;
            let expected = derived.mean.core_nonempty(tol).map_err(|e| e.to_string())?.is_some()
                && dev.cost_core_nonempty(tol).map_err(|e| e.to_string())?.is_some();
            let got = dc_nonempty_dr_normal(&g, tol).map_err(|e| e.to_string())?;
            ensure(got.is_some() == expected, format!("instance {k}"))?;
        }
        Ok("20 games".into())
    }));
    cases.push(case("sweep: newsvendor routes agree", || {
        for k in 0..20 {
            let p = harness::newsvendor_problem(&mut rng, 1 + k % 4);
            let a = p.cooperation_feasible(tol).map_err(|e| e.to_string())?.feasible;
            let b = p.cooperation_feasible_direct(tol).map_err(|e| e.to_string())?.feasible;
            ensure(a == b, format!("instance {k}"))?;
        }
        Ok("20 problems".into())
    }));
    cases.push(case("sweep: uniform closed form matches the oracle", || {
        let cfg = OracleConfig::default();
        for k in 0..20 {
            let (x, y) = harness::dominance_pair(&mut rng, Family::Uniform);
            let cf = dominates_closed_form(&x, &y).map_err(|e| e.to_string())?;
            match dominates_numeric(&x, &y, &cfg).verdict {
                NumericVerdict::Borderline => {}
                v => ensure((v == NumericVerdict::True) == cf, format!("pair {k}"))?,
            }
        }
        Ok("20 pairs".into())
    }));
    cases
}

pub fn run(seed: u64, tol: f64) -> Vec<Case> {
    let mut cases = golden(tol);
    cases.extend(sweep(seed, tol));
    cases
}
