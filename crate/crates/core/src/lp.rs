//! Linear feasibility and optimization kernel.
//!
//! Without an objective, [`LinearSystem::solve`] maximizes the smallest
//! inequality slack `t` (capped at [`SLACK_CAP`]) and reports a feasible witness
//! iff `t >= -tol`, which keeps witnesses away from the boundary when the
//! feasible set has an interior.
//!
//! Internally the program `max cᵀz s.t. Gz >= h, Ez = e` (z free) is solved
//! through its dual `min qᵀy s.t. My = c, y >= 0` with a dense two-phase
//! tableau simplex using Bland's rule. The tableau has one row per primal
//! variable and one column per constraint, which suits the coalition programs:
//! few variables, up to `2ⁿ` constraints. The primal point is read off the
//! simplex multipliers of the optimal dual basis.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

/// Upper bound on the max-min slack variable in feasibility mode.
pub const SLACK_CAP: f64 = 1e6;

const PIVOT_EPS: f64 = 1e-10;
const COST_EPS: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    LessEq,
    GreaterEq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inequality {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Inequality {
    /// Signed slack at `x`: nonnegative iff the inequality holds.
    pub fn slack(&self, x: &[f64]) -> f64 {
        let lhs = dot(&self.coeffs, x);
        match self.relation {
            Relation::GreaterEq => lhs - self.rhs,
            Relation::LessEq => self.rhs - lhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("coefficient vector has length {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite coefficient or right-hand side")]
    NonFinite,
    #[error("objective is unbounded")]
    Unbounded,
    #[error("simplex iteration limit reached")]
    IterationLimit,
    #[error("solution failed re-verification (residual {residual:e})")]
    NumericalFailure { residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    /// `value` is the objective at `point`, or the max-min slack in feasibility mode.
    Feasible {
        point: Vec<f64>,
        value: f64,
    },
    Infeasible,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Feasible { .. })
    }

    pub fn into_point(self) -> Option<Vec<f64>> {
        match self {
            LpOutcome::Feasible { point, .. } => Some(point),
            LpOutcome::Infeasible => None,
        }
    }
}

/// Linear constraints over `num_vars` real variables, with an optional objective.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    num_vars: usize,
    inequalities: Vec<Inequality>,
    equalities: Vec<(Vec<f64>, f64)>,
    lower: Vec<Option<f64>>,
    upper: Vec<Option<f64>>,
    objective: Option<(Vec<f64>, Direction)>,
}

impl LinearSystem {
    pub fn new(num_vars: usize) -> Self {
        LinearSystem {
            num_vars,
            inequalities: Vec::new(),
            equalities: Vec::new(),
            lower: vec![None; num_vars],
            upper: vec![None; num_vars],
            objective: None,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn inequalities(&self) -> &[Inequality] {
        &self.inequalities
    }

    pub fn equalities(&self) -> &[(Vec<f64>, f64)] {
        &self.equalities
    }

    pub fn add_inequality(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.inequalities.push(Inequality { coeffs, relation, rhs });
        self
    }

    pub fn add_ge(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.add_inequality(coeffs, Relation::GreaterEq, rhs)
    }

    pub fn add_le(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.add_inequality(coeffs, Relation::LessEq, rhs)
    }

    pub fn add_eq(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.equalities.push((coeffs, rhs));
        self
    }

    /// # Panics
    /// If `var >= num_vars`.
    pub fn set_lower(&mut self, var: usize, bound: f64) -> &mut Self {
        self.lower[var] = Some(bound);
        self
    }

    /// # Panics
    /// If `var >= num_vars`.
    pub fn set_upper(&mut self, var: usize, bound: f64) -> &mut Self {
        self.upper[var] = Some(bound);
        self
    }

    pub fn set_objective(&mut self, coeffs: Vec<f64>, direction: Direction) -> &mut Self {
        self.objective = Some((coeffs, direction));
        self
    }

    pub fn clear_objective(&mut self) -> &mut Self {
        self.objective = None;
        self
    }

    fn check(&self) -> Result<(), LpError> {
        let m = self.num_vars;
        let check_vec = |v: &[f64]| -> Result<(), LpError> {
            if v.len() != m {
                return Err(LpError::DimensionMismatch { expected: m, found: v.len() });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(LpError::NonFinite);
            }
            Ok(())
        };
        for ineq in &self.inequalities {
            check_vec(&ineq.coeffs)?;
            if !ineq.rhs.is_finite() {
                return Err(LpError::NonFinite);
            }
        }
        for (coeffs, rhs) in &self.equalities {
            check_vec(coeffs)?;
            if !rhs.is_finite() {
                return Err(LpError::NonFinite);
            }
        }
        if let Some((c, _)) = &self.objective {
            check_vec(c)?;
        }
        let bounds_finite = self.lower.iter().chain(self.upper.iter()).flatten().all(|b| b.is_finite());
        if !bounds_finite {
            return Err(LpError::NonFinite);
        }
        Ok(())
    }

    /// All one-sided constraints (inequalities, then bounds) in `g·x >= h` form.
    fn ge_rows(&self) -> Vec<(Vec<f64>, f64)> {
        let m = self.num_vars;
        let mut rows = Vec::with_capacity(self.inequalities.len() + 2 * m);
        for ineq in &self.inequalities {
            match ineq.relation {
                Relation::GreaterEq => rows.push((ineq.coeffs.clone(), ineq.rhs)),
                Relation::LessEq => rows.push((ineq.coeffs.iter().map(|a| -a).collect(), -ineq.rhs)),
            }
        }
        for j in 0..m {
            if let Some(l) = self.lower[j] {
                let mut g = vec![0.0; m];
                g[j] = 1.0;
                rows.push((g, l));
            }
            if let Some(u) = self.upper[j] {
                let mut g = vec![0.0; m];
                g[j] = -1.0;
                rows.push((g, -u));
            }
        }
        rows
    }

    /// Solves the system. See the module docs for the two modes.
    pub fn solve(&self, tol: f64) -> Result<LpOutcome, LpError> {
        self.check()?;
        let feasibility = self.max_min_slack(tol)?;
        let Some((c, direction)) = &self.objective else {
            return Ok(feasibility);
        };
        if !feasibility.is_feasible() {
            return Ok(LpOutcome::Infeasible);
        }
        let sign = match direction {
            Direction::Maximize => 1.0,
            Direction::Minimize => -1.0,
        };
        let objective: Vec<f64> = c.iter().map(|v| sign * v).collect();
        let rows = self.ge_rows();
        let z = match solve_via_dual(&rows, &self.equalities, &objective)? {
            DualResult::Optimal(z) => z,
            DualResult::DualInfeasible => return Err(LpError::Unbounded),
            // Already known feasible; the dual ray is numerical noise.
            DualResult::DualUnbounded => return Ok(LpOutcome::Infeasible),
        };
        self.verify(&z, tol)?;
        let value = dot(c, &z);
        Ok(LpOutcome::Feasible { point: z, value })
    }

    fn max_min_slack(&self, tol: f64) -> Result<LpOutcome, LpError> {
        let m = self.num_vars;
        let t = m;
        let mut rows: Vec<(Vec<f64>, f64)> = self
            .ge_rows()
            .into_iter()
            .map(|(mut g, h)| {
                g.push(-1.0);
                (g, h)
            })
            .collect();
        let mut cap = vec![0.0; m + 1];
        cap[t] = -1.0;
        rows.push((cap, -SLACK_CAP));
        let equalities: Vec<(Vec<f64>, f64)> = self
            .equalities
            .iter()
            .map(|(a, e)| {
                let mut a = a.clone();
                a.push(0.0);
                (a, *e)
            })
            .collect();
        let mut objective = vec![0.0; m + 1];
        objective[t] = 1.0;
        let mut z = match solve_via_dual(&rows, &equalities, &objective)? {
            DualResult::Optimal(z) => z,
            DualResult::DualUnbounded => return Ok(LpOutcome::Infeasible),
            DualResult::DualInfeasible => return Err(LpError::NumericalFailure { residual: f64::NAN }),
        };
        let slack = z.pop().unwrap_or(SLACK_CAP);
        if slack < -tol {
            return Ok(LpOutcome::Infeasible);
        }
        self.verify(&z, tol)?;
        Ok(LpOutcome::Feasible { point: z, value: slack })
    }

    /// Re-checks every constraint at `x` with a magnitude-scaled tolerance.
    fn verify(&self, x: &[f64], tol: f64) -> Result<(), LpError> {
        let scaled = |coeffs: &[f64], rhs: f64| -> f64 {
            let mag = coeffs.iter().zip(x).map(|(a, v)| libm::fabs(a * v)).sum::<f64>();
            tol * libm::fmax(1.0, libm::fmax(libm::fabs(rhs), mag))
        };
        for (g, h) in self.ge_rows() {
            let residual = h - dot(&g, x);
            if residual > scaled(&g, h) {
                return Err(LpError::NumericalFailure { residual });
            }
        }
        for (a, e) in &self.equalities {
            let residual = libm::fabs(dot(a, x) - e);
            if residual > scaled(a, *e) {
                return Err(LpError::NumericalFailure { residual });
            }
        }
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

enum DualResult {
    Optimal(Vec<f64>),
    /// The dual has no feasible point: the primal is infeasible or unbounded.
    DualInfeasible,
    /// The dual is unbounded below: the primal is infeasible.
    DualUnbounded,
}

/// Dense simplex tableau in row-major order; the last column is the right-hand side.
struct Tableau {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cols + 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width() + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width();
        let p = self.data[pr * w + pc];
        for v in &mut self.data[pr * w..(pr + 1) * w] {
            *v /= p;
        }
        let (before, rest) = self.data.split_at_mut(pr * w);
        let (pivot_row, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[pc];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(pivot_row.iter()) {
                    *v -= f * pv;
                }
                row[pc] = 0.0;
            }
        }
        self.basis[pr] = pc;
    }

    /// Bland-rule simplex minimizing `cost` over columns where `enterable` holds.
    fn minimize(&mut self, cost: &[f64], enterable: usize, max_iter: usize) -> Result<bool, LpError> {
        for _ in 0..max_iter {
            let entering = (0..enterable).find(|&j| {
                let mut reduced = cost[j];
                for r in 0..self.rows {
                    let a = self.at(r, j);
                    if a != 0.0 {
                        reduced -= cost[self.basis[r]] * a;
                    }
                }
                reduced < -COST_EPS
            });
            let Some(j) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, j);
                if a > PIVOT_EPS {
                    let ratio = libm::fmax(self.rhs(r), 0.0) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((br, best)) => {
                            let slack = 1e-12 * (1.0 + libm::fabs(best));
                            if ratio < best - slack || (ratio <= best + slack && self.basis[r] < self.basis[br]) {
                                Some((r, ratio))
                            } else {
                                Some((br, best))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, j),
                None => return Ok(false),
            }
        }
        Err(LpError::IterationLimit)
    }
}

/// Solves `max cᵀz s.t. G z >= h, E z = e` through its dual.
fn solve_via_dual(
    ge_rows: &[(Vec<f64>, f64)],
    equalities: &[(Vec<f64>, f64)],
    c: &[f64],
) -> Result<DualResult, LpError> {
    let k = c.len();
    // Dual columns: one per >= row (entries -g, cost -h), two per equality (±a, cost ±e).
    let mut columns: Vec<(&[f64], f64, f64)> = Vec::with_capacity(ge_rows.len() + 2 * equalities.len());
    for (g, h) in ge_rows {
        columns.push((g, -1.0, -h));
    }
    for (a, e) in equalities {
        columns.push((a, 1.0, *e));
        columns.push((a, -1.0, -e));
    }
    let n_real = columns.len();
    let cols = n_real + k;
    let width = cols + 1;
    let signs: Vec<f64> = c.iter().map(|&ci| if ci < 0.0 { -1.0 } else { 1.0 }).collect();
    let mut data = vec![0.0; k * width];
    for i in 0..k {
        let row = &mut data[i * width..(i + 1) * width];
        for (j, (coeffs, mult, _)) in columns.iter().enumerate() {
            row[j] = signs[i] * mult * coeffs[i];
        }
        row[n_real + i] = 1.0;
        row[cols] = libm::fabs(c[i]);
    }
    let mut tableau = Tableau { rows: k, cols, data, basis: (n_real..cols).collect() };
    let max_iter = 200_000 + 50 * (k + cols);

    let mut phase1_cost = vec![0.0; cols];
    for v in &mut phase1_cost[n_real..] {
        *v = 1.0;
    }
    tableau.minimize(&phase1_cost, n_real, max_iter)?;
    let infeasibility: f64 = (0..k).filter(|&r| tableau.basis[r] >= n_real).map(|r| tableau.rhs(r)).sum();
    let c_scale = c.iter().fold(1.0_f64, |m, v| libm::fmax(m, libm::fabs(*v)));
    if infeasibility > 1e-9 * c_scale {
        return Ok(DualResult::DualInfeasible);
    }
    // Drive zero-level artificials out of the basis; rows with no real entry are redundant.
    for r in 0..k {
        if tableau.basis[r] < n_real {
            continue;
        }
        if let Some(j) = (0..n_real).find(|&j| libm::fabs(tableau.at(r, j)) > 1e-9) {
            let w = tableau.width();
            tableau.data[r * w + cols] = 0.0;
            tableau.pivot(r, j);
        }
    }

    let mut phase2_cost = vec![0.0; cols];
    for (j, (_, _, q)) in columns.iter().enumerate() {
        phase2_cost[j] = *q;
    }
    if !tableau.minimize(&phase2_cost, n_real, max_iter)? {
        return Ok(DualResult::DualUnbounded);
    }
    // Simplex multipliers: pi = c_B^T B^{-1}; B^{-1} sits in the artificial block.
    let z = (0..k)
        .map(|i| {
            let pi: f64 = (0..k).map(|r| phase2_cost[tableau.basis[r]] * tableau.at(r, n_real + i)).sum();
            signs[i] * pi
        })
        .collect();
    Ok(DualResult::Optimal(z))
}
