//! Linear programs.
//!
//! [`simplex_solve`] is a textbook two-phase primal simplex on a dense
//! tableau with Bland's anti-cycling rule. It is exact enough and easy to
//! audit, but its memory is `rows * cols`; [`solve`] hands larger programs
//! to the sparse interior-point solver of `clarabel`.

use std::fmt;

/// Pivot entries with magnitude at or below this are treated as zero.
pub const PIVOT_TOLERANCE: f64 = 1e-10;

/// Programs with more tableau cells than this go to the sparse backend.
pub const DENSE_CELL_LIMIT: usize = 250_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarBound {
    NonNegative,
    Free,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub bounds: Vec<VarBound>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The iterative backend stopped without a verdict.
    Numerical,
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
            LpStatus::Numerical => "numerically unresolved",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Variable values; empty unless optimal.
    pub values: Vec<f64>,
    pub objective: f64,
}

impl LpSolution {
    fn failed(status: LpStatus) -> Self {
        LpSolution {
            status,
            values: Vec::new(),
            objective: f64::NAN,
        }
    }
}

impl LpProblem {
    pub fn new(sense: Sense) -> Self {
        LpProblem {
            sense,
            objective: Vec::new(),
            bounds: Vec::new(),
            constraints: Vec::new(),
        }
    }

    /// Adds a variable with objective coefficient `cost`, returning its index.
    pub fn add_var(&mut self, cost: f64, bound: VarBound) -> usize {
        self.objective.push(cost);
        self.bounds.push(bound);
        self.objective.len() - 1
    }

    pub fn add_constraint(
        &mut self,
        coeffs: impl IntoIterator<Item = (usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) {
        let mut coeffs: Vec<(usize, f64)> = coeffs.into_iter().collect();
        coeffs.sort_by_key(|&(v, _)| v);
        coeffs.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        coeffs.retain(|&(_, c)| c != 0.0);
        debug_assert!(coeffs.iter().all(|&(v, _)| v < self.objective.len()));
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Largest constraint violation of `x` (0 when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().map(|&(v, a)| a * x[v]).sum();
            let viol = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        for (v, b) in self.bounds.iter().enumerate() {
            if *b == VarBound::NonNegative {
                worst = worst.max(-x[v]);
            }
        }
        worst
    }

    fn tableau_cells(&self) -> usize {
        let free = self.bounds.iter().filter(|b| **b == VarBound::Free).count();
        let rows = self.constraints.len();
        rows.saturating_mul(self.num_vars() + free + 2 * rows + 1)
    }
}

/// Solves with the dense simplex when the tableau is small, the sparse
/// backend otherwise.
pub fn solve(lp: &LpProblem) -> LpSolution {
    if lp.tableau_cells() <= DENSE_CELL_LIMIT {
        simplex_solve(lp)
    } else {
        sparse_solve(lp)
    }
}

/// Dense two-phase primal simplex with Bland's rule.
pub fn simplex_solve(lp: &LpProblem) -> LpSolution {
    // Column layout: one or two columns per user variable (free variables
    // are split into a positive and a negative part), then one slack or
    // surplus per inequality, then artificials.
    let mut col_of = Vec::with_capacity(lp.num_vars());
    let mut ncols = 0;
    for b in &lp.bounds {
        col_of.push(ncols);
        ncols += if *b == VarBound::Free { 2 } else { 1 };
    }
    let structural = ncols;
    let m = lp.constraints.len();

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut relations = Vec::with_capacity(m);
    for c in &lp.constraints {
        let mut row = vec![0.0; structural];
        for &(v, a) in &c.coeffs {
            row[col_of[v]] += a;
            if lp.bounds[v] == VarBound::Free {
                row[col_of[v] + 1] -= a;
            }
        }
        let (mut b, mut rel) = (c.rhs, c.relation);
        if b < 0.0 {
            row.iter_mut().for_each(|x| *x = -*x);
            b = -b;
            rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        rows.push(row);
        rhs.push(b);
        relations.push(rel);
    }

    let slack_count = relations.iter().filter(|r| **r != Relation::Eq).count();
    let art_count = relations.iter().filter(|r| **r != Relation::Le).count();
    let first_art = structural + slack_count;
    let width = first_art + art_count;
    let mut t = Tableau {
        rows: Vec::with_capacity(m),
        basis: vec![0; m],
        width,
    };
    let (mut next_slack, mut next_art) = (structural, first_art);
    for (i, mut row) in rows.into_iter().enumerate() {
        row.resize(width + 1, 0.0);
        row[width] = rhs[i];
        match relations[i] {
            Relation::Le => {
                row[next_slack] = 1.0;
                t.basis[i] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -1.0;
                next_slack += 1;
                row[next_art] = 1.0;
                t.basis[i] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = 1.0;
                t.basis[i] = next_art;
                next_art += 1;
            }
        }
        t.rows.push(row);
    }

    // Phase one: maximise minus the sum of artificials.
    if art_count > 0 {
        let mut cost = vec![0.0; width];
        cost[first_art..].iter_mut().for_each(|c| *c = -1.0);
        let mut z = t.reduced_costs(&cost);
        if t.optimize(&mut z, width) == Step::Unbounded {
            // Cannot happen: the phase-one objective is bounded by zero.
            return LpSolution::failed(LpStatus::Infeasible);
        }
        let infeasibility = z[width];
        let scale = 1.0 + rhs.iter().fold(0.0f64, |a, &b| a.max(b));
        if infeasibility > 1e-9 * scale {
            return LpSolution::failed(LpStatus::Infeasible);
        }
        // Drive remaining (zero-valued) artificials out of the basis.
        let mut redundant = Vec::new();
        for i in 0..m {
            if t.basis[i] >= first_art {
                match (0..first_art).find(|&j| t.rows[i][j].abs() > PIVOT_TOLERANCE) {
                    Some(j) => t.pivot(i, j, &mut z),
                    None => redundant.push(i),
                }
            }
        }
        for &i in redundant.iter().rev() {
            t.rows.remove(i);
            t.basis.remove(i);
        }
    }

    // Phase two over structural and slack columns only.
    let sign = if lp.sense == Sense::Maximize { 1.0 } else { -1.0 };
    let mut cost = vec![0.0; width];
    for (v, &c) in lp.objective.iter().enumerate() {
        cost[col_of[v]] = sign * c;
        if lp.bounds[v] == VarBound::Free {
            cost[col_of[v] + 1] = -sign * c;
        }
    }
    let mut z = t.reduced_costs(&cost);
    if t.optimize(&mut z, first_art) == Step::Unbounded {
        return LpSolution::failed(LpStatus::Unbounded);
    }

    let mut col_value = vec![0.0; width];
    for (i, &b) in t.basis.iter().enumerate() {
        col_value[b] = t.rows[i][width];
    }
    let values: Vec<f64> = (0..lp.num_vars())
        .map(|v| {
            let x = col_value[col_of[v]];
            if lp.bounds[v] == VarBound::Free {
                x - col_value[col_of[v] + 1]
            } else {
                x
            }
        })
        .collect();
    let objective = lp.objective.iter().zip(&values).map(|(c, x)| c * x).sum();
    LpSolution {
        status: LpStatus::Optimal,
        values,
        objective,
    }
}

#[derive(Debug, PartialEq, Eq)]
enum Step {
    Optimal,
    Unbounded,
}

struct Tableau {
    /// Constraint rows; the last entry of each row is its right-hand side.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    /// Objective row `z_j = c_j - c_B B^-1 A_j`; entry `width` holds `-c_B x_B`.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut z: Vec<f64> = cost.to_vec();
        z.push(0.0);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (zj, a) in z.iter_mut().zip(&self.rows[i]) {
                    *zj -= cb * a;
                }
            }
        }
        z
    }

    /// Bland's rule: lowest improving column enters, lowest-index basic
    /// variable breaks ratio ties. Columns at or beyond `limit` never enter.
    fn optimize(&mut self, z: &mut [f64], limit: usize) -> Step {
        loop {
            let Some(enter) = (0..limit).find(|&j| z[j] > PIVOT_TOLERANCE) else {
                return Step::Optimal;
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[enter];
                if a > PIVOT_TOLERANCE {
                    let ratio = row[self.width] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            if ratio < best - 1e-12
                                || (ratio <= best + 1e-12 && self.basis[i] < self.basis[k])
                            {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    }
                }
            }
            match leave {
                None => return Step::Unbounded,
                Some((i, _)) => self.pivot(i, enter, z),
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize, z: &mut [f64]) {
        let inv = 1.0 / self.rows[r][c];
        self.rows[r].iter_mut().for_each(|x| *x *= inv);
        self.rows[r][c] = 1.0;
        let nonzero: Vec<usize> = (0..=self.width)
            .filter(|&j| self.rows[r][j] != 0.0)
            .collect();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for &j in &nonzero {
                    row[j] -= f * pivot_row[j];
                }
                row[c] = 0.0;
            }
        }
        let f = z[c];
        if f != 0.0 {
            for &j in &nonzero {
                z[j] -= f * pivot_row[j];
            }
            z[c] = 0.0;
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }
}

/// Sparse interior-point solve via `clarabel`. Interior-point methods do
/// not pivot, so massively degenerate programs (the norm for Markov
/// models) cannot make them cycle. The optimum is accurate to about 1e-9
/// but need not be a vertex.
pub fn sparse_solve(lp: &LpProblem) -> LpSolution {
    let sol = interior_point(lp);
    if sol.status != LpStatus::Unbounded {
        return sol;
    }
    // A dual infeasibility certificate says nothing about the primal; the
    // program may be infeasible as well.
    let mut feasibility = lp.clone();
    feasibility.objective.iter_mut().for_each(|c| *c = 0.0);
    match interior_point(&feasibility).status {
        LpStatus::Optimal => sol,
        status => LpSolution::failed(status),
    }
}

fn interior_point(lp: &LpProblem) -> LpSolution {
    use clarabel::algebra::CscMatrix;
    use clarabel::solver::{
        DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SolverStatus,
        SupportedConeT, ZeroConeT,
    };

    let n = lp.num_vars();
    // Rows in the form `a x + s = b`: equalities (s = 0) first, then
    // inequalities and sign constraints (s >= 0).
    let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    for c in lp.constraints.iter().filter(|c| c.relation == Relation::Eq) {
        rows.push((c.coeffs.clone(), c.rhs));
    }
    let equalities = rows.len();
    for c in lp.constraints.iter().filter(|c| c.relation != Relation::Eq) {
        match c.relation {
            Relation::Le => rows.push((c.coeffs.clone(), c.rhs)),
            _ => rows.push((c.coeffs.iter().map(|&(v, a)| (v, -a)).collect(), -c.rhs)),
        }
    }
    for (v, b) in lp.bounds.iter().enumerate() {
        if *b == VarBound::NonNegative {
            rows.push((vec![(v, -1.0)], 0.0));
        }
    }

    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (r, (coeffs, _)) in rows.iter().enumerate() {
        for &(v, a) in coeffs {
            columns[v].push((r, a));
        }
    }
    let mut colptr = Vec::with_capacity(n + 1);
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    colptr.push(0);
    for col in &columns {
        for &(r, a) in col {
            rowval.push(r);
            nzval.push(a);
        }
        colptr.push(rowval.len());
    }
    let a = CscMatrix::new(rows.len(), n, colptr, rowval, nzval);
    let b: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let p = CscMatrix::zeros((n, n));
    let sign = if lp.sense == Sense::Maximize { -1.0 } else { 1.0 };
    let q: Vec<f64> = lp.objective.iter().map(|c| sign * c).collect();
    let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
    if equalities > 0 {
        cones.push(ZeroConeT(equalities));
    }
    if rows.len() > equalities {
        cones.push(NonnegativeConeT(rows.len() - equalities));
    }
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .tol_gap_abs(1e-10)
        .tol_gap_rel(1e-10)
        .tol_feas(1e-10)
        .max_iter(500)
        .build()
        .expect("static solver settings are valid");
    let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings);
    solver.solve();
    match solver.solution.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {
            let values = solver.solution.x.clone();
            LpSolution {
                status: LpStatus::Optimal,
                objective: lp.objective.iter().zip(&values).map(|(c, x)| c * x).sum(),
                values,
            }
        }
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            LpSolution::failed(LpStatus::Infeasible)
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
            LpSolution::failed(LpStatus::Unbounded)
        }
        _ => LpSolution::failed(LpStatus::Numerical),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bound() {
        let mut lp = LpProblem::new(Sense::Maximize);
        let x = lp.add_var(1.0, VarBound::NonNegative);
        lp.add_constraint([(x, 1.0)], Relation::Le, 3.0);
        let sol = simplex_solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_program_terminates() {
        let mut lp = LpProblem::new(Sense::Minimize);
        let x: Vec<usize> = [(2.0, false), (-1.0, true), (0.0, true), (0.0, false), (-1.0, false)]
            .iter()
            .map(|&(c, free)| lp.add_var(c, if free { VarBound::Free } else { VarBound::NonNegative }))
            .collect();
        lp.add_constraint([(x[2], 1.0), (x[3], 1.0)], Relation::Ge, 0.0);
        lp.add_constraint([(x[0], -2.0), (x[1], -1.0), (x[4], -1.0)], Relation::Ge, -3.0);
        lp.add_constraint([(x[1], -1.0)], Relation::Ge, -2.0);
        lp.add_constraint([(x[0], -2.0), (x[2], 1.0)], Relation::Ge, 2.0);
        let dense = simplex_solve(&lp);
        let sparse = sparse_solve(&lp);
        assert_eq!(dense.status, LpStatus::Optimal);
        assert!((dense.objective + 3.0).abs() < 1e-9);
        assert!((sparse.objective + 3.0).abs() < 1e-7);
    }

    #[test]
    fn infeasible_pair() {
        let mut lp = LpProblem::new(Sense::Maximize);
        let x = lp.add_var(1.0, VarBound::NonNegative);
        lp.add_constraint([(x, 1.0)], Relation::Le, 0.0);
        lp.add_constraint([(x, 1.0)], Relation::Ge, 1.0);
        assert_eq!(simplex_solve(&lp).status, LpStatus::Infeasible);
        assert_eq!(sparse_solve(&lp).status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_free() {
        let mut lp = LpProblem::new(Sense::Minimize);
        let x = lp.add_var(1.0, VarBound::Free);
        lp.add_constraint([(x, 1.0)], Relation::Le, 5.0);
        assert_eq!(simplex_solve(&lp).status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variable_goes_negative() {
        // min x + y  s.t.  x - y = -2, y <= 1, x free
        let mut lp = LpProblem::new(Sense::Minimize);
        let x = lp.add_var(1.0, VarBound::Free);
        let y = lp.add_var(1.0, VarBound::NonNegative);
        lp.add_constraint([(x, 1.0), (y, -1.0)], Relation::Eq, -2.0);
        lp.add_constraint([(y, 1.0)], Relation::Le, 1.0);
        let dense = simplex_solve(&lp);
        let sparse = sparse_solve(&lp);
        assert_eq!(dense.status, LpStatus::Optimal);
        assert!((dense.values[0] + 2.0).abs() < 1e-9);
        assert!((dense.objective - sparse.objective).abs() < 1e-9);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LpProblem::new(Sense::Maximize);
        let x = lp.add_var(1.0, VarBound::NonNegative);
        let y = lp.add_var(2.0, VarBound::NonNegative);
        lp.add_constraint([(x, 1.0), (y, 1.0)], Relation::Eq, 4.0);
        lp.add_constraint([(x, 2.0), (y, 2.0)], Relation::Eq, 8.0);
        let sol = simplex_solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 8.0).abs() < 1e-9);
    }
}
