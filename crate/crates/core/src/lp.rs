//! Small dense linear programming.
//!
//! Every polyhedral decision in the crate (support values, feasibility,
//! conjugate values, witness construction) goes through [`Lp`]. Problems are
//! tiny (tens of rows), so a dense two-phase tableau simplex is used:
//! Dantzig pricing, switching to Bland's rule after a run of degenerate
//! pivots so the method cannot cycle.

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<(Vec<f64>, f64)> {
        match self {
            LpOutcome::Optimal { x, objective } => Some((x, objective)),
            _ => None,
        }
    }
}

/// A minimization problem over continuous variables.
#[derive(Clone, Debug, Default)]
pub struct Lp {
    objective: Vec<f64>,
    bounds: Vec<(f64, f64)>,
    rows: Vec<(Vec<(usize, f64)>, Cmp, f64)>,
    trivially_infeasible: bool,
}

const ZERO_ROW_TOL: f64 = 1e-12;
const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;
const DEGENERATE_RUN: usize = 50;
const MAX_PIVOTS: usize = 50_000;

impl Lp {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable with objective coefficient `c` and bounds `[lo, hi]`
    /// (infinite bounds allowed); returns its index.
    pub fn var(&mut self, c: f64, lo: f64, hi: f64) -> usize {
        self.objective.push(c);
        self.bounds.push((lo, hi));
        self.objective.len() - 1
    }

    pub fn free_var(&mut self, c: f64) -> usize {
        self.var(c, f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Adds `count` consecutive free variables and returns the first index.
    pub fn free_vars(&mut self, count: usize) -> usize {
        let first = self.objective.len();
        for _ in 0..count {
            self.free_var(0.0);
        }
        first
    }

    pub fn set_objective(&mut self, var: usize, c: f64) {
        self.objective[var] = c;
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constraint(&mut self, terms: &[(usize, f64)], cmp: Cmp, rhs: f64) {
        let terms: Vec<(usize, f64)> = terms
            .iter()
            .copied()
            .filter(|t| t.1.abs() > ZERO_ROW_TOL)
            .collect();
        if terms.is_empty() {
            let ok = match cmp {
                Cmp::Le => 0.0 <= rhs + ZERO_ROW_TOL,
                Cmp::Ge => 0.0 >= rhs - ZERO_ROW_TOL,
                Cmp::Eq => rhs.abs() <= ZERO_ROW_TOL,
            };
            if !ok {
                self.trivially_infeasible = true;
            }
            return;
        }
        self.rows.push((terms, cmp, rhs));
    }

    /// `coeffs·x[first..first+len] (cmp) rhs` for a dense coefficient block.
    pub fn dense(&mut self, first: usize, coeffs: &[f64], cmp: Cmp, rhs: f64) {
        let terms: Vec<(usize, f64)> =
            coeffs.iter().enumerate().map(|(i, &c)| (first + i, c)).collect();
        self.constraint(&terms, cmp, rhs);
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        if self.trivially_infeasible
            || self.bounds.iter().any(|&(lo, hi)| lo > hi + ZERO_ROW_TOL)
        {
            return Ok(LpOutcome::Infeasible);
        }
        Ok(StandardForm::build(self).solve())
    }
}

/// How an original variable is expressed through non-negative columns.
#[derive(Clone, Copy)]
enum VarMap {
    Shift { col: usize, lo: f64 },
    Mirror { col: usize, hi: f64 },
    Split { pos: usize, neg: usize },
}

struct StandardForm {
    map: Vec<VarMap>,
    /// Rows `a·y = b` with `b ≥ 0` over the non-negative columns.
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    cost: Vec<f64>,
    constant: f64,
    /// A column that can start in the basis for each row, if any.
    slack_basis: Vec<Option<usize>>,
    ncols: usize,
}

impl StandardForm {
    fn build(lp: &Lp) -> StandardForm {
        let mut ncols = 0;
        let mut map = Vec::with_capacity(lp.bounds.len());
        let mut rows: Vec<(Vec<(usize, f64)>, Cmp, f64)> = Vec::new();
        for &(lo, hi) in &lp.bounds {
            if lo.is_finite() {
                map.push(VarMap::Shift { col: ncols, lo });
                if hi.is_finite() {
                    rows.push((vec![(ncols, 1.0)], Cmp::Le, hi - lo));
                }
                ncols += 1;
            } else if hi.is_finite() {
                map.push(VarMap::Mirror { col: ncols, hi });
                ncols += 1;
            } else {
                map.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
                ncols += 2;
            }
        }

        let mut cost = vec![0.0; ncols];
        let mut constant = 0.0;
        for (j, &c) in lp.objective.iter().enumerate() {
            match map[j] {
                VarMap::Shift { col, lo } => {
                    cost[col] += c;
                    constant += c * lo;
                }
                VarMap::Mirror { col, hi } => {
                    cost[col] -= c;
                    constant += c * hi;
                }
                VarMap::Split { pos, neg } => {
                    cost[pos] += c;
                    cost[neg] -= c;
                }
            }
        }

        for (terms, cmp, rhs) in &lp.rows {
            let mut t = Vec::new();
            let mut r = *rhs;
            for &(j, c) in terms {
                match map[j] {
                    VarMap::Shift { col, lo } => {
                        t.push((col, c));
                        r -= c * lo;
                    }
                    VarMap::Mirror { col, hi } => {
                        t.push((col, -c));
                        r -= c * hi;
                    }
                    VarMap::Split { pos, neg } => {
                        t.push((pos, c));
                        t.push((neg, -c));
                    }
                }
            }
            rows.push((t, *cmp, r));
        }

        // Slack and surplus columns, then flip rows so every rhs is ≥ 0.
        let n_ineq = rows.iter().filter(|r| r.1 != Cmp::Eq).count();
        let total = ncols + n_ineq;
        let mut a = Vec::with_capacity(rows.len());
        let mut b = Vec::with_capacity(rows.len());
        let mut slack_basis = Vec::with_capacity(rows.len());
        let mut next_slack = ncols;
        for (terms, cmp, rhs) in rows {
            let mut row = vec![0.0; total];
            for (col, c) in terms {
                row[col] += c;
            }
            let mut slack = None;
            match cmp {
                Cmp::Le => {
                    row[next_slack] = 1.0;
                    slack = Some(next_slack);
                    next_slack += 1;
                }
                Cmp::Ge => {
                    row[next_slack] = -1.0;
                    slack = Some(next_slack);
                    next_slack += 1;
                }
                Cmp::Eq => {}
            }
            let mut rhs = rhs;
            if rhs < 0.0 {
                for v in row.iter_mut() {
                    *v = -*v;
                }
                rhs = -rhs;
            }
            // A slack column starts in the basis only with coefficient +1.
            let start = slack.filter(|&s| row[s] > 0.0);
            a.push(row);
            b.push(rhs);
            slack_basis.push(start);
        }
        cost.resize(total, 0.0);
        StandardForm { map, a, b, cost, constant, slack_basis, ncols: total }
    }

    fn solve(self) -> LpOutcome {
        let StandardForm { map, a, b, cost, constant, slack_basis, ncols } = self;
        let m = a.len();
        let n_art = slack_basis.iter().filter(|s| s.is_none()).count();
        let width = ncols + n_art;

        let mut t = Tableau {
            a: Vec::with_capacity(m),
            b,
            basis: Vec::with_capacity(m),
            obj: vec![0.0; width],
            obj_rhs: 0.0,
            allowed: vec![true; width],
        };
        let mut art = ncols;
        for (i, row) in a.into_iter().enumerate() {
            let mut r = row;
            r.resize(width, 0.0);
            match slack_basis[i] {
                Some(s) => t.basis.push(s),
                None => {
                    r[art] = 1.0;
                    t.basis.push(art);
                    art += 1;
                }
            }
            t.a.push(r);
        }

        if n_art > 0 {
            let mut phase1 = vec![0.0; width];
            for c in phase1.iter_mut().skip(ncols) {
                *c = 1.0;
            }
            t.set_cost(&phase1);
            if t.run() == Status::Unbounded {
                return LpOutcome::Infeasible;
            }
            let scale = 1.0 + t.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if -t.obj_rhs > 1e-9 * scale {
                return LpOutcome::Infeasible;
            }
            // Drive remaining artificials out of the basis.
            let mut i = 0;
            while i < t.a.len() {
                if t.basis[i] >= ncols {
                    let col = (0..ncols)
                        .filter(|&j| t.a[i][j].abs() > PIVOT_TOL)
                        .max_by(|&p, &q| t.a[i][p].abs().total_cmp(&t.a[i][q].abs()));
                    match col {
                        Some(j) => t.pivot(i, j),
                        None => {
                            t.a.remove(i);
                            t.b.remove(i);
                            t.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
            for j in ncols..width {
                t.allowed[j] = false;
            }
        }

        let mut phase2 = cost.clone();
        phase2.resize(width, 0.0);
        t.set_cost(&phase2);
        if t.run() == Status::Unbounded {
            return LpOutcome::Unbounded;
        }

        let mut y = vec![0.0; width];
        for (i, &bv) in t.basis.iter().enumerate() {
            y[bv] = t.b[i].max(0.0);
        }
        let x: Vec<f64> = map
            .iter()
            .map(|vm| match *vm {
                VarMap::Shift { col, lo } => lo + y[col],
                VarMap::Mirror { col, hi } => hi - y[col],
                VarMap::Split { pos, neg } => y[pos] - y[neg],
            })
            .collect();
        let objective = constant + cost.iter().zip(&y).map(|(c, v)| c * v).sum::<f64>();
        LpOutcome::Optimal { x, objective }
    }
}

#[derive(PartialEq, Eq)]
enum Status {
    Optimal,
    Unbounded,
}

struct Tableau {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    basis: Vec<usize>,
    /// Reduced costs.
    obj: Vec<f64>,
    /// Negated objective value of the current basis.
    obj_rhs: f64,
    allowed: Vec<bool>,
}

impl Tableau {
    fn set_cost(&mut self, cost: &[f64]) {
        self.obj = cost.to_vec();
        self.obj_rhs = 0.0;
        for (i, &bv) in self.basis.iter().enumerate() {
            let cb = cost[bv];
            if cb != 0.0 {
                for (o, v) in self.obj.iter_mut().zip(&self.a[i]) {
                    *o -= cb * v;
                }
                self.obj_rhs -= cb * self.b[i];
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.a[r][c];
        for v in self.a[r].iter_mut() {
            *v /= p;
        }
        self.b[r] /= p;
        let pivot_row = self.a[r].clone();
        let pivot_b = self.b[r];
        for i in 0..self.a.len() {
            if i == r {
                continue;
            }
            let f = self.a[i][c];
            if f != 0.0 {
                for (v, pr) in self.a[i].iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
                self.a[i][c] = 0.0;
                self.b[i] -= f * pivot_b;
                if self.b[i].abs() < 1e-13 {
                    self.b[i] = 0.0;
                }
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, pr) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            self.obj[c] = 0.0;
            self.obj_rhs -= f * pivot_b;
        }
        self.basis[r] = c;
    }

    fn run(&mut self) -> Status {
        let mut degenerate = 0;
        for _ in 0..MAX_PIVOTS {
            let bland = degenerate >= DEGENERATE_RUN;
            let candidates = (0..self.obj.len())
                .filter(|&j| self.allowed[j] && self.obj[j] < -COST_TOL);
            let entering = if bland {
                candidates.min()
            } else {
                candidates.min_by(|&p, &q| self.obj[p].total_cmp(&self.obj[q]))
            };
            let Some(c) = entering else {
                return Status::Optimal;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.a.len() {
                let aic = self.a[i][c];
                if aic > PIVOT_TOL {
                    let ratio = self.b[i].max(0.0) / aic;
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
                    };
                }
            }
            let Some((r, ratio)) = leave else {
                return Status::Unbounded;
            };
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
        }
        // Bland's rule terminates; reaching this bound means numerical trouble.
        Status::Optimal
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimum(lp: &Lp) -> (Vec<f64>, f64) {
        lp.solve().unwrap().optimal().expect("optimal")
    }

    #[test]
    fn small_program() {
        // min -x - y  s.t. x + 2y <= 4, 3x + y <= 6, x, y >= 0  → (1.6, 1.2)
        let mut lp = Lp::new();
        let x = lp.var(-1.0, 0.0, f64::INFINITY);
        let y = lp.var(-1.0, 0.0, f64::INFINITY);
        lp.constraint(&[(x, 1.0), (y, 2.0)], Cmp::Le, 4.0);
        lp.constraint(&[(x, 3.0), (y, 1.0)], Cmp::Le, 6.0);
        let (sol, obj) = optimum(&lp);
        assert!((sol[0] - 1.6).abs() < 1e-12 && (sol[1] - 1.2).abs() < 1e-12);
        assert!((obj + 2.8).abs() < 1e-12);
    }

    #[test]
    fn statuses() {
        let mut lp = Lp::new();
        let x = lp.free_var(1.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Unbounded);
        lp.constraint(&[(x, 1.0)], Cmp::Ge, 2.0);
        lp.constraint(&[(x, 1.0)], Cmp::Le, 1.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Infeasible);

        let mut zero = Lp::new();
        zero.free_var(0.0);
        zero.constraint(&[(0, 0.0)], Cmp::Le, -1.0);
        assert_eq!(zero.solve().unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn pinned_free_variable() {
        // max x s.t. x <= 0, -x <= 0 with an extra free variable.
        let mut lp = Lp::new();
        let x = lp.free_var(-1.0);
        let y = lp.free_var(0.0);
        lp.constraint(&[(x, 1.0)], Cmp::Le, 0.0);
        lp.constraint(&[(x, -1.0)], Cmp::Le, 0.0);
        lp.constraint(&[(y, 1.0)], Cmp::Le, 1.0);
        let (sol, obj) = optimum(&lp);
        assert_eq!(obj, 0.0);
        assert_eq!(sol[0], 0.0);
    }

    #[test]
    fn equalities_bounds_and_redundancy() {
        // min x + 2y + 3z  s.t. x + y + z = 1, x - y = 0 (twice), z in [0.5, 2]
        let mut lp = Lp::new();
        let x = lp.free_var(1.0);
        let y = lp.free_var(2.0);
        let z = lp.var(3.0, 0.5, 2.0);
        lp.constraint(&[(x, 1.0), (y, 1.0), (z, 1.0)], Cmp::Eq, 1.0);
        lp.constraint(&[(x, 1.0), (y, -1.0)], Cmp::Eq, 0.0);
        lp.constraint(&[(x, 2.0), (y, -2.0)], Cmp::Eq, 0.0);
        let (sol, obj) = optimum(&lp);
        // z = 0.5 is forced minimal? cost of z (3) exceeds 1.5 per unit of x=y
        assert!((sol[2] - 0.5).abs() < 1e-12);
        assert!((sol[0] - 0.25).abs() < 1e-12 && (sol[1] - 0.25).abs() < 1e-12);
        assert!((obj - 2.25).abs() < 1e-12);

        let mut upper = Lp::new();
        let w = upper.var(-1.0, f64::NEG_INFINITY, 3.0);
        upper.constraint(&[(w, 1.0)], Cmp::Ge, -5.0);
        assert_eq!(optimum(&upper).0, vec![3.0]);
    }

    #[test]
    fn degenerate_vertex() {
        // Many constraints through the optimum (0, 0).
        let mut lp = Lp::new();
        let x = lp.free_var(1.0);
        let y = lp.free_var(1.0);
        for k in 1..=8 {
            let a = k as f64;
            lp.constraint(&[(x, -a), (y, -1.0)], Cmp::Le, 0.0);
            lp.constraint(&[(x, -1.0), (y, -a)], Cmp::Le, 0.0);
        }
        let (sol, obj) = optimum(&lp);
        assert!(obj.abs() < 1e-12 && sol[0].abs() < 1e-12 && sol[1].abs() < 1e-12);
    }
}
