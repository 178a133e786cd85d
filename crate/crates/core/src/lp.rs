//! Exact linear programming: two-phase primal simplex over rationals with
//! Bland's anti-cycling rule.
//!
//! Variables are free unless a constraint of the form `-c * x_i <= 0` (with
//! `c > 0`) marks them nonnegative. Free variables are split as `x+ - x-`.

use crate::error::{ensure_dim, Result};
use crate::linalg::Vector;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearProgram {
    /// Maximized.
    pub objective: Vector,
    /// `<a, x> = b`.
    pub eq_constraints: Vec<(Vector, Rational)>,
    /// `<a, x> <= b`.
    pub ineq_constraints: Vec<(Vector, Rational)>,
    pub num_vars: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vector, value: Rational },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<(Vector, Rational)> {
        match self {
            LpOutcome::Optimal { x, value } => Some((x, value)),
            _ => None,
        }
    }
}

impl LinearProgram {
    /// A feasibility problem (zero objective) in `num_vars` free variables.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            objective: Vector::zeros(num_vars),
            eq_constraints: Vec::new(),
            ineq_constraints: Vec::new(),
            num_vars,
        }
    }

    pub fn add_eq(&mut self, a: Vector, b: Rational) {
        self.eq_constraints.push((a, b));
    }

    pub fn add_le(&mut self, a: Vector, b: Rational) {
        self.ineq_constraints.push((a, b));
    }

    pub fn add_ge(&mut self, a: Vector, b: Rational) {
        self.ineq_constraints.push((a.neg(), -b));
    }

    pub fn add_nonneg(&mut self, var: usize) {
        let mut a = Vector::zeros(self.num_vars);
        a[var] = -Rational::one();
        self.ineq_constraints.push((a, Rational::zero()));
    }

    /// `x` satisfies every constraint exactly.
    pub fn is_feasible(&self, x: &Vector) -> Result<bool> {
        ensure_dim("LP point", self.num_vars, x.len())?;
        for (a, b) in &self.eq_constraints {
            if &a.dot(x)? != b {
                return Ok(false);
            }
        }
        for (a, b) in &self.ineq_constraints {
            if &a.dot(x)? > b {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn validate(&self) -> Result<()> {
        ensure_dim("LP objective", self.num_vars, self.objective.len())?;
        for (a, _) in self.eq_constraints.iter().chain(&self.ineq_constraints) {
            ensure_dim("LP constraint", self.num_vars, a.len())?;
        }
        Ok(())
    }
}

pub fn lp_solve(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.validate()?;
    let n = lp.num_vars;

    // Recognize sign constraints and drop them from the row set.
    let mut nonneg = vec![false; n];
    let mut rows_le: Vec<&(Vector, Rational)> = Vec::new();
    for row in &lp.ineq_constraints {
        let (a, b) = row;
        let mut support = a.iter().enumerate().filter(|(_, x)| !x.is_zero());
        let single = match (support.next(), support.next()) {
            (Some((i, x)), None) if x.is_negative() && b.is_zero() => Some(i),
            _ => None,
        };
        match single {
            Some(i) => nonneg[i] = true,
            None => rows_le.push(row),
        }
    }

    // Column layout: one column per nonneg variable, two per free variable,
    // then one slack per inequality row.
    let mut col_of = Vec::with_capacity(n);
    let mut ncols = 0;
    for &nn in &nonneg {
        col_of.push(ncols);
        ncols += if nn { 1 } else { 2 };
    }
    let structural = ncols;
    ncols += rows_le.len();

    let expand = |a: &Vector| -> Vec<Rational> {
        let mut out = vec![Rational::zero(); ncols + 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            out[col_of[i]] = x.clone();
            if !nonneg[i] {
                out[col_of[i] + 1] = -x;
            }
        }
        out
    };

    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut slack_basic: Vec<Option<usize>> = Vec::new();
    for (a, b) in &lp.eq_constraints {
        let mut r = expand(a);
        r[ncols] = b.clone();
        rows.push(r);
        slack_basic.push(None);
    }
    for (k, (a, b)) in rows_le.iter().enumerate() {
        let mut r = expand(a);
        r[structural + k] = Rational::one();
        r[ncols] = b.clone();
        rows.push(r);
        slack_basic.push(Some(structural + k));
    }
    for (i, r) in rows.iter_mut().enumerate() {
        if r[ncols].is_negative() {
            for x in r.iter_mut() {
                *x = -&*x;
            }
            slack_basic[i] = None;
        }
    }

    // Artificial columns for rows without a usable slack.
    let needs_art: Vec<usize> = (0..rows.len())
        .filter(|&i| slack_basic[i].is_none())
        .collect();
    let total = ncols + needs_art.len();
    let mut tab = Tableau::new(rows, total, ncols);
    let mut basis = vec![0; tab.rows.len()];
    for (k, &i) in needs_art.iter().enumerate() {
        tab.rows[i][ncols + k] = Rational::one();
        basis[i] = ncols + k;
    }
    for (i, s) in slack_basic.iter().enumerate() {
        if let Some(s) = s {
            basis[i] = *s;
        }
    }
    tab.basis = basis;

    if !needs_art.is_empty() {
        let mut c1 = vec![Rational::zero(); total];
        for k in 0..needs_art.len() {
            c1[ncols + k] = -Rational::one();
        }
        tab.set_objective(&c1);
        let bounded = tab.run(total);
        debug_assert!(bounded, "phase one is bounded above by zero");
        if tab.value().is_negative() {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive remaining artificials out of the basis or drop redundant rows.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= ncols {
                match (0..ncols).find(|&j| !tab.rows[i][j].is_zero()) {
                    Some(j) => {
                        tab.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        tab.truncate_columns(ncols);
    }

    let mut c2 = vec![Rational::zero(); ncols];
    for (i, x) in lp.objective.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        c2[col_of[i]] = x.clone();
        if !nonneg[i] {
            c2[col_of[i] + 1] = -x;
        }
    }
    tab.set_objective(&c2);
    if !tab.run(ncols) {
        return Ok(LpOutcome::Unbounded);
    }

    let mut col_val = vec![Rational::zero(); ncols];
    for (i, &b) in tab.basis.iter().enumerate() {
        col_val[b] = tab.rows[i][tab.width].clone();
    }
    let x: Vector = (0..n)
        .map(|i| {
            if nonneg[i] {
                col_val[col_of[i]].clone()
            } else {
                &col_val[col_of[i]] - &col_val[col_of[i] + 1]
            }
        })
        .collect();
    let value = lp.objective.dot(&x)?;
    debug_assert!(lp.is_feasible(&x).unwrap_or(false));
    Ok(LpOutcome::Optimal { x, value })
}

/// Some feasible point, or `None` if the constraints are inconsistent.
pub fn lp_feasible_point(lp: &LinearProgram) -> Result<Option<Vector>> {
    let mut probe = lp.clone();
    probe.objective = Vector::zeros(lp.num_vars);
    Ok(lp_solve(&probe)?.optimal().map(|(x, _)| x))
}

/// Dense tableau. Each row stores `width` coefficients followed by the rhs.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
    /// Reduced costs; the trailing entry is minus the objective value.
    cost: Vec<Rational>,
}

impl Tableau {
    fn new(rows: Vec<Vec<Rational>>, width: usize, filled: usize) -> Self {
        let rows = rows
            .into_iter()
            .map(|mut r| {
                let rhs = r.pop().expect("row has rhs");
                debug_assert_eq!(r.len(), filled);
                r.resize(width, Rational::zero());
                r.push(rhs);
                r
            })
            .collect();
        Tableau {
            rows,
            basis: Vec::new(),
            width,
            cost: vec![Rational::zero(); width + 1],
        }
    }

    fn value(&self) -> Rational {
        -&self.cost[self.width]
    }

    fn set_objective(&mut self, c: &[Rational]) {
        let mut cost: Vec<Rational> = c.to_vec();
        cost.push(Rational::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &c[b];
            if cb.is_zero() {
                continue;
            }
            for (j, a) in self.rows[i].iter().enumerate() {
                if !a.is_zero() {
                    cost[j] -= cb * a;
                }
            }
        }
        self.cost = cost;
    }

    fn truncate_columns(&mut self, width: usize) {
        for r in &mut self.rows {
            let rhs = r.pop().expect("row has rhs");
            r.truncate(width);
            r.push(rhs);
        }
        self.width = width;
        self.cost = vec![Rational::zero(); width + 1];
    }

    /// Runs simplex iterations over the first `limit` columns. Returns false
    /// if the objective is unbounded.
    fn run(&mut self, limit: usize) -> bool {
        loop {
            let Some(enter) = (0..limit).find(|&j| self.cost[j].is_positive()) else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rows[i][self.width] / a;
                let better = match &leave {
                    None => true,
                    Some((k, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*k])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((i, _)) => self.pivot(i, enter),
                None => return false,
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip().expect("pivot element is nonzero");
        for x in self.rows[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let nz: Vec<usize> = (0..pivot_row.len())
            .filter(|&j| !pivot_row[j].is_zero())
            .collect();
        let eliminate = |row: &mut Vec<Rational>| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for &j in &nz {
                let delta = &f * &pivot_row[j];
                row[j] -= delta;
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.cost);
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn v(xs: &[i64]) -> Vector {
        Vector::from_ints(xs)
    }

    #[test]
    fn single_variable_box() {
        let mut lp = LinearProgram::new(1);
        lp.objective = v(&[1]);
        lp.add_le(v(&[1]), 3.into());
        lp.add_nonneg(0);
        assert_eq!(
            lp_solve(&lp).unwrap(),
            LpOutcome::Optimal {
                x: v(&[3]),
                value: 3.into()
            }
        );
    }

    #[test]
    fn contradictory_bounds() {
        let mut lp = LinearProgram::new(1);
        lp.objective = v(&[1]);
        lp.add_le(v(&[1]), (-1).into());
        lp.add_nonneg(0);
        assert_eq!(lp_solve(&lp).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn simplex_normalization() {
        let mut lp = LinearProgram::new(2);
        lp.objective = v(&[1, 1]);
        lp.add_eq(v(&[1, 1]), 1.into());
        lp.add_nonneg(0);
        lp.add_nonneg(1);
        let (x, value) = lp_solve(&lp).unwrap().optimal().unwrap();
        assert_eq!(value, Rational::one());
        assert!(lp.is_feasible(&x).unwrap());
    }

    #[test]
    fn unbounded_and_free_variables() {
        let mut lp = LinearProgram::new(1);
        lp.objective = v(&[1]);
        assert_eq!(lp_solve(&lp).unwrap(), LpOutcome::Unbounded);

        // Free variable with a negative optimum.
        let mut lp = LinearProgram::new(1);
        lp.objective = v(&[-1]);
        lp.add_ge(v(&[2]), (-3).into());
        let (x, value) = lp_solve(&lp).unwrap().optimal().unwrap();
        assert_eq!(x, Vector::new(vec![ratio(-3, 2)]));
        assert_eq!(value, ratio(3, 2));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(2);
        lp.objective = v(&[1, 0]);
        lp.add_eq(v(&[1, 1]), 1.into());
        lp.add_eq(v(&[2, 2]), 2.into());
        lp.add_nonneg(0);
        lp.add_nonneg(1);
        let (x, value) = lp_solve(&lp).unwrap().optimal().unwrap();
        assert_eq!(value, Rational::one());
        assert_eq!(x, v(&[1, 0]));
    }

    #[test]
    fn dimension_errors() {
        let mut lp = LinearProgram::new(2);
        lp.add_le(v(&[1]), 0.into());
        assert!(lp_solve(&lp).is_err());
    }

    #[test]
    fn deterministic() {
        let mut lp = LinearProgram::new(3);
        lp.objective = v(&[1, 1, 1]);
        lp.add_le(v(&[1, 1, 0]), 1.into());
        lp.add_le(v(&[0, 1, 1]), 1.into());
        lp.add_le(v(&[1, 0, 1]), 1.into());
        for i in 0..3 {
            lp.add_nonneg(i);
        }
        let a = lp_solve(&lp).unwrap();
        let b = lp_solve(&lp).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.optimal().unwrap().1, ratio(3, 2));
    }
}
