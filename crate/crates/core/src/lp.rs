//! Exact rational linear programming.
//!
//! A dense two-phase tableau simplex over arbitrary-precision rationals with
//! Bland's anti-cycling rule. Every solve is self-certifying: primal
//! feasibility, dual feasibility, strong duality and complementary slackness
//! are asserted exactly before an optimum is returned (exact arithmetic
//! cannot produce near-misses, so any failure is a logic bug).
//!
//! Duals follow the max-primal convention: `<=` rows have nonnegative duals,
//! `>=` rows nonpositive ones, `=` rows are free, and the dual objective
//! `sum duals * rhs` equals the primal objective at an optimum.

use crate::model::{fmt_rat, Rational};
use crate::{Caps, Error, Result};
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    fn flip(self) -> Relation {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LpRow {
    /// Sparse coefficients, sorted by variable index, no duplicates.
    pub terms: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// A linear program in inequality form: maximize `c x` subject to the rows,
/// `x >= 0`, and optional finite upper bounds per variable.
#[derive(Debug, Clone)]
pub struct LpProblem {
    num_vars: usize,
    objective: Vec<Rational>,
    rows: Vec<LpRow>,
    upper: Vec<Option<Rational>>,
}

/// Primal/dual optimum with exact rational data.
#[derive(Debug, Clone)]
pub struct LpOptimum {
    pub primal: Vec<Rational>,
    /// One dual value per constraint row, in declaration order.
    pub duals: Vec<Rational>,
    /// One dual value per variable upper bound (zero where unbounded).
    pub bound_duals: Vec<Rational>,
    pub objective: Rational,
}

#[derive(Debug, Clone)]
pub enum LpSolution {
    Optimal(LpOptimum),
    Infeasible,
    Unbounded,
}

impl LpProblem {
    pub fn new(num_vars: usize) -> LpProblem {
        LpProblem {
            num_vars,
            objective: vec![Rational::zero(); num_vars],
            rows: Vec::new(),
            upper: vec![None; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn rows(&self) -> &[LpRow] {
        &self.rows
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn set_objective(&mut self, var: usize, coef: Rational) {
        self.objective[var] = coef;
    }

    pub fn set_upper(&mut self, var: usize, bound: Rational) {
        self.upper[var] = Some(bound);
    }

    /// Adds a constraint row. Terms are normalized (sorted, merged, zeros
    /// dropped); variable indices must be in range.
    pub fn add_row(&mut self, terms: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) {
        let mut terms = terms;
        terms.sort_by_key(|(j, _)| *j);
        let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(terms.len());
        for (j, c) in terms {
            assert!(j < self.num_vars, "variable index out of range");
            match merged.last_mut() {
                Some((last, acc)) if *last == j => *acc = &*acc + &c,
                _ => merged.push((j, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        self.rows.push(LpRow {
            terms: merged,
            relation,
            rhs,
        });
    }

    /// Constraint-matrix nonzeros, including upper-bound rows.
    pub fn nonzeros(&self) -> u64 {
        let rows: usize = self.rows.iter().map(|r| r.terms.len()).sum();
        let bounds = self.upper.iter().filter(|u| u.is_some()).count();
        (rows + bounds) as u64
    }

    /// Dual objective value of an optimum: `sum duals*rhs + sum bound_duals*upper`.
    pub fn dual_objective(&self, opt: &LpOptimum) -> Rational {
        let mut total: Rational = self
            .rows
            .iter()
            .zip(&opt.duals)
            .map(|(row, y)| y * &row.rhs)
            .sum();
        for (j, u) in self.upper.iter().enumerate() {
            if let Some(u) = u {
                total += &opt.bound_duals[j] * u;
            }
        }
        total
    }

    /// Plain-text dump for cross-checking against external solvers.
    pub fn write_lp(&self) -> String {
        let term_str = |terms: &[(usize, Rational)]| -> String {
            if terms.is_empty() {
                return "0".to_string();
            }
            terms
                .iter()
                .map(|(j, c)| format!("{} x{}", fmt_rat(c), j))
                .collect::<Vec<_>>()
                .join(" + ")
        };
        let mut out = String::new();
        let obj: Vec<(usize, Rational)> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| (j, c.clone()))
            .collect();
        out.push_str(&format!("max {}\n", term_str(&obj)));
        for (i, row) in self.rows.iter().enumerate() {
            let rel = match row.relation {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            out.push_str(&format!(
                "r{}: {} {} {}\n",
                i,
                term_str(&row.terms),
                rel,
                fmt_rat(&row.rhs)
            ));
        }
        for (j, u) in self.upper.iter().enumerate() {
            if let Some(u) = u {
                out.push_str(&format!("bound: x{} <= {}\n", j, fmt_rat(u)));
            }
        }
        out
    }

    /// Solves the program exactly. Returns the optimum (with duals),
    /// `Infeasible`, or `Unbounded`; refuses beyond the nonzero cap.
    pub fn solve(&self, caps: &Caps) -> Result<LpSolution> {
        let nnz = self.nonzeros();
        if nnz > caps.max_lp_nonzeros {
            return Err(Error::CapExceeded {
                what: "LP nonzero",
                actual: nnz as u128,
                cap: caps.max_lp_nonzeros as u128,
            });
        }

        // Upper bounds become trailing rows; their duals are reported
        // separately.
        let mut all_rows: Vec<LpRow> = self.rows.clone();
        let mut bound_row_vars: Vec<usize> = Vec::new();
        for (j, u) in self.upper.iter().enumerate() {
            if let Some(u) = u {
                all_rows.push(LpRow {
                    terms: vec![(j, Rational::one())],
                    relation: Relation::Le,
                    rhs: u.clone(),
                });
                bound_row_vars.push(j);
            }
        }

        let mut tab = Tableau::build(self.num_vars, &all_rows);
        if tab.has_artificials() {
            tab.load_phase1_objective();
            // Phase 1 maximizes -sum(artificials), which is bounded by 0.
            match tab.optimize(true) {
                SimplexEnd::Optimal => {}
                SimplexEnd::Unbounded => unreachable!("phase 1 is bounded"),
            }
            if tab.dval.is_negative() {
                return Ok(LpSolution::Infeasible);
            }
        }
        tab.load_objective(&self.objective);
        match tab.optimize(false) {
            SimplexEnd::Optimal => {}
            SimplexEnd::Unbounded => return Ok(LpSolution::Unbounded),
        }

        let primal = tab.extract_primal(self.num_vars);
        let all_duals = tab.extract_duals();
        let mut duals = all_duals;
        let bound_tail = duals.split_off(self.rows.len());
        let mut bound_duals = vec![Rational::zero(); self.num_vars];
        for (i, &j) in bound_row_vars.iter().enumerate() {
            bound_duals[j] = bound_tail[i].clone();
        }
        let opt = LpOptimum {
            primal,
            duals,
            bound_duals,
            objective: tab.dval.clone(),
        };
        self.check_certificate(&opt);
        Ok(LpSolution::Optimal(opt))
    }

    /// Exact optimality certificate. Any failure here is a solver bug, never
    /// a property of the input, hence assertions rather than errors.
    fn check_certificate(&self, opt: &LpOptimum) {
        let value = |terms: &[(usize, Rational)]| -> Rational {
            terms.iter().map(|(j, c)| c * &opt.primal[*j]).sum()
        };
        for x in &opt.primal {
            assert!(!x.is_negative(), "primal below lower bound");
        }
        for (row, y) in self.rows.iter().zip(&opt.duals) {
            let lhs = value(&row.terms);
            match row.relation {
                Relation::Le => {
                    assert!(lhs <= row.rhs, "primal violates <= row");
                    assert!(!y.is_negative(), "dual sign of <= row");
                }
                Relation::Ge => {
                    assert!(lhs >= row.rhs, "primal violates >= row");
                    assert!(!y.is_positive(), "dual sign of >= row");
                }
                Relation::Eq => assert!(lhs == row.rhs, "primal violates = row"),
            }
            // complementary slackness on rows
            assert!(y.is_zero() || lhs == row.rhs, "slack row with nonzero dual");
        }
        for (j, u) in self.upper.iter().enumerate() {
            if let Some(u) = u {
                assert!(&opt.primal[j] <= u, "primal above upper bound");
                assert!(
                    opt.bound_duals[j].is_zero() || &opt.primal[j] == u,
                    "slack bound with nonzero dual"
                );
            }
        }
        // dual feasibility and complementary slackness on variables
        let mut reduced: Vec<Rational> = self.objective.iter().map(|c| -c).collect();
        for (row, y) in self.rows.iter().zip(&opt.duals) {
            for (j, c) in &row.terms {
                reduced[*j] += y * c;
            }
        }
        for (j, b) in opt.bound_duals.iter().enumerate() {
            reduced[j] += b;
        }
        for (j, r) in reduced.iter().enumerate() {
            assert!(!r.is_negative(), "dual infeasible at variable {j}");
            assert!(
                opt.primal[j].is_zero() || r.is_zero(),
                "positive variable with slack dual constraint"
            );
        }
        assert!(
            self.dual_objective(opt) == opt.objective,
            "strong duality violated"
        );
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Surplus,
    Artificial,
}

enum SimplexEnd {
    Optimal,
    Unbounded,
}

struct Tableau {
    ncols: usize,
    nrows: usize,
    tab: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    /// Column basic in each row.
    basis: Vec<usize>,
    /// Reduced costs z_j - c_j; optimal when all nonnegative.
    drow: Vec<Rational>,
    /// Current objective value.
    dval: Rational,
    kind: Vec<ColKind>,
    /// For each row: the column holding +1 in exactly that row initially
    /// (slack or artificial); final reduced costs there yield the duals.
    identity_col: Vec<usize>,
    /// Rows multiplied by -1 to normalize the rhs; their duals flip back.
    flipped: Vec<bool>,
    num_artificial: usize,
}

impl Tableau {
    fn build(num_vars: usize, rows: &[LpRow]) -> Tableau {
        let nrows = rows.len();
        let mut effective: Vec<(Relation, bool)> = Vec::with_capacity(nrows);
        for row in rows {
            if row.rhs.is_negative() {
                effective.push((row.relation.flip(), true));
            } else {
                effective.push((row.relation, false));
            }
        }
        let n_slack = effective
            .iter()
            .filter(|(rel, _)| matches!(rel, Relation::Le | Relation::Ge))
            .count();
        let n_art = effective
            .iter()
            .filter(|(rel, _)| matches!(rel, Relation::Ge | Relation::Eq))
            .count();
        let ncols = num_vars + n_slack + n_art;

        let mut tab = vec![vec![Rational::zero(); ncols]; nrows];
        let mut rhs = Vec::with_capacity(nrows);
        let mut basis = vec![0usize; nrows];
        let mut kind = vec![ColKind::Structural; ncols];
        let mut identity_col = vec![0usize; nrows];

        let mut next = num_vars;
        for (i, row) in rows.iter().enumerate() {
            let (rel, flip) = effective[i];
            for (j, c) in &row.terms {
                tab[i][*j] = if flip { -c } else { c.clone() };
            }
            rhs.push(if flip { -&row.rhs } else { row.rhs.clone() });
            match rel {
                Relation::Le => {
                    tab[i][next] = Rational::one();
                    kind[next] = ColKind::Slack;
                    basis[i] = next;
                    identity_col[i] = next;
                    next += 1;
                }
                Relation::Ge => {
                    tab[i][next] = -Rational::one();
                    kind[next] = ColKind::Surplus;
                    next += 1;
                }
                Relation::Eq => {}
            }
        }
        // artificial columns last, barred from entering in phase 2
        for (i, _) in rows.iter().enumerate() {
            let (rel, _) = effective[i];
            if matches!(rel, Relation::Ge | Relation::Eq) {
                tab[i][next] = Rational::one();
                kind[next] = ColKind::Artificial;
                basis[i] = next;
                identity_col[i] = next;
                next += 1;
            }
        }
        debug_assert_eq!(next, ncols);

        Tableau {
            ncols,
            nrows,
            tab,
            rhs,
            basis,
            drow: vec![Rational::zero(); ncols],
            dval: Rational::zero(),
            kind,
            identity_col,
            flipped: effective.iter().map(|(_, f)| *f).collect(),
            num_artificial: n_art,
        }
    }

    fn has_artificials(&self) -> bool {
        self.num_artificial > 0
    }

    /// d-row for maximizing -sum(artificials).
    fn load_phase1_objective(&mut self) {
        let cost = |kind: ColKind| -> Rational {
            if kind == ColKind::Artificial {
                -Rational::one()
            } else {
                Rational::zero()
            }
        };
        self.load_costs(&|t: &Tableau, j: usize| cost(t.kind[j]));
    }

    /// d-row for the structural objective.
    fn load_objective(&mut self, objective: &[Rational]) {
        self.load_costs(&|t: &Tableau, j: usize| {
            if t.kind[j] == ColKind::Structural {
                objective[j].clone()
            } else {
                Rational::zero()
            }
        });
    }

    fn load_costs(&mut self, cost: &dyn Fn(&Tableau, usize) -> Rational) {
        let basic_costs: Vec<Rational> = self.basis.iter().map(|&b| cost(self, b)).collect();
        for j in 0..self.ncols {
            let mut z = Rational::zero();
            for (c, row) in basic_costs.iter().zip(&self.tab) {
                if !c.is_zero() && !row[j].is_zero() {
                    z += c * &row[j];
                }
            }
            self.drow[j] = z - cost(self, j);
        }
        let mut v = Rational::zero();
        for (c, b) in basic_costs.iter().zip(&self.rhs) {
            if !c.is_zero() {
                v += c * b;
            }
        }
        self.dval = v;
    }

    /// Bland's rule: entering column is the lowest index with negative
    /// reduced cost; leaving row has the minimum ratio, ties broken by the
    /// lowest basic column index.
    fn optimize(&mut self, allow_artificial: bool) -> SimplexEnd {
        loop {
            let mut entering = None;
            for j in 0..self.ncols {
                if !allow_artificial && self.kind[j] == ColKind::Artificial {
                    continue;
                }
                if self.drow[j].is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(pc) = entering else {
                return SimplexEnd::Optimal;
            };

            let mut leaving: Option<usize> = None;
            for i in 0..self.nrows {
                if !self.tab[i][pc].is_positive() {
                    continue;
                }
                let better = match leaving {
                    None => true,
                    Some(l) => {
                        // compare rhs[i]/tab[i][pc] with rhs[l]/tab[l][pc]
                        let a = &self.rhs[i] * &self.tab[l][pc];
                        let b = &self.rhs[l] * &self.tab[i][pc];
                        a < b || (a == b && self.basis[i] < self.basis[l])
                    }
                };
                if better {
                    leaving = Some(i);
                }
            }
            let Some(pr) = leaving else {
                return SimplexEnd::Unbounded;
            };
            self.pivot(pr, pc);
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let piv = self.tab[pr][pc].clone();
        if !piv.is_one() {
            for j in 0..self.ncols {
                if !self.tab[pr][j].is_zero() {
                    let v = &self.tab[pr][j] / &piv;
                    self.tab[pr][j] = v;
                }
            }
            let v = &self.rhs[pr] / &piv;
            self.rhs[pr] = v;
        }
        // snapshot the sparse pivot row once; eliminations touch only its
        // nonzero columns
        let prow: Vec<(usize, Rational)> = (0..self.ncols)
            .filter(|&j| !self.tab[pr][j].is_zero())
            .map(|j| (j, self.tab[pr][j].clone()))
            .collect();
        let prhs = self.rhs[pr].clone();

        for i in 0..self.nrows {
            if i == pr || self.tab[i][pc].is_zero() {
                continue;
            }
            let f = self.tab[i][pc].clone();
            for (j, v) in &prow {
                let delta = &f * v;
                let nv = &self.tab[i][*j] - &delta;
                self.tab[i][*j] = nv;
            }
            let nv = &self.rhs[i] - &(&f * &prhs);
            self.rhs[i] = nv;
        }
        if !self.drow[pc].is_zero() {
            let f = self.drow[pc].clone();
            for (j, v) in &prow {
                let delta = &f * v;
                let nv = &self.drow[*j] - &delta;
                self.drow[*j] = nv;
            }
            let nv = &self.dval - &(&f * &prhs);
            self.dval = nv;
        }
        self.basis[pr] = pc;
    }

    fn extract_primal(&self, num_vars: usize) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); num_vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < num_vars {
                x[b] = self.rhs[i].clone();
            }
        }
        x
    }

    /// Duals read off the final reduced costs under each row's initial
    /// identity column, with the sign restored for normalized rows.
    fn extract_duals(&self) -> Vec<Rational> {
        (0..self.nrows)
            .map(|i| {
                let y = self.drow[self.identity_col[i]].clone();
                if self.flipped[i] {
                    -y
                } else {
                    y
                }
            })
            .collect()
    }
}
