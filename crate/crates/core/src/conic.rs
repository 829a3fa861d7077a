//! Convex subproblem solver: maximize one scalar subject to linear,
//! sum-of-squares (convex quadratic), second-order-cone, and
//! exponential-type (`2^x <= y`) constraints.
//!
//! Problems are built as a typed intermediate form over named variable
//! blocks; complex blocks are lowered to interleaved `[re, im, ...]`
//! real pairs internally, so constraint builders can speak in terms of
//! `Re(h^H p)` / `Im(h^H p)` while the solver sees only reals. Every
//! constraint tag is convex by construction, which keeps the assembled
//! problem convex without a separate verification pass.
//!
//! Solving is delegated to the Clarabel interior-point solver (native
//! second-order and exponential cones). Returned points are re-checked
//! here by an independent audit that evaluates every constraint at the
//! solution; a "solved" answer that violates its own constraints beyond
//! tolerance is downgraded to a numerical failure rather than trusted.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use num_complex::Complex64;
use std::collections::HashMap;
use std::fmt::Write as _;

/// Interior-point iteration cap; beyond it the status is a failure.
pub const MAX_ITERATIONS: u32 = 200;

/// Normalized constraint-violation budget for a trusted solution.
pub const AUDIT_TOLERANCE: f64 = 1e-6;

/// A named variable block: `len` scalars, or `len` complex entries
/// stored as `2*len` interleaved reals.
#[derive(Debug, Clone)]
struct Block {
    name: String,
    offset: usize,
    len: usize,
    complex: bool,
}

/// Handle to a declared block; indexes flat variables via [`BlockRef::at`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockRef {
    offset: usize,
    len: usize,
    complex: bool,
}

impl BlockRef {
    /// Flat index of real entry `i` (real blocks only).
    pub fn at(&self, i: usize) -> usize {
        assert!(!self.complex, "use re/im accessors on complex blocks");
        assert!(i < self.len);
        self.offset + i
    }

    /// Flat index of `Re(entry i)` of a complex block.
    pub fn re(&self, i: usize) -> usize {
        assert!(self.complex);
        assert!(i < self.len);
        self.offset + 2 * i
    }

    /// Flat index of `Im(entry i)` of a complex block.
    pub fn im(&self, i: usize) -> usize {
        assert!(self.complex);
        assert!(i < self.len);
        self.offset + 2 * i + 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Affine expression `sum coeff_i * x_{idx_i} + constant` over flat
/// variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn constant(value: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: value,
        }
    }

    pub fn variable(idx: usize) -> Self {
        Self {
            terms: vec![(idx, 1.0)],
            constant: 0.0,
        }
    }

    pub fn term(idx: usize, coeff: f64) -> Self {
        Self {
            terms: vec![(idx, coeff)],
            constant: 0.0,
        }
    }

    pub fn plus(mut self, idx: usize, coeff: f64) -> Self {
        self.terms.push((idx, coeff));
        self
    }

    pub fn plus_constant(mut self, value: f64) -> Self {
        self.constant += value;
        self
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        for (_, c) in &mut self.terms {
            *c *= factor;
        }
        self.constant *= factor;
        self
    }

    pub fn add(mut self, other: &LinExpr) -> Self {
        self.terms.extend_from_slice(&other.terms);
        self.constant += other.constant;
        self
    }

    pub fn sub(mut self, other: &LinExpr) -> Self {
        for &(idx, c) in &other.terms {
            self.terms.push((idx, -c));
        }
        self.constant -= other.constant;
        self
    }

    /// Value of the expression at the point `x`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|&(idx, c)| c * x[idx])
            .sum::<f64>()
            + self.constant
    }

    fn max_index(&self) -> Option<usize> {
        self.terms.iter().map(|&(i, _)| i).max()
    }
}

/// `Re(h^H p)` as a linear expression over the interleaved reals of
/// complex block `p`.
pub fn re_inner(h: &[Complex64], p: BlockRef) -> LinExpr {
    assert_eq!(h.len(), p.len());
    let mut expr = LinExpr::default();
    for (i, hi) in h.iter().enumerate() {
        // conj(h_i) * p_i contributes h_re*p_re + h_im*p_im to the real part
        expr.terms.push((p.re(i), hi.re));
        expr.terms.push((p.im(i), hi.im));
    }
    expr
}

/// `Im(h^H p)` as a linear expression over the interleaved reals.
pub fn im_inner(h: &[Complex64], p: BlockRef) -> LinExpr {
    assert_eq!(h.len(), p.len());
    let mut expr = LinExpr::default();
    for (i, hi) in h.iter().enumerate() {
        // conj(h_i) * p_i contributes h_re*p_im - h_im*p_re to the imag part
        expr.terms.push((p.im(i), hi.re));
        expr.terms.push((p.re(i), -hi.im));
    }
    expr
}

/// One convex constraint over declared variables.
#[derive(Debug, Clone)]
pub enum Constraint {
    /// `expr <= rhs`.
    LinearLe { expr: LinExpr, rhs: f64 },
    /// `expr = rhs`.
    LinearEq { expr: LinExpr, rhs: f64 },
    /// `sum_i squares_i^2 <= bound` with affine `squares` and `bound`.
    SumSquaresLe { squares: Vec<LinExpr>, bound: LinExpr },
    /// `|| vector || <= bound` with affine entries and bound.
    NormLe { vector: Vec<LinExpr>, bound: LinExpr },
    /// `2^exponent <= upper` with affine `exponent` and `upper`.
    Exp2Le { exponent: LinExpr, upper: LinExpr },
}

impl Constraint {
    fn for_each_expr(&self, mut f: impl FnMut(&LinExpr)) {
        match self {
            Constraint::LinearLe { expr, .. } | Constraint::LinearEq { expr, .. } => f(expr),
            Constraint::SumSquaresLe { squares, bound } => {
                squares.iter().for_each(&mut f);
                f(bound);
            }
            Constraint::NormLe { vector, bound } => {
                vector.iter().for_each(&mut f);
                f(bound);
            }
            Constraint::Exp2Le { exponent, upper } => {
                f(exponent);
                f(upper);
            }
        }
    }

    /// Violation at `x`, normalized by the magnitude of the binding side
    /// so that huge-scale constraints (e.g. `2^40`) are judged relatively.
    fn violation(&self, x: &[f64]) -> f64 {
        match self {
            Constraint::LinearLe { expr, rhs } => {
                (expr.eval(x) - rhs).max(0.0) / rhs.abs().max(1.0)
            }
            Constraint::LinearEq { expr, rhs } => {
                (expr.eval(x) - rhs).abs() / rhs.abs().max(1.0)
            }
            Constraint::SumSquaresLe { squares, bound } => {
                let lhs: f64 = squares.iter().map(|s| s.eval(x).powi(2)).sum();
                let b = bound.eval(x);
                (lhs - b).max(0.0) / b.abs().max(1.0)
            }
            Constraint::NormLe { vector, bound } => {
                let lhs = vector.iter().map(|v| v.eval(x).powi(2)).sum::<f64>().sqrt();
                let b = bound.eval(x);
                (lhs - b).max(0.0) / b.abs().max(1.0)
            }
            Constraint::Exp2Le { exponent, upper } => {
                let lhs = exponent.eval(x).exp2();
                let u = upper.eval(x);
                (lhs - u).max(0.0) / u.abs().max(1.0)
            }
        }
    }
}

/// Solver outcome classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Converged to tolerance; audit passed.
    Optimal,
    /// Reduced-accuracy convergence; audit passed.
    NearOptimal,
    /// Certified primal infeasible.
    Infeasible,
    /// Iteration cap, numerical breakdown, or failed audit.
    NumericalFailure,
}

impl SolveStatus {
    /// Whether the solution's values are usable.
    pub fn is_usable(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }
}

/// Solution point with named-block accessors.
#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    /// Flat variable assignment (meaningful when `status.is_usable()`).
    pub values: Vec<f64>,
    /// Value of the objective variable at the solution.
    pub objective_value: f64,
    /// Worst normalized constraint violation found by the audit.
    pub max_constraint_violation: f64,
    /// Interior-point iterations spent.
    pub iterations: u32,
    blocks: Vec<(String, BlockRef)>,
}

impl ConicSolution {
    fn lookup(&self, name: &str) -> BlockRef {
        self.blocks
            .iter()
            .find(|(n, _)| n == name)
            .unwrap_or_else(|| panic!("unknown block {name}"))
            .1
    }

    /// Value of a length-1 real block.
    pub fn scalar(&self, name: &str) -> f64 {
        let b = self.lookup(name);
        assert_eq!(b.len, 1, "{name} is not a scalar");
        self.values[b.at(0)]
    }

    /// Values of a real block.
    pub fn reals(&self, name: &str) -> Vec<f64> {
        let b = self.lookup(name);
        (0..b.len).map(|i| self.values[b.at(i)]).collect()
    }

    /// Values of a complex block.
    pub fn complexes(&self, name: &str) -> Vec<Complex64> {
        let b = self.lookup(name);
        (0..b.len)
            .map(|i| Complex64::new(self.values[b.re(i)], self.values[b.im(i)]))
            .collect()
    }
}

/// A convex maximization problem under construction.
#[derive(Debug, Clone, Default)]
pub struct ConicProblem {
    blocks: Vec<Block>,
    by_name: HashMap<String, usize>,
    num_flat: usize,
    objective: Option<usize>,
    constraints: Vec<Constraint>,
}

impl ConicProblem {
    pub fn new() -> Self {
        Self::default()
    }

    fn add_block(&mut self, name: &str, len: usize, complex: bool) -> BlockRef {
        assert!(len > 0, "empty block {name}");
        assert!(
            !self.by_name.contains_key(name),
            "duplicate block name {name}"
        );
        let offset = self.num_flat;
        let width = if complex { 2 * len } else { len };
        self.num_flat += width;
        self.by_name.insert(name.to_string(), self.blocks.len());
        self.blocks.push(Block {
            name: name.to_string(),
            offset,
            len,
            complex,
        });
        BlockRef {
            offset,
            len,
            complex,
        }
    }

    /// Declares `len` real variables under `name`.
    pub fn add_reals(&mut self, name: &str, len: usize) -> BlockRef {
        self.add_block(name, len, false)
    }

    /// Declares one real variable; returns its flat index.
    pub fn add_scalar(&mut self, name: &str) -> usize {
        self.add_block(name, 1, false).at(0)
    }

    /// Declares `len` complex variables under `name`.
    pub fn add_complexes(&mut self, name: &str, len: usize) -> BlockRef {
        self.add_block(name, len, true)
    }

    pub fn num_variables(&self) -> usize {
        self.num_flat
    }

    /// Sets the flat variable to maximize.
    pub fn maximize(&mut self, idx: usize) {
        assert!(idx < self.num_flat, "objective variable out of range");
        self.objective = Some(idx);
    }

    /// Adds a constraint; panics if it references an undeclared variable.
    pub fn add(&mut self, constraint: Constraint) {
        constraint.for_each_expr(|expr| {
            if let Some(max) = expr.max_index() {
                assert!(
                    max < self.num_flat,
                    "constraint references variable {max}, only {} declared",
                    self.num_flat
                );
            }
        });
        self.constraints.push(constraint);
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Worst normalized violation over all constraints at `x`; this is
    /// the audit applied to solver output, independent of the solver's
    /// own residuals.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.violation(x))
            .fold(0.0, f64::max)
    }

    /// Sparse text listing of the problem for offline reproduction.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "variables ({} flat):", self.num_flat);
        for b in &self.blocks {
            let kind = if b.complex { "complex" } else { "real" };
            let _ = writeln!(out, "  {} {} x{} @ {}", b.name, kind, b.len, b.offset);
        }
        let _ = writeln!(out, "maximize x[{:?}]", self.objective);
        let _ = writeln!(out, "constraints ({}):", self.constraints.len());
        let fmt_expr = |e: &LinExpr| {
            let mut s = String::new();
            for &(i, c) in &e.terms {
                let _ = write!(s, "{c:+.6}*x[{i}] ");
            }
            let _ = write!(s, "{:+.6}", e.constant);
            s
        };
        for c in &self.constraints {
            match c {
                Constraint::LinearLe { expr, rhs } => {
                    let _ = writeln!(out, "  lin: {} <= {rhs:.6}", fmt_expr(expr));
                }
                Constraint::LinearEq { expr, rhs } => {
                    let _ = writeln!(out, "  eq:  {} == {rhs:.6}", fmt_expr(expr));
                }
                Constraint::SumSquaresLe { squares, bound } => {
                    let _ = writeln!(out, "  ssq: sum of {} squares <= {}", squares.len(), fmt_expr(bound));
                    for s in squares {
                        let _ = writeln!(out, "       ({})^2", fmt_expr(s));
                    }
                }
                Constraint::NormLe { vector, bound } => {
                    let _ = writeln!(out, "  soc: ||{} terms|| <= {}", vector.len(), fmt_expr(bound));
                    for v in vector {
                        let _ = writeln!(out, "       ({})", fmt_expr(v));
                    }
                }
                Constraint::Exp2Le { exponent, upper } => {
                    let _ = writeln!(
                        out,
                        "  exp: 2^({}) <= {}",
                        fmt_expr(exponent),
                        fmt_expr(upper)
                    );
                }
            }
        }
        out
    }

    /// Solves the problem. The returned status says whether `values` may
    /// be used; infeasibility and numerical breakdown are reported there
    /// rather than as a Rust error, since both are expected outcomes for
    /// an iterative caller that will retry or skip.
    pub fn solve(&self) -> ConicSolution {
        let objective = self.objective.expect("objective not set");
        let n = self.num_flat;

        // Rows are emitted grouped by cone: equalities (zero cone),
        // linear inequalities (nonnegative cone), one SOC block per
        // norm-type constraint, one exponential cone triple per 2^x
        // constraint. s = b - A x must land in the cone.
        let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
        let mut b: Vec<f64> = Vec::new();
        let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
        let mut row = 0usize;

        let push_row = |triplets: &mut Vec<(usize, usize, f64)>,
                            b: &mut Vec<f64>,
                            row: &mut usize,
                            expr: &LinExpr,
                            sign: f64,
                            rhs: f64| {
            // emits row: sign * expr terms into A, b = rhs
            for &(idx, c) in &expr.terms {
                triplets.push((*row, idx, sign * c));
            }
            b.push(rhs);
            *row += 1;
        };

        let mut num_eq = 0;
        for c in &self.constraints {
            if let Constraint::LinearEq { expr, rhs } = c {
                // A x = b  with  s = 0
                push_row(&mut triplets, &mut b, &mut row, expr, 1.0, rhs - expr.constant);
                num_eq += 1;
            }
        }
        if num_eq > 0 {
            cones.push(SupportedConeT::ZeroConeT(num_eq));
        }

        let mut num_ineq = 0;
        for c in &self.constraints {
            if let Constraint::LinearLe { expr, rhs } = c {
                // s = rhs - expr >= 0
                push_row(&mut triplets, &mut b, &mut row, expr, 1.0, rhs - expr.constant);
                num_ineq += 1;
            }
        }
        if num_ineq > 0 {
            cones.push(SupportedConeT::NonnegativeConeT(num_ineq));
        }

        for c in &self.constraints {
            match c {
                Constraint::NormLe { vector, bound } => {
                    // s = (bound, v_1..v_m) in SOC of dim m+1
                    push_row(&mut triplets, &mut b, &mut row, bound, -1.0, bound.constant);
                    for v in vector {
                        push_row(&mut triplets, &mut b, &mut row, v, -1.0, v.constant);
                    }
                    cones.push(SupportedConeT::SecondOrderConeT(vector.len() + 1));
                }
                Constraint::SumSquaresLe { squares, bound } => {
                    // sum q_i^2 <= L  <=>  ((L+1)/2, (L-1)/2, q) in SOC
                    let hi = bound.clone().plus_constant(1.0).scaled(0.5);
                    let lo = bound.clone().plus_constant(-1.0).scaled(0.5);
                    push_row(&mut triplets, &mut b, &mut row, &hi, -1.0, hi.constant);
                    push_row(&mut triplets, &mut b, &mut row, &lo, -1.0, lo.constant);
                    for q in squares {
                        push_row(&mut triplets, &mut b, &mut row, q, -1.0, q.constant);
                    }
                    cones.push(SupportedConeT::SecondOrderConeT(squares.len() + 2));
                }
                _ => {}
            }
        }

        for c in &self.constraints {
            if let Constraint::Exp2Le { exponent, upper } = c {
                // 2^a <= u  <=>  (a ln2, 1, u) in K_exp = {y e^{x/y} <= z}
                let x_expr = exponent.clone().scaled(std::f64::consts::LN_2);
                push_row(&mut triplets, &mut b, &mut row, &x_expr, -1.0, x_expr.constant);
                push_row(
                    &mut triplets,
                    &mut b,
                    &mut row,
                    &LinExpr::default(),
                    -1.0,
                    1.0,
                );
                push_row(&mut triplets, &mut b, &mut row, upper, -1.0, upper.constant);
                cones.push(SupportedConeT::ExponentialConeT());
            }
        }

        let m = row;
        let a = triplets_to_csc(m, n, triplets);
        let p = CscMatrix::zeros((n, n));
        let mut q = vec![0.0; n];
        q[objective] = -1.0; // Clarabel minimizes

        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .max_iter(MAX_ITERATIONS)
            .build()
            .expect("static solver settings");

        let blocks: Vec<(String, BlockRef)> = self
            .blocks
            .iter()
            .map(|bl| {
                (
                    bl.name.clone(),
                    BlockRef {
                        offset: bl.offset,
                        len: bl.len,
                        complex: bl.complex,
                    },
                )
            })
            .collect();

        let failure = |status| ConicSolution {
            status,
            values: vec![0.0; n],
            objective_value: f64::NEG_INFINITY,
            max_constraint_violation: f64::INFINITY,
            iterations: 0,
            blocks: blocks.clone(),
        };

        let mut solver = match DefaultSolver::new(&p, &q, &a, &b, &cones, settings) {
            Ok(s) => s,
            Err(e) => {
                log::error!("solver rejected problem: {e:?}");
                return failure(SolveStatus::NumericalFailure);
            }
        };
        solver.solve();

        let status = match solver.solution.status {
            SolverStatus::Solved => SolveStatus::Optimal,
            SolverStatus::AlmostSolved => SolveStatus::NearOptimal,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                SolveStatus::Infeasible
            }
            other => {
                log::debug!("solver terminated with {other:?}");
                SolveStatus::NumericalFailure
            }
        };
        if !status.is_usable() {
            return failure(status);
        }

        let values = solver.solution.x.clone();
        let max_constraint_violation = self.max_violation(&values);
        let status = if max_constraint_violation > AUDIT_TOLERANCE {
            log::warn!(
                "audit rejected solver point: violation {max_constraint_violation:.3e} > {AUDIT_TOLERANCE:.0e}"
            );
            SolveStatus::NumericalFailure
        } else {
            status
        };
        ConicSolution {
            status,
            objective_value: values[objective],
            values,
            max_constraint_violation,
            iterations: solver.solution.iterations,
            blocks,
        }
    }
}

/// Builds an m x n CSC matrix from (row, col, value) triplets,
/// accumulating duplicates.
fn triplets_to_csc(m: usize, n: usize, mut triplets: Vec<(usize, usize, f64)>) -> CscMatrix<f64> {
    triplets.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
    let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
    for (row, col, val) in triplets {
        debug_assert!(row < m && col < n);
        match merged.last_mut() {
            Some((r, c, v)) if *r == row && *c == col => *v += val,
            _ => merged.push((row, col, val)),
        }
    }
    let mut colptr = vec![0usize; n + 1];
    for &(_, col, _) in &merged {
        colptr[col + 1] += 1;
    }
    for c in 0..n {
        colptr[c + 1] += colptr[c];
    }
    let rowval = merged.iter().map(|&(r, _, _)| r).collect();
    let nzval = merged.iter().map(|&(_, _, v)| v).collect();
    CscMatrix::new(m, n, colptr, rowval, nzval)
}
