//! Shared helpers for the integration suites.
#![allow(dead_code)]

use crs::conic::{re_inner, ConicProblem, Constraint, LinExpr};
use num_complex::Complex64;

/// One hand-solvable conic instance: solver result vs. closed form.
pub struct BatteryCase {
    pub name: &'static str,
    pub got: f64,
    pub want: f64,
}

impl BatteryCase {
    pub fn relative_error(&self) -> f64 {
        (self.got - self.want).abs() / self.want.abs()
    }
}

/// A battery of conic programs whose optima are known in closed form:
/// exponential-cone chains (`max a : 2^a <= 1 + r, r <= 2^k - 1` has
/// optimum `a = k`), linear minima, Cauchy–Schwarz second-order-cone
/// instances (`max Re<h, p> : ||p||^2 <= P` has optimum `||h|| sqrt(P)`),
/// quadratic bounds, and small max-min rate toys.
pub fn conic_battery() -> Vec<BatteryCase> {
    let mut cases = Vec::new();

    // exponential-cone range: optimum a = k. Capped at k = 35 (bounds
    // near 2^40 overflow the interior-point scaling); realistic SINR
    // slacks stay below 2^20.
    for &k in &[1.0_f64, 3.0, 5.0, 8.0, 13.0, 20.0, 30.0, 35.0] {
        let mut p = ConicProblem::new();
        let a = p.add_scalar("a");
        let r = p.add_scalar("r");
        p.maximize(a);
        p.add(Constraint::Exp2Le {
            exponent: LinExpr::variable(a),
            upper: LinExpr::variable(r).plus_constant(1.0),
        });
        p.add(Constraint::LinearLe {
            expr: LinExpr::variable(r),
            rhs: 2f64.powf(k) - 1.0,
        });
        p.add(Constraint::LinearLe {
            expr: LinExpr::term(r, -1.0),
            rhs: 0.0,
        });
        cases.push(BatteryCase {
            name: "exp-range",
            got: solve_objective("exp-range", &p),
            want: k,
        });
    }

    // linear minimum of two bounds: optimum min(a, b)
    for &(a_val, b_val) in &[(1.0, 2.0), (3.0, 0.5), (2.5, 2.5), (0.1, 7.0)] {
        let mut p = ConicProblem::new();
        let t = p.add_scalar("t");
        p.maximize(t);
        p.add(Constraint::LinearLe {
            expr: LinExpr::variable(t),
            rhs: a_val,
        });
        p.add(Constraint::LinearLe {
            expr: LinExpr::variable(t),
            rhs: b_val,
        });
        cases.push(BatteryCase {
            name: "linear-min",
            got: solve_objective("linear-min", &p),
            want: a_val.min(b_val),
        });
    }

    // Cauchy–Schwarz: max Re<h, p> over ||p||^2 <= power
    let soc_instances: [(&'static str, Vec<Complex64>, f64); 4] = [
        ("cs-real", vec![Complex64::new(1.0, 0.0)], 1.0),
        (
            "cs-complex",
            vec![Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)],
            4.0,
        ),
        (
            "cs-mixed",
            vec![Complex64::new(1.0, 1.0), Complex64::new(1.0, -1.0)],
            2.0,
        ),
        ("cs-scaled", vec![Complex64::new(2.0, 0.0)], 9.0),
    ];
    for (name, h, power) in soc_instances {
        let mut p = ConicProblem::new();
        let t = p.add_scalar("t");
        let pk = p.add_complexes("p", h.len());
        p.maximize(t);
        p.add(Constraint::LinearLe {
            expr: LinExpr::variable(t).sub(&re_inner(&h, pk)),
            rhs: 0.0,
        });
        let mut squares = Vec::new();
        for i in 0..pk.len() {
            squares.push(LinExpr::variable(pk.re(i)));
            squares.push(LinExpr::variable(pk.im(i)));
        }
        p.add(Constraint::SumSquaresLe {
            squares,
            bound: LinExpr::constant(power),
        });
        let h_norm: f64 = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cases.push(BatteryCase {
            name,
            got: solve_objective(name, &p),
            want: h_norm * power.sqrt(),
        });
    }

    // quadratic bound: max x with x^2 <= 4
    {
        let mut p = ConicProblem::new();
        let x = p.add_scalar("x");
        p.maximize(x);
        p.add(Constraint::SumSquaresLe {
            squares: vec![LinExpr::variable(x)],
            bound: LinExpr::constant(4.0),
        });
        cases.push(BatteryCase {
            name: "square",
            got: solve_objective("square", &p),
            want: 2.0,
        });
    }

    // shifted quadratic: max x with (x - 1)^2 <= 9
    {
        let mut p = ConicProblem::new();
        let x = p.add_scalar("x");
        p.maximize(x);
        p.add(Constraint::SumSquaresLe {
            squares: vec![LinExpr::variable(x).plus_constant(-1.0)],
            bound: LinExpr::constant(9.0),
        });
        cases.push(BatteryCase {
            name: "square-shifted",
            got: solve_objective("square-shifted", &p),
            want: 4.0,
        });
    }

    // equality coupling: max x with x + y = 1 and y >= 0.25
    {
        let mut p = ConicProblem::new();
        let x = p.add_scalar("x");
        let y = p.add_scalar("y");
        p.maximize(x);
        p.add(Constraint::LinearEq {
            expr: LinExpr::variable(x).plus(y, 1.0),
            rhs: 1.0,
        });
        p.add(Constraint::LinearLe {
            expr: LinExpr::term(y, -1.0),
            rhs: -0.25,
        });
        cases.push(BatteryCase {
            name: "equality",
            got: solve_objective("equality", &p),
            want: 0.75,
        });
    }

    // norm cone with a pinned coordinate: max x with ||(x, 3)|| <= 5
    {
        let mut p = ConicProblem::new();
        let x = p.add_scalar("x");
        p.maximize(x);
        p.add(Constraint::NormLe {
            vector: vec![LinExpr::variable(x), LinExpr::constant(3.0)],
            bound: LinExpr::constant(5.0),
        });
        cases.push(BatteryCase {
            name: "norm-pinned",
            got: solve_objective("norm-pinned", &p),
            want: 4.0,
        });
    }

    // symmetric two-user rate toy: max min(a1, a2) with
    // 2^{a_i} <= 1 + r_i and r_1 + r_2 <= budget; optimum
    // log2(1 + budget / 2)
    for &budget in &[3.0_f64, 7.0] {
        let mut p = ConicProblem::new();
        let t = p.add_scalar("t");
        let a = p.add_reals("a", 2);
        let r = p.add_reals("r", 2);
        p.maximize(t);
        for i in 0..2 {
            p.add(Constraint::LinearLe {
                expr: LinExpr::variable(t).plus(a.at(i), -1.0),
                rhs: 0.0,
            });
            p.add(Constraint::Exp2Le {
                exponent: LinExpr::variable(a.at(i)),
                upper: LinExpr::variable(r.at(i)).plus_constant(1.0),
            });
            p.add(Constraint::LinearLe {
                expr: LinExpr::term(r.at(i), -1.0),
                rhs: 0.0,
            });
        }
        p.add(Constraint::LinearLe {
            expr: LinExpr::variable(r.at(0)).plus(r.at(1), 1.0),
            rhs: budget,
        });
        cases.push(BatteryCase {
            name: "rate-toy",
            got: solve_objective("rate-toy", &p),
            want: (1.0 + budget / 2.0).log2(),
        });
    }

    cases
}

fn solve_objective(name: &str, problem: &ConicProblem) -> f64 {
    let solution = problem.solve();
    assert!(
        solution.status.is_usable(),
        "battery case {name}: solve unusable: {:?}",
        solution.status
    );
    solution.objective_value
}
