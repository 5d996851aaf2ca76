//! The two worked examples: the Caputo problem with exact solution t² and
//! the bounded-nonlinearity problem with an impulse at t = 1/3.

use std::time::Instant;

use psifrac::solver::{
    check_conditions, convergence_study, residual_report, solve_caputo, solve_impulsive,
    ImpulseSchedule, ProblemSpec, SolverOptions,
};
use psifrac::{Expr, OrderPair, PsiFunction};

const EXAMPLE1_F: &str = "9/(5*gamma(2/3))*t^(5/3) - t^4/16 + u^2/16";
const EXAMPLE2_F: &str = "sin(t)^4/(t+3)^3*abs(u)/(1+abs(u))";

fn example1() -> ProblemSpec {
    ProblemSpec::new(
        OrderPair::new(1.0 / 3.0, 1.0).unwrap(),
        PsiFunction::identity(0.0, 1.0).unwrap(),
        0.0,
        Expr::parse(EXAMPLE1_F, &["t", "u"]).unwrap(),
    )
    .unwrap()
    .with_impulses(ImpulseSchedule::new(vec![0.5], vec![0.0]).unwrap())
    .unwrap()
    .with_lipschitz(0.125)
    .unwrap()
}

fn example2() -> ProblemSpec {
    ProblemSpec::new(
        OrderPair::new(0.5, 0.5).unwrap(),
        PsiFunction::identity(0.0, 1.0).unwrap(),
        1.0,
        Expr::parse(EXAMPLE2_F, &["t", "u"]).unwrap(),
    )
    .unwrap()
    .with_impulses(ImpulseSchedule::new(vec![1.0 / 3.0], vec![0.1]).unwrap())
    .unwrap()
    .with_lipschitz(1.0 / 64.0)
    .unwrap()
}

#[test]
fn example1_recovers_t_squared() {
    let spec = example1();
    let start = Instant::now();
    let sol = solve_impulsive(&spec, &SolverOptions::default().with_nodes(2048)).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let err = sol
        .grid()
        .t()
        .iter()
        .zip(sol.u())
        .fold(0.0f64, |m, (t, u)| m.max((u - t * t).abs()));
    eprintln!(
        "example 1: err {err:e}, {} iterations, {elapsed:.2}s",
        sol.iterations()
    );
    assert!(err <= 1e-3, "{err:e}");
    assert!(elapsed <= 60.0);

    let rep = residual_report(&spec, &sol).unwrap();
    eprintln!("{rep:?}");
    assert!(rep.integral_defect <= 1e-11);
    assert!(rep.differential_defect <= 1e-2);
    assert!(rep.max_jump_defect() <= 1e-10);
}

#[test]
fn example1_converges_at_first_order() {
    let spec = example1();
    let exact = Expr::parse("t^2", &["t"]).unwrap();
    let table = convergence_study(
        &spec,
        Some(&exact),
        3,
        &SolverOptions::default().with_nodes(512),
    )
    .unwrap();
    eprintln!("{table:?}");
    for row in &table.rows[1..] {
        assert!(row.order.unwrap() >= 1.0, "{table:?}");
    }
}

#[test]
fn example1_caputo_shortcut_matches_general_path() {
    let spec = example1();
    let opts = SolverOptions::default().with_nodes(256);
    let general = solve_impulsive(&spec, &opts).unwrap();
    let shortcut = solve_caputo(&spec, &opts).unwrap();
    for (a, b) in general.u().iter().zip(shortcut.u()) {
        assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn example1_conditions() {
    let rep = check_conditions(&example1(), 0.125, None).unwrap();
    assert!((rep.l_bound - 0.446_489_755_784_624_6).abs() < 1e-12);
    assert!(rep.uniqueness_ok);
}

#[test]
fn example2_contracts_within_computed_constant() {
    let spec = example2();
    let rep = check_conditions(&spec, 1.0 / 64.0, None).unwrap();
    assert!(rep.uniqueness_ok);
    let sol = solve_impulsive(&spec, &SolverOptions::default().with_nodes(512)).unwrap();
    eprintln!(
        "example 2: constant {} ratios {:?}",
        rep.contraction_constant,
        sol.contraction_ratios()
    );
    for &r in sol.contraction_ratios().iter().skip(1) {
        assert!(r <= rep.contraction_constant + 0.05, "{r}");
    }
    let res = residual_report(&spec, &sol).unwrap();
    eprintln!("{res:?}");
    assert!(res.integral_defect <= 1e-11);
    assert!(res.max_jump_defect() <= 1e-10);
    assert!(res.differential_defect <= 1e-2);
}
