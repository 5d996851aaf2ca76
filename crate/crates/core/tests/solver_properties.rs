use psifrac::fracops::gamma_fn;
use psifrac::solver::{
    check_conditions, picard_step, residual_report, solve_impulsive, solve_nonlocal, GridSolution,
    ImpulseSchedule, NonlocalSpec, ProblemSpec, SolverOptions,
};
use psifrac::{Execution, Expr, OrderPair, PsiFunction, PsiKind};

fn problem(mu: f64, nu: f64, psi: PsiFunction, delta: f64, f: &str) -> ProblemSpec {
    ProblemSpec::new(
        OrderPair::new(mu, nu).unwrap(),
        psi,
        delta,
        Expr::parse(f, &["t", "u"]).unwrap(),
    )
    .unwrap()
}

fn opts(n: usize) -> SolverOptions {
    SolverOptions::default().with_nodes(n)
}

#[test]
fn impulses_superpose_for_u_independent_rhs() {
    let psi = PsiFunction::new(PsiKind::Power(1.5), 1.0, 2.0).unwrap();
    let times = vec![1.2, 1.5, 1.8];
    let jumps = vec![0.4, -0.7, 0.25];
    let base = problem(0.4, 0.3, psi.clone(), 0.8, "cos(3*t) + t^2");
    let kicked = base
        .clone()
        .with_impulses(ImpulseSchedule::new(times.clone(), jumps.clone()).unwrap())
        .unwrap();
    let free = base
        .with_impulses(ImpulseSchedule::new(times.clone(), vec![0.0; 3]).unwrap())
        .unwrap();
    let a = solve_impulsive(&kicked, &opts(64)).unwrap();
    let b = solve_impulsive(&free, &opts(64)).unwrap();

    let rep = residual_report(&kicked, &a).unwrap();
    assert_eq!(rep.jump_defects.len(), 3);
    assert!(rep.max_jump_defect() <= 1e-10, "{rep:?}");

    let rho = kicked.rho();
    let g = gamma_fn(rho).unwrap();
    let s0 = psi.psi_a();
    for j in 1..a.grid().len() {
        let t = a.grid().t()[j];
        let kick: f64 = times
            .iter()
            .zip(&jumps)
            .filter(|(tk, _)| **tk < t)
            .map(|(_, z)| z)
            .sum();
        let omega = (a.grid().s()[j] - s0).powf(rho - 1.0) / g;
        let diff = a.u()[j] - (b.u()[j] + kick * omega);
        assert!(diff.abs() <= 1e-12, "node {j}: {diff:e}");
    }
}

#[test]
fn jump_defect_reflects_wrong_jump() {
    let psi = PsiFunction::identity(0.0, 1.0).unwrap();
    let spec = problem(0.5, 0.5, psi, 1.0, "t")
        .with_impulses(ImpulseSchedule::new(vec![0.5], vec![0.3]).unwrap())
        .unwrap();
    let sol = solve_impulsive(&spec, &opts(32)).unwrap();
    let other = spec
        .clone()
        .with_impulses(ImpulseSchedule::new(vec![0.5], vec![0.2]).unwrap())
        .unwrap();
    let rep = residual_report(&other, &sol).unwrap();
    assert!((rep.jump_defects[0] - 0.1).abs() < 1e-12);
}

#[test]
fn nonlocal_zero_functional_is_bitwise_impulsive() {
    let psi = PsiFunction::new(PsiKind::Logarithm, 1.0, 2.5).unwrap();
    let spec = problem(0.6, 0.3, psi, 0.5, "sin(u)/6 + ln(t)")
        .with_impulses(ImpulseSchedule::new(vec![1.7], vec![0.2]).unwrap())
        .unwrap();
    let zero = NonlocalSpec::new(
        vec![2.0, 2.5],
        Expr::parse("0*x1 + 0*x2", &["x1", "x2"]).unwrap(),
        0.01,
    )
    .unwrap();
    let a = solve_impulsive(&spec, &opts(48)).unwrap();
    let b = solve_nonlocal(&spec.clone().with_nonlocal(zero).unwrap(), &opts(48)).unwrap();
    assert_eq!(a.w(), b.w());
    assert_eq!(a.iterations(), b.iterations());
}

#[test]
fn nonlocal_constant_functional_shifts_delta() {
    let psi = PsiFunction::identity(0.0, 2.0).unwrap();
    let spec = problem(0.5, 0.5, psi, 1.0, "u/10 + 1");
    let c =
        NonlocalSpec::new(vec![1.0], Expr::parse("0.4 + 0*x1", &["x1"]).unwrap(), 0.01).unwrap();
    let a = solve_nonlocal(&spec.clone().with_nonlocal(c).unwrap(), &opts(40)).unwrap();
    let b = solve_impulsive(&spec.with_delta(0.6), &opts(40)).unwrap();
    for (x, y) in a.w().iter().zip(b.w()) {
        assert!((x - y).abs() <= 1e-13);
    }
}

#[test]
fn nonlocal_manufactured_fixed_point() {
    let psi = PsiFunction::identity(0.0, 1.0).unwrap();
    let delta = 0.9;
    let half = NonlocalSpec::new(vec![1.0], Expr::parse("x1/2", &["x1"]).unwrap(), 0.5).unwrap();
    let spec = problem(0.3, 1.0, psi, delta, "0")
        .with_nonlocal(half)
        .unwrap();
    let sol = solve_nonlocal(&spec, &opts(16)).unwrap();
    for u in sol.u() {
        assert!((u - 2.0 * delta / 3.0).abs() <= 1e-12, "{u}");
    }
    // the functional halves the error each step
    for &r in &sol.contraction_ratios()[1..] {
        assert!((r - 0.5).abs() < 1e-3, "{r}");
    }
}

#[test]
fn nonlocal_trace_after_impulse_uses_right_limit() {
    // f ≡ 0, ϱ = 1: u = δ − g + ζ on (t₁, T]; g = x1 read just after t₁
    let psi = PsiFunction::identity(0.0, 1.0).unwrap();
    let g = NonlocalSpec::new(
        vec![0.5 + 1.0 / 64.0],
        Expr::parse("x1/4", &["x1"]).unwrap(),
        0.25,
    )
    .unwrap();
    let spec = problem(0.5, 1.0, psi, 1.0, "0")
        .with_impulses(ImpulseSchedule::new(vec![0.5], vec![1.0]).unwrap())
        .unwrap()
        .with_nonlocal(g)
        .unwrap();
    let sol = solve_nonlocal(&spec, &opts(16)).unwrap();
    // v = 2 − v/4 on the second segment
    let v = 8.0 / 5.0;
    assert!((sol.u().last().unwrap() - v).abs() < 1e-12);
    assert!((sol.u()[0] - (v - 1.0)).abs() < 1e-12);
}

#[test]
fn observed_ratios_respect_contraction_constant() {
    let cases = [
        (
            0.5,
            0.5,
            PsiFunction::identity(0.0, 1.0).unwrap(),
            "0.3*sin(u) + t",
        ),
        (
            0.3,
            0.8,
            PsiFunction::new(PsiKind::Logarithm, 1.0, 2.0).unwrap(),
            "0.25*u*cos(t) + 1",
        ),
        (
            0.7,
            0.2,
            PsiFunction::new(PsiKind::Power(2.0), 0.5, 1.5).unwrap(),
            "0.1*u/(1+u^2)",
        ),
    ];
    for (mu, nu, psi, f) in cases {
        let spec = problem(mu, nu, psi.clone(), 1.0, f)
            .with_impulses(
                ImpulseSchedule::new(
                    vec![psi.inverse(0.5 * (psi.psi_a() + psi.psi_end())).unwrap()],
                    vec![0.5],
                )
                .unwrap(),
            )
            .unwrap();
        let l = psifrac::solver::estimate_lipschitz(spec.f(), &psi, (-20.0, 20.0)).unwrap();
        let rep = check_conditions(&spec, l, None).unwrap();
        assert!(rep.uniqueness_ok, "{f}: {rep:?}");
        let sol = solve_impulsive(&spec, &opts(128)).unwrap();
        for &r in sol.contraction_ratios().iter().skip(1) {
            assert!(
                r <= rep.contraction_constant + 0.05,
                "{f}: {r} vs {}",
                rep.contraction_constant
            );
        }
        let again = picard_step(&spec, &sol).unwrap();
        let moved = again
            .w()
            .iter()
            .zip(sol.w())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(moved <= 10.0 * 1e-12 * sol.w().iter().fold(1.0f64, |m, w| m.max(w.abs())));
    }
}

#[test]
fn corrupted_solution_is_flagged() {
    let psi = PsiFunction::identity(0.0, 1.0).unwrap();
    let spec = problem(0.5, 0.5, psi, 1.0, "u^2/16 + t")
        .with_impulses(ImpulseSchedule::new(vec![0.5], vec![0.1]).unwrap())
        .unwrap();
    let sol = solve_impulsive(&spec, &opts(64)).unwrap();
    for node in [1, 30, 64, 65, 128] {
        let mut w = sol.w().to_vec();
        w[node] += 0.1;
        let bad = GridSolution::from_weighted(
            sol.grid().clone(),
            sol.rho(),
            w,
            sol.coefficients().to_vec(),
        )
        .unwrap();
        let rep = residual_report(&spec, &bad).unwrap();
        assert!(rep.integral_defect >= 0.05, "node {node}: {rep:?}");
    }
}

#[test]
fn sequential_and_parallel_paths_agree_bitwise() {
    let psi = PsiFunction::new(PsiKind::Power(2.0), 0.5, 1.5).unwrap();
    let spec = problem(0.35, 0.6, psi, 0.7, "0.2*sin(u) + t")
        .with_impulses(ImpulseSchedule::new(vec![1.0], vec![-0.3]).unwrap())
        .unwrap();
    let seq = solve_impulsive(&spec, &opts(300).with_exec(Execution::Sequential)).unwrap();
    let par = solve_impulsive(&spec, &opts(300).with_exec(Execution::Parallel)).unwrap();
    assert_eq!(seq.w(), par.w());
    assert_eq!(seq.iterations(), par.iterations());
}
