use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use psifrac::fracops::quadrature::{DataWeight, ProductRule};
use psifrac::solver::{solve_impulsive, ImpulseSchedule, ProblemSpec, SolverOptions};
use psifrac::{Execution, Expr, OrderPair, PsiFunction};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn table_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("product_rule_build");
    group.sample_size(10);
    for n in [512usize, 2048] {
        let s: Vec<f64> = (0..=n).map(|j| j as f64 / n as f64).collect();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &s, |b, s| {
                b.iter(|| {
                    ProductRule::build(
                        black_box(s),
                        0.4,
                        DataWeight::SingularStart { rho: 0.7 },
                        exec,
                    )
                    .unwrap()
                })
            });
        }
    }
    group.finish();
}

fn solve(c: &mut Criterion) {
    let spec = ProblemSpec::new(
        OrderPair::new(0.5, 0.5).unwrap(),
        PsiFunction::identity(0.0, 1.0).unwrap(),
        1.0,
        Expr::parse("sin(t)^4/(t+3)^3*abs(u)/(1+abs(u))", &["t", "u"]).unwrap(),
    )
    .unwrap()
    .with_impulses(ImpulseSchedule::new(vec![1.0 / 3.0], vec![0.1]).unwrap())
    .unwrap();
    let mut group = c.benchmark_group("solve_impulsive");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = SolverOptions::default().with_nodes(1024).with_exec(exec);
        group.bench_function(name, |b| {
            b.iter(|| solve_impulsive(black_box(&spec), &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, table_build, solve);
criterion_main!(benches);
