use std::io::Write;
use std::path::Path;
use std::time::Instant;

use psifrac::fracops::{frac_integral, frac_integral_nodes};
use psifrac::solver::{
    check_conditions, convergence_study, estimate_lipschitz, homogeneous_coefficient,
    residual_report, solve, ConditionReport, Grid, GridSolution, SolverOptions,
};
use psifrac::{Execution, Expr, PsiFunction, PsiKind, SampledFunction};
use serde_json::json;

use crate::config::ProblemFile;
use crate::error::{exit, CliError};
use crate::output::{self, SolveReport};

/// Overrides for the `[solver]` section.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolveFlags {
    pub nodes: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub sequential: bool,
}

impl SolveFlags {
    fn apply(&self, mut opts: SolverOptions) -> SolverOptions {
        if let Some(n) = self.nodes {
            opts.nodes_per_segment = n;
        }
        if let Some(t) = self.tol {
            opts.tol = t;
        }
        if let Some(m) = self.max_iter {
            opts.max_iter = m;
        }
        if self.sequential {
            opts.exec = Execution::Sequential;
        }
        opts
    }
}

/// Conditions with the declared L, or an estimate over the file's u range
/// (default [−r, r]) when none is declared.
pub fn conditions_for(
    pf: &ProblemFile,
    l_override: Option<f64>,
) -> Result<ConditionReport, CliError> {
    let spec = &pf.spec;
    let declared = l_override.or(spec.lipschitz());
    let l = match declared {
        Some(l) => l,
        None => {
            let r = check_conditions(spec, 1.0, None)?.r;
            let range = pf
                .u_range
                .unwrap_or(if r > 0.0 { (-r, r) } else { (-1.0, 1.0) });
            let est = estimate_lipschitz(spec.f(), spec.psi(), range)?;
            // a u-independent f is 0-Lipschitz; any positive L certifies it
            if est > 0.0 {
                est
            } else {
                f64::MIN_POSITIVE
            }
        }
    };
    let mut rep = check_conditions(spec, l, None)?;
    rep.l_estimated = declared.is_none();
    Ok(rep)
}

pub fn cmd_solve(
    path: &Path,
    out_dir: &Path,
    flags: SolveFlags,
    out: &mut dyn Write,
) -> Result<u8, CliError> {
    let pf = ProblemFile::load(path)?;
    let opts = flags.apply(pf.options);
    if opts.nodes_per_segment < 16 {
        return Err(CliError::config("--nodes", "must be at least 16"));
    }
    let conditions = conditions_for(&pf, None)?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut report = SolveReport::new(
        &pf.sha256,
        opts.nodes_per_segment,
        pf.spec.segment_count(),
        &conditions,
    );
    let report_path = out_dir.join("report.json");

    let start = Instant::now();
    let result = solve(&pf.spec, &opts);
    report.wall_time_s = start.elapsed().as_secs_f64();
    match result {
        Ok(sol) => {
            report.status = "converged".into();
            report.iterations = sol.iterations();
            report.final_update_norm = sol.final_update_norm();
            report.update_norms = sol.update_norms().to_vec();
            report.contraction_ratios = sol.contraction_ratios().to_vec();
            output::write_solution_csv(&out_dir.join("solution.csv"), &sol)?;
            report.write(&report_path)?;
            writeln!(
                out,
                "converged in {} iterations (update {:e}); wrote {}",
                sol.iterations(),
                sol.final_update_norm(),
                out_dir.display()
            )
            .ok();
            if !conditions.uniqueness_ok {
                writeln!(
                    out,
                    "note: L = {} exceeds the uniqueness bound {}",
                    conditions.l_used, conditions.l_bound
                )
                .ok();
            }
            Ok(exit::OK)
        }
        Err(psifrac::Error::NoConvergence {
            iterations,
            last_update,
            update_norms,
            ratios,
        }) => {
            report.status = "no_convergence".into();
            report.iterations = iterations;
            report.final_update_norm = last_update;
            report.update_norms = update_norms;
            report.contraction_ratios = ratios;
            report.write(&report_path)?;
            writeln!(
                out,
                "no convergence after {iterations} iterations (last update {last_update:e})"
            )
            .ok();
            Ok(exit::NO_CONVERGENCE)
        }
        Err(e @ psifrac::Error::NonFiniteIterate { .. }) => {
            report.status = "diverged".into();
            report.write(&report_path)?;
            writeln!(out, "{e}").ok();
            Ok(exit::NO_CONVERGENCE)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_check(
    path: &Path,
    l_override: Option<f64>,
    out: &mut dyn Write,
) -> Result<u8, CliError> {
    let pf = ProblemFile::load(path)?;
    let rep = conditions_for(&pf, l_override)?;
    let mut value = serde_json::to_value(&rep).expect("condition report serializes");
    // existence and uniqueness share the Lipschitz hypothesis
    value["existence_ok"] = json!(rep.uniqueness_ok);
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&value).expect("json")
    )
    .ok();
    Ok(if rep.all_ok() {
        exit::OK
    } else {
        exit::CONDITION_FAILED
    })
}

#[derive(Debug, Clone, Copy)]
pub struct Thresholds {
    pub integral: f64,
    pub differential: f64,
    pub jump: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            integral: 1e-6,
            differential: 1e-2,
            jump: 1e-8,
        }
    }
}

pub fn cmd_residual(
    path: &Path,
    csv_path: &Path,
    th: Thresholds,
    out: &mut dyn Write,
) -> Result<u8, CliError> {
    let pf = ProblemFile::load(path)?;
    let dir = csv_path.parent().unwrap_or(Path::new("."));
    let report = SolveReport::read(&dir.join("report.json"))?;
    if report.problem_sha256 != pf.sha256 {
        return Err(CliError::Mismatch(format!(
            "report.json was produced from a problem with hash {}, this file hashes to {}",
            report.problem_sha256, pf.sha256
        )));
    }
    let rows = output::read_solution_csv(csv_path)?;
    let grid = Grid::new(&pf.spec, report.nodes_per_segment)?;
    if rows.len() != grid.len() {
        return Err(CliError::Mismatch(format!(
            "{} rows for a grid of {} nodes",
            rows.len(),
            grid.len()
        )));
    }
    for (j, row) in rows.iter().enumerate() {
        let t = grid.t()[j];
        if row.segment != grid.segment_of(j) || (row.t - t).abs() > 1e-12 * t.abs().max(1.0) {
            return Err(CliError::Mismatch(format!(
                "row {j} does not sit on grid node t = {t}"
            )));
        }
    }
    let coefficients = (0..grid.segment_count())
        .map(|k| homogeneous_coefficient(&pf.spec, k))
        .collect::<Result<Vec<_>, _>>()?;
    let w: Vec<f64> = rows.iter().map(|r| r.w).collect();
    let sol = GridSolution::from_weighted(grid, pf.spec.rho(), w, coefficients)?;

    // u and w columns must describe the same function
    let mut column_gap = 0.0f64;
    for (j, row) in rows.iter().enumerate() {
        let u = sol.u_at(j);
        let gap = if u.is_infinite() || row.u.is_infinite() {
            if u == row.u {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (u - row.u).abs() / u.abs().max(1.0)
        };
        column_gap = column_gap.max(gap);
    }

    let rep = residual_report(&pf.spec, &sol)?;
    let ok = rep.within(th.integral, th.differential, th.jump) && column_gap <= 1e-12;
    let value = json!({
        "integral_defect": rep.integral_defect,
        "differential_defect": rep.differential_defect,
        "jump_defects": rep.jump_defects,
        "max_jump_defect": rep.max_jump_defect(),
        "u_w_consistency": column_gap,
        "thresholds": {"integral": th.integral, "differential": th.differential, "jump": th.jump},
        "pass": ok,
    });
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&value).expect("json")
    )
    .ok();
    Ok(if ok { exit::OK } else { exit::CHECK_FAILED })
}

fn format_order(order: Option<f64>, at_roundoff: bool) -> String {
    match order {
        Some(p) => format!("{p:.3}"),
        None if at_roundoff => "exact".into(),
        None => "-".into(),
    }
}

pub fn cmd_convergence(
    path: &Path,
    levels: usize,
    nodes: Option<usize>,
    semigroup: bool,
    out: &mut dyn Write,
) -> Result<u8, CliError> {
    if levels < 3 {
        return Err(CliError::config("--levels", "need at least 3 levels"));
    }
    let pf = ProblemFile::load(path)?;
    let base = nodes
        .unwrap_or(pf.options.nodes_per_segment >> (levels - 1))
        .max(16);
    if semigroup {
        return semigroup_study(&pf, base, levels, out);
    }
    let opts = pf.options.with_nodes(base);
    let table = convergence_study(&pf.spec, pf.exact.as_ref(), levels, &opts)?;
    writeln!(out, "reference: {}", table.reference).ok();
    writeln!(out, "{:>8}  {:>12}  {:>8}", "N", "error", "order").ok();
    for row in &table.rows {
        let err = row.error.map_or("-".to_string(), |e| format!("{e:.4e}"));
        let order = format_order(row.order, row.at_roundoff);
        writeln!(
            out,
            "{:>8}  {:>12}  {:>8}",
            row.nodes_per_segment, err, order
        )
        .ok();
    }
    if pf.exact.is_none() || table.all_at_roundoff() {
        return Ok(exit::OK);
    }
    Ok(match table.final_order() {
        Some(p) if p >= 1.0 => exit::OK,
        _ => exit::CHECK_FAILED,
    })
}

/// I^{0.3}I^{0.4}h against I^{0.7}h for h = sin(Ψ(t)) on the problem's Ψ.
fn semigroup_study(
    pf: &ProblemFile,
    base: usize,
    levels: usize,
    out: &mut dyn Write,
) -> Result<u8, CliError> {
    let psi = pf.spec.psi();
    writeln!(out, "semigroup I^0.3 I^0.4 h vs I^0.7 h, h = sin(psi(t))").ok();
    writeln!(out, "{:>8}  {:>12}  {:>8}", "N", "max gap", "order").ok();
    let mut prev: Option<f64> = None;
    let mut last_order = None;
    for l in 0..levels {
        let n = base << l;
        let h =
            SampledFunction::uniform_in_psi(psi, n, |t| psi.eval(t).map_or(f64::NAN, f64::sin))?;
        let inner = frac_integral_nodes(&h, 0.4, Execution::Auto)?;
        let twice = frac_integral_nodes(&h.with_values(inner), 0.3, Execution::Auto)?;
        let direct = frac_integral_nodes(&h, 0.7, Execution::Auto)?;
        let gap = twice
            .iter()
            .zip(&direct)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let order = prev.map(|p| (p / gap).log2());
        writeln!(
            out,
            "{:>8}  {:>12.4e}  {:>8}",
            n,
            gap,
            format_order(order, false)
        )
        .ok();
        last_order = order.or(last_order);
        prev = Some(gap);
    }
    Ok(match last_order {
        Some(p) if p >= 1.5 => exit::OK,
        _ => exit::CHECK_FAILED,
    })
}

/// Parses `identity`, `power:<rho>`, `log` or `expr:<formula in t>`.
pub fn parse_psi_spec(spec: &str, a: f64, end: f64) -> Result<PsiFunction, CliError> {
    let kind = match spec.split_once(':') {
        None if spec == "identity" => PsiKind::Identity,
        None if spec == "log" => PsiKind::Logarithm,
        Some(("power", rho)) => PsiKind::Power(
            rho.trim()
                .parse()
                .map_err(|_| CliError::config("--psi", format!("bad exponent `{rho}`")))?,
        ),
        Some(("expr", src)) => PsiKind::Expression {
            formula: Expr::parse(src, &["t"]).map_err(|e| CliError::config("--psi", e))?,
            derivative: None,
        },
        _ => {
            return Err(CliError::config(
                "--psi",
                format!("`{spec}` is not one of identity, power:<rho>, log, expr:<formula>"),
            ))
        }
    };
    PsiFunction::new(kind, a, end).map_err(|e| CliError::config("--psi", e))
}

#[derive(Debug, serde::Deserialize)]
struct DataRow {
    t: f64,
    h: f64,
}

pub fn cmd_operators(
    data: &Path,
    mu: f64,
    psi_spec: &str,
    ts: &[f64],
    out: &mut dyn Write,
) -> Result<u8, CliError> {
    let mut rdr = csv::Reader::from_path(data).map_err(|e| output::csv_error(data, e))?;
    let rows: Vec<DataRow> = rdr
        .deserialize()
        .map(|r| r.map_err(|e| output::csv_error(data, e)))
        .collect::<Result<_, _>>()?;
    if rows.len() < 2 {
        return Err(CliError::Data {
            path: data.to_path_buf(),
            message: "need at least two rows".into(),
        });
    }
    let nodes: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let values: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let psi = parse_psi_spec(psi_spec, nodes[0], nodes[nodes.len() - 1])?;
    let h = SampledFunction::new(&psi, nodes, values)?;
    for &t in ts {
        let v = frac_integral(&h, mu, &psi, t)?;
        writeln!(out, "{t},{v}").ok();
    }
    Ok(exit::OK)
}
