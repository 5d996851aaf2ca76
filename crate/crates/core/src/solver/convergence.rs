use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::solver::grid::{w_from_u, GridSolution};
use crate::solver::picard::{solve, SolverOptions};
use crate::solver::problem::ProblemSpec;

/// Errors below this are rounding noise; orders between such levels are
/// not reported.
const ROUNDOFF: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub nodes_per_segment: usize,
    pub iterations: usize,
    /// max weighted error; absent for the reference level of a self-study
    pub error: Option<f64>,
    /// log₂(e_{N/2}/e_N); absent on the first row or when both errors are
    /// at rounding level
    pub order: Option<f64>,
    pub at_roundoff: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    /// "exact" when measured against a known solution, "finest" otherwise
    pub reference: &'static str,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Last reported order.
    pub fn final_order(&self) -> Option<f64> {
        self.rows.iter().rev().find_map(|r| r.order)
    }

    /// True when every measured error sits at rounding level.
    pub fn all_at_roundoff(&self) -> bool {
        self.rows
            .iter()
            .filter(|r| r.error.is_some())
            .all(|r| r.at_roundoff)
    }
}

/// Solves at N, 2N, …, 2^{levels−1}N nodes per segment (N from `opts`) and
/// reports max weighted errors against `exact` (an expression in t), or
/// against the finest level when no exact solution is given.
pub fn convergence_study(
    spec: &ProblemSpec,
    exact: Option<&Expr>,
    levels: usize,
    opts: &SolverOptions,
) -> Result<ConvergenceTable> {
    if levels < 3 {
        return Err(Error::Problem(format!(
            "convergence study needs at least 3 levels, got {levels}"
        )));
    }
    if let Some(e) = exact {
        if e.variables() != ["t"] {
            return Err(Error::Problem(
                "exact solution must be an expression in t".into(),
            ));
        }
    }
    let sols: Vec<GridSolution> = (0..levels)
        .map(|l| solve(spec, &opts.with_nodes(opts.nodes_per_segment << l)))
        .collect::<Result<_>>()?;
    let rho = spec.rho();
    let skip_a = usize::from(rho < 1.0);
    let errors: Vec<Option<f64>> = match exact {
        Some(e) => sols
            .iter()
            .map(|sol| {
                let (s, t) = (sol.grid().s(), sol.grid().t());
                let mut err = 0.0f64;
                for j in skip_a..sol.w().len() {
                    let we = w_from_u(rho, s[j] - s[0], e.eval(&[t[j]])?);
                    err = err.max((sol.w()[j] - we).abs());
                }
                Ok(Some(err))
            })
            .collect::<Result<_>>()?,
        None => {
            let fine = sols.last().unwrap().w();
            sols.iter()
                .enumerate()
                .map(|(l, sol)| {
                    if l + 1 == levels {
                        return None;
                    }
                    let stride = 1usize << (levels - 1 - l);
                    let err = (0..sol.w().len())
                        .fold(0.0f64, |m, i| m.max((sol.w()[i] - fine[i * stride]).abs()));
                    Some(err)
                })
                .collect()
        }
    };
    let mut rows = Vec::with_capacity(levels);
    for (l, sol) in sols.iter().enumerate() {
        let err = errors[l];
        let order = match (l.checked_sub(1).and_then(|p| errors[p]), err) {
            (Some(prev), Some(cur)) if !(prev < ROUNDOFF && cur < ROUNDOFF) => {
                Some((prev / cur).log2())
            }
            _ => None,
        };
        rows.push(ConvergenceRow {
            nodes_per_segment: sol.grid().per_segment(),
            iterations: sol.iterations(),
            error: err,
            order,
            at_roundoff: err.is_some_and(|e| e < ROUNDOFF),
        });
    }
    Ok(ConvergenceTable {
        reference: if exact.is_some() { "exact" } else { "finest" },
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::OrderPair;
    use crate::psi::PsiFunction;

    fn spec(f: &str, nu: f64) -> ProblemSpec {
        ProblemSpec::new(
            OrderPair::new(0.5, nu).unwrap(),
            PsiFunction::identity(0.0, 1.0).unwrap(),
            1.0,
            Expr::parse(f, &["t", "u"]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn homogeneous_errors_vanish() {
        let sp = spec("0", 0.5);
        let exact = Expr::parse("t^(-0.25)/gamma(0.75)", &["t"]).unwrap();
        let table = convergence_study(
            &sp,
            Some(&exact),
            3,
            &SolverOptions::default().with_nodes(16),
        )
        .unwrap();
        assert!(table.all_at_roundoff(), "{table:?}");
        assert_eq!(table.final_order(), None);
        let table =
            convergence_study(&sp, None, 3, &SolverOptions::default().with_nodes(16)).unwrap();
        assert!(table.rows.iter().take(2).all(|r| r.error == Some(0.0)));
        assert_eq!(table.rows[2].error, None);
    }

    #[test]
    fn linear_rhs_self_convergence() {
        let sp = spec("u/20", 1.0);
        let table =
            convergence_study(&sp, None, 4, &SolverOptions::default().with_nodes(32)).unwrap();
        let p = table.final_order().unwrap();
        assert!(p >= 1.0, "{table:?}");
    }

    #[test]
    fn needs_three_levels() {
        let sp = spec("0", 0.5);
        assert!(convergence_study(&sp, None, 2, &SolverOptions::default()).is_err());
    }
}
