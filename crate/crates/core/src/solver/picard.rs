use crate::error::{Error, Result};
use crate::exec::{try_map_indexed, Execution};
use crate::fracops::quadrature::{DataWeight, ProductRule};
use crate::fracops::special::gamma;
use crate::solver::grid::{u_from_w, Grid, GridSolution};
use crate::solver::problem::{coefficient, ProblemSpec};

/// Discretization and stopping parameters for the Picard solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub nodes_per_segment: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub exec: Execution,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            nodes_per_segment: 256,
            tol: 1e-12,
            max_iter: 200,
            exec: Execution::Auto,
        }
    }
}

impl SolverOptions {
    pub fn with_nodes(mut self, n: usize) -> Self {
        self.nodes_per_segment = n;
        self
    }

    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.nodes_per_segment < 16 {
            return Err(Error::Grid(format!(
                "nodes_per_segment must be at least 16, got {}",
                self.nodes_per_segment
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Problem(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Problem("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// The map w ↦ (Ψ − Ψ(a))^{1−ϱ}[Ω·c_k + I^{μ;Ψ} f(·, u)] on a fixed grid.
///
/// The quadrature table is built once. When ϱ < 1 and f reads u, F inherits
/// the (Ψ − Ψ(a))^{ϱ−1} growth of u, so F·(Ψ − Ψ(a))^{1−ϱ} is integrated
/// against the singular-start weight; otherwise F goes through the plain rule.
#[derive(Debug, Clone)]
pub struct PicardMap<'a> {
    spec: &'a ProblemSpec,
    grid: &'a Grid,
    rule: ProductRule,
    exec: Execution,
    scale: Vec<f64>,
    gamma_rho: f64,
}

impl<'a> PicardMap<'a> {
    pub fn new(spec: &'a ProblemSpec, grid: &'a Grid, exec: Execution) -> Result<Self> {
        let rho = spec.rho();
        let weight = if rho < 1.0 && spec.f_depends_on_u() {
            DataWeight::SingularStart { rho }
        } else {
            DataWeight::Plain
        };
        let rule = ProductRule::build(grid.s(), spec.order().mu(), weight, exec)?;
        let s0 = grid.s()[0];
        let scale = grid.s().iter().map(|&s| (s - s0).powf(1.0 - rho)).collect();
        Ok(PicardMap {
            spec,
            grid,
            rule,
            exec,
            scale,
            gamma_rho: gamma(rho),
        })
    }

    pub fn grid(&self) -> &Grid {
        self.grid
    }

    /// (Ψ − Ψ(a))^{1−ϱ}·I^{μ;Ψ}f(·, u) at every node for the iterate `w`.
    pub fn integral_part(&self, w: &[f64]) -> Result<Vec<f64>> {
        let rho = self.spec.rho();
        let t = self.grid.t();
        let s = self.grid.s();
        let weighted = matches!(self.rule.weight(), DataWeight::SingularStart { .. });
        let mut data = try_map_indexed(self.exec, w.len(), |j| {
            if j == 0 && rho < 1.0 {
                // u(a) is unbounded; only its weighted data is used
                return if weighted {
                    Ok(0.0)
                } else {
                    self.spec.eval_f(t[0], 0.0)
                };
            }
            let u = u_from_w(rho, s[j] - s[0], w[j]);
            let fj = self.spec.eval_f(t[j], u)?;
            Ok(if weighted { fj * self.scale[j] } else { fj })
        })?;
        if weighted {
            data[0] = 2.0 * data[1] - data[2];
        }
        let mut out = self.rule.apply(&data, self.exec);
        out[0] = 0.0;
        for (o, sc) in out.iter_mut().zip(&self.scale).skip(1) {
            *o *= sc;
        }
        Ok(out)
    }

    /// Per-segment coefficients (δ − g(u) + Σζ) for the iterate `w` whose
    /// own coefficients are `current` (needed for traces right of impulses).
    pub fn coefficients(&self, w: &[f64], current: &[f64]) -> Result<Vec<f64>> {
        let g = match self.spec.nonlocal() {
            None => 0.0,
            Some(nl) => {
                let traces = nl
                    .taus()
                    .iter()
                    .map(|&tau| {
                        let psi_tau = self.spec.psi().eval(tau)?;
                        trace_at(self.grid, self.spec.rho(), w, current, psi_tau)
                    })
                    .collect::<Result<Vec<_>>>()?;
                nl.combine(&traces)?
            }
        };
        (0..self.grid.segment_count())
            .map(|k| coefficient(self.spec, k, g))
            .collect()
    }

    /// Assembles c_k/Γ(ϱ) + `integral` node by node.
    pub fn assemble(&self, coefficients: &[f64], integral: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(integral.len());
        for (j, &ij) in integral.iter().enumerate() {
            let v = coefficients[self.grid.segment_of(j)] / self.gamma_rho + ij;
            if !v.is_finite() {
                return Err(Error::NonFiniteIterate {
                    node: j,
                    t: self.grid.t()[j],
                });
            }
            out.push(v);
        }
        Ok(out)
    }

    /// One application of the map: returns the next iterate and the
    /// coefficients it was assembled with.
    pub fn apply(&self, w: &[f64], current: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let coefs = self.coefficients(w, current)?;
        let integral = self.integral_part(w)?;
        let next = self.assemble(&coefs, &integral)?;
        Ok((next, coefs))
    }
}

pub(crate) fn trace_at(
    grid: &Grid,
    rho: f64,
    w: &[f64],
    coefs: &[f64],
    psi_tau: f64,
) -> Result<f64> {
    let s = grid.s();
    let last = s.len() - 1;
    if !(psi_tau >= s[0] && psi_tau <= s[last]) {
        return Err(Error::Grid(format!(
            "trace point {psi_tau} outside [{}, {}]",
            s[0], s[last]
        )));
    }
    let j = s.partition_point(|&x| x < psi_tau).max(1);
    if s[j] == psi_tau {
        return Ok(w[j]);
    }
    let mut left = w[j - 1];
    let k = grid.segment_of(j);
    if k > 0 && j - 1 == grid.impulse_index(k) {
        // right limit at t_k
        left += (coefs[k] - coefs[k - 1]) / gamma(rho);
    }
    let theta = (psi_tau - s[j - 1]) / (s[j] - s[j - 1]);
    Ok(left + theta * (w[j] - left))
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Homogeneous starting iterate w₀ = (δ + Σζ)/Γ(ϱ) per segment.
fn initial_iterate(spec: &ProblemSpec, grid: &Grid) -> Result<(Vec<f64>, Vec<f64>)> {
    let coefs: Vec<f64> = (0..grid.segment_count())
        .map(|k| coefficient(spec, k, 0.0))
        .collect::<Result<_>>()?;
    let g = gamma(spec.rho());
    let w = (0..grid.len())
        .map(|j| coefs[grid.segment_of(j)] / g)
        .collect();
    Ok((w, coefs))
}

fn iterate(spec: &ProblemSpec, opts: &SolverOptions) -> Result<GridSolution> {
    opts.validate()?;
    let grid = Grid::new(spec, opts.nodes_per_segment)?;
    let map = PicardMap::new(spec, &grid, opts.exec)?;
    let (mut w, mut coefs) = initial_iterate(spec, &grid)?;
    let mut norms = Vec::new();
    let mut ratios = Vec::new();
    for it in 1..=opts.max_iter {
        let (next, next_coefs) = map.apply(&w, &coefs)?;
        let update = sup_diff(&next, &w);
        if let Some(&prev) = norms.last() {
            if prev > 0.0 {
                ratios.push(update / prev);
            }
        }
        norms.push(update);
        let done = update <= opts.tol * sup(&next).max(1.0);
        w = next;
        coefs = next_coefs;
        if done {
            return Ok(GridSolution {
                grid,
                rho: spec.rho(),
                w,
                coefficients: coefs,
                iterations: it,
                update_norms: norms,
                ratios,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        last_update: norms.last().copied().unwrap_or(f64::NAN),
        update_norms: norms,
        ratios,
    })
}

/// Picard iteration for the impulsive problem, starting from the homogeneous
/// part and stopping when the weighted sup-norm update falls below
/// tol·max(1, ||w||).
pub fn solve_impulsive(spec: &ProblemSpec, opts: &SolverOptions) -> Result<GridSolution> {
    if spec.nonlocal().is_some() {
        return Err(Error::Problem(
            "problem has a nonlocal condition; use solve_nonlocal".into(),
        ));
    }
    iterate(spec, opts)
}

/// Picard iteration with the coefficient δ − g(u_n) + Σζ recomputed from the
/// current traces at every step.
pub fn solve_nonlocal(spec: &ProblemSpec, opts: &SolverOptions) -> Result<GridSolution> {
    if spec.nonlocal().is_none() {
        return Err(Error::Problem("problem has no nonlocal condition".into()));
    }
    iterate(spec, opts)
}

/// Dispatches on whether the problem carries a nonlocal condition.
pub fn solve(spec: &ProblemSpec, opts: &SolverOptions) -> Result<GridSolution> {
    iterate(spec, opts)
}

/// ϱ = 1 shortcut: iterates u = c_k + I^{μ;Ψ}f(·, u) directly, with no weights.
pub fn solve_caputo(spec: &ProblemSpec, opts: &SolverOptions) -> Result<GridSolution> {
    if spec.rho() != 1.0 {
        return Err(Error::Problem(format!(
            "caputo shortcut needs rho = 1, got {}",
            spec.rho()
        )));
    }
    if spec.nonlocal().is_some() {
        return Err(Error::Problem(
            "caputo shortcut does not handle nonlocal conditions".into(),
        ));
    }
    opts.validate()?;
    let grid = Grid::new(spec, opts.nodes_per_segment)?;
    let rule = ProductRule::build(grid.s(), spec.order().mu(), DataWeight::Plain, opts.exec)?;
    let coefs: Vec<f64> = (0..grid.segment_count())
        .map(|k| coefficient(spec, k, 0.0))
        .collect::<Result<_>>()?;
    let mut u: Vec<f64> = (0..grid.len()).map(|j| coefs[grid.segment_of(j)]).collect();
    let mut norms = Vec::new();
    let mut ratios = Vec::new();
    for it in 1..=opts.max_iter {
        let t = grid.t();
        let f = try_map_indexed(opts.exec, u.len(), |j| spec.eval_f(t[j], u[j]))?;
        let integral = rule.apply(&f, opts.exec);
        let mut next = Vec::with_capacity(u.len());
        for (j, ij) in integral.into_iter().enumerate() {
            let v = coefs[grid.segment_of(j)] + if j == 0 { 0.0 } else { ij };
            if !v.is_finite() {
                return Err(Error::NonFiniteIterate { node: j, t: t[j] });
            }
            next.push(v);
        }
        let update = sup_diff(&next, &u);
        if let Some(&prev) = norms.last() {
            if prev > 0.0 {
                ratios.push(update / prev);
            }
        }
        norms.push(update);
        let done = update <= opts.tol * sup(&next).max(1.0);
        u = next;
        if done {
            return Ok(GridSolution {
                grid,
                rho: 1.0,
                w: u,
                coefficients: coefs,
                iterations: it,
                update_norms: norms,
                ratios,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        last_update: norms.last().copied().unwrap_or(f64::NAN),
        update_norms: norms,
        ratios,
    })
}

/// One more application of the Picard map to `current`, with the update
/// appended to its bookkeeping.
pub fn picard_step(spec: &ProblemSpec, current: &GridSolution) -> Result<GridSolution> {
    let map = PicardMap::new(spec, current.grid(), Execution::Auto)?;
    let (w, coefficients) = map.apply(current.w(), current.coefficients())?;
    let update = sup_diff(&w, current.w());
    let mut update_norms = current.update_norms.clone();
    let mut ratios = current.ratios.clone();
    if let Some(&prev) = update_norms.last() {
        if prev > 0.0 {
            ratios.push(update / prev);
        }
    }
    update_norms.push(update);
    Ok(GridSolution {
        grid: current.grid.clone(),
        rho: current.rho,
        w,
        coefficients,
        iterations: current.iterations + 1,
        update_norms,
        ratios,
    })
}
