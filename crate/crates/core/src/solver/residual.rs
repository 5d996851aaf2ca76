use serde::Serialize;

use crate::error::Result;
use crate::exec::Execution;
use crate::fracops::special::gamma;
use crate::fracops::{hilfer_derivative_fitted, SampledFunction};
use crate::solver::grid::{u_from_w, GridSolution};
use crate::solver::picard::PicardMap;
use crate::solver::problem::ProblemSpec;

/// How well a grid solution satisfies the integral equation, the
/// differential equation and the impulse conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    /// max |w − P(w)| with P the Picard map
    pub integral_defect: f64,
    /// max (Ψ − Ψ(a))^{1−ϱ}|HD r − f(t,u)| over interior nodes away from
    /// impulses, where r = u − c_k Ω is the regular part (HD Ω = 0 exactly);
    /// the weight is that of the solution space, since f(t,u) may grow like
    /// (Ψ − Ψ(a))^{ϱ−1} at a
    pub differential_defect: f64,
    /// |ΔI^{1−ϱ}u(t_k) − ζ_k| for each impulse
    pub jump_defects: Vec<f64>,
}

impl ResidualReport {
    pub fn max_jump_defect(&self) -> f64 {
        self.jump_defects.iter().fold(0.0f64, |m, &d| m.max(d))
    }

    pub fn within(&self, integral: f64, differential: f64, jump: f64) -> bool {
        self.integral_defect <= integral
            && self.differential_defect <= differential
            && self.max_jump_defect() <= jump
    }
}

/// Residual diagnostics for `sol` as a solution of `spec`.
///
/// The jump defect uses the split I^{1−ϱ}u = c_k + I^{1−ϱ+μ}f: c is recovered
/// node-wise as Γ(ϱ)(w − (Ψ − Ψ(a))^{1−ϱ} I^μ f), whose integral part is
/// continuous across t_k, so the jump is algebraic.
pub fn residual_report(spec: &ProblemSpec, sol: &GridSolution) -> Result<ResidualReport> {
    let grid = sol.grid();
    let map = PicardMap::new(spec, grid, Execution::Auto)?;
    let w = sol.w();
    let integral = map.integral_part(w)?;
    let coefs = map.coefficients(w, sol.coefficients())?;
    let image = map.assemble(&coefs, &integral)?;
    let integral_defect = w
        .iter()
        .zip(&image)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));

    let rho = spec.rho();
    let g_rho = gamma(rho);
    let s = grid.s();
    let t = grid.t();
    let n = grid.len();
    let regular: Vec<f64> = (0..n)
        .map(|j| {
            let wr = w[j] - coefs[grid.segment_of(j)] / g_rho;
            if j == 0 && rho < 1.0 {
                0.0
            } else {
                u_from_w(rho, s[j] - s[0], wr)
            }
        })
        .collect();
    let r = SampledFunction::from_parts(t.to_vec(), s.to_vec(), regular)?;
    // I^μ of an F that grows like (Ψ − Ψ(a))^{ϱ−1} starts with (Ψ − Ψ(a))^{μ+ϱ−1}
    let extra = if rho < 1.0 && spec.f_depends_on_u() {
        vec![spec.order().mu() + rho - 1.0]
    } else {
        vec![]
    };
    let hd = hilfer_derivative_fitted(&r, spec.order(), Execution::Auto, &extra)?;
    let impulses: Vec<usize> = (1..grid.segment_count())
        .map(|k| grid.impulse_index(k))
        .collect();
    let mut differential_defect = 0.0f64;
    for j in 1..n - 1 {
        if impulses.iter().any(|&i| i.abs_diff(j) <= 2) {
            continue;
        }
        let fj = spec.eval_f(t[j], sol.u_at(j))?;
        let weight = (s[j] - s[0]).powf(1.0 - rho);
        let dd = weight * (hd.values()[j] - fj).abs();
        differential_defect = differential_defect.max(dd);
    }

    let recovered = |j: usize| g_rho * (w[j] - integral[j]);
    let jump_defects = spec
        .impulses()
        .jumps()
        .iter()
        .enumerate()
        .map(|(i, zeta)| {
            let idx = grid.impulse_index(i + 1);
            (recovered(idx + 1) - recovered(idx) - zeta).abs()
        })
        .collect();

    Ok(ResidualReport {
        integral_defect,
        differential_defect,
        jump_defects,
    })
}
