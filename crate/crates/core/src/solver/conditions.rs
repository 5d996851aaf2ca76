use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fracops::special::gamma;
use crate::psi::PsiFunction;
use crate::solver::problem::ProblemSpec;

/// Existence/uniqueness quantities of the contraction argument, from their
/// closed forms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    /// Γ(μ+ϱ)/(2Γ(ϱ)(Ψ(T)−Ψ(a))^μ)
    #[serde(rename = "L_bound")]
    pub l_bound: f64,
    #[serde(rename = "L_used")]
    pub l_used: f64,
    /// true when `l_used` came from [`estimate_lipschitz`] rather than the user
    #[serde(rename = "L_estimated")]
    pub l_estimated: bool,
    pub uniqueness_ok: bool,
    /// L·Γ(ϱ)/Γ(μ+ϱ)·(Ψ(T)−Ψ(a))^μ
    pub contraction_constant: f64,
    /// sup |f(σ, 0)| sampled on 1024 points
    #[serde(rename = "M")]
    pub m: f64,
    /// the minimal admissible radius 2((|δ|+Σ|ζ|)/Γ(ϱ) + M(Ψ(T)−Ψ(a))^{1−ϱ+μ}/Γ(μ+1))
    pub r: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonlocal: Option<NonlocalConditions>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonlocalConditions {
    /// Γ(ϱ)/6
    #[serde(rename = "Lg_bound")]
    pub lg_bound: f64,
    #[serde(rename = "Lg_used")]
    pub lg_used: f64,
    pub nonlocal_ok: bool,
    /// |g(0)|
    #[serde(rename = "G0")]
    pub g0: f64,
    /// 3((|δ|+G+Σ|ζ|)/Γ(ϱ) + M(Ψ(T)−Ψ(a))^{1−ϱ+μ}/Γ(μ+1))
    pub r_star: f64,
}

impl ConditionReport {
    /// uniqueness_ok, and nonlocal_ok when a nonlocal condition is present.
    pub fn all_ok(&self) -> bool {
        self.uniqueness_ok && self.nonlocal.as_ref().is_none_or(|n| n.nonlocal_ok)
    }
}

/// Fills a [`ConditionReport`] for Lipschitz constant `l` (and `lg` for the
/// nonlocal functional; defaults to the one declared in the problem).
pub fn check_conditions(spec: &ProblemSpec, l: f64, lg: Option<f64>) -> Result<ConditionReport> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::Problem(format!(
            "Lipschitz constant must be positive, got {l}"
        )));
    }
    let mu = spec.order().mu();
    let rho = spec.rho();
    let span = spec.psi().psi_end() - spec.psi().psi_a();
    let l_bound = gamma(mu + rho) / (2.0 * gamma(rho) * span.powf(mu));
    let contraction_constant = l * gamma(rho) / gamma(mu + rho) * span.powf(mu);

    let (a, end) = (spec.a(), spec.end());
    let mut m = 0.0f64;
    for i in 0..1024 {
        let t = a + (end - a) * i as f64 / 1023.0;
        m = m.max(spec.eval_f(t, 0.0)?.abs());
    }
    let jumps: f64 = spec.impulses().jumps().iter().map(|z| z.abs()).sum();
    let forcing = m * span.powf(1.0 - rho + mu) / gamma(mu + 1.0);
    let r = 2.0 * ((spec.delta().abs() + jumps) / gamma(rho) + forcing);

    let nonlocal = match spec.nonlocal() {
        None => None,
        Some(nl) => {
            let lg_used = lg.unwrap_or(nl.lipschitz_lg());
            let lg_bound = gamma(rho) / 6.0;
            let g0 = nl.combine(&vec![0.0; nl.taus().len()])?.abs();
            Some(NonlocalConditions {
                lg_bound,
                lg_used,
                nonlocal_ok: lg_used <= lg_bound,
                g0,
                r_star: 3.0 * ((spec.delta().abs() + g0 + jumps) / gamma(rho) + forcing),
            })
        }
    };
    Ok(ConditionReport {
        l_bound,
        l_used: l,
        l_estimated: spec.lipschitz().is_none_or(|declared| declared != l),
        uniqueness_ok: l <= l_bound,
        contraction_constant,
        m,
        r,
        nonlocal,
    })
}

/// Estimate (not a certificate) of sup |∂f/∂u| on [a,T] × `u_range`: central
/// differences with step 1e-6·max(1,|u|) on a 64×64 lattice (uniform in Ψ
/// and u), maximum inflated by 10%.
pub fn estimate_lipschitz(f: &Expr, psi: &PsiFunction, u_range: (f64, f64)) -> Result<f64> {
    let (lo, hi) = u_range;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::Domain(format!(
            "u range [{lo}, {hi}] must be finite and ordered"
        )));
    }
    const K: usize = 64;
    let (s0, s1) = (psi.psi_a(), psi.psi_end());
    let mut best = 0.0f64;
    for i in 0..K {
        let t = if i == 0 {
            psi.a()
        } else if i == K - 1 {
            psi.end()
        } else {
            psi.inverse(s0 + (s1 - s0) * i as f64 / (K - 1) as f64)?
        };
        for j in 0..K {
            let u = lo + (hi - lo) * j as f64 / (K - 1) as f64;
            let h = 1e-6 * u.abs().max(1.0);
            let slope = (f.eval(&[t, u + h])? - f.eval(&[t, u - h])?) / (2.0 * h);
            best = best.max(slope.abs());
        }
    }
    Ok(best * 1.1)
}
