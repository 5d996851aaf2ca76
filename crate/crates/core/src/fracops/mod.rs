//! Ψ-fractional integrals, the numeric Ψ-Hilfer derivative and the Ω weight.
//!
//! All integrals are evaluated in the transformed variable s = Ψ(σ), where
//! I^{μ;Ψ}h(t) = (1/Γ(μ)) ∫_{Ψ(a)}^{Ψ(t)} (Ψ(t) − s)^{μ−1} h(Ψ⁻¹(s)) ds.

pub mod quadrature;
pub mod special;

use serde::Serialize;

pub use quadrature::{DataWeight, ProductRule};
pub use special::{beta_fn, gamma_fn};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::psi::PsiFunction;
use special::gamma;

/// Fractional order μ in (0, 1) and type ν in [0, 1], with ϱ = μ + ν − μν.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderPair {
    mu: f64,
    nu: f64,
    rho: f64,
}

impl OrderPair {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::Domain(format!("mu must lie in (0, 1), got {mu}")));
        }
        if !(0.0..=1.0).contains(&nu) {
            return Err(Error::Domain(format!("nu must lie in [0, 1], got {nu}")));
        }
        let rho = if nu == 1.0 { 1.0 } else { mu + nu * (1.0 - mu) };
        Ok(OrderPair { mu, nu, rho })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Order (1 − ν)(1 − μ) = 1 − ϱ of the inner integral of the derivative.
    pub fn inner_order(&self) -> f64 {
        1.0 - self.rho
    }

    /// Order ν(1 − μ) of the outer integral of the derivative.
    pub fn outer_order(&self) -> f64 {
        self.nu * (1.0 - self.mu)
    }
}

/// A function sampled on nodes t₀ = a < t₁ < … with cached Ψ-images.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    nodes: Vec<f64>,
    psi_nodes: Vec<f64>,
    values: Vec<f64>,
}

impl SampledFunction {
    /// The first node must be the lower terminal `psi.a()`.
    pub fn new(psi: &PsiFunction, nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::Grid(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        if nodes.is_empty() {
            return Err(Error::Grid("no nodes".into()));
        }
        if (nodes[0] - psi.a()).abs() > 1e-12 * psi.a().abs().max(1.0) {
            return Err(Error::Grid(format!(
                "first node {} must be the lower terminal {}",
                nodes[0],
                psi.a()
            )));
        }
        let psi_nodes = nodes
            .iter()
            .map(|&t| psi.eval(t))
            .collect::<Result<Vec<_>>>()?;
        Self::check_increasing(&nodes, &psi_nodes)?;
        Ok(SampledFunction {
            nodes,
            psi_nodes,
            values,
        })
    }

    /// Builds directly from matching t- and Ψ-nodes (both strictly increasing).
    pub fn from_parts(nodes: Vec<f64>, psi_nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() || nodes.len() != psi_nodes.len() || nodes.is_empty() {
            return Err(Error::Grid("mismatched or empty node/value arrays".into()));
        }
        Self::check_increasing(&nodes, &psi_nodes)?;
        Ok(SampledFunction {
            nodes,
            psi_nodes,
            values,
        })
    }

    /// `n` subintervals uniform in Ψ-space over the whole domain of `psi`.
    pub fn uniform_in_psi(psi: &PsiFunction, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Grid("need at least one subinterval".into()));
        }
        let (s0, s1) = (psi.psi_a(), psi.psi_end());
        let mut nodes = Vec::with_capacity(n + 1);
        let mut psi_nodes = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let s = if i == n {
                s1
            } else {
                s0 + (s1 - s0) * i as f64 / n as f64
            };
            psi_nodes.push(s);
            nodes.push(psi.inverse(s)?);
        }
        nodes[0] = psi.a();
        nodes[n] = psi.end();
        let values = nodes.iter().map(|&t| f(t)).collect();
        Self::from_parts(nodes, psi_nodes, values)
    }

    fn check_increasing(nodes: &[f64], psi_nodes: &[f64]) -> Result<()> {
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Grid("nodes must be strictly increasing".into()));
        }
        if psi_nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Grid(
                "psi images of the nodes must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn psi_nodes(&self) -> &[f64] {
        &self.psi_nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Same nodes, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.values.len());
        SampledFunction {
            nodes: self.nodes.clone(),
            psi_nodes: self.psi_nodes.clone(),
            values,
        }
    }

    /// Ψ-space nodes and values truncated at `s_t`, with a linearly
    /// interpolated last point when `s_t` falls between nodes.
    fn truncate_at(&self, s_t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let s = &self.psi_nodes;
        let last = *s.last().unwrap();
        let tol = 1e-13 * s[0].abs().max(last.abs()).max(1.0);
        if s_t < s[0] - tol {
            return Err(Error::Grid(format!(
                "point precedes the first node ({s_t} < {})",
                s[0]
            )));
        }
        if s_t > last + tol {
            return Err(Error::Grid(format!(
                "point lies beyond the last node ({s_t} > {last})"
            )));
        }
        let s_t = s_t.clamp(s[0], last);
        let k = s.partition_point(|&x| x <= s_t); // s[k-1] <= s_t < s[k]
        let mut ss = s[..k].to_vec();
        let mut vs = self.values[..k].to_vec();
        if ss[k - 1] < s_t {
            let (s_l, s_r) = (s[k - 1], s[k]);
            let (v_l, v_r) = (self.values[k - 1], self.values[k]);
            ss.push(s_t);
            vs.push(v_l + (v_r - v_l) * (s_t - s_l) / (s_r - s_l));
        }
        Ok((ss, vs))
    }
}

/// Ω_Ψ^ϱ(t, a) = (Ψ(t) − Ψ(a))^{ϱ−1}/Γ(ϱ); identically 1 when ϱ = 1.
pub fn omega_weight(order: &OrderPair, psi: &PsiFunction, t: f64, a: f64) -> Result<f64> {
    let rho = order.rho();
    if t < a {
        return Err(Error::Domain(format!(
            "omega weight needs t >= a, got t = {t} < {a}"
        )));
    }
    if rho == 1.0 {
        return Ok(1.0);
    }
    let ds = psi.eval(t)? - psi.eval(a)?;
    if ds <= 0.0 {
        return Err(Error::Singularity(format!(
            "omega weight with rho = {rho} diverges at t = a"
        )));
    }
    Ok(ds.powf(rho - 1.0) / gamma(rho))
}

fn check_order(mu_eff: f64) -> Result<()> {
    if !(mu_eff > 0.0 && mu_eff <= 1.0) {
        return Err(Error::Domain(format!(
            "integral order must lie in (0, 1], got {mu_eff}"
        )));
    }
    Ok(())
}

fn check_terminal(h: &SampledFunction, psi: &PsiFunction) -> Result<()> {
    let s0 = h.psi_nodes[0];
    if (s0 - psi.psi_a()).abs() > 1e-12 * s0.abs().max(1.0) {
        return Err(Error::Grid(
            "sampled function does not start at the lower terminal".into(),
        ));
    }
    Ok(())
}

fn dot(c: &[f64], v: &[f64]) -> f64 {
    c.iter().zip(v).fold(0.0, |acc, (c, v)| acc + c * v)
}

/// I^{μ;Ψ}h(t) by the product-trapezoidal rule; 0 at t = a.
pub fn frac_integral(h: &SampledFunction, mu_eff: f64, psi: &PsiFunction, t: f64) -> Result<f64> {
    check_order(mu_eff)?;
    check_terminal(h, psi)?;
    if t < h.nodes[0] {
        return Err(Error::Grid(format!(
            "t = {t} precedes the first node {}",
            h.nodes[0]
        )));
    }
    let (s, v) = h.truncate_at(psi.eval(t)?)?;
    Ok(dot(
        &quadrature::row_weights(&s, mu_eff, DataWeight::Plain),
        &v,
    ))
}

/// I^{μ;Ψ} applied to u = (Ψ − Ψ(a))^{ϱ−1}·w, where `w` holds the samples of
/// the continuous factor. Reduces to [`frac_integral`] on `w` for ϱ = 1.
pub fn frac_integral_weighted_start(
    w: &SampledFunction,
    mu_eff: f64,
    rho: f64,
    psi: &PsiFunction,
    t: f64,
) -> Result<f64> {
    check_rho(rho)?;
    if rho == 1.0 {
        return frac_integral(w, mu_eff, psi, t);
    }
    check_order(mu_eff)?;
    check_terminal(w, psi)?;
    if t < w.nodes[0] {
        return Err(Error::Grid(format!(
            "t = {t} precedes the first node {}",
            w.nodes[0]
        )));
    }
    let (s, v) = w.truncate_at(psi.eval(t)?)?;
    if s.len() == 1 {
        return start_limit(v[0], mu_eff, rho);
    }
    Ok(dot(
        &quadrature::row_weights(&s, mu_eff, DataWeight::SingularStart { rho }),
        &v,
    ))
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Domain(format!("rho must lie in (0, 1], got {rho}")));
    }
    Ok(())
}

/// lim_{t→a} I^α[(s − s₀)^{ρ−1} w](t) = w(a)·Γ(ρ)/Γ(α+ρ)·(s − s₀)^{α+ρ−1}.
fn start_limit(w0: f64, alpha: f64, rho: f64) -> Result<f64> {
    let e = alpha + rho - 1.0;
    if e.abs() < 1e-12 {
        Ok(w0 * gamma(rho) / gamma(alpha + rho))
    } else if e > 0.0 || w0 == 0.0 {
        Ok(0.0)
    } else {
        Err(Error::Singularity(format!(
            "integral of order {alpha} of a (s - s0)^{} singularity is unbounded at a",
            rho - 1.0
        )))
    }
}

/// I^{α;Ψ} at every node of `h` (α = 0 is the identity).
pub fn frac_integral_nodes(h: &SampledFunction, alpha: f64, exec: Execution) -> Result<Vec<f64>> {
    if alpha == 0.0 {
        return Ok(h.values.clone());
    }
    let rule = ProductRule::build(&h.psi_nodes, alpha, DataWeight::Plain, exec)?;
    Ok(rule.apply(&h.values, exec))
}

/// I^{α;Ψ}[(Ψ − Ψ(a))^{ρ−1} w] at every node; the value at a is the limit,
/// infinite when α + ρ < 1 and w(a) ≠ 0.
pub fn frac_integral_weighted_nodes(
    w: &SampledFunction,
    alpha: f64,
    rho: f64,
    exec: Execution,
) -> Result<Vec<f64>> {
    check_rho(rho)?;
    if rho == 1.0 {
        return frac_integral_nodes(w, alpha, exec);
    }
    if alpha == 0.0 {
        return Err(Error::Singularity(
            "order-zero integral of singular data".into(),
        ));
    }
    let rule = ProductRule::build(&w.psi_nodes, alpha, DataWeight::SingularStart { rho }, exec)?;
    let mut out = rule.apply(&w.values, exec);
    // an unbounded limit is reported as ±∞ rather than failing the whole sweep
    out[0] = start_limit(w.values[0], alpha, rho).unwrap_or(f64::INFINITY.copysign(w.values[0]));
    Ok(out)
}

/// Three-point derivative on a nonuniform grid, one-sided at both ends.
pub(crate) fn three_point_derivative(s: &[f64], g: &[f64]) -> Vec<f64> {
    let n = s.len();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let h1 = s[i] - s[i - 1];
        let h2 = s[i + 1] - s[i];
        d[i] = -h2 / (h1 * (h1 + h2)) * g[i - 1]
            + (h2 - h1) / (h1 * h2) * g[i]
            + h1 / (h2 * (h1 + h2)) * g[i + 1];
    }
    let (h1, h2) = (s[1] - s[0], s[2] - s[1]);
    d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * g[0] + (h1 + h2) / (h1 * h2) * g[1]
        - h1 / (h2 * (h1 + h2)) * g[2];
    let (h1, h2) = (s[n - 2] - s[n - 3], s[n - 1] - s[n - 2]);
    d[n - 1] = h2 / (h1 * (h1 + h2)) * g[n - 3] - (h1 + h2) / (h1 * h2) * g[n - 2]
        + (h1 + 2.0 * h2) / (h2 * (h1 + h2)) * g[n - 1];
    d
}

/// Outer half of the Hilfer composition: I^{β}(dG/dΨ) on the nodes of `g`.
///
/// G = I^{1−ϱ}h behaves like G(a) + c·(Ψ − Ψ(a))^{1−β} near a for the data
/// this operator is applied to, so that term is removed before differencing
/// and its image under I^β d/dΨ is added back in closed form.
fn differentiate_then_integrate(
    s: &[f64],
    g: &[f64],
    beta: f64,
    exec: Execution,
) -> Result<Vec<f64>> {
    if beta == 0.0 {
        return Ok(three_point_derivative(s, g));
    }
    let s0 = s[0];
    let gamma_exp = 1.0 - beta;
    let c = (g[1] - g[0]) / (s[1] - s0).powf(gamma_exp);
    let regular: Vec<f64> = s
        .iter()
        .zip(g)
        .map(|(&si, &gi)| gi - g[0] - c * (si - s0).powf(gamma_exp))
        .collect();
    let d = three_point_derivative(s, &regular);
    let rule = ProductRule::build(s, beta, DataWeight::Plain, exec)?;
    let mut out = rule.apply(&d, exec);
    // I^β d/ds (s − s₀)^{1−β} = Γ(2−β)
    let singular = c * gamma(gamma_exp + 1.0);
    for v in &mut out {
        *v += singular;
    }
    Ok(out)
}

/// ^H D^{μ,ν;Ψ}h = I^{ν(1−μ)} (d/dΨ) I^{(1−ν)(1−μ)} h on the nodes of `h`.
///
/// Values at the first and last node come from one-sided differences and are
/// less accurate than interior values.
pub fn hilfer_derivative_numeric(
    h: &SampledFunction,
    order: &OrderPair,
    psi: &PsiFunction,
) -> Result<SampledFunction> {
    hilfer_derivative_with(h, 1.0, order, psi, Execution::Auto)
}

/// As [`hilfer_derivative_numeric`] for data h = (Ψ − Ψ(a))^{ρ_data−1}·w given
/// through the samples of `w`.
pub fn hilfer_derivative_weighted(
    w: &SampledFunction,
    data_rho: f64,
    order: &OrderPair,
    psi: &PsiFunction,
) -> Result<SampledFunction> {
    hilfer_derivative_with(w, data_rho, order, psi, Execution::Auto)
}

pub(crate) fn hilfer_derivative_with(
    h: &SampledFunction,
    data_rho: f64,
    order: &OrderPair,
    psi: &PsiFunction,
    exec: Execution,
) -> Result<SampledFunction> {
    if h.len() < 3 {
        return Err(Error::Grid(format!(
            "the numeric derivative needs at least 3 nodes, got {}",
            h.len()
        )));
    }
    check_terminal(h, psi)?;
    if data_rho < 1.0 {
        let g = frac_integral_weighted_nodes(h, order.inner_order(), data_rho, exec)?;
        let out = differentiate_then_integrate(&h.psi_nodes, &g, order.outer_order(), exec)?;
        return Ok(h.with_values(out));
    }
    hilfer_derivative_fitted(h, order, exec, &[])
}

/// Bounded-data derivative with the start terms (Ψ − Ψ(a))^γ, γ ∈ {μ, 1} ∪ `extra`,
/// fitted on the first nodes and differentiated in closed form:
/// HD (Ψ − Ψ(a))^γ = Γ(γ+1)/Γ(γ+1−μ)·(Ψ − Ψ(a))^{γ−μ}.
pub(crate) fn hilfer_derivative_fitted(
    h: &SampledFunction,
    order: &OrderPair,
    exec: Execution,
    extra: &[f64],
) -> Result<SampledFunction> {
    let s = &h.psi_nodes;
    let s0 = s[0];
    let mu = order.mu();
    let rho = order.rho();
    let r0 = h.values[0];
    let mut exps = vec![mu, 1.0];
    for &g in extra {
        if g > rho - 1.0 && g.abs() > 1e-9 && exps.iter().all(|&e| (e - g).abs() > 1e-6) {
            exps.push(g);
        }
    }
    if exps.len() + 1 > h.len() {
        exps.truncate(h.len().saturating_sub(1).max(1));
    }
    let m = exps.len();
    let mut mat = vec![vec![0.0; m + 1]; m];
    for (i, row) in mat.iter_mut().enumerate() {
        let d = s[i + 1] - s0;
        for (e, &g) in exps.iter().enumerate() {
            row[e] = d.powf(g);
        }
        row[m] = h.values[i + 1] - r0;
    }
    let coef = solve_dense(mat)
        .ok_or_else(|| Error::Grid("singular start fit in the numeric derivative".to_string()))?;
    let remainder: Vec<f64> = s
        .iter()
        .zip(&h.values)
        .enumerate()
        .map(|(j, (&si, &ri))| {
            if j == 0 {
                return 0.0;
            }
            let d = si - s0;
            ri - r0
                - exps
                    .iter()
                    .zip(&coef)
                    .map(|(&g, &c)| c * d.powf(g))
                    .sum::<f64>()
        })
        .collect();
    let g = frac_integral_nodes(&h.with_values(remainder), order.inner_order(), exec)?;
    let mut out = differentiate_then_integrate(s, &g, order.outer_order(), exec)?;
    let const_image = if rho < 1.0 { r0 / gamma(1.0 - mu) } else { 0.0 };
    let images: Vec<f64> = exps
        .iter()
        .zip(&coef)
        .map(|(&g, &c)| c * gamma(g + 1.0) / gamma(g + 1.0 - mu))
        .collect();
    for (v, &si) in out.iter_mut().zip(s) {
        let d = si - s0;
        for (&g, &k) in exps.iter().zip(&images) {
            *v += k * d.powf(g - mu);
        }
        if const_image != 0.0 {
            *v += const_image * d.powf(-mu);
        }
    }
    Ok(h.with_values(out))
}

/// Gaussian elimination with partial pivoting on an augmented m×(m+1) system.
#[allow(clippy::needless_range_loop)]
fn solve_dense(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let m = a.len();
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        for row in col + 1..m {
            let f = a[row][col] / a[col][col];
            for k in col..=m {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut x = vec![0.0; m];
    for i in (0..m).rev() {
        let tail: f64 = (i + 1..m).map(|k| a[i][k] * x[k]).sum();
        x[i] = (a[i][m] - tail) / a[i][i];
    }
    Some(x)
}
