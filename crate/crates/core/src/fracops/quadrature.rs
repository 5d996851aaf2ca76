//! Product-trapezoidal rules for the Abel kernel (S − s)^{α−1} in the
//! transformed variable s = Ψ(σ).
//!
//! Data are interpolated piecewise-linearly between nodes and every kernel
//! moment is integrated exactly, so the rules are exact for piecewise-linear
//! data. The singular-start variant integrates data of the form
//! (s − s₀)^{ρ−1}·w(s) with w piecewise linear, again with exact moments.

use super::special::{cached_rule, gamma, incomplete_beta};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};

/// The data weight a rule integrates against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DataWeight {
    /// Data are the integrand values themselves.
    Plain,
    /// Data are w with integrand (s − s₀)^{ρ−1}·w, ρ in (0, 1).
    SingularStart { rho: f64 },
}

impl DataWeight {
    /// `SingularStart` for ρ < 1, `Plain` for ρ = 1.
    pub fn for_rho(rho: f64) -> DataWeight {
        if rho >= 1.0 {
            DataWeight::Plain
        } else {
            DataWeight::SingularStart { rho }
        }
    }
}

/// Left/right nodal weights of one subinterval for linear data, kernel
/// (S − s)^{α−1}, where `b` = S − s_j and `h` the subinterval length.
fn plain_pair(b: f64, h: f64, alpha: f64) -> (f64, f64) {
    let x = (h / b).min(1.0);
    let l1p = (-x).ln_1p();
    // 1 − (1 − x)^α and 1 − (1 − x)^{α+1}, accurate for small x
    let c0 = -(alpha * l1p).exp_m1();
    let c1 = -((alpha + 1.0) * l1p).exp_m1();
    let ba = b.powf(alpha);
    let m0 = ba * c0 / alpha;
    let j = c0 / alpha - c1 / (alpha + 1.0);
    let right = ba * j / x;
    (m0 - right, right)
}

fn gauss_points(dist: f64) -> usize {
    if dist < 1.5 {
        10
    } else if dist < 3.0 {
        8
    } else if dist < 6.0 {
        6
    } else if dist < 24.0 {
        5
    } else if dist < 200.0 {
        4
    } else {
        3
    }
}

/// Left/right weights of subinterval [sl, sr] for the integrand
/// (S − s)^{α−1}(s − s₀)^{ρ−1}·w with w linear.
fn singular_pair(s0: f64, sl: f64, sr: f64, target: f64, alpha: f64, rho: f64) -> (f64, f64) {
    let h = sr - sl;
    let d = target - s0;
    if sl == s0 {
        // both the data weight and (when sr == target) the kernel are singular
        let x = h / d;
        let p0 = d.powf(alpha + rho - 1.0) * incomplete_beta(x, rho, alpha);
        let p1 = d.powf(alpha + rho) * incomplete_beta(x, rho + 1.0, alpha);
        let right = p1 / h;
        return (p0 - right, right);
    }
    if sr == target {
        // y = S − s on [0, h], (s − s₀) = d − y
        let x = h / d;
        let p0 = d.powf(alpha + rho - 1.0) * incomplete_beta(x, alpha, rho);
        let q = d.powf(alpha + rho) * incomplete_beta(x, alpha + 1.0, rho);
        let left = q / h;
        return (left, p0 - left);
    }
    let head = (sl - s0) / h;
    let tail = (target - sr) / h;
    if head.min(tail) < 1.0 {
        return if head <= tail {
            // difference of two integrals starting at s₀
            let (xl, xr) = ((sl - s0) / d, (sr - s0) / d);
            let p0 = d.powf(alpha + rho - 1.0)
                * (incomplete_beta(xr, rho, alpha) - incomplete_beta(xl, rho, alpha));
            let p1 = d.powf(alpha + rho)
                * (incomplete_beta(xr, rho + 1.0, alpha) - incomplete_beta(xl, rho + 1.0, alpha));
            (((sr - s0) * p0 - p1) / h, (p1 - (sl - s0) * p0) / h)
        } else {
            // difference of two integrals ending at S, in y = S − s
            let (lo, hi) = (target - sr, target - sl);
            let t0 = d.powf(alpha + rho - 1.0)
                * (incomplete_beta(hi / d, alpha, rho) - incomplete_beta(lo / d, alpha, rho));
            let t1 = d.powf(alpha + rho)
                * (incomplete_beta(hi / d, alpha + 1.0, rho)
                    - incomplete_beta(lo / d, alpha + 1.0, rho));
            ((t1 - lo * t0) / h, (hi * t0 - t1) / h)
        };
    }
    let (nodes, weights) = cached_rule(gauss_points(head.min(tail)));
    let (mut left, mut right) = (0.0, 0.0);
    for (z, wq) in nodes.iter().zip(weights) {
        let s = sl + 0.5 * h * (z + 1.0);
        let k = wq * 0.5 * h * (target - s).powf(alpha - 1.0) * (s - s0).powf(rho - 1.0);
        left += k * (sr - s);
        right += k * (s - sl);
    }
    (left / h, right / h)
}

/// Nodal weights for ∫_{s₀}^{S} (S − s)^{α−1} v(s) ds / Γ(α), where `s` holds
/// the nodes s₀ < … < s_n and S = s_n.
pub fn row_weights(s: &[f64], alpha: f64, weight: DataWeight) -> Vec<f64> {
    let n = s.len() - 1;
    let mut c = vec![0.0; n + 1];
    if n == 0 {
        return c;
    }
    let target = s[n];
    let norm = 1.0 / gamma(alpha);
    for j in 0..n {
        let (l, r) = match weight {
            DataWeight::Plain => plain_pair(target - s[j], s[j + 1] - s[j], alpha),
            DataWeight::SingularStart { rho } => {
                singular_pair(s[0], s[j], s[j + 1], target, alpha, rho)
            }
        };
        c[j] += l * norm;
        c[j + 1] += r * norm;
    }
    c
}

/// Precomputed lower-triangular weight table: row n integrates from s₀ to s_n.
#[derive(Debug, Clone)]
pub struct ProductRule {
    alpha: f64,
    weight: DataWeight,
    rows: Vec<Vec<f64>>,
}

impl ProductRule {
    pub fn build(s: &[f64], alpha: f64, weight: DataWeight, exec: Execution) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain(format!(
                "integral order must lie in (0, 1], got {alpha}"
            )));
        }
        if let DataWeight::SingularStart { rho } = weight {
            if !(rho > 0.0 && rho < 1.0) {
                return Err(Error::Domain(format!(
                    "singular weight needs rho in (0, 1), got {rho}"
                )));
            }
        }
        if s.is_empty() {
            return Err(Error::Grid("empty grid".into()));
        }
        if s.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::Grid(
                "psi-space nodes must be strictly increasing".into(),
            ));
        }
        let rows = exec::map_indexed(exec, s.len(), |n| row_weights(&s[..=n], alpha, weight));
        Ok(ProductRule {
            alpha,
            weight,
            rows,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn weight(&self) -> DataWeight {
        self.weight
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.rows[n]
    }

    /// The integral at node `n`, summed left to right.
    pub fn apply_at(&self, values: &[f64], n: usize) -> f64 {
        self.rows[n]
            .iter()
            .zip(values)
            .fold(0.0, |acc, (c, v)| acc + c * v)
    }

    /// The integral at every node.
    pub fn apply(&self, values: &[f64], exec: Execution) -> Vec<f64> {
        assert_eq!(
            values.len(),
            self.rows.len(),
            "data length must match the grid"
        );
        exec::map_indexed(exec, self.rows.len(), |n| self.apply_at(values, n))
    }
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn uniform(n: usize, len: f64) -> Vec<f64> {
        (0..=n).map(|i| len * i as f64 / n as f64).collect()
    }

    #[test]
    fn plain_weights_are_nonnegative_and_sum_to_kernel_mass() {
        for alpha in [0.1, 0.3, 0.5, 0.9, 1.0] {
            let s = uniform(64, 1.3);
            let rule =
                ProductRule::build(&s, alpha, DataWeight::Plain, Execution::Sequential).unwrap();
            for n in 1..s.len() {
                let row = rule.row(n);
                assert!(row.iter().all(|&c| c >= 0.0));
                let total: f64 = row.iter().sum();
                assert_relative_eq!(
                    total,
                    s[n].powf(alpha) / gamma(alpha + 1.0),
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn singular_weights_are_nonnegative_and_exact_for_constants() {
        for (alpha, rho) in [(0.3, 0.5), (0.5, 0.75), (0.7, 0.97), (0.25, 0.3)] {
            let s = uniform(40, 0.8);
            let rule = ProductRule::build(
                &s,
                alpha,
                DataWeight::SingularStart { rho },
                Execution::Sequential,
            )
            .unwrap();
            for n in 1..s.len() {
                let row = rule.row(n);
                assert!(
                    row.iter().all(|&c| c >= 0.0),
                    "alpha={alpha} rho={rho} n={n}"
                );
                let total: f64 = row.iter().sum();
                let exact = gamma(rho) / gamma(alpha + rho) * s[n].powf(alpha + rho - 1.0);
                assert_relative_eq!(total, exact, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn nonuniform_grids_are_exact_for_linear_data() {
        let s = [0.0, 0.01, 0.05, 0.2, 0.21, 0.5, 0.9, 1.0];
        let alpha = 0.4;
        let rule = ProductRule::build(&s, alpha, DataWeight::Plain, Execution::Sequential).unwrap();
        let v: Vec<f64> = s.iter().map(|x| 2.0 + 3.0 * x).collect();
        for n in 0..s.len() {
            // I^α(2 + 3s) = 2 s^α/Γ(α+1) + 3 s^{α+1}/Γ(α+2)
            let exact = 2.0 * s[n].powf(alpha) / gamma(alpha + 1.0)
                + 3.0 * s[n].powf(alpha + 1.0) / gamma(alpha + 2.0);
            assert!((rule.apply_at(&v, n) - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_bad_orders_and_grids() {
        let s = uniform(4, 1.0);
        assert!(ProductRule::build(&s, 0.0, DataWeight::Plain, Execution::Sequential).is_err());
        assert!(ProductRule::build(&s, 1.2, DataWeight::Plain, Execution::Sequential).is_err());
        assert!(ProductRule::build(
            &[0.0, 0.5, 0.5],
            0.5,
            DataWeight::Plain,
            Execution::Sequential
        )
        .is_err());
    }
}
